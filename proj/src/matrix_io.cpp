#include "sclab/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace sclab {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double v = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::runtime_error("matrix file: non-numeric token '" + token + "'");
  return v;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string header;
  if (!std::getline(in, header) || header.empty())
    throw std::runtime_error("matrix file: empty or missing header: " + path.string());

  auto fields = split_csv_line(header);
  if (fields.size() != 2)
    throw std::runtime_error("matrix file: malformed header '" + header + "'");
  long rows = 0, cols = 0;
  try {
    size_t pos = 0;
    rows = std::stol(fields[0], &pos);
    if (pos != fields[0].size()) throw std::invalid_argument(fields[0]);
    cols = std::stol(fields[1], &pos);
    if (pos != fields[1].size()) throw std::invalid_argument(fields[1]);
  } catch (const std::exception&) {
    throw std::runtime_error("matrix file: malformed header '" + header + "'");
  }
  if (rows < 0 || cols < 0)
    throw std::runtime_error("matrix file: malformed header '" + header + "'");

  Eigen::MatrixXd m(rows, cols);
  std::string line;
  long r = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (r >= rows)
      throw std::runtime_error("matrix file: row-count mismatch (extra rows)");
    auto vals = split_csv_line(line);
    if (static_cast<long>(vals.size()) != cols)
      throw std::runtime_error("matrix file: expected " + std::to_string(cols) +
                               " values on row " + std::to_string(r) + ", got " +
                               std::to_string(vals.size()));
    for (long c = 0; c < cols; ++c) m(r, c) = parse_double(vals[c]);
    ++r;
  }
  if (r != rows)
    throw std::runtime_error("matrix file: row-count mismatch (declared " +
                             std::to_string(rows) + ", found " + std::to_string(r) + ")");
  return m;
}

}  // namespace sclab
