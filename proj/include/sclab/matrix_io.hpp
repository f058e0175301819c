#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace sclab {

// Portable matrix file: UTF-8 text, line 1 is "rows,cols", then `rows` lines of
// `cols` comma-separated float64 values written in shortest round-trip form.
// The round trip is bit-exact.
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);
double parse_double(const std::string& token);

}  // namespace sclab
