// Integration tests for the command-line tool. Takes the binary path as
// argv[1]; exercises the documented subcommands, exit codes, and output
// determinism end to end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAIL: " << what << "\n";
  } else {
    std::cout << "ok: " << what << "\n";
  }
}

int run(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: test_cli <path-to-sclab-binary>\n";
    return 1;
  }
  const std::string cli = argv[1];
  fs::path work = fs::temp_directory_path() / "sclab_cli_test";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string w = work.string();

  expect(run(cli + " --help > " + w + "/help.txt") == 0, "--help exits 0");
  expect(run(cli + " no-such-command >/dev/null 2>&1") == 2, "unknown subcommand exits 2");
  expect(run(cli + " gen-data >/dev/null 2>&1") == 2, "missing required flag exits 2");
  expect(run(cli + " solve --dict " + w + "/missing.mat --data " + w +
             "/missing.mat >/dev/null 2>&1") == 1,
         "I/O failure exits 1");

  expect(run(cli + " gen-dict --kind gaussian --n 16 --m 32 --seed 3 --out " + w +
             "/d.mat >/dev/null") == 0,
         "gen-dict gaussian");
  expect(run(cli + " gen-dict --kind fourier --n 16 --m 32 --seed 3 --out " + w +
             "/df.mat >/dev/null") == 0,
         "gen-dict fourier");
  expect(run(cli + " gen-data --dict " + w + "/d.mat --rho 0.15 --sigma 10 --count 3 --seed 4 " +
             "--lambda 0.01 --out " + w + "/data >/dev/null") == 0,
         "gen-data");
  expect(fs::exists(work / "data" / "X.mat") && fs::exists(work / "data" / "metadata.json") &&
             fs::exists(work / "data" / "Z_true.mat"),
         "dataset files exist");

  expect(run(cli + " solve --dict " + w + "/d.mat --data " + w + "/data/X.mat --lambda 0.01 " +
             "--method fista --iters 50 --output-dir " + w + "/solve >/dev/null") == 0,
         "solve");
  {
    std::string csv = slurp(work / "solve" / "trace_0.csv");
    expect(csv.rfind("iteration,cost,cost_gap,support_size\n", 0) == 0, "trace csv header");
    expect(std::count(csv.begin(), csv.end(), '\n') == 52, "trace csv has 51 rows");
  }

  expect(run(cli + " train --dict " + w + "/d.mat --kind facnet --depth 1 --rho 0.15 " +
             "--lambda 0.01 --steps 20 --batch-size 16 --eval-every 10 --test-samples 20 " +
             "--seed 5 --output-dir " + w + "/model >/dev/null") == 0,
         "train facnet");
  expect(fs::exists(work / "model" / "model.json") && fs::exists(work / "model" / "A_0.mat") &&
             fs::exists(work / "model" / "curve.csv"),
         "model files exist");

  expect(run(cli + " eval --model " + w + "/model --dict " + w + "/d.mat --data " + w +
             "/data/X.mat --lambda 0.01 > " + w + "/eval.txt") == 0,
         "eval");
  expect(slurp(work / "eval.txt").find("mean test cost gap") != std::string::npos, "eval output");

  expect(run(cli + " gap --dict " + w + "/d.mat --rho 0.15 --lambda 0.01 --iters 20 --seed 6 " +
             "--out " + w + "/gap.csv >/dev/null") == 0,
         "gap");
  expect(slurp(work / "gap.csv").rfind("iteration,thm_lhs", 0) == 0, "gap csv header");

  // determinism: identical mc-verify reruns are byte identical
  expect(run(cli + " mc-verify --seed 42 --output-dir " + w + "/mv1 > " + w + "/mv1.txt") == 0,
         "mc-verify run 1");
  expect(run(cli + " mc-verify --seed 42 --output-dir " + w + "/mv2 > " + w + "/mv2.txt") == 0,
         "mc-verify run 2");
  expect(!slurp(work / "mv1" / "mc_reports.csv").empty() &&
             slurp(work / "mv1" / "mc_reports.csv") == slurp(work / "mv2" / "mc_reports.csv"),
         "mc-verify reports byte identical");
  expect(slurp(work / "mv1.txt") == slurp(work / "mv2.txt"), "mc-verify stdout identical");
  expect(fs::exists(work / "mv1" / "config.resolved.json"), "config echo exists");

  // config file + flag override
  {
    std::ofstream cfg(work / "exp.json");
    cfg << "{\"n\": 16, \"m\": 32, \"gap_iters\": 10, \"gap_seeds\": 2, \"seed\": 9,\n"
        << " \"rho\": 0.15, \"output_dir\": \"" << w << "/figgap_file\"}\n";
  }
  expect(run(cli + " fig-gap --config " + w + "/exp.json --output-dir " + w +
             "/figgap >/dev/null") == 0,
         "fig-gap with config file and flag override");
  expect(fs::exists(work / "figgap" / "gap_gaussian.csv") &&
             !fs::exists(work / "figgap_file" / "gap_gaussian.csv"),
         "flag overrides config file output_dir");

  if (failures == 0) std::cout << "all cli checks passed\n";
  return failures == 0 ? 0 : 1;
}
