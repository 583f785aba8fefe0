#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracopt/grid.hpp"
#include "fracopt/rearrange.hpp"

namespace fracopt {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string domain;   // interval:a,b,n | rect:wx,wy,nx,ny | disk:r,n
  double s = 0.0;       // required
  std::string weights;  // w:v1@f1,v2@f2,...
  std::string mode;     // solve | minimize | maximize | verify-suite
  double tol = 1e-10;
  int max_iter = 10000;
  int restarts = 1;
  unsigned long long seed = 42;
  std::string out_dir = ".";
  bool dump_matrix = false;

  bool help_requested = false;
  std::string help_text;
};

// Flags mirror the config keys; --config loads JSON defaults that explicit
// flags override. Throws UsageError naming the offending token.
ExperimentConfig parse_config(const std::vector<std::string>& args);

std::shared_ptr<const Grid> make_grid(const std::string& spec);
std::vector<std::pair<double, double>> parse_weight_entries(
    const std::string& spec);

// Writes results.csv, trace.csv (optimization modes), report.txt, and
// optionally A.bin under out_dir. Returns 0, or 2 when the report contains a
// FAIL line.
int run_experiment(const ExperimentConfig& cfg);

// parse + run; usage errors print to stderr and return 1
int experiment_main(int argc, char** argv);

}  // namespace fracopt
