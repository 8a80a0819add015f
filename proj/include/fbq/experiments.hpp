#pragma once

#include <cstdint>
#include <string>

#include "fbq/oracle.hpp"

namespace fbq {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plain-text key = value configuration with [section] headers. Lists are
// comma- or space-separated; the blocklength token "inf" selects the
// infinite-blocklength baselines.
struct ExperimentConfig {
  // [channel]
  std::string channel_kind = "rician";  // rayleigh | rician
  double k = 10.0;
  std::string k_unit = "linear";  // linear | db
  double mean_power = 1.0;
  // [sweep]  (P in dB externally, linear internally)
  std::vector<int> n_list{128};  // 0 denotes infinite blocklength
  std::vector<double> p_db_list{10.0};
  std::vector<int> phi_list{4};
  std::vector<double> eps_list;  // total error-probability budgets; may be empty
  // [solver]
  Solver2Config solver;
  // [curves]
  double curve_gamma = 1.0;
  std::vector<double> curve_boundaries;  // region edges for the goodput curves
  int curve_points = 200;
  double curve_rmax = 0.0;  // 0 -> capacity at the 0.999 gain quantile
  // [validate]
  std::string validate_mode = "grid";  // grid | mc
  GridSpec grid;
  long long mc_draws = 1000000;
  // [output] / [run]
  std::string out_dir = ".";
  std::uint64_t seed = 12345;
  int jobs = 1;
  bool paper_exact = false;
  bool timings = false;  // wall_time_ms stays NA unless enabled

  void validate() const;
  ChannelModel make_channel() const;
};

ExperimentConfig load_config(const std::string& path);

// Each command returns its process exit code: 0 success, 1 when at least one
// sweep point failed or was unexpectedly infeasible. Configuration problems
// throw config_error (exit code 2 at the CLI boundary).
int cmd_curves(const ExperimentConfig& cfg);
int cmd_optimize(const ExperimentConfig& cfg);
int cmd_optimize_constrained(const ExperimentConfig& cfg);
int cmd_validate(const ExperimentConfig& cfg);

}  // namespace fbq
