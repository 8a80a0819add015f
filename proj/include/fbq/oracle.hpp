#pragma once

#include <cstdint>

#include "fbq/algorithm2.hpp"

namespace fbq {

struct GridSpec {
  int boundary_grid = 60;   // candidate points per interior boundary
  int refine_levels = 2;    // zoom passes around the incumbent
  double quantile_lo = 1e-4;
  double quantile_hi = 1.0 - 1e-4;
  void validate() const;
};

struct OracleResult {
  QuantizationScheme scheme;
  double goodput_nats = 0.0;
  double total_cep = 0.0;
};

// Exhaustive search over boundary combinations with the per-region rate set
// to its conditional optimum; reference answer for the iterative solvers.
OracleResult grid_search(const ChannelModel& ch, const LinkParams& lp, int phi_count,
                         const GridSpec& grid = {}, const SolverConfig& cfg = {});

// Same search under a total error-probability budget: shares are allocated
// per cell and rates backed off to respect them; infeasible combinations are
// discarded.
OracleResult grid_search_constrained(const ChannelModel& ch, const LinkParams& lp,
                                     int phi_count, double eps_m, const GridSpec& grid = {},
                                     const Solver2Config& cfg = {});

struct McSpec {
  long long draws = 1000000;
  std::uint64_t seed = 12345;
  int threads = 1;
};

struct McEstimate {
  double goodput_nats = 0.0;
  double std_error = 0.0;
};

// Counter-based simulation of the scheme: draw a gain, pick the region rate,
// flip the decoding coin with probability Omega. Block sums keep the result
// independent of the thread count.
McEstimate monte_carlo_goodput(const QuantizationScheme& scheme, const ChannelModel& ch,
                               const LinkParams& lp, const McSpec& mc = {});

}  // namespace fbq
