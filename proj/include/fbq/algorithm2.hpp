#pragma once

#include "fbq/algorithm1.hpp"

namespace fbq {

struct AugLagConfig {
  double rho0 = 1.0;
  double rho_cap = 1e12;
  int max_inner_iters = 40;
  double phi_tol = 1e-6;  // inner-loop boundary movement tolerance
  // Use the multiplier updates exactly as printed (outer square and sign
  // flip on the ordering penalty) instead of the standard clipped form.
  bool paper_exact_updates = false;
};

struct Solver2Config {
  SolverConfig base;
  AugLagConfig auglag;
  // Allocation exactly as printed: alpha = eps_m / sum(E_i^2). The default
  // normalizes the inverse-square weights so the shares sum to eps_m.
  bool paper_exact_alloc = false;
  // Rate reduction by fixed decrements of tau_rate instead of bisection.
  bool paper_exact_decrement = false;
  double tau_rate = 1e-3;
  int max_restarts = 5;
  void validate() const;
};

struct CepBudget {
  double eps_m = 0.0;
  std::vector<double> per_region;
};

// Per-region error-probability shares, inversely proportional to the squared
// truncated mean of the gain within each region.
std::vector<double> allocate_cep(const std::vector<double>& boundaries,
                                 const ChannelModel& ch, double eps_m,
                                 bool paper_exact = false, const QuadratureSpec& spec = {});

enum class RateStatus { Ok, Reduced, InfeasibleRegion };

struct ConstrainedRate {
  double rate;          // nats/use; 0 means no transmission in the region
  double realized_cep;  // under the rate-0 convention this is the region mass
  RateStatus status;
};

// Unconstrained optimum first; if it exceeds the share, back the rate off
// until the region error probability meets it. InfeasibleRegion means even
// silence (rate 0, cep = region mass) violates the share.
ConstrainedRate constrained_rate(double lo, double hi, double eps_i, const ChannelModel& ch,
                                 const LinkParams& lp, const Solver2Config& cfg = {});

// Local augmented objective for moving one boundary: goodput of the two
// adjacent regions minus quadratic penalties on their error-budget slack
// (scaled by beta) and on boundary ordering.
double augmented_objective(double phi, int j, const QuantizationScheme& sch,
                           const std::vector<double>& eps, double beta, double rho,
                           const std::vector<double>& lambda, const std::vector<double>& mu,
                           const ChannelModel& ch, const LinkParams& lp,
                           const Solver2Config& cfg = {});

struct Algorithm2Result {
  QuantizationScheme scheme;
  CepBudget budget;
  GoodputReport report;
  bool feasible = false;
};

// Outer loop: reallocate shares, rate pass with per-region backoff, then an
// augmented-Lagrangian sweep over the interior boundaries. An infeasible
// region triggers an equal-mass boundary perturbation and a restart.
Algorithm2Result run_algorithm2(const ChannelModel& ch, const LinkParams& lp, int phi_count,
                                double eps_m,
                                const std::optional<std::vector<double>>& init_boundaries =
                                    std::nullopt,
                                const Solver2Config& cfg = {});

}  // namespace fbq
