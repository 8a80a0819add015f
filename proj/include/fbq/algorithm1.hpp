#pragma once

#include <optional>
#include <utility>

#include "fbq/asymptotic.hpp"
#include "fbq/fbl.hpp"

namespace fbq {

struct SolverConfig {
  double conv_tol = 1e-4;      // max boundary change per outer iteration
  int max_outer_iters = 500;
  double rate_tol = 1e-8;      // nats
  double boundary_tol = 1e-8;  // gain
  QuadratureSpec quadrature;
  void validate() const;
};

// Exact per-region rate optimum: maximizes r * int f (1 - Omega) over
// [0, capacity(hi)] by golden-section search.
double optimal_rate(double lo, double hi, const ChannelModel& ch, const LinkParams& lp,
                    const SolverConfig& cfg = {});

// Closed-form rate approximation from the piecewise-linear Omega model.
// Falls back to maximizing the approximate objective when the stationarity
// equation has no bracketed root.
double approx_rate(double lo, double hi, const ChannelModel& ch, const LinkParams& lp,
                   const QuadratureSpec& spec = {});

// Second derivative of the region goodput in r (concave-convex shape).
double rate_curvature(double lo, double hi, double rate, const ChannelModel& ch,
                      const LinkParams& lp, const QuadratureSpec& spec = {});

// Rate at which the curvature changes sign.
double inflection_point(double lo, double hi, const ChannelModel& ch, const LinkParams& lp,
                        const QuadratureSpec& spec = {});

struct BoundaryUpdate {
  double phi;
  bool clamped;  // no sign change; nearest bracket endpoint returned
  bool merge;    // equal rates; boundary equation degenerate
};

// Boundary between two regions with rates r_prev < r_cur. Channel-free by
// construction: the condition only involves Omega at the candidate boundary.
BoundaryUpdate optimal_boundary(double r_prev, double r_cur, Bracket bracket,
                                const LinkParams& lp, double tol = 1e-10);

// Block coordinate descent: full rate sweep (i = 1..Phi), then boundary
// sweep (i = Phi..2), until boundaries move less than conv_tol.
std::pair<QuantizationScheme, GoodputReport> run_algorithm1(
    const ChannelModel& ch, const LinkParams& lp, int phi_count,
    const std::optional<std::vector<double>>& init_boundaries = std::nullopt,
    const SolverConfig& cfg = {});

}  // namespace fbq
