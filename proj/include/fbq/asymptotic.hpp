#pragma once

#include "fbq/fbl.hpp"

namespace fbq {

class solver_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Infinite-blocklength quantizer: boundaries phi_1..phi_{Phi+1} with
// phi_0 = 0, rates r_i = ln(1 + P*phi_i). Outage region is (0, phi_1).
struct AsymptoticScheme {
  std::vector<double> boundaries;  // phi_1 .. phi_{Phi+1}
  std::vector<double> rates;       // nats/use
  double goodput_nats = 0.0;
  double outage = 0.0;  // F(phi_1)
};

// E[ln(1 + P*gamma)], nats/use.
double ergodic_capacity(const ChannelModel& ch, const LinkParams& lp,
                        const QuadratureSpec& spec = {});

// Phi = 1, n = inf baseline: maximize r * (1 - F((e^r - 1)/P)).
struct FixedRateOptimum {
  double rate;
  double goodput_nats;
};
FixedRateOptimum fixed_rate_optimum(const ChannelModel& ch, const LinkParams& lp,
                                    const QuadratureSpec& spec = {});

// ln(1 + P * F^{-1}(eps_out)).
double epsilon_capacity(const ChannelModel& ch, const LinkParams& lp, double eps_out);

// Forward recursion on the boundary stationarity condition, shooting on phi_1
// until the landing cdf value reaches 1.
AsymptoticScheme asymptotic_quantizer(const ChannelModel& ch, const LinkParams& lp,
                                      int phi_count, const QuadratureSpec& spec = {});

}  // namespace fbq
