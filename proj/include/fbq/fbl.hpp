#pragma once

#include <cmath>
#include <vector>

#include "fbq/channel.hpp"
#include "fbq/numerics.hpp"

namespace fbq {

// Natural log of 2; rates are carried in nats per channel use internally and
// converted to bits (bpcu) only at reporting boundaries.
inline constexpr double kLn2 = 0.6931471805599453094;
inline double nats_to_bpcu(double r) { return r / kLn2; }

struct LinkParams {
  int n;         // blocklength in channel uses
  double p_lin;  // SNR as a linear power ratio
  void validate() const;
};

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }

// One quantization region [lo, hi) with its transmission rate (nats/use).
// hi may be +inf; integrals truncate it at the channel tail.
struct Region {
  double lo;
  double hi;
  double rate;
};

struct QuantizationScheme {
  std::vector<double> boundaries;  // phi_1 .. phi_{Phi+1}; front 0, back may be inf
  std::vector<double> rates;       // r_1 .. r_Phi, nats/use
  int region_count() const { return static_cast<int>(rates.size()); }
  void validate() const;
};

struct IterRecord {
  std::vector<double> boundaries;
  std::vector<double> rates;
  double goodput_nats;
  double cep;
};

struct GoodputReport {
  std::vector<double> per_region_goodput;  // nats/use
  std::vector<double> per_region_cep;
  double total_goodput_nats = 0.0;
  double total_goodput_bpcu = 0.0;
  double total_cep = 0.0;
  int iterations = 0;
  std::vector<IterRecord> trace;
  bool converged = false;
};

// Instantaneous capacity ln(1 + P*gamma), nats/use.
double capacity(double gamma, const LinkParams& lp);

// Channel dispersion V(gamma) = 1 - (1 + P*gamma)^{-2}, nats^2/use.
double dispersion(double gamma, const LinkParams& lp);

// Codeword error probability Q((C - r) * sqrt(n / V)). At gamma = 0 the
// limit convention is 1 for r > 0 and 0 for r = 0.
double omega(double gamma, double rate, const LinkParams& lp);

// Normal-approximation rate C - sqrt(V/n) Q^{-1}(eps); may be negative.
double achievable_rate(const LinkParams& lp, double gamma, double eps);
double achievable_rate_clamped(const LinkParams& lp, double gamma, double eps);

// r * int f(g) (1 - Omega(g, r)) dg over the region.
double region_goodput(const Region& rg, const ChannelModel& ch, const LinkParams& lp,
                      const QuadratureSpec& spec = {});

// int f(g) Omega(g, r) dg. A zero rate means no transmission and, by
// convention, counts the whole region mass as error.
double region_cep(const Region& rg, const ChannelModel& ch, const LinkParams& lp,
                  const QuadratureSpec& spec = {});

// int f(g) (1 - Omega(g, r)) dg; shared by the goodput and the optimizers.
double region_success_mass(const Region& rg, const ChannelModel& ch, const LinkParams& lp,
                           const QuadratureSpec& spec = {});

GoodputReport scheme_totals(const QuantizationScheme& scheme, const ChannelModel& ch,
                            const LinkParams& lp, const QuadratureSpec& spec = {});

}  // namespace fbq
