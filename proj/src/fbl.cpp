#include "fbq/fbl.hpp"

#include <cmath>

namespace fbq {

void LinkParams::validate() const {
  if (n < 1) throw std::invalid_argument("LinkParams: n must be >= 1");
  if (!(p_lin > 0)) throw std::invalid_argument("LinkParams: p_lin must be positive");
}

void QuantizationScheme::validate() const {
  if (boundaries.size() != rates.size() + 1 || rates.empty())
    throw std::invalid_argument("QuantizationScheme: need Phi rates and Phi+1 boundaries");
  for (size_t i = 0; i + 1 < boundaries.size(); ++i)
    if (!(boundaries[i + 1] >= boundaries[i]))
      throw std::invalid_argument("QuantizationScheme: boundaries must be nondecreasing");
  if (!(boundaries.front() >= 0))
    throw std::invalid_argument("QuantizationScheme: boundaries must be nonnegative");
  for (double r : rates)
    if (!(r >= 0)) throw std::invalid_argument("QuantizationScheme: rates must be nonnegative");
}

double capacity(double gamma, const LinkParams& lp) {
  return std::log1p(lp.p_lin * gamma);
}

double dispersion(double gamma, const LinkParams& lp) {
  double s = 1.0 + lp.p_lin * gamma;
  return 1.0 - 1.0 / (s * s);
}

double omega(double gamma, double rate, const LinkParams& lp) {
  double v = dispersion(gamma, lp);
  if (v <= 0.0) return rate > 0.0 ? 1.0 : 0.0;
  double arg = (capacity(gamma, lp) - rate) * std::sqrt(lp.n / v);
  return gauss_q(arg);
}

double achievable_rate(const LinkParams& lp, double gamma, double eps) {
  return capacity(gamma, lp) -
         std::sqrt(dispersion(gamma, lp) / lp.n) * gauss_q_inv(eps);
}

double achievable_rate_clamped(const LinkParams& lp, double gamma, double eps) {
  return std::max(0.0, achievable_rate(lp, gamma, eps));
}

namespace {

struct ClippedRegion {
  double lo, hi;
  bool empty;
};

ClippedRegion clip_region(const Region& rg, const ChannelModel& ch,
                          const QuadratureSpec& spec) {
  if (!(rg.lo >= 0) || !(rg.hi >= rg.lo))
    throw std::invalid_argument("region: need 0 <= lo <= hi");
  double hi = rg.hi;
  double trunc = ch.upper_truncation(spec.tail_mass);
  if (!std::isfinite(hi) || hi > trunc) hi = trunc;
  return {rg.lo, hi, !(hi > rg.lo)};
}

// Omega transitions over a window of width ~1/|b| around a = (e^r - 1)/P;
// splitting panels there speeds the adaptive quadrature up considerably.
double integrate_region(const Region& rg, const ChannelModel& ch, const LinkParams& lp,
                        const QuadratureSpec& spec, bool success_side) {
  ClippedRegion cr = clip_region(rg, ch, spec);
  if (cr.empty) return 0.0;
  auto f = [&](double g) {
    double w = omega(g, rg.rate, lp);
    return ch.pdf(g) * (success_side ? 1.0 - w : w);
  };
  if (rg.rate <= 0.0) return integrate(f, cr.lo, cr.hi, spec);
  double a = std::expm1(rg.rate) / lp.p_lin;
  double b = lp.p_lin * std::sqrt(lp.n / (2.0 * M_PI * std::expm1(2.0 * rg.rate)));
  double half = 0.5 / b;
  return integrate_split(f, cr.lo, cr.hi, {a - half, a, a + half}, spec);
}

}  // namespace

double region_success_mass(const Region& rg, const ChannelModel& ch, const LinkParams& lp,
                           const QuadratureSpec& spec) {
  return integrate_region(rg, ch, lp, spec, true);
}

double region_goodput(const Region& rg, const ChannelModel& ch, const LinkParams& lp,
                      const QuadratureSpec& spec) {
  if (rg.rate <= 0.0) return 0.0;
  return rg.rate * region_success_mass(rg, ch, lp, spec);
}

double region_cep(const Region& rg, const ChannelModel& ch, const LinkParams& lp,
                  const QuadratureSpec& spec) {
  ClippedRegion cr = clip_region(rg, ch, spec);
  if (cr.empty) return 0.0;
  if (rg.rate <= 0.0) return ch.survival(rg.lo) - ch.survival(cr.hi);
  return integrate_region(rg, ch, lp, spec, false);
}

GoodputReport scheme_totals(const QuantizationScheme& scheme, const ChannelModel& ch,
                            const LinkParams& lp, const QuadratureSpec& spec) {
  scheme.validate();
  lp.validate();
  GoodputReport rep;
  int phi = scheme.region_count();
  rep.per_region_goodput.resize(phi);
  rep.per_region_cep.resize(phi);
  for (int i = 0; i < phi; ++i) {
    Region rg{scheme.boundaries[i], scheme.boundaries[i + 1], scheme.rates[i]};
    rep.per_region_goodput[i] = region_goodput(rg, ch, lp, spec);
    rep.per_region_cep[i] = region_cep(rg, ch, lp, spec);
    rep.total_goodput_nats += rep.per_region_goodput[i];
    rep.total_cep += rep.per_region_cep[i];
  }
  rep.total_goodput_bpcu = nats_to_bpcu(rep.total_goodput_nats);
  return rep;
}

}  // namespace fbq
