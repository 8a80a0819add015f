#include "fbq/asymptotic.hpp"

#include <cmath>
#include <limits>

namespace fbq {

double ergodic_capacity(const ChannelModel& ch, const LinkParams& lp,
                        const QuadratureSpec& spec) {
  lp.validate();
  double hi = ch.upper_truncation(spec.tail_mass);
  return integrate([&](double g) { return ch.pdf(g) * capacity(g, lp); }, 0.0, hi, spec);
}

FixedRateOptimum fixed_rate_optimum(const ChannelModel& ch, const LinkParams& lp,
                                    const QuadratureSpec& spec) {
  lp.validate();
  double trunc = ch.upper_truncation(spec.tail_mass);
  double r_max = capacity(trunc, lp);
  auto goodput = [&](double r) {
    return r * ch.survival(std::expm1(r) / lp.p_lin);
  };
  MaxResult m = maximize_1d(goodput, {0.0, r_max}, 1e-10);
  return {m.arg, m.value};
}

double epsilon_capacity(const ChannelModel& ch, const LinkParams& lp, double eps_out) {
  lp.validate();
  if (!(eps_out > 0) || !(eps_out < 1))
    throw std::domain_error("epsilon_capacity: eps_out must lie in (0,1)");
  return std::log1p(lp.p_lin * ch.inv_cdf(eps_out));
}

namespace {

// Runs the boundary recursion from a trial phi_1 and returns the landing cdf
// value minus one. Overshoots (cdf past 1 before the last region) count as
// positive residuals so the shooting bisection can bracket.
double recursion_residual(const ChannelModel& ch, const LinkParams& lp, int phi_count,
                          double phi1, std::vector<double>* out_boundaries) {
  double p = lp.p_lin;
  std::vector<double> b(phi_count);
  b[0] = phi1;
  double f_cur = ch.cdf(phi1);
  for (int i = 0; i < phi_count; ++i) {
    double phi_i = b[i];
    double phi_im1 = (i == 0) ? 0.0 : b[i - 1];
    double s = 1.0 + phi_i * p;
    double f_next = f_cur + (1.0 / p) * ch.pdf(phi_i) * s *
                    std::log(s / (1.0 + phi_im1 * p));
    if (i + 1 < phi_count) {
      if (f_next >= 1.0 - 1e-13) return 1.0;  // overshoot
      b[i + 1] = ch.inv_cdf(f_next);
    } else {
      if (out_boundaries) {
        *out_boundaries = b;
        out_boundaries->push_back(std::numeric_limits<double>::infinity());
      }
      return f_next - 1.0;
    }
    f_cur = f_next;
  }
  return 0.0;
}

}  // namespace

AsymptoticScheme asymptotic_quantizer(const ChannelModel& ch, const LinkParams& lp,
                                      int phi_count, const QuadratureSpec& spec) {
  lp.validate();
  if (phi_count < 1) throw std::invalid_argument("asymptotic_quantizer: Phi must be >= 1");
  double lo = 0.0, hi = ch.inv_cdf(0.99);
  double res_lo = recursion_residual(ch, lp, phi_count, lo, nullptr);
  double res_hi = recursion_residual(ch, lp, phi_count, hi, nullptr);
  if (!(res_lo <= 0.0) || !(res_hi >= 0.0))
    throw solver_failure("asymptotic_quantizer: no bracketing phi_1 found");
  double phi1 = find_root(
      [&](double x) { return recursion_residual(ch, lp, phi_count, x, nullptr); },
      {lo, hi}, 1e-13 * std::max(1.0, hi));

  AsymptoticScheme sch;
  std::vector<double> b;
  double res = recursion_residual(ch, lp, phi_count, phi1, &b);
  if (std::fabs(res) > 1e-8)
    throw solver_failure("asymptotic_quantizer: shooting did not land on F = 1");
  sch.boundaries = b;  // phi_1 .. phi_{Phi+1} with the sentinel at the back
  sch.rates.resize(phi_count);
  sch.outage = ch.cdf(b[0]);
  double f_cur = sch.outage;
  for (int i = 0; i < phi_count; ++i) {
    sch.rates[i] = std::log1p(lp.p_lin * b[i]);
    double f_next = (i + 1 < phi_count) ? ch.cdf(b[i + 1]) : 1.0;
    sch.goodput_nats += sch.rates[i] * (f_next - f_cur);
    f_cur = f_next;
  }
  (void)spec;
  return sch;
}

}  // namespace fbq
