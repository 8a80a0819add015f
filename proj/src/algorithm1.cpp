#include "fbq/algorithm1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fbq {

void SolverConfig::validate() const {
  if (!(conv_tol > 0) || !(rate_tol > 0) || !(boundary_tol > 0) || max_outer_iters < 1)
    throw std::invalid_argument("SolverConfig: all tolerances and caps must be positive");
  quadrature.validate();
}

namespace {

double clip_hi(double hi, const ChannelModel& ch, const QuadratureSpec& spec) {
  double trunc = ch.upper_truncation(spec.tail_mass);
  return (!std::isfinite(hi) || hi > trunc) ? trunc : hi;
}

double region_mass(const ChannelModel& ch, double lo, double hi) {
  return ch.survival(lo) - ch.survival(hi);
}

// Integrand of the first-derivative kernel H(gamma, r); negative valued.
double h_kernel(double g, double r, const ChannelModel& ch, const LinkParams& lp) {
  double v = dispersion(g, lp);
  if (v <= 0.0) return 0.0;
  double c = capacity(g, lp);
  double z2 = lp.n * (c - r) * (c - r) / (2.0 * v);
  if (z2 > 700.0) return 0.0;
  return -std::exp(-z2) * ch.pdf(g) * std::sqrt(lp.n / v) / std::sqrt(2.0 * M_PI);
}

double h_integral(double lo, double hi, double r, const ChannelModel& ch,
                  const LinkParams& lp, const QuadratureSpec& spec) {
  double a = std::expm1(r) / lp.p_lin;
  double b = lp.p_lin * std::sqrt(lp.n / (2.0 * M_PI * std::expm1(2.0 * r)));
  double half = 0.5 / b;
  return integrate_split([&](double g) { return h_kernel(g, r, ch, lp); }, lo, hi,
                         {a - half, a, a + half}, spec);
}

}  // namespace

double optimal_rate(double lo, double hi, const ChannelModel& ch, const LinkParams& lp,
                    const SolverConfig& cfg) {
  lp.validate();
  double hi_c = clip_hi(hi, ch, cfg.quadrature);
  if (!(region_mass(ch, lo, hi_c) > 1e-14))
    throw degenerate_region_error("optimal_rate: region carries no probability mass");
  double r_max = capacity(hi_c, lp);
  auto objective = [&](double r) {
    return r * region_success_mass({lo, hi, r}, ch, lp, cfg.quadrature);
  };
  MaxResult m = maximize_1d(objective, {0.0, r_max}, cfg.rate_tol);
  return m.arg;
}

double approx_rate(double lo, double hi, const ChannelModel& ch, const LinkParams& lp,
                   const QuadratureSpec& spec) {
  lp.validate();
  double hi_c = clip_hi(hi, ch, spec);
  if (!(region_mass(ch, lo, hi_c) > 1e-14))
    throw degenerate_region_error("approx_rate: region carries no probability mass");
  double p = lp.p_lin;

  // Piecewise-linear Omega pieces: width-1/|b| ramp centred on a(r).
  struct Pieces {
    double a, b, d1, d2;
  };
  auto pieces = [&](double r) {
    Pieces q;
    q.a = std::expm1(r) / p;
    q.b = -p * std::sqrt(lp.n / (2.0 * M_PI * std::expm1(2.0 * r)));
    q.d1 = 0.5 / q.b + q.a;  // b < 0, so d1 < a < d2
    q.d2 = -0.5 / q.b + q.a;
    return q;
  };
  auto step = [](double x) { return x >= 0.0 ? 1.0 : 0.0; };

  // Approximate success mass under the linearized Omega.
  auto success_approx = [&](double r) {
    Pieces q = pieces(r);
    double m2 = step(hi_c - q.d2) * std::max(0.0, ch.cdf(hi_c) - ch.cdf(std::max(q.d2, lo)));
    double m1 = 0.0;
    if (step(hi_c - q.d1) > 0.0 && step(q.d2 - lo) > 0.0) {
      double wl = std::max(q.d1, lo), wh = std::min(q.d2, hi_c);
      if (wh > wl) {
        double mass = std::max(0.0, ch.cdf(wh) - ch.cdf(wl));
        if (mass > 1e-300) {
          double em = ch.truncated_mean(wl, wh, spec);
          m1 = mass * (0.5 + q.b * (q.a - em));
        }
      }
    }
    return m1 + m2;
  };

  // Stationarity residual with the unit-step structure as stated.
  auto residual = [&](double r) {
    Pieces q = pieces(r);
    double m2 = step(hi_c - q.d2) * std::max(0.0, ch.cdf(hi_c) - ch.cdf(std::max(q.d2, lo)));
    double m1t = 0.0;
    if (step(hi_c - q.d1) > 0.0 && step(q.d2 - lo) > 0.0) {
      double wl = std::max(q.d1, lo), wh = std::min(q.d2, hi_c);
      if (wh > wl) {
        double mass = std::max(0.0, ch.cdf(wh) - ch.cdf(wl));
        if (mass > 1e-300) {
          double em = ch.truncated_mean(wl, wh, spec);
          m1t = mass * (0.5 + q.b * (q.a - em));
        }
      }
    }
    double ih = h_integral(lo, hi_c, r, ch, lp, spec);
    return m1t + r * m2 + r * ih;
  };

  double r_lo = 1e-5, r_hi = capacity(hi_c, lp);
  const int scan = 40;
  double prev_r = r_lo, prev_v = residual(r_lo);
  for (int i = 1; i <= scan; ++i) {
    double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / scan);
    double v = residual(r);
    if (prev_v == 0.0) return prev_r;
    if (prev_v * v < 0.0) return find_root(residual, {prev_r, r}, 1e-10);
    prev_r = r;
    prev_v = v;
  }
  // No bracketed root: maximize the approximate objective instead.
  MaxResult m = maximize_1d([&](double r) { return r * success_approx(r); },
                            {0.0, r_hi}, 1e-9);
  return m.arg;
}

double rate_curvature(double lo, double hi, double rate, const ChannelModel& ch,
                      const LinkParams& lp, const QuadratureSpec& spec) {
  lp.validate();
  if (!(rate >= 0)) throw std::invalid_argument("rate_curvature: rate must be nonnegative");
  double hi_c = clip_hi(hi, ch, spec);
  double ih = h_integral(lo, hi_c, rate, ch, lp, spec);
  double a = std::expm1(rate) / lp.p_lin;
  double b = lp.p_lin * std::sqrt(lp.n / (2.0 * M_PI * std::expm1(2.0 * rate)));
  double half = 0.5 / b;
  double ihw = integrate_split(
      [&](double g) {
        double v = dispersion(g, lp);
        if (v <= 0.0) return 0.0;
        return h_kernel(g, rate, ch, lp) * lp.n * (capacity(g, lp) - rate) / v;
      },
      lo, hi_c, {a - half, a, a + half}, spec);
  return 2.0 * ih + rate * ihw;
}

double inflection_point(double lo, double hi, const ChannelModel& ch, const LinkParams& lp,
                        const QuadratureSpec& spec) {
  double hi_c = clip_hi(hi, ch, spec);
  double r_hi = 3.0 * capacity(hi_c, lp);
  auto curv = [&](double r) { return rate_curvature(lo, hi, r, ch, lp, spec); };
  double r_lo = 1e-3;
  double prev_r = r_lo, prev_v = curv(r_lo);
  const int scan = 60;
  for (int i = 1; i <= scan; ++i) {
    double r = r_lo + (r_hi - r_lo) * i / scan;
    double v = curv(r);
    if (prev_v * v <= 0.0) return find_root(curv, {prev_r, r}, 1e-9);
    prev_r = r;
    prev_v = v;
  }
  throw no_root_error("inflection_point: curvature does not change sign in bracket");
}

BoundaryUpdate optimal_boundary(double r_prev, double r_cur, Bracket bracket,
                                const LinkParams& lp, double tol) {
  lp.validate();
  bracket.validate();
  if (!(r_prev >= 0) || !(r_cur >= 0))
    throw std::invalid_argument("optimal_boundary: rates must be nonnegative");
  if (std::fabs(r_prev - r_cur) <= 1e-14) return {bracket.lo, false, true};
  if (r_prev > r_cur)
    throw std::invalid_argument("optimal_boundary: requires r_prev < r_cur");
  auto g = [&](double phi) {
    return r_prev * (1.0 - omega(phi, r_prev, lp)) - r_cur * (1.0 - omega(phi, r_cur, lp));
  };
  // Both goodput densities vanish at gamma = 0, so the endpoint can read as a
  // spurious root. Scan for the interior + -> - crossing instead. The sign
  // change lives near the capacity-matching gains a(r) = (e^r - 1)/P, whose
  // transition window can be far narrower than the bracket; add a dense scan
  // there so a wide bracket cannot step over it.
  const int kScan = 64;
  std::vector<double> xs;
  xs.reserve(2 * kScan + 2);
  for (int i = 0; i <= kScan; ++i)
    xs.push_back(bracket.lo + (bracket.hi - bracket.lo) * i / kScan);
  auto width = [&](double r) {
    return 0.5 / (lp.p_lin * std::sqrt(lp.n / (2.0 * M_PI * std::expm1(2.0 * r))));
  };
  double wlo = std::max(bracket.lo, std::expm1(r_prev) / lp.p_lin - 3.0 * width(r_prev));
  double whi = std::min(bracket.hi, std::expm1(r_cur) / lp.p_lin + 3.0 * width(r_cur));
  if (whi > wlo)
    for (int i = 0; i <= kScan; ++i) xs.push_back(wlo + (whi - wlo) * i / kScan);
  std::sort(xs.begin(), xs.end());
  std::vector<double> gs(xs.size());
  size_t imax = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    gs[i] = g(xs[i]);
    if (gs[i] > gs[imax]) imax = i;
  }
  if (!(gs[imax] > 0.0)) return {bracket.lo, true, false};  // high rate wins everywhere
  for (size_t i = imax + 1; i < xs.size(); ++i) {
    if (gs[i] == 0.0) return {xs[i], false, false};
    if (gs[i] < 0.0)
      return {find_root(g, {xs[i - 1], xs[i]}, tol), false, false};
  }
  return {bracket.hi, true, false};  // low rate wins everywhere
}

std::pair<QuantizationScheme, GoodputReport> run_algorithm1(
    const ChannelModel& ch, const LinkParams& lp, int phi_count,
    const std::optional<std::vector<double>>& init_boundaries, const SolverConfig& cfg) {
  lp.validate();
  cfg.validate();
  if (phi_count < 1) throw std::invalid_argument("run_algorithm1: Phi must be >= 1");
  const double inf = std::numeric_limits<double>::infinity();
  double trunc = ch.upper_truncation(cfg.quadrature.tail_mass);

  QuantizationScheme sch;
  sch.boundaries.assign(phi_count + 1, 0.0);
  sch.boundaries.back() = inf;
  if (init_boundaries) {
    if (static_cast<int>(init_boundaries->size()) != phi_count + 1)
      throw std::invalid_argument("run_algorithm1: init boundaries must have Phi+1 entries");
    sch.boundaries = *init_boundaries;
    sch.boundaries.front() = 0.0;
    sch.boundaries.back() = inf;
  } else {
    for (int i = 1; i < phi_count; ++i)
      sch.boundaries[i] = ch.inv_cdf(static_cast<double>(i) / phi_count);
  }
  sch.rates.assign(phi_count, 0.0);

  GoodputReport rep;
  auto rate_sweep = [&]() {
    for (int i = 0; i < phi_count; ++i) {
      try {
        sch.rates[i] = optimal_rate(sch.boundaries[i], sch.boundaries[i + 1], ch, lp, cfg);
      } catch (const degenerate_region_error&) {
        sch.rates[i] = (i > 0) ? sch.rates[i - 1] : 0.0;  // collapsed region
      }
    }
  };

  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    rate_sweep();
    std::vector<double> old = sch.boundaries;
    for (int j = phi_count - 1; j >= 1; --j) {
      double lo = sch.boundaries[j - 1];
      double hi = std::isfinite(sch.boundaries[j + 1]) ? sch.boundaries[j + 1] : trunc;
      if (!(hi > lo)) continue;
      BoundaryUpdate u = optimal_boundary(sch.rates[j - 1], sch.rates[j], {lo, hi}, lp,
                                          cfg.boundary_tol);
      if (!u.merge) sch.boundaries[j] = u.phi;
    }
    double delta = 0.0;
    for (int j = 1; j < phi_count; ++j)
      delta = std::max(delta, std::fabs(sch.boundaries[j] - old[j]));

    GoodputReport snap = scheme_totals(sch, ch, lp, cfg.quadrature);
    if (!std::isfinite(snap.total_goodput_nats)) {
      rep.iterations = iter;
      throw solver_failure("run_algorithm1: non-finite objective");
    }
    rep.trace.push_back({sch.boundaries, sch.rates, snap.total_goodput_nats, snap.total_cep});
    rep.iterations = iter;
    if (phi_count == 1 || delta < cfg.conv_tol) {
      rep.converged = true;
      break;
    }
  }
  rate_sweep();
  GoodputReport fin = scheme_totals(sch, ch, lp, cfg.quadrature);
  fin.iterations = rep.iterations;
  fin.converged = rep.converged;
  fin.trace = std::move(rep.trace);
  return {sch, fin};
}

}  // namespace fbq
