#include "fbq/algorithm2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbq {

void Solver2Config::validate() const {
  base.validate();
  if (!(auglag.rho0 > 0) || !(auglag.rho_cap >= auglag.rho0) || auglag.max_inner_iters < 1)
    throw std::invalid_argument("Solver2Config: bad penalty schedule");
  if (!(tau_rate > 0) || max_restarts < 0)
    throw std::invalid_argument("Solver2Config: bad rate decrement or restart cap");
}

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }

double clip_hi(double hi, const ChannelModel& ch, const QuadratureSpec& spec) {
  double trunc = ch.upper_truncation(spec.tail_mass);
  return (!std::isfinite(hi) || hi > trunc) ? trunc : hi;
}

}  // namespace

std::vector<double> allocate_cep(const std::vector<double>& boundaries,
                                 const ChannelModel& ch, double eps_m, bool paper_exact,
                                 const QuadratureSpec& spec) {
  if (!(eps_m > 0) || !(eps_m < 1))
    throw std::invalid_argument("allocate_cep: eps_m must lie in (0,1)");
  if (boundaries.size() < 2)
    throw std::invalid_argument("allocate_cep: need at least one region");
  int phi_count = static_cast<int>(boundaries.size()) - 1;
  std::vector<double> mean(phi_count);
  for (int i = 0; i < phi_count; ++i) {
    double hi_c = clip_hi(boundaries[i + 1], ch, spec);
    mean[i] = ch.truncated_mean(boundaries[i], hi_c, spec);
  }
  std::vector<double> eps(phi_count);
  if (paper_exact) {
    double denom = 0.0;
    for (double m : mean) denom += m * m;
    double alpha = eps_m / denom;
    for (int i = 0; i < phi_count; ++i) eps[i] = alpha / (mean[i] * mean[i]);
  } else {
    double wsum = 0.0;
    for (double m : mean) wsum += 1.0 / (m * m);
    for (int i = 0; i < phi_count; ++i) eps[i] = eps_m * (1.0 / (mean[i] * mean[i])) / wsum;
  }
  return eps;
}

ConstrainedRate constrained_rate(double lo, double hi, double eps_i, const ChannelModel& ch,
                                 const LinkParams& lp, const Solver2Config& cfg) {
  cfg.validate();
  if (!(eps_i > 0)) throw std::invalid_argument("constrained_rate: eps_i must be positive");
  double hi_c = clip_hi(hi, ch, cfg.base.quadrature);
  double mass = ch.survival(lo) - ch.survival(hi_c);
  if (!(mass > 1e-14))
    throw degenerate_region_error("constrained_rate: region carries no probability mass");

  auto cep_at = [&](double r) {
    return region_cep({lo, hi, r}, ch, lp, cfg.base.quadrature);
  };
  double r_star = optimal_rate(lo, hi, ch, lp, cfg.base);
  double cep_star = cep_at(r_star);
  if (cep_star <= eps_i) return {r_star, cep_star, RateStatus::Ok};

  if (cfg.paper_exact_decrement) {
    double r = r_star;
    while (true) {
      r -= cfg.tau_rate;
      if (r <= 0.0) break;
      double c = cep_at(r);
      if (c <= eps_i) return {r, c, RateStatus::Reduced};
    }
    if (mass <= eps_i) return {0.0, mass, RateStatus::Reduced};
    return {0.0, mass, RateStatus::InfeasibleRegion};
  }

  // The region error probability is increasing in the rate, so bisect on it.
  double r_min = 1e-9;
  double cep_min = cep_at(r_min);
  if (cep_min > eps_i) {
    if (mass <= eps_i) return {0.0, mass, RateStatus::Reduced};
    return {0.0, mass, RateStatus::InfeasibleRegion};
  }
  double r = find_root([&](double x) { return cep_at(x) - eps_i; }, {r_min, r_star},
                       cfg.base.rate_tol);
  // Land on the feasible side of the tolerance interval.
  while (cep_at(r) > eps_i && r > r_min) r = std::max(r_min, r - cfg.base.rate_tol);
  return {r, cep_at(r), RateStatus::Reduced};
}

double augmented_objective(double phi, int j, const QuantizationScheme& sch,
                           const std::vector<double>& eps, double beta, double rho,
                           const std::vector<double>& lambda, const std::vector<double>& mu,
                           const ChannelModel& ch, const LinkParams& lp,
                           const Solver2Config& cfg) {
  int phi_count = sch.region_count();
  if (j < 1 || j >= phi_count)
    throw std::invalid_argument("augmented_objective: interior boundary index required");
  double value = 0.0;
  double cep_pen = 0.0, order_pen = 0.0;
  for (int i : {j - 1, j}) {
    double lo = (i == j) ? phi : sch.boundaries[i];
    double hi = (i == j - 1) ? phi : sch.boundaries[i + 1];
    Region rg{lo, hi, sch.rates[i]};
    if (hi > lo) value += rg.rate * region_success_mass(rg, ch, lp, cfg.base.quadrature);
    double cep = (hi > lo) ? region_cep(rg, ch, lp, cfg.base.quadrature) : 0.0;
    // The printed slack subtracts lambda/rho, which lets a growing multiplier
    // cancel the penalty on a persistent violation; the standard form adds it.
    double shift = cfg.auglag.paper_exact_updates ? -1.0 : 1.0;
    double slack = pos(beta * (cep - eps[i]) + shift * lambda[i] / rho);
    cep_pen += slack * slack;
    double ord = pos(lo - hi + shift * mu[i] / rho);
    order_pen += ord * ord;
  }
  if (cfg.auglag.paper_exact_updates)
    return value - 0.5 * rho * (cep_pen - order_pen);  // sign as printed
  return value - 0.5 * rho * (cep_pen + order_pen);
}

Algorithm2Result run_algorithm2(const ChannelModel& ch, const LinkParams& lp, int phi_count,
                                double eps_m,
                                const std::optional<std::vector<double>>& init_boundaries,
                                const Solver2Config& cfg) {
  lp.validate();
  cfg.validate();
  if (phi_count < 1) throw std::invalid_argument("run_algorithm2: Phi must be >= 1");
  if (!(eps_m > 0) || !(eps_m < 1))
    throw std::invalid_argument("run_algorithm2: eps_m must lie in (0,1)");
  const double inf = std::numeric_limits<double>::infinity();
  double trunc = ch.upper_truncation(cfg.base.quadrature.tail_mass);
  double beta = 1.0 / eps_m;

  Algorithm2Result out;
  QuantizationScheme& sch = out.scheme;
  sch.boundaries.assign(phi_count + 1, 0.0);
  sch.boundaries.back() = inf;
  if (init_boundaries) {
    if (static_cast<int>(init_boundaries->size()) != phi_count + 1)
      throw std::invalid_argument("run_algorithm2: init boundaries must have Phi+1 entries");
    sch.boundaries = *init_boundaries;
    sch.boundaries.front() = 0.0;
    sch.boundaries.back() = inf;
  } else {
    for (int i = 1; i < phi_count; ++i)
      sch.boundaries[i] = ch.inv_cdf(static_cast<double>(i) / phi_count);
  }
  sch.rates.assign(phi_count, 0.0);

  GoodputReport& rep = out.report;
  std::vector<double> eps(phi_count, eps_m / phi_count);
  int restarts = 0;
  bool any_infeasible = false;

  auto rate_pass = [&](int* bad_region) {
    *bad_region = -1;
    for (int i = 0; i < phi_count; ++i) {
      ConstrainedRate cr;
      try {
        cr = constrained_rate(sch.boundaries[i], sch.boundaries[i + 1], eps[i], ch, lp, cfg);
      } catch (const degenerate_region_error&) {
        sch.rates[i] = 0.0;  // collapsed region carries no mass and no error
        continue;
      }
      sch.rates[i] = cr.rate;
      if (cr.status == RateStatus::InfeasibleRegion && *bad_region < 0) *bad_region = i;
    }
  };

  // Split the offending region's mass evenly with a neighbour and retry.
  auto perturb = [&](int i) {
    int k = (i < phi_count - 1) ? i + 1 : i;  // boundary index to move
    if (k < 1 || k > phi_count - 1) return false;
    double f_lo = ch.cdf(sch.boundaries[k - 1]);
    double f_hi = std::isfinite(sch.boundaries[k + 1]) ? ch.cdf(sch.boundaries[k + 1]) : 1.0;
    double mid = ch.inv_cdf(0.5 * (f_lo + f_hi));
    if (!(mid > sch.boundaries[k - 1]) || !(mid < sch.boundaries[k + 1]) ||
        std::fabs(mid - sch.boundaries[k]) < 1e-15)
      return false;
    sch.boundaries[k] = mid;
    return true;
  };

  int iter = 0;
  bool converged = false;
  while (iter < cfg.base.max_outer_iters) {
    ++iter;
    eps = allocate_cep(sch.boundaries, ch, eps_m, cfg.paper_exact_alloc, cfg.base.quadrature);
    int bad = -1;
    rate_pass(&bad);
    if (bad >= 0) {
      if (restarts < cfg.max_restarts && perturb(bad)) {
        ++restarts;
        continue;
      }
      any_infeasible = true;
    }

    std::vector<double> old = sch.boundaries;
    if (bad < 0) {
      // Local objective for a trial boundary: in the default mode the rates of
      // the two touched regions are re-optimized under their shares, so the
      // move can trade error budget between regions; the paper-exact mode
      // keeps the current rates as printed.
      auto local_value = [&](double phi, int j, double rho,
                             const std::vector<double>& lambda,
                             const std::vector<double>& mu, std::vector<double>* out_cep) {
        if (cfg.auglag.paper_exact_updates) {
          QuantizationScheme trial = sch;
          trial.boundaries[j] = phi;
          for (int i : {j - 1, j})
            (*out_cep)[i == j - 1 ? 0 : 1] = region_cep(
                {trial.boundaries[i], trial.boundaries[i + 1], trial.rates[i]}, ch, lp,
                cfg.base.quadrature);
          return augmented_objective(phi, j, sch, eps, beta, rho, lambda, mu, ch, lp, cfg);
        }
        double value = 0.0, cep_pen = 0.0;
        for (int i : {j - 1, j}) {
          double lo_i = (i == j) ? phi : sch.boundaries[i];
          double hi_i = (i == j - 1) ? phi : sch.boundaries[i + 1];
          double cep = 0.0;
          if (hi_i > lo_i) {
            try {
              ConstrainedRate cr = constrained_rate(lo_i, hi_i, eps[i], ch, lp, cfg);
              cep = cr.realized_cep;
              if (cr.rate > 0)
                value += region_goodput({lo_i, hi_i, cr.rate}, ch, lp, cfg.base.quadrature);
            } catch (const degenerate_region_error&) {
            }
          }
          (*out_cep)[i == j - 1 ? 0 : 1] = cep;
          double slack = pos(beta * (cep - eps[i]) + lambda[i] / rho);
          cep_pen += slack * slack;
        }
        return value - 0.5 * rho * cep_pen;
      };

      for (int j = phi_count - 1; j >= 1; --j) {
        double lo = sch.boundaries[j - 1];
        double hi = std::isfinite(sch.boundaries[j + 1]) ? sch.boundaries[j + 1] : trunc;
        if (!(hi > lo)) continue;
        std::vector<double> lambda(phi_count, 0.0), mu(phi_count, 0.0);
        double rho = cfg.auglag.rho0;
        double phi_prev = sch.boundaries[j];
        std::vector<double> cep_pair(2, 0.0);
        for (int l = 0; l < cfg.auglag.max_inner_iters; ++l) {
          MaxResult m = maximize_1d(
              [&](double phi) {
                std::vector<double> tmp(2, 0.0);
                return local_value(phi, j, rho, lambda, mu, &tmp);
              },
              {lo, hi}, cfg.auglag.phi_tol * 0.01);
          sch.boundaries[j] = m.arg;
          local_value(m.arg, j, rho, lambda, mu, &cep_pair);
          for (int i : {j - 1, j}) {
            double cep = cep_pair[i == j - 1 ? 0 : 1];
            double viol = rho * beta * (cep - eps[i]);
            double ord = sch.boundaries[i] - sch.boundaries[i + 1];
            if (cfg.auglag.paper_exact_updates) {
              double lam = pos(viol - lambda[i]);
              lambda[i] = lam * lam;
              double mv = pos(rho * ord - mu[i]);
              mu[i] = mv * mv;
            } else {
              lambda[i] = pos(lambda[i] + viol);
              mu[i] = pos(mu[i] + rho * ord);
            }
          }
          rho = std::min(2.0 * rho, cfg.auglag.rho_cap);
          if (std::fabs(sch.boundaries[j] - phi_prev) < cfg.auglag.phi_tol && l > 0) break;
          phi_prev = sch.boundaries[j];
        }
      }
      // Refresh shares and rates so the recorded iterate is consistent with
      // the boundaries it reports.
      eps = allocate_cep(sch.boundaries, ch, eps_m, cfg.paper_exact_alloc,
                         cfg.base.quadrature);
      int bad2 = -1;
      rate_pass(&bad2);
      if (bad2 >= 0 && restarts >= cfg.max_restarts) any_infeasible = true;
    }

    double delta = 0.0;
    for (int j = 1; j < phi_count; ++j)
      delta = std::max(delta, std::fabs(sch.boundaries[j] - old[j]));
    GoodputReport snap = scheme_totals(sch, ch, lp, cfg.base.quadrature);
    if (!std::isfinite(snap.total_goodput_nats))
      throw solver_failure("run_algorithm2: non-finite objective");
    rep.trace.push_back({sch.boundaries, sch.rates, snap.total_goodput_nats, snap.total_cep});
    if (phi_count == 1 || delta < cfg.base.conv_tol) {
      converged = true;
      break;
    }
  }

  eps = allocate_cep(sch.boundaries, ch, eps_m, cfg.paper_exact_alloc, cfg.base.quadrature);
  int bad = -1;
  rate_pass(&bad);
  if (bad >= 0) any_infeasible = true;

  GoodputReport fin = scheme_totals(sch, ch, lp, cfg.base.quadrature);
  fin.iterations = iter;
  fin.converged = converged;
  fin.trace = std::move(rep.trace);
  out.report = std::move(fin);
  out.budget.eps_m = eps_m;
  out.budget.per_region = eps;
  out.feasible = converged && !any_infeasible &&
                 out.report.total_cep <= eps_m * (1.0 + 1e-9);
  return out;
}

}  // namespace fbq
