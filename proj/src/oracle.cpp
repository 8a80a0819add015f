#include "fbq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace fbq {

void GridSpec::validate() const {
  if (boundary_grid < 2 || refine_levels < 0)
    throw std::invalid_argument("GridSpec: need >= 2 grid points and >= 0 refine levels");
  if (!(quantile_lo > 0) || !(quantile_hi < 1) || !(quantile_lo < quantile_hi))
    throw std::invalid_argument("GridSpec: quantile window must satisfy 0 < lo < hi < 1");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CellInfo {
  double r_star;
  double goodput_star;
  double cep_star;
  double mass;
  double mean;
};

class CellCache {
 public:
  CellCache(const ChannelModel& ch, const LinkParams& lp, const SolverConfig& cfg)
      : ch_(ch), lp_(lp), cfg_(cfg), trunc_(ch.upper_truncation(cfg.quadrature.tail_mass)) {}

  const CellInfo& get(double lo, double hi) {
    auto key = std::make_pair(lo, hi);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    CellInfo ci{};
    double hi_c = (!std::isfinite(hi) || hi > trunc_) ? trunc_ : hi;
    ci.mass = ch_.survival(lo) - ch_.survival(hi_c);
    if (ci.mass > 1e-14) {
      ci.mean = ch_.truncated_mean(lo, hi_c, cfg_.quadrature);
      ci.r_star = optimal_rate(lo, hi, ch_, lp_, cfg_);
      ci.goodput_star = region_goodput({lo, hi, ci.r_star}, ch_, lp_, cfg_.quadrature);
      ci.cep_star = region_cep({lo, hi, ci.r_star}, ch_, lp_, cfg_.quadrature);
    } else {
      ci.mean = std::max(lo, 0.0);
      ci.r_star = 0.0;
      ci.goodput_star = 0.0;
      ci.cep_star = 0.0;
    }
    return memo_.emplace(key, ci).first->second;
  }

  double cep_at(double lo, double hi, double r) const {
    return region_cep({lo, hi, r}, ch_, lp_, cfg_.quadrature);
  }
  double goodput_at(double lo, double hi, double r) const {
    return region_goodput({lo, hi, r}, ch_, lp_, cfg_.quadrature);
  }
  const SolverConfig& cfg() const { return cfg_; }

 private:
  const ChannelModel& ch_;
  const LinkParams& lp_;
  SolverConfig cfg_;
  double trunc_;
  std::map<std::pair<double, double>, CellInfo> memo_;
};

std::vector<std::vector<double>> initial_grids(const ChannelModel& ch, int phi_count,
                                               const GridSpec& grid) {
  double g_lo = ch.inv_cdf(grid.quantile_lo);
  double g_hi = ch.inv_cdf(grid.quantile_hi);
  std::vector<double> pts(grid.boundary_grid);
  for (int i = 0; i < grid.boundary_grid; ++i) {
    double t = static_cast<double>(i) / (grid.boundary_grid - 1);
    pts[i] = g_lo * std::pow(g_hi / g_lo, t);
  }
  return std::vector<std::vector<double>>(phi_count - 1, pts);
}

void refine_grids(std::vector<std::vector<double>>& grids,
                  const std::vector<double>& incumbent, int points) {
  for (std::size_t j = 0; j < grids.size(); ++j) {
    const std::vector<double>& g = grids[j];
    auto it = std::lower_bound(g.begin(), g.end(), incumbent[j]);
    int idx = static_cast<int>(it - g.begin());
    idx = std::clamp(idx, 0, static_cast<int>(g.size()) - 1);
    double lo = g[std::max(0, idx - 1)];
    double hi = g[std::min(static_cast<int>(g.size()) - 1, idx + 1)];
    if (!(hi > lo)) continue;
    std::vector<double> ng(points);
    for (int i = 0; i < points; ++i)
      ng[i] = lo + (hi - lo) * i / (points - 1);
    grids[j] = std::move(ng);
  }
}

// Walk every increasing interior-boundary combination and report it.
template <typename Fn>
void for_each_combo(const std::vector<std::vector<double>>& grids, Fn&& fn) {
  int k = static_cast<int>(grids.size());
  std::vector<double> combo(k);
  std::vector<int> idx(k, 0);
  if (k == 0) {
    fn(combo);
    return;
  }
  int j = 0;
  while (j >= 0) {
    if (j == k) {
      fn(combo);
      --j;
      ++idx[j];
      continue;
    }
    if (idx[j] >= static_cast<int>(grids[j].size())) {
      idx[j] = 0;
      --j;
      if (j >= 0) ++idx[j];
      continue;
    }
    double v = grids[j][idx[j]];
    if (j > 0 && !(v > combo[j - 1])) {
      ++idx[j];
      continue;
    }
    combo[j] = v;
    ++j;
  }
}

std::vector<double> full_boundaries(const std::vector<double>& interior) {
  std::vector<double> b;
  b.reserve(interior.size() + 2);
  b.push_back(0.0);
  b.insert(b.end(), interior.begin(), interior.end());
  b.push_back(kInf);
  return b;
}

}  // namespace

OracleResult grid_search(const ChannelModel& ch, const LinkParams& lp, int phi_count,
                         const GridSpec& grid, const SolverConfig& cfg) {
  lp.validate();
  grid.validate();
  cfg.validate();
  if (phi_count < 1) throw std::invalid_argument("grid_search: Phi must be >= 1");
  CellCache cache(ch, lp, cfg);

  std::vector<std::vector<double>> grids = initial_grids(ch, phi_count, grid);
  std::vector<double> best_interior(phi_count - 1, 0.0);
  double best = -kInf;
  for (int level = 0; level <= grid.refine_levels; ++level) {
    if (level > 0) refine_grids(grids, best_interior, grid.boundary_grid);
    for_each_combo(grids, [&](const std::vector<double>& interior) {
      std::vector<double> b = full_boundaries(interior);
      double total = 0.0;
      for (int i = 0; i < phi_count; ++i) total += cache.get(b[i], b[i + 1]).goodput_star;
      if (total > best) {
        best = total;
        best_interior = interior;
      }
    });
  }

  OracleResult out;
  std::vector<double> b = full_boundaries(best_interior);
  out.scheme.boundaries = b;
  out.scheme.rates.resize(phi_count);
  for (int i = 0; i < phi_count; ++i) out.scheme.rates[i] = cache.get(b[i], b[i + 1]).r_star;
  GoodputReport rep = scheme_totals(out.scheme, ch, lp, cfg.quadrature);
  out.goodput_nats = rep.total_goodput_nats;
  out.total_cep = rep.total_cep;
  return out;
}

OracleResult grid_search_constrained(const ChannelModel& ch, const LinkParams& lp,
                                     int phi_count, double eps_m, const GridSpec& grid,
                                     const Solver2Config& cfg) {
  lp.validate();
  grid.validate();
  cfg.validate();
  if (phi_count < 1) throw std::invalid_argument("grid_search_constrained: Phi must be >= 1");
  if (!(eps_m > 0) || !(eps_m < 1))
    throw std::invalid_argument("grid_search_constrained: eps_m must lie in (0,1)");
  CellCache cache(ch, lp, cfg.base);

  // Value of one cell under its share, reusing the cached unconstrained
  // optimum when it already satisfies the share.
  auto cell_value = [&](double lo, double hi, double eps_i, double* rate) -> double {
    const CellInfo& ci = cache.get(lo, hi);
    if (ci.mass <= 1e-14) {
      *rate = 0.0;
      return 0.0;
    }
    if (ci.cep_star <= eps_i) {
      *rate = ci.r_star;
      return ci.goodput_star;
    }
    double r_min = 1e-9;
    if (cache.cep_at(lo, hi, r_min) > eps_i) {
      *rate = 0.0;
      if (ci.mass <= eps_i) return 0.0;  // silence is allowed
      return -kInf;                      // even silence violates the share
    }
    double r = find_root([&](double x) { return cache.cep_at(lo, hi, x) - eps_i; },
                         {r_min, ci.r_star}, cfg.base.rate_tol);
    while (cache.cep_at(lo, hi, r) > eps_i && r > r_min)
      r = std::max(r_min, r - cfg.base.rate_tol);
    *rate = r;
    return cache.goodput_at(lo, hi, r);
  };

  std::vector<std::vector<double>> grids = initial_grids(ch, phi_count, grid);
  std::vector<double> best_interior(phi_count - 1, 0.0);
  std::vector<double> best_rates(phi_count, 0.0);
  double best = -kInf;
  std::vector<double> rates(phi_count);
  for (int level = 0; level <= grid.refine_levels; ++level) {
    if (level > 0) {
      if (best == -kInf) break;  // nothing feasible to zoom on
      refine_grids(grids, best_interior, grid.boundary_grid);
    }
    for_each_combo(grids, [&](const std::vector<double>& interior) {
      std::vector<double> b = full_boundaries(interior);
      std::vector<double> means(phi_count);
      for (int i = 0; i < phi_count; ++i) means[i] = cache.get(b[i], b[i + 1]).mean;
      std::vector<double> eps(phi_count);
      if (cfg.paper_exact_alloc) {
        double denom = 0.0;
        for (double m : means) denom += m * m;
        for (int i = 0; i < phi_count; ++i) eps[i] = eps_m / denom / (means[i] * means[i]);
      } else {
        double wsum = 0.0;
        for (double m : means) wsum += 1.0 / (m * m);
        for (int i = 0; i < phi_count; ++i)
          eps[i] = eps_m * (1.0 / (means[i] * means[i])) / wsum;
      }
      double total = 0.0;
      for (int i = 0; i < phi_count && total > -kInf; ++i)
        total += cell_value(b[i], b[i + 1], eps[i], &rates[i]);
      if (total > best) {
        best = total;
        best_interior = interior;
        best_rates = rates;
      }
    });
  }
  if (best == -kInf)
    throw solver_failure("grid_search_constrained: no feasible boundary combination");

  OracleResult out;
  out.scheme.boundaries = full_boundaries(best_interior);
  out.scheme.rates = best_rates;
  GoodputReport rep = scheme_totals(out.scheme, ch, lp, cfg.base.quadrature);
  out.goodput_nats = rep.total_goodput_nats;
  out.total_cep = rep.total_cep;
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform_draw(std::uint64_t seed, std::uint64_t index, std::uint64_t which) {
  std::uint64_t z = splitmix64(splitmix64(seed ^ splitmix64(index)) + which);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace

McEstimate monte_carlo_goodput(const QuantizationScheme& scheme, const ChannelModel& ch,
                               const LinkParams& lp, const McSpec& mc) {
  lp.validate();
  scheme.validate();
  if (mc.draws < 1) throw std::invalid_argument("monte_carlo_goodput: need draws >= 1");

  // Tabulated cdf for inverse sampling: quadratic spacing packs resolution
  // near zero where the pdf varies fastest.
  const int kTab = 1 << 16;
  double trunc = ch.upper_truncation(1e-12);
  std::vector<double> gam(kTab + 1), cdf(kTab + 1);
  for (int k = 0; k <= kTab; ++k) {
    double t = static_cast<double>(k) / kTab;
    gam[k] = trunc * t * t;
    cdf[k] = ch.cdf(gam[k]);
  }

  auto sample_gain = [&](double u) {
    if (u >= cdf.back()) return trunc;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    int k = static_cast<int>(it - cdf.begin());
    if (k == 0) return gam[0];
    double f0 = cdf[k - 1], f1 = cdf[k];
    double w = (f1 > f0) ? (u - f0) / (f1 - f0) : 0.0;
    return gam[k - 1] + w * (gam[k] - gam[k - 1]);
  };

  const long long block = 4096;
  const long long nblocks = (mc.draws + block - 1) / block;
  std::vector<double> bsum(nblocks, 0.0), bsumsq(nblocks, 0.0);

  auto run_block = [&](long long bi) {
    long long begin = bi * block;
    long long end = std::min(mc.draws, begin + block);
    double s = 0.0, s2 = 0.0;
    for (long long d = begin; d < end; ++d) {
      double g = sample_gain(uniform_draw(mc.seed, static_cast<std::uint64_t>(d), 0));
      int region = static_cast<int>(
          std::upper_bound(scheme.boundaries.begin() + 1, scheme.boundaries.end(), g) -
          (scheme.boundaries.begin() + 1));
      region = std::clamp(region, 0, scheme.region_count() - 1);
      double r = scheme.rates[region];
      double v = 0.0;
      if (r > 0.0) {
        double u2 = uniform_draw(mc.seed, static_cast<std::uint64_t>(d), 1);
        if (u2 >= omega(g, r, lp)) v = r;
      }
      s += v;
      s2 += v * v;
    }
    bsum[bi] = s;
    bsumsq[bi] = s2;
  };

  int threads = std::max(1, mc.threads);
  if (threads == 1) {
    for (long long bi = 0; bi < nblocks; ++bi) run_block(bi);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        for (long long bi = t; bi < nblocks; bi += threads) run_block(bi);
      });
    for (auto& th : pool) th.join();
  }

  // Pairwise reduction over the fixed block layout: the total is a function
  // of the block sums only, hence identical for any thread count.
  auto reduce = [](std::vector<double> v) {
    while (v.size() > 1) {
      std::size_t half = (v.size() + 1) / 2;
      for (std::size_t i = 0; i + half < v.size(); ++i) v[i] += v[i + half];
      v.resize(half);
    }
    return v.empty() ? 0.0 : v[0];
  };
  double total = reduce(bsum);
  double total_sq = reduce(bsumsq);
  double n = static_cast<double>(mc.draws);
  McEstimate est;
  est.goodput_nats = total / n;
  double var = std::max(0.0, total_sq / n - est.goodput_nats * est.goodput_nats);
  est.std_error = std::sqrt(var / n);
  return est;
}

}  // namespace fbq
