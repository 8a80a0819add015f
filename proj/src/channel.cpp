#include "fbq/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fbq {

namespace {

// Poisson-mixture series for the unit-mean noncentral-chi-square power
// distribution (Rician K). With y = (K+1)*gamma:
//   survival S = sum_j pois(j;K) * e^{-y} sum_{m<=j} y^m/m!
//   cdf      F = sum_{m>=1} e^{-y} y^m/m! * PoisCdf(m-1;K)
// Both have positive terms only, so each side is accurate where it is small.

constexpr int kMaxRicianK = 600;

double rician_survival_series(double k, double y) {
  if (y <= 0.0) return 1.0;
  double ey = std::exp(-y);
  if (ey == 0.0) return 0.0;
  double w = std::exp(-k);  // pois(0;K)
  double e = ey;            // e^{-y} y^j / j!
  double s = ey;            // partial sum of e_m up to m=j
  double cum_w = w;
  double total = w * s;
  int jmax = static_cast<int>(k + 12.0 * std::sqrt(k + 1.0) + 40.0);
  for (int j = 1; j <= jmax; ++j) {
    w *= k / j;
    e *= y / j;
    s += e;
    total += w * s;
    cum_w += w;
    if (1.0 - cum_w <= 1e-16 * total) break;
  }
  return std::min(total, 1.0);
}

double rician_cdf_series(double k, double y) {
  if (y <= 0.0) return 0.0;
  double ey = std::exp(-y);
  double w = std::exp(-k);
  double cum_w = w;  // PoisCdf(m-1;K) with m starting at 1
  double e = ey;     // e^{-y} y^m / m!, starts at m=0
  double cum_e = ey;
  double total = 0.0;
  int mmax = static_cast<int>(y + k + 24.0 * std::sqrt(y + k + 1.0) + 80.0);
  double wj = w;
  for (int m = 1; m <= mmax; ++m) {
    e *= y / m;
    total += e * cum_w;
    cum_e += e;
    if (1.0 - cum_e <= 1e-16 * total + 1e-300) break;
    wj *= k / m;
    cum_w += wj;
  }
  return std::min(total, 1.0);
}

}  // namespace

struct ChannelModel::Table {
  std::vector<double> x;      // gamma nodes, strictly increasing
  std::vector<double> f;      // normalized density at nodes
  std::vector<double> slope;  // shape-preserving cubic slopes
  std::vector<double> cum;    // cdf at nodes

  double hermite(double g, size_t i) const {
    double h = x[i + 1] - x[i];
    double t = (g - x[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    return f[i] * (2 * t3 - 3 * t2 + 1) + h * slope[i] * (t3 - 2 * t2 + t) +
           f[i + 1] * (-2 * t3 + 3 * t2) + h * slope[i + 1] * (t3 - t2);
  }

  size_t segment(double g) const {
    size_t i = std::upper_bound(x.begin(), x.end(), g) - x.begin();
    if (i == 0) return 0;
    return std::min(i - 1, x.size() - 2);
  }

  double partial_integral(double g, size_t i) const {
    // 5-point Gauss-Legendre on [x_i, g], exact for the cubic.
    static const double gn[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                                 0.538469310105683, 0.906179845938664};
    static const double gw[5] = {0.236926885056189, 0.478628670499366,
                                 0.568888888888889, 0.478628670499366,
                                 0.236926885056189};
    double a = x[i], b = g;
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int j = 0; j < 5; ++j) s += gw[j] * hermite(c + h * gn[j], i);
    return s * h;
  }
};

ChannelModel ChannelModel::rayleigh(double mean_power) {
  if (!(mean_power > 0)) throw std::invalid_argument("rayleigh: mean_power must be positive");
  ChannelModel m;
  m.kind_ = FadingKind::Rayleigh;
  m.mean_ = mean_power;
  return m;
}

ChannelModel ChannelModel::rician(double k_factor) {
  if (!(k_factor >= 0)) throw std::invalid_argument("rician: K must be nonnegative");
  if (k_factor > kMaxRicianK) throw std::invalid_argument("rician: K too large for series evaluation");
  ChannelModel m;
  m.kind_ = FadingKind::Rician;
  m.k_ = k_factor;
  return m;
}

ChannelModel ChannelModel::rician_db(double k_factor_db) {
  return rician(std::pow(10.0, k_factor_db / 10.0));
}

ChannelModel ChannelModel::from_table(std::vector<double> gamma, std::vector<double> density) {
  if (gamma.size() != density.size() || gamma.size() < 4)
    throw std::invalid_argument("from_table: need >= 4 matching (gamma, pdf) rows");
  for (size_t i = 0; i < gamma.size(); ++i) {
    if (i > 0 && !(gamma[i] > gamma[i - 1]))
      throw std::invalid_argument("from_table: gamma must be strictly increasing");
    if (!(density[i] >= 0) || !std::isfinite(density[i]))
      throw std::invalid_argument("from_table: pdf values must be finite and nonnegative");
  }
  auto tab = std::make_shared<Table>();
  tab->x = std::move(gamma);
  tab->f = std::move(density);
  size_t n = tab->x.size();
  // Fritsch-Carlson monotone (shape-preserving) slopes.
  std::vector<double> h(n - 1), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = tab->x[i + 1] - tab->x[i];
    delta[i] = (tab->f[i + 1] - tab->f[i]) / h[i];
  }
  tab->slope.assign(n, 0.0);
  tab->slope[0] = delta[0];
  tab->slope[n - 1] = delta[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      tab->slope[i] = 0.0;
    } else {
      double w1 = 2 * h[i] + h[i - 1];
      double w2 = h[i] + 2 * h[i - 1];
      tab->slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  for (size_t i = 0; i + 1 < n; ++i) {
    // Clamp endpoint-adjacent slopes so the interpolant cannot undershoot zero.
    if (delta[i] == 0.0) tab->slope[i] = tab->slope[i + 1] = 0.0;
  }
  tab->cum.assign(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    double seg = h[i] * 0.5 * (tab->f[i] + tab->f[i + 1]) +
                 h[i] * h[i] / 12.0 * (tab->slope[i] - tab->slope[i + 1]);
    tab->cum[i + 1] = tab->cum[i] + seg;
  }
  double total = tab->cum[n - 1];
  if (!(total > 0)) throw std::invalid_argument("from_table: pdf integrates to zero");
  for (size_t i = 0; i < n; ++i) {
    tab->f[i] /= total;
    tab->slope[i] /= total;
    tab->cum[i] /= total;
  }
  ChannelModel m;
  m.kind_ = FadingKind::Custom;
  m.table_ = std::move(tab);
  return m;
}

ChannelModel ChannelModel::from_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("from_table: cannot open " + path);
  std::vector<double> g, p;
  std::string line;
  while (std::getline(in, line)) {
    size_t pos = line.find('#');
    if (pos != std::string::npos) line.resize(pos);
    std::istringstream ls(line);
    double a, b;
    if (ls >> a >> b) {
      g.push_back(a);
      p.push_back(b);
    }
  }
  return from_table(std::move(g), std::move(p));
}

std::string ChannelModel::name() const {
  switch (kind_) {
    case FadingKind::Rayleigh: return "rayleigh";
    case FadingKind::Rician: return "rician";
    default: return "custom";
  }
}

double ChannelModel::pdf(double gamma) const {
  if (gamma < 0) throw std::domain_error("pdf: gamma must be nonnegative");
  switch (kind_) {
    case FadingKind::Rayleigh:
      return std::exp(-gamma / mean_) / mean_;
    case FadingKind::Rician: {
      double k1 = k_ + 1.0;
      double z = 2.0 * std::sqrt(gamma * k_ * k1);
      // exponent collapses to -(sqrt((K+1)g) - sqrt(K))^2 <= 0
      return k1 * std::exp(-k_ - k1 * gamma + z) * bessel_i0_scaled(z);
    }
    default: {
      if (gamma < table_->x.front() || gamma > table_->x.back()) return 0.0;
      return std::max(0.0, table_->hermite(gamma, table_->segment(gamma)));
    }
  }
}

double ChannelModel::cdf(double gamma) const {
  if (gamma < 0) throw std::domain_error("cdf: gamma must be nonnegative");
  switch (kind_) {
    case FadingKind::Rayleigh:
      return -std::expm1(-gamma / mean_);
    case FadingKind::Rician: {
      double y = (k_ + 1.0) * gamma;
      if (y < k_ + 1.0) return rician_cdf_series(k_, y);
      return 1.0 - rician_survival_series(k_, y);
    }
    default: {
      if (gamma <= table_->x.front()) return 0.0;
      if (gamma >= table_->x.back()) return 1.0;
      size_t i = table_->segment(gamma);
      return std::clamp(table_->cum[i] + table_->partial_integral(gamma, i), 0.0, 1.0);
    }
  }
}

double ChannelModel::survival(double gamma) const {
  if (gamma < 0) throw std::domain_error("survival: gamma must be nonnegative");
  switch (kind_) {
    case FadingKind::Rayleigh:
      return std::exp(-gamma / mean_);
    case FadingKind::Rician: {
      double y = (k_ + 1.0) * gamma;
      if (y < k_ + 1.0) return 1.0 - rician_cdf_series(k_, y);
      return rician_survival_series(k_, y);
    }
    default:
      return 1.0 - cdf(gamma);
  }
}

double ChannelModel::inv_cdf(double p) const {
  if (!(p >= 0) || p >= 1.0)
    throw std::domain_error("inv_cdf: p must lie in [0,1); use upper_truncation for the tail");
  if (p == 0.0) return 0.0;
  if (kind_ == FadingKind::Rayleigh) return -mean_ * std::log1p(-p);
  if (kind_ == FadingKind::Custom) {
    const auto& c = table_->cum;
    size_t i = std::upper_bound(c.begin(), c.end(), p) - c.begin();
    if (i == 0) return table_->x.front();
    if (i >= c.size()) return table_->x.back();
    --i;
    auto g = [&](double x) { return cdf(x) - p; };
    return find_root(g, {table_->x[i], table_->x[i + 1]}, 1e-13 * table_->x.back());
  }
  // Rician: bracketed root finding on the cdf (upper tail via survival).
  double hi = 1.0;
  while (cdf(hi) < p) {
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("inv_cdf: bracket expansion failed");
  }
  if (p > 0.9) {
    double q = 1.0 - p;
    auto g = [&](double x) { return survival(x) - q; };
    return find_root(g, {0.0, hi}, 1e-12 * std::max(1.0, hi));
  }
  auto g = [&](double x) { return cdf(x) - p; };
  return find_root(g, {0.0, hi}, 1e-12 * std::max(1.0, hi));
}

double ChannelModel::truncated_mean(double lo, double hi, const QuadratureSpec& spec) const {
  if (!(lo >= 0) || !(lo < hi)) throw std::invalid_argument("truncated_mean: need 0 <= lo < hi");
  double hi_c = hi;
  double trunc = upper_truncation(spec.tail_mass);
  if (!std::isfinite(hi_c) || hi_c > trunc) hi_c = std::max(trunc, lo * (1.0 + 1e-9));
  double mass = survival(lo) - survival(hi_c);
  if (mass < 1e-14)
    throw degenerate_region_error("truncated_mean: region carries no probability mass");
  double num = integrate([&](double g) { return g * pdf(g); }, lo, hi_c, spec);
  return std::clamp(num / mass, lo, hi_c);
}

double ChannelModel::upper_truncation(double tail_mass) const {
  if (!(tail_mass > 0) || !(tail_mass < 1))
    throw std::invalid_argument("upper_truncation: tail_mass must lie in (0,1)");
  if (kind_ == FadingKind::Rayleigh) return -mean_ * std::log(tail_mass);
  if (kind_ == FadingKind::Custom) return table_->x.back();
  double hi = 1.0;
  while (survival(hi) > tail_mass) {
    hi *= 2.0;
    if (hi > 1e9) return hi;
  }
  auto g = [&](double x) { return survival(x) - tail_mass; };
  return find_root(g, {0.0, hi}, 1e-10 * std::max(1.0, hi));
}

}  // namespace fbq
