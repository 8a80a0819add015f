#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbq/numerics.hpp"

namespace fbq {

class degenerate_region_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FadingKind { Rayleigh, Rician, Custom };

// Continuous fading-power distribution gamma = |h|^2. Shipped models are
// normalized to E[gamma] = 1 (Rayleigh mean_power overrides). Immutable after
// construction; all queries are pure.
class ChannelModel {
 public:
  static ChannelModel rayleigh(double mean_power = 1.0);
  static ChannelModel rician(double k_factor);      // K as a linear ratio
  static ChannelModel rician_db(double k_factor_db);
  // Two whitespace-separated columns (gamma, pdf), gamma strictly increasing.
  // Interpolated with a shape-preserving monotone cubic; pdf renormalized.
  static ChannelModel from_table(const std::string& path);
  static ChannelModel from_table(std::vector<double> gamma, std::vector<double> density);

  FadingKind kind() const { return kind_; }
  double k_factor() const { return k_; }
  double mean_power() const { return mean_; }
  std::string name() const;

  double pdf(double gamma) const;
  double cdf(double gamma) const;
  double survival(double gamma) const;  // 1 - cdf, computed without cancellation
  double inv_cdf(double p) const;
  // E[gamma | lo <= gamma <= hi]; hi may be +inf.
  double truncated_mean(double lo, double hi, const QuadratureSpec& spec = {}) const;
  // Smallest g with survival(g) <= tail_mass.
  double upper_truncation(double tail_mass) const;

 private:
  ChannelModel() = default;
  struct Table;

  FadingKind kind_ = FadingKind::Rayleigh;
  double mean_ = 1.0;  // Rayleigh mean power
  double k_ = 0.0;     // Rician K factor
  std::shared_ptr<const Table> table_;
};

}  // namespace fbq
