#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fbq/asymptotic.hpp"

using namespace fbq;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("ergodic capacity against a dense Simpson oracle") {
  LinkParams lp{1, 10.0};
  for (ChannelModel ch : {ChannelModel::rayleigh(), ChannelModel::rician(10.0)}) {
    double far = ch.upper_truncation(1e-14);
    double ref = simpson([&](double g) { return ch.pdf(g) * std::log1p(10.0 * g); },
                         0.0, far, 200000);
    CHECK(ergodic_capacity(ch, lp) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("ergodic capacity grows with the SNR") {
  ChannelModel ch = ChannelModel::rician(10.0);
  double prev = 0.0;
  for (double p : {1.0, 3.0, 10.0, 30.0}) {
    double c = ergodic_capacity(ch, {1, p});
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("single fixed rate optimum matches a brute-force scan") {
  LinkParams lp{1, 10.0};
  for (ChannelModel ch : {ChannelModel::rayleigh(), ChannelModel::rician(10.0)}) {
    FixedRateOptimum fro = fixed_rate_optimum(ch, lp);
    auto goodput = [&](double r) { return r * ch.survival(std::expm1(r) / 10.0); };
    double best_r = 0.0, best_v = 0.0;
    double rmax = std::log1p(10.0 * ch.upper_truncation(1e-12));
    for (int i = 0; i <= 200000; ++i) {
      double r = rmax * i / 200000;
      double v = goodput(r);
      if (v > best_v) {
        best_v = v;
        best_r = r;
      }
    }
    CHECK(fro.goodput_nats == doctest::Approx(best_v).epsilon(1e-8));
    CHECK(fro.rate == doctest::Approx(best_r).epsilon(1e-3));
    CHECK(fro.goodput_nats >= best_v - 1e-12);  // scan can only do worse
  }
}

TEST_CASE("outage capacity closed form") {
  ChannelModel ch = ChannelModel::rayleigh();
  LinkParams lp{1, 10.0};
  for (double e : {0.01, 0.1, 0.5})
    CHECK(epsilon_capacity(ch, lp, e) ==
          doctest::Approx(std::log1p(-10.0 * std::log1p(-e))).epsilon(1e-12));
  CHECK_THROWS_AS(epsilon_capacity(ch, lp, 0.0), std::domain_error);
  CHECK_THROWS_AS(epsilon_capacity(ch, lp, 1.0), std::domain_error);
}

TEST_CASE("infinite-blocklength quantizer satisfies its recursion") {
  LinkParams lp{1, 10.0};
  for (ChannelModel ch : {ChannelModel::rayleigh(), ChannelModel::rician(10.0)}) {
    for (int phi : {1, 2, 4}) {
      AsymptoticScheme sch = asymptotic_quantizer(ch, lp, phi);
      REQUIRE(static_cast<int>(sch.rates.size()) == phi);
      REQUIRE(static_cast<int>(sch.boundaries.size()) == phi + 1);
      CHECK(std::isinf(sch.boundaries.back()));
      // Rates are the capacities at the lower region edges.
      for (int i = 0; i < phi; ++i)
        CHECK(sch.rates[i] ==
              doctest::Approx(std::log1p(10.0 * sch.boundaries[i])).epsilon(1e-12));
      // Forward recursion: F(phi_{i+1}) = F(phi_i) + f(phi_i)(1+phi_i P)/P *
      // ln((1+phi_i P)/(1+phi_{i-1} P)), landing on F = 1.
      double f_cur = ch.cdf(sch.boundaries[0]);
      CHECK(sch.outage == doctest::Approx(f_cur).epsilon(1e-12));
      for (int i = 0; i < phi; ++i) {
        double s = 1.0 + 10.0 * sch.boundaries[i];
        double prev = (i == 0) ? 1.0 : 1.0 + 10.0 * sch.boundaries[i - 1];
        double f_next = f_cur + 0.1 * ch.pdf(sch.boundaries[i]) * s * std::log(s / prev);
        double want = (i + 1 < phi) ? ch.cdf(sch.boundaries[i + 1]) : 1.0;
        CHECK(f_next == doctest::Approx(want).epsilon(1e-7));
        f_cur = want;
      }
      // Goodput consistency: sum of r_i * region mass.
      double gp = 0.0;
      f_cur = sch.outage;
      for (int i = 0; i < phi; ++i) {
        double f_next = (i + 1 < phi) ? ch.cdf(sch.boundaries[i + 1]) : 1.0;
        gp += sch.rates[i] * (f_next - f_cur);
        f_cur = f_next;
      }
      CHECK(sch.goodput_nats == doctest::Approx(gp).epsilon(1e-12));
    }
  }
}

TEST_CASE("one-region quantizer reduces to the fixed rate optimum") {
  LinkParams lp{1, 10.0};
  ChannelModel ch = ChannelModel::rician(10.0);
  AsymptoticScheme sch = asymptotic_quantizer(ch, lp, 1);
  FixedRateOptimum fro = fixed_rate_optimum(ch, lp);
  CHECK(sch.rates[0] == doctest::Approx(fro.rate).epsilon(1e-6));
  CHECK(sch.goodput_nats == doctest::Approx(fro.goodput_nats).epsilon(1e-9));
}

TEST_CASE("quantizer goodput increases with resolution and stays below ergodic") {
  LinkParams lp{1, 10.0};
  for (ChannelModel ch : {ChannelModel::rayleigh(), ChannelModel::rician(10.0)}) {
    double erg = ergodic_capacity(ch, lp);
    double prev = 0.0;
    for (int phi : {1, 2, 4, 8}) {
      AsymptoticScheme sch = asymptotic_quantizer(ch, lp, phi);
      CHECK(sch.goodput_nats > prev);
      CHECK(sch.goodput_nats < erg);
      prev = sch.goodput_nats;
    }
  }
}

TEST_CASE("quantizer rejects a nonpositive region count") {
  CHECK_THROWS_AS(asymptotic_quantizer(ChannelModel::rayleigh(), {1, 10.0}, 0),
                  std::invalid_argument);
}
