#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fbq/fbl.hpp"

using namespace fbq;

namespace {

// Plain composite Simpson integration, independent of the library quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("capacity and dispersion closed forms") {
  LinkParams lp{128, 10.0};
  for (double g : {0.0, 0.2, 1.0, 5.0}) {
    CHECK(capacity(g, lp) == doctest::Approx(std::log(1.0 + 10.0 * g)).epsilon(1e-14));
    double s = 1.0 + 10.0 * g;
    CHECK(dispersion(g, lp) == doctest::Approx(1.0 - 1.0 / (s * s)).epsilon(1e-14));
  }
  CHECK(dispersion(0.0, lp) == 0.0);
  CHECK_THROWS_AS((LinkParams{0, 10.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((LinkParams{128, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("unit helpers") {
  CHECK(nats_to_bpcu(kLn2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(db_to_lin(10.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(db_to_lin(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(db_to_lin(20.0) == doctest::Approx(100.0).epsilon(1e-15));
}

TEST_CASE("error probability and achievable rate are inverse maps") {
  // omega(g, R(g, eps)) == eps across gains, blocklengths and targets.
  for (int n : {32, 128, 1000}) {
    LinkParams lp{n, 10.0};
    for (double g : {0.05, 0.3, 1.0, 2.7}) {
      for (double eps : {1e-8, 1e-4, 1e-2, 0.3, 0.7}) {
        double r = achievable_rate(lp, g, eps);
        if (r <= 0.0) continue;
        CHECK(omega(g, r, lp) == doctest::Approx(eps).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("error probability limit conventions at zero gain") {
  LinkParams lp{128, 10.0};
  CHECK(omega(0.0, 0.5, lp) == 1.0);
  CHECK(omega(0.0, 0.0, lp) == 0.0);
}

TEST_CASE("error probability is monotone in the rate and the gain") {
  LinkParams lp{128, 10.0};
  double prev = 0.0;
  for (double r = 0.05; r < 3.0; r += 0.05) {
    double w = omega(0.5, r, lp);
    CHECK(w >= prev);
    prev = w;
  }
  prev = 1.0;
  for (double g = 0.01; g < 3.0; g += 0.05) {
    double w = omega(g, 1.0, lp);
    CHECK(w <= prev + 1e-15);
    prev = w;
  }
}

TEST_CASE("clamped rate never goes negative") {
  LinkParams lp{128, 10.0};
  CHECK(achievable_rate(lp, 0.001, 1e-6) < 0.0);
  CHECK(achievable_rate_clamped(lp, 0.001, 1e-6) == 0.0);
  CHECK(achievable_rate_clamped(lp, 1.0, 1e-3) ==
        doctest::Approx(achievable_rate(lp, 1.0, 1e-3)).epsilon(1e-15));
}

TEST_CASE("region integrals match an independent Simpson oracle") {
  ChannelModel ch = ChannelModel::rayleigh();
  LinkParams lp{128, 10.0};
  for (Region rg : {Region{0.0, 0.6, 0.9}, Region{0.6, 1.5, 1.8}, Region{1.5, 4.0, 2.4}}) {
    auto err = [&](double g) { return ch.pdf(g) * omega(g, rg.rate, lp); };
    auto succ = [&](double g) { return ch.pdf(g) * (1.0 - omega(g, rg.rate, lp)); };
    double cep_ref = simpson(err, rg.lo, rg.hi, 20000);
    double succ_ref = simpson(succ, rg.lo, rg.hi, 20000);
    CHECK(region_cep(rg, ch, lp) == doctest::Approx(cep_ref).epsilon(1e-8));
    CHECK(region_success_mass(rg, ch, lp) == doctest::Approx(succ_ref).epsilon(1e-8));
    CHECK(region_goodput(rg, ch, lp) ==
          doctest::Approx(rg.rate * succ_ref).epsilon(1e-8));
  }
}

TEST_CASE("zero-rate region conventions") {
  ChannelModel ch = ChannelModel::rayleigh();
  LinkParams lp{128, 10.0};
  Region rg{0.2, 0.9, 0.0};
  CHECK(region_goodput(rg, ch, lp) == 0.0);
  double mass = ch.survival(0.2) - ch.survival(0.9);
  CHECK(region_cep(rg, ch, lp) == doctest::Approx(mass).epsilon(1e-12));
}

TEST_CASE("error and success mass partition the region") {
  ChannelModel ch = ChannelModel::rician(10.0);
  LinkParams lp{128, 10.0};
  Region rg{0.4, 1.3, 1.2};
  double mass = ch.cdf(1.3) - ch.cdf(0.4);
  CHECK(region_cep(rg, ch, lp) + region_success_mass(rg, ch, lp) ==
        doctest::Approx(mass).epsilon(1e-10));
}

TEST_CASE("unbounded regions truncate at the channel tail") {
  ChannelModel ch = ChannelModel::rayleigh();
  LinkParams lp{128, 10.0};
  double inf = std::numeric_limits<double>::infinity();
  Region rg{1.0, inf, 1.5};
  double far = ch.upper_truncation(1e-13);
  double ref = simpson(
      [&](double g) { return ch.pdf(g) * (1.0 - omega(g, rg.rate, lp)); }, 1.0, far, 40000);
  CHECK(region_success_mass(rg, ch, lp) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("scheme totals add up the regions") {
  ChannelModel ch = ChannelModel::rician(10.0);
  LinkParams lp{128, 10.0};
  double inf = std::numeric_limits<double>::infinity();
  QuantizationScheme sch;
  sch.boundaries = {0.0, 0.7, 1.1, inf};
  sch.rates = {0.8, 1.4, 1.9};
  GoodputReport rep = scheme_totals(sch, ch, lp);
  double gp = 0.0, cep = 0.0;
  for (int i = 0; i < 3; ++i) {
    Region rg{sch.boundaries[i], sch.boundaries[i + 1], sch.rates[i]};
    gp += region_goodput(rg, ch, lp);
    cep += region_cep(rg, ch, lp);
    CHECK(rep.per_region_goodput[i] ==
          doctest::Approx(region_goodput(rg, ch, lp)).epsilon(1e-12));
  }
  CHECK(rep.total_goodput_nats == doctest::Approx(gp).epsilon(1e-12));
  CHECK(rep.total_cep == doctest::Approx(cep).epsilon(1e-12));
  CHECK(rep.total_goodput_bpcu == doctest::Approx(gp / kLn2).epsilon(1e-12));
}

TEST_CASE("scheme validation rejects malformed inputs") {
  QuantizationScheme sch;
  sch.boundaries = {0.0, 1.0};
  sch.rates = {1.0, 2.0};
  CHECK_THROWS_AS(sch.validate(), std::invalid_argument);
  sch.boundaries = {0.0, 1.0, 0.5};
  CHECK_THROWS_AS(sch.validate(), std::invalid_argument);
  sch.boundaries = {0.0, 0.5, 1.0};
  sch.rates = {1.0, -0.5};
  CHECK_THROWS_AS(sch.validate(), std::invalid_argument);
  sch.rates = {1.0, 2.0};
  CHECK_NOTHROW(sch.validate());
}
