#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fbq/algorithm1.hpp"
#include "fbq/oracle.hpp"

using namespace fbq;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// d/dr of the region goodput, from the analytic integrand (no shared code
// with the solver): G'(r) = int f (1-Omega) - r int f phi(z) sqrt(n/V),
// z = (C - r) sqrt(n/V).
double goodput_derivative(double lo, double hi, double r, const ChannelModel& ch,
                          const LinkParams& lp) {
  auto integrand = [&](double g) {
    double v = dispersion(g, lp);
    if (v <= 0.0) return 0.0;
    double sq = std::sqrt(lp.n / v);
    double z = (capacity(g, lp) - r) * sq;
    double succ = 1.0 - gauss_q(z);
    double dens = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    return ch.pdf(g) * (succ - r * dens * sq);
  };
  return simpson(integrand, lo, hi, 40000);
}

const ChannelModel kRay = ChannelModel::rayleigh();
const ChannelModel kRice = ChannelModel::rician(10.0);
const LinkParams kLp{128, 10.0};

}  // namespace

TEST_CASE("per-region rate optimum satisfies the stationarity condition") {
  for (const ChannelModel* ch : {&kRay, &kRice}) {
    for (auto [lo, hi] : {std::pair{0.0, 0.6}, {0.6, 1.2}, {1.2, 2.5}}) {
      double r = optimal_rate(lo, hi, *ch, kLp);
      CHECK(r > 0.0);
      CHECK(std::fabs(goodput_derivative(lo, hi, r, *ch, kLp)) <= 1e-6);
    }
  }
}

TEST_CASE("per-region rate optimum beats a brute-force scan") {
  double lo = 0.5, hi = 1.4;
  double r_star = optimal_rate(lo, hi, kRice, kLp);
  double best = 0.0;
  for (int i = 1; i <= 4000; ++i) {
    double r = 3.0 * i / 4000;
    best = std::max(best, region_goodput({lo, hi, r}, kRice, kLp));
  }
  double v_star = region_goodput({lo, hi, r_star}, kRice, kLp);
  CHECK(v_star >= best - 1e-9);
}

TEST_CASE("per-region rate optimum rejects massless regions") {
  CHECK_THROWS_AS(optimal_rate(60.0, 61.0, kRay, kLp), degenerate_region_error);
}

TEST_CASE("goodput curvature matches finite differences") {
  for (auto [lo, hi] : {std::pair{0.3, 0.9}, {0.9, 1.8}}) {
    for (double r : {0.4, 0.9, 1.4}) {
      double h = 1e-4;
      auto G = [&](double rr) { return region_goodput({lo, hi, rr}, kRice, kLp); };
      double fd = (G(r + h) - 2.0 * G(r) + G(r - h)) / (h * h);
      double an = rate_curvature(lo, hi, r, kRice, kLp);
      CHECK(an == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("curvature changes sign at the inflection rate") {
  double lo = 0.6, hi = 1.5;
  double ri = inflection_point(lo, hi, kRice, kLp);
  CHECK(ri > 0.0);
  CHECK(rate_curvature(lo, hi, ri * 0.9, kRice, kLp) < 0.0);
  CHECK(rate_curvature(lo, hi, ri * 1.1, kRice, kLp) > 0.0);
}

TEST_CASE("closed-form rate approximation tracks the exact optimum") {
  // Interior regions across blocklengths and SNRs; the approximation comes
  // from the piecewise-linear error-probability model and should stay within
  // a few percent of the exact golden-section answer.
  for (int n : {64, 128, 256}) {
    for (double pdb : {5.0, 10.0}) {
      LinkParams lp{n, db_to_lin(pdb)};
      for (auto [qlo, qhi] : {std::pair{0.25, 0.5}, {0.5, 0.75}, {0.75, 0.95}}) {
        double lo = kRice.inv_cdf(qlo), hi = kRice.inv_cdf(qhi);
        double exact = optimal_rate(lo, hi, kRice, lp);
        double approx = approx_rate(lo, hi, kRice, lp);
        CHECK(approx == doctest::Approx(exact).epsilon(0.05));
      }
    }
  }
}

TEST_CASE("boundary update solves the rate-indifference equation") {
  LinkParams lp{128, 10.0};
  double r1 = 0.5, r2 = 1.0;
  BoundaryUpdate up = optimal_boundary(r1, r2, {0.01, 3.0}, lp);
  REQUIRE_FALSE(up.clamped);
  REQUIRE_FALSE(up.merge);
  auto val = [&](double phi, double r) { return r * (1.0 - omega(phi, r, lp)); };
  CHECK(val(up.phi, r1) == doctest::Approx(val(up.phi, r2)).epsilon(1e-9));
  // Below the boundary the lower rate wins; above it the higher one does.
  CHECK(val(up.phi * 0.9, r1) > val(up.phi * 0.9, r2));
  CHECK(val(up.phi * 1.1, r1) < val(up.phi * 1.1, r2));
}

TEST_CASE("boundary update ignores the spurious zero at the origin") {
  // Both sides of the indifference equation vanish at gamma = 0; the solver
  // must return the interior crossing, not the origin.
  LinkParams lp{128, 10.0};
  BoundaryUpdate up = optimal_boundary(0.5, 1.0, {0.0, 3.0}, lp);
  CHECK_FALSE(up.clamped);
  CHECK(up.phi > 0.05);
}

TEST_CASE("boundary update handles degenerate inputs") {
  LinkParams lp{128, 10.0};
  BoundaryUpdate up = optimal_boundary(0.7, 0.7, {0.1, 2.0}, lp);
  CHECK(up.merge);
  CHECK_THROWS_AS(optimal_boundary(1.0, 0.5, {0.1, 2.0}, lp), std::invalid_argument);
  // Bracket entirely above the crossing: clamps to the nearer endpoint.
  BoundaryUpdate hi = optimal_boundary(0.5, 1.0, {2.5, 3.0}, lp);
  CHECK(hi.clamped);
}

TEST_CASE("block coordinate descent with one region reduces to the rate optimum") {
  auto [sch, rep] = run_algorithm1(kRice, kLp, 1);
  double inf = std::numeric_limits<double>::infinity();
  double r = optimal_rate(0.0, inf, kRice, kLp);
  CHECK(rep.converged);
  CHECK(sch.rates[0] == doctest::Approx(r).epsilon(1e-8));
}

TEST_CASE("block coordinate descent improves on its initialization and converges") {
  for (const ChannelModel* ch : {&kRay, &kRice}) {
    for (int phi : {2, 4}) {
      auto [sch, rep] = run_algorithm1(*ch, kLp, phi);
      REQUIRE(rep.converged);
      REQUIRE_FALSE(rep.trace.empty());
      CHECK(rep.total_goodput_nats >= rep.trace.front().goodput_nats - 1e-12);
      CHECK(rep.iterations >= 1);
      // Boundaries are strictly increasing and the rates with them.
      for (int i = 1; i < phi; ++i) {
        CHECK(sch.boundaries[i] > sch.boundaries[i - 1]);
        CHECK(sch.rates[i] > sch.rates[i - 1]);
      }
    }
  }
}

TEST_CASE("more feedback regions never hurt") {
  double prev = 0.0;
  for (int phi : {1, 2, 4}) {
    auto [sch, rep] = run_algorithm1(kRice, kLp, phi);
    CHECK(rep.total_goodput_nats >= prev - 1e-10);
    prev = rep.total_goodput_nats;
  }
}

TEST_CASE("custom initialization reaches the same optimum") {
  auto [s1, r1] = run_algorithm1(kRice, kLp, 3);
  double inf = std::numeric_limits<double>::infinity();
  std::vector<double> init{0.0, 0.4, 1.3, inf};
  auto [s2, r2] = run_algorithm1(kRice, kLp, 3, init);
  CHECK(r2.converged);
  CHECK(r2.total_goodput_nats == doctest::Approx(r1.total_goodput_nats).epsilon(1e-6));
}

TEST_CASE("two-region solution matches the exhaustive grid oracle") {
  GridSpec grid;
  grid.boundary_grid = 40;
  grid.refine_levels = 2;
  for (const ChannelModel* ch : {&kRay, &kRice}) {
    auto [sch, rep] = run_algorithm1(*ch, kLp, 2);
    OracleResult orc = grid_search(*ch, kLp, 2, grid);
    CHECK(nats_to_bpcu(std::fabs(orc.goodput_nats - rep.total_goodput_nats)) <= 0.02);
    CHECK(rep.total_goodput_nats >= orc.goodput_nats - 1e-6);
  }
}
