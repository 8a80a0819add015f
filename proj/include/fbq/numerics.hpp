#pragma once

#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace fbq {

using RealFn = std::function<double(double)>;

// Tolerances and budgets for adaptive quadrature. tail_mass is the residual
// probability mass allowed past the truncation point of semi-infinite
// integrals (the caller supplies the finite truncation point itself).
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 200;
  double tail_mass = 1e-12;
  void validate() const;
};

struct Bracket {
  double lo;
  double hi;
  void validate() const;
};

// Subdivision budget exhausted before the tolerance was met. Carries the best
// available estimate and its error bound so callers may still use them.
class quadrature_error : public std::runtime_error {
 public:
  quadrature_error(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), estimate(estimate), error_bound(error_bound) {}
  double estimate;
  double error_bound;
};

class no_root_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gaussian tail probability Q(t) = (1/sqrt(2*pi)) int_t^inf exp(-u^2/2) du.
double gauss_q(double t);

// Inverse of gauss_q on (0,1). Rational approximation plus Newton polish.
double gauss_q_inv(double p);

// Modified Bessel function of the first kind, order zero. The unscaled form
// throws std::overflow_error once exp(|x|) is not representable; use the
// scaled variant exp(-|x|)*I0(x) there.
double bessel_i0(double x);
double bessel_i0_scaled(double x);

// Globally adaptive Gauss-Kronrod quadrature over a finite interval.
double integrate(const RealFn& f, double lo, double hi,
                 const QuadratureSpec& spec = {});

// Same, with interior breakpoints where the integrand has kinks or sharp
// transitions. Breakpoints outside (lo, hi) are ignored.
double integrate_split(const RealFn& f, double lo, double hi,
                       std::initializer_list<double> breaks,
                       const QuadratureSpec& spec = {});

// Safeguarded bisection/interpolation root finder. Requires a sign change on
// the bracket; shrinks the bracket width below tol.
double find_root(const RealFn& g, Bracket b, double tol);

struct MaxResult {
  double arg;
  double value;
  bool at_boundary;
};

// Golden-section maximization with endpoint checks. Plateaus break ties
// toward the smallest argument.
MaxResult maximize_1d(const RealFn& f, Bracket b, double tol);

}  // namespace fbq
