#include "fbq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fbq {

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0) || !(tail_mass > 0))
    throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
  if (max_subdivisions < 1)
    throw std::invalid_argument("QuadratureSpec: max_subdivisions < 1");
}

void Bracket::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw std::invalid_argument("Bracket: requires finite lo < hi");
}

double gauss_q(double t) {
  return 0.5 * std::erfc(t * 0.7071067811865475244);
}

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / kSqrt2Pi;
}

// Acklam's rational approximation to the standard normal quantile.
double norm_inv_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double gauss_q_inv(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("gauss_q_inv: p must lie in (0,1)");
  // Q(t) = Phi(-t), so t = -Phi^{-1}(p).
  double t = -norm_inv_approx(p);
  for (int i = 0; i < 2; ++i) {
    double pdf = std_normal_pdf(t);
    if (pdf <= 0.0) break;
    t += (gauss_q(t) - p) / pdf;
  }
  return t;
}

namespace {

double bessel_i0_series(double x) {
  // Ascending series, all terms positive; converges to machine precision for
  // the |x| <= 21 range it is used on.
  double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double bessel_i0_asymptotic_scaled(double ax) {
  // exp(-x) I0(x) ~ (1/sqrt(2*pi*x)) * sum_k a_k / x^k for large x.
  double sum = 1.0, term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    double num = 2.0 * k - 1.0;
    term *= num * num / (8.0 * k * ax);
    if (term >= prev) break;  // asymptotic series: stop at smallest term
    sum += term;
    prev = term;
    if (term < sum * 1e-17) break;
  }
  return sum / std::sqrt(2.0 * M_PI * ax);
}

constexpr double kBesselCrossover = 21.0;

}  // namespace

double bessel_i0_scaled(double x) {
  double ax = std::fabs(x);
  if (ax <= kBesselCrossover) return std::exp(-ax) * bessel_i0_series(ax);
  return bessel_i0_asymptotic_scaled(ax);
}

double bessel_i0(double x) {
  double ax = std::fabs(x);
  if (ax <= kBesselCrossover) return bessel_i0_series(ax);
  if (ax > 709.0)
    throw std::overflow_error("bessel_i0: argument too large, use bessel_i0_scaled");
  return std::exp(ax) * bessel_i0_asymptotic_scaled(ax);
}

namespace {

// 15-point Kronrod extension of 7-point Gauss-Legendre, on [-1, 1].
const double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, val, err;
};

Panel eval_panel(const RealFn& f, double a, double b) {
  double c = 0.5 * (a + b);
  double h = 0.5 * (b - a);
  double fc = f(c);
  double res_g = fc * kGaussWeights[3];
  double res_k = fc * kKronrodWeights[7];
  for (int j = 0; j < 7; ++j) {
    double x = h * kKronrodNodes[j];
    double fsum = f(c - x) + f(c + x);
    res_k += fsum * kKronrodWeights[j];
    if (j % 2 == 1) res_g += fsum * kGaussWeights[j / 2];
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.val = res_k * h;
  p.err = std::fabs((res_k - res_g) * h);
  return p;
}

double integrate_panels(const RealFn& f, std::vector<Panel>& panels,
                        const QuadratureSpec& spec) {
  int splits = static_cast<int>(panels.size());
  while (true) {
    double total = 0.0, err = 0.0;
    for (const Panel& p : panels) {
      total += p.val;
      err += p.err;
    }
    double tol = std::max(spec.abs_tol, spec.rel_tol * std::fabs(total));
    if (err <= tol) return total;
    if (splits >= spec.max_subdivisions)
      throw quadrature_error("integrate: subdivision budget exhausted", total, err);
    // Split the worst panel; ties resolved toward the leftmost for determinism.
    size_t worst = 0;
    for (size_t i = 1; i < panels.size(); ++i)
      if (panels[i].err > panels[worst].err) worst = i;
    Panel p = panels[worst];
    double mid = 0.5 * (p.a + p.b);
    panels[worst] = eval_panel(f, p.a, mid);
    panels.push_back(eval_panel(f, mid, p.b));
    ++splits;
  }
}

}  // namespace

double integrate(const RealFn& f, double lo, double hi, const QuadratureSpec& spec) {
  spec.validate();
  if (!(lo < hi)) {
    if (lo == hi) return 0.0;
    throw std::invalid_argument("integrate: requires lo <= hi");
  }
  std::vector<Panel> panels{eval_panel(f, lo, hi)};
  return integrate_panels(f, panels, spec);
}

double integrate_split(const RealFn& f, double lo, double hi,
                       std::initializer_list<double> breaks,
                       const QuadratureSpec& spec) {
  spec.validate();
  if (!(lo < hi)) {
    if (lo == hi) return 0.0;
    throw std::invalid_argument("integrate_split: requires lo <= hi");
  }
  std::vector<double> pts{lo};
  std::vector<double> inner(breaks);
  std::sort(inner.begin(), inner.end());
  for (double x : inner)
    if (x > pts.back() && x < hi) pts.push_back(x);
  pts.push_back(hi);
  std::vector<Panel> panels;
  panels.reserve(pts.size() - 1);
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    panels.push_back(eval_panel(f, pts[i], pts[i + 1]));
  return integrate_panels(f, panels, spec);
}

double find_root(const RealFn& g, Bracket b, double tol) {
  b.validate();
  if (!(tol > 0)) throw std::invalid_argument("find_root: tol must be positive");
  double a = b.lo, c = b.hi;
  double fa = g(a), fc = g(c);
  if (fa == 0.0) return a;
  if (fc == 0.0) return c;
  if (fa * fc > 0.0) throw no_root_error("find_root: no sign change in bracket");
  // Brent's method.
  double bb = c, fb = fc;
  double cc = a, fcc = fa;
  double d = bb - cc, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::fabs(fcc) < std::fabs(fb)) {
      a = bb; bb = cc; cc = a;
      fa = fb; fb = fcc; fcc = fa;
    }
    double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(bb) + 0.5 * tol;
    double xm = 0.5 * (cc - bb);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return bb;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double s = fb / fa, p, q;
      if (a == cc) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        double qq = fa / fcc, r = fb / fcc;
        p = s * (2.0 * xm * qq * (qq - r) - (bb - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = bb;
    fa = fb;
    bb += (std::fabs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = g(bb);
    if ((fb > 0.0) == (fcc > 0.0)) {
      cc = a;
      fcc = fa;
      d = bb - cc;
      e = d;
    }
  }
  return bb;
}

MaxResult maximize_1d(const RealFn& f, Bracket b, double tol) {
  b.validate();
  if (!(tol > 0)) throw std::invalid_argument("maximize_1d: tol must be positive");
  const double invphi = 0.6180339887498948482;
  double lo = b.lo, hi = b.hi;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 >= f2) {  // >= keeps the left half on plateaus
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    }
  }
  double xin = (f1 >= f2) ? x1 : x2;
  double fin = std::max(f1, f2);
  double flo = f(b.lo), fhi = f(b.hi);
  MaxResult r{xin, fin, false};
  if (flo >= r.value) r = {b.lo, flo, true};
  if (fhi > r.value) r = {b.hi, fhi, true};
  return r;
}

}  // namespace fbq
