#pragma once

// Special functions backing the two-dimensional solution families: rising
// factorials, the real Gamma function with the reciprocal-pole convention,
// the Gauss hypergeometric series 2F1 (terminating, or |z|<1), associated
// Legendre functions P_nu^{+-s}, and residual checks for the polar and
// associated Legendre ODEs.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tfb::sf {

inline bool is_nonpositive_integer(double x, double tol = 1e-9) {
  return x <= tol && std::abs(x - std::round(x)) <= tol;
}

/// Rising factorial (q)_l = q (q+1) ... (q+l-1), with (q)_0 = 1.
inline double pochhammer(double q, int l) {
  if (l < 0) throw std::invalid_argument("pochhammer: l must be >= 0");
  double p = 1.0;
  for (int k = 0; k < l; ++k) p *= q + k;
  return p;
}

/// Gamma on the real line; poles at nonpositive integers are an error here,
/// use recip_gamma where the pole convention 1/Gamma(-m) = 0 is wanted.
inline double gamma_real(double x) {
  if (is_nonpositive_integer(x, 1e-12))
    throw std::domain_error("gamma_real: pole at nonpositive integer");
  return std::tgamma(x);
}

/// 1/Gamma with the convention that the value is exactly 0 at poles.
inline double recip_gamma(double x) {
  if (is_nonpositive_integer(x, 1e-12)) return 0.0;
  return 1.0 / std::tgamma(x);
}

struct Hyp2F1Params {
  double alpha;
  double beta;
  double gamma;
  double z;
};

/// Gauss hypergeometric sum  sum_k (a)_k (b)_k / ((c)_k k!) z^k.
///
/// Exact finite sum when a or b is a nonpositive integer; otherwise partial
/// sums for |z| < 1 to 1e-13 relative tolerance.  Everything the solution
/// families need terminates, so no analytic continuation is attempted.
inline double hyp2f1(double alpha, double beta, double gamma, double z) {
  if (is_nonpositive_integer(gamma))
    throw std::domain_error("hyp2f1: gamma parameter is a nonpositive integer");

  int terms = -1;  // k index of last nonzero coefficient, if terminating
  if (is_nonpositive_integer(alpha)) terms = static_cast<int>(std::llround(-alpha));
  if (is_nonpositive_integer(beta)) {
    const int tb = static_cast<int>(std::llround(-beta));
    terms = (terms < 0) ? tb : std::min(terms, tb);
  }

  if (terms >= 0) {
    double sum = 1.0, coeff = 1.0;
    for (int k = 0; k < terms; ++k) {
      coeff *= (alpha + k) * (beta + k) / ((gamma + k) * (k + 1));
      sum += coeff * std::pow(z, k + 1);
    }
    return sum;
  }

  if (std::abs(z) >= 1.0)
    throw std::domain_error("hyp2f1: non-terminating series needs |z| < 1");
  if (z == 0.0) return 1.0;

  double sum = 1.0, term = 1.0;
  for (int k = 0; k < 100000; ++k) {
    term *= (alpha + k) * (beta + k) / ((gamma + k) * (k + 1)) * z;
    sum += term;
    if (std::abs(term) <= 1e-13 * std::abs(sum)) return sum;
  }
  throw std::runtime_error("hyp2f1: series failed to converge");
}

inline double hyp2f1(const Hyp2F1Params& p) { return hyp2f1(p.alpha, p.beta, p.gamma, p.z); }

enum class OrderSign { Plus, Minus };  // order +s or -s

/// Associated Legendre function P_nu^{+-s} on (-1,1),
///
///   P_nu^{+-s}(x) = 1/Gamma(1 -+ s) ((1+x)/(1-x))^{+-s/2}
///                   2F1(nu+1, -nu, 1 -+ s, (1-x)/2),
///
/// restricted to terminating parameter sets: nu, nu+s or nu-s a nonnegative
/// integer (the equivalent hypergeometric form is used for the latter two).
inline double legendre_p(double nu, OrderSign order, double s, double x) {
  if (!(x > -1.0 && x < 1.0))
    throw std::domain_error("legendre_p: x must lie in (-1,1)");
  if (!(s > 0.0 && s < 1.0))
    throw std::domain_error("legendre_p: s must lie in (0,1)");

  const double sig = (order == OrderSign::Plus) ? 1.0 : -1.0;
  const double gamma_arg = 1.0 - sig * s;
  const double z = 0.5 * (1.0 - x);

  if (is_nonpositive_integer(-nu)) {
    // primary form terminates
    const double pre = std::pow((1.0 + x) / (1.0 - x), 0.5 * sig * s) / gamma_real(gamma_arg);
    return pre * hyp2f1(nu + 1.0, -nu, gamma_arg, z);
  }
  if (is_nonpositive_integer(-sig * s - nu)) {
    // equivalent form ((1-x^2)/4)^{-+s/2} 2F1(-+s - nu, 1 -+ s + nu, 1 -+ s, (1-x)/2)
    // (linear transformation DLMF 15.8.1 applied to the primary form)
    const double pre = std::pow(0.25 * (1.0 - x * x), -0.5 * sig * s) / gamma_real(gamma_arg);
    return pre * hyp2f1(-sig * s - nu, 1.0 - sig * s + nu, gamma_arg, z);
  }
  throw std::domain_error("legendre_p: non-terminating parameter set rejected");
}

/// Residual of the polar trace equation y'' + a ctg(theta) y' + lambda(lambda+a) y.
inline double polar_ode_residual(double y, double dy, double d2y, double theta, double a,
                                 double lambda) {
  if (!(theta > 0.0 && theta < M_PI))
    throw std::domain_error("polar_ode_residual: theta must lie in (0,pi)");
  return d2y + a * (std::cos(theta) / std::sin(theta)) * dy + lambda * (lambda + a) * y;
}

/// Residual of the associated Legendre equation
/// (1-x^2) h'' - 2x h' + (nu^2 + nu - s^2/(1-x^2)) h  with nu = lambda - s.
inline double associated_ode_residual(double h, double dh, double d2h, double x, double s,
                                      double nu) {
  if (!(x > -1.0 && x < 1.0))
    throw std::domain_error("associated_ode_residual: x must lie in (-1,1)");
  const double om = 1.0 - x * x;
  return om * d2h - 2.0 * x * dh + (nu * nu + nu - s * s / om) * h;
}

}  // namespace tfb::sf
