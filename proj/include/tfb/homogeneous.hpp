#pragma once

// Exact evaluation of the classified two-variable homogeneous solutions
// Phi_m (lambda = m), Psi_m (lambda = m+s), Pi_m (lambda = m+2s), their
// normalized representatives h_lambda with H(0,1) = 1, embeddings into the
// ambient grid along an in-plane direction, the analytic contact/free
// boundary/nodal/spine sets of the obstacle-admissible members, and the
// general superposition representation Sum p_k(x'') F_{m-k}(x_n, x_{n+1}).

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <vector>

#include "tfb/grid.hpp"
#include "tfb/special_functions.hpp"

namespace tfb {

enum class Family { Phi, Psi, PsiReflected, Pi };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Phi: return "Phi";
    case Family::Psi: return "Psi";
    case Family::PsiReflected: return "PsiReflected";
    case Family::Pi: return "Pi";
  }
  return "?";
}

inline double lambda_of(Family f, int m, double s) {
  switch (f) {
    case Family::Phi: return m;
    case Family::Psi:
    case Family::PsiReflected: return m + s;
    case Family::Pi: return m + 2.0 * s;
  }
  return 0.0;
}

// --- coefficient recursions --------------------------------------------------

/// alpha_0 = 1, alpha_{k+1} = -[(m-2k)(m-2k-1) / (4(k+1)(k+1-s))] alpha_k.
inline std::vector<double> phi_coefficients(int m, double s) {
  const int kmax = m / 2;
  std::vector<double> alpha(kmax + 1, 0.0);
  alpha[0] = 1.0;
  for (int k = 0; k < kmax; ++k)
    alpha[k + 1] = -((m - 2 * k) * (m - 2 * k - 1)) / (4.0 * (k + 1) * (k + 1 - s)) * alpha[k];
  return alpha;
}

/// beta_k = (m+1)_k (-m)_k / (2^k k! (1-s)_k).
inline std::vector<double> psi_coefficients(int m, double s) {
  std::vector<double> beta(m + 1, 0.0);
  for (int k = 0; k <= m; ++k)
    beta[k] = sf::pochhammer(m + 1.0, k) * sf::pochhammer(-static_cast<double>(m), k) /
              (std::pow(2.0, k) * sf::pochhammer(1.0, k) * sf::pochhammer(1.0 - s, k));
  return beta;
}

/// gamma_k = (-1)^k / (4^k k! (1+s)_k).
inline std::vector<double> pi_coefficients(int m, double s) {
  const int kmax = m / 2;
  std::vector<double> gamma(kmax + 1, 0.0);
  for (int k = 0; k <= kmax; ++k)
    gamma[k] = ((k % 2) ? -1.0 : 1.0) /
               (std::pow(4.0, k) * sf::pochhammer(1.0, k) * sf::pochhammer(1.0 + s, k));
  return gamma;
}

// --- two-dimensional evaluations ---------------------------------------------

inline double phi_eval(int m, double x1, double x2, double s) {
  if (m < 0) throw std::invalid_argument("phi_eval: m must be >= 0");
  const std::vector<double> alpha = phi_coefficients(m, s);
  double sum = 0.0;
  for (int k = 0; k <= m / 2; ++k)
    sum += alpha[k] * std::pow(x1, m - 2 * k) * std::pow(x2, 2 * k);
  return sum;
}

inline double psi_eval(int m, double x1, double x2, double s) {
  if (m < 0) throw std::invalid_argument("psi_eval: m must be >= 0");
  const double rho = std::hypot(x1, x2);
  if (rho == 0.0) return 0.0;  // lambda = m+s > 0
  const double plus = std::max(rho + x1, 0.0);  // vanishes on the contact ray
  const double minus = std::max(rho - x1, 0.0);
  const std::vector<double> beta = psi_coefficients(m, s);
  double sum = 0.0;
  for (int k = 0; k <= m; ++k)
    sum += beta[k] * std::pow(minus, k) * std::pow(rho, m - k);
  return std::pow(plus, s) * sum;
}

inline double family_eval_2d(Family f, int m, double x1, double x2, double s);

// --- homogeneous polynomials over the thin variables --------------------------

/// Polynomial with a finite multi-index coefficient map; used for the p factors
/// in the Pi representation and the superpositions of Prop-type generality.
struct PolynomialND {
  int nvars = 1;
  std::map<Idx, double> coeffs;  // exponent -> coefficient

  static PolynomialND constant(double c, int nvars = 1) {
    PolynomialND p;
    p.nvars = nvars;
    if (c != 0.0) p.coeffs[{0, 0, 0}] = c;
    return p;
  }

  static PolynomialND monomial(const Idx& exponents, double c, int nvars) {
    PolynomialND p;
    p.nvars = nvars;
    if (c != 0.0) p.coeffs[exponents] = c;
    return p;
  }

  double eval(const Vec& x) const {
    double sum = 0.0;
    for (const auto& [e, c] : coeffs) {
      double term = c;
      for (int i = 0; i < nvars; ++i) term *= std::pow(x[i], e[i]);
      sum += term;
    }
    return sum;
  }

  int total_degree(const Idx& e) const { return e[0] + e[1] + e[2]; }

  bool is_homogeneous(int m) const {
    for (const auto& [e, c] : coeffs)
      if (c != 0.0 && total_degree(e) != m) return false;
    return true;
  }

  PolynomialND laplacian() const {
    PolynomialND out;
    out.nvars = nvars;
    for (const auto& [e, c] : coeffs) {
      for (int i = 0; i < nvars; ++i) {
        if (e[i] >= 2) {
          Idx d = e;
          d[i] -= 2;
          out.coeffs[d] += c * e[i] * (e[i] - 1);
        }
      }
    }
    for (auto it = out.coeffs.begin(); it != out.coeffs.end();)
      it = (it->second == 0.0) ? out.coeffs.erase(it) : std::next(it);
    return out;
  }

  /// Multi-index of the largest non-harmonic contribution, if any.
  std::optional<Idx> harmonic_defect(double tol = 1e-12) const {
    double scale = 0.0;
    for (const auto& [e, c] : coeffs) scale = std::max(scale, std::abs(c));
    const PolynomialND lap = laplacian();
    for (const auto& [e, c] : lap.coeffs)
      if (std::abs(c) > tol * std::max(1.0, scale)) return e;
    return std::nullopt;
  }
};

/// Pi family with a general m-homogeneous polynomial p over the thin variables:
/// |x_{n+1}|^{2s} Sum_k gamma_k x_{n+1}^{2k} (Lap^k p)(x').
inline double pi_eval(int m, const PolynomialND& p, const Vec& x, double x_last, double s) {
  if (!p.is_homogeneous(m))
    throw std::invalid_argument("pi_eval: polynomial is not m-homogeneous");
  if (x_last == 0.0) return 0.0;
  const std::vector<double> gamma = pi_coefficients(m, s);
  double sum = 0.0;
  PolynomialND lap = p;
  for (int k = 0; k <= m / 2; ++k) {
    sum += gamma[k] * std::pow(x_last, 2 * k) * lap.eval(x);
    lap = lap.laplacian();
  }
  return std::pow(std::abs(x_last), 2.0 * s) * sum;
}

/// Two-variable special case p = x1^m of the Pi family.
inline double pi_eval_2d(int m, double x1, double x2, double s) {
  PolynomialND p = PolynomialND::monomial({m, 0, 0}, 1.0, 1);
  return pi_eval(m, p, {x1, 0.0, 0.0}, x2, s);
}

/// Two-variable family member with coefficients precomputed once; the
/// workhorse for embeddings, normalization quadratures and profile fits.
class FamilyEvaluator2D {
 public:
  FamilyEvaluator2D(Family f, int m, double s) : f_(f), m_(m), s_(s) {
    switch (f) {
      case Family::Phi: coeffs_ = phi_coefficients(m, s); break;
      case Family::Psi:
      case Family::PsiReflected: coeffs_ = psi_coefficients(m, s); break;
      case Family::Pi: {
        // collapse gamma_k and the derivatives of x1^m into plain monomial
        // coefficients of x1^{m-2k} x2^{2k}
        const std::vector<double> gamma = pi_coefficients(m, s);
        coeffs_.resize(gamma.size());
        for (std::size_t k = 0; k < gamma.size(); ++k) {
          double fall = 1.0;
          for (std::size_t j = 0; j < 2 * k; ++j) fall *= m - static_cast<int>(j);
          coeffs_[k] = gamma[k] * fall;
        }
        break;
      }
    }
  }

  double operator()(double x1, double x2) const {
    switch (f_) {
      case Family::PsiReflected: x1 = -x1; [[fallthrough]];
      case Family::Psi: {
        const double rho = std::hypot(x1, x2);
        if (rho == 0.0) return 0.0;
        const double plus = std::max(rho + x1, 0.0);
        const double minus = std::max(rho - x1, 0.0);
        double sum = 0.0, mk = 1.0;
        double rk = ipow(rho, m_);
        for (int k = 0; k <= m_; ++k) {
          sum += coeffs_[k] * mk * rk;
          mk *= minus;
          rk /= rho;
        }
        return std::pow(plus, s_) * sum;
      }
      case Family::Phi: {
        const double x22 = x2 * x2;
        double sum = 0.0, yk = 1.0;
        for (int k = 0; k <= m_ / 2; ++k) {
          sum += coeffs_[k] * ipow(x1, m_ - 2 * k) * yk;
          yk *= x22;
        }
        return sum;
      }
      case Family::Pi: {
        if (x2 == 0.0) return 0.0;
        const double x22 = x2 * x2;
        double sum = 0.0, yk = 1.0;
        for (int k = 0; k <= m_ / 2; ++k) {
          sum += coeffs_[k] * ipow(x1, m_ - 2 * k) * yk;
          yk *= x22;
        }
        return std::pow(std::abs(x2), 2.0 * s_) * sum;
      }
    }
    return 0.0;
  }

 private:
  static double ipow(double x, int e) {
    double r = 1.0;
    while (e-- > 0) r *= x;
    return r;
  }

  Family f_;
  int m_;
  double s_;
  std::vector<double> coeffs_;
};

inline double family_eval_2d(Family f, int m, double x1, double x2, double s) {
  return FamilyEvaluator2D(f, m, s)(x1, x2);
}

// --- polar traces with closed-form derivatives --------------------------------

namespace detail {

// dense univariate polynomials in c = cos(theta)
using Poly1 = std::vector<double>;

inline Poly1 poly_mul(const Poly1& a, const Poly1& b) {
  Poly1 out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline void poly_acc(Poly1& a, const Poly1& b, double scale) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t j = 0; j < b.size(); ++j) a[j] += scale * b[j];
}

inline Poly1 poly_pow(const Poly1& a, int k) {
  Poly1 out{1.0};
  for (int i = 0; i < k; ++i) out = poly_mul(out, a);
  return out;
}

inline Poly1 poly_derive(const Poly1& a) {
  if (a.size() <= 1) return {0.0};
  Poly1 out(a.size() - 1, 0.0);
  for (std::size_t i = 1; i < a.size(); ++i) out[i - 1] = i * a[i];
  return out;
}

inline double poly_eval(const Poly1& a, double c) {
  double v = 0.0;
  for (std::size_t i = a.size(); i-- > 0;) v = v * c + a[i];
  return v;
}

struct Value2 {
  double f, df, d2f;  // value and first two derivatives in c
};

inline Value2 poly_eval2(const Poly1& a, double c) {
  return {poly_eval(a, c), poly_eval(poly_derive(a), c), poly_eval(poly_derive(poly_derive(a)), c)};
}

}  // namespace detail

/// Polar trace of a family member on the unit circle: value and theta
/// derivatives of y(theta) = F(cos theta, sin theta).  Closed form; no finite
/// differences involved.
struct TraceDerivatives {
  double y, dy, d2y;
};

inline TraceDerivatives family_trace(Family f, int m, double s, double theta) {
  if (!(theta > 0.0 && theta < M_PI))
    throw std::domain_error("family_trace: theta must lie in (0,pi)");
  const double c = std::cos(theta);
  const double sn = std::sin(theta);

  // Assemble y as g(c) or w(c)^mu * g(c) with polynomial g.
  double F, dF, d2F;  // derivatives with respect to c
  switch (f) {
    case Family::Phi: {
      const std::vector<double> alpha = phi_coefficients(m, s);
      detail::Poly1 g{0.0};
      for (int k = 0; k <= m / 2; ++k) {
        detail::Poly1 term = detail::poly_pow({1.0, 0.0, -1.0}, k);  // (1-c^2)^k
        detail::Poly1 shift(m - 2 * k + 1, 0.0);
        shift[m - 2 * k] = 1.0;
        detail::poly_acc(g, detail::poly_mul(term, shift), alpha[k]);
      }
      const auto v = detail::poly_eval2(g, c);
      F = v.f;
      dF = v.df;
      d2F = v.d2f;
      break;
    }
    case Family::Psi:
    case Family::PsiReflected: {
      const double cc = (f == Family::Psi) ? c : -c;
      const std::vector<double> beta = psi_coefficients(m, s);
      detail::Poly1 g{0.0};
      for (int k = 0; k <= m; ++k)
        detail::poly_acc(g, detail::poly_pow({1.0, -1.0}, k), beta[k]);  // (1-c)^k
      const auto v = detail::poly_eval2(g, cc);
      const double w = 1.0 + cc;  // > 0 for theta in (0,pi)
      const double ws = std::pow(w, s);
      double Fi = ws * v.f;
      double dFi = s * ws / w * v.f + ws * v.df;
      double d2Fi = s * (s - 1.0) * ws / (w * w) * v.f + 2.0 * s * ws / w * v.df + ws * v.d2f;
      if (f == Family::PsiReflected) {
        // chain rule through c -> -c
        dFi = -dFi;
      }
      F = Fi;
      dF = dFi;
      d2F = d2Fi;
      break;
    }
    case Family::Pi: {
      const std::vector<double> gamma = pi_coefficients(m, s);
      detail::Poly1 g{0.0};
      for (int k = 0; k <= m / 2; ++k) {
        // (1-c^2)^k d^{2k}/dc^{2k} c^m = (1-c^2)^k m!/(m-2k)! c^{m-2k}
        double fall = 1.0;
        for (int j = 0; j < 2 * k; ++j) fall *= m - j;
        detail::Poly1 term = detail::poly_pow({1.0, 0.0, -1.0}, k);
        detail::Poly1 shift(m - 2 * k + 1, 0.0);
        shift[m - 2 * k] = 1.0;
        detail::poly_acc(g, detail::poly_mul(term, shift), gamma[k] * fall);
      }
      const auto v = detail::poly_eval2(g, c);
      const double w = 1.0 - c * c;
      const double ws = std::pow(w, s);  // sin(theta)^{2s}
      F = ws * v.f;
      dF = s * ws / w * (-2.0 * c) * v.f + ws * v.df;
      d2F = s * (s - 1.0) * ws / (w * w) * 4.0 * c * c * v.f - 2.0 * s * ws / w * v.f -
            4.0 * s * c * ws / w * v.df + ws * v.d2f;
      break;
    }
    default:
      throw std::logic_error("family_trace: unknown family");
  }

  TraceDerivatives out;
  out.y = F;
  out.dy = -sn * dF;
  out.d2y = -c * dF + sn * sn * d2F;
  return out;
}

// --- normalized representatives h_lambda --------------------------------------

/// Decomposition of an admissible homogeneity lambda in {2m, 2m-1+s, 2m+2s}.
struct LambdaClass {
  Family family;
  int m;  // family index (Phi_{2m'}, Psi_{2m'-1}, Pi_{2m'})
  double lambda;
};

/// Nearest obstacle-admissible homogeneity within the window, if any.
inline std::optional<LambdaClass> classify_obstacle_lambda(double lambda_est, double s,
                                                           double window = 0.1) {
  std::optional<LambdaClass> best;
  double best_err = window;
  for (int m = 1; m <= 16; ++m) {
    const LambdaClass cand[3] = {{Family::Phi, 2 * m, 2.0 * m},
                                 {Family::Psi, 2 * m - 1, 2.0 * m - 1.0 + s},
                                 {Family::Pi, 2 * m, 2.0 * m + 2.0 * s}};
    for (const auto& c : cand) {
      const double err = std::abs(lambda_est - c.lambda);
      if (err <= best_err) {
        best_err = err;
        best = c;
      }
    }
  }
  return best;
}

namespace detail {

/// H_u(0,1) of a two-variable function by midpoint quadrature on a 2048^2
/// lattice over [-1,1] x [-1,1] (half stored, doubled by symmetry).
template <class F2>
inline double normalization_H(F2&& u, double a) {
  const int nx = 2048, ny = 1024;
  const double hq = 2.0 / nx;
  double H = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double x2 = (j + 0.5) * hq;
    const double w = std::pow(x2, a);
    for (int i = 0; i < nx; ++i) {
      const double x1 = -1.0 + (i + 0.5) * hq;
      const double d = std::hypot(x1, x2);
      if (d <= 0.5 || d >= 1.0) continue;
      const double v = u(x1, x2);
      H += v * v / d * w;
    }
  }
  return 4.0 * H * hq * hq;  // -phi' = 2 on the annulus, and even symmetry
}

struct LambdaKey {
  double lambda, s;
  bool operator<(const LambdaKey& o) const {
    return lambda < o.lambda || (lambda == o.lambda && s < o.s);
  }
};

inline std::map<LambdaKey, double>& normalization_cache() {
  static std::map<LambdaKey, double> cache;
  return cache;
}

inline std::mutex& normalization_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Scale factor K with H_{K F_lambda}(0,1) = 1 in the plane.  Computed once
/// per (lambda, s) by quadrature and cached (documented tolerance 2e-3).
inline double h_lambda_normalization(double lambda, double s) {
  const auto cls = classify_obstacle_lambda(lambda, s, 1e-9);
  if (!cls)
    throw std::domain_error("h_lambda: homogeneity not in {2m, 2m-1+s, 2m+2s}");
  const detail::LambdaKey key{cls->lambda, s};
  {
    std::lock_guard<std::mutex> lock(detail::normalization_mutex());
    auto it = detail::normalization_cache().find(key);
    if (it != detail::normalization_cache().end()) return it->second;
  }
  const double a = 1.0 - 2.0 * s;
  const double H = detail::normalization_H(FamilyEvaluator2D(cls->family, cls->m, s), a);
  const double K = 1.0 / std::sqrt(H);
  std::lock_guard<std::mutex> lock(detail::normalization_mutex());
  detail::normalization_cache().emplace(key, K);
  return K;
}

/// Normalized two-variable representative of Lemma-classified homogeneity.
inline double h_lambda_eval(double lambda, double x1, double x2, double s) {
  const auto cls = classify_obstacle_lambda(lambda, s, 1e-9);
  if (!cls)
    throw std::domain_error("h_lambda_eval: homogeneity not in {2m, 2m-1+s, 2m+2s}");
  return h_lambda_normalization(lambda, s) * family_eval_2d(cls->family, cls->m, x1, x2, s);
}

// --- profiles embedded in the ambient space -----------------------------------

/// A two-variable solution c h_lambda(x . e, x_{n+1}) embedded along the
/// in-plane unit direction e.  With normalized=false the raw family member is
/// used instead of h_lambda.
struct HomogeneousProfile {
  Family family = Family::Psi;
  int m = 1;
  double s = 0.5;
  double lambda = 1.5;
  Vec direction{1.0, 0.0, 0.0};
  double amplitude = 1.0;
  bool normalized = true;
};

inline HomogeneousProfile make_profile(Family f, int m, double s, Vec direction = {1.0, 0.0, 0.0},
                                       double amplitude = 1.0, bool normalized = true) {
  if (m < 0) throw std::invalid_argument("make_profile: m must be >= 0");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("make_profile: s must lie in (0,1)");
  HomogeneousProfile p;
  p.family = f;
  p.m = m;
  p.s = s;
  p.lambda = lambda_of(f, m, s);
  const double len = std::hypot(direction[0], std::hypot(direction[1], direction[2]));
  if (!(len > 0.0)) throw std::invalid_argument("make_profile: zero direction");
  for (auto& c : direction) c /= len;
  p.direction = direction;
  p.amplitude = amplitude;
  p.normalized = normalized;
  return p;
}

/// Lemma-admissible members: even m for Phi/Pi, odd m for Psi, with c > 0.
inline bool obstacle_admissible(const HomogeneousProfile& p) {
  if (!(p.amplitude > 0.0)) return false;
  switch (p.family) {
    case Family::Phi:
    case Family::Pi: return p.m >= 2 && p.m % 2 == 0;
    case Family::Psi:
    case Family::PsiReflected: return p.m >= 1 && p.m % 2 == 1;
  }
  return false;
}

inline double profile_eval(const HomogeneousProfile& p, const Vec& x, int dim) {
  double x1 = 0.0;
  for (int i = 0; i < dim - 1; ++i) x1 += x[i] * p.direction[i];
  const double scale =
      p.normalized ? h_lambda_normalization(p.lambda, p.s) : 1.0;
  return p.amplitude * scale * family_eval_2d(p.family, p.m, x1, x[dim - 1], p.s);
}

/// Samples c h_lambda(x . e, x_{n+1}) on the grid.  The profile s and the
/// grid weight exponent must describe the same equation.
inline ScalarField embed_profile(const HomogeneousProfile& p, const GridSpec& spec) {
  if (std::abs(p.s - spec.s()) > 1e-12)
    throw std::invalid_argument("embed_profile: profile s does not match grid weight");
  if (std::abs(p.direction[spec.dim() - 1]) > 1e-14)
    throw std::invalid_argument("embed_profile: direction must be in-plane");
  if (p.amplitude == 0.0) return ScalarField(spec);
  const FamilyEvaluator2D eval(p.family, p.m, p.s);
  const double scale =
      p.amplitude * (p.normalized ? h_lambda_normalization(p.lambda, p.s) : 1.0);
  const int dim = spec.dim();
  return sample(spec, [&](const Vec& x) {
    double x1 = 0.0;
    for (int i = 0; i < dim - 1; ++i) x1 += x[i] * p.direction[i];
    return scale * eval(x1, x[dim - 1]);
  });
}

// --- analytic contact / free boundary / nodal / spine sets --------------------

/// Exact set descriptions from the classification lemma.  Membership
/// predicates take thin-hyperplane points and a matching tolerance.
struct ProfileSets {
  int lemma_case;  // 1: lambda=2m, 2: lambda=2m-1+s, 3: lambda=2m+2s
  Vec e;           // effective direction (reflected family folded in)
  int dim;

  bool gamma_empty() const { return lemma_case == 3; }

  double along(const Vec& x) const {
    double t = 0.0;
    for (int i = 0; i < dim - 1; ++i) t += x[i] * e[i];
    return t;
  }

  bool contact(const Vec& x, double tol) const {
    switch (lemma_case) {
      case 1: return std::abs(along(x)) <= tol;
      case 2: return along(x) <= tol;
      default: return true;
    }
  }

  bool free_boundary(const Vec& x, double tol) const {
    return lemma_case != 3 && std::abs(along(x)) <= tol;
  }

  bool nodal(const Vec& x, double tol) const { return std::abs(along(x)) <= tol; }

  bool spine(const Vec& x, double tol) const { return std::abs(along(x)) <= tol; }
};

inline ProfileSets profile_sets(const HomogeneousProfile& p, int dim = kMaxDim) {
  if (!obstacle_admissible(p))
    throw std::invalid_argument("profile_sets: profile is not obstacle-admissible");
  ProfileSets sets;
  sets.dim = dim;
  sets.e = p.direction;
  if (p.family == Family::PsiReflected)
    for (auto& c : sets.e) c = -c;
  switch (p.family) {
    case Family::Phi: sets.lemma_case = 1; break;
    case Family::Psi:
    case Family::PsiReflected: sets.lemma_case = 2; break;
    case Family::Pi: sets.lemma_case = 3; break;
  }
  return sets;
}

// --- general superpositions ----------------------------------------------------

struct SuperpositionTerm {
  PolynomialND p;   // harmonic, homogeneous polynomial in the x'' variables
  Family family;    // Phi, Psi or PsiReflected
  int degree;       // family index m-k
};

/// Pointwise evaluator u(x) = Sum p_k(x'') F_{m-k}(x_n, x_{n+1}) with x_n the
/// last in-plane axis.  Validates harmonicity and homogeneity of each factor.
class Superposition {
 public:
  Superposition(std::vector<SuperpositionTerm> terms, double s, int dim)
      : terms_(std::move(terms)), s_(s), dim_(dim) {
    for (const auto& t : terms_) {
      if (t.family == Family::Pi)
        throw std::invalid_argument("superpose_general: Pi terms use pi_eval directly");
      if (t.degree < 0) throw std::invalid_argument("superpose_general: negative degree");
      if (const auto defect = t.p.harmonic_defect()) {
        std::ostringstream os;
        os << "superpose_general: non-harmonic factor, offending multi-index (";
        for (int i = 0; i < t.p.nvars; ++i) os << (i ? "," : "") << (*defect)[i];
        os << ")";
        throw std::invalid_argument(os.str());
      }
      evals_.emplace_back(t.family, t.degree, s);
    }
  }

  double operator()(const Vec& x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i)
      sum += terms_[i].p.eval(x) * evals_[i](x[dim_ - 2], x[dim_ - 1]);
    return sum;
  }

  const std::vector<SuperpositionTerm>& terms() const { return terms_; }

 private:
  std::vector<SuperpositionTerm> terms_;
  std::vector<FamilyEvaluator2D> evals_;
  double s_;
  int dim_;
};

inline Superposition superpose_general(std::vector<SuperpositionTerm> terms, double s, int dim) {
  return Superposition(std::move(terms), s, dim);
}

}  // namespace tfb
