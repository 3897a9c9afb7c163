#pragma once

// Free boundary extraction and the geometric-measure diagnostics: blow-up
// rescalings and profile fitting, Minkowski content of the free boundary,
// Jones beta-numbers via the covariance eigenvalue characterization, the
// discrete Jones square function, dyadic oscillation sums, mean-flatness
// versus frequency, and spine/stratum labels.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "tfb/frequency.hpp"
#include "tfb/grid.hpp"
#include "tfb/homogeneous.hpp"
#include "tfb/solver.hpp"

namespace tfb {

// --- thin point sets -----------------------------------------------------------

/// Labeled interior nodes of the thin hyperplane.  free_boundary nodes are
/// contact nodes with a non-contact in-plane neighbor; nodal nodes have small
/// tangential gradient and weighted flux, and always include the free
/// boundary so that the discrete sets satisfy Gamma subset of N.
struct ThinPointSet {
  GridSpec spec;
  double contact_tol = 0.0;
  double grad_tol = 0.0;
  // indexed over in-plane node indices, row-major (vertical index dropped)
  std::vector<unsigned char> contact, free_boundary, nodal;

  explicit ThinPointSet(const GridSpec& s)
      : spec(s),
        contact(plane_count(s), 0),
        free_boundary(plane_count(s), 0),
        nodal(plane_count(s), 0) {}

  static std::size_t plane_count(const GridSpec& s) {
    std::size_t n = 1;
    for (int i = 0; i < s.dim() - 1; ++i) n *= static_cast<std::size_t>(s.plane_extent());
    return n;
  }

  std::size_t plane_index(const Idx& idx) const {
    std::size_t lin = 0;
    for (int i = 0; i < spec.dim() - 1; ++i)
      lin = lin * spec.plane_extent() + idx[i];
    return lin;
  }

  template <class F>
  void for_each_plane_node(F&& f) const {
    const int P = spec.plane_extent();
    Idx idx{0, 0, 0};
    if (spec.dim() == 2) {
      for (idx[0] = 0; idx[0] < P; ++idx[0]) f(idx);
    } else {
      for (idx[0] = 0; idx[0] < P; ++idx[0])
        for (idx[1] = 0; idx[1] < P; ++idx[1]) f(idx);
    }
  }

  std::vector<Vec> points_with(const std::vector<unsigned char>& flags) const {
    std::vector<Vec> pts;
    for_each_plane_node([&](const Idx& idx) {
      if (flags[plane_index(idx)]) pts.push_back(spec.node_coord(idx));
    });
    return pts;
  }

  std::vector<Vec> fb_points() const { return points_with(free_boundary); }
  std::vector<Vec> contact_points() const { return points_with(contact); }
  std::vector<Vec> nodal_points() const { return points_with(nodal); }
};

/// Contact/free-boundary/nodal flags from a field.  Negative tolerances pick
/// the documented defaults 1e-6 max|u| and 1e-3 max(|grad_tau u|, |flux|).
inline ThinPointSet extract_sets(const ScalarField& field, double contact_tol = -1.0,
                                 double grad_tol = -1.0) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  const int P = spec.plane_extent();
  ThinPointSet sets(spec);

  auto interior = [&](const Idx& idx) {
    for (int i = 0; i < dim - 1; ++i)
      if (idx[i] < 1 || idx[i] >= P - 1) return false;
    return true;
  };

  // plane diagnostics
  double max_abs_u = 0.0, max_grad = 0.0;
  std::vector<double> tangential(ThinPointSet::plane_count(spec), 0.0);
  std::vector<double> flux(ThinPointSet::plane_count(spec), 0.0);
  sets.for_each_plane_node([&](const Idx& idx) {
    Idx node = idx;
    node[dim - 1] = 0;
    max_abs_u = std::max(max_abs_u, std::abs(field.at(node)));
    if (!interior(idx)) return;
    double g2 = 0.0;
    for (int i = 0; i < dim - 1; ++i) {
      Idx up = node, dn = node;
      up[i] += 1;
      dn[i] -= 1;
      const double g = (field.at(up) - field.at(dn)) / (2.0 * h);
      g2 += g * g;
    }
    const std::size_t lin = sets.plane_index(idx);
    tangential[lin] = std::sqrt(g2);
    flux[lin] = plane_weighted_flux(field, node);
    max_grad = std::max({max_grad, tangential[lin], std::abs(flux[lin])});
  });

  sets.contact_tol = (contact_tol >= 0.0) ? contact_tol : 1e-6 * max_abs_u;
  sets.grad_tol = (grad_tol >= 0.0) ? grad_tol : 1e-3 * max_grad;

  sets.for_each_plane_node([&](const Idx& idx) {
    if (!interior(idx)) return;
    Idx node = idx;
    node[dim - 1] = 0;
    if (std::abs(field.at(node)) <= sets.contact_tol) sets.contact[sets.plane_index(idx)] = 1;
  });

  sets.for_each_plane_node([&](const Idx& idx) {
    const std::size_t lin = sets.plane_index(idx);
    if (!sets.contact[lin] || !interior(idx)) return;
    bool boundary = false;
    for (int i = 0; i < dim - 1 && !boundary; ++i) {
      for (int d = -1; d <= 1 && !boundary; d += 2) {
        Idx nb = idx;
        nb[i] += d;
        if (interior(nb) && !sets.contact[sets.plane_index(nb)]) boundary = true;
      }
    }
    if (boundary) sets.free_boundary[lin] = 1;
    const bool small = tangential[lin] <= sets.grad_tol && std::abs(flux[lin]) <= sets.grad_tol;
    if (small || boundary) sets.nodal[lin] = 1;
  });
  return sets;
}

// --- blow-up rescalings ----------------------------------------------------------

/// Normalized rescaling u_{x0,r}(y) = r^{(n+a)/2} u(x0 + r y) / H(x0,r)^{1/2}
/// resampled onto the unit box.  r must be a node-aligned radius (multiple of
/// the spacing) inside the domain.
inline ScalarField rescale_field(const ScalarField& field, const Vec& x0, double r) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  const double ratio = r / h;
  const int k = static_cast<int>(std::llround(ratio));
  if (k < 2 || std::abs(ratio - k) > 1e-9)
    throw std::invalid_argument("rescale_field: radius must be a multiple >= 2 of the spacing");
  for (int i = 0; i < dim - 1; ++i)
    if (std::abs(x0[i]) + r > spec.half_width() + 1e-12)
      throw std::invalid_argument("rescale_field: ball beyond the grid margin");
  if (r > spec.half_width() + 1e-12)
    throw std::invalid_argument("rescale_field: ball beyond the grid margin");

  const double H = frequency_components(field, x0, r).H;
  const double na = spec.thin_dim() + spec.weight_exponent();
  const double scale = std::pow(r, 0.5 * na) / std::sqrt(H);

  GridSpec out_spec(dim, 1.0, 1.0 / k, spec.weight_exponent());
  return sample(out_spec, [&](const Vec& y) {
    Vec p = x0;
    for (int i = 0; i < dim; ++i) p[i] += r * y[i];
    return scale * interpolate(field, p);
  });
}

// --- blow-up classification and fitting -------------------------------------------

struct BlowupFit {
  Vec center{0.0, 0.0, 0.0};
  double lambda_estimate = 0.0;
  std::optional<LambdaClass> classified;
  Vec direction{1.0, 0.0, 0.0};
  double amplitude = 0.0;
  double residual = 0.0;                 // relative weighted-L2 mismatch at the smallest radius
  std::vector<double> radii;             // fitting radii, decreasing
  std::vector<double> residual_per_radius;
};

namespace detail {

struct FitResult {
  double angle = 0.0;
  double amplitude = 0.0;
  double residual = 1.0;
};

/// Least squares of u against c h_lambda((x-x0).e(angle), x_{n+1}) over the
/// ball B_r(x0) in the weighted measure; direction by sweep plus refinement.
inline FitResult fit_direction(const ScalarField& field, const Vec& x0, double r,
                               const LambdaClass& cls, double s) {
  const int dim = field.spec.dim();
  struct Sample {
    Vec q;
    double u, w;
  };
  std::vector<Sample> samples;
  ball_quadrature(field, x0, r,
                  [&](const Vec& q, double d, double u, const Vec&, double frac) {
                    (void)d;
                    samples.push_back(
                        {q, u, std::pow(q[dim - 1], field.spec.weight_exponent()) * frac});
                  });

  double denom = 0.0;
  for (const auto& smp : samples) denom += smp.w * smp.u * smp.u;
  if (denom <= 0.0) throw std::domain_error("blowup_fit: field vanishes on the ball");

  const double K = h_lambda_normalization(cls.lambda, s);
  const FamilyEvaluator2D profile(cls.family, cls.m, s);
  auto eval_angle = [&](double angle) {
    const double ex = std::cos(angle), ey = std::sin(angle);
    double suv = 0.0, svv = 0.0;
    for (const auto& smp : samples) {
      double t = (smp.q[0] - x0[0]) * ex;
      if (dim == 3) t += (smp.q[1] - x0[1]) * ey;
      const double v = K * profile(t, smp.q[dim - 1]);
      suv += smp.w * smp.u * v;
      svv += smp.w * v * v;
    }
    FitResult fr;
    fr.angle = angle;
    fr.amplitude = (svv > 0.0) ? suv / svv : 0.0;
    fr.residual = std::sqrt(std::max(0.0, 1.0 - (svv > 0.0 ? suv * suv / (svv * denom) : 0.0)));
    return fr;
  };

  FitResult best;
  if (dim == 2) {
    best = eval_angle(0.0);
    const FitResult flipped = eval_angle(M_PI);
    if (flipped.residual < best.residual) best = flipped;
    return best;
  }
  best = eval_angle(0.0);
  const int steps = 360;
  for (int i = 1; i < steps; ++i) {
    const FitResult fr = eval_angle(2.0 * M_PI * i / steps);
    if (fr.residual < best.residual) best = fr;
  }
  // golden-section refinement around the best coarse angle
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = best.angle - 2.0 * M_PI / steps, hi = best.angle + 2.0 * M_PI / steps;
  double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
  double f1 = eval_angle(c1).residual, f2 = eval_angle(c2).residual;
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - gr * (hi - lo);
      f1 = eval_angle(c1).residual;
    } else {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + gr * (hi - lo);
      f2 = eval_angle(c2).residual;
    }
  }
  return eval_angle(0.5 * (lo + hi));
}

/// Linear least squares of u against the Pi representation with an unknown
/// m-homogeneous polynomial p (monomial basis over the thin variables).
inline FitResult fit_pi(const ScalarField& field, const Vec& x0, double r, int m, double s) {
  const int dim = field.spec.dim();
  const int n = dim - 1;
  std::vector<Idx> basis;
  if (n == 1) {
    basis.push_back({m, 0, 0});
  } else {
    for (int i = 0; i <= m; ++i) basis.push_back({m - i, i, 0});
  }
  const int nb = static_cast<int>(basis.size());
  std::vector<PolynomialND> mono;
  for (const Idx& e : basis) mono.push_back(PolynomialND::monomial(e, 1.0, n));

  std::vector<double> G(nb * nb, 0.0), b(nb, 0.0);
  double denom = 0.0;
  ball_quadrature(field, x0, r, [&](const Vec& q, double d, double u, const Vec&, double frac) {
    (void)d;
    const double w = std::pow(q[dim - 1], field.spec.weight_exponent()) * frac;
    Vec rel = q;
    for (int i = 0; i < n; ++i) rel[i] -= x0[i];
    std::vector<double> phi(nb);
    for (int j = 0; j < nb; ++j) phi[j] = pi_eval(m, mono[j], rel, q[dim - 1], s);
    denom += w * u * u;
    for (int j = 0; j < nb; ++j) {
      b[j] += w * u * phi[j];
      for (int l = 0; l < nb; ++l) G[j * nb + l] += w * phi[j] * phi[l];
    }
  });
  if (denom <= 0.0) throw std::domain_error("blowup_fit: field vanishes on the ball");

  // solve G c = b by Gaussian elimination with partial pivoting (nb <= m+1)
  std::vector<double> c = b;
  std::vector<double> A = G;
  for (int col = 0; col < nb; ++col) {
    int piv = col;
    for (int row = col + 1; row < nb; ++row)
      if (std::abs(A[row * nb + col]) > std::abs(A[piv * nb + col])) piv = row;
    for (int j = 0; j < nb; ++j) std::swap(A[col * nb + j], A[piv * nb + j]);
    std::swap(c[col], c[piv]);
    const double diag = A[col * nb + col];
    if (std::abs(diag) < 1e-300) {
      c[col] = 0.0;
      continue;
    }
    for (int row = col + 1; row < nb; ++row) {
      const double f = A[row * nb + col] / diag;
      for (int j = col; j < nb; ++j) A[row * nb + j] -= f * A[col * nb + j];
      c[row] -= f * c[col];
    }
  }
  for (int col = nb - 1; col >= 0; --col) {
    double sum = c[col];
    for (int j = col + 1; j < nb; ++j) sum -= A[col * nb + j] * c[j];
    const double diag = A[col * nb + col];
    c[col] = (std::abs(diag) < 1e-300) ? 0.0 : sum / diag;
  }

  double model_dot = 0.0;
  for (int j = 0; j < nb; ++j) model_dot += c[j] * b[j];
  FitResult fr;
  fr.angle = 0.0;
  fr.amplitude = std::sqrt(std::max(0.0, model_dot) / denom);
  fr.residual = std::sqrt(std::max(0.0, 1.0 - model_dot / denom));
  return fr;
}

inline bool near_some_point(const Vec& x, std::span<const Vec> pts, int dim, double tol) {
  for (const Vec& p : pts)
    if (dist(p, x, dim) <= tol) return true;
  return false;
}

}  // namespace detail

/// Estimates the blow-up at a free boundary point: the frequency at the
/// smallest radius, the nearest classified homogeneity (window 0.1), and a
/// least-squares profile fit per radius.
inline BlowupFit blowup_fit(const ScalarField& field, const Vec& x0, std::vector<double> radii,
                            const ThinPointSet& fb) {
  if (radii.empty()) throw std::invalid_argument("blowup_fit: need at least one radius");
  std::sort(radii.begin(), radii.end(), std::greater<double>());
  const double r_min = radii.back();
  const double s = field.spec.s();

  if (!detail::near_some_point(x0, fb.fb_points(), field.spec.dim(),
                               field.spec.spacing() + 1e-12))
    throw std::invalid_argument("blowup_fit: center is not a detected free boundary point");

  BlowupFit out;
  out.center = x0;
  out.lambda_estimate = frequency_components(field, x0, r_min).I;
  out.classified = classify_obstacle_lambda(out.lambda_estimate, s, 0.1);
  out.radii = radii;
  if (!out.classified) return out;

  for (double r : radii) {
    detail::FitResult fr;
    if (out.classified->family == Family::Pi) {
      fr = detail::fit_pi(field, x0, r, out.classified->m, s);
    } else {
      fr = detail::fit_direction(field, x0, r, *out.classified, s);
      out.direction = {std::cos(fr.angle), (field.spec.dim() == 3) ? std::sin(fr.angle) : 0.0,
                       0.0};
      if (field.spec.dim() == 2) out.direction = {std::cos(fr.angle), 0.0, 0.0};
    }
    out.amplitude = fr.amplitude;
    out.residual_per_radius.push_back(fr.residual);
  }
  out.residual = out.residual_per_radius.back();
  return out;
}

// --- Minkowski content -------------------------------------------------------------

struct MinkowskiRow {
  double r;
  double volume;  // full-space volume of the r-tube, by reflection
  double ratio;   // volume / r^2
};

/// Tube volumes around the detected free boundary restricted to a thin ball
/// window: cells of the full-space grid whose centers lie within r of a free
/// boundary point, counted with the reflected lower half.
inline std::vector<MinkowskiRow> minkowski_profile(const ThinPointSet& fb, const Vec& window_center,
                                                   double window_radius,
                                                   std::span<const double> radii) {
  const GridSpec& spec = fb.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();

  std::vector<Vec> pts;
  for (const Vec& p : fb.fb_points())
    if (dist(p, window_center, dim - 1) <= window_radius + 1e-12) pts.push_back(p);

  std::vector<MinkowskiRow> rows;
  for (double r : radii) {
    if (r < 2.0 * h) throw std::invalid_argument("minkowski_profile: radii must be >= 2h");
    double volume = 0.0;
    if (!pts.empty()) {
      // in-plane distance to the point set, then count vertical layers
      const int P = spec.plane_extent() - 1;  // cells per in-plane axis
      Idx c{0, 0, 0};
      std::size_t count = 0;
      auto scan = [&](const Idx& cidx) {
        Vec q{0.0, 0.0, 0.0};
        for (int i = 0; i < dim - 1; ++i) q[i] = -spec.half_width() + (cidx[i] + 0.5) * h;
        double best2 = 1e300;
        for (const Vec& p : pts) {
          double d2 = 0.0;
          for (int i = 0; i < dim - 1; ++i) d2 += (q[i] - p[i]) * (q[i] - p[i]);
          best2 = std::min(best2, d2);
        }
        if (best2 >= r * r) return;
        // vertical cell centers at +-(k+1/2)h with (k+1/2)^2 h^2 < r^2 - best2
        const double room = std::sqrt(r * r - best2) / h;
        const int layers = static_cast<int>(std::ceil(room - 0.5));
        count += 2 * std::max(0, layers);
      };
      if (dim == 2) {
        for (c[0] = 0; c[0] < P; ++c[0]) scan(c);
      } else {
        for (c[0] = 0; c[0] < P; ++c[0])
          for (c[1] = 0; c[1] < P; ++c[1]) scan(c);
      }
      volume = static_cast<double>(count) * std::pow(h, dim);
    }
    rows.push_back({r, volume, volume / (r * r)});
  }
  return rows;
}

// --- discrete measures and beta numbers ----------------------------------------------

/// Weighted point masses on the thin hyperplane.
struct DiscreteMeasure {
  std::vector<Vec> points;
  std::vector<double> masses;

  void add(const Vec& p, double mass) {
    if (mass < 0.0) throw std::invalid_argument("DiscreteMeasure: negative mass");
    points.push_back(p);
    masses.push_back(mass);
  }

  double total_mass() const {
    double m = 0.0;
    for (double v : masses) m += v;
    return m;
  }

  /// Smallest distance between distinct support points (infinity if < 2).
  double min_separation(int dim = kMaxDim) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j)
        best = std::min(best, dist(points[i], points[j], dim));
    return best;
  }
};

/// Free boundary nodes as point masses h^{n-1}, approximating H^{n-1}.
inline DiscreteMeasure measure_from_fb(const ThinPointSet& fb) {
  DiscreteMeasure mu;
  const double mass = std::pow(fb.spec.spacing(), fb.spec.thin_dim() - 1);
  for (const Vec& p : fb.fb_points()) mu.add(p, mass);
  return mu;
}

namespace detail {

/// Deterministic cyclic Jacobi diagonalization of a symmetric matrix of
/// dimension <= 3; eigenvalues sorted descending.
inline void jacobi_eigen(int n, double A[3][3], double evals[3], double evecs[3][3]) {
  double V[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += A[p][q] * A[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (A[p][q] == 0.0) continue;
        const double theta = 0.5 * (A[q][q] - A[p][p]) / A[p][q];
        const double t = ((theta >= 0.0) ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp - s * akq;
          A[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk - s * aqk;
          A[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V[k][p], vkq = V[k][q];
          V[k][p] = c * vkp - s * vkq;
          V[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  int order[3] = {0, 1, 2};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (A[order[j]][order[j]] > A[order[i]][order[i]]) std::swap(order[i], order[j]);
  for (int i = 0; i < n; ++i) {
    evals[i] = A[order[i]][order[i]];
    for (int k = 0; k < n; ++k) evecs[i][k] = V[k][order[i]];
  }
}

}  // namespace detail

struct BetaStats {
  Vec center{0.0, 0.0, 0.0};
  double radius = 0.0;
  int k = 0;
  double mass = 0.0;
  Vec barycenter{0.0, 0.0, 0.0};
  std::array<double, 3> eigenvalues{0.0, 0.0, 0.0};  // descending, ambient count
  std::array<Vec, 3> axes{Vec{1, 0, 0}, Vec{0, 1, 0}, Vec{0, 0, 1}};
  double beta = 0.0;
};

/// Mean-flatness beta via the barycenter/covariance eigenvalue
/// characterization: beta^2 = r^{-(k+2)} sum_{l>k} lambda_l.
inline BetaStats beta_number(const DiscreteMeasure& mu, const Vec& x0, double r, int k,
                             int ambient_dim = 3) {
  if (!(r > 0.0)) throw std::invalid_argument("beta_number: radius must be positive");
  if (k < 0 || k >= ambient_dim) throw std::invalid_argument("beta_number: bad plane dimension");
  BetaStats out;
  out.center = x0;
  out.radius = r;
  out.k = k;

  std::vector<std::size_t> in;
  for (std::size_t i = 0; i < mu.points.size(); ++i)
    if (dist(mu.points[i], x0, ambient_dim) < r && mu.masses[i] > 0.0) in.push_back(i);
  if (in.empty()) return out;

  double mass = 0.0;
  Vec bary{0.0, 0.0, 0.0};
  for (std::size_t i : in) {
    mass += mu.masses[i];
    for (int d = 0; d < ambient_dim; ++d) bary[d] += mu.masses[i] * mu.points[i][d];
  }
  for (int d = 0; d < ambient_dim; ++d) bary[d] /= mass;
  out.mass = mass;
  out.barycenter = bary;

  double B[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  for (std::size_t i : in) {
    Vec d{0.0, 0.0, 0.0};
    for (int c = 0; c < ambient_dim; ++c) d[c] = mu.points[i][c] - bary[c];
    for (int p = 0; p < ambient_dim; ++p)
      for (int q = 0; q < ambient_dim; ++q) B[p][q] += mu.masses[i] * d[p] * d[q];
  }
  double evals[3], evecs[3][3];
  detail::jacobi_eigen(ambient_dim, B, evals, evecs);
  double tail = 0.0;
  for (int l = 0; l < ambient_dim; ++l) {
    out.eigenvalues[l] = std::max(0.0, evals[l]);
    for (int c = 0; c < ambient_dim; ++c) out.axes[l][c] = evecs[l][c];
    if (l >= k) tail += out.eigenvalues[l];
  }
  out.beta = std::sqrt(tail * std::pow(r, -(k + 2.0)));
  return out;
}

/// Discrete Jones square function: sum of beta^2 over the given scales.
inline double jones_square(const DiscreteMeasure& mu, const Vec& x, std::span<const double> scales,
                           int k, int ambient_dim = 3) {
  double sum = 0.0;
  for (double r : scales) {
    const double b = beta_number(mu, x, r, k, ambient_dim).beta;
    sum += b * b;
  }
  return sum;
}

/// Average oscillation Osc(w, rho) = int_{B_rho(w)} sum_j beta^2(y, lambda^j rho) dmu,
/// truncated when the scale falls below a tenth of the smallest point gap.
inline double osc_lambda(const DiscreteMeasure& mu, const Vec& w, double varrho, double lambda,
                         int k, int ambient_dim = 3) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("osc_lambda: scale factor must lie in (0,1)");
  const double floor_scale = mu.min_separation(ambient_dim) / 10.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    if (dist(mu.points[i], w, ambient_dim) >= varrho || mu.masses[i] <= 0.0) continue;
    double inner = 0.0;
    double scale = varrho;
    for (int j = 0; j < 200 && scale >= floor_scale; ++j, scale *= lambda) {
      const double b = beta_number(mu, mu.points[i], scale, k, ambient_dim).beta;
      inner += b * b;
    }
    sum += mu.masses[i] * inner;
  }
  return sum;
}

struct MeanFlatnessRecord {
  double beta_sq;        // beta^2(p, r) with k = n-1
  double freq_integral;  // r^{-(n-1)} int_{B_r(p)} Delta dmu
};

/// Both computable sides of the mean-flatness-vs-frequency bound; no constant
/// is asserted, the record supports empirical comparison.
inline MeanFlatnessRecord mean_flatness_check(const ScalarField& field, const DiscreteMeasure& mu,
                                              const Vec& p, double r, double R) {
  if (!(R > 5.0)) throw std::invalid_argument("mean_flatness_check: requires R > 5");
  const int dim = field.spec.dim();
  const int n = field.spec.thin_dim();
  const double r_hi = (2.0 * R + 4.0) * r;
  const double r_lo = 0.5 * (R - 5.0) * r;

  MeanFlatnessRecord rec;
  const BetaStats bs = beta_number(mu, p, r, n - 1, dim);
  rec.beta_sq = bs.beta * bs.beta;
  double integral = 0.0;
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    if (dist(mu.points[i], p, dim) >= r || mu.masses[i] <= 0.0) continue;
    integral += mu.masses[i] * delta_osc(field, mu.points[i], r_lo, r_hi).delta;
  }
  rec.freq_integral = integral * std::pow(r, -(n - 1.0));
  return rec;
}

// --- spines and strata -------------------------------------------------------------

enum class Stratum { Regular, Singular, Other, Unclassified };

inline const char* stratum_name(Stratum s) {
  switch (s) {
    case Stratum::Regular: return "regular";
    case Stratum::Singular: return "singular";
    case Stratum::Other: return "other";
    case Stratum::Unclassified: return "unclassified";
  }
  return "?";
}

struct SpineStratum {
  std::vector<Vec> spine_points;
  int spine_dim_estimate = 0;
  Stratum stratum = Stratum::Unclassified;
  double lambda_estimate = 0.0;
};

/// Spine points by frequency equality |I(y,r_min) - I(x0,r_min)| <= 0.05 over
/// the candidate thin nodes (nodal and free boundary nodes of the set, which
/// contain the spine for homogeneous solutions), the rank of their covariance,
/// and the stratum label of the frequency at x0.
inline SpineStratum spine_and_stratum(const ScalarField& field, const ThinPointSet& sets,
                                      const Vec& x0, double r_min, double freq_tol = 0.05) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  SpineStratum out;
  out.lambda_estimate = frequency_components(field, x0, r_min).I;

  const auto cls = classify_obstacle_lambda(out.lambda_estimate, spec.s(), 0.1);
  if (!cls) {
    out.stratum = Stratum::Unclassified;
  } else if (cls->family == Family::Psi && cls->m == 1) {
    out.stratum = Stratum::Regular;  // lambda = 1+s
  } else if (cls->family == Family::Phi) {
    out.stratum = Stratum::Singular;  // lambda = 2m
  } else {
    out.stratum = Stratum::Other;  // 2m-1+s with m >= 2, or 2m+2s
  }

  std::vector<Vec> candidates = sets.nodal_points();
  for (const Vec& p : sets.fb_points()) {
    bool dup = false;
    for (const Vec& q : candidates)
      if (dist(p, q, dim) < 1e-12) {
        dup = true;
        break;
      }
    if (!dup) candidates.push_back(p);
  }

  for (const Vec& y : candidates) {
    bool admissible = r_min <= spec.half_width() + 1e-12;
    for (int i = 0; i < dim - 1 && admissible; ++i)
      if (std::abs(y[i]) + r_min > spec.half_width() + 1e-12) admissible = false;
    if (!admissible) continue;
    const double I = frequency_components(field, y, r_min).I;
    if (std::abs(I - out.lambda_estimate) <= freq_tol) out.spine_points.push_back(y);
  }

  if (out.spine_points.size() >= 2) {
    DiscreteMeasure pts;
    for (const Vec& y : out.spine_points) pts.add(y, 1.0);
    const BetaStats bs =
        beta_number(pts, out.spine_points.front(), 1e9, 0, dim);  // covariance of all points
    const double top = bs.eigenvalues[0];
    int rank = 0;
    for (int l = 0; l < dim; ++l)
      if (bs.eigenvalues[l] > 1e-3 * top && top > 0.0) ++rank;
    out.spine_dim_estimate = rank;
  }
  return out;
}

}  // namespace tfb
