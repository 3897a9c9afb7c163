#pragma once

// Cutoff-based frequency function I = r D / H and companions.  All ball
// integrals use the midpoint rule over grid-cell-sized boxes whose centers
// lie in the integration region; the cutoff phi and its slope are evaluated
// at cell centers, gradients are edge-averaged nodal differences, and the
// even reflection contributes a global factor 2.  Centers off the node
// lattice are handled by shifting the quadrature lattice and interpolating.

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tfb/grid.hpp"

namespace tfb {

/// Piecewise-linear cutoff: 1 on [0,1/2], 2(1-t) on (1/2,1], 0 beyond.
inline double phi_cutoff(double t) {
  if (t < 0.0) throw std::domain_error("phi_cutoff: negative argument");
  if (t <= 0.5) return 1.0;
  if (t <= 1.0) return 2.0 * (1.0 - t);
  return 0.0;
}

struct FrequencyComponents {
  double H = 0.0;  // boundary-layer L^2 mass against -phi'
  double D = 0.0;  // cutoff Dirichlet energy
  double E = 0.0;  // radial-derivative annulus energy
  double I = 0.0;  // r D / H
};

namespace detail {

inline void check_center(const GridSpec& spec, const Vec& x0, double r) {
  const int dim = spec.dim();
  if (std::abs(x0[dim - 1]) > 1e-12)
    throw std::invalid_argument("frequency: center must lie on the thin hyperplane");
  for (int i = 0; i < dim - 1; ++i)
    if (std::abs(x0[i]) + r > spec.half_width() + 1e-12)
      throw std::invalid_argument("frequency: ball not contained in the grid box");
  if (r > spec.half_width() + 1e-12)
    throw std::invalid_argument("frequency: ball not contained in the grid box");
  if (!(r > 0.0)) throw std::invalid_argument("frequency: radius must be positive");
}

inline bool grid_aligned(const GridSpec& spec, const Vec& x0) {
  for (int i = 0; i < spec.dim() - 1; ++i) {
    const double t = (x0[i] + spec.half_width()) / spec.spacing();
    if (std::abs(t - std::llround(t)) > 1e-9) return false;
  }
  return true;
}

/// Visits quadrature points of the ball B_r(x0): cell-sized midpoint lattice
/// anchored at x0, upper half only.  Cells crossed by the cutoff interfaces
/// d = r/2 and d = r are subdivided so that the jump of -phi' does not
/// quantize the integrals; everywhere else one midpoint per cell.
/// f(q, d, u, grad, volume_fraction) with d = |q - x0|.
template <class F>
inline void ball_quadrature(const ScalarField& field, const Vec& x0, double r, F&& f,
                            int refine = 0) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  const bool aligned = grid_aligned(spec, x0);
  if (refine <= 0) refine = (dim == 2) ? 8 : 4;

  if (!aligned) {
    // interpolation probes reach half a cell beyond the ball
    for (int i = 0; i < dim - 1; ++i)
      if (std::abs(x0[i]) + r + 0.5 * h > spec.half_width() + 1e-12)
        throw std::invalid_argument("frequency: off-grid center needs a half-cell margin");
    if (r + 0.5 * h > spec.half_width() + 1e-12)
      throw std::invalid_argument("frequency: off-grid center needs a half-cell margin");
  }

  const int m_max = static_cast<int>(std::ceil(r / h)) + 1;
  const int k_max = static_cast<int>(std::ceil(r / h));

  Idx base{0, 0, 0};  // cell index of the aligned fast path
  if (aligned)
    for (int i = 0; i < dim - 1; ++i)
      base[i] = static_cast<int>(std::llround((x0[i] + spec.half_width()) / h));

  const Idx ext = spec.extents();
  const int in_plane = dim - 1;
  Idx off{0, 0, 0};

  const int K = std::max(1, refine);
  const double sub_frac = 1.0 / std::pow(static_cast<double>(K), dim);

  double corner_vals[1 << kMaxDim];

  // multilinear value and gradient from the cell corners at local coordinates
  auto corner_eval = [&](const double* t, double& u, Vec& grad) {
    const int corners = 1 << dim;
    u = 0.0;
    grad = {0.0, 0.0, 0.0};
    for (int bits = 0; bits < corners; ++bits) {
      double w = 1.0;
      for (int i = 0; i < dim; ++i) w *= (bits & (1 << i)) ? t[i] : 1.0 - t[i];
      u += w * corner_vals[bits];
      for (int i = 0; i < dim; ++i) {
        double dw = (bits & (1 << i)) ? 1.0 : -1.0;
        for (int j = 0; j < dim; ++j)
          if (j != i) dw *= (bits & (1 << j)) ? t[j] : 1.0 - t[j];
        grad[i] += dw * corner_vals[bits] / h;
      }
    }
  };

  auto visit = [&](const Idx& m, int k) {
    Vec lo{0.0, 0.0, 0.0};  // lower cell corner
    for (int i = 0; i < in_plane; ++i) lo[i] = x0[i] + m[i] * h;
    lo[dim - 1] = k * h;

    // distance range of the cell, for interface detection
    double near2 = 0.0, far2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double c0 = lo[i] - x0[i], c1 = c0 + h;
      const double lo_abs = (c0 <= 0.0 && c1 >= 0.0) ? 0.0 : std::min(std::abs(c0), std::abs(c1));
      const double hi_abs = std::max(std::abs(c0), std::abs(c1));
      near2 += lo_abs * lo_abs;
      far2 += hi_abs * hi_abs;
    }
    const double dnear = std::sqrt(near2), dfar = std::sqrt(far2);
    if (dnear >= r) return;
    const bool straddles =
        (dnear < 0.5 * r && dfar > 0.5 * r) || (dnear < r && dfar > r);

    bool have_corners = false;
    if (aligned) {
      Idx cell = base;
      for (int i = 0; i < in_plane; ++i) cell[i] += m[i];
      cell[dim - 1] = k;
      bool inside = true;
      for (int i = 0; i < dim; ++i)
        if (cell[i] < 0 || cell[i] + 1 >= ext[i]) inside = false;
      if (!inside) return;  // excluded by the containment precondition anyway
      const int corners = 1 << dim;
      for (int bits = 0; bits < corners; ++bits) {
        Idx node = cell;
        for (int i = 0; i < dim; ++i)
          if (bits & (1 << i)) node[i] += 1;
        corner_vals[bits] = field.at(node);
      }
      have_corners = true;
    }

    auto emit = [&](const double* t, double frac) {
      Vec q = lo;
      for (int i = 0; i < dim; ++i) q[i] += t[i] * h;
      double d2 = 0.0;
      for (int i = 0; i < dim; ++i) d2 += (q[i] - x0[i]) * (q[i] - x0[i]);
      const double d = std::sqrt(d2);
      if (d >= r) return;
      double u;
      Vec grad{0.0, 0.0, 0.0};
      if (have_corners) {
        corner_eval(t, u, grad);
      } else {
        u = interpolate(field, q);
        grad = gradient_at(field, q);
      }
      f(q, d, u, grad, frac);
    };

    const double mid[kMaxDim] = {0.5, 0.5, 0.5};
    if (!straddles || K == 1) {
      emit(mid, 1.0);
      return;
    }
    double t[kMaxDim] = {0.5, 0.5, 0.5};
    if (dim == 2) {
      for (int i = 0; i < K; ++i) {
        t[0] = (i + 0.5) / K;
        for (int j = 0; j < K; ++j) {
          t[1] = (j + 0.5) / K;
          emit(t, sub_frac);
        }
      }
    } else {
      for (int i = 0; i < K; ++i) {
        t[0] = (i + 0.5) / K;
        for (int j = 0; j < K; ++j) {
          t[1] = (j + 0.5) / K;
          for (int l = 0; l < K; ++l) {
            t[2] = (l + 0.5) / K;
            emit(t, sub_frac);
          }
        }
      }
    }
  };

  if (dim == 2) {
    for (off[0] = -m_max; off[0] <= m_max; ++off[0])
      for (int k = 0; k <= k_max; ++k) visit(off, k);
  } else {
    for (off[0] = -m_max; off[0] <= m_max; ++off[0])
      for (off[1] = -m_max; off[1] <= m_max; ++off[1])
        for (int k = 0; k <= k_max; ++k) visit(off, k);
  }
}

}  // namespace detail

namespace detail {

/// Effective weights in the first vertical cell layer, where |t|^a and the
/// t^{2s} leading behavior of solutions make plain midpoint weights biased:
/// mass terms get the exact layer average of t^a, the vertical gradient
/// energy the constant-flux interpolant value (both reduce to the midpoint
/// weight at a = 0).
struct LayerWeights {
  double mass;      // for u^2-type integrands
  double vertical;  // for the vertical gradient energy
};

inline LayerWeights layer_weights(double t, double h, double a) {
  if (t < h) return {std::pow(h, a) / (1.0 + a), (1.0 - a) * std::pow(h, a)};
  const double w = std::pow(t, a);
  return {w, w};
}

}  // namespace detail

/// H, D, E and I = r D / H at a thin-hyperplane center.
inline FrequencyComponents frequency_components(const ScalarField& field, const Vec& x0, double r,
                                                int refine = 0) {
  const GridSpec& spec = field.spec;
  detail::check_center(spec, x0, r);
  const int dim = spec.dim();
  const double a = spec.weight_exponent();
  const double h = spec.spacing();

  double H = 0.0, D = 0.0, E = 0.0;
  detail::ball_quadrature(
      field, x0, r,
      [&](const Vec& q, double d, double u, const Vec& grad, double frac) {
        const auto [w_mass, w_vert] = detail::layer_weights(q[dim - 1], h, a);
        double g2_tan = 0.0;
        for (int i = 0; i < dim - 1; ++i) g2_tan += grad[i] * grad[i];
        D += phi_cutoff(d / r) * (g2_tan * w_mass + grad[dim - 1] * grad[dim - 1] * w_vert) * frac;
        if (d > 0.5 * r) {
          // -phi'(d/r) = 2 on the annulus r/2 < d < r
          H += 2.0 * u * u / d * w_mass * frac;
          double radial = 0.0;
          for (int i = 0; i < dim; ++i) radial += grad[i] * (q[i] - x0[i]);
          radial /= d;
          E += 2.0 * (d / (r * r)) * radial * radial * w_mass * frac;
        }
      },
      refine);
  const double vol = 2.0 * std::pow(h, dim);  // cell volume and even reflection
  FrequencyComponents out;
  out.H = H * vol;
  out.D = D * vol;
  out.E = E * vol;
  if (out.H < 1e-300)
    throw std::domain_error("frequency_components: H vanishes, frequency undefined");
  out.I = r * out.D / out.H;
  return out;
}

struct FrequencyCurve {
  Vec center{0.0, 0.0, 0.0};
  std::vector<double> radii, H, D, E, I;
  int monotonicity_violations = 0;  // entries with I(r_{j+1}) < I(r_j) - slack
};

/// Frequency components over an increasing list of radii, flagging
/// monotonicity violations beyond the given slack.
inline FrequencyCurve frequency_curve(const ScalarField& field, const Vec& x0,
                                      std::span<const double> radii, double slack = 1e-3) {
  FrequencyCurve curve;
  curve.center = x0;
  for (double r : radii) {
    const FrequencyComponents c = frequency_components(field, x0, r);
    curve.radii.push_back(r);
    curve.H.push_back(c.H);
    curve.D.push_back(c.D);
    curve.E.push_back(c.E);
    curve.I.push_back(c.I);
  }
  for (std::size_t j = 0; j + 1 < curve.I.size(); ++j)
    if (curve.I[j + 1] < curve.I[j] - slack) ++curve.monotonicity_violations;
  return curve;
}

struct IdentityResiduals {
  double h_prime_rel;     // |H' - (n+a)/r H - 2D| / |H'|
  double d_prime_rel;     // |D' - (n+a-1)/r D - 2E| / |D'|
  double d_alt_rel;       // |D - first-variation form| / |D|
  double cauchy_schwarz;  // (H E - D_rad^2) / (H E), with the radial pairing D_rad
};

/// Checks the differential identities H' = (n+a)/r H + 2D and
/// D' = (n+a-1)/r D + 2E against central finite differences at step dr, the
/// alternative first-variation formula for D, and the Cauchy-Schwarz defect.
inline IdentityResiduals verify_frequency_identities(const ScalarField& field, const Vec& x0,
                                                     double r, double dr) {
  const GridSpec& spec = field.spec;
  if (!(dr > 0.0 && dr < r)) throw std::invalid_argument("verify_frequency_identities: bad dr");
  detail::check_center(spec, x0, r + dr);
  const int dim = spec.dim();
  const double na = spec.thin_dim() + spec.weight_exponent();
  const double a = spec.weight_exponent();

  const FrequencyComponents mid = frequency_components(field, x0, r);
  const FrequencyComponents lo = frequency_components(field, x0, r - dr);
  const FrequencyComponents hi = frequency_components(field, x0, r + dr);

  const double Hp = (hi.H - lo.H) / (2.0 * dr);
  const double Dp = (hi.D - lo.D) / (2.0 * dr);

  double d_alt = 0.0;
  detail::ball_quadrature(
      field, x0, r, [&](const Vec& q, double d, double u, const Vec& grad, double frac) {
        if (d <= 0.5 * r) return;
        double radial = 0.0;
        for (int i = 0; i < dim; ++i) radial += grad[i] * (q[i] - x0[i]);
        d_alt += (2.0 / r) * u * radial / d *
                 detail::layer_weights(q[dim - 1], spec.spacing(), a).mass * frac;
      });
  d_alt *= 2.0 * std::pow(spec.spacing(), dim);

  IdentityResiduals out;
  out.h_prime_rel = std::abs(Hp - na / r * mid.H - 2.0 * mid.D) / std::abs(Hp);
  out.d_prime_rel = std::abs(Dp - (na - 1.0) / r * mid.D - 2.0 * mid.E) / std::abs(Dp);
  out.d_alt_rel = std::abs(mid.D - d_alt) / std::abs(mid.D);
  // the Cauchy-Schwarz step of the monotonicity proof pairs u with its radial
  // derivative against the same annulus measure, which is d_alt here
  out.cauchy_schwarz = (mid.H * mid.E - d_alt * d_alt) / (mid.H * mid.E);
  return out;
}

/// log2 H(2r)/H(r) - (n+a) - 2 I(r); near zero for homogeneous fields.
inline double h_scaling_check(const ScalarField& field, const Vec& x0, double r) {
  detail::check_center(field.spec, x0, 2.0 * r);
  const FrequencyComponents c1 = frequency_components(field, x0, r);
  const FrequencyComponents c2 = frequency_components(field, x0, 2.0 * r);
  const double na = field.spec.thin_dim() + field.spec.weight_exponent();
  return std::log2(c2.H / c1.H) - na - 2.0 * c1.I;
}

struct OscillationRecord {
  Vec point{0.0, 0.0, 0.0};
  double rho = 0.0, r = 0.0;
  double delta = 0.0;  // I(x,r) - I(x,rho)
};

/// Radial frequency variation Delta_rho^r(x) = I(x,r) - I(x,rho).
inline OscillationRecord delta_osc(const ScalarField& field, const Vec& x, double rho, double r) {
  if (!(rho > 0.0 && rho <= r)) throw std::invalid_argument("delta_osc: need 0 < rho <= r");
  OscillationRecord rec;
  rec.point = x;
  rec.rho = rho;
  rec.r = r;
  if (rho == r) {
    rec.delta = 0.0;
    return rec;
  }
  rec.delta = frequency_components(field, x, r).I - frequency_components(field, x, rho).I;
  return rec;
}

/// Maximal frequency sup { I(y,rho) : y in closed B_rho(x) among fb points };
/// empty when the ball contains no free boundary point.
inline std::optional<double> theta_max(const ScalarField& field, const Vec& x, double rho,
                                       std::span<const Vec> fb_points) {
  std::optional<double> best;
  for (const Vec& y : fb_points) {
    if (dist(y, x, field.spec.dim()) > rho + 1e-12) continue;
    const double I = frequency_components(field, y, rho).I;
    if (!best || I > *best) best = I;
  }
  return best;
}

/// eta-almost homogeneity at a center: the center must be a detected free
/// boundary point (within one cell of fb_points) and I(1) - I(1/2) <= eta.
inline bool classify_almost_homogeneous(const ScalarField& field, const Vec& center, double eta,
                                        std::span<const Vec> fb_points) {
  if (eta < 0.0) throw std::invalid_argument("classify_almost_homogeneous: eta must be >= 0");
  const double h = field.spec.spacing();
  bool on_fb = false;
  for (const Vec& y : fb_points)
    if (dist(y, center, field.spec.dim()) <= h + 1e-12) {
      on_fb = true;
      break;
    }
  if (!on_fb) return false;
  return delta_osc(field, center, 0.5, 1.0).delta <= eta;
}

struct SpatialOscRecord {
  double lhs;   // |I(x1, R rho) - I(x2, R rho)|
  double rhs1;  // sqrt of the radial oscillation at x1
  double rhs2;  // sqrt of the radial oscillation at x2
};

/// Spatial-vs-radial oscillation comparison at scale R rho: the left-hand
/// side and the two radial square-root terms, without asserting any constant.
inline SpatialOscRecord spatial_osc_check(const ScalarField& field, const Vec& x1, const Vec& x2,
                                          double rho, double R) {
  if (!(R > 6.0)) throw std::invalid_argument("spatial_osc_check: requires R > 6");
  const double r_hi = 2.0 * (R + 2.0) * rho;
  const double r_lo = 0.5 * (R - 4.0) * rho;
  SpatialOscRecord rec;
  rec.lhs = std::abs(frequency_components(field, x1, R * rho).I -
                     frequency_components(field, x2, R * rho).I);
  rec.rhs1 = std::sqrt(std::max(0.0, delta_osc(field, x1, r_lo, r_hi).delta));
  rec.rhs2 = std::sqrt(std::max(0.0, delta_osc(field, x2, r_lo, r_hi).delta));
  return rec;
}

}  // namespace tfb
