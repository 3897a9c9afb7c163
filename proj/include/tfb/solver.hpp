#pragma once

// Projected SOR solver for the discrete thin obstacle problem: minimize the
// weighted Dirichlet energy over fields with nonnegative trace on the thin
// hyperplane and prescribed boundary values.  Interior nodes carry the
// flux-form stencil of grid.hpp; plane nodes carry a finite-volume half-cell
// balance whose coefficients stay finite for every a in (-1,1), with the
// unilateral constraint enforced by pointwise projection.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "tfb/grid.hpp"

namespace tfb {

enum class SweepOrder { Lexicographic, RedBlack };
enum class SolveInit { Zero, HarmonicExtension };

struct SolveParams {
  double relaxation = 1.5;     // in (0,2)
  double tolerance = 1e-8;     // max nodal update per sweep
  int max_sweeps = 0;          // 0: 200 * nodes per axis
  SweepOrder order = SweepOrder::Lexicographic;
  SolveInit init = SolveInit::Zero;
  int energy_stride = 1;       // record energy every k-th sweep
};

struct SolveReport {
  int sweeps_used = 0;
  double final_update = 0.0;
  // solver objective (face-weighted Dirichlet form) per recorded sweep;
  // nonincreasing along the projected relaxation
  std::vector<double> energy_history;
  bool converged = false;
};

/// Weighted Dirichlet energy 2 sum_cells |grad_h u|^2 w_cell h^{n+1}, with the
/// cell weight (midpoint x_{n+1})^a and the factor 2 accounting for the even
/// reflection.  Compensated summation keeps successive evaluations along a
/// descent sequence monotone to roundoff.
inline double energy(const ScalarField& field) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  const double a = spec.weight_exponent();
  const Idx ext = spec.extents();

  double total = 0.0;
  double comp = 0.0;
  Idx c{0, 0, 0};
  const int i_end = ext[0] - 1;
  const int j_end = ext[1] - 1;
  const int k_end = (dim == 3) ? ext[2] - 1 : 1;
  for (c[0] = 0; c[0] < i_end; ++c[0]) {
    for (c[1] = 0; c[1] < j_end; ++c[1]) {
      for (c[2] = 0; c[2] < ((dim == 3) ? k_end : 1); ++c[2]) {
        // gradient at the cell midpoint by edge averaging
        double grad2 = 0.0;
        for (int axis = 0; axis < dim; ++axis) {
          double diff = 0.0;
          int pairs = 0;
          const int corners = 1 << dim;
          for (int bits = 0; bits < corners; ++bits) {
            if (bits & (1 << axis)) continue;
            Idx lo = c, hi = c;
            for (int i = 0; i < dim; ++i)
              if (bits & (1 << i)) {
                lo[i] += 1;
                hi[i] += 1;
              }
            hi[axis] += 1;
            diff += field.at(hi) - field.at(lo);
            ++pairs;
          }
          const double g = diff / (pairs * h);
          grad2 += g * g;
        }
        const double t_mid = (c[dim - 1] + 0.5) * h;
        const double term = grad2 * std::pow(t_mid, a) - comp;
        const double next = total + term;
        comp = (next - total) - term;
        total = next;
      }
    }
  }
  return 2.0 * total * std::pow(h, dim);
}

namespace detail {

/// Stencil coefficients at a plane node (vertical face at h/2, integrated
/// tangential weight over the half cell), common to the solver and the
/// complementarity diagnostics.
struct PlaneStencil {
  double c_up;   // coefficient of u(x', h)
  double c_tan;  // coefficient of each tangential neighbor
};

inline PlaneStencil plane_stencil(const GridSpec& spec) {
  const double h = spec.spacing();
  const double a = spec.weight_exponent();
  const int n = spec.thin_dim();
  PlaneStencil st;
  st.c_up = std::pow(0.5 * h, a) * std::pow(h, n - 1);
  st.c_tan = std::pow(0.5 * h, 1.0 + a) / (1.0 + a) * std::pow(h, n - 2);
  return st;
}

}  // namespace detail

/// Discrete weighted flux density at an interior plane node; approximates
/// lim_{t->0+} t^a du/dx_{n+1} (nonpositive for solutions).
inline double plane_weighted_flux(const ScalarField& field, const Idx& idx) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  const detail::PlaneStencil st = detail::plane_stencil(spec);
  const double uc = field.at(idx);
  Idx up = idx;
  up[dim - 1] = 1;
  double net = st.c_up * (field.at(up) - uc) / h;
  for (int i = 0; i < dim - 1; ++i) {
    Idx nb = idx;
    nb[i] += 1;
    net += st.c_tan * (field.at(nb) - uc) / h;
    nb[i] -= 2;
    net += st.c_tan * (field.at(nb) - uc) / h;
  }
  // net carries the in-plane area factor h^{n-1}
  return net / std::pow(h, spec.thin_dim() - 1);
}

struct ComplementarityReport {
  double max_negative_trace = 0.0;  // violation of u >= 0 on the plane
  double max_positive_flux = 0.0;   // violation of flux <= 0
  double max_product = 0.0;         // violation of u * flux = 0
};

/// Worst-case violations of the discrete complementarity conditions over
/// interior plane nodes.
inline ComplementarityReport complementarity_report(const ScalarField& field) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const Idx ext = spec.extents();
  ComplementarityReport rep;
  detail::for_each_node(spec, [&](const Idx& idx) {
    if (idx[dim - 1] != 0) return;
    for (int i = 0; i < dim - 1; ++i)
      if (idx[i] < 1 || idx[i] >= ext[i] - 1) return;
    const double u = field.at(idx);
    const double flux = plane_weighted_flux(field, idx);
    rep.max_negative_trace = std::max(rep.max_negative_trace, -u);
    rep.max_positive_flux = std::max(rep.max_positive_flux, flux);
    rep.max_product = std::max(rep.max_product, std::abs(u * flux));
  });
  return rep;
}

/// The quadratic form the projected relaxation descends: face-weighted
/// squared differences, with the integrated half-cell weight on tangential
/// plane edges.  Approximates the Dirichlet energy and is exactly monotone
/// along PSOR sweeps (the cell-midpoint energy above differs at O(h^2) and
/// need not be).
inline double solver_objective(const ScalarField& field) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  const double a = spec.weight_exponent();
  const Idx ext = spec.extents();
  const double w_plane_tan = std::pow(0.5 * h, 1.0 + a) / ((1.0 + a) * h);

  double total = 0.0, comp = 0.0;
  auto accumulate = [&](double term) {
    const double y = term - comp;
    const double next = total + y;
    comp = (next - total) - y;
    total = next;
  };
  detail::for_each_node(spec, [&](const Idx& idx) {
    const int k = idx[dim - 1];
    const double uc = field.at(idx);
    for (int i = 0; i < dim; ++i) {
      if (idx[i] + 1 >= ext[i]) continue;
      Idx nb = idx;
      nb[i] += 1;
      const double d = field.at(nb) - uc;
      double w;
      if (i == dim - 1) {
        w = std::pow((k + 0.5) * h, a);
      } else {
        w = (k == 0) ? w_plane_tan : std::pow(k * h, a);
      }
      accumulate(w * d * d);
    }
  });
  return 2.0 * std::pow(h, spec.thin_dim() - 1) * total;
}

namespace detail {

enum class NodeKind : unsigned char { Dirichlet, Interior, Plane };

inline NodeKind node_kind(const GridSpec& spec, const Idx& idx) {
  const int dim = spec.dim();
  const Idx ext = spec.extents();
  for (int i = 0; i < dim - 1; ++i)
    if (idx[i] == 0 || idx[i] == ext[i] - 1) return NodeKind::Dirichlet;
  if (idx[dim - 1] == ext[dim - 1] - 1) return NodeKind::Dirichlet;
  return (idx[dim - 1] == 0) ? NodeKind::Plane : NodeKind::Interior;
}

struct Psor {
  const GridSpec& spec;
  ScalarField& u;
  int dim;
  double h, a;
  Idx ext;
  PlaneStencil plane;
  std::vector<double> vertical_w;    // |t|^a at face midpoints, per layer
  std::vector<double> horizontal_w;  // |t|^a at node height, per layer
  std::vector<double> inv_diag;      // 1 / (sum of stencil weights), per layer
  double plane_inv_diag;

  Psor(const GridSpec& s, ScalarField& field) : spec(s), u(field) {
    dim = spec.dim();
    h = spec.spacing();
    a = spec.weight_exponent();
    ext = spec.extents();
    plane = plane_stencil(spec);
    const int layers = ext[dim - 1];
    vertical_w.resize(layers + 1, 0.0);
    horizontal_w.resize(layers + 1, 0.0);
    inv_diag.resize(layers + 1, 0.0);
    for (int k = 0; k <= layers; ++k) {
      vertical_w[k] = std::pow((k + 0.5) * h, a);  // face between layers k and k+1
      horizontal_w[k] = std::pow(k * h, a);
    }
    for (int k = 1; k <= layers; ++k)
      inv_diag[k] =
          1.0 / (2.0 * (dim - 1) * horizontal_w[k] + vertical_w[k] + vertical_w[k - 1]);
    plane_inv_diag = 1.0 / (plane.c_up + 2.0 * (dim - 1) * plane.c_tan);
  }

  // color < 0 sweeps every node, otherwise only nodes of that parity
  double sweep(double omega, bool project_plane, int color) {
    double max_update = 0.0;
    double* v = u.values.data();

    auto relax_interior = [&](std::size_t lin, int k, std::size_t stride_a, std::size_t stride_b,
                              bool has_b) {
      const double w_hor = horizontal_w[k];
      double num = w_hor * (v[lin - stride_a] + v[lin + stride_a]);
      if (has_b) num += w_hor * (v[lin - stride_b] + v[lin + stride_b]);
      num += vertical_w[k] * v[lin + 1] + vertical_w[k - 1] * v[lin - 1];
      const double old = v[lin];
      const double next = old + omega * (num * inv_diag[k] - old);
      v[lin] = next;
      max_update = std::max(max_update, std::abs(next - old));
    };
    auto relax_plane = [&](std::size_t lin, std::size_t stride_a, std::size_t stride_b,
                           bool has_b) {
      double num = plane.c_up * v[lin + 1] + plane.c_tan * (v[lin - stride_a] + v[lin + stride_a]);
      if (has_b) num += plane.c_tan * (v[lin - stride_b] + v[lin + stride_b]);
      const double old = v[lin];
      double next = old + omega * (num * plane_inv_diag - old);
      if (project_plane) next = std::max(0.0, next);
      v[lin] = next;
      max_update = std::max(max_update, std::abs(next - old));
    };

    if (dim == 2) {
      const std::size_t sv = static_cast<std::size_t>(ext[1]);
      for (int i = 1; i < ext[0] - 1; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * sv;
        if (color < 0 || (i % 2) == color) relax_plane(row, sv, 0, false);
        const int k0 = (color < 0) ? 1 : 1 + ((i + 1 + color) % 2);
        const int kstep = (color < 0) ? 1 : 2;
        for (int k = k0; k < ext[1] - 1; k += kstep) relax_interior(row + k, k, sv, 0, false);
      }
    } else {
      const std::size_t s1 = static_cast<std::size_t>(ext[2]);
      const std::size_t s0 = s1 * static_cast<std::size_t>(ext[1]);
      for (int i = 1; i < ext[0] - 1; ++i) {
        for (int j = 1; j < ext[1] - 1; ++j) {
          const std::size_t row = static_cast<std::size_t>(i) * s0 +
                                  static_cast<std::size_t>(j) * s1;
          if (color < 0 || ((i + j) % 2) == color) relax_plane(row, s0, s1, true);
          const int k0 = (color < 0) ? 1 : 1 + ((i + j + 1 + color) % 2);
          const int kstep = (color < 0) ? 1 : 2;
          for (int k = k0; k < ext[2] - 1; k += kstep) relax_interior(row + k, k, s0, s1, true);
        }
      }
    }
    return max_update;
  }
};

}  // namespace detail

/// Solves the discrete thin obstacle problem with boundary data g (pointwise
/// evaluator on the closed box; only boundary nodes are read).  Rejects
/// negative traces of g on the thin part of the boundary.
template <class G>
inline std::pair<ScalarField, SolveReport> psor_solve(const GridSpec& spec, G&& g,
                                                      SolveParams params = {}) {
  if (!(params.relaxation > 0.0 && params.relaxation < 2.0))
    throw std::invalid_argument("psor_solve: relaxation factor must lie in (0,2)");
  if (!(params.tolerance > 0.0))
    throw std::invalid_argument("psor_solve: tolerance must be positive");
  const int dim = spec.dim();
  if (params.max_sweeps <= 0) params.max_sweeps = 200 * spec.plane_extent();
  if (params.energy_stride < 1) params.energy_stride = 1;

  ScalarField u(spec);
  detail::for_each_node(spec, [&](const Idx& idx) {
    if (detail::node_kind(spec, idx) != detail::NodeKind::Dirichlet) return;
    const Vec x = spec.node_coord(idx);
    const double v = g(x);
    if (!std::isfinite(v)) throw std::domain_error("psor_solve: non-finite boundary value");
    if (idx[dim - 1] == 0 && v < 0.0)
      throw std::invalid_argument("psor_solve: boundary data has negative thin trace");
    u.at(idx) = v;
  });

  detail::Psor engine(spec, u);

  if (params.init == SolveInit::HarmonicExtension) {
    // unconstrained SOR warm start from the same boundary data
    for (int sweep = 0; sweep < params.max_sweeps; ++sweep) {
      const double upd = engine.sweep(params.relaxation, false, -1);
      if (upd <= params.tolerance) break;
    }
  }

  SolveReport report;
  for (int sweep = 1; sweep <= params.max_sweeps; ++sweep) {
    double upd = 0.0;
    if (params.order == SweepOrder::Lexicographic) {
      upd = engine.sweep(params.relaxation, true, -1);
    } else {
      upd = engine.sweep(params.relaxation, true, 0);
      upd = std::max(upd, engine.sweep(params.relaxation, true, 1));
    }
    report.sweeps_used = sweep;
    report.final_update = upd;
    if (sweep % params.energy_stride == 0) report.energy_history.push_back(solver_objective(u));
    if (upd <= params.tolerance) {
      report.converged = true;
      break;
    }
  }
  if (report.energy_history.empty() || report.sweeps_used % params.energy_stride != 0)
    report.energy_history.push_back(solver_objective(u));
  return {std::move(u), report};
}

}  // namespace tfb
