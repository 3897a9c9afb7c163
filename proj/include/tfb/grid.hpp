#pragma once

// Tensor grids on the upper half box [-R,R]^n x [0,R] carrying scalar fields
// with the degenerate weight |x_{n+1}|^a, a in (-1,1).  Fields are even in
// x_{n+1}; only the half grid is stored and queries below the plane are
// answered by reflection.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfb {

inline constexpr int kMaxDim = 3;

using Vec = std::array<double, kMaxDim>;
using Idx = std::array<int, kMaxDim>;

inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline double dot(const Vec& a, const Vec& b, int dim = kMaxDim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a, int dim = kMaxDim) { return std::sqrt(dot(a, a, dim)); }

inline double dist(const Vec& a, const Vec& b, int dim = kMaxDim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Validated description of a half-space tensor grid.
///
/// Nodes sit at integer multiples of the spacing h; the thin hyperplane
/// x_{n+1} = 0 is the first vertical layer.  In-plane axes carry 2N+1 nodes
/// on [-R,R], the vertical axis N+1 nodes on [0,R], with N = R/h.
class GridSpec {
 public:
  GridSpec(int ambient_dim, double half_width, double spacing, double weight_exponent)
      : dim_(ambient_dim), half_width_(half_width), spacing_(spacing), a_(weight_exponent) {
    if (dim_ != 2 && dim_ != 3)
      throw std::invalid_argument("GridSpec: ambient_dim must be 2 or 3");
    if (!(half_width > 0.0) || !(spacing > 0.0))
      throw std::invalid_argument("GridSpec: half_width and spacing must be positive");
    if (!(a_ > -1.0 && a_ < 1.0))
      throw std::invalid_argument("GridSpec: weight exponent must lie in (-1,1)");
    const double ratio = half_width / spacing;
    cells_ = static_cast<int>(std::llround(ratio));
    if (cells_ < 1 || std::abs(ratio - cells_) > 1e-9 * std::max(1.0, ratio))
      throw std::invalid_argument("GridSpec: half_width/spacing must be a positive integer");
  }

  int dim() const { return dim_; }
  int thin_dim() const { return dim_ - 1; }  // n
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  double weight_exponent() const { return a_; }
  double s() const { return 0.5 * (1.0 - a_); }

  int cells_per_half_axis() const { return cells_; }
  int plane_extent() const { return 2 * cells_ + 1; }
  int vertical_extent() const { return cells_ + 1; }

  Idx extents() const {
    Idx e{1, 1, 1};
    for (int i = 0; i < dim_ - 1; ++i) e[i] = plane_extent();
    e[dim_ - 1] = vertical_extent();
    return e;
  }

  std::size_t node_count() const {
    std::size_t n = 1;
    const Idx e = extents();
    for (int i = 0; i < dim_; ++i) n *= static_cast<std::size_t>(e[i]);
    return n;
  }

  // Row-major, vertical axis fastest.
  std::size_t linear_index(const Idx& idx) const {
    const Idx e = extents();
    std::size_t lin = 0;
    for (int i = 0; i < dim_; ++i) lin = lin * e[i] + idx[i];
    return lin;
  }

  Vec node_coord(const Idx& idx) const {
    Vec p{0.0, 0.0, 0.0};
    for (int i = 0; i < dim_ - 1; ++i) p[i] = -half_width_ + idx[i] * spacing_;
    p[dim_ - 1] = idx[dim_ - 1] * spacing_;
    return p;
  }

  /// True when p lies in the closed box after reflecting to x_{n+1} >= 0.
  bool contains(const Vec& p, double slack = 1e-12) const {
    for (int i = 0; i < dim_ - 1; ++i)
      if (std::abs(p[i]) > half_width_ + slack) return false;
    return std::abs(p[dim_ - 1]) <= half_width_ + slack;
  }

  bool operator==(const GridSpec& o) const {
    return dim_ == o.dim_ && half_width_ == o.half_width_ && spacing_ == o.spacing_ && a_ == o.a_;
  }

 private:
  int dim_;
  double half_width_;
  double spacing_;
  double a_;
  int cells_;
};

inline GridSpec make_grid(int ambient_dim, double half_width, double spacing, double a) {
  return GridSpec(ambient_dim, half_width, spacing, a);
}

/// Nodal samples of a scalar field over the half grid.  Immutable by
/// convention once filled; every operation in the library treats fields as
/// read-only values.
struct ScalarField {
  GridSpec spec;
  std::vector<double> values;

  explicit ScalarField(const GridSpec& s) : spec(s), values(s.node_count(), 0.0) {}

  double at(const Idx& idx) const { return values[spec.linear_index(idx)]; }
  double& at(const Idx& idx) { return values[spec.linear_index(idx)]; }
};

namespace detail {

template <class F>
inline void for_each_node(const GridSpec& spec, F&& f) {
  const Idx e = spec.extents();
  Idx idx{0, 0, 0};
  if (spec.dim() == 2) {
    for (idx[0] = 0; idx[0] < e[0]; ++idx[0])
      for (idx[1] = 0; idx[1] < e[1]; ++idx[1]) f(idx);
  } else {
    for (idx[0] = 0; idx[0] < e[0]; ++idx[0])
      for (idx[1] = 0; idx[1] < e[1]; ++idx[1])
        for (idx[2] = 0; idx[2] < e[2]; ++idx[2]) f(idx);
  }
}

}  // namespace detail

/// Samples a pointwise evaluator at the grid nodes.  Non-finite values are
/// reported with the offending node coordinates.
template <class F>
inline ScalarField sample(const GridSpec& spec, F&& f) {
  ScalarField field(spec);
  detail::for_each_node(spec, [&](const Idx& idx) {
    const Vec p = spec.node_coord(idx);
    const double v = f(p);
    if (!std::isfinite(v)) {
      std::string msg = "sample: non-finite value at node (";
      for (int i = 0; i < spec.dim(); ++i)
        msg += (i ? "," : "") + std::to_string(p[i]);
      throw std::domain_error(msg + ")");
    }
    field.at(idx) = v;
  });
  return field;
}

/// Multilinear interpolation with even reflection across x_{n+1} = 0.
/// Exact at nodes and on multilinear functions; p must lie in the closed box.
inline double interpolate(const ScalarField& field, Vec p) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  p[dim - 1] = std::abs(p[dim - 1]);
  if (!spec.contains(p))
    throw std::domain_error("interpolate: point outside grid box");

  const Idx ext = spec.extents();
  Idx base{0, 0, 0};
  Vec frac{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i) {
    const double t = (i < dim - 1) ? (p[i] + spec.half_width()) / h : p[i] / h;
    int cell = static_cast<int>(std::floor(t));
    cell = std::max(0, std::min(cell, ext[i] - 2));
    base[i] = cell;
    frac[i] = t - cell;
  }

  double value = 0.0;
  const int corners = 1 << dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    Idx idx = base;
    for (int i = 0; i < dim; ++i) {
      if (c & (1 << i)) {
        idx[i] += 1;
        w *= frac[i];
      } else {
        w *= 1.0 - frac[i];
      }
    }
    if (w != 0.0) value += w * field.at(idx);
  }
  return value;
}

/// Central-difference gradient of the interpolated field at an arbitrary
/// point (half-spacing stencil).  At cell centers this coincides with the
/// edge-averaged nodal differences used by the quadratures.
inline Vec gradient_at(const ScalarField& field, const Vec& p) {
  const int dim = field.spec.dim();
  const double h = field.spec.spacing();
  Vec g{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i) {
    Vec hi = p, lo = p;
    hi[i] += 0.5 * h;
    lo[i] -= 0.5 * h;
    g[i] = (interpolate(field, hi) - interpolate(field, lo)) / h;
  }
  return g;
}

/// Flux-form residual of div(|x_{n+1}|^a grad u) at strictly interior nodes
/// (x_{n+1} > 0).  Face weights are |x_{n+1}|^a at face midpoints, so every
/// coefficient stays finite for a != 0.  Returns a per-node array, zero at
/// plane and boundary nodes.
inline std::vector<double> weighted_divergence_residual(const ScalarField& field) {
  const GridSpec& spec = field.spec;
  const int dim = spec.dim();
  const double h = spec.spacing();
  const double a = spec.weight_exponent();
  const Idx ext = spec.extents();
  std::vector<double> res(spec.node_count(), 0.0);

  detail::for_each_node(spec, [&](const Idx& idx) {
    // interior: strictly inside every axis, and above the plane
    if (idx[dim - 1] < 1 || idx[dim - 1] >= ext[dim - 1] - 1) return;
    for (int i = 0; i < dim - 1; ++i)
      if (idx[i] < 1 || idx[i] >= ext[i] - 1) return;

    const double t = idx[dim - 1] * h;  // vertical coordinate > 0
    const double uc = field.at(idx);
    double sum = 0.0;
    for (int i = 0; i < dim; ++i) {
      Idx up = idx, dn = idx;
      up[i] += 1;
      dn[i] -= 1;
      double w_up, w_dn;
      if (i < dim - 1) {
        w_up = w_dn = std::pow(t, a);
      } else {
        w_up = std::pow(t + 0.5 * h, a);
        w_dn = std::pow(t - 0.5 * h, a);
      }
      sum += w_up * (field.at(up) - uc) + w_dn * (field.at(dn) - uc);
    }
    res[spec.linear_index(idx)] = sum / (h * h);
  });
  return res;
}

/// Max |residual| over nodes accepted by the predicate (coordinates in, bool out).
template <class Pred>
inline double max_divergence_residual(const ScalarField& field, Pred&& keep) {
  const std::vector<double> res = weighted_divergence_residual(field);
  double worst = 0.0;
  detail::for_each_node(field.spec, [&](const Idx& idx) {
    const double r = std::abs(res[field.spec.linear_index(idx)]);
    if (r > worst && keep(field.spec.node_coord(idx))) worst = r;
  });
  return worst;
}

// --- binary field dump ------------------------------------------------------
//
// Layout (little-endian): magic "TFB1", ambient_dim u32, nodes-per-axis u32
// each, spacing f64, weight exponent f64, then row-major f64 values.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

inline void write_field(const ScalarField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_field: cannot open " + path);
  os.write("TFB1", 4);
  detail::put_u32(os, static_cast<std::uint32_t>(field.spec.dim()));
  const Idx ext = field.spec.extents();
  for (int i = 0; i < field.spec.dim(); ++i)
    detail::put_u32(os, static_cast<std::uint32_t>(ext[i]));
  detail::put_f64(os, field.spec.spacing());
  detail::put_f64(os, field.spec.weight_exponent());
  for (double v : field.values) detail::put_f64(os, v);
  if (!os) throw std::runtime_error("write_field: write failed for " + path);
}

inline ScalarField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_field: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TFB1", 4) != 0)
    throw std::runtime_error("read_field: bad magic in " + path);
  const int dim = static_cast<int>(detail::get_u32(is));
  if (dim != 2 && dim != 3) throw std::runtime_error("read_field: bad dimension");
  Idx ext{1, 1, 1};
  for (int i = 0; i < dim; ++i) ext[i] = static_cast<int>(detail::get_u32(is));
  const double h = detail::get_f64(is);
  const double a = detail::get_f64(is);
  GridSpec spec(dim, (ext[dim - 1] - 1) * h, h, a);
  const Idx expect = spec.extents();
  for (int i = 0; i < dim; ++i)
    if (ext[i] != expect[i]) throw std::runtime_error("read_field: inconsistent extents");
  ScalarField field(spec);
  for (double& v : field.values) v = detail::get_f64(is);
  if (!is) throw std::runtime_error("read_field: truncated file " + path);
  return field;
}

}  // namespace tfb
