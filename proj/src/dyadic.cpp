#include "alpertlab/dyadic.hpp"

#include "alpertlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace alpertlab {

Point Box::centre() const {
  Point c{};
  for (int i = 0; i < dim; ++i)
    c[i] = center(i);
  return c;
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim; ++i)
    v *= side(i);
  return v;
}

bool Box::contains(const Point &x) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] < lo[i] || x[i] >= hi[i])
      return false;
  return true;
}

double Box::distance(const Point &x) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

Box Box::expanded(double margin) const {
  Box b = *this;
  for (int i = 0; i < dim; ++i) {
    b.lo[i] -= margin;
    b.hi[i] += margin;
  }
  return b;
}

DyadicCube DyadicCube::root(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw Error("dimension must be 1, 2 or 3");
  return DyadicCube{dim, 0, {}};
}

DyadicCube DyadicCube::make(int dim, int level, std::array<std::int64_t, kMaxDim> index) {
  if (dim < 1 || dim > kMaxDim)
    throw Error("dimension must be 1, 2 or 3");
  if (level < 0 || level > 52)
    throw OutOfGridError("cube level out of range");
  const std::int64_t n = std::int64_t{1} << level;
  for (int i = 0; i < dim; ++i)
    if (index[i] < 0 || index[i] >= n)
      throw OutOfGridError("cube index outside the root cube");
  for (int i = dim; i < kMaxDim; ++i)
    index[i] = 0;
  return DyadicCube{dim, level, index};
}

double DyadicCube::side() const { return std::ldexp(1.0, -level); }

double DyadicCube::volume() const { return std::ldexp(1.0, -level * dim); }

Box DyadicCube::box() const {
  Box b;
  b.dim = dim;
  for (int i = 0; i < dim; ++i) {
    b.lo[i] = lower(i);
    b.hi[i] = upper(i);
  }
  return b;
}

bool DyadicCube::inside(const DyadicCube &other) const {
  if (other.dim != dim || other.level > level)
    return false;
  const int s = level - other.level;
  for (int i = 0; i < dim; ++i)
    if ((index[i] >> s) != other.index[i])
      return false;
  return true;
}

DyadicCube DyadicCube::child(int c) const {
  DyadicCube ch{dim, level + 1, {}};
  for (int i = 0; i < dim; ++i)
    ch.index[i] = 2 * index[i] + child_bit(c, i, dim);
  return ch;
}

std::string DyadicCube::to_string() const {
  std::ostringstream os;
  os << 'L' << level << ':';
  for (int i = 0; i < dim; ++i)
    os << (i ? "_" : "") << index[i];
  return os.str();
}

std::strong_ordering operator<=>(const DyadicCube &a, const DyadicCube &b) {
  if (auto c = a.dim <=> b.dim; c != 0)
    return c;
  if (auto c = a.level <=> b.level; c != 0)
    return c;
  for (int i = 0; i < a.dim; ++i)
    if (auto c = a.index[i] <=> b.index[i]; c != 0)
      return c;
  return std::strong_ordering::equal;
}

std::vector<DyadicCube> children(const DyadicCube &q) {
  std::vector<DyadicCube> out;
  out.reserve(q.child_count());
  for (int c = 0; c < q.child_count(); ++c)
    out.push_back(q.child(c));
  return out;
}

DyadicCube parent(const DyadicCube &q) { return ancestor(q, 1); }

DyadicCube ancestor(const DyadicCube &q, int s) {
  if (s < 1)
    throw Error("ancestor generation must be >= 1");
  if (s > q.level)
    throw OutOfGridError("ancestor above the root cube");
  DyadicCube a{q.dim, q.level - s, {}};
  for (int i = 0; i < q.dim; ++i)
    a.index[i] = q.index[i] >> s;
  return a;
}

namespace {

// Distance from x to the union over axes i and planes s in `planes(i)` of
// {y : y_i = s, y_j in [lo_j, hi_j] for j != i}.
template <int NPlanes>
double faces_distance(const Point &x, const DyadicCube &q) {
  const Box b = q.box();
  std::array<double, kMaxDim> outside{};
  for (int j = 0; j < q.dim; ++j)
    outside[j] = std::max({b.lo[j] - x[j], 0.0, x[j] - b.hi[j]});
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < q.dim; ++i) {
    double rest = 0.0;
    for (int j = 0; j < q.dim; ++j)
      if (j != i)
        rest += outside[j] * outside[j];
    std::array<double, 3> planes{b.lo[i], b.hi[i], b.center(i)};
    for (int k = 0; k < NPlanes; ++k) {
      const double d = x[i] - planes[k];
      best = std::min(best, std::sqrt(d * d + rest));
    }
  }
  return best;
}

} // namespace

double skeleton_distance(const Point &x, const DyadicCube &q) { return faces_distance<3>(x, q); }

double boundary_distance(const Point &x, const DyadicCube &q) { return faces_distance<2>(x, q); }

bool in_halo(const Point &x, const DyadicCube &q, double width) {
  return skeleton_distance(x, q) < width;
}

bool is_carleson(const DyadicCube &i, const DyadicCube &q) {
  if (i.dim != q.dim || i.level <= q.level)
    return false;
  // Interval relation per axis, in units of ℓ(I).
  const int s = i.level - q.level;
  const std::int64_t span = std::int64_t{1} << s;
  int touching_outside = 0;
  bool touches_inner_face = false;
  for (int a = 0; a < q.dim; ++a) {
    const std::int64_t qlo = q.index[a] * span;
    const std::int64_t qhi = qlo + span;
    const std::int64_t ilo = i.index[a];
    const std::int64_t ihi = ilo + 1;
    if (ilo >= qlo && ihi <= qhi) {
      if (ilo == qlo || ihi == qhi)
        touches_inner_face = true;
    } else if (ihi == qlo || ilo == qhi) {
      ++touching_outside;
    } else {
      return false;
    }
  }
  if (touching_outside == 0)
    return touches_inner_face;
  return touching_outside == 1;
}

SiblingRelation are_siblings(const DyadicCube &a, const DyadicCube &b) {
  if (a.dim != b.dim || a.level != b.level || a == b)
    return SiblingRelation::none;
  for (int i = 0; i < a.dim; ++i) {
    const std::int64_t d = a.index[i] - b.index[i];
    if (d < -1 || d > 1)
      return SiblingRelation::none;
  }
  if (a.level > 0 && parent(a) == parent(b))
    return SiblingRelation::dyadic_sibling;
  return SiblingRelation::sibling;
}

double box_distance(const Box &a, const Box &b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) {
    const double d = std::max({a.lo[i] - b.hi[i], 0.0, b.lo[i] - a.hi[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

std::size_t GridTruncation::cube_count() const {
  std::size_t total = 0;
  for (int k = 0; k <= max_depth; ++k)
    total += std::size_t{1} << (dim * k);
  return total;
}

std::vector<DyadicCube> level_cubes(int dim, int level) {
  const std::int64_t n = std::int64_t{1} << level;
  const std::size_t count = std::size_t{1} << (dim * level);
  std::vector<DyadicCube> out;
  out.reserve(count);
  for (std::size_t flat = 0; flat < count; ++flat) {
    DyadicCube q{dim, level, {}};
    std::size_t rem = flat;
    for (int i = dim - 1; i >= 0; --i) {
      q.index[i] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    out.push_back(q);
  }
  return out;
}

std::size_t level_offset(const DyadicCube &q) {
  const std::size_t n = std::size_t{1} << q.level;
  std::size_t flat = 0;
  for (int i = 0; i < q.dim; ++i)
    flat = flat * n + static_cast<std::size_t>(q.index[i]);
  return flat;
}

std::vector<DyadicCube> enumerate(const GridTruncation &trunc) {
  if (trunc.max_depth < 0)
    throw Error("truncation depth must be >= 0");
  std::vector<DyadicCube> out;
  out.reserve(trunc.cube_count());
  for (int k = 0; k <= trunc.max_depth; ++k) {
    auto lvl = level_cubes(trunc.dim, k);
    out.insert(out.end(), lvl.begin(), lvl.end());
  }
  return out;
}

DyadicCube locate(const Point &x, int dim, int level) {
  const std::int64_t n = std::int64_t{1} << level;
  DyadicCube q{dim, level, {}};
  for (int i = 0; i < dim; ++i) {
    auto j = static_cast<std::int64_t>(std::floor(std::ldexp(x[i], level)));
    if (j < 0 || j >= n)
      throw OutOfGridError("point outside the root cube");
    q.index[i] = j;
  }
  return q;
}

} // namespace alpertlab
