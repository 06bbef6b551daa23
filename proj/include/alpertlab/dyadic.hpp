#pragma once

// Dyadic cube geometry on the root cube [0,1)^n, n <= 3.

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace alpertlab {

inline constexpr int kMaxDim = 3;

/// A point of R^n; only the first `dim` entries are meaningful.
using Point = std::array<double, kMaxDim>;

/// Axis-aligned box [lo, hi) in R^n.
struct Box {
  int dim = 1;
  Point lo{};
  Point hi{};

  double side(int axis) const { return hi[axis] - lo[axis]; }
  double center(int axis) const { return 0.5 * (lo[axis] + hi[axis]); }
  Point centre() const;
  double volume() const;
  bool contains(const Point &x) const;
  /// Euclidean distance from x to the closed box (0 inside).
  double distance(const Point &x) const;
  /// The box pushed outwards by `margin` on every face.
  Box expanded(double margin) const;
};

/// The cube 2^{-level}([0,1)^n + index).
struct DyadicCube {
  int dim = 1;
  int level = 0;
  std::array<std::int64_t, kMaxDim> index{};

  static DyadicCube root(int dim);
  /// Validates 0 <= index_i < 2^level.
  static DyadicCube make(int dim, int level, std::array<std::int64_t, kMaxDim> index);

  double side() const;
  double volume() const;
  double lower(int axis) const { return static_cast<double>(index[axis]) * side(); }
  double upper(int axis) const { return static_cast<double>(index[axis] + 1) * side(); }
  Box box() const;
  Point centre() const { return box().centre(); }
  bool contains(const Point &x) const { return box().contains(x); }
  /// True if *this is a (not necessarily strict) descendant of `other`.
  bool inside(const DyadicCube &other) const;

  int child_count() const { return 1 << dim; }
  /// Child c, with axis 0 as the most significant bit of c.
  DyadicCube child(int c) const;

  std::string to_string() const;

  friend bool operator==(const DyadicCube &, const DyadicCube &) = default;
  /// Level ascending, then lexicographic index.
  friend std::strong_ordering operator<=>(const DyadicCube &a, const DyadicCube &b);
};

/// 0/1 offset of child `c` along `axis` in dimension `dim`.
inline int child_bit(int c, int axis, int dim) { return (c >> (dim - 1 - axis)) & 1; }

std::vector<DyadicCube> children(const DyadicCube &q);
DyadicCube parent(const DyadicCube &q);
/// The ancestor s generations up; s >= 1 and s <= q.level.
DyadicCube ancestor(const DyadicCube &q, int s);

/// Distance from x to the skeleton of q (the union of its children's boundaries).
double skeleton_distance(const Point &x, const DyadicCube &q);
/// Distance from x to the boundary of q only.
double boundary_distance(const Point &x, const DyadicCube &q);
/// skeleton_distance(x, q) < width.
bool in_halo(const Point &x, const DyadicCube &q, double width);

/// Halo {x : dist(x, S_Q) < width} with an explicit absolute width.
struct HaloQuery {
  DyadicCube cube;
  double width = 0.0;

  bool contains(const Point &x) const { return in_halo(x, cube, width); }
};

/// I is a Carleson cube of Q: strictly smaller and sharing an (n-1)-face with Q.
bool is_carleson(const DyadicCube &i, const DyadicCube &q);

enum class SiblingRelation { none, sibling, dyadic_sibling };
SiblingRelation are_siblings(const DyadicCube &a, const DyadicCube &b);

/// Distance between the closures of two boxes.
double box_distance(const Box &a, const Box &b);

struct GridTruncation {
  int dim = 1;
  int max_depth = 0;

  /// Sum_{k=0}^{max_depth} 2^{nk}.
  std::size_t cube_count() const;
};

/// All cubes of levels 0..max_depth, level ascending then lexicographic index.
std::vector<DyadicCube> enumerate(const GridTruncation &trunc);
/// Cubes of one level in lexicographic order.
std::vector<DyadicCube> level_cubes(int dim, int level);
/// Position of a cube within level_cubes(dim, level).
std::size_t level_offset(const DyadicCube &q);
/// The level-`level` cube containing x (x must lie in the root).
DyadicCube locate(const Point &x, int dim, int level);

} // namespace alpertlab
