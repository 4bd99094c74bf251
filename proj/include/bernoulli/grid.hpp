#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bernoulli {

/// Raised for inputs that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);

/// Uniform node-centred grid. Node (i, j) sits at origin + h * (i, j).
class GridSpec {
 public:
  GridSpec(Point origin, double spacing, int nx, int ny);

  Point origin() const { return origin_; }
  double spacing() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx_ + i;
  }
  Point node(int i, int j) const {
    return {origin_.x + h_ * i, origin_.y + h_ * j};
  }
  Point upper() const { return node(nx_ - 1, ny_ - 1); }

  bool contains(Point p, double margin = 0.0) const;
  bool contains_disk(Point c, double r) const;

  /// Grid covering [x0, x1] x [y0, y1] with spacing h (extent rounded to nodes).
  static GridSpec covering(Point lo, Point hi, double h);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  Point origin_;
  double h_;
  int nx_;
  int ny_;
};

/// Nodal scalar samples, row-major (x fastest).
class ScalarField {
 public:
  explicit ScalarField(GridSpec grid, double fill = 0.0);
  ScalarField(GridSpec grid, std::vector<double> values);

  template <class Fn>
  static ScalarField sample(const GridSpec& grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) v[grid.index(i, j)] = fn(grid.node(i, j));
    return ScalarField(grid, std::move(v));
  }

  const GridSpec& grid() const { return grid_; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double max_abs() const;
  /// Bilinear interpolation; throws InvalidInput outside the grid.
  double interpolate(Point p) const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

using Vec2 = std::array<double, 2>;

/// Symmetric 2x2 matrix.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double trace() const { return xx + yy; }
  double quad(Vec2 a, Vec2 b) const {
    return a[0] * (xx * b[0] + xy * b[1]) + a[1] * (xy * b[0] + yy * b[1]);
  }
  Vec2 apply(Vec2 v) const { return {xx * v[0] + xy * v[1], xy * v[0] + yy * v[1]}; }
  double min_eigenvalue() const;
  double max_eigenvalue() const;
};

template <class T>
class NodalField {
 public:
  explicit NodalField(GridSpec grid) : grid_(grid), values_(grid.size()) {}

  const GridSpec& grid() const { return grid_; }
  const T& operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  T& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }

 private:
  GridSpec grid_;
  std::vector<T> values_;
};

using VectorField = NodalField<Vec2>;
using MatrixField = NodalField<Sym2>;

/// Text dump: "nx ny h x0 y0" then nx*ny values, one per line, 17 significant digits.
void write_field(std::ostream& out, const ScalarField& u);
ScalarField read_field(std::istream& in);
void save_field(const std::string& path, const ScalarField& u);
ScalarField load_field(const std::string& path);

}  // namespace bernoulli
