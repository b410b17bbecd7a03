#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace scenery {

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double two_pi = 2.0 * pi;

// Reduce x into [0, 2pi). Throws std::invalid_argument for non-finite input.
double wrap_angle(double x);

// A point of the flat torus [0, 2pi)^d.
class TorusPoint {
public:
  TorusPoint() = default;
  explicit TorusPoint(std::vector<double> coords);
  static TorusPoint origin(int dim);

  int dim() const { return static_cast<int>(c_.size()); }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& coords() const { return c_; }

  TorusPoint operator+(const TorusPoint& o) const;
  TorusPoint operator-(const TorusPoint& o) const;
  TorusPoint operator-() const;
  bool operator==(const TorusPoint&) const = default;

private:
  std::vector<double> c_;
};

// Pointer tuple (y_1, ..., y_n); its partial sums are the visited offsets.
using PointerTuple = std::vector<TorusPoint>;
PointerTuple pointers_1d(std::initializer_list<double> ys);
PointerTuple pointers_1d(std::span<const double> ys);

// Arc on the circle: the open set (lo, lo + length) mod 2pi.
struct Arc {
  double lo = 0.0;      // in [0, 2pi)
  double length = 0.0;  // in (0, 2pi]
};

// Product of one arc per coordinate.
using Box = std::vector<Arc>;

// Axis-aligned box that does not wrap: lo[i] < hi[i], both in [0, 2pi].
struct FlatBox {
  std::vector<double> lo, hi;
  double volume() const;
};

// Indicator scenery 1_Omega where Omega is a finite union of open boxes.
class Scenery {
public:
  explicit Scenery(int dim = 1);

  // Each box is a list of (lo, hi) per coordinate with lo < hi; hi - lo >= 2pi
  // means the full circle in that coordinate.
  static Scenery from_intervals(
      int dim, const std::vector<std::vector<std::pair<double, double>>>& boxes);
  static Scenery intervals(std::initializer_list<std::pair<double, double>> arcs);
  static Scenery from_boxes(int dim, std::vector<Box> boxes);

  int dim() const { return dim_; }
  bool empty() const { return boxes_.empty(); }
  const std::vector<Box>& boxes() const { return boxes_; }
  // Pairwise disjoint non-wrapping pieces covering Omega up to a null set.
  const std::vector<FlatBox>& fragments() const { return fragments_; }

  double measure() const;
  bool contains(std::span<const double> x) const;
  bool contains(const TorusPoint& x) const { return contains(std::span(x.coords())); }
  // Distinct boundary points of a one-dimensional scenery.
  int boundary_count() const;

  Scenery translated(std::span<const double> theta) const;
  Scenery reflected() const;

  // Integral of 1_Omega(x) exp(-i q.x) over the torus.
  std::complex<double> fourier(std::span<const int> q) const;

private:
  void normalize();

  int dim_;
  std::vector<Box> boxes_;
  std::vector<FlatBox> fragments_;
};

// Fragment helpers shared by the correlation code.
std::vector<FlatBox> shift_fragments(const std::vector<FlatBox>& f,
                                     std::span<const double> offset);
std::vector<FlatBox> intersect_fragments(const std::vector<FlatBox>& a,
                                         const std::vector<FlatBox>& b);
double total_volume(const std::vector<FlatBox>& f);

// Per-coordinate factor of the indicator transform for an interval [lo, hi].
std::complex<double> interval_transform(int q, double lo, double hi);

double symmetric_difference(const Scenery& a, const Scenery& b);

struct Alignment {
  double distance = 0.0;
  std::vector<double> shift;  // theta with (a + theta) compared against b
  bool reflected = false;     // a was replaced by -a before shifting
};

// min over theta (and optionally a -> -a) of mu((a + theta) sym-diff b).
// Shifts run over the grid (2pi/resolution) Z^d; in one dimension the
// endpoint differences are added, which makes the one-dimensional search exact.
Alignment aligned_distance(const Scenery& a, const Scenery& b, int resolution,
                           bool allow_reflection);

}  // namespace scenery
