#include "scenery/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace scenery {

double wrap_angle(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("wrap_angle: non-finite coordinate");
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

TorusPoint::TorusPoint(std::vector<double> coords) : c_(std::move(coords)) {
  for (double& v : c_) v = wrap_angle(v);
}

TorusPoint TorusPoint::origin(int dim) {
  if (dim < 1) throw std::invalid_argument("TorusPoint: dimension must be positive");
  return TorusPoint(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
}

TorusPoint TorusPoint::operator+(const TorusPoint& o) const {
  if (o.dim() != dim()) throw std::invalid_argument("TorusPoint: dimension mismatch");
  std::vector<double> r(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] = c_[i] + o.c_[i];
  return TorusPoint(std::move(r));
}

TorusPoint TorusPoint::operator-(const TorusPoint& o) const { return *this + (-o); }

TorusPoint TorusPoint::operator-() const {
  std::vector<double> r(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] = -c_[i];
  return TorusPoint(std::move(r));
}

PointerTuple pointers_1d(std::span<const double> ys) {
  PointerTuple out;
  out.reserve(ys.size());
  for (double y : ys) out.emplace_back(std::vector<double>{y});
  return out;
}

PointerTuple pointers_1d(std::initializer_list<double> ys) {
  return pointers_1d(std::span<const double>(ys.begin(), ys.size()));
}

double FlatBox::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

namespace {

using Piece = std::pair<double, double>;

// Non-wrapping pieces of one arc.
void arc_pieces(const Arc& a, std::vector<Piece>& out) {
  out.clear();
  if (a.length >= two_pi) {
    out.emplace_back(0.0, two_pi);
    return;
  }
  double end = a.lo + a.length;
  if (end <= two_pi) {
    out.emplace_back(a.lo, end);
  } else {
    out.emplace_back(a.lo, two_pi);
    out.emplace_back(0.0, end - two_pi);
  }
}

bool overlaps(const FlatBox& a, const FlatBox& b) {
  for (std::size_t i = 0; i < a.lo.size(); ++i)
    if (std::min(a.hi[i], b.hi[i]) <= std::max(a.lo[i], b.lo[i])) return false;
  return true;
}

// a \ b as disjoint boxes.
void subtract(FlatBox a, const FlatBox& b, std::vector<FlatBox>& out) {
  if (!overlaps(a, b)) {
    out.push_back(std::move(a));
    return;
  }
  for (std::size_t i = 0; i < a.lo.size(); ++i) {
    if (a.lo[i] < b.lo[i]) {
      FlatBox p = a;
      p.hi[i] = b.lo[i];
      out.push_back(std::move(p));
      a.lo[i] = b.lo[i];
    }
    if (a.hi[i] > b.hi[i]) {
      FlatBox p = a;
      p.lo[i] = b.hi[i];
      out.push_back(std::move(p));
      a.hi[i] = b.hi[i];
    }
  }
}

void append_disjoint(std::vector<FlatBox>& acc, FlatBox box) {
  std::vector<FlatBox> pending{std::move(box)}, next;
  for (const FlatBox& existing : acc) {
    next.clear();
    for (FlatBox& p : pending) subtract(std::move(p), existing, next);
    pending.swap(next);
    if (pending.empty()) return;
  }
  for (FlatBox& p : pending)
    if (p.volume() > 0.0) acc.push_back(std::move(p));
}

// Cartesian product of per-coordinate pieces.
void product_boxes(const std::vector<std::vector<Piece>>& pieces, std::vector<FlatBox>& out) {
  const std::size_t d = pieces.size();
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    FlatBox b;
    b.lo.resize(d);
    b.hi.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      b.lo[i] = pieces[i][idx[i]].first;
      b.hi[i] = pieces[i][idx[i]].second;
    }
    out.push_back(std::move(b));
    std::size_t i = 0;
    while (i < d && ++idx[i] == pieces[i].size()) idx[i++] = 0;
    if (i == d) break;
  }
}

Arc make_arc(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("Scenery: non-finite interval bound");
  if (!(hi > lo)) throw std::invalid_argument("Scenery: interval requires lo < hi");
  double len = hi - lo;
  if (len >= two_pi) return Arc{wrap_angle(lo), two_pi};
  return Arc{wrap_angle(lo), len};
}

}  // namespace

Scenery::Scenery(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("Scenery: dimension must be positive");
}

Scenery Scenery::from_intervals(
    int dim, const std::vector<std::vector<std::pair<double, double>>>& boxes) {
  std::vector<Box> bs;
  bs.reserve(boxes.size());
  for (const auto& b : boxes) {
    if (static_cast<int>(b.size()) != dim)
      throw std::invalid_argument("Scenery: box has " + std::to_string(b.size()) +
                                  " intervals, expected " + std::to_string(dim));
    Box box;
    for (const auto& [lo, hi] : b) box.push_back(make_arc(lo, hi));
    bs.push_back(std::move(box));
  }
  return from_boxes(dim, std::move(bs));
}

Scenery Scenery::intervals(std::initializer_list<std::pair<double, double>> arcs) {
  std::vector<std::vector<std::pair<double, double>>> boxes;
  for (const auto& a : arcs) boxes.push_back({a});
  return from_intervals(1, boxes);
}

Scenery Scenery::from_boxes(int dim, std::vector<Box> boxes) {
  Scenery s(dim);
  for (Box& b : boxes) {
    if (static_cast<int>(b.size()) != dim) throw std::invalid_argument("Scenery: box dimension mismatch");
    for (Arc& a : b) {
      if (!(a.length > 0.0) || !std::isfinite(a.length))
        throw std::invalid_argument("Scenery: arc length must be positive");
      a.lo = wrap_angle(a.lo);
      a.length = std::min(a.length, two_pi);
    }
  }
  s.boxes_ = std::move(boxes);
  s.normalize();
  return s;
}

void Scenery::normalize() {
  fragments_.clear();
  if (boxes_.empty()) return;

  if (dim_ == 1) {
    // Merge strictly overlapping arcs; touching arcs stay separate.
    std::vector<Piece> pieces, tmp;
    bool zero_inside = false;
    for (const Box& b : boxes_) {
      if (b[0].length >= two_pi) {
        Arc full = b[0];
        boxes_ = {Box{full}};
        fragments_.push_back(FlatBox{{0.0}, {two_pi}});
        return;
      }
      arc_pieces(b[0], tmp);
      pieces.insert(pieces.end(), tmp.begin(), tmp.end());
      if (b[0].lo + b[0].length > two_pi) zero_inside = true;
    }
    std::sort(pieces.begin(), pieces.end());
    std::vector<Piece> merged;
    for (const Piece& p : pieces) {
      if (!merged.empty() && p.first < merged.back().second)
        merged.back().second = std::max(merged.back().second, p.second);
      else
        merged.push_back(p);
    }
    for (const Piece& p : merged) fragments_.push_back(FlatBox{{p.first}, {p.second}});

    std::vector<Box> arcs;
    std::size_t first = 0, last = merged.size();
    if (zero_inside && merged.size() > 1) {
      // The pieces [x, 2pi] and [0, y] belong to one arc through 0.
      const Piece& head = merged.front();
      const Piece& tail = merged.back();
      arcs.push_back(Box{Arc{tail.first, (two_pi - tail.first) + head.second}});
      first = 1;
      last = merged.size() - 1;
    }
    for (std::size_t i = first; i < last; ++i)
      arcs.push_back(Box{Arc{merged[i].first, merged[i].second - merged[i].first}});
    std::sort(arcs.begin(), arcs.end(),
              [](const Box& a, const Box& b) { return a[0].lo < b[0].lo; });
    boxes_ = std::move(arcs);
    return;
  }

  std::vector<std::vector<Piece>> pieces(static_cast<std::size_t>(dim_));
  std::vector<FlatBox> parts;
  for (const Box& b : boxes_) {
    for (int i = 0; i < dim_; ++i) arc_pieces(b[static_cast<std::size_t>(i)], pieces[static_cast<std::size_t>(i)]);
    parts.clear();
    product_boxes(pieces, parts);
    for (FlatBox& p : parts) append_disjoint(fragments_, std::move(p));
  }
}

double Scenery::measure() const { return total_volume(fragments_); }

bool Scenery::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("Scenery::contains: dimension mismatch");
  for (const Box& b : boxes_) {
    bool inside = true;
    for (std::size_t i = 0; i < b.size() && inside; ++i) {
      double u = x[i] - b[i].lo;
      u -= two_pi * std::floor(u / two_pi);
      inside = u > 0.0 && u < b[i].length;
    }
    if (inside) return true;
  }
  return false;
}

int Scenery::boundary_count() const {
  if (dim_ != 1) throw std::invalid_argument("boundary_count: one-dimensional sceneries only");
  std::vector<double> pts;
  for (const Box& b : boxes_) {
    pts.push_back(b[0].lo);
    if (b[0].length < two_pi) pts.push_back(wrap_angle(b[0].lo + b[0].length));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return static_cast<int>(pts.size());
}

Scenery Scenery::translated(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != dim_) throw std::invalid_argument("translated: dimension mismatch");
  std::vector<Box> bs = boxes_;
  for (Box& b : bs)
    for (std::size_t i = 0; i < b.size(); ++i) b[i].lo = wrap_angle(b[i].lo + theta[i]);
  return from_boxes(dim_, std::move(bs));
}

Scenery Scenery::reflected() const {
  std::vector<Box> bs = boxes_;
  for (Box& b : bs)
    for (Arc& a : b) a.lo = wrap_angle(-(a.lo + a.length));
  return from_boxes(dim_, std::move(bs));
}

std::complex<double> interval_transform(int q, double lo, double hi) {
  if (q == 0) return {hi - lo, 0.0};
  const double qd = static_cast<double>(q);
  std::complex<double> num = std::polar(1.0, -qd * lo) - std::polar(1.0, -qd * hi);
  return num / std::complex<double>(0.0, qd);
}

std::complex<double> Scenery::fourier(std::span<const int> q) const {
  if (static_cast<int>(q.size()) != dim_) throw std::invalid_argument("fourier: dimension mismatch");
  std::complex<double> total = 0.0;
  for (const FlatBox& f : fragments_) {
    std::complex<double> term = 1.0;
    for (std::size_t i = 0; i < q.size(); ++i) term *= interval_transform(q[i], f.lo[i], f.hi[i]);
    total += term;
  }
  return total;
}

std::vector<FlatBox> shift_fragments(const std::vector<FlatBox>& f, std::span<const double> offset) {
  std::vector<FlatBox> out;
  out.reserve(f.size());
  if (f.empty()) return out;
  const std::size_t d = f.front().lo.size();
  if (offset.size() != d) throw std::invalid_argument("shift_fragments: dimension mismatch");
  std::vector<std::vector<Piece>> pieces(d);
  for (const FlatBox& b : f) {
    for (std::size_t i = 0; i < d; ++i) {
      pieces[i].clear();
      double len = b.hi[i] - b.lo[i];
      if (len >= two_pi) {
        pieces[i].emplace_back(0.0, two_pi);
        continue;
      }
      double lo = wrap_angle(b.lo[i] + offset[i]);
      double hi = lo + len;
      if (hi <= two_pi) {
        pieces[i].emplace_back(lo, hi);
      } else {
        pieces[i].emplace_back(lo, two_pi);
        pieces[i].emplace_back(0.0, hi - two_pi);
      }
    }
    product_boxes(pieces, out);
  }
  return out;
}

std::vector<FlatBox> intersect_fragments(const std::vector<FlatBox>& a, const std::vector<FlatBox>& b) {
  std::vector<FlatBox> out;
  for (const FlatBox& x : a) {
    for (const FlatBox& y : b) {
      if (!overlaps(x, y)) continue;
      FlatBox r;
      r.lo.resize(x.lo.size());
      r.hi.resize(x.lo.size());
      for (std::size_t i = 0; i < x.lo.size(); ++i) {
        r.lo[i] = std::max(x.lo[i], y.lo[i]);
        r.hi[i] = std::min(x.hi[i], y.hi[i]);
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

double total_volume(const std::vector<FlatBox>& f) {
  double v = 0.0;
  for (const FlatBox& b : f) v += b.volume();
  return v;
}

double symmetric_difference(const Scenery& a, const Scenery& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("symmetric_difference: dimension mismatch");
  double common = total_volume(intersect_fragments(a.fragments(), b.fragments()));
  return std::max(0.0, a.measure() + b.measure() - 2.0 * common);
}

namespace {

std::vector<double> endpoints_1d(const Scenery& s) {
  std::vector<double> e;
  for (const Box& b : s.boxes()) {
    e.push_back(b[0].lo);
    e.push_back(wrap_angle(b[0].lo + b[0].length));
  }
  return e;
}

}  // namespace

Alignment aligned_distance(const Scenery& a, const Scenery& b, int resolution, bool allow_reflection) {
  if (a.dim() != b.dim()) throw std::invalid_argument("aligned_distance: dimension mismatch");
  if (resolution < 1) throw std::invalid_argument("aligned_distance: resolution must be positive");
  const int d = a.dim();
  if (allow_reflection && d != 1) throw std::invalid_argument("aligned_distance: reflection needs one dimension");
  double grid_size = std::pow(static_cast<double>(resolution), d);
  if (grid_size > 4.0e6) throw std::invalid_argument("aligned_distance: shift grid too large");

  const double mu_a = a.measure();
  const double mu_b = b.measure();
  Alignment best;
  best.distance = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const std::vector<FlatBox>& frags, std::span<const double> theta, bool refl) {
    double common = total_volume(intersect_fragments(shift_fragments(frags, theta), b.fragments()));
    double dist = std::max(0.0, mu_a + mu_b - 2.0 * common);
    if (dist < best.distance) {
      best.distance = dist;
      best.shift.assign(theta.begin(), theta.end());
      for (double& t : best.shift) t = wrap_angle(t);
      best.reflected = refl;
    }
  };

  auto scan = [&](const Scenery& src, bool refl) {
    const std::vector<FlatBox>& frags = src.fragments();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> theta(static_cast<std::size_t>(d), 0.0);
    const double step = two_pi / resolution;
    while (true) {
      for (int i = 0; i < d; ++i) theta[static_cast<std::size_t>(i)] = step * idx[static_cast<std::size_t>(i)];
      evaluate(frags, theta, refl);
      int i = 0;
      while (i < d && ++idx[static_cast<std::size_t>(i)] == resolution) idx[static_cast<std::size_t>(i++)] = 0;
      if (i == d) break;
    }
    if (d == 1) {
      // The overlap is piecewise linear in theta with kinks where endpoints meet.
      for (double ea : endpoints_1d(src))
        for (double eb : endpoints_1d(b)) {
          double t = wrap_angle(eb - ea);
          evaluate(frags, std::span<const double>(&t, 1), refl);
        }
    }
  };

  scan(a, false);
  if (allow_reflection) scan(a.reflected(), true);
  return best;
}

}  // namespace scenery
