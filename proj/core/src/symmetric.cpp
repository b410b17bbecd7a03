#include "scenery/symmetric.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <cmath>
#include <stdexcept>
#include <string>

namespace scenery {

GridCorrelation::GridCorrelation(const Scenery& s, int m) : m_(m) {
  if (s.dim() != 1) throw std::invalid_argument("GridCorrelation: one-dimensional sceneries only");
  if (m < 1) throw std::invalid_argument("GridCorrelation: grid size must be positive");
  const double delta = two_pi / m;
  std::vector<double> res;
  for (const FlatBox& f : s.fragments()) {
    for (double e : {f.lo[0], f.hi[0]}) {
      double r = std::fmod(e, delta);
      if (r < 0.0) r += delta;
      if (delta - r < 1e-12 * delta) r = 0.0;
      res.push_back(r);
    }
  }
  if (res.empty()) res.push_back(0.0);
  std::sort(res.begin(), res.end());
  std::vector<double> uniq;
  for (double r : res)
    if (uniq.empty() || r - uniq.back() > 1e-12 * delta) uniq.push_back(r);
  per_ = static_cast<int>(uniq.size());
  for (int p = 0; p < per_; ++p) {
    double next = p + 1 < per_ ? uniq[static_cast<std::size_t>(p + 1)] : uniq[0] + delta;
    length_.push_back(next - uniq[static_cast<std::size_t>(p)]);
  }
  const int cells = m * per_;
  inside_.resize(static_cast<std::size_t>(cells));
  for (int c = 0; c < cells; ++c) {
    int j = c / per_, p = c % per_;
    double mid = j * delta + uniq[static_cast<std::size_t>(p)] + 0.5 * length_[static_cast<std::size_t>(p)];
    double x = wrap_angle(mid);
    inside_[static_cast<std::size_t>(c)] = s.contains(std::span<const double>(&x, 1)) ? 1 : 0;
  }
}

double GridCorrelation::points_correlation(std::span<const int> points) const {
  const int cells = m_ * per_;
  double total = 0.0;
  for (int c = 0; c < cells; ++c) {
    bool all = true;
    for (int p : points) {
      int shift = ((p % m_) + m_) % m_ * per_;
      if (!inside_[static_cast<std::size_t>((c + shift) % cells)]) {
        all = false;
        break;
      }
    }
    if (all) total += length_[static_cast<std::size_t>(c % per_)];
  }
  return total / two_pi;
}

double GridCorrelation::correlation(std::span<const int> k) const {
  std::vector<int> pts{0};
  long acc = 0;
  for (int v : k) {
    acc += v;
    pts.push_back(static_cast<int>(((acc % m_) + m_) % m_));
  }
  return points_correlation(pts);
}

double GridCorrelation::sigma(std::span<const int> k) const {
  const int cells = m_ * per_;
  // H_{j-1}(x) = f(x) (H_j(x + y_j) + H_j(x - y_j)), H_n = f.
  std::vector<double> h(static_cast<std::size_t>(cells)), next(static_cast<std::size_t>(cells));
  for (int c = 0; c < cells; ++c) h[static_cast<std::size_t>(c)] = inside_[static_cast<std::size_t>(c)];
  for (std::size_t j = k.size(); j-- > 0;) {
    int shift = ((k[j] % m_) + m_) % m_ * per_;
    for (int c = 0; c < cells; ++c) {
      if (!inside_[static_cast<std::size_t>(c)]) {
        next[static_cast<std::size_t>(c)] = 0.0;
        continue;
      }
      next[static_cast<std::size_t>(c)] = h[static_cast<std::size_t>((c + shift) % cells)] +
                                          h[static_cast<std::size_t>((c - shift + cells) % cells)];
    }
    h.swap(next);
  }
  double total = 0.0;
  for (int c = 0; c < cells; ++c) total += h[static_cast<std::size_t>(c)] * length_[static_cast<std::size_t>(c % per_)];
  return total / two_pi;
}

namespace {

constexpr int kOffset = 256;

// Bit set over positions 0..511 with cheap normalization and hashing.
struct PointSet {
  std::array<std::uint64_t, 8> w{};

  void set(int i) { w[static_cast<std::size_t>(i >> 6)] |= std::uint64_t{1} << (i & 63); }
  int lowest() const {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i]) return static_cast<int>(i * 64) + std::countr_zero(w[i]);
    return -1;
  }
  PointSet shifted_down(int k) const {
    PointSet out;
    const int words = k >> 6, bits = k & 63;
    for (std::size_t i = 0; i + static_cast<std::size_t>(words) < w.size(); ++i) {
      std::uint64_t v = w[i + static_cast<std::size_t>(words)] >> bits;
      if (bits && i + static_cast<std::size_t>(words) + 1 < w.size())
        v |= w[i + static_cast<std::size_t>(words) + 1] << (64 - bits);
      out.w[i] = v;
    }
    return out;
  }
  PointSet shifted_up(int k) const {
    PointSet out;
    const int words = k >> 6, bits = k & 63;
    for (std::size_t i = static_cast<std::size_t>(words); i < w.size(); ++i) {
      const std::size_t src = i - static_cast<std::size_t>(words);
      std::uint64_t v = w[src] << bits;
      if (bits && src > 0) v |= w[src - 1] >> (64 - bits);
      out.w[i] = v;
    }
    return out;
  }
  // Gaps between consecutive members.
  std::vector<int> gaps() const {
    std::vector<int> out;
    int prev = -1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::uint64_t v = w[i];
      while (v) {
        const int b = static_cast<int>(i * 64) + std::countr_zero(v);
        if (prev >= 0) out.push_back(b - prev);
        prev = b;
        v &= v - 1;
      }
    }
    return out;
  }
  bool operator==(const PointSet&) const = default;
};

struct StateKey {
  PointSet set;  // normalized: lowest member at 0
  int pos;       // relative to the lowest member
  bool operator==(const StateKey&) const = default;
};

struct StateHash {
  std::size_t operator()(const StateKey& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(k.pos);
    for (std::uint64_t v : k.set.w) h = (h ^ v) * 0x100000001b3ULL + (h >> 29);
    return static_cast<std::size_t>(h);
  }
};

struct SetHash {
  std::size_t operator()(const PointSet& s) const { return StateHash{}(StateKey{s, 0}); }
};

}  // namespace

SymmetricRecovery::SymmetricRecovery(SigmaOracle sigma, int m) : sigma_(std::move(sigma)), m_(m) {
  if (m < 1) throw std::invalid_argument("SymmetricRecovery: grid size must be positive");
}

double SymmetricRecovery::sigma_of(const std::vector<int>& k) {
  auto it = sigma_memo_.find(k);
  if (it != sigma_memo_.end()) return it->second;
  ++oracle_calls_;
  double v = sigma_(k);
  sigma_memo_.emplace(k, v);
  return v;
}

SymmetricRecovery::Value SymmetricRecovery::evaluate(std::span<const int> k) {
  std::vector<int> pos;
  for (int v : k) {
    if (v < 0) throw std::invalid_argument("pair_sum: steps must be non-negative");
    if (v > 0) pos.push_back(v);
  }
  return pair_sum_positive(pos);
}

SymmetricRecovery::Value SymmetricRecovery::pair_sum_positive(const std::vector<int>& k) {
  auto it = memo_.find(k);
  if (it != memo_.end()) return it->second;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double sig = sigma_of(k);
  // sigma is a sum of non-negative terms; allow for its accumulation error.
  const double sig_err = (static_cast<double>(k.size()) + 16.0) * eps * std::abs(sig);
  Value value;
  if (k.empty()) {
    value = {2.0 * sig, 2.0 * sig_err};
  } else if (k.size() == 1 || sig == 0.0) {
    // One step: sigma_1 is the pair sum. Zero sigma: every signed term vanishes.
    value = {sig, sig_err};
  } else {
    long span = 0;
    for (int v : k) span += v;
    if (span >= kOffset) throw std::invalid_argument("pair_sum: total step above " + std::to_string(kOffset - 1));

    // Distribution of (point set, position) over sign vectors with e_1 = +1,
    // excluding the all-plus path, which is tracked separately. States that
    // differ by a translation are merged.
    std::unordered_map<PointSet, bool, SetHash> alive;
    auto is_alive = [&](const PointSet& normalized) {
      auto f = alive.find(normalized);
      if (f != alive.end()) return f->second;
      const bool ok = sigma_of(normalized.gaps()) != 0.0;
      alive.emplace(normalized, ok);
      return ok;
    };
    std::unordered_map<StateKey, double, StateHash> states, next;
    PointSet plus;
    plus.set(kOffset);
    int plus_pos = kOffset + k[0];
    plus.set(plus_pos);

    for (std::size_t j = 1; j < k.size(); ++j) {
      next.clear();
      auto push = [&](const PointSet& s, int p, double c) {
        PointSet t = s;
        t.set(p);
        const int low = t.lowest();
        PointSet norm = t.shifted_down(low);
        if (!is_alive(norm)) return;
        next[StateKey{norm, p - low}] += c;
      };
      for (const auto& [key, c] : states) {
        // Lift the normalized set so steps of either sign stay in range.
        const PointSet base = key.set.shifted_up(kOffset);
        push(base, key.pos + kOffset + k[j], c);
        push(base, key.pos + kOffset - k[j], c);
      }
      push(plus, plus_pos - k[j], 1.0);
      plus_pos += k[j];
      plus.set(plus_pos);
      states.swap(next);
    }

    std::unordered_map<PointSet, double, SetHash> finals;
    for (const auto& [key, c] : states) finals[key.set] += c;
    double mixed = 0.0, mixed_abs = 0.0, err = sig_err;
    for (const auto& [s, c] : finals) {
      Value v = pair_sum_positive(s.gaps());
      mixed += c * v.value;
      mixed_abs += c * std::abs(v.value);
      err += c * v.error;
    }
    value.value = sig - mixed;
    value.error = err + eps * (static_cast<double>(finals.size()) + 2.0) * (std::abs(sig) + mixed_abs);
  }
  memo_.emplace(k, value);
  return value;
}

std::map<std::vector<int>, double> symmetric_recover(const SigmaOracle& sigma, int m, int max_order, int max_total) {
  if (max_order < 1 || max_total < 0) throw std::invalid_argument("symmetric_recover: bad bounds");
  SymmetricRecovery rec(sigma, m);
  std::map<std::vector<int>, double> out;
  std::vector<int> k;
  auto walk = [&](auto&& self, int remaining) -> void {
    if (!k.empty()) out[k] = rec.pair_sum(k);
    if (static_cast<int>(k.size()) == max_order) return;
    for (int v = 0; v <= remaining; ++v) {
      k.push_back(v);
      self(self, remaining - v);
      k.pop_back();
    }
  };
  walk(walk, max_total);
  return out;
}

}  // namespace scenery
