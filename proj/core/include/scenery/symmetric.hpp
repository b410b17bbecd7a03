#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "scenery/torus.hpp"

namespace scenery {

// Exact S_n and sigma_n at pointers on the grid delta Z, delta = 2pi/m, for a
// one-dimensional scenery. The circle is cut at every boundary point shifted
// by multiples of delta; 1_Omega is constant on the resulting cells and grid
// shifts permute them.
class GridCorrelation {
public:
  GridCorrelation(const Scenery& s, int m);

  int grid() const { return m_; }
  // S_n(k delta) for integer steps k (any sign).
  double correlation(std::span<const int> k) const;
  // S for the point set {p delta : p in points}: (2pi)^-1 mu(cap (Omega - p delta)).
  double points_correlation(std::span<const int> points) const;
  // sigma_n(k delta) = sum over sign vectors of S_n.
  double sigma(std::span<const int> k) const;

private:
  int m_;
  int per_;  // cells per delta
  std::vector<double> length_;   // per residue cell
  std::vector<char> inside_;     // per cell
};

using SigmaOracle = std::function<double(std::span<const int>)>;

// Recovers P(k) = S_n(k delta) + S_n(-k delta) for k in N^n from sigma_n
// alone. For positive steps:
//   P(k) = sigma_n(k delta) - sum over mixed sign vectors e (one per +-pair)
//          of P(k'), k' the gaps of the sorted distinct partial sums of e k,
// whose span is strictly smaller, so the recursion terminates. Zero steps
// are dropped, P() = 2 S_0 and P(k) = sigma_1 for one step. Sign vectors
// are grouped by the partial-sum set they produce, and prefixes whose
// sigma vanishes are cut, since P only decreases when points are added.
//
// Each value carries a running bound on its rounding error: the recursion
// cancels heavily, and the bound grows with the number of subtracted terms.
class SymmetricRecovery {
public:
  struct Value {
    double value = 0.0;
    double error = 0.0;
  };

  SymmetricRecovery(SigmaOracle sigma, int m);

  int grid() const { return m_; }
  double pair_sum(std::span<const int> k) { return evaluate(k).value; }
  Value evaluate(std::span<const int> k);
  std::size_t oracle_calls() const { return oracle_calls_; }
  std::size_t memo_size() const { return memo_.size(); }

private:
  Value pair_sum_positive(const std::vector<int>& k);
  double sigma_of(const std::vector<int>& k);

  SigmaOracle sigma_;
  int m_;
  std::size_t oracle_calls_ = 0;
  std::map<std::vector<int>, Value> memo_;
  std::map<std::vector<int>, double> sigma_memo_;
};

// Table of P(k) for all k in N^n, 1 <= n <= max_order, sum k <= max_total.
std::map<std::vector<int>, double> symmetric_recover(const SigmaOracle& sigma, int m, int max_order,
                                                      int max_total);

}  // namespace scenery
