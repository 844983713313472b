// Hypergraphs on [M], degrees, fractional partitions and the vertices of the
// fractional-partition polytope.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace fracineq {

using Rational = boost::rational<std::int64_t>;

/// A hyperedge: sorted list of 1-based vertex indices.
using Edge = std::vector<int>;

/// Labeled multiset of hyperedges over the ground set {1..M}. An edge's
/// label is its position, so repeated edges stay distinguishable.
class Hypergraph {
 public:
  Hypergraph(int ground_size, std::vector<Edge> edges) : ground_size_(ground_size), edges_(std::move(edges)) {
    if (ground_size_ < 1) throw std::invalid_argument("hypergraph ground size must be positive");
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      auto& e = edges_[k];
      if (e.empty()) throw std::invalid_argument("edge " + std::to_string(k) + " is empty");
      std::sort(e.begin(), e.end());
      if (std::adjacent_find(e.begin(), e.end()) != e.end())
        throw std::invalid_argument("edge " + std::to_string(k) + " repeats a vertex");
      if (e.front() < 1 || e.back() > ground_size_)
        throw std::invalid_argument("edge " + std::to_string(k) + " has a vertex outside [1," +
                                    std::to_string(ground_size_) + "]");
    }
  }

  int ground_size() const noexcept { return ground_size_; }
  const std::vector<Edge>& edges() const& noexcept { return edges_; }
  std::vector<Edge> edges() && noexcept { return std::move(edges_); }
  std::size_t size() const noexcept { return edges_.size(); }
  const Edge& operator[](std::size_t k) const { return edges_.at(k); }

  bool contains(std::size_t edge, int vertex) const {
    const auto& e = edges_.at(edge);
    return std::binary_search(e.begin(), e.end(), vertex);
  }

  static Hypergraph singletons(int m) {
    std::vector<Edge> edges;
    for (int i = 1; i <= m; ++i) edges.push_back({i});
    return {m, std::move(edges)};
  }

  /// All k-subsets of [m] in lexicographic order.
  static Hypergraph k_subsets(int m, int k) {
    if (k < 1 || k > m) throw std::invalid_argument("k_subsets needs 1 <= k <= m");
    std::vector<Edge> edges;
    Edge cur;
    auto rec = [&](auto&& self, int start) -> void {
      if (static_cast<int>(cur.size()) == k) {
        edges.push_back(cur);
        return;
      }
      for (int i = start; i <= m; ++i) {
        cur.push_back(i);
        self(self, i + 1);
        cur.pop_back();
      }
    };
    rec(rec, 1);
    return {m, std::move(edges)};
  }

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  int ground_size_;
  std::vector<Edge> edges_;
};

/// Number of edges containing vertex i, multiplicity counted.
inline int degree(const Hypergraph& h, int i) {
  if (i < 1 || i > h.ground_size())
    throw std::out_of_range("vertex " + std::to_string(i) + " outside [1," + std::to_string(h.ground_size()) + "]");
  int d = 0;
  for (std::size_t k = 0; k < h.size(); ++k) d += h.contains(k, i) ? 1 : 0;
  return d;
}

/// Common degree d if the hypergraph is d-regular.
inline std::optional<int> regular_degree(const Hypergraph& h) {
  const int d = degree(h, 1);
  for (int i = 2; i <= h.ground_size(); ++i)
    if (degree(h, i) != d) return std::nullopt;
  return d;
}

/// All (M-1)-subsets of [M]; edge k omits vertex k+1.
inline Hypergraph leave_one_out(int m) {
  if (m < 2) throw std::invalid_argument("leave_one_out needs M >= 2");
  std::vector<Edge> edges;
  for (int skip = 1; skip <= m; ++skip) {
    Edge e;
    for (int i = 1; i <= m; ++i)
      if (i != skip) e.push_back(i);
    edges.push_back(std::move(e));
  }
  return {m, std::move(edges)};
}

/// Nonnegative edge weights with sum 1 over the edges through each vertex.
class FractionalPartition {
 public:
  static constexpr double kTolerance = 1e-12;

  FractionalPartition(Hypergraph h, std::vector<double> weights) : h_(std::move(h)), w_(std::move(weights)) {
    validate();
  }

  FractionalPartition(Hypergraph h, std::vector<Rational> exact) : h_(std::move(h)), exact_(std::move(exact)) {
    w_.reserve(exact_->size());
    for (const auto& q : *exact_) w_.push_back(boost::rational_cast<double>(q));
    validate();
    for (int i = 1; i <= h_.ground_size(); ++i) {
      Rational s = 0;
      for (std::size_t k = 0; k < h_.size(); ++k)
        if (h_.contains(k, i)) s += (*exact_)[k];
      if (s != Rational(1)) throw std::invalid_argument("exact weights do not sum to 1 at vertex " + std::to_string(i));
    }
  }

  const Hypergraph& hypergraph() const noexcept { return h_; }
  const std::vector<double>& weights() const noexcept { return w_; }
  double operator[](std::size_t k) const { return w_.at(k); }
  /// Exact weights, present for partitions built in rational arithmetic.
  const std::optional<std::vector<Rational>>& exact_weights() const noexcept { return exact_; }

  /// max_i |sum_{s ∋ i} w_s - 1|
  double max_vertex_residual() const {
    double worst = 0.0;
    for (int i = 1; i <= h_.ground_size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < h_.size(); ++k)
        if (h_.contains(k, i)) s += w_[k];
      worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
  }

 private:
  void validate() const {
    if (w_.size() != h_.size()) throw std::invalid_argument("partition needs one weight per edge");
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (!(w_[k] >= -kTolerance) || !std::isfinite(w_[k]))
        throw std::invalid_argument("partition weight " + std::to_string(k) + " is negative");
    if (max_vertex_residual() > kTolerance)
      throw std::invalid_argument("weights do not form a fractional partition (vertex sums differ from 1)");
  }

  Hypergraph h_;
  std::vector<double> w_;
  std::optional<std::vector<Rational>> exact_;
};

/// Weight 1/d on every edge of a d-regular hypergraph.
inline FractionalPartition degree_partition(const Hypergraph& h) {
  const auto d = regular_degree(h);
  if (!d || *d == 0) throw std::invalid_argument("degree partition needs a regular hypergraph with d >= 1");
  return {h, std::vector<Rational>(h.size(), Rational(1, *d))};
}

/// a_[M] - sum_s w_s a_s; zero for every fractional partition.
inline double fractional_additivity_residual(const FractionalPartition& fp, std::span<const double> a) {
  const auto& h = fp.hypergraph();
  if (a.size() != static_cast<std::size_t>(h.ground_size()))
    throw std::invalid_argument("additivity check needs one value per vertex");
  double total = 0.0;
  for (double x : a) total += x;
  double weighted = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    double as = 0.0;
    for (int i : h[k]) as += a[i - 1];
    weighted += fp[k] * as;
  }
  return total - weighted;
}

namespace detail {

// Mixed rational/integer comparisons recurse under C++20 rewritten
// operators in Boost 1.74, so compare against rational constants.
inline const Rational kZero{0};

/// Solves A_B x = 1 exactly for the columns in `cols`. Returns nullopt when
/// the columns are dependent or the system is inconsistent.
inline std::optional<std::vector<Rational>> solve_basis(const std::vector<std::vector<Rational>>& a,
                                                        const std::vector<std::size_t>& cols) {
  const std::size_t rows = a.size();
  const std::size_t k = cols.size();
  std::vector<std::vector<Rational>> m(rows, std::vector<Rational>(k + 1));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < k; ++j) m[i][j] = a[i][cols[j]];
    m[i][k] = 1;
  }
  std::size_t pivot_row = 0;
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t sel = pivot_row;
    while (sel < rows && m[sel][j] == kZero) ++sel;
    if (sel == rows) return std::nullopt;
    std::swap(m[sel], m[pivot_row]);
    const Rational inv = 1 / m[pivot_row][j];
    for (auto& v : m[pivot_row]) v *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == pivot_row || m[i][j] == kZero) continue;
      const Rational f = m[i][j];
      for (std::size_t c = j; c <= k; ++c) m[i][c] -= f * m[pivot_row][c];
    }
    ++pivot_row;
  }
  for (std::size_t i = pivot_row; i < rows; ++i)
    if (m[i][k] != kZero) return std::nullopt;
  std::vector<Rational> x(k);
  for (std::size_t j = 0; j < k; ++j) x[j] = m[j][k];
  return x;
}

inline std::size_t rational_rank(std::vector<std::vector<Rational>> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size(), cols = m.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = r;
    while (sel < rows && m[sel][c] == kZero) ++sel;
    if (sel == rows) continue;
    std::swap(m[sel], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == kZero) continue;
      const Rational f = m[i][c] / m[r][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    ++r;
  }
  return r;
}

}  // namespace detail

inline constexpr int kMaxEnumerationVertices = 6;
inline constexpr std::size_t kMaxEnumerationEdges = 20;

/// All vertices of {w >= 0 : sum_{s ∋ i} w_s = 1 for all i}, as exact
/// rational partitions, in decreasing lexicographic order of weights.
/// Each vertex is the unique solution of a full-rank column subset of the
/// incidence system; infeasible or negative solutions are discarded.
inline std::vector<FractionalPartition> enumerate_extreme_partitions(const Hypergraph& h) {
  const int m = h.ground_size();
  const std::size_t e = h.size();
  if (m > kMaxEnumerationVertices || e > kMaxEnumerationEdges)
    throw std::invalid_argument("extreme-partition enumeration is limited to M <= 6 and at most 20 edges");

  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(e));
  for (std::size_t k = 0; k < e; ++k)
    for (int i : h[k]) a[i - 1][k] = 1;
  const std::size_t rank = detail::rational_rank(a);

  std::set<std::vector<Rational>> found;
  std::vector<std::size_t> cols;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cols.size() == rank) {
      auto x = detail::solve_basis(a, cols);
      if (!x) return;
      std::vector<Rational> full(e, Rational(0));
      for (std::size_t j = 0; j < rank; ++j) {
        if ((*x)[j] < detail::kZero) return;
        full[cols[j]] = (*x)[j];
      }
      found.insert(std::move(full));
      return;
    }
    for (std::size_t c = start; c + (rank - cols.size()) <= e; ++c) {
      cols.push_back(c);
      self(self, c + 1);
      cols.pop_back();
    }
  };
  rec(rec, 0);

  std::vector<FractionalPartition> out;
  out.reserve(found.size());
  for (auto it = found.rbegin(); it != found.rend(); ++it) out.emplace_back(h, *it);
  return out;
}

}  // namespace fracineq
