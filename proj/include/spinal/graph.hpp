#pragma once

// Finite Schreier graphs on tree levels and finite balls in orbital
// Schreier graphs of boundary points. Edges are stored as a target table
// (vertex x generator), so loops and multi-edges are kept as they are.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinal/action.hpp"
#include "spinal/algebra.hpp"
#include "spinal/oracle.hpp"

namespace spinal {

inline constexpr std::uint64_t default_vertex_budget = std::uint64_t{1} << 22;

struct LabeledEdge {
  std::uint64_t src;
  std::uint64_t dst;
  std::size_t generator;  // index into the graph's generator list
};

/// Schreier graph of level n. Vertex index is the base-d value of the word
/// with v_0 most significant.
class SchreierLevelGraph {
public:
  SchreierLevelGraph(SpinalParams params, int n, std::uint64_t vertex_budget = default_vertex_budget)
      : params_(std::move(params)), n_(n) {
    params_.validate();
    if (n < 0) throw std::invalid_argument("level must be >= 0");
    const int d = params_.d;
    vertices_ = detail::checked_pow(static_cast<std::uint64_t>(d), n, vertex_budget);
    gens_ = spinal_generators(d, params_.m);
    targets_.resize(vertices_ * gens_.size());
    for (std::uint64_t v = 0; v < vertices_; ++v) {
      const TreeWord w = index_word(v, d, n);
      for (std::size_t s = 0; s < gens_.size(); ++s)
        targets_[v * gens_.size() + s] = word_index(act(gens_[s], w, params_.omega), d);
    }
  }

  const SpinalParams& params() const { return params_; }
  int level() const { return n_; }
  std::uint64_t vertex_count() const { return vertices_; }
  std::size_t degree() const { return gens_.size(); }
  const std::vector<Generator>& generators() const { return gens_; }

  std::uint64_t target(std::uint64_t v, std::size_t s) const { return targets_[v * gens_.size() + s]; }

  std::vector<LabeledEdge> edges() const {
    std::vector<LabeledEdge> out;
    out.reserve(targets_.size());
    for (std::uint64_t v = 0; v < vertices_; ++v)
      for (std::size_t s = 0; s < gens_.size(); ++s) out.push_back({v, target(v, s), s});
    return out;
  }

  /// (M f)(v) = (1/|S|) sum_s f(s v)
  std::vector<double> markov_matvec(std::span<const double> f) const {
    if (f.size() != vertices_) throw std::invalid_argument("vector length differs from vertex count");
    std::vector<double> out(vertices_, 0.0);
    const double w = 1.0 / static_cast<double>(gens_.size());
    for (std::uint64_t v = 0; v < vertices_; ++v) {
      double acc = 0.0;
      for (std::size_t s = 0; s < gens_.size(); ++s) acc += f[target(v, s)];
      out[v] = w * acc;
    }
    return out;
  }

private:
  SpinalParams params_;
  int n_;
  std::uint64_t vertices_ = 0;
  std::vector<Generator> gens_;
  std::vector<std::uint64_t> targets_;
};

inline SchreierLevelGraph build_level_graph(const SpinalParams& params, int n,
                                            std::uint64_t vertex_budget = default_vertex_budget) {
  return SchreierLevelGraph(params, n, vertex_budget);
}

namespace detail {

template <class Keep>
DenseMatrix level_adjacency(const SchreierLevelGraph& g, std::size_t budget, Keep keep) {
  if (g.vertex_count() > budget)
    throw budget_error("level graph has " + std::to_string(g.vertex_count()) + " vertices, dense budget is " +
                       std::to_string(budget));
  DenseMatrix a(static_cast<std::size_t>(g.vertex_count()));
  for (std::uint64_t v = 0; v < g.vertex_count(); ++v)
    for (std::size_t s = 0; s < g.degree(); ++s)
      if (keep(g.generators()[s])) a(v, g.target(v, s)) += 1.0;
  return a;
}

}  // namespace detail

/// Edge-multiplicity matrix; divide by |S| for the Markov matrix.
inline DenseMatrix adjacency_dense(const SchreierLevelGraph& g, std::size_t budget = default_dense_budget) {
  return detail::level_adjacency(g, budget, [](const Generator&) { return true; });
}

/// Sum of the rotor permutation matrices (A_n).
inline DenseMatrix rotor_adjacency(const SchreierLevelGraph& g, std::size_t budget = default_dense_budget) {
  return detail::level_adjacency(g, budget, [](const Generator& s) { return is_rotor(s); });
}

/// Sum of the spine permutation matrices (B_n).
inline DenseMatrix spine_adjacency(const SchreierLevelGraph& g, std::size_t budget = default_dense_budget) {
  return detail::level_adjacency(g, budget, [](const Generator& s) { return !is_rotor(s); });
}

inline DenseSymmetricMatrix markov_dense(const SchreierLevelGraph& g, std::size_t budget = default_dense_budget) {
  DenseMatrix a = adjacency_dense(g, budget);
  a *= 1.0 / static_cast<double>(g.degree());
  return DenseSymmetricMatrix(std::move(a));
}

/// Breadth-first ball in the orbital Schreier graph of a boundary point.
/// Targets that fall outside the ball are stored as nullopt.
class BoundaryBall {
public:
  const SpinalParams& params() const { return params_; }
  const BoundaryPoint& center() const { return vertices_.front(); }
  int radius() const { return radius_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t degree() const { return gens_.size(); }
  const std::vector<Generator>& generators() const { return gens_; }
  const std::vector<BoundaryPoint>& vertices() const { return vertices_; }
  const BoundaryPoint& vertex(std::size_t i) const { return vertices_[i]; }
  int distance(std::size_t i) const { return dist_[i]; }

  std::optional<std::size_t> index_of(const BoundaryPoint& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> target(std::size_t v, std::size_t s) const {
    const long long t = targets_[v * gens_.size() + s];
    if (t < 0) return std::nullopt;
    return static_cast<std::size_t>(t);
  }

  /// Every generator keeps the vertex inside the ball.
  bool is_complete(std::size_t v) const {
    for (std::size_t s = 0; s < gens_.size(); ++s)
      if (targets_[v * gens_.size() + s] < 0) return false;
    return true;
  }

  /// Edges with both ends in the ball, as (src, dst, generator).
  std::vector<LabeledEdge> edges() const {
    std::vector<LabeledEdge> out;
    for (std::size_t v = 0; v < vertices_.size(); ++v)
      for (std::size_t s = 0; s < gens_.size(); ++s)
        if (auto t = target(v, s)) out.push_back({v, *t, s});
    return out;
  }

  /// Markov operator with values outside the ball taken as zero.
  std::vector<double> markov_matvec(std::span<const double> f) const {
    if (f.size() != vertices_.size()) throw std::invalid_argument("vector length differs from ball size");
    std::vector<double> out(f.size(), 0.0);
    const double w = 1.0 / static_cast<double>(gens_.size());
    for (std::size_t v = 0; v < f.size(); ++v) {
      double acc = 0.0;
      for (std::size_t s = 0; s < gens_.size(); ++s)
        if (auto t = target(v, s)) acc += f[*t];
      out[v] = w * acc;
    }
    return out;
  }

private:
  friend BoundaryBall build_ball(const SpinalParams&, const std::vector<BoundaryPoint>&, int, std::size_t);

  SpinalParams params_;
  int radius_ = 0;
  std::vector<Generator> gens_;
  std::vector<BoundaryPoint> vertices_;
  std::vector<int> dist_;
  std::vector<long long> targets_;
  std::map<BoundaryPoint, std::size_t> index_;
};

/// All points within `radius` steps of the seed set; the first seed is the
/// center. Seeds are at distance 0.
inline BoundaryBall build_ball(const SpinalParams& params, const std::vector<BoundaryPoint>& seeds, int radius,
                               std::size_t vertex_budget = 1u << 20) {
  params.validate();
  if (radius < 0) throw std::invalid_argument("radius must be >= 0");
  if (seeds.empty()) throw std::invalid_argument("ball needs at least one seed");
  BoundaryBall ball;
  ball.params_ = params;
  ball.radius_ = radius;
  ball.gens_ = spinal_generators(params.d, params.m);

  auto add = [&](const BoundaryPoint& p, int dist) {
    if (p.arity() != params.d) throw std::invalid_argument("boundary point arity differs from d");
    auto [it, fresh] = ball.index_.emplace(p, ball.vertices_.size());
    if (fresh) {
      if (ball.vertices_.size() >= vertex_budget) throw budget_error("boundary ball exceeds vertex budget");
      ball.vertices_.push_back(p);
      ball.dist_.push_back(dist);
    }
    return it->second;
  };
  for (const auto& s : seeds) add(s, 0);

  // BFS; images are computed for every vertex, but only vertices at
  // distance < radius may introduce new ones.
  std::vector<std::vector<BoundaryPoint>> images;
  for (std::size_t v = 0; v < ball.vertices_.size(); ++v) {
    std::vector<BoundaryPoint> row;
    row.reserve(ball.gens_.size());
    for (const auto& g : ball.gens_) row.push_back(act_boundary(g, ball.vertices_[v], params.omega));
    if (ball.dist_[v] < radius)
      for (const auto& p : row) add(p, ball.dist_[v] + 1);
    images.push_back(std::move(row));
  }
  ball.targets_.assign(ball.vertices_.size() * ball.gens_.size(), -1);
  for (std::size_t v = 0; v < ball.vertices_.size(); ++v)
    for (std::size_t s = 0; s < ball.gens_.size(); ++s)
      if (auto t = ball.index_of(images[v][s])) ball.targets_[v * ball.gens_.size() + s] = static_cast<long long>(*t);
  return ball;
}

inline BoundaryBall build_boundary_ball(const SpinalParams& params, const BoundaryPoint& xi, int radius,
                                        std::size_t vertex_budget = 1u << 20) {
  return build_ball(params, {xi}, radius, vertex_budget);
}

/// The copy X^n sigma^n(xi), listed in level-n index order.
inline std::vector<BoundaryPoint> level_copy(const BoundaryPoint& xi, int n) {
  const int d = xi.arity();
  const BoundaryPoint tail = xi.shift(static_cast<std::size_t>(n));
  const std::uint64_t count = detail::checked_pow(static_cast<std::uint64_t>(d), n, std::uint64_t{1} << 24);
  std::vector<BoundaryPoint> out;
  out.reserve(count);
  for (std::uint64_t v = 0; v < count; ++v) out.push_back(tail.prepend(index_word(v, d, n)));
  return out;
}

/// Ball containing the copy X^n sigma^n(xi) plus `margin` more steps; its
/// center is xi itself.
inline BoundaryBall build_copy_ball(const SpinalParams& params, const BoundaryPoint& xi, int n, int margin = 1) {
  std::vector<BoundaryPoint> seeds{xi};
  for (auto& p : level_copy(xi, n))
    if (!(p == xi)) seeds.push_back(std::move(p));
  return build_ball(params, seeds, margin);
}

}  // namespace spinal
