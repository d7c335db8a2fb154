#pragma once

// Finitely supported eigenfunctions for d >= 3: antisymmetric bases at the
// birth level, transfer to higher levels, planting on copies inside
// orbital Schreier graphs, and a captured-mass completeness report.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spinal/action.hpp"
#include "spinal/algebra.hpp"
#include "spinal/closed_form.hpp"
#include "spinal/graph.hpp"
#include "spinal/oracle.hpp"

namespace spinal {

/// Sparse real vector; entries sorted by index, no explicit zeros.
struct SparseFunction {
  std::vector<std::pair<std::uint64_t, double>> entries;

  std::size_t support_size() const { return entries.size(); }

  double at(std::uint64_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint64_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0.0;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [i, x] : entries) s += x * x;
    return std::sqrt(s);
  }

  void scale(double c) {
    for (auto& e : entries) e.second *= c;
  }

  std::vector<double> dense(std::size_t size) const {
    std::vector<double> out(size, 0.0);
    for (const auto& [i, x] : entries) {
      if (i >= size) throw std::out_of_range("sparse index beyond dense size");
      out[i] = x;
    }
    return out;
  }

  static SparseFunction from_dense(const std::vector<double>& v) {
    SparseFunction f;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0.0) f.entries.emplace_back(i, v[i]);
    return f;
  }
};

enum class EigenClass { A, B, C, D };

inline std::string class_name(EigenClass c) {
  static const char* names[] = {"A", "B", "C", "D"};
  return names[static_cast<int>(c)];
}

/// Basis of the lambda-eigenspace of M_n split into the four classes.
struct LevelEigenbasis {
  SpinalParams params;
  EigenTag tag;
  double lambda = 0.0;
  int birth_level = 0;
  int level = 0;
  std::array<std::vector<SparseFunction>, 4> classes;

  const std::vector<SparseFunction>& of(EigenClass c) const { return classes[static_cast<int>(c)]; }
  std::vector<SparseFunction>& of(EigenClass c) { return classes[static_cast<int>(c)]; }

  std::size_t count() const {
    std::size_t t = 0;
    for (const auto& c : classes) t += c.size();
    return t;
  }
};

/// Value of a tagged eigenvalue, resolving preimage-tree nodes by sign string.
inline double tag_eigenvalue(const EigenTag& tag, int d, int m) {
  if (tag.kind != EigenTag::Kind::Node) return tagged_value(tag, d, m);
  if (tag.depth < 0 || static_cast<int>(tag.signs.size()) != tag.depth)
    throw std::invalid_argument("node tag needs one sign per depth level");
  const auto tree = preimage_tree(d, tag.depth);
  for (const auto& node : tree[static_cast<std::size_t>(tag.depth)])
    if (node.signs == tag.signs) return tagged_value(tag, d, m, node.value);
  throw std::invalid_argument("no preimage node with signs '" + tag.signs + "'");
}

/// Tags of the eigenvalues born at level N (excluding the top eigenvalue).
inline std::vector<EigenTag> birth_tags(int d, int m, int N) {
  std::vector<EigenTag> out;
  if (N < 1) return out;
  for (const auto& e : level_spectrum(d, m, N).entries)
    if (e.tag.kind != EigenTag::Kind::Top && e.tag.birth_level() == N) out.push_back(e.tag);
  return out;
}

/// (M f)(v) = (1/|S|) sum_s f(s v), computed by scattering f(u) to every
/// neighbour of u; `target(u, s)` returns the neighbour index.
template <class Target>
double scatter_residual(const SparseFunction& f, double lambda, std::size_t degree, Target target) {
  std::unordered_map<std::uint64_t, double> mf;
  const double w = 1.0 / static_cast<double>(degree);
  for (const auto& [u, x] : f.entries)
    for (std::size_t s = 0; s < degree; ++s) mf[target(u, s)] += w * x;
  for (const auto& [u, x] : f.entries) mf[u] -= lambda * x;
  double r = 0.0;
  for (const auto& [u, x] : mf) r += x * x;
  return std::sqrt(r);
}

/// ||M_n f - lambda f|| on level n, with neighbours computed from the action.
inline double level_residual(const SpinalParams& params, int n, const SparseFunction& f, double lambda) {
  const auto gens = spinal_generators(params.d, params.m);
  return scatter_residual(f, lambda, gens.size(), [&](std::uint64_t u, std::size_t s) {
    return word_index(act(gens[s], index_word(u, params.d, n), params.omega), params.d);
  });
}

/// ||M_xi f - lambda f|| for f supported in the ball; throws if an edge of
/// the support leaves the ball.
inline double ball_residual(const BoundaryBall& ball, const SparseFunction& f, double lambda) {
  return scatter_residual(f, lambda, ball.degree(), [&](std::uint64_t u, std::size_t s) -> std::uint64_t {
    const auto t = ball.target(static_cast<std::size_t>(u), s);
    if (!t) throw std::invalid_argument("function support touches the ball boundary");
    return *t;
  });
}

namespace detail {

inline void require_spinal_d3(const SpinalParams& params) {
  params.validate();
  if (params.d < 3) throw std::invalid_argument("finitely supported eigenfunctions need d >= 3");
}

inline constexpr double residual_tol = 1e-10;

}  // namespace detail

/// Basis at the birth level N from a precomputed eigensystem of M_N.
/// A generic eigenspace member f (seeded Gaussian combination) gives
/// f_i = f - f o Phi^i, where Phi^i swaps last letters i and i+1; each f_i is
/// normalized. Classes: A = {f_{d-2}}, B = {f_0}, C = the rest, D empty.
inline LevelEigenbasis base_eigenbasis(const SpinalParams& params, const EigenTag& tag, const Eigensystem& level_system,
                                       std::uint64_t seed = 0) {
  detail::require_spinal_d3(params);
  if (tag.kind == EigenTag::Kind::Top) throw std::invalid_argument("the top eigenvalue has no antisymmetric basis");
  const int d = params.d;
  const int N = tag.birth_level();
  const std::uint64_t size = detail::checked_pow(static_cast<std::uint64_t>(d), N, default_dense_budget);
  if (level_system.values.size() != size || level_system.vectors.size() != size)
    throw std::invalid_argument("eigensystem does not belong to the birth level");
  const double lambda = tag_eigenvalue(tag, d, params.m);

  std::vector<const std::vector<double>*> space;
  for (std::size_t j = 0; j < size; ++j)
    if (std::abs(level_system.values[j] - lambda) <= 1e-8) space.push_back(&level_system.vectors[j]);
  if (space.size() != static_cast<std::size_t>(d - 1))
    throw std::invalid_argument("eigenvalue " + tag.to_string() + " has multiplicity " + std::to_string(space.size()) +
                                " at level " + std::to_string(N) + ", expected " + std::to_string(d - 1));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> f(size, 0.0);
  for (const auto* v : space) {
    const double c = gauss(rng);
    for (std::size_t k = 0; k < size; ++k) f[k] += c * (*v)[k];
  }

  LevelEigenbasis basis{params, tag, lambda, N, N, {}};
  const auto ud = static_cast<std::uint64_t>(d);
  for (int i = 0; i + 1 < d; ++i) {
    SparseFunction fi;
    for (std::uint64_t u = 0; u < size / ud; ++u)
      for (int j : {i, i + 1}) {
        const std::uint64_t w = u * ud + static_cast<std::uint64_t>(j);
        const std::uint64_t swapped = u * ud + static_cast<std::uint64_t>(j == i ? i + 1 : i);
        const double x = f[w] - f[swapped];
        if (x != 0.0) fi.entries.emplace_back(w, x);
      }
    std::sort(fi.entries.begin(), fi.entries.end());
    const double nrm = fi.norm();
    if (nrm == 0.0) throw std::runtime_error("antisymmetric projection vanished; eigenspace is degenerate");
    fi.scale(1.0 / nrm);
    if (level_residual(params, N, fi, lambda) > detail::residual_tol)
      throw std::runtime_error("eigenspace of " + tag.to_string() + " is numerically defective");
    const EigenClass c = i == d - 2 ? EigenClass::A : i == 0 ? EigenClass::B : EigenClass::C;
    basis.of(c).push_back(std::move(fi));
  }
  return basis;
}

inline LevelEigenbasis base_eigenbasis(const SpinalParams& params, const EigenTag& tag, std::uint64_t seed = 0) {
  detail::require_spinal_d3(params);
  const auto g = build_level_graph(params, tag.birth_level(), default_dense_budget);
  return base_eigenbasis(params, tag, symmetric_eigensystem(markov_dense(g)), seed);
}

/// rho^i: plant a level-n function on the copy with last letter i.
inline SparseFunction rho(const SparseFunction& f, int d, int i) {
  SparseFunction out;
  out.entries.reserve(f.entries.size());
  for (const auto& [u, x] : f.entries)
    out.entries.emplace_back(u * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(i), x);
  return out;
}

/// rho = sum_i rho^i.
inline SparseFunction rho_sum(const SparseFunction& f, int d) {
  SparseFunction out;
  out.entries.reserve(f.entries.size() * static_cast<std::size_t>(d));
  for (const auto& [u, x] : f.entries)
    for (int i = 0; i < d; ++i)
      out.entries.emplace_back(u * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(i), x);
  return out;
}

/// Level n -> n + 1:
/// A' = rho^{d-1} A, B' = rho^0 A, C' = rho^i A (0 < i < d-1) and rho B,
/// D' = rho^i (C and D) for every i.
inline LevelEigenbasis propagate_eigenbasis(const LevelEigenbasis& basis) {
  const int d = basis.params.d;
  LevelEigenbasis next{basis.params, basis.tag, basis.lambda, basis.birth_level, basis.level + 1, {}};
  const auto& A = basis.of(EigenClass::A);
  const auto& B = basis.of(EigenClass::B);
  for (const auto& f : A) next.of(EigenClass::A).push_back(rho(f, d, d - 1));
  for (const auto& f : A) next.of(EigenClass::B).push_back(rho(f, d, 0));
  for (int i = 1; i + 1 < d; ++i)
    for (const auto& f : A) next.of(EigenClass::C).push_back(rho(f, d, i));
  for (const auto& f : B) {
    auto g = rho_sum(f, d);
    g.scale(1.0 / std::sqrt(static_cast<double>(d)));
    next.of(EigenClass::C).push_back(std::move(g));
  }
  for (int i = 0; i < d; ++i)
    for (EigenClass c : {EigenClass::C, EigenClass::D})
      for (const auto& f : basis.of(c)) next.of(EigenClass::D).push_back(rho(f, d, i));
  return next;
}

inline LevelEigenbasis propagate_to(LevelEigenbasis basis, int n) {
  if (n < basis.level) throw std::invalid_argument("cannot propagate to a lower level");
  while (basis.level < n) basis = propagate_eigenbasis(basis);
  return basis;
}

struct PlantedFunction {
  EigenClass cls;
  SparseFunction f;  // indexed by ball vertex
};

/// Plants the class C and D members (and class A when n is in I_xi) on the
/// copy X^n sigma^n(xi): f~(v sigma^n xi) = f(v).
inline std::vector<PlantedFunction> extend_to_ball(const LevelEigenbasis& basis, const BoundaryPoint& xi,
                                                   const BoundaryBall& ball) {
  const int d = basis.params.d;
  const int n = basis.level;
  if (xi.arity() != d) throw std::invalid_argument("boundary point arity differs from d");
  const BoundaryPoint tail = xi.shift(static_cast<std::size_t>(n));
  std::unordered_map<std::uint64_t, std::uint64_t> where;
  auto locate = [&](std::uint64_t u) {
    auto it = where.find(u);
    if (it != where.end()) return it->second;
    const auto v = ball.index_of(tail.prepend(index_word(u, d, n)));
    if (!v || !ball.is_complete(*v)) throw std::invalid_argument("ball too small for the planted support");
    return where[u] = *v;
  };
  std::vector<EigenClass> kinds{EigenClass::C, EigenClass::D};
  if (i_xi_contains(xi, static_cast<std::size_t>(n))) kinds.push_back(EigenClass::A);
  std::vector<PlantedFunction> out;
  for (EigenClass c : kinds)
    for (const auto& f : basis.of(c)) {
      PlantedFunction p{c, {}};
      for (const auto& [u, x] : f.entries) p.f.entries.emplace_back(locate(u), x);
      std::sort(p.f.entries.begin(), p.f.entries.end());
      out.push_back(std::move(p));
    }
  return out;
}

/// Lemma-type generators e_{vi} - e_{v(i+1)}, v in X^{n-1}, i = 1..d-2.
inline std::vector<SparseFunction> antisymmetric_generators(int d, int n) {
  if (d < 3 || n < 1) throw std::invalid_argument("need d >= 3 and n >= 1");
  const auto ud = static_cast<std::uint64_t>(d);
  const std::uint64_t prefixes = detail::checked_pow(ud, n - 1, std::uint64_t{1} << 24);
  std::vector<SparseFunction> out;
  for (std::uint64_t v = 0; v < prefixes; ++v)
    for (int i = 1; i + 1 < d; ++i) {
      SparseFunction f;
      f.entries = {{v * ud + static_cast<std::uint64_t>(i), 1.0}, {v * ud + static_cast<std::uint64_t>(i + 1), -1.0}};
      out.push_back(std::move(f));
    }
  return out;
}

struct CompletenessReport {
  int level = 0;
  std::size_t ball_size = 0;
  std::size_t function_count = 0;
  std::size_t eigenvalue_count = 0;
  double center_mass = 0.0;         // captured mass of the delta at xi
  std::vector<double> test_masses;  // random unit vectors near xi
};

/// Plants every eigenfunction of level `level` (birth levels 1..level) on the
/// copy of xi, orthonormalizes per eigenvalue and reports the captured
/// l2-mass of delta_xi and of seeded random unit vectors supported on xi and
/// its neighbours.
inline CompletenessReport completeness_check(const SpinalParams& params, const BoundaryPoint& xi, int level,
                                             int random_vectors = 4, std::uint64_t seed = 0) {
  detail::require_spinal_d3(params);
  if (level < 1) throw std::invalid_argument("level must be >= 1");
  const auto ball = build_copy_ball(params, xi, level);
  const std::size_t V = ball.vertex_count();

  std::vector<std::vector<double>> tests;
  {
    std::vector<double> delta(V, 0.0);
    delta[0] = 1.0;
    tests.push_back(std::move(delta));
    std::vector<std::size_t> near{0};
    for (std::size_t s = 0; s < ball.degree(); ++s)
      if (auto t = ball.target(0, s); t && std::find(near.begin(), near.end(), *t) == near.end()) near.push_back(*t);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int r = 0; r < random_vectors; ++r) {
      std::vector<double> v(V, 0.0);
      double nrm = 0.0;
      for (auto i : near) {
        v[i] = gauss(rng);
        nrm += v[i] * v[i];
      }
      for (auto i : near) v[i] /= std::sqrt(nrm);
      tests.push_back(std::move(v));
    }
  }

  CompletenessReport rep;
  rep.level = level;
  rep.ball_size = V;
  std::vector<double> mass(tests.size(), 0.0);
  for (int N = 1; N <= level; ++N) {
    const auto tags = birth_tags(params.d, params.m, N);
    if (tags.empty()) continue;
    const auto system = symmetric_eigensystem(markov_dense(build_level_graph(params, N, default_dense_budget)));
    for (const auto& tag : tags) {
      const auto basis = propagate_to(base_eigenbasis(params, tag, system, seed), level);
      std::vector<std::vector<double>> vecs;
      for (const auto& p : extend_to_ball(basis, xi, ball)) vecs.push_back(p.f.dense(V));
      rep.function_count += vecs.size();
      ++rep.eigenvalue_count;
      for (const auto& q : orthonormal_basis(vecs, 1e-12))
        for (std::size_t t = 0; t < tests.size(); ++t) {
          const double c = std::inner_product(q.begin(), q.end(), tests[t].begin(), 0.0);
          mass[t] += c * c;
        }
    }
  }
  rep.center_mass = mass[0];
  rep.test_masses.assign(mass.begin() + 1, mass.end());
  return rep;
}

}  // namespace spinal
