#pragma once

// Closed-form spectra of the level graphs: the Schur-complement polynomials,
// the maps F and psi, the preimage tree of F, level spectra with
// multiplicities and the factored determinant of Q_n = B_n + lambda A_n - mu.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spinal/algebra.hpp"
#include "spinal/graph.hpp"
#include "spinal/oracle.hpp"

namespace spinal {

/// alpha, beta, gamma, delta, H_x and the substitution (lambda, mu) -> (lambda', mu').
struct SchurPolynomials {
  int d;
  int m;

  double dm() const { return std::pow(static_cast<double>(d), m); }
  double dm1() const { return std::pow(static_cast<double>(d), m - 1); }

  double alpha(double l, double mu) const { return dm() - 1 - mu + (d - 2) * l; }
  double beta(double l, double mu) const { return dm() - 1 - mu - l; }
  double gamma(double l, double mu) const {
    return mu * mu - ((d - 3) * l + dm() - 2) * mu - ((d - 2) * l * l + (d - 3) * l + dm() - 1);
  }
  double delta(double l, double mu) const {
    const double a = dm(), b = dm1();
    return mu * mu - ((d - 3) * l + a + b - 2) * mu -
           ((d - 2) * l * l + (b + d - 3) * l - std::pow(static_cast<double>(d), 2 * m - 1) + a + b - 1);
  }
  double H(double x, double l, double mu) const {
    return mu * mu - ((d - 2) * l + dm() - 2) * mu - ((d - 1) * l * l + (dm1() * x + d - 2) * l + dm() - 1);
  }
  std::pair<double, double> substitute(double l, double mu) const {
    const double ag = alpha(l, mu) * gamma(l, mu);
    return {dm1() * beta(l, mu) * l * l / ag, mu + (d - 1) * delta(l, mu) * l * l / ag};
  }
};

/// F(x) = x^2 - d(d-1)
inline double f_map(double x, int d) { return x * x - static_cast<double>(d) * (d - 1); }

/// Both solutions of F(x) = y, positive root first.
inline std::pair<double, double> f_preimages(double y, int d) {
  const double r = y + static_cast<double>(d) * (d - 1);
  if (r < 0) throw std::domain_error("F has no real preimage of " + std::to_string(y));
  const double s = std::sqrt(r);
  return {s, -s};
}

inline double psi(double t, int d, int m) {
  const double S = spinal_set_size(d, m);
  return (S * S * t * t - S * (S - 2) * t - (S + d - 2)) / std::pow(static_cast<double>(d), m - 1);
}

/// Both solutions of psi(t) = x, the "+" branch first.
inline std::pair<double, double> psi_preimages(double x, int d, int m) {
  const double S = spinal_set_size(d, m);
  const double disc = (S - 2) * (S - 2) + 4 * (S + d - 2) + 4 * std::pow(static_cast<double>(d), m - 1) * x;
  if (disc < 0) throw std::domain_error("psi has no real preimage of " + std::to_string(x));
  const double r = std::sqrt(disc);
  return {(S - 2 + r) / (2 * S), (S - 2 - r) / (2 * S)};
}

/// A point of F^{-depth}(0), addressed by the sign choices taken from the root.
struct PreimageNode {
  int depth = 0;
  std::string signs;  // '+' / '-' per level, root first
  double value = 0.0;
};

/// Levels 0..depth of the preimage tree of 0 under F; level k has 2^k nodes.
inline std::vector<std::vector<PreimageNode>> preimage_tree(int d, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  if (depth > 24) throw budget_error("preimage tree deeper than 24 levels");
  std::vector<std::vector<PreimageNode>> levels{{PreimageNode{}}};
  for (int k = 1; k <= depth; ++k) {
    std::vector<PreimageNode> next;
    next.reserve(levels.back().size() * 2);
    for (const auto& p : levels.back()) {
      auto [hi, lo] = f_preimages(p.value, d);
      next.push_back({k, p.signs + '+', hi});
      next.push_back({k, p.signs + '-', lo});
    }
    levels.push_back(std::move(next));
  }
  return levels;
}

struct EigenTag {
  enum class Kind { Top, Beta, Node };
  Kind kind = Kind::Top;
  int depth = 0;      // Node only
  std::string signs;  // Node only
  int branch = 0;     // Node only: +1 or -1 psi branch

  /// Level at which the eigenvalue first appears.
  int birth_level() const {
    switch (kind) {
      case Kind::Top: return 0;
      case Kind::Beta: return 1;
      case Kind::Node: return depth + 2;
    }
    return 0;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Top: return "top";
      case Kind::Beta: return "beta";
      case Kind::Node: return "node:" + std::to_string(depth) + ":" + signs + ":" + (branch > 0 ? "+" : "-");
    }
    return {};
  }

  static EigenTag parse(const std::string& text) {
    if (text == "top") return {};
    if (text == "beta") return {Kind::Beta, 0, {}, 0};
    const auto parts = detail::split(text, ':');
    if (parts.size() != 4 || parts[0] != "node" || (parts[3] != "+" && parts[3] != "-"))
      throw std::invalid_argument("bad eigenvalue tag '" + text + "'");
    return {Kind::Node, detail::parse_int(parts[1]), parts[2], parts[3] == "+" ? 1 : -1};
  }

  bool operator==(const EigenTag&) const = default;
};

struct SpectrumEntry {
  double value;
  std::uint64_t multiplicity;
  EigenTag tag;

  bool operator==(const SpectrumEntry&) const = default;
};

struct LevelSpectrum {
  int d = 2;
  int m = 1;
  int n = 0;
  std::vector<SpectrumEntry> entries;

  std::uint64_t total_multiplicity() const {
    std::uint64_t t = 0;
    for (const auto& e : entries) t += e.multiplicity;
    return t;
  }

  /// Eigenvalues repeated by multiplicity, ascending.
  std::vector<double> expanded() const {
    std::vector<double> out;
    out.reserve(total_multiplicity());
    for (const auto& e : entries) out.insert(out.end(), e.multiplicity, e.value);
    std::sort(out.begin(), out.end());
    return out;
  }

  bool operator==(const LevelSpectrum&) const = default;
};

/// Eigenvalue of M_n with a given tag.
inline double tagged_value(const EigenTag& tag, int d, int m, double node_value = 0.0) {
  const double S = spinal_set_size(d, m);
  switch (tag.kind) {
    case EigenTag::Kind::Top: return 1.0;
    case EigenTag::Kind::Beta: return (S - d) / S;
    case EigenTag::Kind::Node: {
      auto [p, q] = psi_preimages(node_value, d, m);
      return tag.branch > 0 ? p : q;
    }
  }
  return 0.0;
}

/// Spectrum of the Markov operator on level n with multiplicities; depends
/// only on (d, m, n).
inline LevelSpectrum level_spectrum(int d, int m, int n) {
  if (d < 2 || m < 1) throw std::invalid_argument("need d >= 2 and m >= 1");
  if (n < 0) throw std::invalid_argument("level must be >= 0");
  LevelSpectrum sp{d, m, n, {}};
  const double S = spinal_set_size(d, m);
  sp.entries.push_back({1.0, 1, {}});
  if (n == 0) return sp;
  const std::uint64_t cap = std::uint64_t{1} << 62;
  const auto ud = static_cast<std::uint64_t>(d);
  sp.entries.push_back({(S - d) / S, (ud - 2) * detail::checked_pow(ud, n - 1, cap) + 1, {EigenTag::Kind::Beta, 0, {}, 0}});
  if (n == 1) return sp;
  const auto tree = preimage_tree(d, n - 2);
  for (int k = 0; k <= n - 2; ++k) {
    const std::uint64_t mult = (ud - 2) * detail::checked_pow(ud, n - k - 2, cap) + 1;
    for (const auto& node : tree[static_cast<std::size_t>(k)]) {
      auto [p, q] = psi_preimages(node.value, d, m);
      sp.entries.push_back({p, mult, {EigenTag::Kind::Node, k, node.signs, +1}});
      sp.entries.push_back({q, mult, {EigenTag::Kind::Node, k, node.signs, -1}});
    }
  }
  return sp;
}

inline LevelSpectrum level_spectrum(const SpinalParams& params, int n) {
  params.validate();
  return level_spectrum(params.d, params.m, n);
}

/// Pairs of distinct tags whose values agree within tol.
struct Collision {
  EigenTag first;
  EigenTag second;
  double distance;
};

inline std::vector<Collision> detect_collisions(const LevelSpectrum& sp, double tol = 1e-12) {
  std::vector<std::size_t> order(sp.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sp.entries[a].value < sp.entries[b].value; });
  std::vector<Collision> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const double gap = sp.entries[order[j]].value - sp.entries[order[i]].value;
      if (gap > tol) break;
      out.push_back({sp.entries[order[i]].tag, sp.entries[order[j]].tag, gap});
    }
  return out;
}

struct Interval {
  double lo;
  double hi;

  double length() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  bool operator==(const Interval&) const = default;
};

struct BoundarySpectrum {
  enum class Kind { TwoIntervals, CantorPlusIsolated };
  Kind kind;
  std::vector<Interval> intervals;  // two bands when d = 2
  std::vector<double> isolated;     // eigenvalues when d >= 3, ascending
  std::vector<double> limit_sample; // sorted
};

/// Spectrum of M_xi. For d = 2 the two bands plus the level-`depth` values
/// as a dense sample; for d >= 3 the isolated eigenvalues up to preimage
/// depth `depth` and the psi-preimages of depth-`depth` leaves as a sample
/// of the limit Cantor set.
inline BoundarySpectrum boundary_spectrum(int d, int m, int depth = 14) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  BoundarySpectrum out;
  const double S = spinal_set_size(d, m);
  if (d == 2) {
    const double w = 1.0 / std::pow(2.0, m - 1);
    out.kind = BoundarySpectrum::Kind::TwoIntervals;
    out.intervals = {{-w, 0.0}, {1.0 - w, 1.0}};
    out.limit_sample = level_spectrum(d, m, depth).expanded();
    return out;
  }
  out.kind = BoundarySpectrum::Kind::CantorPlusIsolated;
  const auto tree = preimage_tree(d, depth);
  out.isolated.push_back((S - d) / S);
  for (int k = 0; k < depth; ++k)
    for (const auto& node : tree[static_cast<std::size_t>(k)]) {
      auto [p, q] = psi_preimages(node.value, d, m);
      out.isolated.push_back(p);
      out.isolated.push_back(q);
    }
  for (const auto& node : tree.back()) {
    auto [p, q] = psi_preimages(node.value, d, m);
    out.limit_sample.push_back(p);
    out.limit_sample.push_back(q);
  }
  std::sort(out.isolated.begin(), out.isolated.end());
  std::sort(out.limit_sample.begin(), out.limit_sample.end());
  return out;
}

/// |Q_n(lambda, mu)| from the product of alpha + lambda, beta and H_x factors.
inline SignedLog qn_determinant_factored(double l, double mu, int d, int m, int n) {
  if (n < 0) throw std::invalid_argument("level must be >= 0");
  const SchurPolynomials P{d, m};
  SignedLog det = SignedLog::of(P.alpha(l, mu) + l);
  if (n == 0) return det;
  const auto ud = static_cast<std::uint64_t>(d);
  const std::uint64_t cap = std::uint64_t{1} << 62;
  det.multiply_power(P.beta(l, mu), (ud - 2) * detail::checked_pow(ud, n - 1, cap) + 1);
  if (n == 1) return det;
  const auto tree = preimage_tree(d, n - 2);
  for (int k = 0; k <= n - 2; ++k) {
    const std::uint64_t e = (ud - 2) * detail::checked_pow(ud, n - k - 2, cap) + 1;
    for (const auto& node : tree[static_cast<std::size_t>(k)]) det.multiply_power(P.H(node.value, l, mu), e);
  }
  return det;
}

/// Q_n assembled from the rotor and spine parts of the level graph.
inline DenseMatrix qn_matrix(double l, double mu, const SpinalParams& params, int n,
                             std::size_t budget = default_dense_budget) {
  const auto g = build_level_graph(params, n);
  DenseMatrix q = spine_adjacency(g, budget) + l * rotor_adjacency(g, budget);
  return q.shifted(-mu);
}

inline SignedLog qn_determinant_direct(double l, double mu, const SpinalParams& params, int n,
                                       std::size_t budget = default_dense_budget) {
  return determinant(qn_matrix(l, mu, params, n, budget), budget);
}

/// A_n and B_n from their recursive block description.
inline std::pair<DenseMatrix, DenseMatrix> recursive_level_blocks(int d, int m, int n,
                                                                  std::size_t budget = default_dense_budget) {
  const double dm = std::pow(static_cast<double>(d), m);
  const double dm1 = std::pow(static_cast<double>(d), m - 1);
  DenseMatrix A(1, d - 1.0), B(1, dm - 1);
  for (int k = 1; k <= n; ++k) {
    const std::size_t blk = A.order();
    const std::size_t size = blk * static_cast<std::size_t>(d);
    if (size > budget) throw budget_error("level blocks exceed dense budget");
    DenseMatrix An(size), Bn(size);
    for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i)
      for (std::size_t j = 0; j < static_cast<std::size_t>(d); ++j)
        if (i != j)
          for (std::size_t r = 0; r < blk; ++r) An(i * blk + r, j * blk + r) = 1.0;
    for (std::size_t r = 0; r < blk; ++r)
      for (std::size_t c = 0; c < blk; ++c) {
        // block (0, 0): d^{m-1} A_{n-1} + d^{m-1} - 1
        Bn(r, c) = dm1 * A(r, c) + (r == c ? dm1 - 1 : 0.0);
        // block (d-1, d-1): B_{n-1}
        Bn((d - 1) * blk + r, (d - 1) * blk + c) = B(r, c);
      }
    for (std::size_t i = 1; i + 1 < static_cast<std::size_t>(d); ++i)
      for (std::size_t r = 0; r < blk; ++r) Bn(i * blk + r, i * blk + r) = dm - 1;
    A = std::move(An);
    B = std::move(Bn);
  }
  return {std::move(A), std::move(B)};
}

}  // namespace spinal
