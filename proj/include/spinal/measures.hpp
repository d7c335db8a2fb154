#pragma once

// Density of states and Kesten spectral measures: the densities g and h for
// d = 2, the atomic measure for d >= 3, moments, CDFs and exact return
// probabilities on boundary balls.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spinal/closed_form.hpp"
#include "spinal/graph.hpp"

namespace spinal {

struct Atom {
  double location;
  double weight;
};

/// Atoms plus an absolutely continuous part on a union of intervals.
/// `tail_mass` is the mass dropped by truncating an infinite atom family.
struct SpectralMeasure {
  std::vector<Atom> atoms;
  std::vector<Interval> support;
  std::function<double(double)> density;  // evaluated strictly inside `support`
  // density at edge + offset for an endpoint `edge` of `support`; used by
  // quadrature near the edges
  std::function<double(double edge, double offset)> edge_density;
  double tail_mass = 0.0;

  double density_near(double edge, double offset) const {
    return edge_density ? edge_density(edge, offset) : density(edge + offset);
  }

  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
};

namespace detail {

enum class BinaryDensityKind { DensityOfStates, SpineKesten };

/// g or h at x = edge + offset. Each linear factor x - r is formed as
/// (edge - r) + offset; edges and roots are dyadic, so no cancellation
/// occurs near the band edges.
inline double binary_density_at(int m, BinaryDensityKind kind, double edge, double offset) {
  const double p = std::ldexp(1.0, m);
  auto lin = [&](double r) { return (edge - r) + offset; };
  const double rad = lin(0.0) * -lin(1.0) * (p * lin(-2 / p)) * (p * lin(1 - 2 / p));
  if (!(rad > 0)) return 0.0;
  const double num = kind == BinaryDensityKind::DensityOfStates ? p * std::abs(lin(0.5 - 1 / p))
                                                                : std::abs(lin(0.0) * p * lin(-2 / p));
  return num / (std::numbers::pi * std::sqrt(rad));
}

inline void require_inside(double x, int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  const double p = std::ldexp(1.0, m);
  if (!(x * (1 - x) * (p * x + 2) * (p * x + 2 - p) > 0))
    throw std::domain_error("x = " + std::to_string(x) + " is outside the open support");
}

inline std::vector<Interval> binary_support(int m) {
  const double w = std::ldexp(1.0, 1 - m);
  return {{-w, 0.0}, {1.0 - w, 1.0}};
}

inline constexpr double quad_tol = 1e-10;  // relative, per panel

/// Adaptive Gauss-Kronrod on [a, b] after mapping to [0, 1]; the Boost
/// routine compares unscaled panel errors, so panels must have O(1) width.
template <class F>
double unit_gauss_kronrod(F f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  const double w = b - a;
  if (!(w > 0)) return 0.0;
  return w * gauss_kronrod<double, 31>::integrate([&](double s) { return f(a + s * w); }, 0.0, 1.0, 15, quad_tol);
}

/// Integral over [a, b] inside the support interval [lo, hi] of f(edge,
/// offset), with x = lo + u^2 on the left half and x = hi - u^2 on the right
/// half so that inverse square-root edges become bounded integrands.
template <class F>
double edge_integral(F f, double lo, double hi, double a, double b) {
  if (b <= a) return 0.0;
  const double mid = 0.5 * (lo + hi);
  double s = 0.0;
  if (a < mid)
    s += unit_gauss_kronrod([&](double u) { return 2 * u * f(lo, u * u); }, std::sqrt(std::max(0.0, a - lo)),
                            std::sqrt(std::min(b, mid) - lo));
  if (b > mid)
    s += unit_gauss_kronrod([&](double u) { return 2 * u * f(hi, -u * u); }, std::sqrt(std::max(0.0, hi - b)),
                            std::sqrt(hi - std::max(a, mid)));
  return s;
}

}  // namespace detail

/// Density of states for d = 2:
/// g(x) = |2^{m-1} - 1 - 2^m x| / (pi sqrt(x(1-x)(2^m x + 2)(2^m x + 2 - 2^m))).
inline double dos_density_g(double x, int m) {
  detail::require_inside(x, m);
  return detail::binary_density_at(m, detail::BinaryDensityKind::DensityOfStates, x, 0.0);
}

/// Kesten measure density at 1^N for d = 2:
/// h(x) = |x(2^m x + 2)| / (pi sqrt(x(1-x)(2^m x + 2)(2^m x + 2 - 2^m))).
inline double kesten_density_h(double x, int m) {
  detail::require_inside(x, m);
  return detail::binary_density_at(m, detail::BinaryDensityKind::SpineKesten, x, 0.0);
}

inline SpectralMeasure binary_dos(int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  constexpr auto kind = detail::BinaryDensityKind::DensityOfStates;
  SpectralMeasure meas;
  meas.support = detail::binary_support(m);
  meas.density = [m](double x) { return detail::binary_density_at(m, kind, x, 0.0); };
  meas.edge_density = [m](double e, double t) { return detail::binary_density_at(m, kind, e, t); };
  return meas;
}

inline SpectralMeasure binary_kesten_spine(int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  constexpr auto kind = detail::BinaryDensityKind::SpineKesten;
  SpectralMeasure meas;
  meas.support = detail::binary_support(m);
  meas.density = [m](double x) { return detail::binary_density_at(m, kind, x, 0.0); };
  meas.edge_density = [m](double e, double t) { return detail::binary_density_at(m, kind, e, t); };
  return meas;
}

/// One depth layer of the d >= 3 atomic measure: `count` atoms of equal weight.
struct AtomLayer {
  int depth;      // -1 for the atom at (|S| - d)/|S|
  double count;   // 2^{depth+1}
  double weight;  // (d - 2)/d^{depth+2} each
};

/// Layer masses up to `depth` and the exact mass (2/d)^{depth+2} of all
/// deeper layers.
struct AtomProfile {
  std::vector<AtomLayer> layers;
  double tail_mass = 0.0;

  double atom_mass() const {
    double s = 0.0;
    for (const auto& l : layers) s += l.count * l.weight;
    return s;
  }
};

inline AtomProfile dos_atom_profile(int d, int depth) {
  if (d < 3) throw std::invalid_argument("atomic density of states needs d >= 3");
  if (depth < -1) throw std::invalid_argument("depth must be >= -1");
  const double dd = d;
  AtomProfile p;
  p.layers.push_back({-1, 1.0, (dd - 2) / dd});
  for (int n = 0; n <= depth; ++n)
    p.layers.push_back({n, std::ldexp(1.0, n + 1), (dd - 2) / std::pow(dd, n + 2)});
  p.tail_mass = std::pow(2.0 / dd, depth + 2);
  return p;
}

/// Density of states. d = 2: density g on two intervals. d >= 3: atoms
/// at (|S| - d)/|S| and at psi^{-1}(F^{-n}(0)) for n <= depth.
inline SpectralMeasure density_of_states(int d, int m, int depth, std::size_t atom_budget = std::size_t{1} << 22) {
  if (d < 2 || m < 1) throw std::invalid_argument("need d >= 2 and m >= 1");
  if (d == 2) return binary_dos(m);
  if (depth < -1) throw std::invalid_argument("depth must be >= -1");
  const double atoms = std::ldexp(1.0, depth + 2) - 1;
  if (atoms > static_cast<double>(atom_budget))
    throw budget_error("density of states at depth " + std::to_string(depth) + " has " + std::to_string(atoms) +
                       " atoms; use dos_atom_profile or dos_moment");
  const auto profile = dos_atom_profile(d, depth);
  SpectralMeasure meas;
  const double S = spinal_set_size(d, m);
  meas.atoms.push_back({(S - d) / S, profile.layers[0].weight});
  if (depth >= 0) {
    const auto tree = preimage_tree(d, depth);
    for (int n = 0; n <= depth; ++n)
      for (const auto& node : tree[static_cast<std::size_t>(n)]) {
        auto [p, q] = psi_preimages(node.value, d, m);
        const double w = profile.layers[static_cast<std::size_t>(n + 1)].weight;
        meas.atoms.push_back({p, w});
        meas.atoms.push_back({q, w});
      }
  }
  std::sort(meas.atoms.begin(), meas.atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  meas.tail_mass = profile.tail_mass;
  return meas;
}

inline SpectralMeasure density_of_states(const SpinalParams& params, int depth) {
  params.validate();
  return density_of_states(params.d, params.m, depth);
}

/// Integral of x^k times the continuous part.
inline double continuous_moment(const SpectralMeasure& meas, int k) {
  if (!meas.density) return 0.0;
  double s = 0.0;
  for (const auto& I : meas.support)
    s += detail::edge_integral(
        [&](double e, double t) { return std::pow(e + t, k) * meas.density_near(e, t); }, I.lo, I.hi, I.lo, I.hi);
  return s;
}

/// sum over atoms of w x^k plus the integral of x^k against the density.
inline double measure_moment(const SpectralMeasure& meas, int k) {
  if (k < 0) throw std::invalid_argument("moment order must be >= 0");
  double s = 0.0;
  for (const auto& a : meas.atoms) s += a.weight * std::pow(a.location, k);
  return s + continuous_moment(meas, k);
}

inline double total_mass(const SpectralMeasure& meas) { return measure_moment(meas, 0); }

/// k-th moment of the d >= 3 density of states over all layers <= depth,
/// without enumerating atoms. Power sums p_n(j) of F^{-n}(0) follow
/// p_n(2i) = 2 sum_l C(i,l) c^{i-l} p_{n-1}(l), p_n(odd) = 0, c = d(d-1);
/// each psi-preimage pair contributes a polynomial in the node value.
inline double dos_moment(int d, int m, int k, int depth) {
  if (d < 3) throw std::invalid_argument("atomic density of states needs d >= 3");
  if (k < 0) throw std::invalid_argument("moment order must be >= 0");
  const double S = spinal_set_size(d, m);
  const double dm1 = std::pow(static_cast<double>(d), m - 1);
  const double c = static_cast<double>(d) * (d - 1);
  // t^2 - e1 t + e2 = 0 with e1 = (S-2)/S, e2 = -(S + d - 2 + d^{m-1} y)/S^2
  using Poly = std::vector<double>;  // coefficients in y
  const Poly e1{(S - 2) / S};
  const Poly e2{-(S + d - 2) / (S * S), -dm1 / (S * S)};
  auto mul = [](const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
  };
  auto sub = [](Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
    return a;
  };
  std::vector<Poly> P{{2.0}, e1};
  for (int j = 2; j <= k; ++j) P.push_back(sub(mul(e1, P[j - 1]), mul(e2, P[j - 2])));
  const Poly& pk = P[static_cast<std::size_t>(k)];
  const std::size_t J = pk.size();

  const auto profile = dos_atom_profile(d, depth);
  double s = profile.layers[0].weight * std::pow((S - d) / S, k);
  std::vector<double> p(std::max<std::size_t>(J, 1), 0.0);
  p[0] = 1.0;  // level 0: the single node y = 0
  std::vector<std::vector<double>> binom(J, std::vector<double>(J, 0.0));
  for (std::size_t i = 0; i < J; ++i) {
    binom[i][0] = 1.0;
    for (std::size_t l = 1; l <= i; ++l) binom[i][l] = binom[i - 1][l - 1] + (l < i ? binom[i - 1][l] : 0.0);
  }
  for (int n = 0; n <= depth; ++n) {
    if (n > 0) {
      std::vector<double> next(p.size(), 0.0);
      for (std::size_t j = 0; j < p.size(); j += 2) {
        const std::size_t i = j / 2;
        double acc = 0.0;
        for (std::size_t l = 0; l <= i; ++l) acc += binom[i][l] * std::pow(c, static_cast<double>(i - l)) * p[l];
        next[j] = 2 * acc;
      }
      p = std::move(next);
    }
    double layer = 0.0;
    for (std::size_t j = 0; j < J; ++j) layer += pk[j] * p[j];
    s += profile.layers[static_cast<std::size_t>(n + 1)].weight * layer;
  }
  return s;
}

/// Empirical moment (1/d^n) sum mult * lambda^k of a level spectrum.
inline double level_moment(const LevelSpectrum& sp, int k) {
  double s = 0.0, total = 0.0;
  for (const auto& e : sp.entries) {
    s += static_cast<double>(e.multiplicity) * std::pow(e.value, k);
    total += static_cast<double>(e.multiplicity);
  }
  return s / total;
}

/// CDF at ascending points: atom weights at locations <= x plus the
/// integral of the density up to x, accumulated segment by segment.
inline std::vector<double> measure_cdf(const SpectralMeasure& meas, const std::vector<double>& xs) {
  if (!std::is_sorted(xs.begin(), xs.end())) throw std::invalid_argument("cdf points must be ascending");
  std::vector<double> out(xs.size(), 0.0);
  std::size_t a = 0;
  double atom_acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (a < meas.atoms.size() && meas.atoms[a].location <= xs[i]) atom_acc += meas.atoms[a++].weight;
    out[i] = atom_acc;
  }
  if (!meas.density) return out;
  for (const auto& I : meas.support) {
    double acc = 0.0, pos = I.lo;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = std::clamp(xs[i], I.lo, I.hi);
      if (x > pos) {
        acc += detail::edge_integral([&](double e, double t) { return meas.density_near(e, t); }, I.lo, I.hi, pos, x);
        pos = x;
      }
      out[i] += acc;
    }
  }
  return out;
}

/// sup |F_empirical - F| for a sample (any order), counting ties as one jump.
inline double kolmogorov_distance(const SpectralMeasure& meas, std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const auto F = measure_cdf(meas, sample);
  const double n = static_cast<double>(sample.size());
  double D = 0.0;
  std::size_t i = 0;
  while (i < sample.size()) {
    std::size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    D = std::max({D, std::abs(F[i] - static_cast<double>(i) / n), std::abs(F[i] - static_cast<double>(j) / n)});
    i = j;
  }
  return D;
}

/// chi(theta, eps) = 1/2 - 1/2^m + (-1)^eps / 2^m sqrt(4^{m-1} + 1 + 2^m cos theta)
inline double chi(double theta, int eps, int m) {
  const double p = std::ldexp(1.0, m);
  const double r = std::sqrt(std::max(0.0, std::ldexp(1.0, 2 * m - 2) + 1 + p * std::cos(theta)));
  return 0.5 - 1 / p + (eps ? -r : r) / p;
}

/// Images under chi of seeded uniform samples of [0, pi] x {0, 1}.
inline std::vector<double> chi_pushforward_sample(int m, std::size_t count, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> theta(0.0, std::numbers::pi);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> out(count);
  for (auto& x : out) x = chi(theta(rng), coin(rng) ? 1 : 0, m);
  return out;
}

/// Return probabilities (M^k delta)(center) for k = 0..kmax by repeated
/// matvecs; exact while 2 * radius >= kmax.
inline std::vector<double> kesten_moments_exact(const BoundaryBall& ball, int kmax) {
  if (kmax < 0) throw std::invalid_argument("moment order must be >= 0");
  if (2 * ball.radius() < kmax)
    throw std::invalid_argument("radius " + std::to_string(ball.radius()) + " too small for " + std::to_string(kmax) +
                                " steps");
  std::vector<double> v(ball.vertex_count(), 0.0);
  v[0] = 1.0;
  std::vector<double> out{1.0};
  for (int k = 1; k <= kmax; ++k) {
    v = ball.markov_matvec(v);
    out.push_back(v[0]);
  }
  return out;
}

inline double kesten_moment_exact(const BoundaryBall& ball, int k) { return kesten_moments_exact(ball, k).back(); }

/// Histogram of a sample over [lo, hi] with equal bins, normalized to a density.
struct Histogram {
  double lo;
  double hi;
  std::vector<double> density;
};

inline Histogram histogram(const std::vector<double>& sample, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram needs bins >= 1 and hi > lo");
  Histogram h{lo, hi, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
  const double w = (hi - lo) / bins;
  for (double x : sample) {
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>(std::min<double>(bins - 1, std::floor((x - lo) / w)));
    h.density[b] += 1.0;
  }
  for (auto& c : h.density) c /= static_cast<double>(sample.size()) * w;
  return h;
}

}  // namespace spinal
