#pragma once

// Binary-tree (d = 2) Schreier graphs of a generating subset T as weighted
// walks on Z: q-numbers, interval/Cantor classification, Floquet-Bloch bands
// of the periodic case and finite-window gap witnesses for the aperiodic one.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "spinal/algebra.hpp"
#include "spinal/closed_form.hpp"
#include "spinal/oracle.hpp"

namespace spinal {

/// T = {a} u (spine part), a subset of S generating the spinal group.
struct GeneratingSubset {
  int d = 2;
  int m = 1;
  bool contains_a = true;
  std::vector<ResidueVector> spine;

  std::size_t size() const { return (contains_a ? 1u : 0u) + spine.size(); }

  /// Subgroup of B generated by the spine part, by closure.
  bool spine_generates_b() const {
    const auto order = detail::checked_pow(static_cast<std::uint64_t>(d), m, 1u << 24);
    std::vector<char> seen(order, 0);
    std::vector<ResidueVector> frontier{ResidueVector::zero(d, m)};
    seen[0] = 1;
    std::uint64_t reached = 1;
    while (!frontier.empty()) {
      const auto x = frontier.back();
      frontier.pop_back();
      for (const auto& s : spine) {
        auto y = x + s;
        if (!seen[y.index()]) {
          seen[y.index()] = 1;
          ++reached;
          frontier.push_back(std::move(y));
        }
      }
    }
    return reached == order;
  }

  /// Necessary conditions for generating G_omega: a present, spine part nonzero,
  /// distinct and generating B.
  void validate() const {
    if (!contains_a) throw std::invalid_argument("generating subset must contain a");
    for (std::size_t i = 0; i < spine.size(); ++i) {
      if (spine[i].modulus() != d || spine[i].dimension() != m)
        throw std::invalid_argument("spine element " + spine[i].digits() + " does not match (d, m)");
      if (spine[i].is_zero()) throw std::invalid_argument("spine part must not contain the identity");
      for (std::size_t j = 0; j < i; ++j)
        if (spine[i] == spine[j]) throw std::invalid_argument("spine element " + spine[i].digits() + " repeated");
    }
    if (!spine_generates_b()) throw std::invalid_argument("spine part does not generate B");
  }

  /// Comma separated: `a`, `b:<digits>` for every spine element.
  std::string to_string() const {
    std::string s = contains_a ? "a" : "";
    for (const auto& b : spine) s += (s.empty() ? "" : ",") + std::string("b:") + b.digits();
    return s;
  }

  /// Full spinal set S \ {rotors other than a}; for d = 2 exactly S.
  static GeneratingSubset full(int d, int m) {
    GeneratingSubset t{d, m, true, {}};
    for (const auto& b : enumerate_group(d, m))
      if (!b.is_zero()) t.spine.push_back(b);
    return t;
  }

  /// {a, b_1, ..., b_m} with b_i the unit vectors.
  static GeneratingSubset units(int d, int m) {
    GeneratingSubset t{d, m, true, {}};
    for (int i = 0; i < m; ++i) {
      auto e = ResidueVector::zero(d, m).entries();
      e[static_cast<std::size_t>(i)] = 1;
      t.spine.emplace_back(d, e);
    }
    std::sort(t.spine.begin(), t.spine.end());
    return t;
  }

  /// Spine part sorted. Tokens separated by commas: `a`; `S` (all of S); `b:<digits>`;
  /// products of unit vectors such as `b1`, `b1b3`; and for d = 2, m = 2 the
  /// Grigorchuk names `b`, `c`, `d` (b = 01, c = 11, d = 10).
  static GeneratingSubset parse(std::string_view text, int d, int m) {
    GeneratingSubset t{d, m, false, {}};
    for (const auto& tok : detail::split(text, ',')) {
      if (tok == "a") {
        t.contains_a = true;
      } else if (tok == "S") {
        auto f = full(d, m);
        t.contains_a = true;
        t.spine.insert(t.spine.end(), f.spine.begin(), f.spine.end());
      } else if (tok.rfind("b:", 0) == 0) {
        auto v = ResidueVector::parse_digits(std::string_view(tok).substr(2), d);
        if (v.dimension() != m) throw std::invalid_argument("spine element '" + tok + "' needs " + std::to_string(m) + " digits");
        t.spine.push_back(std::move(v));
      } else if ((tok == "b" || tok == "c" || tok == "d") && d == 2 && m == 2) {
        t.spine.push_back(ResidueVector::parse_digits(tok == "b" ? "01" : tok == "c" ? "11" : "10", 2));
      } else if (tok.size() >= 2 && tok[0] == 'b') {
        auto v = ResidueVector::zero(d, m);
        for (const auto& part : detail::split(std::string_view(tok).substr(1), 'b')) {
          const int i = detail::parse_int(part);
          if (i < 1 || i > m) throw std::invalid_argument("unit index out of range in '" + tok + "'");
          auto e = ResidueVector::zero(d, m).entries();
          e[static_cast<std::size_t>(i - 1)] = 1;
          v = v + ResidueVector(d, e);
        }
        t.spine.push_back(std::move(v));
      } else {
        throw std::invalid_argument("unknown generator token '" + tok + "'");
      }
    }
    std::sort(t.spine.begin(), t.spine.end());
    t.validate();
    return t;
  }

  bool operator==(const GeneratingSubset&) const = default;
};

namespace detail {

inline void require_binary(int d) {
  if (d != 2) throw std::invalid_argument("line walks are defined for d = 2 only");
}

inline void require_matching(const GeneratingSubset& t, const OmegaSequence& omega) {
  require_binary(t.d);
  if (omega.modulus() != t.d || omega.dimension() != t.m)
    throw std::invalid_argument("generating subset and omega disagree on (d, m)");
}

}  // namespace detail

/// q_pi = |T n B \ Ker(pi)| for one epimorphism.
inline int q_number(const GeneratingSubset& t, const Epimorphism& pi) {
  detail::require_binary(t.d);
  return static_cast<int>(std::count_if(t.spine.begin(), t.spine.end(), [&](const auto& b) { return !pi.in_kernel(b); }));
}

/// q_pi for every distinct pi in the preperiod and period of omega.
inline std::map<Epimorphism, int> q_numbers(const GeneratingSubset& t, const OmegaSequence& omega) {
  detail::require_matching(t, omega);
  std::map<Epimorphism, int> out;
  for (const auto* list : {&omega.preperiod(), &omega.period()})
    for (const auto& pi : *list) out[pi] = q_number(t, pi);
  return out;
}

enum class SpectrumType { Cantor, Intervals };

inline std::string to_string(SpectrumType s) { return s == SpectrumType::Cantor ? "Cantor" : "Intervals"; }

/// Cantor iff the q-numbers of the epimorphisms in the period are not all equal.
inline SpectrumType classify_spectrum_type(const GeneratingSubset& t, const OmegaSequence& omega) {
  detail::require_matching(t, omega);
  const int q0 = q_number(t, omega.period().front());
  for (const auto& pi : omega.period())
    if (q_number(t, pi) != q0) return SpectrumType::Cantor;
  return SpectrumType::Intervals;
}

/// Minimal generating set {a, x_1..x_{m-2}, y, y + y'} with x_i a basis of
/// Ker(pi) n Ker(pi'), pi(y) = 1, pi'(y) = 0, pi(y') = 0, pi'(y') = 1, for
/// the first two distinct epimorphisms pi, pi' of the period. Its q-numbers
/// are 2 at pi and 1 at pi'.
inline GeneratingSubset minimal_cantor_subset(const OmegaSequence& omega) {
  detail::require_binary(omega.modulus());
  const int m = omega.dimension();
  const auto& per = omega.period();
  auto it = std::find_if(per.begin(), per.end(), [&](const auto& e) { return !(e == per.front()); });
  if (it == per.end()) throw std::invalid_argument("period has a single epimorphism; every generating set gives intervals");
  const auto& pi = per.front();
  const auto& pi2 = *it;
  GeneratingSubset t{2, m, true, {}};
  std::optional<ResidueVector> y, y2;
  for (const auto& b : enumerate_group(2, m)) {
    if (b.is_zero()) continue;
    const int u = pi.apply(b), v = pi2.apply(b);
    if (u == 1 && v == 0 && !y) y = b;
    if (u == 0 && v == 1 && !y2) y2 = b;
  }
  // greedy basis of the joint kernel: add each kernel element outside the current span
  std::vector<char> span(std::size_t{1} << m, 0);
  span[0] = 1;
  for (const auto& b : enumerate_group(2, m)) {
    if (span[b.index()] || pi.apply(b) != 0 || pi2.apply(b) != 0) continue;
    t.spine.push_back(b);
    std::vector<ResidueVector> cur;
    for (const auto& c : enumerate_group(2, m))
      if (span[c.index()]) cur.push_back(c);
    for (const auto& c : cur) span[(c + b).index()] = 1;
  }
  t.spine.push_back(*y);
  t.spine.push_back(*y + *y2);
  t.validate();
  return t;
}

/// Walk on Z with stay p_i at vertex i and probability q_i on the bond (i, i+1), indices mod l.
struct PeriodicLineWalk {
  std::vector<double> stay;
  std::vector<double> bond;

  std::size_t period() const { return stay.size(); }

  void validate(double tol = 1e-14) const {
    if (stay.empty() || stay.size() != bond.size()) throw std::invalid_argument("walk needs equal nonzero stay and bond counts");
    const std::size_t l = period();
    for (std::size_t i = 0; i < l; ++i) {
      if (stay[i] < -tol || bond[i] < -tol) throw std::invalid_argument("walk probabilities must be nonnegative");
      const double row = stay[i] + bond[i] + bond[(i + l - 1) % l];
      if (std::abs(row - 1.0) > tol) throw std::invalid_argument("walk row " + std::to_string(i) + " does not sum to 1");
    }
  }

  /// Same walk with the smallest period dividing l.
  PeriodicLineWalk reduced() const {
    const std::size_t l = period();
    for (std::size_t p = 1; p < l; ++p) {
      if (l % p) continue;
      bool ok = true;
      for (std::size_t i = p; i < l && ok; ++i) ok = stay[i] == stay[i - p] && bond[i] == bond[i - p];
      if (ok) return {std::vector<double>(stay.begin(), stay.begin() + static_cast<long>(p)),
                      std::vector<double>(bond.begin(), bond.begin() + static_cast<long>(p))};
    }
    return *this;
  }
};

/// Class of the bond (v, v+1): -1 for a-bonds (v even), else trailing_zeros(v+1) - 1.
inline int bond_class(std::uint64_t v) {
  if (v % 2 == 0) return -1;
  return std::countr_zero(v + 1) - 1;
}

/// Probability of a bond class: 1/|T| for a-bonds, q_{omega_i}/|T| for class i.
inline double bond_probability(const GeneratingSubset& t, const OmegaSequence& omega, int cls) {
  const double size = static_cast<double>(t.size());
  if (cls < 0) return 1.0 / size;
  return q_number(t, omega.at(static_cast<std::size_t>(cls))) / size;
}

/// The exact periodic walk when every q-number in the period agrees, else nullopt.
/// Classes below the first index from which q is constant repeat with period 2^{j+1}.
inline std::optional<PeriodicLineWalk> periodic_line_walk(const GeneratingSubset& t, const OmegaSequence& omega) {
  t.validate();
  if (classify_spectrum_type(t, omega) == SpectrumType::Cantor) return std::nullopt;
  const int c = q_number(t, omega.period().front());
  std::size_t j = omega.preperiod().size();
  while (j > 0 && q_number(t, omega.at(j - 1)) == c) --j;
  const std::uint64_t l = std::uint64_t{2} << j;
  PeriodicLineWalk w;
  for (std::uint64_t v = 0; v < l; ++v) {
    const int cls = bond_class(v);
    w.bond.push_back(bond_probability(t, omega, std::min<int>(cls, static_cast<int>(j))));
  }
  for (std::uint64_t v = 0; v < l; ++v) w.stay.push_back(1.0 - w.bond[v] - w.bond[(v + l - 1) % l]);
  w.validate();
  return w.reduced();
}

enum class WindowBoundary { Free, Periodic };

/// Restriction of the walk to vertices 0..2^D - 1. Free: the missing bond
/// probability stays at the endpoints as loops (the level-D Schreier graph).
/// Periodic: a wrap bond of class D - 1 closes the window into a cycle.
struct LineWindow {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
  double wrap = 0.0;        // couples 2^D - 1 and 0

  std::size_t size() const { return diag.size(); }

  DenseSymmetricMatrix dense() const {
    const std::size_t n = size();
    DenseMatrix a(n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = off[i];
    if (n > 1) {
      a(0, n - 1) += wrap;
      a(n - 1, 0) += wrap;
    }
    return DenseSymmetricMatrix(a);
  }
};

inline LineWindow line_window(const GeneratingSubset& t, const OmegaSequence& omega, int depth,
                              WindowBoundary boundary = WindowBoundary::Free) {
  detail::require_matching(t, omega);
  if (depth < 1 || depth > 24) throw std::invalid_argument("window depth must be in 1..24");
  const std::uint64_t n = std::uint64_t{1} << depth;
  LineWindow w;
  w.off.reserve(n - 1);
  for (std::uint64_t v = 0; v + 1 < n; ++v) w.off.push_back(bond_probability(t, omega, bond_class(v)));
  const double edge = bond_probability(t, omega, depth - 1);
  w.diag.resize(n);
  for (std::uint64_t v = 0; v < n; ++v) {
    const double left = v > 0 ? w.off[v - 1] : edge;
    const double right = v + 1 < n ? w.off[v] : edge;
    w.diag[v] = 1.0 - left - right;
  }
  if (boundary == WindowBoundary::Free) {
    w.diag.front() += edge;
    w.diag.back() += edge;
  } else {
    w.wrap = edge;
  }
  return w;
}

/// Exact periodic walk if one exists, otherwise the free depth-D window.
inline std::variant<PeriodicLineWalk, LineWindow> line_walk(const GeneratingSubset& t, const OmegaSequence& omega,
                                                            int depth) {
  if (auto p = periodic_line_walk(t, omega)) return *p;
  return line_window(t, omega, depth);
}

/// Number of eigenvalues below x of a symmetric cyclic tridiagonal matrix,
/// by LDL^T inertia with the corner entry carried as a fill-in column.
inline std::size_t count_below(const LineWindow& w, double x) {
  const std::size_t n = w.size();
  if (n == 0) return 0;
  if (n <= 2) {
    const auto ev = symmetric_eigenvalues(w.dense());
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [x](double e) { return e < x; }));
  }
  constexpr double tiny = 1e-300;
  auto guard = [](double p) { return std::abs(p) < tiny ? tiny : p; };
  std::size_t count = 0;
  double piv = w.diag[0] - x;
  double col = w.wrap;  // entry (i, n-1) of the partially eliminated matrix
  double last = w.diag[n - 1] - x;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i + 2 == n) col += w.off[n - 2];
    piv = guard(piv);
    if (piv < 0) ++count;
    last -= col * col / piv;
    if (i + 2 < n) {
      const double b = w.off[i];
      const double next_piv = w.diag[i + 1] - x - b * b / piv;
      col = -b * col / piv;
      piv = next_piv;
    }
  }
  if (guard(last) < 0) ++count;
  return count;
}

/// All eigenvalues of the window, ascending, by bisection on count_below.
inline std::vector<double> window_eigenvalues(const LineWindow& w, double tol = 1e-13) {
  const std::size_t n = w.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double lo = -1.0 - 1e-9, hi = 1.0 + 1e-9;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (count_below(w, mid) > j ? hi : lo) = mid;
    }
    out[j] = 0.5 * (lo + hi);
  }
  return out;
}

/// Sorted disjoint closed intervals.
struct BandStructure {
  std::vector<Interval> bands;

  bool contains(double x, double tol = 0.0) const {
    return std::any_of(bands.begin(), bands.end(), [&](const auto& b) { return b.contains(x, tol); });
  }
  double measure() const {
    double s = 0;
    for (const auto& b : bands) s += b.length();
    return s;
  }
};

/// Sort and merge overlapping or touching intervals.
inline BandStructure merge_intervals(std::vector<Interval> iv, double tol = 1e-12) {
  std::sort(iv.begin(), iv.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  BandStructure out;
  for (const auto& x : iv) {
    if (!out.bands.empty() && x.lo <= out.bands.back().hi + tol)
      out.bands.back().hi = std::max(out.bands.back().hi, x.hi);
    else
      out.bands.push_back(x);
  }
  return out;
}

/// Hermitian l x l Bloch matrix at quasimomentum k; the wrap bond carries e^{ik}.
inline std::vector<std::complex<double>> bloch_matrix(const PeriodicLineWalk& w, double k) {
  const std::size_t l = w.period();
  std::vector<std::complex<double>> h(l * l);
  const auto phase = std::polar(1.0, k);
  for (std::size_t i = 0; i < l; ++i) h[i * l + i] += w.stay[i];
  for (std::size_t i = 0; i + 1 < l; ++i) {
    h[i * l + i + 1] += w.bond[i];
    h[(i + 1) * l + i] += w.bond[i];
  }
  h[(l - 1) * l] += w.bond[l - 1] * phase;
  h[l - 1] += w.bond[l - 1] * std::conj(phase);
  return h;
}

/// Eigenvalues of a Hermitian matrix via the real symmetric embedding [[X, -Y], [Y, X]].
inline std::vector<double> hermitian_eigenvalues(const std::vector<std::complex<double>>& h, std::size_t l,
                                                 double tol = 1e-14) {
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j)
      if (std::abs(h[i * l + j] - std::conj(h[j * l + i])) > tol)
        throw std::logic_error("Bloch matrix is not Hermitian");
  DenseMatrix a(2 * l);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) {
      const auto z = h[i * l + j];
      a(i, j) = a(i + l, j + l) = z.real();
      a(i + l, j) = z.imag();
      a(i, j + l) = -z.imag();
    }
  const auto doubled = symmetric_eigenvalues(DenseSymmetricMatrix(a));
  std::vector<double> out;
  for (std::size_t j = 0; j < doubled.size(); j += 2) out.push_back(0.5 * (doubled[j] + doubled[j + 1]));
  return out;
}

/// Bloch eigenvalues x_1(k) <= ... <= x_l(k) on the k grid.
struct Dispersion {
  std::vector<double> k;
  std::vector<std::vector<double>> values;
};

/// Uniform grid of `samples` points over [-pi, pi] plus k = 0 and k = pi exactly.
inline Dispersion dispersion(const PeriodicLineWalk& w, int samples = 4097) {
  w.validate();
  if (samples < 2) throw std::invalid_argument("need at least 2 k samples");
  Dispersion out;
  for (int j = 0; j < samples; ++j) out.k.push_back(-std::numbers::pi + 2 * std::numbers::pi * j / (samples - 1));
  out.k.push_back(0.0);
  out.k.push_back(std::numbers::pi);
  std::sort(out.k.begin(), out.k.end());
  out.k.erase(std::unique(out.k.begin(), out.k.end()), out.k.end());
  for (double k : out.k) out.values.push_back(hermitian_eigenvalues(bloch_matrix(w, k), w.period()));
  return out;
}

/// Union over k of the Bloch eigenvalues. For period <= 2 the band edges are
/// the closed-form values at k in {0, pi}.
inline BandStructure bloch_bands(const PeriodicLineWalk& w, int samples = 4097) {
  const auto disp = dispersion(w, samples);
  const std::size_t l = w.period();
  std::vector<Interval> bands(l, Interval{2.0, -2.0});
  for (const auto& row : disp.values)
    for (std::size_t j = 0; j < l; ++j) {
      bands[j].lo = std::min(bands[j].lo, row[j]);
      bands[j].hi = std::max(bands[j].hi, row[j]);
    }
  if (l == 1) {
    bands[0] = {w.stay[0] - 2 * w.bond[0], w.stay[0] + 2 * w.bond[0]};
  } else if (l == 2) {
    const double p = w.stay[0], s = w.bond[0] + w.bond[1], t = std::abs(w.bond[0] - w.bond[1]);
    bands[0] = {p - s, p - t};
    bands[1] = {p + t, p + s};
  }
  return merge_intervals(std::move(bands));
}

/// {-x : x in bands} u bands.
inline BandStructure symmetrized(const BandStructure& b) {
  auto iv = b.bands;
  for (const auto& x : b.bands) iv.push_back({-x.hi, -x.lo});
  return merge_intervals(std::move(iv));
}

/// Maximal eigenvalue-free subintervals of [lo_spec, hi_spec] found by
/// subdividing until cells are shorter than `resolution`; each returned
/// interval [u, v] has count_below(u) == count_below(v).
inline std::vector<Interval> window_gaps(const LineWindow& w, double resolution) {
  std::vector<Interval> occupied;
  auto rec = [&](auto&& self, double lo, std::size_t clo, double hi, std::size_t chi) -> void {
    if (clo == chi) return;
    if (hi - lo <= resolution) {
      if (!occupied.empty() && occupied.back().hi == lo)
        occupied.back().hi = hi;
      else
        occupied.push_back({lo, hi});
      return;
    }
    const double mid = 0.5 * (lo + hi);
    const std::size_t cm = count_below(w, mid);
    self(self, lo, clo, mid, cm);
    self(self, mid, cm, hi, chi);
  };
  const double lo = -1.0 - 1e-9, hi = 1.0 + 1e-9;
  rec(rec, lo, count_below(w, lo), hi, count_below(w, hi));
  std::vector<Interval> gaps;
  for (std::size_t i = 0; i + 1 < occupied.size(); ++i) gaps.push_back({occupied[i].hi, occupied[i + 1].lo});
  return gaps;
}

/// Pairwise intersection of two sorted families of disjoint intervals.
inline std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo), hi = std::min(a[i].hi, b[j].hi);
    if (lo < hi) out.push_back({lo, hi});
    (a[i].hi < b[j].hi ? i : j)++;
  }
  return out;
}

struct GapWitness {
  std::vector<int> depths;
  std::vector<std::size_t> gap_counts;  // gaps common to both boundary variants at each depth
  std::vector<Interval> persistent;     // gaps present at every depth in both variants
  double margin = 1e-3;
};

/// Gaps of the free and periodic windows at each depth, each shrunk by
/// `margin` on both sides; a gap is persistent if it survives in all of them.
inline GapWitness cantor_gap_witness(const GeneratingSubset& t, const OmegaSequence& omega,
                                     std::vector<int> depths = {8, 10, 12}, double margin = 1e-3) {
  t.validate();
  detail::require_matching(t, omega);
  GapWitness out;
  out.depths = depths;
  out.margin = margin;
  std::optional<std::vector<Interval>> all;
  for (int depth : depths) {
    std::optional<std::vector<Interval>> here;
    for (auto boundary : {WindowBoundary::Free, WindowBoundary::Periodic}) {
      std::vector<Interval> shrunk;
      for (const auto& g : window_gaps(line_window(t, omega, depth, boundary), margin / 8))
        if (g.length() > 2 * margin) shrunk.push_back({g.lo + margin, g.hi - margin});
      here = here ? intersect(*here, shrunk) : shrunk;
    }
    out.gap_counts.push_back(here->size());
    all = all ? intersect(*all, *here) : *here;
  }
  if (all) out.persistent = *all;
  return out;
}

}  // namespace spinal
