#pragma once

// Spinal action on finite words (tree vertices) and on eventually periodic
// boundary points, plus the index set I_xi and the W-certificate.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spinal/algebra.hpp"

namespace spinal {

/// Vertex of the rooted tree: letters v_0 v_1 ... v_{n-1}, each in 0..d-1.
using TreeWord = std::vector<int>;

inline std::uint64_t word_index(const TreeWord& w, int d) {
  std::uint64_t r = 0;
  for (int x : w) r = r * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(x);
  return r;
}

inline TreeWord index_word(std::uint64_t index, int d, int n) {
  TreeWord w(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::uint64_t>(d));
    index /= static_cast<std::uint64_t>(d);
  }
  return w;
}

inline std::string word_string(const TreeWord& w) {
  std::string s;
  for (int x : w) {
    if (x > 9) throw std::invalid_argument("digit encoding requires d <= 10");
    s.push_back(static_cast<char>('0' + x));
  }
  return s;
}

inline TreeWord parse_word(std::string_view text, int d) {
  TreeWord w;
  for (char c : text) {
    int v = c - '0';
    if (v < 0 || v >= d) throw std::invalid_argument("letter out of range in '" + std::string(text) + "'");
    w.push_back(v);
  }
  return w;
}

namespace detail {

/// Position of the letter a spine element modifies, i.e. n + 1 when the word
/// starts with (d-1)^n 0; nullopt when there is no such prefix inside `length`.
template <class LetterAt>
std::optional<std::size_t> spine_target(LetterAt&& letter, std::size_t length, int d) {
  std::size_t i = 0;
  while (i < length && letter(i) == d - 1) ++i;
  if (i + 1 < length && letter(i) == 0) return i + 1;
  return std::nullopt;
}

}  // namespace detail

/// Image of `w` under generator `g`. a^k adds k to v_0; b in B changes the
/// letter after a prefix (d-1)^n 0 by omega_n(b) and fixes every other word.
inline TreeWord act(const Generator& g, TreeWord w, const OmegaSequence& omega) {
  const int d = omega.modulus();
  if (w.empty()) return w;
  if (const auto* r = std::get_if<Rotor>(&g)) {
    w[0] = (w[0] + r->power) % d;
    return w;
  }
  const auto& b = std::get<Spine>(g).element;
  auto pos = detail::spine_target([&](std::size_t i) { return w[i]; }, w.size(), d);
  if (pos) {
    const int n = static_cast<int>(*pos) - 1;
    w[*pos] = (w[*pos] + omega.at(static_cast<std::size_t>(n)).apply(b)) % d;
  }
  return w;
}

/// Point prefix . preperiod . period^N of the boundary X^N.
///
/// The canonical form keeps the preperiod folded into the prefix, uses a
/// primitive period and the shortest possible prefix; two points are equal
/// iff their canonical forms are.
class BoundaryPoint {
public:
  BoundaryPoint() = default;

  BoundaryPoint(int d, TreeWord prefix, TreeWord preperiod, TreeWord period)
      : d_(d), prefix_(std::move(prefix)), period_(std::move(period)) {
    if (d_ < 2) throw std::invalid_argument("d must be >= 2");
    if (period_.empty()) throw std::invalid_argument("boundary point needs a nonempty period");
    prefix_.insert(prefix_.end(), preperiod.begin(), preperiod.end());
    for (int x : prefix_)
      if (x < 0 || x >= d_) throw std::invalid_argument("letter out of range");
    for (int x : period_)
      if (x < 0 || x >= d_) throw std::invalid_argument("letter out of range");
    canonicalize();
  }

  BoundaryPoint(int d, TreeWord prefix, TreeWord period) : BoundaryPoint(d, std::move(prefix), {}, std::move(period)) {}

  /// The constant point x^N.
  static BoundaryPoint constant(int d, int x) { return {d, {}, {x}}; }

  int arity() const { return d_; }
  const TreeWord& prefix() const { return prefix_; }
  const TreeWord& period() const { return period_; }

  int letter(std::size_t i) const {
    if (i < prefix_.size()) return prefix_[i];
    return period_[(i - prefix_.size()) % period_.size()];
  }

  /// First n letters.
  TreeWord head(std::size_t n) const {
    TreeWord w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = letter(i);
    return w;
  }

  /// sigma^n: drop the first n letters.
  BoundaryPoint shift(std::size_t n) const {
    TreeWord pre;
    for (std::size_t i = n; i < prefix_.size(); ++i) pre.push_back(prefix_[i]);
    TreeWord per(period_.size());
    const std::size_t start = std::max(n, prefix_.size());
    for (std::size_t i = 0; i < per.size(); ++i) per[i] = letter(start + i);
    return {d_, std::move(pre), std::move(per)};
  }

  /// v . this
  BoundaryPoint prepend(const TreeWord& v) const {
    TreeWord pre = v;
    pre.insert(pre.end(), prefix_.begin(), prefix_.end());
    return {d_, std::move(pre), period_};
  }

  /// Same point with letter i replaced.
  BoundaryPoint with_letter(std::size_t i, int value) const {
    TreeWord pre = head(std::max(i + 1, prefix_.size()));
    TreeWord per(period_.size());
    for (std::size_t j = 0; j < per.size(); ++j) per[j] = letter(pre.size() + j);
    pre[i] = value;
    return {d_, std::move(pre), std::move(per)};
  }

  /// Points in the same G-orbit are exactly the cofinal ones.
  bool cofinal_with(const BoundaryPoint& o) const {
    if (d_ != o.d_) return false;
    const std::size_t start = std::max(prefix_.size(), o.prefix_.size());
    const std::size_t span = std::lcm(period_.size(), o.period_.size());
    for (std::size_t i = start; i < start + span; ++i)
      if (letter(i) != o.letter(i)) return false;
    return true;
  }

  /// Smallest r with sigma^r(xi) = (d-1)^N, if any.
  std::optional<std::size_t> spine_entry() const {
    if (period_.size() != 1 || period_[0] != d_ - 1) return std::nullopt;
    return prefix_.size();
  }

  /// `<prefix>|<preperiod>(<period>)`, canonical: empty preperiod.
  std::string to_string() const { return word_string(prefix_) + "|(" + word_string(period_) + ")"; }

  static BoundaryPoint parse(std::string_view text, int d) {
    const auto bar = text.find('|');
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (bar == std::string_view::npos || open == std::string_view::npos || close == std::string_view::npos ||
        open < bar || close != text.size() - 1 || close <= open + 1)
      throw std::invalid_argument("boundary point expects <prefix>|<preperiod>(<period>), got '" +
                                  std::string(text) + "'");
    return {d, parse_word(text.substr(0, bar), d), parse_word(text.substr(bar + 1, open - bar - 1), d),
            parse_word(text.substr(open + 1, close - open - 1), d)};
  }

  bool operator==(const BoundaryPoint&) const = default;
  auto operator<=>(const BoundaryPoint&) const = default;

private:
  void canonicalize() {
    // primitive period
    const std::size_t p = period_.size();
    for (std::size_t q = 1; q <= p; ++q) {
      if (p % q) continue;
      bool ok = true;
      for (std::size_t i = q; i < p && ok; ++i) ok = period_[i] == period_[i - q];
      if (ok) {
        period_.resize(q);
        break;
      }
    }
    // absorb trailing prefix letters into the period by rotation
    while (!prefix_.empty() && prefix_.back() == period_.back()) {
      prefix_.pop_back();
      std::rotate(period_.rbegin(), period_.rbegin() + 1, period_.rend());
    }
  }

  int d_ = 2;
  TreeWord prefix_;
  TreeWord period_{0};
};

/// Image of a boundary point; the spine scan is finite because a point whose
/// tail is (d-1)^N is fixed by B.
inline BoundaryPoint act_boundary(const Generator& g, const BoundaryPoint& xi, const OmegaSequence& omega) {
  const int d = omega.modulus();
  if (xi.arity() != d) throw std::invalid_argument("boundary point arity differs from omega");
  if (const auto* r = std::get_if<Rotor>(&g)) return xi.with_letter(0, (xi.letter(0) + r->power) % d);
  const auto& b = std::get<Spine>(g).element;
  // A run of d-1 longer than prefix + period means the tail is (d-1)^N.
  const std::size_t horizon = xi.prefix().size() + xi.period().size() + 2;
  std::size_t i = 0;
  while (i < horizon && xi.letter(i) == d - 1) ++i;
  if (i == horizon || xi.letter(i) != 0) return xi;
  const std::size_t pos = i + 1;
  return xi.with_letter(pos, (xi.letter(pos) + omega.at(i).apply(b)) % d);
}

/// n is in I_xi iff no (d-1)^r 0 is a prefix of sigma^n(xi).
inline bool i_xi_contains(const BoundaryPoint& xi, std::size_t n) {
  const int d = xi.arity();
  const std::size_t horizon = std::max(n, xi.prefix().size()) + xi.period().size() + 1;
  for (std::size_t i = n; i < horizon; ++i) {
    const int x = xi.letter(i);
    if (x == d - 1) continue;
    return x != 0;
  }
  return true;  // tail is (d-1)^N
}

/// Same test on a finite prefix; nullopt when the prefix ends before deciding.
inline std::optional<bool> i_prefix_contains(const TreeWord& w, std::size_t n, int d) {
  for (std::size_t i = n; i < w.size(); ++i) {
    if (w[i] == d - 1) continue;
    return w[i] != 0;
  }
  return std::nullopt;
}

/// All k <= bound with k and k+1 in I_xi.
inline std::vector<std::size_t> w_certificate(const BoundaryPoint& xi, std::size_t bound) {
  std::vector<std::size_t> out;
  bool prev = i_xi_contains(xi, 0);
  for (std::size_t k = 0; k <= bound; ++k) {
    const bool next = i_xi_contains(xi, k + 1);
    if (prev && next) out.push_back(k);
    prev = next;
  }
  return out;
}

/// First k with k, k+1 in I_xi decidable from the prefix alone (k + 1 < |w|).
inline std::optional<std::size_t> prefix_w_witness(const TreeWord& w, int d) {
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    auto a = i_prefix_contains(w, k, d);
    auto b = i_prefix_contains(w, k + 1, d);
    if (a && b && *a && *b) return k;
  }
  return std::nullopt;
}

}  // namespace spinal
