#pragma once

// Arithmetic in A = Z/dZ and B = (Z/dZ)^m, epimorphisms B -> A and the
// eventually periodic omega-sequences that parametrize a spinal group.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace spinal {

/// Raised when a requested object would exceed a configured size budget.
class budget_error : public std::length_error {
public:
  using std::length_error::length_error;
};

namespace detail {

inline int mod(long long x, int d) {
  long long r = x % d;
  return static_cast<int>(r < 0 ? r + d : r);
}

inline std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > limit / base) throw budget_error("power exceeds budget");
    r *= base;
  }
  return r;
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline int parse_int(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty integer field");
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad integer field '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace detail

/// An element of B = (Z/dZ)^m, entries always reduced.
class ResidueVector {
public:
  ResidueVector() = default;

  ResidueVector(int modulus, std::vector<int> entries) : modulus_(modulus), entries_(std::move(entries)) {
    if (modulus_ < 2) throw std::invalid_argument("modulus must be >= 2");
    if (entries_.empty()) throw std::invalid_argument("residue vector needs m >= 1 entries");
    for (auto& e : entries_) e = detail::mod(e, modulus_);
  }

  static ResidueVector zero(int modulus, int m) { return {modulus, std::vector<int>(static_cast<std::size_t>(m), 0)}; }

  /// Element number `index` of B in lexicographic order (first entry most significant).
  static ResidueVector from_index(std::uint64_t index, int modulus, int m) {
    std::vector<int> e(static_cast<std::size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      e[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::uint64_t>(modulus));
      index /= static_cast<std::uint64_t>(modulus);
    }
    return {modulus, std::move(e)};
  }

  std::uint64_t index() const {
    std::uint64_t r = 0;
    for (int e : entries_) r = r * static_cast<std::uint64_t>(modulus_) + static_cast<std::uint64_t>(e);
    return r;
  }

  int modulus() const { return modulus_; }
  int dimension() const { return static_cast<int>(entries_.size()); }
  const std::vector<int>& entries() const { return entries_; }
  int operator[](std::size_t i) const { return entries_[i]; }

  bool is_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](int e) { return e == 0; });
  }

  ResidueVector operator+(const ResidueVector& o) const {
    check_compatible(o);
    auto e = entries_;
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.entries_[i];
    return {modulus_, std::move(e)};
  }

  ResidueVector operator-() const {
    auto e = entries_;
    for (auto& x : e) x = -x;
    return {modulus_, std::move(e)};
  }

  ResidueVector operator-(const ResidueVector& o) const { return *this + (-o); }

  bool operator==(const ResidueVector&) const = default;
  auto operator<=>(const ResidueVector&) const = default;

  /// Digits in base d, e.g. "01"; only defined for d <= 10.
  std::string digits() const {
    if (modulus_ > 10) throw std::invalid_argument("digit encoding requires d <= 10");
    std::string s;
    for (int e : entries_) s.push_back(static_cast<char>('0' + e));
    return s;
  }

  static ResidueVector parse_digits(std::string_view text, int modulus) {
    std::vector<int> e;
    for (char c : text) {
      int v = c - '0';
      if (v < 0 || v >= modulus) throw std::invalid_argument("digit out of range in '" + std::string(text) + "'");
      e.push_back(v);
    }
    return {modulus, std::move(e)};
  }

  void check_compatible(const ResidueVector& o) const {
    if (modulus_ != o.modulus_ || entries_.size() != o.entries_.size())
      throw std::invalid_argument("residue vectors of different shape");
  }

private:
  int modulus_ = 2;
  std::vector<int> entries_;
};

/// A homomorphism B -> A given by coefficients: b |-> sum c_i b_i mod d.
class Epimorphism {
public:
  Epimorphism() = default;
  explicit Epimorphism(ResidueVector coeffs) : coeffs_(std::move(coeffs)) {}
  Epimorphism(int modulus, std::vector<int> coeffs) : coeffs_(modulus, std::move(coeffs)) {}

  const ResidueVector& coeffs() const { return coeffs_; }
  int modulus() const { return coeffs_.modulus(); }
  int dimension() const { return coeffs_.dimension(); }

  int apply(const ResidueVector& b) const {
    if (b.dimension() != coeffs_.dimension() || b.modulus() != coeffs_.modulus())
      throw std::invalid_argument("epimorphism applied to vector of wrong dimension");
    long long s = 0;
    for (int i = 0; i < b.dimension(); ++i)
      s += static_cast<long long>(coeffs_[static_cast<std::size_t>(i)]) * b[static_cast<std::size_t>(i)];
    return detail::mod(s, modulus());
  }

  bool in_kernel(const ResidueVector& b) const { return apply(b) == 0; }

  /// Surjective iff gcd(c_1, ..., c_m, d) = 1.
  bool is_surjective() const {
    int g = modulus();
    for (int c : coeffs_.entries()) g = std::gcd(g, c);
    return g == 1;
  }

  bool operator==(const Epimorphism&) const = default;
  auto operator<=>(const Epimorphism&) const = default;

private:
  ResidueVector coeffs_;
};

/// Elements of B enumerated exhaustively; refuses groups larger than `limit`.
inline std::vector<ResidueVector> enumerate_group(int d, int m, std::uint64_t limit = 1u << 24) {
  const auto order = detail::checked_pow(static_cast<std::uint64_t>(d), m, limit);
  std::vector<ResidueVector> out;
  out.reserve(order);
  for (std::uint64_t i = 0; i < order; ++i) out.push_back(ResidueVector::from_index(i, d, m));
  return out;
}

/// Eventually periodic sequence omega_0 omega_1 ... of epimorphisms.
class OmegaSequence {
public:
  OmegaSequence() = default;

  OmegaSequence(std::vector<Epimorphism> preperiod, std::vector<Epimorphism> period)
      : preperiod_(std::move(preperiod)), period_(std::move(period)) {
    if (period_.empty()) throw std::invalid_argument("omega period must be nonempty");
    const auto& ref = period_.front();
    auto same_shape = [&](const Epimorphism& e) {
      return e.modulus() == ref.modulus() && e.dimension() == ref.dimension();
    };
    if (!std::all_of(preperiod_.begin(), preperiod_.end(), same_shape) ||
        !std::all_of(period_.begin(), period_.end(), same_shape))
      throw std::invalid_argument("omega entries have inconsistent (d, m)");
  }

  explicit OmegaSequence(std::vector<Epimorphism> period) : OmegaSequence({}, std::move(period)) {}

  const Epimorphism& at(std::size_t n) const {
    if (n < preperiod_.size()) return preperiod_[n];
    return period_[(n - preperiod_.size()) % period_.size()];
  }

  int modulus() const { return period_.front().modulus(); }
  int dimension() const { return period_.front().dimension(); }
  const std::vector<Epimorphism>& preperiod() const { return preperiod_; }
  const std::vector<Epimorphism>& period() const { return period_; }

  bool all_surjective() const {
    auto ok = [](const Epimorphism& e) { return e.is_surjective(); };
    return std::all_of(preperiod_.begin(), preperiod_.end(), ok) && std::all_of(period_.begin(), period_.end(), ok);
  }

  /// For every i, the intersection of Ker(omega_j), j >= i, is trivial.
  /// Every tail contains a full period, and the preperiod only adds constraints,
  /// so checking the window i..i+|pre|+|per| for i <= |pre| decides the condition.
  bool satisfies_kernel_condition() const {
    if (!all_surjective()) throw std::invalid_argument("omega contains a non-surjective map");
    const auto group = enumerate_group(modulus(), dimension());
    const std::size_t window = preperiod_.size() + period_.size();
    for (std::size_t i = 0; i <= preperiod_.size(); ++i) {
      for (const auto& b : group) {
        if (b.is_zero()) continue;
        bool in_all = true;
        for (std::size_t j = i; j <= i + window && in_all; ++j) in_all = at(j).in_kernel(b);
        if (in_all) return false;
      }
    }
    return true;
  }

  /// `pre:<v;v;...>|per:<v;v;...>` with each v a comma separated coefficient list.
  std::string to_string() const {
    auto list = [](const std::vector<Epimorphism>& eps) {
      std::string s;
      for (std::size_t i = 0; i < eps.size(); ++i) {
        if (i) s += ';';
        const auto& c = eps[i].coeffs().entries();
        for (std::size_t j = 0; j < c.size(); ++j) {
          if (j) s += ',';
          s += std::to_string(c[j]);
        }
      }
      return s;
    };
    std::string out;
    if (!preperiod_.empty()) out = "pre:" + list(preperiod_) + "|";
    return out + "per:" + list(period_);
  }

  static OmegaSequence parse(std::string_view text, int d) {
    auto parse_list = [d](std::string_view body) {
      std::vector<Epimorphism> eps;
      if (body.empty()) return eps;
      for (const auto& v : detail::split(body, ';')) {
        std::vector<int> coeffs;
        for (const auto& c : detail::split(v, ',')) {
          int x = detail::parse_int(c);
          if (x >= d) throw std::invalid_argument("coefficient " + c + " not a digit base " + std::to_string(d));
          coeffs.push_back(x);
        }
        eps.emplace_back(d, std::move(coeffs));
      }
      return eps;
    };
    std::vector<Epimorphism> pre, per;
    bool have_period = false;
    for (const auto& part : detail::split(text, '|')) {
      if (part.rfind("pre:", 0) == 0) {
        pre = parse_list(std::string_view(part).substr(4));
      } else if (part.rfind("per:", 0) == 0) {
        per = parse_list(std::string_view(part).substr(4));
        have_period = true;
      } else {
        throw std::invalid_argument("omega encoding expects pre:...|per:..., got '" + part + "'");
      }
    }
    if (!have_period || per.empty()) throw std::invalid_argument("omega encoding needs a nonempty per: block");
    return {std::move(pre), std::move(per)};
  }

  bool operator==(const OmegaSequence&) const = default;

private:
  std::vector<Epimorphism> preperiod_;
  std::vector<Epimorphism> period_;
};

/// Generator a^k of the rooted cyclic group A, 1 <= k <= d-1.
struct Rotor {
  int power = 1;
  bool operator==(const Rotor&) const = default;
};

/// Nontrivial element of the spine group B.
struct Spine {
  ResidueVector element;
  bool operator==(const Spine&) const = default;
};

using Generator = std::variant<Rotor, Spine>;

inline bool is_rotor(const Generator& g) { return std::holds_alternative<Rotor>(g); }

inline Generator inverse(const Generator& g, int d) {
  if (const auto* r = std::get_if<Rotor>(&g)) return Rotor{d - r->power};
  return Spine{-std::get<Spine>(g).element};
}

/// Text label used by the edge-list export: `a^k` or `b:<digits>`.
inline std::string label(const Generator& g) {
  if (const auto* r = std::get_if<Rotor>(&g)) return "a^" + std::to_string(r->power);
  return "b:" + std::get<Spine>(g).element.digits();
}

/// The spinal generating set S = (A u B) \ {1}: rotors first, then B in index order.
inline std::vector<Generator> spinal_generators(int d, int m) {
  std::vector<Generator> s;
  for (int k = 1; k < d; ++k) s.emplace_back(Rotor{k});
  for (const auto& b : enumerate_group(d, m))
    if (!b.is_zero()) s.emplace_back(Spine{b});
  return s;
}

/// |S| = d^m + d - 2.
inline int spinal_set_size(int d, int m) {
  return static_cast<int>(detail::checked_pow(static_cast<std::uint64_t>(d), m, 1u << 30)) + d - 2;
}

/// (d, m, omega): everything needed to specify a spinal group.
struct SpinalParams {
  int d = 2;
  int m = 1;
  OmegaSequence omega;

  SpinalParams() = default;
  SpinalParams(int d_, int m_, OmegaSequence omega_) : d(d_), m(m_), omega(std::move(omega_)) {}

  int generator_count() const { return spinal_set_size(d, m); }

  /// Throws std::invalid_argument unless omega is a valid element of Omega_{d,m}.
  void validate() const {
    if (d < 2) throw std::invalid_argument("d must be >= 2");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (omega.modulus() != d || omega.dimension() != m)
      throw std::invalid_argument("omega does not match (d, m)");
    if (!omega.all_surjective()) throw std::invalid_argument("omega contains a non-surjective map");
    if (!omega.satisfies_kernel_condition())
      throw std::invalid_argument("omega violates the kernel condition: joint kernel over a tail is nontrivial");
  }
};

namespace presets {

/// First Grigorchuk group: d = 2, m = 2, omega = (pi_d pi_c pi_b)^N.
inline SpinalParams grigorchuk() { return {2, 2, OmegaSequence::parse("per:0,1;1,1;1,0", 2)}; }

/// Fabrykowski-Gupta group: d = 3, m = 1, constant omega = id.
inline SpinalParams fabrykowski_gupta() { return {3, 1, OmegaSequence::parse("per:1", 3)}; }

/// Sunic group G_m on the binary tree: omega_n = alpha rho^n with alpha = e_m^* and
/// rho the cyclic shift b_i -> b_{i+1}, b_m -> b_1, so omega_n = e^*_{m-n mod m}.
inline SpinalParams sunic_gm(int m) {
  if (m < 2) throw std::invalid_argument("G_m needs m >= 2");
  std::vector<Epimorphism> period;
  for (int n = 0; n < m; ++n) {
    std::vector<int> c(static_cast<std::size_t>(m), 0);
    c[static_cast<std::size_t>(detail::mod(m - 1 - n, m))] = 1;
    period.emplace_back(2, std::move(c));
  }
  return {2, m, OmegaSequence(std::move(period))};
}

/// Grigorchuk-Erschler group G_2.
inline SpinalParams erschler() { return sunic_gm(2); }

/// Grigorchuk's overgroup G_3.
inline SpinalParams overgroup() { return sunic_gm(3); }

}  // namespace presets

}  // namespace spinal
