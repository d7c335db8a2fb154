#include <gtest/gtest.h>

#include <cmath>

#include "spinal/eigenfunctions.hpp"

using namespace spinal;

namespace {

const EigenTag beta_tag{EigenTag::Kind::Beta, 0, {}, 0};

std::vector<SpinalParams> cases() {
  return {presets::fabrykowski_gupta(), SpinalParams{3, 2, OmegaSequence::parse("per:1,0;0,1", 3)},
          SpinalParams{4, 1, OmegaSequence::parse("per:1;3", 4)}};
}

std::uint64_t upow(int d, int n) { return static_cast<std::uint64_t>(std::llround(std::pow(d, n))); }

}  // namespace

TEST(BaseEigenbasis, FabrykowskiGuptaLevelOne) {
  const auto fg = presets::fabrykowski_gupta();
  const auto basis = base_eigenbasis(fg, beta_tag);
  EXPECT_DOUBLE_EQ(basis.lambda, 0.25);
  EXPECT_EQ(basis.birth_level, 1);
  ASSERT_EQ(basis.count(), 2u);
  ASSERT_EQ(basis.of(EigenClass::B).size(), 1u);
  ASSERT_EQ(basis.of(EigenClass::A).size(), 1u);
  EXPECT_TRUE(basis.of(EigenClass::C).empty());
  // f_0 antisymmetric under 0 <-> 1, f_1 under 1 <-> 2
  const auto& f0 = basis.of(EigenClass::B)[0];
  const auto& f1 = basis.of(EigenClass::A)[0];
  EXPECT_NEAR(f0.at(0), -f0.at(1), 1e-15);
  EXPECT_EQ(f0.at(2), 0.0);
  EXPECT_NEAR(f1.at(1), -f1.at(2), 1e-15);
  EXPECT_EQ(f1.at(0), 0.0);
  EXPECT_LE(level_residual(fg, 1, f0, 0.25), 1e-12);
  EXPECT_LE(level_residual(fg, 1, f1, 0.25), 1e-12);
}

TEST(BaseEigenbasis, AntisymmetryAndSupport) {
  for (const auto& p : cases()) {
    const int d = p.d;
    for (int N = 1; N <= 3; ++N)
      for (const auto& tag : birth_tags(d, p.m, N)) {
        const auto basis = base_eigenbasis(p, tag);
        ASSERT_EQ(basis.count(), static_cast<std::size_t>(d - 1));
        std::vector<SparseFunction> all;
        for (EigenClass c : {EigenClass::B, EigenClass::C, EigenClass::A})
          for (const auto& f : basis.of(c)) all.push_back(f);
        for (int i = 0; i + 1 < d; ++i) {
          const auto& f = all[static_cast<std::size_t>(i)];
          EXPECT_NEAR(f.norm(), 1.0, 1e-14);
          EXPECT_LE(f.support_size(), 2 * upow(d, N - 1));
          for (const auto& [w, x] : f.entries) {
            const int last = static_cast<int>(w % static_cast<std::uint64_t>(d));
            EXPECT_TRUE(last == i || last == i + 1);
            const std::uint64_t swapped = w - static_cast<std::uint64_t>(last) +
                                          static_cast<std::uint64_t>(last == i ? i + 1 : i);
            EXPECT_EQ(f.at(swapped), -x);
          }
          EXPECT_LE(level_residual(p, N, f, basis.lambda), 1e-10);
        }
      }
  }
}

TEST(BaseEigenbasis, SpanDoesNotDependOnSeed) {
  const auto p = SpinalParams{4, 1, OmegaSequence::parse("per:1;3", 4)};
  for (int N = 1; N <= 3; ++N)
    for (const auto& tag : birth_tags(4, 1, N)) {
      std::vector<std::vector<double>> vecs;
      const auto size = static_cast<std::size_t>(upow(4, N));
      for (std::uint64_t seed : {0u, 1u, 7u})
        for (const auto& cls : base_eigenbasis(p, tag, seed).classes)
          for (const auto& f : cls) vecs.push_back(f.dense(size));
      EXPECT_EQ(numerical_rank(vecs), 3u) << tag.to_string();
    }
}

TEST(BaseEigenbasis, Errors) {
  EXPECT_THROW(base_eigenbasis(presets::grigorchuk(), beta_tag), std::invalid_argument);
  EXPECT_THROW(base_eigenbasis(presets::fabrykowski_gupta(), EigenTag{}), std::invalid_argument);
  const auto fg = presets::fabrykowski_gupta();
  const auto level2 = symmetric_eigensystem(markov_dense(build_level_graph(fg, 2)));
  EXPECT_THROW(base_eigenbasis(fg, beta_tag, level2), std::invalid_argument);
  const EigenTag bogus{EigenTag::Kind::Node, 1, "x", 1};
  EXPECT_THROW(base_eigenbasis(fg, bogus), std::invalid_argument);
}

TEST(Propagation, CountsResidualsAndVanishing) {
  for (const auto& p : cases()) {
    const int d = p.d;
    const auto spectrum_at = [&](int n) { return level_spectrum(p, n); };
    for (int N = 1; N <= 3; ++N)
      for (const auto& tag : birth_tags(d, p.m, N)) {
        auto basis = base_eigenbasis(p, tag);
        for (int n = N; n <= 5 && upow(d, n) <= 1024; ++n) {
          if (n > N) {
            basis = propagate_eigenbasis(basis);
            EXPECT_EQ(basis.of(EigenClass::C).size(), static_cast<std::size_t>(d - 1));
          }
          ASSERT_EQ(basis.level, n);
          EXPECT_EQ(basis.count(), (d - 2) * upow(d, n - N) + 1);
          EXPECT_EQ(basis.of(EigenClass::A).size(), 1u);
          EXPECT_EQ(basis.of(EigenClass::B).size(), 1u);
          std::uint64_t mult = 0;
          for (const auto& e : spectrum_at(n).entries)
            if (e.tag == tag) mult = e.multiplicity;
          EXPECT_EQ(basis.count(), mult);

          const std::uint64_t top = upow(d, n) - 1;          // (d-1)^n
          const std::uint64_t marker = (top / d) * d;        // (d-1)^{n-1} 0
          for (int c = 0; c < 4; ++c)
            for (const auto& f : basis.classes[static_cast<std::size_t>(c)]) {
              EXPECT_LE(level_residual(p, n, f, basis.lambda), 1e-10);
              if (c != static_cast<int>(EigenClass::B)) EXPECT_EQ(f.at(marker), 0.0);
              if (c != static_cast<int>(EigenClass::A)) EXPECT_EQ(f.at(top), 0.0);
              const auto sz = f.support_size();
              EXPECT_TRUE(sz == 2 * upow(d, N - 1) || sz == 2 * upow(d, N)) << sz;
            }
        }
      }
  }
}

TEST(Propagation, OneStepCounts) {
  const auto p = SpinalParams{4, 1, OmegaSequence::parse("per:1;3", 4)};
  const auto next = propagate_eigenbasis(base_eigenbasis(p, beta_tag));
  EXPECT_EQ(next.of(EigenClass::D).size(), 4u * 1u);  // d (d - 3)
  EXPECT_EQ(next.of(EigenClass::C).size(), 3u);
  EXPECT_EQ(next.count(), 9u);
}

TEST(Propagation, FunctionsAreIndependent) {
  for (const auto& p : cases())
    for (int N = 1; N <= 2; ++N)
      for (const auto& tag : birth_tags(p.d, p.m, N)) {
        const int n = p.d == 3 ? 5 : 4;
        const auto basis = propagate_to(base_eigenbasis(p, tag), n);
        std::vector<std::vector<double>> vecs;
        for (const auto& cls : basis.classes)
          for (const auto& f : cls) vecs.push_back(f.dense(static_cast<std::size_t>(upow(p.d, n))));
        EXPECT_EQ(numerical_rank(vecs, 1e-8), basis.count());
      }
}

TEST(ExtendToBall, SupportsAndResiduals) {
  const auto fg = presets::fabrykowski_gupta();
  const auto xi = BoundaryPoint::constant(3, 1);
  const auto basis = propagate_to(base_eigenbasis(fg, beta_tag), 2);
  const auto ball = build_copy_ball(fg, xi, 2);
  const auto planted = extend_to_ball(basis, xi, ball);
  ASSERT_FALSE(planted.empty());
  for (const auto& p : planted) {
    const auto sz = p.f.support_size();
    EXPECT_TRUE(sz == 2 || sz == 6) << sz;
    EXPECT_LE(ball_residual(ball, p.f, 0.25), 1e-10);
  }
}

TEST(ExtendToBall, ClassBIsNotAnEigenfunction) {
  const auto fg = presets::fabrykowski_gupta();
  const auto xi = BoundaryPoint::constant(3, 1);
  const auto basis = propagate_to(base_eigenbasis(fg, beta_tag), 2);
  const auto ball = build_copy_ball(fg, xi, 2);
  const BoundaryPoint tail = xi.shift(2);
  SparseFunction g;
  for (const auto& [u, x] : basis.of(EigenClass::B)[0].entries)
    g.entries.emplace_back(*ball.index_of(tail.prepend(index_word(u, 3, 2))), x);
  std::sort(g.entries.begin(), g.entries.end());
  EXPECT_GT(ball_residual(ball, g, 0.25), 1e-3);
  for (const auto& p : extend_to_ball(basis, xi, ball)) EXPECT_NE(p.cls, EigenClass::B);
}

TEST(ExtendToBall, SpineTailIncludesClassA) {
  for (const auto& p : cases()) {
    const int d = p.d;
    const auto xi = BoundaryPoint::constant(d, d - 1);
    for (int N = 1; N <= 2; ++N)
      for (const auto& tag : birth_tags(d, p.m, N)) {
        const int R = N + 1;
        const auto basis = propagate_to(base_eigenbasis(p, tag), R);
        const auto ball = build_copy_ball(p, xi, R);
        bool has_a = false;
        for (const auto& f : extend_to_ball(basis, xi, ball)) {
          has_a |= f.cls == EigenClass::A;
          EXPECT_LE(ball_residual(ball, f.f, basis.lambda), 1e-10);
        }
        EXPECT_TRUE(has_a);
      }
  }
}

TEST(ExtendToBall, ClassAExcludedOutsideIXi) {
  const auto fg = presets::fabrykowski_gupta();
  const auto basis = base_eigenbasis(fg, beta_tag);
  const auto xi2 = BoundaryPoint::parse("20|(1)", 3);
  ASSERT_FALSE(i_xi_contains(xi2, 1));
  const auto ball = build_copy_ball(fg, xi2, 1);
  for (const auto& f : extend_to_ball(basis, xi2, ball)) EXPECT_NE(f.cls, EigenClass::A);
}

TEST(ExtendToBall, BallTooSmall) {
  const auto fg = presets::fabrykowski_gupta();
  const auto basis = propagate_to(base_eigenbasis(fg, beta_tag), 3);
  const auto ball = build_boundary_ball(fg, BoundaryPoint::constant(3, 1), 1);
  EXPECT_THROW(extend_to_ball(basis, BoundaryPoint::constant(3, 1), ball), std::invalid_argument);
}

TEST(Completeness, MassGrowsWithLevel) {
  const auto fg = presets::fabrykowski_gupta();
  const auto xi = BoundaryPoint::constant(3, 1);
  double prev = 0.0;
  for (int L = 3; L <= 5; ++L) {
    const auto rep = completeness_check(fg, xi, L);
    EXPECT_GT(rep.center_mass, prev) << L;
    EXPECT_LE(rep.center_mass, 1.0 + 1e-12);
    for (double m : rep.test_masses) EXPECT_LE(m, 1.0 + 1e-12);
    prev = rep.center_mass;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(AntisymmetricSpace, RankCount) {
  for (int n = 1; n <= 5; ++n) {
    const auto gens = antisymmetric_generators(3, n);
    std::vector<std::vector<double>> vecs;
    for (const auto& f : gens) vecs.push_back(f.dense(static_cast<std::size_t>(upow(3, n))));
    EXPECT_EQ(numerical_rank(vecs), upow(3, n - 1));
  }
  const auto gens4 = antisymmetric_generators(4, 3);
  std::vector<std::vector<double>> vecs;
  for (const auto& f : gens4) vecs.push_back(f.dense(64));
  EXPECT_EQ(numerical_rank(vecs), 2u * 16u);
}
