#include <gtest/gtest.h>

#include <random>

#include "spinal/closed_form.hpp"

using namespace spinal;

namespace {

// Eigenvalues of small level graphs from an external dense solver, frozen.
const std::vector<double> kGrigorchukLevel3 = {-0.4494831629829533, -0.3090169943749474, -0.11840643955197531,
                                               0.5, 0.6184064395519756, 0.8090169943749473,
                                               0.9494831629829528, 1.0};
const std::vector<double> kFabrykowskiGuptaLevel3Distinct = {-0.476700150629, -0.362372435696, -0.221069942871,
                                                             0.25, 0.721069942871, 0.862372435696,
                                                             0.976700150629, 1.0};
const std::vector<std::uint64_t> kFabrykowskiGuptaLevel3Mult = {2, 4, 2, 10, 2, 4, 2, 1};
const std::vector<double> kD4Level2 = {-0.2440169358562924, 1.0 / 3, 0.910683602522959, 1.0};
const std::vector<std::uint64_t> kD4Level2Mult = {3, 9, 3, 1};

struct Cluster {
  double value;
  std::uint64_t count;
};

std::vector<Cluster> clusters(const std::vector<double>& sorted, double tol) {
  std::vector<Cluster> out;
  for (double x : sorted) {
    if (!out.empty() && x - out.back().value <= tol) {
      ++out.back().count;
    } else {
      out.push_back({x, 1});
    }
  }
  return out;
}

}  // namespace

TEST(FMap, Preimages) {
  auto [p, q] = f_preimages(0, 3);
  EXPECT_NEAR(p, 2.449489742783178, 1e-15);
  EXPECT_NEAR(q, -2.449489742783178, 1e-15);
  auto [r, s] = f_preimages(0, 2);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s, -std::sqrt(2.0), 1e-15);
  auto [u, v] = f_preimages(-6, 3);
  EXPECT_EQ(u, 0.0);
  EXPECT_EQ(v, 0.0);
  EXPECT_THROW(f_preimages(-7, 3), std::domain_error);
}

TEST(Psi, KnownPreimages) {
  for (int d = 2; d <= 5; ++d)
    for (int m = 1; m <= 3; ++m) {
      const double S = spinal_set_size(d, m);
      auto [p, q] = psi_preimages(d, d, m);
      EXPECT_NEAR(p, 1.0, 1e-14);
      EXPECT_NEAR(q, -2.0 / S, 1e-14);
      auto [r, s] = psi_preimages(-d * (d - 1.0), d, m);
      EXPECT_NEAR(r, (S - d) / S, 1e-14);
      EXPECT_NEAR(s, (d - 2) / S, 1e-14);
      EXPECT_NEAR(psi(p, d, m), d, 1e-12);
    }
  auto [a, b] = psi_preimages(0, 3, 1);
  EXPECT_NEAR(a, (1 + std::sqrt(6.0)) / 4, 1e-15);
  EXPECT_NEAR(b, (1 - std::sqrt(6.0)) / 4, 1e-15);
  EXPECT_NEAR(a, 0.8623724356957945, 1e-15);
  EXPECT_THROW(psi_preimages(-100, 3, 1), std::domain_error);
}

TEST(PreimageTree, BoundsAndDistinctness) {
  for (int d : {3, 4}) {
    const auto tree = preimage_tree(d, 10);
    std::vector<double> all;
    for (int k = 0; k <= 10; ++k) {
      ASSERT_EQ(tree[static_cast<std::size_t>(k)].size(), std::size_t{1} << k);
      for (const auto& node : tree[static_cast<std::size_t>(k)]) {
        EXPECT_LE(std::abs(node.value), d);
        EXPECT_EQ(node.depth, k);
        if (k > 0) {
          // F maps a node to its parent
          double parent = 0.0;
          for (const auto& p : tree[static_cast<std::size_t>(k - 1)])
            if (p.signs == node.signs.substr(0, static_cast<std::size_t>(k - 1))) parent = p.value;
          if (k < 8) EXPECT_NEAR(f_map(node.value, d), parent, 1e-12);
        }
        all.push_back(node.value);
      }
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GT(all[i] - all[i - 1], 1e-12);
  }
}

TEST(LevelSpectrum, SmallCases) {
  const auto s0 = level_spectrum(3, 1, 0);
  ASSERT_EQ(s0.entries.size(), 1u);
  EXPECT_EQ(s0.entries[0].value, 1.0);
  for (int m : {1, 2, 3}) {
    const auto s1 = level_spectrum(2, m, 1);
    ASSERT_EQ(s1.entries.size(), 2u);
    EXPECT_EQ(s1.entries[1].value, (std::pow(2.0, m) - 2) / std::pow(2.0, m));
    EXPECT_EQ(s1.entries[1].multiplicity, 1u);
  }
  const auto s2 = level_spectrum(3, 1, 2);
  const auto c = clusters(s2.expanded(), 1e-12);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_NEAR(c[0].value, -0.3623724356957945, 1e-14);
  EXPECT_EQ(c[0].count, 2u);
  EXPECT_NEAR(c[1].value, 0.25, 1e-15);
  EXPECT_EQ(c[1].count, 4u);
  EXPECT_EQ(c[2].count, 2u);
  EXPECT_EQ(c[3].count, 1u);
}

TEST(LevelSpectrum, MatchesFrozenExternalEigenvalues) {
  const auto g = level_spectrum(2, 2, 3).expanded();
  ASSERT_EQ(g.size(), kGrigorchukLevel3.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], kGrigorchukLevel3[i], 1e-13);

  const auto fg = clusters(level_spectrum(3, 1, 3).expanded(), 1e-9);
  ASSERT_EQ(fg.size(), kFabrykowskiGuptaLevel3Distinct.size());
  for (std::size_t i = 0; i < fg.size(); ++i) {
    EXPECT_NEAR(fg[i].value, kFabrykowskiGuptaLevel3Distinct[i], 1e-11);
    EXPECT_EQ(fg[i].count, kFabrykowskiGuptaLevel3Mult[i]);
  }

  const auto d4 = clusters(level_spectrum(4, 1, 2).expanded(), 1e-9);
  ASSERT_EQ(d4.size(), kD4Level2.size());
  for (std::size_t i = 0; i < d4.size(); ++i) {
    EXPECT_NEAR(d4[i].value, kD4Level2[i], 1e-14);
    EXPECT_EQ(d4[i].count, kD4Level2Mult[i]);
  }
}

TEST(LevelSpectrum, MultiplicitySumAndRange) {
  for (int d = 2; d <= 5; ++d)
    for (int m = 1; m <= 3; ++m)
      for (int n = 0; std::pow(d, n) <= 1e5; ++n) {
        const auto sp = level_spectrum(d, m, n);
        EXPECT_EQ(sp.total_multiplicity(), static_cast<std::uint64_t>(std::llround(std::pow(d, n))));
        for (const auto& e : sp.entries) {
          EXPECT_GE(e.value, -1.0);
          EXPECT_LE(e.value, 1.0);
        }
      }
}

TEST(LevelSpectrum, NestedAcrossLevels) {
  for (int d : {2, 3, 4}) {
    for (int n = 0; n < 6; ++n) {
      auto lower = level_spectrum(d, 2, n).expanded();
      auto upper = level_spectrum(d, 2, n + 1).expanded();
      for (double x : lower) {
        auto it = std::lower_bound(upper.begin(), upper.end(), x - 1e-12);
        ASSERT_NE(it, upper.end());
        EXPECT_LE(std::abs(*it - x), 1e-12);
      }
    }
  }
}

TEST(LevelSpectrum, OracleAgreement) {
  for (const auto& p : {presets::grigorchuk(), presets::fabrykowski_gupta(),
                        SpinalParams{3, 2, OmegaSequence::parse("per:1,0;0,1", 3)},
                        SpinalParams{4, 1, OmegaSequence::parse("per:1;3", 4)}}) {
    for (int n = 0; std::pow(p.d, n) <= 81; ++n) {
      const auto oracle = symmetric_eigenvalues(markov_dense(build_level_graph(p, n)));
      const auto closed = level_spectrum(p, n).expanded();
      ASSERT_EQ(oracle.size(), closed.size());
      for (std::size_t i = 0; i < closed.size(); ++i) EXPECT_NEAR(oracle[i], closed[i], 1e-10);
    }
  }
}

TEST(LevelSpectrum, OmegaIndependence) {
  const SpinalParams a = presets::grigorchuk();
  const SpinalParams b{2, 2, OmegaSequence::parse("pre:1,1|per:0,1;1,0", 2)};
  for (int n = 0; n <= 6; ++n) {
    EXPECT_EQ(level_spectrum(a, n), level_spectrum(b, n));
    const auto ea = symmetric_eigenvalues(markov_dense(build_level_graph(a, n)));
    const auto eb = symmetric_eigenvalues(markov_dense(build_level_graph(b, n)));
    for (std::size_t i = 0; i < ea.size(); ++i) EXPECT_NEAR(ea[i], eb[i], 1e-10);
  }
}

TEST(LevelSpectrum, TagsAndCollisions) {
  const auto sp = level_spectrum(3, 1, 4);
  for (const auto& e : sp.entries) {
    EXPECT_EQ(EigenTag::parse(e.tag.to_string()), e.tag);
    if (e.tag.kind == EigenTag::Kind::Node) {
      const auto tree = preimage_tree(3, e.tag.depth);
      for (const auto& node : tree.back())
        if (node.signs == e.tag.signs) EXPECT_EQ(tagged_value(e.tag, 3, 1, node.value), e.value);
    }
  }
  EXPECT_TRUE(detect_collisions(sp).empty());
  EXPECT_TRUE(detect_collisions(level_spectrum(2, 2, 12)).empty());
  LevelSpectrum dup{3, 1, 1, {{0.5, 1, {}}, {0.5, 2, {EigenTag::Kind::Beta, 0, {}, 0}}}};
  EXPECT_EQ(detect_collisions(dup).size(), 1u);
  EXPECT_THROW(EigenTag::parse("node:1"), std::invalid_argument);
}

TEST(BoundarySpectrum, BinaryBands) {
  const auto b2 = boundary_spectrum(2, 2, 10);
  ASSERT_EQ(b2.intervals.size(), 2u);
  EXPECT_EQ(b2.intervals[0], (Interval{-0.5, 0.0}));
  EXPECT_EQ(b2.intervals[1], (Interval{0.5, 1.0}));
  const auto b3 = boundary_spectrum(2, 3, 10);
  EXPECT_EQ(b3.intervals[0], (Interval{-0.25, 0.0}));
  EXPECT_EQ(b3.intervals[1], (Interval{0.75, 1.0}));
  for (double x : b3.limit_sample) EXPECT_TRUE(b3.intervals[0].contains(x, 1e-12) || b3.intervals[1].contains(x, 1e-12));
}

TEST(BoundarySpectrum, TernaryCantorSample) {
  const auto b = boundary_spectrum(3, 1, 12);
  EXPECT_EQ(b.kind, BoundarySpectrum::Kind::CantorPlusIsolated);
  EXPECT_EQ(b.limit_sample.size(), std::size_t{1} << 13);
  EXPECT_TRUE(std::binary_search(b.isolated.begin(), b.isolated.end(), 0.25));
  for (double x : b.limit_sample) {
    EXPECT_GE(x, -1.0);
    EXPECT_LE(x, 1.0);
  }
  // isolated values accumulate on the limit set but never lie on it
  std::vector<double> all = b.isolated;
  all.insert(all.end(), b.limit_sample.begin(), b.limit_sample.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
  // deeper isolated values sit closer to the limit sample
  auto gap = [&](double x) {
    auto it = std::lower_bound(b.limit_sample.begin(), b.limit_sample.end(), x);
    double dist = 1.0;
    if (it != b.limit_sample.end()) dist = std::min(dist, *it - x);
    if (it != b.limit_sample.begin()) dist = std::min(dist, x - *std::prev(it));
    return dist;
  };
  EXPECT_GT(gap(0.25), 1e-3);
}

TEST(Schur, DeterminantExamples) {
  const auto fg = presets::fabrykowski_gupta();
  EXPECT_NEAR(qn_determinant_factored(1, 0, 3, 1, 0).value(), 4.0, 1e-12);
  EXPECT_NEAR(qn_determinant_factored(1, 0, 3, 1, 1).value(), 4.0, 1e-12);
  EXPECT_NEAR(qn_determinant_direct(1, 0, fg, 1).value(), 4.0, 1e-12);
  EXPECT_NEAR(qn_determinant_direct(0.7, 0.3, fg, 0).value(), 2 + 2 * 0.7 - 0.3, 1e-14);
  const double S = fg.generator_count();
  for (int n = 0; n <= 4; ++n) EXPECT_EQ(qn_determinant_direct(1, S, fg, n).sign, 0) << n;
  for (int n = 1; n <= 4; ++n) EXPECT_EQ(qn_determinant_factored(1, std::pow(3, 1) - 2, 3, 1, n).sign, 0);
  EXPECT_EQ(qn_determinant_direct(1, 3 - 2, fg, 3).sign, 0);
}

TEST(Schur, FactorizationMatchesDirect) {
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const auto& p : {presets::fabrykowski_gupta(), SpinalParams{4, 1, OmegaSequence::parse("per:1;3", 4)},
                        SpinalParams{3, 2, OmegaSequence::parse("per:1,0;0,1", 3)}}) {
    const SchurPolynomials P{p.d, p.m};
    for (int trial = 0; trial < 10; ++trial) {
      double l, mu;
      do {
        l = u(rng);
        mu = u(rng);
      } while (std::abs(P.alpha(l, mu)) < 1e-6 || std::abs(P.beta(l, mu)) < 1e-6 || std::abs(P.gamma(l, mu)) < 1e-6);
      for (int n = 0; std::pow(p.d, n) <= 81; ++n) {
        const auto a = qn_determinant_factored(l, mu, p.d, p.m, n);
        const auto b = qn_determinant_direct(l, mu, p, n);
        EXPECT_EQ(a.sign, b.sign);
        EXPECT_NEAR(a.log_abs, b.log_abs, 1e-8 * std::max(1.0, std::abs(b.log_abs)));
      }
    }
  }
}

TEST(Schur, RecurrenceAndHSplitting) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int d : {3, 4}) {
    const SchurPolynomials P{d, 1};
    const SpinalParams params{d, 1, OmegaSequence::parse("per:1", d)};
    int checked = 0;
    while (checked < 100) {
      const double l = u(rng), mu = u(rng);
      const double a = P.alpha(l, mu), b = P.beta(l, mu), g = P.gamma(l, mu);
      if (std::abs(a) < 1e-6 || std::abs(b) < 1e-6 || std::abs(g) < 1e-6) continue;
      ++checked;
      const auto [l2, mu2] = P.substitute(l, mu);
      for (int n = 2; n <= 4; ++n) {
        const auto lhs = qn_determinant_direct(l, mu, params, n);
        const auto rhs = qn_determinant_direct(l2, mu2, params, n - 1);
        const double e = std::pow(static_cast<double>(d), n - 2);
        const double log_factor = e * (std::log(std::abs(a)) + (d * d - 3 * d + 1) * std::log(std::abs(b)) +
                                       (d - 1) * std::log(std::abs(g)));
        EXPECT_NEAR(lhs.log_abs, rhs.log_abs + log_factor, 1e-8 * std::max(1.0, std::abs(lhs.log_abs)));
      }
      const auto tree = preimage_tree(d, 3);
      for (int k = 0; k <= 3; ++k)
        for (const auto& node : tree[static_cast<std::size_t>(k)]) {
          auto [y1, y2] = f_preimages(node.value, d);
          const double lhs = P.H(node.value, l2, mu2) * a * g / b;
          const double rhs = P.H(y1, l, mu) * P.H(y2, l, mu);
          EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, std::abs(rhs)));
        }
    }
  }
}

TEST(LevelBlocks, Lemma32Identities) {
  for (int d : {2, 3, 4}) {
    for (int n = 1; std::pow(d, n) <= 81; ++n) {
      const auto [A, B] = recursive_level_blocks(d, 1, n);
      const auto A2 = A * A;
      const auto rhs = static_cast<double>(d - 2) * A + static_cast<double>(d - 1) * DenseMatrix::identity(A.order());
      EXPECT_EQ(A2.max_abs_diff(rhs), 0.0);
      const double r = 0.7, s = 2.3;
      const auto det = determinant(r * A + s * DenseMatrix::identity(A.order()));
      const double expected = std::pow(static_cast<double>(d), n - 1) *
                              ((d - 1) * std::log(std::abs(s - r)) + std::log(std::abs(s + (d - 1) * r)));
      EXPECT_NEAR(det.log_abs, expected, 1e-10 * std::abs(expected));
    }
  }
}
