#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "spinal/algebra.hpp"

using namespace spinal;

TEST(Epimorphism, ApplyExamples) {
  EXPECT_EQ(Epimorphism(2, {0, 1}).apply(ResidueVector(2, {1, 0})), 0);
  EXPECT_EQ(Epimorphism(2, {1, 1}).apply(ResidueVector(2, {1, 1})), 0);
  EXPECT_EQ(Epimorphism(3, {1}).apply(ResidueVector(3, {2})), 2);
}

TEST(Epimorphism, ApplyRejectsDimensionMismatch) {
  EXPECT_THROW(Epimorphism(2, {0, 1}).apply(ResidueVector(2, {1})), std::invalid_argument);
  EXPECT_THROW(Epimorphism(3, {1}).apply(ResidueVector(2, {1})), std::invalid_argument);
}

TEST(Epimorphism, Surjectivity) {
  EXPECT_FALSE(Epimorphism(4, {2}).is_surjective());
  EXPECT_TRUE(Epimorphism(4, {2, 3}).is_surjective());
  EXPECT_FALSE(Epimorphism(2, {0, 0}).is_surjective());
  EXPECT_TRUE(Epimorphism(6, {2, 3}).is_surjective());
  EXPECT_FALSE(Epimorphism(6, {2, 4}).is_surjective());
}

TEST(Epimorphism, KernelHasIndexD) {
  for (int d : {2, 3, 4, 6}) {
    for (int m : {1, 2, 3}) {
      const auto group = enumerate_group(d, m);
      for (const auto& c : group) {
        Epimorphism e(c);
        if (!e.is_surjective()) continue;
        std::vector<int> fibre(static_cast<std::size_t>(d), 0);
        for (const auto& b : group) ++fibre[static_cast<std::size_t>(e.apply(b))];
        const int expected = static_cast<int>(group.size()) / d;
        for (int f : fibre) EXPECT_EQ(f, expected) << "d=" << d << " m=" << m;
      }
    }
  }
}

TEST(ResidueVector, ReducesEntriesAndIndexes) {
  ResidueVector v(3, {4, -1, 2});
  EXPECT_EQ(v.entries(), (std::vector<int>{1, 2, 2}));
  EXPECT_EQ(ResidueVector::from_index(v.index(), 3, 3), v);
  EXPECT_EQ(v.digits(), "122");
  EXPECT_EQ(ResidueVector::parse_digits("122", 3), v);
  EXPECT_TRUE((v + (-v)).is_zero());
  EXPECT_THROW(ResidueVector::parse_digits("13", 3), std::invalid_argument);
}

TEST(OmegaSequence, KernelConditionExamples) {
  EXPECT_TRUE(presets::grigorchuk().omega.satisfies_kernel_condition());
  EXPECT_FALSE(OmegaSequence::parse("per:0,1", 2).satisfies_kernel_condition());
  EXPECT_TRUE(OmegaSequence::parse("per:1", 3).satisfies_kernel_condition());
}

TEST(OmegaSequence, KernelConditionWithPreperiod) {
  // The tail decides: a preperiod cannot repair a degenerate period.
  EXPECT_FALSE(OmegaSequence::parse("pre:1,0;1,1|per:0,1", 2).satisfies_kernel_condition());
  EXPECT_TRUE(OmegaSequence::parse("pre:1,1|per:0,1;1,0", 2).satisfies_kernel_condition());
}

TEST(OmegaSequence, KernelConditionRejectsNonSurjective) {
  EXPECT_THROW(OmegaSequence::parse("per:2", 4).satisfies_kernel_condition(), std::invalid_argument);
}

TEST(OmegaSequence, EventualPeriodicityAndText) {
  auto w = OmegaSequence::parse("pre:1,1|per:0,1;1,0", 2);
  EXPECT_EQ(w.at(0), Epimorphism(2, {1, 1}));
  EXPECT_EQ(w.at(1), Epimorphism(2, {0, 1}));
  EXPECT_EQ(w.at(2), Epimorphism(2, {1, 0}));
  EXPECT_EQ(w.at(5), Epimorphism(2, {0, 1}));
  EXPECT_EQ(w.at(6), Epimorphism(2, {1, 0}));
  EXPECT_EQ(w.to_string(), "pre:1,1|per:0,1;1,0");
  EXPECT_EQ(OmegaSequence::parse(w.to_string(), 2), w);
  EXPECT_THROW(OmegaSequence::parse("pre:1,1", 2), std::invalid_argument);
  EXPECT_THROW(OmegaSequence::parse("per:0,2", 2), std::invalid_argument);
  EXPECT_THROW(OmegaSequence::parse("per:0,1;1", 2), std::invalid_argument);
}

TEST(Generators, SizeAndClosureUnderInverse) {
  for (int d = 2; d <= 5; ++d)
    for (int m = 1; m <= 3; ++m) {
      const auto s = spinal_generators(d, m);
      ASSERT_EQ(static_cast<int>(s.size()), spinal_set_size(d, m));
      EXPECT_EQ(spinal_set_size(d, m), static_cast<int>(std::pow(d, m)) + d - 2);
      std::set<std::string> labels;
      for (const auto& g : s) labels.insert(label(g));
      EXPECT_EQ(labels.size(), s.size());
      for (const auto& g : s) EXPECT_TRUE(labels.count(label(inverse(g, d)))) << label(g);
    }
}

TEST(SpinalParams, ValidationAndPresets) {
  EXPECT_NO_THROW(presets::grigorchuk().validate());
  EXPECT_NO_THROW(presets::fabrykowski_gupta().validate());
  for (int m = 2; m <= 5; ++m) EXPECT_NO_THROW(presets::sunic_gm(m).validate());
  SpinalParams bad{2, 2, OmegaSequence::parse("per:0,1", 2)};
  try {
    bad.validate();
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("kernel condition"), std::string::npos);
  }
  SpinalParams mismatch{3, 2, OmegaSequence::parse("per:1", 3)};
  EXPECT_THROW(mismatch.validate(), std::invalid_argument);
}
