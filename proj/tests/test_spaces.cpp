#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "selfid/spaces.hpp"

using namespace selfid;

namespace {

Memory mem(double t, Vector c, double e, std::string id = "m") { return {std::move(id), t, std::move(c), e}; }

}  // namespace

TEST(MemoryDistance, IdenticalMemoriesAreAtZero) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_memory(rng, 5);
  EXPECT_EQ(memory_distance(m, m, {}), 0.0);
}

TEST(MemoryDistance, HandEvaluatedThreeFourFive) {
  const auto a = mem(0.0, {1.0, 2.0}, 1.0);
  const auto b = mem(3.0, {1.0, 2.0}, 5.0);
  EXPECT_DOUBLE_EQ(memory_distance(a, b, {}), 5.0);
}

TEST(MemoryDistance, WeightsScaleEachTerm) {
  const auto a = mem(0.0, {0.0}, 0.0);
  const auto b = mem(1.0, {2.0}, 3.0);
  MemoryMetricConfig cfg{4.0, 0.25, 1.0 / 9.0};
  // 4*1 + 0.25*4 + 9/9
  EXPECT_DOUBLE_EQ(memory_distance(a, b, cfg), std::sqrt(6.0));
}

TEST(MemoryDistance, DimensionMismatchNamesBothDimensions) {
  const auto a = mem(0.0, {1.0, 2.0}, 0.0);
  const auto b = mem(0.0, {1.0, 2.0, 3.0}, 0.0);
  try {
    memory_distance(a, b, {});
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(MemoryDistance, RejectsNonFiniteFields) {
  const auto ok = mem(0.0, {1.0}, 0.0);
  EXPECT_THROW(memory_distance(ok, mem(std::nan(""), {1.0}, 0.0), {}), std::invalid_argument);
  EXPECT_THROW(memory_distance(ok, mem(0.0, {1.0}, INFINITY), {}), std::invalid_argument);
  EXPECT_THROW(memory_distance(ok, mem(0.0, {NAN}, 0.0), {}), std::invalid_argument);
}

TEST(MemoryDistance, RejectsNonPositiveWeights) {
  MemoryMetricConfig cfg{0.0, 1.0, 1.0};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(MemoryDistance, MonotoneInTemporalWeight) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> w(0.01, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = oracle::random_memory(rng, 3), b = oracle::random_memory(rng, 3);
    MemoryMetricConfig lo{w(rng), w(rng), w(rng)};
    MemoryMetricConfig hi = lo;
    hi.w_t += w(rng);
    ASSERT_LE(memory_distance(a, b, lo), memory_distance(a, b, hi));
  }
}

TEST(ContentDistance, EqualVectorsUnderBothKinds) {
  const Vector c{0.3, -1.2, 4.0};
  EXPECT_EQ(content_distance(c, c, ContentMetric::Euclidean), 0.0);
  EXPECT_NEAR(content_distance(c, c, ContentMetric::CosineDistance), 0.0, 1e-15);
}

TEST(ContentDistance, CosineOrthogonalAndAntipodal) {
  EXPECT_DOUBLE_EQ(content_distance(Vector{1, 0}, Vector{0, 1}, ContentMetric::CosineDistance), 1.0);
  EXPECT_DOUBLE_EQ(content_distance(Vector{1, 0}, Vector{-1, 0}, ContentMetric::CosineDistance), 2.0);
}

TEST(ContentDistance, CosineRejectsZeroVector) {
  EXPECT_THROW(content_distance(Vector{0, 0}, Vector{0, 1}, ContentMetric::CosineDistance),
               std::invalid_argument);
}

TEST(SelfDistance, PythagoreanAndManhattan) {
  const SelfIdentity o{{0.0, 0.0}}, s{{3.0, 4.0}};
  EXPECT_DOUBLE_EQ(self_distance(o, s, {2.0}), 5.0);
  EXPECT_DOUBLE_EQ(self_distance(o, s, {1.0}), 7.0);
  EXPECT_EQ(self_distance(s, s, {3.0}), 0.0);
  EXPECT_DOUBLE_EQ(self_distance(o, s, {INFINITY}), 4.0);
}

TEST(SelfDistance, OneDimensionalEuclideanIsAbsoluteDifference) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = g(rng), b = g(rng);
    ASSERT_DOUBLE_EQ(self_distance({{a}}, {{b}}, {2.0}), std::abs(a - b));
  }
}

TEST(SelfDistance, RejectsBadInputs) {
  EXPECT_THROW(self_distance({{1.0}}, {{1.0, 2.0}}), std::invalid_argument);
  EXPECT_THROW(self_distance({{1.0}}, {{2.0}}, {0.5}), std::invalid_argument);
}

// Metric axioms over random triples.
class MetricAxioms : public ::testing::TestWithParam<int> {};

TEST_P(MetricAxioms, MemoryMetricEuclidean) {
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> w(0.05, 3.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const MemoryMetricConfig cfg{w(rng), w(rng), w(rng)};
    const auto a = oracle::random_memory(rng, 4), b = oracle::random_memory(rng, 4),
               c = oracle::random_memory(rng, 4);
    const double ab = memory_distance(a, b, cfg), ba = memory_distance(b, a, cfg);
    const double bc = memory_distance(b, c, cfg), ac = memory_distance(a, c, cfg);
    ASSERT_GE(ab, 0.0);
    ASSERT_EQ(ab, ba);
    ASSERT_EQ(memory_distance(a, a, cfg), 0.0);
    ASSERT_GT(ab, 0.0);  // distinct random memories
    ASSERT_LE(ac, ab + bc + 1e-12 * (ab + bc));
  }
}

TEST_P(MetricAxioms, SelfMetricLp) {
  std::mt19937_64 rng(GetParam() + 100);
  std::uniform_real_distribution<double> pdist(1.0, 6.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const SelfMetricConfig cfg{trial % 3 == 0 ? 2.0 : pdist(rng)};
    const SelfIdentity a{oracle::random_vector(rng, 5)}, b{oracle::random_vector(rng, 5)},
        c{oracle::random_vector(rng, 5)};
    const double ab = self_distance(a, b, cfg), bc = self_distance(b, c, cfg), ac = self_distance(a, c, cfg);
    ASSERT_GE(ab, 0.0);
    ASSERT_EQ(ab, self_distance(b, a, cfg));
    ASSERT_EQ(self_distance(a, a, cfg), 0.0);
    ASSERT_LE(ac, ab + bc + 1e-12 * (ab + bc));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, MetricAxioms, ::testing::Values(11, 12));

TEST(PairwiseDistanceMatrix, SingleMemoryIsZero) {
  const std::vector<Memory> one{mem(1.0, {1.0}, 1.0)};
  const auto d = pairwise_distance_matrix(one, {});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d(0, 0), 0.0);
}

TEST(PairwiseDistanceMatrix, OffDiagonalsAndSymmetry) {
  const std::vector<Memory> two{mem(0.0, {1.0, 2.0}, 1.0, "a"), mem(3.0, {1.0, 2.0}, 5.0, "b")};
  const auto d = pairwise_distance_matrix(two, {});
  EXPECT_DOUBLE_EQ(d(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(d(1, 0), 5.0);

  std::mt19937_64 rng(4);
  std::vector<Memory> many;
  for (int i = 0; i < 20; ++i) many.push_back(oracle::random_memory(rng, 3, std::to_string(i)));
  const auto dm = pairwise_distance_matrix(many, {});
  for (std::size_t i = 0; i < dm.size(); ++i) {
    EXPECT_EQ(dm(i, i), 0.0);
    for (std::size_t j = 0; j < dm.size(); ++j) EXPECT_EQ(dm(i, j), dm(j, i));
  }
}

TEST(PairwiseDistanceMatrix, ErrorsNameTheOffendingPair) {
  const std::vector<Memory> bad{mem(0, {1.0}, 0), mem(0, {1.0}, 0), mem(0, {1.0, 2.0}, 0)};
  try {
    pairwise_distance_matrix(bad, {});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("(0, 2)"), std::string::npos) << e.what();
  }
  EXPECT_THROW(pairwise_distance_matrix(std::vector<Memory>{}, {}), std::invalid_argument);
}
