#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "selfid/belief.hpp"

using namespace selfid;

namespace {

// I(m) = c for every memory.
AdaptedRecognizer constant_recognizer(Vector c, std::size_t k = 3) {
  const std::size_t n = c.size();
  return {Matrix(n, k), std::move(c), Matrix(n, 1), Matrix(1, k), 1.0, {}, 0};
}

// I(m) = (content[0], 0): one memory coordinate drives the first output.
AdaptedRecognizer first_coordinate_recognizer() {
  Matrix w(2, 3);
  w(0, 0) = 1.0;
  return {w, Vector(2, 0.0), Matrix(2, 1), Matrix(1, 3), 1.0, {}, 0};
}

std::vector<Memory> memories_at(std::initializer_list<double> xs) {
  std::vector<Memory> out;
  for (double x : xs) out.push_back({"m" + std::to_string(out.size()), 0.0, {x}, 0.0});
  return out;
}

IdentityMeasure two_atoms(Vector a, Vector b, double wa = 1.0, double wb = 1.0) {
  return {{{std::move(a)}, {std::move(b)}}, {wa, wb}};
}

}  // namespace

TEST(BeliefDistribution, EquidistantAtomsSplitEvenly) {
  const auto rec = constant_recognizer({0.0, 0.0});
  const auto mu = two_atoms({1.0, 0.0}, {0.0, -1.0});
  const auto b = belief_distribution(rec, memories_at({0.0})[0], mu, 0.7);
  EXPECT_NEAR(b.probabilities[0], 0.5, 1e-12);
  EXPECT_NEAR(b.probabilities[1], 0.5, 1e-12);
}

TEST(BeliefDistribution, UnitGapAtUnitTemperature) {
  const auto rec = constant_recognizer({0.0, 0.0});
  const auto mu = two_atoms({0.0, 0.0}, {1.0, 0.0});
  const auto b = belief_distribution(rec, memories_at({0.0})[0], mu, 1.0);
  const double expect = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(b.probabilities[0], 0.7311, 1e-4);
  EXPECT_NEAR(b.probabilities[0], expect, 1e-15);
  EXPECT_NEAR(b.probabilities[1], 1.0 - expect, 1e-15);
}

TEST(BeliefDistribution, HighTemperatureIsUniform) {
  const auto rec = constant_recognizer({0.0, 0.0});
  IdentityMeasure mu{{{{0.0, 0.0}}, {{3.0, 0.0}}, {{0.0, 7.0}}}, {1.0, 1.0, 1.0}};
  const auto b = belief_distribution(rec, memories_at({0.0})[0], mu, 1e6);
  for (double p : b.probabilities) EXPECT_NEAR(p, 1.0 / 3.0, 1e-4);
}

TEST(BeliefDistribution, WeightsShiftMass) {
  const double d[] = {0.0, 0.0};
  const double w[] = {3.0, 1.0};
  const auto b = belief_from_distances(d, w, 1.0);
  EXPECT_NEAR(b.probabilities[0], 0.75, 1e-15);
}

TEST(BeliefDistribution, Errors) {
  const auto rec = constant_recognizer({0.0, 0.0});
  const auto mu = two_atoms({0.0, 0.0}, {1.0, 0.0});
  const auto m = memories_at({0.0})[0];
  EXPECT_THROW(belief_distribution(rec, m, mu, 0.0), std::invalid_argument);
  EXPECT_THROW(belief_distribution(rec, m, mu, -1.0), std::invalid_argument);
  EXPECT_THROW(belief_distribution(rec, m, IdentityMeasure{}, 1.0), std::invalid_argument);
  EXPECT_THROW(belief_distribution(rec, m, two_atoms({0.0}, {1.0}), 1.0), std::invalid_argument);
  EXPECT_THROW(belief_distribution(rec, m, two_atoms({0.0, 0.0}, {1.0, 0.0}, 1.0, 0.0), 1.0),
               std::invalid_argument);
}

TEST(BeliefDistribution, NormalizedAcrossRandomConfigurations) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> logtau(std::log(1e-3), std::log(1e3)), w(0.01, 10.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t atoms = 1 + trial % 9;
    std::vector<double> d(atoms), wt(atoms);
    for (std::size_t j = 0; j < atoms; ++j) {
      d[j] = std::abs(oracle::random_vector(rng, 1, 5.0)[0]);
      wt[j] = w(rng);
    }
    const auto b = belief_from_distances(d, wt, std::exp(logtau(rng)));
    double sum = 0.0;
    for (double p : b.probabilities) {
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
      sum += p;
    }
    ASSERT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(BeliefDistribution, FartherAtomNeverGainsMass) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 3.0), tau(0.01, 10.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> d{u(rng), u(rng), u(rng), u(rng)};
    const std::vector<double> w(4, 1.0);
    const double t = tau(rng);
    const double before = belief_from_distances(d, w, t).probabilities[1];
    d[1] += u(rng) + 1e-6;
    ASSERT_LE(belief_from_distances(d, w, t).probabilities[1], before);
  }
}

TEST(BeliefDistribution, LowTemperatureConcentratesOnNearest) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 2.0), gap(0.1, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double nearest = u(rng);
    std::vector<double> d{nearest + gap(rng), nearest, nearest + gap(rng)};
    const auto b = belief_from_distances(d, std::vector<double>(3, 1.0), 1e-4);
    ASSERT_GT(b.probabilities[1], 1.0 - 1e-6);
  }
}

TEST(ProbabilityOf, EmptyFullAndErrors) {
  const double d[] = {0.3, 1.0, 2.0};
  const double w[] = {1.0, 2.0, 0.5};
  const auto b = belief_from_distances(d, w, 0.8);
  EXPECT_EQ(probability_of(b, {}), 0.0);
  EXPECT_NEAR(probability_of(b, {0, 1, 2}), 1.0, 1e-9);
  EXPECT_THROW(probability_of(b, {3}), std::out_of_range);
}

TEST(ProbabilityOf, FinitelyAdditive) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + trial % 10;
    std::vector<double> d(n), w(n, 1.0);
    for (double& x : d) x = std::abs(oracle::random_vector(rng, 1)[0]);
    const auto b = belief_from_distances(d, w, 0.5);
    std::set<std::size_t> a, c;
    for (std::size_t i = 0; i < n; ++i) (rng() % 2 ? a : c).insert(i);
    std::set<std::size_t> both = a;
    both.insert(c.begin(), c.end());
    ASSERT_NEAR(probability_of(b, both), probability_of(b, a) + probability_of(b, c), 1e-12);
  }
}

TEST(Condition2, ConstantRecognizerOnAnAtom) {
  const auto rec = constant_recognizer({2.0, 2.0});
  const auto mu = two_atoms({2.0, 2.0}, {-3.0, 0.0});
  const auto mems = memories_at({0.1, 0.2, 0.3, 0.4});
  const auto v = check_condition_2(rec, mems, mu, 0.01, BeliefThreshold(0.8), 0.05);
  EXPECT_TRUE(v.holds);
  EXPECT_EQ(v.s_star_index, 0u);
  for (const auto& r : v.rows) {
    EXPECT_EQ(r.distance_to_s_star, 0.0);
    EXPECT_NEAR(r.belief_at_s_star, 1.0, 1e-12);
  }
  EXPECT_TRUE(v.failing_memories().empty());
}

TEST(Condition2, SplitRecognitionFails) {
  // Half the memories map near atom 0, half near atom 1.
  const auto rec = first_coordinate_recognizer();
  const auto mu = two_atoms({0.0, 0.0}, {1.0, 0.0});
  const auto mems = memories_at({0.0, 0.01, 0.99, 1.0});
  const auto v = check_condition_2(rec, mems, mu, 0.1, BeliefThreshold(0.8), 0.05);
  EXPECT_FALSE(v.holds);
  // Mean output 0.5 is equidistant; the lower index wins.
  EXPECT_EQ(v.s_star_index, 0u);
  EXPECT_EQ(v.failing_memories(), (std::vector<MemoryId>{"m2", "m3"}));
}

TEST(Condition2, LowerThresholdStillPasses) {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(0.0, 1.0), tau(0.01, 2.0);
  const auto rec = first_coordinate_recognizer();
  int passing = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto mu = two_atoms({u(rng), 0.0}, {2.0 + u(rng), 0.0});
    std::vector<Memory> mems;
    for (int i = 0; i < 5; ++i) mems.push_back({std::to_string(i), 0.0, {0.3 * u(rng)}, 0.0});
    const double b = 0.5 + 0.5 * u(rng), t = tau(rng), ds = u(rng);
    const auto hi = check_condition_2(rec, mems, mu, t, BeliefThreshold(b), ds);
    if (!hi.holds) continue;
    ++passing;
    const double lower = b * u(rng);
    if (lower <= 0.0) continue;
    ASSERT_TRUE(check_condition_2(rec, mems, mu, t, BeliefThreshold(lower), ds).holds);
  }
  EXPECT_GT(passing, 50);
}

TEST(Condition2, ThresholdValidation) {
  EXPECT_THROW(BeliefThreshold(0.0), std::invalid_argument);
  EXPECT_THROW(BeliefThreshold(1.5), std::invalid_argument);
  EXPECT_NO_THROW(BeliefThreshold(1.0));
  const auto rec = constant_recognizer({0.0, 0.0});
  EXPECT_THROW(check_condition_2(rec, std::vector<Memory>{}, two_atoms({0.0, 0.0}, {1.0, 0.0}), 1.0,
                                 BeliefThreshold(0.5), 0.1),
               std::invalid_argument);
}

TEST(CalibrateTau, FindsLargestFeasibleTemperature) {
  const auto rec = first_coordinate_recognizer();
  const auto mu = two_atoms({0.0, 0.0}, {1.0, 0.0});
  const auto mems = memories_at({0.0, 0.1, 0.2});
  const auto tau = calibrate_tau(rec, mems, mu, BeliefThreshold(0.9), 0);
  ASSERT_TRUE(tau.has_value());
  std::vector<std::vector<double>> d;
  for (const auto& m : mems) d.push_back(atom_distances(recognize(rec, m), mu));
  EXPECT_GE(min_belief_at(d, mu, 0, *tau), 0.9);
  EXPECT_LT(min_belief_at(d, mu, 0, *tau * 1.001), 0.9);
  // Worst memory sits at 0.2 vs 0.8: p = 1 / (1 + exp(-0.6 / tau)) = 0.9.
  EXPECT_NEAR(*tau, 0.6 / std::log(9.0), 1e-6);
}

TEST(CalibrateTau, InfeasibleWhenAnotherAtomIsNearer) {
  const auto rec = first_coordinate_recognizer();
  const auto mu = two_atoms({0.0, 0.0}, {1.0, 0.0});
  EXPECT_FALSE(calibrate_tau(rec, memories_at({0.1, 0.9}), mu, BeliefThreshold(0.6), 0).has_value());
}

TEST(CalibrateTau, SingleAtomReturnsUpperBound) {
  const auto rec = first_coordinate_recognizer();
  IdentityMeasure mu{{{{5.0, 5.0}}}, {2.0}};
  EXPECT_EQ(*calibrate_tau(rec, memories_at({0.1, 0.9}), mu, BeliefThreshold(1.0), 0), kTauMax);
  EXPECT_THROW(calibrate_tau(rec, memories_at({0.1}), mu, BeliefThreshold(0.5), 1), std::out_of_range);
}
