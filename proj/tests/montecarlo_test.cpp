#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbd/montecarlo.hpp"
#include "support.hpp"

namespace rbd::test {
namespace {

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                 {0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                 {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, UniformsAreOpenIntervalAndRoughlyUniform) {
  double sum = 0.0;
  constexpr int n = 200000;
  for (int k = 0; k < n; ++k) {
    double u = keyed_uniform(42, k, 3);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Mean of U(0,1) has sd 1/sqrt(12 n).
  EXPECT_NEAR(sum / n, 0.5, 4.0 / std::sqrt(12.0 * n));
}

TEST(SampleLifetime, Examples) {
  EXPECT_NEAR(sample_lifetime(0.001, std::exp(-1.0)), 1000.0, 1e-9);
  EXPECT_TRUE(std::isinf(sample_lifetime(0.0, 0.3)));
  EXPECT_THROW(sample_lifetime(0.001, 0.0), DomainError);
  EXPECT_THROW(sample_lifetime(0.001, 1.0), DomainError);
  EXPECT_THROW(sample_lifetime(0.001, 1.2), DomainError);
  EXPECT_THROW(sample_lifetime(-1.0, 0.5), DomainError);
}

TEST(SampleLifetime, EmpiricalMeanMatchesOneOverLambda) {
  constexpr int n = 1000000;
  constexpr double rate = 0.00005;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += sample_lifetime(rate, keyed_uniform(9, k, 0));
  EXPECT_NEAR(sum / n, 20000.0, 3.0 * 20000.0 / std::sqrt(double(n)));
}

TEST(SystemLifetime, MinAndMax) {
  InstanceId a{"a", 0}, b{"b", 0};
  LifetimeMap life{{a, 10.0}, {b, 7.0}};
  EXPECT_EQ(system_lifetime(series({ref("a"), ref("b")}), life), 7.0);
  EXPECT_EQ(system_lifetime(parallel({ref("a"), ref("b")}), life), 10.0);
  EXPECT_THROW(system_lifetime(series({ref("a"), ref("c")}), life), UnknownInstanceError);
}

TEST(SystemLifetime, ConsistentWithStructureFunction) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GeneratorOptions opt;
  opt.zero_rate_probability = 0.2;
  for (int trial = 0; trial < 300; ++trial) {
    auto m = random_model(rng, opt);
    LifetimeMap life;
    for (const auto& inst : m.instances()) {
      double rate = m.component(inst.component_id).failure_rate;
      life[inst] = sample_lifetime(rate, std::max(unit(rng), 1e-300));
    }
    double sys = system_lifetime(m, life);
    // Probe at every instance lifetime and between them.
    std::vector<double> probes{0.0};
    for (auto& [id, l] : life)
      if (std::isfinite(l)) probes.insert(probes.end(), {l, l * 0.999, l * 1.001});
    for (double t : probes) {
      StateAssignment s;
      for (auto& [id, l] : life) s[id] = l > t;
      ASSERT_EQ(sys > t, structure_function(m.root, s));
    }
  }
}

TEST(EstimateReliability, BundledModelsWithinThreeSigma) {
  SimulationConfig cfg;
  cfg.trials = 1000000;
  cfg.seed = 1;
  auto plant = load_fixture("biofuel_plant.rbd");
  auto e = estimate_reliability(plant, MissionTime(1000), cfg);
  EXPECT_NEAR(e.point, 0.8819, 3 * e.std_error);
  EXPECT_LE(e.ci_low, e.point);
  EXPECT_GE(e.ci_high, e.point);
  EXPECT_EQ(e.trials, cfg.trials);
  EXPECT_EQ(e.seed, cfg.seed);

  auto feed = load_fixture("feed_subsystem.rbd");
  auto f = estimate_reliability(feed, MissionTime(1000), cfg);
  EXPECT_NEAR(f.point, 0.9598, 3 * f.std_error);
}

TEST(EstimateReliability, AtTimeZeroEverythingSurvives) {
  SimulationConfig cfg;
  cfg.trials = 5000;
  auto e = estimate_reliability(load_fixture("biofuel_plant.rbd"), MissionTime(0), cfg);
  EXPECT_EQ(e.point, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.ci_low, 1.0);
  EXPECT_EQ(e.ci_high, 1.0);
}

TEST(EstimateReliability, ConfigErrors) {
  auto m = load_fixture("feed_subsystem.rbd");
  SimulationConfig cfg;
  cfg.trials = 0;
  EXPECT_THROW(estimate_reliability(m, MissionTime(1), cfg), ConfigError);
  cfg.trials = 10;
  cfg.confidence_level = 1.0;
  EXPECT_THROW(estimate_reliability(m, MissionTime(1), cfg), ConfigError);
}

TEST(EstimateReliability, DeterministicAcrossThreadCounts) {
  auto m = load_fixture("biofuel_plant.rbd");
  SimulationConfig cfg;
  cfg.trials = 200003;  // not a multiple of the block size
  cfg.seed = 12345;
  cfg.threads = 1;
  auto one = estimate_reliability(m, MissionTime(5000), cfg);
  for (unsigned threads : {2u, 3u, 8u}) {
    cfg.threads = threads;
    auto many = estimate_reliability(m, MissionTime(5000), cfg);
    EXPECT_EQ(many.point, one.point);
    EXPECT_EQ(many.std_error, one.std_error);
    EXPECT_EQ(many.ci_low, one.ci_low);
    EXPECT_EQ(many.ci_high, one.ci_high);
  }
  cfg.threads = 1;
  auto l1 = estimate_mean_lifetime(m, cfg);
  cfg.threads = 5;
  auto l5 = estimate_mean_lifetime(m, cfg);
  EXPECT_EQ(l1.mean, l5.mean);
  EXPECT_EQ(l1.std_error, l5.std_error);
}

TEST(EstimateReliability, ConsistentWithAnalyticOverSeeds) {
  std::vector<SystemModel> models{
      load_fixture("biofuel_plant.rbd"), load_fixture("feed_subsystem.rbd"),
      make_model("bridge-ish",
                 {{"a", "", 2e-4, std::nullopt}, {"b", "", 5e-4, std::nullopt},
                  {"c", "", 0.0, std::nullopt}},
                 series({parallel({ref("a"), ref("b")}),
                         parallel({series({ref("b"), ref("a")}), ref("a")}), ref("c")}))};
  for (const auto& m : models) {
    double exact = evaluate(m, MissionTime(2000));
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SimulationConfig cfg;
      cfg.trials = 20000;
      cfg.seed = 1000 + seed;
      auto e = estimate_reliability(m, MissionTime(2000), cfg);
      inside += std::fabs(e.point - exact) < 4 * e.std_error;
    }
    EXPECT_GE(inside, 99) << m.name;
  }
}

TEST(EstimateSurvivalCurve, NonincreasingUnderCommonRandomNumbers) {
  auto m = load_fixture("biofuel_plant.rbd");
  std::vector<MissionTime> grid;
  for (int k = 0; k <= 50; ++k) grid.emplace_back(400.0 * k);
  SimulationConfig cfg;
  cfg.trials = 50000;
  cfg.seed = 3;
  auto curve = estimate_survival_curve(m, grid, cfg);
  ASSERT_EQ(curve.size(), grid.size());
  EXPECT_EQ(curve.front().point, 1.0);
  for (std::size_t k = 1; k < curve.size(); ++k)
    EXPECT_LE(curve[k].point, curve[k - 1].point);
  // The CRN curve agrees with an independent single-time estimate.
  auto single = estimate_reliability(m, grid[10], cfg);
  EXPECT_EQ(single.point, curve[10].point);
}

TEST(EstimateMeanLifetime, MatchesMttf) {
  SimulationConfig cfg;
  cfg.trials = 400000;
  cfg.seed = 8;
  auto feed = load_fixture("feed_subsystem.rbd");
  auto e = estimate_mean_lifetime(feed, cfg);
  EXPECT_NEAR(e.mean, 1.0 / 4.1e-5, 4 * e.std_error);

  auto forever = make_model("p", {{"a", "", 0.001, std::nullopt}, {"b", "", 0.0, std::nullopt}},
                            parallel({ref("a"), ref("b")}));
  EXPECT_TRUE(std::isinf(estimate_mean_lifetime(forever, cfg).mean));
}

TEST(EstimateMeanLifetime, PlantQuadratureWithinTenthOfAPercent) {
  SimulationConfig cfg;
  cfg.trials = 10000000;
  cfg.seed = 11;
  auto plant = load_fixture("biofuel_plant.rbd");
  double quad = mttf(plant).hours();
  auto e = estimate_mean_lifetime(plant, cfg);
  EXPECT_NEAR(e.mean, quad, quad * 1e-3);
  EXPECT_NEAR(e.mean, quad, 4 * e.std_error);
}

}  // namespace
}  // namespace rbd::test
