#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "collrabi/datagen.hpp"
#include "collrabi/errors.hpp"
#include "collrabi/rng.hpp"
#include "collrabi/units.hpp"

using namespace collrabi;

TEST(SplitMix64, ReferenceOutputs) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
  SplitMix64 a = counter_stream(42, 7), b = counter_stream(42, 7), c = counter_stream(42, 8);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(counter_stream(42, 7).next(), c.next());
}

TEST(SplitMix64, UniformRanges) {
  SplitMix64 rng(9);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double v = rng.uniform_open_low();
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(PoissonSample, MomentsAcrossRegimes) {
  for (double lambda : {0.3, 2.0, 12.0, 29.9, 30.0, 75.0, 300.0}) {
    SplitMix64 rng(static_cast<std::uint64_t>(lambda * 1000));
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(poisson_sample(lambda, rng));
      sum += k;
      sq += k * k;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, lambda, 5 * std::sqrt(lambda / n)) << "lambda=" << lambda;
    EXPECT_NEAR(var / lambda, 1.0, 0.03) << "lambda=" << lambda;
  }
  SplitMix64 rng(1);
  EXPECT_EQ(poisson_sample(0.0, rng), 0u);
}

TEST(TimeGrid, InclusiveEndpoints) {
  const auto t = time_grid(0.0, 0.3, 151);
  ASSERT_EQ(t.size(), 151u);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_NEAR(t.back(), 0.3, 1e-15);
  EXPECT_NEAR(t[1] - t[0], 0.002, 1e-15);
}

TEST(SynthSpec, Validation) {
  SynthSpec s = preset("fig2b");
  EXPECT_NO_THROW(validate(s));
  s.t_end = s.t_start;
  EXPECT_THROW(validate(s), ConfigError);
  s = preset("fig2b");
  s.n_bins = 7;
  EXPECT_THROW(validate(s), ConfigError);
  s = preset("fig2b");
  s.amplitude = -1;
  EXPECT_THROW(validate(s), ConfigError);
  s = preset("fig2b");
  s.baseline = -1;
  EXPECT_THROW(synth(s), ConfigError);
}

TEST(Synth, ConstantRateMean) {
  SynthSpec s = preset("fig2b");
  s.amplitude = 0.0;
  s.baseline = 4.0;
  s.n_bins = 10000;
  const TimeTrace tr = synth(s);
  const double mean = std::accumulate(tr.counts.begin(), tr.counts.end(), 0.0) / tr.size();
  EXPECT_NEAR(mean, 4.0, 5 * std::sqrt(4.0 / 10000));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(tr.sigma[i], std::sqrt(std::max(tr.counts[i], 1.0)));
    EXPECT_EQ(tr.counts[i], std::floor(tr.counts[i]));
  }
}

TEST(Synth, DeterministicAndExecIndependent) {
  SynthSpec s = preset("fig4e");
  s.seed = 2024;
  const TimeTrace a = synth(s, Exec::parallel);
  const TimeTrace b = synth(s, Exec::parallel);
  const TimeTrace c = synth(s, Exec::serial);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.counts, c.counts);
  EXPECT_EQ(a.times, c.times);
  s.seed = 2025;
  EXPECT_NE(synth(s).counts, a.counts);
}

TEST(Synth, PoissonVarianceMatchesMean) {
  SynthSpec s = preset("fig2b");
  const int seeds = 200;
  const TimeTrace rates = expected_trace(s);
  std::vector<double> sum(rates.size(), 0.0), sq(rates.size(), 0.0);
  for (int k = 0; k < seeds; ++k) {
    s.seed = 10000 + k;
    const TimeTrace tr = synth(s);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      sum[i] += tr.counts[i];
      sq[i] += tr.counts[i] * tr.counts[i];
    }
  }
  double var_total = 0.0, mean_total = 0.0, lambda_total = 0.0, count_total = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double mean = sum[i] / seeds;
    var_total += (sq[i] - seeds * mean * mean) / (seeds - 1);
    mean_total += mean;
    lambda_total += rates.counts[i];
    count_total += sum[i];
  }
  EXPECT_NEAR(var_total / mean_total, 1.0, 0.1);
  // Law of large numbers on the pooled count.
  EXPECT_NEAR(count_total, seeds * lambda_total, 3 * std::sqrt(seeds * lambda_total));
}

TEST(Synth, NegativeRateIsGenerationError) {
  SynthSpec s = preset("fig4e");
  s.model.params["a1"] = -3.0;
  s.baseline = 0.0;
  EXPECT_THROW(synth(s), GenerationError);
}

TEST(Presets, PublishedFrequencies) {
  const double expected[] = {46.1, 47.7, 49.3, 50.9};
  const char* names[] = {"fig2b", "fig2c", "fig2d", "fig2e"};
  for (int k = 0; k < 4; ++k) {
    const SynthSpec s = preset(names[k]);
    EXPECT_EQ(s.model.name, ModelName::eq5);
    EXPECT_DOUBLE_EQ(s.model.params.at("omega_n"), units::mhz_to_angular(expected[k]));
    EXPECT_DOUBLE_EQ(s.context.at("delta_c_mhz"), 23.4);
    EXPECT_FALSE(s.provenance.empty());
  }
  const SynthSpec e = preset("fig4e");
  EXPECT_EQ(e.model.name, ModelName::two_component);
  EXPECT_DOUBLE_EQ(e.model.params.at("omega_n1"), units::mhz_to_angular(41.4));
  EXPECT_DOUBLE_EQ(e.model.params.at("omega_n2"), units::mhz_to_angular(62.1));
  const SynthSpec f = preset("fig4f");
  EXPECT_DOUBLE_EQ(f.model.params.at("omega_n1"), units::mhz_to_angular(49.3));
  EXPECT_DOUBLE_EQ(f.model.params.at("omega_n2"), units::mhz_to_angular(68.4));
  EXPECT_DOUBLE_EQ(f.context.at("omega_c_mhz"), 44.8);
}

TEST(Presets, PeakCountsNearTwoHundred) {
  for (auto name : kPresetNames) {
    const TimeTrace r = expected_trace(preset(name));
    const double top = *std::max_element(r.counts.begin(), r.counts.end());
    EXPECT_GT(top, 100.0) << name;
    EXPECT_LT(top, 300.0) << name;
  }
}

TEST(Presets, UnknownName) { EXPECT_THROW(preset("fig9z"), ConfigError); }
