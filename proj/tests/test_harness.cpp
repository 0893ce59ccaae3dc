#include <gtest/gtest.h>

#include "htmrl/experiment_io.hpp"
#include "htmrl/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using htmrl::AgentKind;
using htmrl::ExperimentKind;
using htmrl::ExperimentSpec;
using htmrl::Preset;
using htmrl::RunResult;
using htmrl::ScheduleKind;
using htmrl::SegmentStats;

namespace {

// Small, fast capacity spec used across the file.
ExperimentSpec tiny_capacity() {
  ExperimentSpec spec = htmrl::capacity_spec();
  spec.num_states = 3;
  spec.num_arms = 3;
  spec.bits_per_state = 6;
  spec.num_repeats = 4;
  spec.max_steps = 5000;
  spec.master_seed = 11;
  spec.threads = 1;
  return spec;
}

ExperimentSpec tiny_nonstationary() {
  ExperimentSpec spec = htmrl::nonstationary_spec();
  spec.preset = Preset::kSmall;
  spec.num_steps = 400;
  spec.period = 100;
  spec.num_repeats = 5;
  spec.master_seed = 21;
  spec.threads = 1;
  return spec;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "htmrl_tests" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(SeedDerivation, StreamsAndIndicesAreDecoupled) {
  const auto a = htmrl::derive_seed(1, 0, 0);
  EXPECT_EQ(a, htmrl::derive_seed(1, 0, 0));
  EXPECT_NE(a, htmrl::derive_seed(1, 0, 1));
  EXPECT_NE(a, htmrl::derive_seed(1, 1, 0));
  EXPECT_NE(a, htmrl::derive_seed(2, 0, 0));
}

// |S|=1, |A|=1: the only action is optimal, so a repeat halts in exactly
// halt_streak steps.
TEST(RunCapacity, SingleStateSingleArmConvergesInHaltStreakSteps) {
  ExperimentSpec spec = htmrl::capacity_spec();
  spec.num_states = 1;
  spec.num_arms = 1;
  spec.bits_per_state = 6;
  spec.num_repeats = 2;
  spec.max_steps = 1000;
  spec.threads = 1;
  const auto result = htmrl::run_capacity(spec);
  for (const auto& log : result.repeats) {
    EXPECT_EQ(log.convergence_steps, 100);
    EXPECT_EQ(log.rewards.size(), 100u);
    for (double r : log.rewards) EXPECT_DOUBLE_EQ(r, 1.0);
  }
}

// After halt, the trailing halt_streak logged actions are all optimal.
TEST(RunCapacity, TrailingActionsOptimalAtHalt) {
  const auto spec = tiny_capacity();
  const auto result = htmrl::run_capacity(spec);
  for (const auto& log : result.repeats) {
    ASSERT_GE(log.convergence_steps, 0) << "repeat did not converge";
    const auto& records = log.records;
    ASSERT_GE(records.size(), 100u);
    for (std::size_t i = records.size() - 100; i < records.size(); ++i) {
      EXPECT_TRUE(records[i].optimal);
    }
  }
}

TEST(RunCapacity, DeterministicRerun) {
  const auto spec = tiny_capacity();
  const auto a = htmrl::run_capacity(spec);
  const auto b = htmrl::run_capacity(spec);
  ASSERT_EQ(a.repeats.size(), b.repeats.size());
  for (std::size_t r = 0; r < a.repeats.size(); ++r) {
    EXPECT_EQ(a.repeats[r].convergence_steps, b.repeats[r].convergence_steps);
    EXPECT_EQ(a.repeats[r].rewards, b.repeats[r].rewards);
  }
  EXPECT_EQ(a.aggregate.mean, b.aggregate.mean);
}

TEST(RunCapacity, SerialAndParallelIdentical) {
  ExperimentSpec serial = tiny_capacity();
  serial.threads = 1;
  ExperimentSpec parallel = tiny_capacity();
  parallel.threads = 4;
  const auto a = htmrl::run_capacity(serial);
  const auto b = htmrl::run_capacity(parallel);
  EXPECT_EQ(a.aggregate.mean, b.aggregate.mean);
  EXPECT_EQ(a.aggregate.stddev, b.aggregate.stddev);
  for (std::size_t r = 0; r < a.repeats.size(); ++r) {
    EXPECT_EQ(a.repeats[r].rewards, b.repeats[r].rewards);
  }
}

TEST(RunCapacity, RejectsWrongKindAndBadSpecs) {
  ExperimentSpec spec = tiny_nonstationary();
  EXPECT_THROW(htmrl::run_capacity(spec), std::invalid_argument);
  ExperimentSpec bad = tiny_capacity();
  bad.num_arms = 2000;  // bin size below 2
  EXPECT_THROW(htmrl::run_capacity(bad), std::invalid_argument);
}

TEST(RunNonstationary, EpsGreedyAndSharedEnvironment) {
  // HTMRL and the baseline see identical environment realizations per
  // repeat: schedule-none scores coincide for equal repeat indices.
  ExperimentSpec spec = tiny_nonstationary();
  spec.schedule = ScheduleKind::kNone;
  spec.num_steps = 50;
  const auto htm = htmrl::run_nonstationary(spec);
  spec.agent = AgentKind::kEpsGreedy;
  spec.epsilon = 0.1;
  const auto eps = htmrl::run_nonstationary(spec);
  ASSERT_EQ(htm.repeats.size(), eps.repeats.size());
  // Same arms pulled in the same env stream yield the same reward sequence
  // only if actions agree, which they need not; instead check the logged
  // record count and that both agents faced the same number of steps.
  for (std::size_t r = 0; r < htm.repeats.size(); ++r) {
    EXPECT_EQ(htm.repeats[r].rewards.size(), 50u);
    EXPECT_EQ(eps.repeats[r].rewards.size(), 50u);
  }
}

TEST(RunNonstationary, AggregateLengthEqualsNumSteps) {
  const auto spec = tiny_nonstationary();
  const auto result = htmrl::run_nonstationary(spec);
  EXPECT_EQ(result.aggregate.size(), static_cast<std::size_t>(spec.num_steps));
  EXPECT_EQ(result.repeats.size(), static_cast<std::size_t>(spec.num_repeats));
}

TEST(RunNonstationary, RecordsFollowMovingAverageWindow) {
  ExperimentSpec spec = tiny_nonstationary();
  spec.num_repeats = 2;
  const auto result = htmrl::run_nonstationary(spec);
  for (const auto& log : result.repeats) {
    const auto expected = htmrl::moving_average(log.rewards, spec.effective_ma_window());
    ASSERT_EQ(log.ma.size(), expected.size());
    for (std::size_t t = 0; t < expected.size(); ++t) {
      EXPECT_NEAR(log.ma[t], expected[t], 1e-9);
    }
  }
}

TEST(SegmentRecovery, MonotoneFirstSegment) {
  std::vector<double> curve;
  for (int t = 0; t < 100; ++t) curve.push_back(static_cast<double>(t));
  for (int t = 0; t < 100; ++t) curve.push_back(50.0);
  const auto stats = htmrl::segment_recovery_stats(curve, 100, 0.9);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_DOUBLE_EQ(stats[0].peak, 99.0);
  EXPECT_EQ(stats[0].steps_to_threshold, 90);  // first value > 89.1
  EXPECT_LE(stats[0].steps_to_threshold, 100);
  EXPECT_DOUBLE_EQ(stats[1].peak, 50.0);
  EXPECT_EQ(stats[1].steps_to_threshold, -1);  // 50 never exceeds 89.1
}

TEST(SegmentRecovery, FlatZeroCurveNeverReaches) {
  const std::vector<double> curve(200, 0.0);
  const auto stats = htmrl::segment_recovery_stats(curve, 100, 0.9);
  for (const auto& seg : stats) {
    EXPECT_DOUBLE_EQ(seg.peak, 0.0);
    EXPECT_EQ(seg.steps_to_threshold, -1);
  }
}

TEST(SegmentRecovery, SingleSegmentWhenNoChanges) {
  const std::vector<double> curve(100, 1.0);
  const auto stats = htmrl::segment_recovery_stats(curve, 100, 0.9);
  EXPECT_EQ(stats.size(), 1u);
}

TEST(SegmentRecovery, RejectsBadLengths) {
  EXPECT_THROW(htmrl::segment_recovery_stats({1.0, 2.0, 3.0}, 2, 0.9), std::invalid_argument);
  EXPECT_THROW(htmrl::segment_recovery_stats({}, 2, 0.9), std::invalid_argument);
  EXPECT_THROW(htmrl::segment_recovery_stats({1.0, 2.0}, 0, 0.9), std::invalid_argument);
}

TEST(EmitOutputs, SchemasAndRowCounts) {
  ExperimentSpec spec = tiny_nonstationary();
  spec.num_repeats = 3;
  spec.num_steps = 120;
  spec.out_dir = fresh_dir("emit_schema").string();
  spec.write_plot = true;
  spec.smooth_window = 11;
  const auto result = htmrl::run_nonstationary(spec);
  const auto files = htmrl::emit_outputs(result, spec);

  const std::string per_repeat = slurp(files.per_repeat_csv);
  std::istringstream pr(per_repeat);
  std::string line;
  std::getline(pr, line);
  EXPECT_EQ(line, "repeat,step,state,action,reward,reward_norm,reward_ma,optimal");
  int rows = 0;
  while (std::getline(pr, line)) ++rows;
  EXPECT_EQ(rows, 3 * 120);

  const std::string aggregate = slurp(files.aggregate_csv);
  std::istringstream ag(aggregate);
  std::getline(ag, line);
  EXPECT_EQ(line, "step,mean_reward,std_reward,smoothed");
  rows = 0;
  while (std::getline(ag, line)) ++rows;
  EXPECT_EQ(rows, 120);  // aggregate row count = num_steps

  const std::string manifest = slurp(files.manifest);
  EXPECT_NE(manifest.find("kind=nonstationary"), std::string::npos);
  EXPECT_NE(manifest.find("master_seed=21"), std::string::npos);

  const std::string svg = slurp(files.plot);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
}

// The aggregate mean column must equal an independent recomputation from
// the per-repeat CSV rows.
TEST(EmitOutputs, AggregateMatchesPerRepeatRecomputation) {
  ExperimentSpec spec = tiny_nonstationary();
  spec.num_repeats = 4;
  spec.num_steps = 90;
  spec.out_dir = fresh_dir("emit_crosscheck").string();
  const auto result = htmrl::run_nonstationary(spec);
  const auto files = htmrl::emit_outputs(result, spec);

  // Parse per-repeat reward_ma by (repeat, step).
  std::vector<std::vector<double>> ma(4, std::vector<double>(90, 0.0));
  std::istringstream pr(slurp(files.per_repeat_csv));
  std::string line;
  std::getline(pr, line);  // header
  while (std::getline(pr, line)) {
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    ASSERT_EQ(fields.size(), 8u);
    const int repeat = std::stoi(fields[0]);
    const int step = std::stoi(fields[1]);
    ma[static_cast<std::size_t>(repeat)][static_cast<std::size_t>(step)] = std::stod(fields[6]);
  }

  std::istringstream ag(slurp(files.aggregate_csv));
  std::getline(ag, line);  // header
  int step = 0;
  while (std::getline(ag, line)) {
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    ASSERT_GE(fields.size(), 3u);
    double mean = 0.0;
    for (int r = 0; r < 4; ++r) mean += ma[static_cast<std::size_t>(r)][static_cast<std::size_t>(step)];
    mean /= 4.0;
    EXPECT_NEAR(std::stod(fields[1]), mean, 1e-9) << "step " << step;
    ++step;
  }
  EXPECT_EQ(step, 90);
}

// Rerunning from the manifest reproduces the aggregate CSV byte for byte.
TEST(EmitOutputs, RerunFromManifestIsByteIdentical) {
  ExperimentSpec spec = tiny_capacity();
  spec.out_dir = fresh_dir("manifest_a").string();
  const auto result = htmrl::run_capacity(spec);
  const auto files = htmrl::emit_outputs(result, spec);

  std::ifstream manifest(files.manifest);
  ExperimentSpec replayed = htmrl::read_manifest(manifest);
  replayed.out_dir = fresh_dir("manifest_b").string();
  const auto result2 = htmrl::run_experiment(replayed);
  const auto files2 = htmrl::emit_outputs(result2, replayed);

  EXPECT_EQ(slurp(files.aggregate_csv), slurp(files2.aggregate_csv));
  EXPECT_EQ(slurp(files.per_repeat_csv), slurp(files2.per_repeat_csv));
}

TEST(Manifest, RoundTripsSpecFields) {
  ExperimentSpec spec = htmrl::nonstationary_spec();
  spec.preset = Preset::kTiny;
  spec.schedule = ScheduleKind::kShuffle;
  spec.agent = AgentKind::kEpsGreedy;
  spec.epsilon = 0.01;
  spec.boost = false;
  spec.reward_norm = htmrl::NormalizationConfig::FullHistory();
  spec.num_repeats = 17;
  spec.master_seed = 987654321;
  spec.smooth_window = 51;

  std::stringstream buffer;
  htmrl::write_manifest(buffer, spec);
  const ExperimentSpec back = htmrl::read_manifest(buffer);
  EXPECT_EQ(back.kind, spec.kind);
  EXPECT_EQ(back.preset, spec.preset);
  EXPECT_EQ(back.schedule, spec.schedule);
  EXPECT_EQ(back.agent, spec.agent);
  EXPECT_DOUBLE_EQ(back.epsilon, spec.epsilon);
  EXPECT_EQ(back.boost, spec.boost);
  EXPECT_EQ(back.reward_norm.mode, spec.reward_norm.mode);
  EXPECT_EQ(back.num_repeats, spec.num_repeats);
  EXPECT_EQ(back.master_seed, spec.master_seed);
  EXPECT_EQ(back.smooth_window, spec.smooth_window);
}

TEST(ParallelForIndex, CoversAllIndicesOnce) {
  std::vector<std::atomic<int>> hits(100);
  for (auto& h : hits) h = 0;
  htmrl::parallel_for_index(100, 7, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelForIndex, PropagatesExceptions) {
  EXPECT_THROW(
      htmrl::parallel_for_index(10, 3,
                                [](int i) {
                                  if (i == 5) throw std::runtime_error("boom");
                                }),
      std::runtime_error);
}
