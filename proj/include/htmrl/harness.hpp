#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "htmrl/agent.hpp"
#include "htmrl/analysis.hpp"
#include "htmrl/bandits.hpp"
#include "htmrl/rng.hpp"

namespace htmrl {

enum class ExperimentKind { kCapacity, kNonstationary };
enum class AgentKind { kHtmrl, kEpsGreedy };
enum class Preset { kFull, kSmall, kTiny };

/// Seed-stream tags: environments and agents draw from disjoint streams so
/// two agent kinds see identical environment realizations per repeat index.
inline constexpr std::uint64_t kEnvStream = 0;
inline constexpr std::uint64_t kAgentStream = 1;

/// Full description of one experiment run. A spec plus its master seed
/// determines every emitted byte (manifest timestamp aside).
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kCapacity;

  // Capacity environment.
  int num_states = 20;
  int num_arms = 4;
  int bits_per_state = 20;
  long long max_steps = 100000;   ///< Per-repeat budget; non-convergence is reported.
  int halt_streak = 100;          ///< Consecutive optimal actions that halt a repeat.

  // Non-stationary environment.
  Preset preset = Preset::kFull;
  ScheduleKind schedule = ScheduleKind::kReinit;
  int period = 2000;
  long long num_steps = 10000;
  int gauss_arms = 10;

  // Agent.
  AgentKind agent = AgentKind::kHtmrl;
  double epsilon = 0.1;
  bool boost = true;
  double boost_strength = PoolerConfig{}.boost_strength;
  double perm_increment = PoolerConfig{}.perm_increment;
  NormalizationConfig reward_norm = NormalizationConfig::Off();

  // Run control.
  int num_repeats = 20;
  std::uint64_t master_seed = 1;
  int ma_window = 0;              ///< 0: kind default (1000 capacity, 10 non-stationary).
  int threads = 0;                ///< 0: hardware concurrency.
  bool keep_records = true;       ///< Retain per-step records (needed for per-repeat CSV).

  // Emission.
  std::string out_dir;            ///< Empty: no files written.
  bool write_plot = false;
  int smooth_window = 0;          ///< >0: add a Savitzky-Golay column to the aggregate.
  int smooth_order = 3;

  int effective_ma_window() const {
    if (ma_window > 0) return ma_window;
    return kind == ExperimentKind::kCapacity ? 1000 : 10;
  }

  void validate() const;
};

/// Capacity defaults: deterministic contextual bandits, HTMRL agent,
/// normalization off (rewards are already signed), MA window 1000. The
/// plasticity step is smaller than the pooler default so convergence takes
/// thousands of steps and the reported curve saturates before the halt, the
/// profile the capacity figures are read against.
inline ExperimentSpec capacity_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::kCapacity;
  s.num_repeats = 20;
  s.perm_increment = 0.002;
  s.reward_norm = NormalizationConfig::Off();
  return s;
}

/// Non-stationary defaults: 10-armed Gaussian bandit reinitialized every
/// 2000 of 10000 steps, reward window 1000, MA window 10.
inline ExperimentSpec nonstationary_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::kNonstationary;
  s.schedule = ScheduleKind::kReinit;
  s.num_repeats = 100;
  s.reward_norm = NormalizationConfig::Window(1000);
  return s;
}

/// Builds the HTMRL agent configuration implied by a spec: capacity runs
/// encode the bandit index with bits_per_state bits over a default-size
/// pooler; non-stationary runs use the named preset.
inline AgentConfig make_agent_config(const ExperimentSpec& spec) {
  AgentConfig cfg;
  if (spec.kind == ExperimentKind::kCapacity) {
    cfg.encoder = {spec.num_states, spec.bits_per_state};
    cfg.pooler.input_width = spec.num_states * spec.bits_per_state;
    cfg.num_actions = spec.num_arms;
  } else {
    switch (spec.preset) {
      case Preset::kFull:
        cfg.encoder = {1, 6};
        cfg.pooler.input_width = 6;
        cfg.pooler.num_cells = 2048;
        cfg.pooler.num_active = 40;
        break;
      case Preset::kSmall:
        cfg.encoder = {1, 6};
        cfg.pooler.input_width = 6;
        cfg.pooler.num_cells = 100;
        cfg.pooler.num_active = 10;
        break;
      case Preset::kTiny:
        cfg.encoder = {1, 1};
        cfg.pooler.input_width = 1;
        cfg.pooler.num_cells = 20;
        cfg.pooler.num_active = 2;
        cfg.pooler.potential_fraction = 1.0;  // a half-bit pool is not a pool
        break;
    }
    cfg.num_actions = spec.gauss_arms;
  }
  cfg.pooler.boost_strength = spec.boost ? spec.boost_strength : 0.0;
  cfg.pooler.perm_increment = spec.perm_increment;
  cfg.normalization = spec.reward_norm;
  return cfg;
}

inline void ExperimentSpec::validate() const {
  if (num_repeats < 1) throw std::invalid_argument("ExperimentSpec: num_repeats must be >= 1");
  if (kind == ExperimentKind::kCapacity) {
    if (num_states < 1 || num_arms < 1) {
      throw std::invalid_argument("ExperimentSpec: capacity dimensions must be positive");
    }
    if (bits_per_state < 1) throw std::invalid_argument("ExperimentSpec: bits_per_state must be >= 1");
    if (max_steps < 1) throw std::invalid_argument("ExperimentSpec: max_steps must be >= 1");
    if (halt_streak < 1) throw std::invalid_argument("ExperimentSpec: halt_streak must be >= 1");
  } else {
    if (num_steps < 1) throw std::invalid_argument("ExperimentSpec: num_steps must be >= 1");
    if (gauss_arms < 1) throw std::invalid_argument("ExperimentSpec: gauss_arms must be >= 1");
    if (schedule != ScheduleKind::kNone && period < 1) {
      throw std::invalid_argument("ExperimentSpec: period must be >= 1");
    }
  }
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw std::invalid_argument("ExperimentSpec: epsilon must be in [0, 1]");
  }
  if (ma_window < 0) throw std::invalid_argument("ExperimentSpec: ma_window must be >= 0");
  if (agent == AgentKind::kHtmrl) {
    make_agent_config(*this).validate();  // catches e.g. too many arms per bin
  }
}

/// One experiment step as logged.
struct StepRecord {
  int repeat = 0;
  long long step = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;
  double reward_norm = 0.0;
  double reward_ma = 0.0;
  bool optimal = false;
};

/// Per-repeat output. `rewards` and `ma` are always kept; full records only
/// when the spec asks (they dominate memory on large sweeps).
struct RepeatLog {
  std::vector<StepRecord> records;
  std::vector<double> rewards;
  std::vector<double> ma;
  long long convergence_steps = -1;  ///< Capacity: steps until halt; -1 if over budget.
};

struct RunResult {
  ExperimentKind kind = ExperimentKind::kCapacity;
  std::vector<RepeatLog> repeats;
  CurveStats aggregate;

  std::vector<long long> convergence_steps() const {
    std::vector<long long> out;
    out.reserve(repeats.size());
    for (const auto& r : repeats) out.push_back(r.convergence_steps);
    return out;
  }

  bool all_converged() const {
    return std::all_of(repeats.begin(), repeats.end(),
                       [](const RepeatLog& r) { return r.convergence_steps >= 0; });
  }
};

/// Runs fn(0..n-1) on a small worker pool. Work items are independent and
/// indexed, so scheduling order cannot affect results.
template <typename Fn>
inline void parallel_for_index(int n, int threads, Fn&& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace detail {

/// Trailing moving average maintained online.
class SlidingMean {
 public:
  explicit SlidingMean(int window) : window_(window) {}

  double push(double value) {
    buffer_.push_back(value);
    sum_ += value;
    if (static_cast<long long>(buffer_.size()) > window_) {
      sum_ -= buffer_[head_];
      ++head_;
    }
    return sum_ / static_cast<double>(static_cast<long long>(buffer_.size()) - head_);
  }

 private:
  long long window_;
  std::size_t head_ = 0;
  double sum_ = 0.0;
  std::vector<double> buffer_;
};

inline RepeatLog run_capacity_repeat(const ExperimentSpec& spec, int repeat) {
  RepeatLog log;
  ContextualDeterministicBandit env(spec.num_states, spec.num_arms,
                                    derive_seed(spec.master_seed, kEnvStream,
                                                static_cast<std::uint64_t>(repeat)));
  const std::uint64_t agent_seed =
      derive_seed(spec.master_seed, kAgentStream, static_cast<std::uint64_t>(repeat));

  std::optional<HtmrlAgent> htmrl;
  std::optional<EpsGreedyAgent> eps;
  if (spec.agent == AgentKind::kHtmrl) {
    AgentConfig cfg = make_agent_config(spec);
    cfg.seed = agent_seed;
    htmrl.emplace(cfg);
  } else {
    eps.emplace(spec.num_states, spec.num_arms, spec.epsilon, agent_seed);
  }

  SlidingMean ma(spec.effective_ma_window());
  int streak = 0;
  for (long long t = 0; t < spec.max_steps; ++t) {
    const int state = env.step();
    int action;
    double reward;
    double reward_norm;
    if (htmrl) {
      action = htmrl->act(state);
      reward = env.pull(state, action);
      reward_norm = htmrl->learn(reward);
    } else {
      action = eps->act(state);
      reward = env.pull(state, action);
      eps->learn(state, action, reward);
      reward_norm = reward;
    }
    const bool optimal = action == env.winning_arm(state);
    streak = optimal ? streak + 1 : 0;
    const double ma_value = ma.push(reward);
    log.rewards.push_back(reward);
    log.ma.push_back(ma_value);
    if (spec.keep_records) {
      log.records.push_back({repeat, t, state, action, reward, reward_norm, ma_value, optimal});
    }
    if (streak >= spec.halt_streak) {
      log.convergence_steps = t + 1;
      break;
    }
  }
  return log;
}

inline RepeatLog run_nonstationary_repeat(const ExperimentSpec& spec, int repeat) {
  RepeatLog log;
  GaussianBandit env(spec.gauss_arms, Schedule{spec.schedule, spec.period},
                     derive_seed(spec.master_seed, kEnvStream,
                                 static_cast<std::uint64_t>(repeat)));
  const std::uint64_t agent_seed =
      derive_seed(spec.master_seed, kAgentStream, static_cast<std::uint64_t>(repeat));

  std::optional<HtmrlAgent> htmrl;
  std::optional<EpsGreedyAgent> eps;
  if (spec.agent == AgentKind::kHtmrl) {
    AgentConfig cfg = make_agent_config(spec);
    cfg.seed = agent_seed;
    htmrl.emplace(cfg);
  } else {
    eps.emplace(1, spec.gauss_arms, spec.epsilon, agent_seed);
  }

  SlidingMean ma(spec.effective_ma_window());
  for (long long t = 0; t < spec.num_steps; ++t) {
    env.advance(t);
    int action;
    double reward;
    double reward_norm;
    if (htmrl) {
      action = htmrl->act(0);
      reward = env.pull(action);
      reward_norm = htmrl->learn(reward);
    } else {
      action = eps->act(0);
      reward = env.pull(action);
      eps->learn(0, action, reward);
      reward_norm = reward;
    }
    const bool optimal = action == env.best_arm();
    const double ma_value = ma.push(reward);
    log.rewards.push_back(reward);
    log.ma.push_back(ma_value);
    if (spec.keep_records) {
      log.records.push_back({repeat, t, 0, action, reward, reward_norm, ma_value, optimal});
    }
  }
  return log;
}

inline void attach_aggregate(RunResult& result, const ExperimentSpec& spec) {
  std::vector<std::vector<double>> curves;
  curves.reserve(result.repeats.size());
  if (spec.kind == ExperimentKind::kCapacity) {
    // Repeats halt at different steps; a halted agent keeps earning the
    // optimal +1, so pad rewards to the longest repeat before averaging.
    std::size_t max_len = 0;
    for (const auto& r : result.repeats) max_len = std::max(max_len, r.rewards.size());
    for (const auto& r : result.repeats) {
      std::vector<double> padded = r.rewards;
      padded.resize(max_len, 1.0);
      curves.push_back(moving_average(padded, spec.effective_ma_window()));
    }
  } else {
    for (const auto& r : result.repeats) curves.push_back(r.ma);
  }
  result.aggregate = aggregate_repeats(curves);
  if (spec.smooth_window > 0) {
    result.aggregate.smoothed =
        savgol_smooth(result.aggregate.mean, spec.smooth_window, spec.smooth_order);
    result.aggregate.smooth_window = spec.smooth_window;
    result.aggregate.smooth_order = spec.smooth_order;
  }
}

}  // namespace detail

/// Capacity experiment: contextual deterministic bandits, halting each
/// repeat once the last halt_streak actions were all optimal.
inline RunResult run_capacity(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.kind != ExperimentKind::kCapacity) {
    throw std::invalid_argument("run_capacity: spec kind mismatch");
  }
  RunResult result;
  result.kind = spec.kind;
  result.repeats.resize(static_cast<std::size_t>(spec.num_repeats));
  parallel_for_index(spec.num_repeats, spec.threads, [&](int r) {
    result.repeats[static_cast<std::size_t>(r)] = detail::run_capacity_repeat(spec, r);
  });
  detail::attach_aggregate(result, spec);
  return result;
}

/// Non-stationary experiment: Gaussian bandit under the configured schedule
/// for a fixed number of steps per repeat.
inline RunResult run_nonstationary(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.kind != ExperimentKind::kNonstationary) {
    throw std::invalid_argument("run_nonstationary: spec kind mismatch");
  }
  RunResult result;
  result.kind = spec.kind;
  result.repeats.resize(static_cast<std::size_t>(spec.num_repeats));
  parallel_for_index(spec.num_repeats, spec.threads, [&](int r) {
    result.repeats[static_cast<std::size_t>(r)] = detail::run_nonstationary_repeat(spec, r);
  });
  detail::attach_aggregate(result, spec);
  return result;
}

inline RunResult run_experiment(const ExperimentSpec& spec) {
  return spec.kind == ExperimentKind::kCapacity ? run_capacity(spec)
                                                : run_nonstationary(spec);
}

/// Per-segment summary of a curve split into period-long segments.
struct SegmentStats {
  double peak = 0.0;
  long long steps_to_threshold = -1;  ///< Offset into the segment; -1 if never exceeded.
};

/// Splits `curve` into consecutive period-long segments and reports, per
/// segment, the peak value and the first offset at which the curve strictly
/// exceeds threshold_fraction * (peak of the first segment).
inline std::vector<SegmentStats> segment_recovery_stats(const std::vector<double>& curve,
                                                        int period,
                                                        double threshold_fraction) {
  if (period <= 0) throw std::invalid_argument("segment_recovery_stats: period must be positive");
  if (curve.empty() || curve.size() % static_cast<std::size_t>(period) != 0) {
    throw std::invalid_argument(
        "segment_recovery_stats: curve length must be a positive multiple of period");
  }
  const std::size_t segments = curve.size() / static_cast<std::size_t>(period);
  const double first_peak =
      *std::max_element(curve.begin(), curve.begin() + period);
  const double threshold = threshold_fraction * first_peak;

  std::vector<SegmentStats> stats(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    const auto begin = curve.begin() + static_cast<std::ptrdiff_t>(s * period);
    SegmentStats& seg = stats[s];
    seg.peak = *std::max_element(begin, begin + period);
    for (int off = 0; off < period; ++off) {
      if (begin[off] > threshold) {
        seg.steps_to_threshold = off;
        break;
      }
    }
  }
  return stats;
}

}  // namespace htmrl
