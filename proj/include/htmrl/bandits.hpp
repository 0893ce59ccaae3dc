#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "htmrl/rng.hpp"

namespace htmrl {

/// Contextual bandit with deterministic rewards: each state (bandit index)
/// has one winning arm paying +1; every other arm pays -1. Winning arms are
/// drawn uniformly at construction and fixed for the run.
class ContextualDeterministicBandit {
 public:
  ContextualDeterministicBandit(int num_states, int num_arms, std::uint64_t seed)
      : num_arms_(num_arms), rng_(seed) {
    if (num_states <= 0 || num_arms <= 0) {
      throw std::invalid_argument("ContextualDeterministicBandit: dimensions must be positive");
    }
    winning_.resize(static_cast<std::size_t>(num_states));
    for (auto& arm : winning_) {
      arm = static_cast<int>(uniform_below(rng_, static_cast<std::size_t>(num_arms)));
    }
  }

  /// Samples the next state (bandit index) uniformly.
  int step() { return static_cast<int>(uniform_below(rng_, winning_.size())); }

  /// Deterministic reward: +1 iff `arm` is the state's winning arm, else -1.
  double pull(int state, int arm) const {
    check_state(state);
    if (arm < 0 || arm >= num_arms_) {
      throw std::invalid_argument("ContextualDeterministicBandit: arm out of range");
    }
    return arm == winning_[static_cast<std::size_t>(state)] ? 1.0 : -1.0;
  }

  int winning_arm(int state) const {
    check_state(state);
    return winning_[static_cast<std::size_t>(state)];
  }

  int num_states() const { return static_cast<int>(winning_.size()); }
  int num_arms() const { return num_arms_; }

 private:
  void check_state(int state) const {
    if (state < 0 || state >= num_states()) {
      throw std::invalid_argument("ContextualDeterministicBandit: state out of range");
    }
  }

  int num_arms_;
  std::vector<int> winning_;
  Rng rng_;
};

enum class ScheduleKind { kNone, kReinit, kShuffle };

/// Non-stationarity schedule: an event fires at every positive multiple of
/// `period`, before that step's pull.
struct Schedule {
  ScheduleKind kind = ScheduleKind::kNone;
  int period = 2000;
};

enum class ScheduleEvent { kNone, kReinit, kShuffle };

/// Stochastic multi-armed bandit. Each arm holds a score drawn from N(0, 1);
/// pulling an arm pays N(score, 1). The schedule either resamples all scores
/// (reinit) or permutes the existing ones (shuffle).
class GaussianBandit {
 public:
  GaussianBandit(int num_arms, const Schedule& schedule, std::uint64_t seed)
      : schedule_(schedule), rng_(seed) {
    if (num_arms <= 0) {
      throw std::invalid_argument("GaussianBandit: num_arms must be positive");
    }
    if (schedule_.kind != ScheduleKind::kNone && schedule_.period <= 0) {
      throw std::invalid_argument("GaussianBandit: schedule period must be positive");
    }
    scores_.resize(static_cast<std::size_t>(num_arms));
    reinit_scores();
  }

  /// Fires the schedule event due at `step` (0-based), if any. Call once per
  /// step before pulling.
  ScheduleEvent advance(long long step) {
    if (schedule_.kind == ScheduleKind::kNone) return ScheduleEvent::kNone;
    if (step <= 0 || step % schedule_.period != 0) return ScheduleEvent::kNone;
    if (schedule_.kind == ScheduleKind::kReinit) {
      reinit_scores();
      return ScheduleEvent::kReinit;
    }
    std::shuffle(scores_.begin(), scores_.end(), rng_);
    return ScheduleEvent::kShuffle;
  }

  double pull(int arm) {
    if (arm < 0 || arm >= num_arms()) {
      throw std::invalid_argument("GaussianBandit: arm out of range");
    }
    std::normal_distribution<double> reward(scores_[static_cast<std::size_t>(arm)], 1.0);
    return reward(rng_);
  }

  const std::vector<double>& scores() const { return scores_; }

  int best_arm() const {
    return static_cast<int>(std::max_element(scores_.begin(), scores_.end()) -
                            scores_.begin());
  }

  int num_arms() const { return static_cast<int>(scores_.size()); }
  const Schedule& schedule() const { return schedule_; }

 private:
  void reinit_scores() {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& s : scores_) s = dist(rng_);
  }

  Schedule schedule_;
  std::vector<double> scores_;
  Rng rng_;
};

/// Sample-average epsilon-greedy baseline with per-(state, arm) estimates.
/// Estimates start at 0 and equal the arithmetic mean of observed rewards.
class EpsGreedyAgent {
 public:
  EpsGreedyAgent(int num_states, int num_arms, double epsilon, std::uint64_t seed)
      : num_states_(num_states), num_arms_(num_arms), epsilon_(epsilon), rng_(seed) {
    if (num_states <= 0 || num_arms <= 0) {
      throw std::invalid_argument("EpsGreedyAgent: dimensions must be positive");
    }
    if (epsilon < 0.0 || epsilon > 1.0) {
      throw std::invalid_argument("EpsGreedyAgent: epsilon must be in [0, 1]");
    }
    estimates_.assign(static_cast<std::size_t>(num_states) * num_arms, 0.0);
    pulls_.assign(estimates_.size(), 0);
  }

  /// Uniform random arm with probability epsilon, otherwise the greedy arm
  /// (ties uniform).
  int act(int state) {
    check(state, 0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) < epsilon_) {
      return static_cast<int>(uniform_below(rng_, static_cast<std::size_t>(num_arms_)));
    }
    double best = estimates_[index(state, 0)];
    std::vector<int> best_arms{0};
    for (int a = 1; a < num_arms_; ++a) {
      const double est = estimates_[index(state, a)];
      if (est > best) {
        best = est;
        best_arms.clear();
      }
      if (est == best) best_arms.push_back(a);
    }
    return best_arms[uniform_below(rng_, best_arms.size())];
  }

  /// Incremental sample-average update.
  void learn(int state, int arm, double reward) {
    check(state, arm);
    const std::size_t i = index(state, arm);
    ++pulls_[i];
    estimates_[i] += (reward - estimates_[i]) / static_cast<double>(pulls_[i]);
  }

  double estimate(int state, int arm) const {
    check(state, arm);
    return estimates_[index(state, arm)];
  }

  long long pull_count(int state, int arm) const {
    check(state, arm);
    return pulls_[index(state, arm)];
  }

  double epsilon() const { return epsilon_; }

 private:
  void check(int state, int arm) const {
    if (state < 0 || state >= num_states_ || arm < 0 || arm >= num_arms_) {
      throw std::invalid_argument("EpsGreedyAgent: index out of range");
    }
  }

  std::size_t index(int state, int arm) const {
    return static_cast<std::size_t>(state) * num_arms_ + arm;
  }

  int num_states_;
  int num_arms_;
  double epsilon_;
  std::vector<double> estimates_;
  std::vector<long long> pulls_;
  Rng rng_;
};

}  // namespace htmrl
