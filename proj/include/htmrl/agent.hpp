#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "htmrl/rng.hpp"
#include "htmrl/sdr.hpp"
#include "htmrl/spatial_pooler.hpp"

namespace htmrl {

enum class NormalizationMode {
  kOff,          ///< Rewards pass through unchanged.
  kWindow,       ///< Z-score over the w most recent rewards (incl. current).
  kFullHistory,  ///< Z-score over all rewards seen so far (incl. current).
};

struct NormalizationConfig {
  NormalizationMode mode = NormalizationMode::kOff;
  int window = 1000;

  static NormalizationConfig Off() { return {NormalizationMode::kOff, 0}; }
  static NormalizationConfig Window(int w) { return {NormalizationMode::kWindow, w}; }
  static NormalizationConfig FullHistory() { return {NormalizationMode::kFullHistory, 0}; }
};

/// Streaming z-score of a reward signal.
///
/// Window mode keeps the min(w, steps) most recent rewards including the
/// current one; full-history mode keeps running aggregates (Welford). The
/// standard deviation is the population one. Degenerate windows (sigma below
/// kSigmaFloor) normalize to 0: identical recent rewards carry no signal.
class RewardNormalizer {
 public:
  static constexpr double kSigmaFloor = 1e-12;

  explicit RewardNormalizer(const NormalizationConfig& cfg) : cfg_(cfg) {
    if (cfg_.mode == NormalizationMode::kWindow) {
      if (cfg_.window <= 0) {
        throw std::invalid_argument("RewardNormalizer: window must be positive");
      }
      ring_.assign(static_cast<std::size_t>(cfg_.window), 0.0);
    }
  }

  /// Pushes r and returns its z-score against the retained values.
  double normalize(double r) {
    switch (cfg_.mode) {
      case NormalizationMode::kOff:
        return r;
      case NormalizationMode::kWindow: {
        const std::size_t slot = static_cast<std::size_t>(count_ % cfg_.window);
        if (count_ >= cfg_.window) {
          const double old = ring_[slot];
          sum_ -= old;
          sum_sq_ -= old * old;
        }
        ring_[slot] = r;
        sum_ += r;
        sum_sq_ += r * r;
        ++count_;
        return zscore(r);
      }
      case NormalizationMode::kFullHistory: {
        ++count_;
        const double delta = r - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (r - mean_);
        return sigma() < kSigmaFloor ? 0.0 : (r - mean_) / sigma();
      }
    }
    return r;
  }

  /// Rewards currently retained (window mode caps at w).
  int retained() const {
    if (cfg_.mode == NormalizationMode::kWindow) {
      return static_cast<int>(std::min<long long>(count_, cfg_.window));
    }
    return static_cast<int>(count_);
  }

  long long count() const { return count_; }

  double mean() const {
    if (cfg_.mode == NormalizationMode::kFullHistory) return mean_;
    const int n = retained();
    return n == 0 ? 0.0 : sum_ / n;
  }

  double sigma() const {
    const int n = retained();
    if (n == 0) return 0.0;
    if (cfg_.mode == NormalizationMode::kFullHistory) {
      return std::sqrt(m2_ / n);
    }
    const double mu = sum_ / n;
    return std::sqrt(std::max(0.0, sum_sq_ / n - mu * mu));
  }

  const NormalizationConfig& config() const { return cfg_; }

 private:
  double zscore(double r) const {
    const double s = sigma();
    return s < kSigmaFloor ? 0.0 : (r - mean()) / s;
  }

  NormalizationConfig cfg_;
  std::vector<double> ring_;     // window mode
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double mean_ = 0.0;            // full-history mode (Welford)
  double m2_ = 0.0;
  long long count_ = 0;
};

/// Which synapses the learning step touches.
enum class UpdateSet {
  kChosenBinActive,  ///< Active cells lying in the chosen action's bin.
  kAllActive,        ///< All active cells regardless of bin.
};

struct AgentConfig {
  CategoryEncoderConfig encoder;
  PoolerConfig pooler;
  int num_actions = 2;
  NormalizationConfig normalization = NormalizationConfig::Off();
  UpdateSet update_set = UpdateSet::kChosenBinActive;
  std::uint64_t seed = 0;

  /// Cells per action bin; trailing cells beyond num_actions * bin_size are
  /// disabled. Must be at least 2 to avoid permanent k-way bin ties.
  int bin_size() const { return pooler.num_cells / num_actions; }

  void validate() const {
    pooler.validate();
    CategoryEncoder probe(encoder);  // validates encoder fields
    if (probe.width() != pooler.input_width) {
      throw std::invalid_argument("AgentConfig: encoder width " +
                                  std::to_string(probe.width()) +
                                  " != pooler input_width " +
                                  std::to_string(pooler.input_width));
    }
    if (num_actions <= 0) {
      throw std::invalid_argument("AgentConfig: num_actions must be positive");
    }
    if (bin_size() < 2) {
      throw std::invalid_argument("AgentConfig: bin size must be at least 2 (too many actions)");
    }
    if (normalization.mode == NormalizationMode::kWindow && normalization.window <= 0) {
      throw std::invalid_argument("AgentConfig: normalization window must be positive");
    }
  }
};

/// RL agent built from a spatial pooler.
///
/// act(): encodes the state, activates cells, partitions them into one bin
/// of consecutive cells per action, and returns the plurality bin (uniform
/// random tie-break). learn(): normalizes the reward and moves the synapses
/// from the enabled input bits to the stored update cells by that amount.
/// Synapses to cells outside the update set are never modified.
///
/// act() and learn() must strictly alternate. One agent per thread.
class HtmrlAgent {
 public:
  struct Decision {
    Sdr input;
    std::vector<int> active;        ///< All active cells, sorted.
    int action = -1;
    std::vector<int> update_cells;  ///< Subset learn() will touch.
  };

  explicit HtmrlAgent(const AgentConfig& cfg)
      : cfg_(cfg),
        encoder_((cfg.validate(), cfg.encoder)),
        pooler_(cfg.pooler, derive_seed(cfg.seed, 0, 0)),
        normalizer_(cfg.normalization),
        rng_(derive_seed(cfg.seed, 1, 0)) {}

  /// Chooses an action for `state`. Throws std::logic_error if a decision is
  /// already pending.
  int act(int state) {
    if (pending_) {
      throw std::logic_error("HtmrlAgent::act: learn() has not consumed the pending decision");
    }
    Decision d;
    d.input = encoder_.encode(state);
    const auto counts = pooler_.compute_overlaps(d.input);
    const auto scores = pooler_.apply_boosting(counts);
    d.active = pooler_.select_active(scores, rng_);
    pooler_.update_duty_cycles(d.active);

    const int bin_size = cfg_.bin_size();
    const int usable = cfg_.num_actions * bin_size;
    std::vector<int> bin_hits(static_cast<std::size_t>(cfg_.num_actions), 0);
    for (int cell : d.active) {
      if (cell < usable) ++bin_hits[static_cast<std::size_t>(cell / bin_size)];
    }
    int best = 0;
    std::vector<int> best_bins;
    for (int a = 0; a < cfg_.num_actions; ++a) {
      const int hits = bin_hits[static_cast<std::size_t>(a)];
      if (hits > best) {
        best = hits;
        best_bins.clear();
      }
      if (hits == best) best_bins.push_back(a);
    }
    d.action = best_bins[uniform_below(rng_, best_bins.size())];

    if (cfg_.update_set == UpdateSet::kAllActive) {
      d.update_cells = d.active;
    } else {
      const int lo = d.action * bin_size;
      const int hi = lo + bin_size;
      for (int cell : d.active) {
        if (cell >= lo && cell < hi) d.update_cells.push_back(cell);
      }
    }
    pending_ = std::move(d);
    return pending_->action;
  }

  /// Applies the reward to the pending decision; returns the normalized
  /// reward actually used as the plasticity scale.
  double learn(double reward) {
    if (!pending_) {
      throw std::logic_error("HtmrlAgent::learn: no pending decision (call act() first)");
    }
    const double scaled = normalizer_.normalize(reward);
    pooler_.adapt_synapses(pending_->input, pending_->update_cells, scaled);
    pending_.reset();
    return scaled;
  }

  bool has_pending() const { return pending_.has_value(); }
  const Decision& pending() const {
    if (!pending_) throw std::logic_error("HtmrlAgent: no pending decision");
    return *pending_;
  }

  int num_actions() const { return cfg_.num_actions; }
  int bin_size() const { return cfg_.bin_size(); }
  const AgentConfig& config() const { return cfg_; }
  const SpatialPooler& pooler() const { return pooler_; }
  SpatialPooler& pooler() { return pooler_; }
  const RewardNormalizer& normalizer() const { return normalizer_; }

 private:
  AgentConfig cfg_;
  CategoryEncoder encoder_;
  SpatialPooler pooler_;
  RewardNormalizer normalizer_;
  Rng rng_;
  std::optional<Decision> pending_;
};

}  // namespace htmrl
