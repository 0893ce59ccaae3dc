#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "htmrl/rng.hpp"
#include "htmrl/sdr.hpp"

namespace htmrl {

/// Dimensions and plasticity/boost parameters of a spatial pooler.
struct PoolerConfig {
  int input_width = 0;             ///< n: number of input bits.
  int num_cells = 2048;            ///< Output cells.
  int num_active = 40;             ///< k: cells activated per step.
  double potential_fraction = 0.5; ///< c: fraction of input bits each cell may synapse to.
  double perm_threshold = 0.5;     ///< Permanence at which a synapse is connected.
  double perm_increment = 0.05;    ///< Base permanence step, scaled by the caller.
  double perm_decrement = 0.05;    ///< Step of the classic-HTM weaken pass.
  double boost_strength = 2.0;     ///< Exploration strength; 0 disables boosting.
  int duty_cycle_period = 1000;    ///< Moving-average horizon for duty cycles.

  /// Potential synapses per cell: round(c * n), at least 1 for a valid config.
  int potential_pool_size() const {
    return static_cast<int>(std::lround(potential_fraction * input_width));
  }

  /// Long-run activation fraction a cell should settle at: k / num_cells.
  double target_density() const {
    return static_cast<double>(num_active) / num_cells;
  }

  void validate() const {
    if (input_width <= 0) throw std::invalid_argument("PoolerConfig: input_width must be positive");
    if (num_cells <= 0) throw std::invalid_argument("PoolerConfig: num_cells must be positive");
    if (num_active <= 0 || num_active > num_cells) {
      throw std::invalid_argument("PoolerConfig: num_active must be in [1, num_cells]");
    }
    if (potential_fraction <= 0.0 || potential_fraction > 1.0) {
      throw std::invalid_argument("PoolerConfig: potential_fraction must be in (0, 1]");
    }
    if (potential_pool_size() < 1) {
      throw std::invalid_argument("PoolerConfig: potential pool rounds to zero synapses per cell");
    }
    if (perm_threshold < 0.0 || perm_threshold > 1.0) {
      throw std::invalid_argument("PoolerConfig: perm_threshold must be in [0, 1]");
    }
    if (perm_increment < 0.0 || perm_increment > 1.0) {
      throw std::invalid_argument("PoolerConfig: perm_increment must be in [0, 1]");
    }
    if (perm_decrement < 0.0 || perm_decrement > 1.0) {
      throw std::invalid_argument("PoolerConfig: perm_decrement must be in [0, 1]");
    }
    if (boost_strength < 0.0) {
      throw std::invalid_argument("PoolerConfig: boost_strength must be nonnegative");
    }
    if (duty_cycle_period <= 0) {
      throw std::invalid_argument("PoolerConfig: duty_cycle_period must be positive");
    }
  }
};

/// Spatial pooler: maps input SDRs to a fixed-size set of active cells via
/// competitive overlap scoring, with homeostatic boosting and Hebbian
/// permanence updates.
///
/// Each cell owns synapses to a random subset of input bits. The set of
/// (cell, bit) pairs is fixed at construction; only permanences change.
/// A synapse carries signal only while its permanence is at or above
/// `perm_threshold`.
///
/// The permanence update accepts an external scale factor so a caller can
/// modulate plasticity (e.g. by a reward signal). Classic HTM behaviour is
/// two passes per step: adapt_synapses(input, active, +1) and
/// decrement_synapses(input, inactive).
///
/// Instances are single-writer; run one pooler per thread.
class SpatialPooler {
 public:
  struct Synapse {
    int bit;            ///< Presynaptic input bit.
    double permanence;  ///< In [0, 1].
  };

  /// Builds the synapse table: each cell samples potential_pool_size() input
  /// bits uniformly without replacement, with permanences uniform in [0, 1).
  /// Fully deterministic given `seed`.
  SpatialPooler(const PoolerConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const int pool_size = cfg_.potential_pool_size();
    Rng rng(seed);
    std::vector<int> indices(static_cast<std::size_t>(cfg_.input_width));
    for (int i = 0; i < cfg_.input_width; ++i) indices[static_cast<std::size_t>(i)] = i;
    std::uniform_real_distribution<double> perm_dist(0.0, 1.0);

    pools_.resize(static_cast<std::size_t>(cfg_.num_cells));
    for (auto& pool : pools_) {
      // Partial Fisher-Yates: first pool_size entries become the sample.
      for (int i = 0; i < pool_size; ++i) {
        const std::size_t j = i + uniform_below(rng, static_cast<std::size_t>(cfg_.input_width - i));
        std::swap(indices[static_cast<std::size_t>(i)], indices[j]);
      }
      pool.resize(static_cast<std::size_t>(pool_size));
      for (int i = 0; i < pool_size; ++i) {
        pool[static_cast<std::size_t>(i)].bit = indices[static_cast<std::size_t>(i)];
      }
      std::sort(pool.begin(), pool.end(),
                [](const Synapse& a, const Synapse& b) { return a.bit < b.bit; });
      for (auto& syn : pool) syn.permanence = perm_dist(rng);
    }
    finish_init();
  }

  /// Testing hook: builds a pooler with explicit potential pools (one vector
  /// of input-bit indices per cell; may be ragged or empty) and all
  /// permanences zero. Combine with set_permanence() to stage fixtures.
  SpatialPooler(const PoolerConfig& cfg, const std::vector<std::vector<int>>& pools)
      : cfg_(cfg) {
    cfg_.validate();
    if (static_cast<int>(pools.size()) != cfg_.num_cells) {
      throw std::invalid_argument("SpatialPooler: one pool per cell required");
    }
    pools_.resize(pools.size());
    for (std::size_t cell = 0; cell < pools.size(); ++cell) {
      for (int bit : pools[cell]) {
        if (bit < 0 || bit >= cfg_.input_width) {
          throw std::invalid_argument("SpatialPooler: pool bit out of range");
        }
        pools_[cell].push_back(Synapse{bit, 0.0});
      }
      std::sort(pools_[cell].begin(), pools_[cell].end(),
                [](const Synapse& a, const Synapse& b) { return a.bit < b.bit; });
    }
    finish_init();
  }

  /// Per-cell count of connected synapses from enabled input bits.
  std::vector<int> compute_overlaps(const Sdr& input) const {
    if (input.width != cfg_.input_width) {
      throw std::invalid_argument("compute_overlaps: input width " +
                                  std::to_string(input.width) + " != " +
                                  std::to_string(cfg_.input_width));
    }
    std::vector<int> counts(static_cast<std::size_t>(cfg_.num_cells), 0);
    for (int bit : input.enabled) {
      if (bit < 0 || bit >= cfg_.input_width) {
        throw std::invalid_argument("compute_overlaps: enabled bit out of range");
      }
      for (const auto& [cell, slot] : by_bit_[static_cast<std::size_t>(bit)]) {
        if (pools_[static_cast<std::size_t>(cell)][static_cast<std::size_t>(slot)].permanence >=
            cfg_.perm_threshold) {
          ++counts[static_cast<std::size_t>(cell)];
        }
      }
    }
    return counts;
  }

  /// Amplifies overlap counts of rarely-active cells:
  ///   score_j = count_j * exp(boost_strength * (target_density - duty_j)).
  /// With boost_strength = 0 the scores equal the counts exactly.
  std::vector<double> apply_boosting(const std::vector<int>& counts) const {
    if (static_cast<int>(counts.size()) != cfg_.num_cells) {
      throw std::invalid_argument("apply_boosting: counts size mismatch");
    }
    std::vector<double> scores(counts.size());
    if (cfg_.boost_strength == 0.0) {
      for (std::size_t j = 0; j < counts.size(); ++j) scores[j] = counts[j];
      return scores;
    }
    const double target = cfg_.target_density();
    for (std::size_t j = 0; j < counts.size(); ++j) {
      scores[j] = counts[j] == 0
                      ? 0.0
                      : counts[j] * std::exp(cfg_.boost_strength * (target - duty_[j]));
    }
    return scores;
  }

  /// Exactly num_active cells with the highest scores, sorted ascending.
  /// Ties at the selection boundary are broken uniformly at random from
  /// `tie_rng`; cells with zero score remain eligible.
  std::vector<int> select_active(const std::vector<double>& scores, Rng& tie_rng) const {
    if (static_cast<int>(scores.size()) != cfg_.num_cells) {
      throw std::invalid_argument("select_active: scores size mismatch");
    }
    const int k = cfg_.num_active;
    std::vector<double> order(scores);
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), std::greater<double>());
    const double boundary = order[static_cast<std::size_t>(k - 1)];

    std::vector<int> active;
    active.reserve(static_cast<std::size_t>(k));
    std::vector<int> tied;
    for (int j = 0; j < cfg_.num_cells; ++j) {
      const double s = scores[static_cast<std::size_t>(j)];
      if (s > boundary) {
        active.push_back(j);
      } else if (s == boundary) {
        tied.push_back(j);
      }
    }
    // Fill the remaining slots uniformly from the boundary ties.
    std::size_t need = static_cast<std::size_t>(k) - active.size();
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t j = i + uniform_below(tie_rng, tied.size() - i);
      std::swap(tied[i], tied[j]);
      active.push_back(tied[i]);
    }
    std::sort(active.begin(), active.end());
    return active;
  }

  /// Folds this step's active set into the per-cell duty cycles:
  ///   duty <- duty * (T-1)/T + active/T,  T = min(duty_cycle_period, steps).
  void update_duty_cycles(const std::vector<int>& active) {
    ++steps_;
    const double t = static_cast<double>(
        std::min<long long>(cfg_.duty_cycle_period, steps_));
    const double decay = (t - 1.0) / t;
    for (double& d : duty_) d *= decay;
    for (int cell : active) {
      duty_[check_cell(cell)] += 1.0 / t;
    }
  }

  /// Moves every synapse from an enabled input bit to a cell in `cells` by
  /// scale * perm_increment, clamped to [0, 1]. All other synapses are
  /// untouched. Negative scales weaken; may (dis)connect synapses.
  void adapt_synapses(const Sdr& input, const std::vector<int>& cells, double scale) {
    if (input.width != cfg_.input_width) {
      throw std::invalid_argument("adapt_synapses: input width mismatch");
    }
    const double delta = scale * cfg_.perm_increment;
    if (delta == 0.0 || cells.empty()) return;
    stage_mask(input);
    for (int cell : cells) {
      for (auto& syn : pools_[check_cell(cell)]) {
        if (mask_[static_cast<std::size_t>(syn.bit)]) {
          syn.permanence = std::clamp(syn.permanence + delta, 0.0, 1.0);
        }
      }
    }
  }

  /// Classic-HTM weaken pass: synapses from enabled bits to `cells` lose
  /// perm_decrement. Kept for non-RL usage; the RL agent never calls it.
  void decrement_synapses(const Sdr& input, const std::vector<int>& cells) {
    if (input.width != cfg_.input_width) {
      throw std::invalid_argument("decrement_synapses: input width mismatch");
    }
    if (cfg_.perm_decrement == 0.0 || cells.empty()) return;
    stage_mask(input);
    for (int cell : cells) {
      for (auto& syn : pools_[check_cell(cell)]) {
        if (mask_[static_cast<std::size_t>(syn.bit)]) {
          syn.permanence = std::clamp(syn.permanence - cfg_.perm_decrement, 0.0, 1.0);
        }
      }
    }
  }

  const PoolerConfig& config() const { return cfg_; }
  long long steps() const { return steps_; }
  double duty_cycle(int cell) const { return duty_[check_cell(cell)]; }
  const std::vector<Synapse>& synapses(int cell) const { return pools_[check_cell(cell)]; }

  /// Permanence of the (cell, bit) synapse; throws if the pair has none.
  double permanence(int cell, int bit) const {
    return find_synapse(cell, bit).permanence;
  }

  bool has_synapse(int cell, int bit) const {
    const auto& pool = pools_[check_cell(cell)];
    return std::any_of(pool.begin(), pool.end(),
                       [bit](const Synapse& s) { return s.bit == bit; });
  }

  /// Testing/golden-state hook: overwrite one synapse's permanence.
  void set_permanence(int cell, int bit, double value) {
    if (value < 0.0 || value > 1.0) {
      throw std::invalid_argument("set_permanence: value must be in [0, 1]");
    }
    find_synapse(cell, bit).permanence = value;
  }

  /// Writes the full learnable state as flat CSV: a `cell,bit,permanence`
  /// table sorted by (cell, bit), then a `cell,duty_cycle` table introduced
  /// by a `# duty_cycles` line. Values carry round-trip precision.
  void dump_state(std::ostream& out) const {
    out << "cell,bit,permanence\n";
    char buf[64];
    for (int cell = 0; cell < cfg_.num_cells; ++cell) {
      for (const auto& syn : pools_[static_cast<std::size_t>(cell)]) {
        std::snprintf(buf, sizeof(buf), "%.17g", syn.permanence);
        out << cell << ',' << syn.bit << ',' << buf << '\n';
      }
    }
    out << "# duty_cycles\n";
    out << "cell,duty_cycle\n";
    for (int cell = 0; cell < cfg_.num_cells; ++cell) {
      std::snprintf(buf, sizeof(buf), "%.17g", duty_[static_cast<std::size_t>(cell)]);
      out << cell << ',' << buf << '\n';
    }
  }

 private:
  void finish_init() {
    duty_.assign(static_cast<std::size_t>(cfg_.num_cells), 0.0);
    mask_.assign(static_cast<std::size_t>(cfg_.input_width), 0);
    by_bit_.assign(static_cast<std::size_t>(cfg_.input_width), {});
    for (int cell = 0; cell < cfg_.num_cells; ++cell) {
      const auto& pool = pools_[static_cast<std::size_t>(cell)];
      for (int slot = 0; slot < static_cast<int>(pool.size()); ++slot) {
        by_bit_[static_cast<std::size_t>(pool[static_cast<std::size_t>(slot)].bit)]
            .emplace_back(cell, slot);
      }
    }
  }

  std::size_t check_cell(int cell) const {
    if (cell < 0 || cell >= cfg_.num_cells) {
      throw std::invalid_argument("SpatialPooler: cell index out of range");
    }
    return static_cast<std::size_t>(cell);
  }

  Synapse& find_synapse(int cell, int bit) {
    for (auto& syn : pools_[check_cell(cell)]) {
      if (syn.bit == bit) return syn;
    }
    throw std::invalid_argument("SpatialPooler: no synapse from bit " +
                                std::to_string(bit) + " to cell " + std::to_string(cell));
  }

  const Synapse& find_synapse(int cell, int bit) const {
    return const_cast<SpatialPooler*>(this)->find_synapse(cell, bit);
  }

  void stage_mask(const Sdr& input) {
    std::fill(mask_.begin(), mask_.end(), 0);
    for (int bit : input.enabled) {
      if (bit < 0 || bit >= cfg_.input_width) {
        throw std::invalid_argument("SpatialPooler: enabled bit out of range");
      }
      mask_[static_cast<std::size_t>(bit)] = 1;
    }
  }

  PoolerConfig cfg_;
  std::vector<std::vector<Synapse>> pools_;                 // per-cell, sorted by bit
  std::vector<std::vector<std::pair<int, int>>> by_bit_;    // bit -> (cell, slot)
  std::vector<double> duty_;
  std::vector<unsigned char> mask_;                         // scratch for adapt passes
  long long steps_ = 0;
};

}  // namespace htmrl
