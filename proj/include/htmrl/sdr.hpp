#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace htmrl {

/// Sparse Distributed Representation: a fixed-width binary vector stored as
/// the sorted list of its enabled bit indices.
struct Sdr {
  int width = 0;                 ///< Total number of bits.
  std::vector<int> enabled;      ///< Sorted, distinct indices in [0, width).

  /// Number of enabled bits.
  int popcount() const { return static_cast<int>(enabled.size()); }

  /// Fraction of bits enabled (the `d` of a sparse encoding).
  double active_fraction() const {
    return width == 0 ? 0.0 : static_cast<double>(enabled.size()) / width;
  }

  bool contains(int bit) const {
    return std::binary_search(enabled.begin(), enabled.end(), bit);
  }

  /// Checks the structural invariants: indices in range, sorted, distinct.
  void validate() const {
    if (width <= 0) {
      throw std::invalid_argument("Sdr: width must be positive");
    }
    int prev = -1;
    for (int bit : enabled) {
      if (bit < 0 || bit >= width) {
        throw std::invalid_argument("Sdr: bit index " + std::to_string(bit) +
                                    " out of range [0, " +
                                    std::to_string(width) + ")");
      }
      if (bit <= prev) {
        throw std::invalid_argument("Sdr: enabled bits must be sorted and distinct");
      }
      prev = bit;
    }
  }
};

/// Configuration for the categorical encoder.
struct CategoryEncoderConfig {
  int num_categories = 1;    ///< Number of distinct category indices.
  int bits_per_category = 1; ///< Bits enabled per encoding (block width).
};

/// Encodes a category index into an SDR.
///
/// Each category owns a contiguous, non-overlapping block of bits, so
/// encodings of distinct categories share no enabled bits: categories carry
/// no similarity structure. The output width is always
/// num_categories * bits_per_category, never configured independently.
///
/// Example (3 categories, 4 bits each):
///   encode(0) -> 1111 0000 0000
///   encode(1) -> 0000 1111 0000
///   encode(2) -> 0000 0000 1111
///
/// Stateless and deterministic; safe to share across threads.
class CategoryEncoder {
 public:
  explicit CategoryEncoder(const CategoryEncoderConfig& cfg) : cfg_(cfg) {
    if (cfg_.num_categories <= 0) {
      throw std::invalid_argument("CategoryEncoder: num_categories must be positive");
    }
    if (cfg_.bits_per_category <= 0) {
      throw std::invalid_argument("CategoryEncoder: bits_per_category must be positive");
    }
  }

  /// Encode a category index as an SDR with exactly the block
  /// [state*b, (state+1)*b) enabled.
  Sdr encode(int state) const {
    if (state < 0 || state >= cfg_.num_categories) {
      throw std::out_of_range("CategoryEncoder: state " + std::to_string(state) +
                              " out of range [0, " +
                              std::to_string(cfg_.num_categories) + ")");
    }
    Sdr sdr;
    sdr.width = width();
    sdr.enabled.resize(static_cast<std::size_t>(cfg_.bits_per_category));
    const int base = state * cfg_.bits_per_category;
    for (int i = 0; i < cfg_.bits_per_category; ++i) {
      sdr.enabled[static_cast<std::size_t>(i)] = base + i;
    }
    return sdr;
  }

  int width() const { return cfg_.num_categories * cfg_.bits_per_category; }

  const CategoryEncoderConfig& config() const { return cfg_; }

 private:
  CategoryEncoderConfig cfg_;
};

}  // namespace htmrl
