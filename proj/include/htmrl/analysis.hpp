#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "htmrl/rng.hpp"

namespace htmrl {

/// Parameters of the attainability question: given an input SDR of n bits
/// with a fraction d active, and cells whose potential pools cover a
/// fraction c of the input, what is the probability that every one of an
/// action's cells has at least one synapse into the active bits?
struct AttainabilityParams {
  int n = 0;                 ///< Input bits.
  double d = 0.0;            ///< Active fraction; d*n must be integral.
  double c = 0.0;            ///< Per-cell connected fraction; c*n must be integral.
  int cells_per_action = 2;  ///< Cells representing one action.

  int active_bits() const { return integral_product(d, "d"); }
  int connected_bits() const { return integral_product(c, "c"); }

  void validate() const {
    if (n <= 0) throw std::invalid_argument("AttainabilityParams: n must be positive");
    if (d < 0.0 || d > 1.0) throw std::invalid_argument("AttainabilityParams: d must be in [0, 1]");
    if (c <= 0.0 || c > 1.0) throw std::invalid_argument("AttainabilityParams: c must be in (0, 1]");
    if (cells_per_action <= 0) {
      throw std::invalid_argument("AttainabilityParams: cells_per_action must be positive");
    }
    active_bits();
    connected_bits();
  }

 private:
  int integral_product(double fraction, const char* name) const {
    const double exact = fraction * n;
    const long long rounded = std::llround(exact);
    if (std::fabs(exact - rounded) > 1e-9) {
      throw std::invalid_argument(std::string("AttainabilityParams: ") + name +
                                  "*n is not integral");
    }
    return static_cast<int>(rounded);
  }
};

/// log C(n, k) via log-gamma; exact enough for binomial ratios at any n the
/// library meets (avoids overflow of C(400, 200)).
inline double log_binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) {
    throw std::invalid_argument("log_binomial: need 0 <= k <= n");
  }
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Probability that an action is attainable: every one of its cells owns at
/// least one potential synapse into the active bits.
///
///   P = (1 - C(n - dn, cn) / C(n, cn)) ^ cells_per_action
///
/// computed in log space. The ratio term is the chance one cell's pool
/// misses all dn active bits; it is 0 when cn > n - dn (pigeonhole).
inline double attainability_probability(const AttainabilityParams& p) {
  p.validate();
  const int dn = p.active_bits();
  const int cn = p.connected_bits();
  if (cn > p.n - dn) return 1.0;
  const double log_miss = log_binomial(p.n - dn, cn) - log_binomial(p.n, cn);
  const double miss = std::exp(log_miss);
  if (miss >= 1.0) return 0.0;  // dn == 0: no active bits, no signal
  return std::exp(p.cells_per_action * std::log1p(-miss));
}

/// Probability that all `num_actions` actions are attainable from one state.
/// Bins partition the cells, so per-action pools are independent.
inline double all_actions_probability(const AttainabilityParams& p, int num_actions) {
  if (num_actions <= 0) {
    throw std::invalid_argument("all_actions_probability: num_actions must be positive");
  }
  return std::pow(attainability_probability(p), num_actions);
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo oracle for attainability_probability: directly samples each
/// cell's cn-subset pool and tests for a synapse into the first dn bits.
/// Returns the success frequency and its binomial standard error.
inline MonteCarloEstimate attainability_monte_carlo(const AttainabilityParams& p,
                                                    long long trials,
                                                    std::uint64_t seed) {
  p.validate();
  if (trials < 1) {
    throw std::invalid_argument("attainability_monte_carlo: trials must be >= 1");
  }
  const int dn = p.active_bits();
  const int cn = p.connected_bits();
  Rng rng(seed);
  std::vector<int> idx(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) idx[static_cast<std::size_t>(i)] = i;

  long long successes = 0;
  for (long long t = 0; t < trials; ++t) {
    bool all_hit = true;
    for (int cell = 0; cell < p.cells_per_action && all_hit; ++cell) {
      bool hit = false;
      for (int i = 0; i < cn; ++i) {
        const std::size_t j =
            i + uniform_below(rng, static_cast<std::size_t>(p.n - i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        if (idx[static_cast<std::size_t>(i)] < dn) hit = true;
      }
      // Restore the identity layout so every cell samples the full range.
      for (int i = 0; i < p.n; ++i) idx[static_cast<std::size_t>(i)] = i;
      all_hit = hit;
    }
    if (all_hit) ++successes;
  }
  MonteCarloEstimate result;
  result.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  result.std_error =
      std::sqrt(result.estimate * (1.0 - result.estimate) / static_cast<double>(trials));
  return result;
}

/// Trailing moving average with warm-up truncation: out[t] is the mean of
/// the last min(window, t+1) values.
inline std::vector<double> moving_average(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    sum += series[t];
    if (t >= static_cast<std::size_t>(window)) {
      sum -= series[t - static_cast<std::size_t>(window)];
    }
    const double span = std::min<double>(window, static_cast<double>(t + 1));
    out[t] = sum / span;
  }
  return out;
}

namespace detail {

/// Least-squares weights for evaluating a fitted degree-`order` polynomial
/// at sample position `center` of an m-point window. Positions are scaled
/// into [-1, 1] before forming the normal equations.
inline std::vector<double> savgol_weights(int m, int center, int order) {
  const int terms = order + 1;
  double scale = 1.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, std::fabs(static_cast<double>(i - center)));

  // Normal equations G a = b with G_jk = sum x^(j+k), b = e0 (value at x=0).
  std::vector<double> moments(static_cast<std::size_t>(2 * order + 1), 0.0);
  for (int i = 0; i < m; ++i) {
    const double x = (i - center) / scale;
    double xp = 1.0;
    for (int pwr = 0; pwr <= 2 * order; ++pwr) {
      moments[static_cast<std::size_t>(pwr)] += xp;
      xp *= x;
    }
  }
  std::vector<double> g(static_cast<std::size_t>(terms * terms));
  for (int j = 0; j < terms; ++j) {
    for (int k = 0; k < terms; ++k) {
      g[static_cast<std::size_t>(j * terms + k)] = moments[static_cast<std::size_t>(j + k)];
    }
  }
  std::vector<double> z(static_cast<std::size_t>(terms), 0.0);
  z[0] = 1.0;

  // Gaussian elimination with partial pivoting on the (tiny) system.
  for (int col = 0; col < terms; ++col) {
    int pivot = col;
    for (int row = col + 1; row < terms; ++row) {
      if (std::fabs(g[static_cast<std::size_t>(row * terms + col)]) >
          std::fabs(g[static_cast<std::size_t>(pivot * terms + col)])) {
        pivot = row;
      }
    }
    if (g[static_cast<std::size_t>(pivot * terms + col)] == 0.0) {
      throw std::invalid_argument("savgol_weights: singular fit (window too small for order)");
    }
    for (int k = 0; k < terms; ++k) {
      std::swap(g[static_cast<std::size_t>(col * terms + k)],
                g[static_cast<std::size_t>(pivot * terms + k)]);
    }
    std::swap(z[static_cast<std::size_t>(col)], z[static_cast<std::size_t>(pivot)]);
    const double diag = g[static_cast<std::size_t>(col * terms + col)];
    for (int row = 0; row < terms; ++row) {
      if (row == col) continue;
      const double f = g[static_cast<std::size_t>(row * terms + col)] / diag;
      for (int k = col; k < terms; ++k) {
        g[static_cast<std::size_t>(row * terms + k)] -=
            f * g[static_cast<std::size_t>(col * terms + k)];
      }
      z[static_cast<std::size_t>(row)] -= f * z[static_cast<std::size_t>(col)];
    }
  }
  for (int j = 0; j < terms; ++j) {
    z[static_cast<std::size_t>(j)] /= g[static_cast<std::size_t>(j * terms + j)];
  }

  // w_i = sum_j z_j x_i^j; smoothed value = sum_i w_i y_i.
  std::vector<double> weights(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double x = (i - center) / scale;
    double xp = 1.0;
    double w = 0.0;
    for (int j = 0; j < terms; ++j) {
      w += z[static_cast<std::size_t>(j)] * xp;
      xp *= x;
    }
    weights[static_cast<std::size_t>(i)] = w;
  }
  return weights;
}

}  // namespace detail

/// Savitzky-Golay smoothing: least-squares polynomial convolution over a
/// centered window. Near the ends the window is truncated to the available
/// samples and the fit order reduced if the truncated window is too small.
/// Polynomials of degree <= poly_order pass through unchanged at interior
/// points.
inline std::vector<double> savgol_smooth(const std::vector<double>& series,
                                         int window_length, int poly_order) {
  if (poly_order < 0) throw std::invalid_argument("savgol_smooth: poly_order must be >= 0");
  if (window_length % 2 == 0 || window_length <= poly_order) {
    throw std::invalid_argument("savgol_smooth: window_length must be odd and > poly_order");
  }
  const int len = static_cast<int>(series.size());
  if (len == 0) return {};
  const int half = window_length / 2;

  std::vector<double> interior_weights;
  if (len >= window_length) {
    interior_weights = detail::savgol_weights(window_length, half, poly_order);
  }

  std::vector<double> out(static_cast<std::size_t>(len));
  for (int t = 0; t < len; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(len - 1, t + half);
    const int m = hi - lo + 1;
    double acc = 0.0;
    if (m == window_length) {
      for (int i = 0; i < m; ++i) {
        acc += interior_weights[static_cast<std::size_t>(i)] *
               series[static_cast<std::size_t>(lo + i)];
      }
    } else {
      const int order = std::min(poly_order, m - 1);
      const auto weights = detail::savgol_weights(m, t - lo, order);
      for (int i = 0; i < m; ++i) {
        acc += weights[static_cast<std::size_t>(i)] * series[static_cast<std::size_t>(lo + i)];
      }
    }
    out[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

/// Pointwise mean and population standard deviation across repeats, plus
/// the smoothing applied downstream (if any).
struct CurveStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> smoothed;  ///< Empty unless smoothing was requested.
  int smooth_window = 0;
  int smooth_order = 0;

  std::size_t size() const { return mean.size(); }
};

/// Cross-repeat aggregation of equal-length per-repeat series.
inline CurveStats aggregate_repeats(const std::vector<std::vector<double>>& series) {
  if (series.empty()) throw std::invalid_argument("aggregate_repeats: no series");
  const std::size_t len = series.front().size();
  for (const auto& s : series) {
    if (s.size() != len) throw std::invalid_argument("aggregate_repeats: length mismatch");
  }
  CurveStats stats;
  stats.mean.resize(len);
  stats.stddev.resize(len);
  const double r = static_cast<double>(series.size());
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    for (const auto& s : series) sum += s[t];
    const double mu = sum / r;
    double sq = 0.0;
    for (const auto& s : series) sq += (s[t] - mu) * (s[t] - mu);
    stats.mean[t] = mu;
    stats.stddev[t] = std::sqrt(sq / r);
  }
  return stats;
}

}  // namespace htmrl
