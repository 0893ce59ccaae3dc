#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "htmrl/harness.hpp"

namespace htmrl {

inline std::string to_string(ExperimentKind k) {
  return k == ExperimentKind::kCapacity ? "capacity" : "nonstationary";
}
inline std::string to_string(AgentKind a) {
  return a == AgentKind::kHtmrl ? "htmrl" : "eps_greedy";
}
inline std::string to_string(Preset p) {
  switch (p) {
    case Preset::kFull: return "full";
    case Preset::kSmall: return "small";
    case Preset::kTiny: return "tiny";
  }
  return "full";
}
inline std::string to_string(ScheduleKind s) {
  switch (s) {
    case ScheduleKind::kNone: return "none";
    case ScheduleKind::kReinit: return "reinit";
    case ScheduleKind::kShuffle: return "shuffle";
  }
  return "none";
}
inline std::string to_string(const NormalizationConfig& n) {
  switch (n.mode) {
    case NormalizationMode::kOff: return "off";
    case NormalizationMode::kFullHistory: return "full";
    case NormalizationMode::kWindow: return std::to_string(n.window);
  }
  return "off";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "capacity") return ExperimentKind::kCapacity;
  if (s == "nonstationary") return ExperimentKind::kNonstationary;
  throw std::invalid_argument("unknown experiment kind: " + s);
}
inline AgentKind parse_agent_kind(const std::string& s) {
  if (s == "htmrl") return AgentKind::kHtmrl;
  if (s == "eps_greedy") return AgentKind::kEpsGreedy;
  throw std::invalid_argument("unknown agent kind: " + s);
}
inline Preset parse_preset(const std::string& s) {
  if (s == "full") return Preset::kFull;
  if (s == "small") return Preset::kSmall;
  if (s == "tiny") return Preset::kTiny;
  throw std::invalid_argument("unknown preset: " + s);
}
inline ScheduleKind parse_schedule(const std::string& s) {
  if (s == "none") return ScheduleKind::kNone;
  if (s == "reinit") return ScheduleKind::kReinit;
  if (s == "shuffle") return ScheduleKind::kShuffle;
  throw std::invalid_argument("unknown schedule: " + s);
}
inline NormalizationConfig parse_reward_window(const std::string& s) {
  if (s == "off") return NormalizationConfig::Off();
  if (s == "full") return NormalizationConfig::FullHistory();
  return NormalizationConfig::Window(std::stoi(s));
}

/// Locale-independent float formatting used in every emitted file; 12
/// significant digits round-trip the values we log.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Writes the spec as flat key=value lines. The timestamp line is the one
/// non-deterministic output of a run.
inline void write_manifest(std::ostream& out, const ExperimentSpec& spec) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  out << "timestamp=" << std::chrono::duration_cast<std::chrono::seconds>(now).count() << '\n';
  out << "kind=" << to_string(spec.kind) << '\n';
  out << "num_states=" << spec.num_states << '\n';
  out << "num_arms=" << spec.num_arms << '\n';
  out << "bits_per_state=" << spec.bits_per_state << '\n';
  out << "max_steps=" << spec.max_steps << '\n';
  out << "halt_streak=" << spec.halt_streak << '\n';
  out << "preset=" << to_string(spec.preset) << '\n';
  out << "schedule=" << to_string(spec.schedule) << '\n';
  out << "period=" << spec.period << '\n';
  out << "num_steps=" << spec.num_steps << '\n';
  out << "gauss_arms=" << spec.gauss_arms << '\n';
  out << "agent=" << to_string(spec.agent) << '\n';
  out << "epsilon=" << format_double(spec.epsilon) << '\n';
  out << "boost=" << (spec.boost ? "on" : "off") << '\n';
  out << "boost_strength=" << format_double(spec.boost_strength) << '\n';
  out << "perm_increment=" << format_double(spec.perm_increment) << '\n';
  out << "reward_window=" << to_string(spec.reward_norm) << '\n';
  out << "num_repeats=" << spec.num_repeats << '\n';
  out << "master_seed=" << spec.master_seed << '\n';
  out << "ma_window=" << spec.ma_window << '\n';
  out << "threads=" << spec.threads << '\n';
  out << "smooth_window=" << spec.smooth_window << '\n';
  out << "smooth_order=" << spec.smooth_order << '\n';
}

/// Rebuilds a spec from manifest lines; unknown keys and the timestamp are
/// ignored so manifests stay forward-compatible.
inline ExperimentSpec read_manifest(std::istream& in) {
  ExperimentSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "kind") spec.kind = parse_experiment_kind(value);
    else if (key == "num_states") spec.num_states = std::stoi(value);
    else if (key == "num_arms") spec.num_arms = std::stoi(value);
    else if (key == "bits_per_state") spec.bits_per_state = std::stoi(value);
    else if (key == "max_steps") spec.max_steps = std::stoll(value);
    else if (key == "halt_streak") spec.halt_streak = std::stoi(value);
    else if (key == "preset") spec.preset = parse_preset(value);
    else if (key == "schedule") spec.schedule = parse_schedule(value);
    else if (key == "period") spec.period = std::stoi(value);
    else if (key == "num_steps") spec.num_steps = std::stoll(value);
    else if (key == "gauss_arms") spec.gauss_arms = std::stoi(value);
    else if (key == "agent") spec.agent = parse_agent_kind(value);
    else if (key == "epsilon") spec.epsilon = std::stod(value);
    else if (key == "boost") spec.boost = (value == "on");
    else if (key == "boost_strength") spec.boost_strength = std::stod(value);
    else if (key == "perm_increment") spec.perm_increment = std::stod(value);
    else if (key == "reward_window") spec.reward_norm = parse_reward_window(value);
    else if (key == "num_repeats") spec.num_repeats = std::stoi(value);
    else if (key == "master_seed") spec.master_seed = std::stoull(value);
    else if (key == "ma_window") spec.ma_window = std::stoi(value);
    else if (key == "threads") spec.threads = std::stoi(value);
    else if (key == "smooth_window") spec.smooth_window = std::stoi(value);
    else if (key == "smooth_order") spec.smooth_order = std::stoi(value);
  }
  return spec;
}

/// Minimal static plot: mean line over a +-1 std band.
inline void write_curve_svg(std::ostream& out, const CurveStats& stats,
                            const std::string& title) {
  const int width = 900, height = 520;
  const double ml = 70, mr = 20, mt = 45, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const std::size_t n = stats.size();
  if (n < 2) throw std::invalid_argument("write_curve_svg: need at least 2 points");

  double ymin = stats.mean[0] - stats.stddev[0];
  double ymax = stats.mean[0] + stats.stddev[0];
  for (std::size_t i = 0; i < n; ++i) {
    ymin = std::min(ymin, stats.mean[i] - stats.stddev[i]);
    ymax = std::max(ymax, stats.mean[i] + stats.stddev[i]);
  }
  const double pad = (ymax - ymin) * 0.05 + 1e-12;
  ymin -= pad;
  ymax += pad;

  const auto x_of = [&](std::size_t i) {
    return ml + pw * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  const auto y_of = [&](double v) { return mt + ph * (1.0 - (v - ymin) / (ymax - ymin)); };
  const auto pt = [&](double x, double y) {
    return format_double(x) + "," + format_double(y) + " ";
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // std band
  out << "<polygon fill=\"#4c72b0\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < n; ++i) out << pt(x_of(i), y_of(stats.mean[i] + stats.stddev[i]));
  for (std::size_t i = n; i-- > 0;) out << pt(x_of(i), y_of(stats.mean[i] - stats.stddev[i]));
  out << "\"/>\n";

  // mean line
  out << "<polyline fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i) out << pt(x_of(i), y_of(stats.mean[i]));
  out << "\"/>\n";

  // axes and ticks
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = tick / 4.0;
    const double x = ml + pw * fx;
    const auto step = static_cast<long long>(fx * static_cast<double>(n - 1));
    out << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << mt + ph + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << step
        << "</text>\n";
    const double v = ymin + (ymax - ymin) * fx;
    const double y = y_of(v);
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%.3g", v);
    out << "<text x=\"" << ml - 9 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
        << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">step</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">reward</text>\n";
  out << "</svg>\n";
}

struct EmittedFiles {
  std::string per_repeat_csv;
  std::string aggregate_csv;
  std::string manifest;
  std::string plot;
};

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

}  // namespace detail

/// Writes the run outputs into spec.out_dir:
///   per_repeat.csv  repeat,step,state,action,reward,reward_norm,reward_ma,optimal
///   aggregate.csv   step,mean_reward,std_reward[,smoothed]
///   manifest.txt    flat key=value capture of the spec for exact reruns
///   curve.svg       optional plot of the aggregate curve
inline EmittedFiles emit_outputs(const RunResult& result, const ExperimentSpec& spec) {
  if (spec.out_dir.empty()) {
    throw std::invalid_argument("emit_outputs: spec.out_dir is empty");
  }
  const std::filesystem::path dir(spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                             ec.message());
  }

  EmittedFiles files;

  if (spec.keep_records) {
    const auto path = dir / "per_repeat.csv";
    auto out = detail::open_for_write(path);
    out << "repeat,step,state,action,reward,reward_norm,reward_ma,optimal\n";
    for (const auto& repeat : result.repeats) {
      for (const auto& r : repeat.records) {
        out << r.repeat << ',' << r.step << ',' << r.state << ',' << r.action << ','
            << format_double(r.reward) << ',' << format_double(r.reward_norm) << ','
            << format_double(r.reward_ma) << ',' << (r.optimal ? 1 : 0) << '\n';
      }
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
    files.per_repeat_csv = path.string();
  }

  {
    const auto path = dir / "aggregate.csv";
    auto out = detail::open_for_write(path);
    const bool smoothed = !result.aggregate.smoothed.empty();
    out << "step,mean_reward,std_reward" << (smoothed ? ",smoothed" : "") << "\n";
    for (std::size_t t = 0; t < result.aggregate.size(); ++t) {
      out << t << ',' << format_double(result.aggregate.mean[t]) << ','
          << format_double(result.aggregate.stddev[t]);
      if (smoothed) out << ',' << format_double(result.aggregate.smoothed[t]);
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
    files.aggregate_csv = path.string();
  }

  {
    const auto path = dir / "manifest.txt";
    auto out = detail::open_for_write(path);
    write_manifest(out, spec);
    if (!out) throw std::runtime_error("write failed: " + path.string());
    files.manifest = path.string();
  }

  if (spec.write_plot) {
    const auto path = dir / "curve.svg";
    auto out = detail::open_for_write(path);
    std::string title = to_string(spec.kind);
    if (spec.kind == ExperimentKind::kNonstationary) {
      title += " / " + to_string(spec.preset) + " / " + to_string(spec.schedule) + " / " +
               to_string(spec.agent);
    } else {
      title += " / |S|=" + std::to_string(spec.num_states) +
               " |A|=" + std::to_string(spec.num_arms);
    }
    write_curve_svg(out, result.aggregate, title);
    if (!out) throw std::runtime_error("write failed: " + path.string());
    files.plot = path.string();
  }

  return files;
}

}  // namespace htmrl
