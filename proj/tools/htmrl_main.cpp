// Command-line driver for the HTMRL experiments: capacity sweeps on
// deterministic contextual bandits, non-stationary Gaussian-bandit runs,
// and the attainability analysis.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "htmrl/analysis.hpp"
#include "htmrl/experiment_io.hpp"
#include "htmrl/harness.hpp"

namespace {

htmrl::AgentKind parse_agent_option(const std::string& value, double* epsilon) {
  if (value == "htmrl") return htmrl::AgentKind::kHtmrl;
  if (value.rfind("eps:", 0) == 0) {
    *epsilon = std::stod(value.substr(4));
    return htmrl::AgentKind::kEpsGreedy;
  }
  throw CLI::ValidationError("--agent", "expected 'htmrl' or 'eps:<epsilon>'");
}

void print_capacity_summary(const htmrl::RunResult& result, const htmrl::ExperimentSpec& spec) {
  const auto steps = result.convergence_steps();
  long long converged = 0;
  long long total = 0;
  long long worst = 0;
  for (auto s : steps) {
    if (s >= 0) {
      ++converged;
      total += s;
      worst = std::max(worst, s);
    }
  }
  std::printf("capacity |S|=%d |A|=%d repeats=%d seed=%llu\n", spec.num_states, spec.num_arms,
              spec.num_repeats, static_cast<unsigned long long>(spec.master_seed));
  std::printf("  converged: %lld/%zu (budget %lld steps)\n", converged, steps.size(),
              spec.max_steps);
  if (converged > 0) {
    std::printf("  steps to convergence: mean %.1f, max %lld\n",
                static_cast<double>(total) / static_cast<double>(converged), worst);
  }
  for (std::size_t r = 0; r < steps.size(); ++r) {
    const auto& log = result.repeats[r];
    const double final_ma = log.ma.empty() ? 0.0 : log.ma.back();
    if (steps[r] >= 0) {
      std::printf("  repeat %2zu: halted after %lld steps, reward ma %.4f\n", r, steps[r],
                  final_ma);
    } else {
      std::printf("  repeat %2zu: NOT converged within budget, reward ma %.4f\n", r, final_ma);
    }
  }
}

void print_nonstationary_summary(const htmrl::RunResult& result,
                                 const htmrl::ExperimentSpec& spec) {
  std::printf("nonstationary preset=%s schedule=%s agent=%s repeats=%d seed=%llu\n",
              htmrl::to_string(spec.preset).c_str(), htmrl::to_string(spec.schedule).c_str(),
              htmrl::to_string(spec.agent).c_str(), spec.num_repeats,
              static_cast<unsigned long long>(spec.master_seed));
  if (spec.schedule == htmrl::ScheduleKind::kNone ||
      result.aggregate.size() % static_cast<std::size_t>(spec.period) != 0) {
    double total = 0.0;
    for (double v : result.aggregate.mean) total += v;
    std::printf("  mean aggregate reward: %.4f\n",
                total / static_cast<double>(result.aggregate.size()));
    return;
  }
  const auto stats = htmrl::segment_recovery_stats(result.aggregate.mean, spec.period, 0.9);
  std::printf("  per-segment peak / steps to 90%% of first-segment peak:\n");
  for (std::size_t s = 0; s < stats.size(); ++s) {
    if (stats[s].steps_to_threshold >= 0) {
      std::printf("  segment %zu: peak %.4f, steps %lld\n", s + 1, stats[s].peak,
                  stats[s].steps_to_threshold);
    } else {
      std::printf("  segment %zu: peak %.4f, steps n/a (threshold not reached)\n", s + 1,
                  stats[s].peak);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HTMRL: spatial-pooler reinforcement learning on bandit environments"};
  app.require_subcommand(1);

  // --- capacity ---
  auto spec_cap = htmrl::capacity_spec();
  std::string cap_agent = "htmrl";
  auto* cap = app.add_subcommand("capacity", "contextual deterministic bandit sweep");
  cap->add_option("--states", spec_cap.num_states, "number of states (bandit indices)");
  cap->add_option("--arms", spec_cap.num_arms, "arms per bandit");
  cap->add_option("--repeats", spec_cap.num_repeats, "independent seeded repeats");
  cap->add_option("--seed", spec_cap.master_seed, "master seed");
  cap->add_option("--max-steps", spec_cap.max_steps, "per-repeat step budget");
  cap->add_option("--out", spec_cap.out_dir, "output directory");
  cap->add_option("--bits-per-state", spec_cap.bits_per_state, "encoder bits per state");
  cap->add_option("--agent", cap_agent, "htmrl or eps:<epsilon>");
  cap->add_option("--boost-strength", spec_cap.boost_strength, "boosting strength");
  cap->add_option("--perm-increment", spec_cap.perm_increment, "base permanence step");
  cap->add_option("--threads", spec_cap.threads, "worker threads (0 = auto)");
  cap->add_flag("--plot", spec_cap.write_plot, "emit curve.svg");

  // --- nonstationary ---
  auto spec_ns = htmrl::nonstationary_spec();
  std::string ns_preset = "full", ns_schedule = "reinit", ns_agent = "htmrl";
  std::string ns_boost = "on", ns_window = "1000";
  auto* ns = app.add_subcommand("nonstationary", "10-armed Gaussian bandit with change events");
  ns->add_option("--preset", ns_preset, "network size: full, small or tiny");
  ns->add_option("--schedule", ns_schedule, "change events: reinit, shuffle or none");
  ns->add_option("--agent", ns_agent, "htmrl or eps:<epsilon>");
  ns->add_option("--boost", ns_boost, "boosting: on or off");
  ns->add_option("--reward-window", ns_window, "reward normalization: N, full or off");
  ns->add_option("--steps", spec_ns.num_steps, "steps per repeat");
  ns->add_option("--period", spec_ns.period, "steps between change events");
  ns->add_option("--repeats", spec_ns.num_repeats, "independent seeded repeats");
  ns->add_option("--seed", spec_ns.master_seed, "master seed");
  ns->add_option("--out", spec_ns.out_dir, "output directory");
  ns->add_option("--arms", spec_ns.gauss_arms, "number of arms");
  ns->add_option("--boost-strength", spec_ns.boost_strength, "boosting strength when on");
  ns->add_option("--perm-increment", spec_ns.perm_increment, "base permanence step");
  ns->add_option("--threads", spec_ns.threads, "worker threads (0 = auto)");
  ns->add_flag("--plot", spec_ns.write_plot, "emit curve.svg");
  ns->add_option("--smooth-window", spec_ns.smooth_window,
                 "Savitzky-Golay window for the aggregate (0 = off)");
  ns->add_option("--smooth-order", spec_ns.smooth_order, "Savitzky-Golay polynomial order");

  // --- attainability ---
  htmrl::AttainabilityParams params{400, 0.05, 0.5, 2};
  int num_actions = 1024;
  long long mc_trials = 0;
  std::uint64_t mc_seed = 1;
  auto* att = app.add_subcommand("attainability", "action-attainability probabilities");
  att->add_option("--n", params.n, "input bits");
  att->add_option("--d", params.d, "active fraction (d*n integral)");
  att->add_option("--c", params.c, "per-cell connected fraction (c*n integral)");
  att->add_option("--cells-per-action", params.cells_per_action, "cells per action bin");
  att->add_option("--actions", num_actions, "actions for the all-attainable probability");
  att->add_option("--mc-trials", mc_trials, "also run a Monte-Carlo check with this many trials");
  att->add_option("--mc-seed", mc_seed, "Monte-Carlo seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(cap)) {
      spec_cap.agent = parse_agent_option(cap_agent, &spec_cap.epsilon);
      const auto result = htmrl::run_capacity(spec_cap);
      print_capacity_summary(result, spec_cap);
      if (!spec_cap.out_dir.empty()) {
        const auto files = htmrl::emit_outputs(result, spec_cap);
        std::printf("  wrote %s\n", files.aggregate_csv.c_str());
      }
    } else if (app.got_subcommand(ns)) {
      spec_ns.preset = htmrl::parse_preset(ns_preset);
      spec_ns.schedule = htmrl::parse_schedule(ns_schedule);
      spec_ns.agent = parse_agent_option(ns_agent, &spec_ns.epsilon);
      if (ns_boost == "on") {
        spec_ns.boost = true;
      } else if (ns_boost == "off") {
        spec_ns.boost = false;
      } else {
        throw CLI::ValidationError("--boost", "expected 'on' or 'off'");
      }
      spec_ns.reward_norm = htmrl::parse_reward_window(ns_window);
      const auto result = htmrl::run_nonstationary(spec_ns);
      print_nonstationary_summary(result, spec_ns);
      if (!spec_ns.out_dir.empty()) {
        const auto files = htmrl::emit_outputs(result, spec_ns);
        std::printf("  wrote %s\n", files.aggregate_csv.c_str());
      }
    } else {
      const double p = htmrl::attainability_probability(params);
      std::printf("attainability n=%d d=%g c=%g cells_per_action=%d\n", params.n, params.d,
                  params.c, params.cells_per_action);
      std::printf("  P(action attainable)        = %.12g\n", p);
      std::printf("  P(action NOT attainable)    = %.6g\n", 1.0 - p);
      std::printf("  P(all %d actions attainable) = %.12g\n", num_actions,
                  htmrl::all_actions_probability(params, num_actions));
      if (mc_trials > 0) {
        const auto mc = htmrl::attainability_monte_carlo(params, mc_trials, mc_seed);
        std::printf("  Monte-Carlo (%lld trials)    = %.6f +- %.6f\n", mc_trials, mc.estimate,
                    mc.std_error);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
