#include "slung/cli.hpp"

#include "slung/checkpoint.hpp"
#include "slung/config.hpp"
#include "slung/controllers.hpp"
#include "slung/csv.hpp"
#include "slung/evaluation.hpp"
#include "slung/hdss.hpp"
#include "slung/parallel.hpp"
#include "slung/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

namespace slung::cli {
namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

constexpr const char* kSnapshotName = "config.snapshot";
constexpr const char* kFinalCheckpoint = "checkpoint_final.json";
constexpr std::uint64_t kStubStreams = 1u << 16;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config, "key = value configuration file");
  app->add_option("--seed", o.seed, "master seed (overrides train.seed)");
  app->add_option("--set", o.overrides, "extra 'key=value' config override")->take_all();
  app->add_option("--out", o.out, "output path");
}

RunConfig resolve_config(const CommonOptions& o, const std::optional<fs::path>& fallback) {
  RunConfig cfg;
  if (!o.config.empty()) {
    cfg = load_run_config(o.config);
  } else if (fallback && fs::exists(*fallback)) {
    cfg = load_run_config(*fallback);
  }
  int n = 0;
  for (const std::string& line : o.overrides) apply_config_line(cfg, line, "--set", ++n);
  if (o.seed) cfg.train.seed = *o.seed;
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("--set", 0, "", e.what());
  }
  return cfg;
}

// Run directory given as a checkpoint: the config snapshot next to it.
std::optional<fs::path> snapshot_for(const std::string& checkpoint) {
  if (checkpoint.empty() || checkpoint.rfind("stub:", 0) == 0) return std::nullopt;
  const fs::path p(checkpoint);
  if (fs::is_directory(p)) return p / kSnapshotName;
  return std::nullopt;
}

ControllerFactory resolve_policy(const std::string& spec, const RunConfig& cfg) {
  if (spec.empty()) throw InvalidArgument("--checkpoint is required (file, run directory or stub:<name>)");
  if (spec.rfind("stub:", 0) == 0) {
    const std::string name = spec.substr(5);
    make_stub_controller(name, Rng(0));  // validates the name
    const std::uint64_t seed = cfg.train.seed;
    return [name, seed](int id) {
      return make_stub_controller(name, Rng(seed).split(kStubStreams + static_cast<std::uint64_t>(id)));
    };
  }
  fs::path path(spec);
  if (fs::is_directory(path)) path /= kFinalCheckpoint;
  auto model = std::make_shared<const ActorCritic>(load_checkpoint(path, cfg.policy).model);
  return [model](int) { return std::make_unique<NetworkController>(model); };
}

std::vector<Track> resolve_tracks(const std::string& spec, int episodes, const RunConfig& cfg) {
  TrackGenConfig gen = cfg.env.track_gen;
  gen.workspace = cfg.env.workspace;
  const bool is_random = spec == "random" ||
                         (spec.rfind("random:", 0) == 0 && std::count(spec.begin(), spec.end(), ':') == 1);
  if (is_random) {
    const int waypoints = spec == "random" ? 10 : std::stoi(spec.substr(7));
    return random_eval_tracks(episodes > 0 ? episodes : 200, waypoints, cfg.train.seed, gen);
  }
  const Track t = resolve_track_spec(spec, gen);
  return std::vector<Track>(static_cast<std::size_t>(episodes > 0 ? episodes : 1), t);
}

std::vector<double> parse_variations(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    double scale = 1.0;
    if (item.back() == '%') {
      item.pop_back();
      scale = 0.01;
    }
    out.push_back(parse_csv_double(item) * scale);
  }
  if (out.empty()) throw InvalidArgument("--variations: empty list");
  return out;
}

void ensure_dir(const fs::path& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

// ---------------------------------------------------------------- train

int cmd_train(const CommonOptions& o, const std::string& reset_mode, std::optional<int> iterations,
              std::ostream& out) {
  RunConfig cfg = resolve_config(o, std::nullopt);
  if (!reset_mode.empty()) cfg.env.reset_mode = reset_mode_from_string(reset_mode);
  if (iterations) cfg.train.iterations = *iterations;
  cfg.validate();
  const fs::path dir = o.out.empty() ? fs::path("runs/train") : fs::path(o.out);
  ensure_dir(dir);
  write_text_file(dir / kSnapshotName, write_run_config(cfg));
  if (cfg.train.iterations == 0) {
    out << "wrote " << (dir / kSnapshotName).string() << "\n";
    return 0;
  }

  std::string metrics = metrics_csv_header() + "\n";
  write_text_file(dir / "metrics.csv", metrics);
  Trainer trainer(cfg);
  g_interrupted = false;
  auto previous = std::signal(SIGINT, on_sigint);

  auto save = [&](const fs::path& path) {
    Checkpoint ckpt{trainer.model(), trainer.iteration(),
                    {{"reset_mode", std::string(to_string(cfg.env.reset_mode))},
                     {"seed", std::to_string(cfg.train.seed)},
                     {"total_steps", std::to_string(trainer.total_steps())}}};
    save_checkpoint(ckpt, path);
  };

  train(trainer, [&](const IterationMetrics& m, const Trainer& t) {
    metrics += metrics_csv_row(m) + "\n";
    write_text_file(dir / "metrics.csv", metrics);
    out << "iter " << m.iteration << " steps " << m.total_steps << " reward "
        << csv_number(m.mean_reward) << " length " << csv_number(m.mean_length)
        << " traversals " << csv_number(m.mean_traversals) << "\n";
    const int every = cfg.train.checkpoint_every;
    if (every > 0 && t.iteration() % every == 0) {
      char name[40];
      std::snprintf(name, sizeof(name), "checkpoint_%05d.json", t.iteration());
      save(dir / name);
    }
    if (g_interrupted) {
      save(dir / "checkpoint_interrupted.json");
      return false;
    }
    return true;
  });
  std::signal(SIGINT, previous);
  save(dir / kFinalCheckpoint);
  out << "wrote " << (dir / kFinalCheckpoint).string() << "\n";
  return g_interrupted ? 130 : 0;
}

// ----------------------------------------------------------------- eval

int cmd_eval(const CommonOptions& o, const std::string& checkpoint, const std::string& track,
             int episodes, bool trajectories, std::ostream& out) {
  const RunConfig cfg = resolve_config(o, snapshot_for(checkpoint));
  const ControllerFactory factory = resolve_policy(checkpoint, cfg);
  const std::vector<Track> tracks = resolve_tracks(track, episodes, cfg);
  EvalOptions opts;
  opts.seed = cfg.train.seed;
  std::vector<Trajectory> trajs;
  const EvalReport report =
      evaluate_tracks(tracks, factory, cfg.env, cfg.env.physics, opts, trajectories ? &trajs : nullptr);
  const std::string summary = eval_summary_text(report);
  out << summary;
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    ensure_dir(dir);
    write_text_file(dir / "report.csv", eval_report_csv(report));
    write_text_file(dir / "summary.txt", summary);
    if (trajectories) {
      ensure_dir(dir / "trajectories");
      for (const Trajectory& t : trajs) {
        char name[40];
        std::snprintf(name, sizeof(name), "track_%04d.csv", t.track_id);
        write_text_file(dir / "trajectories" / name, trajectory_csv(t));
      }
    }
  }
  return 0;
}

// ---------------------------------------------------------------- sweep

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream s;
  std::vector<double> vars;
  for (const auto& r : rows) {
    if (std::find(vars.begin(), vars.end(), r.variation) == vars.end()) vars.push_back(r.variation);
  }
  s << "param";
  for (double v : vars) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+g%%", v * 100.0);
    s << " | " << buf << " SR / T[s]";
  }
  s << "\n";
  for (SweepParam p : {SweepParam::kPayloadMass, SweepParam::kCableLength}) {
    bool any = false;
    std::ostringstream line;
    line << to_string(p);
    for (double v : vars) {
      for (const auto& r : rows) {
        if (r.param != p || r.variation != v) continue;
        any = true;
        char buf[64];
        std::snprintf(buf, sizeof(buf), " | %.1f%% / %.2f", 100.0 * r.report.success_rate,
                      r.report.avg_completion_time);
        line << buf;
      }
    }
    if (any) s << line.str() << "\n";
  }
  return s.str();
}

int cmd_sweep(const CommonOptions& o, const std::string& checkpoint, const std::string& track,
              int episodes, const std::string& param, const std::string& variations,
              std::ostream& out) {
  const RunConfig cfg = resolve_config(o, snapshot_for(checkpoint));
  const ControllerFactory factory = resolve_policy(checkpoint, cfg);
  const std::vector<Track> tracks = resolve_tracks(track, episodes, cfg);
  std::vector<SweepParam> params;
  if (param == "both") {
    params = {SweepParam::kPayloadMass, SweepParam::kCableLength};
  } else {
    params = {sweep_param_from_string(param)};
  }
  EvalOptions opts;
  opts.seed = cfg.train.seed;
  const auto rows = run_sweep(tracks, factory, cfg.env, params, parse_variations(variations), opts);
  const std::string table = sweep_table(rows);
  out << table;
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    ensure_dir(dir);
    write_text_file(dir / "sweep.csv", sweep_csv(rows));
    write_text_file(dir / "sweep_table.txt", table);
  }
  return 0;
}

// ----------------------------------------------------------- seed-check

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string chain_csv(const SeedTrace& trace) {
  std::string s =
      "step,phase,x_l_x,x_l_y,x_l_z,v_l_x,v_l_y,v_l_z,a_l_x,a_l_y,a_l_z,j_l_x,j_l_y,j_l_z,"
      "x_q_x,x_q_y,x_q_z,v_q_x,v_q_y,v_q_z,a_q_x,a_q_y,a_q_z\n";
  for (const FlatChain& c : trace.chain) {
    std::vector<std::string> cells{std::to_string(c.step_index),
                                   c.phase == CablePhase::kTaut ? "taut" : "slack"};
    for (const Vec3* v : {&c.x_l, &c.v_l, &c.a_l, &c.j_l, &c.x_q, &c.v_q, &c.a_q}) {
      for (int i = 0; i < 3; ++i) cells.push_back(csv_number((*v)[i]));
    }
    s += csv_join(cells) + "\n";
  }
  return s;
}

int cmd_seedcheck(const CommonOptions& o, const std::string& track, int count, bool forward,
                  bool chains, std::ostream& out) {
  const RunConfig cfg = resolve_config(o, std::nullopt);
  SeedConfig seed_cfg = cfg.env.seed;
  seed_cfg.workspace = cfg.env.workspace;
  const PhysicalParams& params = cfg.env.physics;
  std::vector<Waypoint> waypoints;
  if (track.empty()) {
    waypoints.push_back(make_waypoint(cfg.env.workspace.center(), WaypointKind::kUpright, 0.0,
                                      cfg.env.workspace));
  } else {
    TrackGenConfig gen = cfg.env.track_gen;
    gen.workspace = cfg.env.workspace;
    waypoints = resolve_track_spec(track, gen).waypoints;
  }
  const int n = count > 0 ? count : 1000;

  struct Result {
    SeedTrace trace;
    ForwardCheck fwd;
  };
  std::vector<Result> results(static_cast<std::size_t>(n));
  const Rng root(cfg.train.seed);
  parallel_for(results.size(), [&](std::size_t i) {
    Rng rng = root.split(i);
    results[i].trace = seed_attempt(waypoints[i % waypoints.size()], seed_cfg, params, rng);
    if (forward && results[i].trace.valid) {
      results[i].fwd = forward_verify(results[i].trace, seed_cfg, params);
    }
  });

  int valid = 0;
  std::vector<double> drifts, divergence;
  std::map<int, int> switches;
  std::map<std::string, int> reasons;
  std::string per_seed = "index,valid,reject_reason,max_drift,drift_fraction,phase_switches,"
                         "start_phase,forward_max_divergence,forward_final_divergence\n";
  for (int i = 0; i < n; ++i) {
    const Result& r = results[static_cast<std::size_t>(i)];
    const SeedTrace& t = r.trace;
    ++switches[t.phase_switches];
    if (t.valid) {
      ++valid;
      drifts.push_back(t.max_drift / params.cable_length);
      if (forward) divergence.push_back(r.fwd.max_quad_divergence);
    } else {
      ++reasons[t.reject_reason];
    }
    per_seed += csv_join({std::to_string(i), t.valid ? "1" : "0", t.reject_reason,
                          csv_number(t.max_drift), csv_number(t.max_drift / params.cable_length),
                          std::to_string(t.phase_switches),
                          t.chain.empty() ? "" : std::string(to_string(t.chain.front().phase)),
                          forward && t.valid ? csv_number(r.fwd.max_quad_divergence) : "",
                          forward && t.valid ? csv_number(r.fwd.final_quad_divergence) : ""}) +
                "\n";
  }

  std::ostringstream s;
  s << "seeds: " << n << "\n"
    << "valid: " << valid << "\n"
    << "pass_rate: " << csv_number(static_cast<double>(valid) / n) << "\n"
    << "drift_fraction_p50: " << csv_number(percentile(drifts, 0.5)) << "\n"
    << "drift_fraction_p95: " << csv_number(percentile(drifts, 0.95)) << "\n"
    << "drift_fraction_max: " << csv_number(percentile(drifts, 1.0)) << "\n";
  for (const auto& [k, v] : switches) s << "phase_switches[" << k << "]: " << v << "\n";
  for (const auto& [k, v] : reasons) s << "rejected[" << k << "]: " << v << "\n";
  if (forward) {
    s << "forward_divergence_p50_m: " << csv_number(percentile(divergence, 0.5)) << "\n"
      << "forward_divergence_max_m: " << csv_number(percentile(divergence, 1.0)) << "\n";
  }
  out << s.str();
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    ensure_dir(dir);
    write_text_file(dir / "seeds.csv", per_seed);
    write_text_file(dir / "summary.txt", s.str());
    if (chains) {
      ensure_dir(dir / "chains");
      for (int i = 0; i < n; ++i) {
        char name[40];
        std::snprintf(name, sizeof(name), "seed_%05d.csv", i);
        write_text_file(dir / "chains" / name, chain_csv(results[static_cast<std::size_t>(i)].trace));
      }
    }
  }
  return 0;
}

// --------------------------------------------------------------- export

int cmd_export(const CommonOptions& o, const std::string& checkpoint, const std::string& track,
               std::optional<int> max_steps, std::ostream& out) {
  const RunConfig cfg = resolve_config(o, snapshot_for(checkpoint));
  const ControllerFactory factory = resolve_policy(checkpoint, cfg);
  const std::string spec = track.empty() ? "random:10:" + std::to_string(cfg.train.seed) : track;
  const std::vector<Track> tracks = resolve_tracks(spec, 1, cfg);
  Trajectory traj;
  EvalReport report;
  if (!max_steps || *max_steps > 0) {
    EvalOptions opts;
    opts.seed = cfg.train.seed;
    if (max_steps) opts.timeout = *max_steps * cfg.env.dt;
    std::vector<Trajectory> trajs;
    report = evaluate_tracks({tracks.front()}, factory, cfg.env, cfg.env.physics, opts, &trajs);
    traj = trajs.front();
  }
  const std::string csv = trajectory_csv(traj);
  std::ostringstream s;
  s << "rows: " << traj.rows.size() << "\n"
    << "traversals: " << count_traversals(traj.rows) << "\n"
    << "avg_velocity_mps: " << csv_number(mean_speed(traj.rows)) << "\n"
    << "max_velocity_mps: " << csv_number(max_speed(traj.rows)) << "\n";
  if (o.out.empty()) {
    out << csv;
  } else {
    const fs::path path(o.out);
    ensure_dir(path.parent_path());
    write_text_file(path, csv);
    out << s.str();
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cable-suspended payload quadrotor workbench"};
  app.require_subcommand(1);

  CommonOptions train_o, eval_o, sweep_o, seed_o, export_o;
  std::string reset_mode;
  std::optional<int> iterations;
  auto* train_cmd = app.add_subcommand("train", "Train a policy with PPO");
  add_common(train_cmd, train_o);
  train_cmd->add_option("--reset-mode", reset_mode, "composite | hdss | hover-only");
  train_cmd->add_option("--iterations", iterations, "PPO iterations");

  std::string eval_ckpt, eval_track = "random";
  int eval_episodes = 0;
  bool eval_traj = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy on tracks");
  add_common(eval_cmd, eval_o);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file, run directory or stub:<name>");
  eval_cmd->add_option("--track", eval_track, "random[:n], name:<Track>, random:<n>:<seed> or a file");
  eval_cmd->add_option("--episodes", eval_episodes, "number of tracks (random) or repeats");
  eval_cmd->add_flag("--trajectories", eval_traj, "also write per-track trajectory CSVs");

  std::string sweep_ckpt, sweep_track = "random", sweep_param = "both",
                          sweep_vars = "-0.4,-0.2,0,0.2,0.4";
  int sweep_episodes = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Robustness sweep over payload mass and cable length");
  add_common(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--checkpoint", sweep_ckpt, "checkpoint file, run directory or stub:<name>");
  sweep_cmd->add_option("--track", sweep_track, "track spec (see eval)");
  sweep_cmd->add_option("--episodes", sweep_episodes, "number of tracks");
  sweep_cmd->add_option("--param", sweep_param, "m_l | l | both");
  sweep_cmd->add_option("--variations", sweep_vars, "comma-separated fractions or percentages");

  std::string seed_track;
  int seed_count = 0;
  bool seed_forward = false, seed_chains = false;
  auto* seed_cmd = app.add_subcommand("seed-check", "State-seeding diagnostics");
  add_common(seed_cmd, seed_o);
  seed_cmd->add_option("--track", seed_track, "waypoints to seed from (default: workspace centre)");
  seed_cmd->add_option("--episodes", seed_count, "number of seeds (default 1000)");
  seed_cmd->add_flag("--forward-verify", seed_forward, "replay each seed forward through the dynamics");
  seed_cmd->add_flag("--chains", seed_chains, "write per-seed chain CSVs under --out");

  std::string export_ckpt, export_track;
  std::optional<int> export_steps;
  auto* export_cmd = app.add_subcommand("export", "Roll out one track and write its trajectory CSV");
  add_common(export_cmd, export_o);
  export_cmd->add_option("--checkpoint", export_ckpt, "checkpoint file, run directory or stub:<name>");
  export_cmd->add_option("--track", export_track, "track spec (default random:10:<seed>)");
  export_cmd->add_option("--max-steps", export_steps, "step limit (default: evaluation timeout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train_cmd) return cmd_train(train_o, reset_mode, iterations, out);
    if (*eval_cmd) return cmd_eval(eval_o, eval_ckpt, eval_track, eval_episodes, eval_traj, out);
    if (*sweep_cmd) {
      return cmd_sweep(sweep_o, sweep_ckpt, sweep_track, sweep_episodes, sweep_param, sweep_vars, out);
    }
    if (*seed_cmd) return cmd_seedcheck(seed_o, seed_track, seed_count, seed_forward, seed_chains, out);
    if (*export_cmd) return cmd_export(export_o, export_ckpt, export_track, export_steps, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const FingerprintMismatch& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace slung::cli
