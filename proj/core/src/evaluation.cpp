#include "slung/evaluation.hpp"

#include "slung/csv.hpp"
#include "slung/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace slung {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kNumericColumns = 29;

struct TrackRun {
  TrackRecord record;
  double speed_sum = 0.0;
};

TrackRun run_track(const Track& track, int id, const ControllerFactory& factory,
                   const EnvConfig& cfg, const PhysicalParams& params, const EvalOptions& options,
                   Trajectory* trajectory) {
  Environment env(cfg, Rng(options.seed).split(static_cast<std::uint64_t>(id)));
  Observation obs = env.reset_on_track(track, params);
  std::unique_ptr<Controller> controller = factory(id);

  TrackRun run;
  TrackRecord& rec = run.record;
  rec.track_id = id;
  rec.name = track.name;
  rec.waypoints = static_cast<int>(track.waypoints.size());
  rec.completion_time = kNaN;
  if (trajectory) trajectory->track_id = id;

  while (true) {
    const Vec4 a = controller->act(env, obs);
    const StepOutcome out = env.step(a);
    obs = out.observation;
    ++rec.steps;
    const double speed = env.state().v_q.norm();
    run.speed_sum += speed;
    rec.max_velocity = std::max(rec.max_velocity, speed);
    if (out.reward.traversed) {
      ++rec.traversed;
      rec.completion_time = env.state().t;
    }
    if (trajectory) {
      TrajectoryRow row;
      row.t = env.state().t;
      row.state = env.state();
      row.action = env.previous_action();
      row.reward = out.reward;
      row.events = out.info.events;
      row.crashed = out.info.crashed || out.info.integration_failure;
      trajectory->rows.push_back(row);
    }
    if (out.done) {
      rec.success = out.info.track_complete;
      rec.crashed = out.info.crashed || out.info.integration_failure;
      break;
    }
  }
  if (!rec.success) rec.completion_time = kNaN;
  rec.avg_velocity = rec.steps > 0 ? run.speed_sum / rec.steps : 0.0;
  return run;
}

std::string state_cells(const TrajectoryRow& r) {
  const Quat q(r.state.R);
  std::vector<std::string> c;
  c.push_back(csv_number(r.t));
  for (const Vec3* v : {&r.state.x_q, &r.state.v_q}) {
    for (int i = 0; i < 3; ++i) c.push_back(csv_number((*v)[i]));
  }
  for (double v : {q.w(), q.x(), q.y(), q.z()}) c.push_back(csv_number(v));
  for (const Vec3* v : {&r.state.omega, &r.state.x_l, &r.state.v_l}) {
    for (int i = 0; i < 3; ++i) c.push_back(csv_number((*v)[i]));
  }
  c.push_back(r.state.phase == CablePhase::kTaut ? "0" : "1");
  for (int i = 0; i < 4; ++i) c.push_back(csv_number(r.action[i]));
  for (double v : {r.reward.r_target, r.reward.r_safe, r.reward.r_crash, r.reward.r_smooth}) {
    c.push_back(csv_number(v));
  }
  c.push_back(encode_events(r));
  return csv_join(c);
}

}  // namespace

EvalReport summarize(std::vector<TrackRecord> tracks, double pooled_speed_sum, long pooled_steps) {
  std::stable_sort(tracks.begin(), tracks.end(),
                   [](const TrackRecord& a, const TrackRecord& b) { return a.track_id < b.track_id; });
  EvalReport r;
  int successes = 0;
  double time_sum = 0.0;
  for (const TrackRecord& t : tracks) {
    if (t.success) {
      ++successes;
      time_sum += t.completion_time;
    }
    r.max_velocity = std::max(r.max_velocity, t.max_velocity);
  }
  r.success_rate = tracks.empty() ? 0.0 : static_cast<double>(successes) / tracks.size();
  r.avg_completion_time = successes > 0 ? time_sum / successes : kNaN;
  r.avg_velocity = pooled_steps > 0 ? pooled_speed_sum / pooled_steps : 0.0;
  r.tracks = std::move(tracks);
  return r;
}

EvalReport evaluate_tracks(const std::vector<Track>& tracks, const ControllerFactory& factory,
                           const EnvConfig& env_cfg, const PhysicalParams& params,
                           const EvalOptions& options, std::vector<Trajectory>* trajectories) {
  EnvConfig cfg = env_cfg;
  cfg.domain_randomization = false;
  cfg.max_episode_steps = static_cast<int>(std::ceil(options.timeout / cfg.dt - 1e-9));
  cfg.physics = params;

  std::vector<TrackRun> runs(tracks.size());
  if (trajectories) trajectories->assign(tracks.size(), Trajectory{});
  parallel_for(tracks.size(), [&](std::size_t i) {
    runs[i] = run_track(tracks[i], static_cast<int>(i), factory, cfg, params, options,
                        trajectories ? &(*trajectories)[i] : nullptr);
  });

  std::vector<TrackRecord> records;
  double speed_sum = 0.0;
  long steps = 0;
  for (const TrackRun& run : runs) {
    records.push_back(run.record);
    speed_sum += run.speed_sum;
    steps += run.record.steps;
  }
  return summarize(std::move(records), speed_sum, steps);
}

std::vector<Track> random_eval_tracks(int count, int waypoints, std::uint64_t seed,
                                      const TrackGenConfig& cfg) {
  std::vector<Track> out;
  const Rng root(seed);
  for (int i = 0; i < count; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    Track t = random_track(waypoints, rng, cfg);
    t.name = "random-" + std::to_string(i);
    out.push_back(std::move(t));
  }
  return out;
}

std::string eval_report_csv(const EvalReport& report) {
  std::string out =
      "track_id,name,waypoints,traversed,success,crashed,steps,completion_time,avg_velocity,"
      "max_velocity\n";
  for (const TrackRecord& t : report.tracks) {
    out += csv_join({std::to_string(t.track_id), t.name, std::to_string(t.waypoints),
                     std::to_string(t.traversed), t.success ? "1" : "0", t.crashed ? "1" : "0",
                     std::to_string(t.steps), csv_number(t.completion_time),
                     csv_number(t.avg_velocity), csv_number(t.max_velocity)}) +
           "\n";
  }
  return out;
}

std::string eval_summary_text(const EvalReport& report) {
  std::ostringstream s;
  int successes = 0;
  for (const TrackRecord& t : report.tracks) successes += t.success ? 1 : 0;
  s << "tracks: " << report.tracks.size() << "\n"
    << "successes: " << successes << "\n"
    << "success_rate: " << csv_number(report.success_rate) << "\n"
    << "avg_completion_time_s: " << csv_number(report.avg_completion_time) << "\n"
    << "avg_velocity_mps: " << csv_number(report.avg_velocity) << "\n"
    << "max_velocity_mps: " << csv_number(report.max_velocity) << "\n";
  return s.str();
}

std::string trajectory_csv_header() {
  return "t,x_q_x,x_q_y,x_q_z,v_q_x,v_q_y,v_q_z,q_w,q_x,q_y,q_z,omega_x,omega_y,omega_z,"
         "x_l_x,x_l_y,x_l_z,v_l_x,v_l_y,v_l_z,phase,a_thrust,a_wx,a_wy,a_wz,"
         "r_target,r_safe,r_crash,r_smooth,events";
}

std::string encode_events(const TrajectoryRow& row) {
  std::vector<std::string> names;
  if (row.reward.traversed) names.emplace_back("traversal");
  if (row.events.taut_to_slack) names.emplace_back("taut_to_slack");
  if (row.events.slack_to_taut) names.emplace_back("slack_to_taut");
  if (row.events.retaut_rejected) names.emplace_back("retaut_rejected");
  if (row.crashed) names.emplace_back("crash");
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : "|") + n;
  return out;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = trajectory_csv_header() + "\n";
  for (const TrajectoryRow& r : trajectory.rows) out += state_cells(r) + "\n";
  return out;
}

std::vector<TrajectoryRow> parse_trajectory_csv(const std::string& text, const std::string& source) {
  const auto rows = parse_csv(text);
  if (rows.empty() || csv_join(rows[0]) != trajectory_csv_header()) {
    throw ParseError(source, 1, "header", "unexpected trajectory header");
  }
  std::vector<TrajectoryRow> out;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& c = rows[k];
    const int line = static_cast<int>(k + 1);
    if (c.size() != kNumericColumns + 1) {
      throw ParseError(source, line, "", "expected 30 columns");
    }
    std::vector<double> v(kNumericColumns);
    for (int i = 0; i < kNumericColumns; ++i) {
      try {
        v[static_cast<std::size_t>(i)] = parse_csv_double(c[static_cast<std::size_t>(i)]);
      } catch (const InvalidArgument& e) {
        throw ParseError(source, line, rows[0][static_cast<std::size_t>(i)], e.what());
      }
    }
    TrajectoryRow r;
    r.t = v[0];
    r.state.t = v[0];
    r.state.x_q = Vec3(v[1], v[2], v[3]);
    r.state.v_q = Vec3(v[4], v[5], v[6]);
    r.state.R = Quat(v[7], v[8], v[9], v[10]).normalized().toRotationMatrix();
    r.state.omega = Vec3(v[11], v[12], v[13]);
    r.state.x_l = Vec3(v[14], v[15], v[16]);
    r.state.v_l = Vec3(v[17], v[18], v[19]);
    r.state.phase = v[20] == 0.0 ? CablePhase::kTaut : CablePhase::kSlack;
    r.action = Vec4(v[21], v[22], v[23], v[24]);
    r.reward.r_target = v[25];
    r.reward.r_safe = v[26];
    r.reward.r_crash = v[27];
    r.reward.r_smooth = v[28];
    const std::string& ev = c.back();
    auto has = [&](const std::string& name) {
      std::stringstream ss(ev);
      std::string item;
      while (std::getline(ss, item, '|')) {
        if (item == name) return true;
      }
      return false;
    };
    r.reward.traversed = has("traversal");
    r.events.taut_to_slack = has("taut_to_slack");
    r.events.slack_to_taut = has("slack_to_taut");
    r.events.retaut_rejected = has("retaut_rejected");
    r.crashed = has("crash");
    out.push_back(r);
  }
  return out;
}

int count_traversals(const std::vector<TrajectoryRow>& rows) {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(),
                                        [](const TrajectoryRow& r) { return r.reward.traversed; }));
}

double max_speed(const std::vector<TrajectoryRow>& rows) {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.state.v_q.norm());
  return m;
}

double mean_speed(const std::vector<TrajectoryRow>& rows) {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.state.v_q.norm();
  return s / static_cast<double>(rows.size());
}

std::string_view to_string(SweepParam p) {
  return p == SweepParam::kPayloadMass ? "m_l" : "l";
}

SweepParam sweep_param_from_string(std::string_view text) {
  if (text == "m_l") return SweepParam::kPayloadMass;
  if (text == "l") return SweepParam::kCableLength;
  throw InvalidArgument("unknown sweep parameter '" + std::string(text) + "' (expected m_l or l)");
}

PhysicalParams apply_variation(const PhysicalParams& nominal, SweepParam param, double variation) {
  if (!(variation > -1.0)) throw InvalidArgument("variation must be greater than -100%");
  PhysicalParams p = nominal;
  if (param == SweepParam::kPayloadMass) {
    p.payload_mass = nominal.payload_mass * (1.0 + variation);
  } else {
    p.cable_length = nominal.cable_length * (1.0 + variation);
  }
  return p;
}

std::vector<SweepRow> run_sweep(const std::vector<Track>& tracks, const ControllerFactory& factory,
                                const EnvConfig& env_cfg, const std::vector<SweepParam>& params,
                                const std::vector<double>& variations, const EvalOptions& options) {
  std::vector<SweepRow> rows;
  for (SweepParam p : params) {
    for (double v : variations) {
      SweepRow row;
      row.param = p;
      row.variation = v;
      const PhysicalParams varied = apply_variation(env_cfg.physics, p, v);
      row.value = p == SweepParam::kPayloadMass ? varied.payload_mass : varied.cable_length;
      row.report = evaluate_tracks(tracks, factory, env_cfg, varied, options);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "param,variation,value,tracks,successes,success_rate,avg_completion_time,avg_velocity,"
      "max_velocity\n";
  for (const SweepRow& r : rows) {
    int successes = 0;
    for (const auto& t : r.report.tracks) successes += t.success ? 1 : 0;
    out += csv_join({std::string(to_string(r.param)), csv_number(r.variation), csv_number(r.value),
                     std::to_string(r.report.tracks.size()), std::to_string(successes),
                     csv_number(r.report.success_rate), csv_number(r.report.avg_completion_time),
                     csv_number(r.report.avg_velocity), csv_number(r.report.max_velocity)}) +
           "\n";
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text, const std::string& source) {
  const auto rows = parse_csv(text);
  const std::string header =
      "param,variation,value,tracks,successes,success_rate,avg_completion_time,avg_velocity,"
      "max_velocity";
  if (rows.empty() || csv_join(rows[0]) != header) {
    throw ParseError(source, 1, "header", "unexpected sweep header");
  }
  std::vector<SweepRow> out;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& c = rows[k];
    const int line = static_cast<int>(k + 1);
    if (c.size() != 9) throw ParseError(source, line, "", "expected 9 columns");
    try {
      SweepRow r;
      r.param = sweep_param_from_string(c[0]);
      r.variation = parse_csv_double(c[1]);
      r.value = parse_csv_double(c[2]);
      const int tracks = std::stoi(c[3]);
      const int successes = std::stoi(c[4]);
      r.report.success_rate = parse_csv_double(c[5]);
      r.report.avg_completion_time = parse_csv_double(c[6]);
      r.report.avg_velocity = parse_csv_double(c[7]);
      r.report.max_velocity = parse_csv_double(c[8]);
      r.report.tracks.resize(static_cast<std::size_t>(tracks));
      for (int i = 0; i < tracks; ++i) {
        r.report.tracks[static_cast<std::size_t>(i)].track_id = i;
        r.report.tracks[static_cast<std::size_t>(i)].success = i < successes;
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(source, line, "", e.what());
    }
  }
  return out;
}

}  // namespace slung
