#pragma once

#include "slung/controllers.hpp"
#include "slung/env.hpp"
#include "slung/tracks.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace slung {

struct EvalOptions {
  double timeout = 30.0;  // s per track
  std::uint64_t seed = 0;
};

struct TrackRecord {
  int track_id = 0;
  std::string name;
  int waypoints = 0;
  int traversed = 0;
  bool success = false;
  bool crashed = false;
  int steps = 0;
  double completion_time = 0.0;  // time of the final traversal; NaN on failure
  double avg_velocity = 0.0;     // mean |v_q| over the steps
  double max_velocity = 0.0;
};

struct EvalReport {
  double success_rate = 0.0;
  double avg_completion_time = 0.0;  // over successful tracks; NaN if none
  double avg_velocity = 0.0;         // mean |v_q| over all steps of all tracks
  double max_velocity = 0.0;
  std::vector<TrackRecord> tracks;   // sorted by track_id
};

struct TrajectoryRow {
  double t = 0.0;
  SystemState state;
  Vec4 action = Vec4::Zero();
  RewardBreakdown reward;
  StepEvents events;
  bool crashed = false;
};

struct Trajectory {
  int track_id = 0;
  std::vector<TrajectoryRow> rows;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>(int track_id)>;

// Runs every track once from its hover start with fixed `params`. Success
// means all waypoints traversed before the timeout.
EvalReport evaluate_tracks(const std::vector<Track>& tracks, const ControllerFactory& factory,
                           const EnvConfig& env_cfg, const PhysicalParams& params,
                           const EvalOptions& options, std::vector<Trajectory>* trajectories = nullptr);

// Deterministic set of `count` random tracks; track i uses stream i of `seed`.
std::vector<Track> random_eval_tracks(int count, int waypoints, std::uint64_t seed,
                                      const TrackGenConfig& cfg);

// Aggregates per-track records the way evaluate_tracks does.
EvalReport summarize(std::vector<TrackRecord> tracks, double pooled_speed_sum, long pooled_steps);

std::string eval_report_csv(const EvalReport& report);
std::string eval_summary_text(const EvalReport& report);

// Trajectory CSV: 29 numeric columns plus an events column.
std::string trajectory_csv_header();
std::string trajectory_csv(const Trajectory& trajectory);
// Rows of a trajectory CSV (header required). Throws ParseError.
std::vector<TrajectoryRow> parse_trajectory_csv(const std::string& text,
                                                const std::string& source = "<string>");
// Events column encoding: '|'-separated names, empty when nothing happened.
std::string encode_events(const TrajectoryRow& row);

// Brute-force recount from trajectory rows.
int count_traversals(const std::vector<TrajectoryRow>& rows);
double max_speed(const std::vector<TrajectoryRow>& rows);
double mean_speed(const std::vector<TrajectoryRow>& rows);

enum class SweepParam { kPayloadMass, kCableLength };
std::string_view to_string(SweepParam p);
SweepParam sweep_param_from_string(std::string_view text);  // m_l or l

struct SweepRow {
  SweepParam param = SweepParam::kPayloadMass;
  double variation = 0.0;  // fraction, e.g. -0.2
  double value = 0.0;      // resulting parameter value
  EvalReport report;
};

PhysicalParams apply_variation(const PhysicalParams& nominal, SweepParam param, double variation);

std::vector<SweepRow> run_sweep(const std::vector<Track>& tracks, const ControllerFactory& factory,
                                const EnvConfig& env_cfg, const std::vector<SweepParam>& params,
                                const std::vector<double>& variations, const EvalOptions& options);

std::string sweep_csv(const std::vector<SweepRow>& rows);
// Parses sweep_csv output back (per-track records are not part of the table).
std::vector<SweepRow> parse_sweep_csv(const std::string& text, const std::string& source = "<string>");

}  // namespace slung
