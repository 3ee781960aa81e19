#include "slung/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace slung {
namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> print;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidArgument("expected a number, got '" + t + "'");
  }
  return v;
}

long parse_long(const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidArgument("expected an integer, got '" + t + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, std::size_t n) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  std::vector<double> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (out.size() != n) {
    throw InvalidArgument("expected " + std::to_string(n) + " comma-separated numbers");
  }
  return out;
}

std::string print_list(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ", ";
    out += fmt17(v);
  }
  return out;
}

using DoubleRef = std::function<double&(RunConfig&)>;
using IntRef = std::function<int&(RunConfig&)>;
using Vec3Ref = std::function<Vec3&(RunConfig&)>;
using RangeRef = std::function<SampleRange&(RunConfig&)>;

Field num(std::string key, DoubleRef ref) {
  return {std::move(key), [ref](RunConfig& c, const std::string& v) { ref(c) = parse_double(v); },
          [ref](const RunConfig& c) { return fmt17(ref(const_cast<RunConfig&>(c))); }};
}

Field integer(std::string key, IntRef ref) {
  return {std::move(key),
          [ref](RunConfig& c, const std::string& v) { ref(c) = static_cast<int>(parse_long(v)); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

Field vec3(std::string key, Vec3Ref ref) {
  return {std::move(key),
          [ref](RunConfig& c, const std::string& v) {
            const auto l = parse_list(v, 3);
            ref(c) = Vec3(l[0], l[1], l[2]);
          },
          [ref](const RunConfig& c) {
            const Vec3& v = ref(const_cast<RunConfig&>(c));
            return print_list({v.x(), v.y(), v.z()});
          }};
}

Field range(std::string key, RangeRef ref) {
  return {std::move(key),
          [ref](RunConfig& c, const std::string& v) {
            const auto l = parse_list(v, 2);
            ref(c) = SampleRange{l[0], l[1]};
          },
          [ref](const RunConfig& c) {
            const SampleRange& r = ref(const_cast<RunConfig&>(c));
            return print_list({r.lo, r.hi});
          }};
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw InvalidArgument("expected true or false, got '" + t + "'");
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // Reward and gating.
    f.push_back(num("lambda1", [](RunConfig& c) -> double& { return c.env.lambda1; }));
    f.push_back(num("lambda2", [](RunConfig& c) -> double& { return c.env.lambda2; }));
    f.push_back(num("lambda3", [](RunConfig& c) -> double& { return c.env.lambda3; }));
    f.push_back(num("sigma_p", [](RunConfig& c) -> double& { return c.env.sigma_p; }));
    f.push_back(num("sigma_theta", [](RunConfig& c) -> double& { return c.env.sigma_theta; }));
    f.push_back(num("completion_bonus", [](RunConfig& c) -> double& { return c.env.completion_bonus; }));
    f.push_back(num("proximity", [](RunConfig& c) -> double& { return c.env.proximity; }));
    f.push_back(num("attitude_tolerance", [](RunConfig& c) -> double& { return c.env.attitude_tolerance; }));
    // Input-only convenience alias in degrees.
    f.push_back({"attitude_tolerance_deg",
                 [](RunConfig& c, const std::string& v) {
                   c.env.attitude_tolerance = parse_double(v) * kPi / 180.0;
                 },
                 nullptr});
    f.push_back(num("r_exceed", [](RunConfig& c) -> double& { return c.env.r_exceed; }));
    f.push_back(num("r_bound", [](RunConfig& c) -> double& { return c.env.r_bound; }));
    f.push_back(vec3("k_q", [](RunConfig& c) -> Vec3& { return c.env.k_q; }));
    f.push_back(vec3("k_v", [](RunConfig& c) -> Vec3& { return c.env.k_v; }));
    f.push_back(vec3("k_l", [](RunConfig& c) -> Vec3& { return c.env.k_l; }));
    f.push_back(vec3("workspace_lo", [](RunConfig& c) -> Vec3& { return c.env.workspace.lo; }));
    f.push_back(vec3("workspace_hi", [](RunConfig& c) -> Vec3& { return c.env.workspace.hi; }));
    f.push_back(num("dt", [](RunConfig& c) -> double& { return c.env.dt; }));
    f.push_back(num("hdss_fraction", [](RunConfig& c) -> double& { return c.env.hdss_fraction; }));
    f.push_back(num("spawn_margin", [](RunConfig& c) -> double& { return c.env.spawn_margin; }));
    f.push_back({"reset_mode",
                 [](RunConfig& c, const std::string& v) { c.env.reset_mode = reset_mode_from_string(trim(v)); },
                 [](const RunConfig& c) { return std::string(to_string(c.env.reset_mode)); }});
    f.push_back({"domain_randomization",
                 [](RunConfig& c, const std::string& v) { c.env.domain_randomization = parse_bool(v); },
                 [](const RunConfig& c) { return std::string(c.env.domain_randomization ? "true" : "false"); }});
    f.push_back(num("dr_fraction", [](RunConfig& c) -> double& { return c.env.dr_fraction; }));
    f.push_back(integer("max_episode_steps", [](RunConfig& c) -> int& { return c.env.max_episode_steps; }));
    // Physical parameters.
    f.push_back(num("physics.quad_mass", [](RunConfig& c) -> double& { return c.env.physics.quad_mass; }));
    f.push_back(num("physics.payload_mass", [](RunConfig& c) -> double& { return c.env.physics.payload_mass; }));
    f.push_back(num("physics.cable_length", [](RunConfig& c) -> double& { return c.env.physics.cable_length; }));
    f.push_back({"physics.inertia",
                 [](RunConfig& c, const std::string& v) {
                   const auto l = parse_list(v, 3);
                   c.env.physics.inertia = Vec3(l[0], l[1], l[2]).asDiagonal();
                 },
                 [](const RunConfig& c) {
                   const Mat3& I = c.env.physics.inertia;
                   return print_list({I(0, 0), I(1, 1), I(2, 2)});
                 }});
    f.push_back(num("physics.gravity", [](RunConfig& c) -> double& { return c.env.physics.gravity; }));
    f.push_back(num("physics.max_thrust_accel", [](RunConfig& c) -> double& { return c.env.physics.max_thrust_accel; }));
    f.push_back(vec3("physics.max_body_rate", [](RunConfig& c) -> Vec3& { return c.env.physics.max_body_rate; }));
    f.push_back(vec3("physics.rate_gain", [](RunConfig& c) -> Vec3& { return c.env.physics.rate_gain; }));
    // State seeding.
    f.push_back(integer("seed.horizon", [](RunConfig& c) -> int& { return c.env.seed.horizon; }));
    f.push_back(num("seed.dt", [](RunConfig& c) -> double& { return c.env.seed.dt; }));
    f.push_back(range("seed.snap", [](RunConfig& c) -> SampleRange& { return c.env.seed.snap; }));
    f.push_back(range("seed.slack_jerk", [](RunConfig& c) -> SampleRange& { return c.env.seed.slack_jerk; }));
    f.push_back(range("seed.goal_velocity", [](RunConfig& c) -> SampleRange& { return c.env.seed.goal_velocity; }));
    f.push_back(range("seed.goal_accel", [](RunConfig& c) -> SampleRange& { return c.env.seed.goal_accel; }));
    f.push_back(range("seed.goal_jerk", [](RunConfig& c) -> SampleRange& { return c.env.seed.goal_jerk; }));
    f.push_back(num("seed.payload_cone_half_angle", [](RunConfig& c) -> double& { return c.env.seed.payload_cone_half_angle; }));
    f.push_back(num("seed.tension_epsilon", [](RunConfig& c) -> double& { return c.env.seed.tension_epsilon; }));
    f.push_back(num("seed.drift_tolerance", [](RunConfig& c) -> double& { return c.env.seed.drift_tolerance; }));
    f.push_back(num("seed.rate_limit_factor", [](RunConfig& c) -> double& { return c.env.seed.rate_limit_factor; }));
    f.push_back(integer("seed.max_resamples", [](RunConfig& c) -> int& { return c.env.seed.max_resamples; }));
    // Waypoint resampling.
    f.push_back(vec3("track.offset_lo", [](RunConfig& c) -> Vec3& { return c.env.track_gen.offset_lo; }));
    f.push_back(vec3("track.offset_hi", [](RunConfig& c) -> Vec3& { return c.env.track_gen.offset_hi; }));
    f.push_back(num("track.inverted_fraction", [](RunConfig& c) -> double& { return c.env.track_gen.inverted_fraction; }));
    f.push_back(num("track.clamp_margin", [](RunConfig& c) -> double& { return c.env.track_gen.clamp_margin; }));
    // PPO.
    f.push_back(num("ppo.clip_ratio", [](RunConfig& c) -> double& { return c.ppo.clip_ratio; }));
    f.push_back(num("ppo.gamma", [](RunConfig& c) -> double& { return c.ppo.gamma; }));
    f.push_back(num("ppo.gae_lambda", [](RunConfig& c) -> double& { return c.ppo.gae_lambda; }));
    f.push_back(num("ppo.learning_rate", [](RunConfig& c) -> double& { return c.ppo.learning_rate; }));
    f.push_back(integer("ppo.epochs", [](RunConfig& c) -> int& { return c.ppo.epochs; }));
    f.push_back(integer("ppo.minibatches", [](RunConfig& c) -> int& { return c.ppo.minibatches; }));
    f.push_back(num("ppo.entropy_coef", [](RunConfig& c) -> double& { return c.ppo.entropy_coef; }));
    f.push_back(num("ppo.value_coef", [](RunConfig& c) -> double& { return c.ppo.value_coef; }));
    f.push_back(num("ppo.max_grad_norm", [](RunConfig& c) -> double& { return c.ppo.max_grad_norm; }));
    f.push_back(integer("ppo.num_envs", [](RunConfig& c) -> int& { return c.ppo.num_envs; }));
    f.push_back(integer("ppo.horizon", [](RunConfig& c) -> int& { return c.ppo.horizon; }));
    // Networks.
    f.push_back(integer("policy.hidden_size", [](RunConfig& c) -> int& { return c.policy.hidden_size; }));
    f.push_back(integer("policy.hidden_layers", [](RunConfig& c) -> int& { return c.policy.hidden_layers; }));
    f.push_back(num("policy.init_log_std", [](RunConfig& c) -> double& { return c.policy.init_log_std; }));
    f.push_back(num("policy.init_thrust_mean", [](RunConfig& c) -> double& { return c.policy.init_thrust_mean; }));
    // Training loop.
    f.push_back(integer("train.iterations", [](RunConfig& c) -> int& { return c.train.iterations; }));
    f.push_back({"train.seed",
                 [](RunConfig& c, const std::string& v) {
                   const std::string t = trim(v);
                   std::uint64_t s = 0;
                   const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
                   if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
                     throw InvalidArgument("expected a non-negative integer seed, got '" + t + "'");
                   }
                   c.train.seed = s;
                 },
                 [](const RunConfig& c) { return std::to_string(c.train.seed); }});
    f.push_back(integer("train.checkpoint_every", [](RunConfig& c) -> int& { return c.train.checkpoint_every; }));
    f.push_back(integer("train.log_window", [](RunConfig& c) -> int& { return c.train.log_window; }));
    return f;
  }();
  return table;
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 0) throw InvalidArgument("train.iterations must be >= 0");
  if (checkpoint_every < 0) throw InvalidArgument("train.checkpoint_every must be >= 0");
  if (log_window < 1) throw InvalidArgument("train.log_window must be >= 1");
}

void RunConfig::validate() const {
  env.validate();
  ppo.validate();
  policy.validate();
  train.validate();
}

std::string_view to_string(ResetMode mode) {
  switch (mode) {
    case ResetMode::kAuto: return "composite";
    case ResetMode::kHdss: return "hdss";
    case ResetMode::kHover: return "hover-only";
  }
  return "composite";
}

ResetMode reset_mode_from_string(std::string_view text) {
  if (text == "composite" || text == "auto") return ResetMode::kAuto;
  if (text == "hdss") return ResetMode::kHdss;
  if (text == "hover-only" || text == "hover") return ResetMode::kHover;
  throw InvalidArgument("unknown reset mode '" + std::string(text) +
                        "' (expected composite, hdss or hover-only)");
}

void apply_config_line(RunConfig& cfg, const std::string& raw, const std::string& source,
                       int line_number) {
  std::string line = raw;
  if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string::npos) {
    throw ParseError(source, line_number, "", "expected 'key = value'");
  }
  const std::string key = trim(line.substr(0, eq));
  const std::string value = trim(line.substr(eq + 1));
  for (const Field& f : fields()) {
    if (f.key != key) continue;
    try {
      f.parse(cfg, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_number, key, e.what());
    }
    return;
  }
  throw ParseError(source, line_number, key, "unknown key");
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) apply_config_line(cfg, line, source, ++n);
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, "", e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read config file " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string write_run_config(const RunConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) {
    if (f.print) out += f.key + " = " + f.print(cfg) + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace slung
