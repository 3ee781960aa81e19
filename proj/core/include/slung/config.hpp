#pragma once

#include "slung/env.hpp"
#include "slung/policy.hpp"
#include "slung/ppo.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace slung {

struct TrainConfig {
  int iterations = 100;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // 0: final checkpoint only
  int log_window = 100;      // completed episodes in the rolling means

  void validate() const;
};

// Everything a command needs, loadable from one `key = value` file.
struct RunConfig {
  EnvConfig env;
  PpoConfig ppo;
  PolicyConfig policy;
  TrainConfig train;

  void validate() const;
};

std::string_view to_string(ResetMode mode);
// composite|auto, hdss, hover-only|hover.
ResetMode reset_mode_from_string(std::string_view text);

// Format: one `key = value` per line, `#` starts a comment, blank lines are
// ignored. Vectors are comma separated, booleans true/false. Keys not listed
// keep their defaults. Throws ParseError naming the line and key.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_run_config(const std::filesystem::path& path);
// Applies a single override on top of `cfg` (same syntax as a file line).
void apply_config_line(RunConfig& cfg, const std::string& line, const std::string& source,
                       int line_number);

// Every key with its current value; parse_run_config(write_run_config(c))
// reproduces c exactly.
std::string write_run_config(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace slung
