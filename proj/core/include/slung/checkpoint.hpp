#pragma once

#include "slung/policy.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace slung {

// Structured-text checkpoint: JSON with per-tensor shape headers and an
// architecture fingerprint. Numbers are written with 17 significant digits
// so a save/load round trip is exact.
struct Checkpoint {
  ActorCritic model;
  long iteration = 0;
  std::map<std::string, std::string> metadata;
};

std::string checkpoint_to_string(const Checkpoint& ckpt);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Throws FingerprintMismatch when the stored architecture differs from
// `expected`, ParseError on malformed content.
Checkpoint checkpoint_from_string(const std::string& text, const PolicyConfig& expected,
                                  const std::string& source = "<string>");
Checkpoint load_checkpoint(const std::filesystem::path& path, const PolicyConfig& expected);

std::string fingerprint_hex(std::uint64_t fp);

}  // namespace slung
