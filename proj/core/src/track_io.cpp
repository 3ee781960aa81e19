// Track file format: JSON text, doubles written with 17 significant digits.
//
//   {
//     "name": "Ribbon",
//     "start": [x, y, z],                  (optional)
//     "metadata": {"key": "value"},        (optional)
//     "waypoints": [
//       {"p": [x, y, z], "q": [w, x, y, z], "kind": "upright", "yaw": 0}
//     ]
//   }

#include "slung/tracks.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slung {
namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string vec_text(std::initializer_list<double> values) {
  std::string out = "[";
  bool first = true;
  for (double v : values) {
    if (!first) out += ", ";
    out += fmt17(v);
    first = false;
  }
  return out + "]";
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Line of the n-th occurrence of `"key"` in the text; best effort for field errors.
int line_of_key(const std::string& text, const std::string& key, std::size_t occurrence) {
  const std::string needle = "\"" + key + "\"";
  std::size_t pos = 0;
  for (std::size_t i = 0; i <= occurrence; ++i) {
    pos = text.find(needle, i == 0 ? 0 : pos + 1);
    if (pos == std::string::npos) return 0;
  }
  return line_of_offset(text, pos);
}

Vec3 read_vec3(const json& j, const std::string& source, int line, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(source, line, field, "expected an array of 3 numbers");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ParseError(source, line, field, "expected a number");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

std::string track_to_string(const Track& track) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"name\": " << json(track.name).dump() << ",\n";
  if (track.start) {
    out << "  \"start\": " << vec_text({track.start->x(), track.start->y(), track.start->z()})
        << ",\n";
  }
  if (!track.metadata.empty()) {
    out << "  \"metadata\": " << json(track.metadata).dump() << ",\n";
  }
  out << "  \"waypoints\": [\n";
  for (std::size_t i = 0; i < track.waypoints.size(); ++i) {
    const Waypoint& w = track.waypoints[i];
    out << "    {\"p\": " << vec_text({w.position.x(), w.position.y(), w.position.z()})
        << ", \"q\": "
        << vec_text({w.attitude.w(), w.attitude.x(), w.attitude.y(), w.attitude.z()})
        << ", \"kind\": \"" << to_string(w.kind) << "\", \"yaw\": " << fmt17(w.yaw) << "}"
        << (i + 1 < track.waypoints.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

void save_track(const Track& track, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write track file " + path.string());
  f << track_to_string(track);
}

Track track_from_string(const std::string& text, const std::string& source,
                        const Workspace& workspace) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, line_of_offset(text, e.byte), "", e.what());
  }
  if (!doc.is_object()) throw ParseError(source, 1, "", "top level must be an object");

  Track track;
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw ParseError(source, line_of_key(text, "name", 0), "name", "missing string field");
  }
  track.name = doc["name"].get<std::string>();
  if (doc.contains("start")) {
    track.start = read_vec3(doc["start"], source, line_of_key(text, "start", 0), "start");
  }
  if (doc.contains("metadata")) {
    const json& m = doc["metadata"];
    if (!m.is_object()) {
      throw ParseError(source, line_of_key(text, "metadata", 0), "metadata", "expected an object");
    }
    for (const auto& [k, v] : m.items()) {
      track.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  if (!doc.contains("waypoints") || !doc["waypoints"].is_array()) {
    throw ParseError(source, line_of_key(text, "waypoints", 0), "waypoints",
                     "missing waypoint array");
  }
  const json& wps = doc["waypoints"];
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const json& w = wps[i];
    const std::string base = "waypoints[" + std::to_string(i) + "]";
    const int line = line_of_key(text, "p", i);
    if (!w.is_object()) throw ParseError(source, line, base, "expected an object");
    for (const char* key : {"p", "q", "kind"}) {
      if (!w.contains(key)) throw ParseError(source, line, base + "." + key, "missing field");
    }
    Waypoint wp;
    wp.position = read_vec3(w["p"], source, line, base + ".p");
    const json& q = w["q"];
    if (!q.is_array() || q.size() != 4) {
      throw ParseError(source, line, base + ".q", "expected [w, x, y, z]");
    }
    double qv[4];
    for (int k = 0; k < 4; ++k) {
      if (!q[k].is_number()) throw ParseError(source, line, base + ".q", "expected a number");
      qv[k] = q[k].get<double>();
    }
    wp.attitude = Quat(qv[0], qv[1], qv[2], qv[3]);
    if (!w["kind"].is_string()) throw ParseError(source, line, base + ".kind", "expected a string");
    try {
      wp.kind = waypoint_kind_from_string(w["kind"].get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line, base + ".kind", e.what());
    }
    if (w.contains("yaw")) {
      if (!w["yaw"].is_number()) throw ParseError(source, line, base + ".yaw", "expected a number");
      wp.yaw = w["yaw"].get<double>();
    }
    track.waypoints.push_back(wp);
  }
  try {
    validate_track(track, workspace);
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return track;
}

Track load_track(const std::filesystem::path& path, const Workspace& workspace) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read track file " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return track_from_string(buf.str(), path.string(), workspace);
}

}  // namespace slung
