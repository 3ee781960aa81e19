#include "slung/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace slung {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "slung-checkpoint";
constexpr int kVersion = 1;

void write_number(std::ostringstream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void write_tensor(std::ostringstream& out, const std::string& name, const double* data,
                  Eigen::Index rows, Eigen::Index cols, bool last) {
  out << "    {\"name\": \"" << name << "\", \"shape\": [" << rows << ", " << cols
      << "], \"data\": [";
  for (Eigen::Index i = 0; i < rows * cols; ++i) {
    if (i) out << ", ";
    write_number(out, data[i]);
  }
  out << "]}" << (last ? "" : ",") << "\n";
}

struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows, cols;
};

std::vector<TensorRef> tensors(ActorCritic& ac) {
  std::vector<TensorRef> out;
  for (auto [prefix, net] : {std::pair<const char*, Mlp*>{"actor", &ac.actor()},
                             std::pair<const char*, Mlp*>{"critic", &ac.critic()}}) {
    for (std::size_t l = 0; l < net->layer_count(); ++l) {
      Eigen::MatrixXd& w = net->weight(l);
      Eigen::VectorXd& b = net->bias(l);
      const std::string base = std::string(prefix) + "." + std::to_string(l);
      out.push_back({base + ".weight", w.data(), w.rows(), w.cols()});
      out.push_back({base + ".bias", b.data(), b.size(), 1});
    }
  }
  out.push_back({"log_std", ac.log_std().data(), ac.log_std().size(), 1});
  return out;
}

}  // namespace

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  Checkpoint copy = ckpt;
  const PolicyConfig& cfg = copy.model.config();
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"" << kFormat << "\",\n";
  out << "  \"version\": " << kVersion << ",\n";
  out << "  \"architecture\": " << json(cfg.architecture()).dump() << ",\n";
  out << "  \"fingerprint\": \"" << fingerprint_hex(cfg.fingerprint()) << "\",\n";
  out << "  \"config\": {\"input_size\": " << cfg.input_size
      << ", \"action_size\": " << cfg.action_size << ", \"hidden_size\": " << cfg.hidden_size
      << ", \"hidden_layers\": " << cfg.hidden_layers << "},\n";
  out << "  \"iteration\": " << copy.iteration << ",\n";
  out << "  \"metadata\": " << json(copy.metadata).dump() << ",\n";
  out << "  \"tensors\": [\n";
  const auto refs = tensors(copy.model);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    write_tensor(out, refs[i].name, refs[i].data, refs[i].rows, refs[i].cols, i + 1 == refs.size());
  }
  out << "  ]\n}\n";
  return out.str();
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write checkpoint " + tmp.string());
    f << checkpoint_to_string(ckpt);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint checkpoint_from_string(const std::string& text, const PolicyConfig& expected,
                                  const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, "", e.what());
  }
  auto need = [&](const char* key) -> const json& {
    if (!doc.contains(key)) throw ParseError(source, 0, key, "missing field");
    return doc[key];
  };
  if (need("format") != kFormat) throw ParseError(source, 0, "format", "not a checkpoint");
  if (need("version") != kVersion) throw ParseError(source, 0, "version", "unsupported version");

  const std::string stored_arch = need("architecture").get<std::string>();
  const std::string stored_fp = need("fingerprint").get<std::string>();
  if (fingerprint_hex(fnv1a64(stored_arch)) != stored_fp) {
    throw ParseError(source, 0, "fingerprint", "does not match the stored architecture");
  }
  if (stored_fp != fingerprint_hex(expected.fingerprint())) {
    throw FingerprintMismatch(source + ": checkpoint architecture '" + stored_arch +
                              "' does not match expected '" + expected.architecture() + "'");
  }

  Checkpoint ckpt;
  ckpt.model = ActorCritic(expected);
  ckpt.iteration = need("iteration").get<long>();
  for (const auto& [k, v] : need("metadata").items()) ckpt.metadata[k] = v.get<std::string>();

  const json& arr = need("tensors");
  auto refs = tensors(ckpt.model);
  if (!arr.is_array() || arr.size() != refs.size()) {
    throw ParseError(source, 0, "tensors", "unexpected tensor count");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const json& t = arr[i];
    const std::string field = "tensors[" + std::to_string(i) + "]";
    if (t.value("name", "") != refs[i].name) throw ParseError(source, 0, field + ".name", "unexpected tensor");
    const json& shape = t["shape"];
    if (!shape.is_array() || shape.size() != 2 || shape[0] != refs[i].rows ||
        shape[1] != refs[i].cols) {
      throw ParseError(source, 0, field + ".shape", "shape mismatch");
    }
    const json& data = t["data"];
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != refs[i].rows * refs[i].cols) {
      throw ParseError(source, 0, field + ".data", "size mismatch");
    }
    for (std::size_t k = 0; k < data.size(); ++k) refs[i].data[k] = data[k].get<double>();
  }
  if (!ckpt.model.finite()) throw ParseError(source, 0, "tensors", "non-finite parameter");
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const PolicyConfig& expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read checkpoint " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return checkpoint_from_string(buf.str(), expected, path.string());
}

}  // namespace slung
