#include "hiformer/checkpoint.hpp"

#include "hiformer/config_json.hpp"
#include "hiformer/container.hpp"
#include "hiformer/error.hpp"
#include "hiformer/io_util.hpp"

namespace hiformer {

namespace {
constexpr std::string_view kMagic = "HIFORMER";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string config_fingerprint(const model::ModelConfig& cfg) {
  const nlohmann::json j = cfg;
  return io::hex64(io::fnv1a(j.dump()));
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  ckpt.config.validate();
  nlohmann::json h;
  h["config"] = ckpt.config;
  h["fingerprint"] = config_fingerprint(ckpt.config);
  h["stats"] = ckpt.stats;
  h["vmd"] = ckpt.vmd;
  h["window"] = ckpt.window;
  h["metadata"] = ckpt.metadata;
  std::vector<double> payload;
  nlohmann::json table = nlohmann::json::array();
  auto append = [&](const std::string& name, const ad::Tensor& t) {
    table.push_back({{"name", name}, {"shape", t.shape()}, {"offset", payload.size()}});
    const auto d = t.data();
    payload.insert(payload.end(), d.begin(), d.end());
  };
  for (const auto& [name, t] : ckpt.params.named_parameters()) append(name, t);
  if (ckpt.node_embedding.defined()) append("node_embedding", ckpt.node_embedding);
  h["tensors"] = table;
  io::write_container(path, kMagic, kVersion, h, payload);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto c = io::read_container(path, kMagic, kVersion);
  Checkpoint ck;
  const auto& h = c.header;
  try {
    ck.config = h.at("config").get<model::ModelConfig>();
    ck.stats = h.at("stats").get<train::NormStats>();
    ck.vmd = h.at("vmd").get<vmd::VmdConfig>();
    ck.window = h.at("window").get<data::WindowConfig>();
    ck.metadata = h.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed checkpoint header: " + e.what());
  }
  ck.config.validate();
  const auto stored = h.value("fingerprint", std::string());
  const auto actual = config_fingerprint(ck.config);
  if (stored != actual) {
    throw ConfigError(path.string() + ": checkpoint fingerprint " + stored + " does not match its configuration " +
                      actual);
  }

  ck.params = model::HiformerParams::init(ck.config, 0);
  auto named = ck.params.named_parameters();
  std::size_t next = 0;
  for (const auto& entry : h.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<ad::Shape>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const std::size_t numel = ad::shape_numel(shape);
    if (offset + numel > c.payload.size()) throw DataError(path.string() + ": tensor " + name + " exceeds payload");
    const std::span<const double> src(c.payload.data() + offset, numel);
    if (name == "node_embedding") {
      ck.node_embedding = ad::Tensor(shape, std::vector<double>(src.begin(), src.end()));
      continue;
    }
    if (next >= named.size() || named[next].first != name) {
      throw DataError(path.string() + ": unexpected tensor " + name);
    }
    auto& t = named[next++].second;
    if (t.shape() != shape) {
      throw DataError(path.string() + ": tensor " + name + " has shape " + ad::shape_string(shape) + ", expected " +
                      ad::shape_string(t.shape()));
    }
    auto dst = t.mutable_data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
  if (next != named.size()) throw DataError(path.string() + ": checkpoint is missing parameters");
  return ck;
}

}  // namespace hiformer
