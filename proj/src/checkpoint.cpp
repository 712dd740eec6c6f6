#include "specknet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "specknet/config_json.hpp"
#include "specknet/digest.hpp"
#include "specknet/errors.hpp"

namespace specknet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'P', 'K', 'N', 'C', 'K', 'P', 'T'};
constexpr std::size_t kDigestLen = 64;

template <class T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Cursor {
 public:
  Cursor(const std::string& buf, std::size_t end, const std::string& name) : buf_(buf), end_(end), name_(name) {}

  template <class T>
  T take() {
    T v;
    std::memcpy(&v, bytes(sizeof(T)), sizeof(T));
    return v;
  }

  const char* bytes(std::size_t n) {
    if (end_ - pos_ < n) throw DataError("corrupt checkpoint '" + name_ + "': truncated");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::size_t remaining() const { return end_ - pos_; }

 private:
  const std::string& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
  std::string name_;
};

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  if (model.weights.size() != unet_parameter_count(model.unet)) {
    throw ConfigError("model weights do not match the network configuration");
  }
  nlohmann::json header{{"unet", model.unet},
                        {"train", model.train},
                        {"mode", std::string(to_string(model.mode))},
                        {"patch_size", model.patch_size},
                        {"best_epoch", model.best_epoch},
                        {"dataset_digest", model.dataset_digest},
                        {"history", model.history},
                        {"parameter_count", model.weights.size()}};
  const std::string text = header.dump();

  std::string buf(kMagic, sizeof(kMagic));
  put(buf, kCheckpointVersion);
  put(buf, static_cast<std::uint64_t>(text.size()));
  buf += text;
  put(buf, static_cast<std::uint64_t>(model.weights.size()));
  buf.append(reinterpret_cast<const char*>(model.weights.data()), model.weights.size() * sizeof(float));
  buf += sha256_hex({reinterpret_cast<const unsigned char*>(buf.data()), buf.size()});

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

TrainedModel load_model(const std::filesystem::path& path, const std::optional<UNetConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();

  if (buf.size() < sizeof(kMagic) + kDigestLen || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("corrupt checkpoint '" + name + "': bad magic");
  }
  const std::size_t body = buf.size() - kDigestLen;
  const std::string digest = sha256_hex({reinterpret_cast<const unsigned char*>(buf.data()), body});
  if (buf.compare(body, kDigestLen, digest) != 0) {
    throw DataError("corrupt checkpoint '" + name + "': digest mismatch");
  }

  Cursor cur(buf, body, name);
  cur.bytes(sizeof(kMagic));
  const auto version = cur.take<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version) + " in '" + name + "'");
  }
  const auto header_len = cur.take<std::uint64_t>();
  if (header_len > cur.remaining()) throw DataError("corrupt checkpoint '" + name + "': truncated header");
  const char* header_text = cur.bytes(header_len);

  TrainedModel m;
  std::uint64_t stored_count = 0;
  try {
    const auto header = nlohmann::json::parse(header_text, header_text + header_len);
    m.unet = header.at("unet").get<UNetConfig>();
    m.train = header.at("train").get<TrainConfig>();
    m.mode = training_mode_from_string(header.at("mode").get<std::string>());
    m.patch_size = header.at("patch_size").get<int>();
    m.best_epoch = header.at("best_epoch").get<int>();
    m.dataset_digest = header.at("dataset_digest").get<std::string>();
    m.history = header.at("history").get<std::vector<EpochRecord>>();
    stored_count = header.at("parameter_count").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt checkpoint '" + name + "': " + e.what());
  }
  m.unet.validate();

  const auto n = cur.take<std::uint64_t>();
  if (n != stored_count || n != unet_parameter_count(m.unet) || cur.remaining() != n * sizeof(float)) {
    throw DataError("corrupt checkpoint '" + name + "': parameter count mismatch");
  }
  m.weights.resize(n);
  std::memcpy(m.weights.data(), cur.bytes(n * sizeof(float)), n * sizeof(float));

  if (expected && !(*expected == m.unet)) {
    throw ConfigError("config mismatch: checkpoint '" + name + "' was trained with depth " +
                      std::to_string(m.unet.depth) + ", base_channels " + std::to_string(m.unet.base_channels) +
                      " but depth " + std::to_string(expected->depth) + ", base_channels " +
                      std::to_string(expected->base_channels) + " was requested");
  }
  return m;
}

}  // namespace specknet
