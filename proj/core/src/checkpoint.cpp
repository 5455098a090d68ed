#include "inlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "inlab/error.hpp"

namespace inlab {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'L', 'B', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::vector<char> bytes;
};

class Reader {
 public:
  explicit Reader(std::vector<char> b) : bytes_(std::move(b)) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint is truncated");
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

void write_dims(Writer& w, const std::vector<int>& dims) {
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) w.u32(static_cast<std::uint32_t>(d));
}

std::vector<int> read_dims(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n < 2 || n > 64) throw FormatError("checkpoint has an implausible layer count");
  std::vector<int> dims(n);
  for (auto& d : dims) {
    const std::uint32_t v = r.u32();
    if (v == 0 || v > (1u << 20)) throw FormatError("checkpoint has an implausible layer size");
    d = static_cast<int>(v);
  }
  return dims;
}

void write_mlp(Writer& w, const Mlp<double>& m) {
  for (int l = 0; l < m.layers(); ++l) {
    const auto W = m.W(l);
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) w.f64(W(r, c));
    }
    const auto b = m.b(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) w.f64(b[i]);
  }
}

void read_mlp(Reader& r, Mlp<double>& m) {
  for (int l = 0; l < m.layers(); ++l) {
    auto W = m.W(l);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(i, c) = r.f64();
    }
    auto b = m.b(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = r.f64();
  }
}

}  // namespace

void save_checkpoint(const ActorCritic<double>& p, std::uint32_t layout_id, const std::string& path) {
  Writer w;
  w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
  w.u32(kCheckpointVersion);
  w.u32(layout_id);
  write_dims(w, p.actor.dims());
  write_dims(w, p.critic.dims());
  write_mlp(w, p.actor);
  for (Eigen::Index i = 0; i < p.log_std.size(); ++i) w.f64(p.log_std[i]);
  write_mlp(w, p.critic);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open checkpoint for writing: " + path);
  out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw FormatError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  Reader r(std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw FormatError("not a checkpoint file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
  Checkpoint ck;
  ck.layout_id = r.u32();
  const auto adims = read_dims(r);
  const auto cdims = read_dims(r);
  if (cdims.back() != 1 || cdims.front() != adims.front()) {
    throw FormatError("checkpoint actor/critic dimensions are inconsistent");
  }
  ck.params.actor = Mlp<double>(adims);
  ck.params.critic = Mlp<double>(cdims);
  read_mlp(r, ck.params.actor);
  ck.params.log_std.resize(adims.back());
  for (Eigen::Index i = 0; i < ck.params.log_std.size(); ++i) ck.params.log_std[i] = r.f64();
  read_mlp(r, ck.params.critic);
  if (!r.done()) throw FormatError("checkpoint has trailing bytes");
  return ck;
}

Checkpoint load_checkpoint_for(const std::string& path, int obs_dim, int act_dim,
                               std::uint32_t layout_id) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.params.obs_dim() != obs_dim || ck.params.act_dim() != act_dim) {
    throw ConfigError("checkpoint dimensions (" + std::to_string(ck.params.obs_dim()) + " -> " +
                      std::to_string(ck.params.act_dim()) + ") do not match the configuration (" +
                      std::to_string(obs_dim) + " -> " + std::to_string(act_dim) + ")");
  }
  if (ck.layout_id != layout_id) throw ConfigError("checkpoint observation layout does not match");
  return ck;
}

}  // namespace inlab
