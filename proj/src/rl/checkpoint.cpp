#include "hwadv/rl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hwadv::rl {

namespace {

constexpr char kMagic[8] = {'H', 'W', 'A', 'D', 'V', 'C', 'K', '\0'};

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_i32(std::ostream& os, std::int32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_i64(std::ostream& os, std::int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::string get_string(std::istream& is) {
  const auto n = get_raw<std::uint32_t>(is);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: corrupt string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  put_i64(os, m.rows());
  put_i64(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd get_matrix(std::istream& is) {
  const auto rows = get_raw<std::int64_t>(is);
  const auto cols = get_raw<std::int64_t>(is);
  if (rows < 0 || cols < 0 || rows * cols > (1ll << 26))
    throw std::runtime_error("checkpoint: corrupt matrix header");
  Eigen::MatrixXd m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return m;
}

} // namespace

Checkpoint make_checkpoint(std::string kind, const QNetwork& net,
                           const ObservationScaling& scaling, const TrainConfig& cfg) {
  Checkpoint c;
  c.kind = std::move(kind);
  c.layer_dims = net.layer_dims();
  c.weights = net.weights();
  c.biases = net.biases();
  c.scaling = scaling;
  c.train = cfg;
  return c;
}

QNetwork network_from(const Checkpoint& ckpt) {
  QNetwork net(ckpt.layer_dims, 0);
  if (net.weights().size() != ckpt.weights.size())
    throw std::runtime_error("checkpoint: layer count mismatch");
  for (std::size_t l = 0; l < ckpt.weights.size(); ++l) {
    if (net.weights()[l].rows() != ckpt.weights[l].rows() ||
        net.weights()[l].cols() != ckpt.weights[l].cols())
      throw std::runtime_error("checkpoint: weight shape mismatch");
    net.weights()[l] = ckpt.weights[l];
    net.biases()[l] = ckpt.biases[l];
  }
  return net;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);

  os.write(kMagic, sizeof(kMagic));
  put_u32(os, Checkpoint::kVersion);
  put_string(os, ckpt.kind);

  put_u32(os, static_cast<std::uint32_t>(ckpt.layer_dims.size()));
  for (const int d : ckpt.layer_dims) put_i32(os, d);

  put_u32(os, static_cast<std::uint32_t>(ckpt.weights.size()));
  for (std::size_t l = 0; l < ckpt.weights.size(); ++l) {
    put_matrix(os, ckpt.weights[l]);
    put_matrix(os, ckpt.biases[l]);
  }

  put_f64(os, ckpt.scaling.y_center);
  put_f64(os, ckpt.scaling.y_half);
  put_f64(os, ckpt.scaling.v_half);
  put_f64(os, ckpt.scaling.dx_range);
  put_f64(os, ckpt.scaling.dy_range);
  put_f64(os, ckpt.scaling.dv_range);

  const TrainConfig& t = ckpt.train;
  put_f64(os, t.gamma);
  put_f64(os, t.learning_rate);
  put_f64(os, t.epsilon0);
  put_f64(os, t.epsilon_min);
  put_f64(os, t.anneal_c);
  put_i32(os, t.steps_per_episode);
  put_i64(os, t.episodes);
  put_i32(os, t.batch_size);
  put_i32(os, t.target_sync);
  put_u64(os, t.buffer_normal);
  put_u64(os, t.buffer_crash);
  put_f64(os, t.mix_fraction);
  put_u32(os, static_cast<std::uint32_t>(t.hidden.size()));
  for (const int h : t.hidden) put_i32(os, h);
  put_u64(os, t.seed);

  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);

  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic: " + path);
  const auto version = get_raw<std::uint32_t>(is);
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint: unsupported version");

  Checkpoint c;
  c.kind = get_string(is);

  const auto n_dims = get_raw<std::uint32_t>(is);
  if (n_dims < 2 || n_dims > 64) throw std::runtime_error("checkpoint: corrupt dims");
  c.layer_dims.resize(n_dims);
  for (auto& d : c.layer_dims) d = get_raw<std::int32_t>(is);

  const auto n_layers = get_raw<std::uint32_t>(is);
  if (n_layers != n_dims - 1) throw std::runtime_error("checkpoint: corrupt layer count");
  c.weights.reserve(n_layers);
  c.biases.reserve(n_layers);
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    c.weights.push_back(get_matrix(is));
    c.biases.push_back(Eigen::VectorXd(get_matrix(is)));
  }

  c.scaling.y_center = get_raw<double>(is);
  c.scaling.y_half = get_raw<double>(is);
  c.scaling.v_half = get_raw<double>(is);
  c.scaling.dx_range = get_raw<double>(is);
  c.scaling.dy_range = get_raw<double>(is);
  c.scaling.dv_range = get_raw<double>(is);

  TrainConfig& t = c.train;
  t.gamma = get_raw<double>(is);
  t.learning_rate = get_raw<double>(is);
  t.epsilon0 = get_raw<double>(is);
  t.epsilon_min = get_raw<double>(is);
  t.anneal_c = get_raw<double>(is);
  t.steps_per_episode = get_raw<std::int32_t>(is);
  t.episodes = get_raw<std::int64_t>(is);
  t.batch_size = get_raw<std::int32_t>(is);
  t.target_sync = get_raw<std::int32_t>(is);
  t.buffer_normal = get_raw<std::uint64_t>(is);
  t.buffer_crash = get_raw<std::uint64_t>(is);
  t.mix_fraction = get_raw<double>(is);
  const auto n_hidden = get_raw<std::uint32_t>(is);
  if (n_hidden > 64) throw std::runtime_error("checkpoint: corrupt hidden count");
  t.hidden.resize(n_hidden);
  for (auto& h : t.hidden) h = get_raw<std::int32_t>(is);
  t.seed = get_raw<std::uint64_t>(is);

  return c;
}

} // namespace hwadv::rl
