#include "resp/nn/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "../rng.hpp"
#include "layers.hpp"
#include "resp/error.hpp"

namespace resp::nn {

struct ForwardCache::State {
  std::vector<std::unique_ptr<LayerState>> layers;
  Tensor probs;
};

ForwardCache::ForwardCache() = default;
ForwardCache::~ForwardCache() = default;
ForwardCache::ForwardCache(ForwardCache&&) noexcept = default;
ForwardCache& ForwardCache::operator=(ForwardCache&&) noexcept = default;
bool ForwardCache::valid() const { return state_ != nullptr; }
void ForwardCache::clear() { state_.reset(); }

Network::Network(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  const auto infos = infer_layers(spec_);
  Shape shape = spec_.input_shape();
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& layer = spec_.layers[i];
    const std::uint64_t layer_seed =
        std::holds_alternative<Dropout>(layer) ? i : detail::derive_seed(seed, i);
    layers_.push_back(make_layer(layer, shape, layer_seed));
    shape = infos[i].output;
  }
}

Network::~Network() = default;
Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;

std::vector<Tensor*> Network::params() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    for (Tensor* t : l->params()) out.push_back(t);
  }
  return out;
}

std::vector<const Tensor*> Network::params() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    for (Tensor* t : l->params()) out.push_back(t);
  }
  return out;
}

std::vector<Tensor*> Network::buffers() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    for (Tensor* t : l->buffers()) out.push_back(t);
  }
  return out;
}

std::vector<const Tensor*> Network::buffers() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    for (Tensor* t : l->buffers()) out.push_back(t);
  }
  return out;
}

std::size_t Network::param_count() const {
  std::size_t total = 0;
  for (const Tensor* t : params()) total += t->size();
  return total;
}

Tensor Network::forward(const Tensor& input, Mode mode, std::uint64_t seed, ForwardCache* cache) {
  const Shape expected = spec_.input_shape();
  if (input.shape.size() != 4 || input.shape[0] == 0 ||
      !std::equal(expected.begin(), expected.end(), input.shape.begin() + 1)) {
    throw Error(ErrorKind::ShapeMismatch, "input " + shape_string(input.shape) + " does not match " +
                                              shape_string(expected));
  }
  const bool record = cache != nullptr && mode == Mode::Train;
  auto state = record ? std::make_unique<ForwardCache::State>() : nullptr;
  if (state) state->layers.resize(layers_.size());

  Tensor x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x, mode, seed, state ? &state->layers[i] : nullptr);
  }
  if (cache) {
    if (state) state->probs = x;
    cache->state_ = std::move(state);
  }
  return x;
}

double Network::backward(ForwardCache& cache, const Tensor& targets) {
  if (!cache.valid()) throw Error(ErrorKind::MissingCache, "backward needs a train-mode forward cache");
  auto& st = *cache.state_;
  const Tensor& p = st.probs;
  if (targets.shape != p.shape) {
    throw Error(ErrorKind::ShapeMismatch, "targets " + shape_string(targets.shape) + " vs outputs " +
                                              shape_string(p.shape));
  }
  const std::size_t n = p.shape[0];
  double loss = 0.0;
  Tensor grad(p.shape);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (targets.data[i] != 0.0) loss -= targets.data[i] * std::log(std::max(p.data[i], 1e-300));
    grad.data[i] = (p.data[i] - targets.data[i]) / double(n);
  }
  loss /= double(n);
  // The last layer is Softmax; its Jacobian is already folded into `grad`.
  for (std::size_t i = layers_.size() - 1; i-- > 0;) grad = layers_[i]->backward(grad, *st.layers[i]);
  return loss;
}

void Network::zero_grad() {
  for (Tensor* t : params()) t->zero_grad();
}

void Network::calibrate_batchnorm(const Tensor& input) {
  Tensor x = input;
  for (auto& layer : layers_) {
    Tensor out;
    if (calibrate_if_batchnorm(*layer, x, out)) {
      x = std::move(out);
    } else {
      x = layer->forward(x, Mode::Infer, 0, nullptr);
    }
  }
}

namespace {

constexpr char kMagic[8] = {'R', 'E', 'S', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
  char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, sizeof b);
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char b[sizeof(T)] = {};
  is.read(reinterpret_cast<char*>(b), sizeof b);
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
  return v;
}

std::vector<const Tensor*> checkpoint_tensors(const Network& net) {
  auto tensors = net.params();
  for (const Tensor* b : net.buffers()) tensors.push_back(b);
  return tensors;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Network& net) {
  const auto tensors = checkpoint_tensors(net);
  nlohmann::json shapes = nlohmann::json::array();
  for (const Tensor* t : tensors) shapes.push_back(t->shape);
  const std::string header = nlohmann::json{{"model", to_json(net.spec())}, {"tensors", shapes}}.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os.write(kMagic, sizeof kMagic);
  write_le<std::uint32_t>(os, kVersion);
  write_le<std::uint64_t>(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const Tensor* t : tensors) {
    for (double v : t->data) write_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  }
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::ParseError, path.string() + " is not a checkpoint");
  }
  if (read_le<std::uint32_t>(is) != kVersion) throw Error(ErrorKind::ParseError, "unsupported checkpoint version");
  const auto len = read_le<std::uint64_t>(is);
  std::string header(len, '\0');
  is.read(header.data(), static_cast<std::streamsize>(len));
  if (!is) throw Error(ErrorKind::ParseError, "truncated checkpoint header");

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("checkpoint header: ") + e.what());
  }
  Network net(spec_from_json(meta.at("model")), 0);
  std::vector<Tensor*> tensors = net.params();
  for (Tensor* b : net.buffers()) tensors.push_back(b);
  const auto& shapes = meta.at("tensors");
  if (shapes.size() != tensors.size()) throw Error(ErrorKind::ShapeMismatch, "checkpoint tensor count");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (shapes[i].get<Shape>() != tensors[i]->shape) {
      throw Error(ErrorKind::ShapeMismatch, "checkpoint tensor " + std::to_string(i) + " shape");
    }
    for (double& v : tensors[i]->data) v = std::bit_cast<double>(read_le<std::uint64_t>(is));
  }
  if (!is) throw Error(ErrorKind::ParseError, "truncated checkpoint data");
  return net;
}

}  // namespace resp::nn
