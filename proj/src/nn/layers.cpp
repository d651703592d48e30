#include "layers.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <random>

#include "../rng.hpp"
#include "resp/error.hpp"

namespace resp::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require_rank(const Tensor& t, std::size_t rank, const char* layer) {
  if (t.shape.size() != rank) {
    throw Error(ErrorKind::ShapeMismatch, std::string(layer) + " got input " + shape_string(t.shape));
  }
}

void kaiming_uniform(Tensor& w, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(double(fan_in));
  for (double& v : w.data) v = (2.0 * detail::uniform01(rng) - 1.0) * bound;
}

struct InputState : LayerState {
  Tensor input;
};

class ConvLayer final : public Layer {
 public:
  ConvLayer(const Conv2D& spec, const Shape& in, std::uint64_t seed)
      : spec_(spec), in_c_(in[0]) {
    weight_ = Tensor({spec.out_channels, in_c_, spec.kernel_h, spec.kernel_w});
    bias_ = Tensor({spec.out_channels});
    std::mt19937_64 rng(seed);
    kaiming_uniform(weight_, in_c_ * spec.kernel_h * spec.kernel_w, rng);
    weight_.zero_grad();
    bias_.zero_grad();
    if (spec.padding == Padding::Same) {
      pad_t_ = (spec.kernel_h - 1) / 2;
      pad_l_ = (spec.kernel_w - 1) / 2;
    }
  }

  Tensor forward(const Tensor& in, Mode, std::uint64_t, std::unique_ptr<LayerState>* state) override {
    require_rank(in, 4, "Conv2D");
    if (in.shape[1] != in_c_) throw Error(ErrorKind::ShapeMismatch, "Conv2D channel mismatch");
    const std::size_t n = in.shape[0], h = in.shape[2], w = in.shape[3];
    const auto [oh, ow] = out_hw(h, w);
    const std::size_t k = in_c_ * spec_.kernel_h * spec_.kernel_w;
    const std::size_t cout = spec_.out_channels;
    Tensor out({n, cout, oh, ow});
    RowMat cols(k, oh * ow);
    const ConstMapMat wmat(weight_.data.data(), cout, k);
    for (std::size_t s = 0; s < n; ++s) {
      im2col(in.data.data() + s * in_c_ * h * w, h, w, oh, ow, cols);
      MapMat o(out.data.data() + s * cout * oh * ow, cout, oh * ow);
      o.noalias() = wmat * cols;
      for (std::size_t c = 0; c < cout; ++c) o.row(c).array() += bias_.data[c];
    }
    if (state) {
      auto st = std::make_unique<InputState>();
      st->input = in;
      *state = std::move(st);
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out, LayerState& state) override {
    const Tensor& in = static_cast<InputState&>(state).input;
    const std::size_t n = in.shape[0], h = in.shape[2], w = in.shape[3];
    const auto [oh, ow] = out_hw(h, w);
    const std::size_t k = in_c_ * spec_.kernel_h * spec_.kernel_w;
    const std::size_t cout = spec_.out_channels;
    Tensor grad_in(in.shape);
    RowMat cols(k, oh * ow);
    RowMat dcols(k, oh * ow);
    const ConstMapMat wmat(weight_.data.data(), cout, k);
    MapMat dw(weight_.grad.data(), cout, k);
    for (std::size_t s = 0; s < n; ++s) {
      im2col(in.data.data() + s * in_c_ * h * w, h, w, oh, ow, cols);
      const ConstMapMat g(grad_out.data.data() + s * cout * oh * ow, cout, oh * ow);
      dw.noalias() += g * cols.transpose();
      for (std::size_t c = 0; c < cout; ++c) bias_.grad[c] += g.row(c).sum();
      dcols.noalias() = wmat.transpose() * g;
      col2im(dcols, h, w, oh, ow, grad_in.data.data() + s * in_c_ * h * w);
    }
    return grad_in;
  }

  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }

 private:
  std::pair<std::size_t, std::size_t> out_hw(std::size_t h, std::size_t w) const {
    if (spec_.padding == Padding::Same) return {h, w};
    return {h - spec_.kernel_h + 1, w - spec_.kernel_w + 1};
  }

  void im2col(const double* x, std::size_t h, std::size_t w, std::size_t oh, std::size_t ow,
              RowMat& cols) const {
    const std::size_t kh = spec_.kernel_h, kw = spec_.kernel_w;
    for (std::size_t c = 0; c < in_c_; ++c) {
      for (std::size_t i = 0; i < kh; ++i) {
        for (std::size_t j = 0; j < kw; ++j) {
          double* dst = cols.data() + ((c * kh + i) * kw + j) * oh * ow;
          for (std::size_t y = 0; y < oh; ++y) {
            const long sy = long(y + i) - long(pad_t_);
            if (sy < 0 || sy >= long(h)) {
              std::fill(dst + y * ow, dst + (y + 1) * ow, 0.0);
              continue;
            }
            const double* src = x + (c * h + std::size_t(sy)) * w;
            for (std::size_t xx = 0; xx < ow; ++xx) {
              const long sx = long(xx + j) - long(pad_l_);
              dst[y * ow + xx] = (sx < 0 || sx >= long(w)) ? 0.0 : src[sx];
            }
          }
        }
      }
    }
  }

  void col2im(const RowMat& cols, std::size_t h, std::size_t w, std::size_t oh, std::size_t ow,
              double* dx) const {
    const std::size_t kh = spec_.kernel_h, kw = spec_.kernel_w;
    for (std::size_t c = 0; c < in_c_; ++c) {
      for (std::size_t i = 0; i < kh; ++i) {
        for (std::size_t j = 0; j < kw; ++j) {
          const double* src = cols.data() + ((c * kh + i) * kw + j) * oh * ow;
          for (std::size_t y = 0; y < oh; ++y) {
            const long sy = long(y + i) - long(pad_t_);
            if (sy < 0 || sy >= long(h)) continue;
            double* dst = dx + (c * h + std::size_t(sy)) * w;
            for (std::size_t xx = 0; xx < ow; ++xx) {
              const long sx = long(xx + j) - long(pad_l_);
              if (sx >= 0 && sx < long(w)) dst[sx] += src[y * ow + xx];
            }
          }
        }
      }
    }
  }

  Conv2D spec_;
  std::size_t in_c_;
  std::size_t pad_t_ = 0;
  std::size_t pad_l_ = 0;
  Tensor weight_;
  Tensor bias_;
};

class PoolLayer final : public Layer {
 public:
  struct State : LayerState {
    Shape in_shape;
    std::vector<std::size_t> argmax;
  };

  Tensor forward(const Tensor& in, Mode, std::uint64_t, std::unique_ptr<LayerState>* state) override {
    require_rank(in, 4, "MaxPool2");
    const std::size_t n = in.shape[0], c = in.shape[1], h = in.shape[2], w = in.shape[3];
    const std::size_t oh = h / 2, ow = w / 2;
    Tensor out({n, c, oh, ow});
    std::vector<std::size_t> arg(out.size());
    for (std::size_t p = 0; p < n * c; ++p) {
      const double* src = in.data.data() + p * h * w;
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          std::size_t best = (2 * y) * w + 2 * x;
          for (std::size_t off : {(2 * y) * w + 2 * x + 1, (2 * y + 1) * w + 2 * x,
                                  (2 * y + 1) * w + 2 * x + 1}) {
            if (src[off] > src[best]) best = off;
          }
          const std::size_t o = p * oh * ow + y * ow + x;
          out.data[o] = src[best];
          arg[o] = p * h * w + best;
        }
      }
    }
    if (state) {
      auto st = std::make_unique<State>();
      st->in_shape = in.shape;
      st->argmax = std::move(arg);
      *state = std::move(st);
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out, LayerState& state) override {
    auto& st = static_cast<State&>(state);
    Tensor grad_in(st.in_shape);
    for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in.data[st.argmax[o]] += grad_out.data[o];
    return grad_in;
  }
};

class BatchNormLayer final : public Layer {
 public:
  struct State : LayerState {
    Tensor xhat;
    std::vector<double> inv_std;
  };

  BatchNormLayer(const BatchNorm2D& spec, const Shape& in) : spec_(spec), c_(in[0]) {
    gamma_ = Tensor({c_}, 1.0);
    beta_ = Tensor({c_}, 0.0);
    running_mean_ = Tensor({c_}, 0.0);
    running_var_ = Tensor({c_}, 1.0);
    gamma_.zero_grad();
    beta_.zero_grad();
  }

  Tensor forward(const Tensor& in, Mode mode, std::uint64_t, std::unique_ptr<LayerState>* state) override {
    require_rank(in, 4, "BatchNorm2D");
    if (mode == Mode::Infer) return normalize(in, running_mean_.data, running_var_.data, nullptr);
    const auto [mean, var] = batch_stats(in);
    const double m = spec_.momentum;
    for (std::size_t c = 0; c < c_; ++c) {
      running_mean_.data[c] = m * running_mean_.data[c] + (1.0 - m) * mean[c];
      running_var_.data[c] = m * running_var_.data[c] + (1.0 - m) * var[c];
    }
    std::unique_ptr<State> st = state ? std::make_unique<State>() : nullptr;
    Tensor out = normalize(in, mean, var, st.get());
    if (state) *state = std::move(st);
    return out;
  }

  Tensor calibrate(const Tensor& in) {
    require_rank(in, 4, "BatchNorm2D");
    const auto [mean, var] = batch_stats(in);
    running_mean_.data = mean;
    running_var_.data = var;
    return normalize(in, mean, var, nullptr);
  }

  Tensor backward(const Tensor& grad_out, LayerState& state) override {
    auto& st = static_cast<State&>(state);
    const std::size_t n = grad_out.shape[0], hw = grad_out.shape[2] * grad_out.shape[3];
    const double count = double(n * hw);
    Tensor grad_in(grad_out.shape);
    for (std::size_t c = 0; c < c_; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t base = (s * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          sum_dy += grad_out.data[base + i];
          sum_dy_xhat += grad_out.data[base + i] * st.xhat.data[base + i];
        }
      }
      gamma_.grad[c] += sum_dy_xhat;
      beta_.grad[c] += sum_dy;
      const double k = gamma_.data[c] * st.inv_std[c] / count;
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t base = (s * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          grad_in.data[base + i] =
              k * (count * grad_out.data[base + i] - sum_dy - st.xhat.data[base + i] * sum_dy_xhat);
        }
      }
    }
    return grad_in;
  }

  std::vector<Tensor*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> buffers() override { return {&running_mean_, &running_var_}; }

 private:
  std::pair<std::vector<double>, std::vector<double>> batch_stats(const Tensor& in) const {
    const std::size_t n = in.shape[0], hw = in.shape[2] * in.shape[3];
    const double count = double(n * hw);
    std::vector<double> mean(c_, 0.0), var(c_, 0.0);
    for (std::size_t c = 0; c < c_; ++c) {
      for (std::size_t s = 0; s < n; ++s) {
        const double* p = in.data.data() + (s * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) mean[c] += p[i];
      }
      mean[c] /= count;
      for (std::size_t s = 0; s < n; ++s) {
        const double* p = in.data.data() + (s * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) var[c] += (p[i] - mean[c]) * (p[i] - mean[c]);
      }
      var[c] /= count;
    }
    return {mean, var};
  }

  Tensor normalize(const Tensor& in, const std::vector<double>& mean, const std::vector<double>& var,
                   State* st) const {
    if (in.shape[1] != c_) throw Error(ErrorKind::ShapeMismatch, "BatchNorm2D channel mismatch");
    const std::size_t n = in.shape[0], hw = in.shape[2] * in.shape[3];
    Tensor out(in.shape);
    if (st) {
      st->xhat = Tensor(in.shape);
      st->inv_std.resize(c_);
    }
    for (std::size_t c = 0; c < c_; ++c) {
      const double inv = 1.0 / std::sqrt(var[c] + spec_.eps);
      if (st) st->inv_std[c] = inv;
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t base = (s * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          const double xh = (in.data[base + i] - mean[c]) * inv;
          if (st) st->xhat.data[base + i] = xh;
          out.data[base + i] = gamma_.data[c] * xh + beta_.data[c];
        }
      }
    }
    return out;
  }

  BatchNorm2D spec_;
  std::size_t c_;
  Tensor gamma_, beta_, running_mean_, running_var_;
};

class ReluLayer final : public Layer {
 public:
  Tensor forward(const Tensor& in, Mode, std::uint64_t, std::unique_ptr<LayerState>* state) override {
    Tensor out(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0.0 ? in.data[i] : 0.0;
    if (state) {
      auto st = std::make_unique<InputState>();
      st->input = in;
      *state = std::move(st);
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out, LayerState& state) override {
    const Tensor& in = static_cast<InputState&>(state).input;
    Tensor grad_in(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) grad_in.data[i] = in.data[i] > 0.0 ? grad_out.data[i] : 0.0;
    return grad_in;
  }
};

class FlattenLayer final : public Layer {
 public:
  struct State : LayerState {
    Shape in_shape;
  };

  Tensor forward(const Tensor& in, Mode, std::uint64_t, std::unique_ptr<LayerState>* state) override {
    require_rank(in, 4, "Flatten");
    if (state) {
      auto st = std::make_unique<State>();
      st->in_shape = in.shape;
      *state = std::move(st);
    }
    return Tensor({in.shape[0], in.size() / in.shape[0]}, in.data);
  }

  Tensor backward(const Tensor& grad_out, LayerState& state) override {
    return Tensor(static_cast<State&>(state).in_shape, grad_out.data);
  }
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(const Dense& spec, const Shape& in, std::uint64_t seed) : in_(in[0]), out_(spec.out) {
    weight_ = Tensor({out_, in_});
    bias_ = Tensor({out_});
    std::mt19937_64 rng(seed);
    kaiming_uniform(weight_, in_, rng);
    weight_.zero_grad();
    bias_.zero_grad();
  }

  Tensor forward(const Tensor& in, Mode, std::uint64_t, std::unique_ptr<LayerState>* state) override {
    require_rank(in, 2, "Dense");
    if (in.shape[1] != in_) throw Error(ErrorKind::ShapeMismatch, "Dense input width mismatch");
    const std::size_t n = in.shape[0];
    Tensor out({n, out_});
    const ConstMapMat x(in.data.data(), n, in_);
    const ConstMapMat w(weight_.data.data(), out_, in_);
    MapMat y(out.data.data(), n, out_);
    y.noalias() = x * w.transpose();
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t o = 0; o < out_; ++o) y(s, o) += bias_.data[o];
    }
    if (state) {
      auto st = std::make_unique<InputState>();
      st->input = in;
      *state = std::move(st);
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out, LayerState& state) override {
    const Tensor& in = static_cast<InputState&>(state).input;
    const std::size_t n = in.shape[0];
    const ConstMapMat x(in.data.data(), n, in_);
    const ConstMapMat g(grad_out.data.data(), n, out_);
    const ConstMapMat w(weight_.data.data(), out_, in_);
    MapMat dw(weight_.grad.data(), out_, in_);
    dw.noalias() += g.transpose() * x;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t o = 0; o < out_; ++o) bias_.grad[o] += g(s, o);
    }
    Tensor grad_in({n, in_});
    MapMat dx(grad_in.data.data(), n, in_);
    dx.noalias() = g * w;
    return grad_in;
  }

  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }

 private:
  std::size_t in_, out_;
  Tensor weight_, bias_;
};

class DropoutLayer final : public Layer {
 public:
  struct State : LayerState {
    std::vector<double> mask;
  };

  DropoutLayer(const Dropout& spec, std::uint64_t stream) : rate_(spec.rate), stream_(stream) {}

  Tensor forward(const Tensor& in, Mode mode, std::uint64_t seed, std::unique_ptr<LayerState>* state) override {
    if (mode == Mode::Infer || rate_ == 0.0) {
      if (state) {
        auto st = std::make_unique<State>();
        st->mask.assign(in.size(), 1.0);
        *state = std::move(st);
      }
      return in;
    }
    std::mt19937_64 rng(detail::derive_seed(seed, stream_));
    const double keep_scale = 1.0 / (1.0 - rate_);
    std::vector<double> mask(in.size());
    for (double& m : mask) m = detail::uniform01(rng) >= rate_ ? keep_scale : 0.0;
    Tensor out(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] * mask[i];
    if (state) {
      auto st = std::make_unique<State>();
      st->mask = std::move(mask);
      *state = std::move(st);
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out, LayerState& state) override {
    const auto& mask = static_cast<State&>(state).mask;
    Tensor grad_in(grad_out.shape);
    for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in.data[i] = grad_out.data[i] * mask[i];
    return grad_in;
  }

 private:
  double rate_;
  std::uint64_t stream_;
};

class SoftmaxLayer final : public Layer {
 public:
  Tensor forward(const Tensor& in, Mode, std::uint64_t, std::unique_ptr<LayerState>*) override {
    require_rank(in, 2, "Softmax");
    const std::size_t n = in.shape[0], k = in.shape[1];
    Tensor out(in.shape);
    for (std::size_t s = 0; s < n; ++s) {
      const double* z = in.data.data() + s * k;
      double* p = out.data.data() + s * k;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < k; ++i) peak = std::max(peak, z[i]);
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += (p[i] = std::exp(z[i] - peak));
      for (std::size_t i = 0; i < k; ++i) p[i] /= sum;
    }
    return out;
  }

  // Folded into the cross-entropy gradient by Network::backward.
  Tensor backward(const Tensor& grad_out, LayerState&) override { return grad_out; }
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in_shape, std::uint64_t seed) {
  if (const auto* c = std::get_if<Conv2D>(&spec)) return std::make_unique<ConvLayer>(*c, in_shape, seed);
  if (std::holds_alternative<MaxPool2>(spec)) return std::make_unique<PoolLayer>();
  if (const auto* b = std::get_if<BatchNorm2D>(&spec)) return std::make_unique<BatchNormLayer>(*b, in_shape);
  if (std::holds_alternative<ReLU>(spec)) return std::make_unique<ReluLayer>();
  if (std::holds_alternative<Flatten>(spec)) return std::make_unique<FlattenLayer>();
  if (const auto* d = std::get_if<Dense>(&spec)) return std::make_unique<DenseLayer>(*d, in_shape, seed);
  if (const auto* d = std::get_if<Dropout>(&spec)) return std::make_unique<DropoutLayer>(*d, seed);
  return std::make_unique<SoftmaxLayer>();
}

Tensor* calibrate_if_batchnorm(Layer& layer, const Tensor& in, Tensor& out) {
  auto* bn = dynamic_cast<BatchNormLayer*>(&layer);
  if (!bn) return nullptr;
  out = bn->calibrate(in);
  return &out;
}

}  // namespace resp::nn
