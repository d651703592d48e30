#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "nn/layers.hpp"
#include "resp/error.hpp"
#include "resp/nn/adam.hpp"
#include "resp/nn/model.hpp"
#include "resp/nn/network.hpp"
#include "resp/nn/train.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace resp;
using namespace resp::nn;

using namespace oracle;

TEST_CASE("layer gradients match finite differences") {
  for (const auto& [name, err] : layer_gradient_errors()) {
    CAPTURE(name);
    CHECK(err <= 1e-3);
  }
}

TEST_CASE("composed network gradient check") {
  const auto r = composed_gradient_check(26);
  CHECK(r.kink_margin > 1e-4);
  CHECK(r.worst <= 1e-3);
}

TEST_CASE("dense + softmax gradient is closed form") {
  for (std::uint64_t seed : {3, 4, 5}) CHECK(dense_softmax_error(seed) <= 1e-10);
}

TEST_CASE("saturated predictions have vanishing gradients") {
  const auto spec = spec_of({Flatten{}, Dense{3}, Softmax{}}, 3, 1, 1, 3);
  Network net(spec, 1);
  Tensor x({3, 3, 1, 1});
  for (std::size_t i = 0; i < 3; ++i) x.data[i * 3 + i] = 1.0;
  double previous = 1e300;
  for (double scale : {1.0, 5.0, 10.0, 20.0}) {
    auto params = net.params();
    for (std::size_t o = 0; o < 3; ++o) {
      for (std::size_t i = 0; i < 3; ++i) params[0]->data[o * 3 + i] = o == i ? scale : 0.0;
    }
    std::fill(params[1]->data.begin(), params[1]->data.end(), 0.0);
    ce_loss(net, x, one_hot({0, 1, 2}, 3));
    double norm = 0;
    for (double g : params[0]->grad) norm += g * g;
    CHECK(norm < previous);
    previous = norm;
  }
  CHECK(previous < 1e-14);
}

TEST_CASE("forward examples") {
  SUBCASE("1x1 identity convolution") {
    auto layer = make_layer(Conv2D{1, 1, 1, Padding::Same}, {1, 3, 3}, 0);
    layer->params()[0]->data = {1.0};
    layer->params()[1]->data = {0.0};
    Tensor x({1, 1, 3, 3}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(layer->forward(x, Mode::Infer, 0, nullptr).data == x.data);
  }
  SUBCASE("max pooling") {
    auto layer = make_layer(MaxPool2{}, {1, 2, 2}, 0);
    const Tensor out = layer->forward(Tensor({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4}), Mode::Infer, 0, nullptr);
    CHECK(out.shape == Shape{1, 1, 1, 1});
    CHECK(out.data[0] == 4.0);
  }
  SUBCASE("softmax rows sum to one") {
    const auto spec = spec_of({Conv2D{3, 3, 4, Padding::Same}, ReLU{}, MaxPool2{}, Flatten{}, Dense{5},
                               Dropout{0.3}, Dense{6}, Softmax{}},
                              3, 8, 8, 6);
    Network net(spec, 9);
    std::mt19937_64 rng(9);
    for (const Mode m : {Mode::Train, Mode::Infer}) {
      const Tensor p = net.forward(random_tensor({5, 3, 8, 8}, rng), m, 1);
      for (std::size_t n = 0; n < 5; ++n) {
        double s = 0;
        for (std::size_t k = 0; k < 6; ++k) s += p.data[n * 6 + k];
        CHECK(std::abs(s - 1.0) <= 1e-9);
      }
    }
    CHECK_THROWS_AS(net.forward(Tensor({1, 3, 7, 8}), Mode::Infer), Error);
  }
  SUBCASE("backward without a cache") {
    Network net(spec_of({Flatten{}, Dense{3}, Softmax{}}, 1, 1, 2, 3), 0);
    ForwardCache empty;
    try {
      net.backward(empty, Tensor({1, 3}));
      FAIL("expected MissingCache");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingCache);
    }
  }
}

TEST_CASE("batch norm train and infer agree after calibration") {
  const auto spec = spec_of({Conv2D{3, 3, 4, Padding::Same}, BatchNorm2D{}, ReLU{}, Flatten{}, Dense{3}, Softmax{}},
                            2, 5, 5, 3);
  Network net(spec, 4);
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({8, 2, 5, 5}, rng);
  net.calibrate_batchnorm(x);
  const Tensor train = net.forward(x, Mode::Train, 0);
  const Tensor infer = net.forward(x, Mode::Infer, 0);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(std::abs(train.data[i] - infer.data[i]) <= 1e-6);
}

TEST_CASE("inverted dropout preserves the expectation") {
  auto layer = make_layer(Dropout{0.5}, {20}, 3);
  std::mt19937_64 rng(1);
  Tensor x = random_tensor({1, 20}, rng);
  for (auto& v : x.data) v = 1.0 + std::abs(v);
  std::vector<double> mean(20, 0.0);
  const int trials = 100000;
  for (int s = 0; s < trials; ++s) {
    const Tensor y = layer->forward(x, Mode::Train, std::uint64_t(s), nullptr);
    for (std::size_t i = 0; i < 20; ++i) mean[i] += y.data[i] / trials;
  }
  const Tensor infer = layer->forward(x, Mode::Infer, 0, nullptr);
  for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(mean[i] - infer.data[i]) <= 0.02 * infer.data[i]);
}

TEST_CASE("parameter counts") {
  CHECK(count_params(spec_of({Flatten{}, Dense{5}, Softmax{}}, 10, 1, 1, 5)) == 55);
  CHECK(count_madd(spec_of({Flatten{}, Dense{5}, Softmax{}}, 10, 1, 1, 5)) == 50);

  const auto full = build_proposed(6);
  const auto infos = infer_layers(full);
  std::size_t conv_params = 0;
  std::vector<std::size_t> per_conv;
  for (std::size_t i = 0; i < full.layers.size(); ++i) {
    if (std::holds_alternative<Conv2D>(full.layers[i])) {
      conv_params += infos[i].params;
      per_conv.push_back(infos[i].params);
    }
    if (std::holds_alternative<Flatten>(full.layers[i])) CHECK(infos[i].output == Shape{18816});
  }
  // (k*k*C_in + 1) * C_out per convolution.
  CHECK(per_conv == std::vector<std::size_t>{(5 * 5 * 3 + 1) * 64, (3 * 3 * 64 + 1) * 64,
                                             (3 * 3 * 64 + 1) * 96, (3 * 3 * 96 + 1) * 96});
  CHECK(conv_params == 180224);
  const double total = double(count_params(full));
  CHECK(std::abs(total - 3767400.0) / 3767400.0 <= 0.01);
  CHECK(std::get<Dense>(full.layers[full.layers.size() - 2]).out == 6);
  CHECK(std::get<Dense>(build_proposed(3).layers[full.layers.size() - 2]).out == 3);
  CHECK_THROWS_AS(build_proposed(4), Error);
}

TEST_CASE("count_params equals enumerated tensor sizes") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 25; ++t) {
    std::vector<LayerSpec> layers;
    const std::size_t convs = 1 + rng() % 3;
    for (std::size_t c = 0; c < convs; ++c) {
      layers.push_back(Conv2D{1 + rng() % 3, 1 + rng() % 3, 1 + rng() % 5,
                              rng() % 2 ? Padding::Same : Padding::Valid});
      if (rng() % 2) layers.push_back(BatchNorm2D{});
      layers.push_back(ReLU{});
    }
    if (rng() % 2) layers.push_back(MaxPool2{});
    layers.push_back(Flatten{});
    for (std::size_t d = 0, n = rng() % 3; d < n; ++d) {
      layers.push_back(Dense{1 + rng() % 9});
      layers.push_back(Dropout{0.2});
    }
    layers.push_back(Dense{3});
    layers.push_back(Softmax{});
    const auto spec = spec_of(layers, 1 + rng() % 3, 8 + rng() % 5, 8 + rng() % 5, 3);
    const Network net(spec, 1);
    std::size_t enumerated = 0;
    for (const Tensor* p : net.params()) enumerated += p->size();
    CHECK(count_params(spec) == enumerated);
    CHECK(net.param_count() == enumerated);
  }
}

TEST_CASE("MAdd hand counts") {
  for (const auto& [spec, expected] : madd_hand_cases()) CHECK(count_madd(spec) == expected);
}

TEST_CASE("checkpoint round trip is bit-identical") {
  const auto spec = spec_of({Conv2D{3, 3, 3, Padding::Same}, BatchNorm2D{}, ReLU{}, MaxPool2{}, Flatten{}, Dense{4},
                             Dropout{0.5}, Dense{3}, Softmax{}},
                            2, 6, 6, 3);
  Network net(spec, 12);
  std::mt19937_64 rng(12);
  const Tensor x = random_tensor({4, 2, 6, 6}, rng);
  net.calibrate_batchnorm(x);
  testutil::TempDir dir;
  save_checkpoint(dir / "m.ckpt", net);
  Network back = load_checkpoint(dir / "m.ckpt");
  save_checkpoint(dir / "n.ckpt", back);
  CHECK(back.forward(x, Mode::Infer).data == net.forward(x, Mode::Infer).data);
  CHECK(back.forward(x, Mode::Train, 3).data == net.forward(x, Mode::Train, 3).data);
  CHECK(testutil::read_bytes(dir / "m.ckpt") == testutil::read_bytes(dir / "n.ckpt"));
  CHECK(testutil::read_bytes(dir / "m.ckpt").substr(0, 8) == "RESPCKPT");

  testutil::write_file(dir / "bad.ckpt", "NOTACKPT........");
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), Error);
}

TEST_CASE("adam") {
  Tensor p(Shape{3}, std::vector<double>{1.0, -2.0, 0.5});
  p.grad = {0.0, 0.0, 0.0};
  AdamState state;
  const AdamConfig cfg{1e-3, 0.9, 0.999, 1e-8};
  Tensor* list[] = {&p};
  adam_step(list, state, cfg);
  CHECK(p.data == std::vector<double>{1.0, -2.0, 0.5});

  // Reference trace of two steps.
  Tensor q(Shape{2}, std::vector<double>{0.3, -0.7});
  AdamState s2;
  Tensor* ql[] = {&q};
  const std::vector<std::vector<double>> grads = {{0.5, -2.0}, {0.1, 0.4}};
  std::vector<double> theta = {0.3, -0.7}, m(2, 0.0), v(2, 0.0);
  for (std::size_t t = 1; t <= 2; ++t) {
    q.grad = grads[t - 1];
    adam_step(ql, s2, cfg);
    for (std::size_t i = 0; i < 2; ++i) {
      const double g = grads[t - 1][i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, double(t)));
      const double vh = v[i] / (1 - std::pow(0.999, double(t)));
      theta[i] -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
    }
    for (std::size_t i = 0; i < 2; ++i) CHECK(q.data[i] == doctest::Approx(theta[i]).epsilon(1e-14));
  }


  Tensor r(Shape{4});
  r.zero_grad();
  Tensor* rl[] = {&r};
  CHECK_THROWS_AS(adam_step(rl, s2, cfg), Error);
}

namespace {

// Three classes, each a bright bar in a different image row band.
ImageSet bar_images(std::size_t per_class, std::size_t size, std::uint64_t seed, std::size_t classes = 3) {
  std::mt19937_64 rng(seed);
  ImageSet set;
  set.channels = 3;
  set.height = set.width = size;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<std::uint8_t> img(set.sample_size());
      for (auto& v : img) v = std::uint8_t(rng() % 60);
      const std::size_t band = size * c / classes;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t r = band; r < band + size / classes; ++r) {
          for (std::size_t q = 0; q < size; ++q) img[ch * size * size + r * size + q] = std::uint8_t(180 + rng() % 70);
        }
      }
      set.pixels.insert(set.pixels.end(), img.begin(), img.end());
      set.labels.push_back(int(c));
    }
  }
  return set;
}

ModelSpec small_proposed(std::size_t classes) {
  ProposedOptions o;
  o.classes = classes;
  o.input_size = 16;
  o.conv_filters = {4, 4, 6, 6};
  o.fc_widths = {24, 16, 16, 12, 8};
  o.dropout = 0.2;
  return build_proposed(o);
}

}  // namespace

TEST_CASE("training") {
  const auto train_set = bar_images(12, 16, 1);
  const auto val_set = bar_images(6, 16, 2);
  TrainConfig cfg;
  cfg.adam.lr = 3e-3;
  cfg.epochs = 30;
  cfg.seed = 4;
  cfg.stop_at_accuracy = 0.95;

  SUBCASE("zero epochs leaves the initial weights") {
    Network net(small_proposed(3), 4);
    const auto before = net.params()[0]->data;
    TrainConfig none = cfg;
    none.epochs = 0;
    const auto r = train(net, train_set, val_set, none);
    CHECK(r.log.empty());
    CHECK(net.params()[0]->data == before);
  }
  SUBCASE("separable fixture is learned and runs are reproducible") {
    Network a(small_proposed(3), 4), b(small_proposed(3), 4);
    const auto ra = train(a, train_set, val_set, cfg);
    const auto rb = train(b, train_set, val_set, cfg);
    REQUIRE_FALSE(ra.log.empty());
    CHECK(ra.log.back().val_accuracy >= 0.95);
    CHECK(ra.log.size() <= 30);
    CHECK(ra.log.size() == rb.log.size());
    for (std::size_t t = 0; t < a.params().size(); ++t) CHECK(a.params()[t]->data == b.params()[t]->data);
    const auto rep = evaluate(a, val_set, 0);
    std::size_t total = 0;
    for (std::size_t v : rep.cm.counts) total += v;
    CHECK(total == val_set.size());
  }
  SUBCASE("initial loss is near ln 6 for six classes") {
    const auto six = bar_images(4, 16, 3, 6);
    Network net(small_proposed(6), 8);
    TrainConfig one = cfg;
    one.epochs = 1;
    one.stop_at_accuracy = 0;
    const auto r = train(net, six, six, one);
    CHECK(std::abs(r.initial_loss - std::log(6.0)) <= 0.1);
  }
}

TEST_CASE("evaluation on fixed predictors") {
  ImageSet set;
  set.channels = 3;
  set.height = set.width = 1;
  set.pixels = {255, 0, 0, 0, 255, 0, 0, 0, 255};
  set.labels = {0, 1, 2};
  Network net(spec_of({Flatten{}, Dense{3}, Softmax{}}, 3, 1, 1, 3), 0);
  auto params = net.params();
  for (std::size_t o = 0; o < 3; ++o) {
    for (std::size_t i = 0; i < 3; ++i) params[0]->data[o * 3 + i] = o == i ? 10.0 : 0.0;
  }
  std::fill(params[1]->data.begin(), params[1]->data.end(), 0.0);
  CHECK(evaluate(net, set, 0).accuracy == 1.0);

  std::fill(params[0]->data.begin(), params[0]->data.end(), 0.0);
  params[1]->data = {5.0, 0.0, 0.0};
  const auto rep = evaluate(net, set, 0);
  CHECK(rep.accuracy == doctest::Approx(1.0 / 3.0));
  CHECK(rep.cm.at(1, 0) == 1);
  CHECK(rep.cm.at(2, 0) == 1);
}
