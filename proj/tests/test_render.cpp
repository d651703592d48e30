#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "resp/error.hpp"
#include "resp/render.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace resp;

using namespace oracle;

namespace {

Matrix mat(std::size_t r, std::size_t c, std::vector<double> v) {
  Matrix m(r, c);
  m.data = std::move(v);
  return m;
}

Matrix full_path(const std::vector<double>& x, const FilterBank& bank, std::size_t size) {
  return resize_bilinear(to_db(scalogram_matrix(power(cwt(x, bank), bank))), size, size);
}

}  // namespace

TEST_CASE("decibel normalization") {
  Matrix m(1, 4);
  m.data = {1.0, 0.1, 0.0, 1e-12};
  const auto n = to_db(m);
  CHECK(n.data[0] == 1.0);
  CHECK(n.data[1] == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(n.data[2] == 0.0);
  CHECK(n.data[3] == 0.0);
  Matrix z(3, 3);
  for (double v : to_db(z).data) CHECK(v == 0.0);
}

TEST_CASE("colormap lookup") {
  ColormapTable gray;
  for (int i = 0; i < 256; ++i) gray.entries[i] = {std::uint8_t(i), std::uint8_t(i), std::uint8_t(i)};
  Matrix m(1, 3);
  m.data = {0.0, 0.5, 1.0};
  const auto img = apply_colormap(m, gray);
  CHECK(img.width == 3);
  CHECK(img.height == 1);
  CHECK(img.pixels == std::vector<std::uint8_t>{0, 0, 0, 128, 128, 128, 255, 255, 255});

  for (const auto c : kAllColormaps) {
    const auto& t = colormap_table(c);
    const auto ends = apply_colormap(mat(1, 2, {0.0, 1.0}), t);
    CHECK(Rgb{ends.pixels[0], ends.pixels[1], ends.pixels[2]} == t.entries[0]);
    CHECK(Rgb{ends.pixels[3], ends.pixels[4], ends.pixels[5]} == t.entries[255]);
  }
  const auto hot0 = colormap_table(Colormap::Hot).entries[0];
  CHECK(int(hot0.r) + int(hot0.g) + int(hot0.b) <= 10);
}

TEST_CASE("shipped assets match the compiled tables") {
  for (const auto c : kAllColormaps) {
    CAPTURE(colormap_name(c));
    const auto t = load_colormap(c, RESP_ASSET_DIR);
    CHECK(t.entries == colormap_table(c).entries);
    CHECK(parse_colormap(colormap_name(c)) == c);
  }
  CHECK_FALSE(parse_colormap("viridis").has_value());
}

TEST_CASE("colormap CSV validation") {
  CHECK_THROWS_AS(parse_colormap_csv("1,2,3\n"), Error);
  std::string rows;
  for (int i = 0; i < 256; ++i) rows += "1,2,300\n";
  CHECK_THROWS_AS(parse_colormap_csv(rows), Error);
}

TEST_CASE("bilinear resize") {
  Matrix same(224, 224);
  std::mt19937_64 rng(1);
  for (auto& v : same.data) v = double(rng() % 1000);
  CHECK(resize_bilinear(same, 224, 224).data == same.data);

  Matrix flat(5, 9);
  for (auto& v : flat.data) v = 0.3;
  for (double v : resize_bilinear(flat, 224, 224).data) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));

  const Matrix ramp = mat(2, 2, {0.0, 1.0, 0.0, 1.0});
  const auto r = resize_bilinear(ramp, 224, 224);
  for (std::size_t i = 0; i < 224; ++i) {
    for (std::size_t j = 0; j < 224; ++j) CHECK(std::abs(r(i, j) - double(j) / 223.0) <= 1e-6);
  }

  // Matches a direct, non-separable evaluation of the corner-aligned map.
  Matrix src(7, 11);
  for (auto& v : src.data) v = double(rng() % 100) / 7.0;
  const auto out = resize_bilinear(src, 5, 17);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 17; ++j) {
      const double y = double(i) * 6 / 4, x = double(j) * 10 / 16;
      const auto y0 = std::min<std::size_t>(std::size_t(y), 5), x0 = std::min<std::size_t>(std::size_t(x), 9);
      const double wy = y - double(y0), wx = x - double(x0);
      const double expect = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x0 + 1)) +
                            wy * ((1 - wx) * src(y0 + 1, x0) + wx * src(y0 + 1, x0 + 1));
      CHECK(out(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(resize_bilinear(Matrix(1, 5), 224, 224), Error);
}

TEST_CASE("streamed rendering equals the full pipeline") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (std::size_t n : {600u, 1000u}) {
    const FilterBank bank(n, 8000);
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    const auto fast = render_scalogram(x, bank, 224);
    const auto full = full_path(x, bank, 224);
    CHECK(fast.rows == 224);
    CHECK(fast.cols == 224);
    CHECK(fast.data == full.data);
  }
}

TEST_CASE("augmentation count law") {
  const std::map<Disease, std::pair<int, int>> table = {
      {Disease::Pneumonia, {41, 164}},      {Disease::Bronchiectasis, {55, 220}},
      {Disease::COPD, {1963, 1963}},        {Disease::Healthy, {42, 168}},
      {Disease::URTI, {21, 84}},            {Disease::Bronchiolitis, {65, 260}}};
  std::vector<SegmentKey> keys;
  int patient = 100;
  for (const auto& [d, counts] : table) {
    const auto k = keys_for(d, counts.first, patient);
    keys.insert(keys.end(), k.begin(), k.end());
    patient += 1000;
  }
  const auto plan = plan_augmentation(keys, 42);
  std::map<Disease, int> emitted;
  for (const auto& p : plan) ++emitted[p.key.disease];
  for (const auto& [d, counts] : table) CHECK(emitted[d] == counts.second);
  CHECK(plan.size() == 2859);

  const auto again = plan_augmentation(keys, 42);
  std::map<Colormap, int> draws;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    CHECK(plan[i].colormap == again[i].colormap);
    if (plan[i].key.disease == Disease::COPD) {
      CHECK(plan[i].variant == 0);
      ++draws[plan[i].colormap];
    }
  }
  // 1963 uniform draws over four maps: each near 491.
  for (const auto c : kAllColormaps) CHECK(std::abs(draws[c] - 491) < 80);
}

TEST_CASE("minority segments get one image per colormap") {
  Matrix norm(224, 224);
  for (std::size_t i = 0; i < norm.data.size(); ++i) norm.data[i] = double(i % 224) / 223.0;
  const SegmentKey key{130, "130_2b3_Pl_mc_AKGC417L", 4, Disease::URTI};
  const auto imgs = augment(norm, key, true, 1);
  REQUIRE(imgs.size() == 4);
  for (std::size_t v = 0; v < 4; ++v) {
    CHECK(imgs[v].provenance.variant == int(v));
    CHECK(imgs[v].provenance.colormap == kAllColormaps[v]);
    CHECK(imgs[v].rgb.width == 224);
    CHECK(imgs[v].rgb.pixels.size() == 224 * 224 * 3);
  }
  CHECK(imgs[2].provenance.filename() == "130_2b3-Pl-mc-AKGC417L_004_2_jet.png");
  const auto one = augment(norm, key, false, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].provenance.colormap == draw_colormap(1, key.id()));
  CHECK_THROWS_AS(augment(Matrix(10, 10), key, true, 1), Error);
}

TEST_CASE("PNG round trip") {
  testutil::TempDir dir;
  RgbImage img{13, 7, {}};
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < 13 * 7 * 3; ++i) img.pixels.push_back(std::uint8_t(rng()));
  write_png(dir / "a.png", img);
  const auto back = read_png(dir / "a.png");
  CHECK(back.width == 13);
  CHECK(back.height == 7);
  CHECK(back.pixels == img.pixels);
  write_png(dir / "b.png", img);
  CHECK(testutil::read_bytes(dir / "a.png") == testutil::read_bytes(dir / "b.png"));
  CHECK_THROWS_AS(read_png(dir / "missing.png"), Error);
}
