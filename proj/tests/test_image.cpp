#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "octo/image.hpp"
#include "test_helpers.hpp"

using namespace octo;
using namespace octo::testing;

namespace {

FaceImage constant_image(double value) {
  FaceImage img;
  for (double& v : img.pixels) v = value;
  return img;
}

FaceImage checkerboard(int period) {
  FaceImage img;
  for (int y = 0; y < FaceImage::kSize; ++y) {
    for (int x = 0; x < FaceImage::kSize; ++x) {
      const double v = ((x / period + y / period) % 2 == 0) ? 0.0 : 1.0;
      for (int c = 0; c < FaceImage::kChannels; ++c) img.at(y, x, c) = v;
    }
  }
  return img;
}

double mean_pixel(const FaceImage& img) {
  double sum = 0.0;
  for (double v : img.pixels) sum += v;
  return sum / static_cast<double>(img.pixels.size());
}

}  // namespace

TEST_CASE("degrade_image basics") {
  SUBCASE("constant images are preserved at every resolution") {
    const FaceImage img = constant_image(0.37);
    for (int r : {2, 7, 14, 28, 56, 112}) {
      const FaceImage out = degrade_image(img, r);
      CHECK(out.resolution_tag == r);
      for (double v : out.pixels) CHECK(std::fabs(v - 0.37) < 1e-9);
    }
  }

  SUBCASE("r = 112 is an exact no-op") {
    Rng rng(11);
    FaceImage img;
    for (double& v : img.pixels) v = rng.next_double();
    const FaceImage out = degrade_image(img, 112);
    CHECK(out.pixels == img.pixels);
  }

  SUBCASE("output stays in range and keeps shape") {
    Rng rng(12);
    FaceImage img;
    for (double& v : img.pixels) v = rng.next_double();
    const FaceImage out = degrade_image(img, 7);
    CHECK(out.pixels.size() == img.pixels.size());
    for (double v : out.pixels) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  SUBCASE("resolution bounds") {
    const FaceImage img = constant_image(0.5);
    CHECK_THROWS_AS(degrade_image(img, 1), DomainError);
    CHECK_THROWS_AS(degrade_image(img, 0), DomainError);
    CHECK_THROWS_AS(degrade_image(img, 113), DomainError);
    CHECK_NOTHROW(degrade_image(img, 2));
  }

  SUBCASE("deterministic") {
    Rng rng(13);
    FaceImage img;
    for (double& v : img.pixels) v = rng.next_double();
    CHECK(degrade_image(img, 14).pixels == degrade_image(img, 14).pixels);
  }
}

TEST_CASE("degradation removes high-frequency energy monotonically") {
  // A fine checkerboard has most of its energy above the Nyquist limit of the
  // low resolutions; the Laplacian energy must fall sharply and roughly as the
  // resolution does.
  const FaceImage img = checkerboard(2);
  const double base = mean_abs_laplacian(img);
  const double e28 = mean_abs_laplacian(degrade_image(img, 28));
  const double e14 = mean_abs_laplacian(degrade_image(img, 14));
  const double e7 = mean_abs_laplacian(degrade_image(img, 7));
  CHECK(e28 < 0.35 * base);
  CHECK(e14 < e28);
  CHECK(e7 < e14);

  // The mean intensity survives because the resampling weights are
  // normalized.
  CHECK(std::fabs(mean_pixel(degrade_image(img, 7)) - mean_pixel(img)) < 0.05);
}

TEST_CASE("bicubic_resize agrees with direct kernel evaluation on 1-D rows") {
  // Upscale of a single row with no anti-aliasing: reproduce Catmull-Rom
  // (a = -0.5) by hand at each target site.
  const int src_w = 8, dst_w = 20;
  std::vector<double> src{0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6};
  const std::vector<double> out =
      bicubic_resize(src, src_w, 1, dst_w, 1, 1);

  auto kernel = [](double x) {
    x = std::fabs(x);
    const double a = -0.5;
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
  };
  const double scale = static_cast<double>(src_w) / dst_w;
  for (int i = 0; i < dst_w; ++i) {
    const double center = (i + 0.5) * scale - 0.5;
    // taps outside the source are dropped and the rest renormalized
    const int lo = std::max(static_cast<int>(std::floor(center - 1.5)), 0);
    const int hi =
        std::min(static_cast<int>(std::floor(center + 2.5)), src_w - 1);
    double num = 0.0, den = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double w = kernel(center - j);
      num += w * src[j];
      den += w;
    }
    CHECK(rel_err(out[i], num / den) < 1e-12);
  }
}

TEST_CASE("resolution sampler") {
  ResolutionSampler sampler;
  sampler.seed = 99;

  SUBCASE("only configured choices, deterministic per index") {
    for (std::uint64_t i = 0; i < 200; ++i) {
      const int r = sampler.draw(i);
      CHECK((r == 7 || r == 14 || r == 28));
      CHECK(sampler.draw(i) == r);
    }
  }

  SUBCASE("frequencies are uniform within 3 points") {
    const int n = 30000;
    int c7 = 0, c14 = 0, c28 = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      switch (sampler.draw(i)) {
        case 7: ++c7; break;
        case 14: ++c14; break;
        case 28: ++c28; break;
      }
    }
    for (int count : {c7, c14, c28}) {
      CHECK(std::fabs(count / static_cast<double>(n) - 1.0 / 3.0) < 0.03);
    }
  }

  SUBCASE("seed changes the draw sequence") {
    ResolutionSampler other;
    other.seed = 100;
    int differs = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      if (sampler.draw(i) != other.draw(i)) ++differs;
    }
    CHECK(differs > 30);
  }
}

TEST_CASE("degrade_batch applies per-index draws") {
  ResolutionSampler sampler;
  sampler.seed = 7;
  std::vector<FaceImage> images(12, constant_image(0.5));
  const std::vector<FaceImage> out = degrade_batch(images, sampler);
  REQUIRE(out.size() == images.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].resolution_tag ==
          sampler.draw(static_cast<std::uint64_t>(i)));
  }
}
