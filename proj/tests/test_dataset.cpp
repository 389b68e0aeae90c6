#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "octo/dataset.hpp"
#include "octo/metrics.hpp"
#include "octo/synthetic.hpp"
#include "test_helpers.hpp"

using namespace octo;
using namespace octo::testing;

namespace fs = std::filesystem;

TEST_CASE("PNG round-trip is 8-bit exact") {
  Rng rng(3);
  FaceImage img;
  for (double& v : img.pixels) v = rng.next_double();

  const std::string path = "png_roundtrip_test.png";
  write_png(img, path);
  const FaceImage back = read_png(path);
  fs::remove(path);

  REQUIRE(back.pixels.size() == img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    // quantized to 1/255 on write
    CHECK(std::fabs(back.pixels[i] - img.pixels[i]) <= 0.5 / 255.0 + 1e-12);
  }

  // a second round-trip is bit-exact
  write_png(back, path);
  const FaceImage again = read_png(path);
  fs::remove(path);
  CHECK(again.pixels == back.pixels);

  CHECK_THROWS_AS(read_png("missing_image_test.png"), IoError);
}

TEST_CASE("synthetic faces") {
  SUBCASE("deterministic render") {
    CHECK(synth_face(1, 0, 0).pixels == synth_face(1, 0, 0).pixels);
  }

  SUBCASE("identities differ more than variants") {
    const FaceImage a0 = synth_face(1, 0, 0);
    const FaceImage a1 = synth_face(1, 0, 1);
    const FaceImage b0 = synth_face(1, 1, 0);
    const double within = euclidean_distance(a0.pixels, a1.pixels);
    const double between = euclidean_distance(a0.pixels, b0.pixels);
    CHECK(within > 0.0);
    CHECK(between > within);
  }

  SUBCASE("pixels in range") {
    const FaceImage img = synth_face(7, 3, 2);
    for (double v : img.pixels) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  SUBCASE("pool and provider agree") {
    const SyntheticDatasetConfig config{
        .n_identities = 3, .images_per_identity = 2, .seed = 9};
    const IdentityPool pool = synthetic_pool(config);
    REQUIRE(pool.identities.size() == 3);
    CHECK(pool.total_images() == 6);
    const ImageProvider provider = synthetic_provider(config.seed);
    for (int i = 0; i < 3; ++i) {
      CHECK(pool.identities[i].id == i);
      for (int v = 0; v < 2; ++v) {
        const FaceImage img = provider(pool.identities[i].images[v]);
        CHECK(img.pixels == synth_face(config.seed, i, v).pixels);
      }
    }
    CHECK_THROWS_AS(provider("nonsense-ref"), ProtocolError);
  }
}

TEST_CASE("dataset scan, manifest, and file provider") {
  const SyntheticDatasetConfig config{
      .n_identities = 3, .images_per_identity = 2, .seed = 11};
  const std::string root = "synthetic_dataset_test_dir";
  write_synthetic_dataset(config, root);

  SUBCASE("scan_dataset sees every image with stable ids") {
    const IdentityPool pool = scan_dataset(root);
    REQUIRE(pool.identities.size() == 3);
    CHECK(pool.total_images() == 6);
    for (std::size_t i = 0; i < pool.identities.size(); ++i) {
      CHECK(pool.identities[i].id == static_cast<IdentityId>(i));
      CHECK(pool.identities[i].images.size() == 2);
      if (i > 0) {
        CHECK(pool.identities[i - 1].name < pool.identities[i].name);
      }
    }

    // provider resolves scan refs; content matches the renderer up to
    // PNG quantization
    const FileImageProvider provider(root);
    const FaceImage img = provider(pool.identities[0].images[0]);
    const FaceImage direct = synth_face(config.seed, 0, 0);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      CHECK(std::fabs(img.pixels[i] - direct.pixels[i]) <= 0.5 / 255.0 + 1e-12);
    }
  }

  SUBCASE("manifest round-trip") {
    const IdentityPool pool = scan_dataset(root);
    const std::string path = "manifest_roundtrip_test.tsv";
    write_manifest(pool, path);
    const IdentityPool back = read_manifest(path);
    fs::remove(path);
    REQUIRE(back.identities.size() == pool.identities.size());
    for (std::size_t i = 0; i < pool.identities.size(); ++i) {
      CHECK(back.identities[i].name == pool.identities[i].name);
      CHECK(back.identities[i].images == pool.identities[i].images);
    }
  }

  SUBCASE("scan of a missing root fails") {
    CHECK_THROWS_AS(scan_dataset("no_such_dataset_root"), IoError);
  }

  fs::remove_all(root);
}
