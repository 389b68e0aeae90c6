#include "octo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "octo/dataset.hpp"

namespace octo {

namespace {

constexpr std::uint64_t kIdentityStream = 0x1dULL;
constexpr std::uint64_t kVariantStream = 0x7aULL;

struct IdentityParams {
  double bg[3];
  double face[3];
  double cx, cy, rx, ry;
  double stripe_freq, stripe_angle, stripe_phase, stripe_amp;
  struct Mark {
    double x, y, size;
    double color[3];
  } marks[3];
  double eye_dx, eye_y, eye_r;
};

IdentityParams identity_params(std::uint64_t dataset_seed, int identity) {
  Rng rng = Rng::split(splitmix64(dataset_seed) ^ kIdentityStream,
                       static_cast<std::uint64_t>(identity));
  IdentityParams p{};
  for (double& v : p.bg) v = rng.uniform(0.05, 0.95);
  for (double& v : p.face) v = rng.uniform(0.15, 0.95);
  p.cx = 56.0 + rng.uniform(-6.0, 6.0);
  p.cy = 56.0 + rng.uniform(-6.0, 6.0);
  p.rx = rng.uniform(28.0, 44.0);
  p.ry = rng.uniform(32.0, 48.0);
  p.stripe_freq = rng.uniform(0.25, 0.45);  // cycles per pixel: high frequency
  p.stripe_angle = rng.uniform(0.0, 3.14159265358979);
  p.stripe_phase = rng.uniform(0.0, 6.28318530717959);
  p.stripe_amp = rng.uniform(0.10, 0.22);
  for (auto& mark : p.marks) {
    mark.x = p.cx + rng.uniform(-0.6, 0.6) * p.rx;
    mark.y = p.cy + rng.uniform(-0.6, 0.6) * p.ry;
    mark.size = rng.uniform(3.0, 6.0);
    for (double& v : mark.color) v = rng.uniform(0.0, 1.0);
  }
  p.eye_dx = rng.uniform(10.0, 18.0);
  p.eye_y = p.cy - rng.uniform(6.0, 14.0);
  p.eye_r = rng.uniform(2.5, 4.5);
  return p;
}

}  // namespace

FaceImage synth_face(std::uint64_t dataset_seed, int identity, int variant) {
  const IdentityParams p = identity_params(dataset_seed, identity);
  Rng rng = Rng::split(splitmix64(dataset_seed) ^ kVariantStream,
                       static_cast<std::uint64_t>(identity) * 4096 +
                           static_cast<std::uint64_t>(variant));
  const double dx = rng.uniform(-4.0, 4.0);
  const double dy = rng.uniform(-4.0, 4.0);
  const double brightness = rng.uniform(0.92, 1.08);
  const double noise_amp = 0.02;

  const double ca = std::cos(p.stripe_angle);
  const double sa = std::sin(p.stripe_angle);

  FaceImage img;
  for (int y = 0; y < FaceImage::kSize; ++y) {
    for (int x = 0; x < FaceImage::kSize; ++x) {
      // Pose jitter: sample the identity pattern at a shifted location.
      const double sx = x - dx;
      const double sy = y - dy;
      const double ex = (sx - p.cx) / p.rx;
      const double ey = (sy - p.cy) / p.ry;
      const bool inside = ex * ex + ey * ey <= 1.0;

      double rgb[3];
      if (inside) {
        const double stripe =
            p.stripe_amp *
            std::sin(6.28318530717959 * p.stripe_freq * (ca * sx + sa * sy) +
                     p.stripe_phase);
        for (int c = 0; c < 3; ++c) rgb[c] = p.face[c] + stripe;
        for (const auto& mark : p.marks) {
          if (std::fabs(sx - mark.x) <= mark.size &&
              std::fabs(sy - mark.y) <= mark.size) {
            for (int c = 0; c < 3; ++c) rgb[c] = mark.color[c];
          }
        }
        for (int side = -1; side <= 1; side += 2) {
          const double exd = sx - (p.cx + side * p.eye_dx);
          const double eyd = sy - p.eye_y;
          if (exd * exd + eyd * eyd <= p.eye_r * p.eye_r) {
            for (int c = 0; c < 3; ++c) rgb[c] = 0.05;
          }
        }
      } else {
        for (int c = 0; c < 3; ++c) rgb[c] = p.bg[c];
      }

      for (int c = 0; c < 3; ++c) {
        const double noisy =
            rgb[c] * brightness + rng.uniform(-noise_amp, noise_amp);
        img.at(y, x, c) = std::clamp(noisy, 0.0, 1.0);
      }
    }
  }
  return img;
}

namespace {

std::string synth_ref(int identity, int variant) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "id%04d/v%03d.png", identity, variant);
  return buf;
}

// Parses "id<NNNN>/v<MMM>.png".
bool parse_synth_ref(const std::string& ref, int& identity, int& variant) {
  return std::sscanf(ref.c_str(), "id%d/v%d.png", &identity, &variant) == 2;
}

}  // namespace

IdentityPool synthetic_pool(const SyntheticDatasetConfig& config) {
  IdentityPool pool;
  for (int i = 0; i < config.n_identities; ++i) {
    IdentityPool::Identity identity;
    identity.id = i;
    char name[16];
    std::snprintf(name, sizeof(name), "id%04d", i);
    identity.name = name;
    for (int v = 0; v < config.images_per_identity; ++v) {
      identity.images.push_back(synth_ref(i, v));
    }
    pool.identities.push_back(std::move(identity));
  }
  return pool;
}

ImageProvider synthetic_provider(std::uint64_t dataset_seed) {
  return [dataset_seed](const std::string& ref) {
    int identity = 0, variant = 0;
    if (!parse_synth_ref(ref, identity, variant)) {
      throw ProtocolError("not a synthetic image reference: " + ref);
    }
    return synth_face(dataset_seed, identity, variant);
  };
}

void write_synthetic_dataset(const SyntheticDatasetConfig& config,
                             const std::string& root) {
  namespace fs = std::filesystem;
  const IdentityPool pool = synthetic_pool(config);
  const ImageProvider provider = synthetic_provider(config.seed);
  for (const auto& identity : pool.identities) {
    fs::create_directories(fs::path(root) / identity.name);
    for (const auto& ref : identity.images) {
      write_png(provider(ref), (fs::path(root) / ref).string());
    }
  }
}

}  // namespace octo
