#pragma once

#include <cstddef>
#include <vector>

#include "octo/errors.hpp"
#include "octo/rng.hpp"

namespace octo {

// 112x112x3 face crop, channels interleaved (RGB), intensities in [0,1].
// resolution_tag records the effective source resolution r after
// degrade-restore (112 for untouched images).
struct FaceImage {
  static constexpr int kSize = 112;
  static constexpr int kChannels = 3;

  std::vector<double> pixels;  // kSize * kSize * kChannels, row-major
  int resolution_tag = kSize;

  FaceImage() : pixels(kSize * kSize * kChannels, 0.0) {}

  double& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * kSize + x) * kChannels + c];
  }
  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * kSize + x) * kChannels + c];
  }
};

// Separable bicubic (Catmull-Rom) resample of an interleaved image. On
// downscale the kernel support is widened by the scale factor, which is the
// standard anti-aliased area weighting.
std::vector<double> bicubic_resize(const std::vector<double>& src, int src_w,
                                   int src_h, int dst_w, int dst_h,
                                   int channels);

// Draws resolutions uniformly from a fixed choice set, one independent
// deterministic stream per image index so parallel and serial runs agree.
struct ResolutionSampler {
  std::vector<int> choices{7, 14, 28};
  std::uint64_t seed = 0;

  int draw(std::uint64_t image_index) const;
};

// Bicubic down-sample to r x r with anti-aliasing, bicubic up-sample back to
// 112 x 112, clamp to [0,1]. r = 112 is an exact no-op copy.
FaceImage degrade_image(const FaceImage& img, int r);

std::vector<FaceImage> degrade_batch(const std::vector<FaceImage>& images,
                                     const ResolutionSampler& sampler);

// Mean absolute Laplacian, a cheap high-frequency energy measure used by the
// degradation tests.
double mean_abs_laplacian(const FaceImage& img);

}  // namespace octo
