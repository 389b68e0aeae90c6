#include "octo/image.hpp"

#include <algorithm>
#include <cmath>

namespace octo {

namespace {

// Catmull-Rom cubic kernel (a = -0.5), support [-2, 2].
double cubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

struct FilterRow {
  int first = 0;                 // first source index
  std::vector<double> weights;   // normalized
};

std::vector<FilterRow> build_filter(int src_size, int dst_size) {
  const double scale = static_cast<double>(src_size) / dst_size;
  const double filter_scale = std::max(scale, 1.0);  // widen on downscale
  const double support = 2.0 * filter_scale;

  std::vector<FilterRow> rows(dst_size);
  for (int i = 0; i < dst_size; ++i) {
    const double center = (i + 0.5) * scale - 0.5;
    int lo = static_cast<int>(std::floor(center - support + 0.5));
    int hi = static_cast<int>(std::floor(center + support + 0.5));
    lo = std::max(lo, 0);
    hi = std::min(hi, src_size - 1);

    FilterRow& row = rows[i];
    row.first = lo;
    row.weights.resize(hi - lo + 1);
    double total = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double w = cubic_kernel((j - center) / filter_scale);
      row.weights[j - lo] = w;
      total += w;
    }
    if (total != 0.0) {
      for (double& w : row.weights) w /= total;
    }
  }
  return rows;
}

}  // namespace

std::vector<double> bicubic_resize(const std::vector<double>& src, int src_w,
                                   int src_h, int dst_w, int dst_h,
                                   int channels) {
  if (src_w <= 0 || src_h <= 0 || dst_w <= 0 || dst_h <= 0) {
    throw DomainError("bicubic_resize: nonpositive size");
  }
  if (src.size() != static_cast<std::size_t>(src_w) * src_h * channels) {
    throw ShapeError("bicubic_resize: source buffer size mismatch");
  }

  // Horizontal pass, then vertical.
  const std::vector<FilterRow> hfilter = build_filter(src_w, dst_w);
  std::vector<double> mid(static_cast<std::size_t>(dst_w) * src_h * channels);
  for (int y = 0; y < src_h; ++y) {
    for (int x = 0; x < dst_w; ++x) {
      const FilterRow& row = hfilter[x];
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < row.weights.size(); ++k) {
          acc += row.weights[k] *
                 src[(static_cast<std::size_t>(y) * src_w + row.first + k) *
                         channels +
                     c];
        }
        mid[(static_cast<std::size_t>(y) * dst_w + x) * channels + c] = acc;
      }
    }
  }

  const std::vector<FilterRow> vfilter = build_filter(src_h, dst_h);
  std::vector<double> dst(static_cast<std::size_t>(dst_w) * dst_h * channels);
  for (int y = 0; y < dst_h; ++y) {
    const FilterRow& row = vfilter[y];
    for (int x = 0; x < dst_w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < row.weights.size(); ++k) {
          acc += row.weights[k] *
                 mid[((row.first + k) * static_cast<std::size_t>(dst_w) + x) *
                         channels +
                     c];
        }
        dst[(static_cast<std::size_t>(y) * dst_w + x) * channels + c] = acc;
      }
    }
  }
  return dst;
}

int ResolutionSampler::draw(std::uint64_t image_index) const {
  if (choices.empty()) throw ConfigError("ResolutionSampler: empty choice set");
  Rng rng = Rng::split(seed, splitmix64(image_index + 0x5eedULL));
  return choices[rng.next_below(choices.size())];
}

FaceImage degrade_image(const FaceImage& img, int r) {
  if (r < 2 || r > FaceImage::kSize) {
    throw DomainError("degradation resolution out of range [2, 112]: " +
                      std::to_string(r));
  }
  FaceImage out;
  if (r == FaceImage::kSize) {
    out.pixels = img.pixels;  // exact identity, no resample round-trip
    out.resolution_tag = r;
    return out;
  }
  std::vector<double> small =
      bicubic_resize(img.pixels, FaceImage::kSize, FaceImage::kSize, r, r,
                     FaceImage::kChannels);
  out.pixels = bicubic_resize(small, r, r, FaceImage::kSize, FaceImage::kSize,
                              FaceImage::kChannels);
  for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  out.resolution_tag = r;
  return out;
}

std::vector<FaceImage> degrade_batch(const std::vector<FaceImage>& images,
                                     const ResolutionSampler& sampler) {
  if (images.empty()) throw DomainError("degrade_batch: empty input");
  std::vector<FaceImage> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back(degrade_image(images[i], sampler.draw(i)));
  }
  return out;
}

double mean_abs_laplacian(const FaceImage& img) {
  double total = 0.0;
  std::size_t count = 0;
  for (int y = 1; y < FaceImage::kSize - 1; ++y) {
    for (int x = 1; x < FaceImage::kSize - 1; ++x) {
      for (int c = 0; c < FaceImage::kChannels; ++c) {
        const double lap = img.at(y - 1, x, c) + img.at(y + 1, x, c) +
                           img.at(y, x - 1, c) + img.at(y, x + 1, c) -
                           4.0 * img.at(y, x, c);
        total += std::fabs(lap);
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace octo
