#include "octo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <png.h>

namespace octo {

namespace fs = std::filesystem;

FaceImage read_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open image: " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("failed to decode PNG: " + path);
  }

  png_init_io(png, fp);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);

  // Normalize every input to 8-bit interleaved RGB.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_expand(png);
  png_read_update_info(png, info);

  std::vector<png_byte> buffer(static_cast<std::size_t>(height) *
                               png_get_rowbytes(png, info));
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = buffer.data() + static_cast<std::size_t>(y) *
                                  png_get_rowbytes(png, info);
  }
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  std::vector<double> pixels(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = buffer[i] / 255.0;
  }

  FaceImage out;
  if (width == FaceImage::kSize && height == FaceImage::kSize) {
    out.pixels = std::move(pixels);
  } else {
    // Inputs are expected pre-aligned at 112x112; other sizes are resampled.
    out.pixels = bicubic_resize(pixels, static_cast<int>(width),
                                static_cast<int>(height), FaceImage::kSize,
                                FaceImage::kSize, 3);
    for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

void write_png(const FaceImage& img, const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot write image: " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("failed to encode PNG: " + path);
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, FaceImage::kSize, FaceImage::kSize, 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(FaceImage::kSize * 3);
  for (int y = 0; y < FaceImage::kSize; ++y) {
    for (int x = 0; x < FaceImage::kSize; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

IdentityPool pool_from_map(
    const std::map<std::string, std::vector<std::string>>& by_identity) {
  IdentityPool pool;
  IdentityId next_id = 0;
  for (const auto& [name, images] : by_identity) {
    IdentityPool::Identity identity;
    identity.id = next_id++;
    identity.name = name;
    identity.images = images;
    std::sort(identity.images.begin(), identity.images.end());
    pool.identities.push_back(std::move(identity));
  }
  return pool;
}

}  // namespace

IdentityPool scan_dataset(const std::string& root) {
  if (!fs::is_directory(root)) {
    throw IoError("dataset root is not a directory: " + root);
  }
  std::map<std::string, std::vector<std::string>> by_identity;
  for (const auto& dir : fs::directory_iterator(root)) {
    if (!dir.is_directory()) continue;
    const std::string name = dir.path().filename().string();
    for (const auto& file : fs::directory_iterator(dir.path())) {
      if (!file.is_regular_file() || !is_image_file(file.path())) continue;
      by_identity[name].push_back(name + "/" +
                                  file.path().filename().string());
    }
  }
  if (by_identity.empty()) {
    throw IoError("no identity directories with images under " + root);
  }
  return pool_from_map(by_identity);
}

IdentityPool read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::map<std::string, std::vector<std::string>> by_identity;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw IoError("malformed manifest line (expected identity<TAB>path): " +
                    line);
    }
    by_identity[line.substr(0, tab)].push_back(line.substr(tab + 1));
  }
  if (by_identity.empty()) throw IoError("empty manifest: " + path);
  return pool_from_map(by_identity);
}

void write_manifest(const IdentityPool& pool, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  for (const auto& identity : pool.identities) {
    for (const auto& image : identity.images) {
      out << identity.name << '\t' << image << '\n';
    }
  }
}

FaceImage FileImageProvider::operator()(const std::string& ref) const {
  return read_png((fs::path(root_) / ref).string());
}

}  // namespace octo
