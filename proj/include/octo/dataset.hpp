#pragma once

#include <string>
#include <vector>

#include "octo/batching.hpp"
#include "octo/image.hpp"

namespace octo {

// Lossless PNG is required for degraded-image caches so compression
// artifacts do not compound with the synthetic degradation.
FaceImage read_png(const std::string& path);
void write_png(const FaceImage& img, const std::string& path);

// Dataset layout: one directory per identity, image files within. Entries
// are sorted so ids and references are stable across runs.
IdentityPool scan_dataset(const std::string& root);

// Tab-separated index manifest: identity <tab> relative path, one per line.
IdentityPool read_manifest(const std::string& path);
void write_manifest(const IdentityPool& pool, const std::string& path);

// Resolves protocol/batch references as paths relative to a dataset root.
class FileImageProvider {
 public:
  explicit FileImageProvider(std::string root) : root_(std::move(root)) {}
  FaceImage operator()(const std::string& ref) const;

 private:
  std::string root_;
};

}  // namespace octo
