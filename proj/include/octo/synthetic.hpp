#pragma once

#include "octo/batching.hpp"
#include "octo/eval.hpp"
#include "octo/image.hpp"

namespace octo {

// Procedurally rendered face-style identities for desk-scale experiments and
// tests. Each identity combines low-frequency cues (background and face
// colors, head geometry) with high-frequency cues (identity-specific stripe
// texture and small marks); per-image variants jitter pose, brightness, and
// noise. High-frequency cues vanish under strong degradation, which is what
// makes the cross-resolution task nontrivial.
struct SyntheticDatasetConfig {
  int n_identities = 50;
  int images_per_identity = 6;
  std::uint64_t seed = 0;
};

// Deterministic render of one variant of one identity.
FaceImage synth_face(std::uint64_t dataset_seed, int identity, int variant);

// Pool whose references encode (identity, variant) for the matching provider.
IdentityPool synthetic_pool(const SyntheticDatasetConfig& config);

// Resolves references produced by synthetic_pool by rendering on demand.
ImageProvider synthetic_provider(std::uint64_t dataset_seed);

// Materializes the dataset as PNG files (one directory per identity).
void write_synthetic_dataset(const SyntheticDatasetConfig& config,
                             const std::string& root);

}  // namespace octo
