#pragma once

#include <string>
#include <vector>

#include "octo/rng.hpp"
#include "octo/triplet.hpp"

namespace octo {

// Per-identity image references. Identities keep their insertion order; ids
// are dense indices assigned by the loader.
struct IdentityPool {
  struct Identity {
    IdentityId id = 0;
    std::string name;
    std::vector<std::string> images;  // references (paths or synthetic keys)
  };
  std::vector<Identity> identities;

  std::size_t total_images() const;
};

struct BatchRefs {
  std::vector<std::string> refs;
  std::vector<IdentityId> labels;
};

// All mini-batches of one epoch. Each batch holds exactly B/2 distinct
// identities with exactly 2 images each; no image reference repeats within
// the epoch. Identity selection is without replacement, per-draw probability
// proportional to the identity's unpicked count; counts are decremented once
// per emitted batch. The epoch ends when fewer than B/2 identities still
// have >= 2 unpicked images (leftover images strand until the next epoch).
std::vector<BatchRefs> build_epoch_batches(const IdentityPool& pool, int batch_size,
                                           std::uint64_t seed);

// Number of further full batches constructible under the exactly-twice rule,
// assuming identities with the most unpicked images are always preferred.
int remaining_capacity(const IdentityPool& pool, int batch_size);

}  // namespace octo
