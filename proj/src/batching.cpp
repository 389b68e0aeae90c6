#include "octo/batching.hpp"

#include <algorithm>
#include <numeric>

namespace octo {

std::size_t IdentityPool::total_images() const {
  std::size_t n = 0;
  for (const auto& identity : identities) n += identity.images.size();
  return n;
}

namespace {

void check_batch_size(int batch_size) {
  if (batch_size <= 0 || batch_size % 2 != 0) {
    throw ConfigError("batch size must be a positive even integer, got " +
                      std::to_string(batch_size));
  }
}

}  // namespace

std::vector<BatchRefs> build_epoch_batches(const IdentityPool& pool, int batch_size,
                                           std::uint64_t seed) {
  check_batch_size(batch_size);
  const int ids_per_batch = batch_size / 2;
  const std::size_t n_ids = pool.identities.size();

  std::vector<int> unpicked(n_ids);
  std::vector<std::vector<std::string>> remaining(n_ids);
  for (std::size_t i = 0; i < n_ids; ++i) {
    remaining[i] = pool.identities[i].images;
    unpicked[i] = static_cast<int>(remaining[i].size());
  }

  auto eligible_count = [&] {
    int n = 0;
    for (int c : unpicked) {
      if (c >= 2) ++n;
    }
    return n;
  };

  if (eligible_count() < ids_per_batch) {
    throw ConfigError("pool has fewer than B/2 identities with >= 2 images");
  }

  Rng rng = Rng::split(seed, streams::kBatchSampler);
  std::vector<BatchRefs> batches;

  while (eligible_count() >= ids_per_batch) {
    // Weighted draws without replacement; weights are the unpicked counts as
    // of the start of this batch (updated only once per batch).
    std::vector<std::size_t> chosen;
    std::vector<bool> taken(n_ids, false);
    for (int k = 0; k < ids_per_batch; ++k) {
      std::int64_t total = 0;
      for (std::size_t i = 0; i < n_ids; ++i) {
        if (!taken[i] && unpicked[i] >= 2) total += unpicked[i];
      }
      std::int64_t ticket =
          static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(total)));
      std::size_t pick = 0;
      for (std::size_t i = 0; i < n_ids; ++i) {
        if (taken[i] || unpicked[i] < 2) continue;
        ticket -= unpicked[i];
        if (ticket < 0) {
          pick = i;
          break;
        }
      }
      taken[pick] = true;
      chosen.push_back(pick);
    }

    BatchRefs batch;
    batch.refs.reserve(batch_size);
    batch.labels.reserve(batch_size);
    for (std::size_t idx : chosen) {
      // Two images uniformly without replacement from the unpicked list.
      for (int j = 0; j < 2; ++j) {
        const std::size_t r = rng.next_below(remaining[idx].size());
        batch.refs.push_back(remaining[idx][r]);
        batch.labels.push_back(pool.identities[idx].id);
        remaining[idx].erase(remaining[idx].begin() +
                             static_cast<std::ptrdiff_t>(r));
      }
      unpicked[idx] -= 2;
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

int remaining_capacity(const IdentityPool& pool, int batch_size) {
  check_batch_size(batch_size);
  const int ids_per_batch = batch_size / 2;

  std::vector<int> counts;
  counts.reserve(pool.identities.size());
  for (const auto& identity : pool.identities) {
    counts.push_back(static_cast<int>(identity.images.size()));
  }

  int batches = 0;
  while (true) {
    // Prefer the identities with the most unpicked images.
    std::partial_sort(counts.begin(),
                      counts.begin() + std::min<std::size_t>(
                                           ids_per_batch, counts.size()),
                      counts.end(), std::greater<int>());
    if (static_cast<int>(counts.size()) < ids_per_batch ||
        counts[ids_per_batch - 1] < 2) {
      break;
    }
    for (int i = 0; i < ids_per_batch; ++i) counts[i] -= 2;
    ++batches;
  }
  return batches;
}

}  // namespace octo
