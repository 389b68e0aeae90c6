#include "octo/mining.hpp"

#include <limits>

namespace octo {

int hardest_negative(int anchor_index, const LabeledBatch& anchor_batch,
                     const LabeledBatch& negative_pool, Metric metric,
                     bool normalize) {
  anchor_batch.check();
  negative_pool.check();
  if (anchor_index < 0 ||
      anchor_index >= static_cast<int>(anchor_batch.size())) {
    throw ShapeError("anchor index out of range");
  }
  const IdentityId label = anchor_batch.labels[anchor_index];
  Embedding anchor = anchor_batch.embeddings[anchor_index];
  if (normalize) anchor = l2_normalize(anchor);

  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int n = 0; n < static_cast<int>(negative_pool.size()); ++n) {
    if (negative_pool.labels[n] == label) continue;
    const Embedding& cand = negative_pool.embeddings[n];
    const double d = normalize ? distance(metric, anchor, l2_normalize(cand))
                               : distance(metric, anchor, cand);
    if (d < best_dist) {  // strict: ties keep the lowest index
      best_dist = d;
      best = n;
    }
  }
  if (best < 0) {
    throw DomainError("no valid negative for anchor label " +
                      std::to_string(label));
  }
  return best;
}

std::vector<Triplet> mine_triplet_set(const LabeledBatch& anchors,
                                      const LabeledBatch& positives,
                                      const LabeledBatch& negative_pool,
                                      Metric metric, bool normalize,
                                      bool same_source) {
  anchors.check();
  positives.check();
  negative_pool.check();

  std::vector<Triplet> out;
  out.reserve(anchors.size());
  for (int a = 0; a < static_cast<int>(anchors.size()); ++a) {
    int positive = -1;
    if (same_source) {
      // The unique other sample with the anchor's label.
      for (int p = 0; p < static_cast<int>(positives.size()); ++p) {
        if (p == a || positives.labels[p] != anchors.labels[a]) continue;
        if (positive >= 0) {
          throw ProtocolError("anchor has more than one positive partner");
        }
        positive = p;
      }
    } else {
      // Cross-pool mining: batches are index-aligned counterparts, so the
      // anchor pairs with its own counterpart at the other resolution.
      if (a >= static_cast<int>(positives.size()) ||
          positives.labels[a] != anchors.labels[a]) {
        throw ProtocolError("cross-pool batches are not index-aligned");
      }
      positive = a;
    }
    if (positive < 0) {
      throw ProtocolError("anchor without a positive partner");
    }
    const int negative =
        hardest_negative(a, anchors, negative_pool, metric, normalize);
    out.push_back({a, positive, negative});
  }
  return out;
}

}  // namespace octo
