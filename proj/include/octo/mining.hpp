#pragma once

#include "octo/triplet.hpp"

namespace octo {

// Index of the different-label pool sample closest to the anchor; ties break
// toward the lowest index so mining is deterministic.
int hardest_negative(int anchor_index, const LabeledBatch& anchor_batch,
                     const LabeledBatch& negative_pool, Metric metric,
                     bool normalize);

// One triplet per anchor: its unique positive partner and its hardest
// negative. Requires exactly one positive partner per anchor (the
// two-per-identity batch rule) and at least one valid negative.
std::vector<Triplet> mine_triplet_set(const LabeledBatch& anchors,
                                      const LabeledBatch& positives,
                                      const LabeledBatch& negative_pool,
                                      Metric metric, bool normalize,
                                      bool same_source);

}  // namespace octo
