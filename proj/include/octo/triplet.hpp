#pragma once

#include <cstdint>
#include <vector>

#include "octo/metrics.hpp"

namespace octo {

using IdentityId = std::int32_t;

// Indices into the anchor/positive/negative batches of one triplet.
struct Triplet {
  int anchor = 0;
  int positive = 0;
  int negative = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct LabeledBatch {
  std::vector<Embedding> embeddings;
  std::vector<IdentityId> labels;

  std::size_t size() const { return embeddings.size(); }
  void check() const;  // throws ShapeError if lengths differ
};

// Minimum required gap between anchor-negative and anchor-positive distances.
struct Margin {
  double m = 0.0;
};

// All (A, P, N) index triples with id(A)=id(P), id(A)!=id(N); when
// same_source, anchors and positives are the same batch and A != P is
// enforced by index.
std::vector<Triplet> enumerate_triplets(const LabeledBatch& anchors,
                                        const LabeledBatch& positives,
                                        const LabeledBatch& negatives,
                                        bool same_source);

// (1/|T|) sum of [d(A,P) - d(A,N) + m]_+ ; the empty set yields 0.
double triplet_loss(const std::vector<Triplet>& triplets,
                    const LabeledBatch& anchors, const LabeledBatch& positives,
                    const LabeledBatch& negatives, Metric metric, Margin margin,
                    bool normalize);

// Accumulates d loss / d embedding into the given gradient buffers (one
// Embedding-shaped slot per batch element; buffers must be pre-sized by the
// caller). Batches may alias; the caller passes distinct buffers per role and
// merges. At the hinge kink the contribution is 0 (the inactive branch).
struct TripletGrads {
  std::vector<Embedding>* anchors = nullptr;
  std::vector<Embedding>* positives = nullptr;
  std::vector<Embedding>* negatives = nullptr;
};

double triplet_loss_with_grad(const std::vector<Triplet>& triplets,
                              const LabeledBatch& anchors,
                              const LabeledBatch& positives,
                              const LabeledBatch& negatives, Metric metric,
                              Margin margin, bool normalize,
                              const TripletGrads& grads);

// d distance(f1,f2) / d f1 and / d f2, scaled by coeff and accumulated into
// g1/g2. With normalize set, the derivative is chained through the L2
// normalization of both arguments.
void add_distance_grad(Metric metric, bool normalize,
                       std::span<const double> f1, std::span<const double> f2,
                       double coeff, std::vector<double>& g1,
                       std::vector<double>& g2);

}  // namespace octo
