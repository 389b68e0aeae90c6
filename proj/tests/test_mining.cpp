#include <limits>

#include "doctest.h"
#include "octo/mining.hpp"
#include "test_helpers.hpp"

using namespace octo;
using namespace octo::testing;

namespace {

// Independent exhaustive scan over different-label pool entries.
int argmin_negative(int anchor, const LabeledBatch& anchors,
                    const LabeledBatch& pool, Metric metric, bool normalize) {
  const Embedding a = normalize ? l2_normalize(anchors.embeddings[anchor])
                                : anchors.embeddings[anchor];
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
    if (pool.labels[i] == anchors.labels[anchor]) continue;
    const Embedding c =
        normalize ? l2_normalize(pool.embeddings[i]) : pool.embeddings[i];
    const double d = distance(metric, a, c);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("hardest_negative basics") {
  SUBCASE("unique minimum among valid labels") {
    LabeledBatch anchors;
    anchors.embeddings = {{0.0}};
    anchors.labels = {0};
    LabeledBatch pool;
    pool.embeddings = {{0.0}, {0.5}, {0.9}};
    pool.labels = {0, 1, 2};
    CHECK(hardest_negative(0, anchors, pool, Metric::kEuclidean, false) == 1);
  }
  SUBCASE("nearest same-label sample is excluded") {
    LabeledBatch anchors;
    anchors.embeddings = {{0.0}};
    anchors.labels = {0};
    LabeledBatch pool;
    pool.embeddings = {{0.01}, {0.5}, {0.3}};
    pool.labels = {0, 1, 2};  // index 0 is closest but shares the label
    CHECK(hardest_negative(0, anchors, pool, Metric::kEuclidean, false) == 2);
  }
  SUBCASE("no valid negative") {
    LabeledBatch anchors;
    anchors.embeddings = {{0.0}};
    anchors.labels = {0};
    LabeledBatch pool;
    pool.embeddings = {{1.0}, {2.0}};
    pool.labels = {0, 0};
    CHECK_THROWS_AS(hardest_negative(0, anchors, pool, Metric::kEuclidean,
                                     false),
                    DomainError);
  }
  SUBCASE("ties break toward the lowest index") {
    LabeledBatch anchors;
    anchors.embeddings = {{0.0}};
    anchors.labels = {0};
    LabeledBatch pool;
    pool.embeddings = {{1.0}, {-1.0}, {1.0}};
    pool.labels = {1, 1, 1};
    CHECK(hardest_negative(0, anchors, pool, Metric::kEuclidean, false) == 0);
  }
}

TEST_CASE("hardest_negative matches the exhaustive scan oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const LabeledBatch batch = random_paired_labels_batch(rng, 32, 16);
    for (Metric metric : {Metric::kCosine, Metric::kEuclidean,
                          Metric::kSquaredEuclidean}) {
      const int anchor = static_cast<int>(rng.next_below(32));
      CHECK(hardest_negative(anchor, batch, batch, metric, false) ==
            argmin_negative(anchor, batch, batch, metric, false));
    }
  }
}

TEST_CASE("mine_triplet_set") {
  Rng rng(55);
  SUBCASE("B=4 same batch, positives paired by identity") {
    const LabeledBatch b = random_paired_labels_batch(rng, 4, 4);
    const auto mined =
        mine_triplet_set(b, b, b, Metric::kEuclidean, false, true);
    REQUIRE(mined.size() == 4);
    for (const Triplet& t : mined) {
      CHECK(b.labels[t.anchor] == b.labels[t.positive]);
      CHECK(t.anchor != t.positive);
      CHECK(b.labels[t.anchor] != b.labels[t.negative]);
    }
    // identity partners are adjacent (0,1), (2,3)
    CHECK(mined[0].positive == 1);
    CHECK(mined[1].positive == 0);
    CHECK(mined[2].positive == 3);
    CHECK(mined[3].positive == 2);
  }

  SUBCASE("degenerate single-identity batch") {
    LabeledBatch b;
    b.embeddings = {{0.0}, {1.0}};
    b.labels = {0, 0};
    CHECK_THROWS_AS(mine_triplet_set(b, b, b, Metric::kEuclidean, false, true),
                    DomainError);
  }

  SUBCASE("anchor with more than one positive partner") {
    LabeledBatch b;
    b.embeddings = {{0.0}, {1.0}, {2.0}, {3.0}};
    b.labels = {0, 0, 0, 1};
    CHECK_THROWS_AS(mine_triplet_set(b, b, b, Metric::kEuclidean, false, true),
                    ProtocolError);
  }

  SUBCASE("mined negatives attain the distance-matrix row minimum") {
    const LabeledBatch b = random_paired_labels_batch(rng, 16, 8);
    const auto mined =
        mine_triplet_set(b, b, b, Metric::kEuclidean, false, true);
    const DistanceMatrix m =
        pairwise_distances(b.embeddings, b.embeddings, Metric::kEuclidean,
                           false);
    for (const Triplet& t : mined) {
      double row_min = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (b.labels[j] == b.labels[t.anchor]) continue;
        row_min = std::min(row_min, m.at(t.anchor, j));
      }
      CHECK(m.at(t.anchor, t.negative) == row_min);
    }
  }

  SUBCASE("cross-pool mining pairs the anchor with its aligned counterpart") {
    const LabeledBatch hr = random_paired_labels_batch(rng, 8, 4);
    LabeledBatch lr = hr;
    for (auto& e : lr.embeddings) {
      for (double& v : e) v += rng.uniform(-0.05, 0.05);
    }
    const auto mined =
        mine_triplet_set(hr, lr, lr, Metric::kEuclidean, false, false);
    REQUIRE(mined.size() == 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(mined[i].anchor == i);
      CHECK(mined[i].positive == i);
      CHECK(lr.labels[mined[i].negative] != hr.labels[i]);
    }
  }
}

TEST_CASE("mining invariants") {
  Rng rng(77);

  SUBCASE("mined cardinality equals B and matches oracle across metrics") {
    for (int b_size : {4, 8, 16, 32, 64}) {
      const LabeledBatch b = random_paired_labels_batch(rng, b_size, 8);
      for (Metric metric : {Metric::kCosine, Metric::kEuclidean,
                            Metric::kSquaredEuclidean}) {
        const auto mined = mine_triplet_set(b, b, b, metric, false, true);
        REQUIRE(static_cast<int>(mined.size()) == b_size);
        for (const Triplet& t : mined) {
          CHECK(t.negative == argmin_negative(t.anchor, b, b, metric, false));
        }
      }
    }
  }

  SUBCASE("squared-euclidean mining picks the same negatives as euclidean") {
    for (int trial = 0; trial < 50; ++trial) {
      const LabeledBatch b = random_paired_labels_batch(rng, 16, 8);
      const auto e = mine_triplet_set(b, b, b, Metric::kEuclidean, false, true);
      const auto s =
          mine_triplet_set(b, b, b, Metric::kSquaredEuclidean, false, true);
      CHECK(e == s);
    }
  }

  SUBCASE("determinism") {
    const LabeledBatch b = random_paired_labels_batch(rng, 16, 8);
    const auto a = mine_triplet_set(b, b, b, Metric::kCosine, true, true);
    const auto c = mine_triplet_set(b, b, b, Metric::kCosine, true, true);
    CHECK(a == c);
  }
}
