#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "doctest.h"
#include "octo/eval.hpp"
#include "octo/synthetic.hpp"
#include "test_helpers.hpp"

using namespace octo;
using namespace octo::testing;

namespace {

IdentityPool small_pool(int n_ids, int per_id) {
  IdentityPool pool;
  for (int i = 0; i < n_ids; ++i) {
    IdentityPool::Identity identity;
    identity.id = i;
    identity.name = "p" + std::to_string(i);
    for (int j = 0; j < per_id; ++j) {
      identity.images.push_back(identity.name + "/" + std::to_string(j));
    }
    pool.identities.push_back(std::move(identity));
  }
  return pool;
}

// Exhaustive oracle: try every candidate threshold against the train split
// and apply the best to the test split.
double kfold_oracle_mean(const std::vector<double>& d,
                         const std::vector<bool>& g,
                         const std::vector<int>& folds, int k) {
  double total = 0.0;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<double> train_d;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (folds[i] != fold) train_d.push_back(d[i]);
    }
    std::sort(train_d.begin(), train_d.end());
    train_d.erase(std::unique(train_d.begin(), train_d.end()), train_d.end());
    std::vector<double> candidates{-std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i + 1 < train_d.size(); ++i) {
      candidates.push_back(0.5 * (train_d[i] + train_d[i + 1]));
    }
    std::sort(candidates.begin(), candidates.end());

    double best_acc = -1.0, best_thr = 0.0;
    for (double thr : candidates) {
      int correct = 0, n = 0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (folds[i] == fold) continue;
        ++n;
        if ((d[i] <= thr) == g[i]) ++correct;
      }
      const double acc = correct / static_cast<double>(n);
      if (acc > best_acc) {  // strict >, so ties keep the smaller threshold
        best_acc = acc;
        best_thr = thr;
      }
    }

    int correct = 0, n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (folds[i] != fold) continue;
      ++n;
      if ((d[i] <= best_thr) == g[i]) ++correct;
    }
    total += correct / static_cast<double>(n);
  }
  return total / k;
}

}  // namespace

TEST_CASE("generate_pairs label audit") {
  const IdentityPool pool = small_pool(12, 5);
  const PairProtocol protocol = generate_pairs(pool, 40, 40, 10, 5);
  REQUIRE(protocol.pairs.size() == 80);
  CHECK(protocol.fold_count == 10);

  auto owner = [&](const std::string& ref) {
    return ref.substr(0, ref.find('/'));
  };
  int genuine = 0;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<int> fold_sizes(10, 0);
  for (const auto& p : protocol.pairs) {
    CHECK(p.ref1 != p.ref2);
    if (p.genuine) {
      ++genuine;
      CHECK(owner(p.ref1) == owner(p.ref2));
    } else {
      CHECK(owner(p.ref1) != owner(p.ref2));
    }
    CHECK(seen.insert({std::min(p.ref1, p.ref2), std::max(p.ref1, p.ref2)})
              .second);
    REQUIRE(p.fold >= 0);
    REQUIRE(p.fold < 10);
    ++fold_sizes[p.fold];
  }
  CHECK(genuine == 40);
  for (int size : fold_sizes) CHECK(size == 8);

  SUBCASE("deterministic in the seed") {
    const PairProtocol again = generate_pairs(pool, 40, 40, 10, 5);
    for (std::size_t i = 0; i < protocol.pairs.size(); ++i) {
      CHECK(again.pairs[i].ref1 == protocol.pairs[i].ref1);
      CHECK(again.pairs[i].ref2 == protocol.pairs[i].ref2);
    }
  }

  SUBCASE("impossible requests are rejected") {
    CHECK_THROWS_AS(generate_pairs(small_pool(2, 2), 10, 10, 10, 0),
                    ProtocolError);
    CHECK_THROWS_AS(generate_pairs(small_pool(1, 5), 1, 1, 2, 0),
                    ProtocolError);  // no imposter pairs exist
  }
}

TEST_CASE("protocol TSV round-trip") {
  const IdentityPool pool = small_pool(8, 4);
  const PairProtocol protocol = generate_pairs(pool, 20, 20, 10, 9);
  const std::string path = "protocol_roundtrip_test.tsv";
  write_protocol(protocol, path);
  const PairProtocol back = read_protocol(path);
  REQUIRE(back.pairs.size() == protocol.pairs.size());
  CHECK(back.fold_count == protocol.fold_count);
  for (std::size_t i = 0; i < protocol.pairs.size(); ++i) {
    CHECK(back.pairs[i].ref1 == protocol.pairs[i].ref1);
    CHECK(back.pairs[i].ref2 == protocol.pairs[i].ref2);
    CHECK(back.pairs[i].genuine == protocol.pairs[i].genuine);
    CHECK(back.pairs[i].fold == protocol.pairs[i].fold);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(read_protocol("does_not_exist.tsv"), IoError);
}

TEST_CASE("LFW pairs reader") {
  const std::string path = "lfw_pairs_test.txt";
  {
    std::ofstream out(path);
    out << "2\t2\n"
        << "Alice_Smith\t1\t3\n"
        << "Bob_Jones\t2\t4\n"
        << "Alice_Smith\t1\tBob_Jones\t2\n"
        << "Carol_White\t3\tDan_Black\t1\n"
        << "Alice_Smith\t2\t3\n"
        << "Dan_Black\t1\t2\n"
        << "Bob_Jones\t1\tCarol_White\t2\n"
        << "Alice_Smith\t3\tDan_Black\t2\n";
  }
  const PairProtocol protocol = read_lfw_pairs(path);
  std::filesystem::remove(path);

  REQUIRE(protocol.pairs.size() == 8);
  CHECK(protocol.fold_count == 2);
  CHECK(protocol.pairs[0].ref1 == "Alice_Smith/Alice_Smith_0001.jpg");
  CHECK(protocol.pairs[0].ref2 == "Alice_Smith/Alice_Smith_0003.jpg");
  CHECK(protocol.pairs[0].genuine);
  CHECK(protocol.pairs[0].fold == 0);
  CHECK(protocol.pairs[2].ref1 == "Alice_Smith/Alice_Smith_0001.jpg");
  CHECK(protocol.pairs[2].ref2 == "Bob_Jones/Bob_Jones_0002.jpg");
  CHECK(!protocol.pairs[2].genuine);
  CHECK(protocol.pairs[4].fold == 1);
  CHECK(protocol.pairs[7].ref2 == "Dan_Black/Dan_Black_0002.jpg");
}

TEST_CASE("roc_curve matches direct counting") {
  Rng rng(31);
  std::vector<double> d;
  std::vector<bool> g;
  for (int i = 0; i < 200; ++i) {
    const bool genuine = rng.next_bool();
    d.push_back(rng.next_double() + (genuine ? 0.0 : 0.4));
    g.push_back(genuine);
  }
  const auto roc = roc_curve(d, g);
  REQUIRE(roc.size() >= 2);

  // endpoints from the sentinels
  CHECK(roc.front().far == 0.0);
  CHECK(roc.front().tar == 0.0);
  CHECK(roc.back().far == 1.0);
  CHECK(roc.back().tar == 1.0);

  // monotone in both coordinates
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].far >= roc[i - 1].far);
    CHECK(roc[i].tar >= roc[i - 1].tar);
  }

  // every point reproducible by counting at some threshold
  std::vector<double> thresholds{-1e300};
  for (double x : d) thresholds.push_back(x);
  thresholds.push_back(1e300);
  std::set<std::pair<double, double>> countable;
  for (double thr : thresholds) {
    int ta = 0, fa = 0, n_g = 0, n_i = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (g[i]) {
        ++n_g;
        if (d[i] <= thr) ++ta;
      } else {
        ++n_i;
        if (d[i] <= thr) ++fa;
      }
    }
    countable.insert({fa / static_cast<double>(n_i),
                      ta / static_cast<double>(n_g)});
  }
  for (const RocPoint& p : roc) {
    CHECK(countable.count({p.far, p.tar}) == 1);
  }

  SUBCASE("single-class input is rejected") {
    CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {true, true}), DomainError);
    CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {false, false}), DomainError);
  }
}

TEST_CASE("equal error rate") {
  SUBCASE("perfect separation gives 0") {
    const std::vector<double> d{0.1, 0.2, 0.8, 0.9};
    const std::vector<bool> g{true, true, false, false};
    CHECK(equal_error_rate(roc_curve(d, g)) == doctest::Approx(0.0));
  }
  SUBCASE("fully inverted scores give EER near 1") {
    const std::vector<double> d{0.8, 0.9, 0.1, 0.2};
    const std::vector<bool> g{true, true, false, false};
    CHECK(equal_error_rate(roc_curve(d, g)) > 0.8);
  }
  SUBCASE("hand-computed interpolation") {
    // genuine at 1,3 and imposter at 2,4: sweep gives (FAR,TAR) points
    // (0,0) (0,.5) (.5,.5) (.5,1) (1,1). FRR = 1-TAR; the FAR = FRR crossing
    // lies on the segment (0,.5)-(.5,.5) where FRR = .5 and FAR rises
    // through .5? No: FAR=FRR=0.5 is met exactly at (.5,.5).
    const std::vector<double> d{1.0, 3.0, 2.0, 4.0};
    const std::vector<bool> g{true, true, false, false};
    CHECK(equal_error_rate(roc_curve(d, g)) == doctest::Approx(0.5));
  }
}

TEST_CASE("tar_at_far step convention") {
  const std::vector<RocPoint> roc{
      {0.0, 0.0}, {0.0, 0.4}, {0.05, 0.6}, {0.2, 0.9}, {1.0, 1.0}};
  CHECK(tar_at_far(roc, 0.0) == doctest::Approx(0.4));
  CHECK(tar_at_far(roc, 0.05) == doctest::Approx(0.6));
  CHECK(tar_at_far(roc, 0.1) == doctest::Approx(0.6));   // no interpolation
  CHECK(tar_at_far(roc, 0.2) == doctest::Approx(0.9));
  CHECK(tar_at_far(roc, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("kfold_accuracy") {
  SUBCASE("separable distances give accuracy 1") {
    std::vector<double> d;
    std::vector<bool> g;
    std::vector<int> folds;
    for (int i = 0; i < 50; ++i) {
      d.push_back(0.1 + 0.001 * i);
      g.push_back(true);
      folds.push_back(i % 5);
      d.push_back(0.9 + 0.001 * i);
      g.push_back(false);
      folds.push_back(i % 5);
    }
    const KfoldResult result = kfold_accuracy(d, g, folds);
    CHECK(result.mean == doctest::Approx(1.0));
    CHECK(result.stddev == doctest::Approx(0.0));
    CHECK(result.fold_accuracies.size() == 5);
  }

  SUBCASE("matches the exhaustive-threshold oracle on noisy data") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> d;
      std::vector<bool> g;
      std::vector<int> folds;
      const int n = 120, k = 6;
      for (int i = 0; i < n; ++i) {
        const bool genuine = rng.next_bool();
        d.push_back(rng.next_double() + (genuine ? 0.0 : 0.25));
        g.push_back(genuine);
        folds.push_back(i % k);
      }
      const KfoldResult result = kfold_accuracy(d, g, folds);
      CHECK(result.mean ==
            doctest::Approx(kfold_oracle_mean(d, g, folds, k)).epsilon(1e-12));

      // population stddev oracle
      double mean = 0.0;
      for (double a : result.fold_accuracies) mean += a;
      mean /= result.fold_accuracies.size();
      double var = 0.0;
      for (double a : result.fold_accuracies) var += (a - mean) * (a - mean);
      var /= result.fold_accuracies.size();
      CHECK(result.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cross- and same-resolution evaluation") {
  // Synthetic faces with an embedder that just pools coarse image statistics;
  // enough to exercise the plumbing deterministically.
  const SyntheticDatasetConfig config{
      .n_identities = 6, .images_per_identity = 4, .seed = 21};
  const IdentityPool pool = synthetic_pool(config);
  const ImageProvider provider = synthetic_provider(config.seed);
  // quadrant color means plus one high-frequency energy coordinate, so
  // degradation visibly changes the embedding
  const Embedder embed = [](const FaceImage& img) {
    Embedding e(13, 0.0);
    for (int y = 0; y < FaceImage::kSize; ++y) {
      for (int x = 0; x < FaceImage::kSize; ++x) {
        const int cell = (y / 56) * 2 + (x / 56);
        for (int c = 0; c < 3; ++c) {
          e[cell * 3 + c] += img.at(y, x, c) / 3136.0;
        }
      }
    }
    e[12] = 2000.0 * mean_abs_laplacian(img);
    return e;
  };
  const PairProtocol protocol = generate_pairs(pool, 30, 30, 10, 4);

  SUBCASE("report structure and value ranges") {
    const VerificationReport report =
        evaluate_cross_resolution(embed, provider, protocol, {7, 112});
    CHECK(report.mode == "cross");
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].resolution == 7);
    CHECK(report.rows[1].resolution == 112);
    for (const ResolutionResult& row : report.rows) {
      CHECK(row.accuracy_mean >= 0.0);
      CHECK(row.accuracy_mean <= 1.0);
      CHECK(row.eer >= 0.0);
      CHECK(row.eer <= 1.0);
      REQUIRE(row.tar_at_fars.size() == 3);
      CHECK(row.tar_at_fars[0].first == doctest::Approx(0.1));
      CHECK(row.tar_at_fars[2].first == doctest::Approx(0.001));
      CHECK(!row.roc.empty());
    }
  }

  SUBCASE("cross and same coincide at r = 112") {
    const VerificationReport cross =
        evaluate_cross_resolution(embed, provider, protocol, {112});
    const VerificationReport same =
        evaluate_same_resolution(embed, provider, protocol, {112});
    CHECK(same.mode == "same");
    CHECK(cross.rows[0].accuracy_mean ==
          doctest::Approx(same.rows[0].accuracy_mean).epsilon(1e-12));
    CHECK(cross.rows[0].eer == doctest::Approx(same.rows[0].eer).epsilon(1e-12));
  }

  SUBCASE("cross and same differ at r = 7") {
    const VerificationReport cross =
        evaluate_cross_resolution(embed, provider, protocol, {7});
    const VerificationReport same =
        evaluate_same_resolution(embed, provider, protocol, {7});
    bool roc_identical = cross.rows[0].roc.size() == same.rows[0].roc.size();
    if (roc_identical) {
      for (std::size_t i = 0; i < cross.rows[0].roc.size(); ++i) {
        if (cross.rows[0].roc[i].far != same.rows[0].roc[i].far ||
            cross.rows[0].roc[i].tar != same.rows[0].roc[i].tar) {
          roc_identical = false;
        }
      }
    }
    CHECK(!roc_identical);
  }

  SUBCASE("deterministic") {
    const VerificationReport a =
        evaluate_cross_resolution(embed, provider, protocol, {7});
    const VerificationReport b =
        evaluate_cross_resolution(embed, provider, protocol, {7});
    CHECK(a.rows[0].accuracy_mean == b.rows[0].accuracy_mean);
    CHECK(a.rows[0].eer == b.rows[0].eer);
  }
}
