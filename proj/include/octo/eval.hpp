#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "octo/batching.hpp"
#include "octo/image.hpp"
#include "octo/metrics.hpp"

namespace octo {

// Ordered verification pairs with fold assignments. The second image of a
// pair is positionally defined by file order and is the one deteriorated in
// cross-resolution evaluation.
struct PairProtocol {
  struct Pair {
    std::string ref1;
    std::string ref2;
    bool genuine = false;
    int fold = 0;
  };
  std::vector<Pair> pairs;
  int fold_count = 10;
};

// n_genuine same-identity and n_imposter cross-identity pairs, no duplicates,
// folds assigned round-robin after shuffling.
PairProtocol generate_pairs(const IdentityPool& pool, int n_genuine,
                            int n_imposter, int fold_count,
                            std::uint64_t seed);

// Native protocol format: tab-separated with a header `ref1 ref2 genuine fold`.
PairProtocol read_protocol(const std::string& path);
void write_protocol(const PairProtocol& protocol, const std::string& path);

// LFW-style pairs.txt (`name n1 n2` / `name1 n1 name2 n2` blocks). Refs are
// rendered as <name>/<name>_<nnnn>.<ext>.
PairProtocol read_lfw_pairs(const std::string& path,
                            const std::string& extension = "jpg");

// Threshold sweep over all distinct distances plus sentinels; a pair is
// accepted (called genuine) when distance <= threshold. Points are ordered by
// threshold, so FAR and TAR are nondecreasing along the list.
struct RocPoint {
  double far = 0.0;
  double tar = 0.0;
};

std::vector<RocPoint> roc_curve(const std::vector<double>& distances,
                                const std::vector<bool>& genuine);

// FAR = 1 - TAR crossing, linearly interpolated between bracketing sweep
// points.
double equal_error_rate(const std::vector<RocPoint>& roc);

// Largest TAR among points with FAR <= far (step-function convention).
double tar_at_far(const std::vector<RocPoint>& roc, double far);

// Per-fold accuracy with the threshold tuned on the other folds. Candidate
// thresholds are midpoints of consecutive sorted distinct train distances
// plus +-inf sentinels; ties break toward the smaller threshold.
struct KfoldResult {
  double mean = 0.0;
  double stddev = 0.0;  // population std over the k fold accuracies
  std::vector<double> fold_accuracies;
};

KfoldResult kfold_accuracy(const std::vector<double>& distances,
                           const std::vector<bool>& genuine,
                           const std::vector<int>& folds);

struct ResolutionResult {
  int resolution = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double eer = 0.0;
  std::vector<std::pair<double, double>> tar_at_fars;  // (FAR, TAR)
  std::vector<RocPoint> roc;
};

struct VerificationReport {
  std::string mode;  // "cross" or "same"
  std::vector<ResolutionResult> rows;
};

// Maps an image reference from the protocol to pixel data.
using ImageProvider = std::function<FaceImage(const std::string& ref)>;
// Maps a face crop to its embedding (extractor in eval mode).
using Embedder = std::function<Embedding(const FaceImage&)>;

inline constexpr double kDefaultFars[] = {0.1, 0.01, 0.001};

// Cross-resolution rule: the second image of each pair is degraded to r, the
// first stays untouched. Distances are cosine throughout evaluation.
// Embeddings are cached per (ref, resolution) within the call.
VerificationReport evaluate_cross_resolution(const Embedder& embed,
                                             const ImageProvider& images,
                                             const PairProtocol& protocol,
                                             const std::vector<int>& resolutions);

// Both images of each pair are degraded to r.
VerificationReport evaluate_same_resolution(const Embedder& embed,
                                            const ImageProvider& images,
                                            const PairProtocol& protocol,
                                            const std::vector<int>& resolutions);

}  // namespace octo
