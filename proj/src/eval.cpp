#include "octo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace octo {

PairProtocol generate_pairs(const IdentityPool& pool, int n_genuine,
                            int n_imposter, int fold_count,
                            std::uint64_t seed) {
  if (fold_count < 1) throw ConfigError("fold count must be >= 1");

  // Enumerate all candidate pairs, shuffle, take the requested counts. Pool
  // sizes at desk scale make exhaustive enumeration cheap and duplicate-free
  // by construction.
  std::vector<std::pair<std::string, std::string>> genuine_candidates;
  for (const auto& identity : pool.identities) {
    for (std::size_t i = 0; i < identity.images.size(); ++i) {
      for (std::size_t j = i + 1; j < identity.images.size(); ++j) {
        genuine_candidates.emplace_back(identity.images[i],
                                        identity.images[j]);
      }
    }
  }
  std::vector<std::pair<std::string, std::string>> imposter_candidates;
  for (std::size_t a = 0; a < pool.identities.size(); ++a) {
    for (std::size_t b = a + 1; b < pool.identities.size(); ++b) {
      for (const auto& ia : pool.identities[a].images) {
        for (const auto& ib : pool.identities[b].images) {
          imposter_candidates.emplace_back(ia, ib);
        }
      }
    }
  }
  if (static_cast<int>(genuine_candidates.size()) < n_genuine) {
    throw ProtocolError("not enough distinct genuine pairs: have " +
                        std::to_string(genuine_candidates.size()) +
                        ", requested " + std::to_string(n_genuine));
  }
  if (static_cast<int>(imposter_candidates.size()) < n_imposter) {
    throw ProtocolError("not enough distinct imposter pairs: have " +
                        std::to_string(imposter_candidates.size()) +
                        ", requested " + std::to_string(n_imposter));
  }

  Rng rng = Rng::split(seed, streams::kProtocol);
  rng.shuffle(genuine_candidates);
  rng.shuffle(imposter_candidates);

  PairProtocol protocol;
  protocol.fold_count = fold_count;
  for (int i = 0; i < n_genuine; ++i) {
    protocol.pairs.push_back({genuine_candidates[i].first,
                              genuine_candidates[i].second, true, 0});
  }
  for (int i = 0; i < n_imposter; ++i) {
    protocol.pairs.push_back({imposter_candidates[i].first,
                              imposter_candidates[i].second, false, 0});
  }
  rng.shuffle(protocol.pairs);
  for (std::size_t i = 0; i < protocol.pairs.size(); ++i) {
    protocol.pairs[i].fold = static_cast<int>(i % fold_count);
  }
  return protocol;
}

PairProtocol read_protocol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open protocol file: " + path);
  PairProtocol protocol;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty protocol file: " + path);
  int max_fold = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    PairProtocol::Pair pair;
    int genuine = 0;
    if (!(ss >> pair.ref1 >> pair.ref2 >> genuine >> pair.fold)) {
      throw IoError("malformed protocol line: " + line);
    }
    pair.genuine = genuine != 0;
    max_fold = std::max(max_fold, pair.fold);
    protocol.pairs.push_back(std::move(pair));
  }
  protocol.fold_count = max_fold + 1;
  return protocol;
}

void write_protocol(const PairProtocol& protocol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write protocol file: " + path);
  out << "ref1\tref2\tgenuine\tfold\n";
  for (const auto& pair : protocol.pairs) {
    out << pair.ref1 << '\t' << pair.ref2 << '\t' << (pair.genuine ? 1 : 0)
        << '\t' << pair.fold << '\n';
  }
}

namespace {

std::string lfw_ref(const std::string& name, int index,
                    const std::string& extension) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return name + "/" + name + "_" + buf + "." + extension;
}

}  // namespace

PairProtocol read_lfw_pairs(const std::string& path,
                            const std::string& extension) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pairs file: " + path);

  // Header is either "<folds> <pairs-per-class-per-fold>" or a bare count.
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty pairs file: " + path);
  std::istringstream header(line);
  int folds = 1, per_fold = 0;
  header >> folds;
  if (!(header >> per_fold)) {
    per_fold = folds;
    folds = 1;
  }

  PairProtocol protocol;
  protocol.fold_count = folds;
  for (int fold = 0; fold < folds; ++fold) {
    for (int phase = 0; phase < 2; ++phase) {  // genuine block, then imposter
      for (int i = 0; i < per_fold; ++i) {
        if (!std::getline(in, line)) {
          throw IoError("truncated pairs file: " + path);
        }
        std::istringstream ss(line);
        PairProtocol::Pair pair;
        pair.fold = fold;
        if (phase == 0) {
          std::string name;
          int n1 = 0, n2 = 0;
          if (!(ss >> name >> n1 >> n2)) {
            throw IoError("malformed genuine pair line: " + line);
          }
          pair.ref1 = lfw_ref(name, n1, extension);
          pair.ref2 = lfw_ref(name, n2, extension);
          pair.genuine = true;
        } else {
          std::string name1, name2;
          int n1 = 0, n2 = 0;
          if (!(ss >> name1 >> n1 >> name2 >> n2)) {
            throw IoError("malformed imposter pair line: " + line);
          }
          pair.ref1 = lfw_ref(name1, n1, extension);
          pair.ref2 = lfw_ref(name2, n2, extension);
          pair.genuine = false;
        }
        protocol.pairs.push_back(std::move(pair));
      }
    }
  }
  return protocol;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& distances,
                                const std::vector<bool>& genuine) {
  if (distances.size() != genuine.size()) {
    throw ShapeError("roc_curve: distances/labels length mismatch");
  }
  std::size_t n_genuine = 0, n_imposter = 0;
  for (bool g : genuine) (g ? n_genuine : n_imposter)++;
  if (n_genuine == 0 || n_imposter == 0) {
    throw DomainError("roc_curve needs at least one genuine and one imposter");
  }

  std::vector<double> thresholds(distances);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.insert(thresholds.begin(),
                    -std::numeric_limits<double>::infinity());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::vector<RocPoint> roc;
  roc.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t accepted_genuine = 0, accepted_imposter = 0;
    for (std::size_t i = 0; i < distances.size(); ++i) {
      if (distances[i] <= t) (genuine[i] ? accepted_genuine : accepted_imposter)++;
    }
    roc.push_back({static_cast<double>(accepted_imposter) / n_imposter,
                   static_cast<double>(accepted_genuine) / n_genuine});
  }
  return roc;
}

double equal_error_rate(const std::vector<RocPoint>& roc) {
  if (roc.empty()) throw DomainError("equal_error_rate: empty ROC");
  // f = FAR - FRR is nondecreasing from -1 at (0,0) to +1 at (1,1); locate
  // the sign change and interpolate.
  double prev_f = roc.front().far - (1.0 - roc.front().tar);
  if (prev_f >= 0.0) return roc.front().far;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    const double f = roc[i].far - (1.0 - roc[i].tar);
    if (f >= 0.0) {
      const double alpha = (f - prev_f) == 0.0 ? 0.0 : -prev_f / (f - prev_f);
      return roc[i - 1].far + alpha * (roc[i].far - roc[i - 1].far);
    }
    prev_f = f;
  }
  return roc.back().far;
}

double tar_at_far(const std::vector<RocPoint>& roc, double far) {
  if (far < 0.0 || far > 1.0) throw DomainError("FAR must be in [0, 1]");
  double best = 0.0;
  for (const RocPoint& p : roc) {
    if (p.far <= far) best = std::max(best, p.tar);
  }
  return best;
}

namespace {

double accuracy_at(const std::vector<double>& distances,
                   const std::vector<bool>& genuine,
                   const std::vector<std::size_t>& subset, double threshold) {
  if (subset.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i : subset) {
    const bool accept = distances[i] <= threshold;
    if (accept == genuine[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(subset.size());
}

double best_train_threshold(const std::vector<double>& distances,
                            const std::vector<bool>& genuine,
                            const std::vector<std::size_t>& train) {
  std::vector<double> values;
  values.reserve(train.size());
  for (std::size_t i : train) values.push_back(distances[i]);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> candidates;
  candidates.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    candidates.push_back(0.5 * (values[i] + values[i + 1]));
  }
  candidates.push_back(std::numeric_limits<double>::infinity());

  double best_threshold = candidates.front();
  double best_accuracy = -1.0;
  for (double t : candidates) {
    const double acc = accuracy_at(distances, genuine, train, t);
    if (acc > best_accuracy) {  // ties keep the smaller threshold
      best_accuracy = acc;
      best_threshold = t;
    }
  }
  return best_threshold;
}

}  // namespace

KfoldResult kfold_accuracy(const std::vector<double>& distances,
                           const std::vector<bool>& genuine,
                           const std::vector<int>& folds) {
  if (distances.size() != genuine.size() || distances.size() != folds.size()) {
    throw ShapeError("kfold_accuracy: input length mismatch");
  }
  if (distances.empty()) throw DomainError("kfold_accuracy: empty input");

  std::set<int> fold_ids(folds.begin(), folds.end());
  KfoldResult result;
  for (int fold : fold_ids) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < folds.size(); ++i) {
      (folds[i] == fold ? test : train).push_back(i);
    }
    if (train.empty()) train = test;  // single-fold degenerate case
    const double threshold = best_train_threshold(distances, genuine, train);
    result.fold_accuracies.push_back(
        accuracy_at(distances, genuine, test, threshold));
  }

  double sum = 0.0;
  for (double a : result.fold_accuracies) sum += a;
  result.mean = sum / static_cast<double>(result.fold_accuracies.size());
  double var = 0.0;
  for (double a : result.fold_accuracies) {
    var += (a - result.mean) * (a - result.mean);
  }
  result.stddev =
      std::sqrt(var / static_cast<double>(result.fold_accuracies.size()));
  return result;
}

namespace {

VerificationReport evaluate_impl(const Embedder& embed,
                                 const ImageProvider& images,
                                 const PairProtocol& protocol,
                                 const std::vector<int>& resolutions,
                                 bool degrade_first) {
  if (protocol.pairs.empty()) throw ProtocolError("empty pair protocol");

  VerificationReport report;
  report.mode = degrade_first ? "same" : "cross";

  // Embedding cache keyed by (ref, resolution); r = 112 entries are shared
  // across report rows.
  std::map<std::pair<std::string, int>, Embedding> cache;
  auto embed_at = [&](const std::string& ref, int r) -> const Embedding& {
    const auto key = std::make_pair(ref, r);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    FaceImage img = images(ref);
    if (r != FaceImage::kSize) img = degrade_image(img, r);
    return cache.emplace(key, embed(img)).first->second;
  };

  for (int r : resolutions) {
    std::vector<double> distances;
    std::vector<bool> genuine;
    std::vector<int> folds;
    distances.reserve(protocol.pairs.size());
    for (const auto& pair : protocol.pairs) {
      const Embedding& e1 = embed_at(pair.ref1, degrade_first ? r : FaceImage::kSize);
      const Embedding& e2 = embed_at(pair.ref2, r);
      distances.push_back(cosine_distance(e1, e2));
      genuine.push_back(pair.genuine);
      folds.push_back(pair.fold);
    }

    ResolutionResult row;
    row.resolution = r;
    const KfoldResult kfold = kfold_accuracy(distances, genuine, folds);
    row.accuracy_mean = kfold.mean;
    row.accuracy_std = kfold.stddev;
    row.roc = roc_curve(distances, genuine);
    row.eer = equal_error_rate(row.roc);
    for (double far : kDefaultFars) {
      row.tar_at_fars.emplace_back(far, tar_at_far(row.roc, far));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace

VerificationReport evaluate_cross_resolution(
    const Embedder& embed, const ImageProvider& images,
    const PairProtocol& protocol, const std::vector<int>& resolutions) {
  return evaluate_impl(embed, images, protocol, resolutions,
                       /*degrade_first=*/false);
}

VerificationReport evaluate_same_resolution(
    const Embedder& embed, const ImageProvider& images,
    const PairProtocol& protocol, const std::vector<int>& resolutions) {
  return evaluate_impl(embed, images, protocol, resolutions,
                       /*degrade_first=*/true);
}

}  // namespace octo
