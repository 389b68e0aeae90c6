#include "octo/metrics.hpp"

#include <cmath>

namespace octo {

namespace {

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("embedding dimension mismatch: " +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::kCosine: return "cosine";
    case Metric::kEuclidean: return "euclidean";
    case Metric::kSquaredEuclidean: return "squared-euclidean";
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "squared-euclidean" || name == "squared_euclidean") {
    return Metric::kSquaredEuclidean;
  }
  throw ConfigError("unknown metric: " + name);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double cosine_distance(std::span<const double> f1, std::span<const double> f2) {
  require_same_dim(f1, f2);
  const double n1 = l2_norm(f1);
  const double n2 = l2_norm(f2);
  if (n1 == 0.0 || n2 == 0.0) {
    throw DomainError("cosine distance of a zero-norm embedding");
  }
  return 1.0 - dot(f1, f2) / (n1 * n2);
}

double euclidean_distance(std::span<const double> f1,
                          std::span<const double> f2) {
  require_same_dim(f1, f2);
  double s = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) {
    const double d = f1[i] - f2[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double squared_euclidean_distance(std::span<const double> f1,
                                  std::span<const double> f2) {
  require_same_dim(f1, f2);
  double s = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) {
    const double d = f1[i] - f2[i];
    s += d * d;
  }
  return s;
}

double distance(Metric metric, std::span<const double> f1,
                std::span<const double> f2) {
  switch (metric) {
    case Metric::kCosine: return cosine_distance(f1, f2);
    case Metric::kEuclidean: return euclidean_distance(f1, f2);
    case Metric::kSquaredEuclidean: return squared_euclidean_distance(f1, f2);
  }
  throw ConfigError("invalid metric");
}

Embedding l2_normalize(std::span<const double> f) {
  const double n = l2_norm(f);
  if (n == 0.0) throw DomainError("cannot normalize a zero vector");
  Embedding out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] / n;
  return out;
}

DistanceMatrix pairwise_distances(const std::vector<Embedding>& a,
                                  const std::vector<Embedding>& b,
                                  Metric metric, bool normalize) {
  DistanceMatrix m;
  m.rows = a.size();
  m.cols = b.size();
  m.data.assign(m.rows * m.cols, 0.0);

  const std::vector<Embedding>* lhs = &a;
  const std::vector<Embedding>* rhs = &b;
  std::vector<Embedding> na, nb;
  if (normalize) {
    na.reserve(a.size());
    nb.reserve(b.size());
    for (const auto& e : a) na.push_back(l2_normalize(e));
    for (const auto& e : b) nb.push_back(l2_normalize(e));
    lhs = &na;
    rhs = &nb;
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      m.at(i, j) = distance(metric, (*lhs)[i], (*rhs)[j]);
    }
  }
  return m;
}

}  // namespace octo
