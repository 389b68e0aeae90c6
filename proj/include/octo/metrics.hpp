#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "octo/errors.hpp"

namespace octo {

// A d-dimensional feature vector produced by the extractor.
using Embedding = std::vector<double>;

enum class Metric { kCosine, kEuclidean, kSquaredEuclidean };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

// 1 - (f1.f2)/(||f1|| ||f2||), in [0, 2]. Zero-norm inputs are a DomainError:
// a collapsed embedding should fail loudly, not be epsilon-clamped away.
double cosine_distance(std::span<const double> f1, std::span<const double> f2);

double euclidean_distance(std::span<const double> f1, std::span<const double> f2);

double squared_euclidean_distance(std::span<const double> f1,
                                  std::span<const double> f2);

double distance(Metric metric, std::span<const double> f1,
                std::span<const double> f2);

// Unit-norm copy; DomainError on the zero vector.
Embedding l2_normalize(std::span<const double> f);

// |A| x |B| matrix of distances, entry (i,j) = metric(A_i, B_j). When
// normalize is set both sides are L2-normalized first.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
};

DistanceMatrix pairwise_distances(const std::vector<Embedding>& a,
                                  const std::vector<Embedding>& b,
                                  Metric metric, bool normalize);

}  // namespace octo
