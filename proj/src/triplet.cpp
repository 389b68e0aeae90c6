#include "octo/triplet.hpp"

#include <cmath>

namespace octo {

void LabeledBatch::check() const {
  if (embeddings.size() != labels.size()) {
    throw ShapeError("LabeledBatch: embeddings/labels length mismatch");
  }
}

std::vector<Triplet> enumerate_triplets(const LabeledBatch& anchors,
                                        const LabeledBatch& positives,
                                        const LabeledBatch& negatives,
                                        bool same_source) {
  anchors.check();
  positives.check();
  negatives.check();

  std::vector<Triplet> out;
  const int na = static_cast<int>(anchors.size());
  const int np = static_cast<int>(positives.size());
  const int nn = static_cast<int>(negatives.size());
  for (int a = 0; a < na; ++a) {
    for (int p = 0; p < np; ++p) {
      if (anchors.labels[a] != positives.labels[p]) continue;
      if (same_source && a == p) continue;
      for (int n = 0; n < nn; ++n) {
        if (negatives.labels[n] == anchors.labels[a]) continue;
        out.push_back({a, p, n});
      }
    }
  }
  return out;
}

namespace {

void check_indices(const std::vector<Triplet>& triplets,
                   const LabeledBatch& anchors, const LabeledBatch& positives,
                   const LabeledBatch& negatives) {
  const int na = static_cast<int>(anchors.size());
  const int np = static_cast<int>(positives.size());
  const int nn = static_cast<int>(negatives.size());
  for (const Triplet& t : triplets) {
    if (t.anchor < 0 || t.anchor >= na || t.positive < 0 || t.positive >= np ||
        t.negative < 0 || t.negative >= nn) {
      throw ShapeError("triplet index out of range");
    }
  }
}

// d distance / d u1 (and symmetric for u2) evaluated on the possibly
// pre-normalized vectors u1, u2.
void raw_distance_grad(Metric metric, std::span<const double> u1,
                       std::span<const double> u2, std::vector<double>& d1,
                       std::vector<double>& d2) {
  const std::size_t n = u1.size();
  d1.assign(n, 0.0);
  d2.assign(n, 0.0);
  switch (metric) {
    case Metric::kEuclidean: {
      double dist = euclidean_distance(u1, u2);
      if (dist == 0.0) return;  // subgradient 0 at coincident points
      for (std::size_t i = 0; i < n; ++i) {
        const double g = (u1[i] - u2[i]) / dist;
        d1[i] = g;
        d2[i] = -g;
      }
      break;
    }
    case Metric::kSquaredEuclidean: {
      for (std::size_t i = 0; i < n; ++i) {
        const double g = 2.0 * (u1[i] - u2[i]);
        d1[i] = g;
        d2[i] = -g;
      }
      break;
    }
    case Metric::kCosine: {
      const double n1 = l2_norm(u1);
      const double n2 = l2_norm(u2);
      if (n1 == 0.0 || n2 == 0.0) {
        throw DomainError("cosine gradient of a zero-norm embedding");
      }
      const double ip = dot(u1, u2);
      // d/df1 [1 - f1.f2/(|f1||f2|)] = -(f2/(|f1||f2|) - (f1.f2) f1/(|f1|^3 |f2|))
      for (std::size_t i = 0; i < n; ++i) {
        d1[i] = -(u2[i] / (n1 * n2) - ip * u1[i] / (n1 * n1 * n1 * n2));
        d2[i] = -(u1[i] / (n1 * n2) - ip * u2[i] / (n2 * n2 * n2 * n1));
      }
      break;
    }
  }
}

// Chain rule through u = f/|f|: grad_f = (grad_u - (grad_u . u) u) / |f|.
void chain_through_normalize(std::span<const double> f,
                             std::vector<double>& grad_u) {
  const double n = l2_norm(f);
  if (n == 0.0) throw DomainError("cannot normalize a zero vector");
  double proj = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) proj += grad_u[i] * f[i] / n;
  for (std::size_t i = 0; i < f.size(); ++i) {
    grad_u[i] = (grad_u[i] - proj * f[i] / n) / n;
  }
}

}  // namespace

void add_distance_grad(Metric metric, bool normalize,
                       std::span<const double> f1, std::span<const double> f2,
                       double coeff, std::vector<double>& g1,
                       std::vector<double>& g2) {
  std::vector<double> u1s, u2s;
  std::span<const double> u1 = f1;
  std::span<const double> u2 = f2;
  if (normalize) {
    u1s = l2_normalize(f1);
    u2s = l2_normalize(f2);
    u1 = u1s;
    u2 = u2s;
  }
  std::vector<double> d1, d2;
  raw_distance_grad(metric, u1, u2, d1, d2);
  if (normalize) {
    chain_through_normalize(f1, d1);
    chain_through_normalize(f2, d2);
  }
  for (std::size_t i = 0; i < f1.size(); ++i) {
    g1[i] += coeff * d1[i];
    g2[i] += coeff * d2[i];
  }
}

namespace {

double loss_impl(const std::vector<Triplet>& triplets,
                 const LabeledBatch& anchors, const LabeledBatch& positives,
                 const LabeledBatch& negatives, Metric metric, Margin margin,
                 bool normalize, const TripletGrads* grads) {
  if (triplets.empty()) return 0.0;
  check_indices(triplets, anchors, positives, negatives);

  std::vector<Embedding> na, np, nn;
  const std::vector<Embedding>* ea = &anchors.embeddings;
  const std::vector<Embedding>* ep = &positives.embeddings;
  const std::vector<Embedding>* en = &negatives.embeddings;
  if (normalize && grads == nullptr) {
    // Loss-only path: normalize up front, once per embedding.
    na.reserve(ea->size());
    for (const auto& e : *ea) na.push_back(l2_normalize(e));
    np.reserve(ep->size());
    for (const auto& e : *ep) np.push_back(l2_normalize(e));
    nn.reserve(en->size());
    for (const auto& e : *en) nn.push_back(l2_normalize(e));
    ea = &na;
    ep = &np;
    en = &nn;
  }

  const double inv = 1.0 / static_cast<double>(triplets.size());
  double total = 0.0;
  for (const Triplet& t : triplets) {
    double d_ap, d_an;
    if (grads != nullptr && normalize) {
      d_ap = distance(metric, l2_normalize(anchors.embeddings[t.anchor]),
                      l2_normalize(positives.embeddings[t.positive]));
      d_an = distance(metric, l2_normalize(anchors.embeddings[t.anchor]),
                      l2_normalize(negatives.embeddings[t.negative]));
    } else {
      d_ap = distance(metric, (*ea)[t.anchor], (*ep)[t.positive]);
      d_an = distance(metric, (*ea)[t.anchor], (*en)[t.negative]);
    }
    const double hinge = d_ap - d_an + margin.m;
    if (hinge > 0.0) {
      total += hinge;
      if (grads != nullptr) {
        add_distance_grad(metric, normalize, anchors.embeddings[t.anchor],
                          positives.embeddings[t.positive], inv,
                          (*grads->anchors)[t.anchor],
                          (*grads->positives)[t.positive]);
        add_distance_grad(metric, normalize, anchors.embeddings[t.anchor],
                          negatives.embeddings[t.negative], -inv,
                          (*grads->anchors)[t.anchor],
                          (*grads->negatives)[t.negative]);
      }
    }
  }
  return total * inv;
}

}  // namespace

double triplet_loss(const std::vector<Triplet>& triplets,
                    const LabeledBatch& anchors, const LabeledBatch& positives,
                    const LabeledBatch& negatives, Metric metric, Margin margin,
                    bool normalize) {
  return loss_impl(triplets, anchors, positives, negatives, metric, margin,
                   normalize, nullptr);
}

double triplet_loss_with_grad(const std::vector<Triplet>& triplets,
                              const LabeledBatch& anchors,
                              const LabeledBatch& positives,
                              const LabeledBatch& negatives, Metric metric,
                              Margin margin, bool normalize,
                              const TripletGrads& grads) {
  return loss_impl(triplets, anchors, positives, negatives, metric, margin,
                   normalize, &grads);
}

}  // namespace octo
