#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "octo/image.hpp"
#include "octo/metrics.hpp"

namespace octo {

// Small convolutional extractor standing in for the full-size backbones:
// three strided conv+ReLU stages, global average pooling, and a linear
// projection to the embedding space. An optional linear classification head
// supports identity pre-training. All parameters live in one flat buffer so
// optimizers, checkpoints, and finite-difference checks can treat the model
// as a single vector.
class ToyBackbone {
 public:
  struct Config {
    int dim = 128;        // embedding dimension d
    int c1 = 8;
    int c2 = 16;
    int c3 = 32;
    int n_classes = 0;    // 0 = no classification head
    std::uint64_t seed = 0;

    friend bool operator==(const Config&, const Config&) = default;
  };

  explicit ToyBackbone(const Config& config);

  const Config& config() const { return config_; }
  int dim() const { return config_.dim; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Deterministic inference path.
  Embedding embed(const FaceImage& img) const;

  // Training path: forward keeps the activations needed by backward.
  struct Tape {
    std::vector<double> input;           // 112x112x3
    std::vector<double> act1, act2, act3;  // post-ReLU feature maps
    std::vector<double> pooled;          // global average pool
    Embedding embedding;
    std::vector<double> logits;          // only when the head is present
  };

  Embedding forward(const FaceImage& img, Tape& tape) const;

  // Accumulates d loss / d parameters into grads (same layout/size as
  // parameters()) given d loss / d embedding for this image.
  void backward(const Tape& tape, std::span<const double> d_embedding,
                std::span<double> grads) const;

  // Classification head on top of the embedding (requires n_classes > 0).
  std::vector<double> logits(const FaceImage& img, Tape& tape) const;
  void backward_logits(const Tape& tape, std::span<const double> d_logits,
                       std::span<double> grads) const;

  void save(const std::string& path) const;
  static ToyBackbone load(const std::string& path);

 private:
  Config config_;
  std::vector<double> params_;

  // flat-buffer segment offsets
  std::size_t conv1_w_ = 0, conv1_b_ = 0;
  std::size_t conv2_w_ = 0, conv2_b_ = 0;
  std::size_t conv3_w_ = 0, conv3_b_ = 0;
  std::size_t fc_w_ = 0, fc_b_ = 0;
  std::size_t cls_w_ = 0, cls_b_ = 0;

  void layout();
  void init_weights();
};

// Optimizers used by the fine-tuning presets. The presets use no weight
// decay, momentum, or gradient clipping, so none are implemented.
enum class OptimizerKind { kSgd, kAdagrad, kAdamW };

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, double epsilon,
            std::size_t parameter_count);

  void step(std::span<double> params, std::span<const double> grads);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_;
  double lr_;
  double epsilon_;
  std::size_t t_ = 0;
  std::vector<double> accum_;  // AdaGrad accumulator / Adam first moment
  std::vector<double> accum2_; // Adam second moment
};

OptimizerKind optimizer_from_name(const std::string& name);
std::string optimizer_name(OptimizerKind kind);

// Softmax cross-entropy on one logit row; fills d_logits with the gradient.
double softmax_cross_entropy(std::span<const double> logits, int label,
                             std::span<double> d_logits);

}  // namespace octo
