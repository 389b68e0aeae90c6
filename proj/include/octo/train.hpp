#pragma once

#include <optional>
#include <string>
#include <vector>

#include "octo/batching.hpp"
#include "octo/eval.hpp"
#include "octo/net.hpp"
#include "octo/octuplet.hpp"

namespace octo {

struct AugmentConfig {
  bool horizontal_flip = true;
  double jitter_lo = 0.8;  // brightness/saturation factor range
  double jitter_hi = 1.2;
};

// Horizontal flip with probability 1/2, then brightness and saturation each
// scaled by an independent uniform factor; output clamped to [0,1].
FaceImage augment(const FaceImage& img, Rng& rng,
                  const AugmentConfig& config = {});

struct FineTuneConfig {
  std::string preset;  // empty = fields below are authoritative
  OptimizerKind optimizer = OptimizerKind::kAdagrad;
  double learning_rate = 0.01;
  double epsilon = 1.0;
  std::vector<int> lr_decay_epochs{2, 4, 5};  // lr /= 10 after each
  int epochs = 6;
  int batch_size = 64;
  double margin = 25.0;
  Metric metric = Metric::kEuclidean;
  bool normalize = false;
  TermMask term_mask{};
  std::vector<int> resolutions{7, 14, 28};
  AugmentConfig augment{};
  std::uint64_t seed = 0;
  int validations_per_epoch = 4;  // 0 disables validation

  void validate() const;  // throws ConfigError
};

// Named hyperparameter presets: "adagrad-default" (AdaGrad eps 1.0, lr 0.01,
// 6 epochs, decay after 2/4/5), "sgd-magface" (SGD lr 0.001, 1 epoch),
// "adamw-transformer" (AdamW eps 1e-8, lr 0.0005, 1 epoch).
FineTuneConfig preset_config(const std::string& name);

struct StepRecord {
  int step = 0;
  int epoch = 0;
  double total = 0.0;
  double term_hh = 0.0, term_hl = 0.0, term_lh = 0.0, term_ll = 0.0;
  double learning_rate = 0.0;
  std::optional<double> validation_accuracy;
};

struct TrainingHistory {
  std::vector<StepRecord> steps;
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_wall_seconds;

  // CSV columns: step, epoch, total loss, four per-term losses (masked terms
  // emitted as empty), lr, validation accuracy (empty between validations).
  void write_csv(const std::string& path, TermMask mask) const;
};

struct FineTuneResult {
  TrainingHistory history;
  std::vector<double> best_parameters;  // snapshot at best validation
  double best_validation = -1.0;        // -1 when validation is disabled
};

// One octuplet fine-tuning run: per batch, augment, degrade into a
// PairedBatch, forward all 2B images through the single shared extractor,
// backpropagate the octuplet loss, and step the optimizer. A non-finite loss
// aborts with a diagnostic dump.
FineTuneResult fine_tune(ToyBackbone& model, const IdentityPool& dataset,
                         const ImageProvider& images,
                         const PairProtocol* valid_protocol,
                         const FineTuneConfig& config);

// Identity-classification pre-training for the toy backbone (labels are the
// dense pool indices; the backbone needs a matching classification head).
struct PretrainStats {
  std::vector<double> epoch_mean_loss;
  double final_train_accuracy = 0.0;
};

PretrainStats pretrain_classifier(ToyBackbone& model, const IdentityPool& dataset,
                                  const ImageProvider& images, int epochs,
                                  int batch_size, double learning_rate,
                                  std::uint64_t seed);

}  // namespace octo
