#include "octo/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace octo {

FaceImage augment(const FaceImage& img, Rng& rng, const AugmentConfig& config) {
  FaceImage out = img;
  if (config.horizontal_flip && rng.next_bool()) {
    for (int y = 0; y < FaceImage::kSize; ++y) {
      for (int x = 0; x < FaceImage::kSize / 2; ++x) {
        for (int c = 0; c < FaceImage::kChannels; ++c) {
          std::swap(out.at(y, x, c), out.at(y, FaceImage::kSize - 1 - x, c));
        }
      }
    }
  }
  const double brightness = rng.uniform(config.jitter_lo, config.jitter_hi);
  const double saturation = rng.uniform(config.jitter_lo, config.jitter_hi);
  for (int y = 0; y < FaceImage::kSize; ++y) {
    for (int x = 0; x < FaceImage::kSize; ++x) {
      // Rec.601 luma as the desaturation target.
      const double gray = 0.299 * out.at(y, x, 0) + 0.587 * out.at(y, x, 1) +
                          0.114 * out.at(y, x, 2);
      for (int c = 0; c < FaceImage::kChannels; ++c) {
        const double v = gray + saturation * (out.at(y, x, c) - gray);
        out.at(y, x, c) = std::clamp(v * brightness, 0.0, 1.0);
      }
    }
  }
  return out;
}

void FineTuneConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 4 || batch_size % 2 != 0) {
    throw ConfigError("batch size must be even and >= 4");
  }
  if (learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
  if (margin < 0.0) throw ConfigError("margin must be >= 0");
  if (!term_mask.any()) throw ConfigError("term mask selects no loss terms");
  if (resolutions.empty()) throw ConfigError("empty resolution choice set");
  for (int r : resolutions) {
    if (r < 2 || r > FaceImage::kSize) {
      throw ConfigError("resolution out of range [2, 112]: " + std::to_string(r));
    }
  }
  for (std::size_t i = 1; i < lr_decay_epochs.size(); ++i) {
    if (lr_decay_epochs[i] <= lr_decay_epochs[i - 1]) {
      throw ConfigError("lr decay epochs must be strictly increasing");
    }
  }
}

FineTuneConfig preset_config(const std::string& name) {
  FineTuneConfig config;
  config.preset = name;
  if (name == "adagrad-default") {
    config.optimizer = OptimizerKind::kAdagrad;
    config.learning_rate = 0.01;
    config.epsilon = 1.0;
    config.epochs = 6;
    config.lr_decay_epochs = {2, 4, 5};
  } else if (name == "sgd-magface") {
    config.optimizer = OptimizerKind::kSgd;
    config.learning_rate = 0.001;
    config.epsilon = 0.0;
    config.epochs = 1;
    config.lr_decay_epochs = {};
  } else if (name == "adamw-transformer") {
    config.optimizer = OptimizerKind::kAdamW;
    config.learning_rate = 0.0005;
    config.epsilon = 1e-8;
    config.epochs = 1;
    config.lr_decay_epochs = {};
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return config;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double lr_for_epoch(const FineTuneConfig& config, int epoch) {
  int k = 0;
  for (int d : config.lr_decay_epochs) {
    if (d < epoch) ++k;
  }
  return config.learning_rate / std::pow(10.0, k);
}

double validation_accuracy(const ToyBackbone& model,
                           const ImageProvider& images,
                           const PairProtocol& protocol,
                           const FineTuneConfig& config) {
  const int r_low =
      *std::min_element(config.resolutions.begin(), config.resolutions.end());
  std::vector<int> resolutions{r_low};
  if (r_low != FaceImage::kSize) resolutions.push_back(FaceImage::kSize);
  const Embedder embed = [&model](const FaceImage& img) {
    return model.embed(img);
  };
  const VerificationReport report =
      evaluate_cross_resolution(embed, images, protocol, resolutions);
  double mean = 0.0;
  for (const auto& row : report.rows) mean += row.accuracy_mean;
  return mean / static_cast<double>(report.rows.size());
}

}  // namespace

void TrainingHistory::write_csv(const std::string& path, TermMask mask) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write history CSV: " + path);
  out << "step,epoch,total_loss,loss_hh,loss_hl,loss_lh,loss_ll,lr,"
         "validation_accuracy\n";
  for (const StepRecord& s : steps) {
    out << s.step << ',' << s.epoch << ',' << format_double(s.total) << ',';
    if (mask.use_hh) out << format_double(s.term_hh);
    out << ',';
    if (mask.use_hl) out << format_double(s.term_hl);
    out << ',';
    if (mask.use_lh) out << format_double(s.term_lh);
    out << ',';
    if (mask.use_ll) out << format_double(s.term_ll);
    out << ',' << format_double(s.learning_rate) << ',';
    if (s.validation_accuracy) out << format_double(*s.validation_accuracy);
    out << '\n';
  }
}

FineTuneResult fine_tune(ToyBackbone& model, const IdentityPool& dataset,
                         const ImageProvider& images,
                         const PairProtocol* valid_protocol,
                         const FineTuneConfig& config) {
  config.validate();
  const int batch_size = config.batch_size;
  const std::size_t n_params = model.parameter_count();

  Optimizer optimizer(config.optimizer, config.learning_rate, config.epsilon,
                      n_params);
  FineTuneResult result;
  int global_step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    const double lr = lr_for_epoch(config, epoch);
    optimizer.set_learning_rate(lr);

    const std::uint64_t epoch_seed =
        splitmix64(config.seed) ^ static_cast<std::uint64_t>(epoch);
    const std::vector<BatchRefs> batches =
        build_epoch_batches(dataset, batch_size, epoch_seed);
    Rng aug_rng = Rng::split(epoch_seed, streams::kAugmentation);

    const int val_interval =
        (valid_protocol != nullptr && config.validations_per_epoch > 0)
            ? std::max<int>(1, static_cast<int>(batches.size()) /
                                   config.validations_per_epoch)
            : 0;

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const BatchRefs& refs = batches[b];

      // Augment first so the HR/LR pair depicts the identical view.
      std::vector<FaceImage> hr_images;
      hr_images.reserve(refs.refs.size());
      for (const std::string& ref : refs.refs) {
        hr_images.push_back(augment(images(ref), aug_rng, config.augment));
      }
      ResolutionSampler sampler;
      sampler.choices = config.resolutions;
      sampler.seed = splitmix64(epoch_seed ^ streams::kDegradation) +
                     static_cast<std::uint64_t>(global_step);
      const std::vector<FaceImage> lr_images = degrade_batch(hr_images, sampler);

      // One shared forward pass over all 2B images.
      PairedBatch batch;
      batch.hr.labels = refs.labels;
      batch.lr.labels = refs.labels;
      std::vector<ToyBackbone::Tape> hr_tapes(hr_images.size());
      std::vector<ToyBackbone::Tape> lr_tapes(lr_images.size());
      for (std::size_t i = 0; i < hr_images.size(); ++i) {
        batch.hr.embeddings.push_back(model.forward(hr_images[i], hr_tapes[i]));
        batch.lr.embeddings.push_back(model.forward(lr_images[i], lr_tapes[i]));
      }

      std::vector<Embedding> grad_hr(batch.size(),
                                     Embedding(model.dim(), 0.0));
      std::vector<Embedding> grad_lr(batch.size(),
                                     Embedding(model.dim(), 0.0));
      const OctupletLoss loss = octuplet_loss_with_grad(
          batch, config.metric, Margin{config.margin}, config.normalize,
          config.term_mask, grad_hr, grad_lr);
      if (!std::isfinite(loss.total)) {
        throw NumericError(
            "non-finite loss at epoch " + std::to_string(epoch) + " step " +
            std::to_string(global_step) + " (hh=" + std::to_string(loss.term_hh) +
            " hl=" + std::to_string(loss.term_hl) +
            " lh=" + std::to_string(loss.term_lh) +
            " ll=" + std::to_string(loss.term_ll) + ", lr=" + std::to_string(lr) +
            ")");
      }

      if (loss.total > 0.0) {
        std::vector<double> grads(n_params, 0.0);
        for (std::size_t i = 0; i < hr_tapes.size(); ++i) {
          model.backward(hr_tapes[i], grad_hr[i], grads);
          model.backward(lr_tapes[i], grad_lr[i], grads);
        }
        optimizer.step(model.parameters(), grads);
      }

      ++global_step;
      epoch_loss += loss.total;

      StepRecord record;
      record.step = global_step;
      record.epoch = epoch;
      record.total = loss.total;
      record.term_hh = loss.term_hh;
      record.term_hl = loss.term_hl;
      record.term_lh = loss.term_lh;
      record.term_ll = loss.term_ll;
      record.learning_rate = lr;
      const bool validate_now =
          val_interval > 0 && ((b + 1) % val_interval == 0 ||
                               b + 1 == batches.size());
      if (validate_now) {
        const double acc =
            validation_accuracy(model, images, *valid_protocol, config);
        record.validation_accuracy = acc;
        if (acc > result.best_validation) {
          result.best_validation = acc;
          result.best_parameters.assign(model.parameters().begin(),
                                        model.parameters().end());
        }
      }
      result.history.steps.push_back(std::move(record));
    }

    result.history.epoch_mean_loss.push_back(
        batches.empty() ? 0.0 : epoch_loss / static_cast<double>(batches.size()));
    result.history.epoch_wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      epoch_start)
            .count());
  }

  if (result.best_parameters.empty()) {
    result.best_parameters.assign(model.parameters().begin(),
                                  model.parameters().end());
  }
  return result;
}

PretrainStats pretrain_classifier(ToyBackbone& model, const IdentityPool& dataset,
                                  const ImageProvider& images, int epochs,
                                  int batch_size, double learning_rate,
                                  std::uint64_t seed) {
  if (model.config().n_classes !=
      static_cast<int>(dataset.identities.size())) {
    throw ConfigError("classification head size must match identity count");
  }
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");

  // Dense (ref, label) list; labels are pool indices.
  std::vector<std::pair<std::string, int>> samples;
  for (std::size_t i = 0; i < dataset.identities.size(); ++i) {
    for (const auto& ref : dataset.identities[i].images) {
      samples.emplace_back(ref, static_cast<int>(i));
    }
  }

  Optimizer optimizer(OptimizerKind::kAdamW, learning_rate, 1e-8,
                      model.parameter_count());
  PretrainStats stats;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    Rng rng = Rng::split(splitmix64(seed) ^ static_cast<std::uint64_t>(epoch),
                         streams::kBatchSampler);
    rng.shuffle(samples);

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < samples.size(); start += batch_size) {
      const std::size_t end =
          std::min(samples.size(), start + static_cast<std::size_t>(batch_size));
      std::vector<double> grads(model.parameter_count(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        ToyBackbone::Tape tape;
        const std::vector<double> logits =
            model.logits(images(samples[i].first), tape);
        std::vector<double> d_logits(logits.size(), 0.0);
        batch_loss += softmax_cross_entropy(logits, samples[i].second, d_logits);
        const double scale = 1.0 / static_cast<double>(end - start);
        for (double& g : d_logits) g *= scale;
        model.backward_logits(tape, d_logits, grads);
      }
      optimizer.step(model.parameters(), grads);
      epoch_loss += batch_loss / static_cast<double>(end - start);
      ++batches;
    }
    stats.epoch_mean_loss.push_back(epoch_loss /
                                    static_cast<double>(batches));
  }

  std::size_t correct = 0;
  for (const auto& [ref, label] : samples) {
    ToyBackbone::Tape tape;
    const std::vector<double> logits = model.logits(images(ref), tape);
    const int pred = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (pred == label) ++correct;
  }
  stats.final_train_accuracy =
      static_cast<double>(correct) / static_cast<double>(samples.size());
  return stats;
}

}  // namespace octo
