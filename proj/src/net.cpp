#include "octo/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "octo/errors.hpp"
#include "octo/rng.hpp"

namespace octo {

namespace {

// Fixed geometry of the three conv stages on 112x112 input.
struct Stage {
  int in_size, out_size, ksize, stride, pad;
};
constexpr Stage kStage1{112, 28, 5, 4, 2};
constexpr Stage kStage2{28, 14, 3, 2, 1};
constexpr Stage kStage3{14, 7, 3, 2, 1};

void conv_forward(const Stage& s, int in_ch, int out_ch,
                  std::span<const double> input, std::span<const double> w,
                  std::span<const double> b, std::vector<double>& output,
                  bool relu) {
  output.assign(static_cast<std::size_t>(s.out_size) * s.out_size * out_ch,
                0.0);
  for (int oy = 0; oy < s.out_size; ++oy) {
    for (int ox = 0; ox < s.out_size; ++ox) {
      for (int oc = 0; oc < out_ch; ++oc) {
        double acc = b[oc];
        const std::size_t wbase =
            static_cast<std::size_t>(oc) * in_ch * s.ksize * s.ksize;
        for (int ky = 0; ky < s.ksize; ++ky) {
          const int iy = oy * s.stride + ky - s.pad;
          if (iy < 0 || iy >= s.in_size) continue;
          for (int kx = 0; kx < s.ksize; ++kx) {
            const int ix = ox * s.stride + kx - s.pad;
            if (ix < 0 || ix >= s.in_size) continue;
            const std::size_t ibase =
                (static_cast<std::size_t>(iy) * s.in_size + ix) * in_ch;
            const std::size_t kbase = wbase + (static_cast<std::size_t>(ky) *
                                               s.ksize + kx) * in_ch;
            for (int ic = 0; ic < in_ch; ++ic) {
              acc += input[ibase + ic] * w[kbase + ic];
            }
          }
        }
        if (relu && acc < 0.0) acc = 0.0;
        output[(static_cast<std::size_t>(oy) * s.out_size + ox) * out_ch + oc] =
            acc;
      }
    }
  }
}

// Backward through conv+ReLU. d_output is already masked by the caller using
// the post-ReLU activation (zero where the unit was inactive).
void conv_backward(const Stage& s, int in_ch, int out_ch,
                   std::span<const double> input, std::span<const double> w,
                   std::span<const double> d_output, std::span<double> d_input,
                   std::span<double> d_w, std::span<double> d_b) {
  for (int oy = 0; oy < s.out_size; ++oy) {
    for (int ox = 0; ox < s.out_size; ++ox) {
      for (int oc = 0; oc < out_ch; ++oc) {
        const double g =
            d_output[(static_cast<std::size_t>(oy) * s.out_size + ox) * out_ch +
                     oc];
        if (g == 0.0) continue;
        d_b[oc] += g;
        const std::size_t wbase =
            static_cast<std::size_t>(oc) * in_ch * s.ksize * s.ksize;
        for (int ky = 0; ky < s.ksize; ++ky) {
          const int iy = oy * s.stride + ky - s.pad;
          if (iy < 0 || iy >= s.in_size) continue;
          for (int kx = 0; kx < s.ksize; ++kx) {
            const int ix = ox * s.stride + kx - s.pad;
            if (ix < 0 || ix >= s.in_size) continue;
            const std::size_t ibase =
                (static_cast<std::size_t>(iy) * s.in_size + ix) * in_ch;
            const std::size_t kbase = wbase + (static_cast<std::size_t>(ky) *
                                               s.ksize + kx) * in_ch;
            for (int ic = 0; ic < in_ch; ++ic) {
              d_w[kbase + ic] += g * input[ibase + ic];
              if (!d_input.empty()) d_input[ibase + ic] += g * w[kbase + ic];
            }
          }
        }
      }
    }
  }
}

void relu_mask(std::span<const double> activation, std::vector<double>& grad) {
  for (std::size_t i = 0; i < activation.size(); ++i) {
    if (activation[i] <= 0.0) grad[i] = 0.0;
  }
}

}  // namespace

ToyBackbone::ToyBackbone(const Config& config) : config_(config) {
  if (config_.dim < 2) throw ConfigError("embedding dimension must be >= 2");
  layout();
  init_weights();
}

void ToyBackbone::layout() {
  std::size_t offset = 0;
  auto segment = [&offset](std::size_t n) {
    const std::size_t start = offset;
    offset += n;
    return start;
  };
  const int c1 = config_.c1, c2 = config_.c2, c3 = config_.c3;
  conv1_w_ = segment(static_cast<std::size_t>(c1) * 3 * 5 * 5);
  conv1_b_ = segment(c1);
  conv2_w_ = segment(static_cast<std::size_t>(c2) * c1 * 3 * 3);
  conv2_b_ = segment(c2);
  conv3_w_ = segment(static_cast<std::size_t>(c3) * c2 * 3 * 3);
  conv3_b_ = segment(c3);
  fc_w_ = segment(static_cast<std::size_t>(config_.dim) * c3);
  fc_b_ = segment(config_.dim);
  if (config_.n_classes > 0) {
    cls_w_ = segment(static_cast<std::size_t>(config_.n_classes) * config_.dim);
    cls_b_ = segment(config_.n_classes);
  }
  params_.assign(offset, 0.0);
}

void ToyBackbone::init_weights() {
  Rng rng = Rng::split(config_.seed, streams::kModelInit);
  auto glorot = [&rng](std::span<double> w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w) v = rng.uniform(-limit, limit);
  };
  const int c1 = config_.c1, c2 = config_.c2, c3 = config_.c3;
  glorot(std::span(params_).subspan(conv1_w_, c1 * 3 * 5 * 5), 3 * 25, c1 * 25);
  glorot(std::span(params_).subspan(conv2_w_, static_cast<std::size_t>(c2) * c1 * 9),
         c1 * 9, c2 * 9);
  glorot(std::span(params_).subspan(conv3_w_, static_cast<std::size_t>(c3) * c2 * 9),
         c2 * 9, c3 * 9);
  glorot(std::span(params_).subspan(fc_w_, static_cast<std::size_t>(config_.dim) * c3),
         c3, config_.dim);
  if (config_.n_classes > 0) {
    glorot(std::span(params_).subspan(
               cls_w_, static_cast<std::size_t>(config_.n_classes) * config_.dim),
           config_.dim, config_.n_classes);
  }
  // biases stay zero
}

Embedding ToyBackbone::forward(const FaceImage& img, Tape& tape) const {
  const int c1 = config_.c1, c2 = config_.c2, c3 = config_.c3;
  tape.input = img.pixels;
  const std::span<const double> p(params_);
  conv_forward(kStage1, 3, c1, tape.input, p.subspan(conv1_w_),
               p.subspan(conv1_b_, c1), tape.act1, true);
  conv_forward(kStage2, c1, c2, tape.act1, p.subspan(conv2_w_),
               p.subspan(conv2_b_, c2), tape.act2, true);
  conv_forward(kStage3, c2, c3, tape.act2, p.subspan(conv3_w_),
               p.subspan(conv3_b_, c3), tape.act3, true);

  // Global average pool over the 7x7 map.
  tape.pooled.assign(c3, 0.0);
  const int hw = kStage3.out_size * kStage3.out_size;
  for (int i = 0; i < hw; ++i) {
    for (int c = 0; c < c3; ++c) {
      tape.pooled[c] += tape.act3[static_cast<std::size_t>(i) * c3 + c];
    }
  }
  for (double& v : tape.pooled) v /= hw;

  tape.embedding.assign(config_.dim, 0.0);
  for (int o = 0; o < config_.dim; ++o) {
    double acc = params_[fc_b_ + o];
    for (int i = 0; i < c3; ++i) {
      acc += params_[fc_w_ + static_cast<std::size_t>(o) * c3 + i] *
             tape.pooled[i];
    }
    tape.embedding[o] = acc;
  }
  return tape.embedding;
}

Embedding ToyBackbone::embed(const FaceImage& img) const {
  Tape tape;
  return forward(img, tape);
}

void ToyBackbone::backward(const Tape& tape, std::span<const double> d_embedding,
                           std::span<double> grads) const {
  if (d_embedding.size() != static_cast<std::size_t>(config_.dim)) {
    throw ShapeError("backward: embedding gradient dimension mismatch");
  }
  if (grads.size() != params_.size()) {
    throw ShapeError("backward: gradient buffer size mismatch");
  }
  const int c1 = config_.c1, c2 = config_.c2, c3 = config_.c3;
  const std::span<const double> p(params_);

  // fc
  std::vector<double> d_pooled(c3, 0.0);
  for (int o = 0; o < config_.dim; ++o) {
    const double g = d_embedding[o];
    if (g == 0.0) continue;
    grads[fc_b_ + o] += g;
    for (int i = 0; i < c3; ++i) {
      grads[fc_w_ + static_cast<std::size_t>(o) * c3 + i] += g * tape.pooled[i];
      d_pooled[i] += g * p[fc_w_ + static_cast<std::size_t>(o) * c3 + i];
    }
  }

  // unpool
  const int hw = kStage3.out_size * kStage3.out_size;
  std::vector<double> d_act3(tape.act3.size(), 0.0);
  for (int i = 0; i < hw; ++i) {
    for (int c = 0; c < c3; ++c) {
      d_act3[static_cast<std::size_t>(i) * c3 + c] = d_pooled[c] / hw;
    }
  }
  relu_mask(tape.act3, d_act3);

  std::vector<double> d_act2(tape.act2.size(), 0.0);
  conv_backward(kStage3, c2, c3, tape.act2, p.subspan(conv3_w_), d_act3,
                d_act2, grads.subspan(conv3_w_), grads.subspan(conv3_b_, c3));
  relu_mask(tape.act2, d_act2);

  std::vector<double> d_act1(tape.act1.size(), 0.0);
  conv_backward(kStage2, c1, c2, tape.act1, p.subspan(conv2_w_), d_act2,
                d_act1, grads.subspan(conv2_w_), grads.subspan(conv2_b_, c2));
  relu_mask(tape.act1, d_act1);

  conv_backward(kStage1, 3, c1, tape.input, p.subspan(conv1_w_), d_act1,
                std::span<double>(), grads.subspan(conv1_w_),
                grads.subspan(conv1_b_, c1));
}

std::vector<double> ToyBackbone::logits(const FaceImage& img, Tape& tape) const {
  if (config_.n_classes <= 0) {
    throw ConfigError("backbone has no classification head");
  }
  forward(img, tape);
  tape.logits.assign(config_.n_classes, 0.0);
  for (int o = 0; o < config_.n_classes; ++o) {
    double acc = params_[cls_b_ + o];
    for (int i = 0; i < config_.dim; ++i) {
      acc += params_[cls_w_ + static_cast<std::size_t>(o) * config_.dim + i] *
             tape.embedding[i];
    }
    tape.logits[o] = acc;
  }
  return tape.logits;
}

void ToyBackbone::backward_logits(const Tape& tape,
                                  std::span<const double> d_logits,
                                  std::span<double> grads) const {
  if (config_.n_classes <= 0) {
    throw ConfigError("backbone has no classification head");
  }
  std::vector<double> d_embedding(config_.dim, 0.0);
  for (int o = 0; o < config_.n_classes; ++o) {
    const double g = d_logits[o];
    if (g == 0.0) continue;
    grads[cls_b_ + o] += g;
    for (int i = 0; i < config_.dim; ++i) {
      grads[cls_w_ + static_cast<std::size_t>(o) * config_.dim + i] +=
          g * tape.embedding[i];
      d_embedding[i] +=
          g * params_[cls_w_ + static_cast<std::size_t>(o) * config_.dim + i];
    }
  }
  backward(tape, d_embedding, grads);
}

void ToyBackbone::save(const std::string& path) const {
  nlohmann::json doc;
  doc["format"] = "octo-backbone";
  doc["schema_version"] = 1;
  doc["config"] = {{"dim", config_.dim},       {"c1", config_.c1},
                   {"c2", config_.c2},         {"c3", config_.c3},
                   {"n_classes", config_.n_classes},
                   {"seed", config_.seed}};
  doc["parameters"] = params_;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << doc.dump();
}

ToyBackbone ToyBackbone::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint " + path + ": " + e.what());
  }
  if (doc.value("format", "") != "octo-backbone") {
    throw IoError("not a backbone checkpoint: " + path);
  }
  Config config;
  const auto& c = doc.at("config");
  config.dim = c.at("dim").get<int>();
  config.c1 = c.at("c1").get<int>();
  config.c2 = c.at("c2").get<int>();
  config.c3 = c.at("c3").get<int>();
  config.n_classes = c.at("n_classes").get<int>();
  config.seed = c.at("seed").get<std::uint64_t>();
  ToyBackbone model(config);
  const auto params = doc.at("parameters").get<std::vector<double>>();
  if (params.size() != model.params_.size()) {
    throw IoError("checkpoint parameter count mismatch");
  }
  model.params_ = params;
  return model;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, double epsilon,
                     std::size_t parameter_count)
    : kind_(kind), lr_(learning_rate), epsilon_(epsilon) {
  if (kind_ != OptimizerKind::kSgd) accum_.assign(parameter_count, 0.0);
  if (kind_ == OptimizerKind::kAdamW) accum2_.assign(parameter_count, 0.0);
}

void Optimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer: params/grads size mismatch");
  }
  switch (kind_) {
    case OptimizerKind::kSgd:
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= lr_ * grads[i];
      }
      break;
    case OptimizerKind::kAdagrad:
      for (std::size_t i = 0; i < params.size(); ++i) {
        accum_[i] += grads[i] * grads[i];
        params[i] -= lr_ * grads[i] / (std::sqrt(accum_[i]) + epsilon_);
      }
      break;
    case OptimizerKind::kAdamW: {
      constexpr double beta1 = 0.9, beta2 = 0.999;
      ++t_;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
      for (std::size_t i = 0; i < params.size(); ++i) {
        accum_[i] = beta1 * accum_[i] + (1.0 - beta1) * grads[i];
        accum2_[i] = beta2 * accum2_[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = accum_[i] / bc1;
        const double vhat = accum2_[i] / bc2;
        params[i] -= lr_ * mhat / (std::sqrt(vhat) + epsilon_);
      }
      break;
    }
  }
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adagrad") return OptimizerKind::kAdagrad;
  if (name == "adamw") return OptimizerKind::kAdamW;
  throw ConfigError("unknown optimizer: " + name);
}

std::string optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kAdagrad: return "adagrad";
    case OptimizerKind::kAdamW: return "adamw";
  }
  return "?";
}

double softmax_cross_entropy(std::span<const double> logits, int label,
                             std::span<double> d_logits) {
  if (label < 0 || label >= static_cast<int>(logits.size())) {
    throw ShapeError("softmax label out of range");
  }
  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  double total = 0.0;
  for (double v : logits) total += std::exp(v - max_logit);
  const double log_total = std::log(total) + max_logit;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = std::exp(logits[i] - log_total);
    d_logits[i] = p - (static_cast<int>(i) == label ? 1.0 : 0.0);
  }
  return log_total - logits[label];
}

}  // namespace octo
