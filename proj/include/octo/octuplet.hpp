#pragma once

#include <array>
#include <string>

#include "octo/mining.hpp"

namespace octo {

// B high-resolution embeddings plus their B degraded counterparts, labels
// shared index-for-index, every identity appearing exactly twice.
struct PairedBatch {
  LabeledBatch hr;
  LabeledBatch lr;

  std::size_t size() const { return hr.size(); }
  void check() const;  // throws ProtocolError on invariant violations
};

// Which of the four triplet-loss terms participate; at least one for a
// training run.
struct TermMask {
  bool use_hh = true;
  bool use_hl = true;
  bool use_lh = true;
  bool use_ll = true;

  bool any() const { return use_hh || use_hl || use_lh || use_ll; }
  std::string to_string() const;
  static TermMask from_string(const std::string& spec);

  friend bool operator==(const TermMask&, const TermMask&) = default;
};

// The four mined sets in order (hh, hl, lh, ll). Role sources:
//   hh: (HR, HR, HR)   hl: (HR anchor, LR positive, LR negative)
//   lh: (LR anchor, HR positive, HR negative)   ll: (LR, LR, LR)
struct OctupletSets {
  std::vector<Triplet> hh, hl, lh, ll;
};

OctupletSets build_octuplet_sets(const PairedBatch& batch, Metric metric,
                                 bool normalize);

struct OctupletLoss {
  double total = 0.0;
  double term_hh = 0.0;
  double term_hl = 0.0;
  double term_lh = 0.0;
  double term_ll = 0.0;
};

OctupletLoss octuplet_loss(const PairedBatch& batch, Metric metric,
                           Margin margin, bool normalize, TermMask mask);

// Loss plus d loss / d embedding for the 2B embeddings, accumulated into
// grad_hr / grad_lr (pre-sized by the caller, one slot per batch element).
OctupletLoss octuplet_loss_with_grad(const PairedBatch& batch, Metric metric,
                                     Margin margin, bool normalize,
                                     TermMask mask,
                                     std::vector<Embedding>& grad_hr,
                                     std::vector<Embedding>& grad_lr);

}  // namespace octo
