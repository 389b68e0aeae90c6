#include "octo/octuplet.hpp"

#include <map>
#include <sstream>

namespace octo {

void PairedBatch::check() const {
  hr.check();
  lr.check();
  if (hr.size() != lr.size()) {
    throw ProtocolError("PairedBatch: hr/lr size mismatch");
  }
  std::map<IdentityId, int> counts;
  for (std::size_t i = 0; i < hr.size(); ++i) {
    if (hr.labels[i] != lr.labels[i]) {
      throw ProtocolError("PairedBatch: labels not shared index-for-index");
    }
    counts[hr.labels[i]]++;
  }
  for (const auto& [label, count] : counts) {
    if (count != 2) {
      throw ProtocolError("PairedBatch: identity " + std::to_string(label) +
                          " appears " + std::to_string(count) +
                          " times, expected exactly 2");
    }
  }
}

std::string TermMask::to_string() const {
  std::string out;
  auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(use_hh, "hh");
  add(use_hl, "hl");
  add(use_lh, "lh");
  add(use_ll, "ll");
  return out.empty() ? "none" : out;
}

TermMask TermMask::from_string(const std::string& spec) {
  TermMask mask{false, false, false, false};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "hh") mask.use_hh = true;
    else if (item == "hl") mask.use_hl = true;
    else if (item == "lh") mask.use_lh = true;
    else if (item == "ll") mask.use_ll = true;
    else if (!item.empty()) throw ConfigError("unknown loss term: " + item);
  }
  return mask;
}

OctupletSets build_octuplet_sets(const PairedBatch& batch, Metric metric,
                                 bool normalize) {
  batch.check();
  if (batch.size() < 4) {
    throw ProtocolError("PairedBatch needs B >= 4 (two identities)");
  }
  OctupletSets sets;
  // Mining is applied separately per set; negatives come only from the
  // set's own role-source pool so P and N are both either degraded or not.
  sets.hh = mine_triplet_set(batch.hr, batch.hr, batch.hr, metric, normalize,
                             /*same_source=*/true);
  sets.hl = mine_triplet_set(batch.hr, batch.lr, batch.lr, metric, normalize,
                             /*same_source=*/false);
  sets.lh = mine_triplet_set(batch.lr, batch.hr, batch.hr, metric, normalize,
                             /*same_source=*/false);
  sets.ll = mine_triplet_set(batch.lr, batch.lr, batch.lr, metric, normalize,
                             /*same_source=*/true);
  return sets;
}

namespace {

OctupletLoss loss_impl(const PairedBatch& batch, Metric metric, Margin margin,
                       bool normalize, TermMask mask,
                       std::vector<Embedding>* grad_hr,
                       std::vector<Embedding>* grad_lr) {
  const OctupletSets sets = build_octuplet_sets(batch, metric, normalize);

  auto term = [&](const std::vector<Triplet>& triplets,
                  const LabeledBatch& anchors, const LabeledBatch& positives,
                  const LabeledBatch& negatives, std::vector<Embedding>* ga,
                  std::vector<Embedding>* gp, std::vector<Embedding>* gn) {
    if (grad_hr == nullptr) {
      return triplet_loss(triplets, anchors, positives, negatives, metric,
                          margin, normalize);
    }
    TripletGrads grads{ga, gp, gn};
    return triplet_loss_with_grad(triplets, anchors, positives, negatives,
                                  metric, margin, normalize, grads);
  };

  OctupletLoss out;
  if (mask.use_hh) {
    out.term_hh = term(sets.hh, batch.hr, batch.hr, batch.hr, grad_hr, grad_hr,
                       grad_hr);
  }
  if (mask.use_hl) {
    out.term_hl = term(sets.hl, batch.hr, batch.lr, batch.lr, grad_hr, grad_lr,
                       grad_lr);
  }
  if (mask.use_lh) {
    out.term_lh = term(sets.lh, batch.lr, batch.hr, batch.hr, grad_lr, grad_hr,
                       grad_hr);
  }
  if (mask.use_ll) {
    out.term_ll = term(sets.ll, batch.lr, batch.lr, batch.lr, grad_lr, grad_lr,
                       grad_lr);
  }
  out.total = out.term_hh + out.term_hl + out.term_lh + out.term_ll;
  return out;
}

}  // namespace

OctupletLoss octuplet_loss(const PairedBatch& batch, Metric metric,
                           Margin margin, bool normalize, TermMask mask) {
  return loss_impl(batch, metric, margin, normalize, mask, nullptr, nullptr);
}

OctupletLoss octuplet_loss_with_grad(const PairedBatch& batch, Metric metric,
                                     Margin margin, bool normalize,
                                     TermMask mask,
                                     std::vector<Embedding>& grad_hr,
                                     std::vector<Embedding>& grad_lr) {
  return loss_impl(batch, metric, margin, normalize, mask, &grad_hr, &grad_lr);
}

}  // namespace octo
