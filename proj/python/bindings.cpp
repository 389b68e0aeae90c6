#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "octo/eval.hpp"
#include "octo/image.hpp"
#include "octo/metrics.hpp"
#include "octo/mining.hpp"
#include "octo/net.hpp"
#include "octo/octuplet.hpp"
#include "octo/synthetic.hpp"

namespace py = pybind11;
using namespace octo;

namespace {

FaceImage image_from_pixels(const std::vector<double>& pixels) {
  FaceImage img;
  if (pixels.size() != img.pixels.size()) {
    throw ShapeError("expected " + std::to_string(img.pixels.size()) +
                     " pixel values, got " + std::to_string(pixels.size()));
  }
  img.pixels = pixels;
  return img;
}

PairedBatch make_paired_batch(const std::vector<Embedding>& hr,
                              const std::vector<Embedding>& lr,
                              const std::vector<IdentityId>& labels) {
  PairedBatch batch;
  batch.hr = {hr, labels};
  batch.lr = {lr, labels};
  return batch;
}

py::dict loss_to_dict(const OctupletLoss& loss) {
  py::dict d;
  d["total"] = loss.total;
  d["hh"] = loss.term_hh;
  d["hl"] = loss.term_hl;
  d["lh"] = loss.term_lh;
  d["ll"] = loss.term_ll;
  return d;
}

std::vector<RocPoint> roc_from_pairs(
    const std::vector<std::pair<double, double>>& points) {
  std::vector<RocPoint> roc;
  roc.reserve(points.size());
  for (const auto& [far, tar] : points) roc.push_back({far, tar});
  return roc;
}

}  // namespace

PYBIND11_MODULE(_octo, m) {
  m.doc() = "octuplet-loss cross-resolution face verification core";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  // distances
  m.def("cosine_distance", [](const Embedding& a, const Embedding& b) {
    return cosine_distance(a, b);
  });
  m.def("euclidean_distance", [](const Embedding& a, const Embedding& b) {
    return euclidean_distance(a, b);
  });
  m.def("squared_euclidean_distance",
        [](const Embedding& a, const Embedding& b) {
          return squared_euclidean_distance(a, b);
        });
  m.def("l2_normalize",
        [](const Embedding& a) { return l2_normalize(a); });
  m.def(
      "distance",
      [](const std::string& metric, const Embedding& a, const Embedding& b) {
        return distance(metric_from_name(metric), a, b);
      },
      py::arg("metric"), py::arg("a"), py::arg("b"));
  m.def(
      "pairwise_distances",
      [](const std::vector<Embedding>& a, const std::vector<Embedding>& b,
         const std::string& metric, bool normalize) {
        const DistanceMatrix d =
            pairwise_distances(a, b, metric_from_name(metric), normalize);
        std::vector<std::vector<double>> rows(d.rows);
        for (std::size_t i = 0; i < d.rows; ++i) {
          rows[i].assign(d.data.begin() + i * d.cols,
                         d.data.begin() + (i + 1) * d.cols);
        }
        return rows;
      },
      py::arg("a"), py::arg("b"), py::arg("metric") = "euclidean",
      py::arg("normalize") = false);

  // triplets and mining
  m.def(
      "enumerate_triplets",
      [](const std::vector<Embedding>& anchors,
         const std::vector<IdentityId>& anchor_labels,
         const std::vector<Embedding>& pool,
         const std::vector<IdentityId>& pool_labels, bool same_source) {
        const LabeledBatch a{anchors, anchor_labels};
        const LabeledBatch p{pool, pool_labels};
        std::vector<std::tuple<int, int, int>> out;
        for (const Triplet& t : enumerate_triplets(a, p, p, same_source)) {
          out.emplace_back(t.anchor, t.positive, t.negative);
        }
        return out;
      },
      py::arg("anchors"), py::arg("anchor_labels"), py::arg("pool"),
      py::arg("pool_labels"), py::arg("same_source"));
  m.def(
      "mine_triplets",
      [](const std::vector<Embedding>& anchors,
         const std::vector<IdentityId>& anchor_labels,
         const std::vector<Embedding>& pool,
         const std::vector<IdentityId>& pool_labels, const std::string& metric,
         bool normalize, bool same_source) {
        const LabeledBatch a{anchors, anchor_labels};
        const LabeledBatch p{pool, pool_labels};
        std::vector<std::tuple<int, int, int>> out;
        for (const Triplet& t : mine_triplet_set(
                 a, p, p, metric_from_name(metric), normalize, same_source)) {
          out.emplace_back(t.anchor, t.positive, t.negative);
        }
        return out;
      },
      py::arg("anchors"), py::arg("anchor_labels"), py::arg("pool"),
      py::arg("pool_labels"), py::arg("metric") = "euclidean",
      py::arg("normalize") = false, py::arg("same_source") = true);

  // octuplet loss
  m.def(
      "octuplet_loss",
      [](const std::vector<Embedding>& hr, const std::vector<Embedding>& lr,
         const std::vector<IdentityId>& labels, const std::string& metric,
         double margin, bool normalize, const std::string& term_mask) {
        const PairedBatch batch = make_paired_batch(hr, lr, labels);
        return loss_to_dict(octuplet_loss(batch, metric_from_name(metric),
                                          Margin{margin}, normalize,
                                          TermMask::from_string(term_mask)));
      },
      py::arg("hr"), py::arg("lr"), py::arg("labels"),
      py::arg("metric") = "euclidean", py::arg("margin") = 25.0,
      py::arg("normalize") = false, py::arg("term_mask") = "hh,hl,lh,ll");
  m.def(
      "octuplet_loss_with_grad",
      [](const std::vector<Embedding>& hr, const std::vector<Embedding>& lr,
         const std::vector<IdentityId>& labels, const std::string& metric,
         double margin, bool normalize, const std::string& term_mask) {
        const PairedBatch batch = make_paired_batch(hr, lr, labels);
        const std::size_t dim = hr.empty() ? 0 : hr.front().size();
        std::vector<Embedding> grad_hr(hr.size(), Embedding(dim, 0.0));
        std::vector<Embedding> grad_lr(lr.size(), Embedding(dim, 0.0));
        const OctupletLoss loss = octuplet_loss_with_grad(
            batch, metric_from_name(metric), Margin{margin}, normalize,
            TermMask::from_string(term_mask), grad_hr, grad_lr);
        return py::make_tuple(loss_to_dict(loss), grad_hr, grad_lr);
      },
      py::arg("hr"), py::arg("lr"), py::arg("labels"),
      py::arg("metric") = "euclidean", py::arg("margin") = 25.0,
      py::arg("normalize") = false, py::arg("term_mask") = "hh,hl,lh,ll");

  // images
  m.attr("IMAGE_SIZE") = FaceImage::kSize;
  m.attr("IMAGE_CHANNELS") = FaceImage::kChannels;
  m.def(
      "degrade",
      [](const std::vector<double>& pixels, int r) {
        return degrade_image(image_from_pixels(pixels), r).pixels;
      },
      py::arg("pixels"), py::arg("r"),
      "bicubic down-sample to r x r and back to 112 x 112, clamped to [0,1]");
  m.def(
      "bicubic_resize",
      [](const std::vector<double>& src, int src_w, int src_h, int dst_w,
         int dst_h, int channels) {
        return bicubic_resize(src, src_w, src_h, dst_w, dst_h, channels);
      },
      py::arg("src"), py::arg("src_w"), py::arg("src_h"), py::arg("dst_w"),
      py::arg("dst_h"), py::arg("channels") = 3);
  m.def(
      "synth_face",
      [](std::uint64_t dataset_seed, int identity, int variant) {
        return synth_face(dataset_seed, identity, variant).pixels;
      },
      py::arg("dataset_seed"), py::arg("identity"), py::arg("variant"));

  // evaluation
  m.def(
      "roc_curve",
      [](const std::vector<double>& distances, const std::vector<bool>& genuine) {
        std::vector<std::pair<double, double>> out;
        for (const RocPoint& p : roc_curve(distances, genuine)) {
          out.emplace_back(p.far, p.tar);
        }
        return out;
      },
      py::arg("distances"), py::arg("genuine"));
  m.def(
      "equal_error_rate",
      [](const std::vector<std::pair<double, double>>& roc) {
        return equal_error_rate(roc_from_pairs(roc));
      },
      py::arg("roc"));
  m.def(
      "tar_at_far",
      [](const std::vector<std::pair<double, double>>& roc, double far) {
        return tar_at_far(roc_from_pairs(roc), far);
      },
      py::arg("roc"), py::arg("far"));
  m.def(
      "kfold_accuracy",
      [](const std::vector<double>& distances, const std::vector<bool>& genuine,
         const std::vector<int>& folds) {
        const KfoldResult r = kfold_accuracy(distances, genuine, folds);
        py::dict d;
        d["mean"] = r.mean;
        d["stddev"] = r.stddev;
        d["fold_accuracies"] = r.fold_accuracies;
        return d;
      },
      py::arg("distances"), py::arg("genuine"), py::arg("folds"));

  // backbone
  py::class_<ToyBackbone>(m, "ToyBackbone")
      .def(py::init([](int dim, int c1, int c2, int c3, int n_classes,
                       std::uint64_t seed) {
             return ToyBackbone({dim, c1, c2, c3, n_classes, seed});
           }),
           py::arg("dim") = 128, py::arg("c1") = 8, py::arg("c2") = 16,
           py::arg("c3") = 32, py::arg("n_classes") = 0, py::arg("seed") = 0)
      .def_property_readonly("dim", &ToyBackbone::dim)
      .def_property_readonly("parameter_count", &ToyBackbone::parameter_count)
      .def(
          "embed",
          [](const ToyBackbone& model, const std::vector<double>& pixels) {
            return model.embed(image_from_pixels(pixels));
          },
          py::arg("pixels"))
      .def("get_parameters",
           [](const ToyBackbone& model) {
             const auto p = model.parameters();
             return std::vector<double>(p.begin(), p.end());
           })
      .def(
          "set_parameters",
          [](ToyBackbone& model, const std::vector<double>& values) {
            auto p = model.parameters();
            if (values.size() != p.size()) {
              throw ShapeError("parameter count mismatch");
            }
            std::copy(values.begin(), values.end(), p.begin());
          },
          py::arg("values"))
      .def("save", &ToyBackbone::save, py::arg("path"))
      .def_static("load", &ToyBackbone::load, py::arg("path"));
}
