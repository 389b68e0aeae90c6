// Command-line driver: fine-tuning, evaluation, ablation grids, pair-protocol
// generation, image degradation, and report rendering.
//
// Exit codes: 0 success, 2 configuration error, 3 data error (I/O or
// protocol/shape violations), 4 numeric error (non-finite loss, degenerate
// embeddings).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "octo/dataset.hpp"
#include "octo/errors.hpp"
#include "octo/eval.hpp"
#include "octo/image.hpp"
#include "octo/net.hpp"
#include "octo/report.hpp"
#include "octo/synthetic.hpp"
#include "octo/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace octo;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(item, &pos);
      if (pos != item.size()) throw ConfigError("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad integer list entry: '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) throw ConfigError("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad number list entry: '" + item + "'");
    }
  }
  return out;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> split(const std::string& spec, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flat key=value config file: one pair per line, '#' comments, blank lines
// ignored. Keys are long option names without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_flat_config(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config file " + path + " line " +
                        std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config file " + path + " line " +
                        std::to_string(lineno) + ": empty key");
    }
    out.emplace_back(key, value);
  }
  return out;
}

// Expands --config FILE into --key=value arguments appended after the
// explicit ones; flags given on the command line win over file entries.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;
  for (const auto& [key, value] : read_flat_config(config_path)) {
    const std::string flag = "--" + key;
    const bool on_cli = std::any_of(
        args.begin(), args.end(), [&flag](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    if (!on_cli) args.push_back(flag + "=" + value);
  }
  return args;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory: " + path);
}

void write_json_file(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write: " + path);
  out << doc.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad JSON in ") + path + ": " + e.what());
  }
  return doc;
}

// Every artifact-producing subcommand drops a manifest next to its outputs
// holding the fully resolved configuration, seed included.
void write_manifest(const std::string& command, const json& cfg,
                    const std::string& path) {
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["command"] = command;
  doc["config"] = cfg;
  write_json_file(doc, path);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out;
  int identities = 50;
  int images_per_identity = 6;
  std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  if (a.identities < 1 || a.images_per_identity < 1) {
    throw ConfigError("synth: identities and images-per-identity must be >= 1");
  }
  SyntheticDatasetConfig cfg{a.identities, a.images_per_identity, a.seed};
  ensure_dir(a.out);
  write_synthetic_dataset(cfg, a.out);
  json j{{"out", a.out},
         {"identities", a.identities},
         {"images_per_identity", a.images_per_identity},
         {"seed", a.seed}};
  write_manifest("synth", j, (fs::path(a.out) / "manifest.json").string());
  std::cout << "wrote " << a.identities * a.images_per_identity
            << " images to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// pairs

struct PairsArgs {
  std::string data;
  std::string out;
  std::string from_lfw;
  int genuine = 300;
  int imposter = 300;
  int folds = 10;
  std::uint64_t seed = 0;
};

int run_pairs(const PairsArgs& a) {
  PairProtocol protocol;
  json cfg{{"out", a.out}, {"seed", a.seed}};
  if (!a.from_lfw.empty()) {
    protocol = read_lfw_pairs(a.from_lfw);
    cfg["from_lfw"] = a.from_lfw;
  } else {
    if (a.data.empty()) throw ConfigError("pairs: --data or --from-lfw required");
    const IdentityPool pool = scan_dataset(a.data);
    protocol = generate_pairs(pool, a.genuine, a.imposter, a.folds, a.seed);
    cfg["data"] = a.data;
    cfg["genuine"] = a.genuine;
    cfg["imposter"] = a.imposter;
    cfg["folds"] = a.folds;
  }
  if (const fs::path parent = fs::path(a.out).parent_path(); !parent.empty()) {
    ensure_dir(parent.string());
  }
  write_protocol(protocol, a.out);
  write_manifest("pairs", cfg, a.out + ".manifest.json");
  std::cout << "wrote " << protocol.pairs.size() << " pairs to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// degrade

struct DegradeArgs {
  std::string in;
  std::string out;
  std::string resolutions = "7";
  std::uint64_t seed = 0;
};

int run_degrade(const DegradeArgs& a) {
  const std::vector<int> resolutions = parse_int_list(a.resolutions);
  if (resolutions.empty()) throw ConfigError("degrade: empty resolution list");
  if (!fs::is_directory(a.in)) throw IoError("not a directory: " + a.in);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(a.in)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(fs::relative(entry.path(), a.in));
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .png files under " + a.in);

  ResolutionSampler sampler{resolutions, a.seed};
  for (std::size_t i = 0; i < files.size(); ++i) {
    const int r = resolutions.size() == 1 ? resolutions[0] : sampler.draw(i);
    const FaceImage img = read_png((fs::path(a.in) / files[i]).string());
    const fs::path dst = fs::path(a.out) / files[i];
    ensure_dir(dst.parent_path().string());
    write_png(degrade_image(img, r), dst.string());
  }
  json cfg{{"in", a.in},
           {"out", a.out},
           {"resolutions", resolutions},
           {"seed", a.seed},
           {"images", files.size()}};
  write_manifest("degrade", cfg, (fs::path(a.out) / "manifest.json").string());
  std::cout << "degraded " << files.size() << " images into " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// finetune

struct TrainArgs {
  std::string data;
  std::string checkpoint;  // empty = fresh model below
  std::string out;
  std::string protocol;    // optional validation pairs

  // fresh-model shape (ignored when --checkpoint is given)
  int dim = 128, c1 = 8, c2 = 16, c3 = 32;
  std::uint64_t model_seed = 0;

  std::string preset;
  std::string optimizer = "adagrad";
  double lr = 0.01;
  double epsilon = 1.0;
  std::string lr_decay = "2,4,5";
  int epochs = 6;
  int batch_size = 64;
  double margin = 25.0;
  std::string metric = "euclidean";
  bool normalize = false;
  std::string term_mask = "hh,hl,lh,ll";
  std::string resolutions = "7,14,28";
  std::uint64_t seed = 0;
  int validations_per_epoch = 4;
  bool no_flip = false;
  double jitter_lo = 0.8;
  double jitter_hi = 1.2;
};

// Resolves the preset (when given) and applies only the flags the user
// actually set on top of it; `given` reports whether a flag was provided.
FineTuneConfig resolve_train_config(const TrainArgs& a,
                                    const std::function<bool(const std::string&)>& given) {
  FineTuneConfig cfg = a.preset.empty() ? FineTuneConfig{} : preset_config(a.preset);
  cfg.preset = a.preset;
  if (a.preset.empty() || given("--optimizer"))
    cfg.optimizer = optimizer_from_name(a.optimizer);
  if (a.preset.empty() || given("--lr")) cfg.learning_rate = a.lr;
  if (a.preset.empty() || given("--epsilon")) cfg.epsilon = a.epsilon;
  if (a.preset.empty() || given("--lr-decay"))
    cfg.lr_decay_epochs = parse_int_list(a.lr_decay);
  if (a.preset.empty() || given("--epochs")) cfg.epochs = a.epochs;
  if (a.preset.empty() || given("--batch-size")) cfg.batch_size = a.batch_size;
  cfg.margin = a.margin;
  cfg.metric = metric_from_name(a.metric);
  cfg.normalize = a.normalize;
  cfg.term_mask = TermMask::from_string(a.term_mask);
  cfg.resolutions = parse_int_list(a.resolutions);
  cfg.seed = a.seed;
  cfg.validations_per_epoch = a.validations_per_epoch;
  cfg.augment.horizontal_flip = !a.no_flip;
  cfg.augment.jitter_lo = a.jitter_lo;
  cfg.augment.jitter_hi = a.jitter_hi;
  cfg.validate();
  return cfg;
}

json train_config_to_json(const FineTuneConfig& cfg) {
  return json{{"preset", cfg.preset},
              {"optimizer", optimizer_name(cfg.optimizer)},
              {"learning_rate", cfg.learning_rate},
              {"epsilon", cfg.epsilon},
              {"lr_decay_epochs", cfg.lr_decay_epochs},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"margin", cfg.margin},
              {"metric", metric_name(cfg.metric)},
              {"normalize", cfg.normalize},
              {"term_mask", cfg.term_mask.to_string()},
              {"resolutions", cfg.resolutions},
              {"seed", cfg.seed},
              {"validations_per_epoch", cfg.validations_per_epoch},
              {"horizontal_flip", cfg.augment.horizontal_flip},
              {"jitter_lo", cfg.augment.jitter_lo},
              {"jitter_hi", cfg.augment.jitter_hi}};
}

ToyBackbone make_model(const TrainArgs& a) {
  if (!a.checkpoint.empty()) return ToyBackbone::load(a.checkpoint);
  ToyBackbone::Config mc;
  mc.dim = a.dim;
  mc.c1 = a.c1;
  mc.c2 = a.c2;
  mc.c3 = a.c3;
  mc.seed = a.model_seed;
  return ToyBackbone(mc);
}

int run_finetune(const TrainArgs& a,
                 const std::function<bool(const std::string&)>& given) {
  const FineTuneConfig cfg = resolve_train_config(a, given);
  const IdentityPool pool = scan_dataset(a.data);
  const FileImageProvider provider(a.data);

  PairProtocol protocol;
  const PairProtocol* protocol_ptr = nullptr;
  if (!a.protocol.empty()) {
    protocol = read_protocol(a.protocol);
    protocol_ptr = &protocol;
  }

  ToyBackbone model = make_model(a);

  json run_cfg = train_config_to_json(cfg);
  run_cfg["data"] = a.data;
  run_cfg["checkpoint"] = a.checkpoint;
  run_cfg["protocol"] = a.protocol;
  run_cfg["out"] = a.out;

  ensure_dir(a.out);
  FineTuneResult result;
  try {
    result = fine_tune(model, pool, provider, protocol_ptr, cfg);
  } catch (const NumericError& e) {
    // Diagnostic dump so a failed run is still inspectable.
    json dump{{"error", e.what()}, {"config", run_cfg}};
    write_json_file(dump, (fs::path(a.out) / "numeric_failure.json").string());
    throw;
  }

  result.history.write_csv((fs::path(a.out) / "history.csv").string(),
                           cfg.term_mask);
  model.save((fs::path(a.out) / "checkpoint.json").string());
  if (result.best_validation >= 0.0) {
    ToyBackbone best = model;
    std::copy(result.best_parameters.begin(), result.best_parameters.end(),
              best.parameters().begin());
    best.save((fs::path(a.out) / "best_checkpoint.json").string());
    run_cfg["best_validation"] = result.best_validation;
  }
  run_cfg["epoch_mean_loss"] = result.history.epoch_mean_loss;
  write_manifest("finetune", run_cfg,
                 (fs::path(a.out) / "manifest.json").string());
  std::cout << "fine-tuned " << cfg.epochs << " epochs, "
            << result.history.steps.size() << " steps; final epoch mean loss "
            << (result.history.epoch_mean_loss.empty()
                    ? 0.0
                    : result.history.epoch_mean_loss.back())
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string protocol;
  std::string out;
  std::string mode = "cross";
  std::string resolutions = "7,14,28,56,112";
  bool plots = false;
};

VerificationReport evaluate_with(const ToyBackbone& model,
                                 const ImageProvider& provider,
                                 const PairProtocol& protocol,
                                 const std::string& mode,
                                 const std::vector<int>& resolutions) {
  const Embedder embed = [&model](const FaceImage& img) {
    return model.embed(img);
  };
  if (mode == "cross")
    return evaluate_cross_resolution(embed, provider, protocol, resolutions);
  if (mode == "same")
    return evaluate_same_resolution(embed, provider, protocol, resolutions);
  throw ConfigError("evaluate: mode must be 'cross' or 'same', got '" + mode +
                    "'");
}

void emit_report_artifacts(const VerificationReport& report,
                           const json& run_cfg, const std::string& out,
                           bool plots) {
  ensure_dir(out);
  write_report_json(report, run_cfg, (fs::path(out) / "report.json").string());
  write_report_csv(report, (fs::path(out) / "report.csv").string());
  for (const auto& row : report.rows) {
    write_roc_csv(row, (fs::path(out) / ("roc_r" + std::to_string(row.resolution) +
                                         ".csv"))
                           .string());
  }
  if (plots) {
    write_accuracy_plot_svg(report, (fs::path(out) / "accuracy.svg").string());
    write_roc_plot_svg(report, (fs::path(out) / "roc.svg").string());
  }
}

int run_evaluate(const EvalArgs& a) {
  const std::vector<int> resolutions = parse_int_list(a.resolutions);
  if (resolutions.empty()) throw ConfigError("evaluate: empty resolution list");
  const ToyBackbone model = ToyBackbone::load(a.checkpoint);
  const FileImageProvider provider(a.data);
  const PairProtocol protocol = read_protocol(a.protocol);

  json run_cfg{{"checkpoint", a.checkpoint}, {"data", a.data},
               {"protocol", a.protocol},     {"mode", a.mode},
               {"resolutions", resolutions}, {"out", a.out},
               {"seed", model.config().seed}};
  const VerificationReport report =
      evaluate_with(model, provider, protocol, a.mode, resolutions);
  emit_report_artifacts(report, run_cfg, a.out, a.plots);
  for (const auto& row : report.rows) {
    std::cout << a.mode << " r=" << row.resolution << " accuracy "
              << row.accuracy_mean << " eer " << row.eer << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
  TrainArgs train;
  std::string protocol;  // evaluation pairs (also used for validation)
  std::string eval_resolutions = "7,14,28,56,112";
  std::string mode = "cross";
  std::string mask_grid;       // semicolon-separated term masks
  std::string margin_grid;     // comma-separated margins
  std::string batch_grid;      // comma-separated batch sizes
  std::string metric_grid;     // comma-separated metric names
  std::string normalize_grid;  // comma-separated 0/1
  bool plots = false;
};

struct AblationCell {
  FineTuneConfig cfg;
  std::string label;
};

std::vector<AblationCell> build_grid(const AblateArgs& a,
                                     const FineTuneConfig& base) {
  const std::vector<std::string> masks =
      a.mask_grid.empty() ? std::vector<std::string>{base.term_mask.to_string()}
                          : split(a.mask_grid, ';');
  const std::vector<double> margins =
      a.margin_grid.empty() ? std::vector<double>{base.margin}
                            : parse_double_list(a.margin_grid);
  const std::vector<int> batches =
      a.batch_grid.empty() ? std::vector<int>{base.batch_size}
                           : parse_int_list(a.batch_grid);
  const std::vector<std::string> metrics =
      a.metric_grid.empty() ? std::vector<std::string>{metric_name(base.metric)}
                            : split(a.metric_grid, ',');
  std::vector<bool> normalizes;
  if (a.normalize_grid.empty()) {
    normalizes.push_back(base.normalize);
  } else {
    for (int v : parse_int_list(a.normalize_grid)) normalizes.push_back(v != 0);
  }

  std::vector<AblationCell> cells;
  for (const auto& mask : masks) {
    for (double margin : margins) {
      for (int batch : batches) {
        for (const auto& metric : metrics) {
          for (bool norm : normalizes) {
            AblationCell cell;
            cell.cfg = base;
            cell.cfg.term_mask =
                mask == "none" ? TermMask{false, false, false, false}
                               : TermMask::from_string(mask);
            cell.cfg.margin = margin;
            cell.cfg.batch_size = batch;
            cell.cfg.metric = metric_from_name(metric);
            cell.cfg.normalize = norm;
            cell.cfg.validate();
            cell.label = "mask=" + cell.cfg.term_mask.to_string() +
                         " margin=" + fmt_num(margin) +
                         " batch=" + std::to_string(batch) + " metric=" + metric +
                         (norm ? " norm" : "");
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

void append_ablation_row(std::ofstream& csv, const std::string& name,
                         const FineTuneConfig* cfg,
                         const VerificationReport& report) {
  csv << name << ',' << (cfg ? '"' + cfg->term_mask.to_string() + '"' : std::string())
      << ',' << (cfg ? fmt_num(cfg->margin) : "") << ','
      << (cfg ? std::to_string(cfg->batch_size) : "") << ','
      << (cfg ? metric_name(cfg->metric) : "") << ','
      << (cfg ? std::to_string(cfg->normalize) : "");
  for (const auto& row : report.rows) csv << ',' << row.accuracy_mean;
  for (const auto& row : report.rows) csv << ',' << row.eer;
  csv << '\n';
}

int run_ablate(const AblateArgs& a,
               const std::function<bool(const std::string&)>& given) {
  if (a.train.checkpoint.empty()) {
    throw ConfigError("ablate: --checkpoint (the common starting model) is required");
  }
  const FineTuneConfig base = resolve_train_config(a.train, given);
  const std::vector<int> eval_res = parse_int_list(a.eval_resolutions);
  if (eval_res.empty()) throw ConfigError("ablate: empty eval resolution list");

  const IdentityPool pool = scan_dataset(a.train.data);
  const FileImageProvider provider(a.train.data);
  const PairProtocol protocol = read_protocol(a.protocol);
  const std::vector<AblationCell> cells = build_grid(a, base);

  ensure_dir(a.train.out);
  std::ofstream csv(fs::path(a.train.out) / "ablation.csv");
  if (!csv) throw IoError("cannot write ablation.csv");
  csv << "cell,term_mask,margin,batch_size,metric,normalize";
  for (int r : eval_res) csv << ",accuracy_r" << r;
  for (int r : eval_res) csv << ",eer_r" << r;
  csv << '\n';

  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["mode"] = a.mode;
  doc["eval_resolutions"] = eval_res;
  doc["base_config"] = train_config_to_json(base);
  doc["base_config"]["data"] = a.train.data;
  doc["base_config"]["checkpoint"] = a.train.checkpoint;
  doc["base_config"]["protocol"] = a.protocol;

  // Baseline: the starting checkpoint evaluated as-is.
  {
    const ToyBackbone baseline = ToyBackbone::load(a.train.checkpoint);
    const VerificationReport report =
        evaluate_with(baseline, provider, protocol, a.mode, eval_res);
    append_ablation_row(csv, "baseline", nullptr, report);
    doc["baseline"] = report_to_json(report, doc["base_config"]);
  }

  json cell_docs = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const AblationCell& cell = cells[i];
    ToyBackbone model = ToyBackbone::load(a.train.checkpoint);
    const std::string cell_dir =
        (fs::path(a.train.out) / ("cell_" + std::to_string(i))).string();
    ensure_dir(cell_dir);

    json cell_cfg = train_config_to_json(cell.cfg);
    cell_cfg["data"] = a.train.data;
    cell_cfg["checkpoint"] = a.train.checkpoint;
    cell_cfg["protocol"] = a.protocol;
    cell_cfg["cell"] = i;

    FineTuneResult result;
    try {
      result = fine_tune(model, pool, provider, &protocol, cell.cfg);
    } catch (const NumericError& e) {
      json dump{{"error", e.what()}, {"config", cell_cfg}};
      write_json_file(dump,
                      (fs::path(cell_dir) / "numeric_failure.json").string());
      throw;
    }
    result.history.write_csv((fs::path(cell_dir) / "history.csv").string(),
                             cell.cfg.term_mask);
    model.save((fs::path(cell_dir) / "checkpoint.json").string());

    const VerificationReport report =
        evaluate_with(model, provider, protocol, a.mode, eval_res);
    emit_report_artifacts(report, cell_cfg, cell_dir, a.plots);
    append_ablation_row(csv, "cell_" + std::to_string(i), &cell.cfg, report);

    json cd = report_to_json(report, cell_cfg);
    cd["label"] = cell.label;
    cell_docs.push_back(std::move(cd));
    std::cout << "cell " << i << " (" << cell.label << ") done\n";
  }
  doc["cells"] = std::move(cell_docs);
  write_json_file(doc, (fs::path(a.train.out) / "ablation.json").string());
  write_manifest("ablate", doc["base_config"],
                 (fs::path(a.train.out) / "manifest.json").string());
  std::cout << "ablation grid of " << cells.size() << " cells written to "
            << a.train.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string in;
  std::string out;
  bool plots = true;
};

int run_report(const ReportArgs& a) {
  const json doc = read_json_file(a.in);
  const VerificationReport report = report_from_json(doc);
  json run_cfg = doc.contains("config") ? doc["config"] : json::object();
  run_cfg["rendered_from"] = a.in;
  emit_report_artifacts(report, run_cfg, a.out, a.plots);
  std::cout << "rendered " << report.rows.size() << " rows from " << a.in
            << " into " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"octuplet-loss cross-resolution face verification toolkit"};
  app.require_subcommand(1);
  // The config file is expanded into arguments up front; the option itself
  // exists so it parses and shows up in --help.
  static std::string config_file;

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "materialize a synthetic face dataset");
  synth_cmd->add_option("--out", synth.out, "output dataset directory")->required();
  synth_cmd->add_option("--identities", synth.identities, "identity count");
  synth_cmd->add_option("--images-per-identity", synth.images_per_identity,
                        "images per identity");
  synth_cmd->add_option("--seed", synth.seed, "dataset seed");
  synth_cmd->add_option("--config", config_file, "flat key=value config file (flags override it)");

  PairsArgs pairs;
  CLI::App* pairs_cmd =
      app.add_subcommand("pairs", "generate or convert a verification pair protocol");
  pairs_cmd->add_option("--data", pairs.data, "dataset root (identity dirs)");
  pairs_cmd->add_option("--out", pairs.out, "output protocol TSV")->required();
  pairs_cmd->add_option("--from-lfw", pairs.from_lfw,
                        "convert an LFW-style pairs.txt instead of generating");
  pairs_cmd->add_option("--genuine", pairs.genuine, "genuine pair count");
  pairs_cmd->add_option("--imposter", pairs.imposter, "imposter pair count");
  pairs_cmd->add_option("--folds", pairs.folds, "fold count");
  pairs_cmd->add_option("--seed", pairs.seed, "protocol seed");
  pairs_cmd->add_option("--config", config_file, "flat key=value config file (flags override it)");

  DegradeArgs degrade;
  CLI::App* degrade_cmd =
      app.add_subcommand("degrade", "degrade-restore a directory of PNG images");
  degrade_cmd->add_option("--in", degrade.in, "input image directory")->required();
  degrade_cmd->add_option("--out", degrade.out, "output directory")->required();
  degrade_cmd->add_option("--resolutions", degrade.resolutions,
                          "resolution r, or comma list sampled per image");
  degrade_cmd->add_option("--seed", degrade.seed, "sampler seed");
  degrade_cmd->add_option("--config", config_file, "flat key=value config file (flags override it)");

  auto add_train_options = [](CLI::App* cmd, TrainArgs& t) {
    cmd->add_option("--data", t.data, "training dataset root")->required();
    cmd->add_option("--checkpoint", t.checkpoint, "starting model checkpoint");
    cmd->add_option("--out", t.out, "output directory")->required();
    cmd->add_option("--dim", t.dim, "embedding dim for a fresh model");
    cmd->add_option("--c1", t.c1, "stage-1 channels for a fresh model");
    cmd->add_option("--c2", t.c2, "stage-2 channels for a fresh model");
    cmd->add_option("--c3", t.c3, "stage-3 channels for a fresh model");
    cmd->add_option("--model-seed", t.model_seed, "fresh model init seed");
    cmd->add_option("--preset", t.preset,
                    "hyperparameter preset: adagrad-default, sgd-magface, "
                    "adamw-transformer");
    cmd->add_option("--optimizer", t.optimizer, "sgd, adagrad, or adamw");
    cmd->add_option("--lr", t.lr, "base learning rate");
    cmd->add_option("--epsilon", t.epsilon, "optimizer epsilon");
    cmd->add_option("--lr-decay", t.lr_decay,
                    "epochs after which lr divides by 10 (comma list)");
    cmd->add_option("--epochs", t.epochs, "training epochs");
    cmd->add_option("--batch-size", t.batch_size, "batch size (even)");
    cmd->add_option("--margin", t.margin, "triplet margin");
    cmd->add_option("--metric", t.metric,
                    "cosine, euclidean, or squared-euclidean");
    cmd->add_flag("--normalize", t.normalize, "L2-normalize embeddings");
    cmd->add_option("--term-mask", t.term_mask,
                    "active loss terms, e.g. hh,hl,lh,ll");
    cmd->add_option("--resolutions", t.resolutions,
                    "degradation resolutions sampled per image");
    cmd->add_option("--seed", t.seed, "training run seed");
    cmd->add_option("--validations-per-epoch", t.validations_per_epoch,
                    "validation passes per epoch (0 disables)");
    cmd->add_flag("--no-flip", t.no_flip, "disable horizontal flip");
    cmd->add_option("--jitter-lo", t.jitter_lo, "brightness/saturation low factor");
    cmd->add_option("--jitter-hi", t.jitter_hi, "brightness/saturation high factor");
    cmd->add_option("--config", config_file, "flat key=value config file (flags override it)");
  };

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("finetune", "octuplet-loss fine-tuning run");
  add_train_options(train_cmd, train);
  train_cmd->add_option("--protocol", train.protocol,
                        "validation pair protocol TSV");

  EvalArgs eval;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "cross/same-resolution verification report");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "model checkpoint")
      ->required();
  eval_cmd->add_option("--data", eval.data, "dataset root")->required();
  eval_cmd->add_option("--protocol", eval.protocol, "pair protocol TSV")
      ->required();
  eval_cmd->add_option("--out", eval.out, "output directory")->required();
  eval_cmd->add_option("--mode", eval.mode, "cross or same");
  eval_cmd->add_option("--resolutions", eval.resolutions,
                       "comma list of probe resolutions");
  eval_cmd->add_flag("--plots", eval.plots, "also write SVG plots");
  eval_cmd->add_option("--config", config_file, "flat key=value config file (flags override it)");

  AblateArgs ablate;
  CLI::App* ablate_cmd = app.add_subcommand(
      "ablate", "fine-tune + evaluate over a hyperparameter grid");
  add_train_options(ablate_cmd, ablate.train);
  ablate_cmd->add_option("--protocol", ablate.protocol,
                         "evaluation pair protocol TSV")
      ->required();
  ablate_cmd->add_option("--eval-resolutions", ablate.eval_resolutions,
                         "comma list of evaluation resolutions");
  ablate_cmd->add_option("--mode", ablate.mode, "cross or same");
  ablate_cmd->add_option("--mask-grid", ablate.mask_grid,
                         "semicolon-separated term masks, e.g. 'hh,hl,lh,ll;ll'");
  ablate_cmd->add_option("--margin-grid", ablate.margin_grid,
                         "comma-separated margins");
  ablate_cmd->add_option("--batch-grid", ablate.batch_grid,
                         "comma-separated batch sizes");
  ablate_cmd->add_option("--metric-grid", ablate.metric_grid,
                         "comma-separated metric names");
  ablate_cmd->add_option("--normalize-grid", ablate.normalize_grid,
                         "comma-separated 0/1 normalization settings");
  ablate_cmd->add_flag("--plots", ablate.plots, "also write per-cell SVG plots");

  ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "re-render tables and plots from an existing report.json");
  report_cmd->add_option("--in", report.in, "input report.json")->required();
  report_cmd->add_option("--out", report.out, "output directory")->required();
  report_cmd->add_flag("!--no-plots", report.plots, "skip SVG plots");
  report_cmd->add_option("--config", config_file, "flat key=value config file (flags override it)");

  std::vector<std::string> args;
  try {
    args = expand_config_args(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*pairs_cmd) return run_pairs(pairs);
    if (*degrade_cmd) return run_degrade(degrade);
    if (*train_cmd) {
      return run_finetune(train, [&](const std::string& name) {
        return train_cmd->count(name) > 0;
      });
    }
    if (*eval_cmd) return run_evaluate(eval);
    if (*ablate_cmd) {
      return run_ablate(ablate, [&](const std::string& name) {
        return ablate_cmd->count(name) > 0;
      });
    }
    if (*report_cmd) return run_report(report);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DomainError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ProtocolError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
