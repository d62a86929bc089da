// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "ulite/checkpoint.hpp"
#include "ulite/data.hpp"
#include "ulite/metrics.hpp"
#include "ulite/model.hpp"
#include "ulite/parallel.hpp"
#include "ulite/train.hpp"

namespace fs = std::filesystem;

namespace ulite::cli {

namespace {

/// Bad flag combinations detected after parsing; reported with usage text.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::string config;
  int threads = 0;
  std::string variant;
  std::size_t n = 0;
  bool no_addc = false;
  CLI::App* app = nullptr;

  bool seed_given() const { return app->count("--seed") > 0; }

  ModelConfig model_config() const {
    ModelConfig cfg = config.empty() ? ModelConfig{} : load_config(config);
    if (seed_given()) cfg.seed = seed;
    if (!variant.empty()) cfg.dw_variant = parse_dw_variant(variant);
    if (n != 0) cfg.n = n;
    if (no_addc) cfg.addc = false;
    cfg.validate();
    return cfg;
  }
  void apply_threads() const {
    if (threads > 0) set_num_threads(threads);
  }
};

void add_common(CLI::App* sub, Common& c, bool model_overrides = true) {
  c.app = sub;
  sub->add_option("--seed", c.seed, "Seed for initialisation, shuffling, augmentation and synthetic data");
  sub->add_option("--config", c.config, "Architecture config file (key = value lines)");
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on this)")->check(CLI::NonNegativeNumber);
  if (model_overrides) {
    sub->add_option("--variant", c.variant, "Depthwise operator: axial or square")
        ->check(CLI::IsMember({"axial", "square"}));
    sub->add_option("--n", c.n, "Kernel length (odd)");
    sub->add_flag("--no-addc", c.no_addc, "Replace the dilated bottleneck branches with one 7-tap axial pair");
  }
}

struct DataOpts {
  std::string data_dir;
  std::size_t synthetic = 0;
  std::size_t size = 256;
  double val_split = 0.1;
  CLI::App* app = nullptr;

  bool has_dir() const { return app->count("--data-dir") > 0; }
  bool has_synth() const { return app->count("--synthetic") > 0; }
  void require_one() const {
    if (has_dir() == has_synth()) throw UsageError("exactly one of --data-dir or --synthetic is required");
    if (has_synth() && synthetic == 0) throw UsageError("--synthetic needs a count >= 1");
  }
};

void add_data(CLI::App* sub, DataOpts& d, std::size_t default_size) {
  d.app = sub;
  d.size = default_size;
  sub->add_option("--data-dir", d.data_dir, "Dataset root (images/, masks/, optional manifest.csv)");
  sub->add_option("--synthetic", d.synthetic, "Generate N synthetic pairs instead of reading files");
  sub->add_option("--size", d.size, "Square input size, a multiple of 64")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--val-split", d.val_split, "Validation fraction when no split is recorded")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

struct Splits {
  std::vector<SamplePair> train, val, test, all;
};

Splits load_data(const DataOpts& d, std::uint64_t seed) {
  Splits s;
  DatasetManifest manifest;
  std::vector<SamplePair> pairs;
  if (d.has_synth()) {
    pairs = synth_dataset(d.synthetic, seed, d.size);
    for (const auto& p : pairs) manifest.entries.push_back({p.id, {}, {}, Split::unassigned});
  } else {
    manifest = scan_dataset(d.data_dir);
    if (manifest.entries.empty()) throw IoError("dataset '" + d.data_dir + "' has no samples");
    pairs = load_samples(manifest, manifest.entries, d.size);
  }
  const bool recorded = std::any_of(manifest.entries.begin(), manifest.entries.end(),
                                    [](const ManifestEntry& e) { return e.split != Split::unassigned; });
  if (!recorded) manifest = make_splits(manifest, {1.0 - d.val_split, d.val_split, 0.0}, seed);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    switch (manifest.entries[i].split) {
      case Split::train: s.train.push_back(pairs[i]); break;
      case Split::val: s.val.push_back(pairs[i]); break;
      case Split::test: s.test.push_back(pairs[i]); break;
      case Split::unassigned: break;
    }
  }
  s.all = std::move(pairs);
  return s;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  write_file_atomic(path, text);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lightweight axial-depthwise segmentation network: training, evaluation and analysis"};
  app.name(args.empty() ? "ulite" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  // train
  Common train_c;
  DataOpts train_d;
  TrainConfig tcfg;
  std::string train_out = "ulite.ckpt", train_log;
  bool no_augment = false, no_timing = false, quiet = false;
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint plus CSV log");
  add_common(train, train_c);
  add_data(train, train_d, 256);
  train->add_option("--epochs", tcfg.epochs, "Epochs")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--lr", tcfg.lr, "Adam learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--batch", tcfg.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--eval-every", tcfg.eval_every, "Score Dice/IoU every k epochs")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--out", train_out, "Checkpoint path")->capture_default_str();
  train->add_option("--log", train_log, "Training log CSV (default: <out>.log.csv)");
  train->add_flag("--no-augment", no_augment, "Disable rotation and flips");
  train->add_flag("--no-timing", no_timing, "Write 0 in the seconds column");
  train->add_flag("--quiet", quiet, "Do not echo per-epoch rows");

  // eval
  Common eval_c;
  DataOpts eval_d;
  EvalOptions eopts;
  std::string eval_ckpt, eval_split = "all", eval_out, eval_masks;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint with Dice and IoU");
  add_common(eval, eval_c);
  add_data(eval, eval_d, 256);
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint to evaluate")->required();
  eval->add_option("--split", eval_split, "Which split to score")->capture_default_str()
      ->check(CLI::IsMember({"all", "train", "val", "test"}));
  eval->add_option("--out", eval_out, "Report CSV path (default: stdout)");
  eval->add_option("--masks-dir", eval_masks, "Also write predicted masks as PNG");
  eval->add_option("--threshold", eopts.threshold, "Binarization threshold")->capture_default_str();
  eval->add_flag("--global", eopts.global, "Pool confusion counts over the whole split");
  eval->add_flag("--strict-eq", eopts.strict, "Smoothing term in denominators only");

  // predict
  Common pred_c;
  std::string pred_ckpt, pred_in, pred_out;
  std::size_t pred_size = 256;
  double pred_thr = 0.5;
  auto* predict = app.add_subcommand("predict", "Write one binary mask PNG per input image");
  add_common(predict, pred_c);
  predict->add_option("--ckpt", pred_ckpt, "Checkpoint")->required();
  predict->add_option("--data-dir", pred_in, "Directory of PNG images, or a dataset root with images/")->required();
  predict->add_option("--out", pred_out, "Output directory")->required();
  predict->add_option("--size", pred_size, "Square input size")->capture_default_str()->check(CLI::PositiveNumber);
  predict->add_option("--threshold", pred_thr, "Binarization threshold")->capture_default_str();

  // params
  Common params_c;
  auto* params = app.add_subcommand("params", "Print the per-layer learnable parameter table");
  add_common(params, params_c);

  // ablate
  Common abl_c;
  DataOpts abl_d;
  TrainConfig acfg;
  acfg.epochs = 2;
  acfg.batch_size = 4;
  std::string abl_out;
  std::vector<std::string> abl_only;
  bool abl_no_aug = false;
  auto* ablate = app.add_subcommand("ablate", "Train every grid variant briefly and report params/Dice/IoU");
  add_common(ablate, abl_c, false);
  add_data(ablate, abl_d, 64);
  ablate->add_option("--epochs", acfg.epochs, "Epochs per variant")->capture_default_str()->check(CLI::PositiveNumber);
  ablate->add_option("--lr", acfg.lr, "Adam learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  ablate->add_option("--batch", acfg.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  ablate->add_option("--only", abl_only, "Restrict to these variant names, e.g. axial-n7-addc");
  ablate->add_option("--out", abl_out, "CSV path (default: stdout)");
  ablate->add_flag("--no-augment", abl_no_aug, "Disable rotation and flips");

  // footprint
  Common fp_c;
  int fp_dilation = 0;
  auto* footprint = app.add_subcommand("footprint", "Show the input-gradient support of one module");
  add_common(footprint, fp_c);
  footprint->add_option("--branch-dilation", fp_dilation, "Show one bottleneck branch (d = 1, 2 or 3) instead")
      ->check(CLI::Range(1, 3));

  // synth
  Common syn_c;
  std::size_t syn_count = 8, syn_size = 256;
  std::string syn_out;
  auto* synth = app.add_subcommand("synth", "Write the synthetic dataset as PNGs plus manifest.csv");
  add_common(synth, syn_c, false);
  synth->add_option("--count", syn_count, "Number of pairs")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--size", syn_size, "Square image size")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--out", syn_out, "Dataset root to create")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("ulite");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == train) {
      train_d.require_one();
      train_c.apply_threads();
      const ModelConfig cfg = train_c.model_config();
      const Splits data = load_data(train_d, train_c.seed);
      if (data.train.empty()) throw InvalidInputError("no training samples after splitting");
      tcfg.seed = train_c.seed;
      tcfg.checkpoint_path = train_out;
      tcfg.log_path = train_log.empty() ? train_out + ".log.csv" : train_log;
      tcfg.record_time = !no_timing;
      if (no_augment) tcfg.augment = AugmentConfig::none();
      ULiteModel<float> model(cfg);
      if (!quiet) out << kTrainLogHeader << "\n";
      const TrainResult r = train_loop(model, data.train, data.val, tcfg, [&](const EpochStats& s) {
        if (!quiet) out << format_log_row(s) << std::endl;
      });
      out << "checkpoint " << train_out << " (best dice " << fmt("%.6f", r.best_dice) << " at epoch "
          << r.best_epoch << ")\n";
    } else if (active == eval) {
      eval_d.require_one();
      eval_c.apply_threads();
      const ModelConfig cfg = eval_c.model_config();
      const ULiteModel<float> model = load_checkpoint(eval_ckpt, cfg);
      const Splits data = load_data(eval_d, eval_c.seed);
      const std::vector<SamplePair>& set = eval_split == "train" ? data.train
                                           : eval_split == "val" ? data.val
                                           : eval_split == "test" ? data.test
                                                                  : data.all;
      if (set.empty()) throw InvalidInputError("split '" + eval_split + "' is empty");
      eopts.keep_masks = !eval_masks.empty();
      const EvalReport rep = evaluate(model, set, eopts);
      write_text(eval_out, rep.csv(), out);
      if (!eval_masks.empty()) {
        fs::create_directories(eval_masks);
        for (std::size_t i = 0; i < rep.masks.size(); ++i)
          write_png((fs::path(eval_masks) / (rep.samples[i].id + ".png")).string(), mask_to_image(rep.masks[i]));
      }
      if (!eval_out.empty() && eval_out != "-")
        out << "dice " << fmt("%.6f", rep.dice) << " iou " << fmt("%.6f", rep.iou) << "\n";
    } else if (active == predict) {
      pred_c.apply_threads();
      const ModelConfig cfg = pred_c.model_config();
      const ULiteModel<float> model = load_checkpoint(pred_ckpt, cfg);
      fs::path dir = pred_in;
      if (fs::is_directory(dir / "images")) dir /= "images";
      if (!fs::is_directory(dir)) throw IoError("input directory '" + pred_in + "' does not exist");
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) throw IoError("no PNG images in '" + dir.string() + "'");
      fs::create_directories(pred_out);
      for (const auto& f : files) {
        const Tensor mask = binarize(model.infer(load_image(f.string(), pred_size)), pred_thr);
        const fs::path dst = fs::path(pred_out) / (f.stem().string() + ".png");
        write_png(dst.string(), mask_to_image(mask));
        out << dst.string() << "\n";
      }
    } else if (active == params) {
      const ModelConfig cfg = params_c.model_config();
      out << "variant " << cfg.variant_name() << "\n" << count_params(cfg).render();
    } else if (active == ablate) {
      abl_d.require_one();
      abl_c.apply_threads();
      const ModelConfig base = abl_c.model_config();
      const Splits data = load_data(abl_d, abl_c.seed);
      if (data.train.empty()) throw InvalidInputError("no training samples after splitting");
      acfg.seed = abl_c.seed;
      acfg.record_time = false;
      acfg.eval_every = acfg.epochs;
      if (abl_no_aug) acfg.augment = AugmentConfig::none();
      std::string csv = "variant,operator,n,addc,params,dice,iou\n";
      for (const ModelConfig& v : list_variants(base)) {
        if (!abl_only.empty() && std::find(abl_only.begin(), abl_only.end(), v.variant_name()) == abl_only.end())
          continue;
        ULiteModel<float> model(v);
        const TrainResult r = train_loop(model, data.train, data.val, acfg);
        const EpochStats& last = r.history.back();
        const std::string row = v.variant_name() + "," + (v.dw_variant == DwVariant::axial ? "axial-dw" : "dw") + "," +
                                std::to_string(v.n) + "," + (v.addc ? "on" : "off") + "," +
                                std::to_string(count_params(v).total()) + "," + fmt("%.6f", *last.dice) + "," +
                                fmt("%.6f", *last.iou) + "\n";
        csv += row;
        if (!abl_out.empty() && abl_out != "-") out << row << std::flush;
      }
      write_text(abl_out, csv, out);
    } else if (active == footprint) {
      const ModelConfig cfg = fp_c.model_config();
      const std::uint64_t seed = fp_c.seed_given() ? fp_c.seed : 7;
      const Footprint f = fp_dilation > 0 ? dilated_branch_footprint(fp_dilation, seed)
                                          : module_footprint(cfg.n, cfg.dw_variant, seed);
      if (fp_dilation > 0) out << "bottleneck branch d=" << fp_dilation << "\n";
      else out << to_string(cfg.dw_variant) << " n=" << cfg.n << "\n";
      out << f.render() << "support " << f.count() << " cells\n";
    } else if (active == synth) {
      if (!syn_c.config.empty()) (void)load_config(syn_c.config);
      const DatasetManifest m = write_dataset(syn_out, synth_dataset(syn_count, syn_c.seed, syn_size));
      out << "wrote " << m.entries.size() << " pairs to " << syn_out << "\n";
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace ulite::cli
