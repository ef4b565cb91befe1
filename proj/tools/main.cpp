// eegtok: synthesize, preprocess, train, evaluate, cross-validate, benchmark.
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "archive.hpp"
#include "eegtok/eval.hpp"

namespace {

using namespace eegtok;

// Flat JSON config files, applied per subcommand after parsing so that
// explicit command-line flags always win. (CLI11 only processes set_config
// on the top-level app, which does not fit a per-subcommand layout.)
std::map<CLI::App*, std::string> g_config_paths;

void add_config(CLI::App* cmd) {
  cmd->add_option("--config", g_config_paths[cmd],
                  "JSON config file; explicit flags take precedence");
}

void apply_config(CLI::App* cmd) {
  const std::string& path = g_config_paths[cmd];
  if (path.empty()) return;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  f >> j;
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object: " + path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "config") continue;
    CLI::Option* op = cmd->get_option_no_throw("--" + it.key());
    if (op == nullptr) throw std::runtime_error("config: unknown option \"" + it.key() + '"');
    if (op->count() > 0) continue;  // given on the command line
    op->add_result(it->is_string() ? it->get<std::string>() : it->dump());
    op->run_callback();
  }
}

struct ModelFlags {
  ModelConfig cfg;
  std::string dilation_mode = "constant";

  void attach(CLI::App* cmd) {
    cmd->add_option("--d-model", cfg.d_model, "Token embedding width");
    cmd->add_option("--bottleneck", cfg.bottleneck, "Residual bottleneck width");
    cmd->add_option("--k-token", cfg.k_token, "Tokenizer kernel size (odd)");
    cmd->add_option("--k-res", cfg.k_res, "Residual kernel size (odd)");
    cmd->add_option("--stages", cfg.n_stages, "Number of encoder stages (1..5)");
    cmd->add_option("--dilation", cfg.dilation_base, "Dilation base");
    cmd->add_option("--dilation-mode", dilation_mode, "constant or exponential");
    cmd->add_option("--dropout", cfg.dropout, "Classifier dropout rate");
    cmd->add_option("--channels", cfg.n_channels, "Input channel count");
    cmd->add_option("--segment-length", cfg.L, "Samples per segment");
  }
  ModelConfig resolve() const {
    ModelConfig c = cfg;
    if (dilation_mode == "exponential")
      c.dilation_mode = DilationMode::Exponential;
    else if (dilation_mode == "constant")
      c.dilation_mode = DilationMode::Constant;
    else
      throw CLI::ValidationError("--dilation-mode", "must be constant or exponential");
    c.validate();
    return c;
  }
};

std::vector<Recording> load_manifest_recordings(const std::string& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const auto dir = std::filesystem::path(manifest_path).parent_path();
  std::vector<Recording> recs;
  for (const auto& e : m.entries) {
    std::filesystem::path p(e.path);
    if (p.is_relative()) p = dir / p;
    recs.push_back(read_recording(p.string()));
  }
  return recs;
}

void print_metrics_line(const char* level, const Metrics& m) {
  std::printf("%-8s precision %6.2f%%  recall %6.2f%%  f1 %6.2f%%  accuracy %6.2f%%\n", level,
              100.0 * m.precision, 100.0 * m.recall, 100.0 * m.f1, 100.0 * m.accuracy);
}

int cmd_synth(int subjects, double duration, double fs, double noise, std::uint64_t seed,
              const std::string& out) {
  SynthSpec spec;
  spec.n_subjects_per_class = subjects;
  spec.duration_s = duration;
  spec.fs = fs;
  spec.noise_sigma = noise;
  spec.seed = seed;
  const Manifest m = synthesize_dataset(spec, out);
  std::printf("wrote %zu recordings + manifest.jsonl to %s\n", m.entries.size(), out.c_str());
  return 0;
}

int cmd_preprocess(const std::string& manifest, const std::string& band_str,
                   const std::string& out, int L, double overlap) {
  const Band band = band_from_name(band_str);
  const auto recs = load_manifest_recordings(manifest);
  std::vector<std::vector<Segment>> per_subject;
  std::size_t n_segments = 0, skipped = 0;
  for (const auto& rec : recs) {
    std::vector<Segment> segs;
    if (rec.n_samples() >= static_cast<std::size_t>(rec.fs))
      segs = preprocess_recording(rec, standard_10_20(), band, {}, 128.0,
                                  static_cast<std::size_t>(L), overlap);
    if (segs.empty()) {
      std::fprintf(stderr, "warning: %s too short, skipped\n", rec.subject_id.c_str());
      ++skipped;
      continue;
    }
    n_segments += segs.size();
    per_subject.push_back(std::move(segs));
  }
  archive::write_archive(per_subject, out);
  std::printf("band %s: %zu subjects, %zu segments (%zu skipped) -> %s\n", band_name(band),
              per_subject.size(), n_segments, skipped, out.c_str());
  return 0;
}

int cmd_train(const std::string& archive_dir, const std::string& out, const ModelFlags& mf,
              int epochs, int batch_size, double lr, std::uint64_t seed) {
  const auto segs = archive::read_archive(archive_dir);
  Model model(mf.resolve(), seed);
  TrainOptions opts;
  opts.epochs = epochs;
  opts.batch_size = batch_size;
  opts.lr = lr;
  opts.seed = seed;
  const TrainResult result = train(model, segs, opts);
  model.save(out);
  std::printf("trained on %zu segments for %d epochs, final loss %.6f -> %s\n", segs.size(),
              epochs, result.loss_history.back(), out.c_str());
  return 0;
}

int cmd_eval(const std::string& archive_dir, const std::string& checkpoint) {
  const auto segs = archive::read_archive(archive_dir);
  if (segs.empty()) throw std::runtime_error("archive has no segments");
  Model model = Model::load(checkpoint);
  const Predictions preds = predict_segments(model, segs);

  std::vector<int> seg_truth(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) seg_truth[i] = static_cast<int>(segs[i].label);
  print_metrics_line("segment", metrics(confusion(seg_truth, preds.labels)));

  std::map<std::string, std::vector<int>> votes;
  std::map<std::string, int> subj_label;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    votes[segs[i].subject_id].push_back(preds.labels[i]);
    subj_label[segs[i].subject_id] = static_cast<int>(segs[i].label);
  }
  std::vector<int> truth, pred;
  for (const auto& [id, v] : votes) {
    truth.push_back(subj_label[id]);
    pred.push_back(static_cast<int>(predict_subject(v)));
  }
  print_metrics_line("subject", metrics(confusion(truth, pred)));
  return 0;
}

int cmd_xval(const std::string& manifest, const std::string& band_str, const ModelFlags& mf,
             int folds, int repeats, int epochs, int batch_size, double lr, std::uint64_t seed,
             int jobs, const std::string& out, const std::string& format) {
  ExperimentConfig cfg;
  cfg.model = mf.resolve();
  cfg.band = band_from_name(band_str);
  cfg.k = folds;
  cfg.n_repeats = repeats;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.lr = lr;
  cfg.seed = seed;
  cfg.jobs = jobs;

  const Report report = run_experiment(load_manifest_recordings(manifest), cfg);
  std::printf("band %s, %d folds x %d repeats (%.1f s)\n", report.band.c_str(), cfg.k,
              cfg.n_repeats, report.runtime_s);
  for (const char* level : {"segment", "subject"}) {
    std::printf("%-8s", level);
    for (const char* metric : {"precision", "recall", "f1", "accuracy"}) {
      auto [mean, sd] = report.mean_std(level, metric);
      std::printf("  %s %.2f+-%.2f%%", metric, mean, sd);
    }
    std::printf("\n");
  }
  if (!out.empty()) {
    emit_report(report, out, format);
    std::printf("report -> %s\n", out.c_str());
  }
  return 0;
}

int cmd_bench(const ModelFlags& mf, double seconds, std::uint64_t seed) {
  const ModelConfig cfg = mf.resolve();
  const std::size_t params = count_params(cfg);
  const std::size_t flops = count_flops(cfg, cfg.L);
  std::printf("params:            %zu\n", params);
  std::printf("flops/segment:     %zu\n", flops);
  std::printf("flops/batch-128:   %zu\n", flops * 128);

  Model model(cfg, seed);
  Rng rng(seed, 0xBE7C);
  constexpr std::size_t kBatch = 128;
  grad::Tensor x({kBatch, static_cast<std::size_t>(cfg.n_channels),
                  static_cast<std::size_t>(cfg.L)});
  for (auto& v : x.v) v = rng.gaussian();

  const auto t0 = std::chrono::steady_clock::now();
  std::size_t done = 0;
  double elapsed = 0.0;
  do {
    model.forward(x, false);
    done += kBatch;
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } while (elapsed < seconds);
  std::printf("throughput:        %.0f segments/s (%zu segments in %.1f s)\n",
              static_cast<double>(done) / elapsed, done, elapsed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG band-decomposition classifier toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  int sy_subjects = 4;
  double sy_duration = 16.0, sy_fs = 128.0, sy_noise = 0.3;
  std::uint64_t sy_seed = 0;
  std::string sy_out;
  synth->add_option("--subjects", sy_subjects, "Subjects per class");
  synth->add_option("--duration", sy_duration, "Recording length in seconds");
  synth->add_option("--fs", sy_fs, "Sampling rate in Hz");
  synth->add_option("--noise", sy_noise, "Additive noise sigma");
  synth->add_option("--seed", sy_seed, "Master seed");
  synth->add_option("--out", sy_out, "Output directory")->required();
  add_config(synth);

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Manifest -> normalized segment archive");
  std::string pp_manifest, pp_band = "full", pp_out;
  int pp_L = 128;
  double pp_overlap = 0.5;
  prep->add_option("--manifest", pp_manifest, "manifest.jsonl path")->required();
  prep->add_option("--band", pp_band, "delta|theta|alpha|beta|gamma|full");
  prep->add_option("--out", pp_out, "Output archive directory")->required();
  prep->add_option("--segment-length", pp_L, "Samples per segment");
  prep->add_option("--overlap", pp_overlap, "Segment overlap fraction");
  add_config(prep);

  // train
  auto* tr = app.add_subcommand("train", "Train a classifier on a segment archive");
  std::string tr_archive, tr_out;
  int tr_epochs = 100, tr_batch = 128;
  double tr_lr = 1e-4;
  std::uint64_t tr_seed = 0;
  ModelFlags tr_mf;
  tr->add_option("--archive", tr_archive, "Segment archive directory")->required();
  tr->add_option("--out", tr_out, "Checkpoint output path")->required();
  tr->add_option("--epochs", tr_epochs, "Training epochs");
  tr->add_option("--batch-size", tr_batch, "Batch size");
  tr->add_option("--lr", tr_lr, "Adam learning rate");
  tr->add_option("--seed", tr_seed, "Master seed");
  tr_mf.attach(tr);
  add_config(tr);

  // eval
  auto* ev = app.add_subcommand("eval", "Score a checkpoint on a segment archive");
  std::string ev_archive, ev_ckpt;
  ev->add_option("--archive", ev_archive, "Segment archive directory")->required();
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
  add_config(ev);

  // xval
  auto* xv = app.add_subcommand("xval", "Subject-independent k-fold cross-validation");
  std::string xv_manifest, xv_band = "full", xv_out, xv_format = "json";
  int xv_folds = 5, xv_repeats = 5, xv_epochs = 100, xv_batch = 128, xv_jobs = 1;
  double xv_lr = 1e-4;
  std::uint64_t xv_seed = 0;
  ModelFlags xv_mf;
  xv->add_option("--manifest", xv_manifest, "manifest.jsonl path")->required();
  xv->add_option("--band", xv_band, "delta|theta|alpha|beta|gamma|full");
  xv->add_option("--folds", xv_folds, "Number of folds");
  xv->add_option("--repeats", xv_repeats, "Independent repeats with distinct splits");
  xv->add_option("--epochs", xv_epochs, "Training epochs per fold");
  xv->add_option("--batch-size", xv_batch, "Batch size");
  xv->add_option("--lr", xv_lr, "Adam learning rate");
  xv->add_option("--seed", xv_seed, "Master seed");
  xv->add_option("--jobs", xv_jobs, "Max concurrent folds");
  xv->add_option("--out", xv_out, "Report output path");
  xv->add_option("--format", xv_format, "json or csv");
  xv_mf.attach(xv);
  add_config(xv);

  // bench
  auto* be = app.add_subcommand("bench", "Report parameters, FLOPs, and throughput");
  double be_seconds = 10.0;
  std::uint64_t be_seed = 0;
  ModelFlags be_mf;
  be->add_option("--seconds", be_seconds, "Minimum timing window");
  be->add_option("--seed", be_seed, "Master seed");
  be_mf.attach(be);
  add_config(be);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    for (auto* cmd : {synth, prep, tr, ev, xv, be})
      if (cmd->parsed()) apply_config(cmd);
    if (synth->parsed())
      return cmd_synth(sy_subjects, sy_duration, sy_fs, sy_noise, sy_seed, sy_out);
    if (prep->parsed()) return cmd_preprocess(pp_manifest, pp_band, pp_out, pp_L, pp_overlap);
    if (tr->parsed())
      return cmd_train(tr_archive, tr_out, tr_mf, tr_epochs, tr_batch, tr_lr, tr_seed);
    if (ev->parsed()) return cmd_eval(ev_archive, ev_ckpt);
    if (xv->parsed())
      return cmd_xval(xv_manifest, xv_band, xv_mf, xv_folds, xv_repeats, xv_epochs, xv_batch,
                      xv_lr, xv_seed, xv_jobs, xv_out, xv_format);
    if (be->parsed()) return cmd_bench(be_mf, be_seconds, be_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
