#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eegtok/dsp.hpp"
#include "eegtok/eegio.hpp"
#include "eegtok/model.hpp"
#include "eegtok/montage.hpp"

namespace eegtok {

struct FoldPlan {
  struct Fold {
    std::vector<std::string> train_subjects;
    std::vector<std::string> test_subjects;
  };
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

// Label-stratified subject partition into k folds; deterministic per seed.
FoldPlan subject_kfold(const std::vector<std::pair<std::string, Label>>& subjects, int k = 5,
                       std::uint64_t seed = 0);

struct Confusion {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  long total() const { return tp + tn + fp + fn; }
};

// AD (label 1) is the positive class.
Confusion confusion(const std::vector<int>& truth, const std::vector<int>& pred);

struct Metrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0;
  bool any_undefined = false;  // a zero denominator was mapped to 0
};

Metrics metrics(const Confusion& c);

// Harmonize to the target montage, band-pass 0.5-45 Hz, resample to fs_target,
// optionally split out one frequency band, window into L-sample segments with
// the given overlap, and z-score each segment per channel.
std::vector<Segment> preprocess_recording(const Recording& rec, const MontageSpec& target,
                                          Band band, const FilterSpec& filter = {},
                                          double fs_target = 128.0, std::size_t L = 128,
                                          double overlap = 0.5);

struct ExperimentConfig {
  ModelConfig model;
  Band band = Band::Full;
  int k = 5;
  int n_repeats = 5;
  int epochs = 100;
  int batch_size = 128;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  int jobs = 1;
  FilterSpec filter;
  double fs_target = 128.0;
};

struct FoldResult {
  int repeat = 0;
  int fold = 0;
  Metrics segment;  // fractions in [0, 1]
  Metrics subject;
};

struct Report {
  std::string band;
  ExperimentConfig config;
  std::vector<FoldResult> folds;
  double runtime_s = 0.0;  // informational only; never serialized

  // Mean and standard deviation (over folds x repeats) of one metric,
  // as percentages. level: "segment" or "subject"; metric: "precision",
  // "recall", "f1", or "accuracy".
  std::pair<double, double> mean_std(const std::string& level, const std::string& metric) const;
};

// Full subject-independent cross-validation run over preloaded recordings.
Report run_experiment(const std::vector<Recording>& recordings, const ExperimentConfig& cfg);

// JSON document for the report (metric values as percentages).
std::string report_json(const Report& report);

// format: "json" or "csv". CSV emits one row per (repeat, fold, level, metric).
void emit_report(const Report& report, const std::string& path, const std::string& format);

}  // namespace eegtok
