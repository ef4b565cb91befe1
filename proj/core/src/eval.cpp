#include "eegtok/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "eegtok/rng.hpp"
#include "eegtok/wavelet.hpp"

namespace eegtok {

using json = nlohmann::json;

FoldPlan subject_kfold(const std::vector<std::pair<std::string, Label>>& subjects, int k,
                       std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("subject_kfold: k must be >= 2");
  if (subjects.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("subject_kfold: fewer subjects than folds");
  std::vector<std::string> hc, ad;
  for (const auto& [id, label] : subjects) (label == Label::AD ? ad : hc).push_back(id);
  if (hc.empty() || ad.empty())
    throw std::invalid_argument("subject_kfold: need at least one subject per class");
  std::sort(hc.begin(), hc.end());
  std::sort(ad.begin(), ad.end());

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));

  // Shuffle within each class, then deal round-robin so fold test sets stay
  // class-proportional.
  std::vector<std::vector<std::string>> test_sets(static_cast<std::size_t>(k));
  std::size_t slot = 0;
  int cls = 0;
  for (auto* group : {&hc, &ad}) {
    Rng rng(seed, 0xF01D + static_cast<std::uint64_t>(cls++));
    rng.shuffle(*group);
    for (const auto& id : *group) test_sets[slot++ % static_cast<std::size_t>(k)].push_back(id);
  }
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    plan.folds[f].test_subjects = test_sets[f];
    std::sort(plan.folds[f].test_subjects.begin(), plan.folds[f].test_subjects.end());
    for (std::size_t g = 0; g < test_sets.size(); ++g)
      if (g != f)
        plan.folds[f].train_subjects.insert(plan.folds[f].train_subjects.end(),
                                            test_sets[g].begin(), test_sets[g].end());
    std::sort(plan.folds[f].train_subjects.begin(), plan.folds[f].train_subjects.end());
  }
  return plan;
}

Confusion confusion(const std::vector<int>& truth, const std::vector<int>& pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0 && truth[i] != 1) throw std::invalid_argument("confusion: labels must be 0/1");
    if (pred[i] != 0 && pred[i] != 1) throw std::invalid_argument("confusion: labels must be 0/1");
    if (truth[i] == 1)
      pred[i] == 1 ? ++c.tp : ++c.fn;
    else
      pred[i] == 1 ? ++c.fp : ++c.tn;
  }
  return c;
}

Metrics metrics(const Confusion& c) {
  if (c.total() == 0) throw std::invalid_argument("metrics: empty confusion");
  Metrics m;
  auto ratio = [&m](long num, long den) {
    if (den == 0) {
      m.any_undefined = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return m;
}

std::vector<Segment> preprocess_recording(const Recording& rec, const MontageSpec& target,
                                          Band band, const FilterSpec& filter, double fs_target,
                                          std::size_t L, double overlap) {
  Recording h = harmonize(rec, target);
  std::vector<std::vector<double>> chans(h.n_channels());
  for (std::size_t c = 0; c < h.n_channels(); ++c) {
    std::vector<double> x = bandpass(h.data[c], h.fs, filter);
    x = resample(x, h.fs, fs_target);
    if (band != Band::Full) {
      x.resize(x.size() - x.size() % 16);  // SWT depth-4 needs a multiple of 16
      x = extract_bands(x)[band];
    }
    chans[c] = std::move(x);
  }

  const std::size_t n = chans[0].size();
  const std::size_t step = static_cast<std::size_t>(std::lround(static_cast<double>(L) * (1.0 - overlap)));
  std::vector<Segment> segs;
  if (n < L) return segs;
  for (std::size_t start = 0, idx = 0; start + L <= n; start += step, ++idx) {
    Segment s;
    s.subject_id = h.subject_id;
    s.label = h.label;
    s.band = band;
    s.index = idx;
    s.data.resize(chans.size());
    for (std::size_t c = 0; c < chans.size(); ++c)
      s.data[c].assign(chans[c].begin() + static_cast<std::ptrdiff_t>(start),
                       chans[c].begin() + static_cast<std::ptrdiff_t>(start + L));
    zscore_inplace(s.data);
    segs.push_back(std::move(s));
  }
  return segs;
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

FoldResult run_fold(const std::vector<Segment>& all_segs,
                    const std::map<std::string, Label>& subject_labels,
                    const FoldPlan::Fold& fold, const ExperimentConfig& cfg, int repeat,
                    int fold_idx) {
  const std::set<std::string> train_set(fold.train_subjects.begin(), fold.train_subjects.end());
  const std::set<std::string> test_set(fold.test_subjects.begin(), fold.test_subjects.end());
  for (const auto& id : train_set)
    if (test_set.count(id))
      throw std::logic_error("leakage guard: subject in both train and test: " + id);

  std::vector<Segment> train_segs, test_segs;
  for (const auto& s : all_segs) {
    if (train_set.count(s.subject_id)) train_segs.push_back(s);
    if (test_set.count(s.subject_id)) test_segs.push_back(s);
  }
  if (train_segs.empty() || test_segs.empty())
    throw std::runtime_error("fold has no usable segments");

  const std::uint64_t fold_seed =
      mix(cfg.seed, mix(static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(fold_idx)));
  Model model(cfg.model, fold_seed);
  TrainOptions topts;
  topts.epochs = cfg.epochs;
  topts.batch_size = cfg.batch_size;
  topts.lr = cfg.lr;
  topts.seed = fold_seed;
  train(model, train_segs, topts);

  Predictions preds = predict_segments(model, test_segs);

  std::vector<int> seg_truth(test_segs.size());
  for (std::size_t i = 0; i < test_segs.size(); ++i)
    seg_truth[i] = static_cast<int>(test_segs[i].label);

  std::map<std::string, std::vector<int>> by_subject;
  for (std::size_t i = 0; i < test_segs.size(); ++i)
    by_subject[test_segs[i].subject_id].push_back(preds.labels[i]);
  std::vector<int> subj_truth, subj_pred;
  for (const auto& [id, votes] : by_subject) {
    subj_truth.push_back(static_cast<int>(subject_labels.at(id)));
    subj_pred.push_back(static_cast<int>(predict_subject(votes)));
  }

  FoldResult result;
  result.repeat = repeat;
  result.fold = fold_idx;
  result.segment = metrics(confusion(seg_truth, preds.labels));
  result.subject = metrics(confusion(subj_truth, subj_pred));
  return result;
}

double metric_value(const Metrics& m, const std::string& name) {
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "f1") return m.f1;
  if (name == "accuracy") return m.accuracy;
  throw std::invalid_argument("unknown metric: " + name);
}

json metrics_json(const Metrics& m) {
  return json{{"precision", 100.0 * m.precision},
              {"recall", 100.0 * m.recall},
              {"f1", 100.0 * m.f1},
              {"accuracy", 100.0 * m.accuracy}};
}

}  // namespace

std::pair<double, double> Report::mean_std(const std::string& level,
                                           const std::string& metric) const {
  if (folds.empty()) throw std::invalid_argument("report: no fold results");
  std::vector<double> vals;
  for (const auto& f : folds)
    vals.push_back(100.0 * metric_value(level == "subject" ? f.subject : f.segment, metric));
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(vals.size());
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= static_cast<double>(vals.size());
  return {mean, std::sqrt(var)};
}

Report run_experiment(const std::vector<Recording>& recordings, const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.n_repeats < 1) throw std::invalid_argument("run_experiment: n_repeats must be >= 1");

  std::map<std::string, Label> subject_labels;
  std::vector<std::pair<std::string, Label>> subjects;
  for (const auto& rec : recordings) {
    if (subject_labels.count(rec.subject_id))
      throw std::invalid_argument("run_experiment: duplicate subject " + rec.subject_id);
    subject_labels[rec.subject_id] = rec.label;
    subjects.emplace_back(rec.subject_id, rec.label);
  }
  std::sort(subjects.begin(), subjects.end());

  // Preprocessing learns nothing from the data, so it runs once up front.
  std::vector<Segment> all_segs;
  for (const auto& rec : recordings) {
    auto segs = preprocess_recording(rec, standard_10_20(), cfg.band, cfg.filter, cfg.fs_target);
    all_segs.insert(all_segs.end(), std::make_move_iterator(segs.begin()),
                    std::make_move_iterator(segs.end()));
  }

  struct WorkItem {
    int repeat, fold;
    const FoldPlan::Fold* spec;
  };
  std::vector<FoldPlan> plans;
  std::vector<WorkItem> work;
  for (int r = 0; r < cfg.n_repeats; ++r)
    plans.push_back(subject_kfold(subjects, cfg.k, mix(cfg.seed, 0xF01D5 + static_cast<std::uint64_t>(r))));
  for (int r = 0; r < cfg.n_repeats; ++r)
    for (int f = 0; f < cfg.k; ++f)
      work.push_back({r, f, &plans[static_cast<std::size_t>(r)].folds[static_cast<std::size_t>(f)]});

  std::vector<FoldResult> results(work.size());
  std::vector<std::string> errors(work.size());
  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(work.size())));
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1)) {
      const auto& w = work[i];
      try {
        results[i] = run_fold(all_segs, subject_labels, *w.spec, cfg, w.repeat, w.fold);
      } catch (const std::exception& e) {
        errors[i] = "repeat " + std::to_string(w.repeat) + " fold " + std::to_string(w.fold) +
                    ": " + e.what();
      }
    }
  };
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error("run_experiment: " + err);

  Report report;
  report.band = band_name(cfg.band);
  report.config = cfg;
  report.folds = std::move(results);
  report.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string report_json(const Report& report) {
  if (report.folds.empty()) throw std::invalid_argument("report: no fold results");
  json folds = json::array();
  for (const auto& f : report.folds)
    folds.push_back(json{{"repeat", f.repeat},
                         {"fold", f.fold},
                         {"segment", metrics_json(f.segment)},
                         {"subject", metrics_json(f.subject)}});
  json summary;
  for (const std::string level : {"segment", "subject"})
    for (const std::string metric : {"precision", "recall", "f1", "accuracy"}) {
      auto [mean, sd] = report.mean_std(level, metric);
      summary[level][metric] = json{{"mean", mean}, {"std", sd}};
    }
  const auto& c = report.config;
  json doc{{"band", report.band},
           {"config",
            {{"d_model", c.model.d_model},
             {"bottleneck", c.model.bottleneck},
             {"k_token", c.model.k_token},
             {"k_res", c.model.k_res},
             {"n_stages", c.model.n_stages},
             {"dilation_base", c.model.dilation_base},
             {"dilation_mode",
              c.model.dilation_mode == DilationMode::Exponential ? "exponential" : "constant"},
             {"n_channels", c.model.n_channels},
             {"L", c.model.L},
             {"dropout", c.model.dropout},
             {"k_folds", c.k},
             {"n_repeats", c.n_repeats},
             {"epochs", c.epochs},
             {"batch_size", c.batch_size},
             {"lr", c.lr},
             {"seed", c.seed}}},
           {"folds", folds},
           {"summary", summary}};
  return doc.dump(2) + "\n";
}

void emit_report(const Report& report, const std::string& path, const std::string& format) {
  if (report.folds.empty()) throw std::invalid_argument("report: no fold results");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  if (format == "json") {
    os << report_json(report);
  } else if (format == "csv") {
    os << "repeat,fold,level,metric,value\n";
    std::ostringstream row;
    row.precision(10);
    for (const auto& f : report.folds)
      for (const std::string level : {"segment", "subject"})
        for (const std::string metric : {"precision", "recall", "f1", "accuracy"}) {
          row.str("");
          row << f.repeat << ',' << f.fold << ',' << level << ',' << metric << ','
              << 100.0 * metric_value(level == "subject" ? f.subject : f.segment, metric) << '\n';
          os << row.str();
        }
  } else {
    throw std::invalid_argument("emit_report: format must be json or csv");
  }
  if (!os) throw std::runtime_error("report write failed: " + path);
}

}  // namespace eegtok
