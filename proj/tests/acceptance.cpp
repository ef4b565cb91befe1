// Acceptance suite: one pass/fail line per criterion, driven partly through
// the library and partly through the eegtok binary (argv[1]).
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eegtok/eval.hpp"
#include "eegtok/wavelet.hpp"

using namespace eegtok;
using grad::Tensor;
namespace fs = std::filesystem;

namespace {

std::string g_bin;
fs::path g_dir;
std::vector<std::string> g_notes;

void note(const std::string& msg) { g_notes.push_back(msg); }

bool expect(bool ok, const std::string& what) {
  if (!ok) note("check failed: " + what);
  return ok;
}

int run_tool(const std::string& args) {
  const std::string cmd = g_bin + " " + args + " >" + (g_dir / "tool.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.v) v = rng.gaussian();
  return t;
}

double weighted_sum(const Tensor& t, const Tensor& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.numel(); ++i) s += t[i] * w[i];
  return s;
}

double tone_amplitude(const std::vector<double>& x, double freq, double fs) {
  // single-bin DFT over the central half to avoid edge transients
  const std::size_t n = x.size() / 2, off = x.size() / 4;
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += x[off + i] * std::polar(1.0, -2.0 * M_PI * freq * static_cast<double>(off + i) / fs);
  return 2.0 * std::abs(acc) / static_cast<double>(n);
}

double peak_frequency(const std::vector<double>& x, double fs) {
  double best = 0.0, best_freq = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t k = 1; k < x.size() / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      acc += x[i] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * i) / n);
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_freq = static_cast<double>(k) * fs / n;
    }
  }
  return best_freq;
}

double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

// ---- criterion bodies -------------------------------------------------------

bool criterion_params() {
  const ModelConfig cfg;
  const std::size_t n = count_params(cfg);
  // independent per-layer hand count for the default configuration
  const std::size_t depthwise = 19 * 7 + 19;
  const std::size_t pointwise = 128 * 19 + 128;
  const std::size_t stage = (64 * 128 * 3 + 64) + 2 * 64    // dilated conv + norm
                            + (128 * 64 * 3 + 128) + 2 * 128  // second conv + norm
                            + (128 * 128 + 128) + 2 * 128     // 1x1 shortcut + norm
                            + (128 * 128 + 128);              // cross 1x1
  const std::size_t head = 2 * 256 + (256 * 2 + 2);
  const std::size_t hand = depthwise + pointwise + 3 * stage + head;
  bool ok = expect(hand == 252762, "hand count arithmetic");
  ok &= expect(n == hand, "count_params equals the hand count");
  ok &= expect(n >= 232000 && n <= 348000, "parameter count within the target budget");
  return ok;
}

bool criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  Rng data_rng(404, 0);

  // per-layer finite-difference checks through the shared harness
  {
    Tensor x = random_tensor({2, 3, 8}, data_rng);
    Tensor w = random_tensor({4, 3, 3}, data_rng);
    Tensor b = random_tensor({4}, data_rng);
    Tensor gx, gw, gb;
    const Tensor probe = random_tensor({2, 4, 8}, data_rng);
    auto eval = [&](bool compute) {
      const Tensor y = grad::conv1d(x, w, b, 2, 1);
      if (compute) {
        auto g = grad::conv1d_backward(probe, x, w, 2, 1);
        gw = g.gw;
        gb = g.gb;
      }
      return weighted_sum(y, probe);
    };
    Rng rng(1, 0);
    ok &= expect(grad::gradcheck(eval, {{&w, &gw}, {&b, &gb}}, rng) < 1e-4,
                 "convolution gradients");
  }
  {
    Tensor x = random_tensor({3, 6}, data_rng);
    Tensor gamma = random_tensor({6}, data_rng);
    Tensor beta = random_tensor({6}, data_rng);
    Tensor gg, gb;
    const Tensor probe = random_tensor({3, 6}, data_rng);
    grad::LayerNormCache cache;
    auto eval = [&](bool compute) {
      const Tensor y = grad::layernorm(x, gamma, beta, &cache);
      if (compute) {
        auto g = grad::layernorm_backward(probe, cache, gamma);
        gg = g.ggamma;
        gb = g.gbeta;
      }
      return weighted_sum(y, probe);
    };
    Rng rng(2, 0);
    ok &= expect(grad::gradcheck(eval, {{&gamma, &gg}, {&beta, &gb}}, rng) < 1e-4,
                 "layer norm gradients");
  }
  {
    Tensor x = random_tensor({4, 2}, data_rng);
    const std::vector<int> labels = {0, 1, 1, 0};
    Tensor glogits;
    auto eval = [&](bool compute) {
      auto ce = grad::softmax_cross_entropy(x, labels);
      if (compute) glogits = ce.grad_logits;
      return ce.loss;
    };
    Rng rng(3, 0);
    ok &= expect(grad::gradcheck(eval, {{&x, &glogits}}, rng) < 1e-4,
                 "cross-entropy gradients");
  }

  // the full network, eval-mode norms and dropout off
  {
    ModelConfig cfg;
    cfg.n_channels = 2;
    cfg.L = 8;
    cfg.d_model = 4;
    cfg.bottleneck = 2;
    cfg.n_stages = 2;
    cfg.k_token = 3;
    cfg.dropout = 0.0;
    Model m(cfg, 77);
    const Tensor x = random_tensor({3, 2, 8}, data_rng);
    const std::vector<int> labels = {0, 1, 1};
    auto eval = [&](bool compute) {
      const auto ce = grad::softmax_cross_entropy(m.forward(x, false), labels);
      if (compute) {
        m.zero_grads();
        m.backward(ce.grad_logits);
      }
      return ce.loss;
    };
    Rng rng(4, 0);
    ok &= expect(grad::gradcheck(eval, m.param_grads(), rng, 1e-6, 25) < 1e-4,
                 "full-network gradients");
  }

  // negative control: a corrupted backward pass must be flagged
  {
    Tensor x = random_tensor({3, 5}, data_rng);
    Tensor w = random_tensor({5, 2}, data_rng);
    Tensor b = random_tensor({2}, data_rng);
    Tensor gw, gb;
    const Tensor probe = random_tensor({3, 2}, data_rng);
    auto eval = [&](bool compute) {
      const Tensor y = grad::linear(x, w, b);
      if (compute) {
        auto g = grad::linear_backward(probe, x, w);
        for (auto& v : g.gw.v) v *= 1.5;
        gw = g.gw;
        gb = g.gb;
      }
      return weighted_sum(y, probe);
    };
    Rng rng(5, 0);
    ok &= expect(grad::gradcheck(eval, {{&w, &gw}, {&b, &gb}}, rng) > 1e-2,
                 "corrupted backward is detected");
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok &= expect(secs < 120.0, "gradient suite finishes within budget");
  return ok;
}

bool criterion_wavelet() {
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(500, static_cast<std::uint64_t>(trial));
    std::vector<double> x(256);
    for (auto& v : x) v = rng.gaussian();
    const double scale = std::sqrt(energy(x));
    for (int levels = 1; levels <= 4; ++levels) {
      const auto rec = swt_reconstruct(swt_decompose(x, levels));
      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) err += (rec[i] - x[i]) * (rec[i] - x[i]);
      if (std::sqrt(err) / scale >= 1e-8) {
        ok = expect(false, "perfect reconstruction, trial " + std::to_string(trial));
        break;
      }
    }
  }

  // circular shift covariance
  {
    Rng rng(501, 0);
    std::vector<double> x(256);
    for (auto& v : x) v = rng.gaussian();
    const std::size_t s = 5;
    std::vector<double> xs(256);
    for (std::size_t i = 0; i < 256; ++i) xs[(i + s) % 256] = x[i];
    const auto a = swt_decompose(x, 4);
    const auto b = swt_decompose(xs, 4);
    double worst = 0.0;
    for (int j = 0; j < 4; ++j)
      for (std::size_t i = 0; i < 256; ++i) {
        worst = std::max(worst, std::abs(b.details[static_cast<std::size_t>(j)][(i + s) % 256] -
                                         a.details[static_cast<std::size_t>(j)][i]));
        worst = std::max(worst, std::abs(b.approx[static_cast<std::size_t>(j)][(i + s) % 256] -
                                         a.approx[static_cast<std::size_t>(j)][i]));
      }
    ok &= expect(worst < 1e-10, "shift covariance");
  }

  // five bands sum back to the input
  {
    Rng rng(502, 0);
    std::vector<double> x(256);
    for (auto& v : x) v = rng.gaussian();
    const auto bands = extract_bands(x);
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double sum = 0.0;
      for (const auto& band : bands.bands) sum += band[i];
      err += (sum - x[i]) * (sum - x[i]);
    }
    ok &= expect(std::sqrt(err / energy(x)) < 1e-8, "band additivity");
  }

  // a 10 Hz tone at 128 Hz lands in the alpha band
  {
    std::vector<double> x(256);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) / 128.0);
    const auto bands = extract_bands(x);
    double total = 0.0;
    for (const auto& band : bands.bands) total += energy(band);
    ok &= expect(energy(bands[Band::Alpha]) / total >= 0.8, "10 Hz energy in alpha");
  }
  return ok;
}

bool criterion_spline() {
  bool ok = true;
  const auto& montage = standard_10_20();
  const auto& pos = montage.positions;
  const std::size_t n = pos.size();

  // constant fields come back exactly
  {
    const std::vector<double> v(n, 5.0);
    const auto model = fit_spline(pos, v, 4, 1e-5);
    const auto at = interpolate_at(model, pos, {{0.2, 0.3, std::sqrt(1.0 - 0.13)}});
    ok &= expect(std::abs(at[0] - 5.0) < 1e-8, "constant field reproduction");
  }

  auto smooth_field = [](const Vec3& p) { return 0.8 * p[2] + 0.5 * p[0] * p[1] + 0.3; };

  // interpolation condition with no regularization
  {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = smooth_field(pos[i]);
    const auto model = fit_spline(pos, v, 4, 0.0);
    const auto back = interpolate_at(model, pos, pos);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - v[i]));
    ok &= expect(worst < 1e-8, "interpolation condition at the electrodes");
  }

  // leave-one-out accuracy on the smooth field
  {
    std::vector<double> v(n);
    double rms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = smooth_field(pos[i]);
      rms += v[i] * v[i];
    }
    rms = std::sqrt(rms / static_cast<double>(n));
    double err = 0.0;
    for (std::size_t hold = 0; hold < n; ++hold) {
      std::vector<Vec3> src;
      std::vector<double> sv;
      for (std::size_t i = 0; i < n; ++i)
        if (i != hold) {
          src.push_back(pos[i]);
          sv.push_back(v[i]);
        }
      const auto model = fit_spline(src, sv, 4, 1e-7);
      const auto at = interpolate_at(model, src, {pos[hold]});
      err += (at[0] - v[hold]) * (at[0] - v[hold]);
    }
    err = std::sqrt(err / static_cast<double>(n));
    ok &= expect(err / rms < 0.05, "leave-one-out error below 5% RMS");
  }

  // forward-model coefficient recovery
  {
    Rng rng(600, 0);
    std::vector<double> c(n);
    double mean = 0.0;
    for (auto& x : c) mean += (x = rng.gaussian());
    for (auto& x : c) x -= mean / static_cast<double>(n);  // sum-zero as fitted
    const double c0 = 0.7;
    std::vector<double> v(n, c0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        v[i] += c[j] * spline_kernel(pos[i][0] * pos[j][0] + pos[i][1] * pos[j][1] +
                                     pos[i][2] * pos[j][2]);
    const auto model = fit_spline(pos, v, 4, 0.0);
    double worst = std::abs(model.c0 - c0);
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(model.c[j] - c[j]));
    ok &= expect(worst < 1e-6, "coefficient recovery");
  }
  return ok;
}

bool criterion_filter() {
  bool ok = true;
  const double fs = 500.0;
  const std::size_t len = 4096;
  FilterSpec spec;

  // DC suppression > 60 dB
  {
    std::vector<double> x(len, 1.0);
    const auto y = bandpass(x, fs, spec);
    const double out = tone_amplitude(y, 0.0, fs) / 2.0;  // DC bin counts once
    ok &= expect(out < 1e-3, "DC suppression above 60 dB");
  }
  // 60 Hz suppression > 20 dB
  {
    std::vector<double> x(len);
    for (std::size_t i = 0; i < len; ++i)
      x[i] = std::sin(2.0 * M_PI * 60.0 * static_cast<double>(i) / fs);
    const auto y = bandpass(x, fs, spec);
    ok &= expect(tone_amplitude(y, 60.0, fs) < 0.1, "60 Hz suppression above 20 dB");
  }
  // 10 Hz passband gain within +-1 dB
  {
    std::vector<double> x(len);
    for (std::size_t i = 0; i < len; ++i)
      x[i] = std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) / fs);
    const auto y = bandpass(x, fs, spec);
    const double amp = tone_amplitude(y, 10.0, fs);
    ok &= expect(amp > 0.891 && amp < 1.122, "10 Hz gain within 1 dB");
  }
  // resampling preserves the dominant frequency
  {
    std::vector<double> x(2000);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) / fs);
    const auto y = resample(x, fs, 128.0);
    ok &= expect(std::abs(peak_frequency(y, 128.0) - 10.0) < 0.5,
                 "dominant frequency preserved through resampling");
  }
  return ok;
}

bool criterion_metrics() {
  Rng rng(700, 0);
  for (int i = 0; i < 1000; ++i) {
    Confusion c;
    c.tp = static_cast<long>(rng.uniform_int(30));
    c.fp = static_cast<long>(rng.uniform_int(30));
    c.fn = static_cast<long>(rng.uniform_int(30));
    c.tn = 1 + static_cast<long>(rng.uniform_int(30));
    const Metrics m = metrics(c);
    const auto frac = [](long num, long den) {
      return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    if (m.accuracy != frac(c.tp + c.tn, c.total())) return expect(false, "accuracy formula");
    if (m.precision != frac(c.tp, c.tp + c.fp)) return expect(false, "precision formula");
    if (m.recall != frac(c.tp, c.tp + c.fn)) return expect(false, "recall formula");
    if (m.f1 != frac(2 * c.tp, 2 * c.tp + c.fp + c.fn)) return expect(false, "f1 formula");
  }
  return true;
}

// Shared by criteria 7 and 9: the 16-subject synthetic cohort.
std::vector<Recording> cohort() {
  SynthSpec spec;
  spec.n_subjects_per_class = 8;
  spec.duration_s = 16.0;
  spec.seed = 7;
  return synthesize_recordings(spec);
}

ExperimentConfig sanity_config(Band band, int epochs) {
  ExperimentConfig cfg;
  cfg.model.d_model = 32;
  cfg.model.bottleneck = 16;
  cfg.band = band;
  cfg.k = 5;
  cfg.n_repeats = 1;
  cfg.epochs = epochs;
  cfg.batch_size = 32;
  cfg.lr = 1e-3;
  cfg.seed = 7;
  return cfg;
}

bool criterion_end_to_end(double* alpha_subject_acc, double* full_subject_acc) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto recs = cohort();

  const Report alpha = run_experiment(recs, sanity_config(Band::Alpha, 100));
  const double subj = alpha.mean_std("subject", "accuracy").first;
  const double segm = alpha.mean_std("segment", "accuracy").first;
  *alpha_subject_acc = subj;

  const Report full = run_experiment(recs, sanity_config(Band::Full, 40));
  *full_subject_acc = full.mean_std("subject", "accuracy").first;

  bool ok = expect(subj >= 95.0, "subject-level accuracy at least 95%");
  ok &= expect(segm >= 85.0, "segment-level accuracy at least 85%");
  ok &= expect(subj >= *full_subject_acc,
               "band-limited run at least matches the full-band run per subject");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok &= expect(secs < 900.0, "end-to-end run finishes within 15 minutes");
  return ok;
}

bool criterion_leakage() {
  bool ok = true;
  std::vector<std::pair<std::string, Label>> subjects;
  for (int i = 0; i < 10; ++i) {
    subjects.emplace_back("h" + std::to_string(i), Label::HC);
    subjects.emplace_back("a" + std::to_string(i), Label::AD);
  }
  for (std::uint64_t seed = 0; seed < 20 && ok; ++seed)
    for (int k : {2, 3, 5}) {
      const FoldPlan plan = subject_kfold(subjects, k, seed);
      std::set<std::string> tested;
      for (const auto& fold : plan.folds) {
        const std::set<std::string> train(fold.train_subjects.begin(),
                                          fold.train_subjects.end());
        for (const auto& s : fold.test_subjects) {
          ok &= expect(train.count(s) == 0, "train/test subject overlap");
          ok &= expect(tested.insert(s).second, "subject tested more than once");
        }
        ok &= expect(train.size() + fold.test_subjects.size() == subjects.size(),
                     "every subject is assigned");
      }
      ok &= expect(tested.size() == subjects.size(), "test folds partition the cohort");
    }
  return ok;
}

bool criterion_determinism() {
  const fs::path data = g_dir / "det_data";
  const fs::path arch = g_dir / "det_arch";
  bool ok = expect(run_tool("synth --subjects 4 --duration 8 --seed 11 --out " + data.string()) ==
                       0,
                   "synthesis for the determinism check");
  const std::string manifest = (data / "manifest.jsonl").string();
  const std::string xval_flags =
      " --folds 2 --repeats 1 --epochs 5 --batch-size 32 --lr 1e-3"
      " --d-model 16 --bottleneck 8 --seed 11";
  const fs::path r1 = g_dir / "r1.json", r2 = g_dir / "r2.json";
  ok &= expect(run_tool("xval --manifest " + manifest + xval_flags + " --out " + r1.string()) == 0,
               "first cross-validation run");
  ok &= expect(run_tool("xval --manifest " + manifest + xval_flags + " --out " + r2.string()) == 0,
               "second cross-validation run");
  ok &= expect(!slurp(r1).empty() && slurp(r1) == slurp(r2), "byte-identical reports");

  ok &= expect(run_tool("preprocess --manifest " + manifest + " --band alpha --out " +
                        arch.string()) == 0,
               "preprocessing for the determinism check");
  const std::string train_flags = " --epochs 3 --batch-size 32 --lr 1e-3 --d-model 16"
                                  " --bottleneck 8 --seed 11";
  const fs::path c1 = g_dir / "c1.ckpt", c2 = g_dir / "c2.ckpt";
  ok &= expect(run_tool("train --archive " + arch.string() + train_flags + " --out " +
                        c1.string()) == 0,
               "first training run");
  ok &= expect(run_tool("train --archive " + arch.string() + train_flags + " --out " +
                        c2.string()) == 0,
               "second training run");
  ok &= expect(!slurp(c1).empty() && slurp(c1) == slurp(c2), "byte-identical checkpoints");
  return ok;
}

bool criterion_flops() {
  ModelConfig cfg;
  cfg.n_channels = 2;
  cfg.L = 8;
  cfg.d_model = 4;
  cfg.bottleneck = 2;
  cfg.k_token = 3;
  cfg.n_stages = 1;
  // hand count, term by term (conventions: 2 FLOPs per multiply-accumulate,
  // one per bias/elementwise op, 2 per channel for eval-mode normalization,
  // 7 per feature for layer norm)
  std::size_t hand = 0;
  hand += 2 * 2 * 1 * 3 * 8 + 2 * 8;  // depthwise conv
  hand += 2 * 4 * 2 * 1 * 8 + 4 * 8;  // pointwise conv
  hand += 2 * 2 * 4 * 3 * 8 + 2 * 8;  // dilated conv
  hand += 2 * 2 * 8 + 2 * 8;          // first norm + relu
  hand += 2 * 4 * 2 * 3 * 8 + 4 * 8;  // second conv
  hand += 2 * 4 * 8;                  // second norm
  hand += 2 * 4 * 4 * 1 * 8 + 4 * 8 + 2 * 4 * 8;  // shortcut conv + norm
  hand += 4 * 8 + 4 * 8;              // residual add + relu
  hand += 2 * 4 * 4 * 1 * 8 + 4 * 8 + 4 * 8;  // cross conv + add
  hand += 2 * 4 * 8;                  // avg + max pooling
  hand += 7 * 8;                      // layer norm
  hand += 2 * 8 * 2 + 2;              // linear head
  bool ok = expect(count_flops(cfg, cfg.L) == hand, "tiny-config flop hand count");

  // the benchmark reports both per-segment and per-batch figures
  ok &= expect(run_tool("bench --seconds 0.1 --d-model 8 --bottleneck 4 --stages 1") == 0,
               "benchmark run");
  const std::string log = slurp(g_dir / "tool.log");
  ok &= expect(log.find("flops/segment:") != std::string::npos, "per-segment figure reported");
  ok &= expect(log.find("flops/batch-128:") != std::string::npos, "per-batch figure reported");
  return ok;
}

int report(int index, const std::string& name, bool ok) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << index << ": " << name << "\n";
  for (const auto& msg : g_notes) std::cout << "       " << msg << "\n";
  g_notes.clear();
  std::cout.flush();
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <eegtok binary>\n";
    return 2;
  }
  g_bin = argv[1];
  g_dir = fs::temp_directory_path() / "eegtok_acceptance";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  int failures = 0;
  failures += report(1, "default model has 252,762 parameters (hand-counted)",
                     criterion_params());
  failures += report(2, "gradient checks pass; corrupted backward is caught",
                     criterion_gradients());
  failures += report(3, "wavelet transform: reconstruction, shift covariance, band split",
                     criterion_wavelet());
  failures += report(4, "spherical spline: exactness, leave-one-out, coefficient recovery",
                     criterion_spline());
  failures += report(5, "band-pass and resampler frequency response", criterion_filter());
  failures += report(6, "classification metrics match their defining formulas",
                     criterion_metrics());
  double alpha_acc = 0.0, full_acc = 0.0;
  failures += report(7, "subject-independent cross-validation reaches target accuracy",
                     criterion_end_to_end(&alpha_acc, &full_acc));
  std::cout << "       subject-level accuracy: alpha " << alpha_acc << "%, full " << full_acc
            << "%\n";
  failures += report(8, "no train/test subject leakage in any fold plan", criterion_leakage());
  failures += report(9, "equal seeds give byte-identical reports and checkpoints",
                     criterion_determinism());
  failures += report(10, "flop counter matches a hand count; benchmark reports both figures",
                     criterion_flops());

  fs::remove_all(g_dir);
  if (failures == 0) {
    std::cout << "all 10 criteria passed\n";
    return 0;
  }
  std::cout << failures << " criterion(s) failed\n";
  return 1;
}
