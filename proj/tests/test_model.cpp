#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "eegtok/model.hpp"

using namespace eegtok;
using grad::Tensor;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.n_channels = 2;
  cfg.L = 8;
  cfg.d_model = 4;
  cfg.bottleneck = 2;
  cfg.k_token = 3;
  cfg.k_res = 3;
  cfg.n_stages = 1;
  cfg.dropout = 0.0;
  return cfg;
}

Tensor random_input(const ModelConfig& cfg, std::size_t batch, std::uint64_t seed) {
  Rng rng(seed, 77);
  Tensor x({batch, static_cast<std::size_t>(cfg.n_channels), static_cast<std::size_t>(cfg.L)});
  for (auto& v : x.v) v = rng.gaussian();
  return x;
}

std::map<std::string, Tensor*> param_map(Model& m) {
  std::map<std::string, Tensor*> out;
  for (auto& [name, t] : m.named_params()) out[name] = t;
  return out;
}

// Separable two-class toy set: class 1 carries a strong square wave on
// channel 0 that class 0 lacks.
std::vector<Segment> toy_segments(const ModelConfig& cfg, std::size_t per_class,
                                  std::uint64_t seed) {
  Rng rng(seed, 123);
  std::vector<Segment> segs;
  for (int cls = 0; cls < 2; ++cls)
    for (std::size_t i = 0; i < per_class; ++i) {
      Segment s;
      s.subject_id = "s" + std::to_string(cls) + "_" + std::to_string(i);
      s.label = cls ? Label::AD : Label::HC;
      s.index = i;
      s.data.resize(static_cast<std::size_t>(cfg.n_channels));
      for (auto& ch : s.data) {
        ch.resize(static_cast<std::size_t>(cfg.L));
        for (auto& v : ch) v = 0.3 * rng.gaussian();
      }
      if (cls)
        for (std::size_t l = 0; l < s.data[0].size(); ++l)
          s.data[0][l] += (l % 2 ? 2.0 : -2.0);
      segs.push_back(std::move(s));
    }
  return segs;
}

}  // namespace

TEST_CASE("default configuration parameter count") {
  const ModelConfig cfg;
  const std::size_t n = count_params(cfg);
  CHECK(n == 252762);
  CHECK(n >= 232000);
  CHECK(n <= 348000);
}

TEST_CASE("tiny configuration parameter count matches a hand count") {
  const ModelConfig cfg = tiny_config();
  // depthwise 2*3+2, pointwise 4*2+4, conv1 2*4*3+2, bn1 2*2, conv2 4*2*3+4,
  // bn2 2*4, shortcut 4*4+4, bn_sc 2*4, cross 4*4+4, layernorm 2*8, fc 8*2+2
  const std::size_t hand = 8 + 12 + 26 + 4 + 28 + 8 + 20 + 8 + 20 + 16 + 18;
  CHECK(count_params(cfg) == hand);
}

TEST_CASE("parameter count grows with width and depth") {
  ModelConfig a, b, c;
  b.d_model = a.d_model * 2;
  c.n_stages = a.n_stages + 1;
  CHECK(count_params(b) > count_params(a));
  CHECK(count_params(c) > count_params(a));
}

TEST_CASE("invalid configurations are rejected") {
  ModelConfig cfg;
  cfg.n_stages = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ModelConfig{};
  cfg.k_res = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ModelConfig{};
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ModelConfig{};
  cfg.d_model = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("stage dilation schedules") {
  ModelConfig cfg;
  cfg.n_stages = 3;
  cfg.dilation_base = 2;
  cfg.dilation_mode = DilationMode::Constant;
  CHECK(cfg.stage_dilations() == std::vector<int>({2, 2, 2}));
  cfg.dilation_mode = DilationMode::Exponential;
  CHECK(cfg.stage_dilations() == std::vector<int>({2, 4, 8}));
}

TEST_CASE("tiny configuration flop count matches a hand count") {
  const ModelConfig cfg = tiny_config();
  std::size_t hand = 0;
  hand += 2 * 2 * 1 * 3 * 8 + 2 * 8;  // depthwise conv
  hand += 2 * 4 * 2 * 1 * 8 + 4 * 8;  // pointwise conv
  hand += 2 * 2 * 4 * 3 * 8 + 2 * 8;  // stage conv 1
  hand += 2 * 2 * 8;                  // norm 1
  hand += 2 * 8;                      // relu
  hand += 2 * 4 * 2 * 3 * 8 + 4 * 8;  // stage conv 2
  hand += 2 * 4 * 8;                  // norm 2
  hand += 2 * 4 * 4 * 1 * 8 + 4 * 8;  // shortcut conv
  hand += 2 * 4 * 8;                  // shortcut norm
  hand += 4 * 8;                      // residual add
  hand += 4 * 8;                      // output relu
  hand += 2 * 4 * 4 * 1 * 8 + 4 * 8;  // cross conv
  hand += 4 * 8;                      // cross add
  hand += 2 * 4 * 8;                  // avg + max pooling
  hand += 7 * 8;                      // layer norm
  hand += 2 * 8 * 2 + 2;              // final linear
  CHECK(count_flops(cfg, cfg.L) == hand);
}

TEST_CASE("default configuration flop count") {
  const ModelConfig cfg;
  CHECK(count_flops(cfg, 128) == 64215426);
}

TEST_CASE("tokenizer composes the two convolutions") {
  const ModelConfig cfg = tiny_config();
  Model m(cfg, 42);
  auto p = param_map(m);
  const Tensor x = random_input(cfg, 3, 1);
  const Tensor depth = grad::conv1d(x, *p["tokenizer.depthwise.w"], *p["tokenizer.depthwise.b"],
                                    1, cfg.n_channels);
  const Tensor expect =
      grad::conv1d(depth, *p["tokenizer.pointwise.w"], *p["tokenizer.pointwise.b"]);
  const Tensor got = m.tokenizer_forward(x);
  REQUIRE(got.shape == expect.shape);
  for (std::size_t i = 0; i < got.numel(); ++i)
    CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("tokenizer rejects a wrong channel count") {
  Model m(tiny_config(), 0);
  Tensor bad({1, 5, 8});
  CHECK_THROWS_AS(m.tokenizer_forward(bad), std::invalid_argument);
}

TEST_CASE("encoder stage composes block and cross paths") {
  ModelConfig cfg = tiny_config();
  Model m(cfg, 7);
  auto p = param_map(m);
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  Rng rng(3, 0);
  Tensor y({2, d, static_cast<std::size_t>(cfg.L)});
  for (auto& v : y.v) v = rng.gaussian();

  // Reproduce the single stage by hand in eval mode. Fresh batch norm states
  // have zero running mean and unit running variance, so eval-mode norm is
  // x / sqrt(1 + eps).
  const double norm_scale = 1.0 / std::sqrt(1.0 + 1e-5);
  auto bn_eval = [&](const Tensor& t) {
    Tensor out = t;
    for (auto& v : out.v) v *= norm_scale;
    return out;
  };
  Tensor h = bn_eval(grad::conv1d(y, *p["stage0.conv1.w"], *p["stage0.conv1.b"], 2, 1));
  h = grad::relu(h);
  Tensor main = bn_eval(grad::conv1d(h, *p["stage0.conv2.w"], *p["stage0.conv2.b"]));
  Tensor sc = bn_eval(grad::conv1d(y, *p["stage0.shortcut.w"], *p["stage0.shortcut.b"]));
  for (std::size_t i = 0; i < main.numel(); ++i) main[i] += sc[i];
  Tensor expect = grad::relu(main);
  const Tensor cross = grad::conv1d(y, *p["stage0.cross.w"], *p["stage0.cross.b"]);
  for (std::size_t i = 0; i < expect.numel(); ++i) expect[i] += cross[i];

  const Tensor got = m.encoder_forward(y, false);
  REQUIRE(got.shape == expect.shape);
  for (std::size_t i = 0; i < got.numel(); ++i)
    CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-10));
}

TEST_CASE("classifier composes pooling, layer norm and the linear head") {
  ModelConfig cfg = tiny_config();
  Model m(cfg, 9);
  auto p = param_map(m);
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  Rng rng(4, 0);
  Tensor y({1, d, static_cast<std::size_t>(cfg.L)});
  for (auto& v : y.v) v = rng.gaussian();

  Tensor avg = grad::adaptive_pool(y, grad::PoolKind::Avg);
  Tensor mx = grad::adaptive_pool(y, grad::PoolKind::Max);
  Tensor cat({1, 2 * d});
  for (std::size_t c = 0; c < d; ++c) {
    cat.v[c] = avg.v[c];
    cat.v[d + c] = mx.v[c];
  }
  const Tensor normed = grad::layernorm(cat, *p["classifier.ln.gamma"], *p["classifier.ln.beta"]);
  const Tensor expect = grad::linear(normed, *p["classifier.fc.w"], *p["classifier.fc.b"]);
  const Tensor got = m.classifier_forward(y, false);
  REQUIRE(got.shape == std::vector<std::size_t>({1, 2}));
  for (std::size_t i = 0; i < got.numel(); ++i)
    CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-10));
}

TEST_CASE("evaluation forward is deterministic") {
  ModelConfig cfg = tiny_config();
  cfg.dropout = 0.4;  // must be bypassed in eval mode
  Model m(cfg, 11);
  const Tensor x = random_input(cfg, 2, 5);
  const Tensor a = m.forward(x, false);
  const Tensor b = m.forward(x, false);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("evaluation forward treats batch rows independently") {
  ModelConfig cfg = tiny_config();
  Model m(cfg, 13);
  const Tensor pair = random_input(cfg, 2, 6);
  const std::size_t row = pair.numel() / 2;
  Tensor swapped = pair;
  for (std::size_t i = 0; i < row; ++i) std::swap(swapped.v[i], swapped.v[row + i]);
  const Tensor a = m.forward(pair, false);
  const Tensor b = m.forward(swapped, false);
  CHECK(a.v[0] == doctest::Approx(b.v[2]).epsilon(1e-12));
  CHECK(a.v[1] == doctest::Approx(b.v[3]).epsilon(1e-12));
  CHECK(a.v[2] == doctest::Approx(b.v[0]).epsilon(1e-12));
  CHECK(a.v[3] == doctest::Approx(b.v[1]).epsilon(1e-12));
}

TEST_CASE("end-to-end parameter gradients pass a numerical check") {
  ModelConfig cfg = tiny_config();
  cfg.n_stages = 2;
  cfg.dilation_mode = DilationMode::Exponential;
  Model m(cfg, 21);
  const Tensor x = random_input(cfg, 3, 8);
  const std::vector<int> labels = {0, 1, 1};
  auto eval = [&](bool compute) {
    const Tensor logits = m.forward(x, false);
    const auto ce = grad::softmax_cross_entropy(logits, labels);
    if (compute) {
      m.zero_grads();
      m.backward(ce.grad_logits);
    }
    return ce.loss;
  };
  Rng rng(30, 0);
  CHECK(grad::gradcheck(eval, m.param_grads(), rng, 1e-6, 25) < 1e-4);
}

TEST_CASE("training is deterministic for equal seeds") {
  ModelConfig cfg = tiny_config();
  const auto segs = toy_segments(cfg, 8, 1);
  TrainOptions opts;
  opts.epochs = 3;
  opts.batch_size = 8;
  opts.lr = 1e-3;
  opts.seed = 5;
  Model m1(cfg, 5), m2(cfg, 5);
  const auto r1 = train(m1, segs, opts);
  const auto r2 = train(m2, segs, opts);
  CHECK(r1.loss_history == r2.loss_history);
  auto p1 = m1.params();
  auto p2 = m2.params();
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->v == p2[i]->v);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  ModelConfig cfg = tiny_config();
  const auto segs = toy_segments(cfg, 4, 2);
  Model m(cfg, 3);
  std::vector<std::vector<double>> before;
  for (auto* p : m.params()) before.push_back(p->v);
  TrainOptions opts;
  opts.epochs = 2;
  opts.batch_size = 4;
  opts.lr = 0.0;
  const auto result = train(m, segs, opts);
  CHECK(result.loss_history.size() == 2);
  auto params = m.params();
  for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i]->v == before[i]);
}

TEST_CASE("training fits a separable toy problem") {
  ModelConfig cfg = tiny_config();
  cfg.d_model = 8;
  cfg.bottleneck = 4;
  cfg.L = 16;
  const auto segs = toy_segments(cfg, 24, 3);
  Model m(cfg, 17);
  TrainOptions opts;
  opts.epochs = 40;
  opts.batch_size = 16;
  opts.lr = 3e-3;
  opts.seed = 17;
  const auto result = train(m, segs, opts);
  CHECK(result.loss_history.back() < result.loss_history.front());
  const auto preds = predict_segments(m, segs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < segs.size(); ++i)
    if (preds.labels[i] == static_cast<int>(segs[i].label)) ++correct;
  CHECK(static_cast<double>(correct) / static_cast<double>(segs.size()) >= 0.99);
}

TEST_CASE("segment predictions are consistent across batch splits") {
  ModelConfig cfg = tiny_config();
  Model m(cfg, 23);
  const auto segs = toy_segments(cfg, 6, 4);
  const auto all = predict_segments(m, segs);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::vector<Segment> one = {segs[i]};
    const auto single = predict_segments(m, one);
    CHECK(std::abs(all.probs[i][0] - single.probs[0][0]) < 1e-6);
    CHECK(std::abs(all.probs[i][1] - single.probs[0][1]) < 1e-6);
    CHECK(all.probs[i][0] + all.probs[i][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(all.labels[i] == (all.probs[i][1] >= 0.5 ? 1 : 0));
  }
}

TEST_CASE("subject vote majority and tie rules") {
  CHECK(predict_subject({1, 1, 0}) == Label::AD);
  CHECK(predict_subject({0, 0, 0, 1}) == Label::HC);
  CHECK(predict_subject({0, 1}) == Label::AD);  // ties go to the positive class
  CHECK(predict_subject({0}) == Label::HC);
  CHECK_THROWS_AS(predict_subject({}), std::invalid_argument);
}

TEST_CASE("checkpoint round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "eegtok_model_test";
  fs::create_directories(dir);
  const std::string ckpt = (dir / "model.ckpt").string();
  const std::string ckpt2 = (dir / "model2.ckpt").string();

  ModelConfig cfg = tiny_config();
  cfg.dropout = 0.1;
  const auto segs = toy_segments(cfg, 8, 6);
  Model m(cfg, 31);
  TrainOptions opts;
  opts.epochs = 2;
  opts.batch_size = 8;
  opts.seed = 31;
  train(m, segs, opts);
  m.save(ckpt);

  Model loaded = Model::load(ckpt);
  CHECK(loaded.config().d_model == cfg.d_model);
  CHECK(loaded.config().n_stages == cfg.n_stages);
  CHECK(loaded.config().dropout == doctest::Approx(cfg.dropout));

  // Serialization quantizes to float32, so predictions agree to that level.
  const auto a = predict_segments(m, segs);
  const auto b = predict_segments(loaded, segs);
  for (std::size_t i = 0; i < segs.size(); ++i)
    CHECK(std::abs(a.probs[i][1] - b.probs[i][1]) < 1e-4);

  // Save -> load -> save must be byte-stable.
  loaded.save(ckpt2);
  std::ifstream f1(ckpt, std::ios::binary), f2(ckpt2, std::ios::binary);
  const std::string bytes1((std::istreambuf_iterator<char>(f1)), {});
  const std::string bytes2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(bytes1 == bytes2);

  CHECK_THROWS(Model::load((dir / "missing.ckpt").string()));
  const std::string garbage = (dir / "garbage.ckpt").string();
  std::ofstream(garbage, std::ios::binary) << "not a checkpoint";
  CHECK_THROWS(Model::load(garbage));
  fs::remove_all(dir);
}
