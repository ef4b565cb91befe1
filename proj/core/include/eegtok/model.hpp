#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegtok/dsp.hpp"
#include "eegtok/grad.hpp"

namespace eegtok {

enum class DilationMode { Constant, Exponential };

struct ModelConfig {
  int n_channels = 19;
  int L = 128;
  int d_model = 128;
  int bottleneck = 64;
  int k_token = 7;
  int k_res = 3;
  int n_stages = 3;  // 1..5
  int dilation_base = 2;
  DilationMode dilation_mode = DilationMode::Constant;
  int n_classes = 2;
  double dropout = 0.1;

  void validate() const;
  // Per-stage dilation rates: constant -> {m, m, ...},
  // exponential -> {m^1, m^2, ...}.
  std::vector<int> stage_dilations() const;
};

// Exact trainable-parameter total (weights, biases, norm affines; running
// statistics excluded).
std::size_t count_params(const ModelConfig& cfg);

// Forward-pass FLOP estimate at batch size 1 (2 FLOPs per multiply-accumulate
// plus elementwise work; see the implementation for the per-layer formulas).
std::size_t count_flops(const ModelConfig& cfg, int L);

namespace detail {

struct ConvLayer {
  grad::Tensor w, b, gw, gb;
  int dilation = 1, groups = 1;
  grad::Tensor x_cache;

  void init(std::size_t c_out, std::size_t c_in_per_group, std::size_t k, int dil, int grp,
            Rng& rng);
  grad::Tensor forward(const grad::Tensor& x, bool keep_cache);
  grad::Tensor backward(const grad::Tensor& grad_out);
};

struct NormLayer {
  grad::BatchNormState state{0};
  grad::BatchNormCache cache;
  grad::Tensor ggamma, gbeta;

  void init(std::size_t channels);
  grad::Tensor forward(const grad::Tensor& x, bool train, bool keep_cache);
  grad::Tensor backward(const grad::Tensor& grad_out);
};

struct ResBlock {
  ConvLayer conv1, conv2, shortcut;
  NormLayer bn1, bn2, bn_sc;
  grad::Tensor relu1_in, relu_out_in;  // pre-activation caches

  grad::Tensor forward(const grad::Tensor& x, bool train, bool keep_cache);
  grad::Tensor backward(const grad::Tensor& grad_out);
};

struct Stage {
  ResBlock block;
  ConvLayer cross;  // 1x1 shortcut path added to the block output
};

}  // namespace detail

class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t seed);

  // x [B, n_channels, L] -> logits [B, n_classes]. Training mode enables
  // batch statistics and dropout; each call advances the dropout stream.
  grad::Tensor forward(const grad::Tensor& x, bool train);
  void backward(const grad::Tensor& grad_logits);

  std::vector<std::pair<std::string, grad::Tensor*>> named_params();
  std::vector<grad::Tensor*> params();
  std::vector<const grad::Tensor*> grads();
  // Parameter/gradient pairs in matching order, for numerical checking.
  std::vector<std::pair<grad::Tensor*, grad::Tensor*>> param_grads();
  void zero_grads();

  // Intermediate results exposed for composition tests.
  grad::Tensor tokenizer_forward(const grad::Tensor& x, bool keep_cache = false);
  grad::Tensor encoder_forward(const grad::Tensor& y1, bool train, bool keep_cache = false);
  grad::Tensor classifier_forward(const grad::Tensor& y_final, bool train,
                                  bool keep_cache = false);

  const ModelConfig& config() const { return cfg_; }

  // Versioned binary checkpoint: named float32 tensors plus a config echo;
  // byte-stable across runs with equal seeds.
  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  ModelConfig cfg_;
  std::uint64_t seed_;
  std::uint64_t dropout_step_ = 0;

  detail::ConvLayer depthwise_, pointwise_;
  std::vector<detail::Stage> stages_;
  grad::Tensor ln_gamma, ln_beta, ln_ggamma, ln_gbeta;
  grad::Tensor fc_w, fc_b, fc_gw, fc_gb;

  // backward caches
  grad::Tensor pool_in_;
  std::vector<std::size_t> pool_argmax_;
  std::vector<std::uint8_t> dropout_mask_;
  grad::Tensor dropout_in_;
  grad::LayerNormCache ln_cache_;
  grad::Tensor fc_in_;
  bool last_train_ = false;
};

struct TrainOptions {
  int epochs = 100;
  int batch_size = 128;
  double lr = 1e-4;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean train loss per epoch
};

// Packs segments [first, last) of `segs` into a [B, C, L] batch tensor.
grad::Tensor segments_to_tensor(const std::vector<Segment>& segs,
                                const std::vector<std::size_t>& indices);

// Trains a fresh model on the given segments; deterministic per seed.
TrainResult train(Model& model, const std::vector<Segment>& segments, const TrainOptions& opts);

struct Predictions {
  std::vector<std::array<double, 2>> probs;
  std::vector<int> labels;
};
Predictions predict_segments(Model& model, const std::vector<Segment>& segments);

// Majority vote over segment labels; ties resolve toward AD.
Label predict_subject(const std::vector<int>& segment_labels);

}  // namespace eegtok
