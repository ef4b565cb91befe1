#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eegtok/rng.hpp"

namespace eegtok::grad {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    v.assign(numel_of(shape), 0.0);
  }
  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }
  std::size_t numel() const { return v.size(); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// ---- convolution -----------------------------------------------------------

// 1-D convolution with "same" zero padding.
//   x [B, C_in, L], w [C_out, C_in/groups, K] (K odd), bias [C_out] or empty.
// groups == C_in gives a depthwise convolution; K == 1 a pointwise one.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int dilation = 1,
              int groups = 1);

struct ConvGrads {
  Tensor gx, gw, gb;
};
ConvGrads conv1d_backward(const Tensor& grad_out, const Tensor& x, const Tensor& w,
                          int dilation = 1, int groups = 1);

// ---- batch normalization ---------------------------------------------------

struct BatchNormState {
  Tensor gamma, beta;              // [C]
  Tensor running_mean, running_var;  // [C]
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNormState(std::size_t channels = 0);
};

struct BatchNormCache {
  Tensor xhat;
  std::vector<double> invstd;  // per channel
  bool train = false;
};

// x [B, C, L]; train mode normalizes over (B, L) per channel and updates
// running statistics, eval mode applies the running statistics.
Tensor batchnorm1d(const Tensor& x, BatchNormState& state, bool train,
                   BatchNormCache* cache = nullptr);

struct BatchNormGrads {
  Tensor gx, ggamma, gbeta;
};
BatchNormGrads batchnorm1d_backward(const Tensor& grad_out, const BatchNormCache& cache,
                                    const BatchNormState& state);

// ---- elementwise -----------------------------------------------------------

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& grad_out, const Tensor& x);

// ---- pooling ---------------------------------------------------------------

enum class PoolKind { Avg, Max };

// x [B, C, L] -> [B, C, 1]. For Max, argmax indices (ties to the lowest
// index) are recorded for the backward pass.
Tensor adaptive_pool(const Tensor& x, PoolKind kind, std::vector<std::size_t>* argmax = nullptr);
Tensor adaptive_pool_backward(const Tensor& grad_out, const Tensor& x, PoolKind kind,
                              const std::vector<std::size_t>& argmax);

// ---- layer normalization ---------------------------------------------------

struct LayerNormCache {
  Tensor xhat;
  std::vector<double> invstd;  // per sample
};

// x [B, F]; normalizes each row over the feature dimension.
Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 LayerNormCache* cache = nullptr, double eps = 1e-5);

struct LayerNormGrads {
  Tensor gx, ggamma, gbeta;
};
LayerNormGrads layernorm_backward(const Tensor& grad_out, const LayerNormCache& cache,
                                  const Tensor& gamma);

// ---- linear ----------------------------------------------------------------

// x [B, F], w [F, O], b [O] -> [B, O]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

struct LinearGrads {
  Tensor gx, gw, gb;
};
LinearGrads linear_backward(const Tensor& grad_out, const Tensor& x, const Tensor& w);

// ---- dropout ---------------------------------------------------------------

// Train mode zeroes entries with probability p and scales survivors by
// 1/(1-p); eval mode is the identity. Deterministic given the rng stream.
Tensor dropout(const Tensor& x, double p, bool train, Rng& rng,
               std::vector<std::uint8_t>* mask = nullptr);
Tensor dropout_backward(const Tensor& grad_out, double p,
                        const std::vector<std::uint8_t>& mask);

// ---- loss ------------------------------------------------------------------

struct CeResult {
  double loss = 0.0;
  Tensor grad_logits;  // (softmax - onehot) / B
  Tensor probs;        // [B, n_classes]
};
CeResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// ---- optimizer -------------------------------------------------------------

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<Tensor> m, v;
};

// Bias-corrected Adam over a parameter/gradient list; moment slots are
// allocated lazily on the first step.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state);

// ---- gradient checking -----------------------------------------------------

// eval(true) must run forward+backward, filling each grads tensor; eval(false)
// only needs the loss. Central differences are taken over a random subsample
// of at least `coords_per_tensor` coordinates per tensor. Returns the maximum
// relative error.
double gradcheck(const std::function<double(bool)>& eval,
                 const std::vector<std::pair<Tensor*, Tensor*>>& param_grads, Rng& rng,
                 double h = 1e-6, std::size_t coords_per_tensor = 200);

}  // namespace eegtok::grad
