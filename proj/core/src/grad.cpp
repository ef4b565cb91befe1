#include "eegtok/grad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace eegtok::grad {
namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

}  // namespace

// ---- convolution -----------------------------------------------------------

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int dilation, int groups) {
  require(x.shape.size() == 3 && w.shape.size() == 3, "conv1d: expect 3-D x and w");
  const std::size_t B = x.shape[0], Cin = x.shape[1], L = x.shape[2];
  const std::size_t Cout = w.shape[0], Cig = w.shape[1], K = w.shape[2];
  require(dilation >= 1, "conv1d: dilation must be >= 1");
  require(groups >= 1 && Cin % static_cast<std::size_t>(groups) == 0,
          "conv1d: C_in not divisible by groups");
  require(Cig == Cin / static_cast<std::size_t>(groups), "conv1d: weight channel mismatch");
  require(Cout % static_cast<std::size_t>(groups) == 0, "conv1d: C_out not divisible by groups");
  require(K % 2 == 1, "conv1d: kernel size must be odd");
  require(bias.numel() == 0 || bias.numel() == Cout, "conv1d: bad bias shape");

  const std::size_t Cog = Cout / static_cast<std::size_t>(groups);
  const long half = static_cast<long>(dilation) * (static_cast<long>(K) - 1) / 2;
  Tensor y({B, Cout, L});
  const long Ll = static_cast<long>(L);

  if (groups == 1) {
    // Each kernel tap is a [Cout x Cin] x [Cin x L'] product over the tap's
    // valid column range; this carries nearly all the arithmetic.
    RowMat wk(static_cast<Eigen::Index>(Cout), static_cast<Eigen::Index>(Cin));
    for (std::size_t b = 0; b < B; ++b) {
      CMapMat xb(&x.v[b * Cin * L], static_cast<Eigen::Index>(Cin), static_cast<Eigen::Index>(L));
      MapMat yb(&y.v[b * Cout * L], static_cast<Eigen::Index>(Cout),
                static_cast<Eigen::Index>(L));
      if (bias.numel())
        for (std::size_t co = 0; co < Cout; ++co) yb.row(static_cast<Eigen::Index>(co)).setConstant(bias[co]);
      else
        yb.setZero();
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t co = 0; co < Cout; ++co)
          for (std::size_t ci = 0; ci < Cin; ++ci)
            wk(static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(ci)) =
                w.v[(co * Cin + ci) * K + k];
        const long off = static_cast<long>(k) * dilation - half;
        const long lo = std::max(0L, -off), hi = std::min(Ll, Ll - off);
        if (lo >= hi) continue;
        yb.middleCols(lo, hi - lo).noalias() += wk * xb.middleCols(lo + off, hi - lo);
      }
    }
    return y;
  }

  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      double* yr = &y.v[(b * Cout + co) * L];
      if (bias.numel()) std::fill(yr, yr + L, bias[co]);
      const std::size_t g = co / Cog;
      for (std::size_t cl = 0; cl < Cig; ++cl) {
        const std::size_t ci = g * Cig + cl;
        const double* xr = &x.v[(b * Cin + ci) * L];
        for (std::size_t k = 0; k < K; ++k) {
          const double wv = w.v[(co * Cig + cl) * K + k];
          if (wv == 0.0) continue;
          const long off = static_cast<long>(k) * dilation - half;
          const long lo = std::max(0L, -off), hi = std::min(Ll, Ll - off);
          for (long l = lo; l < hi; ++l) yr[l] += wv * xr[l + off];
        }
      }
    }
  }
  return y;
}

ConvGrads conv1d_backward(const Tensor& grad_out, const Tensor& x, const Tensor& w, int dilation,
                          int groups) {
  const std::size_t B = x.shape[0], Cin = x.shape[1], L = x.shape[2];
  const std::size_t Cout = w.shape[0], Cig = w.shape[1], K = w.shape[2];
  require(grad_out.shape == std::vector<std::size_t>({B, Cout, L}),
          "conv1d_backward: grad shape mismatch");
  const std::size_t Cog = Cout / static_cast<std::size_t>(groups);
  const long half = static_cast<long>(dilation) * (static_cast<long>(K) - 1) / 2;
  const long Ll = static_cast<long>(L);

  ConvGrads grads{Tensor(x.shape), Tensor(w.shape), Tensor({Cout})};

  if (groups == 1) {
    RowMat wk(static_cast<Eigen::Index>(Cout), static_cast<Eigen::Index>(Cin));
    RowMat gwk(static_cast<Eigen::Index>(Cout), static_cast<Eigen::Index>(Cin));
    for (std::size_t b = 0; b < B; ++b) {
      CMapMat xb(&x.v[b * Cin * L], static_cast<Eigen::Index>(Cin), static_cast<Eigen::Index>(L));
      CMapMat gyb(&grad_out.v[b * Cout * L], static_cast<Eigen::Index>(Cout),
                  static_cast<Eigen::Index>(L));
      MapMat gxb(&grads.gx.v[b * Cin * L], static_cast<Eigen::Index>(Cin),
                 static_cast<Eigen::Index>(L));
      // plain loop: Eigen's reduction order over an unaligned map depends on
      // the buffer address, which would break bitwise reproducibility
      for (std::size_t co = 0; co < Cout; ++co) {
        double acc = 0.0;
        for (std::size_t l = 0; l < L; ++l) acc += grad_out.v[(b * Cout + co) * L + l];
        grads.gb[co] += acc;
      }
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t co = 0; co < Cout; ++co)
          for (std::size_t ci = 0; ci < Cin; ++ci)
            wk(static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(ci)) =
                w.v[(co * Cin + ci) * K + k];
        const long off = static_cast<long>(k) * dilation - half;
        const long lo = std::max(0L, -off), hi = std::min(Ll, Ll - off);
        if (lo >= hi) continue;
        gxb.middleCols(lo + off, hi - lo).noalias() +=
            wk.transpose() * gyb.middleCols(lo, hi - lo);
        gwk.noalias() = gyb.middleCols(lo, hi - lo) * xb.middleCols(lo + off, hi - lo).transpose();
        for (std::size_t co = 0; co < Cout; ++co)
          for (std::size_t ci = 0; ci < Cin; ++ci)
            grads.gw.v[(co * Cin + ci) * K + k] +=
                gwk(static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(ci));
      }
    }
    return grads;
  }

  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      const double* gy = &grad_out.v[(b * Cout + co) * L];
      double gb = 0.0;
      for (std::size_t l = 0; l < L; ++l) gb += gy[l];
      grads.gb[co] += gb;
      const std::size_t g = co / Cog;
      for (std::size_t cl = 0; cl < Cig; ++cl) {
        const std::size_t ci = g * Cig + cl;
        const double* xr = &x.v[(b * Cin + ci) * L];
        double* gxr = &grads.gx.v[(b * Cin + ci) * L];
        for (std::size_t k = 0; k < K; ++k) {
          const double wv = w.v[(co * Cig + cl) * K + k];
          const long off = static_cast<long>(k) * dilation - half;
          const long lo = std::max(0L, -off), hi = std::min(Ll, Ll - off);
          double gw = 0.0;
          for (long l = lo; l < hi; ++l) {
            gw += gy[l] * xr[l + off];
            gxr[l + off] += wv * gy[l];
          }
          grads.gw.v[(co * Cig + cl) * K + k] += gw;
        }
      }
    }
  }
  return grads;
}

// ---- batch normalization ---------------------------------------------------

BatchNormState::BatchNormState(std::size_t channels)
    : gamma({channels}), beta({channels}), running_mean({channels}), running_var({channels}) {
  std::fill(gamma.v.begin(), gamma.v.end(), 1.0);
  std::fill(running_var.v.begin(), running_var.v.end(), 1.0);
}

Tensor batchnorm1d(const Tensor& x, BatchNormState& state, bool train, BatchNormCache* cache) {
  require(x.shape.size() == 3, "batchnorm1d: expect [B, C, L]");
  const std::size_t B = x.shape[0], C = x.shape[1], L = x.shape[2];
  require(state.gamma.numel() == C, "batchnorm1d: channel mismatch");
  const std::size_t n = B * L;
  require(!train || n > 1, "batchnorm1d: need B*L > 1 in train mode");

  Tensor y(x.shape);
  Tensor xhat(x.shape);
  std::vector<double> invstd(C);
  for (std::size_t c = 0; c < C; ++c) {
    double mean, var;
    if (train) {
      double s = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double* xr = &x.v[(b * C + c) * L];
        for (std::size_t l = 0; l < L; ++l) s += xr[l];
      }
      mean = s / static_cast<double>(n);
      double s2 = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double* xr = &x.v[(b * C + c) * L];
        for (std::size_t l = 0; l < L; ++l) s2 += (xr[l] - mean) * (xr[l] - mean);
      }
      var = s2 / static_cast<double>(n);
      state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean;
      state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * var;
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const double is = 1.0 / std::sqrt(var + state.eps);
    invstd[c] = is;
    const double gm = state.gamma[c], bt = state.beta[c];
    for (std::size_t b = 0; b < B; ++b) {
      const double* xr = &x.v[(b * C + c) * L];
      double* xh = &xhat.v[(b * C + c) * L];
      double* yr = &y.v[(b * C + c) * L];
      for (std::size_t l = 0; l < L; ++l) {
        xh[l] = (xr[l] - mean) * is;
        yr[l] = gm * xh[l] + bt;
      }
    }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->invstd = std::move(invstd);
    cache->train = train;
  }
  return y;
}

BatchNormGrads batchnorm1d_backward(const Tensor& grad_out, const BatchNormCache& cache,
                                    const BatchNormState& state) {
  const auto& xhat = cache.xhat;
  require(grad_out.shape == xhat.shape, "batchnorm1d_backward: shape mismatch");
  const std::size_t B = xhat.shape[0], C = xhat.shape[1], L = xhat.shape[2];
  const double n = static_cast<double>(B * L);

  BatchNormGrads grads{Tensor(xhat.shape), Tensor({C}), Tensor({C})};
  for (std::size_t c = 0; c < C; ++c) {
    double sum_gy = 0.0, sum_gy_xhat = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const double* gy = &grad_out.v[(b * C + c) * L];
      const double* xh = &xhat.v[(b * C + c) * L];
      for (std::size_t l = 0; l < L; ++l) {
        sum_gy += gy[l];
        sum_gy_xhat += gy[l] * xh[l];
      }
    }
    grads.gbeta[c] = sum_gy;
    grads.ggamma[c] = sum_gy_xhat;
    const double gis = state.gamma[c] * cache.invstd[c];
    for (std::size_t b = 0; b < B; ++b) {
      const double* gy = &grad_out.v[(b * C + c) * L];
      const double* xh = &xhat.v[(b * C + c) * L];
      double* gx = &grads.gx.v[(b * C + c) * L];
      for (std::size_t l = 0; l < L; ++l) {
        if (cache.train)
          gx[l] = gis / n * (n * gy[l] - sum_gy - xh[l] * sum_gy_xhat);
        else
          gx[l] = gis * gy[l];  // running stats are constants in eval mode
      }
    }
  }
  return grads;
}

// ---- elementwise -----------------------------------------------------------

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.v) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& grad_out, const Tensor& x) {
  require(grad_out.same_shape(x), "relu_backward: shape mismatch");
  Tensor gx = grad_out;
  for (std::size_t i = 0; i < gx.numel(); ++i)
    if (x[i] <= 0.0) gx[i] = 0.0;
  return gx;
}

// ---- pooling ---------------------------------------------------------------

Tensor adaptive_pool(const Tensor& x, PoolKind kind, std::vector<std::size_t>* argmax) {
  require(x.shape.size() == 3, "adaptive_pool: expect [B, C, L]");
  const std::size_t B = x.shape[0], C = x.shape[1], L = x.shape[2];
  require(L >= 1, "adaptive_pool: empty temporal axis");
  Tensor y({B, C, 1});
  if (argmax) argmax->assign(B * C, 0);
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    const double* xr = &x.v[bc * L];
    if (kind == PoolKind::Avg) {
      double s = 0.0;
      for (std::size_t l = 0; l < L; ++l) s += xr[l];
      y[bc] = s / static_cast<double>(L);
    } else {
      std::size_t best = 0;
      for (std::size_t l = 1; l < L; ++l)
        if (xr[l] > xr[best]) best = l;
      y[bc] = xr[best];
      if (argmax) (*argmax)[bc] = best;
    }
  }
  return y;
}

Tensor adaptive_pool_backward(const Tensor& grad_out, const Tensor& x, PoolKind kind,
                              const std::vector<std::size_t>& argmax) {
  const std::size_t B = x.shape[0], C = x.shape[1], L = x.shape[2];
  require(grad_out.numel() == B * C, "adaptive_pool_backward: shape mismatch");
  Tensor gx(x.shape);
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    if (kind == PoolKind::Avg) {
      const double g = grad_out[bc] / static_cast<double>(L);
      for (std::size_t l = 0; l < L; ++l) gx.v[bc * L + l] = g;
    } else {
      gx.v[bc * L + argmax[bc]] = grad_out[bc];
    }
  }
  return gx;
}

// ---- layer normalization ---------------------------------------------------

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, LayerNormCache* cache,
                 double eps) {
  require(x.shape.size() == 2, "layernorm: expect [B, F]");
  const std::size_t B = x.shape[0], F = x.shape[1];
  require(F >= 2, "layernorm: feature dim must be >= 2");
  require(gamma.numel() == F && beta.numel() == F, "layernorm: affine shape mismatch");

  Tensor y(x.shape), xhat(x.shape);
  std::vector<double> invstd(B);
  for (std::size_t b = 0; b < B; ++b) {
    const double* xr = &x.v[b * F];
    double mean = 0.0;
    for (std::size_t f = 0; f < F; ++f) mean += xr[f];
    mean /= static_cast<double>(F);
    double var = 0.0;
    for (std::size_t f = 0; f < F; ++f) var += (xr[f] - mean) * (xr[f] - mean);
    var /= static_cast<double>(F);
    const double is = 1.0 / std::sqrt(var + eps);
    invstd[b] = is;
    for (std::size_t f = 0; f < F; ++f) {
      xhat.v[b * F + f] = (xr[f] - mean) * is;
      y.v[b * F + f] = gamma[f] * xhat.v[b * F + f] + beta[f];
    }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->invstd = std::move(invstd);
  }
  return y;
}

LayerNormGrads layernorm_backward(const Tensor& grad_out, const LayerNormCache& cache,
                                  const Tensor& gamma) {
  const auto& xhat = cache.xhat;
  require(grad_out.same_shape(xhat), "layernorm_backward: shape mismatch");
  const std::size_t B = xhat.shape[0], F = xhat.shape[1];
  LayerNormGrads grads{Tensor(xhat.shape), Tensor({F}), Tensor({F})};
  for (std::size_t b = 0; b < B; ++b) {
    const double* gy = &grad_out.v[b * F];
    const double* xh = &xhat.v[b * F];
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      const double gh = gy[f] * gamma[f];
      sum_g += gh;
      sum_gx += gh * xh[f];
      grads.ggamma[f] += gy[f] * xh[f];
      grads.gbeta[f] += gy[f];
    }
    const double n = static_cast<double>(F);
    for (std::size_t f = 0; f < F; ++f) {
      const double gh = gy[f] * gamma[f];
      grads.gx.v[b * F + f] = cache.invstd[b] * (gh - sum_g / n - xh[f] * sum_gx / n);
    }
  }
  return grads;
}

// ---- linear ----------------------------------------------------------------

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.shape.size() == 2 && w.shape.size() == 2, "linear: expect 2-D x and w");
  const std::size_t B = x.shape[0], F = x.shape[1], O = w.shape[1];
  require(w.shape[0] == F, "linear: shape mismatch");
  require(b.numel() == 0 || b.numel() == O, "linear: bad bias");
  Tensor y({B, O});
  for (std::size_t i = 0; i < B; ++i) {
    double* yr = &y.v[i * O];
    if (b.numel())
      for (std::size_t o = 0; o < O; ++o) yr[o] = b[o];
    const double* xr = &x.v[i * F];
    for (std::size_t f = 0; f < F; ++f) {
      const double xv = xr[f];
      const double* wr = &w.v[f * O];
      for (std::size_t o = 0; o < O; ++o) yr[o] += xv * wr[o];
    }
  }
  return y;
}

LinearGrads linear_backward(const Tensor& grad_out, const Tensor& x, const Tensor& w) {
  const std::size_t B = x.shape[0], F = x.shape[1], O = w.shape[1];
  require(grad_out.shape == std::vector<std::size_t>({B, O}), "linear_backward: shape mismatch");
  LinearGrads grads{Tensor(x.shape), Tensor(w.shape), Tensor({O})};
  for (std::size_t i = 0; i < B; ++i) {
    const double* gy = &grad_out.v[i * O];
    const double* xr = &x.v[i * F];
    for (std::size_t o = 0; o < O; ++o) grads.gb[o] += gy[o];
    for (std::size_t f = 0; f < F; ++f) {
      const double* wr = &w.v[f * O];
      double acc = 0.0;
      for (std::size_t o = 0; o < O; ++o) {
        acc += wr[o] * gy[o];
        grads.gw.v[f * O + o] += xr[f] * gy[o];
      }
      grads.gx.v[i * F + f] = acc;
    }
  }
  return grads;
}

// ---- dropout ---------------------------------------------------------------

Tensor dropout(const Tensor& x, double p, bool train, Rng& rng,
               std::vector<std::uint8_t>* mask) {
  require(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1)");
  if (!train || p == 0.0) {
    if (mask) mask->assign(x.numel(), 1);
    return x;
  }
  Tensor y = x;
  const double scale = 1.0 / (1.0 - p);
  if (mask) mask->assign(x.numel(), 1);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    if (rng.uniform() < p) {
      y[i] = 0.0;
      if (mask) (*mask)[i] = 0;
    } else {
      y[i] *= scale;
    }
  }
  return y;
}

Tensor dropout_backward(const Tensor& grad_out, double p,
                        const std::vector<std::uint8_t>& mask) {
  require(mask.size() == grad_out.numel(), "dropout_backward: mask size mismatch");
  Tensor gx = grad_out;
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] = mask[i] ? gx[i] * scale : 0.0;
  return gx;
}

// ---- loss ------------------------------------------------------------------

CeResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  require(logits.shape.size() == 2, "cross_entropy: expect [B, n_classes]");
  const std::size_t B = logits.shape[0], C = logits.shape[1];
  require(labels.size() == B, "cross_entropy: label count mismatch");
  CeResult res;
  res.grad_logits = Tensor(logits.shape);
  res.probs = Tensor(logits.shape);
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const int label = labels[b];
    require(label >= 0 && static_cast<std::size_t>(label) < C, "cross_entropy: invalid label");
    const double* lr = &logits.v[b * C];
    const double mx = *std::max_element(lr, lr + C);
    double denom = 0.0;
    for (std::size_t c = 0; c < C; ++c) denom += std::exp(lr[c] - mx);
    const double log_denom = std::log(denom);
    for (std::size_t c = 0; c < C; ++c) {
      const double pc = std::exp(lr[c] - mx) / denom;
      res.probs.v[b * C + c] = pc;
      res.grad_logits.v[b * C + c] =
          (pc - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) / static_cast<double>(B);
    }
    loss += -(lr[static_cast<std::size_t>(label)] - mx - log_denom);
  }
  res.loss = loss / static_cast<double>(B);
  return res;
}

// ---- optimizer -------------------------------------------------------------

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state) {
  require(params.size() == grads.size(), "adam_step: param/grad count mismatch");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->shape);
      state.v.emplace_back(p->shape);
    }
  }
  require(state.m.size() == params.size(), "adam_step: state size mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, state.t);
  const double bc2 = 1.0 - std::pow(state.beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    require(p.same_shape(g), "adam_step: shape mismatch");
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.numel(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

// ---- gradient checking -----------------------------------------------------

double gradcheck(const std::function<double(bool)>& eval,
                 const std::vector<std::pair<Tensor*, Tensor*>>& param_grads, Rng& rng, double h,
                 std::size_t coords_per_tensor) {
  const double base = eval(true);
  if (!std::isfinite(base)) throw std::runtime_error("gradcheck: non-finite loss");

  // Snapshot analytic gradients before numeric probing overwrites them.
  std::vector<Tensor> analytic;
  analytic.reserve(param_grads.size());
  for (const auto& [p, g] : param_grads) {
    require(p->same_shape(*g), "gradcheck: param/grad shape mismatch");
    analytic.push_back(*g);
  }

  double max_rel = 0.0;
  for (std::size_t ti = 0; ti < param_grads.size(); ++ti) {
    Tensor& p = *param_grads[ti].first;
    const Tensor& ana = analytic[ti];
    std::vector<std::size_t> coords;
    if (p.numel() <= coords_per_tensor) {
      coords.resize(p.numel());
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
      for (std::size_t i = 0; i < coords_per_tensor; ++i)
        coords.push_back(static_cast<std::size_t>(rng.uniform_int(p.numel())));
    }
    for (std::size_t idx : coords) {
      const double orig = p[idx];
      const double step = h * std::max(1.0, std::abs(orig));
      p[idx] = orig + step;
      const double fp = eval(false);
      p[idx] = orig - step;
      const double fm = eval(false);
      p[idx] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      const double rel =
          std::abs(ana[idx] - numeric) / std::max({std::abs(ana[idx]), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace eegtok::grad
