#include "eegtok/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace eegtok {

using grad::Tensor;

void ModelConfig::validate() const {
  if (n_stages < 1 || n_stages > 5)
    throw std::invalid_argument("model: n_stages must be in [1, 5]");
  if (k_token % 2 == 0 || k_res % 2 == 0)
    throw std::invalid_argument("model: kernel sizes must be odd");
  if (d_model <= 0 || bottleneck <= 0 || n_channels <= 0 || L <= 0 || n_classes <= 0)
    throw std::invalid_argument("model: dimensions must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("model: bad dropout rate");
  if (dilation_base < 1) throw std::invalid_argument("model: dilation base must be >= 1");
}

std::vector<int> ModelConfig::stage_dilations() const {
  validate();
  std::vector<int> d(static_cast<std::size_t>(n_stages));
  int cur = dilation_base;
  for (int j = 0; j < n_stages; ++j) {
    d[static_cast<std::size_t>(j)] = cur;
    if (dilation_mode == DilationMode::Exponential) cur *= dilation_base;
  }
  return d;
}

std::size_t count_params(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t C = static_cast<std::size_t>(cfg.n_channels);
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  const std::size_t bn = static_cast<std::size_t>(cfg.bottleneck);
  const std::size_t kt = static_cast<std::size_t>(cfg.k_token);
  const std::size_t kr = static_cast<std::size_t>(cfg.k_res);
  const std::size_t nc = static_cast<std::size_t>(cfg.n_classes);

  std::size_t total = 0;
  total += C * kt + C;      // depthwise conv
  total += d * C + d;       // pointwise conv
  const std::size_t per_stage = (bn * d * kr + bn) + 2 * bn   // dilated conv + norm
                                + (d * bn * kr + d) + 2 * d   // second conv + norm
                                + (d * d + d) + 2 * d         // 1x1 shortcut + norm
                                + (d * d + d);                // cross 1x1 conv
  total += per_stage * static_cast<std::size_t>(cfg.n_stages);
  total += 2 * (2 * d);     // layer norm affine over the pooled vector
  total += 2 * d * nc + nc; // final linear
  return total;
}

std::size_t count_flops(const ModelConfig& cfg, int L_in) {
  cfg.validate();
  const std::size_t L = static_cast<std::size_t>(L_in);
  const std::size_t C = static_cast<std::size_t>(cfg.n_channels);
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  const std::size_t bn = static_cast<std::size_t>(cfg.bottleneck);
  const std::size_t kt = static_cast<std::size_t>(cfg.k_token);
  const std::size_t kr = static_cast<std::size_t>(cfg.k_res);
  const std::size_t nc = static_cast<std::size_t>(cfg.n_classes);

  // Conventions: conv = 2*Cout*(Cin/g)*K*L + Cout*L; eval-mode batch norm =
  // 2*C*L; ReLU and elementwise adds = C*L; pooling = C*L per kind;
  // layer norm = 7*F; linear = 2*F*O + O.
  auto conv = [L](std::size_t cout, std::size_t cin_g, std::size_t k) {
    return 2 * cout * cin_g * k * L + cout * L;
  };
  std::size_t total = 0;
  total += conv(C, 1, kt);  // depthwise (groups = C)
  total += conv(d, C, 1);   // pointwise
  for (int j = 0; j < cfg.n_stages; ++j) {
    total += conv(bn, d, kr) + 2 * bn * L + bn * L;  // conv1 + bn1 + relu
    total += conv(d, bn, kr) + 2 * d * L;            // conv2 + bn2
    total += conv(d, d, 1) + 2 * d * L;              // shortcut + norm
    total += d * L;                                  // main + shortcut add
    total += d * L;                                  // final relu
    total += conv(d, d, 1);                          // cross 1x1
    total += d * L;                                  // block + cross add
  }
  total += 2 * d * L;      // avg + max pooling
  total += 7 * (2 * d);    // layer norm
  total += 2 * (2 * d) * nc + nc;  // linear
  return total;
}

namespace detail {

void ConvLayer::init(std::size_t c_out, std::size_t c_in_per_group, std::size_t k, int dil,
                     int grp, Rng& rng) {
  dilation = dil;
  groups = grp;
  w = Tensor({c_out, c_in_per_group, k});
  b = Tensor({c_out});
  const double bound = std::sqrt(1.0 / static_cast<double>(c_in_per_group * k));
  for (auto& v : w.v) v = rng.uniform(-bound, bound);
  for (auto& v : b.v) v = rng.uniform(-bound, bound);
  gw = Tensor(w.shape);
  gb = Tensor(b.shape);
}

Tensor ConvLayer::forward(const Tensor& x, bool keep_cache) {
  if (keep_cache) x_cache = x;
  return grad::conv1d(x, w, b, dilation, groups);
}

Tensor ConvLayer::backward(const Tensor& grad_out) {
  auto g = grad::conv1d_backward(grad_out, x_cache, w, dilation, groups);
  for (std::size_t i = 0; i < gw.numel(); ++i) gw[i] += g.gw[i];
  for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += g.gb[i];
  return std::move(g.gx);
}

void NormLayer::init(std::size_t channels) {
  state = grad::BatchNormState(channels);
  ggamma = Tensor({channels});
  gbeta = Tensor({channels});
}

Tensor NormLayer::forward(const Tensor& x, bool train, bool keep_cache) {
  return grad::batchnorm1d(x, state, train, keep_cache ? &cache : nullptr);
}

Tensor NormLayer::backward(const Tensor& grad_out) {
  auto g = grad::batchnorm1d_backward(grad_out, cache, state);
  for (std::size_t i = 0; i < ggamma.numel(); ++i) ggamma[i] += g.ggamma[i];
  for (std::size_t i = 0; i < gbeta.numel(); ++i) gbeta[i] += g.gbeta[i];
  return std::move(g.gx);
}

Tensor ResBlock::forward(const Tensor& x, bool train, bool keep_cache) {
  relu1_in = bn1.forward(conv1.forward(x, keep_cache), train, keep_cache);
  Tensor h = grad::relu(relu1_in);
  Tensor main = bn2.forward(conv2.forward(h, keep_cache), train, keep_cache);
  Tensor sc = bn_sc.forward(shortcut.forward(x, keep_cache), train, keep_cache);
  relu_out_in = std::move(main);
  for (std::size_t i = 0; i < relu_out_in.numel(); ++i) relu_out_in[i] += sc[i];
  return grad::relu(relu_out_in);
}

Tensor ResBlock::backward(const Tensor& grad_out) {
  Tensor g = grad::relu_backward(grad_out, relu_out_in);
  Tensor gx = shortcut.backward(bn_sc.backward(g));
  Tensor gh = conv2.backward(bn2.backward(g));
  Tensor g1 = grad::relu_backward(gh, relu1_in);
  Tensor gx_main = conv1.backward(bn1.backward(g1));
  for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += gx_main[i];
  return gx;
}

}  // namespace detail

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  Rng root(seed, 0xABCD);
  std::uint64_t layer = 0;
  const auto C = static_cast<std::size_t>(cfg_.n_channels);
  const auto d = static_cast<std::size_t>(cfg_.d_model);
  const auto bn = static_cast<std::size_t>(cfg_.bottleneck);

  Rng r = root.split(layer++);
  depthwise_.init(C, 1, static_cast<std::size_t>(cfg_.k_token), 1, cfg_.n_channels, r);
  r = root.split(layer++);
  pointwise_.init(d, C, 1, 1, 1, r);

  const auto dilations = cfg_.stage_dilations();
  stages_.resize(static_cast<std::size_t>(cfg_.n_stages));
  for (std::size_t j = 0; j < stages_.size(); ++j) {
    auto& s = stages_[j];
    r = root.split(layer++);
    s.block.conv1.init(bn, d, static_cast<std::size_t>(cfg_.k_res), dilations[j], 1, r);
    s.block.bn1.init(bn);
    r = root.split(layer++);
    s.block.conv2.init(d, bn, static_cast<std::size_t>(cfg_.k_res), 1, 1, r);
    s.block.bn2.init(d);
    r = root.split(layer++);
    s.block.shortcut.init(d, d, 1, 1, 1, r);
    s.block.bn_sc.init(d);
    r = root.split(layer++);
    s.cross.init(d, d, 1, 1, 1, r);
  }

  const std::size_t F = 2 * d;
  ln_gamma = Tensor({F});
  ln_beta = Tensor({F});
  std::fill(ln_gamma.v.begin(), ln_gamma.v.end(), 1.0);
  ln_ggamma = Tensor({F});
  ln_gbeta = Tensor({F});

  r = root.split(layer++);
  fc_w = Tensor({F, static_cast<std::size_t>(cfg_.n_classes)});
  fc_b = Tensor({static_cast<std::size_t>(cfg_.n_classes)});
  const double bound = std::sqrt(1.0 / static_cast<double>(F));
  for (auto& v : fc_w.v) v = r.uniform(-bound, bound);
  for (auto& v : fc_b.v) v = r.uniform(-bound, bound);
  fc_gw = Tensor(fc_w.shape);
  fc_gb = Tensor(fc_b.shape);
}

Tensor Model::tokenizer_forward(const Tensor& x, bool) {
  if (x.shape.size() != 3 || x.shape[1] != static_cast<std::size_t>(cfg_.n_channels))
    throw std::invalid_argument("model: wrong channel count");
  return pointwise_.forward(depthwise_.forward(x, true), true);
}

Tensor Model::encoder_forward(const Tensor& y1, bool train, bool) {
  Tensor y = y1;
  for (auto& s : stages_) {
    Tensor z = s.block.forward(y, train, true);
    Tensor c = s.cross.forward(y, true);
    for (std::size_t i = 0; i < z.numel(); ++i) z[i] += c[i];
    y = std::move(z);
  }
  return y;
}

Tensor Model::classifier_forward(const Tensor& y_final, bool train, bool) {
  pool_in_ = y_final;
  const std::size_t B = y_final.shape[0], d = y_final.shape[1];
  Tensor avg = grad::adaptive_pool(y_final, grad::PoolKind::Avg);
  Tensor mx = grad::adaptive_pool(y_final, grad::PoolKind::Max, &pool_argmax_);
  Tensor cat({B, 2 * d});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < d; ++c) {
      cat.v[b * 2 * d + c] = avg.v[b * d + c];
      cat.v[b * 2 * d + d + c] = mx.v[b * d + c];
    }
  }
  dropout_in_ = cat;
  last_train_ = train;
  Rng drop_rng(seed_, 0xD409 + dropout_step_);
  if (train) ++dropout_step_;
  Tensor dropped = grad::dropout(cat, cfg_.dropout, train, drop_rng, &dropout_mask_);
  fc_in_ = grad::layernorm(dropped, ln_gamma, ln_beta, &ln_cache_);
  return grad::linear(fc_in_, fc_w, fc_b);
}

Tensor Model::forward(const Tensor& x, bool train) {
  return classifier_forward(encoder_forward(tokenizer_forward(x), train), train);
}

void Model::backward(const Tensor& grad_logits) {
  auto lg = grad::linear_backward(grad_logits, fc_in_, fc_w);
  for (std::size_t i = 0; i < fc_gw.numel(); ++i) fc_gw[i] += lg.gw[i];
  for (std::size_t i = 0; i < fc_gb.numel(); ++i) fc_gb[i] += lg.gb[i];

  auto lng = grad::layernorm_backward(lg.gx, ln_cache_, ln_gamma);
  for (std::size_t i = 0; i < ln_ggamma.numel(); ++i) ln_ggamma[i] += lng.ggamma[i];
  for (std::size_t i = 0; i < ln_gbeta.numel(); ++i) ln_gbeta[i] += lng.gbeta[i];

  Tensor gcat = last_train_ ? grad::dropout_backward(lng.gx, cfg_.dropout, dropout_mask_)
                            : std::move(lng.gx);

  const std::size_t B = pool_in_.shape[0], d = pool_in_.shape[1];
  Tensor gavg({B, d, 1}), gmax({B, d, 1});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < d; ++c) {
      gavg.v[b * d + c] = gcat.v[b * 2 * d + c];
      gmax.v[b * d + c] = gcat.v[b * 2 * d + d + c];
    }
  Tensor gy = grad::adaptive_pool_backward(gavg, pool_in_, grad::PoolKind::Avg, pool_argmax_);
  Tensor gy_max = grad::adaptive_pool_backward(gmax, pool_in_, grad::PoolKind::Max, pool_argmax_);
  for (std::size_t i = 0; i < gy.numel(); ++i) gy[i] += gy_max[i];

  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
    Tensor gb = it->block.backward(gy);
    Tensor gc = it->cross.backward(gy);
    for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += gc[i];
    gy = std::move(gb);
  }
  depthwise_.backward(pointwise_.backward(gy));
}

std::vector<std::pair<std::string, Tensor*>> Model::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.emplace_back("tokenizer.depthwise.w", &depthwise_.w);
  out.emplace_back("tokenizer.depthwise.b", &depthwise_.b);
  out.emplace_back("tokenizer.pointwise.w", &pointwise_.w);
  out.emplace_back("tokenizer.pointwise.b", &pointwise_.b);
  for (std::size_t j = 0; j < stages_.size(); ++j) {
    const std::string p = "stage" + std::to_string(j) + ".";
    auto& s = stages_[j];
    out.emplace_back(p + "conv1.w", &s.block.conv1.w);
    out.emplace_back(p + "conv1.b", &s.block.conv1.b);
    out.emplace_back(p + "bn1.gamma", &s.block.bn1.state.gamma);
    out.emplace_back(p + "bn1.beta", &s.block.bn1.state.beta);
    out.emplace_back(p + "conv2.w", &s.block.conv2.w);
    out.emplace_back(p + "conv2.b", &s.block.conv2.b);
    out.emplace_back(p + "bn2.gamma", &s.block.bn2.state.gamma);
    out.emplace_back(p + "bn2.beta", &s.block.bn2.state.beta);
    out.emplace_back(p + "shortcut.w", &s.block.shortcut.w);
    out.emplace_back(p + "shortcut.b", &s.block.shortcut.b);
    out.emplace_back(p + "bn_sc.gamma", &s.block.bn_sc.state.gamma);
    out.emplace_back(p + "bn_sc.beta", &s.block.bn_sc.state.beta);
    out.emplace_back(p + "cross.w", &s.cross.w);
    out.emplace_back(p + "cross.b", &s.cross.b);
  }
  out.emplace_back("classifier.ln.gamma", &ln_gamma);
  out.emplace_back("classifier.ln.beta", &ln_beta);
  out.emplace_back("classifier.fc.w", &fc_w);
  out.emplace_back("classifier.fc.b", &fc_b);
  return out;
}

std::vector<Tensor*> Model::params() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named_params()) out.push_back(t);
  return out;
}

std::vector<std::pair<Tensor*, Tensor*>> Model::param_grads() {
  std::vector<std::pair<Tensor*, Tensor*>> out;
  out.emplace_back(&depthwise_.w, &depthwise_.gw);
  out.emplace_back(&depthwise_.b, &depthwise_.gb);
  out.emplace_back(&pointwise_.w, &pointwise_.gw);
  out.emplace_back(&pointwise_.b, &pointwise_.gb);
  for (auto& s : stages_) {
    out.emplace_back(&s.block.conv1.w, &s.block.conv1.gw);
    out.emplace_back(&s.block.conv1.b, &s.block.conv1.gb);
    out.emplace_back(&s.block.bn1.state.gamma, &s.block.bn1.ggamma);
    out.emplace_back(&s.block.bn1.state.beta, &s.block.bn1.gbeta);
    out.emplace_back(&s.block.conv2.w, &s.block.conv2.gw);
    out.emplace_back(&s.block.conv2.b, &s.block.conv2.gb);
    out.emplace_back(&s.block.bn2.state.gamma, &s.block.bn2.ggamma);
    out.emplace_back(&s.block.bn2.state.beta, &s.block.bn2.gbeta);
    out.emplace_back(&s.block.shortcut.w, &s.block.shortcut.gw);
    out.emplace_back(&s.block.shortcut.b, &s.block.shortcut.gb);
    out.emplace_back(&s.block.bn_sc.state.gamma, &s.block.bn_sc.ggamma);
    out.emplace_back(&s.block.bn_sc.state.beta, &s.block.bn_sc.gbeta);
    out.emplace_back(&s.cross.w, &s.cross.gw);
    out.emplace_back(&s.cross.b, &s.cross.gb);
  }
  out.emplace_back(&ln_gamma, &ln_ggamma);
  out.emplace_back(&ln_beta, &ln_gbeta);
  out.emplace_back(&fc_w, &fc_gw);
  out.emplace_back(&fc_b, &fc_gb);
  return out;
}

std::vector<const Tensor*> Model::grads() {
  std::vector<const Tensor*> out;
  for (auto& [p, g] : param_grads()) out.push_back(g);
  return out;
}

void Model::zero_grads() {
  for (auto& [p, g] : param_grads()) g->zero();
}

// ---- checkpoint ------------------------------------------------------------

namespace {

constexpr char kCkptMagic[4] = {'E', 'E', 'G', 'C'};
constexpr std::uint16_t kCkptVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  put<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(t.shape.size()));
  for (auto d : t.shape) put<std::uint64_t>(os, d);
  for (double v : t.v) put<float>(os, static_cast<float>(v));
}

}  // namespace

void Model::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kCkptMagic, 4);
  put<std::uint16_t>(os, kCkptVersion);
  put<std::int32_t>(os, cfg_.n_channels);
  put<std::int32_t>(os, cfg_.L);
  put<std::int32_t>(os, cfg_.d_model);
  put<std::int32_t>(os, cfg_.bottleneck);
  put<std::int32_t>(os, cfg_.k_token);
  put<std::int32_t>(os, cfg_.k_res);
  put<std::int32_t>(os, cfg_.n_stages);
  put<std::int32_t>(os, cfg_.dilation_base);
  put<std::uint8_t>(os, cfg_.dilation_mode == DilationMode::Exponential ? 1 : 0);
  put<std::int32_t>(os, cfg_.n_classes);
  put<double>(os, cfg_.dropout);
  put<std::uint64_t>(os, seed_);

  auto* self = const_cast<Model*>(this);
  auto named = self->named_params();
  // Running statistics travel with the checkpoint as well.
  std::vector<std::pair<std::string, Tensor*>> extra;
  for (std::size_t j = 0; j < self->stages_.size(); ++j) {
    const std::string p = "stage" + std::to_string(j) + ".";
    auto& s = self->stages_[j];
    extra.emplace_back(p + "bn1.running_mean", &s.block.bn1.state.running_mean);
    extra.emplace_back(p + "bn1.running_var", &s.block.bn1.state.running_var);
    extra.emplace_back(p + "bn2.running_mean", &s.block.bn2.state.running_mean);
    extra.emplace_back(p + "bn2.running_var", &s.block.bn2.state.running_var);
    extra.emplace_back(p + "bn_sc.running_mean", &s.block.bn_sc.state.running_mean);
    extra.emplace_back(p + "bn_sc.running_var", &s.block.bn_sc.state.running_var);
  }
  put<std::uint32_t>(os, static_cast<std::uint32_t>(named.size() + extra.size()));
  for (auto& [name, t] : named) put_tensor(os, name, *t);
  for (auto& [name, t] : extra) put_tensor(os, name, *t);
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCkptMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  if (get<std::uint16_t>(is) != kCkptVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  ModelConfig cfg;
  cfg.n_channels = get<std::int32_t>(is);
  cfg.L = get<std::int32_t>(is);
  cfg.d_model = get<std::int32_t>(is);
  cfg.bottleneck = get<std::int32_t>(is);
  cfg.k_token = get<std::int32_t>(is);
  cfg.k_res = get<std::int32_t>(is);
  cfg.n_stages = get<std::int32_t>(is);
  cfg.dilation_base = get<std::int32_t>(is);
  cfg.dilation_mode = get<std::uint8_t>(is) ? DilationMode::Exponential : DilationMode::Constant;
  cfg.n_classes = get<std::int32_t>(is);
  cfg.dropout = get<double>(is);
  const auto seed = get<std::uint64_t>(is);

  Model model(cfg, seed);
  std::vector<std::pair<std::string, Tensor*>> slots = model.named_params();
  for (std::size_t j = 0; j < model.stages_.size(); ++j) {
    const std::string p = "stage" + std::to_string(j) + ".";
    auto& s = model.stages_[j];
    slots.emplace_back(p + "bn1.running_mean", &s.block.bn1.state.running_mean);
    slots.emplace_back(p + "bn1.running_var", &s.block.bn1.state.running_var);
    slots.emplace_back(p + "bn2.running_mean", &s.block.bn2.state.running_mean);
    slots.emplace_back(p + "bn2.running_var", &s.block.bn2.state.running_var);
    slots.emplace_back(p + "bn_sc.running_mean", &s.block.bn_sc.state.running_mean);
    slots.emplace_back(p + "bn_sc.running_var", &s.block.bn_sc.state.running_var);
  }

  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint16_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = get<std::uint8_t>(is);
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(is));
    Tensor t(shape);
    for (auto& v : t.v) v = static_cast<double>(get<float>(is));
    bool matched = false;
    for (auto& [slot_name, slot] : slots)
      if (slot_name == name) {
        if (slot->shape != t.shape) throw std::runtime_error("checkpoint: shape mismatch " + name);
        *slot = std::move(t);
        matched = true;
        break;
      }
    if (!matched) throw std::runtime_error("checkpoint: unknown tensor " + name);
  }
  return model;
}

// ---- training and inference -------------------------------------------------

grad::Tensor segments_to_tensor(const std::vector<Segment>& segs,
                                const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("segments_to_tensor: empty batch");
  const std::size_t C = segs[indices[0]].data.size();
  const std::size_t L = segs[indices[0]].data[0].size();
  Tensor x({indices.size(), C, L});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& seg = segs[indices[b]];
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t l = 0; l < L; ++l) x.v[(b * C + c) * L + l] = seg.data[c][l];
  }
  return x;
}

TrainResult train(Model& model, const std::vector<Segment>& segments, const TrainOptions& opts) {
  if (segments.empty()) throw std::invalid_argument("train: no segments");
  TrainResult result;
  grad::AdamState adam;
  adam.lr = opts.lr;
  auto params = model.params();

  std::vector<std::size_t> order(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    Rng shuffle_rng(opts.seed, 0x5FF1E + static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t n_seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
      Tensor x = segments_to_tensor(segments, batch);
      std::vector<int> labels(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i)
        labels[i] = static_cast<int>(segments[batch[i]].label);

      Tensor logits = model.forward(x, true);
      auto ce = grad::softmax_cross_entropy(logits, labels);
      if (!std::isfinite(ce.loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
      model.zero_grads();
      model.backward(ce.grad_logits);
      grad::adam_step(params, model.grads(), adam);

      epoch_loss += ce.loss * static_cast<double>(batch.size());
      n_seen += batch.size();
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n_seen));
  }
  return result;
}

Predictions predict_segments(Model& model, const std::vector<Segment>& segments) {
  Predictions out;
  constexpr std::size_t kBatch = 128;
  for (std::size_t start = 0; start < segments.size(); start += kBatch) {
    const std::size_t end = std::min(segments.size(), start + kBatch);
    std::vector<std::size_t> batch(end - start);
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = start + i;
    Tensor logits = model.forward(segments_to_tensor(segments, batch), false);
    const std::size_t C = logits.shape[1];
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const double* lr = &logits.v[b * C];
      const double mx = std::max(lr[0], lr[1]);
      const double e0 = std::exp(lr[0] - mx), e1 = std::exp(lr[1] - mx);
      const double p1 = e1 / (e0 + e1);
      out.probs.push_back({1.0 - p1, p1});
      out.labels.push_back(p1 >= 0.5 ? 1 : 0);
    }
  }
  return out;
}

Label predict_subject(const std::vector<int>& segment_labels) {
  if (segment_labels.empty()) throw std::invalid_argument("predict_subject: empty segment list");
  std::size_t ad = 0;
  for (int l : segment_labels)
    if (l == 1) ++ad;
  // Ties resolve toward the positive (AD) class.
  return 2 * ad >= segment_labels.size() ? Label::AD : Label::HC;
}

}  // namespace eegtok
