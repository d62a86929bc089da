// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace ulite {

// ---------------------------------------------------------------------------
// Config

std::string to_string(DwVariant v) { return v == DwVariant::axial ? "axial" : "square"; }

DwVariant parse_dw_variant(std::string_view s) {
  if (s == "axial") return DwVariant::axial;
  if (s == "square") return DwVariant::square;
  throw ConfigError("dw_variant must be 'axial' or 'square', got '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  for (std::size_t i = 0; i < widths.size(); ++i)
    if (widths[i] == 0) throw ConfigError("widths[" + std::to_string(i) + "] must be positive");
  if (n == 0 || n % 2 == 0) throw ConfigError("n must be odd and positive, got " + std::to_string(n));
  if (bottleneck_width == 0) throw ConfigError("bottleneck_width must be positive");
}

std::string ModelConfig::variant_name() const {
  return to_string(dw_variant) + "-n" + std::to_string(n) + (addc ? "-addc" : "-noaddc");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(const std::string& v, const std::string& key, int line) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'", line);
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range '" + v + "'", line);
  }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'", line);
}

}  // namespace

ModelConfig parse_config(std::string_view text) {
  ModelConfig cfg;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);

    if (key == "widths") {
      std::vector<std::string> parts;
      std::stringstream ss(value);
      for (std::string item; std::getline(ss, item, ',');) parts.push_back(trim(item));
      if (parts.size() != cfg.widths.size())
        throw ConfigError("widths: expected 6 comma-separated values, got " + std::to_string(parts.size()), line_no);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        cfg.widths[i] = parse_uint(parts[i], key, line_no);
        if (cfg.widths[i] == 0) throw ConfigError("widths must be positive", line_no);
      }
    } else if (key == "n") {
      cfg.n = parse_uint(value, key, line_no);
      if (cfg.n == 0 || cfg.n % 2 == 0) throw ConfigError("n must be odd and positive", line_no);
    } else if (key == "dw_variant") {
      try {
        cfg.dw_variant = parse_dw_variant(value);
      } catch (const ConfigError& e) {
        throw ConfigError(e.what(), line_no);
      }
    } else if (key == "addc") {
      cfg.addc = parse_bool(value, key, line_no);
    } else if (key == "bottleneck_width") {
      cfg.bottleneck_width = parse_uint(value, key, line_no);
      if (cfg.bottleneck_width == 0) throw ConfigError("bottleneck_width must be positive", line_no);
    } else if (key == "seed") {
      cfg.seed = parse_uint(value, key, line_no);
    } else {
      throw ConfigError("unknown key '" + key + "'", line_no);
    }
  }
  cfg.validate();
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "widths = ";
  for (std::size_t i = 0; i < cfg.widths.size(); ++i) os << (i ? ", " : "") << cfg.widths[i];
  os << "\nn = " << cfg.n << "\ndw_variant = " << to_string(cfg.dw_variant) << "\naddc = "
     << (cfg.addc ? "true" : "false") << "\nbottleneck_width = " << cfg.bottleneck_width << "\nseed = " << cfg.seed
     << "\n";
  return os.str();
}

std::vector<ModelConfig> list_variants(const ModelConfig& base) {
  std::vector<ModelConfig> out;
  for (DwVariant v : {DwVariant::axial, DwVariant::square}) {
    for (std::size_t n : {3, 5, 7}) {
      for (bool addc : {true, false}) {
        ModelConfig cfg = base;
        cfg.dw_variant = v;
        cfg.n = n;
        cfg.addc = addc;
        out.push_back(cfg);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Visiting helpers

namespace {

template <typename T>
void visit_dw(const std::string& p, DepthwiseConv<T>& c, const TensorVisitor<T>& fn) {
  fn(p + ".kernel", c.kernel.value, &c.kernel.grad);
  fn(p + ".bias", c.bias.value, &c.bias.grad);
}
template <typename T>
void visit_pw(const std::string& p, PointwiseConv<T>& c, const TensorVisitor<T>& fn) {
  fn(p + ".weight", c.weight.value, &c.weight.grad);
  fn(p + ".bias", c.bias.value, &c.bias.grad);
}
template <typename T>
void visit_bn(const std::string& p, BatchNorm<T>& b, const TensorVisitor<T>& fn) {
  fn(p + ".gamma", b.gamma.value, &b.gamma.grad);
  fn(p + ".beta", b.beta.value, &b.beta.grad);
  fn(p + ".running_mean", b.running_mean, nullptr);
  fn(p + ".running_var", b.running_var, nullptr);
}

template <typename T>
TensorVisitor<T> as_mutable(const ConstTensorVisitor<T>& fn) {
  return [&fn](const std::string& name, BasicTensor<T>& v, BasicTensor<T>* g) { fn(name, v, g != nullptr); };
}

}  // namespace

// ---------------------------------------------------------------------------
// AxialDWModule

template <typename T>
AxialDWModule<T> AxialDWModule<T>::make(std::size_t c_in, std::size_t c_out, std::size_t n, DwVariant variant,
                                        Rng& rng) {
  AxialDWModule m;
  m.variant = variant;
  if (variant == DwVariant::axial) {
    m.dw.push_back(DepthwiseConv<T>::make(c_in, 1, n, 1, rng));
    m.dw.push_back(DepthwiseConv<T>::make(c_in, n, 1, 1, rng));
  } else {
    m.dw.push_back(DepthwiseConv<T>::make(c_in, n, n, 1, rng));
  }
  m.bn = BatchNorm<T>::make(c_in);
  m.pw = PointwiseConv<T>::make(c_in, c_out, rng);
  return m;
}

template <typename T>
BasicTensor<T> AxialDWModule<T>::forward(const BasicTensor<T>& x) {
  if (x.shape().c != in_channels())
    throw ShapeError("axial module: input has " + std::to_string(x.shape().c) + " channels, expected " +
                     std::to_string(in_channels()));
  x_ = x;
  residual_ = x;
  for (const auto& conv : dw) residual_ = add(residual_, depthwise_conv(x, conv));
  normed_ = batch_norm(residual_, bn, &bn_cache_);
  pre_act_ = pointwise_conv(normed_, pw);
  return gelu(pre_act_);
}

template <typename T>
BasicTensor<T> AxialDWModule<T>::backward(const BasicTensor<T>& dy) {
  const BasicTensor<T> d_pre = gelu_backward(pre_act_, dy);
  const BasicTensor<T> d_normed = pointwise_conv_backward(normed_, pw, d_pre);
  const BasicTensor<T> d_res = batch_norm_backward(bn_cache_, bn, d_normed);
  BasicTensor<T> dx = d_res;
  for (auto& conv : dw) accumulate(dx, depthwise_conv_backward(x_, conv, d_res));
  return dx;
}

template <typename T>
BasicTensor<T> AxialDWModule<T>::infer(const BasicTensor<T>& x) const {
  if (x.shape().c != in_channels()) throw ShapeError("axial module: channel mismatch");
  BasicTensor<T> r = x;
  for (const auto& conv : dw) r = add(r, depthwise_conv(x, conv));
  return gelu(pointwise_conv(batch_norm_eval(r, bn), pw));
}

template <typename T>
void AxialDWModule<T>::visit(const std::string& prefix, const TensorVisitor<T>& fn) {
  if (variant == DwVariant::axial) {
    visit_dw(prefix + ".dw_h", dw[0], fn);
    visit_dw(prefix + ".dw_v", dw[1], fn);
  } else {
    visit_dw(prefix + ".dw", dw[0], fn);
  }
  visit_bn(prefix + ".bn", bn, fn);
  visit_pw(prefix + ".pw", pw, fn);
}

template <typename T>
void AxialDWModule<T>::visit(const std::string& prefix, const ConstTensorVisitor<T>& fn) const {
  const_cast<AxialDWModule*>(this)->visit(prefix, as_mutable(fn));
}

template <typename T>
std::size_t AxialDWModule<T>::param_count() const {
  std::size_t total = bn.param_count() + pw.param_count();
  for (const auto& conv : dw) total += conv.param_count();
  return total;
}

// ---------------------------------------------------------------------------
// BottleneckBlock

template <typename T>
BottleneckBlock<T> BottleneckBlock<T>::make(std::size_t c_in, std::size_t c_mid, bool addc, Rng& rng) {
  BottleneckBlock b;
  b.addc = addc;
  b.pw_in = PointwiseConv<T>::make(c_in, c_mid, rng);
  if (addc) {
    for (int d = 1; d <= 3; ++d)
      b.branches.push_back({DepthwiseConv<T>::make(c_mid, 1, 3, d, rng), DepthwiseConv<T>::make(c_mid, 3, 1, d, rng)});
  } else {
    b.branches.push_back({DepthwiseConv<T>::make(c_mid, 1, 7, 1, rng), DepthwiseConv<T>::make(c_mid, 7, 1, 1, rng)});
  }
  b.bn = BatchNorm<T>::make(c_mid);
  b.pw_out = PointwiseConv<T>::make(c_mid, c_mid, rng);
  return b;
}

template <typename T>
BasicTensor<T> BottleneckBlock<T>::forward(const BasicTensor<T>& x) {
  x_ = x;
  reduced_ = pointwise_conv(x, pw_in);
  residual_ = reduced_;
  for (const auto& pair : branches)
    for (const auto& conv : pair) residual_ = add(residual_, depthwise_conv(reduced_, conv));
  normed_ = batch_norm(residual_, bn, &bn_cache_);
  pre_act_ = pointwise_conv(normed_, pw_out);
  return gelu(pre_act_);
}

template <typename T>
BasicTensor<T> BottleneckBlock<T>::backward(const BasicTensor<T>& dy) {
  const BasicTensor<T> d_pre = gelu_backward(pre_act_, dy);
  const BasicTensor<T> d_normed = pointwise_conv_backward(normed_, pw_out, d_pre);
  const BasicTensor<T> d_res = batch_norm_backward(bn_cache_, bn, d_normed);
  BasicTensor<T> d_reduced = d_res;
  for (auto& pair : branches)
    for (auto& conv : pair) accumulate(d_reduced, depthwise_conv_backward(reduced_, conv, d_res));
  return pointwise_conv_backward(x_, pw_in, d_reduced);
}

template <typename T>
BasicTensor<T> BottleneckBlock<T>::infer(const BasicTensor<T>& x) const {
  const BasicTensor<T> r = pointwise_conv(x, pw_in);
  BasicTensor<T> acc = r;
  for (const auto& pair : branches)
    for (const auto& conv : pair) acc = add(acc, depthwise_conv(r, conv));
  return gelu(pointwise_conv(batch_norm_eval(acc, bn), pw_out));
}

template <typename T>
void BottleneckBlock<T>::visit(const std::string& prefix, const TensorVisitor<T>& fn) {
  visit_pw(prefix + ".pw_in", pw_in, fn);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const std::string p = prefix + ".branch" + std::to_string(branches[i][0].dilation);
    visit_dw(p + ".dw_h", branches[i][0], fn);
    visit_dw(p + ".dw_v", branches[i][1], fn);
  }
  visit_bn(prefix + ".bn", bn, fn);
  visit_pw(prefix + ".pw_out", pw_out, fn);
}

template <typename T>
void BottleneckBlock<T>::visit(const std::string& prefix, const ConstTensorVisitor<T>& fn) const {
  const_cast<BottleneckBlock*>(this)->visit(prefix, as_mutable(fn));
}

template <typename T>
std::size_t BottleneckBlock<T>::param_count() const {
  std::size_t total = pw_in.param_count() + bn.param_count() + pw_out.param_count();
  for (const auto& pair : branches) total += pair[0].param_count() + pair[1].param_count();
  return total;
}

// ---------------------------------------------------------------------------
// ULiteModel

void check_input_dims(const Shape& s) {
  if (s.c != 3) throw ShapeError("model input must have 3 channels, got " + s.str());
  if (s.h % 64 != 0 || s.w % 64 != 0)
    throw ShapeError("model input height and width must be multiples of 64, got " + s.str());
}

template <typename T>
ULiteModel<T>::ULiteModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  const auto& c = cfg_.widths;
  stem = AxialDWModule<T>::make(3, c[0], cfg_.n, cfg_.dw_variant, rng);
  for (std::size_t i = 1; i <= kStages; ++i)
    encoders[i - 1] = AxialDWModule<T>::make(c[i - 1], c[i], cfg_.n, cfg_.dw_variant, rng);
  bottleneck = BottleneckBlock<T>::make(c[kStages], cfg_.bottleneck_width, cfg_.addc, rng);
  for (std::size_t i = kStages; i >= 1; --i) {
    const std::size_t up = i == kStages ? cfg_.bottleneck_width : c[i];
    decoders[i - 1] = AxialDWModule<T>::make(up + c[i - 1], c[i - 1], cfg_.n, cfg_.dw_variant, rng);
  }
  head = PointwiseConv<T>::make(c[0], 1, rng);
}

template <typename T>
BasicTensor<T> ULiteModel<T>::forward(const BasicTensor<T>& x) {
  check_input_dims(x.shape());
  features_.assign(kStages + 1, {});
  features_[0] = stem.forward(x);
  for (std::size_t i = 1; i <= kStages; ++i)
    features_[i] = encoders[i - 1].forward(max_pool2(features_[i - 1], &pool_argmax_[i - 1]));
  BasicTensor<T> d = bottleneck.forward(features_[kStages]);
  for (std::size_t i = kStages; i >= 1; --i) {
    BasicTensor<T> up = upsample2(d);
    up_channels_[i - 1] = up.shape().c;
    d = decoders[i - 1].forward(concat_channels(up, features_[i - 1]));
  }
  head_in_ = std::move(d);
  prob_ = sigmoid(pointwise_conv(head_in_, head));
  return prob_;
}

template <typename T>
BasicTensor<T> ULiteModel<T>::backward(const BasicTensor<T>& dprob) {
  require_same_shape(prob_.shape(), dprob.shape(), "ULiteModel::backward");
  BasicTensor<T> d = pointwise_conv_backward(head_in_, head, sigmoid_backward(prob_, dprob));
  std::array<BasicTensor<T>, kStages> d_skip;
  for (std::size_t i = 1; i <= kStages; ++i) {
    auto [d_up, d_s] = concat_channels_backward(decoders[i - 1].backward(d), up_channels_[i - 1]);
    d_skip[i - 1] = std::move(d_s);
    d = upsample2_backward(d_up);
  }
  d = bottleneck.backward(d);
  for (std::size_t i = kStages; i >= 1; --i) {
    const BasicTensor<T> d_pooled = encoders[i - 1].backward(d);
    d = max_pool2_backward(features_[i - 1].shape(), pool_argmax_[i - 1], d_pooled);
    accumulate(d, d_skip[i - 1]);
  }
  return stem.backward(d);
}

template <typename T>
BasicTensor<T> ULiteModel<T>::infer(const BasicTensor<T>& x, std::optional<std::size_t> drop_skip) const {
  check_input_dims(x.shape());
  std::vector<BasicTensor<T>> f(kStages + 1);
  f[0] = stem.infer(x);
  for (std::size_t i = 1; i <= kStages; ++i) f[i] = encoders[i - 1].infer(max_pool2(f[i - 1]));
  if (drop_skip) {
    if (*drop_skip >= kStages) throw InvalidInputError("drop_skip must be in 0..4");
    f[*drop_skip].fill(T(0));
  }
  BasicTensor<T> d = bottleneck.infer(f[kStages]);
  for (std::size_t i = kStages; i >= 1; --i) d = decoders[i - 1].infer(concat_channels(upsample2(d), f[i - 1]));
  return sigmoid(pointwise_conv(d, head));
}

template <typename T>
void ULiteModel<T>::set_mode(Mode m) {
  mode_ = m;
  stem.set_mode(m);
  for (auto& e : encoders) e.set_mode(m);
  bottleneck.set_mode(m);
  for (auto& d : decoders) d.set_mode(m);
}

template <typename T>
void ULiteModel<T>::zero_grad() {
  visit([](const std::string&, BasicTensor<T>&, BasicTensor<T>* g) {
    if (g) g->fill(T(0));
  });
}

template <typename T>
void ULiteModel<T>::visit(const TensorVisitor<T>& fn) {
  stem.visit("stem", fn);
  for (std::size_t i = 1; i <= kStages; ++i) encoders[i - 1].visit("enc" + std::to_string(i), fn);
  bottleneck.visit("bottleneck", fn);
  for (std::size_t i = kStages; i >= 1; --i) decoders[i - 1].visit("dec" + std::to_string(i), fn);
  visit_pw("head", head, fn);
}

template <typename T>
void ULiteModel<T>::visit(const ConstTensorVisitor<T>& fn) const {
  const_cast<ULiteModel*>(this)->visit(as_mutable(fn));
}

template <typename T>
std::vector<NamedParam<T>> ULiteModel<T>::parameters() {
  // Param objects are not reachable through the visitor (it yields value and
  // grad separately), so walk the layers directly in visit order.
  std::vector<NamedParam<T>> out;
  auto dw_params = [&](const std::string& p, DepthwiseConv<T>& c) {
    out.push_back({p + ".kernel", &c.kernel});
    out.push_back({p + ".bias", &c.bias});
  };
  auto pw_params = [&](const std::string& p, PointwiseConv<T>& c) {
    out.push_back({p + ".weight", &c.weight});
    out.push_back({p + ".bias", &c.bias});
  };
  auto bn_params = [&](const std::string& p, BatchNorm<T>& b) {
    out.push_back({p + ".gamma", &b.gamma});
    out.push_back({p + ".beta", &b.beta});
  };
  auto module_params = [&](const std::string& p, AxialDWModule<T>& m) {
    if (m.variant == DwVariant::axial) {
      dw_params(p + ".dw_h", m.dw[0]);
      dw_params(p + ".dw_v", m.dw[1]);
    } else {
      dw_params(p + ".dw", m.dw[0]);
    }
    bn_params(p + ".bn", m.bn);
    pw_params(p + ".pw", m.pw);
  };
  module_params("stem", stem);
  for (std::size_t i = 1; i <= kStages; ++i) module_params("enc" + std::to_string(i), encoders[i - 1]);
  pw_params("bottleneck.pw_in", bottleneck.pw_in);
  for (auto& pair : bottleneck.branches) {
    const std::string p = "bottleneck.branch" + std::to_string(pair[0].dilation);
    dw_params(p + ".dw_h", pair[0]);
    dw_params(p + ".dw_v", pair[1]);
  }
  bn_params("bottleneck.bn", bottleneck.bn);
  pw_params("bottleneck.pw_out", bottleneck.pw_out);
  for (std::size_t i = kStages; i >= 1; --i) module_params("dec" + std::to_string(i), decoders[i - 1]);
  pw_params("head", head);
  return out;
}

// ---------------------------------------------------------------------------
// Parameter accounting

std::size_t ParamTable::total() const {
  std::size_t t = 0;
  for (const auto& r : rows) t += r.params;
  return t;
}

std::size_t ParamTable::buffer_total() const {
  std::size_t t = 0;
  for (const auto& r : rows) t += r.buffers;
  return t;
}

std::string ParamTable::render() const {
  std::ostringstream os;
  os << std::left << std::setw(14) << "layer" << std::right << std::setw(12) << "params" << std::setw(12)
     << "buffers" << "\n";
  for (const auto& r : rows)
    os << std::left << std::setw(14) << r.layer << std::right << std::setw(12) << r.params << std::setw(12)
       << r.buffers << "\n";
  os << std::left << std::setw(14) << "total" << std::right << std::setw(12) << total() << std::setw(12)
     << buffer_total() << "\n";
  return os.str();
}

std::size_t pointwise_param_count(std::size_t c_in, std::size_t c_out) { return c_in * c_out + c_out; }
std::size_t depthwise_param_count(std::size_t channels, std::size_t kh, std::size_t kw) {
  return channels * kh * kw + channels;
}
std::size_t batchnorm_param_count(std::size_t channels) { return 2 * channels; }

std::size_t axial_module_param_count(std::size_t c_in, std::size_t c_out, std::size_t n, DwVariant variant) {
  const std::size_t dw = variant == DwVariant::axial ? 2 * depthwise_param_count(c_in, 1, n)
                                                     : depthwise_param_count(c_in, n, n);
  return dw + batchnorm_param_count(c_in) + pointwise_param_count(c_in, c_out);
}

std::size_t bottleneck_param_count(std::size_t c_in, std::size_t c_mid, bool addc) {
  const std::size_t branches = addc ? 3 * 2 * depthwise_param_count(c_mid, 1, 3) : 2 * depthwise_param_count(c_mid, 1, 7);
  return pointwise_param_count(c_in, c_mid) + branches + batchnorm_param_count(c_mid) +
         pointwise_param_count(c_mid, c_mid);
}

ParamTable count_params(const ModelConfig& cfg) {
  cfg.validate();
  const auto& c = cfg.widths;
  const std::size_t K = ULiteModel<float>::kStages;
  ParamTable t;
  t.rows.push_back({"stem", axial_module_param_count(3, c[0], cfg.n, cfg.dw_variant), 2 * 3});
  for (std::size_t i = 1; i <= K; ++i)
    t.rows.push_back({"enc" + std::to_string(i), axial_module_param_count(c[i - 1], c[i], cfg.n, cfg.dw_variant),
                      2 * c[i - 1]});
  t.rows.push_back({"bottleneck", bottleneck_param_count(c[K], cfg.bottleneck_width, cfg.addc),
                    2 * cfg.bottleneck_width});
  for (std::size_t i = K; i >= 1; --i) {
    const std::size_t c_in = (i == K ? cfg.bottleneck_width : c[i]) + c[i - 1];
    t.rows.push_back({"dec" + std::to_string(i), axial_module_param_count(c_in, c[i - 1], cfg.n, cfg.dw_variant),
                      2 * c_in});
  }
  t.rows.push_back({"head", pointwise_param_count(c[0], 1), 0});
  return t;
}

template <typename T>
ParamTable count_params(const ULiteModel<T>& model) {
  ParamTable t;
  std::map<std::string, std::size_t> index;
  model.visit([&](const std::string& name, const BasicTensor<T>& v, bool learnable) {
    const std::string layer = name.substr(0, name.find('.'));
    auto it = index.find(layer);
    if (it == index.end()) {
      it = index.emplace(layer, t.rows.size()).first;
      t.rows.push_back({layer, 0, 0});
    }
    (learnable ? t.rows[it->second].params : t.rows[it->second].buffers) += v.numel();
  });
  return t;
}

// ---------------------------------------------------------------------------
// Footprints

bool Footprint::at(int dh, int dw) const {
  const int c = static_cast<int>(size / 2);
  const int h = c + dh, w = c + dw;
  if (h < 0 || w < 0 || h >= static_cast<int>(size) || w >= static_cast<int>(size)) return false;
  return cells[static_cast<std::size_t>(h) * size + static_cast<std::size_t>(w)] != 0;
}

std::size_t Footprint::count() const {
  std::size_t n = 0;
  for (auto c : cells) n += c != 0;
  return n;
}

std::string Footprint::render() const {
  std::string out;
  for (std::size_t h = 0; h < size; ++h) {
    for (std::size_t w = 0; w < size; ++w) out += cells[h * size + w] ? '#' : '.';
    out += '\n';
  }
  return out;
}

namespace {

template <typename Block>
Footprint gradient_support(Block& block, std::size_t channels_in, std::size_t channels_out, std::size_t size,
                           Rng& rng) {
  block.set_mode(Mode::eval);
  const Tensor x = rand_normal<float>({1, channels_in, size, size}, rng, 0.0, 1.0);
  const Tensor y = block.forward(x);
  Tensor dy(y.shape());
  const std::size_t c = size / 2;
  for (std::size_t ch = 0; ch < channels_out; ++ch) dy.at(0, ch, c, c) = 1.0f;
  const Tensor dx = block.backward(dy);
  Footprint fp;
  fp.size = size;
  fp.cells.assign(size * size, 0);
  for (std::size_t ch = 0; ch < channels_in; ++ch)
    for (std::size_t i = 0; i < size * size; ++i)
      if (dx[ch * size * size + i] != 0.0f) fp.cells[i] = 1;
  return fp;
}

}  // namespace

Footprint module_footprint(std::size_t n, DwVariant variant, std::uint64_t seed) {
  if (n == 0 || n % 2 == 0) throw UnsupportedKernelError("footprint kernel length must be odd");
  Rng rng(seed);
  constexpr std::size_t kChannels = 3;
  auto m = AxialDWModule<float>::make(kChannels, kChannels, n, variant, rng);
  return gradient_support(m, kChannels, kChannels, n + 4, rng);
}

Footprint dilated_branch_footprint(int dilation, std::uint64_t seed) {
  if (dilation < 1 || dilation > 3) throw InvalidInputError("bottleneck dilations are 1, 2, 3");
  Rng rng(seed);
  constexpr std::size_t kChannels = 3;
  auto b = BottleneckBlock<float>::make(kChannels, kChannels, true, rng);
  for (auto& pair : b.branches)
    if (pair[0].dilation != dilation)
      for (auto& conv : pair) conv.kernel.value.fill(0.0f);
  return gradient_support(b, kChannels, kChannels, 2 * static_cast<std::size_t>(dilation) + 5, rng);
}

template class AxialDWModule<float>;
template class AxialDWModule<double>;
template class BottleneckBlock<float>;
template class BottleneckBlock<double>;
template class ULiteModel<float>;
template class ULiteModel<double>;
template ParamTable count_params<float>(const ULiteModel<float>&);
template ParamTable count_params<double>(const ULiteModel<double>&);

}  // namespace ulite
