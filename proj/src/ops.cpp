// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ulite/parallel.hpp"

namespace ulite {
namespace {

// Valid output range along one axis for a tap displaced by `off`.
struct Span1 {
  std::ptrdiff_t begin, end;
};

Span1 tap_range(std::ptrdiff_t extent, std::ptrdiff_t off) {
  return {std::max<std::ptrdiff_t>(0, -off), std::min(extent, extent - off)};
}

void check_odd(std::size_t k) {
  if (k % 2 == 0) throw UnsupportedKernelError("depthwise kernel extent must be odd, got " + std::to_string(k));
}

}  // namespace

// ---------------------------------------------------------------------------
// Depthwise convolution

template <typename T>
DepthwiseConv<T> DepthwiseConv<T>::make(std::size_t channels, std::size_t kh, std::size_t kw, int dilation,
                                        Rng& rng) {
  check_odd(kh);
  check_odd(kw);
  if (dilation < 1) throw InvalidInputError("dilation must be >= 1");
  DepthwiseConv conv;
  const double std = std::sqrt(2.0 / static_cast<double>(kh * kw));
  conv.kernel = Param<T>(rand_normal<T>({channels, 1, kh, kw}, rng, 0.0, std));
  conv.bias = Param<T>(BasicTensor<T>({channels, 1, 1, 1}));
  conv.dilation = dilation;
  return conv;
}

template <typename T>
BasicTensor<T> depthwise_conv(const BasicTensor<T>& x, const DepthwiseConv<T>& p) {
  const Shape s = x.shape();
  if (s.c != p.channels())
    throw ShapeError("depthwise_conv: input has " + std::to_string(s.c) + " channels, kernel has " +
                     std::to_string(p.channels()));
  const std::size_t kh = p.kernel_h(), kw = p.kernel_w();
  check_odd(kh);
  check_odd(kw);
  const auto d = static_cast<std::ptrdiff_t>(p.dilation);
  const auto pad_h = d * static_cast<std::ptrdiff_t>(kh - 1) / 2;
  const auto pad_w = d * static_cast<std::ptrdiff_t>(kw - 1) / 2;
  const auto H = static_cast<std::ptrdiff_t>(s.h), W = static_cast<std::ptrdiff_t>(s.w);

  BasicTensor<T> out(s);
  parallel_for(s.n * s.c, s.plane() * kh * kw, [&](std::size_t nc) {
    const std::size_t c = nc % s.c;
    const T* in = x.raw() + nc * s.plane();
    T* o = out.raw() + nc * s.plane();
    const T* k = p.kernel.value.raw() + c * kh * kw;
    // Taps in row-major kernel order; each output element sees the same
    // accumulation sequence as a direct per-pixel loop.
    for (std::size_t i = 0; i < kh; ++i) {
      const std::ptrdiff_t oh = static_cast<std::ptrdiff_t>(i) * d - pad_h;
      const Span1 rh = tap_range(H, oh);
      for (std::size_t j = 0; j < kw; ++j) {
        const std::ptrdiff_t ow = static_cast<std::ptrdiff_t>(j) * d - pad_w;
        const Span1 rw = tap_range(W, ow);
        const T kv = k[i * kw + j];
        for (std::ptrdiff_t h = rh.begin; h < rh.end; ++h) {
          T* orow = o + h * W;
          const T* irow = in + (h + oh) * W + ow;
          for (std::ptrdiff_t w = rw.begin; w < rw.end; ++w) orow[w] += kv * irow[w];
        }
      }
    }
    const T b = p.bias.value[c];
    for (std::size_t i = 0; i < s.plane(); ++i) o[i] += b;
  });
  return out;
}

template <typename T>
BasicTensor<T> depthwise_conv_backward(const BasicTensor<T>& x, DepthwiseConv<T>& p, const BasicTensor<T>& dy) {
  const Shape s = x.shape();
  require_same_shape(s, dy.shape(), "depthwise_conv_backward");
  const std::size_t kh = p.kernel_h(), kw = p.kernel_w();
  const auto d = static_cast<std::ptrdiff_t>(p.dilation);
  const auto pad_h = d * static_cast<std::ptrdiff_t>(kh - 1) / 2;
  const auto pad_w = d * static_cast<std::ptrdiff_t>(kw - 1) / 2;
  const auto H = static_cast<std::ptrdiff_t>(s.h), W = static_cast<std::ptrdiff_t>(s.w);

  BasicTensor<T> dx(s);
  parallel_for(s.n * s.c, s.plane() * kh * kw, [&](std::size_t nc) {
    const std::size_t c = nc % s.c;
    const T* g = dy.raw() + nc * s.plane();
    T* o = dx.raw() + nc * s.plane();
    const T* k = p.kernel.value.raw() + c * kh * kw;
    for (std::size_t i = 0; i < kh; ++i) {
      const std::ptrdiff_t oh = static_cast<std::ptrdiff_t>(i) * d - pad_h;
      const Span1 rh = tap_range(H, oh);
      for (std::size_t j = 0; j < kw; ++j) {
        const std::ptrdiff_t ow = static_cast<std::ptrdiff_t>(j) * d - pad_w;
        const Span1 rw = tap_range(W, ow);
        const T kv = k[i * kw + j];
        for (std::ptrdiff_t h = rh.begin; h < rh.end; ++h) {
          const T* grow = g + h * W;
          T* orow = o + (h + oh) * W + ow;
          for (std::ptrdiff_t w = rw.begin; w < rw.end; ++w) orow[w] += kv * grow[w];
        }
      }
    }
  });

  parallel_for(s.c, s.n * s.plane() * kh * kw, [&](std::size_t c) {
    T* gk = p.kernel.grad.raw() + c * kh * kw;
    for (std::size_t i = 0; i < kh; ++i) {
      const std::ptrdiff_t oh = static_cast<std::ptrdiff_t>(i) * d - pad_h;
      const Span1 rh = tap_range(H, oh);
      for (std::size_t j = 0; j < kw; ++j) {
        const std::ptrdiff_t ow = static_cast<std::ptrdiff_t>(j) * d - pad_w;
        const Span1 rw = tap_range(W, ow);
        double acc = 0.0;
        for (std::size_t n = 0; n < s.n; ++n) {
          const T* g = dy.plane(n, c);
          const T* in = x.plane(n, c);
          for (std::ptrdiff_t h = rh.begin; h < rh.end; ++h) {
            const T* grow = g + h * W;
            const T* irow = in + (h + oh) * W + ow;
            for (std::ptrdiff_t w = rw.begin; w < rw.end; ++w)
              acc += static_cast<double>(grow[w]) * static_cast<double>(irow[w]);
          }
        }
        gk[i * kw + j] += static_cast<T>(acc);
      }
    }
    double bacc = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* g = dy.plane(n, c);
      for (std::size_t i = 0; i < s.plane(); ++i) bacc += static_cast<double>(g[i]);
    }
    p.bias.grad[c] += static_cast<T>(bacc);
  });
  return dx;
}

// ---------------------------------------------------------------------------
// Pointwise convolution

template <typename T>
PointwiseConv<T> PointwiseConv<T>::make(std::size_t c_in, std::size_t c_out, Rng& rng) {
  PointwiseConv conv;
  const double std = std::sqrt(2.0 / static_cast<double>(c_in));
  conv.weight = Param<T>(rand_normal<T>({c_out, c_in, 1, 1}, rng, 0.0, std));
  conv.bias = Param<T>(BasicTensor<T>({c_out, 1, 1, 1}));
  return conv;
}

template <typename T>
BasicTensor<T> pointwise_conv(const BasicTensor<T>& x, const PointwiseConv<T>& p) {
  const Shape s = x.shape();
  const std::size_t c_in = p.in_channels(), c_out = p.out_channels();
  if (s.c != c_in)
    throw ShapeError("pointwise_conv: input has " + std::to_string(s.c) + " channels, expected " +
                     std::to_string(c_in));
  const std::size_t hw = s.plane();
  BasicTensor<T> out({s.n, c_out, s.h, s.w});
  parallel_for(s.n * c_out, hw * c_in, [&](std::size_t no) {
    const std::size_t n = no / c_out, co = no % c_out;
    T* o = out.plane(n, co);
    const T* w = p.weight.value.raw() + co * c_in;
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const T wv = w[ci];
      const T* in = x.plane(n, ci);
      for (std::size_t i = 0; i < hw; ++i) o[i] += wv * in[i];
    }
    const T b = p.bias.value[co];
    for (std::size_t i = 0; i < hw; ++i) o[i] += b;
  });
  return out;
}

template <typename T>
BasicTensor<T> pointwise_conv_backward(const BasicTensor<T>& x, PointwiseConv<T>& p, const BasicTensor<T>& dy) {
  const Shape s = x.shape();
  const std::size_t c_in = p.in_channels(), c_out = p.out_channels();
  if (dy.shape() != Shape{s.n, c_out, s.h, s.w}) throw ShapeError("pointwise_conv_backward: bad dy shape");
  const std::size_t hw = s.plane();

  BasicTensor<T> dx(s);
  parallel_for(s.n * c_in, hw * c_out, [&](std::size_t ni) {
    const std::size_t n = ni / c_in, ci = ni % c_in;
    T* o = dx.plane(n, ci);
    for (std::size_t co = 0; co < c_out; ++co) {
      const T wv = p.weight.value[co * c_in + ci];
      const T* g = dy.plane(n, co);
      for (std::size_t i = 0; i < hw; ++i) o[i] += wv * g[i];
    }
  });

  parallel_for(c_out, s.n * hw * c_in, [&](std::size_t co) {
    T* gw = p.weight.grad.raw() + co * c_in;
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      double acc = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* g = dy.plane(n, co);
        const T* in = x.plane(n, ci);
        for (std::size_t i = 0; i < hw; ++i) acc += static_cast<double>(g[i]) * static_cast<double>(in[i]);
      }
      gw[ci] += static_cast<T>(acc);
    }
    double bacc = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* g = dy.plane(n, co);
      for (std::size_t i = 0; i < hw; ++i) bacc += static_cast<double>(g[i]);
    }
    p.bias.grad[co] += static_cast<T>(bacc);
  });
  return dx;
}

// ---------------------------------------------------------------------------
// Batch normalization

template <typename T>
BatchNorm<T> BatchNorm<T>::make(std::size_t channels) {
  BatchNorm bn;
  bn.gamma = Param<T>(full<T>({channels, 1, 1, 1}, T(1)));
  bn.beta = Param<T>(BasicTensor<T>({channels, 1, 1, 1}));
  bn.running_mean = BasicTensor<T>({channels, 1, 1, 1});
  bn.running_var = full<T>({channels, 1, 1, 1}, T(1));
  return bn;
}

namespace {

template <typename T>
void check_bn_channels(const BasicTensor<T>& x, const BatchNorm<T>& p) {
  if (x.shape().c != p.channels())
    throw ShapeError("batch_norm: input has " + std::to_string(x.shape().c) + " channels, expected " +
                     std::to_string(p.channels()));
}

template <typename T>
BasicTensor<T> normalize_with(const BasicTensor<T>& x, const BatchNorm<T>& p, const std::vector<double>& mean,
                              const std::vector<double>& inv_std, BasicTensor<T>* xhat_out) {
  const Shape s = x.shape();
  BasicTensor<T> y(s);
  parallel_for(s.c, s.n * s.plane(), [&](std::size_t c) {
    const double g = p.gamma.value[c], b = p.beta.value[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* in = x.plane(n, c);
      T* o = y.plane(n, c);
      T* xh = xhat_out ? xhat_out->plane(n, c) : nullptr;
      for (std::size_t i = 0; i < s.plane(); ++i) {
        const double v = (static_cast<double>(in[i]) - mean[c]) * inv_std[c];
        if (xh) xh[i] = static_cast<T>(v);
        o[i] = static_cast<T>(g * v + b);
      }
    }
  });
  return y;
}

}  // namespace

template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& x, BatchNorm<T>& p, BatchNormCache<T>* cache) {
  check_bn_channels(x, p);
  const Shape s = x.shape();
  std::vector<double> mean(s.c), inv_std(s.c);
  if (p.mode == Mode::eval) {
    for (std::size_t c = 0; c < s.c; ++c) {
      mean[c] = p.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(static_cast<double>(p.running_var[c]) + p.eps);
    }
  } else {
    const double count = static_cast<double>(s.n * s.plane());
    std::vector<double> var(s.c);
    parallel_for(s.c, s.n * s.plane(), [&](std::size_t c) {
      double acc = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* in = x.plane(n, c);
        for (std::size_t i = 0; i < s.plane(); ++i) acc += in[i];
      }
      const double m = acc / count;
      double sq = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* in = x.plane(n, c);
        for (std::size_t i = 0; i < s.plane(); ++i) {
          const double dv = in[i] - m;
          sq += dv * dv;
        }
      }
      mean[c] = m;
      var[c] = sq / count;
      inv_std[c] = 1.0 / std::sqrt(var[c] + p.eps);
    });
    for (std::size_t c = 0; c < s.c; ++c) {
      p.running_mean[c] = static_cast<T>((1.0 - p.momentum) * p.running_mean[c] + p.momentum * mean[c]);
      p.running_var[c] = static_cast<T>((1.0 - p.momentum) * p.running_var[c] + p.momentum * var[c]);
    }
  }
  if (!cache) return normalize_with<T>(x, p, mean, inv_std, nullptr);
  cache->mode = p.mode;
  cache->xhat = BasicTensor<T>(s);
  cache->inv_std = inv_std;
  return normalize_with(x, p, mean, inv_std, &cache->xhat);
}

template <typename T>
BasicTensor<T> batch_norm_eval(const BasicTensor<T>& x, const BatchNorm<T>& p) {
  check_bn_channels(x, p);
  const std::size_t C = p.channels();
  std::vector<double> mean(C), inv_std(C);
  for (std::size_t c = 0; c < C; ++c) {
    mean[c] = p.running_mean[c];
    inv_std[c] = 1.0 / std::sqrt(static_cast<double>(p.running_var[c]) + p.eps);
  }
  return normalize_with<T>(x, p, mean, inv_std, nullptr);
}

template <typename T>
BasicTensor<T> batch_norm_backward(const BatchNormCache<T>& cache, BatchNorm<T>& p, const BasicTensor<T>& dy) {
  const Shape s = cache.xhat.shape();
  require_same_shape(s, dy.shape(), "batch_norm_backward");
  const double count = static_cast<double>(s.n * s.plane());
  BasicTensor<T> dx(s);
  parallel_for(s.c, s.n * s.plane(), [&](std::size_t c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* g = dy.plane(n, c);
      const T* xh = cache.xhat.plane(n, c);
      for (std::size_t i = 0; i < s.plane(); ++i) {
        sum_dy += g[i];
        sum_dy_xhat += static_cast<double>(g[i]) * xh[i];
      }
    }
    p.gamma.grad[c] += static_cast<T>(sum_dy_xhat);
    p.beta.grad[c] += static_cast<T>(sum_dy);
    const double gamma = p.gamma.value[c];
    const double inv_std = cache.inv_std[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* g = dy.plane(n, c);
      const T* xh = cache.xhat.plane(n, c);
      T* o = dx.plane(n, c);
      if (cache.mode == Mode::eval) {
        for (std::size_t i = 0; i < s.plane(); ++i) o[i] = static_cast<T>(g[i] * gamma * inv_std);
      } else {
        const double k = gamma * inv_std / count;
        for (std::size_t i = 0; i < s.plane(); ++i)
          o[i] = static_cast<T>(k * (count * g[i] - sum_dy - xh[i] * sum_dy_xhat));
      }
    }
  });
  return dx;
}

// ---------------------------------------------------------------------------
// Activations

template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  const T* in = x.raw();
  T* o = y.raw();
  const T inv_sqrt2 = static_cast<T>(std::numbers::sqrt2 / 2.0);
  parallel_for(x.numel(), 16, [&](std::size_t i) {
    o[i] = T(0.5) * in[i] * (T(1) + std::erf(in[i] * inv_sqrt2));
  });
  return y;
}

template <typename T>
BasicTensor<T> gelu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy) {
  require_same_shape(x.shape(), dy.shape(), "gelu_backward");
  BasicTensor<T> dx(x.shape());
  const T inv_sqrt2 = static_cast<T>(std::numbers::sqrt2 / 2.0);
  const T inv_sqrt2pi = static_cast<T>(std::numbers::inv_sqrtpi * std::numbers::sqrt2 / 2.0);
  parallel_for(x.numel(), 16, [&](std::size_t i) {
    const T v = x[i];
    const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
    const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
    dx[i] = dy[i] * (cdf + v * pdf);
  });
  return dx;
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const T v = x[i];
    if (v >= T(0)) {
      y[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      y[i] = e / (T(1) + e);
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
  require_same_shape(y.shape(), dy.shape(), "sigmoid_backward");
  BasicTensor<T> dx(y.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) dx[i] = dy[i] * y[i] * (T(1) - y[i]);
  return dx;
}

// ---------------------------------------------------------------------------
// Resampling

template <typename T>
BasicTensor<T> max_pool2(const BasicTensor<T>& x, std::vector<std::uint32_t>* argmax) {
  const Shape s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) throw ShapeError("max_pool2: spatial dims must be even, got " + s.str());
  const Shape os{s.n, s.c, s.h / 2, s.w / 2};
  BasicTensor<T> y(os);
  if (argmax) argmax->assign(os.numel(), 0);
  parallel_for(s.n * s.c, s.plane(), [&](std::size_t nc) {
    const T* in = x.raw() + nc * s.plane();
    T* o = y.raw() + nc * os.plane();
    for (std::size_t h = 0; h < os.h; ++h) {
      for (std::size_t w = 0; w < os.w; ++w) {
        const std::size_t base = 2 * h * s.w + 2 * w;
        const std::size_t cand[4] = {base, base + 1, base + s.w, base + s.w + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k)
          if (in[cand[k]] > in[best]) best = cand[k];
        o[h * os.w + w] = in[best];
        if (argmax) (*argmax)[nc * os.plane() + h * os.w + w] = static_cast<std::uint32_t>(nc * s.plane() + best);
      }
    }
  });
  return y;
}

template <typename T>
BasicTensor<T> max_pool2_backward(const Shape& input_shape, const std::vector<std::uint32_t>& argmax,
                                  const BasicTensor<T>& dy) {
  if (argmax.size() != dy.numel()) throw ShapeError("max_pool2_backward: argmax/dy size mismatch");
  BasicTensor<T> dx(input_shape);
  // Windows do not overlap, so each input element receives at most one term.
  for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += dy[i];
  return dx;
}

template <typename T>
BasicTensor<T> upsample2(const BasicTensor<T>& x) {
  const Shape s = x.shape();
  const Shape os{s.n, s.c, s.h * 2, s.w * 2};
  BasicTensor<T> y(os);
  parallel_for(s.n * s.c, os.plane(), [&](std::size_t nc) {
    const T* in = x.raw() + nc * s.plane();
    T* o = y.raw() + nc * os.plane();
    for (std::size_t h = 0; h < os.h; ++h) {
      const T* irow = in + (h / 2) * s.w;
      T* orow = o + h * os.w;
      for (std::size_t w = 0; w < os.w; ++w) orow[w] = irow[w / 2];
    }
  });
  return y;
}

template <typename T>
BasicTensor<T> upsample2_backward(const BasicTensor<T>& dy) {
  const Shape os = dy.shape();
  if (os.h % 2 != 0 || os.w % 2 != 0) throw ShapeError("upsample2_backward: odd gradient extents");
  const Shape s{os.n, os.c, os.h / 2, os.w / 2};
  BasicTensor<T> dx(s);
  parallel_for(s.n * s.c, os.plane(), [&](std::size_t nc) {
    const T* g = dy.raw() + nc * os.plane();
    T* o = dx.raw() + nc * s.plane();
    for (std::size_t h = 0; h < s.h; ++h) {
      for (std::size_t w = 0; w < s.w; ++w) {
        const std::size_t b = 2 * h * os.w + 2 * w;
        o[h * s.w + w] = g[b] + g[b + 1] + g[b + os.w] + g[b + os.w + 1];
      }
    }
  });
  return dx;
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const Shape sa = a.shape(), sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w)
    throw ShapeError("concat_channels: incompatible " + sa.str() + " and " + sb.str());
  BasicTensor<T> out({sa.n, sa.c + sb.c, sa.h, sa.w});
  for (std::size_t n = 0; n < sa.n; ++n) {
    std::copy_n(a.plane(n, 0), sa.c * sa.plane(), out.plane(n, 0));
    std::copy_n(b.plane(n, 0), sb.c * sb.plane(), out.plane(n, sa.c));
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> concat_channels_backward(const BasicTensor<T>& dy, std::size_t c_a) {
  const Shape s = dy.shape();
  if (c_a == 0 || c_a >= s.c) throw ShapeError("concat_channels_backward: bad split");
  BasicTensor<T> da({s.n, c_a, s.h, s.w}), db({s.n, s.c - c_a, s.h, s.w});
  for (std::size_t n = 0; n < s.n; ++n) {
    std::copy_n(dy.plane(n, 0), c_a * s.plane(), da.plane(n, 0));
    std::copy_n(dy.plane(n, c_a), (s.c - c_a) * s.plane(), db.plane(n, 0));
  }
  return {std::move(da), std::move(db)};
}

#define ULITE_INSTANTIATE(T)                                                                                \
  template struct DepthwiseConv<T>;                                                                         \
  template struct PointwiseConv<T>;                                                                         \
  template struct BatchNorm<T>;                                                                             \
  template BasicTensor<T> depthwise_conv<T>(const BasicTensor<T>&, const DepthwiseConv<T>&);                \
  template BasicTensor<T> depthwise_conv_backward<T>(const BasicTensor<T>&, DepthwiseConv<T>&,              \
                                                     const BasicTensor<T>&);                                \
  template BasicTensor<T> pointwise_conv<T>(const BasicTensor<T>&, const PointwiseConv<T>&);                \
  template BasicTensor<T> pointwise_conv_backward<T>(const BasicTensor<T>&, PointwiseConv<T>&,              \
                                                     const BasicTensor<T>&);                                \
  template BasicTensor<T> batch_norm<T>(const BasicTensor<T>&, BatchNorm<T>&, BatchNormCache<T>*);          \
  template BasicTensor<T> batch_norm_eval<T>(const BasicTensor<T>&, const BatchNorm<T>&);                   \
  template BasicTensor<T> batch_norm_backward<T>(const BatchNormCache<T>&, BatchNorm<T>&,                   \
                                                 const BasicTensor<T>&);                                    \
  template BasicTensor<T> gelu<T>(const BasicTensor<T>&);                                                   \
  template BasicTensor<T> gelu_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&);                   \
  template BasicTensor<T> sigmoid<T>(const BasicTensor<T>&);                                                \
  template BasicTensor<T> sigmoid_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> max_pool2<T>(const BasicTensor<T>&, std::vector<std::uint32_t>*);                 \
  template BasicTensor<T> max_pool2_backward<T>(const Shape&, const std::vector<std::uint32_t>&,            \
                                                const BasicTensor<T>&);                                     \
  template BasicTensor<T> upsample2<T>(const BasicTensor<T>&);                                              \
  template BasicTensor<T> upsample2_backward<T>(const BasicTensor<T>&);                                     \
  template BasicTensor<T> concat_channels<T>(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template std::pair<BasicTensor<T>, BasicTensor<T>> concat_channels_backward<T>(const BasicTensor<T>&,     \
                                                                                 std::size_t);

ULITE_INSTANTIATE(float)
ULITE_INSTANTIATE(double)

#undef ULITE_INSTANTIATE

}  // namespace ulite
