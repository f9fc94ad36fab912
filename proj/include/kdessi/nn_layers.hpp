#pragma once

/// Differentiable layer primitives over [batch, channels, length] tensors:
/// 1D convolution (im2col + GEMM), batch normalization, ReLU, global average
/// pooling, and a linear head. Layers cache what their backward pass needs
/// when called with training = true; backward accumulates parameter
/// gradients and returns the input gradient.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "kdessi/tensor.hpp"

namespace kdessi::nn {

inline std::size_t conv_output_length(std::size_t length, int kernel, int stride, int pad) {
    const long long n = static_cast<long long>(length) + 2LL * pad - kernel;
    if (n < 0 || stride < 1) throw std::invalid_argument("conv1d: kernel exceeds padded input");
    return static_cast<std::size_t>(n / stride + 1);
}

namespace detail {

// col[(ci*k + kk), t] = x[ci, t*stride + kk - pad], zero outside.
template <typename S>
inline void im2col(const S* x, std::size_t channels, std::size_t length,
                   int kernel, int stride, int pad, std::size_t out_len, S* col) {
    for (std::size_t ci = 0; ci < channels; ++ci) {
        const S* xc = x + ci * length;
        for (int kk = 0; kk < kernel; ++kk) {
            S* row = col + (ci * kernel + kk) * out_len;
            for (std::size_t t = 0; t < out_len; ++t) {
                const long long src = static_cast<long long>(t) * stride + kk - pad;
                row[t] = (src >= 0 && src < static_cast<long long>(length))
                             ? xc[src]
                             : S(0);
            }
        }
    }
}

template <typename S>
inline void col2im_acc(const S* col, std::size_t channels, std::size_t length,
                       int kernel, int stride, int pad, std::size_t out_len, S* x) {
    for (std::size_t ci = 0; ci < channels; ++ci) {
        S* xc = x + ci * length;
        for (int kk = 0; kk < kernel; ++kk) {
            const S* row = col + (ci * kernel + kk) * out_len;
            for (std::size_t t = 0; t < out_len; ++t) {
                const long long dst = static_cast<long long>(t) * stride + kk - pad;
                if (dst >= 0 && dst < static_cast<long long>(length)) xc[dst] += row[t];
            }
        }
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Functional convolution (also used directly by the op-level tests).
// ---------------------------------------------------------------------------

/// x: [B, C_in, L], weight: [C_out, C_in, k], bias: [C_out] -> [B, C_out, L'].
template <typename S>
Tensor<S> conv1d_forward(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>& bias,
                         int stride, int pad) {
    if (x.shape.size() != 3 || weight.shape.size() != 3)
        throw std::invalid_argument("conv1d: expected rank-3 input and weight");
    const std::size_t batch = x.shape[0], in_ch = x.shape[1], length = x.shape[2];
    const std::size_t out_ch = weight.shape[0];
    const int kernel = static_cast<int>(weight.shape[2]);
    if (weight.shape[1] != in_ch)
        throw std::invalid_argument("conv1d: weight channel mismatch");
    if (bias.numel() != out_ch) throw std::invalid_argument("conv1d: bias shape mismatch");
    const std::size_t out_len = conv_output_length(length, kernel, stride, pad);

    Tensor<S> y({batch, out_ch, out_len});
    const std::size_t ck = in_ch * kernel;
    std::vector<S> col(ck * out_len);
    for (std::size_t b = 0; b < batch; ++b) {
        detail::im2col(x.ptr() + b * in_ch * length, in_ch, length, kernel, stride, pad,
                       out_len, col.data());
        S* yb = y.ptr() + b * out_ch * out_len;
        blas::gemm_acc(out_ch, out_len, ck, weight.ptr(), col.data(), yb);
        for (std::size_t o = 0; o < out_ch; ++o) {
            const S bv = bias.data[o];
            S* row = yb + o * out_len;
            for (std::size_t t = 0; t < out_len; ++t) row[t] += bv;
        }
    }
    return y;
}

template <typename S>
struct ConvGrads {
    Tensor<S> dx, dweight, dbias;
};

template <typename S>
ConvGrads<S> conv1d_backward(const Tensor<S>& x, const Tensor<S>& weight,
                             const Tensor<S>& dy, int stride, int pad) {
    const std::size_t batch = x.shape[0], in_ch = x.shape[1], length = x.shape[2];
    const std::size_t out_ch = weight.shape[0];
    const int kernel = static_cast<int>(weight.shape[2]);
    const std::size_t out_len = dy.shape[2];
    const std::size_t ck = in_ch * kernel;

    ConvGrads<S> g{Tensor<S>(x.shape), Tensor<S>(weight.shape), Tensor<S>({out_ch})};
    std::vector<S> col(ck * out_len), dcol(ck * out_len);

    // W^T laid out as [ck, out_ch] for the input-gradient GEMM.
    std::vector<S> wt(ck * out_ch);
    for (std::size_t o = 0; o < out_ch; ++o)
        for (std::size_t r = 0; r < ck; ++r) wt[r * out_ch + o] = weight.data[o * ck + r];

    for (std::size_t b = 0; b < batch; ++b) {
        detail::im2col(x.ptr() + b * in_ch * length, in_ch, length, kernel, stride, pad,
                       out_len, col.data());
        const S* dyb = dy.ptr() + b * out_ch * out_len;

        for (std::size_t o = 0; o < out_ch; ++o) {
            const S* dyo = dyb + o * out_len;
            S* dwo = g.dweight.ptr() + o * ck;
            for (std::size_t r = 0; r < ck; ++r)
                dwo[r] += blas::dot(dyo, col.data() + r * out_len, out_len);
            S s(0);
            for (std::size_t t = 0; t < out_len; ++t) s += dyo[t];
            g.dbias.data[o] += s;
        }

        std::fill(dcol.begin(), dcol.end(), S(0));
        blas::gemm_acc(ck, out_len, out_ch, wt.data(), dyb, dcol.data());
        detail::col2im_acc(dcol.data(), in_ch, length, kernel, stride, pad, out_len,
                           g.dx.ptr() + b * in_ch * length);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Layer objects.
// ---------------------------------------------------------------------------

template <typename S>
struct Conv1d {
    int in_ch = 0, out_ch = 0, kernel = 3, stride = 1, pad = 1;
    Param<S> weight, bias;
    Tensor<S> cached_x;

    Conv1d() = default;
    Conv1d(int in_channels, int out_channels, int kernel_size, int stride_, int pad_)
        : in_ch(in_channels), out_ch(out_channels), kernel(kernel_size), stride(stride_), pad(pad_),
          weight({static_cast<std::size_t>(out_channels), static_cast<std::size_t>(in_channels),
                  static_cast<std::size_t>(kernel_size)}),
          bias({static_cast<std::size_t>(out_channels)}) {}

    void init(std::mt19937& rng) {
        const double fan_in = static_cast<double>(in_ch) * kernel;
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (auto& w : weight.value.data) w = static_cast<S>(dist(rng));
        bias.value.fill(S(0));
    }

    Tensor<S> forward(const Tensor<S>& x, bool training) {
        if (training) cached_x = x;
        return conv1d_forward(x, weight.value, bias.value, stride, pad);
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        ConvGrads<S> g = conv1d_backward(cached_x, weight.value, dy, stride, pad);
        for (std::size_t i = 0; i < g.dweight.numel(); ++i) weight.grad.data[i] += g.dweight.data[i];
        for (std::size_t i = 0; i < g.dbias.numel(); ++i) bias.grad.data[i] += g.dbias.data[i];
        return std::move(g.dx);
    }
};

template <typename S>
struct BatchNorm1d {
    int channels = 0;
    double eps = 1e-5;
    double momentum = 0.1;
    Param<S> gamma, beta;
    Tensor<S> running_mean, running_var;
    // training cache
    Tensor<S> cached_xhat;
    std::vector<S> cached_invstd;

    BatchNorm1d() = default;
    explicit BatchNorm1d(int ch)
        : channels(ch),
          gamma({static_cast<std::size_t>(ch)}),
          beta({static_cast<std::size_t>(ch)}),
          running_mean({static_cast<std::size_t>(ch)}),
          running_var({static_cast<std::size_t>(ch)}) {
        gamma.value.fill(S(1));
        running_var.fill(S(1));
    }

    Tensor<S> forward(const Tensor<S>& x, bool training) {
        const std::size_t batch = x.shape[0], ch = x.shape[1], length = x.shape[2];
        if (ch != static_cast<std::size_t>(channels))
            throw std::invalid_argument("batchnorm: channel mismatch");
        Tensor<S> y(x.shape);
        const std::size_t m = batch * length;
        if (training) {
            cached_xhat = Tensor<S>(x.shape);
            cached_invstd.assign(ch, S(0));
        }
        for (std::size_t c = 0; c < ch; ++c) {
            S mean, invstd;
            if (training) {
                double sum = 0.0, sum_sq = 0.0;
                for (std::size_t b = 0; b < batch; ++b) {
                    const S* xc = x.ptr() + (b * ch + c) * length;
                    for (std::size_t t = 0; t < length; ++t) {
                        sum += xc[t];
                        sum_sq += static_cast<double>(xc[t]) * xc[t];
                    }
                }
                const double mu = sum / static_cast<double>(m);
                const double var = std::max(0.0, sum_sq / static_cast<double>(m) - mu * mu);
                mean = static_cast<S>(mu);
                invstd = static_cast<S>(1.0 / std::sqrt(var + eps));
                const double unbiased = m > 1 ? var * static_cast<double>(m) / (m - 1) : var;
                running_mean.data[c] =
                    static_cast<S>((1.0 - momentum) * running_mean.data[c] + momentum * mu);
                running_var.data[c] =
                    static_cast<S>((1.0 - momentum) * running_var.data[c] + momentum * unbiased);
                cached_invstd[c] = invstd;
            } else {
                mean = running_mean.data[c];
                invstd = static_cast<S>(1.0 / std::sqrt(static_cast<double>(running_var.data[c]) + eps));
            }
            const S g = gamma.value.data[c], bta = beta.value.data[c];
            for (std::size_t b = 0; b < batch; ++b) {
                const S* xc = x.ptr() + (b * ch + c) * length;
                S* yc = y.ptr() + (b * ch + c) * length;
                S* xh = training ? cached_xhat.ptr() + (b * ch + c) * length : nullptr;
                for (std::size_t t = 0; t < length; ++t) {
                    const S xhat = (xc[t] - mean) * invstd;
                    if (training) xh[t] = xhat;
                    yc[t] = g * xhat + bta;
                }
            }
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        const std::size_t batch = dy.shape[0], ch = dy.shape[1], length = dy.shape[2];
        const std::size_t m = batch * length;
        Tensor<S> dx(dy.shape);
        for (std::size_t c = 0; c < ch; ++c) {
            // Reductions over the batch/length plane for this channel.
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                const S* dyc = dy.ptr() + (b * ch + c) * length;
                const S* xh = cached_xhat.ptr() + (b * ch + c) * length;
                for (std::size_t t = 0; t < length; ++t) {
                    sum_dy += dyc[t];
                    sum_dy_xhat += static_cast<double>(dyc[t]) * xh[t];
                }
            }
            gamma.grad.data[c] += static_cast<S>(sum_dy_xhat);
            beta.grad.data[c] += static_cast<S>(sum_dy);

            const double g = gamma.value.data[c];
            const double invstd = cached_invstd[c];
            const double inv_m = 1.0 / static_cast<double>(m);
            for (std::size_t b = 0; b < batch; ++b) {
                const S* dyc = dy.ptr() + (b * ch + c) * length;
                const S* xh = cached_xhat.ptr() + (b * ch + c) * length;
                S* dxc = dx.ptr() + (b * ch + c) * length;
                for (std::size_t t = 0; t < length; ++t) {
                    const double term = static_cast<double>(dyc[t]) - inv_m * sum_dy -
                                        inv_m * sum_dy_xhat * xh[t];
                    dxc[t] = static_cast<S>(g * invstd * term);
                }
            }
        }
        return dx;
    }
};

template <typename S>
struct Relu {
    Tensor<S> cached_x;

    Tensor<S> forward(const Tensor<S>& x, bool training) {
        if (training) cached_x = x;
        Tensor<S> y(x.shape);
        for (std::size_t i = 0; i < x.numel(); ++i) y.data[i] = x.data[i] > S(0) ? x.data[i] : S(0);
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> dx(dy.shape);
        for (std::size_t i = 0; i < dy.numel(); ++i)
            dx.data[i] = cached_x.data[i] > S(0) ? dy.data[i] : S(0);
        return dx;
    }
};

/// [B, C, L] -> [B, C] mean over the length axis.
template <typename S>
struct GlobalAvgPool {
    std::size_t cached_length = 0;

    Tensor<S> forward(const Tensor<S>& x, bool training) {
        const std::size_t batch = x.shape[0], ch = x.shape[1], length = x.shape[2];
        if (training) cached_length = length;
        Tensor<S> y({batch, ch});
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t c = 0; c < ch; ++c) {
                const S* xc = x.ptr() + (b * ch + c) * length;
                double s = 0.0;
                for (std::size_t t = 0; t < length; ++t) s += xc[t];
                y.data[b * ch + c] = static_cast<S>(s / static_cast<double>(length));
            }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        const std::size_t batch = dy.shape[0], ch = dy.shape[1];
        Tensor<S> dx({batch, ch, cached_length});
        const S inv = static_cast<S>(1.0 / static_cast<double>(cached_length));
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t c = 0; c < ch; ++c) {
                const S v = dy.data[b * ch + c] * inv;
                S* dxc = dx.ptr() + (b * ch + c) * cached_length;
                for (std::size_t t = 0; t < cached_length; ++t) dxc[t] = v;
            }
        return dx;
    }
};

/// [B, F] -> [B, O], weight [O, F].
template <typename S>
struct Linear {
    int in_features = 0, out_features = 0;
    Param<S> weight, bias;
    Tensor<S> cached_x;

    Linear() = default;
    Linear(int in_f, int out_f)
        : in_features(in_f), out_features(out_f),
          weight({static_cast<std::size_t>(out_f), static_cast<std::size_t>(in_f)}),
          bias({static_cast<std::size_t>(out_f)}) {}

    void init(std::mt19937& rng) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in_features));
        for (auto& w : weight.value.data) w = static_cast<S>(dist(rng));
        bias.value.fill(S(0));
    }

    Tensor<S> forward(const Tensor<S>& x, bool training) {
        if (training) cached_x = x;
        const std::size_t batch = x.shape[0];
        const std::size_t in_f = in_features, out_f = out_features;
        if (x.shape[1] != in_f) throw std::invalid_argument("linear: feature mismatch");
        Tensor<S> y({batch, out_f});
        for (std::size_t b = 0; b < batch; ++b) {
            const S* xb = x.ptr() + b * in_f;
            S* yb = y.ptr() + b * out_f;
            for (std::size_t o = 0; o < out_f; ++o)
                yb[o] = blas::dot(weight.ptr() + o * in_f, xb, in_f) + bias.value.data[o];
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        const std::size_t batch = dy.shape[0];
        const std::size_t in_f = in_features, out_f = out_features;
        Tensor<S> dx({batch, in_f});
        for (std::size_t b = 0; b < batch; ++b) {
            const S* dyb = dy.ptr() + b * out_f;
            const S* xb = cached_x.ptr() + b * in_f;
            for (std::size_t o = 0; o < out_f; ++o) {
                const S g = dyb[o];
                S* dwo = weight.grad.ptr() + o * in_f;
                for (std::size_t i = 0; i < in_f; ++i) dwo[i] += g * xb[i];
                bias.grad.data[o] += g;
            }
            S* dxb = dx.ptr() + b * in_f;
            for (std::size_t o = 0; o < out_f; ++o) {
                const S g = dyb[o];
                const S* wo = weight.ptr() + o * in_f;
                for (std::size_t i = 0; i < in_f; ++i) dxb[i] += g * wo[i];
            }
        }
        return dx;
    }
};

} // namespace kdessi::nn
