#ifndef ADNET_LAYERS_HPP
#define ADNET_LAYERS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adnet/tensor.hpp"

namespace adnet {

enum class LayerKind { Conv, MaxPool, Relu, Lrn, Dropout, Dense, Flatten, Softmax };

enum class Mode { Train, Infer };

struct LrnParams {
    double bias = 2.0;    // k
    int window = 5;       // n, odd
    double alpha = 1e-4;
    double beta = 0.75;
};

// One row of a network configuration table.
struct LayerSpec {
    LayerKind kind;
    std::string name;
    int kernel = 0;        // conv: receptive field, 1 or 3
    int channels = 0;      // conv: output channels; dense: output units
    double rate = 0.0;     // dropout
    LrnParams lrn{};
    bool trainable = true; // conv/dense only

    bool has_weights() const { return kind == LayerKind::Conv || kind == LayerKind::Dense; }
};

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv: return "conv";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::Relu: return "relu";
        case LayerKind::Lrn: return "lrn";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::Dense: return "dense";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// conv2d, realized as im2col + matmul. Stride 1; pad (k-1)/2 keeps the
// spatial size, which is what the 3x3/1x1 configurations assume.
// ---------------------------------------------------------------------------

template <class T>
struct ConvGrads {
    Tensor<T> dx, dw, db;
};

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                         std::int64_t stride, std::int64_t pad) {
    if (x.rank() != 4 || w.rank() != 4)
        throw ShapeError("conv2d: input and weights must be rank 4");
    if (w.extent(1) != x.extent(1))
        throw ShapeError("conv2d: input has " + std::to_string(x.extent(1)) +
                         " channels, weights expect " + std::to_string(w.extent(1)));
    if (w.extent(2) != w.extent(3))
        throw ShapeError("conv2d: square kernels only");
    if (b.rank() != 1 || b.extent(0) != w.extent(0))
        throw ShapeError("conv2d: bias must be [out_channels]");

    const std::int64_t out_c = w.extent(0);
    const std::int64_t k = w.extent(2);
    const ConvGeometry g = conv_geometry(x.shape(), k, stride, pad);

    Tensor<T> cols = im2col(x, k, stride, pad);
    Tensor<T> wmat = w.reshaped({out_c, w.extent(1) * k * k});
    Tensor<T> ymat = matmul(wmat, cols); // [out_c x N*out_h*out_w]

    Tensor<T> y({g.batch, out_c, g.out_h, g.out_w});
    const std::int64_t hw = g.out_h * g.out_w;
    for (std::int64_t n = 0; n < g.batch; ++n)
        for (std::int64_t o = 0; o < out_c; ++o) {
            const T bo = b[static_cast<std::size_t>(o)];
            const T* src = ymat.raw() + o * g.batch * hw + n * hw;
            T* dst = y.raw() + (n * out_c + o) * hw;
            for (std::int64_t i = 0; i < hw; ++i) dst[i] = src[i] + bo;
        }
    return y;
}

template <class T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy,
                             std::int64_t stride, std::int64_t pad) {
    const std::int64_t out_c = w.extent(0);
    const std::int64_t k = w.extent(2);
    const ConvGeometry g = conv_geometry(x.shape(), k, stride, pad);
    if (dy.shape() != Shape{g.batch, out_c, g.out_h, g.out_w})
        throw ShapeError("conv2d backward: upstream gradient shape " + shape_str(dy.shape()));

    // [out_c x N*out_h*out_w] view of dy
    const std::int64_t hw = g.out_h * g.out_w;
    Tensor<T> dymat({out_c, g.batch * hw});
    for (std::int64_t n = 0; n < g.batch; ++n)
        for (std::int64_t o = 0; o < out_c; ++o) {
            const T* src = dy.raw() + (n * out_c + o) * hw;
            T* dst = dymat.raw() + o * g.batch * hw + n * hw;
            for (std::int64_t i = 0; i < hw; ++i) dst[i] = src[i];
        }

    Tensor<T> cols = im2col(x, k, stride, pad);
    Tensor<T> dwmat = matmul(dymat, transpose(cols));
    Tensor<T> wmat = w.reshaped({out_c, w.extent(1) * k * k});
    Tensor<T> dcols = matmul(transpose(wmat), dymat);

    ConvGrads<T> grads;
    grads.dx = col2im(dcols, x.shape(), k, stride, pad);
    grads.dw = dwmat.reshaped(w.shape());
    grads.db = Tensor<T>({out_c});
    for (std::int64_t o = 0; o < out_c; ++o) {
        T s = 0;
        const T* row = dymat.raw() + o * g.batch * hw;
        for (std::int64_t i = 0; i < g.batch * hw; ++i) s += row[i];
        grads.db[static_cast<std::size_t>(o)] = s;
    }
    return grads;
}

// ---------------------------------------------------------------------------
// 2x2 max pooling, stride 2. Backward routes the whole upstream gradient to
// the argmax position; ties go to the first position in scan order.
// ---------------------------------------------------------------------------

template <class T>
struct PoolResult {
    Tensor<T> y;
    std::vector<std::int64_t> argmax; // flat input index per output element
};

template <class T>
PoolResult<T> maxpool2d_forward(const Tensor<T>& x) {
    if (x.rank() != 4) throw ShapeError("maxpool2d: rank-4 input expected");
    const std::int64_t n_ = x.extent(0), c_ = x.extent(1), h_ = x.extent(2), w_ = x.extent(3);
    if (h_ % 2 != 0 || w_ % 2 != 0)
        throw ShapeError("maxpool2d: spatial extents must be even, got " + shape_str(x.shape()));

    PoolResult<T> r{Tensor<T>({n_, c_, h_ / 2, w_ / 2}), {}};
    r.argmax.resize(r.y.size());
    std::size_t out = 0;
    for (std::int64_t n = 0; n < n_; ++n)
        for (std::int64_t c = 0; c < c_; ++c) {
            const std::int64_t base = (n * c_ + c) * h_ * w_;
            for (std::int64_t oh = 0; oh < h_ / 2; ++oh)
                for (std::int64_t ow = 0; ow < w_ / 2; ++ow) {
                    std::int64_t best = base + (2 * oh) * w_ + 2 * ow;
                    T best_v = x[static_cast<std::size_t>(best)];
                    for (int di = 0; di < 2; ++di)
                        for (int dj = 0; dj < 2; ++dj) {
                            const std::int64_t idx = base + (2 * oh + di) * w_ + (2 * ow + dj);
                            const T v = x[static_cast<std::size_t>(idx)];
                            if (v > best_v) { best_v = v; best = idx; }
                        }
                    r.y[out] = best_v;
                    r.argmax[out] = best;
                    ++out;
                }
        }
    return r;
}

template <class T>
Tensor<T> maxpool2d_backward(const Tensor<T>& dy, const std::vector<std::int64_t>& argmax,
                             const Shape& input_shape) {
    Tensor<T> dx(input_shape);
    if (dy.size() != argmax.size()) throw ShapeError("maxpool2d backward: argmax cache mismatch");
    for (std::size_t i = 0; i < dy.size(); ++i)
        dx[static_cast<std::size_t>(argmax[i])] += dy[i];
    return dx;
}

// ---------------------------------------------------------------------------
// relu. Subgradient at exactly 0 is 0.
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> relu_forward(const Tensor<T>& x) {
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    return y;
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
    if (!x.same_shape(dy)) throw ShapeError("relu backward: shape mismatch");
    Tensor<T> dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
    return dx;
}

// ---------------------------------------------------------------------------
// Local response normalization across channels:
//   y[c] = x[c] / (k + alpha * sum_{c' in win(c)} x[c']^2)^beta
// with the window clipped at the channel boundaries.
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> lrn_forward(const Tensor<T>& x, const LrnParams& p) {
    if (x.rank() != 4) throw ShapeError("lrn: rank-4 input expected");
    if (p.window % 2 == 0) throw ParameterError("lrn: window must be odd");
    const std::int64_t n_ = x.extent(0), c_ = x.extent(1), h_ = x.extent(2), w_ = x.extent(3);
    const std::int64_t half = p.window / 2;
    Tensor<T> y(x.shape());
    const std::int64_t hw = h_ * w_;
    for (std::int64_t n = 0; n < n_; ++n)
        for (std::int64_t i = 0; i < hw; ++i)
            for (std::int64_t c = 0; c < c_; ++c) {
                const std::int64_t lo = c - half < 0 ? 0 : c - half;
                const std::int64_t hi = c + half >= c_ ? c_ - 1 : c + half;
                double s = p.bias;
                for (std::int64_t cc = lo; cc <= hi; ++cc) {
                    const double v = x[static_cast<std::size_t>((n * c_ + cc) * hw + i)];
                    s += p.alpha * v * v;
                }
                const std::size_t idx = static_cast<std::size_t>((n * c_ + c) * hw + i);
                y[idx] = static_cast<T>(x[idx] * std::pow(s, -p.beta));
            }
    return y;
}

template <class T>
Tensor<T> lrn_backward(const Tensor<T>& x, const Tensor<T>& dy, const LrnParams& p) {
    if (!x.same_shape(dy)) throw ShapeError("lrn backward: shape mismatch");
    const std::int64_t n_ = x.extent(0), c_ = x.extent(1), h_ = x.extent(2), w_ = x.extent(3);
    const std::int64_t half = p.window / 2;
    const std::int64_t hw = h_ * w_;
    Tensor<T> dx(x.shape());
    std::vector<double> pow_b(static_cast<std::size_t>(c_));  // s[c]^(-beta)
    std::vector<double> pow_b1(static_cast<std::size_t>(c_)); // s[c]^(-beta-1)
    for (std::int64_t n = 0; n < n_; ++n)
        for (std::int64_t i = 0; i < hw; ++i) {
            for (std::int64_t c = 0; c < c_; ++c) {
                const std::int64_t lo = c - half < 0 ? 0 : c - half;
                const std::int64_t hi = c + half >= c_ ? c_ - 1 : c + half;
                double s = p.bias;
                for (std::int64_t cc = lo; cc <= hi; ++cc) {
                    const double v = x[static_cast<std::size_t>((n * c_ + cc) * hw + i)];
                    s += p.alpha * v * v;
                }
                pow_b1[static_cast<std::size_t>(c)] = std::pow(s, -p.beta - 1.0);
                pow_b[static_cast<std::size_t>(c)] = pow_b1[static_cast<std::size_t>(c)] * s;
            }
            // dx[d] = dy[d]*s[d]^-beta
            //       - 2*alpha*beta*x[d] * sum_{c: d in win(c)} dy[c]*x[c]*s[c]^(-beta-1)
            // (d in win(c) iff |c - d| <= half, so the sum runs over win(d))
            for (std::int64_t d = 0; d < c_; ++d) {
                const std::size_t di = static_cast<std::size_t>((n * c_ + d) * hw + i);
                const std::int64_t lo = d - half < 0 ? 0 : d - half;
                const std::int64_t hi = d + half >= c_ ? c_ - 1 : d + half;
                double acc = 0.0;
                for (std::int64_t c = lo; c <= hi; ++c) {
                    const std::size_t ci = static_cast<std::size_t>((n * c_ + c) * hw + i);
                    acc += static_cast<double>(dy[ci]) * x[ci] * pow_b1[static_cast<std::size_t>(c)];
                }
                dx[di] = static_cast<T>(static_cast<double>(dy[di]) * pow_b[static_cast<std::size_t>(d)] -
                                        2.0 * p.alpha * p.beta * x[di] * acc);
            }
        }
    return dx;
}

// ---------------------------------------------------------------------------
// Inverted dropout: survivors are scaled by 1/(1-rate) at train time so
// inference is the identity. The mask doubles as the backward multiplier.
// ---------------------------------------------------------------------------

template <class T>
struct DropoutResult {
    Tensor<T> y;
    Tensor<T> mask; // 0 for dropped, 1/(1-rate) for kept; empty in infer mode
};

template <class T>
DropoutResult<T> dropout_forward(const Tensor<T>& x, double rate, Mode mode, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
        throw ParameterError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    if (mode == Mode::Infer || rate == 0.0) {
        DropoutResult<T> r{x, Tensor<T>()};
        return r;
    }
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
    Rng rng(seed);
    DropoutResult<T> r{Tensor<T>(x.shape()), Tensor<T>(x.shape())};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const T m = rng.bernoulli(rate) ? T(0) : keep_scale;
        r.mask[i] = m;
        r.y[i] = x[i] * m;
    }
    return r;
}

template <class T>
Tensor<T> dropout_backward(const Tensor<T>& dy, const Tensor<T>& mask) {
    if (mask.size() == 0) return dy; // infer / rate 0: identity
    if (!dy.same_shape(mask)) throw ShapeError("dropout backward: mask shape mismatch");
    Tensor<T> dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask[i];
    return dx;
}

// ---------------------------------------------------------------------------
// Fully connected: y = x * W + b, x is [N x fan_in], W is [fan_in x fan_out].
// ---------------------------------------------------------------------------

template <class T>
struct DenseGrads {
    Tensor<T> dx, dw, db;
};

template <class T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    if (x.rank() != 2) throw ShapeError("dense: rank-2 input expected (flatten first)");
    if (w.rank() != 2 || x.extent(1) != w.extent(0))
        throw ShapeError("dense: fan_in mismatch, input " + shape_str(x.shape()) +
                         " weights " + shape_str(w.shape()));
    if (b.rank() != 1 || b.extent(0) != w.extent(1))
        throw ShapeError("dense: bias must be [fan_out]");
    Tensor<T> y = matmul(x, w);
    for (std::int64_t n = 0; n < y.extent(0); ++n)
        for (std::int64_t j = 0; j < y.extent(1); ++j) y.at(n, j) += b[static_cast<std::size_t>(j)];
    return y;
}

template <class T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy) {
    if (dy.rank() != 2 || dy.extent(0) != x.extent(0) || dy.extent(1) != w.extent(1))
        throw ShapeError("dense backward: upstream gradient shape " + shape_str(dy.shape()));
    DenseGrads<T> g;
    g.dw = matmul(transpose(x), dy);
    g.dx = matmul(dy, transpose(w));
    g.db = Tensor<T>({w.extent(1)});
    for (std::int64_t n = 0; n < dy.extent(0); ++n)
        for (std::int64_t j = 0; j < dy.extent(1); ++j)
            g.db[static_cast<std::size_t>(j)] += dy.at(n, j);
    return g;
}

// ---------------------------------------------------------------------------
// Row-wise softmax with max subtraction, and the categorical cross-entropy
// loss. Training fuses the two: d loss / d logits = (probs - targets) / N.
// ---------------------------------------------------------------------------

inline constexpr double kLossEpsilon = 1e-12;

template <class T>
Tensor<T> softmax_forward(const Tensor<T>& x) {
    if (x.rank() != 2 || x.extent(1) < 2)
        throw ShapeError("softmax: rank-2 input with >= 2 columns expected");
    Tensor<T> y(x.shape());
    const std::int64_t n_ = x.extent(0), k_ = x.extent(1);
    for (std::int64_t n = 0; n < n_; ++n) {
        T m = x.at(n, 0);
        for (std::int64_t k = 1; k < k_; ++k) m = std::max(m, x.at(n, k));
        T z = 0;
        for (std::int64_t k = 0; k < k_; ++k) {
            const T e = std::exp(x.at(n, k) - m);
            y.at(n, k) = e;
            z += e;
        }
        for (std::int64_t k = 0; k < k_; ++k) y.at(n, k) /= z;
    }
    return y;
}

// dx_k = y_k * (dy_k - sum_j dy_j * y_j), per row.
template <class T>
Tensor<T> softmax_backward(const Tensor<T>& y, const Tensor<T>& dy) {
    if (!y.same_shape(dy)) throw ShapeError("softmax backward: shape mismatch");
    Tensor<T> dx(y.shape());
    for (std::int64_t n = 0; n < y.extent(0); ++n) {
        T s = 0;
        for (std::int64_t k = 0; k < y.extent(1); ++k) s += dy.at(n, k) * y.at(n, k);
        for (std::int64_t k = 0; k < y.extent(1); ++k)
            dx.at(n, k) = y.at(n, k) * (dy.at(n, k) - s);
    }
    return dx;
}

template <class T>
void require_one_hot(const Tensor<T>& targets) {
    if (targets.rank() != 2) throw ParameterError("targets: rank-2 one-hot tensor expected");
    for (std::int64_t n = 0; n < targets.extent(0); ++n) {
        int ones = 0;
        for (std::int64_t k = 0; k < targets.extent(1); ++k) {
            const T v = targets.at(n, k);
            if (v == T(1)) ++ones;
            else if (v != T(0))
                throw ParameterError("targets: row " + std::to_string(n) + " is not one-hot");
        }
        if (ones != 1) throw ParameterError("targets: row " + std::to_string(n) + " is not one-hot");
    }
}

template <class T>
T cross_entropy_loss(const Tensor<T>& probs, const Tensor<T>& targets) {
    if (!probs.same_shape(targets)) throw ShapeError("cross_entropy: shape mismatch");
    require_one_hot(targets);
    const std::int64_t n_ = probs.extent(0);
    double loss = 0.0;
    for (std::int64_t n = 0; n < n_; ++n)
        for (std::int64_t k = 0; k < probs.extent(1); ++k)
            if (targets.at(n, k) == T(1))
                loss -= std::log(static_cast<double>(probs.at(n, k)) + kLossEpsilon);
    return static_cast<T>(loss / static_cast<double>(n_));
}

// Gradient of the mean cross-entropy w.r.t. pre-softmax logits.
template <class T>
Tensor<T> softmax_xent_backward(const Tensor<T>& probs, const Tensor<T>& targets) {
    if (!probs.same_shape(targets)) throw ShapeError("cross_entropy: shape mismatch");
    Tensor<T> d(probs.shape());
    const T inv_n = T(1) / static_cast<T>(probs.extent(0));
    for (std::size_t i = 0; i < probs.size(); ++i) d[i] = (probs[i] - targets[i]) * inv_n;
    return d;
}

} // namespace adnet

#endif
