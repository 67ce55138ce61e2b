#ifndef ADNET_MODEL_HPP
#define ADNET_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "adnet/layers.hpp"
#include "adnet/network.hpp"
#include "adnet/tensor.hpp"

namespace adnet {

template <class T>
struct LayerVars {
    Tensor<T> weights;
    Tensor<T> bias;
    bool empty() const { return weights.size() == 0; }
};

template <class T>
struct LayerCache {
    Tensor<T> input;                 // conv, dense, relu, lrn
    std::vector<std::int64_t> argmax; // maxpool
    Tensor<T> mask;                  // dropout
    Shape input_shape;               // flatten
    Tensor<T> probs;                 // softmax output
    bool live = false;
};

// A network instance: spec + parameters + forward/backward state.
// Single-threaded during a pass; distinct instances are independent.
template <class T>
class Model {
public:
    explicit Model(NetworkSpec spec) : spec_(std::move(spec)) {
        const std::vector<ParamShapes> shapes = param_shapes(spec_);
        vars_.resize(spec_.layers.size());
        cache_.resize(spec_.layers.size());
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            if (!shapes[i].weights.empty()) {
                vars_[i].weights = Tensor<T>(shapes[i].weights);
                vars_[i].bias = Tensor<T>(shapes[i].bias);
            }
        }
    }

    // He-uniform weights (limit sqrt(6/fan_in)), zero biases. One rng stream
    // per layer, so values depend only on (seed, layer position, shape).
    static Model init(const NetworkSpec& spec, std::uint64_t seed) {
        Model m(spec);
        for (std::size_t i = 0; i < m.vars_.size(); ++i) {
            LayerVars<T>& v = m.vars_[i];
            if (v.empty()) continue;
            const LayerSpec& l = m.spec_.layers[i];
            const std::int64_t fan_in = l.kind == LayerKind::Conv
                                            ? v.weights.extent(1) * l.kernel * l.kernel
                                            : v.weights.extent(0);
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
            Rng rng(mix_seed(seed, i));
            for (std::size_t j = 0; j < v.weights.size(); ++j)
                v.weights[j] = static_cast<T>(rng.uniform(-limit, limit));
        }
        return m;
    }

    const NetworkSpec& spec() const { return spec_; }
    std::vector<LayerVars<T>>& vars() { return vars_; }
    const std::vector<LayerVars<T>>& vars() const { return vars_; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const LayerVars<T>& v : vars_)
            if (!v.empty()) n += v.weights.size() + v.bias.size();
        return n;
    }

    // Per-layer output shapes observed during the last forward pass,
    // input shape first.
    const std::vector<Shape>& activation_trace() const { return trace_; }

    Tensor<T> forward(const Tensor<T>& x, Mode mode, std::uint64_t dropout_seed = 0) {
        if (x.rank() != 4 || x.extent(1) != spec_.input_shape[0] ||
            x.extent(2) != spec_.input_shape[1] || x.extent(3) != spec_.input_shape[2])
            throw ShapeError("forward: input " + shape_str(x.shape()) + " does not match spec input " +
                             shape_str(spec_.input_shape));

        const bool training = mode == Mode::Train;
        trace_.clear();
        trace_.push_back(x.shape());
        Tensor<T> cur = x;
        for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
            const LayerSpec& l = spec_.layers[i];
            LayerCache<T>& c = cache_[i];
            c.live = training;
            switch (l.kind) {
                case LayerKind::Conv: {
                    if (training) c.input = cur;
                    cur = conv2d_forward(cur, vars_[i].weights, vars_[i].bias,
                                         1, (l.kernel - 1) / 2);
                    break;
                }
                case LayerKind::MaxPool: {
                    PoolResult<T> r = maxpool2d_forward(cur);
                    if (training) {
                        c.argmax = std::move(r.argmax);
                        c.input_shape = cur.shape();
                    }
                    cur = std::move(r.y);
                    break;
                }
                case LayerKind::Relu: {
                    if (training) c.input = cur;
                    cur = relu_forward(cur);
                    break;
                }
                case LayerKind::Lrn: {
                    if (training) c.input = cur;
                    cur = lrn_forward(cur, l.lrn);
                    break;
                }
                case LayerKind::Dropout: {
                    DropoutResult<T> r = dropout_forward(cur, l.rate,
                                                         training ? Mode::Train : Mode::Infer,
                                                         mix_seed(dropout_seed, i));
                    if (training) c.mask = std::move(r.mask);
                    cur = std::move(r.y);
                    break;
                }
                case LayerKind::Dense: {
                    if (training) c.input = cur;
                    cur = dense_forward(cur, vars_[i].weights, vars_[i].bias);
                    break;
                }
                case LayerKind::Flatten: {
                    if (training) c.input_shape = cur.shape();
                    std::int64_t flat = 1;
                    for (std::size_t d = 1; d < cur.rank(); ++d) flat *= cur.extent(d);
                    cur = cur.reshaped({cur.extent(0), flat});
                    break;
                }
                case LayerKind::Softmax: {
                    cur = softmax_forward(cur);
                    if (training) c.probs = cur;
                    break;
                }
            }
            trace_.push_back(cur.shape());
        }
        return cur;
    }

    // Gradients w.r.t. all parameters for the mean cross-entropy loss against
    // one-hot targets. Requires a preceding forward in Train mode and a
    // softmax output layer; uses the fused softmax/cross-entropy gradient.
    std::vector<LayerVars<T>> backward(const Tensor<T>& targets) {
        if (spec_.layers.empty() || spec_.layers.back().kind != LayerKind::Softmax)
            throw ParameterError("backward: network must end in softmax");
        const LayerCache<T>& last = cache_.back();
        if (!last.live)
            throw ParameterError("backward: run forward in train mode first");
        require_one_hot(targets);
        if (!last.probs.same_shape(targets))
            throw ShapeError("backward: targets " + shape_str(targets.shape()) +
                             " vs output " + shape_str(last.probs.shape()));

        std::vector<LayerVars<T>> grads(spec_.layers.size());
        Tensor<T> g = softmax_xent_backward(last.probs, targets);
        for (std::size_t ii = spec_.layers.size() - 1; ii-- > 0;) {
            const std::size_t i = ii; // softmax itself already folded into g
            const LayerSpec& l = spec_.layers[i];
            LayerCache<T>& c = cache_[i];
            if (!c.live) throw ParameterError("backward: stale cache at layer " + l.name);
            switch (l.kind) {
                case LayerKind::Conv: {
                    ConvGrads<T> cg = conv2d_backward(c.input, vars_[i].weights, g,
                                                      std::int64_t(1), std::int64_t((l.kernel - 1) / 2));
                    grads[i].weights = std::move(cg.dw);
                    grads[i].bias = std::move(cg.db);
                    g = std::move(cg.dx);
                    break;
                }
                case LayerKind::MaxPool:
                    g = maxpool2d_backward(g, c.argmax, c.input_shape);
                    break;
                case LayerKind::Relu:
                    g = relu_backward(c.input, g);
                    break;
                case LayerKind::Lrn:
                    g = lrn_backward(c.input, g, l.lrn);
                    break;
                case LayerKind::Dropout:
                    g = dropout_backward(g, c.mask);
                    break;
                case LayerKind::Dense: {
                    DenseGrads<T> dg = dense_backward(c.input, vars_[i].weights, g);
                    grads[i].weights = std::move(dg.dw);
                    grads[i].bias = std::move(dg.db);
                    g = std::move(dg.dx);
                    break;
                }
                case LayerKind::Flatten:
                    g = g.reshaped(c.input_shape);
                    break;
                case LayerKind::Softmax:
                    break;
            }
        }
        return grads;
    }

    // Last training-mode softmax output, for loss/accuracy bookkeeping.
    const Tensor<T>& cached_probs() const { return cache_.back().probs; }

private:
    NetworkSpec spec_;
    std::vector<LayerVars<T>> vars_;
    std::vector<LayerCache<T>> cache_;
    std::vector<Shape> trace_;
};

} // namespace adnet

#endif
