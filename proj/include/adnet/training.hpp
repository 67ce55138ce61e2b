#ifndef ADNET_TRAINING_HPP
#define ADNET_TRAINING_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adnet/checkpoint.hpp"
#include "adnet/dataset.hpp"
#include "adnet/model.hpp"
#include "adnet/network.hpp"

namespace adnet {

struct TrainingConfig {
    double learning_rate = 0.0001;
    int batch_size = 16;
    int epochs = 50;
    int freeze_depth = 5;     // weight layers from the input end
    std::uint64_t seed = 42;
    double dropout_rate = 0.5;
    double momentum = 0.0;    // plain SGD by default
    bool deterministic = false;
};

struct EpochStats {
    int epoch = 0;          // 1-based
    double mean_loss = 0.0; // sample-weighted mean over the epoch
    double train_accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainingLog {
    TrainingConfig config;
    std::string spec_name;
    Scale scale = Scale::Full;
    std::string checkpoint_path; // where the final checkpoint went, if saved
    std::vector<EpochStats> epochs;
};

// Log text: one header line echoing the configuration, then
// epoch <TAB> mean_loss <TAB> train_acc <TAB> seconds per epoch.
// Deterministic mode writes the seconds column as 0.000 so reruns are
// byte-identical.
std::string format_training_log(const TrainingLog& log);

// One SGD update for a single parameter tensor: w <- w - lr * g, with
// optional momentum (v <- mu * v + g; w <- w - lr * v).
template <class T>
void sgd_update(Tensor<T>& w, const Tensor<T>& g, T lr) {
    w.axpy(-lr, g);
}

// Applies gradients to every trainable layer of the model, keeping one
// velocity slot per parameter when momentum is nonzero. Frozen layers are
// left untouched no matter what their gradients say.
template <class T>
class SgdOptimizer {
public:
    SgdOptimizer(T lr, T momentum = T(0)) : lr_(lr), momentum_(momentum) {
        if (!(lr > T(0))) throw ParameterError("sgd: learning rate must be positive");
    }

    void step(Model<T>& model, const std::vector<LayerVars<T>>& grads) {
        if (grads.size() != model.vars().size())
            throw ParameterError("sgd: gradient list does not match the model");
        if (velocity_.empty() && momentum_ != T(0)) velocity_.resize(grads.size());
        for (std::size_t i = 0; i < grads.size(); ++i) {
            const LayerSpec& l = model.spec().layers[i];
            if (!l.has_weights() || !l.trainable) continue;
            if (grads[i].empty())
                throw ParameterError("sgd: missing gradient for trainable layer " + l.name);
            if (!grads[i].weights.same_shape(model.vars()[i].weights))
                throw ShapeError("sgd: gradient shape mismatch at layer " + l.name);
            if (momentum_ == T(0)) {
                sgd_update(model.vars()[i].weights, grads[i].weights, lr_);
                sgd_update(model.vars()[i].bias, grads[i].bias, lr_);
            } else {
                LayerVars<T>& v = velocity_[i];
                if (v.empty()) {
                    v.weights = Tensor<T>(grads[i].weights.shape());
                    v.bias = Tensor<T>(grads[i].bias.shape());
                }
                v.weights *= momentum_;
                v.weights += grads[i].weights;
                v.bias *= momentum_;
                v.bias += grads[i].bias;
                sgd_update(model.vars()[i].weights, v.weights, lr_);
                sgd_update(model.vars()[i].bias, v.bias, lr_);
            }
        }
    }

    const std::vector<LayerVars<T>>& velocity() const { return velocity_; }

private:
    T lr_;
    T momentum_;
    std::vector<LayerVars<T>> velocity_;
};

// Mini-batch SGD over the manifest's train split: per-epoch seeded reshuffle,
// final partial batch trained as-is, dropout active only here. Runs are
// bit-reproducible for a fixed seed. on_epoch, when set, is invoked with each
// epoch's stats as they complete.
using EpochCallback = std::function<void(const EpochStats&)>;

std::pair<Checkpoint, TrainingLog> train(const NetworkSpec& spec,
                                         const DatasetManifest& manifest,
                                         const TrainingConfig& cfg,
                                         const SampleLoader& loader,
                                         const EpochCallback& on_epoch = {});

} // namespace adnet

#endif
