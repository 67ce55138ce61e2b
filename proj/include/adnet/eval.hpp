#ifndef ADNET_EVAL_HPP
#define ADNET_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "adnet/dataset.hpp"
#include "adnet/model.hpp"

namespace adnet {

// Binary-classification tallies; billboard is the positive class.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + tn + fp + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp; tn += o.tn; fp += o.fp; fn += o.fn;
        return *this;
    }
};

// (TP + TN) / (TP + TN + FP + FN)
double accuracy(const ConfusionMatrix& cm);

// Argmax over the class pair; an exact 0.5/0.5 tie goes to no-billboard so a
// degenerate model never counts as detecting anything.
inline Label decide_label(float p_billboard) {
    return p_billboard > 0.5f ? Label::Billboard : Label::NoBillboard;
}

struct BatchPrediction {
    std::vector<Label> labels;
    Tensor<float> probs; // [N x 2], rows sum to 1
};

// Inference-mode forward over a [N,3,H,W] batch.
BatchPrediction predict(Model<float>& model, const Tensor<float>& input);

ConfusionMatrix tally(const std::vector<Label>& predicted, const std::vector<Label>& truth);

struct EvalReport {
    ConfusionMatrix cm;
    double acc = 0.0;
    double mean_ms = 0.0;
    double p95_ms = 0.0;
};

// Runs the model over one split of the manifest, frame by frame, timing the
// forward pass of each frame.
EvalReport evaluate(Model<float>& model, const DatasetManifest& manifest, Split split,
                    const SampleLoader& loader);

// Line-oriented report: TP, TN, FP, FN, accuracy, mean_ms, p95_ms.
std::string format_eval_report(const EvalReport& report);

} // namespace adnet

#endif
