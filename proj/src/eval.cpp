#include "adnet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "adnet/error.hpp"

namespace adnet {

double accuracy(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0)
        throw ParameterError("confusion matrix: negative counter");
    const std::int64_t total = cm.total();
    if (total == 0) throw DataError("empty evaluation: no samples counted");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
}

BatchPrediction predict(Model<float>& model, const Tensor<float>& input) {
    BatchPrediction out;
    out.probs = model.forward(input, Mode::Infer);
    if (out.probs.rank() != 2 || out.probs.extent(1) != 2)
        throw ShapeError("predict: model output is not a class pair");
    out.labels.reserve(static_cast<std::size_t>(out.probs.extent(0)));
    for (std::int64_t n = 0; n < out.probs.extent(0); ++n)
        out.labels.push_back(decide_label(out.probs.at(n, 1)));
    return out;
}

ConfusionMatrix tally(const std::vector<Label>& predicted, const std::vector<Label>& truth) {
    if (predicted.size() != truth.size())
        throw ShapeError("tally: " + std::to_string(predicted.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (truth[i] == Label::Billboard)
            predicted[i] == Label::Billboard ? ++cm.tp : ++cm.fn;
        else
            predicted[i] == Label::Billboard ? ++cm.fp : ++cm.tn;
    }
    return cm;
}

EvalReport evaluate(Model<float>& model, const DatasetManifest& manifest, Split split,
                    const SampleLoader& loader) {
    std::vector<Label> predicted, truth;
    std::vector<double> frame_ms;
    const Shape& in = model.spec().input_shape;

    for (const SampleRecord& rec : manifest.records) {
        if (rec.split != split) continue;
        Tensor<float> x = loader(rec);
        if (x.shape() != in)
            throw ShapeError("evaluate: sample '" + rec.image_id + "' has shape " +
                             shape_str(x.shape()) + ", expected " + shape_str(in));
        Tensor<float> batch = x.reshaped({1, in[0], in[1], in[2]});
        const auto t0 = std::chrono::steady_clock::now();
        BatchPrediction p = predict(model, batch);
        const auto t1 = std::chrono::steady_clock::now();
        frame_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        predicted.push_back(p.labels[0]);
        truth.push_back(rec.label);
    }
    if (predicted.empty())
        throw DataError("empty evaluation: split '" + split_name(split) + "' has no records");

    EvalReport report;
    report.cm = tally(predicted, truth);
    report.acc = accuracy(report.cm);
    double sum = 0.0;
    for (double v : frame_ms) sum += v;
    report.mean_ms = sum / static_cast<double>(frame_ms.size());
    std::sort(frame_ms.begin(), frame_ms.end());
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(frame_ms.size()))) - 1;
    report.p95_ms = frame_ms[std::min(idx, frame_ms.size() - 1)];
    return report;
}

std::string format_eval_report(const EvalReport& report) {
    char acc[32];
    std::snprintf(acc, sizeof acc, "%.6f", report.acc);
    char mean[32], p95[32];
    std::snprintf(mean, sizeof mean, "%.3f", report.mean_ms);
    std::snprintf(p95, sizeof p95, "%.3f", report.p95_ms);
    std::ostringstream os;
    os << "TP\t" << report.cm.tp << '\n'
       << "TN\t" << report.cm.tn << '\n'
       << "FP\t" << report.cm.fp << '\n'
       << "FN\t" << report.cm.fn << '\n'
       << "accuracy\t" << acc << '\n'
       << "mean_ms\t" << mean << '\n'
       << "p95_ms\t" << p95 << '\n';
    return os.str();
}

} // namespace adnet
