#include "adnet/training.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "adnet/error.hpp"
#include "adnet/eval.hpp"
#include "adnet/rng.hpp"

namespace adnet {

namespace {

// Distinct rng streams hung off the run seed.
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kDropoutStream = 0x4d4b;

std::string fmt(const char* spec, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace

std::string format_training_log(const TrainingLog& log) {
    std::ostringstream os;
    os << "#adnet-train-log\tv1"
       << "\tconfig=" << log.spec_name
       << "\tscale=" << scale_name(log.scale)
       << "\tlr=" << fmt("%.6g", log.config.learning_rate)
       << "\tbatch=" << log.config.batch_size
       << "\tepochs=" << log.config.epochs
       << "\tfreeze=" << log.config.freeze_depth
       << "\tdropout=" << fmt("%.6g", log.config.dropout_rate)
       << "\tmomentum=" << fmt("%.6g", log.config.momentum)
       << "\tseed=" << log.config.seed
       << "\tdeterministic=" << (log.config.deterministic ? 1 : 0);
    if (!log.checkpoint_path.empty()) os << "\tcheckpoint=" << log.checkpoint_path;
    os << '\n';
    for (const EpochStats& e : log.epochs)
        os << e.epoch << '\t' << fmt("%.6f", e.mean_loss) << '\t'
           << fmt("%.6f", e.train_accuracy) << '\t'
           << fmt("%.3f", log.config.deterministic ? 0.0 : e.seconds) << '\n';
    return os.str();
}

std::pair<Checkpoint, TrainingLog> train(const NetworkSpec& spec,
                                         const DatasetManifest& manifest,
                                         const TrainingConfig& cfg,
                                         const SampleLoader& loader,
                                         const EpochCallback& on_epoch) {
    if (cfg.batch_size < 1) throw ParameterError("train: batch size must be >= 1");
    if (cfg.epochs < 1) throw ParameterError("train: epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ParameterError("train: learning rate must be positive");

    NetworkSpec effective = spec;
    for (LayerSpec& l : effective.layers)
        if (l.kind == LayerKind::Dropout) l.rate = cfg.dropout_rate;
    effective = freeze_prefix(std::move(effective), cfg.freeze_depth);

    std::vector<const SampleRecord*> train_set;
    for (const SampleRecord& rec : manifest.records)
        if (rec.split == Split::Train) train_set.push_back(&rec);
    if (train_set.empty()) throw DataError("train: manifest has an empty train split");

    Model<float> model = Model<float>::init(effective, cfg.seed);
    SgdOptimizer<float> optimizer(static_cast<float>(cfg.learning_rate),
                                  static_cast<float>(cfg.momentum));

    const Shape& in = effective.input_shape;
    const std::size_t n = train_set.size();
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

    TrainingLog log;
    log.config = cfg;
    log.spec_name = effective.name;
    log.scale = effective.scale;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::uint64_t step_counter = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();

        // Fisher-Yates with a per-epoch derived stream.
        Rng shuffle_rng(mix_seed(mix_seed(cfg.seed, kShuffleStream), static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t bn = std::min(batch, n - start);
            Tensor<float> inputs({static_cast<std::int64_t>(bn), in[0], in[1], in[2]});
            Tensor<float> targets({static_cast<std::int64_t>(bn), 2});
            const std::size_t sample_len = static_cast<std::size_t>(in[0] * in[1] * in[2]);
            for (std::size_t b = 0; b < bn; ++b) {
                const SampleRecord& rec = *train_set[order[start + b]];
                Tensor<float> x = loader(rec);
                if (x.shape() != in)
                    throw ShapeError("train: sample '" + rec.image_id + "' has shape " +
                                     shape_str(x.shape()) + ", expected " + shape_str(in));
                std::copy(x.raw(), x.raw() + sample_len, inputs.raw() + b * sample_len);
                targets.at(static_cast<std::int64_t>(b), static_cast<int>(rec.label)) = 1.0f;
            }

            const std::uint64_t dropout_seed =
                mix_seed(mix_seed(cfg.seed, kDropoutStream), step_counter++);
            Tensor<float> probs = model.forward(inputs, Mode::Train, dropout_seed);
            loss_sum += static_cast<double>(cross_entropy_loss(probs, targets)) * static_cast<double>(bn);
            for (std::size_t b = 0; b < bn; ++b)
                if (decide_label(probs.at(static_cast<std::int64_t>(b), 1)) ==
                    train_set[order[start + b]]->label)
                    ++correct;

            optimizer.step(model, model.backward(targets));
        }

        const auto epoch_end = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = loss_sum / static_cast<double>(n);
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        stats.seconds = std::chrono::duration<double>(epoch_end - epoch_start).count();
        log.epochs.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }

    Checkpoint ckpt = checkpoint_from_model(model, static_cast<std::uint32_t>(cfg.epochs), cfg.seed);
    if (cfg.momentum != 0.0) {
        const auto& layers = effective.layers;
        const auto& vel = optimizer.velocity();
        for (std::size_t i = 0; i < vel.size(); ++i) {
            if (vel[i].empty()) continue;
            ckpt.tensors.emplace_back("opt." + layers[i].name + ".weight.v", vel[i].weights);
            ckpt.tensors.emplace_back("opt." + layers[i].name + ".bias.v", vel[i].bias);
        }
    }
    return {std::move(ckpt), std::move(log)};
}

} // namespace adnet
