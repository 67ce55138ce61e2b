// adnet command line: dataset building, training, evaluation and
// frame-folder prediction.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adnet/checkpoint.hpp"
#include "adnet/dataset.hpp"
#include "adnet/error.hpp"
#include "adnet/eval.hpp"
#include "adnet/image.hpp"
#include "adnet/network.hpp"
#include "adnet/training.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw adnet::IoError("cannot open '" + path + "' for writing");
    os << text;
    if (!os) throw adnet::IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// build-dataset
// ---------------------------------------------------------------------------

struct BuildDatasetArgs {
    std::string annotations;
    std::string out_manifest = "manifest.tsv";
    double split_fraction = 0.7;
    std::uint64_t seed = 42;
    std::string area_mode = "sum";
};

void print_count_table(const adnet::DatasetManifest& m) {
    std::set<std::string> sources;
    for (const auto& [key, c] : m.counts) sources.insert(std::get<2>(key));

    auto cell = [&](adnet::Split s, adnet::Label l, const std::string& src) -> std::size_t {
        auto it = m.counts.find({s, l, src});
        return it == m.counts.end() ? 0 : it->second;
    };

    std::printf("%-10s", "Set");
    for (adnet::Label l : {adnet::Label::Billboard, adnet::Label::NoBillboard})
        for (const std::string& src : sources)
            std::printf("  %20s", (adnet::label_name(l) + "/" + src).c_str());
    std::printf("  %8s\n", "Total");

    for (adnet::Split s : {adnet::Split::Train, adnet::Split::Test}) {
        std::printf("%-10s", s == adnet::Split::Train ? "Training" : "Testing");
        for (adnet::Label l : {adnet::Label::Billboard, adnet::Label::NoBillboard})
            for (const std::string& src : sources) std::printf("  %20zu", cell(s, l, src));
        std::printf("  %8zu\n", m.count(s));
    }

    std::printf("%-10s", "Total");
    for (adnet::Label l : {adnet::Label::Billboard, adnet::Label::NoBillboard})
        for (const std::string& src : sources)
            std::printf("  %20zu",
                        cell(adnet::Split::Train, l, src) + cell(adnet::Split::Test, l, src));
    std::printf("  %8zu\n", m.records.size());
    std::printf("excluded: %zu\n", m.excluded);
}

int run_build_dataset(const BuildDatasetArgs& args) {
    const adnet::AreaMode mode =
        args.area_mode == "union" ? adnet::AreaMode::Union : adnet::AreaMode::Sum;
    const auto images = adnet::load_annotations(args.annotations);
    const adnet::DatasetManifest manifest =
        adnet::build_manifest(images, args.split_fraction, args.seed, mode);
    adnet::save_manifest(manifest, args.out_manifest);
    std::printf("manifest: %s (seed=%llu, split=%s)\n", args.out_manifest.c_str(),
                static_cast<unsigned long long>(args.seed), fixed6(args.split_fraction).c_str());
    print_count_table(manifest);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string manifest;
    std::string config = "E";
    std::string scale = "full";
    std::string images_dir = ".";
    std::string out_checkpoint = "adnet.ckpt";
    std::string out_log; // defaults to out_checkpoint + ".log"
    adnet::TrainingConfig cfg;
};

int run_train(const TrainArgs& args) {
    const adnet::NetworkSpec spec = adnet::build_config(args.config, adnet::parse_scale(args.scale));
    const adnet::DatasetManifest manifest = adnet::load_manifest(args.manifest);
    if (!fs::is_directory(args.images_dir))
        throw adnet::IoError("images dir '" + args.images_dir + "' is not a directory");
    const adnet::SampleLoader loader =
        adnet::make_file_loader(args.images_dir, spec.input_shape[1], spec.input_shape[2]);

    std::printf("config=%s scale=%s lr=%g batch=%d epochs=%d freeze=%d dropout=%g momentum=%g "
                "seed=%llu deterministic=%d\n",
                args.config.c_str(), args.scale.c_str(), args.cfg.learning_rate,
                args.cfg.batch_size, args.cfg.epochs, args.cfg.freeze_depth, args.cfg.dropout_rate,
                args.cfg.momentum, static_cast<unsigned long long>(args.cfg.seed),
                args.cfg.deterministic ? 1 : 0);
    std::printf("train split: %zu samples, test split: %zu samples\n",
                manifest.count(adnet::Split::Train), manifest.count(adnet::Split::Test));

    auto [ckpt, log] = adnet::train(spec, manifest, args.cfg, loader,
                                    [](const adnet::EpochStats& e) {
                                        std::printf("epoch %d\tloss %.6f\tacc %.6f\t%.3fs\n",
                                                    e.epoch, e.mean_loss, e.train_accuracy,
                                                    e.seconds);
                                        std::fflush(stdout);
                                    });

    adnet::save_checkpoint(ckpt, args.out_checkpoint);
    log.checkpoint_path = args.out_checkpoint;
    const std::string log_path =
        args.out_log.empty() ? args.out_checkpoint + ".log" : args.out_log;
    write_text_file(log_path, adnet::format_training_log(log));
    std::printf("checkpoint: %s\nlog: %s\n", args.out_checkpoint.c_str(), log_path.c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string manifest;
    std::string checkpoint;
    std::string split = "test";
    std::string images_dir = ".";
};

int run_evaluate(const EvaluateArgs& args) {
    const adnet::DatasetManifest manifest = adnet::load_manifest(args.manifest);
    if (!fs::is_directory(args.images_dir))
        throw adnet::IoError("images dir '" + args.images_dir + "' is not a directory");
    adnet::Model<float> model = adnet::model_from_checkpoint(adnet::load_checkpoint(args.checkpoint));
    const adnet::SampleLoader loader = adnet::make_file_loader(
        args.images_dir, model.spec().input_shape[1], model.spec().input_shape[2]);
    const adnet::EvalReport report =
        adnet::evaluate(model, manifest, adnet::parse_split(args.split), loader);
    std::printf("split\t%s\n%s", args.split.c_str(), adnet::format_eval_report(report).c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string frames_dir;
    std::string checkpoint;
    std::string out_report = "predictions.tsv";
    std::uint64_t seed = 42;
    bool deterministic = false;
};

int run_predict(const PredictArgs& args) {
    if (!fs::is_directory(args.frames_dir))
        throw adnet::IoError("'" + args.frames_dir + "' is not a directory");

    static const std::set<std::string> kExtensions = {".ppm", ".pgm", ".png", ".jpg", ".jpeg"};
    std::vector<std::string> frames;
    for (const auto& entry : fs::directory_iterator(args.frames_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (kExtensions.count(ext)) frames.push_back(entry.path().filename().string());
    }
    std::sort(frames.begin(), frames.end());
    if (frames.empty())
        throw adnet::DataError("no image files in '" + args.frames_dir + "'");

    adnet::Model<float> model = adnet::model_from_checkpoint(adnet::load_checkpoint(args.checkpoint));
    const adnet::Shape& in = model.spec().input_shape;

    std::string report = "#adnet-predict\tv1\tcheckpoint=" + args.checkpoint +
                         "\tseed=" + std::to_string(args.seed) + "\n";
    std::size_t billboard = 0, clean = 0, skipped = 0;
    double total_ms = 0.0;
    for (const std::string& name : frames) {
        adnet::Tensor<float> x;
        try {
            x = adnet::load_input((fs::path(args.frames_dir) / name).string(), in[1], in[2]);
        } catch (const adnet::IoError& e) {
            std::fprintf(stderr, "warning: skipping '%s': %s\n", name.c_str(), e.what());
            ++skipped;
            continue;
        }
        adnet::Tensor<float> batch = x.reshaped({1, in[0], in[1], in[2]});
        const auto t0 = std::chrono::steady_clock::now();
        const adnet::BatchPrediction p = adnet::predict(model, batch);
        const auto t1 = std::chrono::steady_clock::now();
        total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
        (p.labels[0] == adnet::Label::Billboard ? billboard : clean)++;
        report += name + "\t" + adnet::label_name(p.labels[0]) + "\t" +
                  fixed6(p.probs.at(0, 1)) + "\n";
    }
    const std::size_t done = billboard + clean;
    if (done == 0) throw adnet::DataError("no decodable frames in '" + args.frames_dir + "'");

    const double mean_ms = args.deterministic ? 0.0 : total_ms / static_cast<double>(done);
    report += "#summary\tframes=" + std::to_string(done) +
              "\tbillboard=" + std::to_string(billboard) +
              "\tno-billboard=" + std::to_string(clean) +
              "\tskipped=" + std::to_string(skipped) + "\tmean_ms=" + fixed6(mean_ms) + "\n";
    write_text_file(args.out_report, report);
    std::fputs(report.c_str(), stdout);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Billboard frame classifier: dataset builder, trainer, evaluator, predictor"};
    app.require_subcommand(1);

    BuildDatasetArgs bd;
    CLI::App* cmd_bd = app.add_subcommand("build-dataset",
                                          "Build a labeled train/test manifest from annotations");
    cmd_bd->add_option("annotations", bd.annotations, "Annotation file (tab-separated)")->required();
    cmd_bd->add_option("--out", bd.out_manifest, "Output manifest path");
    cmd_bd->add_option("--split-fraction", bd.split_fraction, "Train fraction in (0,1)");
    cmd_bd->add_option("--seed", bd.seed, "Shuffle seed");
    cmd_bd->add_option("--area-mode", bd.area_mode, "Polygon overlap handling")
        ->check(CLI::IsMember({"sum", "union"}));

    TrainArgs tr;
    CLI::App* cmd_tr = app.add_subcommand("train", "Train a configuration on a manifest");
    cmd_tr->add_option("manifest", tr.manifest, "Dataset manifest")->required();
    cmd_tr->add_option("--config", tr.config, "Network configuration")
        ->check(CLI::IsMember(adnet::config_names()));
    cmd_tr->add_option("--scale", tr.scale, "Network scale")->check(CLI::IsMember({"full", "tiny"}));
    cmd_tr->add_option("--images-dir", tr.images_dir, "Root directory for image ids");
    cmd_tr->add_option("--lr", tr.cfg.learning_rate, "Learning rate");
    cmd_tr->add_option("--batch-size", tr.cfg.batch_size, "Mini-batch size");
    cmd_tr->add_option("--epochs", tr.cfg.epochs, "Training epochs");
    cmd_tr->add_option("--freeze-depth", tr.cfg.freeze_depth, "Weight layers to freeze from the input");
    cmd_tr->add_option("--dropout", tr.cfg.dropout_rate, "Dropout rate for the head");
    cmd_tr->add_option("--momentum", tr.cfg.momentum, "SGD momentum");
    cmd_tr->add_option("--seed", tr.cfg.seed, "Run seed");
    cmd_tr->add_flag("--deterministic", tr.cfg.deterministic,
                     "Bit-reproducible run; log omits wall times");
    cmd_tr->add_option("--out", tr.out_checkpoint, "Output checkpoint path");
    cmd_tr->add_option("--log", tr.out_log, "Output log path (default: <out>.log)");

    EvaluateArgs ev;
    CLI::App* cmd_ev = app.add_subcommand("evaluate", "Score a checkpoint against a manifest split");
    cmd_ev->add_option("manifest", ev.manifest, "Dataset manifest")->required();
    cmd_ev->add_option("checkpoint", ev.checkpoint, "Model checkpoint")->required();
    cmd_ev->add_option("--split", ev.split, "Split to evaluate")
        ->check(CLI::IsMember({"train", "test"}));
    cmd_ev->add_option("--images-dir", ev.images_dir, "Root directory for image ids");

    PredictArgs pr;
    CLI::App* cmd_pr = app.add_subcommand("predict", "Classify every frame in a directory");
    cmd_pr->add_option("frames_dir", pr.frames_dir, "Directory of image frames")->required();
    cmd_pr->add_option("checkpoint", pr.checkpoint, "Model checkpoint")->required();
    cmd_pr->add_option("--out", pr.out_report, "Output report path");
    cmd_pr->add_option("--seed", pr.seed, "Echoed into the report");
    cmd_pr->add_flag("--deterministic", pr.deterministic, "Report omits wall times");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cmd_bd->parsed()) return run_build_dataset(bd);
        if (cmd_tr->parsed()) return run_train(tr);
        if (cmd_ev->parsed()) return run_evaluate(ev);
        if (cmd_pr->parsed()) return run_predict(pr);
        return kExitUsage;
    } catch (const adnet::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
}
