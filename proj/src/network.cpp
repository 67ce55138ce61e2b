#include "adnet/network.hpp"

#include <algorithm>

#include "adnet/error.hpp"

namespace adnet {

std::string scale_name(Scale s) { return s == Scale::Full ? "full" : "tiny"; }

Scale parse_scale(const std::string& s) {
    if (s == "full") return Scale::Full;
    if (s == "tiny") return Scale::Tiny;
    throw ParameterError("unknown scale '" + s + "' (expected full or tiny)");
}

int NetworkSpec::weight_layer_count() const {
    int n = 0;
    for (const LayerSpec& l : layers)
        if (l.has_weights()) ++n;
    return n;
}

std::vector<std::size_t> NetworkSpec::weight_layer_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].has_weights()) idx.push_back(i);
    return idx;
}

const std::vector<std::string>& config_names() {
    static const std::vector<std::string> names = {"A", "A-LRN", "B", "C", "D", "E"};
    return names;
}

namespace {

struct ConvEntry {
    int kernel;
    int channels;
};

// The five convolution blocks of each configuration; a maxpool follows each
// block and the FC head follows block 5.
std::vector<std::vector<ConvEntry>> conv_blocks(const std::string& name) {
    if (name == "A" || name == "A-LRN")
        return {{{3, 64}},
                {{3, 128}},
                {{3, 256}, {3, 256}},
                {{3, 512}, {3, 512}},
                {{3, 512}, {3, 512}}};
    if (name == "B")
        return {{{3, 64}, {3, 64}},
                {{3, 128}, {3, 128}},
                {{3, 256}, {3, 256}},
                {{3, 512}, {3, 512}},
                {{3, 512}, {3, 512}}};
    if (name == "C")
        return {{{3, 64}, {3, 64}},
                {{3, 128}, {3, 128}},
                {{3, 256}, {3, 256}, {1, 256}},
                {{3, 512}, {3, 512}, {1, 512}},
                {{3, 512}, {3, 512}, {1, 512}}};
    if (name == "D")
        return {{{3, 64}, {3, 64}},
                {{3, 128}, {3, 128}},
                {{3, 256}, {3, 256}, {3, 256}},
                {{3, 512}, {3, 512}, {3, 512}},
                {{3, 512}, {3, 512}, {3, 512}}};
    if (name == "E")
        return {{{3, 64}, {3, 64}},
                {{3, 128}, {3, 128}},
                {{3, 256}, {3, 256}, {3, 256}, {3, 256}},
                {{3, 512}, {3, 512}, {3, 512}, {3, 512}},
                {{3, 512}, {3, 512}, {3, 512}, {3, 512}}};
    throw ParameterError("unknown configuration '" + name +
                         "' (expected A, A-LRN, B, C, D or E)");
}

LayerSpec conv_spec(std::string name, int kernel, int channels) {
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.name = std::move(name);
    l.kernel = kernel;
    l.channels = channels;
    return l;
}

LayerSpec plain_spec(LayerKind kind, std::string name) {
    LayerSpec l;
    l.kind = kind;
    l.name = std::move(name);
    return l;
}

LayerSpec dense_spec(std::string name, int units) {
    LayerSpec l;
    l.kind = LayerKind::Dense;
    l.name = std::move(name);
    l.channels = units;
    return l;
}

} // namespace

NetworkSpec build_config(const std::string& name, Scale scale) {
    const auto blocks = conv_blocks(name);
    const int divisor = scale == Scale::Tiny ? 8 : 1;
    const int head_width = scale == Scale::Tiny ? 64 : 1024;

    NetworkSpec spec;
    spec.name = name;
    spec.scale = scale;
    spec.input_shape = scale == Scale::Tiny ? Shape{3, 32, 32} : Shape{3, 224, 224};

    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t i = 0; i < blocks[b].size(); ++i) {
            const ConvEntry& e = blocks[b][i];
            const std::string cname =
                "conv" + std::to_string(b + 1) + "_" + std::to_string(i + 1);
            spec.layers.push_back(conv_spec(cname, e.kernel, e.channels / divisor));
            spec.layers.push_back(plain_spec(LayerKind::Relu, cname + "_relu"));
            if (name == "A-LRN" && b == 0 && i == 0)
                spec.layers.push_back(plain_spec(LayerKind::Lrn, "lrn1"));
        }
        spec.layers.push_back(plain_spec(LayerKind::MaxPool, "pool" + std::to_string(b + 1)));
    }

    spec.layers.push_back(plain_spec(LayerKind::Flatten, "flatten"));
    spec.layers.push_back(dense_spec("fc1", head_width));
    spec.layers.push_back(plain_spec(LayerKind::Relu, "fc1_relu"));
    LayerSpec drop = plain_spec(LayerKind::Dropout, "drop1");
    drop.rate = 0.5;
    spec.layers.push_back(drop);
    spec.layers.push_back(dense_spec("fc2", head_width));
    spec.layers.push_back(plain_spec(LayerKind::Relu, "fc2_relu"));
    spec.layers.push_back(dense_spec("fc3", 2));
    spec.layers.push_back(plain_spec(LayerKind::Softmax, "prob"));
    return spec;
}

NetworkSpec freeze_prefix(NetworkSpec spec, int n_weight_layers) {
    const int total = spec.weight_layer_count();
    if (n_weight_layers < 0 || n_weight_layers > total)
        throw ParameterError("freeze depth " + std::to_string(n_weight_layers) +
                             " out of range [0," + std::to_string(total) + "]");
    int remaining = n_weight_layers;
    for (LayerSpec& l : spec.layers) {
        if (remaining == 0) break;
        if (l.has_weights()) {
            l.trainable = false;
            --remaining;
        }
    }
    return spec;
}

std::vector<Shape> shape_walk(const NetworkSpec& spec) {
    if (spec.input_shape.size() != 3)
        throw ShapeError("network input shape must be {channels, height, width}");
    Shape cur = spec.input_shape; // {C,H,W}, later {F} after flatten
    std::vector<Shape> out;
    out.reserve(spec.layers.size());
    for (const LayerSpec& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::Conv:
                if (cur.size() != 3)
                    throw ShapeError("conv layer " + l.name + " needs a spatial input");
                cur[0] = l.channels;
                break;
            case LayerKind::MaxPool:
                if (cur.size() != 3 || cur[1] % 2 != 0 || cur[2] % 2 != 0)
                    throw ShapeError("maxpool " + l.name + " needs even spatial extents, got " +
                                     shape_str(cur));
                cur[1] /= 2;
                cur[2] /= 2;
                break;
            case LayerKind::Flatten: {
                std::int64_t n = 1;
                for (std::int64_t e : cur) n *= e;
                cur = {n};
                break;
            }
            case LayerKind::Dense:
                if (cur.size() != 1)
                    throw ShapeError("dense layer " + l.name + " needs a flat input");
                cur = {l.channels};
                break;
            case LayerKind::Relu:
            case LayerKind::Lrn:
            case LayerKind::Dropout:
            case LayerKind::Softmax:
                break;
        }
        out.push_back(cur);
    }
    return out;
}

std::vector<ParamShapes> param_shapes(const NetworkSpec& spec) {
    Shape cur = spec.input_shape;
    std::vector<ParamShapes> out;
    out.reserve(spec.layers.size());
    const std::vector<Shape> shapes = shape_walk(spec);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        ParamShapes p;
        if (l.kind == LayerKind::Conv) {
            p.weights = {l.channels, cur[0], l.kernel, l.kernel};
            p.bias = {l.channels};
        } else if (l.kind == LayerKind::Dense) {
            p.weights = {cur[0], l.channels};
            p.bias = {l.channels};
        }
        out.push_back(std::move(p));
        cur = shapes[i];
    }
    return out;
}

} // namespace adnet
