#include "adnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "adnet/error.hpp"

namespace adnet {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
    os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    put_u32(os, static_cast<std::uint32_t>(v & 0xffffffffu));
    put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw CheckpointError("checkpoint: unexpected end of file");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

std::uint64_t get_u64(std::istream& is) {
    const std::uint64_t lo = get_u32(is);
    const std::uint64_t hi = get_u32(is);
    return lo | hi << 32;
}

float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

std::string get_string(std::istream& is) {
    const std::uint32_t n = get_u32(is);
    if (n > (1u << 20)) throw CheckpointError("checkpoint: implausible string length");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n)) throw CheckpointError("checkpoint: unexpected end of file");
    return s;
}

std::uint8_t get_u8(std::istream& is) {
    char c;
    if (!is.get(c)) throw CheckpointError("checkpoint: unexpected end of file");
    return static_cast<std::uint8_t>(c);
}

} // namespace

const Tensor<float>* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_string(os, ckpt.spec_name);
    os.put(ckpt.scale == Scale::Tiny ? 1 : 0);
    put_u32(os, ckpt.epoch);
    put_u64(os, ckpt.seed);
    put_u32(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        put_string(os, name);
        os.put(char(kDtypeF32));
        put_u32(os, static_cast<std::uint32_t>(t.rank()));
        for (std::int64_t e : t.shape()) put_u64(os, static_cast<std::uint64_t>(e));
        for (std::size_t i = 0; i < t.size(); ++i) put_f32(os, t[i]);
    }
    if (!os) throw IoError("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("checkpoint: cannot open '" + path + "'");

    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("checkpoint: bad magic in '" + path + "'");
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ckpt;
    ckpt.spec_name = get_string(is);
    const std::uint8_t scale = get_u8(is);
    if (scale > 1) throw CheckpointError("checkpoint: bad scale tag");
    ckpt.scale = scale ? Scale::Tiny : Scale::Full;
    ckpt.epoch = get_u32(is);
    ckpt.seed = get_u64(is);

    const std::uint32_t n_records = get_u32(is);
    ckpt.tensors.reserve(n_records);
    for (std::uint32_t r = 0; r < n_records; ++r) {
        std::string name = get_string(is);
        const std::uint8_t dtype = get_u8(is);
        if (dtype != kDtypeF32)
            throw CheckpointError("checkpoint: unsupported dtype tag " + std::to_string(dtype));
        const std::uint32_t rank = get_u32(is);
        if (rank == 0 || rank > 8) throw CheckpointError("checkpoint: implausible rank");
        Shape shape(rank);
        std::size_t count = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const std::uint64_t e = get_u64(is);
            if (e == 0 || e > (1ull << 32)) throw CheckpointError("checkpoint: implausible extent");
            shape[d] = static_cast<std::int64_t>(e);
            count *= e;
        }
        std::vector<float> values(count);
        for (std::size_t i = 0; i < count; ++i) values[i] = get_f32(is);
        ckpt.tensors.emplace_back(std::move(name), Tensor<float>(std::move(shape), std::move(values)));
    }

    // Trailing garbage means the file is not one of ours.
    if (is.peek() != std::char_traits<char>::eof())
        throw CheckpointError("checkpoint: trailing bytes in '" + path + "'");
    return ckpt;
}

Checkpoint checkpoint_from_model(const Model<float>& model, std::uint32_t epoch,
                                 std::uint64_t seed) {
    Checkpoint ckpt;
    ckpt.spec_name = model.spec().name;
    ckpt.scale = model.spec().scale;
    ckpt.epoch = epoch;
    ckpt.seed = seed;
    const auto& layers = model.spec().layers;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (!layers[i].has_weights()) continue;
        ckpt.tensors.emplace_back(layers[i].name + ".weight", model.vars()[i].weights);
        ckpt.tensors.emplace_back(layers[i].name + ".bias", model.vars()[i].bias);
    }
    return ckpt;
}

void load_model_params(Model<float>& model, const Checkpoint& ckpt) {
    const auto& layers = model.spec().layers;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (!layers[i].has_weights()) continue;
        const Tensor<float>* w = ckpt.find(layers[i].name + ".weight");
        const Tensor<float>* b = ckpt.find(layers[i].name + ".bias");
        if (!w || !b)
            throw CheckpointError("checkpoint: missing parameters for layer '" +
                                  layers[i].name + "'");
        if (w->shape() != model.vars()[i].weights.shape() ||
            b->shape() != model.vars()[i].bias.shape())
            throw CheckpointError("checkpoint: shape mismatch at layer '" + layers[i].name +
                                  "': file has " + shape_str(w->shape()) + ", spec " +
                                  model.spec().name + " needs " +
                                  shape_str(model.vars()[i].weights.shape()));
        model.vars()[i].weights = *w;
        model.vars()[i].bias = *b;
    }
}

Model<float> model_from_checkpoint(const Checkpoint& ckpt) {
    Model<float> model(build_config(ckpt.spec_name, ckpt.scale));
    load_model_params(model, ckpt);
    return model;
}

} // namespace adnet
