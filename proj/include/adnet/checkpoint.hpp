#ifndef ADNET_CHECKPOINT_HPP
#define ADNET_CHECKPOINT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adnet/model.hpp"
#include "adnet/network.hpp"
#include "adnet/tensor.hpp"

namespace adnet {

// Serializable snapshot of a model: spec identity, training metadata and all
// parameter tensors (optimizer state rides along under "opt." names).
//
// On disk: magic "ADNT", u32 version, spec name, scale byte, epoch, seed,
// then one record per tensor (name, dtype tag, rank, extents, raw values),
// everything little-endian and fixed-width. Round-trips are bit-exact.
struct Checkpoint {
    std::string spec_name;
    Scale scale = Scale::Full;
    std::uint32_t epoch = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, Tensor<float>>> tensors;

    const Tensor<float>* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Snapshot of the model's parameters as "<layer>.weight" / "<layer>.bias".
Checkpoint checkpoint_from_model(const Model<float>& model, std::uint32_t epoch,
                                 std::uint64_t seed);

// Copies checkpoint parameters into a model; every weighted layer must be
// present with exactly matching shapes.
void load_model_params(Model<float>& model, const Checkpoint& ckpt);

// Convenience: rebuild the spec named in the checkpoint and load into it.
Model<float> model_from_checkpoint(const Checkpoint& ckpt);

} // namespace adnet

#endif
