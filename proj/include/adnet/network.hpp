#ifndef ADNET_NETWORK_HPP
#define ADNET_NETWORK_HPP

#include <string>
#include <vector>

#include "adnet/layers.hpp"
#include "adnet/tensor.hpp"

namespace adnet {

enum class Scale { Full, Tiny };

std::string scale_name(Scale s);
Scale parse_scale(const std::string& s);

// One network configuration: an ordered layer list plus its input geometry.
struct NetworkSpec {
    std::string name;           // A, A-LRN, B, C, D or E
    Scale scale = Scale::Full;
    Shape input_shape;          // {channels, height, width}
    std::vector<LayerSpec> layers;

    int weight_layer_count() const;
    std::vector<std::size_t> weight_layer_indices() const;
};

const std::vector<std::string>& config_names();

// Builds one of the six configurations. Full scale is the 224x224 table;
// tiny scale keeps the same layer kinds and order with a 32x32 input,
// channel widths divided by 8 and a 64-wide head, for fast tests.
NetworkSpec build_config(const std::string& name, Scale scale);

// Marks the first n weight-bearing layers (conv/dense, in order) non-trainable.
NetworkSpec freeze_prefix(NetworkSpec spec, int n_weight_layers);

// Output shape of every layer for a single sample, starting from the spec's
// input shape. Also determines parameter shapes.
std::vector<Shape> shape_walk(const NetworkSpec& spec);

// Weight/bias shapes per layer; empty shapes for parameterless layers.
struct ParamShapes {
    Shape weights;
    Shape bias;
};
std::vector<ParamShapes> param_shapes(const NetworkSpec& spec);

} // namespace adnet

#endif
