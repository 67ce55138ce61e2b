#ifndef ADNET_IMAGE_HPP
#define ADNET_IMAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "adnet/dataset.hpp"
#include "adnet/tensor.hpp"

namespace adnet {

// Decoded 8-bit RGB pixels, row-major, 3 bytes per pixel.
struct ImageBuffer {
    std::int64_t width = 0;
    std::int64_t height = 0;
    std::vector<std::uint8_t> rgb;
};

// Sniffs the format from magic bytes; handles PPM (P6/P5), PNG and JPEG.
// Grayscale sources are replicated to three channels.
ImageBuffer decode_image(const std::string& path);

void write_ppm(const ImageBuffer& img, const std::string& path);

// Bilinear resize to [3, out_h, out_w], channels first, values scaled to [0,1].
Tensor<float> to_input_tensor(const ImageBuffer& img, std::int64_t out_h, std::int64_t out_w);

// decode + resize in one step.
Tensor<float> load_input(const std::string& path, std::int64_t out_h, std::int64_t out_w);

// Loader that resolves record.image_id under images_dir.
SampleLoader make_file_loader(std::string images_dir, std::int64_t out_h, std::int64_t out_w);

} // namespace adnet

#endif
