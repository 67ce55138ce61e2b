#include "adnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "adnet/error.hpp"

namespace adnet {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("image: cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

// --- PPM/PGM (binary P6/P5, maxval <= 255) ---------------------------------

int pnm_token(const std::vector<std::uint8_t>& b, std::size_t& pos, const std::string& path) {
    // skip whitespace and '#' comments
    while (pos < b.size()) {
        if (std::isspace(b[pos])) { ++pos; continue; }
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    if (pos >= b.size() || !std::isdigit(b[pos]))
        throw IoError("image: malformed PNM header in '" + path + "'");
    int v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) v = v * 10 + (b[pos++] - '0');
    return v;
}

ImageBuffer decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    const bool gray = bytes[1] == '5';
    std::size_t pos = 2;
    const int w = pnm_token(bytes, pos, path);
    const int h = pnm_token(bytes, pos, path);
    const int maxval = pnm_token(bytes, pos, path);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw IoError("image: unsupported PNM geometry in '" + path + "'");
    ++pos; // single whitespace after maxval
    const std::size_t samples = static_cast<std::size_t>(w) * h * (gray ? 1 : 3);
    if (bytes.size() < pos + samples)
        throw IoError("image: truncated PNM data in '" + path + "'");

    ImageBuffer img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
        if (gray) {
            const std::uint8_t v = bytes[pos + i];
            img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = v;
        } else {
            img.rgb[3 * i] = bytes[pos + 3 * i];
            img.rgb[3 * i + 1] = bytes[pos + 3 * i + 1];
            img.rgb[3 * i + 2] = bytes[pos + 3 * i + 2];
        }
    }
    return img;
}

// --- PNG ---------------------------------------------------------------------

struct PngReadState {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
    PngReadState* s = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (s->pos + n > s->size) png_error(png, "truncated PNG stream");
    std::memcpy(out, s->data + s->pos, n);
    s->pos += n;
}

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("image: png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("image: png init failed");
    }

    ImageBuffer img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("image: cannot decode PNG '" + path + "'");
    }

    PngReadState state{bytes.data(), bytes.size(), 0};
    png_set_read_fn(png, &state, png_read_fn);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(img.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("image: unexpected PNG layout in '" + path + "'");
    }
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    rows.resize(static_cast<std::size_t>(img.height));
    for (std::int64_t y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] = img.rgb.data() + y * img.width * 3;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// --- JPEG --------------------------------------------------------------------

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    JpegErrorMgr* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

ImageBuffer decode_jpeg(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;

    ImageBuffer img;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("image: cannot decode JPEG '" + path + "'");
    }

    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    img.width = cinfo.output_width;
    img.height = cinfo.output_height;
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        std::uint8_t* row = img.rgb.data() +
                            static_cast<std::size_t>(cinfo.output_scanline) * img.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

} // namespace

ImageBuffer decode_image(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() < 8) throw IoError("image: '" + path + "' is too short to decode");
    if (bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return decode_pnm(bytes, path);
    static const std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (std::memcmp(bytes.data(), png_sig, 8) == 0) return decode_png(bytes, path);
    if (bytes[0] == 0xff && bytes[1] == 0xd8) return decode_jpeg(bytes, path);
    throw IoError("image: unrecognized format in '" + path + "'");
}

void write_ppm(const ImageBuffer& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("image: cannot open '" + path + "' for writing");
    os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.rgb.data()),
             static_cast<std::streamsize>(img.rgb.size()));
    if (!os) throw IoError("image: write to '" + path + "' failed");
}

Tensor<float> to_input_tensor(const ImageBuffer& img, std::int64_t out_h, std::int64_t out_w) {
    if (img.width < 1 || img.height < 1 ||
        img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3)
        throw ShapeError("image: inconsistent buffer");
    Tensor<float> t({3, out_h, out_w});
    const double sy = static_cast<double>(img.height) / static_cast<double>(out_h);
    const double sx = static_cast<double>(img.width) / static_cast<double>(out_w);
    for (std::int64_t oy = 0; oy < out_h; ++oy) {
        const double fy = (oy + 0.5) * sy - 0.5;
        std::int64_t y0 = static_cast<std::int64_t>(std::floor(fy));
        const double wy = fy - y0;
        std::int64_t y1 = y0 + 1;
        y0 = std::clamp<std::int64_t>(y0, 0, img.height - 1);
        y1 = std::clamp<std::int64_t>(y1, 0, img.height - 1);
        for (std::int64_t ox = 0; ox < out_w; ++ox) {
            const double fx = (ox + 0.5) * sx - 0.5;
            std::int64_t x0 = static_cast<std::int64_t>(std::floor(fx));
            const double wx = fx - x0;
            std::int64_t x1 = x0 + 1;
            x0 = std::clamp<std::int64_t>(x0, 0, img.width - 1);
            x1 = std::clamp<std::int64_t>(x1, 0, img.width - 1);
            for (int c = 0; c < 3; ++c) {
                const double p00 = img.rgb[(y0 * img.width + x0) * 3 + c];
                const double p01 = img.rgb[(y0 * img.width + x1) * 3 + c];
                const double p10 = img.rgb[(y1 * img.width + x0) * 3 + c];
                const double p11 = img.rgb[(y1 * img.width + x1) * 3 + c];
                const double v = (1 - wy) * ((1 - wx) * p00 + wx * p01) +
                                 wy * ((1 - wx) * p10 + wx * p11);
                t.raw()[(c * out_h + oy) * out_w + ox] = static_cast<float>(v / 255.0);
            }
        }
    }
    return t;
}

Tensor<float> load_input(const std::string& path, std::int64_t out_h, std::int64_t out_w) {
    return to_input_tensor(decode_image(path), out_h, out_w);
}

SampleLoader make_file_loader(std::string images_dir, std::int64_t out_h, std::int64_t out_w) {
    if (!images_dir.empty() && images_dir.back() != '/') images_dir += '/';
    return [images_dir, out_h, out_w](const SampleRecord& rec) {
        return load_input(images_dir + rec.image_id, out_h, out_w);
    };
}

} // namespace adnet
