#include "rowspray/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace rowspray {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    // libpng requires the error handler not to return; we get back to C++
    // via the longjmp buffer set up by the caller.
    (void)msg;
    longjmp(png_jmpbuf(png), 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

struct DecodedPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;
};

DecodedPng read_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
    if (!png) throw DecodeError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("libpng init failed");
    }

    DecodedPng out;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("malformed PNG: " + path);
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("unsupported PNG channel count after normalization: " +
                          std::to_string(channels));
    }

    out.width = static_cast<int>(width);
    out.height = static_cast<int>(height);
    out.channels = channels;
    out.data.resize(static_cast<std::size_t>(width) * height * channels);
    row_ptrs.resize(height);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (png_uint_32 r = 0; r < height; ++r) row_ptrs[r] = out.data.data() + r * stride;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const std::string& path, int width, int height, int channels,
               const std::uint8_t* data) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot create image: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
    if (!png) throw IoError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng init failed");
    }
    std::vector<png_bytep> row_ptrs(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed: " + path);
    }

    png_init_io(png, file.get());
    const int color_type = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int r = 0; r < height; ++r)
        row_ptrs[r] = const_cast<png_bytep>(data + static_cast<std::size_t>(r) * stride);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::string range_sidecar_path(const std::string& png_path) {
    std::filesystem::path p(png_path);
    p.replace_extension(".range.txt");
    return p.string();
}

}  // namespace

std::string world_file_path(const std::string& image_path) {
    std::filesystem::path p(image_path);
    p.replace_extension(".pgw");
    return p.string();
}

GeoTransform read_world_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeoreferenceError("missing world file: " + path);
    double v[6];
    for (int i = 0; i < 6; ++i) {
        if (!(in >> v[i]))
            throw GeoreferenceError("world file must contain 6 numeric lines: " + path);
    }
    if (v[1] != 0.0 || v[2] != 0.0)
        throw GeoreferenceError("rotated geotransforms are not supported: " + path);
    GeoTransform geo;
    geo.pixel_size_x = v[0];
    geo.pixel_size_y = v[3];
    geo.origin_x = v[4];
    geo.origin_y = v[5];
    geo.validate();
    return geo;
}

void write_world_file(const std::string& path, const GeoTransform& geo) {
    geo.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot create world file: " + path);
    out << fmt::format("{}\n0\n0\n{}\n{}\n{}\n", geo.pixel_size_x, geo.pixel_size_y,
                       geo.origin_x, geo.origin_y);
    if (!out) throw IoError("failed writing world file: " + path);
}

Raster load_raster(const std::string& png_path) {
    const GeoTransform geo = read_world_file(world_file_path(png_path));
    DecodedPng dec = read_png(png_path);
    Raster raster(dec.width, dec.height, dec.channels, geo);
    raster.samples() = std::move(dec.data);
    return raster;
}

void save_raster(const Raster& raster, const std::string& png_path) {
    write_png(png_path, raster.width(), raster.height(), raster.bands(), raster.samples().data());
    write_world_file(world_file_path(png_path), raster.geo());
}

BinaryMask load_mask(const std::string& png_path) {
    const GeoTransform geo = read_world_file(world_file_path(png_path));
    DecodedPng dec = read_png(png_path);
    if (dec.channels != 1) throw DecodeError("mask PNG must be single-band: " + png_path);
    BinaryMask mask(dec.width, dec.height, geo);
    for (int row = 0; row < dec.height; ++row) {
        const std::uint8_t* p = dec.data.data() + static_cast<std::size_t>(row) * dec.width;
        for (int col = 0; col < dec.width; ++col)
            if (p[col]) mask.set(col, row);
    }
    return mask;
}

void save_mask(const BinaryMask& mask, const std::string& png_path) {
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(mask.width()) * mask.height(), 0);
    mask.for_each_set([&](int col, int row) {
        gray[static_cast<std::size_t>(row) * mask.width() + col] = 255;
    });
    write_png(png_path, mask.width(), mask.height(), 1, gray.data());
    write_world_file(world_file_path(png_path), mask.geo());
}

void save_field(const ScalarField& field, const std::string& png_path) {
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (const float v : field.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(lo <= hi)) {
        lo = 0.0f;
        hi = 0.0f;
    }
    const double span = hi > lo ? static_cast<double>(hi) - lo : 1.0;
    std::vector<std::uint8_t> gray(field.values().size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double scaled = (static_cast<double>(field.values()[i]) - lo) / span * 255.0;
        gray[i] = static_cast<std::uint8_t>(std::clamp(scaled + 0.5, 0.0, 255.0));
    }
    write_png(png_path, field.width(), field.height(), 1, gray.data());
    write_world_file(world_file_path(png_path), field.geo());
    std::ofstream sidecar(range_sidecar_path(png_path));
    if (!sidecar) throw IoError("cannot create range sidecar for " + png_path);
    sidecar << fmt::format("min {}\nmax {}\n", lo, hi);
}

}  // namespace rowspray
