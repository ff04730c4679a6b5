#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "rowspray/errors.hpp"
#include "rowspray/geometry.hpp"

namespace rowspray {

/// Affine pixel-to-world mapping for an axis-aligned, north-up raster.
/// (origin_x, origin_y) is the world position of the CENTER of the
/// upper-left pixel, matching the ESRI world-file convention.
/// pixel_size_y is stored negative: row indices grow southward.
struct GeoTransform {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_size_x = 1.0;
    double pixel_size_y = -1.0;

    Point2 pixel_to_world(double col, double row) const {
        return {origin_x + col * pixel_size_x, origin_y + row * pixel_size_y};
    }

    // Continuous inverse; (col, row) of the given world point.
    Point2 world_to_pixel(double x, double y) const {
        return {(x - origin_x) / pixel_size_x, (y - origin_y) / pixel_size_y};
    }

    // Outer pixel-edge bounds of a width x height raster, as a Rect with y0 < y1.
    Rect bounds(int width, int height) const {
        const double x0 = origin_x - 0.5 * pixel_size_x;
        const double x1 = origin_x + (width - 0.5) * pixel_size_x;
        const double ytop = origin_y - 0.5 * pixel_size_y;
        const double ybot = origin_y + (height - 0.5) * pixel_size_y;
        return {x0, std::min(ytop, ybot), x1, std::max(ytop, ybot)};
    }

    bool approx_equals(const GeoTransform& o, double eps = 1e-9) const {
        return std::abs(origin_x - o.origin_x) <= eps && std::abs(origin_y - o.origin_y) <= eps &&
               std::abs(pixel_size_x - o.pixel_size_x) <= eps &&
               std::abs(pixel_size_y - o.pixel_size_y) <= eps;
    }

    void validate() const {
        if (pixel_size_x <= 0.0) throw GeoreferenceError("pixel_size_x must be > 0");
        if (pixel_size_y >= 0.0) throw GeoreferenceError("pixel_size_y must be < 0 (north-up)");
    }
};

/// Interleaved 8-bit raster, 1 (gray) or 3 (RGB) bands.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int bands, GeoTransform geo);

    int width() const { return width_; }
    int height() const { return height_; }
    int bands() const { return bands_; }
    const GeoTransform& geo() const { return geo_; }

    std::uint8_t at(int col, int row, int band) const {
        return samples_[(static_cast<std::size_t>(row) * width_ + col) * bands_ + band];
    }
    std::uint8_t& at(int col, int row, int band) {
        return samples_[(static_cast<std::size_t>(row) * width_ + col) * bands_ + band];
    }

    const std::vector<std::uint8_t>& samples() const { return samples_; }
    std::vector<std::uint8_t>& samples() { return samples_; }

private:
    int width_ = 0;
    int height_ = 0;
    int bands_ = 0;
    GeoTransform geo_;
    std::vector<std::uint8_t> samples_;
};

/// Real-valued per-pixel layer (index values). Stored at 32-bit precision;
/// 8-bit inputs are exact in this representation.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int width, int height, GeoTransform geo);

    int width() const { return width_; }
    int height() const { return height_; }
    const GeoTransform& geo() const { return geo_; }

    float at(int col, int row) const {
        return values_[static_cast<std::size_t>(row) * width_ + col];
    }
    float& at(int col, int row) { return values_[static_cast<std::size_t>(row) * width_ + col]; }

    const std::vector<float>& values() const { return values_; }
    std::vector<float>& values() { return values_; }

private:
    int width_ = 0;
    int height_ = 0;
    GeoTransform geo_;
    std::vector<float> values_;
};

/// Dense 1-bit mask sharing the raster georeferencing. Rows are padded to
/// 64-bit word boundaries so per-row popcounts and row-range scans run on
/// whole words.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, GeoTransform geo);

    int width() const { return width_; }
    int height() const { return height_; }
    const GeoTransform& geo() const { return geo_; }
    int words_per_row() const { return words_per_row_; }

    bool get(int col, int row) const {
        const std::uint64_t w = words_[word_index(col, row)];
        return (w >> (col & 63)) & 1u;
    }
    void set(int col, int row, bool v = true) {
        std::uint64_t& w = words_[word_index(col, row)];
        const std::uint64_t bit = std::uint64_t{1} << (col & 63);
        if (v)
            w |= bit;
        else
            w &= ~bit;
    }

    std::uint64_t popcount() const;
    // Number of set bits in pixel-row `row`, columns [col0, col1).
    std::uint64_t row_popcount(int row, int col0, int col1) const;

    // this AND NOT other; dimensions and geo must match.
    BinaryMask and_not(const BinaryMask& other) const;
    // this AND other / this OR other; dimensions and geo must match.
    BinaryMask and_mask(const BinaryMask& other) const;
    BinaryMask or_mask(const BinaryMask& other) const;

    bool same_shape(const BinaryMask& other, double geo_eps = 1e-9) const {
        return width_ == other.width_ && height_ == other.height_ &&
               geo_.approx_equals(other.geo_, geo_eps);
    }

    // Calls fn(col, row) for every set bit, row-major.
    template <typename Fn>
    void for_each_set(Fn&& fn) const {
        for (int r = 0; r < height_; ++r) {
            const std::uint64_t* row_words = words_.data() + static_cast<std::size_t>(r) * words_per_row_;
            for (int wi = 0; wi < words_per_row_; ++wi) {
                std::uint64_t w = row_words[wi];
                while (w) {
                    const int bit = std::countr_zero(w);
                    fn(wi * 64 + bit, r);
                    w &= w - 1;
                }
            }
        }
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    bool operator==(const BinaryMask& o) const {
        return width_ == o.width_ && height_ == o.height_ && words_ == o.words_;
    }

private:
    std::size_t word_index(int col, int row) const {
        return static_cast<std::size_t>(row) * words_per_row_ + (col >> 6);
    }
    void check_combinable(const BinaryMask& other) const;

    int width_ = 0;
    int height_ = 0;
    int words_per_row_ = 0;
    GeoTransform geo_;
    std::vector<std::uint64_t> words_;
};

/// Excess-green value of one real-valued RGB triple: 2g - r - b on
/// chromaticity-normalized bands, evaluated as 3*G/(R+G+B) - 1 so results
/// stay inside [-1, 2] under floating point. Zero-sum pixels map to 0.
double exgi_value(double r, double g, double b);

/// Per-pixel excess-green index of a 3-band raster. Output shares the geo.
/// Throws InvalidInputError if the raster does not have exactly 3 bands.
ScalarField compute_exgi(const Raster& rgb, int threads = 1);

/// bit = 1 iff value >= t (ties count as vegetation). Output shares the geo.
BinaryMask threshold_mask(const ScalarField& field, double t, int threads = 1);

}  // namespace rowspray
