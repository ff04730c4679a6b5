#include "rowspray/raster.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <string>
#include <thread>

namespace rowspray {

namespace {

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) throw InvalidInputError("raster dimensions must be positive");
}

// Runs fn(row_begin, row_end) over [0, height) split into `threads` chunks.
void parallel_rows(int height, int threads, const std::function<void(int, int)>& fn) {
    if (threads <= 1 || height < 2 * threads) {
        fn(0, height);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (height + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int r0 = t * chunk;
        const int r1 = std::min(height, r0 + chunk);
        if (r0 >= r1) break;
        pool.emplace_back(fn, r0, r1);
    }
    for (auto& th : pool) th.join();
}

}  // namespace

Raster::Raster(int width, int height, int bands, GeoTransform geo)
    : width_(width), height_(height), bands_(bands), geo_(geo) {
    check_dims(width, height);
    if (bands != 1 && bands != 3) throw InvalidInputError("raster must have 1 or 3 bands");
    samples_.assign(static_cast<std::size_t>(width) * height * bands, 0);
}

ScalarField::ScalarField(int width, int height, GeoTransform geo)
    : width_(width), height_(height), geo_(geo) {
    check_dims(width, height);
    values_.assign(static_cast<std::size_t>(width) * height, 0.0f);
}

BinaryMask::BinaryMask(int width, int height, GeoTransform geo)
    : width_(width), height_(height), words_per_row_((width + 63) / 64), geo_(geo) {
    check_dims(width, height);
    words_.assign(static_cast<std::size_t>(words_per_row_) * height, 0);
}

std::uint64_t BinaryMask::popcount() const {
    std::uint64_t n = 0;
    for (const std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

std::uint64_t BinaryMask::row_popcount(int row, int col0, int col1) const {
    if (col0 < 0) col0 = 0;
    if (col1 > width_) col1 = width_;
    if (col0 >= col1) return 0;
    const std::uint64_t* row_words = words_.data() + static_cast<std::size_t>(row) * words_per_row_;
    const int w0 = col0 >> 6;
    const int w1 = (col1 - 1) >> 6;
    const std::uint64_t first_mask = ~std::uint64_t{0} << (col0 & 63);
    const std::uint64_t last_mask = ~std::uint64_t{0} >> (63 - ((col1 - 1) & 63));
    if (w0 == w1) return std::popcount(row_words[w0] & first_mask & last_mask);
    std::uint64_t n = std::popcount(row_words[w0] & first_mask);
    for (int w = w0 + 1; w < w1; ++w) n += std::popcount(row_words[w]);
    n += std::popcount(row_words[w1] & last_mask);
    return n;
}

void BinaryMask::check_combinable(const BinaryMask& other) const {
    if (!same_shape(other))
        throw InvalidInputError("mask dimensions or georeferencing do not match");
}

BinaryMask BinaryMask::and_not(const BinaryMask& other) const {
    check_combinable(other);
    BinaryMask out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = words_[i] & ~other.words_[i];
    return out;
}

BinaryMask BinaryMask::and_mask(const BinaryMask& other) const {
    check_combinable(other);
    BinaryMask out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = words_[i] & other.words_[i];
    return out;
}

BinaryMask BinaryMask::or_mask(const BinaryMask& other) const {
    check_combinable(other);
    BinaryMask out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = words_[i] | other.words_[i];
    return out;
}

double exgi_value(double r, double g, double b) {
    const double s = r + g + b;
    if (s <= 0.0) return 0.0;
    return 3.0 * (g / s) - 1.0;
}

ScalarField compute_exgi(const Raster& rgb, int threads) {
    if (rgb.bands() != 3)
        throw InvalidInputError("excess-green index needs a 3-band raster, got " +
                                std::to_string(rgb.bands()) + " band(s)");
    ScalarField out(rgb.width(), rgb.height(), rgb.geo());
    const std::uint8_t* src = rgb.samples().data();
    float* dst = out.values().data();
    const int width = rgb.width();
    parallel_rows(rgb.height(), threads, [&](int r0, int r1) {
        for (int row = r0; row < r1; ++row) {
            const std::uint8_t* p = src + static_cast<std::size_t>(row) * width * 3;
            float* q = dst + static_cast<std::size_t>(row) * width;
            for (int col = 0; col < width; ++col, p += 3) {
                q[col] = static_cast<float>(exgi_value(p[0], p[1], p[2]));
            }
        }
    });
    return out;
}

BinaryMask threshold_mask(const ScalarField& field, double t, int threads) {
    BinaryMask out(field.width(), field.height(), field.geo());
    const float* src = field.values().data();
    const int width = field.width();
    const int wpr = out.words_per_row();
    std::uint64_t* words = out.words().data();
    parallel_rows(field.height(), threads, [&](int r0, int r1) {
        for (int row = r0; row < r1; ++row) {
            const float* p = src + static_cast<std::size_t>(row) * width;
            std::uint64_t* w = words + static_cast<std::size_t>(row) * wpr;
            for (int col = 0; col < width; ++col) {
                if (static_cast<double>(p[col]) >= t) w[col >> 6] |= std::uint64_t{1} << (col & 63);
            }
        }
    });
    return out;
}

}  // namespace rowspray
