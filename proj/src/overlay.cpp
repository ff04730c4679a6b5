#include "rowspray/overlay.hpp"

#include <algorithm>
#include <cmath>

namespace rowspray {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr Rgb kWeedColor{40, 90, 230};
constexpr Rgb kCellColor{40, 200, 230};
constexpr Rgb kRowColor{230, 40, 40};

void put(Raster& raster, int col, int row, Rgb color) {
    if (col < 0 || col >= raster.width() || row < 0 || row >= raster.height()) return;
    raster.at(col, row, 0) = color.r;
    raster.at(col, row, 1) = color.g;
    raster.at(col, row, 2) = color.b;
}

void draw_segment(Raster& raster, const GeoTransform& geo, Point2 a, Point2 b, Rgb color) {
    const Point2 pa = geo.world_to_pixel(a.x, a.y);
    const Point2 pb = geo.world_to_pixel(b.x, b.y);
    int x0 = static_cast<int>(std::lround(pa.x));
    int y0 = static_cast<int>(std::lround(pa.y));
    const int x1 = static_cast<int>(std::lround(pb.x));
    const int y1 = static_cast<int>(std::lround(pb.y));
    // Bresenham.
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        put(raster, x0, y0, color);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_rect_outline(Raster& raster, const GeoTransform& geo, const Rect& rect, Rgb color) {
    const Point2 p0 = geo.world_to_pixel(rect.x0, rect.y0);
    const Point2 p1 = geo.world_to_pixel(rect.x1, rect.y1);
    const int c0 = static_cast<int>(std::lround(std::min(p0.x, p1.x)));
    const int c1 = static_cast<int>(std::lround(std::max(p0.x, p1.x)));
    const int r0 = static_cast<int>(std::lround(std::min(p0.y, p1.y)));
    const int r1 = static_cast<int>(std::lround(std::max(p0.y, p1.y)));
    for (int c = c0; c <= c1; ++c) {
        put(raster, c, r0, color);
        put(raster, c, r1, color);
    }
    for (int r = r0; r <= r1; ++r) {
        put(raster, c0, r, color);
        put(raster, c1, r, color);
    }
}

}  // namespace

Raster render_overlay(const Raster& rgb, const std::vector<RowLine>* lines,
                      const BinaryMask* weeds, const PrescriptionMap* grid) {
    if (rgb.bands() != 3) throw InvalidInputError("overlay needs an RGB raster");
    Raster out = rgb;
    const GeoTransform& geo = rgb.geo();
    const Rect raster_bounds = geo.bounds(rgb.width(), rgb.height());

    if (weeds) {
        if (weeds->width() != rgb.width() || weeds->height() != rgb.height() ||
            !weeds->geo().approx_equals(geo))
            throw InvalidInputError("weed layer extent does not match the raster");
        weeds->for_each_set([&](int col, int row) { put(out, col, row, kWeedColor); });
    }
    if (grid) {
        if (!grid->extent.approx_equals(raster_bounds,
                                        std::max(geo.pixel_size_x, -geo.pixel_size_y) + 1e-9))
            throw InvalidInputError("grid extent does not match the raster");
        for (const Cell& cell : grid->cells)
            if (cell.rate_l_per_ha <= 0.0) draw_rect_outline(out, geo, cell.rect, kCellColor);
    }
    if (lines) {
        for (const RowLine& line : *lines) draw_segment(out, geo, line.a, line.b, kRowColor);
    }
    return out;
}

}  // namespace rowspray
