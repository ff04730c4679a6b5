#include "rowspray/weedmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace rowspray {

BinaryMask buffer_rows(const std::vector<RowLine>& lines, const BufferSpec& spec,
                       const GeoTransform& geo, int width, int height) {
    spec.validate();
    geo.validate();
    BinaryMask out(width, height, geo);
    const double half = spec.half_width_m;

    for (const RowLine& line : lines) {
        const double abx = line.b.x - line.a.x;
        const double aby = line.b.y - line.a.y;
        const double len2 = abx * abx + aby * aby;
        if (len2 <= 0.0) continue;
        const double len = std::sqrt(len2);

        // Pixel-space bounding box of the buffered segment, padded a pixel.
        const Point2 pa = geo.world_to_pixel(line.a.x, line.a.y);
        const Point2 pb = geo.world_to_pixel(line.b.x, line.b.y);
        const double pad_x = half / geo.pixel_size_x + 1.0;
        const double pad_y = half / -geo.pixel_size_y + 1.0;
        const int c0 = std::max(0, static_cast<int>(std::floor(std::min(pa.x, pb.x) - pad_x)));
        const int c1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(pa.x, pb.x) + pad_x)));
        const int r0 = std::max(0, static_cast<int>(std::floor(std::min(pa.y, pb.y) - pad_y)));
        const int r1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(pa.y, pb.y) + pad_y)));

        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                const Point2 p = geo.pixel_to_world(c, r);
                const double apx = p.x - line.a.x;
                const double apy = p.y - line.a.y;
                const double t = (apx * abx + apy * aby) / len2;
                if (t < 0.0 || t > 1.0) continue;  // flat caps
                const double perp = std::abs(apx * aby - apy * abx) / len;
                if (perp <= half) out.set(c, r);
            }
        }
    }
    return out;
}

BinaryMask extract_weeds(const BinaryMask& vegetation, const BinaryMask& crop_zone) {
    return vegetation.and_not(crop_zone);
}

std::vector<WeedRegion> connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw InvalidInputError("connectivity must be 4 or 8");

    const int w = mask.width();
    const int h = mask.height();
    std::vector<char> visited(static_cast<std::size_t>(w) * h, 0);
    std::vector<WeedRegion> regions;
    std::vector<std::pair<int, int>> stack;

    static constexpr int dx8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dy8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dx4[] = {0, -1, 1, 0};
    static constexpr int dy4[] = {-1, 0, 0, 1};
    const int* dx = connectivity == 8 ? dx8 : dx4;
    const int* dy = connectivity == 8 ? dy8 : dy4;
    const int ndirs = connectivity;

    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const std::size_t idx = static_cast<std::size_t>(row) * w + col;
            if (visited[idx] || !mask.get(col, row)) continue;

            WeedRegion region;
            region.min_col = region.max_col = col;
            region.min_row = region.max_row = row;
            double sum_col = 0.0, sum_row = 0.0;

            stack.clear();
            stack.emplace_back(col, row);
            visited[idx] = 1;
            while (!stack.empty()) {
                const auto [c, r] = stack.back();
                stack.pop_back();
                ++region.pixels;
                sum_col += c;
                sum_row += r;
                region.min_col = std::min(region.min_col, c);
                region.max_col = std::max(region.max_col, c);
                region.min_row = std::min(region.min_row, r);
                region.max_row = std::max(region.max_row, r);
                for (int d = 0; d < ndirs; ++d) {
                    const int nc = c + dx[d];
                    const int nr = r + dy[d];
                    if (nc < 0 || nc >= w || nr < 0 || nr >= h) continue;
                    const std::size_t nidx = static_cast<std::size_t>(nr) * w + nc;
                    if (visited[nidx] || !mask.get(nc, nr)) continue;
                    visited[nidx] = 1;
                    stack.emplace_back(nc, nr);
                }
            }

            const double px_area = mask.geo().pixel_size_x * -mask.geo().pixel_size_y;
            region.area_m2 = static_cast<double>(region.pixels) * px_area;
            region.centroid = mask.geo().pixel_to_world(sum_col / region.pixels,
                                                        sum_row / region.pixels);
            regions.push_back(region);
        }
    }

    std::sort(regions.begin(), regions.end(), [](const WeedRegion& a, const WeedRegion& b) {
        if (a.min_row != b.min_row) return a.min_row < b.min_row;
        return a.min_col < b.min_col;
    });
    return regions;
}

double mask_area_m2(const BinaryMask& mask) {
    return static_cast<double>(mask.popcount()) * mask.geo().pixel_size_x *
           -mask.geo().pixel_size_y;
}

void write_regions_csv(const std::string& path, const std::vector<WeedRegion>& regions) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);
    out << "id,pixels,area_m2,centroid_x_m,centroid_y_m\n";
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const WeedRegion& r = regions[i];
        out << fmt::format("{},{},{},{},{}\n", i, r.pixels, r.area_m2, r.centroid.x, r.centroid.y);
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace rowspray
