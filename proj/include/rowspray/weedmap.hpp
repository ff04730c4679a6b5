#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rowspray/raster.hpp"
#include "rowspray/rowdetect.hpp"

namespace rowspray {

struct BufferSpec {
    double half_width_m = 0.0889;  // 3.5 inches either side of a row line

    void validate() const {
        if (half_width_m <= 0.0) throw InvalidInputError("buffer half width must be positive");
    }
};

/// Crop-zone mask: bit = 1 iff the pixel center lies within half_width_m of
/// some row segment, measured perpendicular to the segment with flat end
/// caps (no disc beyond the endpoints).
BinaryMask buffer_rows(const std::vector<RowLine>& lines, const BufferSpec& spec,
                       const GeoTransform& geo, int width, int height);

/// weeds = vegetation AND NOT crop_zone. Dimensions and geo must match.
BinaryMask extract_weeds(const BinaryMask& vegetation, const BinaryMask& crop_zone);

struct WeedRegion {
    std::int64_t pixels = 0;
    double area_m2 = 0.0;
    int min_col = 0, min_row = 0, max_col = 0, max_row = 0;  // inclusive pixel bbox
    Point2 centroid;                                         // world coordinates
};

/// Maximal connected components (8- or 4-connectivity), ordered by
/// (min row, min col) of the bounding box.
std::vector<WeedRegion> connected_components(const BinaryMask& mask, int connectivity = 8);

double mask_area_m2(const BinaryMask& mask);

// CSV: id,pixels,area_m2,centroid_x_m,centroid_y_m
void write_regions_csv(const std::string& path, const std::vector<WeedRegion>& regions);

}  // namespace rowspray
