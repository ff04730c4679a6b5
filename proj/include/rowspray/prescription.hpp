#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rowspray/raster.hpp"

namespace rowspray {

/// Spray-decision grid geometry. Cells are cell_across_m perpendicular to the
/// travel axis and cell_along_m along it; with travel = Y each cell column
/// lines up with one nozzle of a 0.5 m boom section.
struct GridSpec {
    double cell_across_m = 0.509;  // 1.67 ft
    double cell_along_m = 3.048;   // 10 ft
    Axis travel = Axis::Y;
    std::optional<Point2> origin;  // lattice anchor; defaults to the extent min corner

    double cell_size_x() const { return travel == Axis::Y ? cell_across_m : cell_along_m; }
    double cell_size_y() const { return travel == Axis::Y ? cell_along_m : cell_across_m; }

    void validate() const {
        if (cell_across_m <= 0.0 || cell_along_m <= 0.0)
            throw InvalidInputError("grid cell dimensions must be positive");
    }
};

struct Cell {
    Rect rect;  // half-open [x0, x1) x [y0, y1), truncated at the extent
    int row = 0;
    int col = 0;
    double rate_l_per_ha = 0.0;
    std::int64_t weed_pixels = 0;
};

struct PrescriptionMap {
    GridSpec spec;
    Rect extent;
    double spray_rate_l_per_ha = 140.3;
    int nrows = 0;
    int ncols = 0;
    bool rates_assigned = false;
    std::vector<Cell> cells;  // row-major

    Cell& cell(int row, int col) { return cells[static_cast<std::size_t>(row) * ncols + col]; }
    const Cell& cell(int row, int col) const {
        return cells[static_cast<std::size_t>(row) * ncols + col];
    }

    /// Index of the cell containing the point under half-open membership,
    /// or nullopt if the point falls outside every cell.
    std::optional<std::pair<int, int>> cell_index_for(const Point2& p) const;

    double rate_at(const Point2& p) const {
        const auto idx = cell_index_for(p);
        return idx ? cell(idx->first, idx->second).rate_l_per_ha : 0.0;
    }

    double no_spray_area_m2() const;
    double spray_area_m2() const;
};

/// Lays the grid over the extent; rates are unset until assign_rates.
/// Throws InvalidInputError on an empty extent.
PrescriptionMap build_grid(const Rect& extent, const GridSpec& spec);

/// Counts weed-pixel centers per cell and sets rate = spray_rate where any
/// weed is present, 0 elsewhere. The weed mask must cover the map extent.
void assign_rates(PrescriptionMap& map, const BinaryMask& weeds);

struct PrescriptionStats {
    std::int64_t cells_total = 0;
    std::int64_t cells_no_spray = 0;
    std::int64_t cells_spray = 0;
    double frac_no_spray = 0.0;
    double area_no_spray_m2 = 0.0;
    double area_spray_m2 = 0.0;
    double area_total_m2 = 0.0;
};

PrescriptionStats prescription_stats(const PrescriptionMap& map);

/// GeoJSON-style feature collection, one 5-point closed rectangle ring per
/// cell with properties rate_l_per_ha, row, col, weed_pixels; features in
/// row-major order; planar meter coordinates.
void export_prescription(const PrescriptionMap& map, const std::string& path);
PrescriptionMap import_prescription(const std::string& path);

bool prescription_equal(const PrescriptionMap& a, const PrescriptionMap& b,
                        double geom_eps = 1e-6);

}  // namespace rowspray
