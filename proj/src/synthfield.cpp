#include "rowspray/synthfield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

namespace rowspray {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

// Default palette keeps a wide margin around the 0.08 segmentation
// threshold (plants 0.8 / 0.7, soil -0.03); the hard palette narrows it to
// +-0.02 for threshold-sensitivity tests.
constexpr Rgb kSoil{130, 100, 80};
constexpr Rgb kPlant{60, 180, 60};
constexpr Rgb kWeed{70, 170, 60};
constexpr Rgb kSoilHard{100, 106, 94};   // exgi = 0.06
constexpr Rgb kPlantHard{95, 110, 95};   // exgi = 0.10
constexpr double kWobblePeriodM = 20.0;

void fill_disk(Raster& raster, BinaryMask& drawn, double cx_px, double cy_px, double radius_px,
               Rgb color) {
    const int c0 = std::max(0, static_cast<int>(std::floor(cx_px - radius_px)));
    const int c1 = std::min(raster.width() - 1, static_cast<int>(std::ceil(cx_px + radius_px)));
    const int r0 = std::max(0, static_cast<int>(std::floor(cy_px - radius_px)));
    const int r1 = std::min(raster.height() - 1, static_cast<int>(std::ceil(cy_px + radius_px)));
    const double r2 = radius_px * radius_px;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dx = c - cx_px;
            const double dy = r - cy_px;
            if (dx * dx + dy * dy > r2) continue;
            raster.at(c, r, 0) = color.r;
            raster.at(c, r, 1) = color.g;
            raster.at(c, r, 2) = color.b;
            drawn.set(c, r);
        }
    }
}

}  // namespace

void FieldSpec::validate() const {
    if (extent_w_m <= 0.0 || extent_h_m <= 0.0) throw InvalidInputError("extent must be positive");
    if (gsd_m <= 0.0) throw InvalidInputError("gsd must be positive");
    if (row_spacing_m <= 0.0) throw InvalidInputError("row spacing must be positive");
    if (plant_diameter_m <= 0.0 || plant_spacing_m <= 0.0)
        throw InvalidInputError("plant geometry must be positive");
    if (plant_dropout_prob < 0.0 || plant_dropout_prob > 1.0)
        throw InvalidInputError("dropout probability must be in [0, 1]");
    if (weed_density_per_m2 < 0.0) throw InvalidInputError("weed density must be >= 0");
    if (weed_diameter_min_m <= 0.0 || weed_diameter_max_m < weed_diameter_min_m)
        throw InvalidInputError("weed diameter range is invalid");
    if (row_wobble_amplitude_px < 0.0) throw InvalidInputError("wobble amplitude must be >= 0");
    if (row_clearance_m <= 0.0) throw InvalidInputError("row clearance must be positive");
}

SynthField generate(const FieldSpec& spec) {
    spec.validate();

    const int width = std::max(1, static_cast<int>(std::lround(spec.extent_w_m / spec.gsd_m)));
    const int height = std::max(1, static_cast<int>(std::lround(spec.extent_h_m / spec.gsd_m)));
    GeoTransform geo;
    geo.origin_x = spec.origin.x;
    geo.origin_y = spec.origin.y;
    geo.pixel_size_x = spec.gsd_m;
    geo.pixel_size_y = -spec.gsd_m;

    const int n_rows = static_cast<int>(std::floor(spec.extent_h_m / spec.row_spacing_m));
    if (n_rows < 1) throw InvalidInputError("extent too small for one row at this spacing");

    SynthField field{Raster(width, height, 3, geo), GroundTruth{}};
    field.truth.vegetation = BinaryMask(width, height, geo);

    const Rgb soil = spec.hard_palette ? kSoilHard : kSoil;
    const Rgb plant = spec.hard_palette ? kPlantHard : kPlant;
    const Rgb weed = spec.hard_palette ? kPlantHard : kWeed;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            field.raster.at(c, r, 0) = soil.r;
            field.raster.at(c, r, 1) = soil.g;
            field.raster.at(c, r, 2) = soil.b;
        }
    }

    std::mt19937_64 rng(spec.seed);
    const double plant_radius_px = 0.5 * spec.plant_diameter_m / spec.gsd_m;
    const int n_plants = static_cast<int>(std::floor(spec.extent_w_m / spec.plant_spacing_m));

    for (int k = 0; k < n_rows; ++k) {
        // Row center: half a spacing in from the top edge of the field.
        const double row_px = -0.5 + (0.5 + k) * spec.row_spacing_m / spec.gsd_m;
        const double phase = 2.0 * std::numbers::pi * detail::next_unit(rng);

        RowLine line;
        line.a = geo.pixel_to_world(0, row_px);
        line.b = geo.pixel_to_world(width - 1, row_px);
        line.tile_col = 0;
        line.tile_row = 0;
        line.peak_row_px = static_cast<int>(std::lround(row_px));
        field.truth.rows.push_back(line);

        for (int j = 0; j < n_plants; ++j) {
            const double drop = detail::next_unit(rng);
            if (drop < spec.plant_dropout_prob) continue;
            const double x_m = (0.5 + j) * spec.plant_spacing_m;
            const double x_px = x_m / spec.gsd_m - 0.5;
            double y_px = row_px;
            if (spec.row_wobble_amplitude_px > 0.0)
                y_px += spec.row_wobble_amplitude_px *
                        std::sin(2.0 * std::numbers::pi * x_m / kWobblePeriodM + phase);
            fill_disk(field.raster, field.truth.vegetation, x_px, y_px, plant_radius_px, plant);
        }
    }

    const double area_m2 = spec.extent_w_m * spec.extent_h_m;
    const int n_weeds = static_cast<int>(std::llround(spec.weed_density_per_m2 * area_m2));
    for (int w = 0; w < n_weeds; ++w) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const double x_m = detail::next_unit(rng) * spec.extent_w_m;
            const double y_m = detail::next_unit(rng) * spec.extent_h_m;
            const double diameter = spec.weed_diameter_min_m +
                                    detail::next_unit(rng) *
                                        (spec.weed_diameter_max_m - spec.weed_diameter_min_m);
            const double radius = 0.5 * diameter;

            // Distance to the nearest nominal row center line.
            bool clear = true;
            for (int k = 0; k < n_rows; ++k) {
                const double row_y_m = (0.5 + k) * spec.row_spacing_m;
                if (std::abs(y_m - row_y_m) < spec.row_clearance_m + radius) {
                    clear = false;
                    break;
                }
            }
            if (!clear) continue;

            const double x_px = x_m / spec.gsd_m - 0.5;
            const double y_px = y_m / spec.gsd_m - 0.5;
            fill_disk(field.raster, field.truth.vegetation, x_px, y_px, radius / spec.gsd_m, weed);
            WeedDisk disk;
            disk.center = geo.pixel_to_world(x_px, y_px);
            disk.radius_m = radius;
            field.truth.weeds.push_back(disk);
            break;
        }
    }

    return field;
}

void truth_to_files(const GroundTruth& truth, const std::string& rows_csv_path,
                    const std::string& weeds_csv_path) {
    write_row_lines_csv(rows_csv_path, truth.rows, /*with_tile_columns=*/false);
    std::ofstream out(weeds_csv_path);
    if (!out) throw IoError("cannot create " + weeds_csv_path);
    out << "x_m,y_m,radius_m\n";
    for (const WeedDisk& w : truth.weeds)
        out << fmt::format("{},{},{}\n", w.center.x, w.center.y, w.radius_m);
    if (!out) throw IoError("failed writing " + weeds_csv_path);
}

GroundTruth truth_from_files(const std::string& rows_csv_path,
                             const std::string& weeds_csv_path) {
    GroundTruth truth;
    truth.rows = read_row_lines_csv(rows_csv_path);

    std::ifstream in(weeds_csv_path);
    if (!in) throw IoError("cannot open " + weeds_csv_path);
    std::string header;
    if (!std::getline(in, header) || header != "x_m,y_m,radius_m")
        throw ParseError(weeds_csv_path + ": expected header x_m,y_m,radius_m");
    std::string record;
    int line_no = 1;
    while (std::getline(in, record)) {
        ++line_no;
        if (record.empty()) continue;
        std::stringstream ss(record);
        std::string x, y, r;
        if (!std::getline(ss, x, ',') || !std::getline(ss, y, ',') || !std::getline(ss, r))
            throw ParseError(fmt::format("{}:{}: expected 3 fields", weeds_csv_path, line_no));
        WeedDisk disk;
        try {
            disk.center.x = std::stod(x);
            disk.center.y = std::stod(y);
            disk.radius_m = std::stod(r);
        } catch (const std::exception&) {
            throw ParseError(fmt::format("{}:{}: non-numeric field", weeds_csv_path, line_no));
        }
        truth.weeds.push_back(disk);
    }
    return truth;
}

}  // namespace rowspray
