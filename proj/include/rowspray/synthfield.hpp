#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rowspray/raster.hpp"
#include "rowspray/rowdetect.hpp"

namespace rowspray {

/// Synthetic corn-field generator: straight rows of plant disks on a soil
/// background with optional dropouts, sinusoidal row wobble, and uniformly
/// scattered weed disks kept clear of the rows. The ground truth (row lines,
/// weed disks, drawn-vegetation mask) is returned alongside the raster.
///
/// Randomness comes from a std::mt19937_64 seeded with `seed`; uniform
/// variates are derived as (x >> 11) * 2^-53 from raw engine output, so a
/// given spec reproduces bit-identical output on any conforming platform.
/// Draw order: per row one wobble phase, then per plant one dropout draw;
/// afterwards per weed repeated (x, y, diameter) triples until the position
/// clears every row by row_clearance_m plus the weed radius.
struct FieldSpec {
    double extent_w_m = 50.0;
    double extent_h_m = 30.0;
    double gsd_m = 0.0063;
    double row_spacing_m = 0.762;  // 30 in
    double plant_diameter_m = 0.12;
    double plant_spacing_m = 0.18;
    double plant_dropout_prob = 0.0;
    double weed_density_per_m2 = 0.0;
    double weed_diameter_min_m = 0.03;
    double weed_diameter_max_m = 0.12;
    double row_wobble_amplitude_px = 0.0;
    double row_clearance_m = 0.0889;  // keep weeds outside the crop buffer
    std::uint64_t seed = 0;
    bool hard_palette = false;  // low segmentation margin around the default threshold
    Point2 origin{0.0, 0.0};    // world position of the upper-left pixel center

    void validate() const;
};

struct WeedDisk {
    Point2 center;  // world coordinates
    double radius_m = 0.0;
};

struct GroundTruth {
    std::vector<RowLine> rows;
    std::vector<WeedDisk> weeds;
    BinaryMask vegetation;  // exactly the pixels drawn as plants or weeds
};

struct SynthField {
    Raster raster;
    GroundTruth truth;
};

SynthField generate(const FieldSpec& spec);

/// Writes the ground truth as CSV files: row lines in the detection format
/// (coordinate columns only) and weed disks as x_m,y_m,radius_m.
void truth_to_files(const GroundTruth& truth, const std::string& rows_csv_path,
                    const std::string& weeds_csv_path);
GroundTruth truth_from_files(const std::string& rows_csv_path,
                             const std::string& weeds_csv_path);

namespace detail {

inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

}  // namespace rowspray
