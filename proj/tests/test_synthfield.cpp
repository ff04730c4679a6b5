#include <doctest.h>

#include <cmath>

#include "rowspray/rowdetect.hpp"
#include "rowspray/synthfield.hpp"
#include "rowspray/weedmap.hpp"
#include "test_util.hpp"

using namespace rowspray;
using rowspray::test::TempDir;

namespace {

FieldSpec small_spec() {
    FieldSpec spec;
    spec.extent_w_m = 6.0;
    spec.extent_h_m = 4.0;
    spec.seed = 42;
    return spec;
}

}  // namespace

TEST_CASE("row layout arithmetic") {
    FieldSpec spec = small_spec();
    spec.extent_w_m = 10.0;
    spec.extent_h_m = 10.0;
    const SynthField field = generate(spec);
    CHECK(field.truth.rows.size() == 13);  // floor(10 / 0.762)
    // Rows start half a spacing from the top edge and stay parallel.
    const double first_y = line_position(field.truth.rows.front());
    CHECK(first_y == doctest::Approx(-0.5 * 0.762 + 0.5 * spec.gsd_m).epsilon(1e-6));
    for (std::size_t i = 1; i < field.truth.rows.size(); ++i) {
        const double gap = line_position(field.truth.rows[i - 1]) -
                           line_position(field.truth.rows[i]);
        CHECK(gap == doctest::Approx(0.762).epsilon(1e-9));
    }
}

TEST_CASE("extent too small for one row") {
    FieldSpec spec = small_spec();
    spec.extent_h_m = 0.5;
    CHECK_THROWS_AS(generate(spec), InvalidInputError);
}

TEST_CASE("fixed seed reproduces bit-identical output") {
    FieldSpec spec = small_spec();
    spec.plant_dropout_prob = 0.2;
    spec.weed_density_per_m2 = 1.0;
    spec.row_wobble_amplitude_px = 2.0;
    const SynthField a = generate(spec);
    const SynthField b = generate(spec);
    CHECK(a.raster.samples() == b.raster.samples());
    CHECK(a.truth.vegetation == b.truth.vegetation);
    REQUIRE(a.truth.weeds.size() == b.truth.weeds.size());
    for (std::size_t i = 0; i < a.truth.weeds.size(); ++i) {
        CHECK(a.truth.weeds[i].center.x == b.truth.weeds[i].center.x);
        CHECK(a.truth.weeds[i].radius_m == b.truth.weeds[i].radius_m);
    }

    FieldSpec other = spec;
    other.seed = 43;
    const SynthField c = generate(other);
    CHECK(a.raster.samples() != c.raster.samples());
}

TEST_CASE("weed-free field vegetation hugs the truth lines") {
    FieldSpec spec = small_spec();
    spec.plant_dropout_prob = 0.0;
    spec.weed_density_per_m2 = 0.0;
    spec.row_wobble_amplitude_px = 0.0;
    const SynthField field = generate(spec);
    CHECK(field.truth.weeds.empty());

    const double max_dist = 0.5 * spec.plant_diameter_m + spec.gsd_m;
    field.truth.vegetation.for_each_set([&](int col, int row) {
        const Point2 p = field.truth.vegetation.geo().pixel_to_world(col, row);
        double best = 1e9;
        for (const RowLine& line : field.truth.rows)
            best = std::min(best, std::abs(p.y - line_position(line)));
        CHECK(best <= max_dist);
    });
}

TEST_CASE("segmentation oracle: threshold reproduces the drawn mask exactly") {
    for (const bool hard : {false, true}) {
        FieldSpec spec = small_spec();
        spec.weed_density_per_m2 = 0.8;
        spec.plant_dropout_prob = 0.1;
        spec.hard_palette = hard;
        const SynthField field = generate(spec);
        const ScalarField exgi = compute_exgi(field.raster);
        const BinaryMask mask = threshold_mask(exgi, 0.08);
        CHECK(mask == field.truth.vegetation);
    }
}

TEST_CASE("weed placement respects the row clearance") {
    FieldSpec spec = small_spec();
    spec.weed_density_per_m2 = 2.0;
    const SynthField field = generate(spec);
    REQUIRE_FALSE(field.truth.weeds.empty());
    for (const WeedDisk& weed : field.truth.weeds) {
        double best = 1e9;
        for (const RowLine& line : field.truth.rows)
            best = std::min(best, std::abs(weed.center.y - line_position(line)));
        CHECK(best >= spec.row_clearance_m + weed.radius_m - 1e-9);
    }
}

TEST_CASE("ground truth file round trip") {
    TempDir tmp("truth");
    FieldSpec spec = small_spec();
    spec.weed_density_per_m2 = 1.0;
    const SynthField field = generate(spec);

    truth_to_files(field.truth, tmp.file("rows.csv"), tmp.file("weeds.csv"));
    const GroundTruth loaded = truth_from_files(tmp.file("rows.csv"), tmp.file("weeds.csv"));
    REQUIRE(loaded.rows.size() == field.truth.rows.size());
    REQUIRE(loaded.weeds.size() == field.truth.weeds.size());
    for (std::size_t i = 0; i < loaded.rows.size(); ++i) {
        CHECK(std::abs(line_position(loaded.rows[i]) - line_position(field.truth.rows[i])) <
              1e-9);
        CHECK(std::abs(loaded.rows[i].a.x - field.truth.rows[i].a.x) < 1e-9);
    }
    for (std::size_t i = 0; i < loaded.weeds.size(); ++i) {
        CHECK(std::abs(loaded.weeds[i].center.x - field.truth.weeds[i].center.x) < 1e-9);
        CHECK(std::abs(loaded.weeds[i].radius_m - field.truth.weeds[i].radius_m) < 1e-9);
    }

    SUBCASE("empty ground truth writes valid empty files") {
        GroundTruth empty;
        truth_to_files(empty, tmp.file("er.csv"), tmp.file("ew.csv"));
        const GroundTruth loaded_empty = truth_from_files(tmp.file("er.csv"), tmp.file("ew.csv"));
        CHECK(loaded_empty.rows.empty());
        CHECK(loaded_empty.weeds.empty());
    }
}

TEST_CASE("detection oracle: generated rows are recovered perfectly") {
    FieldSpec spec = small_spec();
    spec.extent_w_m = 10.0;
    spec.extent_h_m = 8.0;
    spec.plant_dropout_prob = 0.0;
    spec.weed_density_per_m2 = 0.4;
    const SynthField field = generate(spec);
    const BinaryMask mask = threshold_mask(compute_exgi(field.raster), 0.08);

    RowDetectParams params;
    params.tiles.tile_width = mask.width();
    params.tiles.tile_height = mask.height();
    params.row_spacing_m = spec.row_spacing_m;
    params.merge_duplicates = true;
    const auto lines = detect_rows(mask, params);
    const auto eval = evaluate_detection(lines, field.truth.rows, 0.25 * spec.row_spacing_m);
    CHECK(*eval.recall == 1.0);
    CHECK(*eval.precision == 1.0);
}

TEST_CASE("generated weeds stay outside the crop buffer") {
    // End-to-end consistency with the weed mapper: buffering the truth rows
    // and subtracting must leave exactly the weed disks.
    FieldSpec spec = small_spec();
    spec.weed_density_per_m2 = 1.5;
    const SynthField field = generate(spec);
    const BinaryMask veg = field.truth.vegetation;
    const BinaryMask crop = buffer_rows(field.truth.rows, BufferSpec{spec.row_clearance_m},
                                        veg.geo(), veg.width(), veg.height());
    const BinaryMask weeds = extract_weeds(veg, crop);
    // Every weed survives the buffer subtraction (disks may touch each
    // other, so regions can only undercount).
    REQUIRE_FALSE(field.truth.weeds.empty());
    for (const WeedDisk& weed : field.truth.weeds) {
        const Point2 px = weeds.geo().world_to_pixel(weed.center.x, weed.center.y);
        CHECK(weeds.get(static_cast<int>(std::lround(px.x)),
                        static_cast<int>(std::lround(px.y))));
    }
    const auto regions = connected_components(weeds);
    CHECK(regions.size() <= field.truth.weeds.size());
    CHECK(regions.size() >= field.truth.weeds.size() / 2);
}
