// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 drives the installed CLI binary end to end; pass its
// path with --cli (default: ./rowspray next to this binary).

#include <chrono>
#include <fstream>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rowspray/analysis.hpp"
#include "rowspray/digest.hpp"
#include "rowspray/pipeline.hpp"
#include "rowspray/prescription.hpp"
#include "rowspray/raster_io.hpp"
#include "rowspray/report.hpp"
#include "rowspray/rowdetect.hpp"
#include "rowspray/sprayersim.hpp"
#include "rowspray/synthfield.hpp"
#include "rowspray/weedmap.hpp"

using namespace rowspray;

namespace {

struct Criterion {
    std::string name;
    std::function<void(std::ostream&)> run;  // throws on failure
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

void require_close(double actual, double expected, double tol, const std::string& what) {
    if (!(std::abs(actual - expected) <= tol))
        throw Failure(fmt::format("{}: got {}, want {} +- {}", what, actual, expected, tol));
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------

void criterion_metric_arithmetic(std::ostream& log) {
    const auto e = DetectionEvaluation::from_counts(2313, 12, 8, 0);
    require(e.precision && e.recall && e.f1 && e.accuracy, "metrics must be defined");
    require_close(*e.recall, 0.9966, 1e-4, "recall");
    require_close(*e.f1, 0.9949, 2e-3, "f1 vs published");
    require_close(*e.precision, 0.99484, 5e-6, "precision (formula value)");
    require_close(*e.accuracy, 0.99143, 5e-6, "accuracy (formula value)");
    require(*e.precision == 2313.0 / 2325.0, "precision must equal the exact ratio");
    require(*e.accuracy == 2313.0 / 2333.0, "accuracy must equal the exact ratio");
    log << fmt::format("precision={:.6f} recall={:.6f} f1={:.6f} accuracy={:.6f}", *e.precision,
                       *e.recall, *e.f1, *e.accuracy);
}

void criterion_savings_arithmetic(std::ostream& log) {
    const AccuracyReport r = savings_report(7919.6, 30457.0);
    require_close(r.savings_frac, 0.2600, 1e-4, "savings fraction");
    const double implied = implied_expected_no_spray_m2(7919.6, 0.7842);
    require_close(implied, 10099.0, 1.0, "implied expected no-spray area");
    log << fmt::format("savings_frac={:.5f} implied_expected={:.1f} m^2", r.savings_frac,
                       implied);
}

void criterion_synthetic_detection(std::ostream& log) {
    const auto t0 = std::chrono::steady_clock::now();

    FieldSpec spec;
    spec.extent_w_m = 50.0;
    spec.extent_h_m = 30.0;
    spec.gsd_m = 0.0063;
    spec.row_spacing_m = 0.762;
    spec.plant_dropout_prob = 0.1;
    spec.weed_density_per_m2 = 0.5;
    spec.seed = 42;
    const SynthField field = generate(spec);

    const ScalarField exgi = compute_exgi(field.raster);
    const BinaryMask mask = threshold_mask(exgi, 0.08);

    RowDetectParams params;
    params.tiles.tile_width = mask.width();  // one tile column, default tile rows
    params.tiles.tile_height = 2000;
    params.row_spacing_m = spec.row_spacing_m;
    params.merge_duplicates = true;
    const std::vector<RowLine> lines = detect_rows(mask, params);

    const DetectionEvaluation e = evaluate_detection(lines, field.truth.rows, 0.19);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    require(field.truth.rows.size() == 39, "fixture must have 39 rows");
    require(e.recall.has_value() && e.precision.has_value(), "metrics defined");
    require(*e.recall == 1.0,
            fmt::format("recall 1.0 required, got {} (tp={} fn={})", *e.recall, e.tp, e.fn));
    require(*e.precision == 1.0,
            fmt::format("precision 1.0 required, got {} (fp={})", *e.precision, e.fp));
    require(seconds < 30.0, fmt::format("runtime {:.1f}s exceeds 30s", seconds));
    log << fmt::format("rows={} tp={} fp={} fn={} runtime={:.2f}s", lines.size(), e.tp, e.fp,
                       e.fn, seconds);
}

void criterion_weed_partition(std::ostream& log) {
    std::mt19937_64 rng(2024);
    GeoTransform geo;
    geo.pixel_size_x = 0.0063;
    geo.pixel_size_y = -0.0063;
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 8 + static_cast<int>(rng() % 56);
        const int h = 8 + static_cast<int>(rng() % 56);
        BinaryMask veg(w, h, geo), zone(w, h, geo);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                if (unit(rng) < 0.4) veg.set(c, r);
                if (unit(rng) < 0.3) zone.set(c, r);
            }
        const BinaryMask weeds = extract_weeds(veg, zone);
        require(weeds.or_mask(veg.and_mask(zone)) == veg, "weeds U (veg ^ zone) != veg");
        require(weeds.and_mask(zone).popcount() == 0, "weeds intersect the crop zone");
        ++checked;
    }
    log << fmt::format("{} randomized masks", checked);
}

void criterion_grid_decision_oracle(std::ostream& log) {
    std::mt19937_64 rng(77);
    std::int64_t cells_checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int w = 32 + static_cast<int>(rng() % 225);  // up to 256
        const int h = 32 + static_cast<int>(rng() % 225);
        const double extent_w = 2.0 + unit(rng) * 6.0;
        const double extent_h = 2.0 + unit(rng) * 6.0;
        const Rect extent{0, 0, extent_w, extent_h};

        GeoTransform geo;
        geo.pixel_size_x = extent_w / w;
        geo.pixel_size_y = -extent_h / h;
        geo.origin_x = extent.x0 + 0.5 * geo.pixel_size_x;
        geo.origin_y = extent.y1 + 0.5 * geo.pixel_size_y;
        BinaryMask weeds(w, h, geo);
        const int n_weeds = static_cast<int>(rng() % 200);
        for (int i = 0; i < n_weeds; ++i)
            weeds.set(static_cast<int>(rng() % w), static_cast<int>(rng() % h));

        GridSpec spec;
        spec.cell_across_m = 0.5 + unit(rng) * 1.5;
        spec.cell_along_m = 0.5 + unit(rng) * 1.5;
        spec.travel = (rng() & 1) ? Axis::Y : Axis::X;
        PrescriptionMap map = build_grid(extent, spec);
        assign_rates(map, weeds);

        // Independent oracle: for every pixel, find its cell by scanning the
        // cell rectangles; tally and compare cell for cell.
        std::vector<std::int64_t> counts(map.cells.size(), 0);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (!weeds.get(c, r)) continue;
                const Point2 p = geo.pixel_to_world(c, r);
                for (std::size_t i = 0; i < map.cells.size(); ++i) {
                    if (map.cells[i].rect.contains_half_open(p)) {
                        ++counts[i];
                        break;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < map.cells.size(); ++i) {
            require(map.cells[i].weed_pixels == counts[i],
                    fmt::format("cell {} weed count mismatch: {} vs oracle {}", i,
                                map.cells[i].weed_pixels, counts[i]));
            require((map.cells[i].rate_l_per_ha > 0.0) == (counts[i] >= 1),
                    fmt::format("cell {} spray decision mismatch", i));
        }
        cells_checked += static_cast<std::int64_t>(map.cells.size());
    }
    log << fmt::format("100 masks, {} cells compared", cells_checked);
}

void criterion_sprayer_exactness(std::ostream& log) {
    // Aligned case: one nozzle over a spray cell followed by a no-spray cell.
    GridSpec spec;
    const Rect extent{0, 0, 0.509, 2 * 3.048};
    PrescriptionMap map = build_grid(extent, spec);
    map.spray_rate_l_per_ha = 140.3;
    map.cells[0].rate_l_per_ha = 140.3;
    map.cells[0].weed_pixels = 1;
    map.cells[1].rate_l_per_ha = 0.0;
    map.rates_assigned = true;

    SprayerConfig config;
    config.boom_width_m = 0.509;
    config.nozzle_spacing_m = 0.509;
    config.speed_m_s = 3.048;
    config.control_rate_hz = 10.0;

    const AsAppliedMap applied = simulate(map, config);
    require(applied.sprayed_area_m2() == 0.509 * 3.048, "aligned sprayed area must be exact");
    const AccuracyReport report = application_accuracy(applied, map);
    require(report.accuracy.has_value(), "accuracy defined");
    require_close(*report.accuracy, 1.0, 1e-12, "aligned accuracy");

    // Offset case: grid lattice shifted half a tick along travel.
    const double tick = 0.3048;
    GridSpec offset_spec;
    offset_spec.origin = Point2{0.0, 0.5 * tick};
    PrescriptionMap offset_map = build_grid(Rect{0, 0, 0.509, 4.2672}, offset_spec);
    offset_map.spray_rate_l_per_ha = 140.3;
    for (Cell& c : offset_map.cells) c.rate_l_per_ha = 0.0;
    offset_map.cell(1, 0).rate_l_per_ha = 140.3;
    offset_map.rates_assigned = true;

    const AsAppliedMap offset_applied = simulate(offset_map, config);
    // Hand oracle: ON ticks are those whose start falls inside the cell.
    double oracle = 0.0;
    for (int k = 0; k * tick < 4.2672; ++k) {
        const double y = k * tick;
        if (y >= 0.1524 && y < 0.1524 + 3.048)
            oracle += 0.509 * (std::min((k + 1) * tick, 4.2672) - y);
    }
    require(std::abs(offset_applied.sprayed_area_m2() - oracle) <= 1e-9,
            "offset sprayed area must match the hand oracle to 1e-9");
    const double symdiff = spray_symmetric_difference_m2(offset_applied, offset_map);
    require_close(symdiff, 0.509 * tick, 1e-9, "offset symmetric difference (one tick segment)");

    // Refinement: symmetric difference at 1000 Hz <= at 10 Hz.
    GridSpec rspec;
    rspec.cell_across_m = 0.5;
    rspec.cell_along_m = 1.0;
    const Rect rext{0, 0, 1.0, 6.0};
    PrescriptionMap rmap = build_grid(rext, rspec);
    rmap.spray_rate_l_per_ha = 140.3;
    std::mt19937_64 rng(5);
    for (Cell& c : rmap.cells) c.rate_l_per_ha = (rng() & 1) ? 140.3 : 0.0;
    rmap.rates_assigned = true;
    const auto symdiff_at = [&](double hz) {
        SprayerConfig c;
        c.boom_width_m = 1.0;
        c.nozzle_spacing_m = 0.5;
        c.speed_m_s = 2.917;
        c.control_rate_hz = hz;
        return spray_symmetric_difference_m2(simulate(rmap, c), rmap);
    };
    const double d10 = symdiff_at(10.0);
    const double d100 = symdiff_at(100.0);
    const double d1000 = symdiff_at(1000.0);
    require(d100 <= d10 + 1e-12 && d1000 <= d100 + 1e-12,
            fmt::format("refinement must not increase: {} {} {}", d10, d100, d1000));
    log << fmt::format("aligned accuracy=1, offset symdiff={:.6f} m^2, refinement {:.4f}"
                       " -> {:.4f} -> {:.4f} m^2",
                       symdiff, d10, d100, d1000);
}

void criterion_exgi_properties(std::ostream& log) {
    std::mt19937_64 rng(31415);
    for (int i = 0; i < 1000000; ++i) {
        const double r = unit(rng) * 1000.0;
        const double g = unit(rng) * 1000.0;
        const double b = unit(rng) * 1000.0;
        const double v = exgi_value(r, g, b);
        if (!(v >= -1.0 && v <= 2.0)) throw Failure(fmt::format("range violated: {}", v));
        const double k = std::ldexp(1.0, static_cast<int>(rng() % 21) - 10);
        if (exgi_value(k * r, k * g, k * b) != v)
            throw Failure("scale invariance violated for power-of-two factor");
    }
    // Threshold monotonicity over random fields.
    GeoTransform geo;
    geo.pixel_size_x = 1.0;
    geo.pixel_size_y = -1.0;
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField field(64, 48, geo);
        for (float& v : field.values()) v = static_cast<float>(unit(rng) * 3.0 - 1.0);
        const double t1 = unit(rng) * 2.0 - 1.0;
        const double t2 = t1 + unit(rng);
        const BinaryMask lo = threshold_mask(field, t1);
        const BinaryMask hi = threshold_mask(field, t2);
        require(hi.and_not(lo).popcount() == 0, "threshold monotonicity violated");
    }
    log << "1e6 triples, 20 random fields";
}

void criterion_t_test(std::ostream& log) {
    std::vector<std::pair<double, double>> pairs;
    for (const double d : {1.0, 2.0, 3.0, 4.0, 5.0}) pairs.emplace_back(d, 0.0);
    const TTestResult r = paired_t_test(pairs);
    require_close(r.t, 4.2426, 1e-4, "t statistic");
    require_close(r.p, 0.0132, 5e-4, "p value");
    require(r.df == 4, "df");

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 12);
        std::vector<std::pair<double, double>> sample;
        for (int i = 0; i < n; ++i) sample.emplace_back(unit(rng) * 20.0, unit(rng) * 20.0);
        const TTestResult a = paired_t_test(sample);
        if (a.zero_variance) continue;
        std::vector<std::pair<double, double>> swapped, shifted;
        for (const auto& [x, y] : sample) {
            swapped.emplace_back(y, x);
            shifted.emplace_back(x + 55.5, y + 55.5);
        }
        const TTestResult s = paired_t_test(swapped);
        const TTestResult h = paired_t_test(shifted);
        require(std::abs(s.t + a.t) <= 1e-9, "antisymmetry of t");
        require(std::abs(s.p - a.p) <= 1e-9, "p preserved under swap");
        require(std::abs(h.t - a.t) <= 1e-6, "shift invariance of t");
        require(std::abs(h.p - a.p) <= 1e-6, "shift invariance of p");
        require(a.p >= 0.0 && a.p <= 1.0, "p in [0,1]");
    }
    log << fmt::format("t={:.4f} p={:.5f}, 100 random paired samples", r.t, r.p);
}

// ---------------------------------------------------------------------------

std::string g_cli_path;

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli_path + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

void criterion_pipeline_composition(std::ostream& log) {
    namespace fs = std::filesystem;
    require(fs::exists(g_cli_path), "CLI binary not found at " + g_cli_path);
    const fs::path root = fs::temp_directory_path() / "rowspray_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto p = [&](const std::string& rel) { return (root / rel).string(); };

    // Small but nontrivial fixture.
    const std::string synth_flags =
        " --seed 4242 --row-spacing 0.762";
    {
        std::ofstream cfg(p("cfg.json"));
        cfg << R"({"synth": {"extent_w_m": 9.0, "extent_h_m": 7.0, "weed_density_per_m2": 1.0,)"
            << R"( "plant_dropout_prob": 0.05},)"
            << R"( "rowdetect": {"merge_lines": true},)"
            << R"( "sprayer": {"boom_width_m": 9.5, "nozzle_spacing_m": 0.5}})";
    }
    require(run_cli("synth --config " + p("cfg.json") + " --out-dir " + p("field") +
                    synth_flags) == 0,
            "synth failed");

    // Chained pipeline.
    require(run_cli("pipeline --config " + p("cfg.json") + " --input " + p("field/field.png") +
                    " --out-dir " + p("chained") + " --simulate" + synth_flags) == 0,
            "pipeline failed");

    // Stage-by-stage.
    fs::create_directories(p("manual"));
    require(run_cli("segment --config " + p("cfg.json") + " --input " + p("field/field.png") +
                    " --output " + p("manual/mask.png") + " --field-output " +
                    p("manual/exgi.png") + synth_flags) == 0,
            "segment failed");
    require(run_cli("detect-rows --config " + p("cfg.json") + " --input " +
                    p("manual/mask.png") + " --output " + p("manual/rows.csv") + synth_flags) ==
                0,
            "detect-rows failed");
    require(run_cli("weed-map --config " + p("cfg.json") + " --mask " + p("manual/mask.png") +
                    " --rows " + p("manual/rows.csv") + " --output " + p("manual/weeds.png") +
                    " --regions " + p("manual/weed_regions.csv") + synth_flags) == 0,
            "weed-map failed");
    require(run_cli("prescribe --config " + p("cfg.json") + " --weeds " + p("manual/weeds.png") +
                    " --output " + p("manual/prescription.json") + " --report " +
                    p("manual/prescription_stats.txt") + synth_flags) == 0,
            "prescribe failed");
    require(run_cli("simulate-spray --config " + p("cfg.json") + " --prescription " +
                    p("manual/prescription.json") + " --output " + p("manual/as_applied.json") +
                    " --report " + p("manual/accuracy.txt") + synth_flags) == 0,
            "simulate-spray failed");

    const std::pair<const char*, const char*> artifacts[] = {
        {"chained/mask.png", "manual/mask.png"},
        {"chained/exgi.png", "manual/exgi.png"},
        {"chained/rows.csv", "manual/rows.csv"},
        {"chained/weeds.png", "manual/weeds.png"},
        {"chained/weed_regions.csv", "manual/weed_regions.csv"},
        {"chained/prescription.json", "manual/prescription.json"},
        {"chained/prescription_stats.txt", "manual/prescription_stats.txt"},
        {"chained/as_applied.json", "manual/as_applied.json"},
        {"chained/accuracy.txt", "manual/accuracy.txt"},
    };
    for (const auto& [a, b] : artifacts)
        require(sha256_file(p(a)) == sha256_file(p(b)),
                fmt::format("digest mismatch: {} vs {}", a, b));

    // Lossless document round trips.
    const PrescriptionMap rx = import_prescription(p("chained/prescription.json"));
    export_prescription(rx, p("rx_again.json"));
    require(prescription_equal(rx, import_prescription(p("rx_again.json")), 1e-6),
            "prescription round trip not lossless");
    const AsAppliedMap aa = import_as_applied(p("chained/as_applied.json"));
    export_as_applied(aa, p("aa_again.json"));
    require(as_applied_equal(aa, import_as_applied(p("aa_again.json")), 1e-6),
            "as-applied round trip not lossless");

    // Evaluate the chained detection against the generator's ground truth.
    require(run_cli("evaluate-rows --detected " + p("chained/rows.csv") + " --truth " +
                    p("field/truth_rows.csv") + " --report " + p("eval.txt")) == 0,
            "evaluate-rows failed");
    const auto kv = read_report(p("eval.txt"));
    require(kv.at("recall") == "1", "pipeline recall must be 1, got " + kv.at("recall"));
    require(kv.at("precision") == "1",
            "pipeline precision must be 1, got " + kv.at("precision"));

    log << fmt::format("{} artifacts digest-identical, round trips lossless, recall=precision=1",
                       std::size(artifacts));
    fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];
    }
    if (g_cli_path.empty()) {
        g_cli_path =
            (std::filesystem::path(argv[0]).parent_path() / ".." / "tools" / "rowspray").string();
    }

    const std::vector<Criterion> criteria = {
        {"metric-arithmetic", criterion_metric_arithmetic},
        {"savings-arithmetic", criterion_savings_arithmetic},
        {"synthetic-end-to-end-detection", criterion_synthetic_detection},
        {"weed-mask-partition", criterion_weed_partition},
        {"grid-decision-oracle", criterion_grid_decision_oracle},
        {"sprayer-exactness", criterion_sprayer_exactness},
        {"exgi-properties", criterion_exgi_properties},
        {"t-test-oracle", criterion_t_test},
        {"pipeline-composition", criterion_pipeline_composition},
    };

    int failures = 0;
    const auto suite_start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        std::ostringstream detail;
        bool ok = true;
        std::string error;
        try {
            criteria[i].run(detail);
        } catch (const std::exception& e) {
            ok = false;
            error = e.what();
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        if (ok) {
            std::cout << fmt::format("[PASS] {} {:<32} ({:7.1f} ms)  {}\n", i + 1,
                                     criteria[i].name, ms, detail.str());
        } else {
            ++failures;
            std::cout << fmt::format("[FAIL] {} {:<32} ({:7.1f} ms)  {}\n", i + 1,
                                     criteria[i].name, ms, error);
        }
    }
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
    std::cout << fmt::format("{}/{} criteria passed in {:.1f}s\n", criteria.size() - failures,
                             criteria.size(), total);
    return failures == 0 ? 0 : 1;
}
