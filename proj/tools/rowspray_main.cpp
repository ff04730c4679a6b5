// rowspray: orthomosaic -> crop rows -> weed map -> spray prescription,
// with a section-control sprayer simulator and reporting tools.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rowspray/pipeline.hpp"
#include "rowspray/report.hpp"

namespace {

using namespace rowspray;

// Per-parameter override flags; only values the user actually set override
// the config file, which in turn overrides built-in defaults.
struct Overrides {
    std::optional<int> threads;
    std::optional<double> threshold;
    std::optional<int> tile_width;
    std::optional<int> tile_height;
    std::optional<double> row_spacing;
    std::optional<int> smooth_window;
    std::optional<int> min_distance;
    std::optional<double> min_prominence;
    std::optional<bool> merge;
    std::optional<double> merge_min_separation;
    std::optional<double> match_tolerance;
    std::optional<double> buffer_half_width;
    std::optional<double> cell_across;
    std::optional<double> cell_along;
    std::optional<double> rate;
    std::optional<std::string> travel_axis;
    std::optional<double> boom_width;
    std::optional<double> nozzle_spacing;
    std::optional<double> speed;
    std::optional<double> hz;
    std::optional<double> latency;
    std::optional<std::string> heading_axis;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
};

Axis parse_axis(const std::string& v) {
    if (v == "x" || v == "X") return Axis::X;
    if (v == "y" || v == "Y") return Axis::Y;
    throw ConfigError("axis must be \"x\" or \"y\", got \"" + v + "\"");
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.threads) config.threads = *o.threads;
    if (o.threshold) config.exgi_threshold = *o.threshold;
    if (o.tile_width) config.tile_width_px = *o.tile_width;
    if (o.tile_height) config.tile_height_px = *o.tile_height;
    if (o.row_spacing) {
        config.row_spacing_m = *o.row_spacing;
        config.field.row_spacing_m = *o.row_spacing;
    }
    if (o.smooth_window) config.smooth_window_px = *o.smooth_window;
    if (o.min_distance) config.min_distance_px = *o.min_distance;
    if (o.min_prominence) config.min_prominence = *o.min_prominence;
    if (o.merge) config.merge_lines = *o.merge;
    if (o.merge_min_separation) config.merge_min_separation_m = *o.merge_min_separation;
    if (o.match_tolerance) config.match_tolerance_m = *o.match_tolerance;
    if (o.buffer_half_width) config.buffer_half_width_m = *o.buffer_half_width;
    if (o.cell_across) config.cell_across_m = *o.cell_across;
    if (o.cell_along) config.cell_along_m = *o.cell_along;
    if (o.rate) config.spray_rate_l_per_ha = *o.rate;
    if (o.travel_axis) config.travel_axis = parse_axis(*o.travel_axis);
    if (o.boom_width) config.sprayer.boom_width_m = *o.boom_width;
    if (o.nozzle_spacing) config.sprayer.nozzle_spacing_m = *o.nozzle_spacing;
    if (o.speed) config.sprayer.speed_m_s = *o.speed;
    if (o.hz) config.sprayer.control_rate_hz = *o.hz;
    if (o.latency) config.sprayer.valve_latency_s = *o.latency;
    if (o.heading_axis) config.sprayer.heading = parse_axis(*o.heading_axis);
    if (o.seed) config.field.seed = *o.seed;
    if (o.alpha) config.alpha = *o.alpha;
    config.validate();
}

void register_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--threads", o.threads, "Worker threads for per-pixel stages");
    cmd->add_option("--threshold", o.threshold, "Excess-green segmentation threshold");
    cmd->add_option("--tile-width", o.tile_width, "Tile width in pixels");
    cmd->add_option("--tile-height", o.tile_height, "Tile height in pixels");
    cmd->add_option("--row-spacing", o.row_spacing, "Nominal crop row spacing in meters");
    cmd->add_option("--smooth-window", o.smooth_window, "Profile smoothing window in pixels (odd)");
    cmd->add_option("--min-distance", o.min_distance, "Minimum peak separation in pixels");
    cmd->add_option("--min-prominence", o.min_prominence,
                    "Minimum peak prominence as a fraction of the profile maximum");
    cmd->add_flag("--merge,!--no-merge", o.merge, "Merge duplicate lines per tile column");
    cmd->add_option("--merge-min-separation", o.merge_min_separation,
                    "Merge lines closer than this many meters");
    cmd->add_option("--tolerance", o.match_tolerance, "Row match tolerance in meters");
    cmd->add_option("--buffer-half-width", o.buffer_half_width,
                    "Crop row buffer half width in meters");
    cmd->add_option("--cell-across", o.cell_across, "Grid cell size across travel in meters");
    cmd->add_option("--cell-along", o.cell_along, "Grid cell size along travel in meters");
    cmd->add_option("--rate", o.rate, "Spray application rate in L/ha");
    cmd->add_option("--travel-axis", o.travel_axis, "Grid travel axis (x or y)");
    cmd->add_option("--boom-width", o.boom_width, "Sprayer boom width in meters");
    cmd->add_option("--nozzle-spacing", o.nozzle_spacing, "Nozzle spacing in meters");
    cmd->add_option("--speed", o.speed, "Sprayer ground speed in m/s");
    cmd->add_option("--hz", o.hz, "Sprayer control rate in Hz");
    cmd->add_option("--latency", o.latency, "Valve actuation latency in seconds");
    cmd->add_option("--heading-axis", o.heading_axis, "Sprayer travel axis (x or y)");
    cmd->add_option("--seed", o.seed, "Synthetic field random seed");
    cmd->add_option("--alpha", o.alpha, "Significance level for the t test");
}

// Removes outputs created by a failed invocation so no partial files remain.
class OutputGuard {
public:
    void declare(const std::string& path) {
        if (path.empty()) return;
        if (!std::filesystem::exists(path)) created_.push_back(path);
    }
    void declare_with_world(const std::string& path) {
        if (path.empty()) return;
        declare(path);
        declare(world_file_path_local(path));
    }
    void commit() { created_.clear(); }
    ~OutputGuard() {
        std::error_code ec;
        for (const std::string& p : created_) std::filesystem::remove(p, ec);
    }

private:
    static std::string world_file_path_local(const std::string& image_path) {
        std::filesystem::path p(image_path);
        p.replace_extension(".pgw");
        return p.string();
    }
    std::vector<std::string> created_;
};

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const DecodeError*>(&e) ||
        dynamic_cast<const GeoreferenceError*>(&e) || dynamic_cast<const ParseError*>(&e))
        return 3;
    if (dynamic_cast<const Error*>(&e)) return 4;
    return 4;
}

const char* error_class_for(int code) {
    switch (code) {
        case 2:
            return "config";
        case 3:
            return "input";
        default:
            return "validation";
    }
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crop-row based spray prescription toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;
    std::string manifest_path;
    std::string report_path;

    // segment
    auto* segment = app.add_subcommand("segment", "Vegetation mask from an RGB orthomosaic");
    std::string seg_input, seg_mask, seg_field;
    segment->add_option("--input", seg_input, "Input RGB PNG (+ .pgw)")->required();
    segment->add_option("--output", seg_mask, "Output mask PNG")->required();
    segment->add_option("--field-output", seg_field, "Optional rescaled index PNG");

    // detect-rows
    auto* detect = app.add_subcommand("detect-rows", "Detect crop rows in a vegetation mask");
    std::string det_input, det_output;
    detect->add_option("--input", det_input, "Vegetation mask PNG (+ .pgw)")->required();
    detect->add_option("--output", det_output, "Output row-line CSV")->required();

    // weed-map
    auto* weedmap_cmd = app.add_subcommand("weed-map", "Remove buffered rows; residue is weeds");
    std::string wm_mask, wm_rows, wm_output, wm_regions;
    weedmap_cmd->add_option("--mask", wm_mask, "Vegetation mask PNG (+ .pgw)")->required();
    weedmap_cmd->add_option("--rows", wm_rows, "Row-line CSV")->required();
    weedmap_cmd->add_option("--output", wm_output, "Output weed mask PNG")->required();
    weedmap_cmd->add_option("--regions", wm_regions, "Optional weed-region CSV");

    // prescribe
    auto* prescribe = app.add_subcommand("prescribe", "Grid spray decisions over the weed mask");
    std::string rx_weeds, rx_output;
    prescribe->add_option("--weeds", rx_weeds, "Weed mask PNG (+ .pgw)")->required();
    prescribe->add_option("--output", rx_output, "Output prescription JSON")->required();

    // simulate-spray
    auto* simulate_cmd = app.add_subcommand("simulate-spray", "Replay a prescription map");
    std::string sim_input, sim_output;
    simulate_cmd->add_option("--prescription", sim_input, "Prescription JSON")->required();
    simulate_cmd->add_option("--output", sim_output, "Output as-applied JSON")->required();

    // evaluate-rows
    auto* evaluate = app.add_subcommand("evaluate-rows", "Score detected rows against ground truth");
    std::string ev_detected, ev_truth, ev_counts;
    evaluate->add_option("--detected", ev_detected, "Detected row CSV");
    evaluate->add_option("--truth", ev_truth, "Ground-truth row CSV");
    evaluate->add_option("--counts", ev_counts, "Key-value file with tp/fp/fn/tn counts");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Treatment comparison from plot observations");
    std::string st_obs;
    stats_cmd->add_option("--observations", st_obs, "CSV plot_id,treatment,weed_area_m2")
        ->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic field with ground truth");
    std::string sy_out_dir;
    synth->add_option("--out-dir", sy_out_dir, "Output directory")->required();

    // pipeline
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "segment -> detect-rows -> weed-map -> prescribe");
    std::string pl_input, pl_out_dir, pl_overlay;
    bool pl_simulate = false;
    pipeline_cmd->add_option("--input", pl_input, "Input RGB PNG (+ .pgw)")->required();
    pipeline_cmd->add_option("--out-dir", pl_out_dir, "Output directory")->required();
    pipeline_cmd->add_flag("--simulate", pl_simulate, "Also run the sprayer simulation");
    pipeline_cmd->add_option("--overlay", pl_overlay, "Write a review overlay PNG");

    for (CLI::App* cmd : {segment, detect, weedmap_cmd, prescribe, simulate_cmd, evaluate,
                          stats_cmd, synth, pipeline_cmd}) {
        register_override_flags(cmd, overrides);
        cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        cmd->add_option("--manifest", manifest_path, "Run manifest path (JSON)");
        cmd->add_option("--report", report_path, "Report path (key = value text)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << nlohmann::json{{"error_class", "config"}, {"message", e.what()}}.dump()
                  << "\n";
        return 2;
    }

    OutputGuard guard;
    try {
        RunConfig config;
        if (!config_path.empty()) config = load_config(config_path);
        apply_overrides(config, overrides);

        std::vector<StageRecord> stages;
        std::string default_manifest;

        if (*segment) {
            guard.declare_with_world(seg_mask);
            guard.declare_with_world(seg_field);
            stages.push_back(run_segment(config, {seg_input, seg_mask, seg_field}));
            default_manifest = seg_mask + ".manifest.json";
        } else if (*detect) {
            guard.declare(det_output);
            stages.push_back(run_detect_rows(config, {det_input, det_output}));
            default_manifest = det_output + ".manifest.json";
        } else if (*weedmap_cmd) {
            guard.declare_with_world(wm_output);
            guard.declare(wm_regions);
            stages.push_back(run_weed_map(config, {wm_mask, wm_rows, wm_output, wm_regions}));
            default_manifest = wm_output + ".manifest.json";
        } else if (*prescribe) {
            if (report_path.empty()) report_path = rx_output + ".report.txt";
            guard.declare(rx_output);
            guard.declare(report_path);
            stages.push_back(run_prescribe(config, {rx_weeds, rx_output, report_path}));
            default_manifest = rx_output + ".manifest.json";
        } else if (*simulate_cmd) {
            if (report_path.empty()) report_path = sim_output + ".report.txt";
            guard.declare(sim_output);
            guard.declare(report_path);
            stages.push_back(run_simulate(config, {sim_input, sim_output, report_path}));
            default_manifest = sim_output + ".manifest.json";
        } else if (*evaluate) {
            if (ev_counts.empty() && (ev_detected.empty() || ev_truth.empty()))
                throw ConfigError("evaluate-rows needs --counts or both --detected and --truth");
            if (report_path.empty()) report_path = "evaluation.txt";
            guard.declare(report_path);
            stages.push_back(run_evaluate_rows(config, {ev_detected, ev_truth, ev_counts,
                                                        report_path}));
            default_manifest = report_path + ".manifest.json";
            const auto kv = read_report(report_path);
            for (const char* key : {"tp", "fp", "fn", "tn", "precision", "recall", "f1",
                                    "accuracy"})
                std::cout << key << " = " << kv.at(key) << "\n";
        } else if (*stats_cmd) {
            if (report_path.empty()) report_path = "stats.txt";
            guard.declare(report_path);
            stages.push_back(run_stats(config, {st_obs, report_path}));
            default_manifest = report_path + ".manifest.json";
            const auto kv = read_report(report_path);
            for (const auto& [key, value] : kv) std::cout << key << " = " << value << "\n";
        } else if (*synth) {
            std::filesystem::create_directories(sy_out_dir);
            const auto join = [&](const char* name) {
                return (std::filesystem::path(sy_out_dir) / name).string();
            };
            SynthPaths paths{join("field.png"), join("truth_rows.csv"), join("truth_weeds.csv")};
            guard.declare_with_world(paths.output_raster);
            guard.declare(paths.output_truth_rows_csv);
            guard.declare(paths.output_truth_weeds_csv);
            stages.push_back(run_synth(config, paths));
            default_manifest = join("manifest.json");
        } else if (*pipeline_cmd) {
            std::filesystem::create_directories(pl_out_dir);
            guard.declare_with_world(pipeline_mask_path(pl_out_dir));
            guard.declare_with_world(pipeline_field_path(pl_out_dir));
            guard.declare(pipeline_rows_path(pl_out_dir));
            guard.declare_with_world(pipeline_weeds_path(pl_out_dir));
            guard.declare(pipeline_regions_path(pl_out_dir));
            guard.declare(pipeline_prescription_path(pl_out_dir));
            guard.declare(pipeline_prescription_report_path(pl_out_dir));
            if (pl_simulate) {
                guard.declare(pipeline_as_applied_path(pl_out_dir));
                guard.declare(pipeline_accuracy_report_path(pl_out_dir));
            }
            guard.declare_with_world(pl_overlay);
            stages = run_pipeline(config, {pl_input, pl_out_dir, pl_simulate, pl_overlay});
            default_manifest =
                (std::filesystem::path(pl_out_dir) / "manifest.json").string();
        }

        if (manifest_path.empty()) manifest_path = default_manifest;
        if (!manifest_path.empty())
            write_manifest(manifest_path, command_line(argc, argv), config, stages);
        guard.commit();
        return 0;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        std::cerr << nlohmann::json{{"error_class", error_class_for(code)},
                                    {"message", e.what()}}
                         .dump()
                  << "\n";
        return code;
    }
}
