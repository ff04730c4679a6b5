#include "rowspray/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rowspray/analysis.hpp"
#include "rowspray/digest.hpp"
#include "rowspray/overlay.hpp"
#include "rowspray/raster_io.hpp"
#include "rowspray/report.hpp"

namespace rowspray {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
public:
    explicit StageTimer(std::string name) : start_(Clock::now()) { record_.name = std::move(name); }

    void add_input(const std::string& path) { record_.inputs[path] = sha256_file(path); }
    void add_input_with_world(const std::string& path) {
        add_input(path);
        add_input(world_file_path(path));
    }
    void add_output(const std::string& path) { record_.outputs[path] = sha256_file(path); }
    void add_output_with_world(const std::string& path) {
        add_output(path);
        add_output(world_file_path(path));
    }

    StageRecord finish() {
        record_.elapsed_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
        return std::move(record_);
    }

private:
    StageRecord record_;
    Clock::time_point start_;
};

ReportEntries accuracy_entries(const AccuracyReport& r) {
    return {
        {"expected_no_spray_m2", fmt::format("{}", r.expected_no_spray_m2)},
        {"measured_no_spray_m2", fmt::format("{}", r.measured_no_spray_m2)},
        {"sprayed_m2", fmt::format("{}", r.sprayed_m2)},
        {"total_m2", fmt::format("{}", r.total_m2)},
        {"savings_frac", fmt::format("{}", r.savings_frac)},
        {"accuracy", format_optional(r.accuracy)},
    };
}

}  // namespace

StageRecord run_segment(const RunConfig& config, const SegmentPaths& paths) {
    StageTimer timer("segment");
    timer.add_input_with_world(paths.input_raster);
    const Raster raster = load_raster(paths.input_raster);
    const ScalarField exgi = compute_exgi(raster, config.threads);
    const BinaryMask mask = threshold_mask(exgi, config.exgi_threshold, config.threads);
    save_mask(mask, paths.output_mask);
    timer.add_output_with_world(paths.output_mask);
    if (!paths.output_field.empty()) {
        save_field(exgi, paths.output_field);
        timer.add_output_with_world(paths.output_field);
    }
    return timer.finish();
}

StageRecord run_detect_rows(const RunConfig& config, const DetectRowsPaths& paths) {
    StageTimer timer("detect-rows");
    timer.add_input_with_world(paths.input_mask);
    const BinaryMask mask = load_mask(paths.input_mask);
    const std::vector<RowLine> lines =
        detect_rows(mask, config.rowdetect_params(-mask.geo().pixel_size_y));
    write_row_lines_csv(paths.output_rows_csv, lines);
    timer.add_output(paths.output_rows_csv);
    return timer.finish();
}

StageRecord run_weed_map(const RunConfig& config, const WeedMapPaths& paths) {
    StageTimer timer("weed-map");
    timer.add_input_with_world(paths.input_mask);
    timer.add_input(paths.input_rows_csv);
    const BinaryMask vegetation = load_mask(paths.input_mask);
    const std::vector<RowLine> lines = read_row_lines_csv(paths.input_rows_csv);
    const BinaryMask crop_zone = buffer_rows(lines, BufferSpec{config.buffer_half_width_m},
                                             vegetation.geo(), vegetation.width(),
                                             vegetation.height());
    const BinaryMask weeds = extract_weeds(vegetation, crop_zone);
    save_mask(weeds, paths.output_weeds);
    timer.add_output_with_world(paths.output_weeds);
    if (!paths.output_regions_csv.empty()) {
        write_regions_csv(paths.output_regions_csv, connected_components(weeds));
        timer.add_output(paths.output_regions_csv);
    }
    return timer.finish();
}

StageRecord run_prescribe(const RunConfig& config, const PrescribePaths& paths) {
    StageTimer timer("prescribe");
    timer.add_input_with_world(paths.input_weeds);
    const BinaryMask weeds = load_mask(paths.input_weeds);
    GridSpec spec;
    spec.cell_across_m = config.cell_across_m;
    spec.cell_along_m = config.cell_along_m;
    spec.travel = config.travel_axis;
    PrescriptionMap map = build_grid(weeds.geo().bounds(weeds.width(), weeds.height()), spec);
    map.spray_rate_l_per_ha = config.spray_rate_l_per_ha;
    assign_rates(map, weeds);
    export_prescription(map, paths.output_prescription);
    timer.add_output(paths.output_prescription);
    if (!paths.output_report.empty()) {
        const PrescriptionStats stats = prescription_stats(map);
        write_report(paths.output_report,
                     {{"cells_total", fmt::format("{}", stats.cells_total)},
                      {"cells_no_spray", fmt::format("{}", stats.cells_no_spray)},
                      {"cells_spray", fmt::format("{}", stats.cells_spray)},
                      {"frac_no_spray", fmt::format("{}", stats.frac_no_spray)},
                      {"area_no_spray_m2", fmt::format("{}", stats.area_no_spray_m2)},
                      {"area_spray_m2", fmt::format("{}", stats.area_spray_m2)},
                      {"area_total_m2", fmt::format("{}", stats.area_total_m2)}});
        timer.add_output(paths.output_report);
    }
    return timer.finish();
}

StageRecord run_simulate(const RunConfig& config, const SimulatePaths& paths) {
    StageTimer timer("simulate-spray");
    timer.add_input(paths.input_prescription);
    const PrescriptionMap map = import_prescription(paths.input_prescription);
    const AsAppliedMap as_applied = simulate(map, config.sprayer);
    export_as_applied(as_applied, paths.output_as_applied);
    timer.add_output(paths.output_as_applied);
    if (!paths.output_report.empty()) {
        write_report(paths.output_report, accuracy_entries(application_accuracy(as_applied, map)));
        timer.add_output(paths.output_report);
    }
    return timer.finish();
}

StageRecord run_evaluate_rows(const RunConfig& config, const EvaluateRowsPaths& paths) {
    StageTimer timer("evaluate-rows");
    DetectionEvaluation eval;
    if (!paths.input_counts.empty()) {
        timer.add_input(paths.input_counts);
        const auto kv = read_report(paths.input_counts);
        const auto count = [&](const char* key) -> std::int64_t {
            const auto it = kv.find(key);
            if (it == kv.end()) throw ParseError(paths.input_counts + ": missing key " + key);
            try {
                return std::stoll(it->second);
            } catch (const std::exception&) {
                throw ParseError(paths.input_counts + ": non-integer value for " + key);
            }
        };
        eval = DetectionEvaluation::from_counts(count("tp"), count("fp"), count("fn"), count("tn"));
    } else {
        timer.add_input(paths.input_detected_csv);
        timer.add_input(paths.input_truth_csv);
        const std::vector<RowLine> detected = read_row_lines_csv(paths.input_detected_csv);
        const std::vector<RowLine> truth = read_row_lines_csv(paths.input_truth_csv);
        eval = evaluate_detection_by_column(detected, truth, config.resolved_match_tolerance());
    }
    write_report(paths.output_report, {{"tp", fmt::format("{}", eval.tp)},
                                       {"fp", fmt::format("{}", eval.fp)},
                                       {"fn", fmt::format("{}", eval.fn)},
                                       {"tn", fmt::format("{}", eval.tn)},
                                       {"precision", format_optional(eval.precision)},
                                       {"recall", format_optional(eval.recall)},
                                       {"f1", format_optional(eval.f1)},
                                       {"accuracy", format_optional(eval.accuracy)}});
    timer.add_output(paths.output_report);
    return timer.finish();
}

StageRecord run_stats(const RunConfig& config, const StatsPaths& paths) {
    StageTimer timer("stats");
    timer.add_input(paths.input_observations_csv);
    const std::vector<PlotObservation> obs = read_observations_csv(paths.input_observations_csv);
    const auto pairs = pair_observations(obs);
    const TTestResult t = paired_t_test(pairs, config.alpha);
    const std::optional<double> ratio = group_ratio(obs);
    write_report(paths.output_report,
                 {{"pairs", fmt::format("{}", pairs.size())},
                  {"t", fmt::format("{}", t.t)},
                  {"df", fmt::format("{}", t.df)},
                  {"p", fmt::format("{}", t.p)},
                  {"alpha", fmt::format("{}", config.alpha)},
                  {"significant", t.significant ? "true" : "false"},
                  {"zero_variance", t.zero_variance ? "true" : "false"},
                  {"group_ratio_sswc_over_no_sswc", format_optional(ratio)}});
    timer.add_output(paths.output_report);
    return timer.finish();
}

StageRecord run_synth(const RunConfig& config, const SynthPaths& paths) {
    StageTimer timer("synth");
    const SynthField field = generate(config.field);
    save_raster(field.raster, paths.output_raster);
    timer.add_output_with_world(paths.output_raster);
    truth_to_files(field.truth, paths.output_truth_rows_csv, paths.output_truth_weeds_csv);
    timer.add_output(paths.output_truth_rows_csv);
    timer.add_output(paths.output_truth_weeds_csv);
    return timer.finish();
}

namespace {

std::string join(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string pipeline_mask_path(const std::string& dir) { return join(dir, "mask.png"); }
std::string pipeline_field_path(const std::string& dir) { return join(dir, "exgi.png"); }
std::string pipeline_rows_path(const std::string& dir) { return join(dir, "rows.csv"); }
std::string pipeline_weeds_path(const std::string& dir) { return join(dir, "weeds.png"); }
std::string pipeline_regions_path(const std::string& dir) { return join(dir, "weed_regions.csv"); }
std::string pipeline_prescription_path(const std::string& dir) {
    return join(dir, "prescription.json");
}
std::string pipeline_prescription_report_path(const std::string& dir) {
    return join(dir, "prescription_stats.txt");
}
std::string pipeline_as_applied_path(const std::string& dir) { return join(dir, "as_applied.json"); }
std::string pipeline_accuracy_report_path(const std::string& dir) {
    return join(dir, "accuracy.txt");
}

std::vector<StageRecord> run_pipeline(const RunConfig& config, const PipelinePaths& paths) {
    std::filesystem::create_directories(paths.output_dir);
    const std::string& dir = paths.output_dir;

    std::vector<StageRecord> stages;
    stages.push_back(run_segment(
        config, {paths.input_raster, pipeline_mask_path(dir), pipeline_field_path(dir)}));
    stages.push_back(run_detect_rows(config, {pipeline_mask_path(dir), pipeline_rows_path(dir)}));
    stages.push_back(run_weed_map(config, {pipeline_mask_path(dir), pipeline_rows_path(dir),
                                           pipeline_weeds_path(dir), pipeline_regions_path(dir)}));
    stages.push_back(run_prescribe(config, {pipeline_weeds_path(dir),
                                            pipeline_prescription_path(dir),
                                            pipeline_prescription_report_path(dir)}));
    if (paths.with_simulation) {
        stages.push_back(run_simulate(config, {pipeline_prescription_path(dir),
                                               pipeline_as_applied_path(dir),
                                               pipeline_accuracy_report_path(dir)}));
    }
    if (!paths.overlay_png.empty()) {
        StageTimer timer("render-overlay");
        const Raster raster = load_raster(paths.input_raster);
        const std::vector<RowLine> lines = read_row_lines_csv(pipeline_rows_path(dir));
        const BinaryMask weeds = load_mask(pipeline_weeds_path(dir));
        const PrescriptionMap map = import_prescription(pipeline_prescription_path(dir));
        const Raster overlay = render_overlay(raster, &lines, &weeds, &map);
        save_raster(overlay, paths.overlay_png);
        timer.add_output_with_world(paths.overlay_png);
        stages.push_back(timer.finish());
    }
    return stages;
}

void write_manifest(const std::string& path, const std::string& command, const RunConfig& config,
                    const std::vector<StageRecord>& stages) {
    nlohmann::json doc;
    doc["artifact_version"] = kArtifactVersion;
    doc["command"] = command;
    doc["config"] = config_to_json(config);
    nlohmann::json stage_list = nlohmann::json::array();
    for (const StageRecord& s : stages) {
        nlohmann::json js;
        js["name"] = s.name;
        js["elapsed_ms"] = s.elapsed_ms;
        js["inputs"] = s.inputs;
        js["outputs"] = s.outputs;
        stage_list.push_back(std::move(js));
    }
    doc["stages"] = std::move(stage_list);
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);
    out << doc.dump(1, '\t') << "\n";
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace rowspray
