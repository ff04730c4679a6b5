#pragma once

#include <map>
#include <string>
#include <vector>

#include "rowspray/config.hpp"

namespace rowspray {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Record of one stage execution: wall time plus content digests of every
/// input and output file, so chained and single-stage runs can be compared.
struct StageRecord {
    std::string name;
    double elapsed_ms = 0.0;
    std::map<std::string, std::string> inputs;   // path -> sha256
    std::map<std::string, std::string> outputs;  // path -> sha256
};

struct SegmentPaths {
    std::string input_raster;   // PNG + world file
    std::string output_mask;    // PNG + world file
    std::string output_field;   // optional; empty = skip
};
StageRecord run_segment(const RunConfig& config, const SegmentPaths& paths);

struct DetectRowsPaths {
    std::string input_mask;
    std::string output_rows_csv;
};
StageRecord run_detect_rows(const RunConfig& config, const DetectRowsPaths& paths);

struct WeedMapPaths {
    std::string input_mask;
    std::string input_rows_csv;
    std::string output_weeds;       // PNG + world file
    std::string output_regions_csv;
};
StageRecord run_weed_map(const RunConfig& config, const WeedMapPaths& paths);

struct PrescribePaths {
    std::string input_weeds;
    std::string output_prescription;  // feature-collection JSON
    std::string output_report;        // key-value stats
};
StageRecord run_prescribe(const RunConfig& config, const PrescribePaths& paths);

struct SimulatePaths {
    std::string input_prescription;
    std::string output_as_applied;
    std::string output_report;
};
StageRecord run_simulate(const RunConfig& config, const SimulatePaths& paths);

struct EvaluateRowsPaths {
    std::string input_detected_csv;  // empty when counts file given
    std::string input_truth_csv;
    std::string input_counts;        // key-value tp/fp/fn/tn file, optional
    std::string output_report;
};
StageRecord run_evaluate_rows(const RunConfig& config, const EvaluateRowsPaths& paths);

struct StatsPaths {
    std::string input_observations_csv;
    std::string output_report;
};
StageRecord run_stats(const RunConfig& config, const StatsPaths& paths);

struct SynthPaths {
    std::string output_raster;
    std::string output_truth_rows_csv;
    std::string output_truth_weeds_csv;
};
StageRecord run_synth(const RunConfig& config, const SynthPaths& paths);

struct PipelinePaths {
    std::string input_raster;
    std::string output_dir;
    bool with_simulation = false;
    std::string overlay_png;  // optional review rendering
};
std::vector<StageRecord> run_pipeline(const RunConfig& config, const PipelinePaths& paths);

/// Output file names used by `run_pipeline` inside its output directory.
std::string pipeline_mask_path(const std::string& dir);
std::string pipeline_field_path(const std::string& dir);
std::string pipeline_rows_path(const std::string& dir);
std::string pipeline_weeds_path(const std::string& dir);
std::string pipeline_regions_path(const std::string& dir);
std::string pipeline_prescription_path(const std::string& dir);
std::string pipeline_prescription_report_path(const std::string& dir);
std::string pipeline_as_applied_path(const std::string& dir);
std::string pipeline_accuracy_report_path(const std::string& dir);

/// Writes the run manifest: artifact version, command, effective config,
/// stage timings, and input/output digests.
void write_manifest(const std::string& path, const std::string& command, const RunConfig& config,
                    const std::vector<StageRecord>& stages);

}  // namespace rowspray
