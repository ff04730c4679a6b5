#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rowspray/prescription.hpp"
#include "rowspray/rowdetect.hpp"
#include "rowspray/sprayersim.hpp"
#include "rowspray/synthfield.hpp"
#include "rowspray/weedmap.hpp"

namespace rowspray {

/// Full pipeline configuration. All distances are meters, rates L/ha,
/// frequencies Hz; key names carry the unit suffix. Everything has a usable
/// default, so an empty config runs the whole pipeline.
struct RunConfig {
    int threads = 1;

    // segment
    double exgi_threshold = 0.08;

    // rowdetect
    int tile_width_px = 3000;
    int tile_height_px = 2000;
    double row_spacing_m = 0.762;
    std::optional<int> smooth_window_px;    // default: derived from row spacing
    std::optional<int> min_distance_px;     // default: derived from row spacing
    double min_prominence = 0.1;
    bool merge_lines = false;
    std::optional<double> merge_min_separation_m;  // default: 0.4 * row spacing
    std::optional<double> match_tolerance_m;       // default: 0.25 * row spacing

    // weedmap
    double buffer_half_width_m = 0.0889;

    // prescription
    double cell_across_m = 0.509;
    double cell_along_m = 3.048;
    double spray_rate_l_per_ha = 140.3;
    Axis travel_axis = Axis::Y;

    // sprayer
    SprayerConfig sprayer;

    // synth
    FieldSpec field;

    // analysis
    double alpha = 0.05;

    RowDetectParams rowdetect_params(double gsd_m) const;
    double resolved_match_tolerance() const {
        return match_tolerance_m.value_or(0.25 * row_spacing_m);
    }

    void validate() const;
};

/// Loads a JSON config file. Unknown keys anywhere are rejected.
RunConfig load_config(const std::string& path);
/// Applies a parsed JSON document over `config` (used for both files and
/// tests); throws ConfigError on unknown keys or invalid values.
void apply_config_json(RunConfig& config, const nlohmann::json& doc);
/// Serializes the effective configuration (for run manifests).
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace rowspray
