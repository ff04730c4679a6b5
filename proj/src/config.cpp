#include "rowspray/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace rowspray {

using nlohmann::json;

namespace {

void require_known_keys(const json& obj, const std::set<std::string>& known,
                        const std::string& section) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key))
            throw ConfigError("unknown config key '" + section + key + "'");
    }
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError(std::string("config key '") + key + "' must be an integer");
    return obj[key].get<int>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean())
        throw ConfigError(std::string("config key '") + key + "' must be a boolean");
    return obj[key].get<bool>();
}

Axis get_axis(const json& obj, const char* key, Axis fallback) {
    if (!obj.contains(key)) return fallback;
    const std::string v = obj[key].get<std::string>();
    if (v == "x" || v == "X") return Axis::X;
    if (v == "y" || v == "Y") return Axis::Y;
    throw ConfigError(std::string("config key '") + key + "' must be \"x\" or \"y\"");
}

}  // namespace

RowDetectParams RunConfig::rowdetect_params(double gsd_m) const {
    RowDetectParams p;
    p.tiles.tile_width = tile_width_px;
    p.tiles.tile_height = tile_height_px;
    p.row_spacing_m = row_spacing_m;
    p.merge_duplicates = merge_lines;
    p.merge_min_separation_m = merge_min_separation_m.value_or(0.0);
    if (smooth_window_px || min_distance_px) {
        p.auto_peak_params = false;
        PeakParams defaults = PeakParams::for_row_spacing(row_spacing_m / gsd_m);
        p.peaks.smooth_window = smooth_window_px.value_or(defaults.smooth_window);
        p.peaks.min_distance = min_distance_px.value_or(defaults.min_distance);
        p.peaks.min_prominence = min_prominence;
    } else {
        p.auto_peak_params = true;
        p.peaks.min_prominence = min_prominence;
    }
    return p;
}

void RunConfig::validate() const {
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (tile_width_px < 1 || tile_height_px < 1) throw ConfigError("tile dimensions must be >= 1");
    if (row_spacing_m <= 0.0) throw ConfigError("row_spacing_m must be positive");
    if (min_prominence < 0.0 || min_prominence > 1.0)
        throw ConfigError("min_prominence must be in [0, 1]");
    if (smooth_window_px && (*smooth_window_px < 1 || *smooth_window_px % 2 == 0))
        throw ConfigError("smooth_window_px must be odd and >= 1");
    if (min_distance_px && *min_distance_px < 1) throw ConfigError("min_distance_px must be >= 1");
    if (merge_min_separation_m && *merge_min_separation_m <= 0.0)
        throw ConfigError("merge_min_separation_m must be positive");
    if (match_tolerance_m && *match_tolerance_m <= 0.0)
        throw ConfigError("match_tolerance_m must be positive");
    if (buffer_half_width_m <= 0.0) throw ConfigError("buffer_half_width_m must be positive");
    if (cell_across_m <= 0.0 || cell_along_m <= 0.0)
        throw ConfigError("grid cell dimensions must be positive");
    if (spray_rate_l_per_ha < 0.0) throw ConfigError("spray_rate_l_per_ha must be >= 0");
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha must be in (0, 1)");
    try {
        sprayer.validate();
        field.validate();
    } catch (const InvalidInputError& e) {
        throw ConfigError(e.what());
    }
}

void apply_config_json(RunConfig& c, const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    require_known_keys(doc, {"threads", "segment", "rowdetect", "weedmap", "prescription",
                             "sprayer", "synth", "analysis"},
                       "");
    c.threads = get_int(doc, "threads", c.threads);

    if (doc.contains("segment")) {
        const json& s = doc["segment"];
        require_known_keys(s, {"exgi_threshold"}, "segment.");
        c.exgi_threshold = get_number(s, "exgi_threshold", c.exgi_threshold);
    }
    if (doc.contains("rowdetect")) {
        const json& s = doc["rowdetect"];
        require_known_keys(s,
                           {"tile_width_px", "tile_height_px", "row_spacing_m",
                            "smooth_window_px", "min_distance_px", "min_prominence",
                            "merge_lines", "merge_min_separation_m", "match_tolerance_m"},
                           "rowdetect.");
        c.tile_width_px = get_int(s, "tile_width_px", c.tile_width_px);
        c.tile_height_px = get_int(s, "tile_height_px", c.tile_height_px);
        c.row_spacing_m = get_number(s, "row_spacing_m", c.row_spacing_m);
        if (s.contains("smooth_window_px")) c.smooth_window_px = get_int(s, "smooth_window_px", 1);
        if (s.contains("min_distance_px")) c.min_distance_px = get_int(s, "min_distance_px", 1);
        c.min_prominence = get_number(s, "min_prominence", c.min_prominence);
        c.merge_lines = get_bool(s, "merge_lines", c.merge_lines);
        if (s.contains("merge_min_separation_m"))
            c.merge_min_separation_m = get_number(s, "merge_min_separation_m", 0.0);
        if (s.contains("match_tolerance_m"))
            c.match_tolerance_m = get_number(s, "match_tolerance_m", 0.0);
    }
    if (doc.contains("weedmap")) {
        const json& s = doc["weedmap"];
        require_known_keys(s, {"buffer_half_width_m"}, "weedmap.");
        c.buffer_half_width_m = get_number(s, "buffer_half_width_m", c.buffer_half_width_m);
    }
    if (doc.contains("prescription")) {
        const json& s = doc["prescription"];
        require_known_keys(s, {"cell_across_m", "cell_along_m", "spray_rate_l_per_ha",
                               "travel_axis"},
                           "prescription.");
        c.cell_across_m = get_number(s, "cell_across_m", c.cell_across_m);
        c.cell_along_m = get_number(s, "cell_along_m", c.cell_along_m);
        c.spray_rate_l_per_ha = get_number(s, "spray_rate_l_per_ha", c.spray_rate_l_per_ha);
        c.travel_axis = get_axis(s, "travel_axis", c.travel_axis);
    }
    if (doc.contains("sprayer")) {
        const json& s = doc["sprayer"];
        require_known_keys(s,
                           {"boom_width_m", "nozzle_spacing_m", "speed_m_s", "control_rate_hz",
                            "valve_latency_s", "heading_axis"},
                           "sprayer.");
        c.sprayer.boom_width_m = get_number(s, "boom_width_m", c.sprayer.boom_width_m);
        c.sprayer.nozzle_spacing_m = get_number(s, "nozzle_spacing_m", c.sprayer.nozzle_spacing_m);
        c.sprayer.speed_m_s = get_number(s, "speed_m_s", c.sprayer.speed_m_s);
        c.sprayer.control_rate_hz = get_number(s, "control_rate_hz", c.sprayer.control_rate_hz);
        c.sprayer.valve_latency_s = get_number(s, "valve_latency_s", c.sprayer.valve_latency_s);
        c.sprayer.heading = get_axis(s, "heading_axis", c.sprayer.heading);
    }
    if (doc.contains("synth")) {
        const json& s = doc["synth"];
        require_known_keys(s,
                           {"extent_w_m", "extent_h_m", "gsd_m", "row_spacing_m",
                            "plant_diameter_m", "plant_spacing_m", "plant_dropout_prob",
                            "weed_density_per_m2", "weed_diameter_min_m", "weed_diameter_max_m",
                            "row_wobble_amplitude_px", "row_clearance_m", "seed", "hard_palette",
                            "origin_x_m", "origin_y_m"},
                           "synth.");
        c.field.extent_w_m = get_number(s, "extent_w_m", c.field.extent_w_m);
        c.field.extent_h_m = get_number(s, "extent_h_m", c.field.extent_h_m);
        c.field.gsd_m = get_number(s, "gsd_m", c.field.gsd_m);
        c.field.row_spacing_m = get_number(s, "row_spacing_m", c.field.row_spacing_m);
        c.field.plant_diameter_m = get_number(s, "plant_diameter_m", c.field.plant_diameter_m);
        c.field.plant_spacing_m = get_number(s, "plant_spacing_m", c.field.plant_spacing_m);
        c.field.plant_dropout_prob = get_number(s, "plant_dropout_prob", c.field.plant_dropout_prob);
        c.field.weed_density_per_m2 =
            get_number(s, "weed_density_per_m2", c.field.weed_density_per_m2);
        c.field.weed_diameter_min_m =
            get_number(s, "weed_diameter_min_m", c.field.weed_diameter_min_m);
        c.field.weed_diameter_max_m =
            get_number(s, "weed_diameter_max_m", c.field.weed_diameter_max_m);
        c.field.row_wobble_amplitude_px =
            get_number(s, "row_wobble_amplitude_px", c.field.row_wobble_amplitude_px);
        c.field.row_clearance_m = get_number(s, "row_clearance_m", c.field.row_clearance_m);
        if (s.contains("seed")) {
            if (!s["seed"].is_number_unsigned() && !s["seed"].is_number_integer())
                throw ConfigError("synth.seed must be an integer");
            c.field.seed = s["seed"].get<std::uint64_t>();
        }
        c.field.hard_palette = get_bool(s, "hard_palette", c.field.hard_palette);
        c.field.origin.x = get_number(s, "origin_x_m", c.field.origin.x);
        c.field.origin.y = get_number(s, "origin_y_m", c.field.origin.y);
    }
    if (doc.contains("analysis")) {
        const json& s = doc["analysis"];
        require_known_keys(s, {"alpha"}, "analysis.");
        c.alpha = get_number(s, "alpha", c.alpha);
    }
    c.validate();
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    RunConfig config;
    apply_config_json(config, doc);
    return config;
}

json config_to_json(const RunConfig& c) {
    json doc;
    doc["threads"] = c.threads;
    doc["segment"] = {{"exgi_threshold", c.exgi_threshold}};
    json rd = {{"tile_width_px", c.tile_width_px},
               {"tile_height_px", c.tile_height_px},
               {"row_spacing_m", c.row_spacing_m},
               {"min_prominence", c.min_prominence},
               {"merge_lines", c.merge_lines}};
    if (c.smooth_window_px) rd["smooth_window_px"] = *c.smooth_window_px;
    if (c.min_distance_px) rd["min_distance_px"] = *c.min_distance_px;
    if (c.merge_min_separation_m) rd["merge_min_separation_m"] = *c.merge_min_separation_m;
    if (c.match_tolerance_m) rd["match_tolerance_m"] = *c.match_tolerance_m;
    doc["rowdetect"] = std::move(rd);
    doc["weedmap"] = {{"buffer_half_width_m", c.buffer_half_width_m}};
    doc["prescription"] = {{"cell_across_m", c.cell_across_m},
                           {"cell_along_m", c.cell_along_m},
                           {"spray_rate_l_per_ha", c.spray_rate_l_per_ha},
                           {"travel_axis", c.travel_axis == Axis::Y ? "y" : "x"}};
    doc["sprayer"] = {{"boom_width_m", c.sprayer.boom_width_m},
                      {"nozzle_spacing_m", c.sprayer.nozzle_spacing_m},
                      {"speed_m_s", c.sprayer.speed_m_s},
                      {"control_rate_hz", c.sprayer.control_rate_hz},
                      {"valve_latency_s", c.sprayer.valve_latency_s},
                      {"heading_axis", c.sprayer.heading == Axis::Y ? "y" : "x"}};
    doc["synth"] = {{"extent_w_m", c.field.extent_w_m},
                    {"extent_h_m", c.field.extent_h_m},
                    {"gsd_m", c.field.gsd_m},
                    {"row_spacing_m", c.field.row_spacing_m},
                    {"plant_diameter_m", c.field.plant_diameter_m},
                    {"plant_spacing_m", c.field.plant_spacing_m},
                    {"plant_dropout_prob", c.field.plant_dropout_prob},
                    {"weed_density_per_m2", c.field.weed_density_per_m2},
                    {"weed_diameter_min_m", c.field.weed_diameter_min_m},
                    {"weed_diameter_max_m", c.field.weed_diameter_max_m},
                    {"row_wobble_amplitude_px", c.field.row_wobble_amplitude_px},
                    {"row_clearance_m", c.field.row_clearance_m},
                    {"seed", c.field.seed},
                    {"hard_palette", c.field.hard_palette},
                    {"origin_x_m", c.field.origin.x},
                    {"origin_y_m", c.field.origin.y}};
    doc["analysis"] = {{"alpha", c.alpha}};
    return doc;
}

}  // namespace rowspray
