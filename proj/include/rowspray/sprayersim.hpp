#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rowspray/prescription.hpp"

namespace rowspray {

/// Section-control sprayer model: a boom of individually switched nozzles
/// sampling the prescription at discrete control ticks while traversing
/// parallel passes.
struct SprayerConfig {
    double boom_width_m = 41.64;
    double nozzle_spacing_m = 0.5;
    double speed_m_s = 2.917;  // 10.5 km/h
    double control_rate_hz = 10.0;
    double valve_latency_s = 0.0;
    Axis heading = Axis::Y;

    int nozzle_count() const {
        return std::max(1, static_cast<int>(std::llround(boom_width_m / nozzle_spacing_m)));
    }
    // Effective covered width; equals boom_width_m when the spacing divides it.
    double swath_m() const { return nozzle_count() * nozzle_spacing_m; }
    double tick_distance_m() const { return speed_m_s / control_rate_hz; }

    void validate() const {
        if (boom_width_m <= 0.0) throw InvalidInputError("boom width must be positive");
        if (nozzle_spacing_m <= 0.0) throw InvalidInputError("nozzle spacing must be positive");
        if (speed_m_s <= 0.0) throw InvalidInputError("speed must be positive");
        if (control_rate_hz <= 0.0) throw InvalidInputError("control rate must be positive");
        if (valve_latency_s < 0.0) throw InvalidInputError("valve latency must be >= 0");
    }
};

/// One field traversal. `center` is the perpendicular coordinate of the boom
/// centerline; travel runs from `start` to `end` (direction +1 or -1 along
/// the heading axis, serpentine across passes).
struct SprayPass {
    int index = 0;
    double center = 0.0;
    double start = 0.0;
    double end = 0.0;
    int direction = 1;
};

std::vector<SprayPass> plan_passes(const Rect& extent, const SprayerConfig& config);

struct SprayedRect {
    Rect rect;
    double applied_rate_l_per_ha = 0.0;
    int pass = 0;
    int nozzle = 0;
    int tick = 0;
};

class AsAppliedMap {
public:
    AsAppliedMap() = default;
    AsAppliedMap(Rect extent, std::vector<SprayedRect> rects)
        : extent_(extent), rects_(std::move(rects)) {}

    const Rect& extent() const { return extent_; }
    const std::vector<SprayedRect>& rects() const { return rects_; }

    /// Union area of the sprayed rectangles (cached after first call).
    double sprayed_area_m2() const;
    double unsprayed_area_m2() const { return extent_.area() - sprayed_area_m2(); }

private:
    Rect extent_;
    std::vector<SprayedRect> rects_;
    mutable std::optional<double> sprayed_area_;
};

/// Runs the sprayer over the prescription. At each control tick every nozzle
/// samples the cell under its center point (sample position shifted back by
/// valve_latency_s of travel) and holds that on/off decision for the next
/// tick segment. ON nozzles deposit a nozzle_spacing x tick_distance
/// rectangle clipped to the extent. Fully deterministic.
AsAppliedMap simulate(const PrescriptionMap& prescription, const SprayerConfig& config);

struct AccuracyReport {
    double expected_no_spray_m2 = 0.0;
    double measured_no_spray_m2 = 0.0;
    double sprayed_m2 = 0.0;
    double total_m2 = 0.0;
    double savings_frac = 0.0;
    std::optional<double> accuracy;  // measured / expected, undefined when expected = 0
};

/// Compares an as-applied map against its prescription: measured no-spray is
/// the extent area not covered by any sprayed rectangle, expected no-spray
/// the summed area of rate-0 cells.
AccuracyReport application_accuracy(const AsAppliedMap& as_applied,
                                    const PrescriptionMap& prescription);

/// Report arithmetic on already-known totals (field reports).
AccuracyReport savings_report(double measured_no_spray_m2, double total_m2,
                              std::optional<double> expected_no_spray_m2 = std::nullopt);
double implied_expected_no_spray_m2(double measured_no_spray_m2, double accuracy);

/// Exact union area of axis-aligned rectangles (slab sweep).
double rect_union_area(std::span<const Rect> rects);

/// Area of (sprayed region) ∩ (rate>0 cells) and the symmetric difference of
/// the two regions.
double spray_overlap_area_m2(const AsAppliedMap& as_applied, const PrescriptionMap& prescription);
double spray_symmetric_difference_m2(const AsAppliedMap& as_applied,
                                     const PrescriptionMap& prescription);

/// Feature-collection round-trip, same form as prescriptions with
/// per-rectangle applied_rate_l_per_ha and pass/nozzle/tick indices.
void export_as_applied(const AsAppliedMap& map, const std::string& path);
AsAppliedMap import_as_applied(const std::string& path);

bool as_applied_equal(const AsAppliedMap& a, const AsAppliedMap& b, double geom_eps = 1e-6);

}  // namespace rowspray
