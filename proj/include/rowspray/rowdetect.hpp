#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rowspray/raster.hpp"

namespace rowspray {

/// Tile grid laid over a mask. Tiles partition the mask exactly; edge tiles
/// are truncated. The origin offset shifts the grid lines in pixels.
struct TileSpec {
    int tile_width = 3000;
    int tile_height = 2000;
    int origin_x = 0;
    int origin_y = 0;

    void validate() const {
        if (tile_width < 1 || tile_height < 1)
            throw InvalidInputError("tile dimensions must be >= 1");
    }
};

struct TileRect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
    int tile_col = 0;
    int tile_row = 0;
};

std::vector<TileRect> tile_mask(const BinaryMask& mask, const TileSpec& spec);

/// Per-pixel-row counts of set bits across a tile's columns.
struct ProjectionProfile {
    std::vector<std::uint32_t> sums;
    TileRect tile;
};

ProjectionProfile projection_profile(const BinaryMask& mask, const TileRect& tile);

/// Selection rule for local maxima of a projection profile.
struct PeakParams {
    int smooth_window = 1;        // centered moving average width, odd, >= 1
    int min_distance = 1;         // minimum peak separation in pixels, >= 1
    double min_prominence = 0.0;  // fraction of the smoothed maximum, in [0, 1]

    void validate() const;

    /// Defaults tuned from the nominal row spacing in pixels:
    /// window ~ a quarter spacing (forced odd), distance = half spacing,
    /// prominence 10% of the profile maximum.
    static PeakParams for_row_spacing(double row_spacing_px);
};

/// Finds peak indices of a 1-D profile.
///
/// 1. Smooth with a centered moving average (the window shrinks at the ends).
/// 2. Candidate peaks are strict local maxima; plateau runs collapse to their
///    center index (rounded down). The profile is treated as dropping to zero
///    beyond its ends, so a maximum touching an end still qualifies.
/// 3. Candidates whose prominence (height above the higher of the valley
///    minima bracketing the peak, each taken toward the nearest strictly
///    higher sample or the zero-valued end) is below
///    min_prominence * max(smoothed) are discarded.
/// 4. Remaining candidates are accepted greedily in descending height,
///    suppressing any candidate closer than min_distance to an accepted one.
///
/// Returns indices sorted ascending; an all-zero profile yields none.
std::vector<int> find_peaks(std::span<const double> profile, const PeakParams& params);
std::vector<int> find_peaks(const ProjectionProfile& profile, const PeakParams& params);

/// A detected crop-row segment. Endpoints are world coordinates of the tile's
/// first and last pixel-column centers at the peak row; the segment is
/// parallel to the image X axis. `weight` carries the profile mass at the
/// peak and drives duplicate merging; it is not serialized.
struct RowLine {
    Point2 a;
    Point2 b;
    int tile_col = 0;
    int tile_row = 0;
    int peak_row_px = 0;  // pixel row within the source tile
    double weight = 1.0;
};

/// Scalar position of a line: the mean coordinate perpendicular to the
/// row direction (rows run along X, so this is the mean y).
inline double line_position(const RowLine& line) { return 0.5 * (line.a.y + line.b.y); }

std::vector<RowLine> emit_row_lines(const std::vector<int>& peaks, const TileRect& tile,
                                    const GeoTransform& geo,
                                    const std::vector<std::uint32_t>* sums = nullptr);

/// Collapses near-duplicate lines within one tile column (same X extent).
/// Disabled: identity. Enabled: lines whose perpendicular separation is below
/// min_separation_m are clustered transitively and replaced by one line at
/// the weight-averaged row position.
std::vector<RowLine> merge_duplicate_lines(const std::vector<RowLine>& lines,
                                           double min_separation_m, bool enabled);

/// Rotates the mask content by `angle_deg` (positive turns from +x toward +y,
/// nearest-neighbor resampling, content outside the frame dropped).
BinaryMask rotate_mask(const BinaryMask& mask, double angle_deg);

/// Scans [-range_deg, +range_deg] at step_deg and returns the rotation angle
/// maximizing the variance of the full-mask projection profile. Ties break
/// toward 0 degrees. Throws InvalidInputError on an empty mask.
double estimate_row_orientation(const BinaryMask& mask, double range_deg = 45.0,
                                double step_deg = 1.0);

struct DetectionEvaluation {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> accuracy;

    static DetectionEvaluation from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn,
                                           std::int64_t tn);
};

/// One-to-one greedy matching of detected against ground-truth positions:
/// candidate pairs sorted by absolute distance, accepted while within
/// match_tolerance_m and both members unmatched. Unmatched detected lines are
/// false positives, unmatched truth lines false negatives; TN is fixed at 0.
DetectionEvaluation evaluate_detection(const std::vector<double>& detected,
                                       const std::vector<double>& truth,
                                       double match_tolerance_m);
DetectionEvaluation evaluate_detection(const std::vector<RowLine>& detected,
                                       const std::vector<RowLine>& truth,
                                       double match_tolerance_m);

/// Segment-wise evaluation for multi-tile-column detections: detected lines
/// are grouped by X extent, truth lines become match targets in every group
/// whose extent they overlap, and the scalar matching runs per group with the
/// counts summed. With a single column this reduces to evaluate_detection.
DetectionEvaluation evaluate_detection_by_column(const std::vector<RowLine>& detected,
                                                 const std::vector<RowLine>& truth,
                                                 double match_tolerance_m);

/// Full detection chain over a mask: tile, project, find peaks, emit lines,
/// and optionally merge duplicates per tile column.
struct RowDetectParams {
    TileSpec tiles;
    PeakParams peaks;
    bool merge_duplicates = false;
    double merge_min_separation_m = 0.0;  // <= 0: 0.4 * row_spacing_m
    double row_spacing_m = 0.762;
    bool auto_peak_params = true;  // derive PeakParams from row spacing / GSD
};

std::vector<RowLine> detect_rows(const BinaryMask& mask, const RowDetectParams& params);

/// Resolved peak parameters for a mask GSD (explicit params win over auto).
PeakParams resolve_peak_params(const RowDetectParams& params, double gsd_m);

// CSV round-trip, header x1_m,y1_m,x2_m,y2_m[,tile_col,tile_row,peak_row_px].
void write_row_lines_csv(const std::string& path, const std::vector<RowLine>& lines,
                         bool with_tile_columns = true);
std::vector<RowLine> read_row_lines_csv(const std::string& path);

}  // namespace rowspray
