#include "rowspray/rowdetect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

namespace rowspray {

std::vector<TileRect> tile_mask(const BinaryMask& mask, const TileSpec& spec) {
    spec.validate();
    if (mask.width() == 0 || mask.height() == 0) throw InvalidInputError("mask is empty");

    // Grid lines sit at origin + k*size; emit the edges intersecting [0, n).
    const auto edges = [](int n, int size, int origin) {
        int first = origin % size;     // in (-size, size)
        if (first > 0) first -= size;  // largest lattice line <= 0
        std::vector<int> e;
        for (int x = first; x < n; x += size) e.push_back(std::max(x, 0));
        e.push_back(n);
        // Collapse duplicates from clamping the leading edge.
        e.erase(std::unique(e.begin(), e.end()), e.end());
        return e;
    };

    const std::vector<int> xs = edges(mask.width(), spec.tile_width, spec.origin_x);
    const std::vector<int> ys = edges(mask.height(), spec.tile_height, spec.origin_y);

    std::vector<TileRect> tiles;
    tiles.reserve((xs.size() - 1) * (ys.size() - 1));
    for (std::size_t r = 0; r + 1 < ys.size(); ++r) {
        for (std::size_t c = 0; c + 1 < xs.size(); ++c) {
            TileRect t;
            t.x0 = xs[c];
            t.y0 = ys[r];
            t.width = xs[c + 1] - xs[c];
            t.height = ys[r + 1] - ys[r];
            t.tile_col = static_cast<int>(c);
            t.tile_row = static_cast<int>(r);
            tiles.push_back(t);
        }
    }
    return tiles;
}

ProjectionProfile projection_profile(const BinaryMask& mask, const TileRect& tile) {
    ProjectionProfile profile;
    profile.tile = tile;
    profile.sums.resize(tile.height);
    for (int r = 0; r < tile.height; ++r) {
        profile.sums[r] =
            static_cast<std::uint32_t>(mask.row_popcount(tile.y0 + r, tile.x0, tile.x0 + tile.width));
    }
    return profile;
}

void PeakParams::validate() const {
    if (smooth_window < 1 || smooth_window % 2 == 0)
        throw InvalidInputError("smooth_window must be odd and >= 1");
    if (min_distance < 1) throw InvalidInputError("min_distance must be >= 1");
    if (min_prominence < 0.0 || min_prominence > 1.0)
        throw InvalidInputError("min_prominence must be in [0, 1]");
}

PeakParams PeakParams::for_row_spacing(double row_spacing_px) {
    if (row_spacing_px <= 0.0) throw InvalidInputError("row spacing must be positive");
    PeakParams p;
    int window = static_cast<int>(std::lround(0.25 * row_spacing_px));
    if (window < 1) window = 1;
    if (window % 2 == 0) ++window;
    p.smooth_window = window;
    p.min_distance = std::max(1, static_cast<int>(std::lround(0.5 * row_spacing_px)));
    p.min_prominence = 0.1;
    return p;
}

namespace {

std::vector<double> moving_average(std::span<const double> profile, int window) {
    const int n = static_cast<int>(profile.size());
    std::vector<double> out(n);
    if (window <= 1) {
        std::copy(profile.begin(), profile.end(), out.begin());
        return out;
    }
    std::vector<double> prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + profile[i];
    const int half = (window - 1) / 2;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        out[i] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
    }
    return out;
}

}  // namespace

std::vector<int> find_peaks(std::span<const double> profile, const PeakParams& params) {
    params.validate();
    const int n = static_cast<int>(profile.size());
    if (n == 0) return {};

    const std::vector<double> s = moving_average(profile, params.smooth_window);
    const double smax = *std::max_element(s.begin(), s.end());
    if (smax <= 0.0) return {};

    // Strict local maxima with plateau runs collapsed to their center.
    std::vector<int> candidates;
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && s[j + 1] == s[i]) ++j;
        const bool left_ok = (i == 0) || (s[i - 1] < s[i]);
        const bool right_ok = (j == n - 1) || (s[j + 1] < s[i]);
        if (left_ok && right_ok && s[i] > 0.0) candidates.push_back((i + j) / 2);
        i = j + 1;
    }
    if (candidates.empty()) return {};

    // Prominence: valley minimum toward the nearest strictly higher sample
    // on each side (or the signal end, where the profile is taken to fall to
    // zero); the peak stands on the higher of the two bases.
    std::vector<int> kept;
    const double threshold = params.min_prominence * smax;
    for (const int p : candidates) {
        const double h = s[p];
        double left_base = h;
        {
            int q = p - 1;
            double running = h;
            while (q >= 0 && s[q] <= h) running = std::min(running, s[q--]);
            left_base = q >= 0 ? running : std::min(running, 0.0);
        }
        double right_base = h;
        {
            int q = p + 1;
            double running = h;
            while (q < n && s[q] <= h) running = std::min(running, s[q++]);
            right_base = q < n ? running : std::min(running, 0.0);
        }
        const double prominence = h - std::max(left_base, right_base);
        if (prominence >= threshold) kept.push_back(p);
    }
    if (kept.empty()) return {};

    // Greedy acceptance in descending height, lower index first on ties.
    std::vector<int> order = kept;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return s[a] != s[b] ? s[a] > s[b] : a < b; });
    std::vector<int> accepted;
    for (const int p : order) {
        bool ok = true;
        for (const int a : accepted) {
            if (std::abs(p - a) < params.min_distance) {
                ok = false;
                break;
            }
        }
        if (ok) accepted.push_back(p);
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

std::vector<int> find_peaks(const ProjectionProfile& profile, const PeakParams& params) {
    std::vector<double> values(profile.sums.begin(), profile.sums.end());
    return find_peaks(values, params);
}

std::vector<RowLine> emit_row_lines(const std::vector<int>& peaks, const TileRect& tile,
                                    const GeoTransform& geo,
                                    const std::vector<std::uint32_t>* sums) {
    std::vector<RowLine> lines;
    lines.reserve(peaks.size());
    for (const int peak : peaks) {
        RowLine line;
        const int row = tile.y0 + peak;
        line.a = geo.pixel_to_world(tile.x0, row);
        line.b = geo.pixel_to_world(tile.x0 + tile.width - 1, row);
        line.tile_col = tile.tile_col;
        line.tile_row = tile.tile_row;
        line.peak_row_px = peak;
        if (sums && peak >= 0 && peak < static_cast<int>(sums->size()))
            line.weight = static_cast<double>((*sums)[peak]);
        lines.push_back(line);
    }
    return lines;
}

namespace {

// Key identifying a tile column by its shared X extent (micrometer grid).
std::pair<std::int64_t, std::int64_t> x_extent_key(const RowLine& line) {
    const auto quant = [](double v) { return static_cast<std::int64_t>(std::llround(v * 1e6)); };
    return {quant(std::min(line.a.x, line.b.x)), quant(std::max(line.a.x, line.b.x))};
}

}  // namespace

std::vector<RowLine> merge_duplicate_lines(const std::vector<RowLine>& lines,
                                           double min_separation_m, bool enabled) {
    if (!enabled) return lines;
    if (min_separation_m <= 0.0) throw InvalidInputError("min_separation_m must be positive");

    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<RowLine>> columns;
    for (const RowLine& line : lines) columns[x_extent_key(line)].push_back(line);

    std::vector<RowLine> out;
    for (auto& [key, group] : columns) {
        std::sort(group.begin(), group.end(), [](const RowLine& a, const RowLine& b) {
            return line_position(a) < line_position(b);
        });
        std::size_t i = 0;
        while (i < group.size()) {
            std::size_t j = i;
            while (j + 1 < group.size() &&
                   line_position(group[j + 1]) - line_position(group[j]) < min_separation_m)
                ++j;
            // Cluster [i, j]: weight-averaged position, heaviest member keeps
            // the tile identity.
            double wsum = 0.0, ysum = 0.0;
            std::size_t heaviest = i;
            for (std::size_t k = i; k <= j; ++k) {
                const double w = group[k].weight > 0.0 ? group[k].weight : 1.0;
                wsum += w;
                ysum += w * line_position(group[k]);
                if (group[k].weight > group[heaviest].weight) heaviest = k;
            }
            RowLine merged = group[heaviest];
            const double y = ysum / wsum;
            merged.a.y = y;
            merged.b.y = y;
            merged.weight = wsum;
            out.push_back(merged);
            i = j + 1;
        }
    }
    return out;
}

BinaryMask rotate_mask(const BinaryMask& mask, double angle_deg) {
    const double rad = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double cx = 0.5 * (mask.width() - 1);
    const double cy = 0.5 * (mask.height() - 1);
    BinaryMask out(mask.width(), mask.height(), mask.geo());
    for (int row = 0; row < mask.height(); ++row) {
        for (int col = 0; col < mask.width(); ++col) {
            // Inverse map: rotate the output pixel back into the source.
            const double dx = col - cx;
            const double dy = row - cy;
            const int src_col = static_cast<int>(std::lround(cx + c * dx + s * dy));
            const int src_row = static_cast<int>(std::lround(cy - s * dx + c * dy));
            if (src_col < 0 || src_col >= mask.width() || src_row < 0 || src_row >= mask.height())
                continue;
            if (mask.get(src_col, src_row)) out.set(col, row);
        }
    }
    return out;
}

double estimate_row_orientation(const BinaryMask& mask, double range_deg, double step_deg) {
    if (mask.popcount() == 0) throw InvalidInputError("cannot estimate orientation of an empty mask");
    if (step_deg <= 0.0) throw InvalidInputError("step must be positive");

    const auto profile_variance = [&](const BinaryMask& m) {
        std::vector<double> sums(m.height());
        for (int r = 0; r < m.height(); ++r)
            sums[r] = static_cast<double>(m.row_popcount(r, 0, m.width()));
        double mean = 0.0;
        for (const double v : sums) mean += v;
        mean /= sums.size();
        double var = 0.0;
        for (const double v : sums) var += (v - mean) * (v - mean);
        return var / sums.size();
    };

    // Visit candidate angles by increasing |angle| so ties resolve toward 0.
    std::vector<double> angles{0.0};
    for (double a = step_deg; a <= range_deg + 1e-12; a += step_deg) {
        angles.push_back(a);
        angles.push_back(-a);
    }
    double best_angle = 0.0;
    double best_var = -1.0;
    for (const double a : angles) {
        const double var = profile_variance(rotate_mask(mask, a));
        if (var > best_var) {
            best_var = var;
            best_angle = a;
        }
    }
    return best_angle;
}

DetectionEvaluation DetectionEvaluation::from_counts(std::int64_t tp, std::int64_t fp,
                                                     std::int64_t fn, std::int64_t tn) {
    DetectionEvaluation e;
    e.tp = tp;
    e.fp = fp;
    e.fn = fn;
    e.tn = tn;
    const auto ratio = [](std::int64_t num, std::int64_t den) -> std::optional<double> {
        if (den <= 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    e.precision = ratio(tp, tp + fp);
    e.recall = ratio(tp, tp + fn);
    e.accuracy = ratio(tp + tn, tp + fp + fn + tn);
    if (e.precision && e.recall && (*e.precision + *e.recall) > 0.0)
        e.f1 = 2.0 * *e.precision * *e.recall / (*e.precision + *e.recall);
    return e;
}

DetectionEvaluation evaluate_detection(const std::vector<double>& detected,
                                       const std::vector<double>& truth,
                                       double match_tolerance_m) {
    struct Pair {
        double dist;
        std::size_t d, t;
    };
    std::vector<Pair> pairs;
    pairs.reserve(detected.size() * truth.size());
    for (std::size_t d = 0; d < detected.size(); ++d)
        for (std::size_t t = 0; t < truth.size(); ++t) {
            const double dist = std::abs(detected[d] - truth[t]);
            if (dist <= match_tolerance_m) pairs.push_back({dist, d, t});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.d != b.d) return a.d < b.d;
        return a.t < b.t;
    });
    std::vector<char> d_used(detected.size(), 0), t_used(truth.size(), 0);
    std::int64_t tp = 0;
    for (const Pair& p : pairs) {
        if (d_used[p.d] || t_used[p.t]) continue;
        d_used[p.d] = t_used[p.t] = 1;
        ++tp;
    }
    const std::int64_t fp = static_cast<std::int64_t>(detected.size()) - tp;
    const std::int64_t fn = static_cast<std::int64_t>(truth.size()) - tp;
    return DetectionEvaluation::from_counts(tp, fp, fn, 0);
}

namespace {

std::vector<double> positions_of(const std::vector<RowLine>& lines) {
    std::vector<double> out;
    out.reserve(lines.size());
    for (const RowLine& l : lines) out.push_back(line_position(l));
    return out;
}

}  // namespace

DetectionEvaluation evaluate_detection(const std::vector<RowLine>& detected,
                                       const std::vector<RowLine>& truth,
                                       double match_tolerance_m) {
    return evaluate_detection(positions_of(detected), positions_of(truth), match_tolerance_m);
}

DetectionEvaluation evaluate_detection_by_column(const std::vector<RowLine>& detected,
                                                 const std::vector<RowLine>& truth,
                                                 double match_tolerance_m) {
    if (detected.empty())
        return DetectionEvaluation::from_counts(0, 0, static_cast<std::int64_t>(truth.size()), 0);

    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<RowLine>> columns;
    for (const RowLine& line : detected) columns[x_extent_key(line)].push_back(line);

    std::int64_t tp = 0, fp = 0, fn = 0;
    std::vector<char> truth_seen(truth.size(), 0);
    for (const auto& [key, group] : columns) {
        const double gx0 = static_cast<double>(key.first) / 1e6;
        const double gx1 = static_cast<double>(key.second) / 1e6;
        std::vector<double> truth_positions;
        for (std::size_t t = 0; t < truth.size(); ++t) {
            const double tx0 = std::min(truth[t].a.x, truth[t].b.x);
            const double tx1 = std::max(truth[t].a.x, truth[t].b.x);
            if (std::min(gx1, tx1) - std::max(gx0, tx0) > 1e-9) {
                truth_positions.push_back(line_position(truth[t]));
                truth_seen[t] = 1;
            }
        }
        const DetectionEvaluation e =
            evaluate_detection(positions_of(group), truth_positions, match_tolerance_m);
        tp += e.tp;
        fp += e.fp;
        fn += e.fn;
    }
    for (const char seen : truth_seen)
        if (!seen) ++fn;
    return DetectionEvaluation::from_counts(tp, fp, fn, 0);
}

PeakParams resolve_peak_params(const RowDetectParams& params, double gsd_m) {
    if (!params.auto_peak_params) return params.peaks;
    return PeakParams::for_row_spacing(params.row_spacing_m / gsd_m);
}

std::vector<RowLine> detect_rows(const BinaryMask& mask, const RowDetectParams& params) {
    // Rows run along X, so peak spacing lives on the Y pixel axis.
    const PeakParams peak_params = resolve_peak_params(params, -mask.geo().pixel_size_y);
    const std::vector<TileRect> tiles = tile_mask(mask, params.tiles);

    std::vector<RowLine> lines;
    for (const TileRect& tile : tiles) {
        const ProjectionProfile profile = projection_profile(mask, tile);
        const std::vector<int> peaks = find_peaks(profile, peak_params);
        std::vector<RowLine> tile_lines = emit_row_lines(peaks, tile, mask.geo(), &profile.sums);
        lines.insert(lines.end(), tile_lines.begin(), tile_lines.end());
    }

    double min_sep = params.merge_min_separation_m;
    if (min_sep <= 0.0) min_sep = 0.4 * params.row_spacing_m;
    lines = merge_duplicate_lines(lines, min_sep, params.merge_duplicates);

    std::sort(lines.begin(), lines.end(), [](const RowLine& a, const RowLine& b) {
        const auto ka = x_extent_key(a), kb = x_extent_key(b);
        if (ka != kb) return ka < kb;
        return line_position(a) < line_position(b);
    });
    return lines;
}

void write_row_lines_csv(const std::string& path, const std::vector<RowLine>& lines,
                         bool with_tile_columns) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);
    out << (with_tile_columns ? "x1_m,y1_m,x2_m,y2_m,tile_col,tile_row,peak_row_px\n"
                              : "x1_m,y1_m,x2_m,y2_m\n");
    for (const RowLine& l : lines) {
        if (with_tile_columns)
            out << fmt::format("{},{},{},{},{},{},{}\n", l.a.x, l.a.y, l.b.x, l.b.y, l.tile_col,
                               l.tile_row, l.peak_row_px);
        else
            out << fmt::format("{},{},{},{}\n", l.a.x, l.a.y, l.b.x, l.b.y);
    }
    if (!out) throw IoError("failed writing " + path);
}

std::vector<RowLine> read_row_lines_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": missing header");
    bool with_tiles;
    if (header == "x1_m,y1_m,x2_m,y2_m,tile_col,tile_row,peak_row_px")
        with_tiles = true;
    else if (header == "x1_m,y1_m,x2_m,y2_m")
        with_tiles = false;
    else
        throw ParseError(path + ": unexpected header '" + header + "'");

    std::vector<RowLine> lines;
    std::string record;
    int line_no = 1;
    while (std::getline(in, record)) {
        ++line_no;
        if (record.empty()) continue;
        std::stringstream ss(record);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const std::size_t expected = with_tiles ? 7 : 4;
        if (cells.size() != expected)
            throw ParseError(fmt::format("{}:{}: expected {} fields, got {}", path, line_no,
                                         expected, cells.size()));
        RowLine l;
        try {
            l.a.x = std::stod(cells[0]);
            l.a.y = std::stod(cells[1]);
            l.b.x = std::stod(cells[2]);
            l.b.y = std::stod(cells[3]);
            if (with_tiles) {
                l.tile_col = std::stoi(cells[4]);
                l.tile_row = std::stoi(cells[5]);
                l.peak_row_px = std::stoi(cells[6]);
            }
        } catch (const std::exception&) {
            throw ParseError(fmt::format("{}:{}: non-numeric field", path, line_no));
        }
        lines.push_back(l);
    }
    return lines;
}

}  // namespace rowspray
