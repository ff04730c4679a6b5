#include "rowspray/prescription.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace rowspray {

using nlohmann::json;

namespace {

constexpr double kEdgeEps = 1e-9;

// Cell edges from `origin` along one axis covering [lo, hi): first edge is
// the largest lattice line <= lo; cells are clipped to the extent and
// degenerate slivers dropped.
std::vector<double> lattice_edges(double lo, double hi, double origin, double step) {
    const double k0 = std::floor((lo - origin) / step);
    std::vector<double> edges;
    double k = k0;
    double e = origin + k * step;
    // Guard against floating point putting the first edge just above lo.
    while (e > lo + kEdgeEps) {
        k -= 1.0;
        e = origin + k * step;
    }
    edges.push_back(std::max(e, lo));
    for (;;) {
        k += 1.0;
        e = origin + k * step;
        if (e >= hi - kEdgeEps) {
            edges.push_back(hi);
            break;
        }
        edges.push_back(e);
    }
    // Drop leading sliver if the clamped first edge collided with the next.
    if (edges.size() >= 2 && edges[1] - edges[0] <= kEdgeEps) edges.erase(edges.begin());
    return edges;
}

}  // namespace

std::optional<std::pair<int, int>> PrescriptionMap::cell_index_for(const Point2& p) const {
    if (cells.empty()) return std::nullopt;
    const Point2 anchor = spec.origin.value_or(Point2{extent.x0, extent.y0});
    const double cw = spec.cell_size_x();
    const double ch = spec.cell_size_y();

    // Lattice guess, then fix up against the stored (possibly truncated)
    // rectangles so membership agrees exactly with the half-open rects.
    const Cell& first = cells.front();
    int col = static_cast<int>(std::floor((p.x - first.rect.x0) / cw));
    int row = static_cast<int>(std::floor((p.y - first.rect.y0) / ch));
    (void)anchor;
    col = std::clamp(col, 0, ncols - 1);
    row = std::clamp(row, 0, nrows - 1);
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            const int r = row + dr;
            const int c = col + dc;
            if (r < 0 || r >= nrows || c < 0 || c >= ncols) continue;
            if (cell(r, c).rect.contains_half_open(p)) return std::make_pair(r, c);
        }
    }
    return std::nullopt;
}

double PrescriptionMap::no_spray_area_m2() const {
    double area = 0.0;
    for (const Cell& c : cells)
        if (c.rate_l_per_ha <= 0.0) area += c.rect.area();
    return area;
}

double PrescriptionMap::spray_area_m2() const {
    double area = 0.0;
    for (const Cell& c : cells)
        if (c.rate_l_per_ha > 0.0) area += c.rect.area();
    return area;
}

PrescriptionMap build_grid(const Rect& extent, const GridSpec& spec) {
    spec.validate();
    if (extent.empty(kEdgeEps)) throw InvalidInputError("grid extent is empty");

    PrescriptionMap map;
    map.spec = spec;
    map.extent = extent;

    const Point2 anchor = spec.origin.value_or(Point2{extent.x0, extent.y0});
    const std::vector<double> xs = lattice_edges(extent.x0, extent.x1, anchor.x, spec.cell_size_x());
    const std::vector<double> ys = lattice_edges(extent.y0, extent.y1, anchor.y, spec.cell_size_y());

    map.ncols = static_cast<int>(xs.size()) - 1;
    map.nrows = static_cast<int>(ys.size()) - 1;
    map.cells.reserve(static_cast<std::size_t>(map.ncols) * map.nrows);
    for (int r = 0; r < map.nrows; ++r) {
        for (int c = 0; c < map.ncols; ++c) {
            Cell cell;
            cell.rect = {xs[c], ys[r], xs[c + 1], ys[r + 1]};
            cell.row = r;
            cell.col = c;
            map.cells.push_back(cell);
        }
    }
    return map;
}

void assign_rates(PrescriptionMap& map, const BinaryMask& weeds) {
    if (map.cells.empty()) throw InvalidInputError("grid has no cells");
    const Rect mask_bounds = weeds.geo().bounds(weeds.width(), weeds.height());
    const double tol =
        std::max(weeds.geo().pixel_size_x, -weeds.geo().pixel_size_y) + kEdgeEps;
    if (!mask_bounds.approx_equals(map.extent, tol))
        throw InvalidInputError("weed mask georeferencing does not match the grid extent");

    for (Cell& c : map.cells) {
        c.weed_pixels = 0;
        c.rate_l_per_ha = 0.0;
    }
    weeds.for_each_set([&](int col, int row) {
        const Point2 p = weeds.geo().pixel_to_world(col, row);
        if (const auto idx = map.cell_index_for(p))
            ++map.cell(idx->first, idx->second).weed_pixels;
    });
    for (Cell& c : map.cells) c.rate_l_per_ha = c.weed_pixels >= 1 ? map.spray_rate_l_per_ha : 0.0;
    map.rates_assigned = true;
}

PrescriptionStats prescription_stats(const PrescriptionMap& map) {
    if (!map.rates_assigned) throw InvalidInputError("rates have not been assigned");
    PrescriptionStats s;
    s.cells_total = static_cast<std::int64_t>(map.cells.size());
    for (const Cell& c : map.cells) {
        if (c.rate_l_per_ha > 0.0) {
            ++s.cells_spray;
            s.area_spray_m2 += c.rect.area();
        } else {
            ++s.cells_no_spray;
            s.area_no_spray_m2 += c.rect.area();
        }
    }
    s.area_total_m2 = s.area_spray_m2 + s.area_no_spray_m2;
    s.frac_no_spray =
        s.cells_total > 0 ? static_cast<double>(s.cells_no_spray) / s.cells_total : 0.0;
    return s;
}

namespace {

json rect_ring(const Rect& r) {
    return json::array({json::array({r.x0, r.y0}), json::array({r.x1, r.y0}),
                        json::array({r.x1, r.y1}), json::array({r.x0, r.y1}),
                        json::array({r.x0, r.y0})});
}

Rect parse_rect_ring(const json& ring, const std::string& context) {
    if (!ring.is_array() || ring.size() != 5)
        throw ParseError(context + ": polygon ring must have 5 points");
    double xs[5], ys[5];
    for (int i = 0; i < 5; ++i) {
        const json& pt = ring[i];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
            throw ParseError(context + ": ring point " + std::to_string(i) + " must be [x, y]");
        xs[i] = pt[0].get<double>();
        ys[i] = pt[1].get<double>();
    }
    if (xs[0] != xs[4] || ys[0] != ys[4]) throw ParseError(context + ": ring is not closed");
    // Expect the rectangle winding written by the exporter.
    const bool axis_aligned = xs[0] == xs[3] && xs[1] == xs[2] && ys[0] == ys[1] && ys[2] == ys[3];
    if (!axis_aligned) throw ParseError(context + ": ring is not an axis-aligned rectangle");
    Rect r{xs[0], ys[0], xs[1], ys[2]};
    if (r.x1 <= r.x0 || r.y1 <= r.y0) throw ParseError(context + ": degenerate rectangle");
    return r;
}

}  // namespace

void export_prescription(const PrescriptionMap& map, const std::string& path) {
    if (!map.rates_assigned) throw InvalidInputError("cannot export a map without assigned rates");
    json doc;
    doc["type"] = "FeatureCollection";
    doc["crs"] = {{"type", "name"}, {"properties", {{"name", "local:planar-meters"}}}};
    doc["properties"] = {
        {"document", "prescription"},
        {"travel_axis", map.spec.travel == Axis::Y ? "y" : "x"},
        {"cell_across_m", map.spec.cell_across_m},
        {"cell_along_m", map.spec.cell_along_m},
        {"spray_rate_l_per_ha", map.spray_rate_l_per_ha},
        {"extent", json::array({map.extent.x0, map.extent.y0, map.extent.x1, map.extent.y1})},
        {"rows", map.nrows},
        {"cols", map.ncols},
    };
    if (map.spec.origin)
        doc["properties"]["origin"] = json::array({map.spec.origin->x, map.spec.origin->y});
    json features = json::array();
    for (const Cell& c : map.cells) {
        json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", json::array({rect_ring(c.rect)})}};
        f["properties"] = {{"rate_l_per_ha", c.rate_l_per_ha},
                           {"row", c.row},
                           {"col", c.col},
                           {"weed_pixels", c.weed_pixels}};
        features.push_back(std::move(f));
    }
    doc["features"] = std::move(features);
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);
    out << doc.dump(1, '\t') << "\n";
    if (!out) throw IoError("failed writing " + path);
}

PrescriptionMap import_prescription(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection")
        throw ParseError(path + ": not a feature collection");
    if (!doc.contains("properties")) throw ParseError(path + ": missing document properties");
    const json& props = doc["properties"];

    PrescriptionMap map;
    try {
        const std::string axis = props.at("travel_axis").get<std::string>();
        map.spec.travel = axis == "y" ? Axis::Y : Axis::X;
        map.spec.cell_across_m = props.at("cell_across_m").get<double>();
        map.spec.cell_along_m = props.at("cell_along_m").get<double>();
        map.spray_rate_l_per_ha = props.at("spray_rate_l_per_ha").get<double>();
        const json& ext = props.at("extent");
        map.extent = {ext.at(0).get<double>(), ext.at(1).get<double>(), ext.at(2).get<double>(),
                      ext.at(3).get<double>()};
        map.nrows = props.at("rows").get<int>();
        map.ncols = props.at("cols").get<int>();
        if (props.contains("origin"))
            map.spec.origin = Point2{props["origin"].at(0).get<double>(),
                                     props["origin"].at(1).get<double>()};
    } catch (const json::exception& e) {
        throw ParseError(path + ": bad document properties: " + e.what());
    }

    if (!doc.contains("features") || !doc["features"].is_array() || doc["features"].empty())
        throw ParseError(path + ": empty feature list");
    const json& features = doc["features"];
    if (static_cast<std::int64_t>(features.size()) !=
        static_cast<std::int64_t>(map.nrows) * map.ncols)
        throw ParseError(path + ": feature count does not match rows*cols");

    map.cells.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const std::string context = path + ": feature " + std::to_string(i);
        const json& f = features[i];
        if (f.value("type", "") != "Feature") throw ParseError(context + ": not a Feature");
        const json& geom = f.at("geometry");
        if (geom.value("type", "") != "Polygon")
            throw ParseError(context + ": geometry must be a Polygon");
        const json& coords = geom.at("coordinates");
        if (!coords.is_array() || coords.size() != 1)
            throw ParseError(context + ": polygon must have exactly one ring");
        Cell c;
        c.rect = parse_rect_ring(coords[0], context);
        const json& p = f.at("properties");
        c.rate_l_per_ha = p.at("rate_l_per_ha").get<double>();
        if (c.rate_l_per_ha < 0.0) throw ParseError(context + ": negative rate");
        c.row = p.at("row").get<int>();
        c.col = p.at("col").get<int>();
        c.weed_pixels = p.at("weed_pixels").get<std::int64_t>();
        if (c.row < 0 || c.row >= map.nrows || c.col < 0 || c.col >= map.ncols)
            throw ParseError(context + ": cell index out of range");
        if (static_cast<int>(i) != c.row * map.ncols + c.col)
            throw ParseError(context + ": features are not in row-major order");
        map.cells.push_back(c);
    }
    map.rates_assigned = true;
    return map;
}

bool prescription_equal(const PrescriptionMap& a, const PrescriptionMap& b, double geom_eps) {
    if (a.nrows != b.nrows || a.ncols != b.ncols || a.cells.size() != b.cells.size()) return false;
    if (a.spec.travel != b.spec.travel) return false;
    if (std::abs(a.spec.cell_across_m - b.spec.cell_across_m) > geom_eps) return false;
    if (std::abs(a.spec.cell_along_m - b.spec.cell_along_m) > geom_eps) return false;
    if (a.spray_rate_l_per_ha != b.spray_rate_l_per_ha) return false;
    if (!a.extent.approx_equals(b.extent, geom_eps)) return false;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const Cell& ca = a.cells[i];
        const Cell& cb = b.cells[i];
        if (!ca.rect.approx_equals(cb.rect, geom_eps)) return false;
        if (ca.rate_l_per_ha != cb.rate_l_per_ha) return false;
        if (ca.row != cb.row || ca.col != cb.col || ca.weed_pixels != cb.weed_pixels) return false;
    }
    return true;
}

}  // namespace rowspray
