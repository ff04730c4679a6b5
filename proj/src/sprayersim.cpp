#include "rowspray/sprayersim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace rowspray {

using nlohmann::json;

std::vector<SprayPass> plan_passes(const Rect& extent, const SprayerConfig& config) {
    config.validate();
    if (extent.empty()) throw InvalidInputError("extent is empty");

    const bool travel_y = config.heading == Axis::Y;
    const double perp_min = travel_y ? extent.x0 : extent.y0;
    const double perp_span = travel_y ? extent.width() : extent.height();
    const double along_min = travel_y ? extent.y0 : extent.x0;
    const double along_max = travel_y ? extent.y1 : extent.x1;

    const int n = std::max(1, static_cast<int>(std::ceil(perp_span / config.boom_width_m - 1e-9)));
    std::vector<SprayPass> passes;
    passes.reserve(n);
    for (int i = 0; i < n; ++i) {
        SprayPass p;
        p.index = i;
        p.center = n == 1 ? perp_min + 0.5 * perp_span
                          : perp_min + config.boom_width_m * (i + 0.5);
        p.direction = (i % 2 == 0) ? 1 : -1;  // serpentine
        p.start = p.direction > 0 ? along_min : along_max;
        p.end = p.direction > 0 ? along_max : along_min;
        passes.push_back(p);
    }
    return passes;
}

AsAppliedMap simulate(const PrescriptionMap& prescription, const SprayerConfig& config) {
    config.validate();
    if (!prescription.rates_assigned)
        throw InvalidInputError("prescription rates have not been assigned");

    const Rect extent = prescription.extent;
    const bool travel_y = config.heading == Axis::Y;
    const double along_min = travel_y ? extent.y0 : extent.x0;
    const double along_max = travel_y ? extent.y1 : extent.x1;
    const double perp_lo_lim = travel_y ? extent.x0 : extent.y0;
    const double perp_hi_lim = travel_y ? extent.x1 : extent.y1;

    const double tick = config.tick_distance_m();
    const double travel_len = along_max - along_min;
    const int nozzles = config.nozzle_count();
    const double spacing = config.nozzle_spacing_m;
    const double latency_shift = config.valve_latency_s * config.speed_m_s;

    std::vector<SprayedRect> rects;
    for (const SprayPass& pass : plan_passes(extent, config)) {
        const int nticks = static_cast<int>(std::ceil(travel_len / tick - 1e-9));
        for (int k = 0; k < nticks; ++k) {
            const double d0 = k * tick;                          // distance travelled at tick start
            const double d1 = std::min((k + 1) * tick, travel_len);
            const double pos0 = pass.start + pass.direction * d0;
            const double pos1 = pass.start + pass.direction * d1;
            // The decision applied over this segment was sampled
            // latency_shift meters of travel earlier.
            const double sample_along = pos0 - pass.direction * latency_shift;
            for (int j = 0; j < nozzles; ++j) {
                const double center = pass.center + (j - 0.5 * (nozzles - 1)) * spacing;
                const Point2 sample = travel_y ? Point2{center, sample_along}
                                               : Point2{sample_along, center};
                const double rate = prescription.rate_at(sample);
                if (rate <= 0.0) continue;
                const double perp_lo = std::max(center - 0.5 * spacing, perp_lo_lim);
                const double perp_hi = std::min(center + 0.5 * spacing, perp_hi_lim);
                if (perp_hi <= perp_lo) continue;
                const double along_lo = std::min(pos0, pos1);
                const double along_hi = std::max(pos0, pos1);
                SprayedRect sr;
                sr.rect = travel_y ? Rect{perp_lo, along_lo, perp_hi, along_hi}
                                   : Rect{along_lo, perp_lo, along_hi, perp_hi};
                sr.applied_rate_l_per_ha = rate;
                sr.pass = pass.index;
                sr.nozzle = j;
                sr.tick = k;
                rects.push_back(sr);
            }
        }
    }
    return AsAppliedMap(extent, std::move(rects));
}

double rect_union_area(std::span<const Rect> rects) {
    if (rects.empty()) return 0.0;
    // Slab sweep over the sorted x edges; per slab, merge the y intervals of
    // the rectangles spanning it. Exact for abutting lattice rectangles: a
    // slab with one merged interval contributes a single product.
    std::vector<double> xs;
    xs.reserve(rects.size() * 2);
    for (const Rect& r : rects) {
        if (r.x1 > r.x0 && r.y1 > r.y0) {
            xs.push_back(r.x0);
            xs.push_back(r.x1);
        }
    }
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    // Active lists per slab via events.
    struct Event {
        double x;
        bool open;
        std::size_t idx;
    };
    std::vector<Event> events;
    events.reserve(rects.size() * 2);
    for (std::size_t i = 0; i < rects.size(); ++i) {
        if (rects[i].x1 > rects[i].x0 && rects[i].y1 > rects[i].y0) {
            events.push_back({rects[i].x0, true, i});
            events.push_back({rects[i].x1, false, i});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.open < b.open;  // close before open at the same edge
    });

    double area = 0.0;
    std::vector<std::size_t> active;
    std::vector<std::pair<double, double>> intervals;
    std::size_t e = 0;
    for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
        const double x0 = xs[s];
        const double x1 = xs[s + 1];
        while (e < events.size() && events[e].x <= x0) {
            if (events[e].open)
                active.push_back(events[e].idx);
            else
                active.erase(std::find(active.begin(), active.end(), events[e].idx));
            ++e;
        }
        if (active.empty()) continue;
        intervals.clear();
        for (const std::size_t idx : active) intervals.emplace_back(rects[idx].y0, rects[idx].y1);
        std::sort(intervals.begin(), intervals.end());
        double covered = 0.0;
        double lo = intervals[0].first, hi = intervals[0].second;
        for (std::size_t i = 1; i < intervals.size(); ++i) {
            if (intervals[i].first <= hi) {
                hi = std::max(hi, intervals[i].second);
            } else {
                covered += hi - lo;
                lo = intervals[i].first;
                hi = intervals[i].second;
            }
        }
        covered += hi - lo;
        area += (x1 - x0) * covered;
    }
    return area;
}

double AsAppliedMap::sprayed_area_m2() const {
    if (!sprayed_area_) {
        std::vector<Rect> rs;
        rs.reserve(rects_.size());
        for (const SprayedRect& r : rects_) rs.push_back(r.rect);
        sprayed_area_ = rect_union_area(rs);
    }
    return *sprayed_area_;
}

AccuracyReport application_accuracy(const AsAppliedMap& as_applied,
                                    const PrescriptionMap& prescription) {
    if (!prescription.rates_assigned)
        throw InvalidInputError("prescription rates have not been assigned");
    if (!as_applied.extent().approx_equals(prescription.extent, 1e-9))
        throw InvalidInputError("as-applied and prescription extents differ");

    AccuracyReport r;
    r.total_m2 = prescription.extent.area();
    r.expected_no_spray_m2 = prescription.no_spray_area_m2();
    r.sprayed_m2 = as_applied.sprayed_area_m2();
    r.measured_no_spray_m2 = r.total_m2 - r.sprayed_m2;
    r.savings_frac = r.total_m2 > 0.0 ? r.measured_no_spray_m2 / r.total_m2 : 0.0;
    if (r.expected_no_spray_m2 > 0.0) r.accuracy = r.measured_no_spray_m2 / r.expected_no_spray_m2;
    return r;
}

AccuracyReport savings_report(double measured_no_spray_m2, double total_m2,
                              std::optional<double> expected_no_spray_m2) {
    if (total_m2 <= 0.0) throw InvalidInputError("total area must be positive");
    AccuracyReport r;
    r.total_m2 = total_m2;
    r.measured_no_spray_m2 = measured_no_spray_m2;
    r.sprayed_m2 = total_m2 - measured_no_spray_m2;
    r.savings_frac = measured_no_spray_m2 / total_m2;
    if (expected_no_spray_m2) {
        r.expected_no_spray_m2 = *expected_no_spray_m2;
        if (*expected_no_spray_m2 > 0.0) r.accuracy = measured_no_spray_m2 / *expected_no_spray_m2;
    }
    return r;
}

double implied_expected_no_spray_m2(double measured_no_spray_m2, double accuracy) {
    if (accuracy <= 0.0) throw InvalidInputError("accuracy must be positive");
    return measured_no_spray_m2 / accuracy;
}

double spray_overlap_area_m2(const AsAppliedMap& as_applied, const PrescriptionMap& prescription) {
    // Cells are disjoint, so the per-cell overlap unions sum exactly.
    double overlap = 0.0;
    std::vector<Rect> pieces;
    for (const Cell& c : prescription.cells) {
        if (c.rate_l_per_ha <= 0.0) continue;
        pieces.clear();
        for (const SprayedRect& sr : as_applied.rects()) {
            const Rect isect = sr.rect.intersect(c.rect);
            if (!isect.empty()) pieces.push_back(isect);
        }
        overlap += rect_union_area(pieces);
    }
    return overlap;
}

double spray_symmetric_difference_m2(const AsAppliedMap& as_applied,
                                     const PrescriptionMap& prescription) {
    const double sprayed = as_applied.sprayed_area_m2();
    const double prescribed = prescription.spray_area_m2();
    const double overlap = spray_overlap_area_m2(as_applied, prescription);
    return sprayed + prescribed - 2.0 * overlap;
}

namespace {

json rect_ring(const Rect& r) {
    return json::array({json::array({r.x0, r.y0}), json::array({r.x1, r.y0}),
                        json::array({r.x1, r.y1}), json::array({r.x0, r.y1}),
                        json::array({r.x0, r.y0})});
}

}  // namespace

void export_as_applied(const AsAppliedMap& map, const std::string& path) {
    json doc;
    doc["type"] = "FeatureCollection";
    doc["crs"] = {{"type", "name"}, {"properties", {{"name", "local:planar-meters"}}}};
    doc["properties"] = {
        {"document", "as-applied"},
        {"extent", json::array({map.extent().x0, map.extent().y0, map.extent().x1,
                                map.extent().y1})},
    };
    json features = json::array();
    for (const SprayedRect& r : map.rects()) {
        json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", json::array({rect_ring(r.rect)})}};
        f["properties"] = {{"applied_rate_l_per_ha", r.applied_rate_l_per_ha},
                           {"pass", r.pass},
                           {"nozzle", r.nozzle},
                           {"tick", r.tick}};
        features.push_back(std::move(f));
    }
    doc["features"] = std::move(features);
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);
    out << doc.dump(1, '\t') << "\n";
    if (!out) throw IoError("failed writing " + path);
}

AsAppliedMap import_as_applied(const std::string& path) {
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
    if (!doc.contains("properties") || !doc["properties"].contains("extent"))
        throw ParseError(path + ": missing extent");
    const json& ext = doc["properties"]["extent"];
    Rect extent{ext.at(0).get<double>(), ext.at(1).get<double>(), ext.at(2).get<double>(),
                ext.at(3).get<double>()};

    std::vector<SprayedRect> rects;
    if (doc.contains("features")) {
        const json& features = doc["features"];
        if (!features.is_array()) throw ParseError(path + ": features must be an array");
        for (std::size_t i = 0; i < features.size(); ++i) {
            const std::string context = path + ": feature " + std::to_string(i);
            const json& f = features[i];
            const json& geom = f.at("geometry");
            if (geom.value("type", "") != "Polygon")
                throw ParseError(context + ": geometry must be a Polygon");
            const json& coords = geom.at("coordinates");
            if (!coords.is_array() || coords.size() != 1)
                throw ParseError(context + ": polygon must have exactly one ring");
            const json& ring = coords[0];
            if (!ring.is_array() || ring.size() != 5)
                throw ParseError(context + ": ring must have 5 points");
            double xs[5], ys[5];
            for (int k = 0; k < 5; ++k) {
                xs[k] = ring.at(k).at(0).get<double>();
                ys[k] = ring.at(k).at(1).get<double>();
            }
            if (xs[0] != xs[4] || ys[0] != ys[4]) throw ParseError(context + ": ring not closed");
            if (!(xs[0] == xs[3] && xs[1] == xs[2] && ys[0] == ys[1] && ys[2] == ys[3]))
                throw ParseError(context + ": ring is not an axis-aligned rectangle");
            SprayedRect sr;
            sr.rect = {xs[0], ys[0], xs[1], ys[2]};
            if (sr.rect.x1 <= sr.rect.x0 || sr.rect.y1 <= sr.rect.y0)
                throw ParseError(context + ": degenerate rectangle");
            const json& p = f.at("properties");
            sr.applied_rate_l_per_ha = p.at("applied_rate_l_per_ha").get<double>();
            if (sr.applied_rate_l_per_ha < 0.0) throw ParseError(context + ": negative rate");
            sr.pass = p.at("pass").get<int>();
            sr.nozzle = p.at("nozzle").get<int>();
            sr.tick = p.at("tick").get<int>();
            rects.push_back(sr);
        }
    }
    return AsAppliedMap(extent, std::move(rects));
}

bool as_applied_equal(const AsAppliedMap& a, const AsAppliedMap& b, double geom_eps) {
    if (!a.extent().approx_equals(b.extent(), geom_eps)) return false;
    if (a.rects().size() != b.rects().size()) return false;
    for (std::size_t i = 0; i < a.rects().size(); ++i) {
        const SprayedRect& ra = a.rects()[i];
        const SprayedRect& rb = b.rects()[i];
        if (!ra.rect.approx_equals(rb.rect, geom_eps)) return false;
        if (ra.applied_rate_l_per_ha != rb.applied_rate_l_per_ha) return false;
        if (ra.pass != rb.pass || ra.nozzle != rb.nozzle || ra.tick != rb.tick) return false;
    }
    return true;
}

}  // namespace rowspray
