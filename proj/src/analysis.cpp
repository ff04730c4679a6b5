#include "rowspray/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace rowspray {

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 3e-16;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw InvalidInputError("beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * beta_continued_fraction(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
    if (df < 1) throw InvalidInputError("degrees of freedom must be >= 1");
    if (!std::isfinite(t)) return 0.0;
    const double nu = static_cast<double>(df);
    const double x = nu / (nu + t * t);
    const double p = regularized_incomplete_beta(0.5 * nu, 0.5, x);
    return std::clamp(p, 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const std::pair<double, double>> pairs, double alpha) {
    const std::size_t n = pairs.size();
    if (n < 2) throw InsufficientDataError("paired t test needs at least 2 pairs");

    double mean = 0.0;
    for (const auto& [a, b] : pairs) mean += a - b;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& [a, b] : pairs) {
        const double d = (a - b) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult result;
    result.df = static_cast<int>(n) - 1;
    if (sd == 0.0) {
        if (mean == 0.0) {
            result.t = 0.0;
            result.p = 1.0;
        } else {
            result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            result.p = 0.0;
            result.zero_variance = true;
        }
    } else {
        result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
        result.p = student_t_two_sided_p(result.t, result.df);
    }
    result.significant = result.p < alpha;
    return result;
}

std::optional<double> group_ratio(std::span<const PlotObservation> observations) {
    double sum_a = 0.0, sum_b = 0.0;
    std::size_t n_a = 0, n_b = 0;
    for (const PlotObservation& o : observations) {
        if (o.treatment == Treatment::SSWC) {
            sum_a += o.weed_area_m2;
            ++n_a;
        } else {
            sum_b += o.weed_area_m2;
            ++n_b;
        }
    }
    if (n_a == 0 || n_b == 0)
        throw InsufficientDataError("both treatment groups must be nonempty");
    const double mean_a = sum_a / static_cast<double>(n_a);
    const double mean_b = sum_b / static_cast<double>(n_b);
    if (mean_b == 0.0) return std::nullopt;
    return mean_a / mean_b;
}

std::vector<PlotObservation> read_observations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header) || header != "plot_id,treatment,weed_area_m2")
        throw ParseError(path + ": expected header plot_id,treatment,weed_area_m2");
    std::vector<PlotObservation> out;
    std::string record;
    int line_no = 1;
    while (std::getline(in, record)) {
        ++line_no;
        if (record.empty()) continue;
        std::stringstream ss(record);
        std::string plot, treat, area;
        if (!std::getline(ss, plot, ',') || !std::getline(ss, treat, ',') ||
            !std::getline(ss, area))
            throw ParseError(fmt::format("{}:{}: expected 3 fields", path, line_no));
        PlotObservation o;
        o.plot_id = plot;
        if (treat == "SSWC")
            o.treatment = Treatment::SSWC;
        else if (treat == "no-SSWC")
            o.treatment = Treatment::NoSSWC;
        else
            throw ParseError(fmt::format("{}:{}: treatment must be SSWC or no-SSWC", path, line_no));
        try {
            o.weed_area_m2 = std::stod(area);
        } catch (const std::exception&) {
            throw ParseError(fmt::format("{}:{}: non-numeric weed area", path, line_no));
        }
        if (o.weed_area_m2 < 0.0)
            throw ParseError(fmt::format("{}:{}: weed area must be >= 0", path, line_no));
        out.push_back(std::move(o));
    }
    return out;
}

void write_observations_csv(const std::string& path,
                            std::span<const PlotObservation> observations) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);
    out << "plot_id,treatment,weed_area_m2\n";
    for (const PlotObservation& o : observations)
        out << fmt::format("{},{},{}\n", o.plot_id,
                           o.treatment == Treatment::SSWC ? "SSWC" : "no-SSWC", o.weed_area_m2);
    if (!out) throw IoError("failed writing " + path);
}

std::vector<std::pair<double, double>> pair_observations(
    std::span<const PlotObservation> observations) {
    std::vector<PlotObservation> sswc, other;
    for (const PlotObservation& o : observations)
        (o.treatment == Treatment::SSWC ? sswc : other).push_back(o);
    if (sswc.size() != other.size())
        throw InsufficientDataError("treatment groups must have equal sizes to pair");
    const auto by_id = [](const PlotObservation& a, const PlotObservation& b) {
        return a.plot_id < b.plot_id;
    };
    std::sort(sswc.begin(), sswc.end(), by_id);
    std::sort(other.begin(), other.end(), by_id);
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(sswc.size());
    for (std::size_t i = 0; i < sswc.size(); ++i)
        pairs.emplace_back(sswc[i].weed_area_m2, other[i].weed_area_m2);
    return pairs;
}

}  // namespace rowspray
