#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rowspray/errors.hpp"

namespace rowspray {

/// Regularized incomplete beta function I_x(a, b), evaluated with the
/// continued-fraction expansion (modified Lentz); absolute error <= 1e-8
/// over the parameter ranges used by the t distribution.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of Student's t distribution:
/// P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, int df);

struct TTestResult {
    double t = 0.0;
    int df = 0;
    double p = 1.0;
    bool significant = false;
    // All differences identical and nonzero: t degenerates, p reported as 0.
    bool zero_variance = false;
};

/// Paired two-sided t test on differences d = a - b.
/// Throws InsufficientDataError for fewer than 2 pairs.
TTestResult paired_t_test(std::span<const std::pair<double, double>> pairs, double alpha = 0.05);

enum class Treatment { SSWC, NoSSWC };

struct PlotObservation {
    std::string plot_id;
    Treatment treatment = Treatment::SSWC;
    double weed_area_m2 = 0.0;
};

/// mean(SSWC weed area) / mean(no-SSWC weed area).
/// Throws InsufficientDataError if either group is empty; returns nullopt
/// when the denominator mean is zero.
std::optional<double> group_ratio(std::span<const PlotObservation> observations);

// CSV: plot_id,treatment,weed_area_m2 with treatment in {SSWC, no-SSWC}.
std::vector<PlotObservation> read_observations_csv(const std::string& path);
void write_observations_csv(const std::string& path,
                            std::span<const PlotObservation> observations);

/// Pairs SSWC against no-SSWC observations by sorted plot id within each
/// group (groups must be the same size).
std::vector<std::pair<double, double>> pair_observations(
    std::span<const PlotObservation> observations);

}  // namespace rowspray
