#include <doctest.h>

#include <fstream>

#include <cmath>
#include <random>

#include "rowspray/analysis.hpp"
#include "test_util.hpp"

using namespace rowspray;
using rowspray::test::TempDir;

namespace {

std::vector<std::pair<double, double>> pairs_from_diffs(const std::vector<double>& diffs) {
    std::vector<std::pair<double, double>> pairs;
    for (const double d : diffs) pairs.emplace_back(d, 0.0);
    return pairs;
}

}  // namespace

TEST_CASE("incomplete beta against frozen reference values") {
    // Reference values computed with an independent statistics package.
    struct Fixture {
        double t;
        int df;
        double p;
    };
    const Fixture fixtures[] = {
        {1.0, 1, 0.49999999999999956},  {2.5, 3, 0.08770664700806555},
        {4.242640687119285, 4, 0.013235599563682695},
        {0.5, 10, 0.6278936057429729}, {3.0, 7, 0.019942126131992522},
    };
    for (const auto& f : fixtures)
        CHECK(student_t_two_sided_p(f.t, f.df) == doctest::Approx(f.p).epsilon(1e-8));

    CHECK(regularized_incomplete_beta(2.0, 0.5, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 0.5, 1.0) == 1.0);
    CHECK_THROWS_AS(regularized_incomplete_beta(-1.0, 0.5, 0.5), InvalidInputError);
}

TEST_CASE("paired t test fixtures") {
    SUBCASE("all pairs equal") {
        const auto r = paired_t_test(pairs_from_diffs({0, 0, 0, 0}));
        CHECK(r.t == 0.0);
        CHECK(r.p == 1.0);
        CHECK_FALSE(r.significant);
        CHECK_FALSE(r.zero_variance);
    }
    SUBCASE("d = 1..5") {
        const auto r = paired_t_test(pairs_from_diffs({1, 2, 3, 4, 5}));
        CHECK(r.t == doctest::Approx(4.242640687119285).epsilon(1e-12));
        CHECK(r.df == 4);
        CHECK(r.p == doctest::Approx(0.013235599563682695).epsilon(1e-6));
        CHECK(r.significant);
    }
    SUBCASE("single pair is insufficient") {
        CHECK_THROWS_AS(paired_t_test(pairs_from_diffs({1.0})), InsufficientDataError);
    }
    SUBCASE("zero variance with nonzero mean") {
        const auto r = paired_t_test(pairs_from_diffs({2, 2, 2}));
        CHECK(r.zero_variance);
        CHECK(r.p == 0.0);
        CHECK(r.significant);
        CHECK(std::isinf(r.t));
    }
}

TEST_CASE("t test properties") {
    std::mt19937_64 rng(71);
    const auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 10);
        std::vector<std::pair<double, double>> pairs;
        for (int i = 0; i < n; ++i) pairs.emplace_back(unit() * 10.0, unit() * 10.0);
        // Skip degenerate draws (identical differences).
        const auto r = paired_t_test(pairs);
        if (r.zero_variance) continue;

        CHECK(r.p >= 0.0);
        CHECK(r.p <= 1.0);

        // Antisymmetry: swapping the pair order negates t, keeps p.
        std::vector<std::pair<double, double>> swapped;
        for (const auto& [a, b] : pairs) swapped.emplace_back(b, a);
        const auto rs = paired_t_test(swapped);
        CHECK(rs.t == doctest::Approx(-r.t).epsilon(1e-12));
        CHECK(rs.p == doctest::Approx(r.p).epsilon(1e-12));

        // Shift invariance: adding a constant to both members changes nothing.
        std::vector<std::pair<double, double>> shifted;
        for (const auto& [a, b] : pairs) shifted.emplace_back(a + 100.0, b + 100.0);
        const auto rt = paired_t_test(shifted);
        CHECK(rt.t == doctest::Approx(r.t).epsilon(1e-6));
        CHECK(rt.p == doctest::Approx(r.p).epsilon(1e-6));

        // Scale equivariance: multiplying all observations by k > 0.
        std::vector<std::pair<double, double>> scaled;
        for (const auto& [a, b] : pairs) scaled.emplace_back(3.5 * a, 3.5 * b);
        const auto rk = paired_t_test(scaled);
        CHECK(rk.t == doctest::Approx(r.t).epsilon(1e-9));
        CHECK(rk.p == doctest::Approx(r.p).epsilon(1e-9));
    }
}

TEST_CASE("group ratio") {
    const auto obs = [](std::initializer_list<std::pair<Treatment, double>> items) {
        std::vector<PlotObservation> out;
        int id = 0;
        for (const auto& [treatment, area] : items)
            out.push_back({"plot" + std::to_string(id++), treatment, area});
        return out;
    };

    SUBCASE("definitional ratio") {
        const auto o = obs({{Treatment::SSWC, 3.4}, {Treatment::NoSSWC, 1.0}});
        CHECK(*group_ratio(o) == doctest::Approx(3.4));
    }
    SUBCASE("equal groups give 1") {
        const auto o = obs({{Treatment::SSWC, 2.0}, {Treatment::NoSSWC, 2.0}});
        CHECK(*group_ratio(o) == doctest::Approx(1.0));
    }
    SUBCASE("means 17 over 5") {
        const auto o = obs({{Treatment::SSWC, 16.0},
                            {Treatment::SSWC, 18.0},
                            {Treatment::NoSSWC, 4.0},
                            {Treatment::NoSSWC, 6.0}});
        CHECK(*group_ratio(o) == doctest::Approx(3.4));
    }
    SUBCASE("empty group is an error") {
        const auto o = obs({{Treatment::SSWC, 1.0}});
        CHECK_THROWS_AS(group_ratio(o), InsufficientDataError);
    }
    SUBCASE("zero denominator is undefined") {
        const auto o = obs({{Treatment::SSWC, 1.0}, {Treatment::NoSSWC, 0.0}});
        CHECK_FALSE(group_ratio(o).has_value());
    }
}

TEST_CASE("observation csv round trip and pairing") {
    TempDir tmp("obs");
    std::vector<PlotObservation> obs{
        {"p1", Treatment::SSWC, 17.0},  {"p2", Treatment::SSWC, 12.5},
        {"p1n", Treatment::NoSSWC, 5.0}, {"p2n", Treatment::NoSSWC, 4.5},
    };
    write_observations_csv(tmp.file("obs.csv"), obs);
    const auto loaded = read_observations_csv(tmp.file("obs.csv"));
    REQUIRE(loaded.size() == 4);
    CHECK(loaded[0].plot_id == "p1");
    CHECK(loaded[2].treatment == Treatment::NoSSWC);
    CHECK(loaded[3].weed_area_m2 == 4.5);

    const auto pairs = pair_observations(loaded);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].first == 17.0);
    CHECK(pairs[0].second == 5.0);

    SUBCASE("unbalanced groups cannot pair") {
        auto extra = loaded;
        extra.push_back({"p3", Treatment::SSWC, 9.0});
        CHECK_THROWS_AS(pair_observations(extra), InsufficientDataError);
    }
    SUBCASE("bad treatment label rejected") {
        std::ofstream out(tmp.file("bad.csv"));
        out << "plot_id,treatment,weed_area_m2\np1,WRONG,1.0\n";
        out.close();
        CHECK_THROWS_AS(read_observations_csv(tmp.file("bad.csv")), ParseError);
    }
}
