#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dryfric/analysis.hpp"

using namespace dryfric;

TEST_CASE("discontinuities of T1 on L0 are finite, certified, and stable") {
    const Params p{1.0, 0.01, 0.8};
    const auto ph = derived_phases<double>(p);
    const double lo = 101 * pi_of<double>() / 100, hi = 3 * pi_of<double>() / 2;
    const auto d1 = find_discontinuities(p, ph, lo, hi, 2000);
    const auto d2 = find_discontinuities(p, ph, lo, hi, 4000);
    CHECK(d1.points.size() == d2.points.size());
    CHECK(d1.points.size() > 0);
    for (const auto& pt : d1.points) {
        CHECK(pt.residual < 1e-6);
        CHECK(std::abs(pt.t1_left - pt.t1_right) > 1e-3);
    }
}

TEST_CASE("T1 is strictly decreasing between discontinuities") {
    const Params p{1.0, 0.01, 0.8};
    const auto ph = derived_phases<double>(p);
    const double lo = 101 * pi_of<double>() / 100, hi = 3 * pi_of<double>() / 2;
    const auto ds = find_discontinuities(p, ph, lo, hi, 2000);
    std::vector<double> edges{lo};
    for (const auto& pt : ds.points) edges.push_back(pt.z);
    edges.push_back(hi);
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i] + 1e-6, b = edges[i + 1] - 1e-6;
        if (!(b > a)) continue;
        double prev = next_hit_T1<double>(p, a, ph).theta1;
        for (int k = 1; k <= 30; ++k) {
            const double th = a + (b - a) * k / 30;
            const double cur = next_hit_T1<double>(p, th, ph).theta1;
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("covering pair maps each segment onto the full target") {
    const Params p{1.0, 1e-4, 0.8};
    const auto ph = derived_phases<double>(p);
    const auto cp = find_covering_pair<double>(p, ph);
    CHECK(cp.J[0].hi < cp.J[1].lo); // disjoint
    for (int j = 0; j < 2; ++j) {
        CHECK(cp.target.contains(cp.J[j].lo, 1e-9));
        CHECK(cp.target.contains(cp.J[j].hi, 1e-9));
        const double tl = return_T<double>(p, cp.J[j].lo, ph).theta_out;
        const double th = return_T<double>(p, cp.J[j].hi, ph).theta_out;
        CHECK(tl == doctest::Approx(to_double(cp.target.hi)).epsilon(1e-9));
        CHECK(th == doctest::Approx(to_double(cp.target.lo)).epsilon(1e-9));
    }
    // arbitrary interior targets have preimages on both segments
    for (double frac : {0.1, 0.5, 0.9}) {
        const double y = to_double(cp.target.lo) + frac * to_double(cp.target.width());
        for (int j = 0; j < 2; ++j) {
            const double th = detail::preimage_on_branch<double>(p, ph, cp.J[j].lo, cp.J[j].hi, y);
            CHECK(std::abs(return_T<double>(p, th, ph).theta_out - y) < 1e-8);
        }
    }
}

TEST_CASE("covering is rejected outside the small-b regime") {
    const Params p{1.0, 0.2, 0.8};
    const auto ph = derived_phases<double>(p);
    CHECK_THROWS_AS(find_covering_pair<double>(p, ph), CoveringNotFound);
}

TEST_CASE("symbol distance is the dyadic metric") {
    CHECK(symbol_distance({0, 1, 1}, {0, 1, 1}) == 0.0);
    CHECK(symbol_distance({1, 0}, {0, 0}) == 1.0);
    CHECK(symbol_distance({0, 1}, {0, 0}) == 0.5);
    CHECK_THROWS_AS(symbol_distance({0}, {0, 1}), LengthMismatch);
}

TEST_CASE("shadow points realize their words") {
    const Params p{1.0, 1e-4, 0.8};
    const auto ph = derived_phases<double>(p);
    const auto cp = find_covering_pair<double>(p, ph);
    for (const SymbolWord w : {SymbolWord{0, 1, 0, 1}, SymbolWord{1, 1, 0, 0}, SymbolWord{1, 0, 1, 1}}) {
        const auto I = shadow_point<double>(p, w, cp, ph);
        const auto itin = itinerary<double>(p, I.mid(), static_cast<int>(w.size()), cp, ph);
        REQUIRE(itin.full());
        CHECK(itin.symbols == w);
    }
}

TEST_CASE("low-period orbits close up with tiny residuals") {
    const Params p{1.0, 1e-4, 0.8};
    const auto ph = derived_phases<deep>(p);
    const auto cp = find_covering_pair<deep>(p, ph);
    for (int m = 1; m <= 3; ++m) {
        const auto orb = periodic_point<deep>(p, m, {}, cp, ph);
        CHECK(to_double(orb.residual) < 1e-10);
        const deep back = iterate_T<deep>(p, orb.point, m, ph);
        CHECK(to_double(abs(back - orb.point)) < 1e-10);
    }
}

TEST_CASE("periodic words must be primitive") {
    const Params p{1.0, 1e-4, 0.8};
    const auto ph = derived_phases<deep>(p);
    const auto cp = find_covering_pair<deep>(p, ph);
    CHECK_THROWS_AS(periodic_point<deep>(p, 4, SymbolWord{0, 1, 0, 1}, cp, ph), Error);
    CHECK_THROWS_AS(periodic_point<deep>(p, 3, SymbolWord{0, 1}, cp, ph), LengthMismatch);
}

TEST_CASE("superstable fixed point at a condition-21 triple") {
    const Params p{1.0, 0.0245, 0.8};
    const auto rep = superstable_check(p);
    CHECK(rep.condition21);
    CHECK(rep.robust);
    CHECK(rep.epsilon_est > 1e-3);
    const auto ph = derived_phases<double>(p);
    for (int i = 1; i <= 10; ++i) {
        const double th = ph.t2 + rep.epsilon_est * i / 11;
        CHECK(return_T<double>(p, th, ph).theta_out == doctest::Approx(ph.t2).epsilon(1e-12));
    }
}

TEST_CASE("no superstability claim at the reference chaotic triple") {
    const auto rep = superstable_check(Params{1.0, 0.005, 0.8});
    CHECK_FALSE(rep.condition21);
    CHECK_FALSE(rep.condition22);
    CHECK(rep.epsilon_est == 0.0);
}
