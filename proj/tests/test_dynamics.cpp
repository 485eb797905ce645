#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dryfric/flows.hpp"
#include "dryfric/params.hpp"

using namespace dryfric;

TEST_CASE("theta0 solves pi - theta = cot(theta/2)") {
    const double th = reference_theta0();
    CHECK(std::abs(pi_of<double>() - th - 1.0 / std::tan(th / 2)) < 1e-12);
    CHECK(th == doctest::Approx(0.81047).epsilon(1e-4));
    CHECK(std::sin(th) == doctest::Approx(0.724611).epsilon(1e-5));
}

TEST_CASE("derived phases satisfy their defining identities") {
    const Params p{1.0, 0.01, 0.8};
    const auto ph = derived_phases<double>(p);
    CHECK(p.a * std::sin(ph.t0) == doctest::Approx(p.q - 2 * p.b).epsilon(1e-14));
    CHECK(ph.t1 == doctest::Approx(pi_of<double>() - ph.t0));
    CHECK(p.a * std::sin(ph.t2) == doctest::Approx(-2 * p.b).epsilon(1e-12));
    CHECK(p.a * std::sin(ph.t3) == doctest::Approx(-2 * p.b).epsilon(1e-12));
    CHECK(ph.c == doctest::Approx(p.b - p.q / 2));
    CHECK(ph.t0 < ph.t1);
    CHECK(ph.t1 < ph.t2);
    CHECK(ph.t2 < ph.t3);
    CHECK(ph.t3 < 2 * pi_of<double>());
    CHECK(ph.t2 > pi_of<double>());
}

TEST_CASE("phase solutions live on the correct branches") {
    const Params p{2.0, 0.02, 1.5};
    const auto ph = derived_phases<double>(p);
    CHECK(ph.t0 > 0);
    CHECK(ph.t0 < pi_of<double>() / 2);
    CHECK(ph.t2 < 3 * pi_of<double>() / 2);
    CHECK(ph.t3 > 3 * pi_of<double>() / 2);
}

TEST_CASE("degenerate regimes are classified") {
    CHECK(classify_degenerate({1.0, 0.01, 0.8}) == DegenerateRegime::None);
    CHECK(classify_degenerate({1.0, 0.01, 1.5}) == DegenerateRegime::EventualStop);
    CHECK(classify_degenerate({1.0, 0.3, 0.5}) == DegenerateRegime::EternalProgression);
    CHECK(classify_degenerate({1.0, 0.6, 1.5}) == DegenerateRegime::NoFreePhase);
    CHECK_THROWS_AS(derived_phases<double>(Params{1.0, 0.6, 1.5}), NoSuchPhase);
}

TEST_CASE("standard regime matches its definition") {
    CHECK(Params{1.0, 0.01, 0.8}.standard());
    CHECK_FALSE(Params{1.0, 0.01, 0.5}.standard()); // q below a sin(theta0)
    CHECK_FALSE(Params{1.0, 0.6, 0.8}.standard());  // b above a/2
    CHECK_FALSE(Params{1.0, 0.01, 1.1}.standard()); // q above a
}

TEST_CASE("closed-form flows satisfy their equations of motion") {
    const Params p{1.3, 0.07, 0.9};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 2 * pi_of<double>());
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        const double theta = U(rng), dt = U(rng), x0 = U(rng) - 3, v0 = U(rng) - 3;
        const double t = theta + dt;
        // Differencing the first-order system keeps the roundoff term at
        // eps/h instead of eps/h^2, which a 1e-6 relative bound requires.
        auto xdd = [&](auto flow, double rhs) {
            const auto fm = flow(p, theta, x0, v0, t - h), fp = flow(p, theta, x0, v0, t + h);
            const auto f0 = flow(p, theta, x0, v0, t);
            const double dx = (fp.x - fm.x) / (2 * h);
            const double dv = (fp.v - fm.v) / (2 * h);
            CHECK(std::abs(dx - f0.v) < 1e-6 * std::max(1.0, std::abs(f0.v)));
            CHECK(std::abs(dv - rhs) < 1e-6 * std::max(1.0, std::abs(rhs)));
        };
        xdd([](const Params& pp, double th, double x, double v,
               double tt) { return free_flow(pp, th, x, v, tt); },
            forcing(p, t));
        xdd([](const Params& pp, double th, double x, double v,
               double tt) { return prog_flow(pp, th, x, v, tt); },
            forcing(p, t) - p.q);
    }
}

TEST_CASE("flow initial conditions are exact") {
    const Params p{1.0, 0.05, 0.8};
    const auto f = free_flow(p, 1.2, 0.3, -0.4, 1.2);
    CHECK(f.x == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(f.v == doctest::Approx(-0.4).epsilon(1e-15));
    const auto g = prog_flow(p, 1.2, 0.3, -0.4, 1.2);
    CHECK(g.x == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(g.v == doctest::Approx(-0.4).epsilon(1e-15));
}

TEST_CASE("G1 and G2 derivatives agree with finite differences") {
    const Params p{1.0, 0.05, 0.8};
    const double th = 3.3, t = 5.1, h = 1e-6;
    CHECK(dG1_dt(p, th, t) ==
          doctest::Approx((eval_G1(p, th, t + h) - eval_G1(p, th, t - h)) / (2 * h)).epsilon(1e-8));
    CHECK(dG1_dtheta(p, th, t) ==
          doctest::Approx((eval_G1(p, th + h, t) - eval_G1(p, th - h, t)) / (2 * h)).epsilon(1e-8));
    CHECK(d2G1_dt2<double>(p, t) ==
          doctest::Approx((dG1_dt(p, th, t + h) - dG1_dt(p, th, t - h)) / (2 * h)).epsilon(1e-8));
    const double th1 = 4.0;
    CHECK(dG2_dtheta2(p, t) ==
          doctest::Approx((eval_G2(p, th, th1, t + h) - eval_G2(p, th, th1, t - h)) / (2 * h))
              .epsilon(1e-8));
}

TEST_CASE("G1 vanishes with zero slope at departure") {
    const Params p{1.0, 0.01, 0.8};
    const auto ph = derived_phases<double>(p);
    const double th = ph.t2 + 0.3;
    CHECK(std::abs(eval_G1(p, th, th)) < 1e-14);
    CHECK(std::abs(dG1_dt(p, th, th)) < 1e-14);
}

TEST_CASE("wrap_phase canonicalizes") {
    const double two_pi = 2 * pi_of<double>();
    CHECK(wrap_phase(7.0) == doctest::Approx(7.0 - two_pi));
    CHECK(wrap_phase(-1.0) == doctest::Approx(two_pi - 1.0));
    CHECK(wrap_phase(100 * two_pi + 1.5) == doctest::Approx(1.5));
    CHECK(wrap_phase(0.0) == 0.0);
}
