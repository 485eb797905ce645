#pragma once

#include <cmath>
#include <string>

#include "dryfric/errors.hpp"
#include "dryfric/real.hpp"

namespace dryfric {

// Absolute tolerance (radians) for every transition instant.
inline constexpr double tol_root = 1e-12;
// Near-tangency detection scale, multiplied by the force amplitude a.
inline constexpr double tol_graze_rel = 1e-9;
// Zero-velocity impact threshold, multiplied by a.
inline constexpr double tol_v_rel = 1e-10;
// Default scan step for first_root_after.
inline constexpr double h_scan_default = 1e-3;
// Periodic-orbit residual tolerance.
inline constexpr double tol_orbit = 1e-10;
// Tangency-condition residual bound at refined discontinuities.
inline constexpr double tol_disc = 1e-6;

// Unique root of pi - theta = cot(theta/2) on (0, pi/2].
double reference_theta0();

// Forcing a*sin(t) + 2b with dry-friction bound q.  Mass is unit, forcing
// period 2*pi, everything nondimensional.
struct Params {
    double a = 1.0;
    double b = 0.0;
    double q = 0.0;

    bool valid() const { return a > 0.0 && b > 0.0 && q > 0.0; }

    // Regime of the whole chaos construction: b < a/2 and a*sin(theta0) < q < a.
    bool standard() const {
        return valid() && b < a / 2 && q < a && q > a * std::sin(reference_theta0());
    }

    // Weaker regime sufficient for the superstability analysis: q < a.
    bool relaxed() const { return valid() && q < a; }

    double tol_graze() const { return tol_graze_rel * a; }
    double tol_v() const { return tol_v_rel * a; }
};

// Degenerate long-run behaviours when the return map is undefined.
enum class DegenerateRegime {
    None,              // map T is defined (modulo the small-b/a requirement)
    EventualStop,      // q >= a + 2b: every motion ends in the stop regime
    EternalProgression,// q <= 2b: progression never ends
    NoFreePhase        // 2b >= a: forcing never changes sign, no release window
};

DegenerateRegime classify_degenerate(const Params& p);
std::string degenerate_name(DegenerateRegime r);

// Derived phase constants of the forcing.  t0 < t1 are the zeros of F - q,
// t2 < t3 the zeros of F on [0, 2*pi); c = b - q/2 is the half-acceleration
// during progression.
template <class R>
struct Phases {
    R theta0;
    R t0, t1, t2, t3;
    R c;
};

// F(t) = a sin t + 2b.
template <class R>
R forcing(const Params& p, R t) {
    using std::sin;
    return R(p.a) * sin(t) + 2 * R(p.b);
}

namespace detail {

// pi - theta - cot(theta/2) climbs from -inf to a positive value on
// (0, pi/2]; bisect its unique zero.
template <class R>
R solve_theta0() {
    using std::tan;
    const R pi = pi_of<R>();
    auto f = [&](R th) { return pi - th - 1 / tan(th / 2); };
    R lo = R(1e-6), hi = pi / 2 - R(1e-6);
    for (int i = 0; i < 300; ++i) {
        R mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

} // namespace detail

template <class R>
Phases<R> derived_phases(const Params& p) {
    using std::asin;
    if (!p.valid())
        throw NoSuchPhase("params must satisfy a > 0, b > 0, q > 0");
    if (2 * p.b >= p.a)
        throw NoSuchPhase("2b >= a: forcing F(t) has no zeros");
    if (p.q - 2 * p.b >= p.a)
        throw NoSuchPhase("q - 2b >= a: F(t) - q has no zeros");
    const R pi = pi_of<R>();
    Phases<R> ph;
    ph.theta0 = detail::solve_theta0<R>();
    ph.t0 = asin(R(p.q - 2 * p.b) / R(p.a));
    ph.t1 = pi - ph.t0;
    ph.t2 = pi + asin(2 * R(p.b) / R(p.a));
    ph.t3 = 2 * pi - asin(2 * R(p.b) / R(p.a));
    ph.c = R(p.b) - R(p.q) / 2;
    return ph;
}

} // namespace dryfric
