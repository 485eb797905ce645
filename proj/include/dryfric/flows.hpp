#pragma once

#include <cmath>

#include "dryfric/params.hpp"
#include "dryfric/real.hpp"

namespace dryfric {

template <class R>
struct FlowPoint {
    R x;
    R v;
};

// Closed-form free motion (xdd = a sin t + 2b) started at (theta, x0, x1).
template <class R>
FlowPoint<R> free_flow(const Params& p, R theta, R x0, R x1, R t) {
    using std::cos;
    using std::sin;
    const R a = R(p.a), b = R(p.b);
    const R d = t - theta;
    FlowPoint<R> out;
    out.x = -a * sin(t) + b * d * d + (x1 + a * cos(theta)) * d + x0 + a * sin(theta);
    out.v = -a * cos(t) + 2 * b * d + x1 + a * cos(theta);
    return out;
}

// Closed-form progression (xdd = a sin t + 2c, c = b - q/2).
template <class R>
FlowPoint<R> prog_flow(const Params& p, R theta, R x0, R x1, R t) {
    using std::cos;
    using std::sin;
    const R a = R(p.a), c = R(p.b) - R(p.q) / 2;
    const R d = t - theta;
    FlowPoint<R> out;
    out.x = -a * sin(t) + c * d * d + (x1 + a * cos(theta)) * d + x0 + a * sin(theta);
    out.v = -a * cos(t) + 2 * c * d + x1 + a * cos(theta);
    return out;
}

// G1(theta, t) = b(t-theta)^2 - a sin t + a cos(theta)(t-theta) + a sin(theta).
// Equals the free-flow position with x0 = x1 = 0, i.e. the gap x(t) - y.
template <class R>
R eval_G1(const Params& p, R theta, R t) {
    using std::cos;
    using std::sin;
    const R a = R(p.a), b = R(p.b);
    const R d = t - theta;
    return b * d * d - a * sin(t) + a * cos(theta) * d + a * sin(theta);
}

template <class R>
R dG1_dt(const Params& p, R theta, R t) {
    using std::cos;
    const R a = R(p.a), b = R(p.b);
    return 2 * b * (t - theta) - a * cos(t) + a * cos(theta);
}

template <class R>
R d2G1_dt2(const Params& p, R t) {
    using std::sin;
    return 2 * R(p.b) + R(p.a) * sin(t);
}

template <class R>
R dG1_dtheta(const Params& p, R theta, R t) {
    using std::sin;
    return -(2 * R(p.b) + R(p.a) * sin(theta)) * (t - theta);
}

// G2(theta, theta1, theta2) = 2b(theta1-theta) + a cos(theta)
//   + 2c(theta2-theta1) - a cos(theta2): the progression velocity at theta2
// for the motion released at theta and impacting at theta1.
template <class R>
R eval_G2(const Params& p, R theta, R theta1, R theta2) {
    using std::cos;
    const R a = R(p.a), b = R(p.b), c = R(p.b) - R(p.q) / 2;
    return 2 * b * (theta1 - theta) + a * cos(theta) + 2 * c * (theta2 - theta1) - a * cos(theta2);
}

template <class R>
R dG2_dtheta2(const Params& p, R theta2) {
    using std::sin;
    return 2 * (R(p.b) - R(p.q) / 2) + R(p.a) * sin(theta2);
}

// Impact velocity at theta1 for a release at theta: dG1/dt(theta, theta1).
template <class R>
R impact_velocity(const Params& p, R theta, R theta1) {
    return dG1_dt(p, theta, theta1);
}

} // namespace dryfric
