#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/float128.hpp>
#include <cmath>

namespace dryfric {

// Quadruple precision scalar used by the symbolic-dynamics pipeline.
// The return map stretches neighbouring points apart by roughly two orders
// of magnitude per iterate, so nested-interval constructions a dozen levels
// deep run out of double mantissa; float128 leaves ample headroom.
using quad = boost::multiprecision::float128;

// 50-digit scalar for the deepest constructions (long periodic words,
// shadow intervals): the residual of T^m - id bottoms out near
// Lambda^m * eps, and with Lambda ~ 10^2..10^3 even float128 cannot
// certify an m = 8 orbit below 1e-10.
using deep = boost::multiprecision::cpp_bin_float_50;

template <class R>
inline R pi_of() {
    return boost::math::constants::pi<R>();
}

inline double to_double(double x) { return x; }
inline double to_double(const quad& x) { return static_cast<double>(x); }
inline double to_double(const deep& x) { return static_cast<double>(x); }

// Canonical phase representative in [0, 2*pi).
template <class R>
R wrap_phase(R t) {
    using std::floor;
    const R two_pi = 2 * pi_of<R>();
    R p = t - two_pi * floor(t / two_pi);
    if (p >= two_pi) p -= two_pi;
    if (p < R(0)) p += two_pi;
    return p;
}

} // namespace dryfric
