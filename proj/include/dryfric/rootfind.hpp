#pragma once

#include <cmath>
#include <limits>

#include "dryfric/errors.hpp"
#include "dryfric/params.hpp"

namespace dryfric {

struct RootResult {
    double t = 0.0;
    bool grazing = false; // near-tangent root (double root of f to tolerance)
};

// Bisection on a bracketed sign change; returns the midpoint of the final
// bracket.  Deterministic: purely arithmetic on the endpoints.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol = tol_root) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace detail {

// Central-difference slope used by the grazing refinement.
template <class F>
double num_slope(F&& f, double t) {
    const double d = 1e-7;
    return (f(t + d) - f(t - d)) / (2 * d);
}

} // namespace detail

// First zero of f on (t_start, t_start + horizon], located by a fixed-step
// scan for a sign change followed by bisection.  A value of f at t_start
// itself within f_start_tol of zero (common case: a double root at the
// start, where rounding leaves a stray sign) is ignored.  A local
// minimum of |f| below tol_graze with no sign change is treated as a
// tangent (grazing) root and refined on the slope sign change.
template <class F>
RootResult first_root_after(F&& f, double t_start, double horizon, double h_scan = h_scan_default,
                            double tol_graze = 0.0, double f_start_tol = 0.0) {
    if (!(h_scan > 0.0) || !(horizon > 0.0))
        throw Error("first_root_after: h_scan and horizon must be positive");
    const double t_end = t_start + horizon;
    double t_prev = t_start;
    double f_prev = f(t_start);
    bool have_sign = std::abs(f_prev) > f_start_tol;
    // trailing window for grazing detection
    double tw[3] = {t_start, t_start, t_start};
    double fw[3] = {f_prev, f_prev, f_prev};
    int nw = 1;

    for (double t = t_start + h_scan; t_prev < t_end; t += h_scan) {
        if (t > t_end) t = t_end;
        const double fc = f(t);
        if (fc == 0.0) return {t, false};
        if (have_sign && (f_prev < 0.0) != (fc < 0.0))
            return {bisect_root(f, t_prev, t), false};
        if (!have_sign) have_sign = true;

        tw[0] = tw[1]; tw[1] = tw[2]; tw[2] = t;
        fw[0] = fw[1]; fw[1] = fw[2]; fw[2] = fc;
        if (nw < 3) ++nw;
        if (nw == 3 && tol_graze > 0.0 && std::abs(fw[1]) < tol_graze &&
            std::abs(fw[1]) <= std::abs(fw[0]) && std::abs(fw[1]) <= std::abs(fw[2]) &&
            (fw[0] < 0.0) == (fw[1] < 0.0) && (fw[1] < 0.0) == (fw[2] < 0.0)) {
            const double sa = detail::num_slope(f, tw[0]);
            const double sb = detail::num_slope(f, tw[2]);
            if ((sa < 0.0) != (sb < 0.0)) {
                auto slope = [&](double u) { return detail::num_slope(f, u); };
                return {bisect_root(slope, tw[0], tw[2]), true};
            }
        }
        if (t >= t_end) break;
        t_prev = t;
        f_prev = fc;
    }
    throw NoRootInHorizon("first_root_after: no sign change or grazing dip in horizon");
}

// Newton polish of a root known to lie in [lo, hi], started from t_est.
// Falls back to a bisection step whenever Newton leaves the bracket.  Used
// to carry double-precision scan results to full precision of R.
template <class R, class F, class DF>
R polish_root(F&& g, DF&& dg, R t_est, R lo, R hi) {
    using std::abs;
    R glo = g(lo), ghi = g(hi);
    const bool bracketed = (glo < 0) != (ghi < 0);
    R t = t_est;
    if (t < lo || t > hi) t = (lo + hi) / 2;
    for (int i = 0; i < 200; ++i) {
        const R gv = g(t);
        if (gv == 0) return t;
        if (bracketed) {
            if ((gv < 0) == (glo < 0)) { lo = t; glo = gv; }
            else { hi = t; ghi = gv; }
        }
        const R dv = dg(t);
        R step = dv != 0 ? gv / dv : R(0);
        R tn = t - step;
        if (dv == 0 || tn < lo || tn > hi) tn = (lo + hi) / 2;
        if (abs(tn - t) <= abs(t) * std::numeric_limits<R>::epsilon() * 4) return tn;
        t = tn;
        if (bracketed && hi - lo <= abs(t) * std::numeric_limits<R>::epsilon() * 4)
            return (lo + hi) / 2;
    }
    return t;
}

} // namespace dryfric
