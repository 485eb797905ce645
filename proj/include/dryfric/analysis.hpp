#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dryfric/params.hpp"
#include "dryfric/real.hpp"
#include "dryfric/return_map.hpp"

namespace dryfric {

template <class R>
struct Interval {
    R lo, hi;
    bool contains(R x, R tol = R(0)) const { return x >= lo - tol && x <= hi + tol; }
    R width() const { return hi - lo; }
    R mid() const { return (lo + hi) / 2; }
};

struct DiscontinuityPoint {
    double z;         // refined discontinuity phase
    double t1_left;   // one-sided limit T1(z - 0)
    double t1_right;  // one-sided limit T1(z + 0)
    double residual;  // tangency-condition residual at (z, double root)
};

struct DiscontinuitySet {
    double lo = 0.0, hi = 0.0;
    std::vector<DiscontinuityPoint> points;
};

// The two disjoint segments whose map images cover [t2, 3*pi/2], plus the
// discontinuity structure they were carved from.
template <class R>
struct CoveringPair {
    Interval<R> J[2];
    Interval<R> target; // [t2, 3*pi/2]
    DiscontinuitySet disc;
    int branch[2] = {-1, -1}; // indices into disc.points of each branch's left edge
};

using SymbolWord = std::vector<int>;

template <class R>
struct PeriodicOrbit {
    R point;
    int period;
    SymbolWord word;
    R residual; // |T^m(point) - point|
};

struct ItineraryResult {
    SymbolWord symbols;
    std::optional<int> escape; // index of the first iterate outside J0 u J1
    bool full() const { return !escape.has_value(); }
};

// ---------------------------------------------------------------------------

// Metric on boolean words: sum over k of 2^-k |s1_k - s2_k|.
inline double symbol_distance(const SymbolWord& s1, const SymbolWord& s2) {
    if (s1.size() != s2.size())
        throw LengthMismatch("symbol_distance: words must have equal length");
    double d = 0.0, w = 1.0;
    for (size_t k = 0; k < s1.size(); ++k, w /= 2) d += w * std::abs(s1[k] - s2[k]);
    return d;
}

namespace detail {

// Both equations G1 = 0 and dG1/dt = 0 hold at a discontinuity of T1;
// Newton on the pair pins the tangency (theta, t) from a bisection seed.
inline bool tangency_newton(const Params& p, double& theta, double& t, int iters = 40) {
    for (int i = 0; i < iters; ++i) {
        const double f1 = eval_G1(p, theta, t);
        const double f2 = dG1_dt(p, theta, t);
        const double a11 = dG1_dtheta(p, theta, t), a12 = f2 + 0; // dG1/dt
        const double a21 = -2 * p.b - p.a * std::sin(theta), a22 = d2G1_dt2(p, t);
        const double det = a11 * a22 - a12 * a21;
        if (det == 0.0) return false;
        const double dth = (f1 * a22 - f2 * a12) / det;
        const double dt = (f2 * a11 - f1 * a21) / det;
        theta -= dth;
        t -= dt;
        if (std::abs(dth) < 1e-15 && std::abs(dt) < 1e-15) return true;
    }
    return std::abs(eval_G1(p, theta, t)) < 1e-10 && std::abs(dG1_dt(p, theta, t)) < 1e-10;
}

inline double eq14_residual(double theta, double theta1) {
    return std::abs(2 * (std::sin(theta1) - std::sin(theta)) / (theta1 - theta) -
                    std::cos(theta) - std::cos(theta1));
}

} // namespace detail

// Locate the discontinuities of T1 on [lo, hi]: scan, refine each jump by
// bisection, then certify the tangency behind it.
template <class R>
DiscontinuitySet find_discontinuities(const Params& p, const Phases<R>& ph, R lo, R hi,
                                      int n_scan = 2000) {
    if (n_scan < 100) throw Error("find_discontinuities: n_scan must be >= 100");
    DiscontinuitySet out;
    out.lo = to_double(lo);
    out.hi = to_double(hi);

    auto T1 = [&](R th) { return next_hit_T1(p, th, ph).theta1; };

    std::vector<R> grid(n_scan + 1), val(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i) {
        grid[i] = lo + (hi - lo) * i / n_scan;
        val[i] = T1(grid[i]);
    }
    std::vector<double> diffs(n_scan);
    for (int i = 0; i < n_scan; ++i) diffs[i] = std::abs(to_double(val[i + 1] - val[i]));
    std::vector<double> sorted = diffs;
    std::nth_element(sorted.begin(), sorted.begin() + n_scan / 2, sorted.end());
    const double median = std::max(sorted[n_scan / 2], 1e-12);
    const double threshold = 10 * median;

    const double cell = to_double(hi - lo) / n_scan;
    for (int i = 0; i < n_scan; ++i) {
        if (diffs[i] <= threshold) continue;
        // bisect the jump: classify the midpoint by which side's value it matches
        R a = grid[i], b = grid[i + 1];
        R va = val[i], vb = val[i + 1];
        using std::abs;
        for (int it = 0; it < 80 && to_double(b - a) > tol_root; ++it) {
            const R m = (a + b) / 2;
            const R vm = T1(m);
            if (abs(vm - va) <= abs(vm - vb)) {
                a = m;
                va = vm;
            } else {
                b = m;
                vb = vm;
            }
        }
        DiscontinuityPoint pt;
        pt.z = to_double((a + b) / 2);
        const double dl = 1e-9;
        pt.t1_left = to_double(T1(R(pt.z - dl)));
        pt.t1_right = to_double(T1(R(pt.z + dl)));
        // a steep but smooth stretch refines to a vanishing value gap;
        // keep only genuine jumps
        if (std::abs(pt.t1_left - pt.t1_right) < 1e-3) continue;
        // Certify via the tangency system.  The double root sits on the side
        // whose one-sided limit it continues: the left limit when a root pair
        // annihilates at z, the right limit when one is created; seed Newton
        // from both and keep the converged, nearby solution.
        pt.residual = detail::eq14_residual(pt.z, pt.t1_left);
        for (double seed : {pt.t1_left, pt.t1_right}) {
            double zn = pt.z, tn = seed;
            if (detail::tangency_newton(p, zn, tn) && std::abs(zn - pt.z) < 10 * cell) {
                const double res = detail::eq14_residual(zn, tn);
                if (res < pt.residual) {
                    pt.z = zn;
                    pt.residual = res;
                }
            }
        }
        if (!out.points.empty()) {
            const double gap = std::abs(pt.z - out.points.back().z);
            if (gap < 100 * tol_root) continue; // same jump seen from the neighbouring cell
            if (gap < cell)
                throw ScanTooCoarse("find_discontinuities: two jumps inside one scan cell");
        }
        out.points.push_back(pt);
    }
    return out;
}

namespace detail {

// theta in [lo, hi] with T(theta) = y, located by sign-change bisection on
// the continuous branch.  Stops when the image residual is below img_tol or
// the bracket collapses to adjacent representable values.
template <class R>
R preimage_on_branch(const Params& p, const Phases<R>& ph, R lo, R hi, R y,
                     double img_tol = 1e-12) {
    using std::abs;
    auto Tv = [&](R th) { return return_T(p, th, ph).theta_out; };
    R flo = Tv(lo) - y, fhi = Tv(hi) - y;
    if (abs(flo) < img_tol) return lo;
    if (abs(fhi) < img_tol) return hi;
    if ((flo < 0) == (fhi < 0))
        throw CoveringNotFound("preimage_on_branch: target not bracketed by branch image");
    R best = abs(flo) < abs(fhi) ? lo : hi;
    R best_res = abs(flo) < abs(fhi) ? abs(flo) : abs(fhi);
    for (int i = 0; i < 240; ++i) {
        const R mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        const R fm = Tv(mid) - y;
        if (abs(fm) < best_res) {
            best = mid;
            best_res = abs(fm);
        }
        if (best_res < img_tol) return best;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return best;
}

} // namespace detail

// Constructive covering pair: locate the discontinuities of T1 inside
// [101*pi/100, 51*pi/50], treat consecutive interior pairs as candidate
// continuity branches, and shrink the two leftmost valid branches so each
// maps exactly onto [t2, 3*pi/2].
template <class R>
CoveringPair<R> find_covering_pair(const Params& p, const Phases<R>& ph, int n_scan = 2000) {
    const R pi = pi_of<R>();
    CoveringPair<R> cp;
    cp.target = {ph.t2, 3 * pi / 2};

    if (!p.standard())
        throw CoveringNotFound("find_covering_pair: params outside the standard regime");
    if (!check_lemma1(p).holds)
        throw CoveringNotFound("find_covering_pair: rest-start predicate fails");
    const R L2_lo = 101 * pi / 100, L2_hi = 51 * pi / 50;
    if (!(ph.t2 < L2_lo))
        throw CoveringNotFound("find_covering_pair: t2 >= 101*pi/100, b/a too large");

    cp.disc = find_discontinuities(p, ph, L2_lo, L2_hi, n_scan);
    const auto& zs = cp.disc.points;
    if (zs.size() < 3)
        throw CoveringNotFound("find_covering_pair: fewer than 3 discontinuities in L2 (" +
                               std::to_string(zs.size()) + " found); b/a too large");

    auto Tv = [&](R th) { return return_T(p, th, ph).theta_out; };
    const R three_half_pi = cp.target.hi;
    const R plateau_tol = R(1e-9);
    auto on_plateau = [&](R th) { return Tv(th) <= ph.t2 + plateau_tol; };

    int placed = 0;
    for (size_t i = 0; placed < 2 && i + 1 < zs.size(); ++i) {
        const R zl = R(zs[i].z), zr = R(zs[i + 1].z);
        const R w = zr - zl;
        if (!(w > 0)) continue;
        const R za = zl + std::min(R(1e-7), w / 8);
        R va;
        try { va = Tv(za); } catch (const Error&) { continue; }
        if (!(va > three_half_pi)) continue;  // branch must start above the target top

        // Walk geometrically toward zr: the branch decreases through the
        // target onto a T = t2 plateau, beyond which microstructure (long
        // regime chains, sliver branches) can appear; stop at the plateau.
        R th_false = za, th_true = R(0);
        bool found = false;
        R d_prev = w / 2;
        for (R d = w / 4; d > R(1e-12) && !found; d_prev = d, d /= 2) {
            const R th = zr - d;
            if (!(th > za)) continue;
            try {
                if (on_plateau(th)) { th_true = th; found = true; }
                else th_false = th;
            } catch (const Error&) {
                // Overshot past the plateau: re-scan [zr-d_prev, zr-d] finely.
                for (int k = 1; k < 32 && !found; ++k) {
                    const R ts = zr - d_prev + (d_prev - d) * R(k) / R(32);
                    if (!(ts > th_false)) continue;
                    try {
                        if (on_plateau(ts)) { th_true = ts; found = true; }
                        else th_false = ts;
                    } catch (const Error&) { break; }
                }
                break;
            }
        }
        if (!found) continue;  // branch never reaches the plateau

        // Pin down the scenario-A / plateau boundary; keep the plateau side.
        R lo = th_false, hi = th_true;
        for (int it = 0; it < 200; ++it) {
            const R mid = (lo + hi) / 2;
            if (mid == lo || mid == hi) break;
            if (on_plateau(mid)) hi = mid;
            else lo = mid;
        }
        const R r = hi;  // T(r) = t2 exactly (scenario B)

        R l;
        try {
            l = detail::preimage_on_branch(p, ph, za, r, three_half_pi);
        } catch (const CoveringNotFound&) {
            continue;
        }
        if (!(r > l)) continue;
        cp.J[placed] = {l, r};
        cp.branch[placed] = static_cast<int>(i);
        ++placed;
    }
    if (placed < 2)
        throw CoveringNotFound("find_covering_pair: fewer than two valid branches");
    return cp;
}

// Apply T n times and return the final phase.
template <class R>
R iterate_T(const Params& p, R theta, int n, const Phases<R>& ph) {
    for (int i = 0; i < n; ++i) theta = return_T(p, theta, ph).theta_out;
    return theta;
}

// Boolean itinerary of p0: symbol j is the index of the covering segment
// containing T^j(p0); Escape(j) if an iterate lies in neither.
template <class R>
ItineraryResult itinerary(const Params& p, R p0, int k, const CoveringPair<R>& cover,
                          const Phases<R>& ph, double tol = 1e-7) {
    ItineraryResult res;
    R x = p0;
    for (int j = 0; j < k; ++j) {
        if (cover.J[0].contains(x, R(tol))) res.symbols.push_back(0);
        else if (cover.J[1].contains(x, R(tol))) res.symbols.push_back(1);
        else {
            res.escape = j;
            return res;
        }
        if (j + 1 < k) x = return_T(p, x, ph).theta_out;
    }
    return res;
}

// Nested-interval construction: the returned interval realizes the word as
// the first k symbols of every point in it.
template <class R>
Interval<R> shadow_point(const Params& p, const SymbolWord& word, const CoveringPair<R>& cover,
                         const Phases<R>& ph) {
    if (word.empty()) throw Error("shadow_point: empty word");
    Interval<R> I = cover.J[word[0]];
    for (size_t j = 1; j < word.size(); ++j) {
        const Interval<R>& target = cover.J[word[j]];
        // endpoints of the sub-interval with T^j-image exactly the next segment
        auto Fj = [&](R th) { return iterate_T(p, th, static_cast<int>(j), ph); };
        R e1, e2;
        {
            // generic sign-change bisection on the continuous composition
            auto solve = [&](R y) {
                using std::abs;
                R lo = I.lo, hi = I.hi;
                R flo = Fj(lo) - y, fhi = Fj(hi) - y;
                if (abs(flo) < R(1e-12)) return lo;
                if (abs(fhi) < R(1e-12)) return hi;
                if ((flo < 0) == (fhi < 0))
                    throw Error("shadow_point: branch image does not bracket the target");
                R best = lo;
                R best_res = abs(flo);
                if (abs(fhi) < best_res) { best = hi; best_res = abs(fhi); }
                for (int it = 0; it < 260; ++it) {
                    const R mid = (lo + hi) / 2;
                    if (mid == lo || mid == hi) break;
                    const R fm = Fj(mid) - y;
                    if (abs(fm) < best_res) { best = mid; best_res = abs(fm); }
                    if (best_res < R(1e-12)) break;
                    if ((fm < 0) == (flo < 0)) { lo = mid; flo = fm; }
                    else { hi = mid; fhi = fm; }
                }
                return best;
            };
            e1 = solve(target.lo);
            e2 = solve(target.hi);
        }
        I = {std::min(e1, e2), std::max(e1, e2)};
    }
    return I;
}

// Periodic point of minimal period m realizing the given word (default
// 0...01), found as a sign change of T^m(x) - x on the shadow interval.
template <class R>
PeriodicOrbit<R> periodic_point(const Params& p, int m, SymbolWord word,
                                const CoveringPair<R>& cover, const Phases<R>& ph) {
    using std::abs;
    if (m < 1) throw Error("periodic_point: m must be >= 1");
    if (word.empty()) {
        word.assign(m, 0);
        word.back() = 1;
    }
    if (static_cast<int>(word.size()) != m)
        throw LengthMismatch("periodic_point: word length must equal the period");

    const Interval<R> I = shadow_point(p, word, cover, ph);
    auto g = [&](R x) { return iterate_T(p, x, m, ph) - x; };
    R lo = I.lo, hi = I.hi;
    R flo = g(lo), fhi = g(hi);
    if ((flo < 0) == (fhi < 0) && flo != 0 && fhi != 0)
        throw NoSignChange("periodic_point: T^m - x has constant sign on the shadow interval [" +
                           std::to_string(to_double(lo)) + ", " + std::to_string(to_double(hi)) +
                           "], endpoint values " + std::to_string(to_double(flo)) + ", " +
                           std::to_string(to_double(fhi)));
    R best = lo;
    R best_res = abs(flo);
    if (abs(fhi) < best_res) { best = hi; best_res = abs(fhi); }
    for (int it = 0; it < 260; ++it) {
        const R mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        const R fm = g(mid);
        if (abs(fm) < best_res) { best = mid; best_res = abs(fm); }
        if (best_res < R(tol_orbit) / 100) break;
        if ((fm < 0) == (flo < 0)) { lo = mid; flo = fm; }
        else { hi = mid; fhi = fm; }
    }

    PeriodicOrbit<R> orbit;
    orbit.point = best;
    orbit.period = m;
    orbit.word = word;
    orbit.residual = best_res;
    if (to_double(best_res) >= tol_orbit)
        throw NoSignChange("periodic_point: residual " + std::to_string(to_double(best_res)) +
                           " exceeds tolerance");
    // Minimality is symbolic, not metric: nearby points of different periods
    // cluster far below any workable distance threshold, but a primitive word
    // realised as the exact itinerary forces the minimal period to be m.
    for (int d = 1; d < m; ++d) {
        if (m % d != 0) continue;
        bool rep = true;
        for (int j = d; j < m && rep; ++j) rep = (word[j] == word[j % d]);
        if (rep) throw Error("periodic_point: word is a power of a shorter word");
    }
    const auto itin = itinerary(p, best, m, cover, ph);
    if (itin.escape || itin.symbols != word)
        throw Error("periodic_point: itinerary does not realise the requested word");
    return orbit;
}

// Superstability report for the fixed point t2.
struct SuperstableReport {
    bool condition21 = false; // theta2 mod 2pi in (t1, t2)
    bool condition22 = false; // theta2 mod 2pi in (t3, 2pi) u [0, t0)
    bool robust = false;      // both transition roots are simple
    double theta1 = 0.0;
    double theta2 = 0.0;
    double epsilon_est = 0.0; // certified one-sided neighbourhood mapped to t2
};

inline SuperstableReport superstable_check(const Params& p) {
    const auto ph = derived_phases<double>(p);
    SuperstableReport rep;
    const auto hit = next_hit_T1<double>(p, ph.t2, ph);
    rep.theta1 = hit.theta1;
    rep.theta2 = progression_stop<double>(p, ph.t2, hit.theta1, ph);
    const double phi2 = detail::snap_phase(wrap_phase(rep.theta2), ph);
    rep.condition21 = phi2 > ph.t1 && phi2 < ph.t2;
    rep.condition22 = (phi2 > ph.t3 && phi2 < 2 * pi_of<double>()) || (phi2 >= 0 && phi2 < ph.t0);
    const double rob_tol = 1e-8 * p.a;
    rep.robust = std::abs(dG1_dt(p, ph.t2, rep.theta1)) > rob_tol &&
                 std::abs(dG2_dtheta2(p, rep.theta2)) > rob_tol;

    if (rep.condition21 || rep.condition22) {
        // Sample up to and including the right endpoint: otherwise the
        // bisection certifies a bracket whose unsampled tail may already be
        // past the plateau edge.
        auto constant_on = [&](double eps) {
            for (int i = 1; i <= 128; ++i) {
                const double th = ph.t2 + eps * i / 128.0;
                try {
                    if (std::abs(return_T<double>(p, th, ph).theta_out - ph.t2) > tol_root)
                        return false;
                } catch (const Error&) {
                    return false;
                }
            }
            return true;
        };
        double eps = 1e-6;
        if (constant_on(eps)) {
            const double cap = to_double(ph.t3 - ph.t2) * 0.999;
            while (eps * 2 < cap && constant_on(eps * 2)) eps *= 2;
            double bad = std::min(eps * 2, cap);
            for (int i = 0; i < 20; ++i) {
                const double mid = (eps + bad) / 2;
                (constant_on(mid) ? eps : bad) = mid;
            }
            rep.epsilon_est = eps;
        }
    }
    return rep;
}

} // namespace dryfric
