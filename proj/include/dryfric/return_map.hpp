#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dryfric/flows.hpp"
#include "dryfric/params.hpp"
#include "dryfric/real.hpp"
#include "dryfric/rootfind.hpp"

namespace dryfric {

enum class Scenario { A, B, C, Cprime, D, Dprime };

inline std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::A: return "A";
        case Scenario::B: return "B";
        case Scenario::C: return "C";
        case Scenario::Cprime: return "C'";
        case Scenario::D: return "D";
        case Scenario::Dprime: return "D'";
    }
    return "?";
}

enum class EventKind { FreeToProg, FreeToStop, ProgToFree, ProgToStop, StopToProg, StopToFree };

inline std::string event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::FreeToProg: return "free->prog";
        case EventKind::FreeToStop: return "free->stop";
        case EventKind::ProgToFree: return "prog->free";
        case EventKind::ProgToStop: return "prog->stop";
        case EventKind::StopToProg: return "stop->prog";
        case EventKind::StopToFree: return "stop->free";
    }
    return "?";
}

template <class R>
struct TransitionEvent {
    R t;
    EventKind kind;
    R x;
    R v;
};

template <class R>
struct ReturnResult {
    R theta_in;
    R theta_out;
    R theta1;                // first hit instant (unwrapped)
    std::optional<R> theta2; // first progression stop instant, when one occurs
    Scenario scenario;
    std::vector<TransitionEvent<R>> events;
    R delta_y;               // total delimiter advance over the excursion
    bool grazing_first_hit = false;
};

// Phase windows of the forcing cycle, in classification order.
enum class PhaseWindow {
    FreeRelease, // [t2, t3): a stop here releases immediately into free motion
    StopWait,    // [t1, t2): stop until the next t2
    RestWait,    // [t3, 2*pi) or [0, t0]: stop until the next t0
    Push         // (t0, t1): forcing exceeds friction, progression cannot stop
};

namespace detail {

// Boundary coincidences within tol_root are snapped toward the earlier
// regime boundary so classification is reproducible.
template <class R>
R snap_phase(R phi, const Phases<R>& ph) {
    using std::abs;
    const R two_pi = 2 * pi_of<R>();
    const R tol = R(tol_root);
    for (R b : {R(0), ph.t0, ph.t1, ph.t2, ph.t3, two_pi})
        if (abs(phi - b) < tol) return b < two_pi ? b : R(0);
    return phi;
}

template <class R>
PhaseWindow classify_phase(R phi, const Phases<R>& ph) {
    phi = snap_phase(wrap_phase(phi), ph);
    if (phi >= ph.t2 && phi < ph.t3) return PhaseWindow::FreeRelease;
    if (phi >= ph.t1 && phi < ph.t2) return PhaseWindow::StopWait;
    if (phi >= ph.t3 || phi <= ph.t0) return PhaseWindow::RestWait;
    return PhaseWindow::Push;
}

// First instant >= t with phase equal to target (target in [0, 2*pi)).
template <class R>
R next_instant_with_phase(R t, R target) {
    using std::ceil;
    const R two_pi = 2 * pi_of<R>();
    R s = target + two_pi * ceil((t - target) / two_pi);
    while (s < t) s += two_pi;
    while (s - two_pi >= t) s -= two_pi;
    return s;
}

} // namespace detail

template <class R>
struct HitResult {
    R theta1;
    bool grazing;
};

// First instant t > theta with G1(theta, t) = 0: the next mass/delimiter
// contact after a zero-velocity release at phase theta.
//
// The scan is restricted to the windows where a root is possible at all.
// Writing G1 = a * (u(t) - sin t) with the parabola
//   u(t) = (b/a)(t-theta)^2 + cos(theta)(t-theta) + sin(theta),
// roots require |u| <= 1.  For cos(theta) < 0 the parabola dives below -1
// and only climbs back after an excursion of order a/b; that gap is skipped
// analytically, which keeps the cost bounded even though the hit can be
// hundreds of radians away.
template <class R>
HitResult<R> next_hit_T1(const Params& p, R theta, const Phases<R>& ph) {
    (void)ph;
    const double a = p.a, b = p.b;
    const double th = to_double(theta);
    const double ct = std::cos(th), st = std::sin(th);
    const double band = 1e-3; // |u| margin; keeps any near-tangent dip inside the scan
    const double k = b / a;

    // u(d) = -1 - band  =>  k d^2 + ct d + (st + 1 + band) = 0
    double gap_lo = std::numeric_limits<double>::infinity(), gap_hi = gap_lo;
    {
        const double disc = ct * ct - 4 * k * (st + 1 + band);
        if (disc > 0) {
            const double sq = std::sqrt(disc);
            const double r2 = (-ct + sq) / (2 * k);
            if (r2 > 0) {
                gap_lo = std::max(0.0, (-ct - sq) / (2 * k));
                gap_hi = r2;
            }
        }
    }
    // u(d) = 1 + band  =>  k d^2 + ct d + (st - 1 - band) = 0, larger root
    const double disc2 = ct * ct - 4 * k * (st - 1 - band);
    const double d_end = (-ct + std::sqrt(disc2)) / (2 * k);

    const double h = h_scan_default;
    auto g = [&](double t) { return eval_G1(p, th, t); };

    std::optional<RootResult> hit;
    const double f_dead = 1e-12 * a; // rounding dead-band for the departure double root

    // A release within O(h) of t3 separates and re-contacts inside one scan
    // step: the gap is a cubic blip of depth ~|F(theta)|^3 that the fixed
    // step cannot see.  If G1 is already positive one step in, refine
    // geometrically towards the release to bracket the upward crossing.
    double lo_min = -std::numeric_limits<double>::infinity();
    if (g(th + h) > f_dead) {
        double d_neg = 0.0;
        for (double d = h / 2; d > 1e-11; d /= 2)
            if (g(th + d) < -f_dead) {
                d_neg = d;
                break;
            }
        if (d_neg > 0) {
            hit = RootResult{bisect_root(g, th + d_neg, th + h), false};
            lo_min = th + d_neg; // keep the departure double root out of the polish window
        } else {
            // Blip depth below the dead band: fall back to the leading-order
            // recontact instant d = -3 F(theta) / (a cos theta) of the cubic
            // gap expansion.  It always lands past t3, into the rest window.
            const double F0 = a * st + 2 * b;
            const double d_up = -3 * F0 / (a * ct);
            if (d_up > 0 && d_up < h) return {theta + R(d_up), true};
        }
    }

    const double seg1_end = std::min(gap_lo, d_end);
    if (!hit && seg1_end > 0) {
        try {
            hit = first_root_after(g, th, seg1_end + h, h, p.tol_graze(), f_dead);
        } catch (const NoRootInHorizon&) {
        }
    }
    if (!hit && gap_hi < d_end) {
        try {
            hit = first_root_after(g, th + gap_hi, d_end - gap_hi + 2 * h, h, p.tol_graze(), f_dead);
        } catch (const NoRootInHorizon&) {
        }
    }
    if (!hit)
        throw NoRootInHorizon("next_hit_T1: no contact found (internal failure for b > 0)");

    // Polish to full precision of R inside a window of one scan step.
    const R lo = R(std::max(hit->t - h, lo_min)), hi = R(hit->t + h);
    R t1;
    if (hit->grazing) {
        t1 = polish_root<R>([&](R t) { return dG1_dt(p, theta, t); },
                            [&](R t) { return d2G1_dt2<R>(p, t); }, R(hit->t), lo, hi);
    } else {
        t1 = polish_root<R>([&](R t) { return eval_G1(p, theta, t); },
                            [&](R t) { return dG1_dt(p, theta, t); }, R(hit->t), lo, hi);
    }
    const bool graz = hit->grazing || to_double(dG1_dt(p, theta, t1)) < p.tol_v();
    return {t1, graz};
}

// First zero of the progression velocity G2(theta, theta1, .) after the
// impact at theta1.  A zero-velocity impact that cannot accelerate
// (dG2/dtheta2 <= 0) stops on the spot.
template <class R>
R progression_stop(const Params& p, R theta, R theta1, const Phases<R>& ph) {
    (void)ph;
    using std::abs;
    const R v1 = eval_G2(p, theta, theta1, theta1);
    // A start with zero velocity is a stop only if it also decelerates; at a
    // rest start from phase t0 the acceleration 2c + a sin t0 vanishes exactly
    // and the positive jerk a cos t0 carries the mass forward.
    if (abs(v1) <= R(p.tol_v())) {
        using std::cos;
        const R acc = dG2_dtheta2(p, theta1);
        if (acc < -R(p.tol_v()) || (abs(acc) <= R(p.tol_v()) && R(p.a) * cos(theta1) <= 0))
            return theta1;
    }

    const double c = p.b - p.q / 2;
    const double span = c < 0 ? (std::max(to_double(v1), 0.0) + 2 * p.a) / (-2 * c) + 4 * pi_of<double>()
                              : 8 * pi_of<double>();
    const double th = to_double(theta), th1 = to_double(theta1);
    auto g = [&](double t) { return eval_G2(p, th, th1, t); };
    const RootResult hit = first_root_after(g, th1, span, h_scan_default, p.tol_graze(), 1e-12 * p.a);

    const double h = h_scan_default;
    const R lo = R(hit.t - h), hi = R(hit.t + h);
    if (hit.grazing)
        return polish_root<R>([&](R t) { return dG2_dtheta2(p, t); },
                              [&](R t) { using std::cos; return R(p.a) * cos(t); }, R(hit.t), lo,
                              hi);
    return polish_root<R>([&](R t) { return eval_G2(p, theta, theta1, t); },
                          [&](R t) { return dG2_dtheta2(p, t); }, R(hit.t), lo, hi);
}

// Stop instant of a progression started from rest at an instant with phase
// t0.  The velocity has a double zero at the start; the scan skips it and
// finds the genuine stop.
template <class R>
R rest_start_stop(const Params& p, R t0_instant, const Phases<R>& ph) {
    return progression_stop(p, t0_instant, t0_instant, ph);
}

struct Lemma1Report {
    bool holds = false;    // exact velocity at t2 of the rest-start motion is negative
    double margin = 0.0;   // that velocity
    bool analytic = false; // sufficient analytic check a + a cos t0 - (q-2b)(pi-t0) < 0
    double analytic_value = 0.0;
};

// Predicate excluding Scenarios D and D' for motions started from rest at t0.
inline Lemma1Report check_lemma1(const Params& p) {
    const auto ph = derived_phases<double>(p);
    Lemma1Report r;
    r.margin = -p.a * std::cos(ph.t2) + p.a * std::cos(ph.t0) + 2 * ph.c * (ph.t2 - ph.t0);
    r.holds = r.margin < 0.0;
    r.analytic_value = p.a + p.a * std::cos(ph.t0) - (p.q - 2 * p.b) * (pi_of<double>() - ph.t0);
    r.analytic = r.analytic_value < 0.0;
    return r;
}

// One application of the return map T: release at phase theta in [t2, t3),
// follow the excursion event by event until the next transition into free
// motion with phase in [t2, t3).
template <class R>
ReturnResult<R> return_T(const Params& p, R theta, const Phases<R>& ph) {
    theta = detail::snap_phase(wrap_phase(theta), ph);
    if (!(theta >= ph.t2 && theta < ph.t3))
        throw InvalidPhase("return_T: theta must lie in [t2, t3)");

    ReturnResult<R> res;
    res.theta_in = theta;
    res.theta1 = R(0);
    res.delta_y = R(0);
    res.scenario = Scenario::A;

    R free_from = theta; // instant of the current zero-velocity release at the delimiter
    R y = R(0);          // delimiter position relative to the start
    R last_stop = R(0);  // instant the current stop regime began
    bool first_hit_done = false;
    bool prime = false;  // first contact was grazing and led straight to a stop
    int chains = 0;      // rest-start progression chains entered
    bool chain_pending = false;

    auto finish = [&](R theta_out, Scenario s) {
        res.theta_out = detail::snap_phase(wrap_phase(theta_out), ph);
        res.scenario = s;
        return res;
    };

    auto run_progression = [&](R release, R impact) -> R {
        const R v1 = eval_G2(p, release, impact, impact);
        const R th2 = progression_stop(p, release, impact, ph);
        const R dx = prog_flow(p, impact, R(0), v1 < 0 ? R(0) : v1, th2).x;
        res.delta_y += dx;
        y += dx;
        if (!res.theta2) res.theta2 = th2;
        return th2;
    };

    for (int guard = 0; guard < 4096; ++guard) {
        R theta2;
        if (chain_pending) {
            const R t0i = detail::next_instant_with_phase(last_stop, ph.t0);
            res.events.push_back({t0i, EventKind::StopToProg, y, R(0)});
            ++chains;
            chain_pending = false;
            theta2 = run_progression(t0i, t0i);
        } else {
            const auto hit = next_hit_T1(p, free_from, ph);
            const R th1 = hit.theta1;
            if (!first_hit_done) {
                res.theta1 = th1;
                res.grazing_first_hit = hit.grazing;
                first_hit_done = true;
            }
            const R v1 = impact_velocity(p, free_from, th1);
            bool to_progression = true;
            if (hit.grazing || to_double(v1) < p.tol_v()) {
                switch (detail::classify_phase(th1, ph)) {
                    case PhaseWindow::FreeRelease:
                        // instantaneous stop; the motion returns to free flight
                        free_from = th1;
                        continue;
                    case PhaseWindow::StopWait: {
                        res.events.push_back({th1, EventKind::FreeToStop, y, R(0)});
                        const R rel = detail::next_instant_with_phase(th1, ph.t2);
                        res.events.push_back({rel, EventKind::StopToFree, y, R(0)});
                        return finish(ph.t2,
                                      chains ? (prime ? Scenario::Dprime : Scenario::D) : Scenario::B);
                    }
                    case PhaseWindow::RestWait:
                        res.events.push_back({th1, EventKind::FreeToStop, y, R(0)});
                        prime = true;
                        last_stop = th1;
                        chain_pending = true;
                        to_progression = false;
                        break;
                    case PhaseWindow::Push:
                        // zero-velocity contact where forcing beats friction
                        res.events.push_back({th1, EventKind::FreeToProg, y, R(0)});
                        break;
                }
                if (!to_progression) continue;
            } else {
                res.events.push_back({th1, EventKind::FreeToProg, y, v1});
            }
            theta2 = run_progression(free_from, th1);
        }

        switch (detail::classify_phase(theta2, ph)) {
            case PhaseWindow::FreeRelease: {
                res.events.push_back({theta2, EventKind::ProgToFree, y, R(0)});
                const Scenario s =
                    chains ? (prime ? Scenario::Dprime : Scenario::D) : Scenario::A;
                return finish(theta2, s);
            }
            case PhaseWindow::StopWait: {
                res.events.push_back({theta2, EventKind::ProgToStop, y, R(0)});
                const R rel = detail::next_instant_with_phase(theta2, ph.t2);
                res.events.push_back({rel, EventKind::StopToFree, y, R(0)});
                Scenario s;
                if (chains == 0) s = Scenario::B;
                else if (chains == 1) s = prime ? Scenario::Cprime : Scenario::C;
                else s = prime ? Scenario::Dprime : Scenario::D;
                return finish(ph.t2, s);
            }
            case PhaseWindow::RestWait:
                res.events.push_back({theta2, EventKind::ProgToStop, y, R(0)});
                last_stop = theta2;
                chain_pending = true;
                break;
            case PhaseWindow::Push:
                // The progression velocity cannot vanish in (t0, t1); landing
                // here means a root-finder inconsistency.
                throw Error("return_T: progression stop classified in (t0, t1)");
        }
    }
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", to_double(res.theta_in));
        throw HorizonExceeded(std::string("return_T: excursion did not resolve within 4096 "
                                          "regime chains (theta_in = ") + buf + ")");
    }
}

// Convenience overload at double precision.
inline ReturnResult<double> return_T(const Params& p, double theta) {
    const auto ph = derived_phases<double>(p);
    return return_T<double>(p, theta, ph);
}

} // namespace dryfric
