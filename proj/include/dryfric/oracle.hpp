#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dryfric/flows.hpp"
#include "dryfric/params.hpp"
#include "dryfric/return_map.hpp"

namespace dryfric {
namespace oracle {

struct OracleConfig {
    double dt = 1e-4;         // scan step (radians)
    double t_max = 0.0;       // horizon; 0 = pick from b/a at run time
    double tol_event = 1e-10; // event bisection tolerance
    int sample_stride = 0;    // record every n-th step; 0 = events only
};

enum class Regime { Free, Progression, Stop };

inline std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Free: return "free";
        case Regime::Progression: return "progression";
        case Regime::Stop: return "stop";
    }
    return "?";
}

struct MotionState {
    double t = 0.0;
    double x = 0.0;
    double v = 0.0;
    double y = 0.0;
    Regime regime = Regime::Free;
};

struct Sample {
    double t, x, v, y;
    Regime regime;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<TransitionEvent<double>> events;
    MotionState final_state;
};

namespace detail {

// Local bisection: the oracle deliberately does not reuse the root-finding
// primitives it is meant to cross-check.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Event-driven brute-force simulation.  Each regime advances with its exact
// closed-form flow in steps of dt; regime exits are bracketed by bisection.
// The optional stop_at_event callback may end the run at any transition.
inline Trajectory simulate(const Params& p, MotionState init, const OracleConfig& cfg,
                           const std::function<bool(const TransitionEvent<double>&)>& stop_at_event =
                               {}) {
    if (!(cfg.dt > 0.0) || !(cfg.tol_event < cfg.dt))
        throw Error("oracle: require dt > 0 and tol_event < dt");
    const auto ph = derived_phases<double>(p);
    const double t_max =
        cfg.t_max > 0.0 ? cfg.t_max : init.t + 8 * pi_of<double>() * (1 + p.a / p.b);
    if (init.x > init.y + 10 * cfg.tol_event)
        throw PenetrationDetected("oracle: initial state has x > y");

    Trajectory tr;
    MotionState s = init;
    long step_count = 0;

    auto record_sample = [&](const MotionState& st) {
        if (cfg.sample_stride > 0 && step_count % cfg.sample_stride == 0)
            tr.samples.push_back({st.t, st.x, st.v, st.y, st.regime});
    };
    auto emit = [&](double t, EventKind kind, double x, double v) -> bool {
        tr.events.push_back({t, kind, x, v});
        return stop_at_event && stop_at_event(tr.events.back());
    };

    record_sample(s);
    while (s.t < t_max) {
        if (s.regime == Regime::Free) {
            // flow from the segment anchor (s.t, s.x, s.v)
            const double ts = s.t, xs = s.x, vs = s.v;
            auto gap = [&](double t) { return free_flow(p, ts, xs, vs, t).x - s.y; };
            auto vel = [&](double t) { return free_flow(p, ts, xs, vs, t).v; };
            double tp = ts, gp = gap(ts);
            double g2p = gp, t2p = ts; // one more step of history for grazing checks
            bool armed = gp < 0.0;
            bool advanced = false;
            for (double t = ts + cfg.dt; s.t < t_max; t += cfg.dt, ++step_count) {
                const double gc = gap(t);
                if (armed && gc >= 0.0) {
                    const double te = gc == 0.0 ? t : detail::bisect(gap, tp, t, cfg.tol_event);
                    const double ve = vel(te);
                    s.t = te;
                    s.x = s.y;
                    s.v = ve;
                    advanced = true;
                    if (ve > p.tol_v()) {
                        s.regime = Regime::Progression;
                        if (emit(te, EventKind::FreeToProg, s.x, ve)) { tr.final_state = s; return tr; }
                    } else {
                        switch (dryfric::detail::classify_phase(te, ph)) {
                            case PhaseWindow::FreeRelease:
                                s.v = 0.0; // tangent touch; free flight continues
                                break;
                            case PhaseWindow::Push:
                                s.v = 0.0;
                                s.regime = Regime::Progression;
                                if (emit(te, EventKind::FreeToProg, s.x, 0.0)) { tr.final_state = s; return tr; }
                                break;
                            default:
                                s.v = 0.0;
                                s.regime = Regime::Stop;
                                if (emit(te, EventKind::FreeToStop, s.x, 0.0)) { tr.final_state = s; return tr; }
                                break;
                        }
                    }
                    break;
                }
                // near-tangent local maximum of the gap below zero
                if (armed && gc < gp && gp > g2p && gp > -p.tol_graze()) {
                    const double te = detail::bisect(vel, t2p, t, cfg.tol_event);
                    s.t = te;
                    s.x = s.y + gap(te);
                    s.v = 0.0;
                    advanced = true;
                    switch (dryfric::detail::classify_phase(te, ph)) {
                        case PhaseWindow::FreeRelease:
                            break; // keep flying
                        case PhaseWindow::Push:
                            s.x = s.y;
                            s.regime = Regime::Progression;
                            if (emit(te, EventKind::FreeToProg, s.y, 0.0)) { tr.final_state = s; return tr; }
                            break;
                        default:
                            s.x = s.y;
                            s.regime = Regime::Stop;
                            if (emit(te, EventKind::FreeToStop, s.y, 0.0)) { tr.final_state = s; return tr; }
                            break;
                    }
                    break;
                }
                if (!armed && gc < 0.0) armed = true;
                g2p = gp;
                t2p = tp;
                gp = gc;
                tp = t;
                s.t = t;
                s.x = free_flow(p, ts, xs, vs, t).x;
                s.v = vel(t);
                record_sample(s);
                if (s.x > s.y + 10 * cfg.tol_event)
                    throw PenetrationDetected("oracle: x exceeded y during free flight");
            }
            if (!advanced && s.t >= t_max) break;
        } else if (s.regime == Regime::Progression) {
            const double ts = s.t, xs = s.x, vs = s.v;
            auto vel = [&](double t) { return prog_flow(p, ts, xs, vs, t).v; };
            double tp = ts;
            bool armed = vs > 0.0;
            for (double t = ts + cfg.dt; ; t += cfg.dt, ++step_count) {
                if (t > t_max + cfg.dt) { s.t = t_max; break; }
                const double vc = vel(t);
                if (armed && vc <= 0.0) {
                    const double te = vc == 0.0 ? t : detail::bisect(vel, tp, t, cfg.tol_event);
                    const double xe = prog_flow(p, ts, xs, vs, te).x;
                    s.t = te;
                    s.x = xe;
                    s.y = xe;
                    s.v = 0.0;
                    if (dryfric::detail::classify_phase(te, ph) == PhaseWindow::FreeRelease) {
                        s.regime = Regime::Free;
                        if (emit(te, EventKind::ProgToFree, xe, 0.0)) { tr.final_state = s; return tr; }
                    } else {
                        s.regime = Regime::Stop;
                        if (emit(te, EventKind::ProgToStop, xe, 0.0)) { tr.final_state = s; return tr; }
                    }
                    break;
                }
                if (!armed && vc > 0.0) armed = true;
                if (!armed && vc < -p.tol_v()) {
                    // zero-velocity start that never picks up; stop where we began
                    s.t = ts;
                    s.v = 0.0;
                    s.regime = Regime::Stop;
                    if (emit(ts, EventKind::ProgToStop, s.x, 0.0)) { tr.final_state = s; return tr; }
                    break;
                }
                tp = t;
                s.t = t;
                s.x = prog_flow(p, ts, xs, vs, t).x;
                s.y = s.x;
                s.v = vc;
                record_sample(s);
            }
        } else { // Stop
            switch (dryfric::detail::classify_phase(s.t, ph)) {
                case PhaseWindow::StopWait: {
                    const double rel = dryfric::detail::next_instant_with_phase(s.t, ph.t2);
                    s.t = rel;
                    s.v = 0.0;
                    s.regime = Regime::Free;
                    record_sample(s);
                    if (emit(rel, EventKind::StopToFree, s.x, 0.0)) { tr.final_state = s; return tr; }
                    break;
                }
                case PhaseWindow::RestWait: {
                    const double go = dryfric::detail::next_instant_with_phase(s.t, ph.t0);
                    s.t = go;
                    s.v = 0.0;
                    s.regime = Regime::Progression;
                    record_sample(s);
                    if (emit(go, EventKind::StopToProg, s.x, 0.0)) { tr.final_state = s; return tr; }
                    break;
                }
                default:
                    throw Error("oracle: stop regime entered in an invalid phase window");
            }
        }
    }
    tr.final_state = s;
    return tr;
}

// Phase of the next transition into free motion with phase in [t2, t3),
// starting from a zero-velocity release at theta.
inline double oracle_return(const Params& p, double theta, const OracleConfig& cfg = {}) {
    const auto ph = derived_phases<double>(p);
    double out = -1.0;
    auto stop = [&](const TransitionEvent<double>& ev) {
        if (ev.kind == EventKind::ProgToFree || ev.kind == EventKind::StopToFree) {
            const double phi = wrap_phase(ev.t);
            if (phi >= ph.t2 - tol_root && phi < ph.t3) {
                out = phi;
                return true;
            }
        }
        return false;
    };
    MotionState st;
    st.t = theta;
    simulate(p, st, cfg, stop);
    if (out < 0.0)
        throw HorizonExceeded("oracle_return: no return to free motion within horizon");
    return dryfric::detail::snap_phase(out, ph);
}

// Scenario inferred from an oracle event log, for cross-checking return_T.
inline Scenario infer_scenario(const std::vector<TransitionEvent<double>>& events) {
    bool prime = !events.empty() && events.front().kind == EventKind::FreeToStop;
    int chains = 0;
    for (const auto& ev : events)
        if (ev.kind == EventKind::StopToProg) ++chains;
    bool via_stop = !events.empty() && events.back().kind == EventKind::StopToFree;
    if (chains == 0) return via_stop ? Scenario::B : Scenario::A;
    if (chains == 1 && via_stop) return prime ? Scenario::Cprime : Scenario::C;
    return prime ? Scenario::Dprime : Scenario::D;
}

// Fixed-step RK4 for xdd = rhs(t), used as an independent check of the
// closed-form flows.
inline FlowPoint<double> integrate_second_order(const std::function<double(double)>& rhs,
                                                double theta, double x0, double x1, double t,
                                                int n_steps = 20000) {
    const double h = (t - theta) / n_steps;
    double x = x0, v = x1, s = theta;
    for (int i = 0; i < n_steps; ++i) {
        const double k1x = v, k1v = rhs(s);
        const double k2x = v + h / 2 * k1v, k2v = rhs(s + h / 2);
        const double k3x = v + h / 2 * k2v, k3v = rhs(s + h / 2);
        const double k4x = v + h * k3v, k4v = rhs(s + h);
        x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        s += h;
    }
    return {x, v};
}

} // namespace oracle
} // namespace dryfric
