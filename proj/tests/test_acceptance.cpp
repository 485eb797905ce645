// End-to-end acceptance checks for the release gate.  Each criterion prints
// one PASS/FAIL line with its measured figure of merit and wall time; the
// process exits nonzero if any criterion fails.
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <vector>

#include "dryfric/analysis.hpp"
#include "dryfric/commands.hpp"
#include "dryfric/oracle.hpp"

using namespace dryfric;
using clk = std::chrono::steady_clock;

static int n_fail = 0;

static void report(const char* name, bool ok, double figure, const char* unit, clk::time_point t0) {
    const double secs = std::chrono::duration<double>(clk::now() - t0).count();
    std::printf("%-4s %-28s %.3e %s  (%.1fs)\n", ok ? "PASS" : "FAIL", name, figure, unit, secs);
    std::fflush(stdout);
    if (!ok) ++n_fail;
}

// 1. Reference constant theta0 and its sine.
static void crit_theta0() {
    const auto t0 = clk::now();
    const double th = reference_theta0();
    const double e1 = std::abs(th - 0.81047);
    const double e2 = std::abs(std::sin(th) - 0.724611);
    report("theta0", e1 < 1e-5 && e2 < 1e-6, std::max(e1, e2), "abs err", t0);
}

// 2. Closed-form flows satisfy their governing equations to finite-difference
// accuracy at 1000 random evaluation points.
static void crit_flow_exactness() {
    const auto t0 = clk::now();
    const Params p{1.0, 0.005, 0.8};
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> Uth(0.0, 2 * pi_of<double>());
    std::uniform_real_distribution<double> Udt(0.01, 3.0);
    std::uniform_real_distribution<double> Ux(-2.0, 2.0);
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double th = Uth(rng), t = th + Udt(rng), x0 = Ux(rng), x1 = Ux(rng);
        const bool prog = k % 2 == 0;
        auto F = [&](double s) {
            return prog ? prog_flow<double>(p, th, x0, x1, s) : free_flow<double>(p, th, x0, x1, s);
        };
        // Central differences of the first-order system (x' = v, v' = F):
        // the eps/h roundoff of first differences fits the 1e-6 budget.
        const auto fm = F(t - h), f0 = F(t), fp = F(t + h);
        const double rhs = p.a * std::sin(t) + 2 * p.b - (prog ? p.q : 0.0);
        const double e1 = std::abs((fp.x - fm.x) / (2 * h) - f0.v) / std::max(1.0, std::abs(f0.v));
        const double e2 = std::abs((fp.v - fm.v) / (2 * h) - rhs) / std::max(1.0, std::abs(rhs));
        worst = std::max({worst, e1, e2});
    }
    report("flow_exactness", worst < 1e-6, worst, "rel err", t0);
}

// 3. Return map agrees with the independent event-driven oracle in value and
// scenario at 100 random release phases.
static void crit_oracle_equivalence() {
    const auto t0 = clk::now();
    RunConfig rc;
    rc.params = {1.0, 0.005, 0.8};
    rc.seed = 31;
    rc.jobs = 4;
    rc.cfg.set("validate.n", "100");
    std::ostringstream os;
    const int rcode = cmd_validate(rc, os);
    double max_diff = 1.0;
    try {
        max_diff = nlohmann::json::parse(os.str())["results"]["max_diff"].get<double>();
    } catch (...) {
    }
    report("oracle_equivalence", rcode == 0, max_diff, "max diff", t0);
}

// 4. Rest-start velocity bound is negative for b <= 0.01 and no chained
// scenario occurs on a dense release grid.
static void crit_lemma1() {
    const auto t0 = clk::now();
    bool ok = true;
    for (double b = 0.001; b <= 0.01 + 1e-12; b += 0.001)
        ok = ok && check_lemma1(Params{1.0, b, 0.8}).holds;
    const auto rep = check_lemma1(Params{1.0, 0.01, 0.8});
    ok = ok && std::abs(rep.analytic_value - (-0.13)) < 0.02;

    const Params p{1.0, 0.005, 0.8};
    const auto ph = derived_phases<double>(p);
    const int n = 10000;
    for (int i = 0; i < n && ok; ++i) {
        const double th = ph.t2 + (ph.t3 - ph.t2) * (i + 0.5) / n;
        const auto r = return_T<double>(p, th, ph);
        ok = ok && r.scenario != Scenario::D && r.scenario != Scenario::Dprime;
    }
    report("lemma1_no_chains", ok, rep.analytic_value, "Eq(9)", t0);
}

// 5. The first-hit map on L0 has finitely many certified discontinuities,
// stable under grid doubling, with strictly decreasing branches.
static void crit_discontinuities() {
    const auto t0 = clk::now();
    const Params p{1.0, 0.005, 0.8};
    const auto ph = derived_phases<double>(p);
    const double lo = 101 * pi_of<double>() / 100, hi = 3 * pi_of<double>() / 2;
    const auto d1 = find_discontinuities(p, ph, lo, hi, 2000);
    const auto d2 = find_discontinuities(p, ph, lo, hi, 4000);
    bool ok = !d1.points.empty() && d1.points.size() == d2.points.size();
    double max_res = 0.0;
    for (const auto& pt : d1.points) max_res = std::max(max_res, pt.residual);
    ok = ok && max_res < 1e-6;
    std::vector<double> edges{lo};
    for (const auto& pt : d1.points) edges.push_back(pt.z);
    edges.push_back(hi);
    for (size_t i = 0; ok && i + 1 < edges.size(); ++i) {
        const double a = edges[i] + 1e-6, b = edges[i + 1] - 1e-6;
        if (!(b > a)) continue;
        double prev = next_hit_T1<double>(p, a, ph).theta1;
        for (int k = 1; k <= 40 && ok; ++k) {
            const double th = a + (b - a) * k / 40;
            const double cur = next_hit_T1<double>(p, th, ph).theta1;
            ok = cur < prev;
            prev = cur;
        }
    }
    report("discontinuities_T1", ok, static_cast<double>(d1.points.size()), "count", t0);
}

// 6. Full chaos certificate at b = 1e-4: disjoint covering pair, exact
// covering verified by 1000 preimages per segment, periodic orbits of every
// period up to 8, and 20 random length-12 words realized by shadow points.
static void crit_certificate() {
    const auto t0 = clk::now();
    RunConfig rc;
    rc.params = {1.0, 1e-4, 0.8};
    rc.seed = 17;
    rc.jobs = 4;
    std::ostringstream os;
    const int rcode = cmd_certify(rc, os);
    double pre_res = 1.0, orb_res = 1.0;
    try {
        const auto doc = nlohmann::json::parse(os.str());
        pre_res = doc["results"]["covering"]["preimage_check"]["max_residual"].get<double>();
        orb_res = 0.0;
        for (const auto& orb : doc["results"]["periodic_orbits"])
            orb_res = std::max(orb_res, orb["residual"].get<double>());
    } catch (...) {
    }
    const bool ok = rcode == 0 && pre_res < 1e-8 && orb_res < 1e-8;
    report("chaos_certificate", ok, std::max(pre_res, orb_res), "max res", t0);
}

// 7. Semi-conjugacy: the itinerary of T(x) is the shifted itinerary of x for
// 100 shadow points of random words.
static void crit_semi_conjugacy() {
    const auto t0 = clk::now();
    const Params p{1.0, 1e-4, 0.8};
    // The map expands by ~10^3 per iterate, so a depth-6 construction needs
    // more than double precision; quad keeps one ulp of input error far
    // below the segment gap after five iterates.
    const auto ph = derived_phases<quad>(p);
    bool ok = true;
    double checked = 0;
    try {
        const auto cp = find_covering_pair<quad>(p, ph);
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<int> bit(0, 1);
        const int k = 6;
        for (int i = 0; i < 100 && ok; ++i) {
            SymbolWord w(k);
            for (int& s : w) s = bit(rng);
            const quad x = shadow_point<quad>(p, w, cp, ph).mid();
            const auto it_x = itinerary<quad>(p, x, k, cp, ph);
            const quad tx = return_T<quad>(p, x, ph).theta_out;
            const auto it_tx = itinerary<quad>(p, tx, k - 1, cp, ph);
            ok = it_x.full() && it_tx.full();
            for (int j = 0; ok && j + 1 < k; ++j) ok = it_tx.symbols[j] == it_x.symbols[j + 1];
            checked = i + 1;
        }
    } catch (const Error&) {
        ok = false;
    }
    report("semi_conjugacy", ok, checked, "points", t0);
}

// 8. A superstable fixed point exists: the certified one-sided neighbourhood
// of t2 maps identically to t2, confirmed by the oracle.
static void crit_superstable() {
    const auto t0 = clk::now();
    const Params p{1.0, 0.0245, 0.8};
    const auto rep = superstable_check(p);
    bool ok = (rep.condition21 || rep.condition22) && rep.epsilon_est > 0.0;
    double worst = 0.0;
    if (ok) {
        const auto ph = derived_phases<double>(p);
        for (int i = 1; i <= 100 && ok; ++i) {
            const double th = ph.t2 + rep.epsilon_est * i / 101.0;
            worst = std::max(worst, std::abs(return_T<double>(p, th, ph).theta_out - ph.t2));
            if (i % 10 == 0)
                worst = std::max(worst, std::abs(oracle::oracle_return(p, th) - ph.t2));
            ok = worst < 1e-6;
        }
    }
    report("superstable_point", ok, rep.epsilon_est, "eps", t0);
}

// 9. Identical certify runs produce byte-identical reports.
static void crit_determinism() {
    const auto t0 = clk::now();
    RunConfig rc;
    rc.params = {1.0, 1e-4, 0.8};
    rc.seed = 99;
    rc.jobs = 2;
    rc.cfg.set("certify.n_preimages", "50");
    rc.cfg.set("certify.m_max", "3");
    rc.cfg.set("certify.n_words", "4");
    rc.cfg.set("certify.word_len", "6");
    std::ostringstream o1, o2;
    const int r1 = cmd_certify(rc, o1);
    const int r2 = cmd_certify(rc, o2);
    const bool ok = r1 == 0 && r2 == 0 && o1.str() == o2.str();
    report("determinism", ok, static_cast<double>(o1.str().size()), "bytes", t0);
}

int main() {
    crit_theta0();
    crit_flow_exactness();
    crit_oracle_equivalence();
    crit_lemma1();
    crit_discontinuities();
    crit_certificate();
    crit_semi_conjugacy();
    crit_superstable();
    crit_determinism();
    std::printf("%d criteria failed\n", n_fail);
    return n_fail == 0 ? 0 : 1;
}
