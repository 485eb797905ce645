#include "dryfric/commands.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dryfric/analysis.hpp"
#include "dryfric/oracle.hpp"
#include "dryfric/return_map.hpp"

namespace dryfric {

using ordered_json = nlohmann::ordered_json;

namespace {

// Ordered work distribution: results land in index order, so the worker
// count never changes the output.
template <class F>
void parallel_for(int n, int jobs, F&& body) {
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int nw = std::min(jobs, n);
    workers.reserve(nw);
    for (int w = 0; w < nw; ++w)
        workers.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) body(i);
        });
    for (auto& t : workers) t.join();
}

ordered_json tolerances_json(const Params& p) {
    ordered_json t;
    t["tol_root"] = tol_root;
    t["tol_graze"] = p.tol_graze();
    t["tol_v"] = p.tol_v();
    t["h_scan"] = h_scan_default;
    t["tol_orbit"] = tol_orbit;
    t["tol_disc"] = tol_disc;
    t["oracle_dt"] = oracle::OracleConfig{}.dt;
    t["oracle_tol_event"] = oracle::OracleConfig{}.tol_event;
    return t;
}

ordered_json base_doc(const std::string& command, const RunConfig& rc) {
    ordered_json doc;
    doc["schema_version"] = "1.0.0";
    doc["command"] = command;
    doc["params"] = {{"a", rc.params.a}, {"b", rc.params.b}, {"q", rc.params.q}};
    doc["results"] = ordered_json::object();
    doc["metadata"] = {{"seed", rc.seed},
                       {"jobs", rc.jobs},
                       {"tolerances", tolerances_json(rc.params)}};
    return doc;
}

void flatten_csv(const ordered_json& j, const std::string& prefix, std::ostream& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten_csv(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (size_t i = 0; i < j.size(); ++i)
            flatten_csv(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else if (j.is_number_float()) {
        out << prefix << "," << fmt17(j.get<double>()) << "\n";
    } else if (j.is_string()) {
        out << prefix << "," << j.get<std::string>() << "\n";
    } else {
        out << prefix << "," << j.dump() << "\n";
    }
}

int emit(const ordered_json& doc, const RunConfig& rc, std::ostream& out, int code) {
    if (rc.format == OutputFormat::json) {
        out << doc.dump(2) << "\n";
    } else {
        out << "key,value\n";
        flatten_csv(doc, "", out);
    }
    return code;
}

} // namespace

RunConfig RunConfig::from_kv(const KVConfig& kv) {
    RunConfig rc;
    rc.params.a = kv.get("params.a", 1.0);
    rc.params.b = kv.get("params.b", 0.005);
    rc.params.q = kv.get("params.q", 0.8);
    const std::string f = kv.get("output.format", std::string("json"));
    if (f == "json") rc.format = OutputFormat::json;
    else if (f == "csv") rc.format = OutputFormat::csv;
    else throw ConfigError("output.format must be csv or json: " + f);
    rc.seed = static_cast<std::uint64_t>(kv.get("run.seed", 0L));
    rc.jobs = kv.get("run.jobs", 1);
    if (rc.jobs < 1) throw ConfigError("run.jobs must be >= 1");
    rc.cfg = kv;
    return rc;
}

int cmd_phases(const RunConfig& rc, std::ostream& out) {
    const Params& p = rc.params;
    ordered_json doc = base_doc("phases", rc);
    auto& r = doc["results"];
    if (!p.valid()) {
        r["error"] = "invalid parameters: require a > 0, b > 0, q > 0";
        return emit(doc, rc, out, 1);
    }
    r["theta0"] = reference_theta0();
    r["sin_theta0"] = std::sin(reference_theta0());
    const DegenerateRegime deg = classify_degenerate(p);
    r["regime"] = deg == DegenerateRegime::None ? (p.standard() ? "standard" : "relaxed")
                                                : degenerate_name(deg);
    r["standard"] = p.standard();
    try {
        const auto ph = derived_phases<double>(p);
        r["t0"] = ph.t0;
        r["t1"] = ph.t1;
        r["t2"] = ph.t2;
        r["t3"] = ph.t3;
        r["c"] = ph.c;
        const auto l1 = check_lemma1(p);
        r["lemma1"] = {{"holds", l1.holds},
                       {"margin", l1.margin},
                       {"analytic", l1.analytic},
                       {"analytic_value", l1.analytic_value}};
    } catch (const NoSuchPhase& e) {
        r["phase_error"] = e.what();
    }
    return emit(doc, rc, out, 0);
}

int cmd_return_map(const RunConfig& rc, std::ostream& out) {
    const Params& p = rc.params;
    if (!p.standard()) {
        out << "error: return-map requires standard-regime parameters\n";
        return 1;
    }
    const auto ph = derived_phases<double>(p);
    const int n = rc.cfg.get("return_map.n", 1000);
    const double lo = rc.cfg.get("return_map.theta_lo", ph.t2);
    const double hi = rc.cfg.get("return_map.theta_hi", to_double(ph.t3));
    if (n < 1 || !(hi > lo)) {
        out << "error: return_map.n must be >= 1 and theta_hi > theta_lo\n";
        return 1;
    }

    struct Row {
        double theta = 0, theta_out = 0, theta1 = 0, delta_y = 0;
        std::string scenario, error;
        bool grazing = false;
    };
    std::vector<Row> rows(n);
    parallel_for(n, rc.jobs, [&](int i) {
        Row& row = rows[i];
        row.theta = lo + (hi - lo) * i / n;
        try {
            const auto r = return_T<double>(p, row.theta, ph);
            row.theta_out = r.theta_out;
            row.theta1 = r.theta1;
            row.delta_y = r.delta_y;
            row.scenario = scenario_name(r.scenario);
            row.grazing = r.grazing_first_hit;
        } catch (const Error& e) {
            row.error = e.what();
        }
    });

    if (rc.format == OutputFormat::csv) {
        out << "theta,theta_out,theta1,scenario,delta_y,grazing,error\n";
        for (const auto& row : rows)
            out << fmt17(row.theta) << "," << fmt17(row.theta_out) << "," << fmt17(row.theta1)
                << "," << row.scenario << "," << fmt17(row.delta_y) << "," << (row.grazing ? 1 : 0)
                << "," << row.error << "\n";
        return 0;
    }
    ordered_json doc = base_doc("return-map", rc);
    auto rows_json = ordered_json::array();
    for (const auto& row : rows)
        rows_json.push_back({{"theta", row.theta},
                             {"theta_out", row.theta_out},
                             {"theta1", row.theta1},
                             {"scenario", row.scenario},
                             {"delta_y", row.delta_y},
                             {"grazing", row.grazing},
                             {"error", row.error}});
    doc["results"]["rows"] = std::move(rows_json);
    return emit(doc, rc, out, 0);
}

int cmd_certify(const RunConfig& rc, std::ostream& out) {
    const Params& p = rc.params;
    ordered_json doc = base_doc("certify", rc);
    auto& r = doc["results"];
    const int n_scan = rc.cfg.get("certify.n_scan", 2000);
    const int n_pre = rc.cfg.get("certify.n_preimages", 1000);
    const int m_max = rc.cfg.get("certify.m_max", 8);
    const int n_words = rc.cfg.get("certify.n_words", 20);
    const int word_len = rc.cfg.get("certify.word_len", 12);
    const double pre_tol = rc.cfg.get("certify.preimage_tol", 1e-8);

    std::string stage = "parameters";
    try {
        if (!p.standard()) throw ConfigError("certify requires standard-regime parameters");

        stage = "phases";
        const auto phd = derived_phases<double>(p);
        const auto ph = derived_phases<deep>(p);

        stage = "lemma1";
        const auto l1 = check_lemma1(p);
        r["lemma1"] = {{"holds", l1.holds},
                       {"margin", l1.margin},
                       {"analytic", l1.analytic},
                       {"analytic_value", l1.analytic_value}};

        stage = "covering";
        const auto cp = find_covering_pair<deep>(p, ph, n_scan);
        auto disc_json = ordered_json::array();
        for (const auto& d : cp.disc.points)
            disc_json.push_back({{"z", d.z},
                                 {"t1_left", d.t1_left},
                                 {"t1_right", d.t1_right},
                                 {"residual", d.residual}});
        r["discontinuities"] = {{"lo", cp.disc.lo},
                                {"hi", cp.disc.hi},
                                {"count", cp.disc.points.size()},
                                {"points", std::move(disc_json)}};
        r["covering"] = {{"target", {{"lo", to_double(cp.target.lo)}, {"hi", to_double(cp.target.hi)}}},
                         {"J0", {{"lo", to_double(cp.J[0].lo)}, {"hi", to_double(cp.J[0].hi)}}},
                         {"J1", {{"lo", to_double(cp.J[1].lo)}, {"hi", to_double(cp.J[1].hi)}}},
                         {"branches", {cp.branch[0], cp.branch[1]}}};
        const bool disjoint = cp.J[0].hi < cp.J[1].lo;
        if (!disjoint) throw CoveringNotFound("covering segments are not disjoint");

        stage = "preimage_check";
        // Spot-verify the covering in double precision: every target value in
        // [t2, 3pi/2] must have a preimage on each segment.
        double max_pre = 0.0;
        const double tlo = to_double(cp.target.lo), thi = to_double(cp.target.hi);
        std::vector<double> res(2 * n_pre, 0.0);
        parallel_for(2 * n_pre, rc.jobs, [&](int k) {
            const int seg = k / n_pre;
            const double y = tlo + (thi - tlo) * (k % n_pre + 0.5) / n_pre;
            const double jl = to_double(cp.J[seg].lo), jh = to_double(cp.J[seg].hi);
            const double th = detail::preimage_on_branch<double>(p, phd, jl, jh, y, pre_tol / 10);
            res[k] = std::abs(return_T<double>(p, th, phd).theta_out - y);
        });
        for (double v : res) max_pre = std::max(max_pre, v);
        r["covering"]["preimage_check"] = {{"n_per_segment", n_pre},
                                           {"max_residual", max_pre},
                                           {"tolerance", pre_tol},
                                           {"pass", max_pre < pre_tol}};
        if (max_pre >= pre_tol) throw CoveringNotFound("covering preimage residual too large");

        stage = "orbits";
        auto orbits = ordered_json::array();
        for (int m = 1; m <= m_max; ++m) {
            const auto orb = periodic_point<deep>(p, m, {}, cp, ph);
            std::string w;
            for (int s : orb.word) w += char('0' + s);
            orbits.push_back({{"period", m},
                              {"point", to_double(orb.point)},
                              {"residual", to_double(orb.residual)},
                              {"word", w}});
        }
        r["periodic_orbits"] = std::move(orbits);

        stage = "words";
        std::mt19937_64 rng(rc.seed);
        std::uniform_int_distribution<int> bit(0, 1);
        double max_dist = 0.0;
        auto words = ordered_json::array();
        for (int k = 0; k < n_words; ++k) {
            SymbolWord w(word_len);
            for (int& s : w) s = bit(rng);
            const auto I = shadow_point<deep>(p, w, cp, ph);
            const auto itin = itinerary<deep>(p, I.mid(), word_len, cp, ph);
            std::string ws, is;
            for (int s : w) ws += char('0' + s);
            for (int s : itin.symbols) is += char('0' + s);
            const double dist = itin.full() ? symbol_distance(itin.symbols, w) : 2.0;
            max_dist = std::max(max_dist, dist);
            words.push_back({{"word", ws},
                             {"point", to_double(I.mid())},
                             {"itinerary", is},
                             {"distance", dist}});
        }
        r["semi_conjugacy"] = {{"n_words", n_words},
                               {"word_length", word_len},
                               {"max_symbol_distance", max_dist},
                               {"all_realized", max_dist == 0.0},
                               {"samples", std::move(words)}};
        if (max_dist != 0.0) throw Error("a shadow point failed to realize its word");

        r["certified"] = true;
        return emit(doc, rc, out, 0);
    } catch (const std::exception& e) {
        r["certified"] = false;
        r["failed_stage"] = stage;
        r["error"] = e.what();
        return emit(doc, rc, out, 1);
    }
}

int cmd_superstable(const RunConfig& rc, std::ostream& out) {
    ordered_json doc = base_doc("superstable", rc);
    auto& r = doc["results"];
    const int n_verify = rc.cfg.get("superstable.verify_oracle", 0);

    auto report_json = [&](const Params& p) -> ordered_json {
        ordered_json cell;
        cell["a"] = p.a;
        cell["b"] = p.b;
        cell["q"] = p.q;
        if (!p.valid() || classify_degenerate(p) != DegenerateRegime::None ||
            !(2 * p.b < p.a) || !(p.q - 2 * p.b < p.a)) {
            cell["status"] = "degenerate";
            return cell;
        }
        try {
            const auto rep = superstable_check(p);
            const bool l1 = check_lemma1(p).holds;
            cell["status"] = "ok";
            cell["condition21"] = rep.condition21;
            cell["condition22"] = rep.condition22;
            cell["lemma1"] = l1;
            cell["robust"] = rep.robust;
            cell["theta1"] = rep.theta1;
            cell["theta2"] = rep.theta2;
            cell["phi2"] = wrap_phase(rep.theta2);
            cell["epsilon"] = rep.epsilon_est;
            const bool fixed =
                (rep.condition21 || (rep.condition22 && l1)) && rep.epsilon_est > 0.0;
            cell["superstable_fixed_point"] = fixed;
            if (fixed && n_verify > 0) {
                const auto ph = derived_phases<double>(p);
                double worst = 0.0;
                for (int i = 1; i <= n_verify; ++i) {
                    const double th = ph.t2 + rep.epsilon_est * i / (n_verify + 1.0);
                    worst = std::max(worst, std::abs(oracle::oracle_return(p, th) - ph.t2));
                }
                cell["oracle_max_deviation"] = worst;
                cell["oracle_verified"] = worst < 1e-6;
            }
        } catch (const Error& e) {
            cell["status"] = std::string("error: ") + e.what();
        }
        return cell;
    };

    if (rc.cfg.get("superstable.search", 0) != 0) {
        const double b_min = rc.cfg.get("superstable.b_min", 0.01);
        const double b_max = rc.cfg.get("superstable.b_max", 0.2);
        const int b_steps = rc.cfg.get("superstable.b_steps", 10);
        const double q_min = rc.cfg.get("superstable.q_min", 0.5);
        const double q_max = rc.cfg.get("superstable.q_max", 0.95);
        const int q_steps = rc.cfg.get("superstable.q_steps", 10);
        if (b_steps < 0 || q_steps < 0 || !(b_max >= b_min) || !(q_max >= q_min)) {
            out << "error: inverted superstable search ranges\n";
            return 1;
        }
        const int n = b_steps * q_steps; // zero steps: empty result, success
        std::vector<ordered_json> cells(n);
        parallel_for(n, rc.jobs, [&](int k) {
            Params p = rc.params;
            p.b = b_steps == 1 ? b_min : b_min + (b_max - b_min) * (k / q_steps) / (b_steps - 1);
            p.q = q_steps == 1 ? q_min : q_min + (q_max - q_min) * (k % q_steps) / (q_steps - 1);
            cells[k] = report_json(p);
        });
        auto arr = ordered_json::array();
        int n_pass = 0;
        for (auto& c : cells) {
            if (c.value("superstable_fixed_point", false)) ++n_pass;
            arr.push_back(std::move(c));
        }
        r["mode"] = "search";
        r["n_cells"] = n;
        r["n_superstable"] = n_pass;
        r["cells"] = std::move(arr);
        return emit(doc, rc, out, 0);
    }

    r["mode"] = "point";
    r["report"] = report_json(rc.params);
    return emit(doc, rc, out, 0);
}

int cmd_sweep(const RunConfig& rc, std::ostream& out) {
    const double b_min = rc.cfg.get("sweep.b_min", 1e-4);
    const double b_max = rc.cfg.get("sweep.b_max", 0.2);
    const int b_steps = rc.cfg.get("sweep.b_steps", 8);
    const std::string b_scale = rc.cfg.get("sweep.b_scale", std::string("log"));
    const double q_min = rc.cfg.get("sweep.q_min", 0.8);
    const double q_max = rc.cfg.get("sweep.q_max", 0.8);
    const int q_steps = rc.cfg.get("sweep.q_steps", 1);
    const int n_scan = rc.cfg.get("sweep.n_scan", 1000);
    if (b_steps < 1 || q_steps < 1 || !(b_max >= b_min) || !(q_max >= q_min) ||
        (b_scale != "log" && b_scale != "linear")) {
        out << "error: invalid sweep ranges\n";
        return 1;
    }

    struct Row {
        double b = 0, q = 0, lemma1_margin = 0, epsilon = 0;
        int n_disc = -1;
        bool covering = false, cond21 = false, cond22 = false;
        std::string regime, status = "ok";
    };
    const int n = b_steps * q_steps;
    std::vector<Row> rows(n);
    parallel_for(n, rc.jobs, [&](int k) {
        Row& row = rows[k];
        const int bi = k / q_steps, qi = k % q_steps;
        row.b = b_steps == 1 ? b_min
                : b_scale == "log"
                    ? b_min * std::pow(b_max / b_min, double(bi) / (b_steps - 1))
                    : b_min + (b_max - b_min) * bi / (b_steps - 1);
        row.q = q_steps == 1 ? q_min : q_min + (q_max - q_min) * qi / (q_steps - 1);
        Params p = rc.params;
        p.b = row.b;
        p.q = row.q;
        const DegenerateRegime deg = classify_degenerate(p);
        if (deg != DegenerateRegime::None || !(2 * p.b < p.a) || !(p.q - 2 * p.b < p.a)) {
            row.regime = deg != DegenerateRegime::None ? degenerate_name(deg) : "no free phase";
            return;
        }
        row.regime = p.standard() ? "standard" : "relaxed";
        try {
            row.lemma1_margin = check_lemma1(p).margin;
            const auto ph = derived_phases<double>(p);
            const double pi = pi_of<double>();
            if (p.standard() && ph.t2 < 101 * pi / 100) {
                const auto ds = find_discontinuities(p, ph, 101 * pi / 100, 51 * pi / 50, n_scan);
                row.n_disc = static_cast<int>(ds.points.size());
            }
            try {
                const auto cp = find_covering_pair<double>(p, ph, n_scan);
                row.covering = cp.J[0].hi < cp.J[1].lo;
            } catch (const CoveringNotFound&) {
            }
            const auto rep = superstable_check(p);
            row.cond21 = rep.condition21;
            row.cond22 = rep.condition22;
            row.epsilon = rep.epsilon_est;
        } catch (const Error& e) {
            row.status = std::string("error: ") + e.what();
        }
    });

    if (rc.format == OutputFormat::csv) {
        out << "b,q,regime,lemma1_margin,n_disc,covering,cond21,cond22,epsilon,status\n";
        for (const auto& row : rows)
            out << fmt17(row.b) << "," << fmt17(row.q) << "," << row.regime << ","
                << fmt17(row.lemma1_margin) << "," << row.n_disc << "," << (row.covering ? 1 : 0)
                << "," << (row.cond21 ? 1 : 0) << "," << (row.cond22 ? 1 : 0) << ","
                << fmt17(row.epsilon) << "," << row.status << "\n";
        return 0;
    }
    ordered_json doc = base_doc("sweep", rc);
    auto arr = ordered_json::array();
    for (const auto& row : rows)
        arr.push_back({{"b", row.b},
                       {"q", row.q},
                       {"regime", row.regime},
                       {"lemma1_margin", row.lemma1_margin},
                       {"n_disc", row.n_disc},
                       {"covering", row.covering},
                       {"cond21", row.cond21},
                       {"cond22", row.cond22},
                       {"epsilon", row.epsilon},
                       {"status", row.status}});
    doc["results"]["rows"] = std::move(arr);
    return emit(doc, rc, out, 0);
}

int cmd_validate(const RunConfig& rc, std::ostream& out) {
    const Params& p = rc.params;
    if (!p.standard()) {
        out << "error: validate requires standard-regime parameters\n";
        return 1;
    }
    const int n = rc.cfg.get("validate.n", 100);
    const double tol = rc.cfg.get("validate.tol", 1e-6);
    oracle::OracleConfig ocfg;
    ocfg.dt = rc.cfg.get("validate.dt", ocfg.dt);
    const auto ph = derived_phases<double>(p);

    std::mt19937_64 rng(rc.seed);
    std::uniform_real_distribution<double> U(ph.t2, to_double(ph.t3));
    std::vector<double> thetas(n);
    for (double& th : thetas) th = U(rng);

    struct Row {
        double theta = 0, t_map = 0, t_oracle = 0, diff = 0;
        std::string s_map, s_oracle, error;
    };
    std::vector<Row> rows(n);
    parallel_for(n, rc.jobs, [&](int i) {
        Row& row = rows[i];
        row.theta = thetas[i];
        try {
            const auto r = return_T<double>(p, row.theta, ph);
            row.t_map = wrap_phase(r.theta_out);
            row.s_map = scenario_name(r.scenario);
            double phase = -1.0;
            oracle::MotionState st;
            st.t = row.theta;
            const auto tr = oracle::simulate(p, st, ocfg, [&](const TransitionEvent<double>& ev) {
                if (ev.kind != EventKind::ProgToFree && ev.kind != EventKind::StopToFree)
                    return false;
                const double phi = wrap_phase(ev.t);
                if (phi >= ph.t2 - tol_root && phi < ph.t3) {
                    phase = phi;
                    return true;
                }
                return false;
            });
            if (phase < 0.0) throw HorizonExceeded("validate: oracle found no return");
            row.t_oracle = detail::snap_phase(phase, ph);
            row.s_oracle = scenario_name(oracle::infer_scenario(tr.events));
            const double d = std::abs(row.t_map - row.t_oracle);
            row.diff = std::min(d, 2 * pi_of<double>() - d);
        } catch (const Error& e) {
            row.error = e.what();
        }
    });

    double worst = 0.0;
    int mismatches = 0, errors = 0;
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            ++errors;
            continue;
        }
        worst = std::max(worst, row.diff);
        if (row.s_map != row.s_oracle) ++mismatches;
    }
    const bool pass = errors == 0 && mismatches == 0 && worst < tol;

    if (rc.format == OutputFormat::csv) {
        out << "theta,return_map,oracle,diff,scenario_map,scenario_oracle,error\n";
        for (const auto& row : rows)
            out << fmt17(row.theta) << "," << fmt17(row.t_map) << "," << fmt17(row.t_oracle) << ","
                << fmt17(row.diff) << "," << row.s_map << "," << row.s_oracle << "," << row.error
                << "\n";
        return pass ? 0 : 1;
    }
    ordered_json doc = base_doc("validate", rc);
    auto& r = doc["results"];
    r["n"] = n;
    r["max_diff"] = worst;
    r["tolerance"] = tol;
    r["scenario_mismatches"] = mismatches;
    r["errors"] = errors;
    r["pass"] = pass;
    auto arr = ordered_json::array();
    for (const auto& row : rows)
        arr.push_back({{"theta", row.theta},
                       {"return_map", row.t_map},
                       {"oracle", row.t_oracle},
                       {"diff", row.diff},
                       {"scenario_map", row.s_map},
                       {"scenario_oracle", row.s_oracle},
                       {"error", row.error}});
    r["rows"] = std::move(arr);
    return emit(doc, rc, out, pass ? 0 : 1);
}

} // namespace dryfric
