#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dryfric/commands.hpp"

namespace {

struct CommonFlags {
    std::string config, out, format;
    long seed = -1;
    int jobs = 0;
    double a = 0, b = 0, q = 0;
    bool has_a = false, has_b = false, has_q = false;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--config", fl.config, "key=value config file");
    cmd->add_option("--out", fl.out, "output path (default: stdout)");
    cmd->add_option("--format", fl.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", fl.seed, "seed for sampled spot checks");
    cmd->add_option("--jobs", fl.jobs, "worker threads for grid commands");
    cmd->add_option("-a", fl.a, "forcing amplitude a")->each([&](const std::string&) { fl.has_a = true; });
    cmd->add_option("-b", fl.b, "forcing offset b")->each([&](const std::string&) { fl.has_b = true; });
    cmd->add_option("-q", fl.q, "friction bound q")->each([&](const std::string&) { fl.has_q = true; });
}

// Flags override file values; the config file carries everything else.
dryfric::RunConfig build_config(const CommonFlags& fl) {
    dryfric::KVConfig kv =
        fl.config.empty() ? dryfric::KVConfig{} : dryfric::KVConfig::from_file(fl.config);
    if (fl.has_a) kv.set("params.a", dryfric::fmt17(fl.a));
    if (fl.has_b) kv.set("params.b", dryfric::fmt17(fl.b));
    if (fl.has_q) kv.set("params.q", dryfric::fmt17(fl.q));
    if (!fl.format.empty()) kv.set("output.format", fl.format);
    if (fl.seed >= 0) kv.set("run.seed", std::to_string(fl.seed));
    if (fl.jobs > 0) kv.set("run.jobs", std::to_string(fl.jobs));
    return dryfric::RunConfig::from_kv(kv);
}

int run(const CommonFlags& fl, int (*cmd)(const dryfric::RunConfig&, std::ostream&)) {
    const dryfric::RunConfig rc = build_config(fl);
    if (fl.out.empty()) return cmd(rc, std::cout);
    std::ofstream out(fl.out);
    if (!out) {
        std::cerr << "error: cannot open output file: " << fl.out << "\n";
        return 1;
    }
    return cmd(rc, out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-driven analysis of the forced dry-friction oscillator return map"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* desc;
        int (*fn)(const dryfric::RunConfig&, std::ostream&);
    };
    const Sub subs[] = {
        {"phases", "derived phase constants and parameter regime", dryfric::cmd_phases},
        {"return-map", "tabulate the return map over a phase grid", dryfric::cmd_return_map},
        {"certify", "chaos certificate: covering pair, orbits, symbolic dynamics",
         dryfric::cmd_certify},
        {"superstable", "superstability report / parameter search", dryfric::cmd_superstable},
        {"sweep", "pipeline outcomes over parameter ranges", dryfric::cmd_sweep},
        {"validate", "cross-check the return map against the trajectory oracle",
         dryfric::cmd_validate},
    };

    CommonFlags flags[std::size(subs)];
    for (size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* c = app.add_subcommand(subs[i].name, subs[i].desc);
        add_common(c, flags[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (size_t i = 0; i < std::size(subs); ++i) {
        if (app.get_subcommand(subs[i].name)->parsed()) {
            try {
                return run(flags[i], subs[i].fn);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
        }
    }
    return 1;
}
