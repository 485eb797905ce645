#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "dryfric/io.hpp"
#include "dryfric/params.hpp"

namespace dryfric {

enum class OutputFormat { csv, json };

// Options shared by every subcommand; command-specific knobs travel in cfg.
struct RunConfig {
    Params params{1.0, 0.005, 0.8};
    OutputFormat format = OutputFormat::json;
    std::uint64_t seed = 0;
    int jobs = 1;
    KVConfig cfg;

    static RunConfig from_kv(const KVConfig& kv);
};

// Each command writes its report to `out` and returns a process exit code.
int cmd_phases(const RunConfig& rc, std::ostream& out);
int cmd_return_map(const RunConfig& rc, std::ostream& out);
int cmd_certify(const RunConfig& rc, std::ostream& out);
int cmd_superstable(const RunConfig& rc, std::ostream& out);
int cmd_sweep(const RunConfig& rc, std::ostream& out);
int cmd_validate(const RunConfig& rc, std::ostream& out);

} // namespace dryfric
