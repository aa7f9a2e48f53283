#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace pathosim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitScenario = 2;

struct RunArgs {
    std::filesystem::path scenario;
    double until_s = 86400.0;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    bool trace = false;
};

struct LinkBudgetArgs {
    std::filesystem::path scenario;
    std::uint16_t from = 0;
    std::uint16_t to = 0;
};

struct LifetimeArgs {
    std::filesystem::path scenario;
    std::uint16_t node = 0;
    double active_s = 5.0;
    /// Defaults to the node's configured sample period.
    std::optional<double> cycle_s;
    /// report.json of an earlier run; adds the simulated figure.
    std::optional<std::filesystem::path> report;
};

struct ReplArgs {
    std::filesystem::path scenario;
    std::optional<std::uint64_t> seed;
    /// Outputs are written here on quit (or end of input) when set.
    std::optional<std::filesystem::path> out;
    bool trace = false;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_linkbudget(const LinkBudgetArgs& args, std::ostream& out, std::ostream& err);
int cmd_lifetime(const LifetimeArgs& args, std::ostream& out, std::ostream& err);
int repl_loop(const ReplArgs& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Reads PATHOSIM_LOG (error|warn|info|debug) and routes diagnostics to stderr.
void configure_logging();

}  // namespace pathosim::cli
