#include "pathosim/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace pathosim::cli;
    configure_logging();

    CLI::App app{"Wireless sensor network simulator for monitoring pathologies"};
    app.require_subcommand(1, 1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write samples and reports");
    run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file")->required();
    run_cmd->add_option("--until", run.until_s, "Virtual seconds to simulate")->capture_default_str();
    run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
    run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
    run_cmd->add_flag("--trace", run.trace, "Also write trace.tsv");

    LinkBudgetArgs lb;
    auto* lb_cmd = app.add_subcommand("linkbudget", "Itemized received power between two nodes");
    lb_cmd->add_option("--scenario", lb.scenario, "Scenario JSON file")->required();
    lb_cmd->add_option("--from", lb.from, "Transmitting node id")->required();
    lb_cmd->add_option("--to", lb.to, "Receiving node id")->required();

    LifetimeArgs lt;
    double cycle = 0.0;
    std::string prior_report;
    auto* lt_cmd = app.add_subcommand("lifetime", "Closed-form battery lifetime of an End Device");
    lt_cmd->add_option("--scenario", lt.scenario, "Scenario JSON file")->required();
    lt_cmd->add_option("--node", lt.node, "End Device id")->required();
    lt_cmd->add_option("--active", lt.active_s, "Transmitting seconds per cycle")->capture_default_str();
    auto* cycle_opt = lt_cmd->add_option("--cycle", cycle, "Cycle length in seconds (default: sample period)");
    auto* report_opt = lt_cmd->add_option("--report", prior_report, "report.json of a finished run");

    ReplArgs repl;
    std::string repl_out;
    auto* repl_cmd = app.add_subcommand("repl", "Interactive run control");
    repl_cmd->add_option("--scenario", repl.scenario, "Scenario JSON file")->required();
    repl_cmd->add_option("--seed", repl.seed, "Override the scenario seed");
    auto* repl_out_opt = repl_cmd->add_option("--out", repl_out, "Write outputs here on quit");
    repl_cmd->add_flag("--trace", repl.trace, "Also write trace.tsv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitScenario;
    }

    if (*run_cmd) {
        return cmd_run(run, std::cout, std::cerr);
    }
    if (*lb_cmd) {
        return cmd_linkbudget(lb, std::cout, std::cerr);
    }
    if (*lt_cmd) {
        if (*cycle_opt) {
            lt.cycle_s = cycle;
        }
        if (*report_opt) {
            lt.report = prior_report;
        }
        return cmd_lifetime(lt, std::cout, std::cerr);
    }
    if (*repl_out_opt) {
        repl.out = repl_out;
    }
    return repl_loop(repl, std::cin, std::cout, std::cerr);
}
