#include "pathosim/cli.hpp"

#include "pathosim/power.hpp"
#include "pathosim/propagation.hpp"
#include "pathosim/report.hpp"
#include "pathosim/scenario_io.hpp"
#include "pathosim/world.hpp"

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace pathosim::cli {

namespace {

using model::NodeId;

/// Scenario could not be loaded or is invalid; maps to exit 2.
struct ScenarioFailure {
    std::string message;
};

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

model::ScenarioConfig load_valid(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
    model::ScenarioConfig cfg;
    try {
        cfg = model::load_scenario(path);
    } catch (const model::SyntaxError& e) {
        throw ScenarioFailure{path.string() + ":" + std::to_string(e.line) + ":" + std::to_string(e.column) + ": " +
                              e.what()};
    } catch (const model::SchemaError& e) {
        throw ScenarioFailure{path.string() + ": " + e.what()};
    }
    const auto violations = model::validate_scenario(cfg);
    if (!violations.empty()) {
        std::string msg = path.string() + ": invalid scenario";
        for (const auto& v : violations) {
            msg += "\n  " + v.subject + ": " + v.field + ": " + v.rule;
        }
        throw ScenarioFailure{msg};
    }
    if (seed) {
        cfg.seed = *seed;
    }
    return cfg;
}

const model::NodeSpec& node_or_fail(const model::ScenarioConfig& cfg, std::uint16_t id) {
    const auto* spec = cfg.find(NodeId{id});
    if (!spec) {
        throw ScenarioFailure{"unknown node " + std::to_string(id)};
    }
    return *spec;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ScenarioFailure& f) {
        err << "error: " << f.message << "\n";
        return kExitScenario;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

std::string element_name(const model::PathElement& e) {
    if (const auto* kind = std::get_if<model::ObstacleKind>(&e.what)) {
        return std::string(model::to_string(*kind));
    }
    return "FloorCrossing";
}

}  // namespace

void configure_logging() {
    auto logger = spdlog::get("pathosim");
    if (!logger) {
        logger = spdlog::stderr_color_st("pathosim");
    }
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("PATHOSIM_LOG")) {
        const std::string_view v = level;
        if (v == "error") {
            spdlog::set_level(spdlog::level::err);
        } else if (v == "warn") {
            spdlog::set_level(spdlog::level::warn);
        } else if (v == "info") {
            spdlog::set_level(spdlog::level::info);
        } else if (v == "debug") {
            spdlog::set_level(spdlog::level::debug);
        } else {
            spdlog::warn("PATHOSIM_LOG: unknown level '{}', using warn", v);
        }
    }
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!(args.until_s >= 0.0)) {
            throw ScenarioFailure{"--until must be a non-negative number of seconds"};
        }
        auto cfg = load_valid(args.scenario, args.seed);
        engine::World world(std::move(cfg), engine::WorldOptions{args.trace, {}});
        world.run_until(engine::SimTime::from_seconds(args.until_s));
        report::write_outputs(world, args.out, args.trace);
        const auto stats = world.stats();
        out << "ran to " << num(args.until_s) << " s: " << world.samples().size() << " samples, "
            << stats.rounds_completed << " rounds completed, " << stats.rounds_aborted << " aborted\n";
        for (NodeId n : world.parents().unreachable()) {
            out << "node " << n.value << " unreachable\n";
        }
        out << "outputs in " << args.out.string() << "\n";
        return kExitOk;
    });
}

int cmd_linkbudget(const LinkBudgetArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load_valid(args.scenario, std::nullopt);
        node_or_fail(cfg, args.from);
        const auto& to = node_or_fail(cfg, args.to);
        if (args.from == args.to) {
            throw ScenarioFailure{"link budget needs two distinct nodes"};
        }
        const auto b = propagation::link_budget(cfg, NodeId{args.from}, NodeId{args.to});
        out << "link " << args.from << " -> " << args.to << "\n";
        out << "  distance          " << fixed(b.distance_m, 2) << " m\n";
        out << "  tx power          " << fixed(b.tx_power_dbm, 2) << " dBm\n";
        out << "  free space loss   " << fixed(-b.free_space_loss_db, 2) << " dB\n";
        for (const auto& e : b.obstacle_losses) {
            out << "  " << element_name(e);
            for (std::size_t pad = element_name(e).size(); pad < 18; ++pad) {
                out << ' ';
            }
            out << fixed(-e.attenuation_db, 2) << " dB\n";
        }
        out << "  total attenuation " << fixed(-b.total_attenuation_db, 2) << " dB\n";
        out << "  received power    " << fixed(b.received_power_dbm, 2) << " dBm\n";
        if (to.radio.sensitivity_dbm) {
            out << "  sensitivity       " << fixed(*to.radio.sensitivity_dbm, 2) << " dBm ("
                << (propagation::is_connected(b, *to.radio.sensitivity_dbm) ? "connected" : "not connected") << ")\n";
        }

        nlohmann::ordered_json j;
        j["from"] = args.from;
        j["to"] = args.to;
        j["distance_m"] = b.distance_m;
        j["free_space_loss_db"] = b.free_space_loss_db;
        j["obstacle_losses"] = nlohmann::ordered_json::array();
        for (const auto& e : b.obstacle_losses) {
            j["obstacle_losses"].push_back({{"kind", element_name(e)}, {"attenuation_db", e.attenuation_db}});
        }
        j["total_attenuation_db"] = b.total_attenuation_db;
        j["tx_power_dbm"] = b.tx_power_dbm;
        j["received_power_dbm"] = b.received_power_dbm;
        if (to.radio.sensitivity_dbm) {
            j["sensitivity_dbm"] = *to.radio.sensitivity_dbm;
            j["connected"] = propagation::is_connected(b, *to.radio.sensitivity_dbm);
        }
        out << j.dump() << "\n";
        return kExitOk;
    });
}

int cmd_lifetime(const LifetimeArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load_valid(args.scenario, std::nullopt);
        const auto& spec = node_or_fail(cfg, args.node);
        if (spec.role != model::NodeRole::EndDevice) {
            throw ScenarioFailure{"node " + std::to_string(args.node) + " is a " +
                                  std::string(model::to_string(spec.role)) + ", not an EndDevice"};
        }
        const double cycle = args.cycle_s.value_or(spec.sample_period_s.value_or(spec.radio.poll_period_s));
        if (!(args.active_s >= 0.0) || args.active_s > cycle) {
            throw ScenarioFailure{"--active must lie within the cycle"};
        }
        const double capacity = spec.battery.value_or(model::BatteryState{}).remaining_mah;
        const double avg =
            power::average_current(cfg.consumption, cycle, args.active_s, power::PowerState::Transmitting);
        const double hours = power::estimate_lifetime(capacity, avg);
        out << "node " << args.node << ": cycle " << num(cycle) << " s, " << num(args.active_s)
            << " s transmitting, battery " << num(capacity) << " mAh\n";
        out << "  average current   " << fixed(avg, 4) << " mA\n";
        out << "  lifetime          " << fixed(hours, 2) << " h\n";
        out << "  sleep-only bound  " << fixed(power::estimate_lifetime(capacity, cfg.consumption.sleeping_ma), 2)
            << " h\n";
        if (args.report) {
            std::ifstream in(*args.report);
            if (!in) {
                throw ScenarioFailure{"cannot open report " + args.report->string()};
            }
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw ScenarioFailure{args.report->string() + ": " + e.what()};
            }
            for (const auto& n : j.value("nodes", nlohmann::json::array())) {
                if (n.value("id", -1) != args.node) {
                    continue;
                }
                if (n.contains("died_at_s") && n["died_at_s"].is_number()) {
                    out << "  simulated death   " << fixed(n["died_at_s"].get<double>() / 3600.0, 2) << " h\n";
                }
                if (n.contains("average_ma") && n["average_ma"].is_number()) {
                    out << "  simulated average " << fixed(n["average_ma"].get<double>(), 4) << " mA\n";
                }
                if (n.contains("projected_lifetime_h") && n["projected_lifetime_h"].is_number()) {
                    out << "  simulated lifetime " << fixed(n["projected_lifetime_h"].get<double>(), 2) << " h\n";
                }
            }
        }
        return kExitOk;
    });
}

namespace {

void print_status(engine::World& world, std::ostream& out) {
    const auto stats = world.stats();
    out << "t = " << num(world.now().seconds()) << " s, " << world.samples().size() << " samples, "
        << stats.rounds_completed << " rounds completed, " << stats.rounds_aborted << " aborted\n";
    for (const auto& spec : world.config().nodes) {
        const NodeId id = spec.id;
        out << "  node " << id.value << " " << model::to_string(spec.role);
        if (!world.parents().reachable(id)) {
            out << " unreachable";
        }
        if (const auto* ed = world.end_device(id)) {
            const auto q = ed->cyclic_sleep();
            out << " " << (world.is_dead(id) ? "Dead" : protocol::to_string(ed->phase));
            if (const auto& b = world.battery(id)) {
                out << " battery " << fixed(b->remaining_mah, 4) << "/" << num(b->capacity_mah) << " mAh";
            }
            out << " period " << num(ed->sample_period_s) << " s (effective " << num(q.effective_period_s) << " s)";
            if (ed->pending_period_change) {
                out << " pending " << *ed->pending_period_change << " s";
            } else if (auto requested = world.requested_period(id)) {
                out << " pending " << *requested << " s (not yet delivered)";
            }
            if (auto n = world.buffered_for(id)) {
                out << " buffered " << n;
            }
        }
        out << "\n";
    }
}

bool parse_seconds(const std::string& text, double& value) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, value);
    return res.ec == std::errc{} && res.ptr == last && value >= 0.0;
}

}  // namespace

int repl_loop(const ReplArgs& args, std::istream& in, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto cfg = load_valid(args.scenario, args.seed);
        engine::World world(std::move(cfg), engine::WorldOptions{args.trace, {}});
        out << "commands: step, run-until <s>, set-period <node> <s>, status, dump-samples <path>, quit\n";

        std::string line;
        while (std::getline(in, line)) {
            std::istringstream words(line);
            std::string cmd;
            if (!(words >> cmd)) {
                continue;
            }
            std::vector<std::string> rest;
            for (std::string w; words >> w;) {
                rest.push_back(w);
            }

            if (cmd == "quit" || cmd == "exit") {
                break;
            }
            if (cmd == "step" && rest.empty()) {
                if (world.step()) {
                    out << "t = " << num(world.now().seconds()) << " s\n";
                } else {
                    out << "no pending events\n";
                }
            } else if (cmd == "run-until" && rest.size() == 1) {
                double s = 0.0;
                if (!parse_seconds(rest[0], s)) {
                    out << "error: run-until expects seconds\n";
                } else if (engine::SimTime::from_seconds(s) < world.now()) {
                    out << "error: " << rest[0] << " s is in the past (t = " << num(world.now().seconds()) << " s)\n";
                } else {
                    world.run_until(engine::SimTime::from_seconds(s));
                    out << "t = " << num(world.now().seconds()) << " s, " << world.samples().size() << " samples\n";
                }
            } else if (cmd == "set-period" && rest.size() == 2) {
                unsigned node = 0;
                unsigned seconds = 0;
                auto r1 = std::from_chars(rest[0].data(), rest[0].data() + rest[0].size(), node);
                auto r2 = std::from_chars(rest[1].data(), rest[1].data() + rest[1].size(), seconds);
                if (r1.ec != std::errc{} || r2.ec != std::errc{} || node > 0xFFFF || seconds == 0) {
                    out << "error: set-period expects <node> <positive whole seconds>\n";
                } else if (!world.end_device(NodeId{static_cast<std::uint16_t>(node)})) {
                    out << "error: node " << node << " is not an EndDevice\n";
                } else {
                    world.inject(engine::SetPeriodCommand{NodeId{static_cast<std::uint16_t>(node)}, seconds});
                    out << "queued SET_PERIOD " << seconds << " s for node " << node << "\n";
                }
            } else if (cmd == "status" && rest.empty()) {
                print_status(world, out);
            } else if (cmd == "dump-samples" && rest.size() == 1) {
                std::ofstream file(rest[0], std::ios::binary | std::ios::trunc);
                if (!file) {
                    out << "error: cannot write " << rest[0] << "\n";
                } else {
                    file << report::samples_csv(world.samples());
                    out << "wrote " << world.samples().size() << " samples to " << rest[0] << "\n";
                }
            } else {
                out << "error: unknown command: " << line << "\n";
            }
        }

        if (args.out) {
            report::write_outputs(world, *args.out, args.trace);
            out << "outputs in " << args.out->string() << "\n";
        }
        return kExitOk;
    });
}

}  // namespace pathosim::cli
