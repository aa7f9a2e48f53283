#include "pathosim/report.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pathosim::report {

using power::PowerState;

namespace {

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

}  // namespace

RunReport build_report(engine::World& world) {
    const engine::RunStats stats = world.stats();
    const auto& cfg = world.config();
    const auto& parents = world.parents();

    RunReport r;
    r.seed = cfg.seed;
    r.clock_s = stats.clock.seconds();
    r.events_processed = stats.events_processed;
    r.samples_total = world.samples().size();
    r.rounds_completed = stats.rounds_completed;
    r.rounds_aborted = stats.rounds_aborted;
    r.frames_sent = stats.frames_sent;
    r.hop_transmissions = stats.hop_transmissions;
    r.frames_delivered = stats.frames_delivered;
    r.frames_buffered = stats.frames_buffered;
    r.frames_dropped = stats.frames_dropped;
    r.frames_lost_in_flight = stats.frames_lost_in_flight;
    for (const auto& [reason, count] : stats.drops_by_reason) {
        r.drops_by_reason[std::string(engine::to_string(reason))] = count;
    }
    r.unreachable = parents.unreachable();

    std::map<NodeId, std::uint64_t> per_node;
    for (const auto& rec : world.samples()) {
        ++per_node[rec.node];
    }

    for (const auto& e : stats.energy) {
        const auto& spec = cfg.at(e.node);
        NodeReport n;
        n.node = e.node;
        n.role = spec.role;
        n.reachable = parents.reachable(e.node);
        if (auto a = parents.attachment(e.node)) {
            n.parent = a->parent;
            n.hops = a->hops;
        }
        n.sleeping_s = e.ledger.seconds_in(PowerState::Sleeping);
        n.awake_idle_s = e.ledger.seconds_in(PowerState::AwakeIdle);
        n.transmitting_s = e.ledger.seconds_in(PowerState::Transmitting);
        n.dead_s = e.ledger.seconds_in(PowerState::Dead);
        n.consumed_mah = power::ledger_energy_mah(e.ledger, cfg.consumption);
        const double alive_h = (n.sleeping_s + n.awake_idle_s + n.transmitting_s) / 3600.0;
        n.average_ma = alive_h > 0.0 ? n.consumed_mah / alive_h : 0.0;
        if (e.battery) {
            n.remaining_mah = e.battery->remaining_mah;
            if (n.average_ma > 0.0) {
                n.projected_lifetime_h = power::estimate_lifetime(e.initial_mah, n.average_ma);
            }
        }
        if (e.ledger.died_at) {
            n.died_at_s = e.ledger.died_at->seconds();
        }
        n.samples = per_node.contains(e.node) ? per_node.at(e.node) : 0;
        r.nodes.push_back(n);

        if (spec.role == model::NodeRole::EndDevice) {
            const auto* state = world.end_device(e.node);
            const auto q = state->cyclic_sleep();
            QuantizationNote note;
            note.node = e.node;
            note.requested_s = state->sample_period_s;
            note.poll_s = state->poll_period_s;
            note.n = q.n;
            note.effective_s = q.effective_period_s;
            note.error_pct = 100.0 * (q.effective_period_s - state->sample_period_s) / state->sample_period_s;
            r.quantization.push_back(note);
        }
    }
    return r;
}

std::string to_json(const RunReport& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["seed"] = r.seed;
    j["clock_s"] = r.clock_s;
    j["events_processed"] = r.events_processed;
    j["samples_total"] = r.samples_total;
    j["rounds_completed"] = r.rounds_completed;
    j["rounds_aborted"] = r.rounds_aborted;
    j["frames_sent"] = r.frames_sent;
    j["hop_transmissions"] = r.hop_transmissions;
    j["frames_delivered"] = r.frames_delivered;
    j["frames_buffered"] = r.frames_buffered;
    j["frames_dropped"] = r.frames_dropped;
    j["frames_lost_in_flight"] = r.frames_lost_in_flight;
    j["drops_by_reason"] = ordered_json::object();
    for (const auto& [reason, count] : r.drops_by_reason) {
        j["drops_by_reason"][reason] = count;
    }
    j["unreachable"] = ordered_json::array();
    for (NodeId n : r.unreachable) {
        j["unreachable"].push_back(n.value);
    }
    j["nodes"] = ordered_json::array();
    for (const auto& n : r.nodes) {
        ordered_json o;
        o["id"] = n.node.value;
        o["role"] = model::to_string(n.role);
        o["reachable"] = n.reachable;
        o["parent"] = n.parent ? ordered_json(n.parent->value) : ordered_json(nullptr);
        o["hops"] = n.hops;
        o["state_seconds"] = {{"Sleeping", n.sleeping_s},
                              {"Awake_Idle", n.awake_idle_s},
                              {"Transmitting", n.transmitting_s},
                              {"Dead", n.dead_s}};
        o["consumed_mah"] = n.consumed_mah;
        o["average_ma"] = n.average_ma;
        o["remaining_mah"] = n.remaining_mah ? ordered_json(*n.remaining_mah) : ordered_json(nullptr);
        o["projected_lifetime_h"] =
            n.projected_lifetime_h ? ordered_json(*n.projected_lifetime_h) : ordered_json(nullptr);
        o["died_at_s"] = n.died_at_s ? ordered_json(*n.died_at_s) : ordered_json(nullptr);
        o["samples"] = n.samples;
        j["nodes"].push_back(o);
    }
    j["quantization"] = ordered_json::array();
    for (const auto& q : r.quantization) {
        j["quantization"].push_back({{"node", q.node.value},
                                     {"requested_s", q.requested_s},
                                     {"poll_s", q.poll_s},
                                     {"n", q.n},
                                     {"effective_s", q.effective_s},
                                     {"error_pct", q.error_pct}});
    }
    return j.dump(2) + "\n";
}

std::string to_text(const RunReport& r) {
    std::ostringstream out;
    out << "run: " << fixed(r.clock_s, 0) << " s (" << fixed(r.clock_s / 3600.0, 2) << " h), seed " << r.seed
        << ", " << r.events_processed << " events\n";
    out << "samples: " << r.samples_total << "\n";
    out << "rounds: " << r.rounds_completed << " completed, " << r.rounds_aborted << " aborted\n";
    out << "frames: " << r.frames_sent << " sent, " << r.hop_transmissions << " hop transmissions, "
        << r.frames_delivered << " delivered, " << r.frames_buffered << " buffered, " << r.frames_dropped
        << " dropped, " << r.frames_lost_in_flight << " lost in flight\n";
    for (const auto& [reason, count] : r.drops_by_reason) {
        out << "  drop " << reason << ": " << count << "\n";
    }
    out << "\nnodes:\n";
    for (const auto& n : r.nodes) {
        out << "  node " << n.node.value << " (" << model::to_string(n.role) << ")";
        if (!n.reachable) {
            out << " UNREACHABLE";
        } else if (n.parent) {
            out << " parent " << n.parent->value << ", " << n.hops << " hop" << (n.hops == 1 ? "" : "s");
        }
        out << "\n";
        out << "    sleeping " << fixed(n.sleeping_s, 3) << " s, awake " << fixed(n.awake_idle_s, 3)
            << " s, transmitting " << fixed(n.transmitting_s, 3) << " s";
        if (n.dead_s > 0.0) {
            out << ", dead " << fixed(n.dead_s, 3) << " s";
        }
        out << "\n";
        out << "    consumed " << fixed(n.consumed_mah, 4) << " mAh, average " << fixed(n.average_ma, 4) << " mA";
        if (n.remaining_mah) {
            out << ", remaining " << fixed(*n.remaining_mah, 4) << " mAh";
        }
        if (n.projected_lifetime_h) {
            out << ", projected lifetime " << fixed(*n.projected_lifetime_h, 2) << " h";
        }
        out << "\n";
        if (n.died_at_s) {
            out << "    died at " << fixed(*n.died_at_s, 6) << " s (" << fixed(*n.died_at_s / 3600.0, 3) << " h)\n";
        }
        if (n.role == model::NodeRole::EndDevice) {
            out << "    samples " << n.samples << "\n";
        }
    }
    if (!r.quantization.empty()) {
        out << "\nsample period quantization:\n";
        for (const auto& q : r.quantization) {
            out << "  node " << q.node.value << ": requested " << num(q.requested_s) << " s, poll " << num(q.poll_s)
                << " s, n = " << q.n << ", effective " << num(q.effective_s) << " s (" << fixed(q.error_pct, 2)
                << "%)\n";
        }
    }
    return out.str();
}

std::string samples_csv(const std::vector<protocol::SampleRecord>& samples) {
    std::string out = kSamplesHeader;
    out += '\n';
    for (const auto& s : samples) {
        out += std::to_string(s.received_at.ticks);
        out += ',';
        out += std::to_string(s.node.value);
        out += ',';
        out += model::to_string(s.sensor);
        out += ',';
        out += num(s.value);
        out += ',';
        out += std::to_string(s.sampled_at.ticks);
        out += ',';
        out += num(s.rssi_dbm);
        out += '\n';
    }
    return out;
}

void write_outputs(engine::World& world, const std::filesystem::path& dir, bool trace) {
    std::filesystem::create_directories(dir);
    const RunReport r = build_report(world);
    write_file(dir / "samples.csv", samples_csv(world.samples()));
    write_file(dir / "report.json", to_json(r));
    write_file(dir / "report.txt", to_text(r));
    if (trace) {
        write_file(dir / "trace.tsv", world.trace());
    }
}

}  // namespace pathosim::report
