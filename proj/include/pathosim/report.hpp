#pragma once

#include "pathosim/world.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pathosim::report {

using model::NodeId;

struct NodeReport {
    NodeId node;
    model::NodeRole role = model::NodeRole::EndDevice;
    bool reachable = false;
    std::optional<NodeId> parent;
    unsigned hops = 0;
    double sleeping_s = 0.0;
    double awake_idle_s = 0.0;
    double transmitting_s = 0.0;
    double dead_s = 0.0;
    double consumed_mah = 0.0;
    double average_ma = 0.0;
    std::optional<double> remaining_mah;    // battery-powered nodes only
    std::optional<double> projected_lifetime_h;
    std::optional<double> died_at_s;
    std::uint64_t samples = 0;
};

/// Requested sample period against the poll-quantized one actually used.
struct QuantizationNote {
    NodeId node;
    double requested_s = 0.0;
    double poll_s = 0.0;
    std::uint32_t n = 1;
    double effective_s = 0.0;
    double error_pct = 0.0;
};

struct RunReport {
    std::uint64_t seed = 0;
    double clock_s = 0.0;
    std::uint64_t events_processed = 0;
    std::uint64_t samples_total = 0;
    std::uint64_t rounds_completed = 0;
    std::uint64_t rounds_aborted = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t hop_transmissions = 0;
    std::uint64_t frames_delivered = 0;
    std::uint64_t frames_buffered = 0;
    std::uint64_t frames_dropped = 0;
    std::uint64_t frames_lost_in_flight = 0;
    std::map<std::string, std::uint64_t> drops_by_reason;
    std::vector<NodeReport> nodes;
    std::vector<NodeId> unreachable;
    std::vector<QuantizationNote> quantization;
};

/// Settles the world's ledgers at its current clock.
RunReport build_report(engine::World& world);

std::string to_json(const RunReport& report);
std::string to_text(const RunReport& report);

inline constexpr const char* kSamplesHeader = "ticks,node,sensor,value,sampled_ticks,rssi_dbm";
std::string samples_csv(const std::vector<protocol::SampleRecord>& samples);

/// samples.csv, report.json, report.txt, and trace.tsv when `trace` is set.
void write_outputs(engine::World& world, const std::filesystem::path& dir, bool trace);

}  // namespace pathosim::report
