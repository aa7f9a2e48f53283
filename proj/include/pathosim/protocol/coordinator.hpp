#pragma once

#include "pathosim/engine.hpp"
#include "pathosim/protocol/frame.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace pathosim::protocol {

using engine::SimTime;

struct SampleRecord {
    NodeId node;
    model::SensorKind sensor = model::SensorKind::TemperatureCatheter;
    double value = 0.0;
    SimTime sampled_at;
    SimTime received_at;
    double rssi_dbm = 0.0;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

enum class SessionPhase { WaitingAwake, HeatRequested, WaitingSample, Done };
enum class RoundOutcome { InProgress, Completed, Aborted };

std::string_view to_string(SessionPhase phase);
std::string_view to_string(RoundOutcome outcome);

struct CoordinatorParams {
    NodeId self{model::kCoordinatorId};
    SimTime warmup_delay = SimTime::from_seconds(120.0);
    SimTime response_timeout = SimTime::from_seconds(5.0);
    unsigned max_retries = 2;
};

/// Per-device Coordinator session state. `round` and `attempt` tag timers so stale
/// ones are ignored.
struct CoordinatorSession {
    NodeId device;
    SessionPhase phase = SessionPhase::WaitingAwake;
    RoundOutcome outcome = RoundOutcome::InProgress;
    unsigned retries_left = 0;
    SimTime started_at;
    bool needs_heating = false;
    unsigned expected_samples = 1;
    unsigned received_samples = 0;
    std::uint32_t round = 0;
    std::uint32_t attempt = 0;
    std::uint16_t last_request_seq = 0;
    std::uint16_t next_seq = 1;

    friend bool operator==(const CoordinatorSession&, const CoordinatorSession&) = default;
};

CoordinatorSession make_session(NodeId device, bool needs_heating, unsigned expected_samples);

struct FrameReceived {
    MessageFrame frame;
    double rssi_dbm = 0.0;
};
struct WarmupDone {
    std::uint32_t round = 0;
};
struct ResponseTimeout {
    std::uint32_t round = 0;
    std::uint32_t attempt = 0;
};

using CoordinatorStimulus = std::variant<FrameReceived, WarmupDone, ResponseTimeout>;

enum class TimerKind { Warmup, ResponseTimeout };

struct TimerRequest {
    TimerKind kind;
    SimTime at;
    std::uint32_t round = 0;
    std::uint32_t attempt = 0;
};

struct CoordinatorStep {
    std::vector<MessageFrame> frames;
    std::vector<SampleRecord> records;
    std::vector<TimerRequest> timers;
    /// An AWAKE arrived while the previous round was still open.
    bool aborted_previous = false;
    bool round_completed = false;
    bool round_aborted = false;
};

CoordinatorStep coordinator_step(CoordinatorSession& session, const CoordinatorStimulus& stimulus, SimTime now,
                                 const CoordinatorParams& params);

}  // namespace pathosim::protocol
