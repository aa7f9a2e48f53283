#pragma once

#include "pathosim/engine.hpp"
#include "pathosim/power.hpp"
#include "pathosim/protocol/frame.hpp"
#include "pathosim/sensors.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace pathosim::protocol {

using engine::SimTime;

enum class EndDevicePhase { Sleeping, AwakeIdle, Heating, Sampling };

std::string_view to_string(EndDevicePhase phase);

struct EndDeviceState {
    NodeId self;
    NodeId coordinator{model::kCoordinatorId};
    EndDevicePhase phase = EndDevicePhase::Sleeping;
    double sample_period_s = 0.0;
    double poll_period_s = 28.0;
    std::optional<std::uint32_t> pending_period_change;
    /// One window per attached sensor; only strain gauge entries are used.
    std::vector<sensors::GaugeState> gauges;
    std::uint16_t next_seq = 1;

    bool awake() const { return phase != EndDevicePhase::Sleeping; }
    power::CyclicSleep cyclic_sleep() const { return power::cyclic_sleep_n(sample_period_s, poll_period_s); }

    friend bool operator==(const EndDeviceState&, const EndDeviceState&) = default;
};

EndDeviceState make_end_device_state(const model::NodeSpec& spec);

/// Alarm-clock wake of the external circuitry (every n-th poll).
struct ExternalWakeStimulus {};
/// No command arrived for too long; the round is given up.
struct AwakeGuardExpired {};

using EndDeviceStimulus = std::variant<ExternalWakeStimulus, AwakeGuardExpired, MessageFrame>;

struct EndDeviceStep {
    std::vector<MessageFrame> frames;
    std::optional<power::PowerState> power;
    /// A pending SET_PERIOD became the active sample period.
    bool period_applied = false;
};

/// End Device state machine. Illegal frames are answered with ERR and leave the
/// state untouched; sensor noise draws from `rng`.
EndDeviceStep end_device_step(EndDeviceState& state, const EndDeviceStimulus& stimulus, SimTime now,
                              std::span<const model::SensorSpec> sensors, engine::RngStream& rng);

}  // namespace pathosim::protocol
