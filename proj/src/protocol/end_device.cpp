#include "pathosim/protocol/end_device.hpp"

namespace pathosim::protocol {

std::string_view to_string(EndDevicePhase phase) {
    switch (phase) {
    case EndDevicePhase::Sleeping: return "Sleeping";
    case EndDevicePhase::AwakeIdle: return "Awake_Idle";
    case EndDevicePhase::Heating: return "Heating";
    case EndDevicePhase::Sampling: return "Sampling";
    }
    return "?";
}

EndDeviceState make_end_device_state(const model::NodeSpec& spec) {
    EndDeviceState s;
    s.self = spec.id;
    s.sample_period_s = spec.sample_period_s.value_or(spec.radio.poll_period_s);
    s.poll_period_s = spec.radio.poll_period_s;
    s.gauges.resize(spec.sensors.size());
    return s;
}

namespace {

void go_to_sleep(EndDeviceState& state, EndDeviceStep& out) {
    state.phase = EndDevicePhase::Sleeping;
    out.power = power::PowerState::Sleeping;
    if (state.pending_period_change) {
        state.sample_period_s = *state.pending_period_change;
        state.pending_period_change.reset();
        out.period_applied = true;
    }
}

void handle_frame(EndDeviceState& state, const MessageFrame& frame, SimTime now,
                  std::span<const model::SensorSpec> sensors, engine::RngStream& rng, EndDeviceStep& out) {
    const NodeId peer = frame.src;
    auto reply = [&](MessageKind kind) { out.frames.push_back(make_frame(kind, state.self, peer, frame.seq)); };
    auto reject = [&](ErrorCode code) { out.frames.push_back(make_err(state.self, peer, frame.seq, code)); };

    switch (frame.kind) {
    case MessageKind::HeatGaugeReq:
        if (!state.awake()) {
            return reject(ErrorCode::IllegalInPhase);
        }
        for (std::size_t i = 0; i < sensors.size() && i < state.gauges.size(); ++i) {
            if (sensors::requires_heating(sensors[i])) {
                state.gauges[i].start_heating(now, sensors[i].heat_duration_s.value_or(model::kDefaultHeatDurationS));
            }
        }
        state.phase = EndDevicePhase::Heating;
        return reply(MessageKind::Ack);

    case MessageKind::SampleReq: {
        if (!state.awake()) {
            return reject(ErrorCode::IllegalInPhase);
        }
        for (std::size_t i = 0; i < sensors.size() && i < state.gauges.size(); ++i) {
            if (sensors::requires_heating(sensors[i]) && !state.gauges[i].is_heated(now)) {
                return reject(ErrorCode::GaugeNotHeated);
            }
        }
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            const sensors::GaugeState gauge = i < state.gauges.size() ? state.gauges[i] : sensors::GaugeState{};
            const auto value = sensors::sample(sensors[i], gauge, now, rng);
            out.frames.push_back(
                make_sample_resp(state.self, peer, frame.seq, SampleReading{sensors[i].kind, *value, now.ticks}));
        }
        state.phase = EndDevicePhase::Sampling;
        return;
    }

    case MessageKind::SleepReq:
        if (!state.awake()) {
            return reject(ErrorCode::IllegalInPhase);
        }
        reply(MessageKind::Ack);
        for (auto& gauge : state.gauges) {
            gauge = sensors::GaugeState{};
        }
        return go_to_sleep(state, out);

    case MessageKind::SetPeriod: {
        const auto period = set_period_seconds(frame);
        if (!period || *period == 0 || *period < state.poll_period_s) {
            return reject(ErrorCode::BadPeriod);
        }
        state.pending_period_change = *period;
        return reply(MessageKind::Ack);
    }

    case MessageKind::Ack:
    case MessageKind::Err:
        return;

    case MessageKind::Awake:
    case MessageKind::SampleResp:
        return reject(ErrorCode::IllegalInPhase);
    }
}

}  // namespace

EndDeviceStep end_device_step(EndDeviceState& state, const EndDeviceStimulus& stimulus, SimTime now,
                              std::span<const model::SensorSpec> sensors, engine::RngStream& rng) {
    EndDeviceStep out;
    if (std::holds_alternative<ExternalWakeStimulus>(stimulus)) {
        if (!state.awake()) {
            state.phase = EndDevicePhase::AwakeIdle;
            out.power = power::PowerState::AwakeIdle;
            out.frames.push_back(make_frame(MessageKind::Awake, state.self, state.coordinator, state.next_seq++));
        }
    } else if (std::holds_alternative<AwakeGuardExpired>(stimulus)) {
        if (state.awake()) {
            go_to_sleep(state, out);
        }
    } else {
        handle_frame(state, std::get<MessageFrame>(stimulus), now, sensors, rng, out);
    }
    return out;
}

}  // namespace pathosim::protocol
