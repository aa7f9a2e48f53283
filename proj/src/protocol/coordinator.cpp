#include "pathosim/protocol/coordinator.hpp"

namespace pathosim::protocol {

std::string_view to_string(SessionPhase phase) {
    switch (phase) {
    case SessionPhase::WaitingAwake: return "WaitingAwake";
    case SessionPhase::HeatRequested: return "HeatRequested";
    case SessionPhase::WaitingSample: return "WaitingSample";
    case SessionPhase::Done: return "Done";
    }
    return "?";
}

std::string_view to_string(RoundOutcome outcome) {
    switch (outcome) {
    case RoundOutcome::InProgress: return "InProgress";
    case RoundOutcome::Completed: return "Completed";
    case RoundOutcome::Aborted: return "Aborted";
    }
    return "?";
}

CoordinatorSession make_session(NodeId device, bool needs_heating, unsigned expected_samples) {
    CoordinatorSession s;
    s.device = device;
    s.needs_heating = needs_heating;
    s.expected_samples = expected_samples;
    return s;
}

namespace {

void send(CoordinatorSession& s, const CoordinatorParams& p, MessageKind kind, CoordinatorStep& out) {
    s.last_request_seq = s.next_seq++;
    out.frames.push_back(make_frame(kind, p.self, s.device, s.last_request_seq));
}

void request_sample(CoordinatorSession& s, SimTime now, const CoordinatorParams& p, CoordinatorStep& out) {
    send(s, p, MessageKind::SampleReq, out);
    s.phase = SessionPhase::WaitingSample;
    ++s.attempt;
    out.timers.push_back({TimerKind::ResponseTimeout, now + p.response_timeout, s.round, s.attempt});
}

void finish(CoordinatorSession& s, const CoordinatorParams& p, RoundOutcome outcome, CoordinatorStep& out) {
    send(s, p, MessageKind::SleepReq, out);
    s.phase = SessionPhase::Done;
    s.outcome = outcome;
    if (outcome == RoundOutcome::Completed) {
        out.round_completed = true;
    } else {
        out.round_aborted = true;
    }
}

bool open(const CoordinatorSession& s) {
    return s.phase == SessionPhase::HeatRequested || s.phase == SessionPhase::WaitingSample;
}

void on_frame(CoordinatorSession& s, const FrameReceived& rx, SimTime now, const CoordinatorParams& p,
              CoordinatorStep& out) {
    const MessageFrame& f = rx.frame;
    if (f.src != s.device) {
        return;
    }
    switch (f.kind) {
    case MessageKind::Awake:
        if (open(s)) {
            s.outcome = RoundOutcome::Aborted;
            out.aborted_previous = true;
        }
        ++s.round;
        s.attempt = 0;
        s.started_at = now;
        s.retries_left = p.max_retries;
        s.received_samples = 0;
        s.outcome = RoundOutcome::InProgress;
        if (s.needs_heating) {
            send(s, p, MessageKind::HeatGaugeReq, out);
            s.phase = SessionPhase::HeatRequested;
            out.timers.push_back({TimerKind::Warmup, now + p.warmup_delay, s.round, 0});
        } else {
            request_sample(s, now, p, out);
        }
        return;

    case MessageKind::SampleResp:
        if (s.phase != SessionPhase::WaitingSample) {
            return;
        }
        if (auto reading = sample_reading(f)) {
            out.records.push_back(SampleRecord{f.src, reading->sensor, reading->value,
                                               SimTime::from_ticks(reading->sampled_ticks), now, rx.rssi_dbm});
            if (++s.received_samples >= s.expected_samples) {
                finish(s, p, RoundOutcome::Completed, out);
            }
        }
        return;

    case MessageKind::Err:
        // Only a request of the open round can be refused; the round is given up.
        if (open(s)) {
            finish(s, p, RoundOutcome::Aborted, out);
        }
        return;

    default:
        return;
    }
}

}  // namespace

CoordinatorStep coordinator_step(CoordinatorSession& session, const CoordinatorStimulus& stimulus, SimTime now,
                                 const CoordinatorParams& params) {
    CoordinatorStep out;
    if (const auto* rx = std::get_if<FrameReceived>(&stimulus)) {
        on_frame(session, *rx, now, params, out);
    } else if (const auto* warm = std::get_if<WarmupDone>(&stimulus)) {
        if (warm->round == session.round && session.phase == SessionPhase::HeatRequested) {
            request_sample(session, now, params, out);
        }
    } else if (const auto* timeout = std::get_if<ResponseTimeout>(&stimulus)) {
        if (timeout->round == session.round && timeout->attempt == session.attempt &&
            session.phase == SessionPhase::WaitingSample) {
            if (session.retries_left > 0) {
                --session.retries_left;
                request_sample(session, now, params, out);
            } else {
                finish(session, params, RoundOutcome::Aborted, out);
            }
        }
    }
    return out;
}

}  // namespace pathosim::protocol
