#include "pathosim/world.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace pathosim::engine {

using power::PowerState;
using protocol::MessageKind;

std::string_view to_string(DropReason reason) {
    switch (reason) {
    case DropReason::NoRoute: return "NoRoute";
    case DropReason::BufferFull: return "BufferFull";
    case DropReason::DeadNode: return "DeadNode";
    }
    return "?";
}

namespace {

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string id(NodeId n) { return std::to_string(n.value); }

std::string route(const MessageFrame& f) {
    return std::string(protocol::to_string(f.kind)) + ">" + id(f.dst);
}

struct EventName {
    std::string_view operator()(const ev::TimerFired&) const { return "TimerFired"; }
    std::string_view operator()(const ev::FrameDelivered&) const { return "FrameDelivered"; }
    std::string_view operator()(const ev::PollWake&) const { return "PollWake"; }
    std::string_view operator()(const ev::ExternalWake&) const { return "ExternalWake"; }
    std::string_view operator()(const ev::WarmupDone&) const { return "WarmupDone"; }
    std::string_view operator()(const ev::Timeout&) const { return "Timeout"; }
    std::string_view operator()(const ev::CommandInjected&) const { return "CommandInjected"; }
};

}  // namespace

World::World(model::ScenarioConfig cfg, WorldOptions options)
    : cfg_(std::move(cfg)),
      options_(std::move(options)),
      parents_(protocol::build_parent_table(cfg_, options_.path_loss)),
      shadowing_rng_(RngStream(cfg_.seed).derive(1)),
      sensor_rng_(RngStream(cfg_.seed).derive(2)) {
    coord_params_.self = model::kCoordinatorId;
    coord_params_.warmup_delay = SimTime::from_seconds(cfg_.warmup_delay_s);
    coord_params_.response_timeout = SimTime::from_seconds(cfg_.response_timeout_s);
    coord_params_.max_retries = cfg_.max_retries;

    for (const auto& spec : cfg_.nodes) {
        NodeRuntime rt;
        rt.spec = &spec;
        if (spec.role == model::NodeRole::EndDevice) {
            rt.ledger.state = PowerState::Sleeping;
            rt.battery = spec.battery.value_or(model::BatteryState{});
            rt.initial_mah = rt.battery->remaining_mah;
        } else {
            rt.ledger.state = PowerState::AwakeIdle;
        }
        nodes_.emplace(spec.id, rt);
    }

    for (const auto& spec : cfg_.nodes) {
        if (spec.role != model::NodeRole::EndDevice) {
            continue;
        }
        EndDeviceRuntime ed;
        ed.state = protocol::make_end_device_state(spec);
        const SimTime poll = SimTime::from_seconds(ed.state.poll_period_s);
        const SimTime period = SimTime::from_seconds(ed.state.cyclic_sleep().effective_period_s);
        queue_.schedule(poll, ev::PollWake{spec.id});
        ed.next_external_wake = queue_.schedule(period, ev::ExternalWake{spec.id});
        end_devices_.emplace(spec.id, std::move(ed));

        const bool heating = std::any_of(spec.sensors.begin(), spec.sensors.end(),
                                         [](const auto& s) { return sensors::requires_heating(s); });
        sessions_.emplace(spec.id, protocol::make_session(spec.id, heating, static_cast<unsigned>(spec.sensors.size())));
        buffers_.emplace(spec.id, protocol::ChildBuffer{});
    }

    for (NodeId n : parents_.unreachable()) {
        spdlog::warn("node {} has no route to the coordinator", n.value);
    }
}

RunStats World::run_until(SimTime t_end) {
    while (step_until(t_end)) {
    }
    if (t_end > queue_.now()) {
        queue_.advance_to(t_end);
    }
    return stats();
}

bool World::step() { return step_until(std::nullopt); }

bool World::step_until(std::optional<SimTime> limit) {
    for (auto next = queue_.next_time(); next && (!limit || *next <= *limit); next = queue_.next_time()) {
        auto event = queue_.pop();
        if (auto t = target(event->payload); t && is_dead(*t)) {
            if (std::holds_alternative<ev::FrameDelivered>(event->payload)) {
                ++stats_.frames_lost_in_flight;
            }
            continue;
        }
        dispatch(*event);
        return true;
    }
    return false;
}

RunStats World::stats() {
    stats_.clock = queue_.now();
    stats_.energy.clear();
    for (auto& [node, rt] : nodes_) {
        settle(node, queue_.now());
        stats_.energy.push_back(NodeEnergy{node, rt.ledger, rt.battery, rt.initial_mah});
    }
    return stats_;
}

void World::inject(Command command) { queue_.schedule(queue_.now(), ev::CommandInjected{std::move(command)}); }

std::optional<NodeId> World::target(const SimEvent& event) const {
    return std::visit(
        [](const auto& e) -> std::optional<NodeId> {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ev::CommandInjected>) {
                return model::kCoordinatorId;
            } else {
                return e.node;
            }
        },
        event);
}

std::string World::describe(const SimEvent& event) const {
    if (const auto* t = std::get_if<ev::TimerFired>(&event)) {
        return t->timer == NodeTimer::PollWindowEnd ? "poll-window-end" : "awake-guard";
    }
    if (const auto* d = std::get_if<ev::FrameDelivered>(&event)) {
        return std::string(protocol::to_string(d->frame.kind)) + " " + id(d->frame.src) + ">" + id(d->frame.dst) +
               " seq=" + std::to_string(d->frame.seq) + " rssi=" + num(d->rssi_dbm);
    }
    if (const auto* w = std::get_if<ev::WarmupDone>(&event)) {
        return "target=" + id(w->target) + " round=" + std::to_string(w->round);
    }
    if (const auto* t = std::get_if<ev::Timeout>(&event)) {
        return "session=" + id(t->session) + " round=" + std::to_string(t->round) +
               " attempt=" + std::to_string(t->attempt);
    }
    if (const auto* c = std::get_if<ev::CommandInjected>(&event)) {
        const auto& sp = std::get<SetPeriodCommand>(c->command);
        return "set-period node=" + id(sp.node) + " seconds=" + std::to_string(sp.seconds);
    }
    return "";
}

void World::note(const std::string& token) {
    if (!options_.trace) {
        return;
    }
    if (!pending_detail_.empty()) {
        pending_detail_ += ' ';
    }
    pending_detail_ += token;
}

void World::dispatch(const Event<SimEvent>& event) {
    ++stats_.events_processed;
    if (options_.trace) {
        pending_detail_ = describe(event.payload);
    }
    const NodeId node = *target(event.payload);

    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ev::PollWake>) {
                on_poll_wake(e.node);
            } else if constexpr (std::is_same_v<T, ev::ExternalWake>) {
                on_external_wake(e.node);
            } else if constexpr (std::is_same_v<T, ev::TimerFired>) {
                on_timer(e);
            } else if constexpr (std::is_same_v<T, ev::FrameDelivered>) {
                on_frame(e);
            } else if constexpr (std::is_same_v<T, ev::WarmupDone>) {
                on_coordinator(protocol::WarmupDone{e.round}, e.target);
            } else if constexpr (std::is_same_v<T, ev::Timeout>) {
                on_coordinator(protocol::ResponseTimeout{e.round, e.attempt}, e.session);
            } else {
                on_command(e.command);
            }
        },
        event.payload);

    if (options_.trace) {
        trace_ += std::to_string(event.at.ticks);
        trace_ += '\t';
        trace_ += std::to_string(event.seq);
        trace_ += '\t';
        trace_ += std::visit(EventName{}, event.payload);
        trace_ += '\t';
        trace_ += id(node);
        trace_ += '\t';
        trace_ += pending_detail_;
        trace_ += '\n';
        pending_detail_.clear();
    }
}

void World::on_poll_wake(NodeId node) {
    auto& ed = end_devices_.at(node);
    queue_.schedule(now() + SimTime::from_seconds(ed.state.poll_period_s), ev::PollWake{node});
    if (!ed.state.awake() && !ed.poll_window_open) {
        set_power(node, PowerState::AwakeIdle);
        ed.poll_window_open = true;
        ed.window_end =
            queue_.schedule(now() + SimTime::from_seconds(cfg_.poll_wake_s), ev::TimerFired{node, NodeTimer::PollWindowEnd});
    }
    drain_buffer(node);
}

void World::on_external_wake(NodeId node) {
    auto& ed = end_devices_.at(node);
    ed.last_external_wake = now();
    ed.next_external_wake = queue_.schedule(now() + SimTime::from_seconds(ed.state.cyclic_sleep().effective_period_s),
                                            ev::ExternalWake{node});
    const auto& spec = *nodes_.at(node).spec;
    auto result = protocol::end_device_step(ed.state, protocol::ExternalWakeStimulus{}, now(), spec.sensors, sensor_rng_);
    apply_end_device_step(node, result);
    if (ed.state.awake()) {
        arm_guard(node);
    }
    drain_buffer(node);
}

void World::on_timer(const ev::TimerFired& t) {
    auto& ed = end_devices_.at(t.node);
    if (t.timer == NodeTimer::PollWindowEnd) {
        ed.poll_window_open = false;
        ed.window_end.reset();
        if (!ed.state.awake()) {
            set_power(t.node, PowerState::Sleeping);
        }
        return;
    }
    ed.guard.reset();
    note("guard-expired");
    const auto& spec = *nodes_.at(t.node).spec;
    auto result = protocol::end_device_step(ed.state, protocol::AwakeGuardExpired{}, now(), spec.sensors, sensor_rng_);
    apply_end_device_step(t.node, result);
}

void World::on_frame(const ev::FrameDelivered& d) {
    const NodeId node = d.node;
    const MessageFrame& frame = d.frame;
    if (frame.dst != node) {
        deliver(node, frame);
        return;
    }
    if (end_devices_.contains(node) && !radio_awake(node)) {
        // Arrived after the receiver went back to sleep; the parent keeps it.
        const auto parent = parents_.parent(node);
        if (parent) {
            ++stats_.frames_buffered;
            note("buf=" + route(frame));
            if (auto evicted = buffers_.at(node).push(frame)) {
                drop(DropReason::BufferFull, *evicted);
            }
        }
        return;
    }
    ++stats_.frames_delivered;
    note("final");

    if (end_devices_.contains(node)) {
        on_end_device_frame(node, frame);
        return;
    }
    if (node != model::kCoordinatorId) {
        return;
    }
    if (frame.kind == MessageKind::SampleResp) {
        ++stats_.sample_resp_at_coordinator;
    }
    if (frame.kind == MessageKind::Ack || frame.kind == MessageKind::Err) {
        auto it = requested_periods_.find(frame.src);
        if (it != requested_periods_.end() && it->second.seq == frame.seq) {
            if (frame.kind == MessageKind::Err) {
                spdlog::warn("node {} rejected period {} s", frame.src.value, it->second.seconds);
            }
            requested_periods_.erase(it);
            note("period-ack");
            return;
        }
    }
    if (sessions_.contains(frame.src)) {
        on_coordinator(protocol::FrameReceived{frame, d.rssi_dbm}, frame.src);
    }
}

void World::on_end_device_frame(NodeId node, const MessageFrame& frame) {
    auto& ed = end_devices_.at(node);
    const auto& spec = *nodes_.at(node).spec;
    auto result = protocol::end_device_step(ed.state, frame, now(), spec.sensors, sensor_rng_);
    apply_end_device_step(node, result);
    if (ed.state.awake()) {
        arm_guard(node);
    }
}

void World::on_coordinator(const protocol::CoordinatorStimulus& stimulus, NodeId device) {
    auto& session = session_for(device);
    auto result = protocol::coordinator_step(session, stimulus, now(), coord_params_);
    for (const auto& rec : result.records) {
        samples_.push_back(rec);
        ++stats_.samples_persisted;
        note("record=" + std::string(model::to_string(rec.sensor)));
    }
    if (result.aborted_previous) {
        ++stats_.rounds_aborted;
        note("round=aborted");
    }
    for (const auto& timer : result.timers) {
        if (timer.kind == protocol::TimerKind::Warmup) {
            queue_.schedule(timer.at, ev::WarmupDone{model::kCoordinatorId, device, timer.round});
        } else {
            queue_.schedule(timer.at, ev::Timeout{model::kCoordinatorId, device, timer.round, timer.attempt});
        }
    }
    for (auto& frame : result.frames) {
        originate(model::kCoordinatorId, frame);
    }
    if (result.round_completed) {
        ++stats_.rounds_completed;
        note("round=completed");
    }
    if (result.round_aborted) {
        ++stats_.rounds_aborted;
        note("round=aborted");
    }
}

void World::on_command(const Command& command) {
    const auto& cmd = std::get<SetPeriodCommand>(command);
    if (!end_devices_.contains(cmd.node)) {
        note("rejected=not-end-device");
        spdlog::warn("set-period: node {} is not an end device", cmd.node.value);
        return;
    }
    auto& session = session_for(cmd.node);
    const std::uint16_t seq = session.next_seq++;
    requested_periods_[cmd.node] = PeriodRequest{seq, cmd.seconds};
    originate(model::kCoordinatorId, protocol::make_set_period(model::kCoordinatorId, cmd.node, seq, cmd.seconds));
}

void World::apply_end_device_step(NodeId node, const protocol::EndDeviceStep& result) {
    auto& ed = end_devices_.at(node);
    if (result.power == PowerState::AwakeIdle) {
        set_power(node, PowerState::AwakeIdle);
    }
    for (const auto& frame : result.frames) {
        originate(node, frame);
    }
    if (result.power == PowerState::Sleeping) {
        if (!ed.poll_window_open) {
            set_power(node, PowerState::Sleeping);
        }
        if (ed.guard) {
            queue_.cancel(*ed.guard);
            ed.guard.reset();
        }
    }
    if (result.period_applied) {
        note("period=" + num(ed.state.sample_period_s));
        if (ed.next_external_wake) {
            queue_.cancel(*ed.next_external_wake);
        }
        const SimTime period = SimTime::from_seconds(ed.state.cyclic_sleep().effective_period_s);
        SimTime next = ed.last_external_wake + period;
        while (next <= now()) {
            next = next + period;
        }
        ed.next_external_wake = queue_.schedule(next, ev::ExternalWake{node});
    }
}

void World::drain_buffer(NodeId child) {
    auto it = buffers_.find(child);
    if (it == buffers_.end() || it->second.empty()) {
        return;
    }
    const auto parent = parents_.parent(child);
    auto frames = it->second.drain();
    note("drain=" + std::to_string(frames.size()));
    if (!parent || is_dead(*parent)) {
        for (const auto& f : frames) {
            drop(DropReason::DeadNode, f);
        }
        return;
    }
    for (auto& f : frames) {
        deliver(*parent, f);
    }
}

SimTime World::guard_duration() const {
    return SimTime::from_seconds(cfg_.warmup_delay_s + (cfg_.max_retries + 2) * cfg_.response_timeout_s);
}

void World::arm_guard(NodeId node) {
    auto& ed = end_devices_.at(node);
    if (ed.guard) {
        queue_.cancel(*ed.guard);
    }
    ed.guard = queue_.schedule(now() + guard_duration(), ev::TimerFired{node, NodeTimer::AwakeGuard});
}

void World::originate(NodeId from, MessageFrame frame) {
    ++stats_.frames_sent;
    note("orig=" + route(frame));
    deliver(from, std::move(frame));
}

DeliveryOutcome World::deliver(NodeId from, MessageFrame frame) {
    if (is_dead(from)) {
        drop(DropReason::DeadNode, frame);
        return Dropped{DropReason::DeadNode};
    }
    const auto next = parents_.next_hop(from, frame.dst);
    if (!next) {
        drop(DropReason::NoRoute, frame);
        return Dropped{DropReason::NoRoute};
    }
    if (is_dead(*next)) {
        drop(DropReason::DeadNode, frame);
        return Dropped{DropReason::DeadNode};
    }
    if (end_devices_.contains(*next) && !radio_awake(*next)) {
        ++stats_.frames_buffered;
        note("buf=" + route(frame));
        if (auto evicted = buffers_.at(*next).push(frame)) {
            drop(DropReason::BufferFull, *evicted);
        }
        return Buffered{};
    }
    const SimTime at = transmit(from, frame);
    const double sigma = nodes_.at(*next).spec->radio.shadowing_sigma_db;
    const double rssi = shadowing_rng_.normal(link_rx_dbm(from, *next), sigma);
    ++stats_.hop_transmissions;
    note("tx=" + std::string(protocol::to_string(frame.kind)) + "@" + id(from) + ">" + id(*next));
    queue_.schedule(at, ev::FrameDelivered{*next, std::move(frame), rssi});
    return Delivered{*next, at};
}

SimTime World::airtime(NodeId from, std::size_t bytes) const {
    if (cfg_.tx_airtime_override_s) {
        return SimTime::from_seconds(*cfg_.tx_airtime_override_s);
    }
    const double bitrate = nodes_.at(from).spec->radio.bitrate_bps;
    const double us = std::ceil(static_cast<double>(bytes) * 8.0 * SimTime::kTicksPerSecond / bitrate);
    return SimTime::from_ticks(static_cast<std::uint64_t>(us));
}

SimTime World::transmit(NodeId from, const MessageFrame& frame) {
    auto& rt = nodes_.at(from);
    const SimTime start = std::max(now(), rt.ledger.entered_at);
    const PowerState resume = rt.ledger.state;
    model::BatteryState* battery = rt.battery ? &*rt.battery : nullptr;
    const SimTime end = start + airtime(from, frame.encoded_size());
    power::accrue(rt.ledger, battery, cfg_.consumption, PowerState::Transmitting, start);
    power::accrue(rt.ledger, battery, cfg_.consumption, resume, end);
    return end;
}

void World::set_power(NodeId node, PowerState state) {
    auto& rt = nodes_.at(node);
    power::accrue(rt.ledger, rt.battery ? &*rt.battery : nullptr, cfg_.consumption, state, now());
}

void World::settle(NodeId node, SimTime at) {
    auto& rt = nodes_.at(node);
    power::accrue(rt.ledger, rt.battery ? &*rt.battery : nullptr, cfg_.consumption, rt.ledger.state, at);
}

bool World::is_dead(NodeId node) {
    auto& rt = nodes_.at(node);
    if (rt.battery && !rt.ledger.dead() && rt.ledger.entered_at <= now()) {
        settle(node, now());
    }
    return rt.ledger.dead() && rt.ledger.died_at && *rt.ledger.died_at <= now();
}

bool World::radio_awake(NodeId node) const {
    auto it = end_devices_.find(node);
    if (it == end_devices_.end()) {
        return true;
    }
    return it->second.state.awake() || it->second.poll_window_open;
}

void World::drop(DropReason reason, const MessageFrame& frame) {
    ++stats_.frames_dropped;
    ++stats_.drops_by_reason[reason];
    note("drop=" + std::string(to_string(reason)) + ":" + route(frame));
    spdlog::debug("t={} drop {} {} {}>{}", now().ticks, to_string(reason), protocol::to_string(frame.kind),
                  frame.src.value, frame.dst.value);
}

double World::link_rx_dbm(NodeId from, NodeId to) {
    const auto key = std::make_pair(from, to);
    auto it = rx_cache_.find(key);
    if (it == rx_cache_.end()) {
        it = rx_cache_.emplace(key, propagation::link_budget(cfg_, from, to, options_.path_loss).received_power_dbm).first;
    }
    return it->second;
}

protocol::CoordinatorSession& World::session_for(NodeId device) { return sessions_.at(device); }

const protocol::EndDeviceState* World::end_device(NodeId node) const {
    auto it = end_devices_.find(node);
    return it == end_devices_.end() ? nullptr : &it->second.state;
}

const protocol::CoordinatorSession* World::session(NodeId device) const {
    auto it = sessions_.find(device);
    return it == sessions_.end() ? nullptr : &it->second;
}

std::size_t World::buffered_for(NodeId child) const {
    auto it = buffers_.find(child);
    return it == buffers_.end() ? 0 : it->second.size();
}

const protocol::ChildBuffer* World::buffer_for(NodeId child) const {
    auto it = buffers_.find(child);
    return it == buffers_.end() ? nullptr : &it->second;
}

const power::PowerLedger& World::ledger(NodeId node) const { return nodes_.at(node).ledger; }

const std::optional<model::BatteryState>& World::battery(NodeId node) const { return nodes_.at(node).battery; }

std::optional<std::uint32_t> World::requested_period(NodeId device) const {
    auto it = requested_periods_.find(device);
    if (it == requested_periods_.end()) {
        return std::nullopt;
    }
    return it->second.seconds;
}

}  // namespace pathosim::engine
