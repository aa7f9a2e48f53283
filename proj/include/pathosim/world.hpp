#pragma once

#include "pathosim/engine.hpp"
#include "pathosim/model.hpp"
#include "pathosim/power.hpp"
#include "pathosim/propagation.hpp"
#include "pathosim/protocol/coordinator.hpp"
#include "pathosim/protocol/end_device.hpp"
#include "pathosim/protocol/frame.hpp"
#include "pathosim/protocol/routing.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pathosim::engine {

using model::NodeId;
using protocol::MessageFrame;

enum class NodeTimer { PollWindowEnd, AwakeGuard };

struct SetPeriodCommand {
    NodeId node;
    std::uint32_t seconds = 0;
};
using Command = std::variant<SetPeriodCommand>;

namespace ev {
struct TimerFired {
    NodeId node;
    NodeTimer timer;
};
struct FrameDelivered {
    NodeId node;
    MessageFrame frame;
    double rssi_dbm = 0.0;
};
struct PollWake {
    NodeId node;
};
struct ExternalWake {
    NodeId node;
};
struct WarmupDone {
    NodeId node;  // the Coordinator
    NodeId target;
    std::uint32_t round = 0;
};
struct Timeout {
    NodeId node;  // the Coordinator
    NodeId session;
    std::uint32_t round = 0;
    std::uint32_t attempt = 0;
};
struct CommandInjected {
    Command command;
};
}  // namespace ev

using SimEvent = std::variant<ev::TimerFired, ev::FrameDelivered, ev::PollWake, ev::ExternalWake, ev::WarmupDone,
                              ev::Timeout, ev::CommandInjected>;

enum class DropReason { NoRoute, BufferFull, DeadNode };
std::string_view to_string(DropReason reason);

struct Delivered {
    NodeId hop;
    SimTime at;  // arrival at the next hop
};
struct Buffered {};
struct Dropped {
    DropReason reason;
};
using DeliveryOutcome = std::variant<Delivered, Buffered, Dropped>;

struct NodeEnergy {
    NodeId node;
    power::PowerLedger ledger;
    std::optional<model::BatteryState> battery;
    /// Battery charge at t = 0.
    double initial_mah = 0.0;

    friend bool operator==(const NodeEnergy&, const NodeEnergy&) = default;
};

struct RunStats {
    SimTime clock;
    std::uint64_t events_processed = 0;
    std::uint64_t frames_sent = 0;  // originated by an endpoint
    std::uint64_t hop_transmissions = 0;
    std::uint64_t frames_delivered = 0;
    std::uint64_t frames_buffered = 0;
    std::uint64_t frames_dropped = 0;
    std::map<DropReason, std::uint64_t> drops_by_reason;
    std::uint64_t frames_lost_in_flight = 0;  // arrived at a node that had died
    std::uint64_t rounds_completed = 0;
    std::uint64_t rounds_aborted = 0;
    std::uint64_t samples_persisted = 0;
    std::uint64_t sample_resp_at_coordinator = 0;
    std::vector<NodeEnergy> energy;

    friend bool operator==(const RunStats&, const RunStats&) = default;
};

struct WorldOptions {
    bool trace = false;
    propagation::PathLossTable path_loss{};
};

/// One simulated network. Single-threaded; all mutation happens inside the
/// event loop.
class World {
public:
    explicit World(model::ScenarioConfig cfg, WorldOptions options = {});

    SimTime now() const { return queue_.now(); }
    const model::ScenarioConfig& config() const { return cfg_; }
    const protocol::ParentTable& parents() const { return parents_; }
    const std::vector<protocol::SampleRecord>& samples() const { return samples_; }
    const std::string& trace() const { return trace_; }

    /// Processes every event with at <= t_end, then sets the clock to t_end.
    RunStats run_until(SimTime t_end);
    /// Processes the next live event. Returns false when the queue is empty.
    bool step();
    /// Settles every ledger at the current clock and returns the counters.
    RunStats stats();

    /// Queues a command for processing at the current clock.
    void inject(Command command);

    /// Sends `frame` one tree hop from `from` toward frame.dst.
    DeliveryOutcome deliver(NodeId from, MessageFrame frame);

    const protocol::EndDeviceState* end_device(NodeId id) const;
    const protocol::CoordinatorSession* session(NodeId device) const;
    std::size_t buffered_for(NodeId child) const;
    const protocol::ChildBuffer* buffer_for(NodeId child) const;
    const power::PowerLedger& ledger(NodeId id) const;
    const std::optional<model::BatteryState>& battery(NodeId id) const;
    std::optional<std::uint32_t> requested_period(NodeId device) const;
    bool is_dead(NodeId id);

    /// Airtime of a frame of `bytes` sent by `from`.
    SimTime airtime(NodeId from, std::size_t bytes) const;

private:
    // Skips events aimed at dead nodes; never pops past `limit`.
    bool step_until(std::optional<SimTime> limit);
    struct NodeRuntime {
        const model::NodeSpec* spec = nullptr;
        power::PowerLedger ledger;
        std::optional<model::BatteryState> battery;
        double initial_mah = 0.0;
    };
    struct EndDeviceRuntime {
        protocol::EndDeviceState state;
        bool poll_window_open = false;
        SimTime last_external_wake;
        std::optional<EventHandle> next_external_wake;
        std::optional<EventHandle> guard;
        std::optional<EventHandle> window_end;
    };

    void dispatch(const Event<SimEvent>& event);
    std::optional<NodeId> target(const SimEvent& event) const;
    std::string describe(const SimEvent& event) const;
    void note(const std::string& token);

    void on_poll_wake(NodeId node);
    void on_external_wake(NodeId node);
    void on_timer(const ev::TimerFired& t);
    void on_frame(const ev::FrameDelivered& d);
    void on_end_device_frame(NodeId node, const MessageFrame& frame);
    void on_coordinator(const protocol::CoordinatorStimulus& stimulus, NodeId device);
    void on_command(const Command& command);

    void apply_end_device_step(NodeId node, const protocol::EndDeviceStep& step);
    void drain_buffer(NodeId child);
    void arm_guard(NodeId node);
    void originate(NodeId from, MessageFrame frame);
    SimTime transmit(NodeId from, const MessageFrame& frame);
    void set_power(NodeId node, power::PowerState state);
    void settle(NodeId node, SimTime at);
    bool radio_awake(NodeId node) const;
    SimTime guard_duration() const;
    void drop(DropReason reason, const MessageFrame& frame);
    double link_rx_dbm(NodeId from, NodeId to);
    protocol::CoordinatorSession& session_for(NodeId device);

    model::ScenarioConfig cfg_;
    WorldOptions options_;
    protocol::ParentTable parents_;
    protocol::CoordinatorParams coord_params_;
    EventQueue<SimEvent> queue_;
    RngStream shadowing_rng_;
    RngStream sensor_rng_;

    std::map<NodeId, NodeRuntime> nodes_;
    std::map<NodeId, EndDeviceRuntime> end_devices_;
    std::map<NodeId, protocol::CoordinatorSession> sessions_;
    std::map<NodeId, protocol::ChildBuffer> buffers_;  // keyed by child
    struct PeriodRequest {
        std::uint16_t seq = 0;
        std::uint32_t seconds = 0;
    };
    std::map<NodeId, PeriodRequest> requested_periods_;  // until the device ACKs
    std::map<std::pair<NodeId, NodeId>, double> rx_cache_;

    std::vector<protocol::SampleRecord> samples_;
    RunStats stats_;
    std::string trace_;
    std::string pending_detail_;
};

}  // namespace pathosim::engine
