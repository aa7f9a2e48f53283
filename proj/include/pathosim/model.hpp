#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pathosim::model {

struct NodeId {
    std::uint16_t value = 0;

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline constexpr NodeId kCoordinatorId{0};

enum class NodeRole { Coordinator, Router, EndDevice };

struct Position {
    double x = 0.0;
    double y = 0.0;
    int floor = 0;

    friend bool operator==(const Position&, const Position&) = default;
};

enum class ObstacleKind { WindowOpenBlinds, WindowClosedBlinds, WallOpenDoor, WallClosedDoor, BrickWall };

/// Mean measured attenuation of one obstacle crossing, in dB.
constexpr double default_attenuation(ObstacleKind kind) {
    switch (kind) {
    case ObstacleKind::WindowOpenBlinds: return 1.04;
    case ObstacleKind::WindowClosedBlinds: return 3.95;
    case ObstacleKind::WallOpenDoor: return 0.39;
    case ObstacleKind::WallClosedDoor: return 1.19;
    case ObstacleKind::BrickWall: return 1.46;
    }
    return 0.0;
}

inline constexpr double kDefaultFloorLossDb = 13.08;

struct Obstacle {
    ObstacleKind kind = ObstacleKind::BrickWall;
    Position from;
    Position to;
    double attenuation_db = default_attenuation(ObstacleKind::BrickWall);

    static Obstacle of(ObstacleKind kind, Position from, Position to) {
        return Obstacle{kind, from, to, default_attenuation(kind)};
    }

    friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct RadioConfig {
    double tx_power_dbm = 3.0;
    /// No universal default: required whenever the scenario has links.
    std::optional<double> sensitivity_dbm;
    double shadowing_sigma_db = 0.0;
    double poll_period_s = 28.0;
    double bitrate_bps = 250000.0;

    friend bool operator==(const RadioConfig&, const RadioConfig&) = default;
};

inline constexpr double kDefaultBatteryCapacityMah = 1100.0;

struct BatteryState {
    double capacity_mah = kDefaultBatteryCapacityMah;
    double remaining_mah = kDefaultBatteryCapacityMah;

    friend bool operator==(const BatteryState&, const BatteryState&) = default;
};

enum class SensorKind : std::uint8_t { StrainGauge = 1, Displacement = 2, TemperatureCatheter = 3 };

struct ConstantSignal {
    double level = 0.0;
    friend bool operator==(const ConstantSignal&, const ConstantSignal&) = default;
};
struct RampSignal {
    double start = 0.0;
    double slope_per_hour = 0.0;
    friend bool operator==(const RampSignal&, const RampSignal&) = default;
};
struct SinusoidSignal {
    double mean = 0.0;
    double amplitude = 0.0;
    double period_hours = 24.0;
    friend bool operator==(const SinusoidSignal&, const SinusoidSignal&) = default;
};
using Signal = std::variant<ConstantSignal, RampSignal, SinusoidSignal>;

inline constexpr double kDefaultHeatDurationS = 120.0;

struct SensorSpec {
    SensorKind kind = SensorKind::TemperatureCatheter;
    Signal signal = ConstantSignal{};
    double noise_sigma = 0.0;
    /// Present for strain gauges only.
    std::optional<double> heat_duration_s;

    friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

struct NodeSpec {
    NodeId id;
    NodeRole role = NodeRole::EndDevice;
    Position position;
    RadioConfig radio;
    std::optional<BatteryState> battery;
    std::vector<SensorSpec> sensors;
    std::optional<double> sample_period_s;

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct ConsumptionProfile {
    double sleeping_ma = 21.10;
    double awake_idle_ma = 69.80;
    double transmitting_ma = 109.80;

    friend bool operator==(const ConsumptionProfile&, const ConsumptionProfile&) = default;
};

using ChannelMap = std::map<int, double>;

/// All 16 channels of the 2.4 GHz band at zero interference.
ChannelMap default_channels();

struct ScenarioConfig {
    std::vector<NodeSpec> nodes;
    std::vector<Obstacle> obstacles;
    double floor_loss_db = kDefaultFloorLossDb;
    ChannelMap channels = default_channels();
    std::uint64_t seed = 1;
    double warmup_delay_s = 120.0;
    double response_timeout_s = 5.0;
    unsigned max_retries = 2;
    std::optional<double> tx_airtime_override_s;
    ConsumptionProfile consumption;
    /// Radio-on window of a poll wake while the device is otherwise asleep.
    double poll_wake_s = 0.1;

    const NodeSpec* find(NodeId id) const;
    const NodeSpec& at(NodeId id) const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

class UnknownNode : public std::out_of_range {
public:
    explicit UnknownNode(NodeId id);
    NodeId id;
};

struct Violation {
    std::string subject;  // "node 3", "obstacle 1", "scenario"
    std::string field;
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate_scenario(const ScenarioConfig& cfg);

struct FloorCrossing {
    friend bool operator==(FloorCrossing, FloorCrossing) = default;
};

/// One attenuating element met on a straight path.
struct PathElement {
    std::variant<ObstacleKind, FloorCrossing> what;
    double attenuation_db = 0.0;

    friend bool operator==(const PathElement&, const PathElement&) = default;
};

/// Obstacles (same-floor links) or floor crossings (cross-floor links) met
/// going from `a` to `b`, ordered along the path.
std::vector<PathElement> obstacles_on_path(const ScenarioConfig& cfg, NodeId a, NodeId b);

/// Strict 2-D segment intersection; touching or collinear overlap is false.
bool segments_cross(Position p1, Position p2, Position q1, Position q2);

std::string_view to_string(NodeRole role);
std::string_view to_string(ObstacleKind kind);
std::string_view to_string(SensorKind kind);
std::optional<NodeRole> role_from_string(std::string_view s);
std::optional<ObstacleKind> obstacle_kind_from_string(std::string_view s);
std::optional<SensorKind> sensor_kind_from_string(std::string_view s);

}  // namespace pathosim::model

template <>
struct std::hash<pathosim::model::NodeId> {
    std::size_t operator()(pathosim::model::NodeId id) const noexcept { return id.value; }
};
