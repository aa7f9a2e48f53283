#include "pathosim/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace pathosim::model {

ChannelMap default_channels() {
    ChannelMap channels;
    for (int ch = 11; ch <= 26; ++ch) {
        channels.emplace(ch, 0.0);
    }
    return channels;
}

const NodeSpec* ScenarioConfig::find(NodeId id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const NodeSpec& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const NodeSpec& ScenarioConfig::at(NodeId id) const {
    if (const NodeSpec* node = find(id)) {
        return *node;
    }
    throw UnknownNode(id);
}

UnknownNode::UnknownNode(NodeId node)
    : std::out_of_range("unknown node " + std::to_string(node.value)), id(node) {}

namespace {

std::string node_subject(NodeId id) { return "node " + std::to_string(id.value); }

bool finite(Position p) { return std::isfinite(p.x) && std::isfinite(p.y); }

void validate_node(const NodeSpec& node, bool links_exist, std::vector<Violation>& out) {
    const std::string who = node_subject(node.id);
    auto flag = [&](std::string field, std::string rule) { out.push_back({who, std::move(field), std::move(rule)}); };

    if (!finite(node.position)) {
        flag("position", "coordinates must be finite");
    }
    if (node.role == NodeRole::Coordinator && node.id != kCoordinatorId) {
        flag("id", "Coordinator must have id 0");
    }
    if (node.role != NodeRole::Coordinator && node.id == kCoordinatorId) {
        flag("id", "id 0 is reserved for the Coordinator");
    }

    const RadioConfig& radio = node.radio;
    if (!std::isfinite(radio.tx_power_dbm)) {
        flag("radio.tx_power_dbm", "must be finite");
    }
    if (!(radio.shadowing_sigma_db >= 0.0)) {
        flag("radio.shadowing_sigma_db", "must be >= 0");
    }
    if (!(radio.poll_period_s > 0.0)) {
        flag("radio.poll_period_s", "must be > 0");
    }
    if (!(radio.bitrate_bps > 0.0)) {
        flag("radio.bitrate_bps", "must be > 0");
    }
    if (radio.sensitivity_dbm && !std::isfinite(*radio.sensitivity_dbm)) {
        flag("radio.sensitivity_dbm", "must be finite");
    }
    if (links_exist && !radio.sensitivity_dbm) {
        flag("radio.sensitivity_dbm", "required when the scenario has more than one node");
    }

    if (node.role == NodeRole::EndDevice) {
        if (!node.battery) {
            flag("battery", "End Device requires a battery");
        }
        if (!node.sample_period_s) {
            flag("sample_period_s", "End Device requires a sample period");
        } else if (*node.sample_period_s < radio.poll_period_s) {
            flag("sample_period_s", "sample_period < poll_period");
        }
        if (node.sensors.empty()) {
            flag("sensors", "End Device requires at least one sensor");
        }
    } else {
        if (node.battery) {
            flag("battery", "Coordinator and Routers are mains-powered");
        }
        if (node.sample_period_s) {
            flag("sample_period_s", "only End Devices sample");
        }
        if (!node.sensors.empty()) {
            flag("sensors", "only End Devices carry sensors");
        }
    }

    if (node.battery) {
        const BatteryState& b = *node.battery;
        if (!(b.capacity_mah >= 0.0) || !(b.remaining_mah >= 0.0) || b.remaining_mah > b.capacity_mah) {
            flag("battery", "0 <= remaining <= capacity");
        }
    }

    for (std::size_t i = 0; i < node.sensors.size(); ++i) {
        const SensorSpec& s = node.sensors[i];
        const std::string field = "sensors[" + std::to_string(i) + "]";
        if (!(s.noise_sigma >= 0.0)) {
            flag(field + ".noise_sigma", "must be >= 0");
        }
        if (s.kind == SensorKind::StrainGauge) {
            if (!s.heat_duration_s || !(*s.heat_duration_s > 0.0)) {
                flag(field + ".heat_duration_s", "strain gauge requires heat_duration > 0");
            }
        } else if (s.heat_duration_s) {
            flag(field + ".heat_duration_s", "only strain gauges are heated");
        }
        if (const auto* sin = std::get_if<SinusoidSignal>(&s.signal); sin && !(sin->period_hours > 0.0)) {
            flag(field + ".signal.period_hours", "must be > 0");
        }
    }
}

}  // namespace

std::vector<Violation> validate_scenario(const ScenarioConfig& cfg) {
    std::vector<Violation> out;
    auto flag = [&](std::string field, std::string rule) {
        out.push_back({"scenario", std::move(field), std::move(rule)});
    };

    const auto coordinators = std::count_if(cfg.nodes.begin(), cfg.nodes.end(),
                                            [](const NodeSpec& n) { return n.role == NodeRole::Coordinator; });
    if (coordinators != 1) {
        flag("nodes", "exactly one Coordinator");
    }
    std::set<NodeId> seen;
    for (const NodeSpec& node : cfg.nodes) {
        if (!seen.insert(node.id).second) {
            out.push_back({node_subject(node.id), "id", "duplicate node id"});
        }
    }
    const bool links_exist = cfg.nodes.size() > 1;
    for (const NodeSpec& node : cfg.nodes) {
        validate_node(node, links_exist, out);
    }

    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        const Obstacle& ob = cfg.obstacles[i];
        const std::string who = "obstacle " + std::to_string(i);
        if (ob.from.floor != ob.to.floor) {
            out.push_back({who, "segment", "endpoints must be on the same floor"});
        }
        if (!finite(ob.from) || !finite(ob.to)) {
            out.push_back({who, "segment", "coordinates must be finite"});
        } else if (ob.from.x == ob.to.x && ob.from.y == ob.to.y) {
            out.push_back({who, "segment", "zero-length segment"});
        }
        if (!(ob.attenuation_db >= 0.0)) {
            out.push_back({who, "attenuation_db", "must be >= 0"});
        }
    }

    if (!(cfg.floor_loss_db >= 0.0)) {
        flag("floor_loss_db", "must be >= 0");
    }
    if (cfg.channels.empty()) {
        flag("channels", "must not be empty");
    }
    for (const auto& [ch, level] : cfg.channels) {
        if (ch < 11 || ch > 26) {
            flag("channels", "channel " + std::to_string(ch) + " outside 11..26");
        }
        if (!(level >= 0.0)) {
            flag("channels", "interference of channel " + std::to_string(ch) + " must be >= 0");
        }
    }
    if (!(cfg.warmup_delay_s >= 0.0)) {
        flag("warmup_delay_s", "must be >= 0");
    }
    if (!(cfg.response_timeout_s > 0.0)) {
        flag("response_timeout_s", "must be > 0");
    }
    if (cfg.tx_airtime_override_s && !(*cfg.tx_airtime_override_s > 0.0)) {
        flag("tx_airtime_override_s", "must be > 0");
    }
    if (!(cfg.poll_wake_s > 0.0)) {
        flag("poll_wake_s", "must be > 0");
    }
    const ConsumptionProfile& c = cfg.consumption;
    if (!(c.sleeping_ma >= 0.0 && c.sleeping_ma <= c.awake_idle_ma && c.awake_idle_ma <= c.transmitting_ma)) {
        flag("consumption", "0 <= sleeping <= awake_idle <= transmitting");
    }
    return out;
}

namespace {

double cross(Position o, Position a, Position b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

bool segments_cross(Position p1, Position p2, Position q1, Position q2) {
    const int d1 = sign(cross(q1, q2, p1));
    const int d2 = sign(cross(q1, q2, p2));
    const int d3 = sign(cross(p1, p2, q1));
    const int d4 = sign(cross(p1, p2, q2));
    return d1 * d2 < 0 && d3 * d4 < 0;
}

std::vector<PathElement> obstacles_on_path(const ScenarioConfig& cfg, NodeId a, NodeId b) {
    const Position pa = cfg.at(a).position;
    const Position pb = cfg.at(b).position;

    std::vector<PathElement> out;
    if (pa.floor != pb.floor) {
        const int crossings = std::abs(pa.floor - pb.floor);
        for (int i = 0; i < crossings; ++i) {
            out.push_back({FloorCrossing{}, cfg.floor_loss_db});
        }
        return out;
    }

    // Fraction along a->b where each crossed obstacle is met.
    std::vector<std::pair<double, std::size_t>> hits;
    const double dx = pb.x - pa.x;
    const double dy = pb.y - pa.y;
    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        const Obstacle& ob = cfg.obstacles[i];
        if (ob.from.floor != pa.floor || ob.to.floor != pa.floor) {
            continue;
        }
        if (!segments_cross(pa, pb, ob.from, ob.to)) {
            continue;
        }
        const double ex = ob.to.x - ob.from.x;
        const double ey = ob.to.y - ob.from.y;
        const double denom = dx * ey - dy * ex;
        const double t = ((ob.from.x - pa.x) * ey - (ob.from.y - pa.y) * ex) / denom;
        hits.emplace_back(t, i);
    }
    std::sort(hits.begin(), hits.end());
    for (const auto& [t, i] : hits) {
        out.push_back({cfg.obstacles[i].kind, cfg.obstacles[i].attenuation_db});
    }
    return out;
}

std::string_view to_string(NodeRole role) {
    switch (role) {
    case NodeRole::Coordinator: return "Coordinator";
    case NodeRole::Router: return "Router";
    case NodeRole::EndDevice: return "EndDevice";
    }
    return "?";
}

std::string_view to_string(ObstacleKind kind) {
    switch (kind) {
    case ObstacleKind::WindowOpenBlinds: return "WindowOpenBlinds";
    case ObstacleKind::WindowClosedBlinds: return "WindowClosedBlinds";
    case ObstacleKind::WallOpenDoor: return "WallOpenDoor";
    case ObstacleKind::WallClosedDoor: return "WallClosedDoor";
    case ObstacleKind::BrickWall: return "BrickWall";
    }
    return "?";
}

std::string_view to_string(SensorKind kind) {
    switch (kind) {
    case SensorKind::StrainGauge: return "StrainGauge";
    case SensorKind::Displacement: return "Displacement";
    case SensorKind::TemperatureCatheter: return "TemperatureCatheter";
    }
    return "?";
}

std::optional<NodeRole> role_from_string(std::string_view s) {
    for (NodeRole r : {NodeRole::Coordinator, NodeRole::Router, NodeRole::EndDevice}) {
        if (to_string(r) == s) {
            return r;
        }
    }
    return std::nullopt;
}

std::optional<ObstacleKind> obstacle_kind_from_string(std::string_view s) {
    for (ObstacleKind k : {ObstacleKind::WindowOpenBlinds, ObstacleKind::WindowClosedBlinds, ObstacleKind::WallOpenDoor,
                           ObstacleKind::WallClosedDoor, ObstacleKind::BrickWall}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<SensorKind> sensor_kind_from_string(std::string_view s) {
    for (SensorKind k : {SensorKind::StrainGauge, SensorKind::Displacement, SensorKind::TemperatureCatheter}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

}  // namespace pathosim::model
