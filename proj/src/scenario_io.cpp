#include "pathosim/scenario_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

namespace pathosim::model {

using nlohmann::json;

SyntaxError::SyntaxError(const std::string& what, std::size_t l, std::size_t c)
    : std::runtime_error(what), line(l), column(c) {}

namespace {

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw SchemaError(path + ": expected an object");
    }
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    require_object(j, path);
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw SchemaError(path + ": unknown field '" + key + "'");
        }
    }
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        throw SchemaError(path + ": expected a number");
    }
    return j.get<double>();
}

std::uint64_t unsigned_integer(const json& j, const std::string& path, std::uint64_t max) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw SchemaError(path + ": expected a non-negative integer");
    }
    const auto v = j.get<std::uint64_t>();
    if (v > max) {
        throw SchemaError(path + ": value out of range");
    }
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        throw SchemaError(path + ": expected an integer");
    }
    const auto v = j.get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw SchemaError(path + ": value out of range");
    }
    return static_cast<int>(v);
}

const std::string& string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        throw SchemaError(path + ": expected a string");
    }
    return j.get_ref<const std::string&>();
}

template <typename T>
void optional_number(const json& obj, const char* key, const std::string& path, T& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        out = number(*it, path + "." + key);
    }
}

const json& required(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(path + ": missing required field '" + key + "'");
    }
    return *it;
}

Position parse_position(const json& j, const std::string& path) {
    check_keys(j, path, {"x", "y", "floor"});
    Position p;
    p.x = number(required(j, "x", path), path + ".x");
    p.y = number(required(j, "y", path), path + ".y");
    if (auto it = j.find("floor"); it != j.end()) {
        p.floor = integer(*it, path + ".floor");
    }
    return p;
}

void apply_radio(const json& j, const std::string& path, RadioConfig& radio) {
    check_keys(j, path, {"tx_power_dbm", "sensitivity_dbm", "shadowing_sigma_db", "poll_period_s", "bitrate_bps"});
    optional_number(j, "tx_power_dbm", path, radio.tx_power_dbm);
    if (auto it = j.find("sensitivity_dbm"); it != j.end()) {
        radio.sensitivity_dbm = number(*it, path + ".sensitivity_dbm");
    }
    optional_number(j, "shadowing_sigma_db", path, radio.shadowing_sigma_db);
    optional_number(j, "poll_period_s", path, radio.poll_period_s);
    optional_number(j, "bitrate_bps", path, radio.bitrate_bps);
}

Signal parse_signal(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string& type = string(required(j, "type", path), path + ".type");
    if (type == "Constant") {
        check_keys(j, path, {"type", "level"});
        return ConstantSignal{number(required(j, "level", path), path + ".level")};
    }
    if (type == "Ramp") {
        check_keys(j, path, {"type", "start", "slope_per_hour"});
        return RampSignal{number(required(j, "start", path), path + ".start"),
                          number(required(j, "slope_per_hour", path), path + ".slope_per_hour")};
    }
    if (type == "Sinusoid") {
        check_keys(j, path, {"type", "mean", "amplitude", "period_hours"});
        return SinusoidSignal{number(required(j, "mean", path), path + ".mean"),
                              number(required(j, "amplitude", path), path + ".amplitude"),
                              number(required(j, "period_hours", path), path + ".period_hours")};
    }
    throw SchemaError(path + ".type: unknown signal type '" + type + "'");
}

SensorSpec parse_sensor(const json& j, const std::string& path) {
    check_keys(j, path, {"kind", "signal", "noise_sigma", "heat_duration_s"});
    SensorSpec s;
    const std::string& kind = string(required(j, "kind", path), path + ".kind");
    auto k = sensor_kind_from_string(kind);
    if (!k) {
        throw SchemaError(path + ".kind: unknown sensor kind '" + kind + "'");
    }
    s.kind = *k;
    s.signal = parse_signal(required(j, "signal", path), path + ".signal");
    optional_number(j, "noise_sigma", path, s.noise_sigma);
    if (auto it = j.find("heat_duration_s"); it != j.end()) {
        s.heat_duration_s = number(*it, path + ".heat_duration_s");
    } else if (s.kind == SensorKind::StrainGauge) {
        s.heat_duration_s = kDefaultHeatDurationS;
    }
    return s;
}

struct NodeDefaults {
    RadioConfig radio;
    double battery_capacity_mah = kDefaultBatteryCapacityMah;
};

NodeSpec parse_node(const json& j, const std::string& path, const NodeDefaults& defaults) {
    check_keys(j, path, {"id", "role", "position", "radio", "battery", "sensors", "sample_period_s"});
    NodeSpec n;
    n.id = NodeId{static_cast<std::uint16_t>(unsigned_integer(required(j, "id", path), path + ".id", 0xFFFF))};
    const std::string& role = string(required(j, "role", path), path + ".role");
    auto r = role_from_string(role);
    if (!r) {
        throw SchemaError(path + ".role: unknown role '" + role + "'");
    }
    n.role = *r;
    n.position = parse_position(required(j, "position", path), path + ".position");
    n.radio = defaults.radio;
    if (auto it = j.find("radio"); it != j.end()) {
        apply_radio(*it, path + ".radio", n.radio);
    }
    if (auto it = j.find("battery"); it != j.end()) {
        const std::string bpath = path + ".battery";
        check_keys(*it, bpath, {"capacity_mah", "remaining_mah"});
        BatteryState b{defaults.battery_capacity_mah, defaults.battery_capacity_mah};
        if (auto cap = it->find("capacity_mah"); cap != it->end()) {
            b.capacity_mah = b.remaining_mah = number(*cap, bpath + ".capacity_mah");
        }
        optional_number(*it, "remaining_mah", bpath, b.remaining_mah);
        n.battery = b;
    } else if (n.role == NodeRole::EndDevice) {
        n.battery = BatteryState{defaults.battery_capacity_mah, defaults.battery_capacity_mah};
    }
    if (auto it = j.find("sensors"); it != j.end()) {
        if (!it->is_array()) {
            throw SchemaError(path + ".sensors: expected an array");
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            n.sensors.push_back(parse_sensor((*it)[i], path + ".sensors[" + std::to_string(i) + "]"));
        }
    }
    if (auto it = j.find("sample_period_s"); it != j.end()) {
        n.sample_period_s = number(*it, path + ".sample_period_s");
    }
    return n;
}

Obstacle parse_obstacle(const json& j, const std::string& path) {
    check_keys(j, path, {"kind", "from", "to", "attenuation_db"});
    const std::string& kind = string(required(j, "kind", path), path + ".kind");
    auto k = obstacle_kind_from_string(kind);
    if (!k) {
        throw SchemaError(path + ".kind: unknown obstacle kind '" + kind + "'");
    }
    Obstacle ob = Obstacle::of(*k, parse_position(required(j, "from", path), path + ".from"),
                               parse_position(required(j, "to", path), path + ".to"));
    optional_number(j, "attenuation_db", path, ob.attenuation_db);
    return ob;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        auto [line, column] = line_and_column(text, e.byte);
        throw SyntaxError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                              ": " + e.what(),
                          line, column);
    }

    check_keys(root, "$", {"nodes", "obstacles", "channels", "seed", "defaults"});

    ScenarioConfig cfg;
    NodeDefaults node_defaults;

    if (auto it = root.find("defaults"); it != root.end()) {
        const json& d = *it;
        check_keys(d, "$.defaults",
                   {"floor_loss_db", "warmup_delay_s", "response_timeout_s", "max_retries", "tx_airtime_override_s",
                    "poll_wake_s", "radio", "battery_capacity_mah", "consumption"});
        optional_number(d, "floor_loss_db", "$.defaults", cfg.floor_loss_db);
        optional_number(d, "warmup_delay_s", "$.defaults", cfg.warmup_delay_s);
        optional_number(d, "response_timeout_s", "$.defaults", cfg.response_timeout_s);
        if (auto r = d.find("max_retries"); r != d.end()) {
            cfg.max_retries = static_cast<unsigned>(unsigned_integer(*r, "$.defaults.max_retries", 1000));
        }
        if (auto t = d.find("tx_airtime_override_s"); t != d.end()) {
            cfg.tx_airtime_override_s = number(*t, "$.defaults.tx_airtime_override_s");
        }
        optional_number(d, "poll_wake_s", "$.defaults", cfg.poll_wake_s);
        if (auto r = d.find("radio"); r != d.end()) {
            apply_radio(*r, "$.defaults.radio", node_defaults.radio);
        }
        optional_number(d, "battery_capacity_mah", "$.defaults", node_defaults.battery_capacity_mah);
        if (auto c = d.find("consumption"); c != d.end()) {
            check_keys(*c, "$.defaults.consumption", {"sleeping_ma", "awake_idle_ma", "transmitting_ma"});
            optional_number(*c, "sleeping_ma", "$.defaults.consumption", cfg.consumption.sleeping_ma);
            optional_number(*c, "awake_idle_ma", "$.defaults.consumption", cfg.consumption.awake_idle_ma);
            optional_number(*c, "transmitting_ma", "$.defaults.consumption", cfg.consumption.transmitting_ma);
        }
    }

    if (auto it = root.find("seed"); it != root.end()) {
        cfg.seed = unsigned_integer(*it, "$.seed", std::numeric_limits<std::uint64_t>::max());
    }

    if (auto it = root.find("channels"); it != root.end()) {
        require_object(*it, "$.channels");
        cfg.channels.clear();
        for (const auto& [key, value] : it->items()) {
            const std::string path = "$.channels." + key;
            int ch = 0;
            std::istringstream in(key);
            if (!(in >> ch) || !in.eof()) {
                throw SchemaError(path + ": channel id must be an integer");
            }
            cfg.channels[ch] = number(value, path);
        }
    }

    const json& nodes = required(root, "nodes", "$");
    if (!nodes.is_array()) {
        throw SchemaError("$.nodes: expected an array");
    }
    std::set<NodeId> ids;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string path = "$.nodes[" + std::to_string(i) + "]";
        NodeSpec n = parse_node(nodes[i], path, node_defaults);
        if (!ids.insert(n.id).second) {
            throw SchemaError(path + ".id: duplicate id " + std::to_string(n.id.value));
        }
        cfg.nodes.push_back(std::move(n));
    }
    const auto coordinators = std::count_if(cfg.nodes.begin(), cfg.nodes.end(),
                                            [](const NodeSpec& n) { return n.role == NodeRole::Coordinator; });
    if (coordinators != 1) {
        throw SchemaError("$.nodes: exactly one Coordinator required, found " + std::to_string(coordinators));
    }

    if (auto it = root.find("obstacles"); it != root.end()) {
        if (!it->is_array()) {
            throw SchemaError("$.obstacles: expected an array");
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            cfg.obstacles.push_back(parse_obstacle((*it)[i], "$.obstacles[" + std::to_string(i) + "]"));
        }
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot open scenario file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace {

json position_json(Position p) { return {{"x", p.x}, {"y", p.y}, {"floor", p.floor}}; }

json signal_json(const Signal& signal) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantSignal>) {
                return {{"type", "Constant"}, {"level", s.level}};
            } else if constexpr (std::is_same_v<T, RampSignal>) {
                return {{"type", "Ramp"}, {"start", s.start}, {"slope_per_hour", s.slope_per_hour}};
            } else {
                return {{"type", "Sinusoid"}, {"mean", s.mean}, {"amplitude", s.amplitude},
                        {"period_hours", s.period_hours}};
            }
        },
        signal);
}

}  // namespace

std::string serialize_scenario(const ScenarioConfig& cfg) {
    json root;
    root["seed"] = cfg.seed;

    json defaults = {
        {"floor_loss_db", cfg.floor_loss_db},
        {"warmup_delay_s", cfg.warmup_delay_s},
        {"response_timeout_s", cfg.response_timeout_s},
        {"max_retries", cfg.max_retries},
        {"poll_wake_s", cfg.poll_wake_s},
        {"consumption",
         {{"sleeping_ma", cfg.consumption.sleeping_ma},
          {"awake_idle_ma", cfg.consumption.awake_idle_ma},
          {"transmitting_ma", cfg.consumption.transmitting_ma}}},
    };
    if (cfg.tx_airtime_override_s) {
        defaults["tx_airtime_override_s"] = *cfg.tx_airtime_override_s;
    }
    root["defaults"] = std::move(defaults);

    json channels = json::object();
    for (const auto& [ch, level] : cfg.channels) {
        channels[std::to_string(ch)] = level;
    }
    root["channels"] = std::move(channels);

    json nodes = json::array();
    for (const NodeSpec& n : cfg.nodes) {
        json radio = {{"tx_power_dbm", n.radio.tx_power_dbm},
                      {"shadowing_sigma_db", n.radio.shadowing_sigma_db},
                      {"poll_period_s", n.radio.poll_period_s},
                      {"bitrate_bps", n.radio.bitrate_bps}};
        if (n.radio.sensitivity_dbm) {
            radio["sensitivity_dbm"] = *n.radio.sensitivity_dbm;
        }
        json node = {{"id", n.id.value},
                     {"role", to_string(n.role)},
                     {"position", position_json(n.position)},
                     {"radio", std::move(radio)}};
        if (n.battery) {
            node["battery"] = {{"capacity_mah", n.battery->capacity_mah}, {"remaining_mah", n.battery->remaining_mah}};
        }
        if (!n.sensors.empty()) {
            json sensors = json::array();
            for (const SensorSpec& s : n.sensors) {
                json sensor = {{"kind", to_string(s.kind)}, {"signal", signal_json(s.signal)}, {"noise_sigma", s.noise_sigma}};
                if (s.heat_duration_s) {
                    sensor["heat_duration_s"] = *s.heat_duration_s;
                }
                sensors.push_back(std::move(sensor));
            }
            node["sensors"] = std::move(sensors);
        }
        if (n.sample_period_s) {
            node["sample_period_s"] = *n.sample_period_s;
        }
        nodes.push_back(std::move(node));
    }
    root["nodes"] = std::move(nodes);

    json obstacles = json::array();
    for (const Obstacle& ob : cfg.obstacles) {
        obstacles.push_back({{"kind", to_string(ob.kind)},
                             {"from", position_json(ob.from)},
                             {"to", position_json(ob.to)},
                             {"attenuation_db", ob.attenuation_db}});
    }
    root["obstacles"] = std::move(obstacles);
    return root.dump(2) + "\n";
}

}  // namespace pathosim::model
