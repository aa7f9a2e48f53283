#pragma once

#include "pathosim/model.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#ifndef PATHOSIM_SCENARIO_DIR
#define PATHOSIM_SCENARIO_DIR "scenarios"
#endif

namespace pathosim::testing {

inline std::string scenario_path(const std::string& name) { return std::string(PATHOSIM_SCENARIO_DIR) + "/" + name; }

// Straight-line re-derivation of the free-space curve, kept apart from the
// library's table walk: two-point log-linear formula per segment.
inline double oracle_free_space(double d) {
    static constexpr double dist[] = {0.5, 1.0, 2.0, 4.0, 8.0, 11.0};
    static constexpr double loss[] = {0.00, 8.16, 11.65, 19.91, 23.93, 29.61};
    if (d <= dist[0]) {
        return loss[0];
    }
    int i = 0;
    while (i < 4 && d > dist[i + 1]) {
        ++i;
    }
    const double x0 = std::log10(dist[i]);
    const double x1 = std::log10(dist[i + 1]);
    return loss[i] + (loss[i + 1] - loss[i]) * (std::log10(d) - x0) / (x1 - x0);
}

inline model::NodeSpec node(std::uint16_t id, model::NodeRole role, double x, double y, int floor = 1) {
    model::NodeSpec n;
    n.id = model::NodeId{id};
    n.role = role;
    n.position = {x, y, floor};
    n.radio.sensitivity_dbm = -40.0;
    if (role == model::NodeRole::EndDevice) {
        n.battery = model::BatteryState{};
    }
    return n;
}

inline model::SensorSpec catheter(double level = 36.6, double sigma = 0.0) {
    model::SensorSpec s;
    s.kind = model::SensorKind::TemperatureCatheter;
    s.signal = model::ConstantSignal{level};
    s.noise_sigma = sigma;
    return s;
}

inline model::SensorSpec strain_gauge(double heat_s = 120.0) {
    model::SensorSpec s;
    s.kind = model::SensorKind::StrainGauge;
    s.signal = model::RampSignal{100.0, 2.0};
    s.heat_duration_s = heat_s;
    return s;
}

inline model::ScenarioConfig ward(bool with_router = true) {
    using model::NodeRole;
    model::ScenarioConfig cfg;
    cfg.seed = 13;
    cfg.nodes.push_back(node(0, NodeRole::Coordinator, 0, 0));
    if (with_router) {
        cfg.nodes.push_back(node(1, NodeRole::Router, 11, 0));
    }
    auto ed = node(2, NodeRole::EndDevice, 20, 8);
    ed.sensors.push_back(catheter(36.6, 0.05));
    ed.sample_period_s = 1800.0;
    cfg.nodes.push_back(ed);
    using model::ObstacleKind;
    cfg.obstacles.push_back(model::Obstacle::of(ObstacleKind::BrickWall, {3, -5, 1}, {3, 5, 1}));
    cfg.obstacles.push_back(model::Obstacle::of(ObstacleKind::BrickWall, {7, -5, 1}, {7, 5, 1}));
    cfg.obstacles.push_back(model::Obstacle::of(ObstacleKind::WallClosedDoor, {14, -5, 1}, {14, 10, 1}));
    return cfg;
}

/// Coordinator and one End Device 3 m apart, nothing in between.
inline model::ScenarioConfig pair(double sample_period_s, model::SensorSpec sensor = catheter()) {
    using model::NodeRole;
    model::ScenarioConfig cfg;
    cfg.nodes.push_back(node(0, NodeRole::Coordinator, 0, 0));
    auto ed = node(1, NodeRole::EndDevice, 3, 0);
    ed.sensors.push_back(sensor);
    ed.sample_period_s = sample_period_s;
    cfg.nodes.push_back(ed);
    return cfg;
}

/// Random valid scenario: 0-3 Routers, 1-4 End Devices, random walls.
inline model::ScenarioConfig random_scenario(std::mt19937_64& gen) {
    using model::NodeRole;
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };

    model::ScenarioConfig cfg;
    cfg.seed = gen();
    const double sensitivity = uni(-45.0, -30.0);
    cfg.nodes.push_back(node(0, NodeRole::Coordinator, uni(-5, 5), uni(-5, 5), pick(0, 1)));
    const int routers = pick(0, 3);
    const int devices = pick(1, 4);
    std::uint16_t id = 1;
    for (int i = 0; i < routers; ++i) {
        cfg.nodes.push_back(node(id++, NodeRole::Router, uni(-20, 20), uni(-20, 20), pick(0, 1)));
    }
    for (int i = 0; i < devices; ++i) {
        auto ed = node(id++, NodeRole::EndDevice, uni(-20, 20), uni(-20, 20), pick(0, 1));
        ed.radio.poll_period_s = 28.0;
        ed.sample_period_s = uni(28.0, 400.0);
        ed.radio.shadowing_sigma_db = uni(0.0, 3.0);
        const int sensors = pick(1, 2);
        for (int s = 0; s < sensors; ++s) {
            switch (pick(0, 2)) {
            case 0: ed.sensors.push_back(strain_gauge(uni(5.0, 60.0))); break;
            case 1: {
                model::SensorSpec d;
                d.kind = model::SensorKind::Displacement;
                d.signal = model::SinusoidSignal{10.0, 2.0, 6.0};
                d.noise_sigma = uni(0.0, 0.5);
                ed.sensors.push_back(d);
                break;
            }
            default: ed.sensors.push_back(catheter(uni(35.0, 39.0), uni(0.0, 0.2))); break;
            }
        }
        cfg.nodes.push_back(ed);
    }
    for (auto& n : cfg.nodes) {
        n.radio.sensitivity_dbm = sensitivity;
    }
    const int walls = pick(0, 5);
    for (int i = 0; i < walls; ++i) {
        const auto kind = static_cast<model::ObstacleKind>(pick(0, 4));
        const int floor = pick(0, 1);
        cfg.obstacles.push_back(
            model::Obstacle::of(kind, {uni(-20, 20), uni(-20, 20), floor}, {uni(-20, 20), uni(-20, 20), floor}));
    }
    cfg.warmup_delay_s = uni(5.0, 90.0);
    cfg.response_timeout_s = uni(1.0, 6.0);
    cfg.max_retries = static_cast<unsigned>(pick(0, 3));
    return cfg;
}

}  // namespace pathosim::testing
