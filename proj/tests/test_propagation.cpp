#include "pathosim/engine.hpp"
#include "pathosim/propagation.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace pathosim;
using model::NodeId;
using model::NodeRole;
using model::ObstacleKind;
using propagation::PathLossTable;

TEST_CASE("free space loss at the table anchors") {
    const PathLossTable t;
    CHECK(propagation::free_space_loss(t, 0.5) == 0.00);
    CHECK(propagation::free_space_loss(t, 1.0) == 8.16);
    CHECK(propagation::free_space_loss(t, 2.0) == 11.65);
    CHECK(propagation::free_space_loss(t, 4.0) == 19.91);
    CHECK(propagation::free_space_loss(t, 8.0) == 23.93);
    CHECK(propagation::free_space_loss(t, 11.0) == 29.61);
}

TEST_CASE("free space loss between and beyond anchors") {
    const PathLossTable t;
    // log-midpoint of 4 m and 8 m
    CHECK(propagation::free_space_loss(t, 4.0 * std::sqrt(2.0)) == doctest::Approx(21.92).epsilon(1e-12));
    CHECK(propagation::free_space_loss(t, 0.1) == 0.0);
    CHECK(propagation::free_space_loss(t, 0.5) == 0.0);
    CHECK_THROWS_AS(propagation::free_space_loss(t, 0.0), propagation::NonPositiveDistance);
    CHECK_THROWS_AS(propagation::free_space_loss(t, -1.0), propagation::NonPositiveDistance);

    for (double d = 0.3; d < 30.0; d *= 1.07) {
        CHECK(propagation::free_space_loss(t, d) == doctest::Approx(testing::oracle_free_space(d)).epsilon(1e-12));
    }
    // extrapolation keeps the 8-11 m slope
    const double slope = (29.61 - 23.93) / (std::log10(11.0) - std::log10(8.0));
    CHECK(propagation::free_space_loss(t, 22.0) == doctest::Approx(29.61 + slope * std::log10(2.0)));
}

TEST_CASE("free space loss is monotone and continuous") {
    const PathLossTable t;
    double prev = propagation::free_space_loss(t, 0.01);
    for (double d = 0.01; d < 50.0; d += 0.01) {
        const double v = propagation::free_space_loss(t, d);
        CHECK(v >= prev);
        CHECK(v - prev < 0.5);
        prev = v;
    }
}

TEST_CASE("custom tables are validated") {
    CHECK_THROWS(PathLossTable({{1.0, 0.0}}));
    CHECK_THROWS(PathLossTable({{1.0, 0.0}, {1.0, 2.0}}));
    CHECK_THROWS(PathLossTable({{1.0, 3.0}, {2.0, 2.0}}));
    CHECK_NOTHROW(PathLossTable({{1.0, 0.0}, {10.0, 20.0}}));
}

TEST_CASE("link budget of the canned Coordinator-Router segment") {
    const auto cfg = testing::ward();
    const auto b = propagation::link_budget(cfg, NodeId{0}, NodeId{1});
    CHECK(b.distance_m == 11.0);
    CHECK(b.tx_power_dbm == 3.0);
    CHECK(b.free_space_loss_db == 29.61);
    REQUIRE(b.obstacle_losses.size() == 2);
    CHECK(std::get<ObstacleKind>(b.obstacle_losses[0].what) == ObstacleKind::BrickWall);
    CHECK(std::get<ObstacleKind>(b.obstacle_losses[1].what) == ObstacleKind::BrickWall);
    CHECK(b.total_attenuation_db == doctest::Approx(32.53).epsilon(1e-12));
    CHECK(b.received_power_dbm == doctest::Approx(-29.53).epsilon(1e-12));
    CHECK(propagation::is_connected(b, -40.0));
    CHECK(propagation::is_connected(b, b.received_power_dbm));
}

TEST_CASE("link budget examples") {
    model::ScenarioConfig cfg;
    cfg.nodes.push_back(testing::node(0, NodeRole::Coordinator, 0, 0));
    cfg.nodes.push_back(testing::node(1, NodeRole::Router, 0.5, 0));
    cfg.nodes.push_back(testing::node(2, NodeRole::Router, 0, 2));
    cfg.nodes.push_back(testing::node(3, NodeRole::Router, 0, 0));
    cfg.obstacles.push_back(model::Obstacle::of(ObstacleKind::WallClosedDoor, {-1, 1, 1}, {1, 1, 1}));

    CHECK(propagation::link_budget(cfg, NodeId{0}, NodeId{1}).received_power_dbm == 3.0);
    CHECK(propagation::link_budget(cfg, NodeId{0}, NodeId{2}).received_power_dbm ==
          doctest::Approx(-9.84).epsilon(1e-12));
    // co-located nodes clamp to the reference distance
    CHECK(propagation::link_budget(cfg, NodeId{0}, NodeId{3}).received_power_dbm == 3.0);
    CHECK_THROWS_AS(propagation::link_budget(cfg, NodeId{0}, NodeId{9}), model::UnknownNode);
    CHECK_THROWS(propagation::link_budget(cfg, NodeId{0}, NodeId{0}));
}

TEST_CASE("link budget additivity and symmetry on random scenarios") {
    std::mt19937_64 gen(99);
    for (int i = 0; i < 200; ++i) {
        const auto cfg = testing::random_scenario(gen);
        for (const auto& a : cfg.nodes) {
            for (const auto& b : cfg.nodes) {
                if (a.id == b.id) {
                    continue;
                }
                const auto ab = propagation::link_budget(cfg, a.id, b.id);
                double sum = ab.free_space_loss_db;
                for (const auto& e : ab.obstacle_losses) {
                    sum += e.attenuation_db;
                }
                CHECK(ab.total_attenuation_db == doctest::Approx(sum).epsilon(1e-12));
                CHECK(ab.received_power_dbm == doctest::Approx(ab.tx_power_dbm - sum).epsilon(1e-12));
                const auto ba = propagation::link_budget(cfg, b.id, a.id);
                CHECK(ba.total_attenuation_db == doctest::Approx(ab.total_attenuation_db).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("is_connected boundary") {
    propagation::LinkBudget b;
    b.received_power_dbm = -50.0;
    CHECK_FALSE(propagation::is_connected(b, -40.0));
    b.received_power_dbm = -40.0;
    CHECK(propagation::is_connected(b, -40.0));
}

TEST_CASE("measure_rssi") {
    const auto b = propagation::link_budget(testing::ward(), NodeId{0}, NodeId{1});
    engine::RngStream rng(1);
    CHECK(propagation::measure_rssi(b, 0.0, 100, 5, rng) == b.received_power_dbm);
    CHECK(propagation::measure_rssi(b, 0.0, 1, 1, rng) == b.received_power_dbm);

    engine::RngStream r1(42);
    engine::RngStream r2(42);
    CHECK(propagation::measure_rssi(b, 2.0, 100, 5, r1) == propagation::measure_rssi(b, 2.0, 100, 5, r2));

    // 1.96 * 2 / sqrt(500) = 0.175 dB
    int within = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        engine::RngStream r(seed);
        within += std::abs(propagation::measure_rssi(b, 2.0, 100, 5, r) - b.received_power_dbm) <= 0.2;
    }
    CHECK(within >= 95);
}

TEST_CASE("select_channel") {
    CHECK(propagation::select_channel({{11, 0.3}, {12, 0.1}, {13, 0.5}}) == 12);
    CHECK(propagation::select_channel({{11, 0.2}, {15, 0.2}}) == 11);
    CHECK(propagation::select_channel({{20, 0.0}}) == 20);
    CHECK_THROWS_AS(propagation::select_channel({}), propagation::EmptyChannelMap);

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> level(0.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        model::ChannelMap m;
        model::ChannelMap scaled;
        for (int ch = 11; ch <= 26; ++ch) {
            const double v = level(gen);
            m[ch] = v;
            scaled[ch] = v * 7.5;
        }
        CHECK(propagation::select_channel(m) == propagation::select_channel(scaled));
    }
}
