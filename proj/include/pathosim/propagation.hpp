#pragma once

#include "pathosim/model.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace pathosim::engine {
class RngStream;
}

namespace pathosim::propagation {

struct Anchor {
    double distance_m;
    double attenuation_db;
};

/// Measured free-space attenuation, relative to the 0.5 m reference.
class PathLossTable {
public:
    /// The indoor measurement table: 0.5, 1, 2, 4, 8, 11 m.
    PathLossTable();
    /// Distances strictly increasing, attenuations non-decreasing, at least two anchors.
    explicit PathLossTable(std::vector<Anchor> anchors);

    const std::vector<Anchor>& anchors() const { return anchors_; }

private:
    std::vector<Anchor> anchors_;
};

class NonPositiveDistance : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class EmptyChannelMap : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Piecewise log-linear interpolation of the table: 0 dB (first anchor
/// value) at or below the first anchor, final-segment slope past the last.
double free_space_loss(const PathLossTable& table, double distance_m);

struct LinkBudget {
    double distance_m = 0.0;
    double free_space_loss_db = 0.0;
    std::vector<model::PathElement> obstacle_losses;
    double total_attenuation_db = 0.0;
    double tx_power_dbm = 0.0;
    double received_power_dbm = 0.0;
};

/// Budget for a transmission from `a` to `b`, using `a`'s transmit power.
LinkBudget link_budget(const model::ScenarioConfig& cfg, model::NodeId a, model::NodeId b,
                       const PathLossTable& table = PathLossTable{});

inline bool is_connected(const LinkBudget& budget, double sensitivity_dbm) {
    return budget.received_power_dbm >= sensitivity_dbm;
}

/// Grand mean of repetitions x n_messages shadowed samples of the received power.
double measure_rssi(const LinkBudget& budget, double sigma_db, unsigned n_messages, unsigned repetitions,
                    engine::RngStream& rng);

/// Least-interference channel; lowest id wins ties.
int select_channel(const model::ChannelMap& channels);

}  // namespace pathosim::propagation
