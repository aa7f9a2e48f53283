#include "pathosim/propagation.hpp"

#include "pathosim/engine.hpp"

#include <cmath>
#include <limits>

namespace pathosim::propagation {

PathLossTable::PathLossTable()
    : anchors_{{0.5, 0.00}, {1.0, 8.16}, {2.0, 11.65}, {4.0, 19.91}, {8.0, 23.93}, {11.0, 29.61}} {}

PathLossTable::PathLossTable(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
    if (anchors_.size() < 2) {
        throw std::invalid_argument("path loss table needs at least two anchors");
    }
    for (std::size_t i = 1; i < anchors_.size(); ++i) {
        if (!(anchors_[i].distance_m > anchors_[i - 1].distance_m)) {
            throw std::invalid_argument("path loss anchors must have strictly increasing distances");
        }
        if (anchors_[i].attenuation_db < anchors_[i - 1].attenuation_db) {
            throw std::invalid_argument("path loss anchors must have non-decreasing attenuation");
        }
    }
    if (!(anchors_.front().distance_m > 0.0)) {
        throw std::invalid_argument("path loss anchor distances must be positive");
    }
}

double free_space_loss(const PathLossTable& table, double distance_m) {
    if (!(distance_m > 0.0)) {
        throw NonPositiveDistance("free_space_loss: distance must be > 0");
    }
    const auto& a = table.anchors();
    if (distance_m <= a.front().distance_m) {
        return a.front().attenuation_db;
    }
    std::size_t hi = 1;
    while (hi + 1 < a.size() && distance_m > a[hi].distance_m) {
        ++hi;
    }
    const Anchor& lo_anchor = a[hi - 1];
    const Anchor& hi_anchor = a[hi];
    if (distance_m == hi_anchor.distance_m) {
        return hi_anchor.attenuation_db;
    }
    const double slope = (hi_anchor.attenuation_db - lo_anchor.attenuation_db) /
                         std::log10(hi_anchor.distance_m / lo_anchor.distance_m);
    return lo_anchor.attenuation_db + slope * std::log10(distance_m / lo_anchor.distance_m);
}

LinkBudget link_budget(const model::ScenarioConfig& cfg, model::NodeId a, model::NodeId b,
                       const PathLossTable& table) {
    const model::NodeSpec& from = cfg.at(a);
    const model::NodeSpec& to = cfg.at(b);
    if (a == b) {
        throw std::invalid_argument("link_budget: a node has no link to itself");
    }
    LinkBudget budget;
    budget.distance_m = std::hypot(to.position.x - from.position.x, to.position.y - from.position.y);
    // Co-located nodes (e.g. stacked on different floors) sit at the reference distance.
    budget.free_space_loss_db =
        free_space_loss(table, std::max(budget.distance_m, std::numeric_limits<double>::min()));
    budget.obstacle_losses = model::obstacles_on_path(cfg, a, b);
    budget.total_attenuation_db = budget.free_space_loss_db;
    for (const auto& element : budget.obstacle_losses) {
        budget.total_attenuation_db += element.attenuation_db;
    }
    budget.tx_power_dbm = from.radio.tx_power_dbm;
    budget.received_power_dbm = budget.tx_power_dbm - budget.total_attenuation_db;
    return budget;
}

double measure_rssi(const LinkBudget& budget, double sigma_db, unsigned n_messages, unsigned repetitions,
                    engine::RngStream& rng) {
    if (n_messages == 0 || repetitions == 0 || !(sigma_db >= 0.0)) {
        throw std::invalid_argument("measure_rssi: counts must be >= 1 and sigma >= 0");
    }
    if (sigma_db == 0.0) {
        return budget.received_power_dbm;
    }
    double sum = 0.0;
    for (unsigned r = 0; r < repetitions; ++r) {
        for (unsigned m = 0; m < n_messages; ++m) {
            sum += budget.received_power_dbm + rng.normal(0.0, sigma_db);
        }
    }
    return sum / (static_cast<double>(n_messages) * repetitions);
}

int select_channel(const model::ChannelMap& channels) {
    if (channels.empty()) {
        throw EmptyChannelMap("select_channel: no channels");
    }
    auto best = channels.begin();
    for (auto it = channels.begin(); it != channels.end(); ++it) {
        if (it->second < best->second) {
            best = it;
        }
    }
    return best->first;
}

}  // namespace pathosim::propagation
