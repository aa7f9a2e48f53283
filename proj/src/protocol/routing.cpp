#include "pathosim/protocol/routing.hpp"

#include <algorithm>
#include <set>

namespace pathosim::protocol {

using model::NodeRole;
using model::NodeSpec;

bool link_usable(const model::ScenarioConfig& cfg, NodeId a, NodeId b, const propagation::PathLossTable& table) {
    const NodeSpec& na = cfg.at(a);
    const NodeSpec& nb = cfg.at(b);
    if (!na.radio.sensitivity_dbm || !nb.radio.sensitivity_dbm) {
        return false;
    }
    return propagation::is_connected(propagation::link_budget(cfg, a, b, table), *nb.radio.sensitivity_dbm) &&
           propagation::is_connected(propagation::link_budget(cfg, b, a, table), *na.radio.sensitivity_dbm);
}

bool ParentTable::reachable(NodeId node) const { return node == root_ || attached_.contains(node); }

std::optional<Attachment> ParentTable::attachment(NodeId node) const {
    auto it = attached_.find(node);
    if (it == attached_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<NodeId> ParentTable::parent(NodeId node) const {
    if (auto a = attachment(node)) {
        return a->parent;
    }
    return std::nullopt;
}

std::vector<NodeId> ParentTable::unreachable() const { return unreachable_; }

std::vector<NodeId> ParentTable::path_to_root(NodeId node) const {
    std::vector<NodeId> path;
    if (!reachable(node)) {
        return path;
    }
    path.push_back(node);
    while (path.back() != root_) {
        path.push_back(attached_.at(path.back()).parent);
    }
    return path;
}

std::optional<NodeId> ParentTable::next_hop(NodeId from, NodeId dst) const {
    if (from == dst || !reachable(from) || !reachable(dst)) {
        return std::nullopt;
    }
    const std::vector<NodeId> down = path_to_root(dst);
    auto it = std::find(down.begin(), down.end(), from);
    if (it != down.end()) {
        // `from` is an ancestor of `dst`: step to the child on dst's branch.
        return *(it - 1);
    }
    return parent(from);
}

ParentTable build_parent_table(const model::ScenarioConfig& cfg, const propagation::PathLossTable& table) {
    ParentTable out;

    std::vector<NodeId> routers;
    std::vector<NodeId> end_devices;
    for (const NodeSpec& n : cfg.nodes) {
        if (n.role == NodeRole::Router) {
            routers.push_back(n.id);
        } else if (n.role == NodeRole::EndDevice) {
            end_devices.push_back(n.id);
        }
    }

    auto rx = [&](NodeId from, NodeId to) { return propagation::link_budget(cfg, from, to, table).received_power_dbm; };

    // Best candidate by received power at the child, then lowest id.
    auto choose = [&](NodeId child, const std::vector<NodeId>& candidates) -> std::optional<Attachment> {
        std::optional<Attachment> best;
        for (NodeId c : candidates) {
            if (!link_usable(cfg, c, child, table)) {
                continue;
            }
            const double p = rx(c, child);
            if (!best || p > best->rx_dbm || (p == best->rx_dbm && c < best->parent)) {
                best = Attachment{c, 0, p};
            }
        }
        return best;
    };

    std::map<NodeId, unsigned> hops{{model::kCoordinatorId, 0}};
    std::vector<NodeId> frontier{model::kCoordinatorId};
    std::set<NodeId> pending(routers.begin(), routers.end());
    for (unsigned level = 1; !frontier.empty() && !pending.empty(); ++level) {
        std::vector<NodeId> next;
        for (NodeId r : std::vector<NodeId>(pending.begin(), pending.end())) {
            if (auto a = choose(r, frontier)) {
                a->hops = level;
                out.attached_[r] = *a;
                next.push_back(r);
            }
        }
        for (NodeId r : next) {
            pending.erase(r);
            hops[r] = level;
        }
        frontier = std::move(next);
    }

    std::vector<NodeId> parents;
    for (const auto& [id, _] : hops) {
        parents.push_back(id);
    }
    for (NodeId ed : end_devices) {
        if (auto a = choose(ed, parents)) {
            a->hops = hops.at(a->parent) + 1;
            out.attached_[ed] = *a;
        }
    }

    for (const NodeSpec& n : cfg.nodes) {
        if (n.role != NodeRole::Coordinator && !out.attached_.contains(n.id)) {
            out.unreachable_.push_back(n.id);
        }
    }
    std::sort(out.unreachable_.begin(), out.unreachable_.end());
    return out;
}

std::optional<MessageFrame> ChildBuffer::push(MessageFrame frame) {
    std::optional<MessageFrame> evicted;
    if (frames_.size() == kCapacity) {
        evicted = std::move(frames_.front());
        frames_.pop_front();
    }
    frames_.push_back(std::move(frame));
    return evicted;
}

std::deque<MessageFrame> ChildBuffer::drain() { return std::exchange(frames_, {}); }

}  // namespace pathosim::protocol
