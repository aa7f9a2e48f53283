#pragma once

#include "pathosim/model.hpp"
#include "pathosim/propagation.hpp"
#include "pathosim/protocol/frame.hpp"

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <vector>

namespace pathosim::protocol {

/// A link is usable when each side hears the other at or above its own
/// sensitivity.
bool link_usable(const model::ScenarioConfig& cfg, NodeId a, NodeId b,
                 const propagation::PathLossTable& table = propagation::PathLossTable{});

struct Attachment {
    NodeId parent;
    unsigned hops = 0;
    /// Received power at the child from the parent.
    double rx_dbm = 0.0;
};

/// Static tree rooted at the Coordinator. Routers attach to a neighbour one
/// hop closer to the root; End Devices attach to the strongest reachable
/// Coordinator-or-Router. Ties go to higher received power, then lower id.
class ParentTable {
public:
    bool reachable(NodeId node) const;
    std::optional<Attachment> attachment(NodeId node) const;
    std::optional<NodeId> parent(NodeId node) const;
    std::vector<NodeId> unreachable() const;
    /// node, parent(node), ..., Coordinator. Empty if unreachable.
    std::vector<NodeId> path_to_root(NodeId node) const;
    /// Next tree hop from `from` toward `dst`; nullopt if either is unreachable.
    std::optional<NodeId> next_hop(NodeId from, NodeId dst) const;

    const std::map<NodeId, Attachment>& attachments() const { return attached_; }

private:
    friend ParentTable build_parent_table(const model::ScenarioConfig& cfg, const propagation::PathLossTable& table);

    NodeId root_{model::kCoordinatorId};
    std::map<NodeId, Attachment> attached_;
    std::vector<NodeId> unreachable_;
};

ParentTable build_parent_table(const model::ScenarioConfig& cfg,
                               const propagation::PathLossTable& table = propagation::PathLossTable{});

/// Frames a parent holds for a sleeping End Device child until its next poll.
class ChildBuffer {
public:
    static constexpr std::size_t kCapacity = 16;

    /// Returns the evicted oldest frame when the buffer was full.
    std::optional<MessageFrame> push(MessageFrame frame);
    std::deque<MessageFrame> drain();

    std::size_t size() const { return frames_.size(); }
    bool empty() const { return frames_.empty(); }
    const std::deque<MessageFrame>& frames() const { return frames_; }

private:
    std::deque<MessageFrame> frames_;
};

}  // namespace pathosim::protocol
