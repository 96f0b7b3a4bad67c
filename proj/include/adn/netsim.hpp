#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "adn/topology.hpp"

namespace adn {

// Anonymous broadcast delivery: node v's inbox is the multiset of payloads
// of v's current neighbors, with no sender identity. Iteration order over
// each inbox is canonicalized (ascending) so runs are deterministic.
template <class Payload>
std::vector<std::vector<Payload>> deliver(const Topology& t,
                                          const std::vector<Payload>& outgoing) {
    if (static_cast<int>(outgoing.size()) != t.n) {
        throw std::invalid_argument("deliver needs one payload per node");
    }
    std::vector<std::vector<Payload>> inboxes(t.n);
    for (auto [u, v] : t.edges) {
        inboxes[u].push_back(outgoing[v]);
        inboxes[v].push_back(outgoing[u]);
    }
    for (auto& box : inboxes) std::sort(box.begin(), box.end());
    return inboxes;
}

}  // namespace adn
