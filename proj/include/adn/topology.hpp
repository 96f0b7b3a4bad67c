#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace adn {

enum class Role : std::uint8_t { white = 0, black = 1 };

// One round's undirected connected edge set. Node indices are engine
// labels only; protocol code never sees them.
struct Topology {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<Role> roles;  // optional; empty means unspecified

    // Throws std::invalid_argument on self-loops, duplicate/END out-of-range
    // edges, n < 2, or a disconnected graph.
    void validate() const;

    std::vector<int> degrees() const;
    bool connected() const;

    std::string to_json() const;
    static Topology from_json(const std::string& text);
};

// Impossibility fixtures.
//
// g1: lambda black nodes all adjacent to 4 white nodes; the whites form two
// adjacent pairs. Black degree 4, white degree lambda+1.
Topology build_gadget_g1(int lambda);

// g2: two groups of lambda black nodes and four white pairs; group-1 blacks
// adjacent to all first pair elements, group-2 blacks to all second
// elements, plus the pair edges. Black degree 4, white degree lambda+1.
Topology build_gadget_g2(int lambda);

// Cycle of x caterpillar gadgets: per gadget, ell_per_gadget white nodes in
// a path, each with one pendant black node; gadgets chained by their white
// endpoints into a cycle. For ell_per_gadget = 0 the gadget is a bare path
// of whites_per_gadget white nodes and the result is a plain cycle.
Topology build_cycle_of_gadgets(int x, int ell_per_gadget, int whites_per_gadget = 0);

}  // namespace adn
