#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adn/topology.hpp"

namespace adn {

enum class AdversaryKind {
    static_path,
    static_star,
    static_cycle,
    random_connected,
    permuted_path,
    random_tree,
    gadget_cycle,
    adaptive_hook,
    fixed,  // replays a caller-supplied topology every round
};

AdversaryKind adversary_kind_from_string(const std::string& name);
std::string to_string(AdversaryKind kind);

// Public per-node snapshot handed to an adaptive adversary: the full
// visible history is the trace so far; this exposes the current round's
// state, which the engine extends every round.
struct AdaptiveView {
    std::uint64_t round = 0;
    int n = 0;
    const double* phi = nullptr;
    const std::uint8_t* status = nullptr;      // values of mmc::Status
    const std::uint8_t* black_flag = nullptr;  // may be null (plain MMC)
    const std::int64_t* estimate = nullptr;
};

struct AdversarySpec {
    AdversaryKind kind = AdversaryKind::static_path;
    std::uint64_t seed = 0;
    // gadget_cycle parameters
    int x = 1;
    int ell_per_gadget = 0;
    int whites_per_gadget = 0;
    // adaptive_hook callback; result is fully validated every round
    std::function<Topology(const AdaptiveView&)> hook;
    // fixed: the topology to replay
    Topology fixed_topology;

    static AdversarySpec fixed_spec(Topology t) {
        AdversarySpec spec;
        spec.kind = AdversaryKind::fixed;
        spec.fixed_topology = std::move(t);
        return spec;
    }
};

// One round's topology in flat reusable buffers (no allocation after the
// first round at fixed n).
struct RoundTopology {
    int n = 0;
    int edge_count = 0;
    int max_deg = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> deg;
    std::vector<int> nbr;  // neighbor lists, row i at nbr[i*(n-1)..]

    void reset(int nodes);
    void add_edge(int u, int v);
    void load(const Topology& t);
    Topology to_topology() const;
    const int* neighbors(int i) const { return nbr.data() + static_cast<std::size_t>(i) * (n - 1); }
};

// Generates the topology sequence for one run. Oblivious kinds are pure
// functions of (seed, round); adaptive_hook also sees the public state.
class TopologySource {
  public:
    TopologySource(const AdversarySpec& spec, int n);

    // Fills `out` for the given 1-based round. `view` is only consulted by
    // adaptive_hook.
    void materialize(std::uint64_t round, RoundTopology& out, const AdaptiveView* view = nullptr);

    bool is_static() const { return static_; }
    bool is_oblivious() const { return spec_.kind != AdversaryKind::adaptive_hook; }
    // Largest degree any generated topology can contain, for alarm fast paths.
    int degree_ceiling() const { return degree_ceiling_; }

  private:
    void fill_static(RoundTopology& out) const;

    AdversarySpec spec_;
    int n_;
    bool static_ = false;
    int degree_ceiling_ = 0;
    Topology static_topology_;  // for static kinds
};

// Spec-level one-shot API: validated topology for (adversary, round).
Topology next_topology(const AdversarySpec& spec, int n, std::uint64_t round,
                       const AdaptiveView* view = nullptr);

}  // namespace adn
