#include "adn/adversary.hpp"

#include <algorithm>
#include <stdexcept>

#include "adn/prng.hpp"

namespace adn {

AdversaryKind adversary_kind_from_string(const std::string& name) {
    if (name == "static_path") return AdversaryKind::static_path;
    if (name == "static_star") return AdversaryKind::static_star;
    if (name == "static_cycle") return AdversaryKind::static_cycle;
    if (name == "random_connected") return AdversaryKind::random_connected;
    if (name == "permuted_path") return AdversaryKind::permuted_path;
    if (name == "random_tree") return AdversaryKind::random_tree;
    if (name == "gadget_cycle") return AdversaryKind::gadget_cycle;
    if (name == "adaptive_hook") return AdversaryKind::adaptive_hook;
    if (name == "fixed") return AdversaryKind::fixed;
    throw std::invalid_argument("unknown adversary kind: " + name);
}

std::string to_string(AdversaryKind kind) {
    switch (kind) {
        case AdversaryKind::static_path: return "static_path";
        case AdversaryKind::static_star: return "static_star";
        case AdversaryKind::static_cycle: return "static_cycle";
        case AdversaryKind::random_connected: return "random_connected";
        case AdversaryKind::permuted_path: return "permuted_path";
        case AdversaryKind::random_tree: return "random_tree";
        case AdversaryKind::gadget_cycle: return "gadget_cycle";
        case AdversaryKind::adaptive_hook: return "adaptive_hook";
        case AdversaryKind::fixed: return "fixed";
    }
    return "?";
}

void RoundTopology::reset(int nodes) {
    n = nodes;
    edge_count = 0;
    max_deg = 0;
    edges.resize(static_cast<std::size_t>(nodes) * (nodes - 1) / 2);
    deg.assign(nodes, 0);
    nbr.resize(static_cast<std::size_t>(nodes) * (nodes - 1));
}

void RoundTopology::add_edge(int u, int v) {
    edges[edge_count++] = {u, v};
    nbr[static_cast<std::size_t>(u) * (n - 1) + deg[u]++] = v;
    nbr[static_cast<std::size_t>(v) * (n - 1) + deg[v]++] = u;
    max_deg = std::max({max_deg, deg[u], deg[v]});
}

void RoundTopology::load(const Topology& t) {
    reset(t.n);
    for (auto [u, v] : t.edges) add_edge(u, v);
}

Topology RoundTopology::to_topology() const {
    Topology t;
    t.n = n;
    t.edges.assign(edges.begin(), edges.begin() + edge_count);
    return t;
}

namespace {

void fill_permuted_path(std::uint64_t seed, std::uint64_t round, RoundTopology& out) {
    const int n = out.n;
    int perm[64];
    std::vector<int> big;
    int* p = perm;
    if (n > 64) {
        big.resize(n);
        p = big.data();
    }
    for (int i = 0; i < n; ++i) p[i] = i;
    SplitMix64 rng(derive_stream(seed, "topology", round));
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[i], p[j]);
    }
    out.edge_count = 0;
    out.max_deg = 0;
    std::fill(out.deg.begin(), out.deg.end(), 0);
    for (int i = 0; i + 1 < n; ++i) out.add_edge(p[i], p[i + 1]);
}

// Uniform labeled tree via Pruefer decode; a tree by construction.
void fill_random_tree(SplitMix64& rng, RoundTopology& out) {
    const int n = out.n;
    out.edge_count = 0;
    out.max_deg = 0;
    std::fill(out.deg.begin(), out.deg.end(), 0);
    if (n == 2) {
        out.add_edge(0, 1);
        return;
    }
    int seq[62];
    std::vector<int> big_seq;
    int* s = seq;
    if (n - 2 > 62) {
        big_seq.resize(n - 2);
        s = big_seq.data();
    }
    std::vector<int> count(n, 0);
    for (int i = 0; i < n - 2; ++i) {
        s[i] = static_cast<int>(rng.next_below(n));
        count[s[i]]++;
    }
    int ptr = 0;
    while (count[ptr] > 0) ptr++;
    int leaf = ptr;
    for (int i = 0; i < n - 2; ++i) {
        const int v = s[i];
        out.add_edge(leaf, v);
        if (--count[v] == 0 && v < ptr) {
            leaf = v;
        } else {
            ptr++;
            while (count[ptr] > 0) ptr++;
            leaf = ptr;
        }
    }
    out.add_edge(leaf, n - 1);
}

void fill_random_connected(std::uint64_t seed, std::uint64_t round, RoundTopology& out) {
    SplitMix64 rng(derive_stream(seed, "topology", round));
    fill_random_tree(rng, out);
    // every non-tree pair joins with probability 1/2
    const int n = out.n;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const int* nb = out.neighbors(u);
            bool present = false;
            for (int j = 0; j < out.deg[u]; ++j) {
                if (nb[j] == v) {
                    present = true;
                    break;
                }
            }
            if (!present && rng.next() & 1ULL) out.add_edge(u, v);
        }
    }
}

}  // namespace

TopologySource::TopologySource(const AdversarySpec& spec, int n) : spec_(spec), n_(n) {
    if (n < 2) throw std::invalid_argument("world needs n >= 2");
    switch (spec.kind) {
        case AdversaryKind::static_path: {
            static_topology_.n = n;
            for (int i = 0; i + 1 < n; ++i) static_topology_.edges.emplace_back(i, i + 1);
            static_ = true;
            degree_ceiling_ = n == 2 ? 1 : 2;
            break;
        }
        case AdversaryKind::static_star: {
            static_topology_.n = n;
            for (int i = 1; i < n; ++i) static_topology_.edges.emplace_back(0, i);
            static_ = true;
            degree_ceiling_ = n - 1;
            break;
        }
        case AdversaryKind::static_cycle: {
            if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
            static_topology_.n = n;
            for (int i = 0; i < n; ++i) static_topology_.edges.emplace_back(i, (i + 1) % n);
            static_ = true;
            degree_ceiling_ = 2;
            break;
        }
        case AdversaryKind::gadget_cycle: {
            static_topology_ = build_cycle_of_gadgets(spec.x, spec.ell_per_gadget, spec.whites_per_gadget);
            if (static_topology_.n != n) {
                throw std::invalid_argument("gadget_cycle size " + std::to_string(static_topology_.n) +
                                            " does not match configured n " + std::to_string(n));
            }
            static_ = true;
            for (int d : static_topology_.degrees()) degree_ceiling_ = std::max(degree_ceiling_, d);
            break;
        }
        case AdversaryKind::fixed: {
            static_topology_ = spec.fixed_topology;
            static_topology_.validate();
            if (static_topology_.n != n) throw std::invalid_argument("fixed topology size mismatch");
            static_ = true;
            for (int d : static_topology_.degrees()) degree_ceiling_ = std::max(degree_ceiling_, d);
            break;
        }
        case AdversaryKind::permuted_path:
            degree_ceiling_ = n == 2 ? 1 : 2;
            break;
        case AdversaryKind::random_tree:
        case AdversaryKind::random_connected:
        case AdversaryKind::adaptive_hook:
            degree_ceiling_ = n - 1;
            break;
    }
    if (static_) static_topology_.validate();
    if (spec.kind == AdversaryKind::adaptive_hook && !spec.hook) {
        throw std::invalid_argument("adaptive_hook requires a hook function");
    }
}

void TopologySource::fill_static(RoundTopology& out) const { out.load(static_topology_); }

void TopologySource::materialize(std::uint64_t round, RoundTopology& out, const AdaptiveView* view) {
    if (out.n != n_) out.reset(n_);
    switch (spec_.kind) {
        case AdversaryKind::static_path:
        case AdversaryKind::static_star:
        case AdversaryKind::static_cycle:
        case AdversaryKind::gadget_cycle:
        case AdversaryKind::fixed:
            fill_static(out);
            break;
        case AdversaryKind::permuted_path:
            fill_permuted_path(spec_.seed, round, out);
            break;
        case AdversaryKind::random_tree: {
            SplitMix64 rng(derive_stream(spec_.seed, "topology", round));
            fill_random_tree(rng, out);
            break;
        }
        case AdversaryKind::random_connected:
            fill_random_connected(spec_.seed, round, out);
            break;
        case AdversaryKind::adaptive_hook: {
            if (view == nullptr) throw std::logic_error("adaptive adversary needs the public trace view");
            Topology t = spec_.hook(*view);
            t.validate();  // untrusted
            if (t.n != n_) throw std::runtime_error("adaptive topology has wrong node count");
            out.load(t);
            break;
        }
    }
    // structural guard; generators are connected by construction, the full
    // validator runs in next_topology, on adaptive output, and in tests
    if (out.edge_count < n_ - 1) throw std::logic_error("generated topology cannot be connected");
}

Topology next_topology(const AdversarySpec& spec, int n, std::uint64_t round,
                       const AdaptiveView* view) {
    if (round < 1) throw std::invalid_argument("rounds are 1-based");
    TopologySource source(spec, n);
    RoundTopology rt;
    rt.reset(n);
    source.materialize(round, rt, view);
    Topology t = rt.to_topology();
    t.validate();
    return t;
}

}  // namespace adn
