#include "adn/topology.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace adn {

std::vector<int> Topology::degrees() const {
    std::vector<int> deg(n, 0);
    for (auto [u, v] : edges) {
        deg.at(u)++;
        deg.at(v)++;
    }
    return deg;
}

bool Topology::connected() const {
    if (n <= 1) return n == 1;
    std::vector<std::vector<int>> adj(n);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int w : adj[u]) {
            if (!seen[w]) {
                seen[w] = 1;
                count++;
                stack.push_back(w);
            }
        }
    }
    return count == n;
}

void Topology::validate() const {
    if (n < 2) throw std::invalid_argument("topology needs n >= 2");
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
        if (u == v) throw std::invalid_argument("self-loop");
        auto key = std::minmax(u, v);
        if (!seen.insert({key.first, key.second}).second) throw std::invalid_argument("duplicate edge");
    }
    if (!roles.empty() && static_cast<int>(roles.size()) != n) {
        throw std::invalid_argument("roles size mismatch");
    }
    if (!connected()) throw std::invalid_argument("topology is disconnected");
}

std::string Topology::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    auto& je = j["edges"] = nlohmann::json::array();
    for (auto [u, v] : edges) je.push_back({u, v});
    if (!roles.empty()) {
        auto& jr = j["roles"] = nlohmann::json::array();
        for (Role r : roles) jr.push_back(r == Role::black ? "black" : "white");
    }
    return j.dump();
}

Topology Topology::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Topology t;
    t.n = j.at("n").get<int>();
    for (const auto& e : j.at("edges")) {
        t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    if (j.contains("roles")) {
        for (const auto& r : j.at("roles")) {
            t.roles.push_back(r.get<std::string>() == "black" ? Role::black : Role::white);
        }
    }
    t.validate();
    return t;
}

Topology build_gadget_g1(int lambda) {
    if (lambda < 1) throw std::invalid_argument("lambda must be >= 1");
    Topology t;
    t.n = lambda + 4;
    // blacks 0..lambda-1, whites lambda..lambda+3
    t.roles.assign(t.n, Role::white);
    const int w = lambda;
    for (int b = 0; b < lambda; ++b) {
        t.roles[b] = Role::black;
        for (int j = 0; j < 4; ++j) t.edges.emplace_back(b, w + j);
    }
    t.edges.emplace_back(w + 0, w + 1);
    t.edges.emplace_back(w + 2, w + 3);
    t.validate();
    return t;
}

Topology build_gadget_g2(int lambda) {
    if (lambda < 1) throw std::invalid_argument("lambda must be >= 1");
    Topology t;
    t.n = 2 * lambda + 8;
    t.roles.assign(t.n, Role::white);
    // blacks: group one 0..lambda-1, group two lambda..2*lambda-1;
    // whites: pair i is (first[i], second[i]) = (2l+2i, 2l+2i+1)
    const int w = 2 * lambda;
    for (int b = 0; b < lambda; ++b) {
        t.roles[b] = Role::black;
        t.roles[lambda + b] = Role::black;
        for (int i = 0; i < 4; ++i) {
            t.edges.emplace_back(b, w + 2 * i);
            t.edges.emplace_back(lambda + b, w + 2 * i + 1);
        }
    }
    for (int i = 0; i < 4; ++i) t.edges.emplace_back(w + 2 * i, w + 2 * i + 1);
    t.validate();
    return t;
}

Topology build_cycle_of_gadgets(int x, int ell_per_gadget, int whites_per_gadget) {
    if (x < 1) throw std::invalid_argument("x must be >= 1");
    if (ell_per_gadget < 0) throw std::invalid_argument("ell_per_gadget must be >= 0");
    const int whites = ell_per_gadget > 0 ? ell_per_gadget : whites_per_gadget;
    if (whites < 1) throw std::invalid_argument("gadget must contain at least one white node");

    Topology t;
    const int per_gadget = ell_per_gadget > 0 ? 2 * whites : whites;
    t.n = x * per_gadget;
    if (t.n < 3 && !(t.n == 2)) throw std::invalid_argument("cycle needs at least 3 nodes");
    t.roles.assign(t.n, Role::white);

    // Whites of gadget g: base..base+whites-1 (a path); pendant blacks follow.
    std::vector<int> white_ids;
    for (int g = 0; g < x; ++g) {
        const int base = g * per_gadget;
        for (int i = 0; i < whites; ++i) {
            white_ids.push_back(base + i);
            if (i + 1 < whites) t.edges.emplace_back(base + i, base + i + 1);
            if (ell_per_gadget > 0) {
                const int black = base + whites + i;
                t.roles[black] = Role::black;
                t.edges.emplace_back(base + i, black);
            }
        }
        if (g > 0) {
            // chain: previous gadget's last white to this gadget's first white
            t.edges.emplace_back((g - 1) * per_gadget + whites - 1, base);
        }
    }
    // close the white cycle; degenerates to a path when the closing edge
    // would be a self-loop or duplicate (single two-white gadget)
    const int first = 0;
    const int last = (x - 1) * per_gadget + whites - 1;
    const bool duplicate = (x == 1 && whites == 2);
    if (first != last && !duplicate) t.edges.emplace_back(last, first);
    t.validate();
    return t;
}

}  // namespace adn
