#include "adn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "adn/prng.hpp"

namespace adn {

// ---------------------------------------------------------------------------
// streaming checker

InvariantChecker::InvariantChecker(int n, std::int64_t ell, double epsilon)
    : n_(n), ell_(ell), epsilon_(epsilon) {}

void InvariantChecker::fail(CheckResult& r, std::uint64_t round, const std::string& details) {
    if (!r.pass) return;
    r.pass = false;
    r.first_violation_round = round;
    r.details = details;
}

void InvariantChecker::on_epoch_start(std::int64_t, const EpochParams& params, std::uint64_t) {
    params_ = params;
    have_phase1_snapshot_ = false;
    phase1_max_phi_ = 0.0;
}

void InvariantChecker::on_phase_start(std::int64_t phase, std::span<const double> phi) {
    cur_phase_ = phase;
    phase_alarmed_ = false;
    double sum = 0.0;
    for (double v : phi) sum += v;
    phase_base_sum_ = sum;
    if (phase == 1) {
        const double expected = static_cast<double>(ell_ * (n_ - ell_));
        if (sum != expected) {
            fail(epoch_start_, 0,
                 "epoch k=" + std::to_string(params_.k) + " starts with total " +
                     std::to_string(sum) + " != " + std::to_string(expected));
        }
    }
}

void InvariantChecker::check_bounds(std::uint64_t round, std::span<const double> phi) {
    const double hi = static_cast<double>(ell_) + kPotentialTol;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!(phi[i] >= -kPotentialTol && phi[i] <= hi)) {
            fail(bounds_, round,
                 "phi[" + std::to_string(i) + "] = " + std::to_string(phi[i]) + " at round " +
                     std::to_string(round));
            return;
        }
    }
}

void InvariantChecker::on_averaging_round(std::uint64_t round, std::span<const double> phi,
                                          std::span<const Status>) {
    check_bounds(round, phi);
    if (!phase_alarmed_) {
        double sum = 0.0;
        for (double v : phi) sum += v;
        const double tol = kConservationRelTol * std::abs(phase_base_sum_);
        if (!(std::abs(sum - phase_base_sum_) <= tol)) {
            fail(conservation_, round,
                 "k=" + std::to_string(params_.k) + " phase " + std::to_string(cur_phase_) +
                     ": total drifted from " + std::to_string(phase_base_sum_) + " to " +
                     std::to_string(sum));
        }
    }
}

void InvariantChecker::on_alarm(std::uint64_t, int, AlarmKind) { phase_alarmed_ = true; }

void InvariantChecker::on_phase1_potentials(std::span<const double> phi) {
    have_phase1_snapshot_ = true;
    phase1_max_phi_ = 0.0;
    for (double v : phi) phase1_max_phi_ = std::max(phase1_max_phi_, v);
}

void InvariantChecker::on_epoch_end(const EpochSummary& ep) {
    const double power = std::pow(static_cast<double>(ep.k), 1.0 + epsilon_);
    const double nd = static_cast<double>(n_);
    const double base = static_cast<double>(ep.k - ell_);
    const double margin = std::pow(static_cast<double>(ep.k), -params_.gamma);

    // rho regions, epochs that completed probing only
    if (ep.completed_probing) {
        const double lo = base * (1.0 - margin);
        const double hi = base * (1.0 + margin);
        for (double rho : ep.rho_black) {
            bool ok = true;
            std::string why;
            if (ep.k == n_) {
                ok = rho >= lo && rho <= hi;
                why = "k=n band";
            } else if (ep.k > n_) {
                ok = rho < lo;
                why = "k>n upper";
            } else if (nd <= power) {
                ok = rho > hi;
                why = "k<n<=k^(1+eps) lower";
            } else {
                ok = false;
                why = "probing completed in an alarm-regime epoch";
            }
            if (!ok) {
                fail(rho_, ep.first_round + ep.rounds - 1,
                     "k=" + std::to_string(ep.k) + " rho=" + std::to_string(rho) + " violates " +
                         why);
            }
        }
    }

    // threshold alarms at the end of phase 1
    if (have_phase1_snapshot_) {
        if (power < nd && !(phase1_max_phi_ > params_.tau)) {
            fail(alarm_threshold_, ep.first_round + params_.r - 1,
                 "k=" + std::to_string(ep.k) + ": no potential above tau despite k^(1+eps) < n");
        }
        if (ep.k >= n_ && phase1_max_phi_ > params_.tau) {
            fail(alarm_threshold_, ep.first_round + params_.r - 1,
                 "k=" + std::to_string(ep.k) + ": potential " + std::to_string(phase1_max_phi_) +
                     " above tau despite k >= n");
        }
    }

    // containment: all low within ceil(k^(1+eps)) rounds of phase 2
    if (power < nd && params_.p >= 2) {
        const std::uint64_t deadline = ep.first_round + static_cast<std::uint64_t>(params_.r) - 1 +
                                       static_cast<std::uint64_t>(std::ceil(power));
        if (ep.all_low_round == 0 || ep.all_low_round > deadline) {
            fail(alarm_containment_, deadline,
                 "k=" + std::to_string(ep.k) + ": all-low at " +
                     std::to_string(ep.all_low_round) + " after deadline " +
                     std::to_string(deadline));
        }
    }
}

std::vector<CheckResult> InvariantChecker::results() const {
    return {conservation_, epoch_start_, bounds_, rho_, alarm_threshold_, alarm_containment_};
}

bool InvariantChecker::all_pass() const {
    for (const auto& r : results()) {
        if (!r.pass) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// stored traces

namespace {

const char* alarm_kind_name(AlarmKind k) {
    switch (k) {
        case AlarmKind::degree: return "alarm_degree";
        case AlarmKind::received: return "alarm_received";
        case AlarmKind::threshold: return "alarm_threshold";
    }
    return "?";
}

Status status_from_string(const std::string& s) {
    if (s == "probing") return Status::probing;
    if (s == "low") return Status::low;
    if (s == "high") return Status::high;
    if (s == "done") return Status::done;
    throw std::invalid_argument("bad status: " + s);
}

}  // namespace

void write_trace(std::ostream& os, const RunTrace& trace) {
    nlohmann::json head;
    head["type"] = "config";
    head["n"] = trace.n;
    head["ell"] = trace.ell;
    head["epsilon"] = trace.epsilon;
    if (!trace.config_json.empty()) head["config"] = nlohmann::json::parse(trace.config_json);
    os << head.dump() << '\n';
    for (const auto& rec : trace.rounds) {
        nlohmann::json j;
        j["type"] = rec.phase >= 1 ? "round" : "dissemination";
        j["round"] = rec.round;
        j["k"] = rec.k;
        j["phase"] = rec.phase;
        j["phi"] = rec.phi;
        auto& st = j["status"] = nlohmann::json::array();
        for (Status s : rec.status) st.push_back(to_string(s));
        if (!rec.rho.empty()) j["rho"] = rec.rho;
        if (!rec.events.empty()) {
            auto& ev = j["events"] = nlohmann::json::array();
            for (const auto& e : rec.events) ev.push_back({{"kind", e.kind}, {"node", e.node}});
        }
        os << j.dump() << '\n';
    }
}

RunTrace read_trace(std::istream& is) {
    RunTrace trace;
    std::string line;
    bool have_config = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "config") {
            trace.n = j.at("n").get<int>();
            trace.ell = j.at("ell").get<std::int64_t>();
            trace.epsilon = j.at("epsilon").get<double>();
            if (j.contains("config")) trace.config_json = j.at("config").dump();
            have_config = true;
            continue;
        }
        if (type != "round" && type != "dissemination") continue;
        RoundRecord rec;
        rec.round = j.at("round").get<std::uint64_t>();
        rec.k = j.at("k").get<std::int64_t>();
        rec.phase = j.at("phase").get<std::int64_t>();
        rec.phi = j.at("phi").get<std::vector<double>>();
        for (const auto& s : j.at("status")) rec.status.push_back(status_from_string(s.get<std::string>()));
        if (j.contains("rho")) rec.rho = j.at("rho").get<std::vector<double>>();
        if (j.contains("events")) {
            for (const auto& e : j.at("events")) {
                rec.events.push_back(TraceEvent{e.at("kind").get<std::string>(), e.at("node").get<int>()});
            }
        }
        trace.rounds.push_back(std::move(rec));
    }
    if (!have_config) throw std::invalid_argument("trace has no config line");
    return trace;
}

CheckResult check_conservation(const RunTrace& trace) {
    CheckResult out{"conservation"};
    double base = 0.0;
    bool have_base = false;
    bool alarmed = false;
    std::int64_t cur_k = -1;
    std::int64_t cur_phase = -1;
    const double expected_start = static_cast<double>(trace.ell * (trace.n - trace.ell));

    for (const auto& rec : trace.rounds) {
        if (rec.phase < 1) continue;  // dissemination: potentials frozen
        double sum = 0.0;
        for (double v : rec.phi) sum += v;
        const bool new_phase = rec.k != cur_k || rec.phase != cur_phase;
        if (new_phase) {
            // a phase's first record is post-round; its baseline is the
            // phase-start total: epoch starts are pinned exactly, later
            // phases inherit the consume result via the previous record
            cur_k = rec.k;
            cur_phase = rec.phase;
            alarmed = false;
            if (rec.phase == 1) {
                base = expected_start;
                have_base = true;
            } else {
                have_base = false;  // consume intervened; re-baseline here
                base = sum;
            }
        }
        for (const auto& e : rec.events) {
            if (e.kind.rfind("alarm", 0) == 0) alarmed = true;
        }
        if (alarmed) continue;
        if (!have_base) {
            base = sum;
            have_base = true;
            continue;
        }
        const double tol = kConservationRelTol * std::abs(base);
        if (!(std::abs(sum - base) <= tol)) {
            out.pass = false;
            out.first_violation_round = rec.round;
            out.details = "k=" + std::to_string(rec.k) + " phase " + std::to_string(rec.phase) +
                          ": total " + std::to_string(sum) + " vs " + std::to_string(base);
            return out;
        }
    }
    return out;
}

CheckResult check_potential_bounds(const RunTrace& trace) {
    CheckResult out{"potential_bounds"};
    const double hi = static_cast<double>(trace.ell) + kPotentialTol;
    for (const auto& rec : trace.rounds) {
        for (std::size_t i = 0; i < rec.phi.size(); ++i) {
            if (!(rec.phi[i] >= -kPotentialTol && rec.phi[i] <= hi)) {
                out.pass = false;
                out.first_violation_round = rec.round;
                out.details =
                    "phi[" + std::to_string(i) + "] = " + std::to_string(rec.phi[i]);
                return out;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// trace recorder

TraceRecorder::TraceRecorder(int n, std::int64_t ell, double epsilon) {
    trace_.n = n;
    trace_.ell = ell;
    trace_.epsilon = epsilon;
    rho_now_.assign(n, 0.0);
}

void TraceRecorder::on_epoch_start(std::int64_t k, const EpochParams&, std::uint64_t) {
    cur_k_ = k;
    std::fill(rho_now_.begin(), rho_now_.end(), 0.0);
}

void TraceRecorder::on_phase_start(std::int64_t phase, std::span<const double>) {
    cur_phase_ = phase;
}

void TraceRecorder::on_averaging_round(std::uint64_t round, std::span<const double> phi,
                                       std::span<const Status> st) {
    RoundRecord rec;
    rec.round = round;
    rec.k = cur_k_;
    rec.phase = cur_phase_;
    rec.phi.assign(phi.begin(), phi.end());
    rec.status.assign(st.begin(), st.end());
    rec.rho = rho_now_;
    rec.events = std::move(pending_events_);
    pending_events_.clear();
    trace_.rounds.push_back(std::move(rec));
}

void TraceRecorder::on_alarm(std::uint64_t, int node, AlarmKind kind) {
    pending_events_.push_back(TraceEvent{alarm_kind_name(kind), node});
}

void TraceRecorder::on_consume(std::int64_t, std::span<const double> rho) {
    rho_now_.assign(rho.begin(), rho.end());
    pending_events_.push_back(TraceEvent{"consume", -1});
}

void TraceRecorder::on_dissemination_round(std::uint64_t round, std::span<const Status> st) {
    RoundRecord rec;
    rec.round = round;
    rec.k = cur_k_;
    rec.phase = 0;
    rec.phi.assign(st.size(), 0.0);
    rec.status.assign(st.begin(), st.end());
    rec.rho = rho_now_;
    rec.events = std::move(pending_events_);
    pending_events_.clear();
    trace_.rounds.push_back(std::move(rec));
}

void TraceRecorder::on_stop(std::uint64_t, std::int64_t) {
    if (!trace_.rounds.empty()) {
        trace_.rounds.back().events.push_back(TraceEvent{"stop", -1});
    }
}

RunTrace TraceRecorder::take() { return std::move(trace_); }

// ---------------------------------------------------------------------------
// digest

void Fnv1a::update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h_ ^= p[i];
        h_ *= 0x100000001b3ULL;
    }
}

void DigestObserver::on_run_start(const WorldConfig& cfg, const EpochParams&) {
    h_.update_pod(cfg.n);
    h_.update_pod(cfg.ell);
    h_.update_pod(cfg.epsilon);
    h_.update_pod(cfg.mode.paper);
    h_.update_pod(cfg.mode.s_p);
    h_.update_pod(cfg.mode.s_r);
    h_.update_pod(cfg.adversary.kind);
    h_.update_pod(cfg.adversary.seed);
    for (Role r : cfg.roles) h_.update_pod(r);
}

void DigestObserver::on_alarm(std::uint64_t round, int node, AlarmKind kind) {
    h_.update_pod(round);
    h_.update_pod(node);
    h_.update_pod(kind);
}

void DigestObserver::on_epoch_end(const EpochSummary& ep) {
    h_.update_pod(ep.k);
    h_.update_pod(ep.first_round);
    h_.update_pod(ep.rounds);
    h_.update_pod(ep.classify_outcome);
    h_.update_pod(ep.all_low_round);
    for (double rho : ep.rho_black) h_.update_pod(rho);
}

void DigestObserver::on_stop(std::uint64_t round, std::int64_t count) {
    h_.update_pod(round);
    h_.update_pod(count);
}

// ---------------------------------------------------------------------------
// reference world + color histories

ReferenceWorld::ReferenceWorld(const ProtocolConfig& pc, int n, const AdversarySpec& adversary,
                               const std::vector<Role>& roles)
    : pc_(pc), n_(n), source_(adversary, n), roles_(roles) {
    if (static_cast<int>(roles.size()) != n) throw std::invalid_argument("roles size mismatch");
    for (int i = 0; i < n; ++i) nodes_.push_back(make_node(pc, roles[i] == Role::black));
    inboxes_.resize(n);
    topo_.reset(n);
    if (source_.is_static()) source_.materialize(1, topo_);
}

bool ReferenceWorld::all_stopped() const {
    for (const auto& s : nodes_) {
        if (s.segment != Segment::stopped) return false;
    }
    return true;
}

void ReferenceWorld::step() {
    round_++;
    if (!source_.is_static()) {
        AdaptiveView view;
        view.round = round_;
        view.n = n_;
        source_.materialize(round_, topo_, &view);
    }
    std::vector<MmcMessage> messages(n_);
    for (int i = 0; i < n_; ++i) messages[i] = node_message(nodes_[i]);
    for (int i = 0; i < n_; ++i) {
        auto& box = inboxes_[i];
        box.clear();
        const int* nb = topo_.neighbors(i);
        for (int j = 0; j < topo_.deg[i]; ++j) box.push_back(messages[nb[j]]);
        std::sort(box.begin(), box.end());
    }
    for (int i = 0; i < n_; ++i) {
        node_advance(pc_, nodes_[i], std::span<const MmcMessage>(inboxes_[i]));
    }
}

std::uint64_t ReferenceWorld::color_fingerprint(Role color) const {
    std::vector<std::uint64_t> per_node;
    for (int i = 0; i < n_; ++i) {
        if (roles_[i] != color) continue;
        Fnv1a h;
        const NodeState& s = nodes_[i];
        h.update_pod(s.black);
        h.update_pod(s.phi);
        h.update_pod(s.rho);
        h.update_pod(s.status);
        h.update_pod(s.black_flag);
        h.update_pod(s.est.k);
        h.update_pod(s.est.min);
        h.update_pod(s.est.max);
        h.update_pod(s.segment);
        h.update_pod(s.phase);
        h.update_pod(s.round_in_phase);
        h.update_pod(s.dissem_round);
        for (const auto& m : inboxes_[i]) {
            h.update_pod(m.phi);
            h.update_pod(m.status);
            h.update_pod(m.black_flag);
        }
        h.update_pod(inboxes_[i].size());
        per_node.push_back(h.value());
    }
    std::sort(per_node.begin(), per_node.end());
    per_node.erase(std::unique(per_node.begin(), per_node.end()), per_node.end());
    Fnv1a h;
    h.update_pod(per_node.size());
    for (std::uint64_t v : per_node) h.update_pod(v);
    return h.value();
}

ColorHistory record_color_history(const ProtocolConfig& pc, const Topology& fixture,
                                  std::uint64_t rounds) {
    if (fixture.roles.empty()) throw std::invalid_argument("fixture needs roles");
    ReferenceWorld world(pc, fixture.n, AdversarySpec::fixed_spec(fixture), fixture.roles);
    ColorHistory hist;
    hist.black.reserve(rounds);
    hist.white.reserve(rounds);
    for (std::uint64_t t = 0; t < rounds && !world.all_stopped(); ++t) {
        world.step();
        hist.black.push_back(world.color_fingerprint(Role::black));
        hist.white.push_back(world.color_fingerprint(Role::white));
    }
    return hist;
}

HistoryComparison compare_color_histories(const ColorHistory& a, const ColorHistory& b,
                                          std::uint64_t rounds) {
    HistoryComparison out;
    const std::uint64_t t =
        std::min<std::uint64_t>(rounds, std::min(a.black.size(), b.black.size()));
    for (std::uint64_t i = 0; i < t; ++i) {
        if (a.black[i] != b.black[i] || a.white[i] != b.white[i]) {
            out.equal = false;
            out.divergence_round = i + 1;
            return out;
        }
    }
    if (a.black.size() != b.black.size() &&
        (a.black.size() < rounds || b.black.size() < rounds)) {
        out.equal = false;
        out.divergence_round = t + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// dynamic-graph diagnostics

namespace {

// eccentricities by BFS; returns the diameter
int diameter_of(const Topology& t) {
    std::vector<std::vector<int>> adj(t.n);
    for (auto [u, v] : t.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    int diameter = 0;
    std::vector<int> dist(t.n);
    std::vector<int> queue(t.n);
    for (int s = 0; s < t.n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        int head = 0;
        int tail = 0;
        dist[s] = 0;
        queue[tail++] = s;
        while (head < tail) {
            const int u = queue[head++];
            for (int w : adj[u]) {
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    queue[tail++] = w;
                }
            }
        }
        for (int d : dist) {
            if (d < 0) throw std::invalid_argument("disconnected topology in metrics");
            diameter = std::max(diameter, d);
        }
    }
    return diameter;
}

}  // namespace

Diagnostics compute_dynamic_metrics(const std::vector<Topology>& rounds) {
    if (rounds.empty()) throw std::invalid_argument("metrics need at least one round");
    Diagnostics out;
    for (const auto& t : rounds) {
        t.validate();
        for (int d : t.degrees()) out.d_max = std::max(out.d_max, d);
        out.diameter_per_round.push_back(diameter_of(t));
    }
    // chronopath: flood one hop per round along the evolving edges
    const int n = rounds.front().n;
    out.chronopath = 0;
    for (int s = 0; s < n; ++s) {
        std::vector<char> reached(n, 0);
        reached[s] = 1;
        int have = 1;
        std::int64_t t_done = 0;
        for (std::size_t t = 0; t < rounds.size() && have < n; ++t) {
            std::vector<char> next = reached;
            for (auto [u, v] : rounds[t].edges) {
                if (reached[u]) next[v] = 1;
                if (reached[v]) next[u] = 1;
            }
            have = 0;
            for (char c : next) have += c;
            reached.swap(next);
            t_done = static_cast<std::int64_t>(t) + 1;
        }
        if (have < n) {
            out.chronopath = -1;  // sequence too short for a full flood
            return out;
        }
        out.chronopath = std::max(out.chronopath, t_done);
    }
    return out;
}

std::vector<double> slack_snapshot(std::span<const double> phi, std::int64_t ell) {
    std::vector<double> out;
    out.reserve(phi.size());
    for (double v : phi) out.push_back(static_cast<double>(ell) - v);
    return out;
}

}  // namespace adn
