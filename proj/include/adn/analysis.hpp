#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adn/engine.hpp"
#include "adn/mmc.hpp"
#include "adn/topology.hpp"

namespace adn {

// ---------------------------------------------------------------------------
// check reports

struct CheckResult {
    std::string check;
    bool pass = true;
    std::uint64_t first_violation_round = 0;  // 0 = none
    std::string details;

    CheckResult() = default;
    explicit CheckResult(std::string name) : check(std::move(name)) {}
};

inline constexpr double kConservationRelTol = 1e-9;
inline constexpr double kPotentialTol = 1e-12;

// ---------------------------------------------------------------------------
// streaming invariant checker (attachable to run_mmc as its observer)
//
// Verifies, over one run:
//   conservation       sum(phi) constant over every alarm-free phase prefix
//                      (relative 1e-9) and epoch-start totals exactly
//                      ell*(n-ell)
//   potential_bounds   -1e-12 <= phi <= ell+1e-12 at every node and round
//   rho_classification black rho falls in the region the k-vs-n relation
//                      predicts, for every epoch that completes probing
//   alarm_threshold    k^(1+eps) < n epochs raise a potential above tau at
//                      the end of phase 1; k >= n epochs never do
//   alarm_containment  k^(1+eps) < n epochs reach all-low within
//                      ceil(k^(1+eps)) rounds of phase 2
class InvariantChecker {
  public:
    static constexpr bool needs_every_round = false;

    InvariantChecker(int n, std::int64_t ell, double epsilon);

    void on_run_start(const WorldConfig&, const EpochParams&) {}
    void on_epoch_start(std::int64_t k, const EpochParams& params, std::uint64_t first_round);
    void on_phase_start(std::int64_t phase, std::span<const double> phi);
    void on_averaging_round(std::uint64_t round, std::span<const double> phi,
                            std::span<const Status> st);
    void on_alarm(std::uint64_t round, int node, AlarmKind kind);
    void on_phase1_potentials(std::span<const double> phi);
    void on_consume(std::int64_t, std::span<const double>) {}
    void on_dissemination_round(std::uint64_t, std::span<const Status>) {}
    void on_skip(std::uint64_t, std::uint64_t) {}
    void on_epoch_end(const EpochSummary& ep);
    void on_stop(std::uint64_t, std::int64_t) {}

    // One entry per check family, in a fixed order.
    std::vector<CheckResult> results() const;
    bool all_pass() const;

  private:
    void fail(CheckResult& r, std::uint64_t round, const std::string& details);
    void check_bounds(std::uint64_t round, std::span<const double> phi);

    int n_;
    std::int64_t ell_;
    double epsilon_;

    EpochParams params_;
    double phase_base_sum_ = 0.0;
    bool phase_alarmed_ = false;
    std::int64_t cur_phase_ = 0;
    double phase1_max_phi_ = 0.0;
    bool have_phase1_snapshot_ = false;

    CheckResult conservation_{"conservation"};
    CheckResult epoch_start_{"epoch_start_total"};
    CheckResult bounds_{"potential_bounds"};
    CheckResult rho_{"rho_classification"};
    CheckResult alarm_threshold_{"alarm_threshold"};
    CheckResult alarm_containment_{"alarm_containment"};
};

// ---------------------------------------------------------------------------
// stored traces (JSONL; one round per line, gated by verbosity)

struct TraceEvent {
    std::string kind;  // alarm_degree | alarm_received | alarm_threshold |
                       // consume | status_change | stop | skip
    int node = -1;
};

struct RoundRecord {
    std::uint64_t round = 0;
    std::int64_t k = 0;
    std::int64_t phase = 0;  // 0 during dissemination
    std::vector<double> phi;
    std::vector<Status> status;
    std::vector<double> rho;
    std::vector<TraceEvent> events;
};

struct RunTrace {
    std::string config_json;  // config echo, opaque here
    int n = 0;
    std::int64_t ell = 0;
    double epsilon = 0.5;
    std::vector<RoundRecord> rounds;
};

void write_trace(std::ostream& os, const RunTrace& trace);
RunTrace read_trace(std::istream& is);

// Post-hoc checkers over stored traces (cli verify).
CheckResult check_conservation(const RunTrace& trace);
CheckResult check_potential_bounds(const RunTrace& trace);

// Full-verbosity trace recorder (forces every round to materialize).
class TraceRecorder {
  public:
    static constexpr bool needs_every_round = true;

    TraceRecorder(int n, std::int64_t ell, double epsilon);

    void on_run_start(const WorldConfig&, const EpochParams&) {}
    void on_epoch_start(std::int64_t k, const EpochParams&, std::uint64_t);
    void on_phase_start(std::int64_t phase, std::span<const double>);
    void on_averaging_round(std::uint64_t round, std::span<const double> phi,
                            std::span<const Status> st);
    void on_alarm(std::uint64_t round, int node, AlarmKind kind);
    void on_phase1_potentials(std::span<const double>) {}
    void on_consume(std::int64_t, std::span<const double> rho);
    void on_dissemination_round(std::uint64_t round, std::span<const Status> st);
    void on_skip(std::uint64_t, std::uint64_t) {}
    void on_epoch_end(const EpochSummary&) {}
    void on_stop(std::uint64_t round, std::int64_t count);

    RunTrace take();

  private:
    RunTrace trace_;
    std::vector<double> rho_now_;
    std::int64_t cur_k_ = 0;
    std::int64_t cur_phase_ = 0;
    std::vector<TraceEvent> pending_events_;
};

// ---------------------------------------------------------------------------
// run digest (criterion: identical config+seed => identical digest)

class Fnv1a {
  public:
    void update(const void* data, std::size_t len);
    template <class T>
    void update_pod(const T& v) {
        update(&v, sizeof(T));
    }
    std::uint64_t value() const { return h_; }

  private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

// Digest over the summary-level trace: epoch records, alarm events and the
// final output. Stable under the state-identity skip paths.
class DigestObserver {
  public:
    static constexpr bool needs_every_round = false;

    void on_run_start(const WorldConfig& cfg, const EpochParams&);
    void on_epoch_start(std::int64_t, const EpochParams&, std::uint64_t) {}
    void on_phase_start(std::int64_t, std::span<const double>) {}
    void on_averaging_round(std::uint64_t, std::span<const double>, std::span<const Status>) {}
    void on_alarm(std::uint64_t round, int node, AlarmKind kind);
    void on_phase1_potentials(std::span<const double>) {}
    void on_consume(std::int64_t, std::span<const double>) {}
    void on_dissemination_round(std::uint64_t, std::span<const Status>) {}
    void on_skip(std::uint64_t, std::uint64_t) {}
    void on_epoch_end(const EpochSummary& ep);
    void on_stop(std::uint64_t round, std::int64_t count);

    std::uint64_t digest() const { return h_.value(); }

  private:
    Fnv1a h_;
};

// ---------------------------------------------------------------------------
// per-color history comparison (the Lemma-1 style fixture check)

// Node-automaton world driven one communication round at a time; reference
// implementation used for history recording and for cross-checking the
// batch engine.
class ReferenceWorld {
  public:
    ReferenceWorld(const ProtocolConfig& pc, int n, const AdversarySpec& adversary,
                   const std::vector<Role>& roles);

    void step();  // one communication round (delivers, advances every node)
    const std::vector<NodeState>& nodes() const { return nodes_; }
    const std::vector<std::vector<MmcMessage>>& last_inboxes() const { return inboxes_; }
    bool all_stopped() const;
    std::uint64_t round() const { return round_; }

    // canonical per-color (state, inbox) fingerprint of the current round
    std::uint64_t color_fingerprint(Role color) const;

  private:
    ProtocolConfig pc_;
    int n_;
    TopologySource source_;
    RoundTopology topo_;
    std::vector<NodeState> nodes_;
    std::vector<Role> roles_;
    std::vector<std::vector<MmcMessage>> inboxes_;
    std::uint64_t round_ = 0;
};

struct ColorHistory {
    std::vector<std::uint64_t> black;  // per-round fingerprints
    std::vector<std::uint64_t> white;
};

ColorHistory record_color_history(const ProtocolConfig& pc, const Topology& fixture,
                                  std::uint64_t rounds);

struct HistoryComparison {
    bool equal = true;
    std::uint64_t divergence_round = 0;  // first differing round (1-based)
};

HistoryComparison compare_color_histories(const ColorHistory& a, const ColorHistory& b,
                                          std::uint64_t rounds);

// ---------------------------------------------------------------------------
// dynamic-graph diagnostics

struct Diagnostics {
    int d_max = 0;
    std::vector<int> diameter_per_round;
    // rounds a flooded message needs between the worst pair; -1 when the
    // sequence is too short to complete the flood
    std::int64_t chronopath = 0;
};

Diagnostics compute_dynamic_metrics(const std::vector<Topology>& rounds);

// per-node ell - phi ("room" left for potential)
std::vector<double> slack_snapshot(std::span<const double> phi, std::int64_t ell);

}  // namespace adn
