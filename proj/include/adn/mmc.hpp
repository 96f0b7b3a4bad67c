#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adn/params.hpp"

namespace adn {

enum class Status : std::uint8_t { probing = 0, low = 1, high = 2, done = 3 };

const char* to_string(Status s);

// Wire message. Averaging rounds carry ⟨phi, status⟩, dissemination and
// synchronization rounds carry ⟨status⟩ (phi fixed to 0). black_flag is
// only meaningful for MMCT.
struct MmcMessage {
    double phi = 0.0;
    Status status = Status::probing;
    bool black_flag = false;

    // canonical multiset order
    friend bool operator<(const MmcMessage& a, const MmcMessage& b) {
        if (a.phi != b.phi) return a.phi < b.phi;
        if (a.status != b.status) return a.status < b.status;
        return a.black_flag < b.black_flag;
    }
    friend bool operator==(const MmcMessage& a, const MmcMessage& b) {
        return a.phi == b.phi && a.status == b.status && a.black_flag == b.black_flag;
    }
};

// Lazy potential step: phi + sum(inbox)/d - |inbox|*phi/d, evaluated as
// phi + (S - m*phi)/d with S the ascending-order sum. The grouping keeps
// averaging over an all-equal inbox a bit-exact fixpoint. Caller handles
// the alarm path (|inbox| > d-1).
double potential_update(double phi, std::span<const double> inbox_phis, std::int64_t d);

// Epoch-end accumulator classification; band edges inclusive for done.
Status classify_rho(double rho, std::int64_t k, std::int64_t ell, double gamma);

// Where a node is inside its epoch.
enum class Segment : std::uint8_t {
    averaging,      // phase/round loops
    dissemination,  // d status-flood rounds
    idle,           // MMCT only: synchronization padding until round_max
    stopped,        // MMC only: done epoch finished
};

// Everything one node carries. `black` is the node's actual role;
// params/ell always reflect the configured parameter ell (MMC) or ell'
// (MMCT), which the actual black count may differ from.
struct NodeState {
    bool black = false;
    bool black_flag = false;  // MMCT: existence-of-black bit
    double phi = 0.0;
    double rho = 0.0;
    Status status = Status::probing;
    EstimateState est;
    EpochParams params;
    Segment segment = Segment::averaging;
    std::int64_t phase = 1;
    std::int64_t round_in_phase = 1;
    std::int64_t dissem_round = 1;
    std::uint64_t rounds_executed = 0;
    bool frozen = false;  // MMCT: estimate range collapsed; idles to round_max
};

// Static knobs shared by every node of one run.
struct ProtocolConfig {
    std::int64_t ell_param = 1;
    double epsilon = 0.5;
    ParamMode mode = ParamMode::paper_mode();
    bool mmct = false;
    std::int64_t cap_K = 0;            // MMCT: exit estimates above this
    std::uint64_t round_max = 0;       // MMCT: synchronization horizon
    bool strict_dissemination = true;  // abort on conflicting non-probing statuses
};

NodeState make_node(const ProtocolConfig& cfg, bool black);

// Message this node broadcasts in its current round.
MmcMessage node_message(const NodeState& s);

// One full communication round for one node: receive `inbox` (any order;
// canonicalized internally), apply the round body, and cross any
// phase/epoch boundary this round completes. Reference implementation for
// the batch engines; also drives the MMCT world.
void node_advance(const ProtocolConfig& cfg, NodeState& s, std::span<const MmcMessage> inbox);

// Spec-level operation: one round as (state, inbox) -> (state', message).
std::pair<NodeState, MmcMessage> mmc_round(const ProtocolConfig& cfg, const NodeState& s,
                                           std::span<const MmcMessage> inbox);

// MMCT return value ⟨count, b⟩ once rounds_executed == round_max.
struct MmctReturn {
    std::int64_t count = 0;
    bool black_flag = false;

    friend bool operator==(const MmctReturn&, const MmctReturn&) = default;
};
MmctReturn mmct_result(const NodeState& s);

// When every node of a world holds status=low, the rest of the epoch is a
// state identity; this applies the epoch boundary directly and returns how
// many communication rounds were covered. Equivalent to that many
// node_advance calls (property-tested).
std::uint64_t node_skip_low_epoch_tail(const ProtocolConfig& cfg, NodeState& s);

}  // namespace adn
