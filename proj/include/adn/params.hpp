#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace adn {

// Estimate range uses this sentinel for "no upper bound yet"; serialized
// as the literal string "inf".
inline constexpr std::int64_t kNoUpperBound = std::numeric_limits<std::int64_t>::max();

// Parameter mode. Scaled mode shrinks only p and r (floor, minimum 1) and
// carries no correctness guarantee; everything else is identical.
struct ParamMode {
    bool paper = true;
    double s_p = 1.0;
    double s_r = 1.0;

    static ParamMode paper_mode() { return ParamMode{}; }
    static ParamMode scaled(double sp, double sr) { return ParamMode{false, sp, sr}; }
};

// All per-epoch constants for one size estimate k.
//
// d = ceil(k^(1+eps)); the exponents are fixed as
//   gamma = log_k d, alpha = 1 + gamma + log_k 3,
//   delta = 2*gamma + 0.05, beta = log_k(d*(2k^delta + 1)),
// which satisfy the four derivation conditions for every valid input
// (asserted in derive_epoch_params). tau = ell*(1 - ell/k^(1+eps)) uses the
// raw real power, not the rounded d.
struct EpochParams {
    std::int64_t k = 0;
    std::int64_t ell = 0;
    double epsilon = 0.0;
    std::int64_t d = 0;
    std::int64_t p = 0;   // phases per epoch
    std::int64_t r = 0;   // averaging rounds per phase
    double tau = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;

    std::int64_t epoch_rounds() const { return p * r + d; }
};

struct EstimateState {
    std::int64_t k = 0;
    std::int64_t min = 0;
    std::int64_t max = kNoUpperBound;

    static EstimateState initial(std::int64_t ell) {
        return EstimateState{ell + 1, ell + 1, kNoUpperBound};
    }
    bool operator==(const EstimateState&) const = default;
};

enum class EstimateOutcome { low, high };

// Round schedule of one complete search for n:
//   E — the doubling estimates;
//   B — the costliest binary-search descent of the top doubling range
//       (always branching into the larger half), empty when doubling lands
//       exactly on n;
//   per_epoch_rounds — k -> p(k)*r(k) + d(k);
//   total_bound — their sum, an upper bound on any run's total rounds.
struct Schedule {
    std::vector<std::int64_t> E;
    std::vector<std::int64_t> B;
    std::map<std::int64_t, std::int64_t> per_epoch_rounds;
    std::int64_t total_bound = 0;
};

EpochParams derive_epoch_params(std::int64_t k, std::int64_t ell, double epsilon,
                                const ParamMode& mode = ParamMode::paper_mode());

// Epoch-end estimate update. Throws std::runtime_error when the resulting
// range becomes empty (min > max), which cannot happen in a correct run.
EstimateState update_estimate(EstimateOutcome outcome, const EstimateState& s);

Schedule worst_case_schedule(std::int64_t n, std::int64_t ell, double epsilon,
                             const ParamMode& mode = ParamMode::paper_mode());

// Synchronization horizon for MMCT with estimate cap K (a power of two):
// the schedule for surrogate size K with the binary-search descent forced
// on, so any thread execution fits no matter the true n.
std::int64_t mmct_round_max(std::int64_t K, std::int64_t ell_prime, double epsilon,
                            const ParamMode& mode = ParamMode::paper_mode());

}  // namespace adn
