#pragma once

#include <cstdint>
#include <vector>

#include "adn/adversary.hpp"
#include "adn/mmc.hpp"
#include "adn/params.hpp"

namespace adn {

// Smallest power of two strictly greater than 12/zeta.
std::int64_t initial_K(double zeta);

// f(K) = ceil(64 * ln(K/zeta) / ln(e/(e-2))).
std::int64_t thread_count(std::int64_t K, double zeta);

// 1/g(K) with g(K) = K/2.
double black_probability(std::int64_t K);

// One MMCT execution: MMC with parameter ell' and estimate cap K, a
// black-existence flag flooded by OR, and idle padding so every node
// executes exactly round_max communication rounds.
struct MmctConfig {
    int n = 0;
    std::int64_t K = 0;
    std::int64_t ell_prime = 1;
    double epsilon = 0.5;
    ParamMode mode = ParamMode::paper_mode();
    AdversarySpec adversary;
    std::vector<Role> roles;         // actual black placement
    std::uint64_t round_max = 0;     // 0: computed from (K, ell', epsilon, mode)
    // Simulation shortcuts (bit-transparent; disabled automatically for
    // adaptive adversaries, and by hand in the bit-exactness tests):
    bool allow_epoch_skip = true;    // all-low epoch tails
    bool allow_fast_forward = true;  // idle tail once every node is post-loop
};

struct MmctRunResult {
    std::vector<MmctReturn> returns;   // per node
    std::uint64_t rounds_executed = 0; // always round_max
    std::uint64_t round_max = 0;
};

MmctRunResult run_mmct(const MmctConfig& cfg);

struct LlmcConfig {
    int n = 0;
    double zeta = 0.5;
    double epsilon = 0.5;
    ParamMode mode = ParamMode::paper_mode();
    AdversarySpec adversary;
    std::uint64_t seed = 0;
    int iterations = 0;           // harness cap; LLMC never self-terminates
    std::int64_t cap_K = 0;       // optional: also stop once K would exceed this
    bool zero_black_shortcut = true;
    bool allow_epoch_skip = true;
    bool allow_fast_forward = true;
};

struct LlmcIterationInfo {
    std::int64_t K = 0;
    std::int64_t threads = 0;
    std::uint64_t round_max = 0;
    std::vector<int> blacks_per_thread;
    std::vector<std::int64_t> empty_threads;  // per node
    std::vector<std::int64_t> best_count;     // per node, max of CountSet (0 if empty)
    std::vector<std::int64_t> count_after;    // per node
};

struct LlmcResult {
    std::vector<std::int64_t> counts;  // final per node
    std::vector<LlmcIterationInfo> iterations;
    std::uint64_t total_rounds = 0;
};

// Iterations run at K = initial_K(zeta), 2*initial_K, ...; each iteration
// draws fresh per-(K, thread, node) black roles, runs f(K) MMCT lanes in
// lockstep over one shared topology sequence, and applies the per-node
// count update when CountSet is non-empty and EmptyThreads > f(K)/2.
class LlmcDriver {
  public:
    explicit LlmcDriver(const LlmcConfig& cfg);

    const std::vector<std::int64_t>& counts() const { return counts_; }
    std::int64_t current_K() const { return K_; }
    std::uint64_t total_rounds() const { return total_rounds_; }

    LlmcIterationInfo step();  // one iteration at current_K, then K doubles

  private:
    LlmcConfig cfg_;
    TopologySource source_;
    std::int64_t K_;
    std::vector<std::int64_t> counts_;
    std::uint64_t global_round_ = 0;
    std::uint64_t total_rounds_ = 0;
};

LlmcResult run_llmc(const LlmcConfig& cfg);

}  // namespace adn
