#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "adn/params.hpp"

using namespace adn;

// Frozen expected values come from tests/oracle/param_oracle.py (mpmath at
// 60 digits), evaluated independently of this implementation.

TEST_CASE("epoch parameters at k=2, ell=1, eps=1") {
    const EpochParams p = derive_epoch_params(2, 1, 1.0);
    CHECK(p.d == 4);
    CHECK(p.gamma == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(p.tau == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(p.alpha == doctest::Approx(4.5849625007211562).epsilon(1e-14));
    CHECK(p.delta == doctest::Approx(4.05).epsilon(1e-14));
    CHECK(p.beta == doctest::Approx(7.0929041535840692).epsilon(1e-13));
    CHECK(p.r == 630);
    CHECK(p.p == 22);
}

TEST_CASE("epoch parameters at k=2, ell=1, eps=0.5") {
    const EpochParams p = derive_epoch_params(2, 1, 0.5);
    CHECK(p.d == 3);
    CHECK(p.tau == doctest::Approx(0.64644660940672624).epsilon(1e-14));
    CHECK(p.r == 196);
    CHECK(p.p == 13);
}

TEST_CASE("epoch parameters at k=8, ell=2, eps=0.5") {
    const EpochParams p = derive_epoch_params(8, 2, 0.5);
    CHECK(p.d == 23);
    CHECK(p.r == 240336);
    CHECK(p.p == 147);
}

TEST_CASE("scaled mode shrinks only p and r") {
    const EpochParams paper = derive_epoch_params(2, 1, 1.0);
    const EpochParams scaled = derive_epoch_params(2, 1, 1.0, ParamMode::scaled(0.01, 0.01));
    CHECK(scaled.p == 1);
    CHECK(scaled.r == 6);
    CHECK(scaled.d == paper.d);
    CHECK(scaled.tau == paper.tau);
    CHECK(scaled.alpha == paper.alpha);
    CHECK(scaled.beta == paper.beta);
    CHECK(scaled.gamma == paper.gamma);
    CHECK(scaled.delta == paper.delta);
}

TEST_CASE("parameter preconditions") {
    CHECK_THROWS_AS(derive_epoch_params(2, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(derive_epoch_params(1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(derive_epoch_params(4, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(derive_epoch_params(4, 1, -0.5), std::invalid_argument);
}

TEST_CASE("derivation conditions hold over a k grid") {
    // the four Theorem-style inequalities are asserted inside
    // derive_epoch_params; this sweep makes sure no (k, ell, eps) trips them
    for (double eps : {0.1, 0.5, 1.0}) {
        for (std::int64_t k = 2; k <= 256; ++k) {
            CHECK_NOTHROW(derive_epoch_params(k, 1, eps));
        }
    }
    for (std::int64_t k = 2; k <= 64; ++k) {
        CHECK_NOTHROW(derive_epoch_params(k, 1, 2.0));
    }
    for (std::int64_t ell : {2, 5, 7}) {
        for (std::int64_t k = ell + 1; k <= 256; ++k) {
            CHECK_NOTHROW(derive_epoch_params(k, ell, 0.5));
        }
    }
    // beyond-int64 round counts are rejected, not wrapped
    CHECK_THROWS_AS(derive_epoch_params(256, 1, 2.0), std::overflow_error);
}

TEST_CASE("p, r, d monotone in k") {
    for (std::int64_t ell : {1, 2, 5}) {
        EpochParams prev = derive_epoch_params(ell + 1, ell, 0.5);
        for (std::int64_t k = ell + 2; k <= 256; ++k) {
            const EpochParams cur = derive_epoch_params(k, ell, 0.5);
            CHECK(cur.d >= prev.d);
            CHECK(cur.p >= prev.p);
            CHECK(cur.r >= prev.r);
            prev = cur;
        }
    }
}

TEST_CASE("estimate update: doubling and binary search") {
    EstimateState s{4, 3, kNoUpperBound};
    s = update_estimate(EstimateOutcome::low, s);
    CHECK(s == EstimateState{8, 5, kNoUpperBound});
    s = update_estimate(EstimateOutcome::high, s);
    CHECK(s == EstimateState{6, 5, 7});
    s = update_estimate(EstimateOutcome::low, s);
    CHECK(s == EstimateState{7, 7, 7});
}

TEST_CASE("estimate update flags an empty range") {
    // high at the very first estimate collapses the range
    const EstimateState s = EstimateState::initial(1);
    CHECK_THROWS_AS(update_estimate(EstimateOutcome::high, s), std::runtime_error);
}

TEST_CASE("worst-case schedule sets") {
    SUBCASE("n=8 ell=1: doubling lands exactly, no descent") {
        const Schedule s = worst_case_schedule(8, 1, 0.5);
        CHECK(s.E == std::vector<std::int64_t>{2, 4, 8});
        CHECK(s.B.empty());
        CHECK(s.total_bound == 70909066);
    }
    SUBCASE("n=2 ell=1: single estimate") {
        const Schedule s = worst_case_schedule(2, 1, 0.5);
        CHECK(s.E == std::vector<std::int64_t>{2});
        CHECK(s.B.empty());
        CHECK(s.total_bound == 2551);
    }
    SUBCASE("n=5 ell=2: descent covers the binary search") {
        const Schedule s = worst_case_schedule(5, 2, 0.5);
        CHECK(s.E == std::vector<std::int64_t>{3, 6});
        CHECK(s.B == std::vector<std::int64_t>{4, 5});
        CHECK(s.total_bound == 6585802);
    }
    SUBCASE("n=3 ell=1") {
        const Schedule s = worst_case_schedule(3, 1, 0.5);
        CHECK(s.E == std::vector<std::int64_t>{2, 4});
        CHECK(s.B == std::vector<std::int64_t>{3});
        CHECK(s.total_bound == 578117);
    }
    SUBCASE("n=4 ell=1 eps=1: total is the sum over {2,4}") {
        const Schedule s = worst_case_schedule(4, 1, 1.0);
        CHECK(s.E == std::vector<std::int64_t>{2, 4});
        CHECK(s.B.empty());
        const EpochParams p2 = derive_epoch_params(2, 1, 1.0);
        const EpochParams p4 = derive_epoch_params(4, 1, 1.0);
        CHECK(s.total_bound == p2.epoch_rounds() + p4.epoch_rounds());
        CHECK(s.total_bound == 13406060);
    }
}

TEST_CASE("schedule elements stay inside the search range") {
    for (std::int64_t n = 2; n <= 40; ++n) {
        for (std::int64_t ell = 1; ell < std::min<std::int64_t>(n, 6); ++ell) {
            const Schedule s = worst_case_schedule(n, ell, 0.5);
            const std::int64_t top = s.E.back();
            for (std::int64_t k : s.E) {
                CHECK(k > ell);
                CHECK(k <= top);
            }
            // descent values interleave the top doubling range
            const std::int64_t prev = s.E.size() >= 2 ? s.E[s.E.size() - 2] : 0;
            for (std::int64_t k : s.B) {
                CHECK(k > prev);
                CHECK(k < top);
            }
            CHECK(s.total_bound > 0);
        }
    }
}

namespace {

// independent estimate-walk: the sequence the protocol's search visits
std::vector<std::int64_t> visited_estimates(std::int64_t n, std::int64_t ell) {
    std::vector<std::int64_t> seq;
    std::int64_t k = ell + 1;
    std::int64_t lo = ell + 1;
    std::int64_t hi = -1;
    while (true) {
        seq.push_back(k);
        if (k == n) return seq;
        if (k < n) {
            lo = k + 1;
            k = hi < 0 ? 2 * k : (lo + hi) / 2;
        } else {
            hi = k - 1;
            k = (lo + hi) / 2;
        }
    }
}

}  // namespace

TEST_CASE("total bound dominates every actual search, 2 <= n <= 16") {
    for (std::int64_t n = 2; n <= 16; ++n) {
        for (std::int64_t ell = 1; ell < n; ++ell) {
            const Schedule s = worst_case_schedule(n, ell, 0.5);
            std::int64_t cost = 0;
            for (std::int64_t k : visited_estimates(n, ell)) {
                cost += derive_epoch_params(k, ell, 0.5).epoch_rounds();
            }
            CHECK(cost <= s.total_bound);
        }
    }
}

TEST_CASE("mmct horizon forces the descent even at exact powers") {
    // K=8: doubling {2,4,8} plus the worst descent {6,7}
    const std::int64_t rm = mmct_round_max(8, 1, 0.5);
    const Schedule s8 = worst_case_schedule(8, 1, 0.5);
    CHECK(rm == 109037834);
    CHECK(rm > s8.total_bound);
    CHECK(mmct_round_max(4, 1, 0.5) == 578117);
    CHECK_THROWS_AS(mmct_round_max(6, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(mmct_round_max(0, 1, 0.5), std::invalid_argument);
}

TEST_CASE("d is the integer ceiling of the raw power") {
    CHECK(derive_epoch_params(2, 1, 0.5).d == 3);   // 2.828 -> 3
    CHECK(derive_epoch_params(4, 1, 0.5).d == 8);   // exactly 8
    CHECK(derive_epoch_params(9, 1, 0.5).d == 27);  // exactly 27
    CHECK(derive_epoch_params(4, 1, 1.0).d == 16);
    for (std::int64_t k = 2; k <= 64; ++k) {
        CHECK(derive_epoch_params(k, 1, 0.5).d >= k + 1);
    }
}
