#include "adn/params.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace adn {

namespace {

std::int64_t checked_mul_add(std::int64_t p, std::int64_t r, std::int64_t d) {
    if (p > 0 && r > std::numeric_limits<std::int64_t>::max() / p) {
        throw std::overflow_error("epoch round count overflows int64");
    }
    return p * r + d;
}

double log_base(double base, double x) { return std::log(x) / std::log(base); }

std::int64_t scaled_floor(double factor, std::int64_t v) {
    const auto f = static_cast<std::int64_t>(std::floor(factor * static_cast<double>(v)));
    return std::max<std::int64_t>(1, f);
}

}  // namespace

EpochParams derive_epoch_params(std::int64_t k, std::int64_t ell, double epsilon,
                                const ParamMode& mode) {
    if (ell < 1) throw std::invalid_argument("ell must be >= 1");
    if (k <= ell) throw std::invalid_argument("estimate k must exceed the black count ell");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!mode.paper && !(mode.s_p > 0.0 && mode.s_p <= 1.0 && mode.s_r > 0.0 && mode.s_r <= 1.0)) {
        throw std::invalid_argument("scale factors must lie in (0, 1]");
    }

    EpochParams out;
    out.k = k;
    out.ell = ell;
    out.epsilon = epsilon;

    const double kd = static_cast<double>(k);
    const double raw = std::pow(kd, 1.0 + epsilon);
    out.d = static_cast<std::int64_t>(std::ceil(raw));
    out.gamma = log_base(kd, static_cast<double>(out.d));
    out.alpha = 1.0 + out.gamma + log_base(kd, 3.0);
    out.delta = 2.0 * out.gamma + 0.05;
    out.beta = log_base(kd, static_cast<double>(out.d) * (2.0 * std::pow(kd, out.delta) + 1.0));
    out.tau = static_cast<double>(ell) * (1.0 - static_cast<double>(ell) / raw);

    const double dd = static_cast<double>(out.d);
    const double r_arg = 2.0 * dd * kd * kd * std::log(kd) *
                         std::max({out.alpha,
                                   out.beta * std::pow(kd, 2.0 * epsilon),
                                   2.0 + epsilon - std::log(std::pow(kd, epsilon) - 1.0) / std::log(kd)});
    const double p_arg = (2.0 * std::log(kd) / static_cast<double>(ell)) *
                         std::max(out.gamma / (1.0 / kd + std::pow(kd, -out.alpha)),
                                  out.delta / (1.0 / dd + std::pow(kd, -out.beta)));
    constexpr double kCountLimit = 4.6e18;  // safely inside int64
    if (!(r_arg < kCountLimit) || !(p_arg < kCountLimit)) {
        throw std::overflow_error("round counts at k=" + std::to_string(k) +
                                  " do not fit a 64-bit integer");
    }
    out.r = static_cast<std::int64_t>(std::ceil(r_arg));
    out.p = static_cast<std::int64_t>(std::ceil(p_arg));

    // Derivation conditions; a failure here is a bug, not an input error.
    const double kg = std::pow(kd, out.gamma);
    const bool conditions_ok =
        out.alpha >= 1.0 + out.gamma + log_base(kd, 3.0) &&
        out.beta >= log_base(kd, dd * (2.0 * std::pow(kd, out.delta) + 1.0)) &&
        out.gamma > log_base(kd, dd - 1.0) &&
        out.delta > log_base(kd, dd * kg / (kg + 1.0 - dd)) &&
        out.d >= k + 1 && out.p >= 1 && out.r >= 1 &&
        out.tau > 0.0 && out.tau < static_cast<double>(ell);
    if (!conditions_ok) {
        throw std::logic_error("epoch parameter conditions violated at k=" + std::to_string(k));
    }

    if (!mode.paper) {
        out.p = scaled_floor(mode.s_p, out.p);
        out.r = scaled_floor(mode.s_r, out.r);
    }
    return out;
}

EstimateState update_estimate(EstimateOutcome outcome, const EstimateState& s) {
    EstimateState next = s;
    if (outcome == EstimateOutcome::low) {
        next.min = s.k + 1;
        next.k = (s.max == kNoUpperBound) ? 2 * s.k : (next.min + s.max) / 2;
    } else {
        next.max = s.k - 1;
        next.k = (s.min + next.max) / 2;
    }
    if (next.max != kNoUpperBound && next.min > next.max) {
        throw std::runtime_error("estimate range became empty (min " + std::to_string(next.min) +
                                 " > max " + std::to_string(next.max) + "): inconsistent run");
    }
    return next;
}

namespace {

void rightmost_descent(std::int64_t lo, std::int64_t hi, std::vector<std::int64_t>& out) {
    while (lo <= hi) {
        const std::int64_t mid = (lo + hi) / 2;
        out.push_back(mid);
        lo = mid + 1;
    }
}

Schedule make_schedule(std::int64_t n, std::int64_t ell, double epsilon,
                       const ParamMode& mode, bool force_descent) {
    if (ell < 1 || n <= ell) throw std::invalid_argument("need n > ell >= 1");

    Schedule sched;
    std::int64_t k = ell + 1;
    sched.E.push_back(k);
    while (k < n) {
        k *= 2;
        sched.E.push_back(k);
    }
    if ((sched.E.back() != n || force_descent) && sched.E.size() >= 2) {
        rightmost_descent(sched.E[sched.E.size() - 2] + 1, sched.E.back() - 1, sched.B);
    }

    std::set<std::int64_t> all(sched.E.begin(), sched.E.end());
    all.insert(sched.B.begin(), sched.B.end());
    for (std::int64_t kk : all) {
        const EpochParams ep = derive_epoch_params(kk, ell, epsilon, mode);
        const std::int64_t rounds = checked_mul_add(ep.p, ep.r, ep.d);
        sched.per_epoch_rounds[kk] = rounds;
        sched.total_bound += rounds;
    }
    return sched;
}

}  // namespace

Schedule worst_case_schedule(std::int64_t n, std::int64_t ell, double epsilon,
                             const ParamMode& mode) {
    return make_schedule(n, ell, epsilon, mode, /*force_descent=*/false);
}

std::int64_t mmct_round_max(std::int64_t K, std::int64_t ell_prime, double epsilon,
                            const ParamMode& mode) {
    if (K < 2 || (K & (K - 1)) != 0) throw std::invalid_argument("K must be a power of two >= 2");
    if (K <= ell_prime) throw std::invalid_argument("K must exceed ell'");
    return make_schedule(K, ell_prime, epsilon, mode, /*force_descent=*/true).total_bound;
}

}  // namespace adn
