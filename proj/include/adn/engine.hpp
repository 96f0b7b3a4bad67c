#pragma once

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adn/adversary.hpp"
#include "adn/mmc.hpp"
#include "adn/params.hpp"

namespace adn {

enum class AlarmKind : std::uint8_t { degree, received, threshold };

struct WorldConfig {
    int n = 0;
    std::int64_t ell = 1;
    double epsilon = 0.5;
    ParamMode mode = ParamMode::paper_mode();
    AdversarySpec adversary;
    std::vector<Role> roles;          // empty: nodes 0..ell-1 are black
    std::uint64_t round_budget = 0;   // 0 = unlimited; exceeding aborts the run
    bool allow_skip = true;           // all-low epoch tails jump (state identity)
};

struct EpochSummary {
    std::int64_t k = 0;
    std::uint64_t first_round = 0;
    std::uint64_t rounds = 0;
    int alarms_degree = 0;
    int alarms_received = 0;
    int alarms_threshold = 0;
    std::uint64_t first_alarm_round = 0;  // 0 = alarm-free epoch
    std::uint64_t all_low_round = 0;      // 0 = never all low
    bool completed_probing = false;       // blacks reached classification probing
    Status classify_outcome = Status::probing;
    std::vector<double> rho_black;        // per black node, epoch end
};

struct RunResult {
    std::vector<std::int64_t> counts;
    std::uint64_t total_rounds = 0;
    bool completed = false;
    std::vector<EpochSummary> epochs;
};

struct NullObserver {
    static constexpr bool needs_every_round = false;
    void on_run_start(const WorldConfig&, const EpochParams&) {}
    void on_epoch_start(std::int64_t, const EpochParams&, std::uint64_t) {}
    void on_phase_start(std::int64_t, std::span<const double>) {}
    void on_averaging_round(std::uint64_t, std::span<const double>, std::span<const Status>) {}
    void on_alarm(std::uint64_t, int, AlarmKind) {}
    void on_phase1_potentials(std::span<const double>) {}
    void on_consume(std::int64_t, std::span<const double>) {}
    void on_dissemination_round(std::uint64_t, std::span<const Status>) {}
    void on_skip(std::uint64_t, std::uint64_t) {}
    void on_epoch_end(const EpochSummary&) {}
    void on_stop(std::uint64_t, std::int64_t) {}
};

// Synchronous lockstep world for plain MMC. Fails loudly if the lockstep
// invariants break (impossible in paper mode; possible under degenerate
// scaling, where aborting is the documented behavior).
template <class Obs>
class MmcWorld {
  public:
    MmcWorld(const WorldConfig& cfg, Obs& obs)
        : cfg_(cfg), obs_(obs), source_(cfg.adversary, cfg.n) {
        if (cfg.n < 2) throw std::invalid_argument("run_mmc needs n >= 2");
        if (cfg.ell < 1 || cfg.ell >= cfg.n) throw std::invalid_argument("run_mmc needs n > ell >= 1");
        const int n = cfg.n;
        black_.assign(n, 0);
        if (cfg.roles.empty()) {
            for (int i = 0; i < cfg.ell; ++i) black_[i] = 1;
        } else {
            if (static_cast<int>(cfg.roles.size()) != n) {
                throw std::invalid_argument("roles size mismatch");
            }
            for (int i = 0; i < n; ++i) black_[i] = cfg.roles[i] == Role::black ? 1 : 0;
        }
        phi_[0].assign(n, 0.0);
        phi_[1].assign(n, 0.0);
        st_[0].assign(n, Status::probing);
        st_[1].assign(n, Status::probing);
        rho_.assign(n, 0.0);
        est_.assign(n, EstimateState::initial(cfg.ell));
        scratch_.assign(n, 0.0);
        topo_.reset(n);
        if (source_.is_static()) source_.materialize(1, topo_);
    }

    RunResult run() {
        RunResult out;
        params_ = derive_epoch_params(est_[0].k, cfg_.ell, cfg_.epsilon, cfg_.mode);
        init_epoch_state();
        obs_.on_run_start(cfg_, params_);
        while (true) {
            if (!run_epoch(out)) {
                out.completed = false;  // round budget exhausted
                out.total_rounds = round_;
                return out;
            }
            if (stopped_) {
                out.completed = true;
                out.total_rounds = round_;
                out.counts.assign(cfg_.n, est_[0].k);
                obs_.on_stop(round_, est_[0].k);
                return out;
            }
        }
    }

  private:
    void init_epoch_state() {
        for (int i = 0; i < cfg_.n; ++i) {
            phi_[cur_][i] = black_[i] ? 0.0 : static_cast<double>(cfg_.ell);
            st_[cur_][i] = Status::probing;
            rho_[i] = 0.0;
        }
        nonprobing_ = 0;
    }

    const RoundTopology& next_topology() {
        if (!source_.is_static()) {
            AdaptiveView view;
            view.round = round_;
            view.n = cfg_.n;
            view.phi = phi_[cur_].data();
            view.status = reinterpret_cast<const std::uint8_t*>(st_[cur_].data());
            if (!source_.is_oblivious()) {
                view_k_.resize(cfg_.n);
                for (int i = 0; i < cfg_.n; ++i) view_k_[i] = est_[i].k;
                view.estimate = view_k_.data();
            }
            source_.materialize(round_, topo_, &view);
        }
        return topo_;
    }

    // ascending-order neighbor sum; addition over <=2 values is
    // order-insensitive, larger inboxes are insertion sorted
    double neighbor_sum(const double* phi, const int* nb, int m) {
        if (m == 1) return phi[nb[0]];
        if (m == 2) return phi[nb[0]] + phi[nb[1]];
        double* v = scratch_.data();
        for (int j = 0; j < m; ++j) {
            const double x = phi[nb[j]];
            int q = j;
            while (q > 0 && v[q - 1] > x) {
                v[q] = v[q - 1];
                --q;
            }
            v[q] = x;
        }
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += v[j];
        return s;
    }

    bool averaging_round(EpochSummary& ep) {
        if (cfg_.round_budget != 0 && round_ >= cfg_.round_budget) return false;
        round_++;
        const RoundTopology& t = next_topology();
        const int n = cfg_.n;
        const double* pa = phi_[cur_].data();
        double* pb = phi_[1 - cur_].data();
        const Status* sa = st_[cur_].data();
        Status* sb = st_[1 - cur_].data();
        const double dd = static_cast<double>(params_.d);
        const double ell = static_cast<double>(cfg_.ell);

        if (nonprobing_ == 0 && t.max_deg <= params_.d - 1) {
            for (int i = 0; i < n; ++i) {
                const int m = t.deg[i];
                const double s = neighbor_sum(pa, t.neighbors(i), m);
                pb[i] = pa[i] + (s - static_cast<double>(m) * pa[i]) / dd;
                sb[i] = Status::probing;
            }
        } else {
            for (int i = 0; i < n; ++i) {
                const int m = t.deg[i];
                const int* nb = t.neighbors(i);
                bool quiet = sa[i] == Status::probing && m <= params_.d - 1;
                if (quiet) {
                    for (int j = 0; j < m; ++j) {
                        if (sa[nb[j]] != Status::probing) {
                            quiet = false;
                            break;
                        }
                    }
                }
                if (quiet) {
                    const double s = neighbor_sum(pa, nb, m);
                    pb[i] = pa[i] + (s - static_cast<double>(m) * pa[i]) / dd;
                    sb[i] = Status::probing;
                } else {
                    if (sa[i] == Status::probing) {
                        const AlarmKind kind =
                            m > params_.d - 1 ? AlarmKind::degree : AlarmKind::received;
                        record_alarm(ep, i, kind);
                    }
                    sb[i] = Status::low;
                    pb[i] = ell;
                }
            }
            recount();
        }
        cur_ = 1 - cur_;
        obs_.on_averaging_round(round_, phi_span(), status_span());
        return true;
    }

    void record_alarm(EpochSummary& ep, int node, AlarmKind kind) {
        switch (kind) {
            case AlarmKind::degree: ep.alarms_degree++; break;
            case AlarmKind::received: ep.alarms_received++; break;
            case AlarmKind::threshold: ep.alarms_threshold++; break;
        }
        if (ep.first_alarm_round == 0) ep.first_alarm_round = round_;
        obs_.on_alarm(round_, node, kind);
    }

    void recount() {
        const Status* s = st_[1 - cur_].data();  // freshly written buffer
        int np = 0;
        int low = 0;
        for (int i = 0; i < cfg_.n; ++i) {
            np += s[i] != Status::probing;
            low += s[i] == Status::low;
        }
        nonprobing_ = np;
        all_low_ = low == cfg_.n;
    }

    bool dissemination_round() {
        if (cfg_.round_budget != 0 && round_ >= cfg_.round_budget) return false;
        round_++;
        const RoundTopology& t = next_topology();
        const int n = cfg_.n;
        const Status* sa = st_[cur_].data();
        Status* sb = st_[1 - cur_].data();
        for (int i = 0; i < n; ++i) {
            sb[i] = sa[i];
            if (black_[i]) continue;
            Status heard = Status::probing;
            const int* nb = t.neighbors(i);
            for (int j = 0; j < t.deg[i]; ++j) {
                const Status x = sa[nb[j]];
                if (x == Status::probing) continue;
                if (heard == Status::probing) {
                    heard = x;
                } else if (heard != x) {
                    throw std::runtime_error("conflicting non-probing statuses during dissemination");
                }
            }
            if (heard != Status::probing) {
                if (sa[i] != Status::probing && sa[i] != heard) {
                    throw std::runtime_error("dissemination conflicts with an already-held status");
                }
                sb[i] = heard;
            }
        }
        cur_ = 1 - cur_;
        recount_from_current();
        obs_.on_dissemination_round(round_, status_span());
        return true;
    }

    void recount_from_current() {
        const Status* s = st_[cur_].data();
        int np = 0;
        int low = 0;
        for (int i = 0; i < cfg_.n; ++i) {
            np += s[i] != Status::probing;
            low += s[i] == Status::low;
        }
        nonprobing_ = np;
        all_low_ = low == cfg_.n;
    }

    // One full epoch; returns false on budget exhaustion.
    bool run_epoch(RunResult& out) {
        EpochSummary ep;
        ep.k = est_[0].k;
        ep.first_round = round_ + 1;
        obs_.on_epoch_start(ep.k, params_, round_ + 1);

        bool skipped_tail = false;
        for (std::int64_t phase = 1; phase <= params_.p && !skipped_tail; ++phase) {
            obs_.on_phase_start(phase, phi_span());
            for (std::int64_t r = 1; r <= params_.r; ++r) {
                // state-identity jump; never skips the phase-1 boundary so
                // the end-of-phase-1 potential snapshot always happens
                if (all_low_ && phase >= 2 && cfg_.allow_skip && !Obs::needs_every_round) {
                    const std::uint64_t remaining =
                        static_cast<std::uint64_t>(params_.r - r + 1) +
                        static_cast<std::uint64_t>(params_.p - phase) * params_.r +
                        static_cast<std::uint64_t>(params_.d);
                    if (cfg_.round_budget != 0 && round_ + remaining > cfg_.round_budget) return false;
                    obs_.on_skip(round_ + 1, remaining);
                    round_ += remaining;
                    skipped_tail = true;
                    break;
                }
                if (!averaging_round(ep)) return false;
                if (all_low_ && ep.all_low_round == 0) ep.all_low_round = round_;
            }
            if (skipped_tail) break;
            if (phase == 1) {
                obs_.on_phase1_potentials(phi_span());
                double* p = phi_[cur_].data();
                Status* s = st_[cur_].data();
                for (int i = 0; i < cfg_.n; ++i) {
                    if (p[i] > params_.tau) {
                        if (s[i] == Status::probing) {
                            record_alarm(ep, i, AlarmKind::threshold);
                            s[i] = Status::low;
                            nonprobing_++;
                        }
                        p[i] = static_cast<double>(cfg_.ell);
                    }
                }
                recount_from_current();
                if (all_low_ && ep.all_low_round == 0) ep.all_low_round = round_;
            }
            {
                double* p = phi_[cur_].data();
                const Status* s = st_[cur_].data();
                for (int i = 0; i < cfg_.n; ++i) {
                    if (black_[i] && s[i] == Status::probing) {
                        rho_[i] += p[i];
                        p[i] = 0.0;
                    }
                }
                obs_.on_consume(phase, std::span<const double>(rho_.data(), cfg_.n));
            }
        }

        if (!skipped_tail) {
            // classification, then d dissemination rounds
            Status* s = st_[cur_].data();
            Status outcome = Status::probing;
            for (int i = 0; i < cfg_.n; ++i) {
                if (black_[i] && s[i] == Status::probing) {
                    ep.completed_probing = true;
                    s[i] = classify_rho(rho_[i], ep.k, cfg_.ell, params_.gamma);
                    if (outcome == Status::probing) {
                        outcome = s[i];
                    } else if (outcome != s[i]) {
                        throw std::runtime_error("black nodes classified differently at k=" +
                                                 std::to_string(ep.k));
                    }
                }
            }
            ep.classify_outcome = outcome;
            recount_from_current();
            for (std::int64_t j = 1; j <= params_.d; ++j) {
                if (all_low_ && cfg_.allow_skip && !Obs::needs_every_round) {
                    const std::uint64_t remaining = static_cast<std::uint64_t>(params_.d - j + 1);
                    if (cfg_.round_budget != 0 && round_ + remaining > cfg_.round_budget) return false;
                    obs_.on_skip(round_ + 1, remaining);
                    round_ += remaining;
                    break;
                }
                if (!dissemination_round()) return false;
            }
        }

        for (int i = 0; i < cfg_.n; ++i) {
            if (black_[i]) ep.rho_black.push_back(rho_[i]);
        }
        ep.rounds = round_ - ep.first_round + 1;

        // epoch-end estimate handling
        const Status* s = st_[cur_].data();
        int done = 0;
        for (int i = 0; i < cfg_.n; ++i) done += s[i] == Status::done;
        if (done != 0 && done != cfg_.n) {
            throw std::runtime_error("done status failed to reach every node (k=" +
                                     std::to_string(ep.k) + ")");
        }
        if (done == cfg_.n) {
            stopped_ = true;
            obs_.on_epoch_end(ep);
            out.epochs.push_back(std::move(ep));
            return true;
        }
        for (int i = 0; i < cfg_.n; ++i) {
            const EstimateOutcome o =
                s[i] == Status::high ? EstimateOutcome::high : EstimateOutcome::low;
            est_[i] = update_estimate(o, est_[i]);
            if (est_[i] != est_[0]) {
                throw std::runtime_error("estimate lockstep broken after k=" + std::to_string(ep.k));
            }
        }
        obs_.on_epoch_end(ep);
        out.epochs.push_back(std::move(ep));
        params_ = derive_epoch_params(est_[0].k, cfg_.ell, cfg_.epsilon, cfg_.mode);
        init_epoch_state();
        all_low_ = false;
        return true;
    }

    std::span<const double> phi_span() const {
        return std::span<const double>(phi_[cur_].data(), cfg_.n);
    }
    std::span<const Status> status_span() const {
        return std::span<const Status>(st_[cur_].data(), cfg_.n);
    }

    WorldConfig cfg_;
    Obs& obs_;
    TopologySource source_;
    RoundTopology topo_;
    EpochParams params_;
    std::vector<std::uint8_t> black_;
    std::vector<double> phi_[2];
    std::vector<Status> st_[2];
    std::vector<double> rho_;
    std::vector<EstimateState> est_;
    std::vector<double> scratch_;
    std::vector<std::int64_t> view_k_;
    int cur_ = 0;
    int nonprobing_ = 0;
    bool all_low_ = false;
    bool stopped_ = false;
    std::uint64_t round_ = 0;
};

// Fans one engine's callbacks out to several observers.
template <class... Obs>
class MultiObserver {
  public:
    static constexpr bool needs_every_round = (Obs::needs_every_round || ...);

    explicit MultiObserver(Obs&... obs) : obs_(obs...) {}

    void on_run_start(const WorldConfig& c, const EpochParams& p) {
        each([&](auto& o) { o.on_run_start(c, p); });
    }
    void on_epoch_start(std::int64_t k, const EpochParams& p, std::uint64_t r) {
        each([&](auto& o) { o.on_epoch_start(k, p, r); });
    }
    void on_phase_start(std::int64_t ph, std::span<const double> phi) {
        each([&](auto& o) { o.on_phase_start(ph, phi); });
    }
    void on_averaging_round(std::uint64_t r, std::span<const double> phi,
                            std::span<const Status> st) {
        each([&](auto& o) { o.on_averaging_round(r, phi, st); });
    }
    void on_alarm(std::uint64_t r, int node, AlarmKind k) {
        each([&](auto& o) { o.on_alarm(r, node, k); });
    }
    void on_phase1_potentials(std::span<const double> phi) {
        each([&](auto& o) { o.on_phase1_potentials(phi); });
    }
    void on_consume(std::int64_t ph, std::span<const double> rho) {
        each([&](auto& o) { o.on_consume(ph, rho); });
    }
    void on_dissemination_round(std::uint64_t r, std::span<const Status> st) {
        each([&](auto& o) { o.on_dissemination_round(r, st); });
    }
    void on_skip(std::uint64_t from, std::uint64_t count) {
        each([&](auto& o) { o.on_skip(from, count); });
    }
    void on_epoch_end(const EpochSummary& ep) {
        each([&](auto& o) { o.on_epoch_end(ep); });
    }
    void on_stop(std::uint64_t r, std::int64_t count) {
        each([&](auto& o) { o.on_stop(r, count); });
    }

  private:
    template <class F>
    void each(F&& f) {
        std::apply([&](auto&... o) { (f(o), ...); }, obs_);
    }
    std::tuple<Obs&...> obs_;
};

template <class Obs>
RunResult run_mmc(const WorldConfig& cfg, Obs& obs) {
    MmcWorld<Obs> world(cfg, obs);
    return world.run();
}

inline RunResult run_mmc(const WorldConfig& cfg) {
    NullObserver obs;
    return run_mmc(cfg, obs);
}

}  // namespace adn
