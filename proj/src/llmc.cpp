#include "adn/llmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adn/prng.hpp"

namespace adn {

std::int64_t initial_K(double zeta) {
    if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be > 0");
    const double x = 12.0 / zeta;
    std::int64_t K = 2;
    while (static_cast<double>(K) <= x) K *= 2;
    return K;
}

std::int64_t thread_count(std::int64_t K, double zeta) {
    if (K < 2) throw std::invalid_argument("thread_count needs K >= 2");
    const double denom = std::log(std::exp(1.0) / (std::exp(1.0) - 2.0));
    return static_cast<std::int64_t>(std::ceil(64.0 * std::log(static_cast<double>(K) / zeta) / denom));
}

double black_probability(std::int64_t K) {
    if (K < 4) throw std::invalid_argument("black_probability needs K >= 4");
    return 2.0 / static_cast<double>(K);
}

namespace {

// One MMCT execution lane: n node automata sharing the world's rounds.
struct Lane {
    std::vector<NodeState> nodes;
    std::uint64_t rounds_done = 0;      // rounds this lane has accounted for
    std::uint64_t dormant_rounds = 0;   // rounds it may swallow without stepping
    bool settled = false;               // results can no longer change

    bool has_black = false;

    void init(const ProtocolConfig& pc, const std::vector<Role>& roles) {
        nodes.clear();
        has_black = false;
        for (Role r : roles) {
            nodes.push_back(make_node(pc, r == Role::black));
            has_black |= r == Role::black;
        }
        rounds_done = 0;
        dormant_rounds = 0;
        settled = false;
    }

    bool all_idle() const {
        for (const auto& s : nodes) {
            if (s.segment != Segment::idle) return false;
        }
        return true;
    }

    bool flag_uniform() const {
        for (const auto& s : nodes) {
            if (s.black_flag != nodes[0].black_flag) return false;
        }
        return true;
    }

    // aligned all-low worlds: rest of the epoch is a state identity
    bool aligned_all_low() const {
        const NodeState& a = nodes[0];
        if (a.segment == Segment::idle || a.segment == Segment::stopped) return false;
        for (const auto& s : nodes) {
            if (s.status != Status::low || s.segment != a.segment || s.est.k != a.est.k ||
                s.phase != a.phase || s.round_in_phase != a.round_in_phase ||
                s.dissem_round != a.dissem_round) {
                return false;
            }
        }
        return true;
    }
};

class MmctWorld {
  public:
    MmctWorld(const ProtocolConfig& pc, int n, TopologySource& source, std::uint64_t& global_round,
              bool allow_epoch_skip, bool allow_fast_forward)
        : pc_(pc),
          n_(n),
          source_(source),
          global_round_(global_round),
          epoch_skip_(allow_epoch_skip && source.is_oblivious()),
          fast_forward_(allow_fast_forward && source.is_oblivious()) {
        topo_.reset(n);
        if (source_.is_static()) source_.materialize(1, topo_);
        messages_.resize(0);
        inbox_.resize(0);
    }

    void add_lane(const std::vector<Role>& roles) {
        Lane lane;
        lane.init(pc_, roles);
        lanes_.push_back(std::move(lane));
    }

    // Runs all lanes to the synchronization horizon; every node of every
    // lane accounts for exactly round_max communication rounds.
    void run_to_horizon() {
        const std::uint64_t horizon = pc_.round_max;
        std::uint64_t round = 0;
        while (round < horizon) {
            if (fast_forward_ && all_settled()) {
                // settled lanes are all idle with a uniform flag: the rest
                // of the horizon is padding with no observable effect
                const std::uint64_t rest = horizon - round;
                for (auto& lane : lanes_) lane.rounds_done += rest;
                global_round_ += rest;
                round = horizon;
                break;
            }
            round++;
            global_round_++;
            materialize();
            for (auto& lane : lanes_) step_lane(lane);
        }
        for (auto& lane : lanes_) {
            if (lane.rounds_done != horizon) {
                throw std::logic_error("lane round accounting diverged from the horizon");
            }
        }
    }

    std::vector<MmctReturn> lane_results(std::size_t lane_idx) const {
        std::vector<MmctReturn> out;
        for (const auto& s : lanes_[lane_idx].nodes) out.push_back(mmct_result(s));
        return out;
    }

    std::size_t lane_count() const { return lanes_.size(); }

  private:
    bool all_settled() const {
        for (const auto& lane : lanes_) {
            if (!lane.settled) return false;
        }
        return true;
    }

    void materialize() {
        if (source_.is_static()) return;
        AdaptiveView view;
        view.round = global_round_;
        view.n = n_;
        if (!source_.is_oblivious()) build_adaptive_view(view);
        source_.materialize(global_round_, topo_, &view);
    }

    void build_adaptive_view(AdaptiveView& view) {
        const std::size_t total = lanes_.size() * static_cast<std::size_t>(n_);
        view_phi_.resize(total);
        view_status_.resize(total);
        view_flag_.resize(total);
        view_k_.resize(total);
        std::size_t idx = 0;
        for (const auto& lane : lanes_) {
            for (const auto& s : lane.nodes) {
                view_phi_[idx] = s.phi;
                view_status_[idx] = static_cast<std::uint8_t>(s.status);
                view_flag_[idx] = s.black_flag ? 1 : 0;
                view_k_[idx] = s.est.k;
                idx++;
            }
        }
        view.n = static_cast<int>(total);
        view.phi = view_phi_.data();
        view.status = view_status_.data();
        view.black_flag = view_flag_.data();
        view.estimate = view_k_.data();
    }

    void step_lane(Lane& lane) {
        if (lane.dormant_rounds > 0) {
            lane.dormant_rounds--;
            lane.rounds_done++;
            return;
        }
        if (lane.settled) {
            lane.rounds_done++;
            return;
        }
        messages_.resize(lane.nodes.size());
        inbox_.resize(static_cast<std::size_t>(n_ > 1 ? n_ - 1 : 1));
        for (std::size_t i = 0; i < lane.nodes.size(); ++i) {
            messages_[i] = node_message(lane.nodes[i]);
        }
        for (int i = 0; i < n_; ++i) {
            const int m = topo_.deg[i];
            const int* nb = topo_.neighbors(i);
            for (int j = 0; j < m; ++j) inbox_[j] = messages_[nb[j]];
            node_advance(pc_, lane.nodes[i], std::span<const MmcMessage>(inbox_.data(), m));
        }
        lane.rounds_done++;

        if (lane.all_idle()) {
            // idle nodes only OR the flag; once uniform nothing can change
            if (lane.flag_uniform()) lane.settled = true;
            return;
        }
        if (epoch_skip_ && lane.flag_uniform() && lane.aligned_all_low()) {
            std::uint64_t skip = 0;
            for (auto& s : lane.nodes) skip = node_skip_low_epoch_tail(pc_, s);
            lane.dormant_rounds = skip;
        }
    }

    ProtocolConfig pc_;
    int n_;
    TopologySource& source_;
    std::uint64_t& global_round_;
    bool epoch_skip_;
    bool fast_forward_;
    RoundTopology topo_;
    std::vector<Lane> lanes_;
    std::vector<MmcMessage> messages_;
    std::vector<MmcMessage> inbox_;
    std::vector<double> view_phi_;
    std::vector<std::uint8_t> view_status_;
    std::vector<std::uint8_t> view_flag_;
    std::vector<std::int64_t> view_k_;
};

ProtocolConfig mmct_protocol_config(int n, std::int64_t K, std::int64_t ell_prime, double epsilon,
                                    const ParamMode& mode, std::uint64_t round_max) {
    if (n < 2) throw std::invalid_argument("mmct needs n >= 2");
    ProtocolConfig pc;
    pc.ell_param = ell_prime;
    pc.epsilon = epsilon;
    pc.mode = mode;
    pc.mmct = true;
    pc.cap_K = K;
    pc.round_max = round_max != 0 ? round_max : static_cast<std::uint64_t>(
                                                    mmct_round_max(K, ell_prime, epsilon, mode));
    pc.strict_dissemination = false;
    return pc;
}

}  // namespace

MmctRunResult run_mmct(const MmctConfig& cfg) {
    if (static_cast<int>(cfg.roles.size()) != cfg.n) {
        throw std::invalid_argument("run_mmct needs one role per node");
    }
    const ProtocolConfig pc =
        mmct_protocol_config(cfg.n, cfg.K, cfg.ell_prime, cfg.epsilon, cfg.mode, cfg.round_max);
    TopologySource source(cfg.adversary, cfg.n);
    std::uint64_t global_round = 0;
    MmctWorld world(pc, cfg.n, source, global_round, cfg.allow_epoch_skip, cfg.allow_fast_forward);
    world.add_lane(cfg.roles);
    world.run_to_horizon();
    MmctRunResult out;
    out.returns = world.lane_results(0);
    out.round_max = pc.round_max;
    out.rounds_executed = pc.round_max;
    return out;
}

LlmcDriver::LlmcDriver(const LlmcConfig& cfg)
    : cfg_(cfg), source_(cfg.adversary, cfg.n), K_(initial_K(cfg.zeta)) {
    if (cfg.n < 2) throw std::invalid_argument("run_llmc needs n >= 2");
    counts_.assign(cfg.n, 0);
}

LlmcIterationInfo LlmcDriver::step() {
    LlmcIterationInfo info;
    info.K = K_;
    info.threads = thread_count(K_, cfg_.zeta);
    const ProtocolConfig pc =
        mmct_protocol_config(cfg_.n, K_, 1, cfg_.epsilon, cfg_.mode, 0);
    info.round_max = pc.round_max;

    const double p_black = black_probability(K_);
    std::vector<std::vector<Role>> roles(info.threads, std::vector<Role>(cfg_.n, Role::white));
    info.blacks_per_thread.assign(info.threads, 0);
    for (std::int64_t t = 0; t < info.threads; ++t) {
        for (int i = 0; i < cfg_.n; ++i) {
            SplitMix64 rng(derive_stream(cfg_.seed, "black-select",
                                         static_cast<std::uint64_t>(K_),
                                         static_cast<std::uint64_t>(t),
                                         static_cast<std::uint64_t>(i)));
            if (rng.next_double() < p_black) {
                roles[t][i] = Role::black;
                info.blacks_per_thread[t]++;
            }
        }
    }

    // Zero-black lanes are exact fixpoints (phi stays ell'=1, every epoch
    // alarms low, the flag never rises): resolved without stepping.
    std::vector<MmctReturn> zero_result(cfg_.n, MmctReturn{0, false});
    std::vector<std::vector<MmctReturn>> results(info.threads);
    const bool shortcut = cfg_.zero_black_shortcut && source_.is_oblivious();

    MmctWorld world(pc, cfg_.n, source_, global_round_, cfg_.allow_epoch_skip,
                    cfg_.allow_fast_forward);
    std::vector<std::int64_t> active;  // thread index per lane
    for (std::int64_t t = 0; t < info.threads; ++t) {
        if (shortcut && info.blacks_per_thread[t] == 0) {
            results[t] = zero_result;
        } else {
            world.add_lane(roles[t]);
            active.push_back(t);
        }
    }
    world.run_to_horizon();
    total_rounds_ += pc.round_max;
    for (std::size_t li = 0; li < active.size(); ++li) {
        results[active[li]] = world.lane_results(li);
    }

    info.empty_threads.assign(cfg_.n, 0);
    info.best_count.assign(cfg_.n, 0);
    for (int i = 0; i < cfg_.n; ++i) {
        for (std::int64_t t = 0; t < info.threads; ++t) {
            const MmctReturn& r = results[t][i];
            if (!r.black_flag) info.empty_threads[i]++;
            if (r.count > 0) info.best_count[i] = std::max(info.best_count[i], r.count);
        }
        const bool countset_nonempty = info.best_count[i] > 0;
        if (countset_nonempty &&
            static_cast<double>(info.empty_threads[i]) > static_cast<double>(info.threads) / 2.0) {
            counts_[i] = std::max(counts_[i], info.best_count[i]);
        }
    }
    info.count_after = counts_;
    K_ *= 2;
    return info;
}

LlmcResult run_llmc(const LlmcConfig& cfg) {
    LlmcDriver driver(cfg);
    LlmcResult out;
    int it = 0;
    while (true) {
        if (cfg.iterations > 0 && it >= cfg.iterations) break;
        if (cfg.cap_K > 0 && driver.current_K() > cfg.cap_K) break;
        if (cfg.iterations <= 0 && cfg.cap_K <= 0) break;  // need some cap
        out.iterations.push_back(driver.step());
        it++;
    }
    out.counts = driver.counts();
    out.total_rounds = driver.total_rounds();
    return out;
}

}  // namespace adn
