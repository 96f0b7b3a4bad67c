#include "adn/mmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adn {

const char* to_string(Status s) {
    switch (s) {
        case Status::probing: return "probing";
        case Status::low: return "low";
        case Status::high: return "high";
        case Status::done: return "done";
    }
    return "?";
}

double potential_update(double phi, std::span<const double> inbox_phis, std::int64_t d) {
    double buf[64];
    std::vector<double> big;
    const std::size_t m = inbox_phis.size();
    double* v = buf;
    if (m > 64) {
        big.resize(m);
        v = big.data();
    }
    std::copy(inbox_phis.begin(), inbox_phis.end(), v);
    std::sort(v, v + m);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += v[i];
    return phi + (s - static_cast<double>(m) * phi) / static_cast<double>(d);
}

Status classify_rho(double rho, std::int64_t k, std::int64_t ell, double gamma) {
    const double margin = std::pow(static_cast<double>(k), -gamma);
    const double base = static_cast<double>(k - ell);
    if (rho < base * (1.0 - margin)) return Status::high;
    if (rho > base * (1.0 + margin)) return Status::low;
    return Status::done;
}

NodeState make_node(const ProtocolConfig& cfg, bool black) {
    NodeState s;
    s.black = black;
    s.black_flag = cfg.mmct && black;
    s.est = EstimateState::initial(cfg.ell_param);
    s.params = derive_epoch_params(s.est.k, cfg.ell_param, cfg.epsilon, cfg.mode);
    s.phi = black ? 0.0 : static_cast<double>(cfg.ell_param);
    return s;
}

MmcMessage node_message(const NodeState& s) {
    MmcMessage m;
    m.status = s.status;
    m.black_flag = s.black_flag;
    m.phi = s.segment == Segment::averaging ? s.phi : 0.0;
    return m;
}

namespace {

void reinit_epoch(const ProtocolConfig& cfg, NodeState& s) {
    s.status = Status::probing;
    s.phi = s.black ? 0.0 : static_cast<double>(cfg.ell_param);
    s.rho = 0.0;
    s.segment = Segment::averaging;
    s.phase = 1;
    s.round_in_phase = 1;
    s.dissem_round = 1;
    s.params = derive_epoch_params(s.est.k, cfg.ell_param, cfg.epsilon, cfg.mode);
}

void epoch_end(const ProtocolConfig& cfg, NodeState& s) {
    if (s.status == Status::done) {
        s.segment = cfg.mmct ? Segment::idle : Segment::stopped;
        return;
    }
    // whites that heard nothing move on as "low"
    const EstimateOutcome outcome =
        s.status == Status::high ? EstimateOutcome::high : EstimateOutcome::low;
    if (cfg.mmct) {
        EstimateState next;
        try {
            next = update_estimate(outcome, s.est);
        } catch (const std::runtime_error&) {
            s.frozen = true;  // degenerate scaled run; idle out and return <0,b>
            s.segment = Segment::idle;
            return;
        }
        s.est = next;
        if (s.est.k > cfg.cap_K) {
            s.segment = Segment::idle;
            return;
        }
    } else {
        s.est = update_estimate(outcome, s.est);
    }
    reinit_epoch(cfg, s);
}

void advance_averaging(const ProtocolConfig& cfg, NodeState& s, std::span<const MmcMessage> inbox) {
    const double ell = static_cast<double>(cfg.ell_param);
    bool all_probing = true;
    for (const auto& m : inbox) {
        if (m.status != Status::probing) {
            all_probing = false;
            break;
        }
    }
    if (s.status == Status::probing && static_cast<std::int64_t>(inbox.size()) <= s.params.d - 1 &&
        all_probing) {
        double buf[64];
        std::vector<double> big;
        double* v = buf;
        if (inbox.size() > 64) {
            big.resize(inbox.size());
            v = big.data();
        }
        for (std::size_t i = 0; i < inbox.size(); ++i) v[i] = inbox[i].phi;
        s.phi = potential_update(s.phi, std::span<const double>(v, inbox.size()), s.params.d);
    } else {
        s.status = Status::low;
        s.phi = ell;
    }

    if (++s.round_in_phase <= s.params.r) return;
    // phase boundary
    s.round_in_phase = 1;
    if (s.phase == 1 && s.phi > s.params.tau) {
        s.status = Status::low;
        s.phi = ell;
    }
    if (s.black && s.status == Status::probing) {
        s.rho += s.phi;
        s.phi = 0.0;
    }
    if (++s.phase <= s.params.p) return;
    // epoch's averaging part done
    if (s.black && s.status == Status::probing) {
        s.status = classify_rho(s.rho, s.est.k, cfg.ell_param, s.params.gamma);
    }
    s.segment = Segment::dissemination;
    s.dissem_round = 1;
}

void advance_dissemination(const ProtocolConfig& cfg, NodeState& s,
                           std::span<const MmcMessage> inbox) {
    if (!s.black) {
        // adopt the first non-probing status in canonical inbox order
        Status heard = Status::probing;
        for (const auto& m : inbox) {
            if (m.status == Status::probing) continue;
            if (heard == Status::probing) {
                heard = m.status;
            } else if (heard != m.status) {
                if (cfg.strict_dissemination) {
                    throw std::runtime_error("conflicting non-probing statuses heard by a white node");
                }
                heard = std::min(heard, m.status);
            }
        }
        if (heard != Status::probing) {
            if (cfg.strict_dissemination && s.status != Status::probing && s.status != heard) {
                throw std::runtime_error("dissemination conflicts with an already-held status");
            }
            s.status = heard;
        }
    }
    if (++s.dissem_round > s.params.d) epoch_end(cfg, s);
}

}  // namespace

void node_advance(const ProtocolConfig& cfg, NodeState& s, std::span<const MmcMessage> inbox) {
    if (s.segment == Segment::stopped) return;
    s.rounds_executed++;
    if (cfg.mmct && !s.black) {
        for (const auto& m : inbox) {
            if (m.black_flag) {
                s.black_flag = true;
                break;
            }
        }
    }
    switch (s.segment) {
        case Segment::averaging:
            advance_averaging(cfg, s, inbox);
            break;
        case Segment::dissemination:
            advance_dissemination(cfg, s, inbox);
            break;
        case Segment::idle:
        case Segment::stopped:
            break;
    }
}

std::pair<NodeState, MmcMessage> mmc_round(const ProtocolConfig& cfg, const NodeState& s,
                                           std::span<const MmcMessage> inbox) {
    MmcMessage sent = node_message(s);
    NodeState next = s;
    node_advance(cfg, next, inbox);
    return {std::move(next), sent};
}

MmctReturn mmct_result(const NodeState& s) {
    return MmctReturn{s.status == Status::done ? s.est.k : 0, s.black_flag};
}

std::uint64_t node_skip_low_epoch_tail(const ProtocolConfig& cfg, NodeState& s) {
    if (s.status != Status::low) throw std::logic_error("epoch-tail skip requires status=low");
    std::uint64_t remaining = 0;
    if (s.segment == Segment::averaging) {
        remaining = static_cast<std::uint64_t>(s.params.r - s.round_in_phase + 1) +
                    static_cast<std::uint64_t>(s.params.p - s.phase) * s.params.r +
                    static_cast<std::uint64_t>(s.params.d);
    } else if (s.segment == Segment::dissemination) {
        remaining = static_cast<std::uint64_t>(s.params.d - s.dissem_round + 1);
    } else {
        throw std::logic_error("epoch-tail skip outside an epoch");
    }
    s.rounds_executed += remaining;
    epoch_end(cfg, s);
    return remaining;
}

}  // namespace adn
