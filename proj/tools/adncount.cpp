// adncount: experiment harness for the counting protocols.
//   run       execute a protocol, write a summary (and optionally a trace)
//   verify    run the invariant checkers on a stored trace
//   bound     print the worst-case round schedule for (n, ell, epsilon)
//   fixtures  write the gadget topologies as JSON
//
// Exit codes: 0 ok, 1 config error, 2 invariant violation (verify),
// 3 round-budget exhaustion.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "adn/analysis.hpp"
#include "adn/engine.hpp"
#include "adn/llmc.hpp"
#include "adn/prng.hpp"

namespace {

using nlohmann::json;

int log_level() {
    const char* env = std::getenv("ADN_COUNT_LOG");
    if (env == nullptr) return 1;  // warn
    const std::string v = env;
    if (v == "error") return 0;
    if (v == "warn") return 1;
    if (v == "info") return 2;
    if (v == "debug") return 3;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[adncount] " << msg << '\n';
}

struct RunOptions {
    std::string protocol = "mmc";
    int n = 0;
    std::int64_t ell = 1;
    double epsilon = 0.5;
    std::string adversary = "static_path";
    std::string topology_file;
    std::uint64_t seed = 0;
    std::string mode = "paper";
    double s_p = 0.01;
    double s_r = 0.01;
    std::uint64_t round_budget = 0;
    std::string trace_path;
    std::string trace_verbosity = "none";
    std::string out_path;
    // mmct
    std::int64_t K = 8;
    std::int64_t ell_prime = 1;
    std::string blacks;  // comma-separated node ids
    // llmc
    double zeta = 0.5;
    int iterations = 0;
    std::int64_t cap_K = 0;
    // gadget_cycle adversary
    int gx = 1;
    int gell = 0;
    int gwhites = 0;
};

adn::ParamMode make_mode(const RunOptions& opt) {
    if (opt.mode == "paper") return adn::ParamMode::paper_mode();
    if (opt.mode == "scaled") return adn::ParamMode::scaled(opt.s_p, opt.s_r);
    throw std::invalid_argument("mode must be paper or scaled");
}

adn::AdversarySpec make_adversary(const RunOptions& opt, std::uint64_t master_seed) {
    adn::AdversarySpec spec;
    spec.kind = adn::adversary_kind_from_string(opt.adversary);
    spec.seed = adn::derive_stream(master_seed, "adversary");
    spec.x = opt.gx;
    spec.ell_per_gadget = opt.gell;
    spec.whites_per_gadget = opt.gwhites;
    if (spec.kind == adn::AdversaryKind::fixed) {
        if (opt.topology_file.empty()) {
            throw std::invalid_argument("--adversary fixed needs --topology-file");
        }
        std::ifstream in(opt.topology_file);
        if (!in) throw std::invalid_argument("cannot open " + opt.topology_file);
        std::stringstream ss;
        ss << in.rdbuf();
        spec.fixed_topology = adn::Topology::from_json(ss.str());
    }
    if (spec.kind == adn::AdversaryKind::adaptive_hook) {
        throw std::invalid_argument("adaptive_hook is a library-level adversary");
    }
    return spec;
}

json mode_json(const adn::ParamMode& m) {
    json j;
    j["kind"] = m.paper ? "paper" : "scaled";
    if (!m.paper) {
        j["s_p"] = m.s_p;
        j["s_r"] = m.s_r;
        j["guarantee"] = "none (scaled parameters carry no correctness guarantee)";
    }
    return j;
}

json config_json(const RunOptions& opt) {
    json j;
    j["protocol"] = opt.protocol;
    j["n"] = opt.n;
    j["epsilon"] = opt.epsilon;
    j["adversary"] = opt.adversary;
    if (!opt.topology_file.empty()) j["topology_file"] = opt.topology_file;
    j["seed"] = opt.seed;
    j["mode"] = opt.mode;
    if (opt.mode == "scaled") {
        j["s_p"] = opt.s_p;
        j["s_r"] = opt.s_r;
    }
    j["round_budget"] = opt.round_budget;
    j["trace_verbosity"] = opt.trace_verbosity;
    if (opt.protocol == "mmc") j["ell"] = opt.ell;
    if (opt.protocol == "mmct") {
        j["K"] = opt.K;
        j["ell_prime"] = opt.ell_prime;
        j["blacks"] = opt.blacks;
    }
    if (opt.protocol == "llmc") {
        j["zeta"] = opt.zeta;
        j["iterations"] = opt.iterations;
        j["cap_K"] = opt.cap_K;
    }
    if (opt.adversary == "gadget_cycle") {
        j["gadget_x"] = opt.gx;
        j["gadget_ell"] = opt.gell;
        j["gadget_whites"] = opt.gwhites;
    }
    return j;
}

json check_json(const adn::CheckResult& r) {
    json j;
    j["check"] = r.check;
    j["pass"] = r.pass;
    if (!r.pass) {
        j["first_violation_round"] = r.first_violation_round;
        j["details"] = r.details;
    }
    return j;
}

void write_output(const std::string& path, const json& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::vector<adn::Role> parse_blacks(const std::string& blacks, int n) {
    std::vector<adn::Role> roles(n, adn::Role::white);
    std::stringstream ss(blacks);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const int idx = std::stoi(item);
        if (idx < 0 || idx >= n) throw std::invalid_argument("black node index out of range");
        roles[idx] = adn::Role::black;
    }
    return roles;
}

int cmd_run(const RunOptions& opt) {
    const adn::ParamMode mode = make_mode(opt);
    json summary;
    summary["config"] = config_json(opt);
    summary["mode"] = mode_json(mode);

    if (opt.protocol == "mmc") {
        adn::WorldConfig cfg;
        cfg.n = opt.n;
        cfg.ell = opt.ell;
        cfg.epsilon = opt.epsilon;
        cfg.mode = mode;
        cfg.adversary = make_adversary(opt, opt.seed);
        cfg.round_budget = opt.round_budget;
        if (cfg.adversary.kind == adn::AdversaryKind::fixed &&
            !cfg.adversary.fixed_topology.roles.empty()) {
            cfg.roles = cfg.adversary.fixed_topology.roles;
        }

        adn::InvariantChecker checker(cfg.n, cfg.ell, cfg.epsilon);
        adn::DigestObserver digest;
        adn::RunResult result;
        adn::RunTrace trace;
        const bool full_trace = opt.trace_verbosity == "full";
        if (full_trace) {
            adn::TraceRecorder recorder(cfg.n, cfg.ell, cfg.epsilon);
            adn::MultiObserver<adn::InvariantChecker, adn::DigestObserver, adn::TraceRecorder> obs(
                checker, digest, recorder);
            result = adn::run_mmc(cfg, obs);
            trace = recorder.take();
        } else {
            adn::MultiObserver<adn::InvariantChecker, adn::DigestObserver> obs(checker, digest);
            result = adn::run_mmc(cfg, obs);
        }

        summary["result"]["completed"] = result.completed;
        summary["result"]["total_rounds"] = result.total_rounds;
        summary["result"]["counts"] = result.counts;
        auto& epochs = summary["result"]["epochs"] = json::array();
        for (const auto& ep : result.epochs) {
            json e;
            e["k"] = ep.k;
            e["first_round"] = ep.first_round;
            e["rounds"] = ep.rounds;
            e["alarms"] = {{"degree", ep.alarms_degree},
                           {"received", ep.alarms_received},
                           {"threshold", ep.alarms_threshold}};
            e["all_low_round"] = ep.all_low_round;
            e["completed_probing"] = ep.completed_probing;
            e["classify"] = adn::to_string(ep.classify_outcome);
            e["rho_black"] = ep.rho_black;
            epochs.push_back(std::move(e));
        }
        auto& checks = summary["invariants"] = json::array();
        for (const auto& r : checker.results()) checks.push_back(check_json(r));
        {
            std::ostringstream hex;
            hex << std::hex << digest.digest();
            summary["digest"] = hex.str();
        }
        if (full_trace && !opt.trace_path.empty()) {
            trace.config_json = summary["config"].dump();
            std::ofstream out(opt.trace_path);
            if (!out) throw std::invalid_argument("cannot write " + opt.trace_path);
            adn::write_trace(out, trace);
            log_info("trace written to " + opt.trace_path);
        }
        write_output(opt.out_path, summary);
        return result.completed ? 0 : 3;
    }

    if (opt.protocol == "mmct") {
        adn::MmctConfig cfg;
        cfg.n = opt.n;
        cfg.K = opt.K;
        cfg.ell_prime = opt.ell_prime;
        cfg.epsilon = opt.epsilon;
        cfg.mode = mode;
        cfg.adversary = make_adversary(opt, opt.seed);
        cfg.roles = parse_blacks(opt.blacks, opt.n);
        const adn::MmctRunResult res = adn::run_mmct(cfg);
        summary["result"]["round_max"] = res.round_max;
        summary["result"]["rounds_executed"] = res.rounds_executed;
        auto& rets = summary["result"]["returns"] = json::array();
        for (const auto& r : res.returns) {
            rets.push_back({{"count", r.count}, {"black_flag", r.black_flag}});
        }
        write_output(opt.out_path, summary);
        return 0;
    }

    if (opt.protocol == "llmc") {
        adn::LlmcConfig cfg;
        cfg.n = opt.n;
        cfg.zeta = opt.zeta;
        cfg.epsilon = opt.epsilon;
        cfg.mode = mode;
        cfg.adversary = make_adversary(opt, opt.seed);
        cfg.seed = opt.seed;
        cfg.iterations = opt.iterations;
        cfg.cap_K = opt.cap_K;
        const adn::LlmcResult res = adn::run_llmc(cfg);
        summary["result"]["counts"] = res.counts;
        summary["result"]["total_rounds"] = res.total_rounds;
        auto& iters = summary["result"]["iterations"] = json::array();
        for (const auto& it : res.iterations) {
            json e;
            e["K"] = it.K;
            e["threads"] = it.threads;
            e["round_max"] = it.round_max;
            e["blacks_per_thread"] = it.blacks_per_thread;
            e["empty_threads"] = it.empty_threads;
            e["best_count"] = it.best_count;
            e["count_after"] = it.count_after;
            iters.push_back(std::move(e));
        }
        write_output(opt.out_path, summary);
        return 0;
    }
    throw std::invalid_argument("protocol must be mmc, mmct or llmc");
}

int cmd_verify(const std::string& trace_path, const std::string& report_path) {
    std::ifstream in(trace_path);
    if (!in) throw std::invalid_argument("cannot open " + trace_path);
    const adn::RunTrace trace = adn::read_trace(in);
    const std::vector<adn::CheckResult> checks = {adn::check_conservation(trace),
                                                  adn::check_potential_bounds(trace)};
    json report;
    report["trace"] = trace_path;
    auto& arr = report["checks"] = json::array();
    bool ok = true;
    for (const auto& r : checks) {
        arr.push_back(check_json(r));
        ok = ok && r.pass;
    }
    report["pass"] = ok;
    write_output(report_path, report);
    return ok ? 0 : 2;
}

int cmd_bound(int n, std::int64_t ell, double epsilon) {
    const adn::Schedule sched = adn::worst_case_schedule(n, ell, epsilon);
    json j;
    j["n"] = n;
    j["ell"] = ell;
    j["epsilon"] = epsilon;
    j["E"] = sched.E;
    j["B"] = sched.B;
    auto& per = j["per_epoch_rounds"] = json::object();
    for (const auto& [k, rounds] : sched.per_epoch_rounds) per[std::to_string(k)] = rounds;
    j["total_bound"] = sched.total_bound;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_fixtures(const std::string& dir, int lambda, int x, int ell, int whites) {
    auto dump = [&](const std::string& name, const adn::Topology& t) {
        const std::string path = dir + "/" + name + ".json";
        std::ofstream out(path);
        if (!out) throw std::invalid_argument("cannot write " + path);
        out << t.to_json() << '\n';
        log_info("wrote " + path);
    };
    dump("gadget_g1_lambda" + std::to_string(lambda), adn::build_gadget_g1(lambda));
    dump("gadget_g2_lambda" + std::to_string(lambda), adn::build_gadget_g2(lambda));
    dump("gadget_cycle_x" + std::to_string(x) + "_ell" + std::to_string(ell),
         adn::build_cycle_of_gadgets(x, ell, whites));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anonymous dynamic network counting protocols"};
    app.require_subcommand(1);

    RunOptions opt;
    auto* run = app.add_subcommand("run", "execute a protocol");
    run->add_option("--protocol", opt.protocol, "mmc | mmct | llmc");
    run->add_option("--n", opt.n, "network size")->required();
    run->add_option("--ell", opt.ell, "number of black nodes (mmc)");
    run->add_option("--epsilon", opt.epsilon, "epsilon > 0");
    run->add_option("--adversary", opt.adversary, "topology adversary kind");
    run->add_option("--topology-file", opt.topology_file, "topology JSON for --adversary fixed");
    run->add_option("--seed", opt.seed, "64-bit master seed");
    run->add_option("--mode", opt.mode, "paper | scaled");
    run->add_option("--s-p", opt.s_p, "scaled: multiplier for p");
    run->add_option("--s-r", opt.s_r, "scaled: multiplier for r");
    run->add_option("--round-budget", opt.round_budget, "abort after this many rounds (0 = off)");
    run->add_option("--trace", opt.trace_path, "JSONL trace output path");
    run->add_option("--trace-verbosity", opt.trace_verbosity, "none | full");
    run->add_option("--out", opt.out_path, "summary JSON path (default stdout)");
    run->add_option("--K", opt.K, "mmct: estimate cap (power of two)");
    run->add_option("--ell-prime", opt.ell_prime, "mmct: aimed black count");
    run->add_option("--blacks", opt.blacks, "mmct: comma-separated black node ids");
    run->add_option("--zeta", opt.zeta, "llmc: failure budget");
    run->add_option("--iterations", opt.iterations, "llmc: iteration cap");
    run->add_option("--cap-K", opt.cap_K, "llmc: stop once K exceeds this");
    run->add_option("--gadget-x", opt.gx, "gadget_cycle: number of gadgets");
    run->add_option("--gadget-ell", opt.gell, "gadget_cycle: blacks per gadget");
    run->add_option("--gadget-whites", opt.gwhites, "gadget_cycle: whites per gadget (ell=0)");

    std::string trace_path;
    std::string report_path;
    auto* verify = app.add_subcommand("verify", "check a stored trace");
    verify->add_option("--trace", trace_path, "JSONL trace path")->required();
    verify->add_option("--report", report_path, "report JSON path (default stdout)");

    int bn = 0;
    std::int64_t bell = 1;
    double beps = 0.5;
    auto* bound = app.add_subcommand("bound", "print the worst-case schedule");
    bound->add_option("--n", bn, "network size")->required();
    bound->add_option("--ell", bell, "black nodes");
    bound->add_option("--epsilon", beps, "epsilon");

    std::string fdir = ".";
    int flambda = 2;
    int fx = 3;
    int fell = 2;
    int fwhites = 4;
    auto* fixtures = app.add_subcommand("fixtures", "write gadget topologies");
    fixtures->add_option("--out-dir", fdir, "output directory");
    fixtures->add_option("--lambda", flambda, "gadget lambda");
    fixtures->add_option("--x", fx, "cycle: gadget count");
    fixtures->add_option("--ell-per-gadget", fell, "cycle: blacks per gadget");
    fixtures->add_option("--whites", fwhites, "cycle: whites per gadget when ell=0");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opt);
        if (verify->parsed()) return cmd_verify(trace_path, report_path);
        if (bound->parsed()) return cmd_bound(bn, bell, beps);
        if (fixtures->parsed()) return cmd_fixtures(fdir, flambda, fx, fell, fwhites);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
