// spinmoments: collective-spin moment and entanglement-criterion toolkit.
//
// Subcommands: state, moment, criterion, scan, bound, budget.
// Exit codes: 0 success, 1 computation error, 2 invalid input.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinmoments/criteria.hpp"
#include "spinmoments/json_io.hpp"
#include "spinmoments/moments.hpp"
#include "spinmoments/parallel.hpp"
#include "spinmoments/sepbound.hpp"
#include "spinmoments/states.hpp"
#include "spinmoments/stats.hpp"
#include "spinmoments/version.hpp"

namespace sm = spinmoments;
using sm::json;

namespace {

void emit(const json& payload, const std::string& out_path) {
    const std::string text = payload.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        sm::write_file(out_path, text);
}

void emit_csv(const std::string& csv, const json& config, const std::string& out_path) {
    sm::write_file(out_path, csv);
    json meta{{"tool_version", sm::kVersion}, {"config", config}};
    sm::write_file(out_path + ".meta.json", meta.dump(2) + "\n");
}

json base_config(const std::string& command) {
    return json{{"command", command}, {"threads", sm::thread_count()}};
}

struct StateArgs {
    std::string family, out, input;
    int n = 0, m = 0, pairings = 1;
    double x = 0.0, y = 0.0, p = 0.0;
    std::uint64_t seed = 0;
    bool flipped = false;
    std::vector<double> angles;
};

int run_state(const StateArgs& a) {
    json config = base_config("state");
    config["family"] = a.family;
    json payload;
    if (a.family == "dicke") {
        config["n"] = a.n;
        config["m"] = a.m;
        payload = sm::to_json(sm::dicke(a.n, a.m));
    } else if (a.family == "phased-dicke") {
        config["n"] = a.n;
        config["flipped"] = a.flipped;
        payload = sm::to_json(sm::phased_dicke(a.n, a.flipped));
    } else if (a.family == "ghz") {
        config["n"] = a.n;
        payload = sm::to_json(sm::ghz(a.n));
    } else if (a.family == "singlet") {
        config["n"] = a.n;
        config["pairings"] = a.pairings;
        config["seed"] = a.seed;
        payload = sm::to_json(sm::singlet_state(a.n, a.pairings, a.seed));
    } else if (a.family == "mixed-family") {
        config["n"] = a.n;
        config["x"] = a.x;
        config["y"] = a.y;
        payload = sm::to_json(sm::mixed_family(a.n, a.x, a.y));
    } else if (a.family == "product") {
        if (a.angles.empty() || a.angles.size() % 2 != 0)
            throw sm::OutOfRange("state: --angles needs theta,phi pairs");
        sm::BlochVectorSet set;
        for (std::size_t i = 0; i + 1 < a.angles.size(); i += 2)
            set.angles.push_back({a.angles[i], a.angles[i + 1]});
        config["angles"] = a.angles;
        payload = sm::to_json(sm::product_state(set));
    } else if (a.family == "depolarized") {
        if (a.input.empty()) throw sm::OutOfRange("state: --family depolarized needs --input");
        config["input"] = a.input;
        config["p"] = a.p;
        payload = sm::to_json(sm::depolarize(sm::load_state(a.input), a.p));
    } else {
        throw sm::OutOfRange("state: unknown family " + a.family);
    }
    payload["tool_version"] = sm::kVersion;
    payload["config"] = config;
    emit(payload, a.out);
    return 0;
}

struct MomentArgs {
    std::string state_path, out, mode = "direction";
    int obs = 0, r = 1;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    bool explicit_spec = false;
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
};

int run_moment(const MomentArgs& a) {
    const sm::DensityMatrix rho = sm::load_state(a.state_path);
    sm::MomentSpec spec;
    if (a.explicit_spec) {
        spec = {a.alpha, a.beta, a.gamma, a.r};
    } else if (a.obs == 1) {
        spec = sm::MomentSpec::obs1(rho.structure.n_parties);
    } else if (a.obs == 2) {
        spec = sm::MomentSpec::obs2();
    } else if (a.obs == 4) {
        spec = sm::MomentSpec::obs4(rho.structure.n_parties);
    } else {
        throw sm::OutOfRange("moment: pass --obs 1|2|4 or explicit --alpha/--beta/--gamma");
    }
    spec.order = a.r;
    const sm::SampleMode mode =
        a.mode == "unitary" ? sm::SampleMode::unitary : sm::SampleMode::direction;
    const sm::MomentEstimate est = sm::moment_mc(rho, spec, a.samples, a.seed, mode);
    json payload = sm::to_json(est, spec, a.seed);
    json config = base_config("moment");
    config["state"] = a.state_path;
    config["samples"] = a.samples;
    config["seed"] = a.seed;
    config["mode"] = a.mode;
    config["r"] = a.r;
    if (a.obs != 0) config["obs"] = a.obs;
    payload["tool_version"] = sm::kVersion;
    payload["config"] = config;
    emit(payload, a.out);
    return 0;
}

struct CriterionArgs {
    std::string obs, state_path, out, mode = "analytic";
    int d = 3, m = 2, ensemble_n = 0;
    double tol = 1e-9;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
};

int run_criterion(const CriterionArgs& a) {
    const sm::DensityMatrix rho = sm::load_state(a.state_path);
    const int n = rho.structure.n_parties;
    sm::CriterionVerdict verdict;
    if (a.obs == "1") {
        if (a.mode == "mc") {
            const sm::MomentSpec base = sm::MomentSpec::obs1(n);
            double m[3], se2 = 0.0;
            for (int r = 1; r <= 3; ++r) {
                sm::MomentSpec spec = base;
                spec.order = r;
                const auto est = sm::moment_mc(rho, spec, a.samples, a.seed + static_cast<std::uint64_t>(r),
                                               sm::SampleMode::direction);
                m[r - 1] = est.mean;
                se2 += est.std_error * est.std_error;
            }
            verdict = sm::obs1_decide(m[0], m[1], m[2], a.tol);
            verdict.diagnostics["m1"] = m[0];
            verdict.diagnostics["m2"] = m[1];
            verdict.diagnostics["m3"] = m[2];
            sm::apply_statistics(verdict, std::sqrt(se2));
        } else {
            const auto m = sm::obs1_moments(rho);
            verdict = sm::obs1_decide(m[0], m[1], m[2], a.tol);
        }
    } else if (a.obs == "2") {
        if (a.mode == "mc") {
            const auto est =
                sm::moment_mc(rho, sm::MomentSpec::obs2(), a.samples, a.seed, sm::SampleMode::direction);
            verdict.criterion = "obs2";
            verdict.value = est.mean;
            verdict.bound = n / 2.0;
            verdict.margin = verdict.bound - verdict.value;
            verdict.violated = verdict.margin > a.tol;
            verdict.diagnostics["tolerance"] = a.tol;
            sm::apply_statistics(verdict, est.std_error);
        } else {
            verdict = sm::obs2_check(rho, a.tol);
        }
    } else if (a.obs == "2q") {
        verdict = sm::obs2_qudit_check(rho, rho.structure.local_dim, a.tol);
    } else if (a.obs == "3") {
        verdict = sm::obs3_check(rho, a.tol);
    } else if (a.obs == "4") {
        const int en = a.ensemble_n > 0 ? a.ensemble_n : n / 2;
        verdict = sm::obs4_check(rho, en, a.tol);
    } else if (a.obs == "multi") {
        if (a.m < 2 || n % a.m != 0)
            throw sm::OutOfRange("criterion: --m must divide the particle count");
        verdict = sm::multi_ensemble_check(rho, a.m, n / a.m, a.tol);
    } else {
        throw sm::OutOfRange("criterion: unknown --obs " + a.obs);
    }
    json payload = sm::to_json(verdict);
    json config = base_config("criterion");
    config["obs"] = a.obs;
    config["state"] = a.state_path;
    config["mode"] = a.mode;
    config["tol"] = a.tol;
    if (a.mode == "mc") {
        config["samples"] = a.samples;
        config["seed"] = a.seed;
    }
    payload["tool_version"] = sm::kVersion;
    payload["config"] = config;
    emit(payload, a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collective-spin moments, entanglement criteria, and measurement budgets"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    StateArgs sa;
    CLI::App* state = app.add_subcommand("state", "write a state file");
    state->add_option("--family", sa.family, "state family")->required();
    state->add_option("--n", sa.n, "particle count");
    state->add_option("--m", sa.m, "excitation count (dicke)");
    state->add_option("--x", sa.x, "mixed-family weight x");
    state->add_option("--y", sa.y, "mixed-family weight y");
    state->add_option("--p", sa.p, "depolarization weight");
    state->add_option("--pairings", sa.pairings, "matchings mixed into a singlet");
    state->add_option("--seed", sa.seed, "rng seed");
    state->add_flag("--flipped", sa.flipped, "flip the phased Dicke state");
    state->add_option("--angles", sa.angles, "theta,phi pairs for product states")->delimiter(',');
    state->add_option("--input", sa.input, "input state path (depolarized)");
    state->add_option("--out", sa.out, "output path (default stdout)");

    MomentArgs ma;
    CLI::App* moment = app.add_subcommand("moment", "Monte Carlo moment of f_U");
    moment->add_option("--state", ma.state_path, "state file")->required();
    moment->add_option("--obs", ma.obs, "preset coefficients: 1, 2 or 4");
    moment->add_option("--alpha", ma.alpha, "variance coefficient");
    moment->add_option("--beta", ma.beta, "mean-square coefficient");
    auto* gopt = moment->add_option("--gamma", ma.gamma, "constant offset");
    moment->add_option("--r", ma.r, "moment order");
    moment->add_option("--samples", ma.samples, "Monte Carlo samples");
    moment->add_option("--seed", ma.seed, "rng seed");
    moment->add_option("--mode", ma.mode, "direction|unitary")
        ->check(CLI::IsMember({"direction", "unitary"}));
    moment->add_option("--out", ma.out, "output path (default stdout)");

    CriterionArgs ca;
    CLI::App* criterion = app.add_subcommand("criterion", "entanglement criterion verdict");
    criterion->add_option("--obs", ca.obs, "1|2|2q|3|4|multi")->required();
    criterion->add_option("--state", ca.state_path, "state file")->required();
    criterion->add_option("--mode", ca.mode, "analytic|mc")
        ->check(CLI::IsMember({"analytic", "mc"}));
    criterion->add_option("--m", ca.m, "ensemble count (multi)");
    criterion->add_option("--ensemble-n", ca.ensemble_n, "qubits per ensemble (obs 4)");
    criterion->add_option("--tol", ca.tol, "violation tolerance");
    criterion->add_option("--samples", ca.samples, "Monte Carlo samples (mc mode)");
    criterion->add_option("--seed", ca.seed, "rng seed (mc mode)");
    criterion->add_option("--out", ca.out, "output path (default stdout)");

    int scan_n = 3;
    double scan_step = 0.01, scan_tol = 1e-9;
    std::string scan_out;
    CLI::App* scan = app.add_subcommand("scan", "region scan of the phased-Dicke noise family");
    scan->add_option("--n", scan_n, "particle count (3..6)")->required();
    scan->add_option("--step", scan_step, "grid step")->required();
    scan->add_option("--tol", scan_tol, "violation tolerance");
    scan->add_option("--out", scan_out, "CSV output path")->required();

    int bound_n = 3;
    std::uint64_t bound_seed = 0;
    std::size_t bound_restarts = 0;
    double bound_tol = 1e-8;
    bool bisep = false;
    std::string bound_out;
    CLI::App* bound = app.add_subcommand("bound", "optimize the separable bound");
    bound->add_option("--n", bound_n, "particle count (3..8)")->required();
    bound->add_option("--restarts", bound_restarts, "restarts (default 200/500 by N)");
    bound->add_option("--seed", bound_seed, "rng seed");
    bound->add_option("--tol", bound_tol, "convergence tolerance");
    bound->add_flag("--bisep", bisep, "three-qubit biseparable bound instead");
    bound->add_option("--out", bound_out, "output path (default stdout)");

    int budget_n = 0, kmin = 2, kmax = 2, pstar_max = 0;
    double budget_gamma = 0.95, budget_p = 0.0;
    std::string budget_out;
    CLI::App* budget = app.add_subcommand("budget", "measurement budget curve");
    budget->add_option("--n", budget_n, "particle count")->required();
    budget->add_option("--gamma", budget_gamma, "confidence level");
    budget->add_option("--p", budget_p, "noise level (< 2/3)");
    budget->add_option("--kmin", kmin, "smallest shots-per-setting");
    budget->add_option("--kmax", kmax, "largest shots-per-setting");
    budget->add_option("--pstar-max", pstar_max, "also write critical points up to this N");
    budget->add_option("--out", budget_out, "CSV output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (const char* env = std::getenv("SPINMOMENTS_THREADS")) threads = std::atoi(env);
    sm::set_thread_count(threads);
    try {
        if (*state) return run_state(sa);
        if (*moment) {
            if (ma.obs == 0 && gopt->count() == 0 &&
                moment->get_option("--alpha")->count() == 0)
                throw sm::OutOfRange("moment: pass --obs or explicit coefficients");
            ma.explicit_spec = ma.obs == 0;
            return run_moment(ma);
        }
        if (*criterion) return run_criterion(ca);
        if (*scan) {
            const auto rows = sm::scan_mixed_family(scan_n, scan_step, scan_tol);
            json config = base_config("scan");
            config["n"] = scan_n;
            config["step"] = scan_step;
            config["tol"] = scan_tol;
            emit_csv(sm::scan_csv(rows), config, scan_out);
            return 0;
        }
        if (*bound) {
            json config = base_config("bound");
            config["n"] = bound_n;
            config["seed"] = bound_seed;
            config["tol"] = bound_tol;
            config["bisep"] = bisep;
            json payload;
            if (bisep) {
                if (bound_n != 3) throw sm::OutOfRange("bound: --bisep requires --n 3");
                const std::size_t restarts = bound_restarts ? bound_restarts : 200;
                config["restarts"] = restarts;
                payload = sm::to_json(sm::optimize_bisep_bound_3q(restarts, bound_seed, bound_tol),
                                      bound_n, 2.0);
            } else {
                const std::size_t restarts =
                    bound_restarts ? bound_restarts : sm::default_restarts(bound_n);
                config["restarts"] = restarts;
                payload = sm::to_json(
                    sm::optimize_fully_sep_bound(bound_n, restarts, bound_seed, bound_tol),
                    bound_n, sm::conjectured_bound(bound_n));
            }
            payload["tool_version"] = sm::kVersion;
            payload["config"] = config;
            emit(payload, bound_out);
            return 0;
        }
        if (*budget) {
            const sm::BudgetCurve curve =
                sm::budget_curve(budget_n, budget_gamma, budget_p, kmin, kmax);
            json config = base_config("budget");
            config["n"] = budget_n;
            config["gamma"] = budget_gamma;
            config["p"] = budget_p;
            config["kmin"] = kmin;
            config["kmax"] = kmax;
            config["asymptote_m_tot"] = curve.asymptote;
            config["argmin_k"] = curve.rows[curve.argmin_index].k;
            emit_csv(sm::budget_csv(curve.rows), config, budget_out);
            if (pstar_max >= 2) {
                std::string pstar_path = budget_out;
                const std::string suffix = ".csv";
                if (pstar_path.size() > suffix.size() &&
                    pstar_path.compare(pstar_path.size() - suffix.size(), suffix.size(), suffix) == 0)
                    pstar_path.resize(pstar_path.size() - suffix.size());
                pstar_path += ".pstar.csv";
                config["pstar_max"] = pstar_max;
                emit_csv(sm::pstar_csv(pstar_max), config, pstar_path);
            }
            return 0;
        }
    } catch (const sm::SpinError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.invalid_input() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
