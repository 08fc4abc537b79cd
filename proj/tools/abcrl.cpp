// abcrl: command-line front end for the experiment harness and verification suites.
//
//   abcrl experiment offline   --domain pendulum --runs 10 --output results.csv
//   abcrl experiment histogram --domain pendulum --epsilons 1,0.1
//   abcrl verify corollary1 | theorem1 | remark1
//   abcrl abc sample --domain oracle --epsilon 0
//
// Every subcommand accepts --config FILE with key=value lines naming long
// options without the dashes; flags given on the command line win. Exit status: 0 success, 1 bad arguments, 2 runtime
// failure (including a verification that does not hold).

#include <abcrl/abcrl.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace abcrl;

/// Relative output paths are placed under $ABCRL_OUTPUT_DIR when it is set.
std::string output_path(const std::string& path) {
    const char* dir = std::getenv("ABCRL_OUTPUT_DIR");
    if (!dir || !*dir || path.empty() || std::filesystem::path(path).is_absolute()) return path;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / path).string();
}

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string config_file_unused;

CLI::App* leaf(CLI::App& parent, const std::string& name, const std::string& help) {
    CLI::App* sub = parent.add_subcommand(name, help);
    sub->add_option("--config", config_file_unused, "key=value configuration file; command-line flags win");
    return sub;
}

/// Long option name a command-line token sets, or "" if it is not an option.
std::string flag_name(const std::string& token) {
    if (token == "-o") return "output";
    if (token.size() < 3 || token.compare(0, 2, "--") != 0) return {};
    return token.substr(2, token.find('=') - 2);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/**
 * Expands `--config FILE` into `--key value` arguments appended after the
 * command line, skipping keys the command line already sets. Lines are
 * `key=value`; blank lines and `#` comments are ignored. A boolean value
 * turns a flag on (true/yes/on/1) or leaves it off.
 */
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::string file;
    std::set<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[++i];
            continue;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            continue;
        }
        given.insert(flag_name(args[i]));
        out.push_back(args[i]);
    }
    if (file.empty()) return out;
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read config file '" + file + "'");
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(file + ":" + std::to_string(n) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || given.contains(key)) continue;
        if (value == "true" || value == "yes" || value == "on") {
            out.push_back("--" + key);
        } else if (value == "false" || value == "no" || value == "off") {
            continue;
        } else {
            out.push_back("--" + key);
            std::istringstream words(value);
            for (std::string w; words >> w;) out.push_back(w);
        }
    }
    return out;
}

// -- experiment offline -----------------------------------------------------

struct OfflineArgs {
    std::string domain;
    ExperimentConfig cfg;
    double u_range = 0.0;
    std::string summary;
};

void add_offline(CLI::App& experiment, OfflineArgs& a) {
    CLI::App* cmd = leaf(experiment, "offline", "LSPI vs ABC-LSPI over training-set sizes");
    auto& c = a.cfg;
    cmd->add_option("--domain", a.domain, "mountain-car or pendulum")->required();
    cmd->add_option("--train-sizes", c.train_sizes, "observed episode counts")->delimiter(',');
    cmd->add_option("--runs", c.runs, "independent runs per size")->capture_default_str();
    cmd->add_option("--gamma", c.gamma, "discount factor")->capture_default_str();
    cmd->add_option("--epsilon", c.abc.epsilon, "initial ABC threshold")->capture_default_str();
    cmd->add_option("--max-samples", c.abc.max_samples, "ABC candidates per round")->capture_default_str();
    cmd->add_option("--max-doublings", c.abc.max_doublings, "threshold doublings before giving up")
        ->capture_default_str();
    cmd->add_option("--delta", c.hoeffding.delta, "Hoeffding confidence parameter")->capture_default_str();
    cmd->add_option("--n-traj", c.hoeffding.n_sim_trajectories, "simulated episodes per candidate")
        ->capture_default_str();
    cmd->add_option("--u-range", a.u_range, "utility range in the Hoeffding correction (default: reward width)");
    cmd->add_option("--n-rollouts", c.n_rollouts, "model rollouts for ABC-LSPI training")->capture_default_str();
    cmd->add_option("--rollout-horizon", c.rollout_horizon, "steps per model rollout")->capture_default_str();
    cmd->add_option("--eval-trajectories", c.eval_trajectories, "evaluation episodes at the true parameters")
        ->capture_default_str();
    cmd->add_option("--lspi-max-iter", c.lspi.max_iter, "LSPI iteration cap")->capture_default_str();
    cmd->add_option("--lspi-tol", c.lspi.tol, "LSPI weight-change tolerance")->capture_default_str();
    cmd->add_option("--ridge", c.lspi.ridge, "LSTDQ ridge term")->capture_default_str();
    cmd->add_option("--seed", c.master_seed, "master seed")->capture_default_str();
    cmd->add_option("--output,-o", c.output, "result CSV")->capture_default_str();
    cmd->add_option("--summary", a.summary, "also write mean and bootstrap CI per (algorithm, n_train)");
    cmd->add_option("--bootstrap", c.bootstrap_samples, "bootstrap resamples")->capture_default_str();
    cmd->add_option("--level", c.ci_level, "confidence level")->capture_default_str();
    cmd->add_flag("--timing", c.record_timing, "fill the cpu_seconds column");
    cmd->callback([&a, cmd] {
        if (cmd->count("--u-range")) a.cfg.u_range = a.u_range;
    });
}

int run_offline(OfflineArgs& a) {
    a.cfg.domain = parse_domain(a.domain);
    if (a.cfg.domain == Domain::oracle) throw UsageError("offline experiment needs mountain-car or pendulum");
    try {
        a.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto rows = run_offline_experiment(a.cfg);
    write_file(output_path(a.cfg.output), [&](std::ostream& os) { write_results_csv(os, rows); });
    std::size_t failed = 0;
    for (const auto& r : rows)
        if (!r.value) ++failed;
    std::cout << "wrote " << rows.size() << " rows (" << failed << " failed) to " << output_path(a.cfg.output)
              << '\n';
    if (!a.summary.empty()) {
        const auto summary = summarize(rows, a.cfg.bootstrap_samples, a.cfg.ci_level, a.cfg.master_seed);
        write_file(output_path(a.summary), [&](std::ostream& os) { write_summary_csv(os, summary); });
        write_summary_csv(std::cout, summary);
    }
    return 0;
}

// -- experiment histogram ---------------------------------------------------

struct HistogramArgs {
    std::string domain;
    HistogramConfig cfg;
    double u_range = 0.0;
    std::string output = "histogram.csv";
};

void add_histogram(CLI::App& experiment, HistogramArgs& a) {
    CLI::App* cmd = leaf(experiment, "histogram", "value of the behaviour policy in accepted pendulum models");
    auto& c = a.cfg;
    cmd->add_option("--domain", a.domain, "pendulum")->required();
    cmd->add_option("--epsilons", c.epsilons, "acceptance thresholds")->delimiter(',');
    cmd->add_option("--n-train", c.n_train, "observed episodes")->capture_default_str();
    cmd->add_option("--candidates", c.candidates, "prior draws per threshold")->capture_default_str();
    cmd->add_option("--reestimate-rollouts", c.reestimate_rollouts, "episodes to re-estimate each accepted value")
        ->capture_default_str();
    cmd->add_option("--true-value-rollouts", c.true_value_rollouts, "episodes for the true value")
        ->capture_default_str();
    cmd->add_option("--gamma", c.gamma, "discount factor")->capture_default_str();
    cmd->add_option("--delta", c.hoeffding.delta, "Hoeffding confidence parameter")->capture_default_str();
    cmd->add_option("--n-traj", c.hoeffding.n_sim_trajectories, "simulated episodes per candidate")
        ->capture_default_str();
    cmd->add_option("--u-range", a.u_range, "utility range in the Hoeffding correction (default: reward width)");
    cmd->add_option("--seed", c.master_seed, "master seed")->capture_default_str();
    cmd->add_option("--output,-o", a.output, "sectioned CSV")->capture_default_str();
    cmd->callback([&a, cmd] {
        if (cmd->count("--u-range")) a.cfg.u_range = a.u_range;
    });
}

int run_histogram(HistogramArgs& a) {
    if (parse_domain(a.domain) != Domain::pendulum) throw UsageError("histogram study runs on pendulum only");
    for (double e : a.cfg.epsilons)
        if (!(e >= 0.0)) throw UsageError("epsilons must be nonnegative");
    if (a.cfg.candidates < 1 || a.cfg.reestimate_rollouts < 1 || a.cfg.true_value_rollouts < 1 || a.cfg.n_train < 1)
        throw UsageError("counts must be at least 1");
    const auto res = run_histogram_study(a.cfg);
    write_file(output_path(a.output), [&](std::ostream& os) { write_histogram_csv(os, res); });
    std::cout << "true value " << format_real(res.true_value) << '\n';
    for (const auto& s : res.sections)
        std::cout << "epsilon " << format_real(s.epsilon) << ": " << s.accepted.size() << " of " << s.attempts
                  << " accepted\n";
    return 0;
}

// -- verify -----------------------------------------------------------------

struct VerifyArgs {
    ExactMatchConfig corollary;
    std::size_t kl_bound_cases = 100;
    std::size_t theorem_length = 4;
    std::uint64_t theorem_seed = 1;
    std::string theorem_output;
    std::size_t independence_configurations = 1000;
    std::uint64_t remark_seed = 1;
};

void add_verify(CLI::App& app, VerifyArgs& a) {
    CLI::App* verify = app.add_subcommand("verify", "exact checks on the discrete oracle");
    verify->require_subcommand(1);

    CLI::App* c1 = leaf(*verify, "corollary1", "epsilon = 0 rejection sampling against the exact posterior");
    c1->add_option("--candidates", a.corollary.candidates, "prior draws")->capture_default_str();
    c1->add_option("--length", a.corollary.length, "observed history length")->capture_default_str();
    c1->add_option("--seed", a.corollary.seed, "seed")->capture_default_str();

    CLI::App* t1 = leaf(*verify, "theorem1", "KL bound over randomised (history, epsilon, statistic) cases");
    t1->add_option("--cases", a.kl_bound_cases, "random configurations")->capture_default_str();
    t1->add_option("--length", a.theorem_length, "history length")->capture_default_str();
    t1->add_option("--seed", a.theorem_seed, "seed")->capture_default_str();
    t1->add_option("--output,-o", a.theorem_output, "per-case CSV report");

    CLI::App* r1 = leaf(*verify, "remark1", "policy independence of the posterior");
    r1->add_option("--configurations", a.independence_configurations, "random configurations")->capture_default_str();
    r1->add_option("--seed", a.remark_seed, "seed")->capture_default_str();
}

int run_corollary(const VerifyArgs& a) {
    const auto r = run_exact_match_check(a.corollary);
    std::cout << "accepted " << r.accepted << " of " << r.attempts << '\n' << "model,exact,sampled\n";
    for (std::size_t m = 0; m < r.exact.size(); ++m)
        std::cout << format_real(a.corollary.models[m]) << ',' << format_real(r.exact[m]) << ','
                  << format_real(r.sampled[m]) << '\n';
    const bool ok = r.total_variation < 0.05;
    std::cout << "total_variation=" << format_real(r.total_variation) << " holds=" << (ok ? "true" : "false") << '\n';
    return ok ? 0 : 2;
}

int run_theorem(const VerifyArgs& a) {
    const auto cases = run_kl_bound_suite(a.kl_bound_cases, a.theorem_length, a.theorem_seed);
    std::size_t held = 0;
    std::vector<KlBoundReport> reports;
    for (const auto& c : cases) {
        reports.push_back(c.report);
        if (c.report.holds) ++held;
    }
    if (!a.theorem_output.empty())
        write_file(output_path(a.theorem_output), [&](std::ostream& os) { write_kl_bound_csv(os, reports); });
    std::cout << "cases=" << cases.size() << " held=" << held
              << " holds=" << (held == cases.size() ? "true" : "false") << '\n';
    return held == cases.size() ? 0 : 2;
}

int run_remark(const VerifyArgs& a) {
    const auto s = run_policy_independence_check(a.independence_configurations, a.remark_seed);
    std::cout << "configurations=" << s.configurations << " independent=" << s.independent
              << " holds=" << (s.independent == s.configurations ? "true" : "false") << '\n';
    return s.independent == s.configurations ? 0 : 2;
}

// -- abc sample -------------------------------------------------------------

struct SampleArgs {
    std::string domain;
    AbcConfig abc{.epsilon = 1e-2, .max_samples = 1000, .target = {}, .record_candidates = true};
    std::size_t n_train = 10;
    double gamma = 0.99;
    HoeffdingConfig hoeffding{};
    double u_range = 0.0;
    std::size_t oracle_length = 10;
    std::uint64_t seed = 0;
    std::string output = "candidates.csv";
};

void add_sample(CLI::App& app, SampleArgs& a) {
    CLI::App* abc = app.add_subcommand("abc", "approximate Bayesian computation");
    abc->require_subcommand(1);
    CLI::App* cmd = leaf(*abc, "sample", "rejection sampling; logs every candidate");
    cmd->add_option("--domain", a.domain, "mountain-car, pendulum or oracle")->required();
    cmd->add_option("--epsilon", a.abc.epsilon, "acceptance threshold")->capture_default_str();
    cmd->add_option("--max-samples", a.abc.max_samples, "prior draws")->capture_default_str();
    cmd->add_option("--n-train", a.n_train, "observed episodes (continuous domains)")->capture_default_str();
    cmd->add_option("--gamma", a.gamma, "discount factor")->capture_default_str();
    cmd->add_option("--delta", a.hoeffding.delta, "Hoeffding confidence parameter")->capture_default_str();
    cmd->add_option("--n-traj", a.hoeffding.n_sim_trajectories, "simulated episodes per candidate")
        ->capture_default_str();
    cmd->add_option("--u-range", a.u_range, "utility range in the Hoeffding correction (default: reward width)");
    cmd->add_option("--length", a.oracle_length, "observed history length (oracle)")->capture_default_str();
    cmd->add_option("--seed", a.seed, "seed")->capture_default_str();
    cmd->add_option("--output,-o", a.output, "candidate CSV")->capture_default_str();
}

template <class E>
std::vector<CandidateRecord> sample_continuous(const SampleArgs& a, bool u_range_set) {
    const ModelParams star = theta_star(a.domain == "pendulum" ? Domain::pendulum : Domain::mountain_car);
    const E real = make_environment<E>(star);
    const UniformRandomPolicy policy(real.action_count());
    Rng data_rng(derive_seed(a.seed, {hash_name("observed")}));
    const auto observed = collect_history(real, policy, a.n_train, E::horizon, data_rng);
    const ReplaySimulator<E, UniformRandomPolicy> sim(policy, a.hoeffding.n_sim_trajectories, E::horizon);
    const HoeffdingStatistic stat(DiscountFactor(a.gamma), u_range_set ? a.u_range : real.reward_range(),
                                  a.hoeffding);
    return abc_sample(PriorBox::centered(star), observed, sim, stat, a.abc, derive_seed(a.seed, {hash_name("abc")}))
        .candidates;
}

int run_sample(const SampleArgs& a, bool u_range_set) {
    const Domain d = parse_domain(a.domain);
    try {
        a.abc.validate();
        a.hoeffding.validate();
        DiscountFactor check(a.gamma);
        (void)check;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::vector<CandidateRecord> records;
    switch (d) {
    case Domain::pendulum: records = sample_continuous<Pendulum>(a, u_range_set); break;
    case Domain::mountain_car: records = sample_continuous<MountainCar>(a, u_range_set); break;
    case Domain::oracle: {
        const auto prior = DiscretePrior::uniform_over({{0.2}, {0.5}, {0.8}});
        const UniformRandomPolicy policy(2);
        Rng data_rng(derive_seed(a.seed, {hash_name("observed")}));
        const auto observed = oracle_history(0.8, policy, a.oracle_length, data_rng);
        const ReplaySimulator<DiscreteOracle, UniformRandomPolicy> sim(policy, 1, a.oracle_length);
        records = abc_sample(prior, observed, sim, TransitionCountStatistic(2, 2), a.abc,
                             derive_seed(a.seed, {hash_name("abc")}))
                      .candidates;
        break;
    }
    }
    std::size_t accepted = 0;
    for (const auto& r : records)
        if (r.accepted) ++accepted;
    write_file(output_path(a.output), [&](std::ostream& os) { write_candidates_csv(os, records); });
    std::cout << "accepted " << accepted << " of " << records.size() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ABC reinforcement-learning experiments", "abcrl"};
    app.require_subcommand(1);

    CLI::App* experiment = app.add_subcommand("experiment", "offline comparison and value histograms");
    experiment->require_subcommand(1);
    OfflineArgs offline;
    HistogramArgs histogram;
    add_offline(*experiment, offline);
    add_histogram(*experiment, histogram);

    VerifyArgs verify;
    add_verify(app, verify);

    SampleArgs sample;
    add_sample(app, sample);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (experiment->parsed()) {
            if (experiment->got_subcommand("offline")) return run_offline(offline);
            return run_histogram(histogram);
        }
        if (app.got_subcommand("verify")) {
            CLI::App* v = app.get_subcommand("verify");
            if (v->got_subcommand("corollary1")) return run_corollary(verify);
            if (v->got_subcommand("theorem1")) return run_theorem(verify);
            return run_remark(verify);
        }
        CLI::App* cmd = app.get_subcommand("abc")->get_subcommand("sample");
        return run_sample(sample, cmd->count("--u-range") > 0);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
