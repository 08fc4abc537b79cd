#pragma once

#include <abcrl/abc.hpp>
#include <abcrl/analysis.hpp>
#include <abcrl/core.hpp>
#include <abcrl/environments.hpp>
#include <abcrl/lspi.hpp>
#include <abcrl/statistics.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcrl {

enum class Domain { mountain_car, pendulum, oracle };

inline std::string to_string(Domain d) {
    switch (d) {
    case Domain::mountain_car: return "mountain-car";
    case Domain::pendulum: return "pendulum";
    case Domain::oracle: return "oracle";
    }
    return "unknown";
}

inline Domain parse_domain(const std::string& s) {
    if (s == "mountain-car") return Domain::mountain_car;
    if (s == "pendulum") return Domain::pendulum;
    if (s == "oracle") return Domain::oracle;
    throw std::invalid_argument("unknown domain '" + s + "' (expected mountain-car, pendulum or oracle)");
}

/// True parameters of the continuous domains.
inline ModelParams theta_star(Domain d) {
    switch (d) {
    case Domain::mountain_car: return MountainCarParams{}.to_vector();
    case Domain::pendulum: return PendulumParams{}.to_vector();
    case Domain::oracle: return {0.8};
    }
    return {};
}

struct ExperimentConfig {
    Domain domain = Domain::pendulum;
    std::vector<std::size_t> train_sizes{1, 10, 100, 1000};
    std::size_t runs = 10;
    double gamma = 0.99;
    AbcConfig abc{.epsilon = 1e-2, .max_samples = 1000, .target = 1, .epsilon_doubling = true, .max_doublings = 20};
    HoeffdingConfig hoeffding{.delta = 0.1, .n_sim_trajectories = 100};
    /// Utility range in the Hoeffding correction; unset means the per-step reward width.
    std::optional<double> u_range;
    std::size_t n_rollouts = 2000;
    /// Length cap of each model rollout used to train ABC-LSPI.
    std::size_t rollout_horizon = 100;
    std::size_t eval_trajectories = 100;
    LspiConfig lspi{};
    std::uint64_t master_seed = 0;
    std::string output = "results.csv";
    /// cpu_seconds is written as NA unless set, keeping output reproducible.
    bool record_timing = false;
    std::size_t bootstrap_samples = 1000;
    double ci_level = 0.95;

    void validate() const {
        if (train_sizes.empty()) throw std::invalid_argument("train_sizes must not be empty");
        for (auto n : train_sizes)
            if (n < 1) throw std::invalid_argument("train sizes must be at least 1");
        if (runs < 1) throw std::invalid_argument("runs must be at least 1");
        if (n_rollouts < 1 || rollout_horizon < 1) throw std::invalid_argument("rollout counts must be at least 1");
        if (eval_trajectories < 1) throw std::invalid_argument("eval_trajectories must be at least 1");
        if (bootstrap_samples < 1) throw std::invalid_argument("bootstrap_samples must be at least 1");
        if (u_range && !(*u_range > 0.0)) throw std::invalid_argument("u_range must be positive");
        DiscountFactor check(gamma);
        (void)check;
        abc.validate();
        hoeffding.validate();
    }
};

struct ResultRow {
    std::string domain;
    std::string algorithm;
    std::size_t n_train = 0;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    std::optional<double> value;
    std::optional<double> cpu_seconds;
    std::string status = "ok";
};

inline constexpr const char* result_header = "domain,algorithm,n_train,run,seed,value,cpu_seconds,status";

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << result_header << '\n';
    for (const auto& r : rows)
        os << r.domain << ',' << r.algorithm << ',' << r.n_train << ',' << r.run << ',' << r.seed << ','
           << (r.value ? format_real(*r.value) : "NA") << ','
           << (r.cpu_seconds ? format_real(*r.cpu_seconds) : "NA") << ',' << r.status << '\n';
}

/// Seed of one (domain, algorithm, n_train, run) cell; see derive_seed.
inline std::uint64_t cell_seed(std::uint64_t master, const std::string& domain, const std::string& algorithm,
                               std::size_t n_train, std::size_t run) {
    return derive_seed(master, {hash_name(domain), hash_name(algorithm), n_train, run});
}

namespace detail {

inline double cpu_now() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

inline std::string sanitise_status(std::string msg) {
    for (char& c : msg)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return "failed:" + msg;
}

template <class E>
double reward_width(const ExperimentConfig& cfg, const E& env) {
    return cfg.u_range ? *cfg.u_range : env.reward_range();
}

/// LSPI on the given transitions, RBF basis over env's state box.
template <class E>
GreedyPolicy<RbfBasis> fit_lspi(const E& basis_env,
                                const std::vector<TransitionSample<typename E::observation_type>>& samples,
                                const ExperimentConfig& cfg) {
    RbfBasis basis = RbfBasis::for_environment(basis_env);
    auto res = lspi_train(std::span<const TransitionSample<typename E::observation_type>>(samples), basis,
                          DiscountFactor(cfg.gamma), cfg.lspi);
    return GreedyPolicy<RbfBasis>(std::move(basis), std::move(res.weights));
}

template <class E>
std::vector<ResultRow> run_offline_cell(const ExperimentConfig& cfg, std::size_t n_train, std::size_t run) {
    const std::string domain = to_string(cfg.domain);
    const ModelParams star = theta_star(cfg.domain);
    const E real = make_environment<E>(star);
    const DiscountFactor gamma(cfg.gamma);
    const UniformRandomPolicy explore(real.action_count());

    Rng data_rng(derive_seed(cfg.master_seed, {hash_name("observed"), hash_name(domain), n_train, run}));
    const auto observed = collect_history(real, explore, n_train, E::horizon, data_rng);
    const std::uint64_t eval_seed = derive_seed(cfg.master_seed, {hash_name("eval"), hash_name(domain), n_train, run});

    std::vector<ResultRow> rows;
    auto run_algorithm = [&](const std::string& algorithm, auto&& train) {
        ResultRow row;
        row.domain = domain;
        row.algorithm = algorithm;
        row.n_train = n_train;
        row.run = run;
        row.seed = cell_seed(cfg.master_seed, domain, algorithm, n_train, run);
        const double start = cpu_now();
        try {
            const auto policy = train(row.seed);
            Rng eval_rng(eval_seed);
            row.value = estimate_value(real, policy, cfg.eval_trajectories, E::horizon, gamma, eval_rng);
        } catch (const std::exception& e) {
            row.status = sanitise_status(e.what());
        }
        if (cfg.record_timing) row.cpu_seconds = cpu_now() - start;
        rows.push_back(std::move(row));
    };

    run_algorithm("lspi", [&](std::uint64_t) { return fit_lspi(real, transitions_of(observed), cfg); });

    run_algorithm("abc-lspi", [&](std::uint64_t seed) {
        const auto prior = PriorBox::centered(star);
        const ReplaySimulator<E, UniformRandomPolicy> sim(explore, cfg.hoeffding.n_sim_trajectories, E::horizon);
        const HoeffdingStatistic stat(gamma, reward_width(cfg, real), cfg.hoeffding);
        auto solver = [&](const ModelParams& theta, std::uint64_t solver_seed) {
            const E model = make_environment<E>(theta);
            Rng rng(solver_seed);
            return fit_lspi(model, collect_model_rollouts(model, cfg.n_rollouts, cfg.rollout_horizon, rng), cfg);
        };
        return abc_rl(prior, observed, sim, stat, cfg.abc, solver, seed).policy;
    });
    return rows;
}

} // namespace detail

/**
 * @brief Offline comparison of LSPI and ABC-LSPI.
 *
 * For every training size and run: observe n_train uniform-random episodes at
 * the true parameters, fit LSPI on those transitions, and fit ABC-LSPI on
 * rollouts from one model accepted by the Hoeffding statistic; evaluate both
 * policies on the true environment with a shared evaluation seed. Rows come
 * out in (n_train, run, algorithm) order. A failing cell is recorded with a
 * failed status and does not stop the sweep.
 */
inline std::vector<ResultRow> run_offline_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ResultRow> rows;
    for (auto n_train : cfg.train_sizes)
        for (std::size_t run = 0; run < cfg.runs; ++run) {
            std::vector<ResultRow> cell;
            switch (cfg.domain) {
            case Domain::mountain_car: cell = detail::run_offline_cell<MountainCar>(cfg, n_train, run); break;
            case Domain::pendulum: cell = detail::run_offline_cell<Pendulum>(cfg, n_train, run); break;
            case Domain::oracle: throw std::invalid_argument("offline experiment needs mountain-car or pendulum");
            }
            for (auto& r : cell) rows.push_back(std::move(r));
        }
    return rows;
}

struct SummaryRow {
    std::string domain;
    std::string algorithm;
    std::size_t n_train = 0;
    std::size_t runs = 0;
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

inline constexpr const char* summary_header = "domain,algorithm,n_train,runs,mean,ci_lo,ci_hi";

/// Mean and percentile-bootstrap interval per (algorithm, n_train) over successful runs.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, std::size_t n_boot, double level,
                                         std::uint64_t master_seed) {
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    std::vector<std::pair<std::string, std::size_t>> order;
    std::string domain;
    for (const auto& r : rows) {
        domain = r.domain;
        const auto key = std::make_pair(r.algorithm, r.n_train);
        if (!groups.contains(key)) order.push_back(key);
        auto& g = groups[key];
        if (r.value) g.push_back(*r.value);
    }
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& v = groups[key];
        if (v.empty()) continue;
        SummaryRow s{domain, key.first, key.second, v.size()};
        for (double x : v) s.mean += x;
        s.mean /= static_cast<double>(v.size());
        Rng rng(derive_seed(master_seed, {hash_name("bootstrap"), hash_name(key.first), key.second}));
        std::tie(s.ci_lo, s.ci_hi) = bootstrap_ci(v, n_boot, level, rng);
        out.push_back(s);
    }
    return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << summary_header << '\n';
    for (const auto& s : rows)
        os << s.domain << ',' << s.algorithm << ',' << s.n_train << ',' << s.runs << ',' << format_real(s.mean) << ','
           << format_real(s.ci_lo) << ',' << format_real(s.ci_hi) << '\n';
}

// ---------------------------------------------------------------------------
// Value histograms of accepted pendulum models

struct HistogramConfig {
    std::vector<double> epsilons{1.0, 0.1};
    std::size_t n_train = 1000;
    std::size_t candidates = 10000;
    std::size_t reestimate_rollouts = 10000;
    std::size_t true_value_rollouts = 10000;
    double gamma = 0.99;
    HoeffdingConfig hoeffding{.delta = 0.1, .n_sim_trajectories = 100};
    std::optional<double> u_range;
    std::uint64_t master_seed = 0;
};

struct HistogramEntry {
    std::size_t candidate_index = 0;
    ModelParams theta;
    double distance = 0.0;
    double value_in_run = 0.0;
    double value_reestimated = 0.0;
};

struct HistogramSection {
    double epsilon = 0.0;
    std::size_t attempts = 0;
    std::vector<HistogramEntry> accepted;
    double mean_value_in_run = 0.0;
    double mean_value_reestimated = 0.0;
};

struct HistogramResult {
    double true_value = 0.0;
    std::vector<HistogramSection> sections;
};

/**
 * For each epsilon, rejection-samples pendulum models against n_train
 * uniform-random episodes at the true parameters (same candidate stream for
 * every epsilon). Each accepted model's value for the behaviour policy is
 * reported twice: the in-run estimate from the statistic and a re-estimate
 * with reestimate_rollouts fresh episodes.
 */
inline HistogramResult run_histogram_study(const HistogramConfig& cfg) {
    if (cfg.epsilons.empty()) throw std::invalid_argument("histogram: no epsilon values");
    const DiscountFactor gamma(cfg.gamma);
    const ModelParams star = theta_star(Domain::pendulum);
    const Pendulum real(PendulumParams::from_vector(star));
    const UniformRandomPolicy behaviour(real.action_count());

    HistogramResult out;
    Rng truth_rng(derive_seed(cfg.master_seed, {hash_name("true-value")}));
    out.true_value = estimate_value(real, behaviour, cfg.true_value_rollouts, Pendulum::horizon, gamma, truth_rng);

    Rng data_rng(derive_seed(cfg.master_seed, {hash_name("observed"), hash_name("pendulum"), cfg.n_train}));
    const auto observed = collect_history(real, behaviour, cfg.n_train, Pendulum::horizon, data_rng);

    const auto prior = PriorBox::centered(star);
    const ReplaySimulator<Pendulum, UniformRandomPolicy> sim(behaviour, cfg.hoeffding.n_sim_trajectories,
                                                             Pendulum::horizon);
    const HoeffdingStatistic stat(gamma, cfg.u_range ? *cfg.u_range : real.reward_range(), cfg.hoeffding);
    const std::uint64_t abc_seed = derive_seed(cfg.master_seed, {hash_name("histogram-abc")});

    std::map<std::size_t, double> reestimated;
    for (double eps : cfg.epsilons) {
        AbcConfig abc;
        abc.epsilon = eps;
        abc.max_samples = cfg.candidates;
        const auto set = abc_sample(prior, observed, sim, stat, abc, abc_seed);
        HistogramSection sec;
        sec.epsilon = eps;
        sec.attempts = set.attempts;
        for (const auto& s : set.accepted) {
            auto it = reestimated.find(s.candidate_index);
            if (it == reestimated.end()) {
                Rng rng(derive_seed(cfg.master_seed, {hash_name("reestimate"), s.candidate_index}));
                const Pendulum model(PendulumParams::from_vector(s.theta));
                const double v = estimate_value(model, behaviour, cfg.reestimate_rollouts, Pendulum::horizon, gamma, rng);
                it = reestimated.emplace(s.candidate_index, v).first;
            }
            sec.accepted.push_back({s.candidate_index, s.theta, s.distance, s.statistic.mean_utility, it->second});
            sec.mean_value_in_run += s.statistic.mean_utility;
            sec.mean_value_reestimated += it->second;
        }
        if (!sec.accepted.empty()) {
            sec.mean_value_in_run /= static_cast<double>(sec.accepted.size());
            sec.mean_value_reestimated /= static_cast<double>(sec.accepted.size());
        }
        out.sections.push_back(std::move(sec));
    }
    return out;
}

/**
 * One section per epsilon: a `#` summary line, the column header, then one
 * row per accepted model. A section with no accepted models has only the
 * summary line and the header.
 */
inline void write_histogram_csv(std::ostream& os, const HistogramResult& res) {
    os << "# true_value=" << format_real(res.true_value) << '\n';
    for (const auto& sec : res.sections) {
        os << "# epsilon=" << format_real(sec.epsilon) << " attempts=" << sec.attempts
           << " accepted=" << sec.accepted.size();
        if (!sec.accepted.empty())
            os << " mean_value_in_run=" << format_real(sec.mean_value_in_run)
               << " mean_value_reestimated=" << format_real(sec.mean_value_reestimated);
        os << '\n';
        os << "epsilon,candidate_index,distance,value_in_run,value_reestimated";
        for (std::size_t i = 0; i < PendulumParams::size; ++i) os << ",theta_" << i;
        os << '\n';
        for (const auto& e : sec.accepted) {
            os << format_real(sec.epsilon) << ',' << e.candidate_index << ',' << format_real(e.distance) << ','
               << format_real(e.value_in_run) << ',' << format_real(e.value_reestimated);
            for (double t : e.theta) os << ',' << format_real(t);
            os << '\n';
        }
    }
}

// ---------------------------------------------------------------------------

/// candidate_index, theta_0.., distance, accepted, epsilon_round.
inline void write_candidates_csv(std::ostream& os, const std::vector<CandidateRecord>& records) {
    const std::size_t dim = records.empty() ? 0 : records.front().theta.size();
    os << "candidate_index";
    for (std::size_t i = 0; i < dim; ++i) os << ",theta_" << i;
    os << ",distance,accepted,epsilon_round\n";
    for (const auto& r : records) {
        os << r.candidate_index;
        for (double t : r.theta) os << ',' << format_real(t);
        os << ',' << format_real(r.distance) << ',' << (r.accepted ? 1 : 0) << ',' << r.round << '\n';
    }
}

/// Writes to path, creating or truncating it.
template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    writer(f);
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace abcrl
