#pragma once

#include <abcrl/abc.hpp>
#include <abcrl/analysis.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace abcrl {

// Randomised and exhaustive checks of the inference results on the discrete
// oracle, shared by the CLI `verify` commands and the acceptance suite.

inline std::vector<DiscreteOracleParams> oracle_models(const std::vector<double>& probs) {
    std::vector<DiscreteOracleParams> out;
    for (double p : probs) out.push_back({p});
    return out;
}

/// One oracle trajectory of the given length at success probability p.
template <class P>
OracleHistory oracle_history(double p, const P& policy, std::size_t length, Rng& rng) {
    return collect_history(DiscreteOracle({p}), policy, 1, length, rng);
}

// ---------------------------------------------------------------------------

struct ExactMatchConfig {
    std::vector<double> models{0.2, 0.5, 0.8};
    double true_p = 0.8;
    std::size_t length = 10;
    std::size_t candidates = 100000;
    std::uint64_t seed = 1;
};

struct ExactMatchResult {
    DiscreteDistribution exact;
    DiscreteDistribution sampled;
    std::vector<std::size_t> accepted_per_model;
    std::size_t accepted = 0;
    std::size_t attempts = 0;
    double total_variation = 0.0;
};

/**
 * Rejection sampling at epsilon = 0 with the transition-count statistic,
 * compared against the enumerated posterior. Uniform prior over the models,
 * uniform-random behaviour policy.
 */
inline ExactMatchResult run_exact_match_check(const ExactMatchConfig& cfg) {
    const auto models = oracle_models(cfg.models);
    std::vector<ModelParams> support;
    for (const auto& m : models) support.push_back(m.to_vector());
    const auto prior = DiscretePrior::uniform_over(support);
    const UniformRandomPolicy policy(2);

    Rng data_rng(derive_seed(cfg.seed, {hash_name("observed")}));
    const OracleHistory observed = oracle_history(cfg.true_p, policy, cfg.length, data_rng);

    const ReplaySimulator<DiscreteOracle, UniformRandomPolicy> sim(policy, 1, cfg.length);
    const TransitionCountStatistic stat(2, 2);
    AbcConfig abc;
    abc.epsilon = 0.0;
    abc.max_samples = cfg.candidates;
    const auto set = abc_sample(prior, observed, sim, stat, abc, derive_seed(cfg.seed, {hash_name("abc")}));

    ExactMatchResult r;
    r.exact = exact_posterior(models, DiscreteDistribution::uniform(models.size()), observed);
    r.accepted_per_model.assign(models.size(), 0);
    for (const auto& s : set.accepted)
        for (std::size_t m = 0; m < models.size(); ++m)
            if (s.theta[0] == models[m].success_prob) ++r.accepted_per_model[m];
    r.accepted = set.accepted.size();
    r.attempts = set.attempts;
    if (r.accepted == 0) throw NoModelAccepted();
    std::vector<double> freq;
    for (auto c : r.accepted_per_model) freq.push_back(static_cast<double>(c));
    r.sampled = DiscreteDistribution::from_weights(freq);
    r.total_variation = total_variation(r.exact, r.sampled);
    return r;
}

// ---------------------------------------------------------------------------

struct PolicyIndependenceSummary {
    std::size_t configurations = 0;
    std::size_t independent = 0;
};

/**
 * Random oracle configurations: 2 to 4 models, random prior, a history of 1 to
 * 8 steps drawn from a random history-dependent policy, and two further random
 * policies with full support. Counts how many report policy independence.
 */
inline PolicyIndependenceSummary run_policy_independence_check(std::size_t configurations, std::uint64_t seed) {
    PolicyIndependenceSummary s;
    auto random_policy = [](Rng& rng) {
        const std::size_t len = 1 + uniform_index(rng, 4);
        std::vector<std::array<double, 2>> sched(len);
        for (auto& row : sched) row = {uniform(rng, 0.05, 0.95), uniform(rng, 0.05, 0.95)};
        return OracleTimedPolicy(std::move(sched));
    };
    for (std::size_t c = 0; c < configurations; ++c) {
        Rng rng(derive_seed(seed, {c}));
        const std::size_t n_models = 2 + uniform_index(rng, 3);
        std::vector<double> probs, weights;
        for (std::size_t m = 0; m < n_models; ++m) {
            probs.push_back(uniform(rng, 0.05, 0.95));
            weights.push_back(uniform(rng, 0.1, 1.0));
        }
        const auto models = oracle_models(probs);
        const auto prior = DiscreteDistribution::from_weights(weights);
        const auto behaviour = random_policy(rng);
        const OracleHistory h =
            oracle_history(probs[uniform_index(rng, n_models)], behaviour, 1 + uniform_index(rng, 8), rng);
        const auto a = random_policy(rng);
        const auto b = random_policy(rng);
        ++s.configurations;
        if (check_policy_independence(models, prior, h, a, b)) ++s.independent;
    }
    return s;
}

// ---------------------------------------------------------------------------

using OracleStatistic = std::variant<TransitionCountStatistic, AttemptSuccessStatistic>;

struct KlBoundCase {
    std::string statistic;
    std::size_t history_index = 0;
    KlBoundReport report;
};

/**
 * Exhaustive checks of the KL bound on the oracle with length-step histories,
 * models {0.2, 0.5, 0.8}, uniform prior and uniform-random policy. Each case
 * draws the observed history, the statistic (transition counts, or weighted
 * L1/L2 attempt-success counts) and epsilon (0 with probability 1/5, else
 * uniform up to the largest distance from h in the space).
 */
inline std::vector<KlBoundCase> run_kl_bound_suite(std::size_t cases, std::size_t length, std::uint64_t seed) {
    const auto models = oracle_models({0.2, 0.5, 0.8});
    const auto prior = DiscreteDistribution::uniform(models.size());
    const UniformRandomPolicy policy(2);
    const auto space = enumerate_oracle_histories(length, policy.id());
    std::vector<KlBoundCase> out;
    for (std::size_t c = 0; c < cases; ++c) {
        Rng rng(derive_seed(seed, {c}));
        KlBoundCase tc;
        tc.history_index = uniform_index(rng, space.size());
        const auto& h = space[tc.history_index];
        OracleStatistic stat = TransitionCountStatistic(2, 2);
        switch (uniform_index(rng, 3)) {
        case 0: tc.statistic = "transition-counts"; break;
        case 1:
            stat = AttemptSuccessStatistic(uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0));
            tc.statistic = "attempt-success-l1";
            break;
        default:
            stat = AttemptSuccessStatistic(uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0),
                                           AttemptSuccessStatistic::Norm::l2);
            tc.statistic = "attempt-success-l2";
            break;
        }
        tc.report = std::visit(
            [&](const auto& f) {
                const auto fh = f.compute(h);
                double max_d = 0.0;
                for (const auto& z : space) max_d = std::max(max_d, f.distance(fh, f.compute(z)));
                const double eps = bernoulli(rng, 0.2) ? 0.0 : uniform(rng, 0.0, max_d);
                return theorem1_check(models, prior, policy, f, h, eps, space);
            },
            stat);
        out.push_back(std::move(tc));
    }
    return out;
}

} // namespace abcrl
