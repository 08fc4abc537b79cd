#pragma once

#include <abcrl/core.hpp>
#include <abcrl/environments.hpp>
#include <abcrl/statistics.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcrl {

struct AbcConfig {
    double epsilon = 1e-2;
    std::size_t max_samples = 1000;
    /// Stop once this many candidates were accepted; unset means use all max_samples.
    std::optional<std::size_t> target;
    bool epsilon_doubling = false;
    std::size_t max_doublings = 20;
    /// Keep a log of every candidate, accepted or not.
    bool record_candidates = false;

    void validate() const {
        if (!(epsilon >= 0.0)) throw std::invalid_argument("abc: epsilon must be nonnegative");
        if (max_samples < 1) throw std::invalid_argument("abc: max_samples must be at least 1");
        if (target && *target < 1) throw std::invalid_argument("abc: target must be at least 1");
    }
};

/// Thrown when every doubling round came back empty.
class NoModelAccepted : public std::runtime_error {
public:
    NoModelAccepted() : std::runtime_error("no model accepted") {}
};

/**
 * Acceptance rule: distance strictly below epsilon, or an exact statistic
 * match (distance <= 0). The second clause makes epsilon = 0 mean "identical
 * statistics" instead of "never accept".
 */
inline bool abc_accepts(double distance, double epsilon) {
    return distance < epsilon || distance <= 0.0;
}

template <class Value>
struct AcceptedSample {
    std::size_t candidate_index = 0;
    std::size_t round = 0;
    ModelParams theta;
    double distance = 0.0;
    Value statistic{};
};

struct CandidateRecord {
    std::size_t candidate_index = 0;
    std::size_t round = 0;
    double epsilon = 0.0;
    ModelParams theta;
    double distance = 0.0;
    bool accepted = false;
};

template <class Value>
struct AcceptedSampleSet {
    std::vector<AcceptedSample<Value>> accepted;
    /// Candidates simulated, summed over all rounds.
    std::size_t attempts = 0;
    double final_epsilon = 0.0;
    std::uint64_t seed = 0;
    std::vector<CandidateRecord> candidates;
};

template <class P>
concept ParameterPrior = requires(const P& p, Rng& rng) {
    { p.sample(rng) } -> std::same_as<ModelParams>;
};

/// Generates a history from the model with the given parameters.
template <class S, class Obs>
concept HistorySimulator = requires(const S& s, const ModelParams& theta, Rng& rng) {
    { s(theta, rng) } -> std::same_as<History<Obs>>;
    { s.policy_id() } -> std::convertible_to<std::string>;
};

/**
 * Replays a fixed policy in a candidate model: n_trajectories episodes of at
 * most horizon steps each, drawn from the family member E(theta).
 */
template <Environment E, class P>
    requires Policy<P, typename E::observation_type>
class ReplaySimulator {
public:
    using observation_type = typename E::observation_type;

    ReplaySimulator(P policy, std::size_t n_trajectories, std::size_t horizon)
        : policy_(std::move(policy)), n_(n_trajectories), horizon_(horizon) {
        if (n_ < 1 || horizon_ < 1) throw std::invalid_argument("replay: need positive trajectory count and horizon");
    }

    History<observation_type> operator()(const ModelParams& theta, Rng& rng) const {
        return collect_history(make_environment<E>(theta), policy_, n_, horizon_, rng);
    }
    std::string policy_id() const { return policy_.id(); }
    const P& policy() const { return policy_; }

private:
    P policy_;
    std::size_t n_;
    std::size_t horizon_;
};

namespace detail {

/// One pass of rejection sampling at a fixed threshold. Candidate k of round r
/// draws both its parameters and its history from Rng(derive_seed(seed, {r, k})),
/// so the candidate stream does not depend on epsilon or on earlier candidates.
template <class Prior, class Obs, class Sim, class Stat>
void abc_round(const Prior& prior, const typename Stat::value_type& observed_stat, const Sim& simulate,
               const Stat& statistic, const AbcConfig& cfg, double epsilon, std::size_t round, std::uint64_t seed,
               AcceptedSampleSet<typename Stat::value_type>& out) {
    for (std::size_t k = 0; k < cfg.max_samples; ++k) {
        Rng rng(derive_seed(seed, {round, k}));
        ModelParams theta = prior.sample(rng);
        const History<Obs> h = simulate(theta, rng);
        auto value = statistic.compute(h);
        const double d = statistic.distance(observed_stat, value);
        const bool ok = abc_accepts(d, epsilon);
        ++out.attempts;
        if (cfg.record_candidates) out.candidates.push_back({k, round, epsilon, theta, d, ok});
        if (ok) out.accepted.push_back({k, round, std::move(theta), d, std::move(value)});
        if (cfg.target && out.accepted.size() >= *cfg.target) return;
    }
}

template <class Obs, class Sim>
void check_replay(const History<Obs>& observed, const Sim& simulate) {
    if (!observed.policy_id.empty() && observed.policy_id != simulate.policy_id())
        throw std::invalid_argument("abc: observed history was generated by '" + observed.policy_id +
                                    "' but the simulator replays '" + simulate.policy_id() + "'");
}

} // namespace detail

/**
 * @brief Rejection sampler over a prior of simulators.
 *
 * Draws up to cfg.max_samples candidate parameter vectors, simulates a history
 * for each under the observed history's policy, and keeps those whose
 * statistic is within cfg.epsilon of the observed one. Stops early once
 * cfg.target candidates have been accepted. An empty result is not an error.
 */
template <class Prior, class Obs, class Sim, class Stat>
    requires ParameterPrior<Prior> && HistorySimulator<Sim, Obs> && Statistic<Stat, Obs>
AcceptedSampleSet<typename Stat::value_type> abc_sample(const Prior& prior, const History<Obs>& observed,
                                                         const Sim& simulate, const Stat& statistic,
                                                         const AbcConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    detail::check_replay(observed, simulate);
    AcceptedSampleSet<typename Stat::value_type> out;
    out.seed = seed;
    out.final_epsilon = cfg.epsilon;
    const auto observed_stat = statistic.compute(observed);
    detail::abc_round<Prior, Obs>(prior, observed_stat, simulate, statistic, cfg, cfg.epsilon, 0, seed, out);
    return out;
}

/**
 * Rejection sampling with threshold doubling: whenever a full round of
 * max_samples candidates yields nothing, epsilon is doubled and a fresh round
 * is drawn, up to max_doublings times. final_epsilon is the threshold of the
 * round that succeeded. Throws NoModelAccepted if none did.
 */
template <class Prior, class Obs, class Sim, class Stat>
    requires ParameterPrior<Prior> && HistorySimulator<Sim, Obs> && Statistic<Stat, Obs>
AcceptedSampleSet<typename Stat::value_type> abc_sample_adaptive(const Prior& prior, const History<Obs>& observed,
                                                                  const Sim& simulate, const Stat& statistic,
                                                                  const AbcConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (!cfg.epsilon_doubling) throw std::invalid_argument("abc: adaptive sampling needs epsilon_doubling");
    detail::check_replay(observed, simulate);
    AcceptedSampleSet<typename Stat::value_type> out;
    out.seed = seed;
    const auto observed_stat = statistic.compute(observed);
    double epsilon = cfg.epsilon;
    for (std::size_t round = 0; round <= cfg.max_doublings; ++round) {
        detail::abc_round<Prior, Obs>(prior, observed_stat, simulate, statistic, cfg, epsilon, round, seed, out);
        if (!out.accepted.empty()) {
            out.final_epsilon = epsilon;
            return out;
        }
        epsilon *= 2.0;
    }
    throw NoModelAccepted();
}

template <class P, class Value>
struct AbcRlResult {
    P policy;
    AcceptedSampleSet<Value> samples;
    const ModelParams& model() const { return samples.accepted.front().theta; }
};

/**
 * @brief ABC variant of Thompson sampling.
 *
 * Draws a single model from the approximate posterior (target 1, with
 * threshold doubling) and returns the policy the solver computes for it.
 * The solver is called as solver(theta, seed) and returns a policy.
 */
template <class Prior, class Obs, class Sim, class Stat, class Solver>
    requires ParameterPrior<Prior> && HistorySimulator<Sim, Obs> && Statistic<Stat, Obs> &&
             std::invocable<const Solver&, const ModelParams&, std::uint64_t>
auto abc_rl(const Prior& prior, const History<Obs>& observed, const Sim& simulate, const Stat& statistic,
            AbcConfig cfg, const Solver& solver, std::uint64_t seed) {
    cfg.target = 1;
    cfg.epsilon_doubling = true;
    auto samples = abc_sample_adaptive(prior, observed, simulate, statistic, cfg, seed);
    auto policy = solver(samples.accepted.front().theta, derive_seed(seed, {hash_name("solver")}));
    return AbcRlResult<decltype(policy), typename Stat::value_type>{std::move(policy), std::move(samples)};
}

} // namespace abcrl
