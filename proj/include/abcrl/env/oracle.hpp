#pragma once

#include <abcrl/core.hpp>

#include <stdexcept>

namespace abcrl {

struct DiscreteOracleParams {
    double success_prob = 0.5;

    static DiscreteOracleParams from_vector(const ModelParams& theta) {
        if (theta.size() != 1) throw std::invalid_argument("oracle takes 1 parameter");
        return DiscreteOracleParams{theta[0]};
    }
    ModelParams to_vector() const { return {success_prob}; }
};

/**
 * Two-state chain with a known likelihood, used to check inference exactly.
 *
 * Action 1 tries to advance: the next state is 1 with probability p, else 0.
 * Action 0 resets to state 0. Reward is 1 on landing in state 1. Episodes
 * start in state 0 and never terminate on their own.
 */
class DiscreteOracle {
public:
    using observation_type = Observation<1>;
    using params_type = DiscreteOracleParams;

    explicit DiscreteOracle(DiscreteOracleParams params) : p_(params) {
        // p in {0, 1} is allowed for degenerate checks.
        if (!(p_.success_prob >= 0.0 && p_.success_prob <= 1.0))
            throw std::invalid_argument("oracle: success probability must lie in [0, 1]");
    }

    const DiscreteOracleParams& params() const { return p_; }
    std::size_t action_count() const { return 2; }
    std::size_t state_count() const { return 2; }
    double reward_range() const { return 1.0; }

    observation_type initial_state(Rng&) const { return {{0.0}}; }

    Outcome<observation_type> step(const observation_type&, Action a, Rng& rng) const {
        const bool advanced = a.index == 1 && bernoulli(rng, p_.success_prob);
        const double next = advanced ? 1.0 : 0.0;
        return {{{next}}, next, false};
    }

    /// Exact transition probability P(next | state, action); state is irrelevant.
    double transition_probability(std::size_t, Action a, std::size_t next) const {
        if (a.index == 0) return next == 0 ? 1.0 : 0.0;
        return next == 1 ? p_.success_prob : 1.0 - p_.success_prob;
    }

private:
    DiscreteOracleParams p_;
};

inline std::size_t oracle_state(const Observation<1>& obs) {
    return static_cast<std::size_t>(obs[0]);
}

} // namespace abcrl
