#pragma once

#include <abcrl/random.hpp>

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcrl {

/// A real parameter vector identifying one simulator in a family.
using ModelParams = std::vector<double>;

struct Action {
    std::size_t index = 0;
    friend bool operator==(Action, Action) = default;
};

/// Fixed-dimension observation. Units are family specific.
template <std::size_t Dim>
struct Observation {
    static constexpr std::size_t dimension = Dim;
    std::array<double, Dim> values{};

    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    bool is_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Observation at which the action was taken, the action, and the reward it earned.
template <class Obs>
struct Step {
    Obs observation;
    Action action;
    double reward = 0.0;
    friend bool operator==(const Step&, const Step&) = default;
};

template <class Obs>
struct Trajectory {
    std::vector<Step<Obs>> steps;
    /// Observation reached after the last step.
    Obs final_observation{};
    /// True when the episode ended in an absorbing state rather than at the horizon.
    bool terminal = false;

    /// Observation following step t.
    const Obs& next_observation(std::size_t t) const {
        return t + 1 < steps.size() ? steps[t + 1].observation : final_observation;
    }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Everything observed so far, plus the identity of the policy that produced
/// it. The policy must be known to replay it in candidate simulators.
template <class Obs>
struct History {
    std::vector<Trajectory<Obs>> trajectories;
    std::string policy_id;

    std::size_t transition_count() const {
        std::size_t n = 0;
        for (const auto& t : trajectories) n += t.steps.size();
        return n;
    }
    friend bool operator==(const History&, const History&) = default;
};

class DiscountFactor {
public:
    explicit DiscountFactor(double gamma) : gamma_(gamma) {
        if (!(gamma >= 0.0 && gamma <= 1.0))
            throw std::invalid_argument("discount factor must lie in [0, 1]");
    }
    double value() const { return gamma_; }

private:
    double gamma_;
};

/// Result of one environment transition.
template <class Obs>
struct Outcome {
    Obs next;
    double reward = 0.0;
    bool terminal = false;
};

/**
 * An environment: a stochastic transition function plus a start-state
 * distribution. All randomness comes from the rng argument so that a seed
 * fully determines a rollout.
 */
template <class E>
concept Environment = requires(const E& env, const typename E::observation_type& s, Action a, Rng& rng) {
    typename E::observation_type;
    { env.initial_state(rng) } -> std::same_as<typename E::observation_type>;
    { env.step(s, a, rng) } -> std::same_as<Outcome<typename E::observation_type>>;
    { env.action_count() } -> std::convertible_to<std::size_t>;
    { env.reward_range() } -> std::convertible_to<double>;
};

/// An environment that can also start from a uniformly drawn point of its state box.
template <class E>
concept BoxedEnvironment = Environment<E> && requires(const E& env, Rng& rng) {
    { env.uniform_state(rng) } -> std::same_as<typename E::observation_type>;
};

template <class P, class Obs>
concept Policy = requires(const P& p, std::span<const Step<Obs>> so_far, const Obs& obs, Rng& rng) {
    { p.act(so_far, obs, rng) } -> std::same_as<Action>;
    { p.id() } -> std::convertible_to<std::string>;
};

/// A policy that can also report the probability of a given action.
template <class P, class Obs>
concept StochasticPolicy = Policy<P, Obs> && requires(const P& p, std::span<const Step<Obs>> so_far, const Obs& obs, Action a) {
    { p.probability(so_far, obs, a) } -> std::convertible_to<double>;
};

class UniformRandomPolicy {
public:
    explicit UniformRandomPolicy(std::size_t action_count) : n_(action_count) {
        if (n_ < 2) throw std::invalid_argument("need at least two actions");
    }

    template <class Obs>
    Action act(std::span<const Step<Obs>>, const Obs&, Rng& rng) const {
        return Action{uniform_index(rng, n_)};
    }
    template <class Obs>
    double probability(std::span<const Step<Obs>>, const Obs&, Action a) const {
        return a.index < n_ ? 1.0 / static_cast<double>(n_) : 0.0;
    }
    std::string id() const { return "uniform-random/" + std::to_string(n_); }
    std::size_t action_count() const { return n_; }

private:
    std::size_t n_;
};

/// Sum over t of gamma^(t-1) r_t, first reward undiscounted.
template <class Obs>
double discounted_utility(const Trajectory<Obs>& trajectory, DiscountFactor gamma) {
    double total = 0.0;
    double weight = 1.0;
    for (const auto& step : trajectory.steps) {
        total += weight * step.reward;
        weight *= gamma.value();
    }
    return total;
}

/// Runs policy from the given start until a terminal transition or the horizon.
template <Environment E, class P>
    requires Policy<P, typename E::observation_type>
Trajectory<typename E::observation_type> rollout_from(const E& env, const P& policy,
                                                      typename E::observation_type start,
                                                      std::size_t horizon, Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    using Obs = typename E::observation_type;
    Trajectory<Obs> traj;
    traj.steps.reserve(std::min<std::size_t>(horizon, 1024));
    Obs state = start;
    for (std::size_t t = 0; t < horizon; ++t) {
        const Action a = policy.act(std::span<const Step<Obs>>(traj.steps), state, rng);
        auto out = env.step(state, a, rng);
        traj.steps.push_back(Step<Obs>{state, a, out.reward});
        state = out.next;
        if (out.terminal) {
            traj.terminal = true;
            break;
        }
    }
    traj.final_observation = state;
    return traj;
}

template <Environment E, class P>
    requires Policy<P, typename E::observation_type>
Trajectory<typename E::observation_type> rollout(const E& env, const P& policy, std::size_t horizon, Rng& rng) {
    auto start = env.initial_state(rng);
    return rollout_from(env, policy, start, horizon, rng);
}

/// n independent rollouts collected into one history tagged with the policy id.
template <Environment E, class P>
    requires Policy<P, typename E::observation_type>
History<typename E::observation_type> collect_history(const E& env, const P& policy, std::size_t n,
                                                      std::size_t horizon, Rng& rng) {
    History<typename E::observation_type> h;
    h.policy_id = policy.id();
    h.trajectories.reserve(n);
    for (std::size_t i = 0; i < n; ++i) h.trajectories.push_back(rollout(env, policy, horizon, rng));
    return h;
}

/// Monte Carlo estimate of the policy's expected discounted utility.
template <Environment E, class P>
    requires Policy<P, typename E::observation_type>
double estimate_value(const E& env, const P& policy, std::size_t n, std::size_t horizon, DiscountFactor gamma,
                      Rng& rng) {
    if (n == 0) throw std::invalid_argument("need at least one evaluation trajectory");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += discounted_utility(rollout(env, policy, horizon, rng), gamma);
    return sum / static_cast<double>(n);
}

/// Width of the achievable discounted-utility interval for rewards spanning
/// reward_range over at most horizon steps.
inline double discounted_utility_range(double reward_range, DiscountFactor gamma, std::size_t horizon) {
    const double g = gamma.value();
    if (g == 1.0) return reward_range * static_cast<double>(horizon);
    return reward_range * (1.0 - std::pow(g, static_cast<double>(horizon))) / (1.0 - g);
}

} // namespace abcrl
