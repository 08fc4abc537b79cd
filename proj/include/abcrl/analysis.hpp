#pragma once

#include <abcrl/abc.hpp>
#include <abcrl/core.hpp>
#include <abcrl/env/oracle.hpp>
#include <abcrl/statistics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace abcrl {

using OracleObs = Observation<1>;
using OracleHistory = History<OracleObs>;

/// Probability vector over model indices.
class DiscreteDistribution {
public:
    DiscreteDistribution() = default;
    explicit DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw std::invalid_argument("distribution: empty support");
        double total = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0)) throw std::invalid_argument("distribution: negative or NaN probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("distribution: probabilities must sum to 1");
    }

    /// Normalises nonnegative weights.
    static DiscreteDistribution from_weights(std::vector<double> w) {
        double total = 0.0;
        for (double x : w) {
            if (!(x >= 0.0)) throw std::invalid_argument("distribution: negative or NaN weight");
            total += x;
        }
        if (!(total > 0.0)) throw std::invalid_argument("distribution: zero total weight");
        for (double& x : w) x /= total;
        return DiscreteDistribution(std::move(w));
    }
    static DiscreteDistribution uniform(std::size_t n) { return from_weights(std::vector<double>(n, 1.0)); }

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> probs_;
};

inline double total_variation(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != q.size()) throw std::invalid_argument("total variation: support mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

/// sum_i p_i ln(p_i / q_i), with 0 ln(0 / q) = 0.
inline double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl divergence: support mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) throw std::invalid_argument("kl divergence: p is not absolutely continuous w.r.t. q");
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Oracle likelihoods

/**
 * Log of the environment factors of P(h) under the oracle model: the start
 * state, each transition probability and the reward it implies. Policy
 * factors are left out. Returns -inf for impossible histories.
 */
inline double oracle_env_log_likelihood(const DiscreteOracleParams& model, const OracleHistory& h) {
    const DiscreteOracle env(model);
    constexpr double impossible = -std::numeric_limits<double>::infinity();
    double ll = 0.0;
    for (const auto& traj : h.trajectories) {
        const auto& first = traj.steps.empty() ? traj.final_observation : traj.steps.front().observation;
        if (oracle_state(first) != 0) return impossible;
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            const auto& st = traj.steps[t];
            const std::size_t next = oracle_state(traj.next_observation(t));
            if (st.reward != static_cast<double>(next)) return impossible;
            const double p = env.transition_probability(oracle_state(st.observation), st.action, next);
            if (p == 0.0) return impossible;
            ll += std::log(p);
        }
    }
    return ll;
}

/// Log of the policy factors of P(h): sum of ln pi(a_t | h_<t, x_t).
template <class P>
    requires StochasticPolicy<P, OracleObs>
double policy_log_likelihood(const P& policy, const OracleHistory& h) {
    double ll = 0.0;
    for (const auto& traj : h.trajectories)
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            const std::span<const Step<OracleObs>> so_far(traj.steps.data(), t);
            const double p = policy.probability(so_far, traj.steps[t].observation, traj.steps[t].action);
            if (p <= 0.0) return -std::numeric_limits<double>::infinity();
            ll += std::log(p);
        }
    return ll;
}

template <class P>
    requires StochasticPolicy<P, OracleObs>
double oracle_log_likelihood(const DiscreteOracleParams& model, const P& policy, const OracleHistory& h) {
    const double env = oracle_env_log_likelihood(model, h);
    if (env == -std::numeric_limits<double>::infinity()) return env;
    return env + policy_log_likelihood(policy, h);
}

namespace detail {

inline DiscreteDistribution normalise_log_weights(const std::vector<double>& log_w) {
    const double top = *std::max_element(log_w.begin(), log_w.end());
    if (top == -std::numeric_limits<double>::infinity())
        throw std::domain_error("history impossible under all models");
    std::vector<double> w(log_w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_w[i] - top);
    return DiscreteDistribution::from_weights(std::move(w));
}

inline void check_models(const std::vector<DiscreteOracleParams>& models, const DiscreteDistribution& prior) {
    if (models.empty() || models.size() != prior.size())
        throw std::invalid_argument("posterior: models and prior must have the same non-zero size");
}

} // namespace detail

/// Posterior over a finite model list, built from environment factors only.
inline DiscreteDistribution exact_posterior(const std::vector<DiscreteOracleParams>& models,
                                            const DiscreteDistribution& prior, const OracleHistory& h) {
    detail::check_models(models, prior);
    std::vector<double> log_w(models.size());
    for (std::size_t m = 0; m < models.size(); ++m)
        log_w[m] = prior[m] > 0.0 ? oracle_env_log_likelihood(models[m], h) + std::log(prior[m])
                                  : -std::numeric_limits<double>::infinity();
    return detail::normalise_log_weights(log_w);
}

/// Posterior computed from the full likelihood, policy factors included.
template <class P>
    requires StochasticPolicy<P, OracleObs>
DiscreteDistribution posterior_with_policy(const std::vector<DiscreteOracleParams>& models,
                                           const DiscreteDistribution& prior, const OracleHistory& h,
                                           const P& policy) {
    detail::check_models(models, prior);
    std::vector<double> log_w(models.size());
    for (std::size_t m = 0; m < models.size(); ++m)
        log_w[m] = prior[m] > 0.0 ? oracle_log_likelihood(models[m], policy, h) + std::log(prior[m])
                                  : -std::numeric_limits<double>::infinity();
    return detail::normalise_log_weights(log_w);
}

/**
 * Computes the posterior twice, each time including the action probabilities
 * of one of the two policies, and reports whether the results agree to within
 * 1e-12 per entry. Both policies must give every observed action positive
 * probability.
 */
template <class PA, class PB>
    requires StochasticPolicy<PA, OracleObs> && StochasticPolicy<PB, OracleObs>
bool check_policy_independence(const std::vector<DiscreteOracleParams>& models, const DiscreteDistribution& prior,
                               const OracleHistory& h, const PA& policy_a, const PB& policy_b) {
    constexpr double impossible = -std::numeric_limits<double>::infinity();
    if (policy_log_likelihood(policy_a, h) == impossible || policy_log_likelihood(policy_b, h) == impossible)
        throw std::invalid_argument("precondition violated: a policy gives zero probability to an observed action");
    const auto a = posterior_with_policy(models, prior, h, policy_a);
    const auto b = posterior_with_policy(models, prior, h, policy_b);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Policies and history spaces for the oracle

/**
 * History-dependent stochastic policy for the oracle: at step t in state s it
 * advances with probability advance[min(t, T-1)][s].
 */
class OracleTimedPolicy {
public:
    explicit OracleTimedPolicy(std::vector<std::array<double, 2>> advance) : advance_(std::move(advance)) {
        if (advance_.empty()) throw std::invalid_argument("oracle policy: empty schedule");
        for (const auto& row : advance_)
            for (double p : row)
                if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("oracle policy: probability out of range");
    }
    static OracleTimedPolicy stationary(double p_state0, double p_state1) {
        return OracleTimedPolicy({{p_state0, p_state1}});
    }

    double advance_probability(std::size_t t, std::size_t state) const {
        return advance_[std::min(t, advance_.size() - 1)][state];
    }
    double probability(std::span<const Step<OracleObs>> so_far, const OracleObs& obs, Action a) const {
        const double p = advance_probability(so_far.size(), oracle_state(obs));
        return a.index == 1 ? p : (a.index == 0 ? 1.0 - p : 0.0);
    }
    Action act(std::span<const Step<OracleObs>> so_far, const OracleObs& obs, Rng& rng) const {
        return Action{bernoulli(rng, advance_probability(so_far.size(), oracle_state(obs))) ? 1u : 0u};
    }
    std::string id() const {
        std::ostringstream os;
        os.precision(17);
        os << "oracle-timed";
        for (const auto& row : advance_) os << ":" << row[0] << "/" << row[1];
        return os.str();
    }

private:
    std::vector<std::array<double, 2>> advance_;
};

/// Every single-trajectory oracle history of the given length that has
/// positive probability under some model with 0 < p < 1.
inline std::vector<OracleHistory> enumerate_oracle_histories(std::size_t length, const std::string& policy_id = {}) {
    std::vector<OracleHistory> out;
    // Each step is one of: reset (a=0, s'=0), failed advance (a=1, s'=0), advance (a=1, s'=1).
    std::size_t total = 1;
    for (std::size_t i = 0; i < length; ++i) total *= 3;
    out.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
        Trajectory<OracleObs> traj;
        std::size_t c = code;
        double state = 0.0;
        for (std::size_t t = 0; t < length; ++t) {
            const std::size_t kind = c % 3;
            c /= 3;
            const Action a{kind == 0 ? 0u : 1u};
            const double next = kind == 2 ? 1.0 : 0.0;
            traj.steps.push_back({{{state}}, a, next});
            state = next;
        }
        traj.final_observation = {{state}};
        out.push_back({{std::move(traj)}, policy_id});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Smoothness of the likelihood in the statistic

struct LipschitzEstimate {
    double value = 0.0;
    std::size_t pairs_used = 0;
    /// (pair, model) combinations skipped because one of the likelihoods is zero.
    std::size_t zero_likelihood_pairs = 0;
    /// False when two histories share a statistic value but not a likelihood,
    /// in which case no finite constant exists and value is +inf.
    bool finite = true;
};

/**
 * @brief Smallest L with |ln P_m(h) / P_m(x)| <= L ||f(h) - f(x)|| on the space.
 *
 * Exhaustive over every model and every pair of distinct histories whose
 * statistics differ. Pairs with equal statistics but different likelihoods
 * make the estimate infinite. Throws if no pair has differing statistics.
 */
template <class P, class Stat>
    requires StochasticPolicy<P, OracleObs> && Statistic<Stat, OracleObs>
LipschitzEstimate lipschitz_estimate(const std::vector<DiscreteOracleParams>& models, const P& policy,
                                     const Stat& statistic, const std::vector<OracleHistory>& space) {
    constexpr double impossible = -std::numeric_limits<double>::infinity();
    std::vector<typename Stat::value_type> stats;
    stats.reserve(space.size());
    for (const auto& h : space) stats.push_back(statistic.compute(h));
    std::vector<std::vector<double>> ll(models.size(), std::vector<double>(space.size()));
    for (std::size_t m = 0; m < models.size(); ++m)
        for (std::size_t z = 0; z < space.size(); ++z) ll[m][z] = oracle_log_likelihood(models[m], policy, space[z]);

    LipschitzEstimate est;
    bool any_distinct = false;
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = i + 1; j < space.size(); ++j) {
            const double dist = statistic.distance(stats[i], stats[j]);
            if (dist > 0.0) any_distinct = true;
            for (std::size_t m = 0; m < models.size(); ++m) {
                if (ll[m][i] == impossible || ll[m][j] == impossible) {
                    ++est.zero_likelihood_pairs;
                    continue;
                }
                const double gap = std::abs(ll[m][i] - ll[m][j]);
                if (dist > 0.0) {
                    ++est.pairs_used;
                    est.value = std::max(est.value, gap / dist);
                } else if (gap > 1e-12) {
                    est.finite = false;
                }
            }
        }
    if (!any_distinct || est.pairs_used == 0) throw std::invalid_argument("lipschitz estimate: no valid history pairs");
    if (!est.finite) est.value = std::numeric_limits<double>::infinity();
    return est;
}

// ---------------------------------------------------------------------------
// KL bound on the ABC posterior

struct KlBoundReport {
    double epsilon = 0.0;
    double kl = 0.0;
    std::size_t ball_size = 0;
    double lipschitz = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/**
 * @brief Exact check of KL(posterior || ABC posterior) <= ln|A_eps| + 2 L eps.
 *
 * A_eps is the set of histories in the space that the sampler would accept
 * against h at threshold epsilon (see abc_accepts). The ABC posterior weights
 * each model by prior times the likelihood mass of A_eps, which is exactly the
 * acceptance distribution of abc_sample. L comes from lipschitz_estimate.
 */
template <class P, class Stat>
    requires StochasticPolicy<P, OracleObs> && Statistic<Stat, OracleObs>
KlBoundReport theorem1_check(const std::vector<DiscreteOracleParams>& models, const DiscreteDistribution& prior,
                              const P& policy, const Stat& statistic, const OracleHistory& h, double epsilon,
                              const std::vector<OracleHistory>& space) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("theorem check: epsilon must be nonnegative");
    const DiscreteDistribution posterior = exact_posterior(models, prior, h);
    const auto observed = statistic.compute(h);

    std::vector<std::size_t> ball;
    for (std::size_t z = 0; z < space.size(); ++z)
        if (abc_accepts(statistic.distance(observed, statistic.compute(space[z])), epsilon)) ball.push_back(z);

    std::vector<double> w(models.size(), 0.0);
    for (std::size_t m = 0; m < models.size(); ++m) {
        double mass = 0.0;
        for (std::size_t z : ball) mass += std::exp(oracle_log_likelihood(models[m], policy, space[z]));
        w[m] = prior[m] * mass;
    }
    const DiscreteDistribution abc_posterior = DiscreteDistribution::from_weights(std::move(w));

    KlBoundReport r;
    r.epsilon = epsilon;
    r.kl = kl_divergence(posterior, abc_posterior);
    r.ball_size = ball.size();
    r.lipschitz = lipschitz_estimate(models, policy, statistic, space).value;
    r.bound = std::isfinite(r.lipschitz) ? std::log(static_cast<double>(r.ball_size)) + 2.0 * r.lipschitz * epsilon
                                         : std::numeric_limits<double>::infinity();
    // Absolute slack for rounding in KL when both sides are ~0.
    r.holds = r.kl <= r.bound + 1e-12;
    return r;
}

inline void write_kl_bound_csv(std::ostream& os, const std::vector<KlBoundReport>& reports) {
    os << "epsilon,kl,ball_size,lipschitz,bound,holds\n";
    const auto old = os.precision(12);
    for (const auto& r : reports)
        os << r.epsilon << ',' << r.kl << ',' << r.ball_size << ',' << r.lipschitz << ',' << r.bound << ','
           << (r.holds ? "true" : "false") << '\n';
    os.precision(old);
}

// ---------------------------------------------------------------------------
// Bootstrap

/// Linear-interpolation quantile of sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/**
 * Percentile bootstrap interval for the mean: n_boot resamples with
 * replacement, returning the (1 - level)/2 and (1 + level)/2 quantiles of the
 * resampled means.
 */
inline std::pair<double, double> bootstrap_ci(const std::vector<double>& values, std::size_t n_boot, double level,
                                              Rng& rng) {
    if (values.empty()) throw std::invalid_argument("bootstrap: no values");
    if (n_boot < 1) throw std::invalid_argument("bootstrap: n_boot must be at least 1");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap: level must lie in (0, 1)");
    std::vector<double> means(n_boot);
    const std::size_t n = values.size();
    for (auto& m : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += values[uniform_index(rng, n)];
        m = s / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    return {sorted_quantile(means, (1.0 - level) / 2.0), sorted_quantile(means, (1.0 + level) / 2.0)};
}

} // namespace abcrl
