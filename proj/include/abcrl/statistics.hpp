#pragma once

#include <abcrl/core.hpp>
#include <abcrl/env/oracle.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace abcrl {

/**
 * A summary statistic f : H -> W together with the distance used to compare
 * two of its values. The distance must be symmetric; it may be negative
 * (the Hoeffding distance is).
 */
template <class S, class Obs>
concept Statistic = requires(const S& s, const History<Obs>& h, const typename S::value_type& v) {
    typename S::value_type;
    { s.compute(h) } -> std::same_as<typename S::value_type>;
    { s.distance(v, v) } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------
// Hoeffding utility statistic

struct UtilityStatistic {
    double mean_utility = 0.0;
    std::size_t n_trajectories = 0;
    double u_range = 1.0;
};

struct HoeffdingConfig {
    double delta = 0.1;
    std::size_t n_sim_trajectories = 100;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("hoeffding: delta must lie in (0, 1)");
        if (n_sim_trajectories < 1) throw std::invalid_argument("hoeffding: need at least one simulated trajectory");
    }
};

template <class Obs>
UtilityStatistic utility_statistic(const History<Obs>& history, DiscountFactor gamma, double u_range) {
    if (history.trajectories.empty()) throw std::invalid_argument("no trajectories");
    if (!(u_range > 0.0)) throw std::invalid_argument("utility range must be positive");
    double sum = 0.0;
    for (const auto& t : history.trajectories) sum += discounted_utility(t, gamma);
    const auto n = history.trajectories.size();
    return {sum / static_cast<double>(n), n, u_range};
}

/// U_range * sqrt(ln(2/delta) (n_a + n_b) / (2 n_a n_b)).
inline double hoeffding_correction(double u_range, double delta, std::size_t n_a, std::size_t n_b) {
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    return u_range * std::sqrt(std::log(2.0 / delta) * (na + nb) / (2.0 * na * nb));
}

/**
 * @brief Lower confidence bound on the gap between two expected utilities.
 *
 * Returns |mean_a - mean_b| minus the two-sample Hoeffding half-width at
 * confidence 1 - delta. The value is negative whenever the means are
 * statistically indistinguishable, and the correction shrinks as either
 * sample grows, so more data makes acceptance harder.
 */
inline double hoeffding_distance(const UtilityStatistic& a, const UtilityStatistic& b, const HoeffdingConfig& cfg) {
    if (a.u_range != b.u_range) throw std::invalid_argument("hoeffding distance: mismatched utility ranges");
    if (a.n_trajectories == 0 || b.n_trajectories == 0)
        throw std::invalid_argument("hoeffding distance: empty statistic");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("hoeffding: delta must lie in (0, 1)");
    return std::abs(a.mean_utility - b.mean_utility) -
           hoeffding_correction(a.u_range, cfg.delta, a.n_trajectories, b.n_trajectories);
}

class HoeffdingStatistic {
public:
    using value_type = UtilityStatistic;

    HoeffdingStatistic(DiscountFactor gamma, double u_range, HoeffdingConfig cfg)
        : gamma_(gamma), u_range_(u_range), cfg_(cfg) {
        cfg_.validate();
        if (!(u_range_ > 0.0)) throw std::invalid_argument("utility range must be positive");
    }

    template <class Obs>
    value_type compute(const History<Obs>& h) const {
        return utility_statistic(h, gamma_, u_range_);
    }
    double distance(const value_type& a, const value_type& b) const { return hoeffding_distance(a, b, cfg_); }

    const HoeffdingConfig& config() const { return cfg_; }
    DiscountFactor gamma() const { return gamma_; }
    double u_range() const { return u_range_; }

private:
    DiscountFactor gamma_;
    double u_range_;
    HoeffdingConfig cfg_;
};

// ---------------------------------------------------------------------------
// Transition counts (sufficient for the discrete oracle)

class TransitionCounts {
public:
    TransitionCounts(std::size_t states, std::size_t actions)
        : states_(states), actions_(actions), counts_(states * actions * states, 0) {
        if (states == 0 || actions == 0) throw std::invalid_argument("transition counts: empty table");
    }

    template <class Obs>
    static TransitionCounts from_history(const History<Obs>& h, std::size_t states, std::size_t actions) {
        TransitionCounts c(states, actions);
        for (const auto& traj : h.trajectories)
            for (std::size_t t = 0; t < traj.steps.size(); ++t)
                c.add(oracle_state(traj.steps[t].observation), traj.steps[t].action.index,
                      oracle_state(traj.next_observation(t)));
        return c;
    }

    void add(std::size_t s, std::size_t a, std::size_t next, std::uint64_t n = 1) {
        if (s >= states_ || next >= states_ || a >= actions_)
            throw std::out_of_range("transition counts: index out of range");
        counts_[index(s, a, next)] += n;
        total_ += n;
    }

    std::uint64_t count(std::size_t s, std::size_t a, std::size_t next) const { return counts_[index(s, a, next)]; }
    std::uint64_t total() const { return total_; }
    std::size_t states() const { return states_; }
    std::size_t actions() const { return actions_; }
    const std::vector<std::uint64_t>& cells() const { return counts_; }

    friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;

private:
    std::size_t index(std::size_t s, std::size_t a, std::size_t next) const {
        return (s * actions_ + a) * states_ + next;
    }

    std::size_t states_, actions_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// L1 distance between the two tables, each normalised by its own total
/// (an empty table normalises to all zeros).
inline double transition_count_distance(const TransitionCounts& a, const TransitionCounts& b) {
    if (a.states() != b.states() || a.actions() != b.actions())
        throw std::invalid_argument("transition counts: dimension mismatch");
    const double ta = a.total() ? static_cast<double>(a.total()) : 1.0;
    const double tb = b.total() ? static_cast<double>(b.total()) : 1.0;
    double d = 0.0;
    for (std::size_t i = 0; i < a.cells().size(); ++i)
        d += std::abs(static_cast<double>(a.cells()[i]) / ta - static_cast<double>(b.cells()[i]) / tb);
    return d;
}

class TransitionCountStatistic {
public:
    using value_type = TransitionCounts;

    TransitionCountStatistic(std::size_t states, std::size_t actions) : states_(states), actions_(actions) {}

    template <class Obs>
    value_type compute(const History<Obs>& h) const {
        return TransitionCounts::from_history(h, states_, actions_);
    }
    double distance(const value_type& a, const value_type& b) const { return transition_count_distance(a, b); }

private:
    std::size_t states_, actions_;
};

/**
 * Number of advance attempts (action 1) and successes in an oracle history,
 * compared with a weighted norm. Equal values imply equal oracle likelihood
 * under any policy whose action probabilities do not vary.
 */
class AttemptSuccessStatistic {
public:
    struct value_type {
        double attempts = 0.0;
        double successes = 0.0;
    };
    enum class Norm { l1, l2 };

    AttemptSuccessStatistic(double attempt_weight, double success_weight, Norm norm = Norm::l1)
        : wa_(attempt_weight), ws_(success_weight), norm_(norm) {
        if (!(wa_ > 0.0 && ws_ > 0.0)) throw std::invalid_argument("attempt/success weights must be positive");
    }

    template <class Obs>
    value_type compute(const History<Obs>& h) const {
        value_type v;
        for (const auto& traj : h.trajectories)
            for (std::size_t t = 0; t < traj.steps.size(); ++t)
                if (traj.steps[t].action.index == 1) {
                    v.attempts += 1.0;
                    if (oracle_state(traj.next_observation(t)) == 1) v.successes += 1.0;
                }
        return v;
    }
    double distance(const value_type& a, const value_type& b) const {
        const double da = wa_ * std::abs(a.attempts - b.attempts);
        const double ds = ws_ * std::abs(a.successes - b.successes);
        return norm_ == Norm::l1 ? da + ds : std::hypot(da, ds);
    }

private:
    double wa_, ws_;
    Norm norm_;
};

} // namespace abcrl
