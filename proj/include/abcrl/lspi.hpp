#pragma once

#include <abcrl/core.hpp>
#include <abcrl/environments.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcrl {

/**
 * A linear basis over (state, action): a per-state feature block of size
 * block_size(), replicated once per action. phi(s, a) is zero outside the
 * block of action a.
 */
template <class B>
concept LinearBasis = requires(const B& b, const typename B::observation_type& s, std::span<double> out) {
    typename B::observation_type;
    { b.block_size() } -> std::convertible_to<std::size_t>;
    { b.action_count() } -> std::convertible_to<std::size_t>;
    b.state_features(s, out);
};

/// Gaussian bumps on a uniform grid over a 2-D state box, plus a constant.
class RbfBasis {
public:
    using observation_type = Observation<2>;

    RbfBasis(std::array<double, 2> lower, std::array<double, 2> upper, std::size_t actions,
             std::size_t per_dim = 4)
        : lo_(lower), hi_(upper), actions_(actions), per_dim_(per_dim) {
        if (per_dim_ < 2) throw std::invalid_argument("rbf: need at least two centres per dimension");
        if (actions_ < 1) throw std::invalid_argument("rbf: need at least one action");
        for (std::size_t d = 0; d < 2; ++d) {
            if (!(hi_[d] > lo_[d])) throw std::invalid_argument("rbf: degenerate state box");
            // Centres include both box edges; width equals the grid spacing.
            width_[d] = (hi_[d] - lo_[d]) / static_cast<double>(per_dim_ - 1);
        }
        for (std::size_t i = 0; i < per_dim_; ++i)
            for (std::size_t j = 0; j < per_dim_; ++j)
                centers_.push_back({lo_[0] + width_[0] * static_cast<double>(i),
                                    lo_[1] + width_[1] * static_cast<double>(j)});
    }

    /// Basis over an environment's own state box.
    template <class E>
    static RbfBasis for_environment(const E& env, std::size_t per_dim = 4) {
        return RbfBasis(env.state_lower(), env.state_upper(), env.action_count(), per_dim);
    }

    std::size_t block_size() const { return centers_.size() + 1; }
    std::size_t action_count() const { return actions_; }
    std::size_t size() const { return block_size() * actions_; }
    const std::vector<std::array<double, 2>>& centers() const { return centers_; }
    std::array<double, 2> widths() const { return width_; }
    std::array<double, 2> lower() const { return lo_; }
    std::array<double, 2> upper() const { return hi_; }

    /// States outside the box are clipped onto it first.
    void state_features(const observation_type& s, std::span<double> out) const {
        const double x = std::clamp(s[0], lo_[0], hi_[0]);
        const double y = std::clamp(s[1], lo_[1], hi_[1]);
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            const double dx = (x - centers_[i][0]) / width_[0];
            const double dy = (y - centers_[i][1]) / width_[1];
            out[i] = std::exp(-0.5 * (dx * dx + dy * dy));
        }
        out[centers_.size()] = 1.0;
    }

private:
    std::array<double, 2> lo_, hi_;
    std::array<double, 2> width_{};
    std::size_t actions_;
    std::size_t per_dim_;
    std::vector<std::array<double, 2>> centers_;
};

/// One-hot over discrete states; with it LSTDQ is exact policy evaluation.
class TabularBasis {
public:
    using observation_type = Observation<1>;

    TabularBasis(std::size_t states, std::size_t actions) : states_(states), actions_(actions) {}

    std::size_t block_size() const { return states_; }
    std::size_t action_count() const { return actions_; }
    std::size_t size() const { return states_ * actions_; }

    void state_features(const observation_type& s, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        const auto i = static_cast<std::size_t>(s[0]);
        if (i >= states_) throw std::out_of_range("tabular basis: state index out of range");
        out[i] = 1.0;
    }

private:
    std::size_t states_, actions_;
};

/// Full phi(s, a) vector of length block_size * action_count.
template <LinearBasis B>
Eigen::VectorXd featurize(const B& basis, const typename B::observation_type& s, Action a) {
    const std::size_t k = basis.block_size();
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k * basis.action_count()));
    basis.state_features(s, std::span<double>(phi.data() + a.index * k, k));
    return phi;
}

struct QWeights {
    Eigen::VectorXd w;
};

namespace detail {

/// argmax_a w_a . psi, ties to the lowest action index.
inline std::size_t greedy_from_features(const Eigen::VectorXd& w, const double* psi, std::size_t block,
                                        std::size_t actions) {
    std::size_t best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < actions; ++a) {
        const double* wa = w.data() + a * block;
        double q = 0.0;
        for (std::size_t j = 0; j < block; ++j) q += wa[j] * psi[j];
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

} // namespace detail

template <LinearBasis B>
Action greedy_action(const B& basis, const QWeights& weights, const typename B::observation_type& s) {
    std::vector<double> psi(basis.block_size());
    basis.state_features(s, psi);
    return Action{detail::greedy_from_features(weights.w, psi.data(), basis.block_size(), basis.action_count())};
}

/// Deterministic policy acting greedily on a linear Q-function.
template <LinearBasis B>
class GreedyPolicy {
public:
    using observation_type = typename B::observation_type;

    GreedyPolicy(B basis, QWeights weights) : basis_(std::move(basis)), weights_(std::move(weights)) {
        if (static_cast<std::size_t>(weights_.w.size()) != basis_.block_size() * basis_.action_count())
            throw std::invalid_argument("greedy policy: weight length does not match basis");
    }

    Action act(std::span<const Step<observation_type>>, const observation_type& s, Rng&) const {
        return greedy_action(basis_, weights_, s);
    }
    double probability(std::span<const Step<observation_type>>, const observation_type& s, Action a) const {
        return greedy_action(basis_, weights_, s) == a ? 1.0 : 0.0;
    }
    std::string id() const { return "greedy-q"; }

    const B& basis() const { return basis_; }
    const QWeights& weights() const { return weights_; }

private:
    B basis_;
    QWeights weights_;
};

template <class Obs>
struct TransitionSample {
    Obs s;
    Action a;
    double r = 0.0;
    Obs next;
    bool terminal = false;
};

template <class Obs>
void append_transitions(const Trajectory<Obs>& traj, std::vector<TransitionSample<Obs>>& out) {
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const bool last = t + 1 == traj.steps.size();
        out.push_back({traj.steps[t].observation, traj.steps[t].action, traj.steps[t].reward,
                       traj.next_observation(t), last && traj.terminal});
    }
}

template <class Obs>
std::vector<TransitionSample<Obs>> transitions_of(const History<Obs>& h) {
    std::vector<TransitionSample<Obs>> out;
    out.reserve(h.transition_count());
    for (const auto& traj : h.trajectories) append_transitions(traj, out);
    return out;
}

/**
 * Precomputed per-sample state features plus the policy-independent half of
 * the LSTDQ system. Reused across LSPI iterations, since only the successor
 * actions change between them.
 */
template <LinearBasis B>
class LstdqSystem {
public:
    using Obs = typename B::observation_type;
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    LstdqSystem(std::span<const TransitionSample<Obs>> samples, const B& basis)
        : block_(basis.block_size()), actions_(basis.action_count()), n_(samples.size()) {
        if (samples.empty()) throw std::invalid_argument("lstdq: no samples");
        const auto k = static_cast<Eigen::Index>(block_);
        const auto dim = static_cast<Eigen::Index>(block_ * actions_);
        psi_.resize(static_cast<Eigen::Index>(n_), k);
        next_psi_.resize(static_cast<Eigen::Index>(n_), k);
        action_.resize(n_);
        terminal_.resize(n_);
        base_ = RowMatrix::Zero(dim, dim);
        b_ = Eigen::VectorXd::Zero(dim);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto& smp = samples[i];
            if (smp.a.index >= actions_) throw std::out_of_range("lstdq: action index out of range");
            double* psi = psi_.row(static_cast<Eigen::Index>(i)).data();
            basis.state_features(smp.s, std::span<double>(psi, block_));
            if (smp.terminal)
                next_psi_.row(static_cast<Eigen::Index>(i)).setZero();
            else
                basis.state_features(smp.next, std::span<double>(next_psi_.row(static_cast<Eigen::Index>(i)).data(), block_));
            action_[i] = smp.a.index;
            terminal_[i] = smp.terminal;
            const std::size_t off = smp.a.index * block_;
            for (std::size_t r = 0; r < block_; ++r) {
                double* row = base_.row(static_cast<Eigen::Index>(off + r)).data() + off;
                for (std::size_t c = 0; c < block_; ++c) row[c] += psi[r] * psi[c];
                b_[static_cast<Eigen::Index>(off + r)] += smp.r * psi[r];
            }
        }
    }

    /// Solves (A/n + ridge I) w = b/n for the greedy policy of `policy`.
    QWeights solve(const QWeights& policy, double gamma, double ridge) const {
        const auto dim = static_cast<Eigen::Index>(block_ * actions_);
        if (policy.w.size() != dim) throw std::invalid_argument("lstdq: policy weights do not match basis");
        if (!(ridge >= 0.0)) throw std::invalid_argument("lstdq: ridge must be nonnegative");
        RowMatrix a = base_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (terminal_[i]) continue;
            const double* psi = psi_.row(static_cast<Eigen::Index>(i)).data();
            const double* nxt = next_psi_.row(static_cast<Eigen::Index>(i)).data();
            const std::size_t next_a = detail::greedy_from_features(policy.w, nxt, block_, actions_);
            const std::size_t off = action_[i] * block_;
            const std::size_t col = next_a * block_;
            for (std::size_t r = 0; r < block_; ++r) {
                const double scaled = gamma * psi[r];
                double* row = a.row(static_cast<Eigen::Index>(off + r)).data() + col;
                for (std::size_t c = 0; c < block_; ++c) row[c] -= scaled * nxt[c];
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n_);
        Eigen::MatrixXd lhs = a * inv_n;
        lhs.diagonal().array() += ridge;
        const Eigen::VectorXd rhs = b_ * inv_n;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
        if (!lu.isInvertible()) throw std::runtime_error("lstdq: singular system");
        QWeights out{lu.solve(rhs)};
        if (!out.w.allFinite()) throw std::runtime_error("lstdq: non-finite solution");
        return out;
    }

    std::size_t dimension() const { return block_ * actions_; }

private:
    std::size_t block_, actions_, n_;
    RowMatrix psi_, next_psi_;
    std::vector<std::size_t> action_;
    std::vector<bool> terminal_;
    RowMatrix base_;
    Eigen::VectorXd b_;
};

/**
 * @brief LSTDQ: least-squares fixed point of the projected Bellman equation.
 *
 * Evaluates the greedy policy of policy_weights from the samples, solving
 * (A/n + ridge I) w = b/n with A = sum phi(s,a) (phi(s,a) - gamma phi(s', pi(s')))^T
 * and b = sum phi(s,a) r. Terminal successors contribute no phi(s', .).
 * Normalising by the sample count makes the ridge independent of data size.
 */
template <LinearBasis B>
QWeights lstdq(std::span<const TransitionSample<typename B::observation_type>> samples, const B& basis,
               DiscountFactor gamma, const QWeights& policy_weights, double ridge) {
    return LstdqSystem<B>(samples, basis).solve(policy_weights, gamma.value(), ridge);
}

struct LspiConfig {
    std::size_t max_iter = 30;
    double tol = 1e-3;
    double ridge = 1e-6;
};

struct LspiResult {
    QWeights weights;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Policy iteration with LSTDQ evaluation, starting from all-zero weights.
template <LinearBasis B>
LspiResult lspi_train(std::span<const TransitionSample<typename B::observation_type>> samples, const B& basis,
                      DiscountFactor gamma, const LspiConfig& cfg = {}) {
    if (cfg.max_iter < 1) throw std::invalid_argument("lspi: max_iter must be at least 1");
    const LstdqSystem<B> system(samples, basis);
    LspiResult res;
    res.weights.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.dimension()));
    for (res.iterations = 1; res.iterations <= cfg.max_iter; ++res.iterations) {
        QWeights next = system.solve(res.weights, gamma.value(), cfg.ridge);
        const double change = (next.w - res.weights.w).norm();
        res.weights = std::move(next);
        if (change < cfg.tol) {
            res.converged = true;
            break;
        }
    }
    res.iterations = std::min(res.iterations, cfg.max_iter);
    return res;
}

/**
 * Transitions from n_rollouts uniform-random-action episodes in env, each
 * started from a uniformly drawn point of the state box and cut at horizon.
 */
template <BoxedEnvironment E>
std::vector<TransitionSample<typename E::observation_type>> collect_model_rollouts(const E& env,
                                                                                   std::size_t n_rollouts,
                                                                                   std::size_t horizon, Rng& rng) {
    if (n_rollouts < 1) throw std::invalid_argument("need at least one rollout");
    const UniformRandomPolicy explore(env.action_count());
    std::vector<TransitionSample<typename E::observation_type>> out;
    for (std::size_t i = 0; i < n_rollouts; ++i) {
        const auto start = env.uniform_state(rng);
        append_transitions(rollout_from(env, explore, start, horizon, rng), out);
    }
    return out;
}

template <BoxedEnvironment E>
std::vector<TransitionSample<typename E::observation_type>> collect_model_rollouts(const ModelParams& theta,
                                                                                   std::size_t n_rollouts,
                                                                                   std::size_t horizon, Rng& rng) {
    return collect_model_rollouts(make_environment<E>(theta), n_rollouts, horizon, rng);
}

} // namespace abcrl
