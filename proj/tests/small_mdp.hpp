#pragma once

// Reference 3-state, 2-action MDP shared by the LSPI tests and the acceptance
// suite, with exact policy evaluation and value iteration to compare against.

#include <abcrl/lspi.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <vector>

namespace abcrl {

/// Three states, two actions; transition probabilities in quarters so a finite
/// sample set can carry the exact distribution.
struct SmallMdp {
    static constexpr std::size_t S = 3, A = 2;
    // quarters[s][a][s'] sum to 4
    std::array<std::array<std::array<int, S>, A>, S> quarters{{
        {{{2, 2, 0}, {0, 1, 3}}},
        {{{4, 0, 0}, {1, 0, 3}}},
        {{{0, 3, 1}, {2, 0, 2}}},
    }};
    std::array<std::array<double, A>, S> reward{{{1.0, 0.0}, {0.0, 0.5}, {0.8, 0.2}}};

    double p(std::size_t s, std::size_t a, std::size_t n) const { return quarters[s][a][n] / 4.0; }

    using Samples = std::vector<TransitionSample<Observation<1>>>;

    Samples samples() const {
        Samples out;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a)
                for (std::size_t n = 0; n < S; ++n)
                    for (int k = 0; k < quarters[s][a][n]; ++k)
                        out.push_back({{{double(s)}}, Action{a}, reward[s][a], {{double(n)}}, false});
        return out;
    }

    /// Q^pi from the Bellman equations, solved directly.
    Eigen::VectorXd evaluate(const std::array<std::size_t, S>& pi, double gamma) const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S * A, S * A);
        Eigen::VectorXd r(S * A);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) {
                const auto row = static_cast<Eigen::Index>(a * S + s);
                r[row] = reward[s][a];
                for (std::size_t n = 0; n < S; ++n) m(row, static_cast<Eigen::Index>(pi[n] * S + n)) -= gamma * p(s, a, n);
            }
        return m.partialPivLu().solve(r);
    }

    std::array<std::size_t, S> value_iteration_policy(double gamma) const {
        std::array<double, S> v{};
        for (int it = 0; it < 5000; ++it) {
            std::array<double, S> nv{};
            for (std::size_t s = 0; s < S; ++s) {
                nv[s] = -1e300;
                for (std::size_t a = 0; a < A; ++a) nv[s] = std::max(nv[s], q(s, a, v, gamma));
            }
            v = nv;
        }
        std::array<std::size_t, S> pi{};
        for (std::size_t s = 0; s < S; ++s) pi[s] = q(s, 1, v, gamma) > q(s, 0, v, gamma) ? 1 : 0;
        return pi;
    }

    double q(std::size_t s, std::size_t a, const std::array<double, S>& v, double gamma) const {
        double x = reward[s][a];
        for (std::size_t n = 0; n < S; ++n) x += gamma * p(s, a, n) * v[n];
        return x;
    }
};

} // namespace abcrl
