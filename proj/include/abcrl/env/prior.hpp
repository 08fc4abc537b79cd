#pragma once

#include <abcrl/core.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcrl {

/// Product of independent uniform intervals over the parameter vector.
class PriorBox {
public:
    PriorBox(ModelParams lower, ModelParams upper) : lo_(std::move(lower)), hi_(std::move(upper)) {
        if (lo_.size() != hi_.size() || lo_.empty()) throw std::invalid_argument("prior box: bad dimensions");
        for (std::size_t i = 0; i < lo_.size(); ++i)
            if (!(lo_[i] <= hi_[i])) throw std::invalid_argument("prior box: inverted interval");
    }

    /// Interval i spans [theta_i / 2, 3 theta_i / 2], endpoints sorted so that
    /// negative centres also give a valid interval.
    static PriorBox centered(const ModelParams& center) {
        ModelParams lo(center.size()), hi(center.size());
        for (std::size_t i = 0; i < center.size(); ++i) {
            const double a = 0.5 * center[i];
            const double b = 1.5 * center[i];
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
        }
        return PriorBox(std::move(lo), std::move(hi));
    }

    /// Point mass.
    static PriorBox point(const ModelParams& theta) { return PriorBox(theta, theta); }

    std::size_t dimension() const { return lo_.size(); }
    const ModelParams& lower() const { return lo_; }
    const ModelParams& upper() const { return hi_; }

    ModelParams sample(Rng& rng) const {
        ModelParams theta(lo_.size());
        for (std::size_t i = 0; i < lo_.size(); ++i) theta[i] = uniform(rng, lo_[i], hi_[i]);
        return theta;
    }

    bool contains(const ModelParams& theta) const {
        if (theta.size() != lo_.size()) return false;
        for (std::size_t i = 0; i < lo_.size(); ++i)
            if (theta[i] < lo_[i] || theta[i] > hi_[i]) return false;
        return true;
    }

private:
    ModelParams lo_, hi_;
};

/// Prior over a finite list of parameter vectors.
class DiscretePrior {
public:
    DiscretePrior(std::vector<ModelParams> support, std::vector<double> weights)
        : support_(std::move(support)), cdf_(weights.size()) {
        if (support_.empty() || support_.size() != weights.size())
            throw std::invalid_argument("discrete prior: support and weights must match");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("discrete prior: negative weight");
            total += w;
        }
        if (!(total > 0.0)) throw std::invalid_argument("discrete prior: zero total weight");
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i] / total;
            cdf_[i] = acc;
        }
        cdf_.back() = 1.0;
    }

    static DiscretePrior uniform_over(std::vector<ModelParams> support) {
        std::vector<double> w(support.size(), 1.0);
        return DiscretePrior(std::move(support), std::move(w));
    }

    const std::vector<ModelParams>& support() const { return support_; }

    ModelParams sample(Rng& rng) const { return support_[sample_index(rng)]; }

    std::size_t sample_index(Rng& rng) const {
        const double u = uniform01(rng);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), support_.size() - 1);
    }

private:
    std::vector<ModelParams> support_;
    std::vector<double> cdf_;
};

/// Comma separated reals in the family's listed parameter order.
inline std::string format_params(const ModelParams& theta) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < theta.size(); ++i) os << (i ? "," : "") << theta[i];
    return os.str();
}

inline ModelParams parse_params(const std::string& text) {
    ModelParams out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("not a number: '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos)
            throw std::invalid_argument("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty parameter list");
    return out;
}

} // namespace abcrl
