#ifndef BEHAVIOR_EPI_LHS_HPP
#define BEHAVIOR_EPI_LHS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace behavior_epi {

/**
 * @brief Latin hypercube sample: n_samples rows, one column per range.
 *
 * Each range is split into n_samples equal strata with one uniform draw per stratum; the stratum order
 * of every column is permuted independently.
 */
inline Eigen::MatrixXd latin_hypercube(const std::vector<std::pair<double, double>>& ranges, int n_samples,
                                       std::uint64_t seed)
{
    if (n_samples < 2) throw std::invalid_argument("latin_hypercube: need at least 2 samples");
    for (const auto& [lo, hi] : ranges) {
        if (!(hi > lo)) throw std::invalid_argument("latin_hypercube: degenerate range");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd out(n_samples, static_cast<Eigen::Index>(ranges.size()));
    std::vector<int> strata(static_cast<std::size_t>(n_samples));
    for (std::size_t c = 0; c < ranges.size(); ++c) {
        const auto [lo, hi] = ranges[c];
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (int i = 0; i < n_samples; ++i) {
            const double u = unif(rng);
            const double v = lo + (strata[static_cast<std::size_t>(i)] + u) * (hi - lo) / n_samples;
            out(i, static_cast<Eigen::Index>(c)) = std::min(v, std::nextafter(hi, lo));
        }
    }
    return out;
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_LHS_HPP
