#include "elixir/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "elixir/errors.hpp"

namespace elixir {

double true_accuracy(const AuProfile& profile, const CameraSettings& settings,
                     const PhaseSpec& phase) {
    const CameraSettings& opt = profile.optimum_for(phase);
    double dist = 0.0;
    for (int i = 0; i < kNumDims; ++i) {
        const double d = static_cast<double>(settings[i] - opt[i]) / 10.0;
        dist += profile.dimension_weights[static_cast<std::size_t>(i)] * d * d;
    }
    return 100.0 * std::exp(-dist / (2.0 * profile.width * profile.width));
}

QualityEstimate estimate(const AuProfile& profile, const Frame& frame,
                         const CameraSettings& settings, const PhaseSpec& phase,
                         double noise_sigma, Rng& rng) {
    (void)frame; // synthetic surface; see header
    if (noise_sigma < 0) throw ConfigError("noise_sigma must be >= 0");
    double score = true_accuracy(profile, settings, phase);
    if (noise_sigma > 0) score += rng.gaussian(0.0, noise_sigma);
    return QualityEstimate{profile.name, std::clamp(score, 0.0, 100.0)};
}

namespace {

// Average ranks, ties mapped to the mean of their rank range.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&values](std::size_t a, std::size_t b) {
        return values[a] < values[b];
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson_of(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double inv = 1.0 / static_cast<double>(n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx *= inv;
    my *= inv;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UndefinedStatError("correlation undefined: zero variance column");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

CorrelationReport correlation(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2)
        throw ConfigError("correlation needs at least two pairs");
    std::vector<double> x, y;
    x.reserve(pairs.size());
    y.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        x.push_back(a);
        y.push_back(b);
    }
    CorrelationReport report;
    report.sample_count = pairs.size();
    report.pearson = pearson_of(x, y);
    report.spearman = pearson_of(average_ranks(x), average_ranks(y));
    return report;
}

} // namespace elixir
