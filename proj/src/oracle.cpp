#include "elixir/oracle.hpp"

#include <algorithm>
#include <thread>

#include "elixir/errors.hpp"
#include "elixir/estimators.hpp"

namespace elixir {

namespace {

void check_full_grid(const SettingsGrid& grid) {
    if (grid.step <= 0 || 100 % grid.step != 0)
        throw ConfigError("grid stride must divide 100");
    const std::size_t per_dim = static_cast<std::size_t>(100 / grid.step) + 1;
    if (grid.values.size() != per_dim * per_dim * per_dim * per_dim ||
        grid.values.front() != CameraSettings{0, 0, 0, 0} ||
        grid.values.back() != CameraSettings{100, 100, 100, 100})
        throw ConfigError("oracle sweeps need the full Cartesian settings grid");
}

template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    std::size_t workers = threads > 0
                              ? static_cast<std::size_t>(threads)
                              : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n == 0 ? std::size_t{1} : n);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

// Index navigation on the lexicographic full grid.
struct GridIndex {
    int step;
    std::size_t per_dim;

    explicit GridIndex(const SettingsGrid& grid)
        : step(grid.step), per_dim(static_cast<std::size_t>(100 / grid.step) + 1) {}

    std::size_t coord(const CameraSettings& s, int dim) const {
        return static_cast<std::size_t>(s[static_cast<std::size_t>(dim)] / step);
    }

    std::size_t neighbor(const CameraSettings& s, std::size_t center_idx, int dim,
                         int dir) const {
        const int raw = s[static_cast<std::size_t>(dim)] + dir * step;
        const int clamped = std::clamp(raw, kSettingMin, kSettingMax);
        const auto delta = static_cast<std::ptrdiff_t>(clamped / step) -
                           static_cast<std::ptrdiff_t>(coord(s, dim));
        std::size_t stride = 1;
        for (int d = kNumDims - 1; d > dim; --d) stride *= per_dim;
        return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(center_idx) +
                                        delta * static_cast<std::ptrdiff_t>(stride));
    }
};

// Sweep an arbitrary scoring function over the grid, then select the winner
// by (primary desc, neighbourhood-mean secondary desc, lexicographic asc).
template <typename ScoreFn>
OracleResult sweep(const SettingsGrid& grid, int threads, ScoreFn&& score_of) {
    check_full_grid(grid);
    const std::size_t n = grid.values.size();
    std::vector<double> primary(n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) primary[i] = score_of(grid.values[i]);
    });

    std::vector<double> secondary(n);
    const GridIndex gi(grid);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const CameraSettings& s = grid.values[i];
            double acc = 0.0;
            for (int dim = 0; dim < kNumDims; ++dim)
                for (const int dir : {-1, +1})
                    acc += primary[gi.neighbor(s, i, dim, dir)];
            secondary[i] = acc / 8.0;
        }
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (primary[i] > primary[best] ||
            (primary[i] == primary[best] && secondary[i] > secondary[best]))
            best = i; // lexicographic ascent is the iteration order itself
    }

    OracleResult result;
    result.best_settings = grid.values[best];
    result.primary_score = primary[best];
    result.secondary_score = secondary[best];
    result.evaluations = static_cast<std::int64_t>(n);
    return result;
}

} // namespace

OracleResult find_best_conf(const AuProfile& profile, const PhaseSpec& phase,
                            const SettingsGrid& grid, int threads) {
    return sweep(grid, threads, [&](const CameraSettings& s) {
        return true_accuracy(profile, s, phase);
    });
}

ConflictMatrix conflict_matrix(std::span<const AuProfile> profiles,
                               const PhaseSpec& phase, const SettingsGrid& grid,
                               int threads) {
    if (profiles.size() < 2)
        throw ConfigError("conflict matrix needs at least two AUs");
    ConflictMatrix m;
    for (const auto& p : profiles) m.au_names.push_back(p.name);
    m.entries.resize(profiles.size(), std::vector<double>(profiles.size(), 0.0));
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto best = find_best_conf(profiles[i], phase, grid, threads);
        for (std::size_t j = 0; j < profiles.size(); ++j)
            m.entries[i][j] = true_accuracy(profiles[j], best.best_settings, phase);
    }
    return m;
}

OracleResult common_optimal(std::span<const AuProfile> profiles,
                            const PhaseSpec& phase, const SettingsGrid& grid,
                            const AggregationStrategy& strategy, int threads) {
    if (profiles.empty())
        throw ConfigError("common_optimal needs at least one AU");
    if (strategy.kind == StrategyKind::Weighted &&
        strategy.weights.size() != profiles.size())
        throw ConfigError("weighted aggregation needs one weight per AU");
    return sweep(grid, threads, [&](const CameraSettings& s) {
        std::vector<double> per(profiles.size());
        for (std::size_t i = 0; i < profiles.size(); ++i)
            per[i] = true_accuracy(profiles[i], s, phase);
        return aggregate_value(per, strategy);
    });
}

PostTransformResult best_post_transform(const CameraSettings& captured,
                                        const AuProfile& profile,
                                        const PhaseSpec& phase,
                                        const SettingsGrid& transform_grid) {
    const CameraSettings identity{};
    if (std::find(transform_grid.values.begin(), transform_grid.values.end(),
                  identity) == transform_grid.values.end())
        throw ConfigError("transform grid must contain the identity [50,50,50,50]");

    PostTransformResult best;
    best.boosted_score = -1.0;
    for (const auto& t : transform_grid.values) {
        CameraSettings effective;
        for (int d = 0; d < kNumDims; ++d)
            effective[static_cast<std::size_t>(d)] =
                std::clamp(captured[static_cast<std::size_t>(d)] +
                               (t[static_cast<std::size_t>(d)] - kSettingDefault),
                           kSettingMin, kSettingMax);
        const double score = true_accuracy(profile, effective, phase);
        if (score > best.boosted_score) {
            best.boosted_score = score;
            best.transform = t;
        }
        // ties keep the earlier (lexicographically smaller) transform
    }
    return best;
}

} // namespace elixir
