#pragma once

#include <span>
#include <string>
#include <utility>

#include "elixir/frame.hpp"
#include "elixir/rng.hpp"
#include "elixir/scenario.hpp"
#include "elixir/settings.hpp"

namespace elixir {

// Per-AU accuracy estimate on the mAP-like 0..100 scale.
struct QualityEstimate {
    std::string au;
    double score = 0.0;
};

struct CorrelationReport {
    double pearson = 0.0;
    double spearman = 0.0;
    std::size_t sample_count = 0;
};

// Ground-truth accuracy of an AU at the given settings and phase:
// 100 * exp(-D / (2 sigma^2)) with D the weighted squared grid distance to
// the phase's optimum. Maximal (exactly 100) at the optimum.
double true_accuracy(const AuProfile& profile, const CameraSettings& settings,
                     const PhaseSpec& phase);

// Noisy estimator on top of the ground-truth surface:
// clamp(true_accuracy + N(0, noise_sigma), 0, 100).
// The frame is part of the interface so a statistics-driven estimator can
// slot in later; the synthetic surface does not read it.
QualityEstimate estimate(const AuProfile& profile, const Frame& frame,
                         const CameraSettings& settings, const PhaseSpec& phase,
                         double noise_sigma, Rng& rng);

// Pearson product-moment and Spearman rank (average ranks on ties) over
// (true, estimated) pairs. Throws UndefinedStatError when either column has
// zero variance, ConfigError when fewer than two pairs are given.
CorrelationReport correlation(std::span<const std::pair<double, double>> pairs);

} // namespace elixir
