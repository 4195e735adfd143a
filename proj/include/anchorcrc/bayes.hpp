#pragma once

#include <random>
#include <sstream>
#include <vector>

#include "anchorcrc/delta.hpp"
#include "anchorcrc/mle.hpp"
#include "anchorcrc/report.hpp"
#include "anchorcrc/rng.hpp"
#include "anchorcrc/stats.hpp"
#include "anchorcrc/types.hpp"

namespace anchorcrc {

/// One draw from the Dirichlet posterior over the 17 cell probabilities,
/// with the implied real-valued cell counts (not rounded).
struct PosteriorDraw {
    std::array<double, 17> probs{};
    RealCells counts{};
};

namespace detail {

inline PosteriorDraw sample_posterior_draw(const CellCounts& cells, std::mt19937_64& rng) {
    PosteriorDraw draw;
    double total = 0.0;
    for (std::size_t j = 0; j < 17; ++j) {
        // Jeffreys prior adds 0.5 to every cell; a Dirichlet draw is a
        // normalized vector of unit-scale gamma variates.
        std::gamma_distribution<double> gamma(static_cast<double>(cells.cells[j]) + 0.5, 1.0);
        draw.probs[j] = gamma(rng);
        total += draw.probs[j];
    }
    for (std::size_t j = 0; j < 17; ++j) {
        draw.probs[j] /= total;
        draw.counts[j] = draw.probs[j] * static_cast<double>(cells.n_tot);
    }
    return draw;
}

} // namespace detail

/// Posterior draws under the Jeffreys Dirichlet prior. Draw d uses its own
/// substream derived from (seed, d), so output is reproducible and
/// independent of execution order.
inline std::vector<PosteriorDraw> posterior_draws(const CellCounts& cells, int n_draws,
                                                  std::uint64_t seed) {
    cells.validate();
    if (n_draws < 1) {
        throw_invalid("at least one posterior draw is required");
    }
    std::vector<PosteriorDraw> draws;
    draws.reserve(static_cast<std::size_t>(n_draws));
    for (int d = 0; d < n_draws; ++d) {
        auto rng = make_rng(derive_seed(seed, rng_stream::posterior, static_cast<std::uint64_t>(d)));
        draws.push_back(detail::sample_posterior_draw(cells, rng));
    }
    return draws;
}

enum class BayesEstimator { crc, psi_hat };

/// Per-draw posterior values of all six estimator targets, from one shared
/// draw sequence. All posterior cells are strictly positive, so every draw
/// evaluates cleanly.
struct PosteriorTargets {
    std::vector<double> crc_mu_a, crc_mu_b, crc_ate;
    std::vector<double> psi_mu_a, psi_mu_b, psi_ate;
};

inline PosteriorTargets posterior_targets(const CellCounts& cells, int n_draws, std::uint64_t seed,
                                          bool want_crc = true, bool want_psi = true) {
    cells.validate();
    if (n_draws < 1) {
        throw_invalid("at least one posterior draw is required");
    }
    PosteriorTargets out;
    const auto n = static_cast<std::size_t>(n_draws);
    if (want_crc) {
        out.crc_mu_a.reserve(n);
        out.crc_mu_b.reserve(n);
        out.crc_ate.reserve(n);
    }
    if (want_psi) {
        out.psi_mu_a.reserve(n);
        out.psi_mu_b.reserve(n);
        out.psi_ate.reserve(n);
    }
    for (int d = 0; d < n_draws; ++d) {
        auto rng = make_rng(derive_seed(seed, rng_stream::posterior, static_cast<std::uint64_t>(d)));
        const PosteriorDraw draw = detail::sample_posterior_draw(cells, rng);
        if (want_crc) {
            const MLEstimates est = mle_params(draw.counts, static_cast<double>(cells.n_tot));
            const auto [mu_a, mu_b] = crc_point(est);
            out.crc_mu_a.push_back(mu_a);
            out.crc_mu_b.push_back(mu_b);
            out.crc_ate.push_back(mu_a - mu_b);
        }
        if (want_psi) {
            const double mu_a = psi_hat_mu_counts(draw.counts, Arm::A);
            const double mu_b = psi_hat_mu_counts(draw.counts, Arm::B);
            out.psi_mu_a.push_back(mu_a);
            out.psi_mu_b.push_back(mu_b);
            out.psi_ate.push_back(mu_a - mu_b);
        }
    }
    return out;
}

inline Interval percentile_interval(std::vector<double> values, double level,
                                    IntervalKind kind = IntervalKind::percentile) {
    std::sort(values.begin(), values.end());
    const double tail = (1.0 - level) / 2.0;
    return Interval{kind, level, percentile_sorted(values, tail), percentile_sorted(values, 1.0 - tail)};
}

/// Equal-tailed credible interval for the chosen estimator and target.
inline Interval credible_interval(const CellCounts& cells, BayesEstimator estimator, Target target,
                                  int n_draws, double level, std::uint64_t seed) {
    const bool crc = estimator == BayesEstimator::crc;
    const PosteriorTargets draws = posterior_targets(cells, n_draws, seed, crc, !crc);
    const std::vector<double>* series = nullptr;
    switch (target) {
    case Target::mu_a: series = crc ? &draws.crc_mu_a : &draws.psi_mu_a; break;
    case Target::mu_b: series = crc ? &draws.crc_mu_b : &draws.psi_mu_b; break;
    case Target::ate: series = crc ? &draws.crc_ate : &draws.psi_ate; break;
    }
    return percentile_interval(*series, level, IntervalKind::credible);
}

/// Audit dump of per-draw estimator values.
inline std::string draws_to_csv(const std::vector<double>& mu_a, const std::vector<double>& mu_b,
                                const std::vector<double>& ate) {
    std::ostringstream out;
    out << "draw_index,mu_a,mu_b,ate\n";
    char line[128];
    for (std::size_t d = 0; d < mu_a.size(); ++d) {
        std::snprintf(line, sizeof(line), "%zu,%.6g,%.6g,%.6g\n", d, mu_a[d], mu_b[d], ate[d]);
        out << line;
    }
    return out.str();
}

} // namespace anchorcrc
