#pragma once

#include <cmath>
#include <numeric>

#include "anchorcrc/mle.hpp"
#include "anchorcrc/report.hpp"
#include "anchorcrc/types.hpp"

namespace anchorcrc {

enum class DeltaMode { diagonal_parameter, full_multinomial };

namespace detail {

inline double cells_total(const RealCells& n) {
    return std::accumulate(n.begin(), n.end(), 0.0);
}

} // namespace detail

/// CRC response mean evaluated directly from (possibly fractional) cell
/// counts; the population size is the cell total.
inline double crc_mu_counts(const RealCells& n, Target target) {
    const MLEstimates est = mle_params(n, detail::cells_total(n));
    const auto [mu_a, mu_b] = crc_point(est);
    switch (target) {
    case Target::mu_a: return mu_a;
    case Target::mu_b: return mu_b;
    case Target::ate: return mu_a - mu_b;
    }
    throw_internal("unreachable target");
}

/// Condensed-table estimator evaluated from cell counts: scales the
/// stream-2-only captures up by the estimated sampling fraction of the
/// never-kept subpopulation.
inline double psi_hat_fraction(const RealCells& n, Arm arm) {
    const double total = detail::cells_total(n);
    if (arm == Arm::A) {
        const double n_arm = total - (n[6] + n[7] + n[10] + n[11] + n[14] + n[15]);
        const double kept = n[0] + n[1] + n[2] + n[3];
        return (n[4] + n[5] + n[12] + n[13]) / (n_arm - kept);
    }
    const double n_arm = total - (n[0] + n[1] + n[4] + n[5] + n[12] + n[13]);
    const double kept = n[6] + n[7] + n[8] + n[9];
    return (n[10] + n[11] + n[14] + n[15]) / (n_arm - kept);
}

inline double psi_hat_mu_counts(const RealCells& n, Arm arm) {
    const double total = detail::cells_total(n);
    double n_arm;
    double kept_responders;
    double other_responders;
    if (arm == Arm::A) {
        n_arm = total - (n[6] + n[7] + n[10] + n[11] + n[14] + n[15]);
        kept_responders = n[0] + n[2];
        other_responders = n[4] + n[12];
    } else {
        n_arm = total - (n[0] + n[1] + n[4] + n[5] + n[12] + n[13]);
        kept_responders = n[6] + n[8];
        other_responders = n[10] + n[14];
    }
    const double psi = psi_hat_fraction(n, arm);
    if (!(psi > 0.0)) {
        throw_degenerate(std::string("no-switch-data: sampling fraction for arm ") +
                         arm_label(arm) + " is zero");
    }
    return (kept_responders + other_responders / psi) / n_arm;
}

inline double psi_hat_mu_counts(const RealCells& n, Target target) {
    if (target == Target::ate) {
        return psi_hat_mu_counts(n, Arm::A) - psi_hat_mu_counts(n, Arm::B);
    }
    return psi_hat_mu_counts(n, target == Target::mu_a ? Arm::A : Arm::B);
}

/// Analytic gradient, on the count scale, of the degree-1 extension
/// g(n) = mu(n) * total(n) of the CRC estimator (the estimated responder
/// total). Component j equals the proportion-scale partial of the estimator.
inline RealCells crc_count_gradient(const RealCells& n, Target target) {
    if (target == Target::ate) {
        RealCells ga = crc_count_gradient(n, Target::mu_a);
        const RealCells gb = crc_count_gradient(n, Target::mu_b);
        for (std::size_t j = 0; j < ga.size(); ++j) {
            ga[j] -= gb[j];
        }
        return ga;
    }

    const double sum_a = n[0] + n[1] + n[2] + n[3] + n[10] + n[11]; // stream 1 assigned A
    const double sum_b = n[4] + n[5] + n[6] + n[7] + n[8] + n[9];   // stream 1 assigned B
    const double sum_out = n[12] + n[13] + n[14] + n[15] + n[16];   // outside stream 1
    RealCells g{};

    if (target == Target::mu_a) {
        const double d_kept = n[0] + n[1] + n[2] + n[3];
        const double d_switch = n[4] + n[5];
        const double d_out = n[12] + n[13];
        if (d_kept <= 0.0 || d_switch <= 0.0 || d_out <= 0.0) {
            throw_degenerate("degenerate-cell: empty response stratum for arm A");
        }
        const double r_kept = (n[0] + n[2]) / d_kept;
        const double r_switch = n[4] / d_switch;
        const double r_out = n[12] / d_out;
        const double g_resp = r_kept + sum_a * (n[1] + n[3]) / (d_kept * d_kept);
        const double g_nonresp = r_kept - sum_a * (n[0] + n[2]) / (d_kept * d_kept);
        g[0] = g_resp;
        g[1] = g_nonresp;
        g[2] = g_resp;
        g[3] = g_nonresp;
        g[4] = r_switch + sum_b * n[5] / (d_switch * d_switch);
        g[5] = r_switch - sum_b * n[4] / (d_switch * d_switch);
        g[6] = g[7] = g[8] = g[9] = r_switch;
        g[10] = g[11] = r_kept;
        g[12] = r_out + sum_out * n[13] / (d_out * d_out);
        g[13] = r_out - sum_out * n[12] / (d_out * d_out);
        g[14] = g[15] = g[16] = r_out;
        return g;
    }

    const double d_kept = n[6] + n[7] + n[8] + n[9];
    const double d_switch = n[10] + n[11];
    const double d_out = n[14] + n[15];
    if (d_kept <= 0.0 || d_switch <= 0.0 || d_out <= 0.0) {
        throw_degenerate("degenerate-cell: empty response stratum for arm B");
    }
    const double r_kept = (n[6] + n[8]) / d_kept;
    const double r_switch = n[10] / d_switch;
    const double r_out = n[14] / d_out;
    g[0] = g[1] = g[2] = g[3] = r_switch;
    g[4] = g[5] = r_kept;
    const double g_resp = r_kept + sum_b * (n[7] + n[9]) / (d_kept * d_kept);
    const double g_nonresp = r_kept - sum_b * (n[6] + n[8]) / (d_kept * d_kept);
    g[6] = g_resp;
    g[7] = g_nonresp;
    g[8] = g_resp;
    g[9] = g_nonresp;
    g[10] = r_switch + sum_a * n[11] / (d_switch * d_switch);
    g[11] = r_switch - sum_a * n[10] / (d_switch * d_switch);
    g[12] = g[13] = r_out;
    g[14] = r_out + sum_out * n[15] / (d_out * d_out);
    g[15] = r_out - sum_out * n[14] / (d_out * d_out);
    g[16] = r_out;
    return g;
}

/// Central-difference gradient of g(n) = mu(n) * total(n) with a relative
/// step on the count scale. mu must accept fractional cells.
template <typename MuFn>
RealCells fd_count_gradient(const RealCells& n, MuFn&& mu) {
    RealCells g{};
    for (std::size_t j = 0; j < n.size(); ++j) {
        const double h = 1e-6 * std::max(n[j], 1.0);
        RealCells up = n;
        RealCells down = n;
        up[j] += h;
        down[j] -= h;
        const double g_up = mu(up) * detail::cells_total(up);
        const double g_down = mu(down) * detail::cells_total(down);
        g[j] = (g_up - g_down) / (2.0 * h);
    }
    return g;
}

/// Multinomial delta-method variance from a proportion-scale gradient:
/// V = (1/N) [ sum p_j g_j^2 - (sum p_j g_j)^2 ].
inline double multinomial_variance(const RealCells& n, const RealCells& gradient) {
    const double total = detail::cells_total(n);
    double first = 0.0;
    double second = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
        const double p = n[j] / total;
        first += p * gradient[j];
        second += p * gradient[j] * gradient[j];
    }
    return (second - first * first) / total;
}

namespace detail {

// Partials of the CRC means with respect to the eight model parameters,
// in the order (s1_rate, assign_a, kept_a, switch_a, outside_a,
//               kept_b, switch_b, outside_b).
inline std::array<double, 8> crc_param_gradient(const MLEstimates& est, Target target) {
    if (target == Target::ate) {
        auto ga = crc_param_gradient(est, Target::mu_a);
        const auto gb = crc_param_gradient(est, Target::mu_b);
        for (std::size_t j = 0; j < ga.size(); ++j) {
            ga[j] -= gb[j];
        }
        return ga;
    }
    const double phi = MLEstimates::require(est.s1_rate, "s1_rate");
    const double phi_a = MLEstimates::require(est.assign_a, "assign_a");
    std::array<double, 8> g{};
    if (target == Target::mu_a) {
        const double kept = MLEstimates::require(est.resp_kept_a, "resp_kept_a");
        const double sw = MLEstimates::require(est.resp_switch_a, "resp_switch_a");
        const double out = MLEstimates::require(est.resp_outside_a, "resp_outside_a");
        g[0] = kept * phi_a + sw * (1.0 - phi_a) - out;
        g[1] = phi * (kept - sw);
        g[2] = phi_a * phi;
        g[3] = (1.0 - phi_a) * phi;
        g[4] = 1.0 - phi;
    } else {
        const double kept = MLEstimates::require(est.resp_kept_b, "resp_kept_b");
        const double sw = MLEstimates::require(est.resp_switch_b, "resp_switch_b");
        const double out = MLEstimates::require(est.resp_outside_b, "resp_outside_b");
        g[0] = kept * (1.0 - phi_a) + sw * phi_a - out;
        g[1] = phi * (sw - kept);
        g[5] = (1.0 - phi_a) * phi;
        g[6] = phi_a * phi;
        g[7] = 1.0 - phi;
    }
    return g;
}

inline double require_variance(const ParamEstimate& p, const char* name) {
    if (!p.defined()) {
        throw_degenerate(std::string("degenerate-cell: no data to estimate ") + name);
    }
    return p.variance;
}

} // namespace detail

/// Delta-method variance of the CRC estimator for the requested target.
///
/// diagonal_parameter sums squared partials against the eight closed-form
/// parameter variances (their covariances vanish under the multinomial
/// model); for the treatment difference the shared parameters are
/// differentiated jointly, which carries their covariance automatically.
/// full_multinomial propagates the 17-cell multinomial covariance through
/// the analytic count-scale gradient.
inline double delta_variance(const RealCells& cells, double n_tot, Target target, DeltaMode mode) {
    if (mode == DeltaMode::full_multinomial) {
        const RealCells g = crc_count_gradient(cells, target);
        return multinomial_variance(cells, g);
    }
    const MLEstimates est = mle_params(cells, n_tot);
    const auto grad = detail::crc_param_gradient(est, target);
    const double variances[8] = {
        detail::require_variance(est.s1_rate, "s1_rate"),
        detail::require_variance(est.assign_a, "assign_a"),
        grad[2] != 0.0 ? detail::require_variance(est.resp_kept_a, "resp_kept_a") : 0.0,
        grad[3] != 0.0 ? detail::require_variance(est.resp_switch_a, "resp_switch_a") : 0.0,
        grad[4] != 0.0 ? detail::require_variance(est.resp_outside_a, "resp_outside_a") : 0.0,
        grad[5] != 0.0 ? detail::require_variance(est.resp_kept_b, "resp_kept_b") : 0.0,
        grad[6] != 0.0 ? detail::require_variance(est.resp_switch_b, "resp_switch_b") : 0.0,
        grad[7] != 0.0 ? detail::require_variance(est.resp_outside_b, "resp_outside_b") : 0.0,
    };
    double v = 0.0;
    for (std::size_t j = 0; j < 8; ++j) {
        v += grad[j] * grad[j] * variances[j];
    }
    return v;
}

inline double delta_variance(const CellCounts& counts, Target target,
                             DeltaMode mode = DeltaMode::diagonal_parameter) {
    counts.validate();
    return delta_variance(to_real(counts), static_cast<double>(counts.n_tot), target, mode);
}

/// Variance of the condensed-table estimator via the multinomial engine;
/// its gradient is taken by central differences.
inline double psi_hat_variance(const RealCells& cells, Target target) {
    const RealCells g =
        fd_count_gradient(cells, [target](const RealCells& x) { return psi_hat_mu_counts(x, target); });
    return multinomial_variance(cells, g);
}

} // namespace anchorcrc
