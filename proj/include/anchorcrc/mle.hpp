#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "anchorcrc/types.hpp"

namespace anchorcrc {

/// One closed-form ML parameter estimate with its binomial-style variance.
/// An undefined parameter (zero denominator) carries NaN in both slots.
struct ParamEstimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double variance = std::numeric_limits<double>::quiet_NaN();

    bool defined() const { return !std::isnan(value); }
};

/// The eight closed-form MLEs of the 17-cell multinomial model. Their
/// covariances are all zero, which is what makes the diagonal delta-method
/// variance below exact for this parametrization.
struct MLEstimates {
    ParamEstimate s1_rate;        // share of the population in stream 1
    ParamEstimate assign_a;       // share of stream 1 assigned A
    ParamEstimate resp_kept_a;    // response | stream 1, assigned A, received A
    ParamEstimate resp_switch_a;  // response | stream 1, assigned B, switched to A
    ParamEstimate resp_outside_a; // response | outside stream 1, received A
    ParamEstimate resp_kept_b;
    ParamEstimate resp_switch_b;
    ParamEstimate resp_outside_b;
    double n_stream1 = 0.0;   // N1
    double n_stream1_a = 0.0; // N1 members assigned A
    std::vector<std::string> diagnostics;

    /// Returns the estimate value or raises a degenerate-cell error naming it.
    static double require(const ParamEstimate& p, const char* name) {
        if (!p.defined()) {
            throw_degenerate(std::string("degenerate-cell: no data to estimate ") + name);
        }
        return p.value;
    }
};

namespace detail {

inline ParamEstimate proportion_estimate(double numerator, double denominator, const char* name,
                                         std::vector<std::string>& diagnostics) {
    ParamEstimate e;
    if (denominator <= 0.0) {
        diagnostics.push_back(std::string("degenerate-cell:") + name);
        return e;
    }
    e.value = numerator / denominator;
    e.variance = e.value * (1.0 - e.value) / denominator;
    if (e.variance == 0.0) {
        diagnostics.push_back(std::string("variance-degenerate:") + name);
    }
    return e;
}

} // namespace detail

/// Closed-form MLEs from real-valued cells (posterior draws use fractional
/// counts, so the core accepts doubles).
inline MLEstimates mle_params(const RealCells& c, double n_tot) {
    MLEstimates est;
    // c[j] holds cell j+1.
    const double n1 = n_tot - (c[12] + c[13] + c[14] + c[15] + c[16]);
    const double n1a = c[0] + c[1] + c[2] + c[3] + c[10] + c[11];
    est.n_stream1 = n1;
    est.n_stream1_a = n1a;
    est.s1_rate = detail::proportion_estimate(n1, n_tot, "s1_rate", est.diagnostics);
    est.assign_a = detail::proportion_estimate(n1a, n1, "assign_a", est.diagnostics);
    est.resp_kept_a = detail::proportion_estimate(c[0] + c[2], c[0] + c[1] + c[2] + c[3],
                                                  "resp_kept_a", est.diagnostics);
    est.resp_switch_a = detail::proportion_estimate(c[4], c[4] + c[5], "resp_switch_a", est.diagnostics);
    est.resp_outside_a =
        detail::proportion_estimate(c[12], c[12] + c[13], "resp_outside_a", est.diagnostics);
    est.resp_kept_b = detail::proportion_estimate(c[6] + c[8], c[6] + c[7] + c[8] + c[9],
                                                  "resp_kept_b", est.diagnostics);
    est.resp_switch_b =
        detail::proportion_estimate(c[10], c[10] + c[11], "resp_switch_b", est.diagnostics);
    est.resp_outside_b =
        detail::proportion_estimate(c[14], c[14] + c[15], "resp_outside_b", est.diagnostics);
    return est;
}

inline MLEstimates mle_params(const CellCounts& counts) {
    counts.validate();
    return mle_params(to_real(counts), static_cast<double>(counts.n_tot));
}

/// Population response means for both arms from the fitted parameters:
/// a three-stratum weighted average (kept / switched / outside the cohort).
/// Requires all eight parameters; weights sum to one so both means lie in [0,1].
inline std::pair<double, double> crc_point(const MLEstimates& est) {
    const double phi = MLEstimates::require(est.s1_rate, "s1_rate");
    const double phi_a = MLEstimates::require(est.assign_a, "assign_a");
    const double w_kept_a = phi_a * phi;
    const double w_switch_a = (1.0 - phi_a) * phi;
    const double w_outside = 1.0 - phi;
    const double mu_a = MLEstimates::require(est.resp_kept_a, "resp_kept_a") * w_kept_a +
                        MLEstimates::require(est.resp_switch_a, "resp_switch_a") * w_switch_a +
                        MLEstimates::require(est.resp_outside_a, "resp_outside_a") * w_outside;
    const double mu_b = MLEstimates::require(est.resp_kept_b, "resp_kept_b") * w_switch_a +
                        MLEstimates::require(est.resp_switch_b, "resp_switch_b") * w_kept_a +
                        MLEstimates::require(est.resp_outside_b, "resp_outside_b") * w_outside;
    return {mu_a, mu_b};
}

} // namespace anchorcrc
