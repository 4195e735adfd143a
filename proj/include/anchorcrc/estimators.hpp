#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "anchorcrc/cells.hpp"
#include "anchorcrc/delta.hpp"
#include "anchorcrc/mle.hpp"
#include "anchorcrc/report.hpp"
#include "anchorcrc/stats.hpp"
#include "anchorcrc/types.hpp"

namespace anchorcrc {

namespace detail {

/// Wald interval; proportion-scale intervals are clipped to [0,1] with a
/// diagnostic note when the clip bites.
inline Interval wald_interval(double point, double se, double level, bool clip_to_unit,
                              std::vector<std::string>& diagnostics) {
    const double z = normal_critical(level);
    Interval ci{IntervalKind::wald, level, point - z * se, point + z * se};
    if (clip_to_unit) {
        const double lower = std::max(0.0, ci.lower);
        const double upper = std::min(1.0, ci.upper);
        if (lower != ci.lower || upper != ci.upper) {
            diagnostics.emplace_back("interval-truncated");
        }
        ci.lower = lower;
        ci.upper = upper;
    }
    return ci;
}

} // namespace detail

/// Mean response under `arm` from the anchor-stream sample alone: the
/// plain binomial proportion among those randomized to the arm. No
/// finite-population correction is applied.
inline EstimateReport rs_estimate(const CellCounts& counts, Arm arm, double level = 0.95) {
    counts.validate();
    std::int64_t n_arm;
    std::int64_t responders;
    if (arm == Arm::A) {
        n_arm = counts.cell(1) + counts.cell(2) + counts.cell(5) + counts.cell(6) +
                counts.cell(13) + counts.cell(14);
        responders = counts.cell(1) + counts.cell(5) + counts.cell(13);
    } else {
        n_arm = counts.cell(7) + counts.cell(8) + counts.cell(11) + counts.cell(12) +
                counts.cell(15) + counts.cell(16);
        responders = counts.cell(7) + counts.cell(11) + counts.cell(15);
    }
    if (n_arm == 0) {
        throw_degenerate(std::string("no-data: nobody randomized to arm ") + arm_label(arm));
    }
    EstimateReport rep;
    rep.method = Method::rs;
    rep.target = target_of(arm);
    rep.point = static_cast<double>(responders) / static_cast<double>(n_arm);
    rep.se = std::sqrt(rep.point * (1.0 - rep.point) / static_cast<double>(n_arm));
    rep.interval = detail::wald_interval(rep.point, *rep.se, level, true, rep.diagnostics);
    return rep;
}

/// Mean response among cohort members assigned to and receiving the arm;
/// biased whenever the cohort is non-representative, included as the
/// observational baseline.
inline EstimateReport stream1_naive(const CellCounts& counts, Arm arm, double level = 0.95) {
    counts.validate();
    std::int64_t denom;
    std::int64_t responders;
    if (arm == Arm::A) {
        denom = counts.cell(1) + counts.cell(2) + counts.cell(3) + counts.cell(4);
        responders = counts.cell(1) + counts.cell(3);
    } else {
        denom = counts.cell(7) + counts.cell(8) + counts.cell(9) + counts.cell(10);
        responders = counts.cell(7) + counts.cell(9);
    }
    if (denom == 0) {
        throw_degenerate(std::string("no-data: no unswitched cohort members on arm ") +
                         arm_label(arm));
    }
    EstimateReport rep;
    rep.method = Method::stream1_naive;
    rep.target = target_of(arm);
    rep.point = static_cast<double>(responders) / static_cast<double>(denom);
    rep.se = std::sqrt(rep.point * (1.0 - rep.point) / static_cast<double>(denom));
    rep.interval = detail::wald_interval(rep.point, *rep.se, level, true, rep.diagnostics);
    return rep;
}

struct ChapmanParts {
    double point = 0.0;
    double variance = 0.0;
    std::int64_t row_total = 0;    // responders seen by stream 1
    std::int64_t column_total = 0; // responders seen by stream 2
    std::int64_t distinct = 0;     // responders seen at least once
};

inline ChapmanParts chapman_parts(const CondensedCounts& cond) {
    if (cond.n_tot_arm <= 0) {
        throw_invalid("effective population size must be positive");
    }
    ChapmanParts parts;
    parts.row_total = cond.m11 + cond.m10;
    parts.column_total = cond.m11 + cond.m01;
    parts.distinct = cond.m11 + cond.m10 + cond.m01;
    const double n1dot = static_cast<double>(parts.row_total);
    const double ndot1 = static_cast<double>(parts.column_total);
    const double m11 = static_cast<double>(cond.m11);
    const double n_tot = static_cast<double>(cond.n_tot_arm);
    parts.point = ((n1dot + 1.0) * (ndot1 + 1.0) / (m11 + 1.0) - 1.0) / n_tot;
    parts.variance = (n1dot + 1.0) * (ndot1 + 1.0) * n1dot * ndot1 /
                     ((m11 + 1.0) * (m11 + 1.0) * (m11 + 2.0)) / (n_tot * n_tot);
    return parts;
}

/// Transformed-logit interval for the Chapman estimate, anchored at the
/// count of distinct observed responders so the lower bound can never fall
/// below what was directly seen. Falls back to a clipped Wald interval when
/// the estimate does not exceed the observed count.
inline Interval chapman_logit_ci(const CondensedCounts& cond, double level,
                                 std::vector<std::string>* diagnostics = nullptr) {
    const ChapmanParts parts = chapman_parts(cond);
    const double n_tot = static_cast<double>(cond.n_tot_arm);
    const double d = static_cast<double>(parts.distinct);
    const double n_hat = parts.point * n_tot;
    const double sigma_n = std::sqrt(parts.variance) * n_tot;
    const double z = normal_critical(level);
    if (n_hat <= d) {
        std::vector<std::string> local;
        auto& diag = diagnostics ? *diagnostics : local;
        diag.emplace_back("logit-fallback-wald");
        Interval ci = detail::wald_interval(parts.point, std::sqrt(parts.variance), level, true, diag);
        ci.lower = std::max(ci.lower, d / n_tot);
        ci.upper = std::max(ci.upper, ci.lower);
        return ci;
    }
    const double spread = std::exp(z * sigma_n / (n_hat - d));
    Interval ci{IntervalKind::transformed_logit, level, (d + (n_hat - d) / spread) / n_tot,
                (d + (n_hat - d) * spread) / n_tot};
    return ci;
}

/// Chapman capture-recapture estimate of the arm's response rate over the
/// effective population. The point can exceed 1 on sparse overlap; this is
/// reported with a diagnostic rather than truncated.
inline EstimateReport chapman_estimate(const CondensedCounts& cond, double level = 0.95) {
    const ChapmanParts parts = chapman_parts(cond);
    EstimateReport rep;
    rep.method = Method::chapman;
    rep.target = target_of(cond.arm);
    rep.point = parts.point;
    rep.se = std::sqrt(parts.variance);
    if (rep.point > 1.0) {
        rep.diagnostics.emplace_back("estimate-above-one");
    }
    rep.interval = chapman_logit_ci(cond, level, &rep.diagnostics);
    return rep;
}

/// CRC response-mean estimate for one arm with a delta-method Wald interval.
inline EstimateReport crc_estimate(const CellCounts& counts, Arm arm, double level = 0.95,
                                   DeltaMode mode = DeltaMode::diagonal_parameter) {
    counts.validate();
    const MLEstimates est = mle_params(counts);
    const auto [mu_a, mu_b] = crc_point(est);
    EstimateReport rep;
    rep.method = Method::crc;
    rep.target = target_of(arm);
    rep.point = arm == Arm::A ? mu_a : mu_b;
    rep.se = std::sqrt(delta_variance(counts, rep.target, mode));
    rep.diagnostics = est.diagnostics;
    rep.interval = detail::wald_interval(rep.point, *rep.se, level, true, rep.diagnostics);
    return rep;
}

enum class AteVariance {
    joint,       // differentiate mu_a - mu_b jointly (shared-parameter covariance included)
    independent, // sum the per-arm variances
};

/// CRC estimate of the treatment difference.
inline EstimateReport crc_ate(const CellCounts& counts, double level = 0.95,
                              DeltaMode mode = DeltaMode::diagonal_parameter,
                              AteVariance variance_rule = AteVariance::joint) {
    counts.validate();
    const MLEstimates est = mle_params(counts);
    const auto [mu_a, mu_b] = crc_point(est);
    EstimateReport rep;
    rep.method = Method::crc;
    rep.target = Target::ate;
    rep.point = mu_a - mu_b;
    const double variance = variance_rule == AteVariance::joint
                                ? delta_variance(counts, Target::ate, mode)
                                : delta_variance(counts, Target::mu_a, mode) +
                                      delta_variance(counts, Target::mu_b, mode);
    rep.se = std::sqrt(variance);
    rep.diagnostics = est.diagnostics;
    rep.interval = detail::wald_interval(rep.point, *rep.se, level, false, rep.diagnostics);
    return rep;
}

/// Condensed-table estimate for one arm; the SE comes from the multinomial
/// delta engine applied to this estimator's cell function.
inline EstimateReport psi_hat_estimate(const CellCounts& counts, Arm arm, double level = 0.95) {
    counts.validate();
    const RealCells cells = to_real(counts);
    EstimateReport rep;
    rep.method = Method::psi_hat;
    rep.target = target_of(arm);
    rep.point = psi_hat_mu_counts(cells, arm);
    rep.se = std::sqrt(psi_hat_variance(cells, rep.target));
    if (rep.point > 1.0) {
        rep.diagnostics.emplace_back("estimate-above-one");
    }
    rep.interval = detail::wald_interval(rep.point, *rep.se, level, true, rep.diagnostics);
    return rep;
}

inline EstimateReport psi_hat_ate(const CellCounts& counts, double level = 0.95) {
    counts.validate();
    const RealCells cells = to_real(counts);
    EstimateReport rep;
    rep.method = Method::psi_hat;
    rep.target = Target::ate;
    rep.point = psi_hat_mu_counts(cells, Target::ate);
    rep.se = std::sqrt(psi_hat_variance(cells, Target::ate));
    rep.interval = detail::wald_interval(rep.point, *rep.se, level, false, rep.diagnostics);
    return rep;
}

/// Composes a treatment-difference report from two per-arm reports of the
/// same method, with an optional covariance between the two estimates
/// (or a precomputed variance for the difference itself).
inline EstimateReport ate_from_reports(const EstimateReport& report_a, const EstimateReport& report_b,
                                       double covariance = 0.0) {
    if (report_a.method != report_b.method) {
        throw_invalid(std::string("cannot combine ") + to_string(report_a.method) + " with " +
                      to_string(report_b.method) + " into a treatment difference");
    }
    if (report_a.interval && report_b.interval &&
        report_a.interval->level != report_b.interval->level) {
        throw_invalid("per-arm reports carry different interval levels");
    }
    EstimateReport rep;
    rep.method = report_a.method;
    rep.target = Target::ate;
    rep.point = report_a.point - report_b.point;
    if (report_a.se && report_b.se) {
        const double v = *report_a.se * *report_a.se + *report_b.se * *report_b.se -
                         2.0 * covariance;
        rep.se = std::sqrt(std::max(0.0, v));
        const double level = report_a.interval ? report_a.interval->level : 0.95;
        rep.interval = detail::wald_interval(rep.point, *rep.se, level, false, rep.diagnostics);
    }
    return rep;
}

inline EstimateReport ate_from_reports_with_variance(const EstimateReport& report_a,
                                                     const EstimateReport& report_b,
                                                     double ate_variance) {
    if (report_a.method != report_b.method) {
        throw_invalid("cannot combine reports from different methods");
    }
    EstimateReport rep;
    rep.method = report_a.method;
    rep.target = Target::ate;
    rep.point = report_a.point - report_b.point;
    rep.se = std::sqrt(std::max(0.0, ate_variance));
    const double level = report_a.interval ? report_a.interval->level : 0.95;
    rep.interval = detail::wald_interval(rep.point, *rep.se, level, false, rep.diagnostics);
    return rep;
}

} // namespace anchorcrc
