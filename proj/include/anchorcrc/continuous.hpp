#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "anchorcrc/bayes.hpp"
#include "anchorcrc/report.hpp"
#include "anchorcrc/rng.hpp"
#include "anchorcrc/stats.hpp"
#include "anchorcrc/types.hpp"

namespace anchorcrc {

/// Ingredients of the direct-standardization estimator for one arm: the
/// three subgroup outcome means and their estimated population shares.
struct StandardizationInputs {
    double ybar_kept = 0.0;
    double ybar_switch = 0.0;
    double ybar_outside = 0.0;
    double w_kept = 0.0;
    double w_switch = 0.0;
    double w_outside = 0.0;
};

namespace detail {

// Flattened per-record view used by the resampling loops.
struct ContRecord {
    double y_cont = 0.0;
    bool has_y_cont = false;
    bool s1 = false;
    bool s1_assigned_a = false;
    std::int8_t group_a = -1; // 0 kept, 1 switched-in, 2 outside the cohort
    std::int8_t group_b = -1;
    std::int8_t s2_arm = -1; // 0 = randomized to A, 1 = to B
};

inline ContRecord make_cont_record(const IndividualRecord& r) {
    validate_record(r);
    ContRecord v;
    v.s1 = r.s1;
    v.s1_assigned_a = r.s1 && *r.t1 == Arm::A;
    if (r.y_cont) {
        v.y_cont = *r.y_cont;
        v.has_y_cont = true;
    }
    if (r.s2) {
        v.s2_arm = *r.t2 == Arm::A ? 0 : 1;
    }
    if (r.final_treatment) {
        const int arm_idx = *r.final_treatment == Arm::A ? 0 : 1;
        std::int8_t group;
        if (!r.s1) {
            group = 2;
        } else if ((*r.t1 == Arm::A) == (arm_idx == 0)) {
            group = 0;
        } else {
            group = 1;
        }
        (arm_idx == 0 ? v.group_a : v.group_b) = group;
    }
    return v;
}

struct ContTallies {
    double n1 = 0.0;
    double n1_assigned_a = 0.0;
    double group_sum[2][3] = {};
    double group_count[2][3] = {};
    double s2_sum[2] = {};
    double s2_count[2] = {};

    void add(const ContRecord& v) {
        if (v.s1) {
            n1 += 1.0;
            if (v.s1_assigned_a) {
                n1_assigned_a += 1.0;
            }
        }
        if (!v.has_y_cont) {
            return;
        }
        if (v.group_a >= 0) {
            group_sum[0][v.group_a] += v.y_cont;
            group_count[0][v.group_a] += 1.0;
        }
        if (v.group_b >= 0) {
            group_sum[1][v.group_b] += v.y_cont;
            group_count[1][v.group_b] += 1.0;
        }
        if (v.s2_arm >= 0) {
            s2_sum[v.s2_arm] += v.y_cont;
            s2_count[v.s2_arm] += 1.0;
        }
    }
};

inline const char* group_name(int g) {
    switch (g) {
    case 0: return "kept";
    case 1: return "switched";
    default: return "outside";
    }
}

inline StandardizationInputs standardization_from_tallies(const ContTallies& t, Arm arm,
                                                          double n_tot) {
    const int a = arm == Arm::A ? 0 : 1;
    for (int g = 0; g < 3; ++g) {
        if (t.group_count[a][g] == 0.0) {
            throw_degenerate(std::string("degenerate-stratum: no continuous outcomes in the '") +
                             group_name(g) + "' subgroup for arm " + arm_label(arm));
        }
    }
    if (t.n1 == 0.0) {
        throw_degenerate("degenerate-stratum: empty cohort, shares are undefined");
    }
    const double phi = t.n1 / n_tot;
    const double phi_a = t.n1_assigned_a / t.n1;
    StandardizationInputs in;
    in.ybar_kept = t.group_sum[a][0] / t.group_count[a][0];
    in.ybar_switch = t.group_sum[a][1] / t.group_count[a][1];
    in.ybar_outside = t.group_sum[a][2] / t.group_count[a][2];
    const double w_assigned_arm = arm == Arm::A ? phi_a * phi : (1.0 - phi_a) * phi;
    const double w_assigned_other = arm == Arm::A ? (1.0 - phi_a) * phi : phi_a * phi;
    in.w_kept = w_assigned_arm;
    in.w_switch = w_assigned_other;
    in.w_outside = 1.0 - phi;
    return in;
}

inline double standardized_value(const ContTallies& t, Arm arm, double n_tot) {
    const StandardizationInputs in = standardization_from_tallies(t, arm, n_tot);
    return in.ybar_kept * in.w_kept + in.ybar_switch * in.w_switch + in.ybar_outside * in.w_outside;
}

inline double stream2_value(const ContTallies& t, Arm arm) {
    const int a = arm == Arm::A ? 0 : 1;
    if (t.s2_count[a] == 0.0) {
        throw_degenerate(std::string("no-data: no anchor-stream outcomes for arm ") +
                         arm_label(arm));
    }
    return t.s2_sum[a] / t.s2_count[a];
}

inline std::vector<ContRecord> observed_cont_records(std::span<const IndividualRecord> records) {
    std::vector<ContRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.observed()) {
            out.push_back(make_cont_record(r));
        }
    }
    return out;
}

inline ContTallies tally_all(const std::vector<ContRecord>& views) {
    ContTallies t;
    for (const auto& v : views) {
        t.add(v);
    }
    return t;
}

} // namespace detail

/// The subgroup means and shares feeding the standardized estimator.
inline StandardizationInputs standardization_inputs(std::span<const IndividualRecord> records,
                                                    std::int64_t n_tot, Arm arm) {
    const auto views = detail::observed_cont_records(records);
    return detail::standardization_from_tallies(detail::tally_all(views), arm,
                                                static_cast<double>(n_tot));
}

/// Direct-standardization estimate of the continuous outcome mean under the
/// arm: subgroup means weighted by estimated population shares (shares sum
/// to one). The SE comes from bootstrap_ci, not from this operation.
inline EstimateReport standardized_mean(std::span<const IndividualRecord> records,
                                        std::int64_t n_tot, Arm arm) {
    if (n_tot <= 0) {
        throw_invalid("population size must be positive");
    }
    const auto views = detail::observed_cont_records(records);
    EstimateReport rep;
    rep.method = Method::standardized;
    rep.target = target_of(arm);
    rep.point = detail::standardized_value(detail::tally_all(views), arm,
                                           static_cast<double>(n_tot));
    return rep;
}

/// Mean outcome among cohort members assigned to and keeping the arm.
inline EstimateReport stream1_mean(std::span<const IndividualRecord> records, Arm arm) {
    const auto views = detail::observed_cont_records(records);
    const auto t = detail::tally_all(views);
    const int a = arm == Arm::A ? 0 : 1;
    if (t.group_count[a][0] == 0.0) {
        throw_degenerate(std::string("no-data: no unswitched cohort outcomes for arm ") +
                         arm_label(arm));
    }
    EstimateReport rep;
    rep.method = Method::stream1_only;
    rep.target = target_of(arm);
    rep.point = t.group_sum[a][0] / t.group_count[a][0];
    return rep;
}

/// Mean outcome among anchor-stream members randomized to the arm.
inline EstimateReport stream2_mean(std::span<const IndividualRecord> records, Arm arm) {
    const auto views = detail::observed_cont_records(records);
    EstimateReport rep;
    rep.method = Method::stream2_only;
    rep.target = target_of(arm);
    rep.point = detail::stream2_value(detail::tally_all(views), arm);
    return rep;
}

enum class ContinuousEstimator { standardized, stream2 };

struct BootstrapResult {
    double se = 0.0;
    Interval interval;
    int redraws = 0; // degenerate resamples that were discarded and redrawn
};

namespace detail {

inline double evaluate_cont(const ContTallies& t, ContinuousEstimator kind, Target target,
                            double n_tot) {
    if (kind == ContinuousEstimator::standardized) {
        switch (target) {
        case Target::mu_a: return standardized_value(t, Arm::A, n_tot);
        case Target::mu_b: return standardized_value(t, Arm::B, n_tot);
        case Target::ate:
            return standardized_value(t, Arm::A, n_tot) - standardized_value(t, Arm::B, n_tot);
        }
    }
    switch (target) {
    case Target::mu_a: return stream2_value(t, Arm::A);
    case Target::mu_b: return stream2_value(t, Arm::B);
    case Target::ate: return stream2_value(t, Arm::A) - stream2_value(t, Arm::B);
    }
    throw_internal("unreachable target");
}

} // namespace detail

/// Bootstrap over the observed list (members seen by either stream) for
/// several targets at once, sharing one resample sequence. The unobserved
/// remainder of the population is fixed, so the cohort share is re-estimated
/// from each resample against the same n_tot. Resample k draws from its own
/// substream; a resample that cannot evaluate a target is discarded for that
/// target and counted. Resamples continue until every target has m values.
inline std::vector<BootstrapResult> bootstrap_multi(std::span<const IndividualRecord> records,
                                                    std::int64_t n_tot, ContinuousEstimator kind,
                                                    std::span<const Target> targets, int m,
                                                    double level, std::uint64_t seed) {
    if (m < 2) {
        throw_invalid("bootstrap needs at least two resamples");
    }
    const auto views = detail::observed_cont_records(records);
    if (views.empty()) {
        throw_degenerate("no-data: nothing observed to resample");
    }
    const std::size_t n_obs = views.size();
    std::vector<std::vector<double>> values(targets.size());
    std::vector<int> failures(targets.size(), 0);
    for (auto& v : values) {
        v.reserve(static_cast<std::size_t>(m));
    }

    auto all_full = [&] {
        for (const auto& v : values) {
            if (v.size() < static_cast<std::size_t>(m)) return false;
        }
        return true;
    };

    for (std::uint64_t attempt = 0; !all_full(); ++attempt) {
        auto rng = make_rng(derive_seed(seed, rng_stream::bootstrap, attempt));
        std::uniform_int_distribution<std::size_t> pick(0, n_obs - 1);
        detail::ContTallies t;
        for (std::size_t i = 0; i < n_obs; ++i) {
            t.add(views[pick(rng)]);
        }
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            if (values[ti].size() >= static_cast<std::size_t>(m)) {
                continue;
            }
            try {
                values[ti].push_back(
                    detail::evaluate_cont(t, kind, targets[ti], static_cast<double>(n_tot)));
            } catch (const error&) {
                if (++failures[ti] > m) {
                    throw_degenerate("bootstrap-failure: most resamples hit an empty subgroup");
                }
            }
        }
    }

    std::vector<BootstrapResult> results(targets.size());
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        results[ti].se = sample_sd(values[ti]);
        results[ti].interval = percentile_interval(values[ti], level);
        results[ti].redraws = failures[ti];
    }
    return results;
}

inline BootstrapResult bootstrap_ci(std::span<const IndividualRecord> records, std::int64_t n_tot,
                                    ContinuousEstimator kind, Target target, int m, double level,
                                    std::uint64_t seed) {
    const Target targets[1] = {target};
    return bootstrap_multi(records, n_tot, kind, targets, m, level, seed)[0];
}

} // namespace anchorcrc
