#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <vector>

#include "anchorcrc/bayes.hpp"
#include "anchorcrc/continuous.hpp"
#include "anchorcrc/estimators.hpp"
#include "anchorcrc/scenario.hpp"
#include "anchorcrc/stats.hpp"

namespace anchorcrc {

struct MonteCarloOptions {
    int n_reps = 2000;
    std::vector<Method> methods; // empty selects every method for the scenario mode
    double level = 0.95;
    int posterior_draws = 1000;
    int bootstrap_m = 1000;
    int threads = 0; // 0 = hardware concurrency
    std::uint64_t seed = 0;
};

/// One line of the simulation summary: a (method, target) pair, under one
/// interval kind when the method produces intervals. A replicate on which
/// the method raised a degeneracy error is excluded and counted in n_failed.
struct SummaryRow {
    Method method = Method::rs;
    Target target = Target::mu_a;
    std::optional<IntervalKind> ci_kind;
    double mean = 0.0;
    std::optional<double> sd;
    std::optional<double> avg_se;
    std::optional<double> avg_width;
    std::optional<double> coverage_pct;
    int n_failed = 0;
    int n_reps = 0;
};

struct MonteCarloSummary {
    std::vector<SummaryRow> rows;
    ScenarioTruth truth;
    int n_reps = 0;
};

inline const SummaryRow& find_row(const MonteCarloSummary& summary, Method method, Target target,
                                  std::optional<IntervalKind> kind = std::nullopt) {
    for (const auto& row : summary.rows) {
        if (row.method == method && row.target == target && (!kind || row.ci_kind == kind)) {
            return row;
        }
    }
    throw_invalid(std::string("no summary row for ") + to_string(method) + "/" + to_string(target));
}

namespace detail {

inline constexpr Target all_targets[3] = {Target::mu_a, Target::mu_b, Target::ate};

struct SlotSpec {
    Method method;
    Target target;
    std::vector<IntervalKind> kinds;
    bool has_se = true;
};

struct RepResult {
    bool ok = false;
    double point = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();
    double lower[2] = {0.0, 0.0};
    double upper[2] = {0.0, 0.0};
};

inline std::vector<Method> default_methods(bool continuous) {
    if (continuous) {
        return {Method::stream1_only, Method::stream2_only, Method::standardized};
    }
    return {Method::stream1_naive, Method::rs, Method::chapman, Method::psi_hat, Method::crc};
}

inline std::vector<SlotSpec> build_slots(const std::vector<Method>& methods) {
    std::vector<SlotSpec> slots;
    for (Method m : methods) {
        for (Target t : all_targets) {
            SlotSpec s{m, t, {}, true};
            switch (m) {
            case Method::stream1_naive:
            case Method::rs:
                s.kinds = {IntervalKind::wald};
                break;
            case Method::chapman:
                s.kinds = {t == Target::ate ? IntervalKind::wald : IntervalKind::transformed_logit};
                break;
            case Method::crc:
            case Method::psi_hat:
                s.kinds = {IntervalKind::wald, IntervalKind::credible};
                break;
            case Method::standardized:
            case Method::stream2_only:
                s.kinds = {IntervalKind::percentile};
                break;
            case Method::stream1_only:
                s.kinds = {};
                s.has_se = false;
                break;
            }
            slots.push_back(std::move(s));
        }
    }
    return slots;
}

inline int slot_index(const std::vector<SlotSpec>& slots, Method m, Target t) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].method == m && slots[i].target == t) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

class RepWriter {
  public:
    RepWriter(const std::vector<SlotSpec>& slots, std::vector<std::vector<RepResult>>& results,
              std::int64_t rep)
        : slots_(slots), results_(results), rep_(rep) {}

    bool wanted(Method m) const { return slot_index(slots_, m, Target::mu_a) >= 0; }

    void set(Method m, Target t, const EstimateReport& rep_est,
             const std::optional<Interval>& second = std::nullopt) {
        const int idx = slot_index(slots_, m, t);
        if (idx < 0) {
            return;
        }
        RepResult& r = results_[static_cast<std::size_t>(idx)][static_cast<std::size_t>(rep_)];
        r.ok = true;
        r.point = rep_est.point;
        r.se = rep_est.se.value_or(std::numeric_limits<double>::quiet_NaN());
        if (rep_est.interval) {
            r.lower[0] = rep_est.interval->lower;
            r.upper[0] = rep_est.interval->upper;
        }
        if (second) {
            r.lower[1] = second->lower;
            r.upper[1] = second->upper;
        }
    }

    void set_value(Method m, Target t, double point) {
        EstimateReport rep_est;
        rep_est.point = point;
        set(m, t, rep_est);
    }

  private:
    const std::vector<SlotSpec>& slots_;
    std::vector<std::vector<RepResult>>& results_;
    std::int64_t rep_;
};

template <typename Fn>
void attempt(Fn&& fn) {
    try {
        fn();
    } catch (const error& e) {
        if (e.code() != errc::degenerate) {
            throw;
        }
        // degenerate replicate for this method/target: left unfilled, counted as failed
    }
}

inline void run_binary_rep(const MonteCarloOptions& opt, const CellCounts& cells,
                           std::uint64_t rep, RepWriter& out) {
    attempt([&] {
        const auto a = stream1_naive(cells, Arm::A, opt.level);
        out.set(Method::stream1_naive, Target::mu_a, a);
        const auto b = stream1_naive(cells, Arm::B, opt.level);
        out.set(Method::stream1_naive, Target::mu_b, b);
        out.set(Method::stream1_naive, Target::ate, ate_from_reports(a, b));
    });
    attempt([&] {
        const auto a = rs_estimate(cells, Arm::A, opt.level);
        out.set(Method::rs, Target::mu_a, a);
        const auto b = rs_estimate(cells, Arm::B, opt.level);
        out.set(Method::rs, Target::mu_b, b);
        out.set(Method::rs, Target::ate, ate_from_reports(a, b));
    });
    if (out.wanted(Method::chapman)) {
        attempt([&] {
            const auto a = chapman_estimate(condense(cells, Arm::A), opt.level);
            out.set(Method::chapman, Target::mu_a, a);
            const auto b = chapman_estimate(condense(cells, Arm::B), opt.level);
            out.set(Method::chapman, Target::mu_b, b);
            out.set(Method::chapman, Target::ate, ate_from_reports(a, b));
        });
    }

    const bool want_crc = out.wanted(Method::crc);
    const bool want_psi = out.wanted(Method::psi_hat);
    if (!want_crc && !want_psi) {
        return;
    }
    const PosteriorTargets draws = posterior_targets(
        cells, opt.posterior_draws, derive_seed(opt.seed, rng_stream::posterior, rep), want_crc,
        want_psi);

    if (want_crc) {
        attempt([&] {
            const auto a = crc_estimate(cells, Arm::A, opt.level);
            const auto b = crc_estimate(cells, Arm::B, opt.level);
            const auto diff = crc_ate(cells, opt.level);
            out.set(Method::crc, Target::mu_a, a,
                    percentile_interval(draws.crc_mu_a, opt.level, IntervalKind::credible));
            out.set(Method::crc, Target::mu_b, b,
                    percentile_interval(draws.crc_mu_b, opt.level, IntervalKind::credible));
            out.set(Method::crc, Target::ate, diff,
                    percentile_interval(draws.crc_ate, opt.level, IntervalKind::credible));
        });
    }
    if (want_psi) {
        attempt([&] {
            out.set(Method::psi_hat, Target::mu_a, psi_hat_estimate(cells, Arm::A, opt.level),
                    percentile_interval(draws.psi_mu_a, opt.level, IntervalKind::credible));
        });
        attempt([&] {
            out.set(Method::psi_hat, Target::mu_b, psi_hat_estimate(cells, Arm::B, opt.level),
                    percentile_interval(draws.psi_mu_b, opt.level, IntervalKind::credible));
        });
        attempt([&] {
            out.set(Method::psi_hat, Target::ate, psi_hat_ate(cells, opt.level),
                    percentile_interval(draws.psi_ate, opt.level, IntervalKind::credible));
        });
    }
}

inline void run_continuous_rep(const ScenarioConfig& cfg, const MonteCarloOptions& opt,
                               const std::vector<IndividualRecord>& records, std::uint64_t rep,
                               RepWriter& out) {
    const auto views = observed_cont_records(records);
    const ContTallies tallies = tally_all(views);
    const double n_tot = static_cast<double>(cfg.n_tot);
    const std::uint64_t boot_master = derive_seed(opt.seed, rng_stream::bootstrap, rep);

    if (out.wanted(Method::stream1_only)) {
        attempt([&] {
            const int a = 0, b = 1;
            if (tallies.group_count[a][0] == 0.0 || tallies.group_count[b][0] == 0.0) {
                throw_degenerate("no-data: empty cohort subgroup");
            }
            const double mu_a = tallies.group_sum[a][0] / tallies.group_count[a][0];
            const double mu_b = tallies.group_sum[b][0] / tallies.group_count[b][0];
            out.set_value(Method::stream1_only, Target::mu_a, mu_a);
            out.set_value(Method::stream1_only, Target::mu_b, mu_b);
            out.set_value(Method::stream1_only, Target::ate, mu_a - mu_b);
        });
    }

    auto run_boot = [&](Method method, ContinuousEstimator kind, std::uint64_t boot_seed) {
        attempt([&] {
            double points[3];
            for (int ti = 0; ti < 3; ++ti) {
                points[ti] = evaluate_cont(tallies, kind, all_targets[ti], n_tot);
            }
            const auto boot = bootstrap_multi(records, cfg.n_tot, kind, all_targets,
                                              opt.bootstrap_m, opt.level, boot_seed);
            for (int ti = 0; ti < 3; ++ti) {
                EstimateReport rep_est;
                rep_est.method = method;
                rep_est.target = all_targets[ti];
                rep_est.point = points[ti];
                rep_est.se = boot[static_cast<std::size_t>(ti)].se;
                rep_est.interval = boot[static_cast<std::size_t>(ti)].interval;
                out.set(method, all_targets[ti], rep_est);
            }
        });
    };
    if (out.wanted(Method::stream2_only)) {
        run_boot(Method::stream2_only, ContinuousEstimator::stream2, derive_seed(boot_master, 2, 0));
    }
    if (out.wanted(Method::standardized)) {
        run_boot(Method::standardized, ContinuousEstimator::standardized,
                 derive_seed(boot_master, 1, 0));
    }
}

} // namespace detail

/// Runs the full simulation study: per replicate, generate a population,
/// apply every requested method to every target, and summarize. Replicate i
/// owns RNG substreams keyed by i, and aggregation runs in replicate order
/// with compensated sums, so results are identical for any thread count.
inline MonteCarloSummary run_monte_carlo(const ScenarioConfig& cfg, const MonteCarloOptions& opt) {
    cfg.validate();
    if (opt.n_reps < 1) {
        throw_invalid("at least one replicate is required");
    }
    const std::vector<Method> methods =
        opt.methods.empty() ? detail::default_methods(cfg.continuous) : opt.methods;
    const std::vector<detail::SlotSpec> slots = detail::build_slots(methods);

    std::vector<std::vector<detail::RepResult>> results(slots.size());
    for (auto& r : results) {
        r.resize(static_cast<std::size_t>(opt.n_reps));
    }

    parallel_for(opt.n_reps, opt.threads, [&](std::int64_t rep) {
        const auto records = generate_population(
            cfg, derive_seed(opt.seed, rng_stream::population, static_cast<std::uint64_t>(rep)));
        detail::RepWriter writer(slots, results, rep);
        if (cfg.continuous) {
            detail::run_continuous_rep(cfg, opt, records, static_cast<std::uint64_t>(rep), writer);
        } else {
            const CellCounts cells = tabulate_cells(records, cfg.n_tot);
            detail::run_binary_rep(opt, cells, static_cast<std::uint64_t>(rep), writer);
        }
    });

    MonteCarloSummary summary;
    summary.truth = scenario_truth(cfg);
    summary.n_reps = opt.n_reps;
    for (std::size_t si = 0; si < slots.size(); ++si) {
        const auto& spec = slots[si];
        const auto& reps = results[si];
        std::vector<double> points;
        std::vector<double> ses;
        points.reserve(reps.size());
        const double truth = summary.truth.for_target(spec.target, cfg.continuous);
        std::vector<double> widths[2];
        int covered[2] = {0, 0};
        for (const auto& r : reps) {
            if (!r.ok) {
                continue;
            }
            points.push_back(r.point);
            if (!std::isnan(r.se)) {
                ses.push_back(r.se);
            }
            for (std::size_t k = 0; k < spec.kinds.size(); ++k) {
                widths[k].push_back(r.upper[k] - r.lower[k]);
                if (r.lower[k] <= truth && truth <= r.upper[k]) {
                    ++covered[k];
                }
            }
        }
        const int n_ok = static_cast<int>(points.size());
        const int n_failed = opt.n_reps - n_ok;
        auto base_row = [&](std::optional<IntervalKind> kind) {
            SummaryRow row;
            row.method = spec.method;
            row.target = spec.target;
            row.ci_kind = kind;
            row.mean = mean(points);
            if (n_ok >= 2) {
                row.sd = sample_sd(points);
            }
            if (!ses.empty()) {
                row.avg_se = mean(ses);
            }
            row.n_failed = n_failed;
            row.n_reps = opt.n_reps;
            return row;
        };
        if (spec.kinds.empty()) {
            summary.rows.push_back(base_row(std::nullopt));
        }
        for (std::size_t k = 0; k < spec.kinds.size(); ++k) {
            SummaryRow row = base_row(spec.kinds[k]);
            if (n_ok > 0) {
                row.avg_width = mean(widths[k]);
                row.coverage_pct = 100.0 * covered[k] / n_ok;
            }
            summary.rows.push_back(std::move(row));
        }
    }
    return summary;
}

/// Fixed-format CSV rendering (6 significant digits, empty fields for
/// unavailable statistics) so outputs diff cleanly across runs.
inline std::string summary_to_csv(const MonteCarloSummary& summary) {
    std::ostringstream out;
    out << "method,target,mean,sd,avg_se,avg_width,coverage_pct,coverage_kind,n_failed,n_reps\n";
    auto fmt = [](std::optional<double> v) {
        if (!v || std::isnan(*v)) {
            return std::string();
        }
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.6g", *v);
        return std::string(buf);
    };
    for (const auto& row : summary.rows) {
        out << to_string(row.method) << ',' << to_string(row.target) << ',' << fmt(row.mean) << ','
            << fmt(row.sd) << ',' << fmt(row.avg_se) << ',' << fmt(row.avg_width) << ','
            << fmt(row.coverage_pct) << ',' << (row.ci_kind ? to_string(*row.ci_kind) : "none")
            << ',' << row.n_failed << ',' << row.n_reps << '\n';
    }
    return out.str();
}

} // namespace anchorcrc
