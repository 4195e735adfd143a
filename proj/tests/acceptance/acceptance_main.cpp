// Acceptance suite: exercises the published behavior of the toolkit end to
// end and prints one pass/fail line per criterion. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "anchorcrc/anchorcrc.hpp"

namespace {

using namespace anchorcrc;
using clock_type = std::chrono::steady_clock;

class Criterion {
  public:
    Criterion(int number, std::string title) : number_(number), title_(std::move(title)) {
        start_ = clock_type::now();
    }

    void check_near(const std::string& label, double value, double target, double tol) {
        ++checks_;
        if (!(std::abs(value - target) <= tol)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s: got %.6g, want %.6g +/- %.2g", label.c_str(),
                          value, target, tol);
            failures_.emplace_back(buf);
        }
    }

    void check_true(const std::string& label, bool ok) {
        ++checks_;
        if (!ok) {
            failures_.push_back(label);
        }
    }

    void check_runtime_below(double seconds) {
        ++checks_;
        const double elapsed = elapsed_seconds();
        if (elapsed >= seconds) {
            char buf[120];
            std::snprintf(buf, sizeof(buf), "runtime: %.1f s exceeds the %.0f s target", elapsed,
                          seconds);
            failures_.emplace_back(buf);
        }
    }

    double elapsed_seconds() const {
        return std::chrono::duration<double>(clock_type::now() - start_).count();
    }

    bool finish() const {
        std::printf("[%s] criterion %d: %s (%d checks, %.1f s)\n",
                    failures_.empty() ? "PASS" : "FAIL", number_, title_.c_str(), checks_,
                    elapsed_seconds());
        for (const auto& f : failures_) {
            std::printf("       %s\n", f.c_str());
        }
        std::fflush(stdout);
        return failures_.empty();
    }

  private:
    int number_;
    std::string title_;
    std::vector<std::string> failures_;
    int checks_ = 0;
    clock_type::time_point start_;
};

bool criterion1_tunisia_deterministic() {
    Criterion c(1, "deterministic estimates on the built-in example");
    const CellCounts cells = tunisia_cells();

    const auto rs_a = rs_estimate(cells, Arm::A);
    c.check_near("rs A point", rs_a.point, 0.98837, 5e-6);
    c.check_near("rs A se", *rs_a.se, 0.0116, 1e-4);
    const auto rs_b = rs_estimate(cells, Arm::B);
    c.check_near("rs B point", rs_b.point, 0.85542, 5e-6);
    c.check_near("rs B se", *rs_b.se, 0.0386, 1e-4);

    const auto crc_b = crc_estimate(cells, Arm::B);
    c.check_near("crc B point", crc_b.point, 0.88541, 5e-4);
    c.check_near("crc B wald se", *crc_b.se, 0.0292, 5e-4);
    c.check_near("crc B wald lower", crc_b.interval->lower, 0.828, 2e-3);
    c.check_near("crc B wald upper", crc_b.interval->upper, 0.943, 2e-3);

    const auto crc_a = crc_estimate(cells, Arm::A);
    c.check_near("crc A point (from the printed counts)", crc_a.point, 0.98217, 5e-4);

    const auto psi_a = psi_hat_estimate(cells, Arm::A);
    c.check_near("psi-hat A point", psi_a.point, 0.98226, 5e-4);
    const auto psi_b = psi_hat_estimate(cells, Arm::B);
    c.check_near("psi-hat B point", psi_b.point, 0.88523, 5e-4);

    const auto ate_rs = ate_from_reports(rs_a, rs_b);
    c.check_near("rs difference point", ate_rs.point, 0.13295, 5e-6);
    c.check_near("rs difference se", *ate_rs.se, 0.0403, 5e-4);

    c.check_runtime_below(1.0);
    return c.finish();
}

bool criterion2_tunisia_credible() {
    Criterion c(2, "credible intervals on the built-in example");
    const CellCounts cells = tunisia_cells();
    const std::uint64_t seed = 20240601;
    const auto mu_b = credible_interval(cells, BayesEstimator::crc, Target::mu_b, 1000, 0.95, seed);
    c.check_near("crc B credible lower", mu_b.lower, 0.818, 0.010);
    c.check_near("crc B credible upper", mu_b.upper, 0.930, 0.010);
    const auto ate = credible_interval(cells, BayesEstimator::crc, Target::ate, 1000, 0.95, seed);
    c.check_near("crc difference credible lower", ate.lower, 0.037, 0.015);
    c.check_near("crc difference credible upper", ate.upper, 0.164, 0.015);
    c.check_runtime_below(5.0);
    return c.finish();
}

MonteCarloSummary run_binary_study(double p2, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.p2 = p2;
    MonteCarloOptions opt;
    opt.n_reps = 2000;
    opt.posterior_draws = 1000;
    opt.seed = seed;
    return run_monte_carlo(cfg, opt);
}

bool criterion3_binary_study(const MonteCarloSummary& s, Criterion& c) {
    const auto& crc_a_wald = find_row(s, Method::crc, Target::mu_a, IntervalKind::wald);
    c.check_near("crc muA mean", crc_a_wald.mean, 0.680, 0.005);
    c.check_near("crc muA sd", *crc_a_wald.sd, 0.050, 0.006);
    c.check_near("crc muA avg wald se", *crc_a_wald.avg_se, 0.048, 0.005);
    c.check_near("crc muA wald coverage", *crc_a_wald.coverage_pct, 92.5, 2.0);
    const auto& crc_a_cred = find_row(s, Method::crc, Target::mu_a, IntervalKind::credible);
    c.check_near("crc muA credible coverage", *crc_a_cred.coverage_pct, 94.7, 1.5);

    const auto& rs_a = find_row(s, Method::rs, Target::mu_a, IntervalKind::wald);
    c.check_near("rs muA mean", rs_a.mean, 0.681, 0.006);
    c.check_near("rs muA sd", *rs_a.sd, 0.064, 0.007);

    const auto& chap_a = find_row(s, Method::chapman, Target::mu_a, IntervalKind::transformed_logit);
    c.check_near("chapman muA sd", *chap_a.sd, 0.098, 0.012);

    const auto& naive_a = find_row(s, Method::stream1_naive, Target::mu_a, IntervalKind::wald);
    c.check_near("stream1-naive muA mean", naive_a.mean, 0.751, 0.004);

    const auto& crc_b = find_row(s, Method::crc, Target::mu_b, IntervalKind::wald);
    c.check_near("crc muB mean", crc_b.mean, 0.542, 0.006);
    c.check_near("crc muB sd", *crc_b.sd, 0.060, 0.007);

    const auto& crc_ate_w = find_row(s, Method::crc, Target::ate, IntervalKind::wald);
    c.check_near("crc difference mean", crc_ate_w.mean, 0.139, 0.007);
    c.check_near("crc difference sd", *crc_ate_w.sd, 0.077, 0.009);
    const auto& crc_ate_c = find_row(s, Method::crc, Target::ate, IntervalKind::credible);
    c.check_near("crc difference credible coverage", *crc_ate_c.coverage_pct, 94.7, 1.5);

    c.check_runtime_below(120.0);
    return c.finish();
}

bool criterion4_continuous_study() {
    Criterion c(4, "continuous-outcome study (2000 replicates, bootstrap m=1000)");
    ScenarioConfig cfg;
    cfg.continuous = true;
    MonteCarloOptions opt;
    opt.n_reps = 2000;
    opt.bootstrap_m = 1000;
    opt.seed = 7004;
    const auto s = run_monte_carlo(cfg, opt);

    const auto& crc_a = find_row(s, Method::standardized, Target::mu_a, IntervalKind::percentile);
    c.check_near("standardized muA mean", crc_a.mean, 5.033, 0.03);
    c.check_near("standardized muA sd", *crc_a.sd, 0.359, 0.04);
    c.check_near("standardized muA avg bootstrap se", *crc_a.avg_se, 0.347, 0.04);
    c.check_near("standardized muA coverage", *crc_a.coverage_pct, 93.5, 2.0);

    const auto& crc_ate = find_row(s, Method::standardized, Target::ate, IntervalKind::percentile);
    c.check_near("standardized difference mean", crc_ate.mean, -4.147, 0.05);
    c.check_near("standardized difference sd", *crc_ate.sd, 0.493, 0.06);

    const auto& s2_a = find_row(s, Method::stream2_only, Target::mu_a, IntervalKind::percentile);
    c.check_near("stream2-only muA sd", *s2_a.sd, 0.431, 0.05);

    const auto& s1_a = find_row(s, Method::stream1_only, Target::mu_a);
    c.check_near("stream1-only muA mean (bias)", s1_a.mean, 4.533, 0.03);

    c.check_runtime_below(900.0);
    return c.finish();
}

bool criterion5_property_suites() {
    Criterion c(5, "property suites");

    { // probability closure over fuzzed designs
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 10000; ++trial) {
            DesignParams d;
            d.s2_rate = unit(rng);
            d.randomize_a = unit(rng);
            d.s1_rate = unit(rng);
            d.assign_a = unit(rng);
            d.resp_kept_a = unit(rng);
            d.resp_switch_a = unit(rng);
            d.resp_outside_a = unit(rng);
            d.resp_kept_b = unit(rng);
            d.resp_switch_b = unit(rng);
            d.resp_outside_b = unit(rng);
            double sum = 0.0;
            for (double p : cell_probabilities(d)) {
                sum += p;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        c.check_true("cell probabilities sum to 1 within 1e-12 (10000 designs)", worst < 1e-12);
    }

    { // Euler identity and gradient agreement
        std::mt19937_64 rng(202);
        std::uniform_int_distribution<std::int64_t> count(5, 500);
        double worst_euler = 0.0;
        double worst_grad = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            RealCells cells{};
            double total = 0.0;
            for (auto& x : cells) {
                x = static_cast<double>(count(rng));
                total += x;
            }
            for (Target t : {Target::mu_a, Target::mu_b, Target::ate}) {
                const RealCells g = crc_count_gradient(cells, t);
                double weighted = 0.0;
                double scale = 1.0;
                for (std::size_t j = 0; j < cells.size(); ++j) {
                    weighted += cells[j] / total * g[j];
                    scale = std::max(scale, std::abs(g[j]));
                }
                worst_euler = std::max(worst_euler, std::abs(weighted - crc_mu_counts(cells, t)));
                const RealCells fd = fd_count_gradient(
                    cells, [t](const RealCells& x) { return crc_mu_counts(x, t); });
                for (std::size_t j = 0; j < cells.size(); ++j) {
                    worst_grad = std::max(worst_grad, std::abs(g[j] - fd[j]) / scale);
                }
            }
        }
        c.check_true("euler identity holds to 1e-10", worst_euler < 1e-10);
        c.check_true("analytic and central-difference gradients agree to 1e-6",
                     worst_grad < 1e-6);
    }

    { // Chapman count estimate never below the distinct observed responders
        std::mt19937_64 rng(303);
        std::uniform_int_distribution<std::int64_t> big(0, 10000);
        bool ok = true;
        for (int trial = 0; trial < 20000 && ok; ++trial) {
            const std::int64_t n1dot = big(rng);
            const std::int64_t ndot1 = big(rng);
            const std::int64_t m11 =
                std::uniform_int_distribution<std::int64_t>(0, std::min(n1dot, ndot1))(rng);
            const double estimate = static_cast<double>(n1dot + 1) *
                                        static_cast<double>(ndot1 + 1) /
                                        static_cast<double>(m11 + 1) -
                                    1.0;
            ok = estimate >= static_cast<double>(n1dot + ndot1 - m11) - 1e-9;
        }
        c.check_true("chapman count estimate >= distinct responders (fuzzed)", ok);
    }

    { // weight closure of the response-mean and standardized estimators
        std::mt19937_64 rng(404);
        std::uniform_real_distribution<double> unit(0.01, 0.99);
        double worst = 0.0;
        for (int trial = 0; trial < 500; ++trial) {
            MLEstimates est;
            const double value = unit(rng);
            est.s1_rate = {unit(rng), 0.0};
            est.assign_a = {unit(rng), 0.0};
            est.resp_kept_a = est.resp_switch_a = est.resp_outside_a = {value, 0.0};
            est.resp_kept_b = est.resp_switch_b = est.resp_outside_b = {value, 0.0};
            const auto [mu_a, mu_b] = crc_point(est);
            worst = std::max({worst, std::abs(mu_a - value), std::abs(mu_b - value)});
        }
        c.check_true("constant response rate is reproduced exactly (weights close)",
                     worst < 1e-12);

        ScenarioConfig cfg;
        cfg.continuous = true;
        cfg.n_tot = 400;
        double worst_w = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto records = generate_population(cfg, derive_seed(5, 5, seed));
            for (Arm arm : {Arm::A, Arm::B}) {
                const auto in = standardization_inputs(records, cfg.n_tot, arm);
                worst_w = std::max(worst_w,
                                   std::abs(in.w_kept + in.w_switch + in.w_outside - 1.0));
            }
        }
        c.check_true("standardization weights sum to 1 within 1e-12", worst_w < 1e-12);
    }

    { // tabulate / expand round trip
        std::mt19937_64 rng(505);
        std::uniform_int_distribution<std::int64_t> count(0, 60);
        bool ok = true;
        for (int trial = 0; trial < 200 && ok; ++trial) {
            CellCounts cells;
            std::int64_t total = 0;
            for (auto& x : cells.cells) {
                x = count(rng);
                total += x;
            }
            if (total == 0) {
                cells.cells[16] = 1;
                total = 1;
            }
            cells.n_tot = total;
            const auto back = tabulate_cells(expand_cells(cells), cells.n_tot);
            ok = back.cells == cells.cells;
        }
        c.check_true("expand-then-tabulate is the identity (fuzzed)", ok);
    }

    { // end-to-end seed determinism, serial vs parallel
        ScenarioConfig cfg;
        cfg.n_tot = 400;
        MonteCarloOptions opt;
        opt.n_reps = 40;
        opt.posterior_draws = 200;
        opt.seed = 90210;
        opt.threads = 1;
        const std::string serial = summary_to_csv(run_monte_carlo(cfg, opt));
        opt.threads = 2;
        const std::string parallel = summary_to_csv(run_monte_carlo(cfg, opt));
        c.check_true("binary study: parallel equals serial byte for byte", serial == parallel);

        cfg.continuous = true;
        opt.bootstrap_m = 80;
        opt.threads = 1;
        const std::string serial_cont = summary_to_csv(run_monte_carlo(cfg, opt));
        opt.threads = 2;
        const std::string parallel_cont = summary_to_csv(run_monte_carlo(cfg, opt));
        c.check_true("continuous study: parallel equals serial byte for byte",
                     serial_cont == parallel_cont);
    }

    c.check_runtime_below(30.0);
    return c.finish();
}

bool criterion6_orderings(const MonteCarloSummary& p10) {
    Criterion c(6, "efficiency and bias orderings across anchor-stream rates");
    const MonteCarloSummary p05 = run_binary_study(0.05, 5005);
    const MonteCarloSummary p20 = run_binary_study(0.20, 5020);
    const struct {
        const char* name;
        const MonteCarloSummary* summary;
    } settings[] = {{"p2=5%", &p05}, {"p2=10%", &p10}, {"p2=20%", &p20}};
    for (const auto& setting : settings) {
        const auto& s = *setting.summary;
        const double sd_crc = *find_row(s, Method::crc, Target::mu_a, IntervalKind::wald).sd;
        const double sd_rs = *find_row(s, Method::rs, Target::mu_a, IntervalKind::wald).sd;
        const double sd_chap =
            *find_row(s, Method::chapman, Target::mu_a, IntervalKind::transformed_logit).sd;
        c.check_true(std::string(setting.name) + ": sd(crc) < sd(rs)", sd_crc < sd_rs);
        c.check_true(std::string(setting.name) + ": sd(rs) < sd(chapman)", sd_rs < sd_chap);

        const auto& naive = find_row(s, Method::stream1_naive, Target::mu_a, IntervalKind::wald);
        const int n_ok = naive.n_reps - naive.n_failed;
        const double mc_se = *naive.sd / std::sqrt(static_cast<double>(n_ok));
        c.check_true(std::string(setting.name) + ": stream1-naive bias exceeds 10 monte-carlo ses",
                     std::abs(naive.mean - s.truth.mu_a) > 10.0 * mc_se);
    }
    return c.finish();
}

} // namespace

int main() {
    std::printf("acceptance suite, toolkit version %s\n", version);
    int failed = 0;

    failed += criterion1_tunisia_deterministic() ? 0 : 1;
    failed += criterion2_tunisia_credible() ? 0 : 1;

    Criterion c3(3, "binary-outcome study (2000 replicates, p2=10%)");
    const MonteCarloSummary binary_p10 = run_binary_study(0.10, 1001);
    failed += criterion3_binary_study(binary_p10, c3) ? 0 : 1;

    failed += criterion4_continuous_study() ? 0 : 1;
    failed += criterion5_property_suites() ? 0 : 1;
    failed += criterion6_orderings(binary_p10) ? 0 : 1;

    std::printf("%d of 6 criteria passed\n", 6 - failed);
    return failed;
}
