#include <gtest/gtest.h>

#include <cmath>

#include "anchorcrc/continuous.hpp"
#include "anchorcrc/mle.hpp"
#include "anchorcrc/cells.hpp"
#include "anchorcrc/scenario.hpp"

namespace {

using namespace anchorcrc;

IndividualRecord cont_record(std::int64_t id, bool s1, std::optional<Arm> t1, bool s2,
                             std::optional<Arm> t2, double y_cont) {
    IndividualRecord r;
    r.id = id;
    r.s1 = s1;
    r.t1 = t1;
    r.s2 = s2;
    r.t2 = t2;
    r.final_treatment = r.implied_final();
    if (r.final_treatment) {
        r.y = true;
        r.y_cont = y_cont;
    }
    return r;
}

std::vector<IndividualRecord> hand_example() {
    std::vector<IndividualRecord> records;
    for (int i = 0; i < 4; ++i) { // kept A, mean 2
        records.push_back(cont_record(i, true, Arm::A, false, std::nullopt, 2.0));
    }
    records.push_back(cont_record(4, true, Arm::B, true, Arm::A, 5.0)); // switched to A
    for (int i = 5; i < 8; ++i) { // kept B
        records.push_back(cont_record(i, true, Arm::B, false, std::nullopt, 1.0));
    }
    for (int i = 8; i < 10; ++i) { // outside cohort, randomized to A
        records.push_back(cont_record(i, false, std::nullopt, true, Arm::A, 8.0));
    }
    return records;
}

TEST(StandardizedMean, HandComputedExample) {
    const auto records = hand_example();
    const auto in = standardization_inputs(records, 10, Arm::A);
    EXPECT_DOUBLE_EQ(in.w_kept, 0.4);
    EXPECT_DOUBLE_EQ(in.w_switch, 0.4);
    EXPECT_DOUBLE_EQ(in.w_outside, 0.2);
    EXPECT_DOUBLE_EQ(in.ybar_kept, 2.0);
    EXPECT_DOUBLE_EQ(in.ybar_switch, 5.0);
    EXPECT_DOUBLE_EQ(in.ybar_outside, 8.0);
    const auto rep = standardized_mean(records, 10, Arm::A);
    EXPECT_NEAR(rep.point, 4.4, 1e-12);
    EXPECT_FALSE(rep.se.has_value());
}

TEST(StandardizedMean, WeightsMatchClosedFormMles) {
    ScenarioConfig cfg;
    cfg.continuous = true;
    cfg.n_tot = 2000;
    const auto records = generate_population(cfg, 31337);
    const auto est = mle_params(tabulate_cells(records, cfg.n_tot));
    const auto in = standardization_inputs(records, cfg.n_tot, Arm::A);
    EXPECT_NEAR(in.w_kept, est.assign_a.value * est.s1_rate.value, 1e-12);
    EXPECT_NEAR(in.w_switch, (1.0 - est.assign_a.value) * est.s1_rate.value, 1e-12);
    EXPECT_NEAR(in.w_outside, 1.0 - est.s1_rate.value, 1e-12);
}

TEST(StandardizedMean, WeightClosureOverSeeds) {
    ScenarioConfig cfg;
    cfg.continuous = true;
    cfg.n_tot = 500;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto records = generate_population(cfg, derive_seed(99, 4, seed));
        for (Arm arm : {Arm::A, Arm::B}) {
            const auto in = standardization_inputs(records, cfg.n_tot, arm);
            ASSERT_NEAR(in.w_kept + in.w_switch + in.w_outside, 1.0, 1e-12);
        }
    }
}

TEST(StandardizedMean, ConstantOutcomeIsExact) {
    auto records = hand_example();
    for (auto& r : records) {
        if (r.y_cont) {
            r.y_cont = 3.25;
        }
    }
    EXPECT_NEAR(standardized_mean(records, 10, Arm::A).point, 3.25, 1e-12);
}

TEST(StandardizedMean, EmptyStratumNamesSubgroup) {
    auto records = hand_example();
    records.erase(records.begin() + 4); // drop the only switched-to-A member
    try {
        standardized_mean(records, 9, Arm::A);
        FAIL() << "expected a degenerate-stratum error";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::degenerate);
        EXPECT_NE(std::string(e.what()).find("switched"), std::string::npos);
    }
}

TEST(StandardizedMean, TracksPopulationTruthOnLargeSample) {
    ScenarioConfig cfg;
    cfg.continuous = true;
    cfg.n_tot = 20000;
    const auto records = generate_population(cfg, 5);
    const auto truth = scenario_truth(cfg);
    EXPECT_NEAR(truth.cont_mu_a, 5.02, 1e-12);
    EXPECT_NEAR(truth.cont_mu_b, 9.18, 1e-12);
    EXPECT_NEAR(standardized_mean(records, cfg.n_tot, Arm::A).point, truth.cont_mu_a, 0.15);
    EXPECT_NEAR(standardized_mean(records, cfg.n_tot, Arm::B).point, truth.cont_mu_b, 0.15);
}

TEST(StreamMeans, SingleRecordSubgroup) {
    std::vector<IndividualRecord> records;
    records.push_back(cont_record(0, true, Arm::A, false, std::nullopt, 7.0));
    records.push_back(cont_record(1, false, std::nullopt, true, Arm::B, 7.0));
    EXPECT_DOUBLE_EQ(stream1_mean(records, Arm::A).point, 7.0);
    EXPECT_DOUBLE_EQ(stream2_mean(records, Arm::B).point, 7.0);
    EXPECT_THROW(stream1_mean(records, Arm::B), error);
    EXPECT_THROW(stream2_mean(records, Arm::A), error);
}

TEST(StreamMeans, SwitchedMembersLeaveStream1Subgroup) {
    // stream1_mean conditions on keeping the assigned arm.
    const auto records = hand_example();
    EXPECT_DOUBLE_EQ(stream1_mean(records, Arm::B).point, 1.0);
    EXPECT_NEAR(stream2_mean(records, Arm::A).point, (5.0 + 8.0 + 8.0) / 3.0, 1e-12);
}

TEST(Bootstrap, ConstantOutcomeCollapses) {
    auto records = hand_example();
    for (auto& r : records) {
        if (r.y_cont) {
            r.y_cont = 2.5;
        }
    }
    const auto boot =
        bootstrap_ci(records, 10, ContinuousEstimator::standardized, Target::mu_a, 200, 0.95, 99);
    // Resample values equal the constant up to rounding in the share weights.
    EXPECT_NEAR(boot.se, 0.0, 1e-12);
    EXPECT_NEAR(boot.interval.lower, 2.5, 1e-12);
    EXPECT_NEAR(boot.interval.upper, 2.5, 1e-12);
}

TEST(Bootstrap, DeterministicForFixedSeed) {
    ScenarioConfig cfg;
    cfg.continuous = true;
    cfg.n_tot = 400;
    const auto records = generate_population(cfg, 616);
    const auto a =
        bootstrap_ci(records, cfg.n_tot, ContinuousEstimator::standardized, Target::ate, 150, 0.95, 3);
    const auto b =
        bootstrap_ci(records, cfg.n_tot, ContinuousEstimator::standardized, Target::ate, 150, 0.95, 3);
    EXPECT_EQ(a.se, b.se);
    EXPECT_EQ(a.interval.lower, b.interval.lower);
    EXPECT_EQ(a.interval.upper, b.interval.upper);
    const auto c =
        bootstrap_ci(records, cfg.n_tot, ContinuousEstimator::standardized, Target::ate, 150, 0.95, 4);
    EXPECT_NE(a.interval.lower, c.interval.lower);
}

TEST(Bootstrap, SharedResamplesMatchSingleTargetRuns) {
    ScenarioConfig cfg;
    cfg.continuous = true;
    cfg.n_tot = 300;
    const auto records = generate_population(cfg, 2718);
    const Target targets[3] = {Target::mu_a, Target::mu_b, Target::ate};
    const auto multi =
        bootstrap_multi(records, cfg.n_tot, ContinuousEstimator::stream2, targets, 100, 0.95, 12);
    for (int ti = 0; ti < 3; ++ti) {
        const auto single = bootstrap_ci(records, cfg.n_tot, ContinuousEstimator::stream2,
                                         targets[ti], 100, 0.95, 12);
        EXPECT_EQ(multi[ti].se, single.se);
        EXPECT_EQ(multi[ti].interval.lower, single.interval.lower);
        EXPECT_EQ(multi[ti].interval.upper, single.interval.upper);
    }
}

TEST(Bootstrap, ReportsRedrawsOnRareSubgroups) {
    // A lone switched member is missing from roughly a third of resamples.
    const auto records = hand_example();
    const auto boot =
        bootstrap_ci(records, 10, ContinuousEstimator::standardized, Target::mu_a, 30, 0.95, 7);
    EXPECT_GT(boot.redraws, 0);
    EXPECT_GT(boot.se, 0.0);
}

TEST(Bootstrap, FailsWhenTargetIsNeverEvaluable) {
    // Nobody was randomized to arm B, so every stream2 ate resample fails.
    const auto records = hand_example();
    EXPECT_THROW(
        bootstrap_ci(records, 10, ContinuousEstimator::stream2, Target::ate, 50, 0.95, 21), error);
}

TEST(Bootstrap, RejectsTinyResampleCounts) {
    const auto records = hand_example();
    EXPECT_THROW(
        bootstrap_ci(records, 10, ContinuousEstimator::standardized, Target::mu_a, 1, 0.95, 1),
        error);
}

} // namespace
