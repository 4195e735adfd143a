#pragma once

#include <random>
#include <vector>

#include "anchorcrc/report.hpp"
#include "anchorcrc/rng.hpp"
#include "anchorcrc/types.hpp"

namespace anchorcrc {

struct NormalComponent {
    double mean = 0.0;
    double sd = 1.0;
};

/// The two-stratum synthetic-population family used in the simulation
/// studies. Stratum membership drives cohort inclusion, provider treatment
/// choice, and outcome distributions; the anchor stream samples everyone at
/// rate p2 independently of all of it.
struct ScenarioConfig {
    std::int64_t n_tot = 1000;
    std::array<double, 2> stratum_weights{0.4, 0.6};
    std::array<double, 2> s1_inclusion{0.7, 0.9};
    std::array<double, 2> choose_a{0.3, 0.8};
    double p2 = 0.10;
    double xi_a = 0.5;
    std::array<double, 2> response_a{0.5, 0.8}; // P(Y=1 | stratum, received A)
    std::array<double, 2> response_b{0.3, 0.7};
    bool continuous = false;
    // components[stratum][binary response][arm]
    NormalComponent components[2][2][2] = {
        {{{2.5, 1.2}, {7.5, 1.2}}, {{10.0, 0.75}, {15.0, 0.75}}},
        {{{1.0, 1.5}, {6.0, 1.5}}, {{5.0, 0.5}, {10.0, 0.5}}},
    };

    const NormalComponent& component(int stratum, bool response, Arm arm) const {
        return components[stratum - 1][response ? 1 : 0][arm == Arm::A ? 0 : 1];
    }

    double response_prob(int stratum, Arm arm) const {
        return arm == Arm::A ? response_a[static_cast<std::size_t>(stratum - 1)]
                             : response_b[static_cast<std::size_t>(stratum - 1)];
    }

    void validate() const {
        auto check01 = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw_invalid(std::string(name) + " must lie in [0,1]");
            }
        };
        if (n_tot <= 0) {
            throw_invalid("n_tot must be positive");
        }
        double wsum = 0.0;
        for (double w : stratum_weights) {
            check01(w, "stratum weight");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-9) {
            throw_invalid("stratum weights must sum to 1");
        }
        for (double p : s1_inclusion) check01(p, "s1_inclusion");
        for (double p : choose_a) check01(p, "choose_a");
        check01(p2, "p2");
        check01(xi_a, "xi_a");
        for (double p : response_a) check01(p, "response_prob A");
        for (double p : response_b) check01(p, "response_prob B");
        for (const auto& stratum : components) {
            for (const auto& resp : stratum) {
                for (const auto& comp : resp) {
                    if (!(comp.sd > 0.0)) {
                        throw_invalid("component sd must be positive");
                    }
                }
            }
        }
    }
};

/// Population-level targets implied by a configuration.
struct ScenarioTruth {
    double mu_a = 0.0;
    double mu_b = 0.0;
    double ate = 0.0;
    double cont_mu_a = 0.0;
    double cont_mu_b = 0.0;
    double cont_ate = 0.0;

    double for_target(Target t, bool continuous) const {
        switch (t) {
        case Target::mu_a: return continuous ? cont_mu_a : mu_a;
        case Target::mu_b: return continuous ? cont_mu_b : mu_b;
        case Target::ate: return continuous ? cont_ate : ate;
        }
        return 0.0;
    }
};

inline ScenarioTruth scenario_truth(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioTruth t;
    for (int s = 1; s <= 2; ++s) {
        const double w = cfg.stratum_weights[static_cast<std::size_t>(s - 1)];
        const double pa = cfg.response_prob(s, Arm::A);
        const double pb = cfg.response_prob(s, Arm::B);
        t.mu_a += w * pa;
        t.mu_b += w * pb;
        t.cont_mu_a += w * (pa * cfg.component(s, true, Arm::A).mean +
                            (1.0 - pa) * cfg.component(s, false, Arm::A).mean);
        t.cont_mu_b += w * (pb * cfg.component(s, true, Arm::B).mean +
                            (1.0 - pb) * cfg.component(s, false, Arm::B).mean);
    }
    t.ate = t.mu_a - t.mu_b;
    t.cont_ate = t.cont_mu_a - t.cont_mu_b;
    return t;
}

/// The model parameters implied by a configuration (marginalizing the
/// strata), matching the cell-probability parametrization.
inline DesignParams design_params_of(const ScenarioConfig& cfg) {
    cfg.validate();
    DesignParams d;
    d.s2_rate = cfg.p2;
    d.randomize_a = cfg.xi_a;
    double w_s1 = 0.0, w_s1_a = 0.0, w_s1_b = 0.0, w_out = 0.0;
    double kept_a = 0.0, kept_b = 0.0, switch_a = 0.0, switch_b = 0.0, out_a = 0.0, out_b = 0.0;
    for (int s = 1; s <= 2; ++s) {
        const std::size_t i = static_cast<std::size_t>(s - 1);
        const double w = cfg.stratum_weights[i];
        const double incl = cfg.s1_inclusion[i];
        const double choose = cfg.choose_a[i];
        w_s1 += w * incl;
        w_s1_a += w * incl * choose;
        w_s1_b += w * incl * (1.0 - choose);
        w_out += w * (1.0 - incl);
        kept_a += w * incl * choose * cfg.response_prob(s, Arm::A);
        switch_a += w * incl * (1.0 - choose) * cfg.response_prob(s, Arm::A);
        out_a += w * (1.0 - incl) * cfg.response_prob(s, Arm::A);
        kept_b += w * incl * (1.0 - choose) * cfg.response_prob(s, Arm::B);
        switch_b += w * incl * choose * cfg.response_prob(s, Arm::B);
        out_b += w * (1.0 - incl) * cfg.response_prob(s, Arm::B);
    }
    d.s1_rate = w_s1;
    d.assign_a = w_s1 > 0.0 ? w_s1_a / w_s1 : 0.0;
    d.resp_kept_a = w_s1_a > 0.0 ? kept_a / w_s1_a : 0.0;
    d.resp_switch_a = w_s1_b > 0.0 ? switch_a / w_s1_b : 0.0;
    d.resp_outside_a = w_out > 0.0 ? out_a / w_out : 0.0;
    d.resp_kept_b = w_s1_b > 0.0 ? kept_b / w_s1_b : 0.0;
    d.resp_switch_b = w_s1_a > 0.0 ? switch_b / w_s1_a : 0.0;
    d.resp_outside_b = w_out > 0.0 ? out_b / w_out : 0.0;
    return d;
}

/// Simulates one closed population under the anchor-stream design with
/// label switching. Deterministic for a given seed.
inline std::vector<IndividualRecord> generate_population(const ScenarioConfig& cfg,
                                                         std::uint64_t seed) {
    cfg.validate();
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<IndividualRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.n_tot));
    for (std::int64_t i = 0; i < cfg.n_tot; ++i) {
        IndividualRecord r;
        r.id = i;
        r.stratum = unit(rng) < cfg.stratum_weights[0] ? 1 : 2;
        const std::size_t si = static_cast<std::size_t>(r.stratum - 1);
        r.s1 = unit(rng) < cfg.s1_inclusion[si];
        if (r.s1) {
            r.t1 = unit(rng) < cfg.choose_a[si] ? Arm::A : Arm::B;
        }
        r.s2 = unit(rng) < cfg.p2;
        if (r.s2) {
            r.t2 = unit(rng) < cfg.xi_a ? Arm::A : Arm::B;
        }
        r.final_treatment = r.implied_final();
        if (r.final_treatment) {
            const bool resp = unit(rng) < cfg.response_prob(r.stratum, *r.final_treatment);
            r.y = resp;
            if (cfg.continuous) {
                const auto& comp = cfg.component(r.stratum, resp, *r.final_treatment);
                r.y_cont = std::normal_distribution<double>(comp.mean, comp.sd)(rng);
            }
        }
        records.push_back(r);
    }
    return records;
}

} // namespace anchorcrc
