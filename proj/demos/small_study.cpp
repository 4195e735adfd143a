// Runs a reduced Monte Carlo study (200 replicates) and prints the summary
// CSV; the full-size studies live behind the `anchorcrc simulate` command.

#include <cstdio>
#include <iostream>

#include "anchorcrc/anchorcrc.hpp"

int main() {
    using namespace anchorcrc;

    ScenarioConfig cfg; // two-stratum defaults, n_tot = 1000, p2 = 10%
    MonteCarloOptions opt;
    opt.n_reps = 200;
    opt.posterior_draws = 400;
    opt.seed = 20240801;

    const ScenarioTruth truth = scenario_truth(cfg);
    std::printf("targets: mu_A %.3f, mu_B %.3f, difference %.3f\n\n", truth.mu_a, truth.mu_b,
                truth.ate);
    std::cout << summary_to_csv(run_monte_carlo(cfg, opt));
    return 0;
}
