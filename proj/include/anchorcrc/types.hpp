#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

#include "anchorcrc/error.hpp"

namespace anchorcrc {

/// The two treatments under comparison.
enum class Arm : std::uint8_t { A, B };

inline Arm other_arm(Arm arm) { return arm == Arm::A ? Arm::B : Arm::A; }

inline char arm_label(Arm arm) { return arm == Arm::A ? 'A' : 'B'; }

/// One member of the closed target population.
///
/// Stream 1 is the observational cohort (provider-assigned treatment t1);
/// Stream 2 is the randomized anchor-stream sample (randomized t2). The
/// final treatment follows the label-switching rule: an anchor-stream
/// member always receives the randomized arm, everyone else keeps the
/// provider assignment, and members captured by neither stream go untreated.
struct IndividualRecord {
    std::int64_t id = 0;
    int stratum = 1;
    bool s1 = false;
    std::optional<Arm> t1; // present iff s1
    bool s2 = false;
    std::optional<Arm> t2; // present iff s2
    std::optional<Arm> final_treatment;
    std::optional<bool> y;       // binary outcome, present iff treated
    std::optional<double> y_cont; // continuous outcome, present iff treated and measured

    bool observed() const { return s1 || s2; }

    /// The final treatment implied by the stream memberships.
    std::optional<Arm> implied_final() const { return s2 ? t2 : (s1 ? t1 : std::nullopt); }
};

/// Validates the structural invariants; throws with the record id on violation.
inline void validate_record(const IndividualRecord& r) {
    const std::string where = "record " + std::to_string(r.id) + ": ";
    if (r.t1.has_value() != r.s1) {
        throw_invalid(where + "initial assignment must be present exactly when s1 is set");
    }
    if (r.t2.has_value() != r.s2) {
        throw_invalid(where + "randomized assignment must be present exactly when s2 is set");
    }
    if (r.final_treatment != r.implied_final()) {
        throw_invalid(where + "final treatment inconsistent with stream memberships");
    }
    if (r.y.has_value() != r.final_treatment.has_value()) {
        throw_invalid(where + "outcome must be present exactly when a treatment was received");
    }
    if (r.y_cont.has_value() && !r.final_treatment.has_value()) {
        throw_invalid(where + "continuous outcome on an untreated member");
    }
}

/// The 17 observation-type counts plus the known population size.
/// Cells are named c1..c17 (index 0..16 here) in the fixed tabulation order;
/// c17 counts members captured by neither stream.
struct CellCounts {
    std::array<std::int64_t, 17> cells{};
    std::int64_t n_tot = 0;

    std::int64_t cell(int one_based) const { return cells[static_cast<std::size_t>(one_based - 1)]; }

    std::int64_t observed_total() const {
        return std::accumulate(cells.begin(), cells.end() - 1, std::int64_t{0});
    }

    void validate() const {
        std::int64_t sum = 0;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (cells[j] < 0) {
                throw_invalid("cell " + std::to_string(j + 1) + " is negative");
            }
            sum += cells[j];
        }
        if (n_tot <= 0) {
            throw_invalid("population size must be positive");
        }
        if (sum != n_tot) {
            throw_invalid("cell counts sum to " + std::to_string(sum) +
                          " but the population size is " + std::to_string(n_tot));
        }
    }
};

/// Real-valued cell vector; posterior draws plug fractional counts into the
/// same estimator formulas, so all estimator cores operate on this type.
using RealCells = std::array<double, 17>;

inline RealCells to_real(const CellCounts& counts) {
    RealCells real{};
    for (std::size_t j = 0; j < real.size(); ++j) {
        real[j] = static_cast<double>(counts.cells[j]);
    }
    return real;
}

/// The classical 2x2 capture table for a single arm, condensed from the
/// 17-cell table. n_tot_arm is the effective population size, which omits
/// members randomized to the other arm by the anchor stream.
struct CondensedCounts {
    Arm arm = Arm::A;
    std::int64_t m11 = 0; // responders captured by both streams
    std::int64_t m10 = 0; // responders captured by stream 1 only
    std::int64_t m01 = 0; // responders captured by stream 2 only
    std::int64_t n_tot_arm = 0;
};

/// Model parameters behind the 17-cell multinomial.
struct DesignParams {
    double s2_rate = 0.0;      // P(sampled into stream 2), known by design
    double randomize_a = 0.5;  // P(randomized to A | stream 2), known by design
    double s1_rate = 0.0;      // P(in the stream-1 cohort)
    double assign_a = 0.0;     // P(assigned A | stream 1)
    double resp_kept_a = 0.0;    // P(Y=1 | stream 1, assigned A, received A)
    double resp_switch_a = 0.0;  // P(Y=1 | stream 1, assigned B, switched to A)
    double resp_outside_a = 0.0; // P(Y=1 | not in stream 1, received A)
    double resp_kept_b = 0.0;
    double resp_switch_b = 0.0;
    double resp_outside_b = 0.0;

    void validate() const {
        const double all[] = {s2_rate,     randomize_a,   s1_rate,        assign_a,
                              resp_kept_a, resp_switch_a, resp_outside_a, resp_kept_b,
                              resp_switch_b, resp_outside_b};
        for (double p : all) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw_invalid("design parameter outside [0,1]");
            }
        }
    }
};

} // namespace anchorcrc
