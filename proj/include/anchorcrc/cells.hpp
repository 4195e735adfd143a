#pragma once

#include <span>
#include <vector>

#include "anchorcrc/types.hpp"

namespace anchorcrc {

/// Maps a validated record to its cell index (1..17).
inline int classify_record(const IndividualRecord& r) {
    validate_record(r);
    if (r.s1 && r.s2) {
        const bool resp = *r.y;
        if (*r.t1 == Arm::A && *r.t2 == Arm::A) return resp ? 1 : 2;
        if (*r.t1 == Arm::B && *r.t2 == Arm::A) return resp ? 5 : 6;
        if (*r.t1 == Arm::B && *r.t2 == Arm::B) return resp ? 7 : 8;
        return resp ? 11 : 12; // assigned A, switched to B
    }
    if (r.s1) {
        const bool resp = *r.y;
        if (*r.t1 == Arm::A) return resp ? 3 : 4;
        return resp ? 9 : 10;
    }
    if (r.s2) {
        const bool resp = *r.y;
        if (*r.t2 == Arm::A) return resp ? 13 : 14;
        return resp ? 15 : 16;
    }
    return 17;
}

/// Tabulates records into the 17 cells. Unobserved members may be included
/// or left implicit; c17 is always n_tot minus the observed count.
inline CellCounts tabulate_cells(std::span<const IndividualRecord> records, std::int64_t n_tot) {
    if (n_tot <= 0) {
        throw_invalid("population size must be positive");
    }
    CellCounts counts;
    counts.n_tot = n_tot;
    std::int64_t observed = 0;
    for (const auto& r : records) {
        const int cell = classify_record(r);
        if (cell != 17) {
            ++counts.cells[static_cast<std::size_t>(cell - 1)];
            ++observed;
        }
    }
    if (observed > n_tot) {
        throw_invalid("observed " + std::to_string(observed) + " members but the population size is " +
                      std::to_string(n_tot));
    }
    counts.cells[16] = n_tot - observed;
    return counts;
}

namespace detail {

struct CellPattern {
    bool s1;
    Arm t1;
    bool s2;
    Arm t2;
    bool y;
};

// Observation pattern for cells 1..16; cell 17 is the unobserved remainder.
inline constexpr CellPattern cell_patterns[16] = {
    {true, Arm::A, true, Arm::A, true},   // c1
    {true, Arm::A, true, Arm::A, false},  // c2
    {true, Arm::A, false, Arm::A, true},  // c3
    {true, Arm::A, false, Arm::A, false}, // c4
    {true, Arm::B, true, Arm::A, true},   // c5  switched to A
    {true, Arm::B, true, Arm::A, false},  // c6
    {true, Arm::B, true, Arm::B, true},   // c7
    {true, Arm::B, true, Arm::B, false},  // c8
    {true, Arm::B, false, Arm::A, true},  // c9
    {true, Arm::B, false, Arm::A, false}, // c10
    {true, Arm::A, true, Arm::B, true},   // c11 switched to B
    {true, Arm::A, true, Arm::B, false},  // c12
    {false, Arm::A, true, Arm::A, true},  // c13
    {false, Arm::A, true, Arm::A, false}, // c14
    {false, Arm::A, true, Arm::B, true},  // c15
    {false, Arm::A, true, Arm::B, false}, // c16
};

} // namespace detail

/// Inverse of tabulate_cells: one synthetic record per cell occupant,
/// including unobserved members for c17.
inline std::vector<IndividualRecord> expand_cells(const CellCounts& counts) {
    counts.validate();
    std::vector<IndividualRecord> records;
    records.reserve(static_cast<std::size_t>(counts.n_tot));
    std::int64_t next_id = 0;
    for (int cell = 1; cell <= 16; ++cell) {
        const auto& pat = detail::cell_patterns[cell - 1];
        for (std::int64_t k = 0; k < counts.cell(cell); ++k) {
            IndividualRecord r;
            r.id = next_id++;
            r.s1 = pat.s1;
            if (pat.s1) r.t1 = pat.t1;
            r.s2 = pat.s2;
            if (pat.s2) r.t2 = pat.t2;
            r.final_treatment = r.implied_final();
            r.y = pat.y;
            records.push_back(r);
        }
    }
    for (std::int64_t k = 0; k < counts.cell(17); ++k) {
        IndividualRecord r;
        r.id = next_id++;
        records.push_back(r);
    }
    return records;
}

/// Condenses the 17-cell table into the single-arm 2x2 capture table.
inline CondensedCounts condense(const CellCounts& counts, Arm arm) {
    counts.validate();
    CondensedCounts c;
    c.arm = arm;
    if (arm == Arm::A) {
        c.m11 = counts.cell(1);
        c.m10 = counts.cell(3);
        c.m01 = counts.cell(5) + counts.cell(13);
        c.n_tot_arm = counts.n_tot - (counts.cell(7) + counts.cell(8) + counts.cell(11) +
                                      counts.cell(12) + counts.cell(15) + counts.cell(16));
    } else {
        c.m11 = counts.cell(7);
        c.m10 = counts.cell(9);
        c.m01 = counts.cell(11) + counts.cell(15);
        c.n_tot_arm = counts.n_tot - (counts.cell(1) + counts.cell(2) + counts.cell(5) +
                                      counts.cell(6) + counts.cell(13) + counts.cell(14));
    }
    return c;
}

/// The multinomial cell probabilities implied by the design parameters.
/// Sums to 1 for any valid parameter set.
inline std::array<double, 17> cell_probabilities(const DesignParams& d) {
    d.validate();
    const double psi = d.s2_rate;
    const double xi = d.randomize_a;
    const double phi = d.s1_rate;
    const double phi_a = d.assign_a;
    std::array<double, 17> p{};
    p[0] = xi * psi * d.resp_kept_a * phi_a * phi;
    p[1] = xi * psi * (1.0 - d.resp_kept_a) * phi_a * phi;
    p[2] = (1.0 - psi) * d.resp_kept_a * phi_a * phi;
    p[3] = (1.0 - psi) * (1.0 - d.resp_kept_a) * phi_a * phi;
    p[4] = xi * psi * d.resp_switch_a * (1.0 - phi_a) * phi;
    p[5] = xi * psi * (1.0 - d.resp_switch_a) * (1.0 - phi_a) * phi;
    p[6] = (1.0 - xi) * psi * d.resp_kept_b * (1.0 - phi_a) * phi;
    p[7] = (1.0 - xi) * psi * (1.0 - d.resp_kept_b) * (1.0 - phi_a) * phi;
    p[8] = (1.0 - psi) * d.resp_kept_b * (1.0 - phi_a) * phi;
    p[9] = (1.0 - psi) * (1.0 - d.resp_kept_b) * (1.0 - phi_a) * phi;
    p[10] = (1.0 - xi) * psi * d.resp_switch_b * phi_a * phi;
    p[11] = (1.0 - xi) * psi * (1.0 - d.resp_switch_b) * phi_a * phi;
    p[12] = xi * psi * d.resp_outside_a * (1.0 - phi);
    p[13] = xi * psi * (1.0 - d.resp_outside_a) * (1.0 - phi);
    p[14] = (1.0 - xi) * psi * d.resp_outside_b * (1.0 - phi);
    p[15] = (1.0 - xi) * psi * (1.0 - d.resp_outside_b) * (1.0 - phi);
    p[16] = (1.0 - psi) * (1.0 - phi);
    return p;
}

} // namespace anchorcrc
