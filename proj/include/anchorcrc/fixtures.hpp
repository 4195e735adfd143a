#pragma once

#include "anchorcrc/types.hpp"

namespace anchorcrc {

/// Built-in example data: one observed 17-cell table from a synthetic
/// two-vaccine target population of 2,000 (the "tunisia" fixture).
/// Stream-1 margins: 327 assigned A with 293 responders, 571 assigned B
/// with 508; stream-2 margins: 86 randomized to A with 85 responders,
/// 83 to B with 71.
inline CellCounts tunisia_cells() {
    CellCounts counts;
    counts.cells = {12, 1, 281, 33, 33, 0, 18, 5, 490, 58, 14, 2, 40, 0, 39, 5, 969};
    counts.n_tot = 2000;
    return counts;
}

} // namespace anchorcrc
