#pragma once

// Umbrella header for the anchor-stream capture-recapture toolkit.

#include "anchorcrc/bayes.hpp"
#include "anchorcrc/cells.hpp"
#include "anchorcrc/continuous.hpp"
#include "anchorcrc/delta.hpp"
#include "anchorcrc/error.hpp"
#include "anchorcrc/estimators.hpp"
#include "anchorcrc/fixtures.hpp"
#include "anchorcrc/io.hpp"
#include "anchorcrc/mle.hpp"
#include "anchorcrc/montecarlo.hpp"
#include "anchorcrc/report.hpp"
#include "anchorcrc/rng.hpp"
#include "anchorcrc/scenario.hpp"
#include "anchorcrc/stats.hpp"
#include "anchorcrc/types.hpp"
#include "anchorcrc/version.hpp"
