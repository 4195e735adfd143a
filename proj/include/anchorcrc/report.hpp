#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anchorcrc/error.hpp"
#include "anchorcrc/types.hpp"

namespace anchorcrc {

enum class Method {
    rs,            // randomized anchor-stream sample only
    chapman,       // bias-adjusted two-sample capture-recapture
    crc,           // 17-cell multinomial ML estimator
    psi_hat,       // condensed-table capture-recapture estimator
    stream1_naive, // observational cohort only (binary)
    standardized,  // direct-standardization continuous mean
    stream1_only,  // observational cohort only (continuous)
    stream2_only,  // anchor stream only (continuous)
};

enum class Target { mu_a, mu_b, ate };

enum class IntervalKind { wald, transformed_logit, credible, percentile };

struct Interval {
    IntervalKind kind = IntervalKind::wald;
    double level = 0.95;
    double lower = 0.0;
    double upper = 0.0;
};

/// One estimate: method, target, point, SE and interval when available,
/// plus warning codes accumulated along the way.
struct EstimateReport {
    Method method = Method::rs;
    Target target = Target::mu_a;
    double point = 0.0;
    std::optional<double> se;
    std::optional<Interval> interval;
    std::vector<std::string> diagnostics;
};

inline Target target_of(Arm arm) { return arm == Arm::A ? Target::mu_a : Target::mu_b; }

inline const char* to_string(Method m) {
    switch (m) {
    case Method::rs: return "rs";
    case Method::chapman: return "chapman";
    case Method::crc: return "crc";
    case Method::psi_hat: return "psi_hat";
    case Method::stream1_naive: return "stream1_naive";
    case Method::standardized: return "standardized";
    case Method::stream1_only: return "stream1_only";
    case Method::stream2_only: return "stream2_only";
    }
    return "?";
}

inline const char* to_string(Target t) {
    switch (t) {
    case Target::mu_a: return "A";
    case Target::mu_b: return "B";
    case Target::ate: return "ATE";
    }
    return "?";
}

inline const char* to_string(IntervalKind k) {
    switch (k) {
    case IntervalKind::wald: return "wald";
    case IntervalKind::transformed_logit: return "transformed-logit";
    case IntervalKind::credible: return "credible";
    case IntervalKind::percentile: return "percentile";
    }
    return "?";
}

inline Target parse_target(const std::string& s) {
    if (s == "A" || s == "a") return Target::mu_a;
    if (s == "B" || s == "b") return Target::mu_b;
    if (s == "ATE" || s == "ate") return Target::ate;
    throw_invalid("unknown target '" + s + "' (expected A, B or ATE)");
}

} // namespace anchorcrc
