#pragma once

#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anchorcrc/report.hpp"
#include "anchorcrc/scenario.hpp"
#include "anchorcrc/types.hpp"
#include "anchorcrc/version.hpp"

namespace anchorcrc {

using json = nlohmann::json;

namespace detail {

inline const json& member(const json& j, const char* key, const char* context) {
    if (!j.is_object()) {
        throw_invalid(std::string(context) + ": expected a JSON object");
    }
    auto it = j.find(key);
    if (it == j.end()) {
        throw_invalid(std::string(context) + ": missing required key '" + key + "'");
    }
    return *it;
}

template <typename T>
T member_as(const json& j, const char* key, const char* context) {
    try {
        return member(j, key, context).get<T>();
    } catch (const json::exception&) {
        throw_invalid(std::string(context) + ": key '" + key + "' has the wrong type");
    }
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const char* context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (const char* k : known) {
            if (it.key() == k) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw_invalid(std::string(context) + ": unknown key '" + it.key() + "'");
        }
    }
}

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Cell counts
// ---------------------------------------------------------------------------

inline json cells_to_json(const CellCounts& counts) {
    json j;
    j["n_tot"] = counts.n_tot;
    j["cells"] = counts.cells;
    return j;
}

inline CellCounts cells_from_json(const json& j) {
    CellCounts counts;
    counts.n_tot = detail::member_as<std::int64_t>(j, "n_tot", "cell counts");
    const auto cells = detail::member_as<std::vector<std::int64_t>>(j, "cells", "cell counts");
    if (cells.size() != 17) {
        throw_invalid("cell counts: 'cells' must hold exactly 17 entries, got " +
                      std::to_string(cells.size()));
    }
    std::copy(cells.begin(), cells.end(), counts.cells.begin());
    detail::reject_unknown_keys(j, {"n_tot", "cells"}, "cell counts");
    counts.validate();
    return counts;
}

// ---------------------------------------------------------------------------
// Individual records (CSV)
// ---------------------------------------------------------------------------

inline constexpr const char* records_csv_header = "id,stratum,s1,t1,s2,t2,y,y_cont";

inline std::string records_to_csv(std::span<const IndividualRecord> records) {
    std::ostringstream out;
    out << records_csv_header << '\n';
    for (const auto& r : records) {
        out << r.id << ',' << r.stratum << ',' << (r.s1 ? 1 : 0) << ','
            << (r.t1 ? std::string(1, arm_label(*r.t1)) : "") << ',' << (r.s2 ? 1 : 0) << ','
            << (r.t2 ? std::string(1, arm_label(*r.t2)) : "") << ','
            << (r.y ? (*r.y ? "1" : "0") : "") << ','
            << (r.y_cont ? detail::fmt6(*r.y_cont) : "") << '\n';
    }
    return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

inline std::optional<Arm> parse_arm_field(const std::string& s, std::size_t line_no) {
    if (s.empty()) {
        return std::nullopt;
    }
    if (s == "A") return Arm::A;
    if (s == "B") return Arm::B;
    throw_invalid("records line " + std::to_string(line_no) + ": arm must be 'A', 'B' or empty");
}

inline bool parse_bool_field(const std::string& s, std::size_t line_no) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw_invalid("records line " + std::to_string(line_no) + ": flag must be 0 or 1");
}

} // namespace detail

inline std::vector<IndividualRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw_invalid("records: empty input");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != records_csv_header) {
        throw_invalid(std::string("records: header must be '") + records_csv_header + "'");
    }
    std::vector<IndividualRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 8) {
            throw_invalid("records line " + std::to_string(line_no) + ": expected 8 fields, got " +
                          std::to_string(fields.size()));
        }
        IndividualRecord r;
        try {
            r.id = std::stoll(fields[0]);
            r.stratum = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw_invalid("records line " + std::to_string(line_no) + ": bad id or stratum");
        }
        r.s1 = detail::parse_bool_field(fields[2], line_no);
        r.t1 = detail::parse_arm_field(fields[3], line_no);
        r.s2 = detail::parse_bool_field(fields[4], line_no);
        r.t2 = detail::parse_arm_field(fields[5], line_no);
        if (!fields[6].empty()) {
            r.y = detail::parse_bool_field(fields[6], line_no);
        }
        if (!fields[7].empty()) {
            try {
                r.y_cont = std::stod(fields[7]);
            } catch (const std::exception&) {
                throw_invalid("records line " + std::to_string(line_no) + ": bad y_cont");
            }
        }
        r.final_treatment = r.implied_final();
        validate_record(r);
        records.push_back(r);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

inline json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["n_tot"] = cfg.n_tot;
    j["stratum_weights"] = cfg.stratum_weights;
    j["s1_inclusion"] = cfg.s1_inclusion;
    j["choose_a"] = cfg.choose_a;
    j["p2"] = cfg.p2;
    j["xi_a"] = cfg.xi_a;
    j["response_prob"] = {{"A", cfg.response_a}, {"B", cfg.response_b}};
    j["continuous"] = cfg.continuous;
    json comps = json::array();
    for (int s = 1; s <= 2; ++s) {
        for (int resp = 0; resp <= 1; ++resp) {
            for (Arm arm : {Arm::A, Arm::B}) {
                const auto& c = cfg.component(s, resp == 1, arm);
                comps.push_back({{"stratum", s},
                                 {"response", resp},
                                 {"arm", std::string(1, arm_label(arm))},
                                 {"mean", c.mean},
                                 {"sd", c.sd}});
            }
        }
    }
    j["continuous_components"] = comps;
    return j;
}

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg; // defaults apply for absent keys
    detail::reject_unknown_keys(j,
                                {"n_tot", "stratum_weights", "s1_inclusion", "choose_a", "p2",
                                 "xi_a", "response_prob", "continuous", "continuous_components"},
                                "scenario");
    const char* ctx = "scenario";
    if (j.contains("n_tot")) cfg.n_tot = detail::member_as<std::int64_t>(j, "n_tot", ctx);
    if (j.contains("stratum_weights"))
        cfg.stratum_weights = detail::member_as<std::array<double, 2>>(j, "stratum_weights", ctx);
    if (j.contains("s1_inclusion"))
        cfg.s1_inclusion = detail::member_as<std::array<double, 2>>(j, "s1_inclusion", ctx);
    if (j.contains("choose_a"))
        cfg.choose_a = detail::member_as<std::array<double, 2>>(j, "choose_a", ctx);
    if (j.contains("p2")) cfg.p2 = detail::member_as<double>(j, "p2", ctx);
    if (j.contains("xi_a")) cfg.xi_a = detail::member_as<double>(j, "xi_a", ctx);
    if (j.contains("response_prob")) {
        const json& rp = j.at("response_prob");
        detail::reject_unknown_keys(rp, {"A", "B"}, "scenario.response_prob");
        cfg.response_a = detail::member_as<std::array<double, 2>>(rp, "A", "scenario.response_prob");
        cfg.response_b = detail::member_as<std::array<double, 2>>(rp, "B", "scenario.response_prob");
    }
    if (j.contains("continuous")) cfg.continuous = detail::member_as<bool>(j, "continuous", ctx);
    if (j.contains("continuous_components")) {
        const json& comps = j.at("continuous_components");
        if (!comps.is_array()) {
            throw_invalid("scenario: 'continuous_components' must be an array");
        }
        for (const json& entry : comps) {
            const char* ectx = "scenario.continuous_components";
            detail::reject_unknown_keys(entry, {"stratum", "response", "arm", "mean", "sd"}, ectx);
            const int stratum = detail::member_as<int>(entry, "stratum", ectx);
            const int response = detail::member_as<int>(entry, "response", ectx);
            const std::string arm_s = detail::member_as<std::string>(entry, "arm", ectx);
            if (stratum < 1 || stratum > 2 || response < 0 || response > 1 ||
                (arm_s != "A" && arm_s != "B")) {
                throw_invalid(std::string(ectx) + ": stratum must be 1..2, response 0..1, arm A|B");
            }
            NormalComponent& c =
                cfg.components[stratum - 1][response][arm_s == "A" ? 0 : 1];
            c.mean = detail::member_as<double>(entry, "mean", ectx);
            c.sd = detail::member_as<double>(entry, "sd", ectx);
        }
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Estimate reports
// ---------------------------------------------------------------------------

inline json report_to_json(const EstimateReport& rep) {
    json j;
    j["method"] = to_string(rep.method);
    j["arm"] = to_string(rep.target);
    j["point"] = rep.point;
    if (rep.se) {
        j["se"] = *rep.se;
    }
    if (rep.interval) {
        j["interval"] = {{"kind", to_string(rep.interval->kind)},
                         {"level", rep.interval->level},
                         {"lower", rep.interval->lower},
                         {"upper", rep.interval->upper}};
    }
    j["diagnostics"] = rep.diagnostics;
    return j;
}

inline json reports_to_json(std::span<const EstimateReport> reports) {
    json arr = json::array();
    for (const auto& rep : reports) {
        arr.push_back(report_to_json(rep));
    }
    return arr;
}

inline std::string reports_to_csv(std::span<const EstimateReport> reports) {
    std::ostringstream out;
    out << "method,arm,point,se,interval_kind,level,lower,upper,diagnostics\n";
    for (const auto& rep : reports) {
        out << to_string(rep.method) << ',' << to_string(rep.target) << ','
            << detail::fmt6(rep.point) << ',' << (rep.se ? detail::fmt6(*rep.se) : "") << ',';
        if (rep.interval) {
            out << to_string(rep.interval->kind) << ',' << detail::fmt6(rep.interval->level) << ','
                << detail::fmt6(rep.interval->lower) << ',' << detail::fmt6(rep.interval->upper);
        } else {
            out << ",,,";
        }
        out << ',';
        for (std::size_t i = 0; i < rep.diagnostics.size(); ++i) {
            if (i > 0) {
                out << ';';
            }
            out << rep.diagnostics[i];
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// Reproducibility sidecar written next to every output file: the command,
/// a digest of the resolved configuration, and the master seed pin down the
/// run; replaying with the same tool version reproduces the output bytes.
struct RunManifest {
    std::string command;
    std::string config_digest;
    std::uint64_t master_seed = 0;
    std::string tool_version = version;
    std::string timestamp;
};

inline std::string fnv1a_digest(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json manifest_to_json(const RunManifest& m) {
    return json{{"command", m.command},
                {"config_digest", m.config_digest},
                {"master_seed", m.master_seed},
                {"tool_version", m.tool_version},
                {"timestamp", m.timestamp}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_invalid("cannot open '" + path + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_invalid("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw_invalid("failed while writing '" + path + "'");
    }
}

inline json parse_json_text(const std::string& text, const char* context) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw_invalid(std::string(context) + ": not valid JSON");
    }
    return j;
}

} // namespace anchorcrc
