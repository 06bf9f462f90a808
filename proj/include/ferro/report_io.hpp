#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>

#include "json.hpp"

#include "ferro/errors.hpp"
#include "ferro/verify.hpp"

namespace ferro {

enum class ReportFormat { text, structured };

inline ReportFormat parse_report_format(const std::string& name) {
    if (name == "text") return ReportFormat::text;
    if (name == "structured") return ReportFormat::structured;
    throw InvalidParameter("unknown report format '" + name + "'");
}

namespace detail {

inline nlohmann::ordered_json evidence_json(const EvidenceValue& v) {
    return std::visit([](auto&& x) { return nlohmann::ordered_json(x); }, v);
}

inline std::string evidence_text(const EvidenceValue& v) {
    std::ostringstream s;
    std::visit(
        [&s](auto&& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) {
                s << (x ? "yes" : "no");
            } else if constexpr (std::is_same_v<T, double>) {
                s << std::setprecision(3) << std::scientific << x;
            } else {
                s << x;
            }
        },
        v);
    return s.str();
}

} // namespace detail

// Field names and nesting are fixed; key order tracks insertion order so
// the serialization is stable for a fixed report.
inline nlohmann::ordered_json report_to_json(const VerificationReport& report) {
    nlohmann::ordered_json j;
    j["graph"] = {{"n", report.graph.n}, {"edges", report.graph.edges}};
    j["clauses"] = nlohmann::ordered_json::array();
    for (const ClauseResult& c : report.clauses) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["evidence"] = nlohmann::ordered_json::object();
        for (const auto& [key, value] : c.evidence) {
            cj["evidence"][key] = detail::evidence_json(value);
        }
        j["clauses"].push_back(std::move(cj));
    }
    j["thresholds"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.thresholds) j["thresholds"][key] = value;
    j["timings_ms"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.timings_ms) j["timings_ms"][key] = value;
    j["version"] = report.version;
    return j;
}

inline std::string render_text(const VerificationReport& report) {
    std::ostringstream out;
    out << "graph: n=" << report.graph.n << ", edges=" << report.graph.edges << "\n";
    std::size_t width = 0;
    for (const ClauseResult& c : report.clauses) width = std::max(width, c.name.size());
    for (const ClauseResult& c : report.clauses) {
        out << "clause " << std::left << std::setw(static_cast<int>(width)) << c.name
            << "  " << (c.pass ? "PASS" : "FAIL") << "  (";
        bool first = true;
        for (const auto& [key, value] : c.evidence) {
            if (!first) out << ", ";
            first = false;
            out << key << "=" << detail::evidence_text(value);
        }
        out << ")\n";
    }
    std::size_t passed = 0;
    for (const ClauseResult& c : report.clauses) {
        if (c.pass) ++passed;
    }
    out << "overall: " << (report.all_pass() ? "PASS" : "FAIL") << " (" << passed << "/"
        << report.clauses.size() << " clauses)\n";
    return out.str();
}

inline void emit_report(const VerificationReport& report, ReportFormat format,
                        std::ostream& sink) {
    if (format == ReportFormat::structured) {
        sink << report_to_json(report).dump(2) << "\n";
    } else {
        sink << render_text(report);
    }
    if (!sink) throw IoError("failed writing report");
}

} // namespace ferro
