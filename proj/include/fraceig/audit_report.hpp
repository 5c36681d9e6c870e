#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

namespace fraceig {

/// Outcome of one inequality or structural check.
///
/// Margins are signed (right side minus left side), so a check passes
/// exactly when worst_margin >= -tolerance.
struct AuditReport {
    std::string name;
    std::size_t samples = 0;
    double worst_margin = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    bool hard = true;  ///< false for report-only audits
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json details = nlohmann::json::object();

    void record(double margin) {
        if (samples == 0 || margin < worst_margin) worst_margin = margin;
        ++samples;
        pass = worst_margin >= -tolerance;
    }
};

nlohmann::json to_json(const AuditReport& report);

}  // namespace fraceig
