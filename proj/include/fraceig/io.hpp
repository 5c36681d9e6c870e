#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fraceig/gagliardo_form.hpp"
#include "fraceig/lane_emden.hpp"
#include "fraceig/spectral.hpp"

namespace fraceig {

inline constexpr const char* kFormVersion = "fraceig-form/1";

/// {version, s, domain, nodes, measures, E}; K is recomputed on load.
nlohmann::json form_to_json(const DiscreteGagliardoForm& form);

/// Throws InvalidParameter on a missing or unknown version string.
DiscreteGagliardoForm form_from_json(const nlohmann::json& j);

/// {lambda, q, s, iterations, residual, u, seed}.
nlohmann::json to_json(const EigenSolveResult& result);

nlohmann::json to_json(const LaneEmdenResult& result);

nlohmann::json to_json(const CriticalPointSet& set);

/// Real number with 17 significant digits.
std::string format_real(double value);

/// Minimal CSV writer: fixed column order, reals at 17 significant digits.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<std::string> cells);
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// node, x, w columns.
std::string lane_emden_csv(const DiscreteGagliardoForm& form, const GridFunction& w);

/// Dumps with a trailing newline; deterministic key order.
std::string dump(const nlohmann::json& j);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace fraceig
