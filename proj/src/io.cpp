#include "fraceig/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fraceig/errors.hpp"

namespace fraceig {

nlohmann::json form_to_json(const DiscreteGagliardoForm& form) {
    return {{"version", kFormVersion},           {"s", form.s()},
            {"domain", form.domain().to_string()}, {"nodes", form.nodes()},
            {"measures", form.measures()},         {"E", form.exterior()}};
}

DiscreteGagliardoForm form_from_json(const nlohmann::json& j) {
    if (!j.contains("version") || j.at("version") != kFormVersion)
        throw InvalidParameter("unsupported form document version");
    try {
        return DiscreteGagliardoForm(OpenSet1D::parse(j.at("domain").get<std::string>()),
                                     j.at("nodes").get<std::vector<double>>(),
                                     j.at("measures").get<std::vector<double>>(), j.at("E").get<std::vector<double>>(),
                                     j.at("s").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("malformed form document: ") + e.what());
    }
}

nlohmann::json to_json(const EigenSolveResult& r) {
    return {{"lambda", r.lambda}, {"q", r.q},   {"s", r.s},      {"iterations", r.iterations},
            {"residual", r.residual}, {"u", r.u}, {"seed", r.seed}};
}

nlohmann::json to_json(const LaneEmdenResult& r) {
    return {{"q", r.q},
            {"s", r.s},
            {"route", to_string(r.route)},
            {"lambda1", r.lambda1},
            {"residual", r.residual},
            {"iterations", r.iterations},
            {"w", r.w}};
}

nlohmann::json to_json(const CriticalPointSet& set) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : set.points)
        points.push_back({{"lambda", p.lambda},
                          {"restart", p.restart},
                          {"init", p.init_kind},
                          {"sign_changes", p.sign_changes},
                          {"changes_sign", p.changes_sign},
                          {"iterations", p.iterations},
                          {"residual", p.residual}});
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : set.clusters)
        clusters.push_back({{"lambda", c.lambda}, {"multiplicity", c.multiplicity}, {"sign_changing", c.sign_changing}});
    nlohmann::json j = {{"restarts", set.restarts}, {"failed", set.failed},     {"cluster_tol", set.cluster_tol},
                        {"lambda1", set.lambda1},   {"points", points},         {"clusters", clusters}};
    j["gap_witness"] = set.gap_witness ? nlohmann::json(*set.gap_witness) : nlohmann::json(nullptr);
    return j;
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw InvalidParameter("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out += ',';
            out += cells[k];
        }
        out += '\n';
    };
    emit(columns_);
    for (const auto& row : rows_) emit(row);
    return out;
}

std::string lane_emden_csv(const DiscreteGagliardoForm& form, const GridFunction& w) {
    form.check_grid(w);
    CsvTable table({"node", "x", "w"});
    for (std::size_t i = 0; i < w.size(); ++i)
        table.add_row({std::to_string(i), format_real(form.nodes()[i]), format_real(w[i])});
    return table.str();
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace fraceig
