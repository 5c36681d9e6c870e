#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "fraceig/audits.hpp"
#include "fraceig/errors.hpp"
#include "fraceig/experiments.hpp"
#include "fraceig/io.hpp"
#include "fraceig/lane_emden.hpp"
#include "fraceig/numerics.hpp"
#include "fraceig/spectral.hpp"

namespace fraceig {

namespace {

enum class Kind { Number, Integer, String, List };

struct Flag {
    std::string name;  // long flag without dashes; config key uses '_' for '-'
    Kind kind;
    std::string help;
};

std::string key_of(std::string name) {
    std::replace(name.begin(), name.end(), '-', '_');
    return name;
}

const std::vector<Flag> kCommon{
    {"domain", Kind::String, "open set, e.g. \"0,1;2,3.5\""},
    {"h", Kind::Number, "grid width"},
    {"s", Kind::Number, "fractional order in (0,1)"},
    {"q", Kind::Number, "exponent"},
    {"tol", Kind::Number, "solver tolerance"},
    {"max-iter", Kind::Integer, "iteration cap"},
    {"seed", Kind::Integer, "random seed"},
    {"max-nodes", Kind::Integer, "refuse grids with more nodes"},
    {"form", Kind::String, "read an assembled form instead of assembling"},
    {"out", Kind::String, "JSON output path (stdout if absent)"},
    {"csv", Kind::String, "CSV output path"},
};

const std::map<std::string, std::string> kAbout{
    {"assemble", "assemble the discrete form and write it as JSON"},
    {"lambda1", "first eigenvalue and positive eigenfunction for one q"},
    {"spectrum", "lowest eigenpairs of the linear (q = 2) problem"},
    {"search", "multi-start search for critical points of the Rayleigh quotient"},
    {"lane-emden", "Lane-Emden density for q in (1,2)"},
    {"exhaustion", "densities on an increasing family of ball intersections"},
    {"compare", "comparison of densities on a subset and its superset"},
    {"audit", "single inequality audit"},
    {"experiment", "isolation, q-continuity, q-scan, convergence or the full suite"},
};

const std::map<std::string, std::vector<Flag>> kExtra{
    {"assemble", {}},
    {"lambda1", {}},
    {"spectrum", {{"k", Kind::Integer, "number of eigenpairs"}}},
    {"search",
     {{"restarts", Kind::Integer, "number of restarts"}, {"cluster-tol", Kind::Number, "relative cluster width"}}},
    {"lane-emden", {{"route", Kind::String, "eigen|energy|both"}}},
    {"exhaustion", {{"radii", Kind::List, "ball radii"}, {"center", Kind::Number, "ball center"}}},
    {"compare", {{"domain1", Kind::String, "inner set"}, {"domain2", Kind::String, "outer set"}}},
    {"audit",
     {{"samples", Kind::Integer, "random samples"},
      {"h-list", Kind::List, "grid widths for refinement"},
      {"scales", Kind::List, "dilation factors"}}},
    {"experiment",
     {{"q-list", Kind::List, "exponents"},
      {"h-list", Kind::List, "grid widths"},
      {"restarts", Kind::Integer, "restarts"},
      {"cluster-tol", Kind::Number, "relative cluster width"},
      {"samples", Kind::Integer, "random samples"},
      {"radii", Kind::List, "exhaustion radii"},
      {"center", Kind::Number, "exhaustion center"},
      {"scales", Kind::List, "dilation factors"},
      {"q-max", Kind::Number, "largest exponent of the scan"},
      {"steps", Kind::Integer, "scan steps"}}},
};

double parse_number(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidParameter("--" + key + ": not a number: '" + text + "'");
    return v;
}

std::uint64_t parse_integer(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidParameter("--" + key + ": not an integer: '" + text + "'");
    return v;
}

nlohmann::json convert(const Flag& flag, const std::string& text) {
    switch (flag.kind) {
        case Kind::Number:
            return parse_number(flag.name, text);
        case Kind::Integer:
            return parse_integer(flag.name, text);
        case Kind::List: {
            nlohmann::json list = nlohmann::json::array();
            std::size_t start = 0;
            while (start <= text.size()) {
                const auto comma = text.find(',', start);
                const auto piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                list.push_back(parse_number(flag.name, piece));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            return list;
        }
        case Kind::String:
            break;
    }
    return text;
}

/// Merged view of config file and explicit flags.
class Params {
public:
    explicit Params(nlohmann::json values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.contains(key); }

    double number(const std::string& key, double fallback) const {
        return get<double>(key, fallback);
    }
    std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
        return get<std::uint64_t>(key, fallback);
    }
    std::string string(const std::string& key, const std::string& fallback) const {
        return get<std::string>(key, fallback);
    }
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
        return get<std::vector<double>>(key, std::move(fallback));
    }
    const nlohmann::json& json() const { return values_; }

private:
    template <class T>
    T get(const std::string& key, T fallback) const {
        if (!values_.contains(key)) return fallback;
        try {
            return values_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw InvalidParameter("config value for '" + key + "' has the wrong type");
        }
    }

    nlohmann::json values_;
};

/// Config files may spell keys with '-' or '_' and give lists as arrays or
/// comma-separated strings.
nlohmann::json normalize_config(const nlohmann::json& file, const std::map<std::string, Flag>& known) {
    if (!file.is_object()) throw InvalidParameter("config file must hold a JSON object");
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [raw, value] : file.items()) {
        const auto key = key_of(raw);
        if (key == "experiment" || key == "audit") {
            out[key] = value;
            continue;
        }
        const auto it = known.find(key);
        if (it == known.end()) throw InvalidParameter("unknown config key '" + raw + "'");
        if (it->second.kind == Kind::List && value.is_string())
            out[key] = convert(it->second, value.get<std::string>());
        else
            out[key] = value;
    }
    return out;
}

int exit_for(const AuditReport& report) {
    if (report.pass) return kExitOk;
    return report.hard ? kExitHardFailure : kExitReportAnomaly;
}

struct Emitter {
    std::ostream& out;
    std::string json_path;
    std::string csv_path;

    void emit(const nlohmann::json& j, const std::string& csv = {}) const {
        const auto text = dump(j);
        if (json_path.empty())
            out << text;
        else
            write_text(json_path, text);
        if (!csv_path.empty()) write_text(csv_path, csv);
    }
};

DiscreteGagliardoForm load_form(const Params& p) {
    if (p.has("form")) return form_from_json(nlohmann::json::parse(read_text(p.string("form", ""))));
    const auto omega = OpenSet1D::parse(p.string("domain", "0,1"));
    const auto grid = UniformGridSpec::from_width(p.number("h", 0.005));
    std::size_t nodes = 0;
    for (auto c : grid.counts_for(omega)) nodes += c;
    const auto cap = p.integer("max_nodes", 2000);
    if (nodes > cap)
        throw InvalidParameter("grid has " + std::to_string(nodes) + " nodes, above --max-nodes " +
                               std::to_string(cap));
    return assemble_form(omega, grid, p.number("s", 0.5));
}

SolveOptions solve_options(const Params& p) {
    return {p.number("tol", 1e-10), p.integer("max_iter", 5000), p.integer("seed", 1)};
}

EigenSolveResult solve_any(const DiscreteGagliardoForm& form, double q, const SolveOptions& options) {
    if (q <= 2.0) return solve_lambda1(form, q, options);
    return solve_lambda1_general(form, q, options);
}

CsvTable points_csv(const CriticalPointSet& set, std::uint64_t seed) {
    CsvTable table({"restart", "seed", "init", "lambda", "sign_changes", "changes_sign", "iterations", "residual"});
    for (const auto& p : set.points)
        table.add_row({std::to_string(p.restart), std::to_string(seed + p.restart), p.init_kind, format_real(p.lambda),
                       std::to_string(p.sign_changes), p.changes_sign ? "1" : "0", std::to_string(p.iterations),
                       format_real(p.residual)});
    return table;
}

int cmd_assemble(const Params& p, const Emitter& e) {
    const auto form = load_form(p);
    e.emit(form_to_json(form));
    return kExitOk;
}

int cmd_lambda1(const Params& p, const Emitter& e) {
    const auto form = load_form(p);
    const auto result = solve_any(form, p.number("q", 1.5), solve_options(p));
    CsvTable table({"node", "x", "u"});
    for (std::size_t i = 0; i < form.size(); ++i)
        table.add_row({std::to_string(i), format_real(form.nodes()[i]), format_real(result.u[i])});
    e.emit(to_json(result), table.str());
    return kExitOk;
}

int cmd_spectrum(const Params& p, const Emitter& e) {
    const auto form = load_form(p);
    const auto k = std::min<std::size_t>(p.integer("k", 10), form.size());
    const auto pairs = full_spectrum_q2(form, k);
    nlohmann::json values = nlohmann::json::array();
    nlohmann::json changes = nlohmann::json::array();
    CsvTable table({"index", "lambda", "sign_changes"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto c = count_sign_changes(pairs[i].u);
        values.push_back(pairs[i].lambda);
        changes.push_back(c);
        table.add_row({std::to_string(i + 1), format_real(pairs[i].lambda), std::to_string(c)});
    }
    e.emit({{"s", form.s()},
            {"domain", form.domain().to_string()},
            {"nodes", form.size()},
            {"eigenvalues", values},
            {"sign_changes", changes}},
           table.str());
    return kExitOk;
}

int cmd_search(const Params& p, const Emitter& e) {
    const auto form = load_form(p);
    const SearchOptions options{p.integer("restarts", 50), p.integer("seed", 1), p.number("tol", 1e-10),
                                p.number("cluster_tol", 1e-6), p.integer("max_iter", 2000)};
    const auto set = critical_point_search(form, p.number("q", 1.5), options);
    e.emit(to_json(set), points_csv(set, options.seed).str());
    return kExitOk;
}

int cmd_lane_emden(const Params& p, const Emitter& e) {
    const auto form = load_form(p);
    const double q = p.number("q", 1.5);
    const auto route = p.string("route", "eigen");
    if (route != "eigen" && route != "energy" && route != "both")
        throw InvalidParameter("--route must be eigen, energy or both");
    const auto seed = p.integer("seed", 1);
    nlohmann::json j{{"route", route}};
    std::optional<LaneEmdenResult> eigen;
    std::optional<LaneEmdenResult> energy;
    if (route != "energy") {
        eigen = lane_emden_density(form, q, 1e-12, seed);
        j["eigen"] = to_json(*eigen);
    }
    if (route != "eigen") {
        energy = minimize_free_energy(form, q, 1e-13, 200000, seed);
        j["energy"] = to_json(*energy);
    }
    int code = kExitOk;
    if (eigen && energy) {
        const auto& m = form.measures();
        double diff = 0.0;
        double norm = 0.0;
        for (std::size_t i = 0; i < form.size(); ++i) {
            diff += m[i] * (eigen->w[i] - energy->w[i]) * (eigen->w[i] - energy->w[i]);
            norm += m[i] * eigen->w[i] * eigen->w[i];
        }
        const double rel = std::sqrt(diff / norm);
        j["relative_l2_difference"] = rel;
        j["routes_agree"] = rel <= 1e-6;
        if (!(rel <= 1e-6)) code = kExitReportAnomaly;
    }
    e.emit(j, lane_emden_csv(form, eigen ? eigen->w : energy->w));
    return code;
}

int cmd_exhaustion(const Params& p, const Emitter& e) {
    const auto omega = OpenSet1D::parse(p.string("domain", "0,1"));
    const double s = p.number("s", 0.5);
    const double q = p.number("q", 1.5);
    const auto seq = exhaustion_sequence(omega, s, q, p.list("radii", {0.25, 0.5, 1.0}),
                                         UniformGridSpec::from_width(p.number("h", 0.005)), p.number("center", 0.0));
    const auto report = exhaustion_check(seq, omega, s, q);
    nlohmann::json steps = nlohmann::json::array();
    std::vector<std::string> columns{"node", "x", "w_full"};
    for (const auto& step : seq.steps) {
        steps.push_back({{"radius", step.radius},
                         {"subset", step.subset.to_string()},
                         {"lambda1", step.density.lambda1},
                         {"w", step.ambient_w}});
        columns.push_back("w_r" + format_real(step.radius));
    }
    CsvTable table(columns);
    const auto form = assemble_form(omega, UniformGridSpec::from_width(p.number("h", 0.005)), s);
    for (std::size_t i = 0; i < seq.full_w.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), format_real(form.nodes()[i]), format_real(seq.full_w[i])};
        for (const auto& step : seq.steps) row.push_back(format_real(step.ambient_w[i]));
        table.add_row(std::move(row));
    }
    e.emit({{"center", seq.center}, {"steps", steps}, {"warnings", seq.warnings}, {"report", to_json(report)}},
           table.str());
    return exit_for(report);
}

int cmd_compare(const Params& p, const Emitter& e) {
    if (!p.has("domain1") || !p.has("domain2")) throw InvalidParameter("compare needs --domain1 and --domain2");
    const auto inner = OpenSet1D::parse(p.string("domain1", ""));
    const auto outer = OpenSet1D::parse(p.string("domain2", ""));
    const auto report = comparison_check(inner, outer, p.number("s", 0.5), p.number("q", 1.5),
                                         UniformGridSpec::from_width(p.number("h", 0.005)));
    e.emit(to_json(report));
    return exit_for(report);
}

AuditReport hopf_report(const DiscreteGagliardoForm& form, const LaneEmdenResult& w) {
    const auto fit = hopf_fit(form, w);
    AuditReport report;
    report.name = "hopf";
    report.hard = false;
    report.samples = form.size();
    report.worst_margin = fit.c_est;
    report.pass = fit.c_est > 0.0;
    report.params = {{"s", form.s()}, {"q", w.q}, {"domain", form.domain().to_string()}, {"nodes", form.size()}};
    report.details = {{"c_est", fit.c_est}, {"argmin", fit.argmin}, {"x_argmin", form.nodes()[fit.argmin]},
                      {"ratios", fit.ratios}};
    return report;
}

AuditReport linf_report(const Params& p) {
    const auto omega = OpenSet1D::parse(p.string("domain", "0,1"));
    const double s = p.number("s", 0.5);
    const double q = p.number("q", 1.5);
    const auto options = solve_options(p);
    const auto counts = UniformGridSpec::from_width(p.number("h", 0.005)).counts_for(omega);
    std::vector<LinfSample> scaled;
    for (double t : p.list("scales", {1.0, 2.0, 4.0})) {
        const auto form = assemble_form(scale_set(omega, t), UniformGridSpec::from_counts(counts), s);
        scaled.push_back(make_linf_sample(form, solve_any(form, q, options), "t=" + format_real(t)));
    }
    std::vector<LinfSample> refined;
    for (double h : p.list("h_list", {0.02, 0.01, 0.005})) {
        const auto form = assemble_form(omega, UniformGridSpec::from_width(h), s);
        refined.push_back(make_linf_sample(form, solve_any(form, q, options), "h=" + format_real(h)));
    }
    return linf_ratio_audit(scaled, refined, q, s);
}

AuditReport subsolution_report(const DiscreteGagliardoForm& form, double q) {
    const auto w = lane_emden_density(form, q, 1e-12);
    // (-Δ)^s w = w^{q-1} <= ‖w‖_∞^{q-1}
    const double f_bound = std::pow(max_abs(w.w), q - 1.0);
    const double diam = form.domain().diameter();
    std::vector<SubsolutionConfig> configs;
    for (const auto& piece : form.domain().intervals())
        for (double r : {0.1, 0.2, 0.4})
            for (double delta : {0.25, 0.5, 1.0}) configs.push_back({0.5 * (piece.lo + piece.hi), r * diam, delta});
    return subsolution_sweep(form, w.w, f_bound, configs);
}

int cmd_audit(const std::string& name, const Params& p, const Emitter& e) {
    const double q = p.number("q", 1.5);
    const auto samples = p.integer("samples", 200);
    const auto seed = p.integer("seed", 1);
    AuditReport report;
    if (name == "linf-ratio") {
        report = linf_report(p);
    } else {
        const auto form = load_form(p);
        if (name == "hardy") {
            report = hardy_audit(form, samples, seed);
        } else if (name == "holder") {
            report = weighted_holder_audit(form, q, samples, seed);
        } else if (name == "subsolution") {
            report = subsolution_report(form, q);
        } else {
            const auto w = lane_emden_density(form, q, 1e-12);
            if (name == "picone")
                report = picone_lane_emden_audit(form, q, w, samples, seed, true);
            else if (name == "hopf")
                report = hopf_report(form, w);
            else
                report = converse_linf_bound_audit(form, q, w);
        }
    }
    e.emit(to_json(report));
    return exit_for(report);
}

int cmd_experiment(const Params& p, const Emitter& e) {
    ExperimentConfig config;
    static const std::set<std::string> io_keys{"out", "csv", "form", "max_nodes", "audit"};
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& [key, value] : p.json().items())
        if (!io_keys.count(key)) fields[key] = value;
    merge_json(config, fields);
    const auto output = run_experiment(config);
    e.emit(output.json, output.csv);
    if (output.hard_failure) return kExitHardFailure;
    if (output.soft_anomaly) return kExitReportAnomaly;
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional semilinear eigenvalue solver and inequality audits"};
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default flag values");

    std::map<std::string, Flag> known;
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::vector<std::pair<Flag, CLI::Option*>>> registered;
    std::map<std::string, CLI::App*> subs;
    std::string audit_name;
    std::string experiment_name;

    for (const auto& [name, extra] : kExtra) {
        auto* sub = app.add_subcommand(name, kAbout.at(name));
        subs[name] = sub;
        std::vector<Flag> flags = kCommon;
        flags.insert(flags.end(), extra.begin(), extra.end());
        for (const auto& flag : flags) {
            known.emplace(key_of(flag.name), flag);
            auto* opt = sub->add_option("--" + flag.name, raw[name][flag.name], flag.help);
            registered[name].emplace_back(flag, opt);
        }
    }
    subs["audit"]
        ->add_option("name", audit_name, "audit to run")
        ->check(CLI::IsMember({"hardy", "picone", "holder", "hopf", "converse-linf", "linf-ratio", "subsolution"}));
    subs["experiment"]
        ->add_option("name", experiment_name, "experiment to run")
        ->check(CLI::IsMember({"isolation", "qcont", "qscan", "convergence", "suite"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;

    try {
        nlohmann::json merged = nlohmann::json::object();
        if (!config_path.empty()) {
            nlohmann::json file;
            try {
                file = nlohmann::json::parse(read_text(config_path));
            } catch (const nlohmann::json::exception& ex) {
                throw InvalidParameter(std::string("config file is not valid JSON: ") + ex.what());
            }
            merged = normalize_config(file, known);
        }
        for (const auto& [flag, opt] : registered[command])
            if (opt->count() > 0) merged[key_of(flag.name)] = convert(flag, raw[command][flag.name]);
        if (!experiment_name.empty()) merged["experiment"] = experiment_name;
        const Params params(merged);
        const Emitter emitter{out, params.string("out", ""), params.string("csv", "")};

        if (command == "assemble") return cmd_assemble(params, emitter);
        if (command == "lambda1") return cmd_lambda1(params, emitter);
        if (command == "spectrum") return cmd_spectrum(params, emitter);
        if (command == "search") return cmd_search(params, emitter);
        if (command == "lane-emden") return cmd_lane_emden(params, emitter);
        if (command == "exhaustion") return cmd_exhaustion(params, emitter);
        if (command == "compare") return cmd_compare(params, emitter);
        if (command == "audit") {
            const auto name = audit_name.empty() ? params.string("audit", "") : audit_name;
            if (name.empty()) throw InvalidParameter("audit needs a name");
            return cmd_audit(name, params, emitter);
        }
        if (!params.has("experiment")) throw InvalidParameter("experiment needs a name");
        return cmd_experiment(params, emitter);
    } catch (const ConvergenceFailure& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitHardFailure;
    } catch (const Error& ex) {
        // domain, grid, parameter and precondition errors are configuration errors
        err << "error: " << ex.what() << "\n";
        return kExitConfigError;
    } catch (const nlohmann::json::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitHardFailure;
    }
}

}  // namespace fraceig
