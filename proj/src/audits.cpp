#include "fraceig/audits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraceig/errors.hpp"
#include "fraceig/linalg.hpp"
#include "fraceig/numerics.hpp"
#include "fraceig/rng.hpp"

namespace fraceig {

namespace {

// Signed relative margin (rhs - lhs) / max(|rhs|, |lhs|); zero when both vanish.
double relative_margin(double rhs, double lhs) {
    const double scale = std::max(std::abs(rhs), std::abs(lhs));
    return scale > 0.0 ? (rhs - lhs) / scale : 0.0;
}

double weighted_sum(const DiscreteGagliardoForm& form, std::span<const double> u, std::span<const double> weight) {
    const auto& m = form.measures();
    return pairwise_sum(u.size(), [&](std::size_t i) { return m[i] * u[i] * u[i] * weight[i]; });
}

nlohmann::json form_params(const DiscreteGagliardoForm& form) {
    return {{"s", form.s()}, {"domain", form.domain().to_string()}, {"nodes", form.size()}};
}

}  // namespace

HardyConstant hardy_constant(const OpenSet1D& omega, double s) {
    const auto cone = exterior_cone_params(omega);
    const double n = 1.0;
    const double value = std::pow(2.0, n + 2.0 * s) * n / (2.0 * cone.theta) * std::max(cone.diameter / cone.ell, 1.0);
    return {value, cone.theta, cone.ell, cone.diameter};
}

std::vector<GridFunction> audit_vectors(const DiscreteGagliardoForm& form, std::size_t random, std::uint64_t seed) {
    const std::size_t n = form.size();
    const auto& x = form.nodes();
    std::vector<GridFunction> out;
    out.emplace_back(n, 1.0);

    GridFunction hat(n);
    const double lo = form.domain().lower();
    const double diam = form.domain().diameter();
    for (std::size_t i = 0; i < n; ++i) hat[i] = 1.0 - std::abs(2.0 * (x[i] - lo) / diam - 1.0);
    out.push_back(std::move(hat));

    GridFunction spike(n, 0.0);
    spike[n / 2] = 1.0;
    out.push_back(std::move(spike));

    GridFunction alternating(n);
    for (std::size_t i = 0; i < n; ++i) alternating[i] = i % 2 == 0 ? 1.0 : -1.0;
    out.push_back(std::move(alternating));

    Lcg64 rng(seed);
    for (std::size_t k = 0; k < random; ++k) {
        GridFunction u(n);
        for (double& v : u) v = rng.uniform(-1.0, 1.0);
        out.push_back(std::move(u));
    }
    return out;
}

AuditReport hardy_audit(const DiscreteGagliardoForm& form, std::size_t samples, std::uint64_t seed) {
    const double s = form.s();
    const auto constant = hardy_constant(form.domain(), s);
    const auto& m = form.measures();
    const auto& e = form.exterior();
    const auto& delta = form.boundary_distance();
    const double prefactor =
        constant.theta / std::pow(2.0, 1.0 + 2.0 * s) * std::min(constant.ell / constant.diameter, 1.0);

    AuditReport report;
    report.name = "hardy";
    report.tolerance = 0.0;
    report.params = form_params(form);

    double pointwise_worst = std::numeric_limits<double>::infinity();
    std::size_t pointwise_failures = 0;
    for (std::size_t i = 0; i < form.size(); ++i) {
        const double bound = prefactor * std::pow(delta[i], -2.0 * s);
        const double margin = (e[i] / m[i] - bound) / bound;
        pointwise_worst = std::min(pointwise_worst, margin);
        if (margin < 0.0) ++pointwise_failures;
        report.record(margin);
    }

    std::vector<double> weight(form.size());
    for (std::size_t i = 0; i < form.size(); ++i) weight[i] = std::pow(delta[i], -2.0 * s);
    double functional_worst = std::numeric_limits<double>::infinity();
    std::size_t functional_failures = 0;
    const auto vectors = audit_vectors(form, samples, seed);
    for (const auto& u : vectors) {
        const double lhs = weighted_sum(form, u, weight);
        const double rhs = constant.value * form.energy(u);
        const double margin = relative_margin(rhs, lhs);
        functional_worst = std::min(functional_worst, margin);
        if (margin < 0.0) ++functional_failures;
        report.record(margin);
    }
    report.details = {{"constant", constant.value},
                      {"theta", constant.theta},
                      {"ell", constant.ell},
                      {"diameter", constant.diameter},
                      {"pointwise_worst", pointwise_worst},
                      {"pointwise_failures", pointwise_failures},
                      {"functional_worst", functional_worst},
                      {"functional_failures", functional_failures},
                      {"vectors", vectors.size()}};
    return report;
}

AuditReport picone_lane_emden_audit(const DiscreteGagliardoForm& form, double q, const LaneEmdenResult& w,
                                    std::size_t samples, std::uint64_t seed, bool include_basis) {
    form.check_grid(w.w);
    if (*std::min_element(w.w.begin(), w.w.end()) <= 0.0)
        throw PreconditionError("Lane-Emden density must be strictly positive");
    const std::size_t n = form.size();
    const auto& m = form.measures();

    const auto aw = form.apply(w.w);
    double weighted_residual = 0.0;
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = aw[i] - m[i] * std::pow(w.w[i], q - 1.0);
        weighted_residual = std::max(weighted_residual, std::abs(r) / w.w[i]);
        weight[i] = std::pow(w.w[i], q - 2.0);
    }

    AuditReport report;
    report.name = "picone";
    report.tolerance = 1e-12;
    report.params = form_params(form);
    report.params["q"] = q;

    auto vectors = audit_vectors(form, samples, seed);
    vectors.push_back(w.w);
    if (include_basis) {
        for (std::size_t k = 0; k < n; ++k) {
            GridFunction e(n, 0.0);
            e[k] = 1.0;
            vectors.push_back(std::move(e));
        }
    }
    std::size_t failures = 0;
    double identity_margin = 0.0;
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        const auto& u = vectors[k];
        const double sup = max_abs(u);
        const double slack = 10.0 * static_cast<double>(n) * sup * sup * weighted_residual;
        const double lhs = weighted_sum(form, u, weight);
        const double rhs = form.energy(u) + slack;
        const double margin = relative_margin(rhs, lhs);
        if (margin < -report.tolerance) ++failures;
        if (k == vectors.size() - (include_basis ? n : 0) - 1) identity_margin = relative_margin(form.energy(u), lhs);
        report.record(margin);
    }
    report.details = {{"weighted_residual", weighted_residual},
                      {"failures", failures},
                      {"identity_gap", identity_margin},
                      {"vectors", vectors.size()}};
    return report;
}

AuditReport weighted_holder_audit(const DiscreteGagliardoForm& form, double q, std::size_t samples,
                                  std::uint64_t seed) {
    if (!(q > 1.0 && q < 2.0)) throw InvalidParameter("weighted Hölder audit needs q in (1,2)");
    const double s = form.s();
    const std::size_t n = form.size();
    const auto& delta = form.boundary_distance();
    std::vector<double> mixed(n), hardy(n), ones(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        mixed[i] = std::pow(delta[i], s * (q - 2.0));
        hardy[i] = std::pow(delta[i], -2.0 * s);
    }
    const double constant = hardy_constant(form.domain(), s).value;

    AuditReport report;
    report.name = "holder";
    report.tolerance = 1e-12;
    report.params = form_params(form);
    report.params["q"] = q;

    auto vectors = audit_vectors(form, samples, seed);
    double chain_worst = std::numeric_limits<double>::infinity();
    for (const auto& u : vectors) {
        const double lhs = weighted_sum(form, u, mixed);
        const double l2 = weighted_sum(form, u, ones);
        const double rhs = std::pow(weighted_sum(form, u, hardy), (2.0 - q) / 2.0) * std::pow(l2, q / 2.0);
        report.record(relative_margin(rhs, lhs));
        const double chain_rhs = std::pow(constant * form.energy(u), (2.0 - q) / 2.0) * std::pow(l2, q / 2.0);
        chain_worst = std::min(chain_worst, relative_margin(chain_rhs, lhs));
    }
    report.details = {{"chain_worst", chain_worst}, {"hardy_constant", constant}, {"vectors", vectors.size()}};
    if (chain_worst < -report.tolerance) report.pass = false;
    return report;
}

HopfFit hopf_fit(const DiscreteGagliardoForm& form, const LaneEmdenResult& w) {
    form.check_grid(w.w);
    const auto& delta = form.boundary_distance();
    HopfFit fit{std::numeric_limits<double>::infinity(), 0, std::vector<double>(form.size())};
    for (std::size_t i = 0; i < form.size(); ++i) {
        fit.ratios[i] = w.w[i] / std::pow(delta[i], form.s());
        if (fit.ratios[i] < fit.c_est) {
            fit.c_est = fit.ratios[i];
            fit.argmin = i;
        }
    }
    return fit;
}

AuditReport converse_linf_bound_audit(const DiscreteGagliardoForm& form, double q, const LaneEmdenResult& w) {
    form.check_grid(w.w);
    const double lambda2 = form.size() <= 400 ? full_spectrum_q2(form, 1).front().lambda
                                              : solve_lambda1(form, 2.0, {1e-10, 20000, 0}).lambda;
    const double bound = std::pow(max_abs(w.w), q - 2.0);

    AuditReport report;
    report.name = "converse-linf";
    report.tolerance = 0.0;
    report.params = form_params(form);
    report.params["q"] = q;
    report.record((lambda2 - bound * (1.0 - 1e-8)) / bound);
    report.details = {{"lambda1_q2", lambda2}, {"sup_power", bound}, {"ratio", lambda2 / bound}};
    return report;
}

LinfSample make_linf_sample(const DiscreteGagliardoForm& form, const EigenSolveResult& result, std::string label) {
    return {std::move(label), result.lambda, max_abs(result.u), lq_norm(form, result.u, result.q)};
}

double linf_exponent(double s, double q) {
    const double critical = conjugate_exponent(1, s);
    if (std::isinf(critical)) return 1.0;
    return critical / (2.0 * (critical - q));
}

AuditReport linf_ratio_audit(const std::vector<LinfSample>& scaled, const std::vector<LinfSample>& refined, double q,
                             double s) {
    const bool finite_branch = s < 0.5;
    const double beta = linf_exponent(s, q);
    auto ratio = [&](const LinfSample& x) { return x.sup_norm / (std::pow(x.lambda, beta) * x.lq); };

    AuditReport report;
    report.name = "linf-ratio";
    report.tolerance = 1e-10;
    report.hard = finite_branch;
    report.params = {{"s", s}, {"q", q}, {"beta", beta}, {"mode", finite_branch ? "exponent" : "report-only"}};

    nlohmann::json rows = nlohmann::json::array();
    if (!scaled.empty()) {
        const double base = ratio(scaled.front());
        for (const auto& x : scaled) {
            const double rho = ratio(x);
            rows.push_back({{"label", x.label}, {"rho", rho}, {"group", "scaled"}});
            if (finite_branch) report.record(-std::abs(rho - base) / base);
        }
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& x : refined) {
        const double rho = ratio(x);
        lo = std::min(lo, rho);
        hi = std::max(hi, rho);
        rows.push_back({{"label", x.label}, {"rho", rho}, {"group", "refined"}});
    }
    report.details = {{"rows", rows}};
    if (!refined.empty()) {
        report.details["refine_spread"] = hi / lo;
        report.details["refine_within_2x"] = hi / lo <= 2.0;
        if (finite_branch && !(hi / lo <= 2.0)) report.pass = false;
    }
    if (!finite_branch) report.pass = true;
    return report;
}

SubsolutionEstimate subsolution_sup_audit(const DiscreteGagliardoForm& form, std::span<const double> w,
                                          double f_bound, double x0, double r, double delta) {
    form.check_grid(w);
    if (!(r > 0.0)) throw PreconditionError("radius must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("delta must lie in (0,1]");
    if (x0 - r < form.domain().lower() || x0 + r > form.domain().upper())
        throw PreconditionError("ball B_r(x0) leaves the hull of the domain");
    if (std::any_of(w.begin(), w.end(), [](double v) { return v < 0.0; }))
        throw PreconditionError("subsolution must be nonnegative");
    const double s = form.s();
    const auto& x = form.nodes();
    const auto& m = form.measures();

    double lhs = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = std::abs(x[i] - x0);
        if (d < 0.5 * r) lhs = std::max(lhs, w[i]);
        if (d < r) mass += m[i] * w[i] * w[i];
    }
    const double mean_sq = mass / (2.0 * r);
    SubsolutionEstimate est{};
    est.lhs = lhs;
    est.tail_term = delta * tail(form, w, x0, 0.5 * r);
    est.source_term = delta * std::pow(r, 2.0 * s) * f_bound;
    est.local_term = std::pow(std::pow(r, 1.0 - 2.0 * s) / delta, 1.0 / (4.0 * s)) * std::sqrt(mean_sq);
    est.rhs = est.tail_term + est.source_term + est.local_term;
    est.ratio = est.rhs > 0.0 ? est.lhs / est.rhs : 0.0;
    return est;
}

AuditReport subsolution_sweep(const DiscreteGagliardoForm& form, std::span<const double> w, double f_bound,
                              const std::vector<SubsolutionConfig>& configs) {
    AuditReport report;
    report.name = "subsolution";
    report.hard = false;
    report.params = form_params(form);
    report.params["f_bound"] = f_bound;
    nlohmann::json rows = nlohmann::json::array();
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& c : configs) {
        const auto est = subsolution_sup_audit(form, w, f_bound, c.x0, c.r, c.delta);
        rows.push_back({{"x0", c.x0}, {"r", c.r}, {"delta", c.delta}, {"lhs", est.lhs}, {"rhs", est.rhs},
                        {"ratio", est.ratio}});
        hi = std::max(hi, est.ratio);
        if (est.ratio > 0.0) lo = std::min(lo, est.ratio);
        ++report.samples;
    }
    report.worst_margin = 0.0;
    report.pass = std::isfinite(hi);
    report.details = {{"rows", rows}, {"c_est", hi}, {"spread", hi > 0.0 && std::isfinite(lo) ? hi / lo : 0.0}};
    return report;
}

AuditReport sign_lemma_audit(const DiscreteGagliardoForm& form, std::size_t samples, std::uint64_t seed) {
    AuditReport report;
    report.name = "sign-lemma";
    // strict: every mixed-sign margin must be positive
    report.tolerance = -std::numeric_limits<double>::min();
    report.params = form_params(form);

    const auto vectors = audit_vectors(form, samples, seed);
    double equality_deviation = 0.0;
    std::size_t mixed = 0;
    std::size_t constant_sign = 0;
    for (const auto& u : vectors) {
        GridFunction absolute(u.size());
        std::transform(u.begin(), u.end(), absolute.begin(), [](double v) { return std::abs(v); });
        const double b = form.energy(u);
        const double b_abs = form.energy(absolute);
        const bool pos = std::any_of(u.begin(), u.end(), [](double v) { return v > 0.0; });
        const bool neg = std::any_of(u.begin(), u.end(), [](double v) { return v < 0.0; });
        if (pos && neg) {
            ++mixed;
            report.record((b - b_abs) / b);
        } else {
            ++constant_sign;
            const double dev = b > 0.0 ? std::abs(b - b_abs) / b : std::abs(b - b_abs);
            equality_deviation = std::max(equality_deviation, dev);
            GridFunction negated(u.size());
            std::transform(u.begin(), u.end(), negated.begin(), [](double v) { return -v; });
            const double b_neg = form.energy(negated);
            equality_deviation = std::max(equality_deviation, b > 0.0 ? std::abs(b_neg - b_abs) / b : 0.0);
        }
    }
    report.details = {{"mixed_samples", mixed},
                      {"constant_sign_samples", constant_sign},
                      {"equality_deviation", equality_deviation}};
    if (equality_deviation > 1e-14) report.pass = false;
    return report;
}

AuditReport minimum_principle_audit(const DiscreteGagliardoForm& form) {
    AuditReport report;
    report.name = "minimum-principle";
    report.tolerance = 0.0;
    report.params = form_params(form);
    const std::size_t n = form.size();
    const auto& e = form.exterior();

    double min_coupling = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) min_coupling = std::min(min_coupling, form.interaction(i, j));
    if (n > 1) report.record(min_coupling > 0.0 ? 1.0 : -1.0);

    // strict positivity is required: a zero weight fails just like a negative one
    const double e_scale = max_abs(e);
    double min_row = std::numeric_limits<double>::infinity();
    for (double v : e) {
        const double ratio = e_scale > 0.0 ? v / e_scale : 0.0;
        min_row = std::min(min_row, ratio);
        report.record(v > 0.0 ? ratio : -1.0);
    }

    double min_response = -1.0;
    try {
        const StiffnessSolver solver(form);
        const auto v = solver.solve(form.measures());
        min_response = *std::min_element(v.begin(), v.end()) / max_abs(v);
    } catch (const Error&) {
    }
    report.record(min_response > 0.0 ? min_response : -1.0);
    report.details = {{"min_coupling", n > 1 ? min_coupling : 0.0},
                      {"min_row_sum_ratio", min_row},
                      {"min_response_ratio", min_response}};
    return report;
}

AuditReport normalization_identity_audit(const DiscreteGagliardoForm& form, double q, const LaneEmdenResult& w) {
    AuditReport report;
    report.name = "normalization-identity";
    report.tolerance = 1e-8;
    report.params = form_params(form);
    report.params["q"] = q;

    const double lambda1 = w.route == LaneEmdenRoute::EigenScaled ? w.lambda1 : solve_lambda1(form, q).lambda;
    const double norm = lq_norm(form, w.w, q);
    const double expected = std::pow(lambda1, 1.0 / (q - 2.0));
    const double norm_dev = std::abs(norm - expected) / expected;
    const double b = form.energy(w.w);
    const auto& m = form.measures();
    const double mass = pairwise_sum(w.w.size(), [&](std::size_t i) { return m[i] * std::pow(std::abs(w.w[i]), q); });
    const double energy_dev = std::abs(b - mass) / mass;
    report.record(-norm_dev);
    report.record(-energy_dev);
    report.details = {{"norm", norm}, {"expected_norm", expected}, {"norm_deviation", norm_dev},
                      {"energy", b}, {"mass", mass}, {"energy_deviation", energy_dev}};
    return report;
}

nlohmann::json to_json(const AuditReport& report) {
    nlohmann::json j = {{"name", report.name},     {"params", report.params},
                        {"samples", report.samples}, {"worst_margin", report.worst_margin},
                        {"tolerance", report.tolerance}, {"pass", report.pass},
                        {"hard", report.hard}};
    if (!report.details.empty()) j["details"] = report.details;
    return j;
}

}  // namespace fraceig
