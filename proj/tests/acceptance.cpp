// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fraceig/audits.hpp"
#include "fraceig/experiments.hpp"
#include "fraceig/io.hpp"
#include "fraceig/lane_emden.hpp"
#include "fraceig/rng.hpp"
#include "fraceig/spectral.hpp"

using namespace fraceig;

namespace {

struct Outcome {
    bool pass = true;
    std::string note;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            pass = false;
            if (!note.empty()) note += "; ";
            note += what;
        }
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

DiscreteGagliardoForm unit(double h, double s) {
    return assemble_form(OpenSet1D::parse("0,1"), UniformGridSpec::from_width(h), s);
}

// energy by the defining double sum, independent of the library's row sums
double brute_energy(const DiscreteGagliardoForm& form, const GridFunction& u) {
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < u.size(); ++j)
            if (i != j) {
                const double d = std::abs(form.nodes()[i] - form.nodes()[j]);
                const double k = form.measures()[i] * form.measures()[j] / std::pow(d, 1.0 + 2.0 * form.s());
                total += (u[i] - u[j]) * (u[i] - u[j]) * k;
            }
        total += 2.0 * u[i] * u[i] * form.exterior()[i];
    }
    return total;
}

double aligned_l2(const DiscreteGagliardoForm& form, const GridFunction& a, const GridFunction& b, double q) {
    const double na = lq_norm(form, a, q);
    const double nb = lq_norm(form, b, q);
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        plus += form.measures()[i] * std::pow(a[i] / na - b[i] / nb, 2);
        minus += form.measures()[i] * std::pow(a[i] / na + b[i] / nb, 2);
    }
    return std::sqrt(std::min(plus, minus));
}

Outcome single_node_oracle() {
    Outcome o;
    // one cell of (0,1), s = 1/2: E = 2 · (1/2)^{-1} / 1 = 4, λ = 2E = 8 for every q
    const auto form = unit(1.0, 0.5);
    for (double q : {1.5, 2.0}) {
        const double lam = solve_lambda1(form, q, {1e-13, 100, 1}).lambda;
        o.require(std::abs(lam - 8.0) <= 1e-12 * 8.0, "lambda1(q=" + format_real(q) + ") = " + format_real(lam));
    }
    const auto w = lane_emden_density(form, 1.5);
    o.require(std::abs(w.w[0] - 1.0 / 64.0) <= 1e-12 / 64.0, "w = " + format_real(w.w[0]));
    const double j = free_energy(form, 1.5, w.w);
    o.require(std::abs(j + 1.0 / 3072.0) <= 1e-12 / 3072.0, "J(w) = " + format_real(j));
    return o;
}

Outcome exact_scaling() {
    Outcome o;
    const auto omega = OpenSet1D::parse("0,1");
    const auto grid = UniformGridSpec::from_counts({200});
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75})
        for (double q : {1.5, 2.0}) {
            const double base = solve_lambda1(assemble_form(omega, grid, s), q, {1e-12, 5000, 1}).lambda;
            for (double t : {0.5, 2.0}) {
                const double lam = solve_lambda1(assemble_form(scale_set(omega, t), grid, s), q, {1e-12, 5000, 1}).lambda;
                worst = std::max(worst, rel(lam * std::pow(t, 2.0 * s + 2.0 / q - 1.0), base));
            }
        }
    o.require(worst <= 1e-10, "worst relative deviation " + format_real(worst));
    o.note = o.pass ? "worst relative deviation " + format_real(worst) : o.note;
    return o;
}

Outcome simplicity() {
    Outcome o;
    const auto form = unit(0.005, 0.5);
    std::vector<EigenSolveResult> runs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) runs.push_back(solve_lambda1(form, 1.5, {1e-10, 5000, seed}));
    double worst = 0.0;
    for (std::size_t a = 0; a < runs.size(); ++a) {
        o.require(*std::min_element(runs[a].u.begin(), runs[a].u.end()) > 0.0, "nonpositive node");
        for (std::size_t b = a + 1; b < runs.size(); ++b) worst = std::max(worst, aligned_l2(form, runs[a].u, runs[b].u, 1.5));
    }
    o.require(worst <= 1e-6, "pairwise distance " + format_real(worst));
    if (o.pass) o.note = "max pairwise distance " + format_real(worst);
    return o;
}

Outcome sign_lemma() {
    Outcome o;
    const auto form = unit(0.01, 0.5);
    const auto report = sign_lemma_audit(form, 100, 1);
    o.require(report.pass, "library audit failed");
    Lcg64 rng(2024);
    double worst_mixed = INFINITY;
    for (int k = 0; k < 100; ++k) {
        GridFunction u(form.size());
        for (double& v : u) v = rng.uniform(-1.0, 1.0);
        GridFunction a(u);
        for (double& v : a) v = std::abs(v);
        worst_mixed = std::min(worst_mixed, brute_energy(form, u) - brute_energy(form, a));
    }
    o.require(worst_mixed > 0.0, "mixed-sign margin " + format_real(worst_mixed));
    double worst_equal = 0.0;
    for (int k = 0; k < 20; ++k) {
        GridFunction u(form.size());
        for (double& v : u) v = -rng.uniform(0.0, 1.0);
        GridFunction a(u);
        for (double& v : a) v = std::abs(v);
        worst_equal = std::max(worst_equal, rel(form.energy(a), form.energy(u)));
    }
    o.require(worst_equal <= 1e-14, "constant-sign deviation " + format_real(worst_equal));
    if (o.pass) o.note = "min strict margin " + format_real(worst_mixed);
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    double worst = 0.0;
    for (std::size_t n : {50u, 150u, 300u}) {
        const auto form = assemble_form(OpenSet1D::parse("0,1"), UniformGridSpec::from_counts({n}), 0.5);
        const double fixed = solve_lambda1(form, 2.0, {1e-10, 5000, 1}).lambda;
        const double dense = full_spectrum_q2(form, 1)[0].lambda;
        worst = std::max(worst, rel(fixed, dense));
    }
    o.require(worst <= 1e-8, "relative difference " + format_real(worst));
    if (o.pass) o.note = "max relative difference " + format_real(worst);
    return o;
}

Outcome lane_emden_identities() {
    Outcome o;
    const auto form = unit(0.005, 0.5);
    const double q = 1.5;
    const auto w = lane_emden_density(form, q);
    const double lam = solve_lambda1(form, q, {1e-12, 5000, 1}).lambda;
    o.require(rel(lq_norm(form, w.w, q), std::pow(lam, 1.0 / (q - 2.0))) <= 1e-8, "norm identity");
    double mass = 0.0;
    for (std::size_t i = 0; i < form.size(); ++i) mass += form.measures()[i] * std::pow(w.w[i], q);
    o.require(rel(brute_energy(form, w.w), mass) <= 1e-8, "energy identity");
    const auto e = minimize_free_energy(form, q);
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < form.size(); ++i) {
        diff += form.measures()[i] * std::pow(w.w[i] - e.w[i], 2);
        norm += form.measures()[i] * w.w[i] * w.w[i];
    }
    o.require(std::sqrt(diff / norm) <= 1e-6, "routes differ by " + format_real(std::sqrt(diff / norm)));
    if (o.pass) o.note = "route difference " + format_real(std::sqrt(diff / norm));
    return o;
}

Outcome comparison_principle() {
    Outcome o;
    const auto report = comparison_check(OpenSet1D::parse("0,0.6"), OpenSet1D::parse("0,1"), 0.5, 1.5,
                                         UniformGridSpec::from_width(0.005));
    o.require(report.pass, "comparison failed");
    const auto omega = OpenSet1D::parse("-0.5,0.5");
    const auto seq = exhaustion_sequence(omega, 0.5, 1.5, {0.25, 0.5, 1.0}, UniformGridSpec::from_width(0.005));
    const double slack = 1e-8 * *std::max_element(seq.full_w.begin(), seq.full_w.end());
    o.require(seq.steps.size() == 3, "missing exhaustion steps");
    for (std::size_t k = 0; k + 1 < seq.steps.size(); ++k)
        for (std::size_t i = 0; i < seq.full_w.size(); ++i)
            if (seq.steps[k].ambient_w[i] > seq.steps[k + 1].ambient_w[i] + slack) o.require(false, "not monotone");
    double stab = 0.0;
    for (std::size_t i = 0; i < seq.full_w.size(); ++i)
        stab = std::max(stab, std::abs(seq.steps.back().ambient_w[i] - seq.full_w[i]));
    o.require(stab <= slack, "no stabilization");
    if (o.pass) o.note = "min increase " + format_real(report.details["min_increase"].get<double>());
    return o;
}

Outcome picone() {
    Outcome o;
    const auto form = unit(0.005, 0.5);
    const auto w = lane_emden_density(form, 1.5);
    const auto report = picone_lane_emden_audit(form, 1.5, w, 200, 1, true);
    o.require(report.pass && report.details["failures"].get<std::size_t>() == 0, "violations found");
    o.require(report.samples >= 200 + form.size(), "too few vectors");
    if (o.pass) o.note = std::to_string(report.samples) + " vectors, worst margin " + format_real(report.worst_margin);
    return o;
}

Outcome hardy() {
    Outcome o;
    for (const char* domain : {"0,1", "0,1;1.2,2"}) {
        const auto omega = OpenSet1D::parse(domain);
        // ℓ = smallest interior gap (or D), θ = 1
        const double diam = omega.diameter();
        const double ell = omega.intervals().size() > 1 ? 0.2 : diam;
        for (double s : {0.25, 0.5, 0.75}) {
            const double c = std::pow(2.0, 2.0 * s) * std::max(diam / ell, 1.0);
            o.require(rel(hardy_constant(omega, s).value, c) <= 1e-12, "constant mismatch");
            const auto form = assemble_form(omega, UniformGridSpec::from_width(0.005), s);
            for (std::size_t i = 0; i < form.size(); ++i) {
                const double bound = std::pow(2.0, -1.0 - 2.0 * s) * std::min(ell / diam, 1.0) *
                                     std::pow(dist_to_boundary(omega, form.nodes()[i]), -2.0 * s);
                if (!(form.exterior()[i] / form.measures()[i] >= bound)) o.require(false, "pointwise violation");
            }
            const auto report = hardy_audit(form, 100, 1);
            o.require(report.pass && report.details["functional_failures"].get<std::size_t>() == 0,
                      std::string("audit failed on ") + domain);
        }
    }
    return o;
}

Outcome converse_linf() {
    Outcome o;
    for (const char* domain : {"0,1", "0,1;1.2,2", "0,0.5;0.7,1.2"})
        for (double s : {0.25, 0.5, 0.75}) {
            const auto form = assemble_form(OpenSet1D::parse(domain), UniformGridSpec::from_width(0.005), s);
            const auto w = lane_emden_density(form, 1.5);
            const double lam2 = full_spectrum_q2(form, 1)[0].lambda;
            const double sup = *std::max_element(w.w.begin(), w.w.end());
            o.require(lam2 >= std::pow(sup, -0.5) * (1.0 - 1e-8), std::string("violated on ") + domain);
            o.require(converse_linf_bound_audit(form, 1.5, w).pass, "audit failed");
        }
    const auto single = unit(1.0, 0.5);
    const auto w = lane_emden_density(single, 1.5);
    const double ratio = 8.0 / std::pow(w.w[0], -0.5);
    o.require(std::abs(ratio - 1.0) <= 1e-10, "single node ratio " + format_real(ratio));
    return o;
}

Outcome q_continuity() {
    Outcome o;
    ExperimentConfig c;
    c.s = 0.25;
    c.h = 0.005;
    c.q_list = {3.0, 2.5, 2.25, 2.125, 2.0625};
    const auto table = run_q_continuity(c);
    for (std::size_t k = 1; k < table.rows.size(); ++k)
        o.require(table.rows[k].error < table.rows[k - 1].error, "error not strictly decreasing");
    o.require(table.rows.back().error <= 0.05 * table.lambda_q2, "final error too large");
    if (o.pass) o.note = "final error " + format_real(table.rows.back().error / table.lambda_q2) + " relative";
    return o;
}

Outcome isolation() {
    Outcome o;
    ExperimentConfig c;
    c.h = 0.01;
    c.restarts = 50;
    const auto report = run_isolation(c);
    o.require(report.witness_found, "no witness");
    if (report.witness_found) {
        o.require(*report.coarse.gap > 0.0 && *report.fine.gap > 0.0, "gap not positive");
        o.require(*report.gap_relative_change <= 0.3, "gap unstable");
        o.require(report.coarse.delta_l1.value_or(0.0) > 0.0, "delta_L1 not positive");
    }
    for (const auto* level : {&report.coarse, &report.fine})
        for (const auto& p : level->search.points)
            if (p.lambda > level->lambda1 * (1.0 + 1e-5) && !p.changes_sign) o.require(false, "constant-sign point above lambda1");
    o.require(report.pass, "report failed");
    if (o.pass)
        o.note = "g = " + format_real(*report.coarse.gap) + ", change " + format_real(*report.gap_relative_change) +
                 ", delta_L1 = " + format_real(*report.coarse.delta_l1);
    return o;
}

Outcome faber_krahn() {
    Outcome o;
    for (double s : {0.25, 0.5}) {
        const auto report = faber_krahn_check(OpenSet1D::parse("0,0.5;0.7,1.2"), s, UniformGridSpec::from_width(0.005));
        const double lo = report.details["lambda_domain"].get<double>();
        const double li = report.details["lambda_interval"].get<double>();
        o.require(lo >= li * (1.0 - 1e-8), "violated at s = " + format_real(s));
    }
    return o;
}

Outcome linf_exponent_check() {
    Outcome o;
    const double s = 0.25;
    const double q = 1.5;
    const double crit = 2.0 / (1.0 - 2.0 * s);
    const double beta = crit / (2.0 * (crit - q));
    o.require(std::abs(beta - 0.8) <= 1e-15 && std::abs(linf_exponent(s, q) - beta) <= 1e-15, "exponent");
    auto rho = [&](const DiscreteGagliardoForm& form) {
        const auto r = solve_lambda1(form, q, {1e-12, 5000, 1});
        const double sup = *std::max_element(r.u.begin(), r.u.end());
        return sup / (std::pow(r.lambda, beta) * lq_norm(form, r.u, q));
    };
    const auto omega = OpenSet1D::parse("0,1");
    const auto counts = UniformGridSpec::from_width(0.005).counts_for(omega);
    const double base = rho(assemble_form(omega, UniformGridSpec::from_counts(counts), s));
    for (double t : {2.0, 4.0}) {
        const double r = rho(assemble_form(scale_set(omega, t), UniformGridSpec::from_counts(counts), s));
        o.require(rel(r, base) <= 1e-10, "scale t = " + format_real(t));
    }
    double lo = INFINITY;
    double hi = 0.0;
    for (double h : {0.02, 0.01, 0.005}) {
        const double r = rho(unit(h, s));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    o.require(hi / lo <= 2.0, "refinement spread " + format_real(hi / lo));
    if (o.pass) o.note = "refinement spread " + format_real(hi / lo);
    return o;
}

Outcome self_convergence() {
    Outcome o;
    for (double s : {0.25, 0.5, 0.75})
        for (double q : {1.5, 2.0}) {
            std::vector<double> lam;
            for (double h : {0.04, 0.02, 0.01, 0.005}) lam.push_back(solve_lambda1(unit(h, s), q, {1e-11, 5000, 1}).lambda);
            std::vector<double> diff;
            for (std::size_t k = 1; k < lam.size(); ++k) diff.push_back(std::abs(lam[k] - lam[k - 1]));
            for (std::size_t k = 1; k < diff.size(); ++k)
                if (!(diff[k] < diff[k - 1]))
                    o.require(false, "s = " + format_real(s) + ", q = " + format_real(q) + ": differences " +
                                         format_real(diff[0]) + ", " + format_real(diff[1]) + ", " +
                                         format_real(diff[2]));
        }
    return o;
}

Outcome reproducibility() {
    Outcome o;
    int codes[2];
    for (int k = 0; k < 2; ++k) {
        std::ostringstream out;
        std::ostringstream err;
        const std::string tag = std::to_string(k);
        codes[k] = run_cli({"experiment", "suite", "--out", "acceptance_suite_" + tag + ".json", "--csv",
                            "acceptance_suite_" + tag + ".csv"},
                           out, err);
    }
    o.require(codes[0] == 0 && codes[1] == 0, "exit codes " + std::to_string(codes[0]) + ", " + std::to_string(codes[1]));
    o.require(read_text("acceptance_suite_0.json") == read_text("acceptance_suite_1.json"), "JSON differs");
    o.require(read_text("acceptance_suite_0.csv") == read_text("acceptance_suite_1.csv"), "CSV differs");
    for (const char* f : {"acceptance_suite_0.json", "acceptance_suite_1.json", "acceptance_suite_0.csv",
                          "acceptance_suite_1.csv"})
        std::remove(f);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"single-node closed forms", single_node_oracle},
        {"exact eigenvalue scaling", exact_scaling},
        {"simplicity and positivity of the first eigenfunction", simplicity},
        {"sign lemma", sign_lemma},
        {"q = 2 dense oracle equivalence", oracle_equivalence},
        {"Lane-Emden identities and route agreement", lane_emden_identities},
        {"comparison principle and exhaustion", comparison_principle},
        {"Picone inequality with Lane-Emden weight", picone},
        {"Hardy inequality, pointwise and functional", hardy},
        {"converse sup bound", converse_linf},
        {"right continuity at q = 2", q_continuity},
        {"isolation of the first eigenvalue", isolation},
        {"Faber-Krahn direction", faber_krahn},
        {"sup-bound exponent", linf_exponent_check},
        {"self-convergence under refinement", self_convergence},
        {"reproducible audit suite", reproducibility},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failures;
        std::printf("%s criterion %2zu: %s (%.2fs)%s%s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    secs, o.note.empty() ? "" : " - ", o.note.c_str());
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
