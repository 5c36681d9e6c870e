#include "fraceig/lane_emden.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fraceig/errors.hpp"
#include "fraceig/numerics.hpp"

namespace fraceig {

namespace {

void check_sublinear(double q) {
    if (!(q > 1.0 && q < 2.0)) throw InvalidParameter("Lane-Emden densities need q in (1,2)");
}

double power_sum(const DiscreteGagliardoForm& form, std::span<const double> u, double q) {
    const auto& m = form.measures();
    return pairwise_sum(u.size(), [&](std::size_t i) { return m[i] * std::pow(std::abs(u[i]), q); });
}

std::vector<double> free_energy_gradient(const DiscreteGagliardoForm& form, std::span<const double> u, double q) {
    auto g = form.apply(u);
    const auto& m = form.measures();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (u[i] != 0.0) g[i] -= m[i] * std::copysign(std::pow(std::abs(u[i]), q - 1.0), u[i]);
    return g;
}

}  // namespace

std::string to_string(LaneEmdenRoute route) {
    return route == LaneEmdenRoute::EigenScaled ? "eigen-scaled" : "free-energy";
}

double lane_emden_residual(const DiscreteGagliardoForm& form, std::span<const double> w, double q) {
    const auto g = free_energy_gradient(form, w, q);
    const auto& m = form.measures();
    const double num = pairwise_sum(w.size(), [&](std::size_t i) { return g[i] * g[i] / m[i]; });
    const double den = pairwise_sum(w.size(), [&](std::size_t i) { return m[i] * std::pow(std::abs(w[i]), 2.0 * (q - 1.0)); });
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

LaneEmdenResult lane_emden_density(const DiscreteGagliardoForm& form, double q, double tol, std::uint64_t seed) {
    check_sublinear(q);
    const auto eig = solve_lambda1(form, q, {tol, 20000, seed});
    const double scale = std::pow(eig.lambda, 1.0 / (q - 2.0));
    LaneEmdenResult out;
    out.w = eig.u;
    for (double& v : out.w) v *= scale;
    out.q = q;
    out.s = form.s();
    out.lambda1 = eig.lambda;
    out.residual = lane_emden_residual(form, out.w, q);
    out.iterations = eig.iterations;
    out.route = LaneEmdenRoute::EigenScaled;
    return out;
}

double free_energy(const DiscreteGagliardoForm& form, double q, std::span<const double> u) {
    return 0.5 * form.energy(u) - power_sum(form, u, q) / q;
}

LaneEmdenResult minimize_free_energy(const DiscreteGagliardoForm& form, double q, double tol, std::size_t max_iter,
                                     std::uint64_t seed) {
    check_sublinear(q);
    const std::size_t n = form.size();
    const auto matrix = form.stiffness_matrix();
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = matrix(i, i);

    // best multiple of the start vector: c^{2-q} = Σ m u^q / B(u)
    GridFunction u = positive_start(n, seed);
    const double c = std::pow(power_sum(form, u, q) / form.energy(u), 1.0 / (2.0 - q));
    for (double& v : u) v *= c;

    double value = free_energy(form, q, u);
    auto g = free_energy_gradient(form, u, q);
    double step = 1.0;
    GridFunction trial(n);
    constexpr double armijo = 1e-4;

    auto project = [&](double alpha) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(0.0, u[i] - alpha * g[i] / diag[i]);
    };

    for (std::size_t it = 1; it <= max_iter; ++it) {
        // stationarity: projected unit step
        project(1.0);
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(trial[i] - u[i]));
        if (moved <= tol * max_abs(u)) {
            LaneEmdenResult out;
            out.w = std::move(u);
            out.q = q;
            out.s = form.s();
            out.lambda1 = rayleigh(form, out.w, q);
            out.residual = lane_emden_residual(form, out.w, q);
            out.iterations = it - 1;
            out.route = LaneEmdenRoute::FreeEnergy;
            return out;
        }

        double alpha = std::clamp(step, 1e-12, 1e12);
        double next = value;
        bool accepted = false;
        for (int halving = 0; halving < 80; ++halving, alpha *= 0.5) {
            project(alpha);
            next = free_energy(form, q, trial);
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (trial[i] - u[i]);
            if (next <= value + armijo * decrease ||
                std::abs(next - value) <= 16.0 * std::numeric_limits<double>::epsilon() * std::abs(value)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) throw ConvergenceFailure("free-energy line search stalled", std::move(u), value, moved);

        auto g_next = free_energy_gradient(form, trial, q);
        // Barzilai-Borwein step in the diagonal metric
        double sy = 0.0;
        double sds = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ds = trial[i] - u[i];
            sy += ds * (g_next[i] - g[i]);
            sds += ds * ds * diag[i];
        }
        step = sy > 0.0 ? sds / sy : 2.0 * alpha;
        u.swap(trial);
        g.swap(g_next);
        value = next;
    }
    throw ConvergenceFailure("free-energy descent did not converge", std::move(u), value, 0.0);
}

ExhaustionSequence exhaustion_sequence(const OpenSet1D& omega, double s, double q, const std::vector<double>& radii,
                                       const UniformGridSpec& grid, double center, double tol) {
    check_sublinear(q);
    if (!std::is_sorted(radii.begin(), radii.end())) throw InvalidParameter("radii must be ascending");
    const auto ambient = assemble_form(omega, grid, s);
    ExhaustionSequence out;
    out.center = center;
    out.full_w = lane_emden_density(ambient, q, tol).w;
    for (double r : radii) {
        OpenSet1D subset = omega;
        try {
            subset = intersect_ball(omega, r, center);
        } catch (const EmptyDomain&) {
            out.warnings.push_back("radius " + std::to_string(r) + " misses the domain; skipped");
            continue;
        }
        std::optional<SubForm> sub;
        try {
            sub.emplace(restrict_form(ambient, subset));
        } catch (const EmptyGrid&) {
            out.warnings.push_back("radius " + std::to_string(r) + " holds no ambient cell; skipped");
            continue;
        }
        auto density = lane_emden_density(sub->form, q, tol);
        auto ambient_w = extend_by_zero(*sub, density.w, ambient.size());
        out.steps.push_back({r, std::move(subset), std::move(density), std::move(ambient_w)});
    }
    return out;
}

AuditReport comparison_check(const OpenSet1D& inner, const OpenSet1D& outer, double s, double q,
                             const UniformGridSpec& grid, double tol) {
    check_sublinear(q);
    if (!inner.is_subset_of(outer)) throw PreconditionError("inner set is not contained in the outer set");
    const auto ambient = assemble_form(outer, grid, s);
    const auto sub = restrict_form(ambient, inner);
    const auto w_outer = lane_emden_density(ambient, q, tol);
    const auto w_inner = lane_emden_density(sub.form, q, tol);

    AuditReport report;
    report.name = "comparison";
    report.params = {{"s", s}, {"q", q}, {"inner", inner.to_string()}, {"outer", outer.to_string()}};
    const double slack = 1e-8 * max_abs(w_outer.w);
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sub.ambient_index.size(); ++k) {
        const double gap = w_outer.w[sub.ambient_index[k]] - w_inner.w[k];
        report.record(gap + slack);
        min_gap = std::min(min_gap, gap);
    }
    report.details = {{"min_increase", min_gap},
                      {"slack", slack},
                      {"inner_nodes", sub.ambient_index.size()},
                      {"residual_inner", w_inner.residual},
                      {"residual_outer", w_outer.residual}};
    return report;
}

AuditReport exhaustion_check(const ExhaustionSequence& seq, const OpenSet1D& omega, double s, double q) {
    AuditReport report;
    report.name = "exhaustion";
    report.params = {{"s", s}, {"q", q}, {"domain", omega.to_string()}, {"center", seq.center}};
    const double scale = max_abs(seq.full_w);
    const double slack = 1e-8;
    double stabilization = 0.0;
    nlohmann::json radii = nlohmann::json::array();
    for (std::size_t k = 0; k < seq.steps.size(); ++k) {
        const auto& step = seq.steps[k];
        radii.push_back(step.radius);
        for (std::size_t i = 0; i < step.ambient_w.size(); ++i) {
            report.record((seq.full_w[i] - step.ambient_w[i]) / scale + slack);
            if (k + 1 < seq.steps.size())
                report.record((seq.steps[k + 1].ambient_w[i] - step.ambient_w[i]) / scale + slack);
        }
        if (step.subset == omega) {
            for (std::size_t i = 0; i < step.ambient_w.size(); ++i)
                stabilization = std::max(stabilization, std::abs(step.ambient_w[i] - seq.full_w[i]) / scale);
        }
    }
    if (stabilization > slack) report.pass = false;
    report.details = {{"radii", radii}, {"warnings", seq.warnings}, {"stabilization_deviation", stabilization}};
    return report;
}

}  // namespace fraceig
