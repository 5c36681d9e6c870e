#include "fraceig/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fraceig/errors.hpp"
#include "fraceig/numerics.hpp"
#include "fraceig/rng.hpp"

namespace fraceig {

namespace {

double phi_q(double t, double q) {
    if (t == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(t), q - 1.0), t);
}

// M φ_q(u) scaled by ‖u‖_q^{2-q}.
std::vector<double> constraint_gradient(const DiscreteGagliardoForm& form, std::span<const double> u, double q) {
    const double scale = std::pow(lq_norm(form, u, q), 2.0 - q);
    const auto& m = form.measures();
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = scale * m[i] * phi_q(u[i], q);
    return out;
}

double dual_norm(const DiscreteGagliardoForm& form, std::span<const double> r) {
    const auto& m = form.measures();
    return std::sqrt(pairwise_sum(r.size(), [&](std::size_t i) { return r[i] * r[i] / m[i]; }));
}

void normalize(const DiscreteGagliardoForm& form, std::span<double> u, double q) {
    const double norm = lq_norm(form, u, q);
    if (!(norm > 0.0)) throw InvalidParameter("cannot normalize the zero vector");
    for (double& v : u) v /= norm;
}

void check_tol(const SolveOptions& options) {
    if (!(options.tol > 0.0)) throw InvalidParameter("tolerance must be positive");
}

}  // namespace

void orient(std::span<double> u) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < u.size(); ++i)
        if (std::abs(u[i]) > std::abs(u[best])) best = i;
    if (!u.empty() && u[best] < 0.0)
        for (double& v : u) v = -v;
}

double rayleigh(const DiscreteGagliardoForm& form, std::span<const double> u, double q) {
    if (!(q > 1.0)) throw InvalidParameter("constraint exponent must exceed 1");
    const double norm = lq_norm(form, u, q);
    if (!(norm > 0.0)) throw InvalidParameter("Rayleigh quotient of the zero vector");
    return form.energy(u) / (norm * norm);
}

double eigen_residual(const DiscreteGagliardoForm& form, std::span<const double> u, double q, double lambda) {
    auto r = form.apply(u);
    const auto c = constraint_gradient(form, u, q);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * c[i];
    return dual_norm(form, r);
}

double conjugate_exponent(int n_dim, double s) {
    if (n_dim < 1) throw InvalidParameter("dimension must be positive");
    if (!(s > 0.0 && s < 1.0)) throw InvalidParameter("fractional order s must lie in (0,1)");
    const double n = static_cast<double>(n_dim);
    if (2.0 * s < n) return 2.0 * n / (n - 2.0 * s);
    return std::numeric_limits<double>::infinity();
}

GridFunction positive_start(std::size_t n, std::uint64_t seed) {
    GridFunction u(n, 1.0);
    if (seed == 0) return u;
    Lcg64 rng(seed);
    for (double& v : u) v = rng.uniform(0.5, 1.5);
    return u;
}

EigenSolveResult solve_lambda1(const DiscreteGagliardoForm& form, double q, const SolveOptions& options,
                               const StiffnessSolver* solver) {
    if (!(q > 1.0 && q <= 2.0))
        throw InvalidParameter("inverse iteration needs q in (1,2]; use solve_lambda1_general");
    check_tol(options);
    std::optional<StiffnessSolver> local;
    if (!solver) solver = &local.emplace(form);

    const auto& m = form.measures();
    GridFunction u = positive_start(form.size(), options.seed);
    normalize(form, u, q);
    double lambda = rayleigh(form, u, q);
    double residual = eigen_residual(form, u, q, lambda);

    std::vector<double> rhs(u.size());
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = m[i] * phi_q(u[i], q);
        u = solver->solve(rhs);
        normalize(form, u, q);
        const double next = rayleigh(form, u, q);
        const double change = std::abs(next - lambda) / next;
        lambda = next;
        residual = eigen_residual(form, u, q, lambda);
        if (change <= options.tol && residual <= options.tol * lambda) {
            orient(u);
            if (*std::min_element(u.begin(), u.end()) <= 0.0)
                throw Error("first eigenfunction is not strictly positive");
            return {lambda, std::move(u), it, residual, q, form.s(), options.seed};
        }
    }
    throw ConvergenceFailure("inverse iteration did not converge", std::move(u), lambda, residual);
}

EigenSolveResult solve_lambda1_general(const DiscreteGagliardoForm& form, double q, const SolveOptions& options,
                                       std::optional<GridFunction> init, const StiffnessSolver* solver,
                                       const SubspaceProjector& projector) {
    const double critical = conjugate_exponent(OpenSet1D::dimension, form.s());
    if (!(q > 1.0 && q < critical)) throw InvalidParameter("q must lie in (1, 2*_s)");
    check_tol(options);
    std::optional<StiffnessSolver> local;
    if (!solver) solver = &local.emplace(form);

    GridFunction u = init ? std::move(*init) : positive_start(form.size(), options.seed);
    form.check_grid(u);
    if (projector) projector(u);
    normalize(form, u, q);

    auto gradient = [&](std::span<const double> v, double lam) {
        auto g = form.apply(v);
        const auto c = constraint_gradient(form, v, q);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= lam * c[i];
        return g;
    };

    double lambda = rayleigh(form, u, q);
    auto g = gradient(u, lambda);
    double residual = dual_norm(form, g);
    if (residual <= options.tol * lambda) {
        orient(u);
        return {lambda, std::move(u), 0, residual, q, form.s(), options.seed};
    }

    constexpr double armijo = 1e-4;
    constexpr double round_off = 16.0 * std::numeric_limits<double>::epsilon();
    GridFunction trial(u.size());
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        const auto d = solver->solve(g);
        const double slope = 2.0 * dot(g, d);
        double alpha = 1.0;
        double next = lambda;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] - alpha * d[i];
            if (projector) projector(trial);
            if (!(lq_norm(form, trial, q) > 0.0)) continue;
            normalize(form, trial, q);
            next = rayleigh(form, trial, q);
            if (next <= lambda - armijo * alpha * slope || std::abs(next - lambda) <= round_off * lambda) {
                accepted = true;
                break;
            }
        }
        if (!accepted) throw ConvergenceFailure("line search stalled", std::move(u), lambda, residual);
        u.swap(trial);
        const double change = std::abs(next - lambda) / next;
        lambda = next;
        g = gradient(u, lambda);
        residual = dual_norm(form, g);
        if (change <= options.tol && residual <= options.tol * lambda) {
            orient(u);
            return {lambda, std::move(u), it, residual, q, form.s(), options.seed};
        }
    }
    throw ConvergenceFailure("manifold descent did not converge", std::move(u), lambda, residual);
}

std::vector<SpectrumEntry> full_spectrum_q2(const DiscreteGagliardoForm& form, std::size_t k) {
    const std::size_t n = form.size();
    if (k > n) throw InvalidParameter("requested more eigenpairs than nodes");
    const auto& m = form.measures();
    DenseMatrix scaled = form.stiffness_matrix();
    std::vector<double> root(n);
    for (std::size_t i = 0; i < n; ++i) root[i] = std::sqrt(m[i]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scaled(i, j) /= root[i] * root[j];
    auto eig = jacobi_eigen(std::move(scaled));
    std::vector<SpectrumEntry> out;
    out.reserve(k);
    for (std::size_t idx = 0; idx < k; ++idx) {
        GridFunction u = std::move(eig.vectors[idx]);
        for (std::size_t i = 0; i < n; ++i) u[i] /= root[i];
        orient(u);
        out.push_back({eig.values[idx], std::move(u)});
    }
    return out;
}

std::size_t count_sign_changes(std::span<const double> u) {
    const double floor = 1e-8 * max_abs(u);
    std::size_t changes = 0;
    int last = 0;
    for (double v : u) {
        if (std::abs(v) <= floor) continue;
        const int sign = v > 0.0 ? 1 : -1;
        if (last != 0 && sign != last) ++changes;
        last = sign;
    }
    return changes;
}

std::vector<std::size_t> reflection_permutation(const DiscreteGagliardoForm& form) {
    const auto& omega = form.domain();
    const double pivot = omega.lower() + omega.upper();
    const double slack = 1e-12 * omega.diameter();
    const auto& ivs = omega.intervals();
    const std::size_t c = ivs.size();
    for (std::size_t j = 0; j < c; ++j) {
        if (std::abs(pivot - ivs[j].hi - ivs[c - 1 - j].lo) > slack) return {};
        if (std::abs(pivot - ivs[j].lo - ivs[c - 1 - j].hi) > slack) return {};
    }
    const auto& x = form.nodes();
    const auto& m = form.measures();
    const auto& e = form.exterior();
    const std::size_t n = x.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = n - 1 - i;
        if (std::abs(x[i] + x[j] - pivot) > slack) return {};
        if (std::abs(m[i] - m[j]) > 1e-12 * m[i]) return {};
        if (std::abs(e[i] - e[j]) > 1e-10 * e[i]) return {};
        perm[i] = j;
    }
    if (!std::is_sorted(x.begin(), x.end())) return {};
    return perm;
}

CriticalPointSet critical_point_search(const DiscreteGagliardoForm& form, double q, const SearchOptions& options) {
    if (options.restarts < 1) throw InvalidParameter("at least one restart is required");
    const StiffnessSolver solver(form);
    const std::size_t n = form.size();
    const auto& m = form.measures();
    const auto& x = form.nodes();

    const auto first =
        solve_lambda1_general(form, q, {options.tol, options.max_iter, 0}, std::nullopt, &solver);
    const double first_mass = weighted_dot(m, first.u, first.u);

    const auto perm = reflection_permutation(form);
    SubspaceProjector odd;
    if (perm.size() > 1) {
        odd = [perm](std::span<double> v) {
            const std::vector<double> copy(v.begin(), v.end());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (copy[i] - copy[perm[i]]);
        };
    }

    struct Slot {
        std::optional<CriticalPoint> point;
    };
    std::vector<Slot> slots(options.restarts);

    parallel_for(options.restarts, [&](std::size_t r) {
        const std::uint64_t seed = options.seed + r;
        Lcg64 rng(seed);
        GridFunction init(n);
        std::string kind;
        SubspaceProjector projector;
        switch (r % 4) {
            case 0: {
                kind = "perturbed-first";
                const double amp = 0.3 * max_abs(first.u);
                for (std::size_t i = 0; i < n; ++i) init[i] = first.u[i] + amp * rng.uniform(-1.0, 1.0);
                break;
            }
            case 1: {
                kind = "two-bump";
                const double lo = form.domain().lower();
                const double diam = form.domain().diameter();
                for (std::size_t i = 0; i < n; ++i)
                    init[i] = std::sin(2.0 * std::numbers::pi * (x[i] - lo) / diam) + 0.1 * rng.uniform(-1.0, 1.0);
                projector = odd;
                break;
            }
            default: {
                kind = "random";
                for (auto& v : init) v = rng.uniform(-1.0, 1.0);
                const double c = weighted_dot(m, init, first.u) / first_mass;
                for (std::size_t i = 0; i < n; ++i) init[i] -= c * first.u[i];
                break;
            }
        }
        if (max_abs(init) == 0.0) init[0] = 1.0;
        try {
            auto res = solve_lambda1_general(form, q, {options.tol, options.max_iter, seed}, std::move(init), &solver,
                                             projector);
            const std::size_t changes = count_sign_changes(res.u);
            const double floor = 1e-8 * max_abs(res.u);
            const bool pos = std::any_of(res.u.begin(), res.u.end(), [&](double v) { return v > floor; });
            const bool neg = std::any_of(res.u.begin(), res.u.end(), [&](double v) { return v < -floor; });
            slots[r].point =
                CriticalPoint{res.lambda, std::move(res.u), r, changes, pos && neg, kind, res.iterations, res.residual};
        } catch (const ConvergenceFailure&) {
        }
    });

    CriticalPointSet out;
    out.cluster_tol = options.cluster_tol;
    out.restarts = options.restarts;
    for (auto& slot : slots) {
        if (slot.point)
            out.points.push_back(std::move(*slot.point));
        else
            ++out.failed;
    }
    std::sort(out.points.begin(), out.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return a.lambda < b.lambda || (a.lambda == b.lambda && a.restart < b.restart);
    });
    for (std::size_t k = 0; k < out.points.size(); ++k) {
        const auto& p = out.points[k];
        if (out.clusters.empty() ||
            p.lambda - out.clusters.back().lambda > options.cluster_tol * out.clusters.back().lambda) {
            out.clusters.push_back({p.lambda, 0, 0, k});
        }
        auto& c = out.clusters.back();
        ++c.multiplicity;
        if (p.changes_sign) ++c.sign_changing;
    }
    if (!out.points.empty()) {
        out.lambda1 = out.points.front().lambda;
        for (const auto& p : out.points) {
            if (p.lambda > out.lambda1 * (1.0 + 10.0 * options.tol)) {
                out.gap_witness = p.lambda;
                break;
            }
        }
    }
    return out;
}

namespace {

double linear_lambda1(const DiscreteGagliardoForm& form) {
    if (form.size() <= 400) return full_spectrum_q2(form, 1).front().lambda;
    return solve_lambda1(form, 2.0, {1e-10, 20000, 0}).lambda;
}

}  // namespace

AuditReport faber_krahn_check(const OpenSet1D& omega, double s, const UniformGridSpec& grid) {
    const auto interval = OpenSet1D::make({{0.0, omega.measure()}});
    UniformGridSpec interval_grid = grid;
    if (!grid.width()) {
        const auto counts = grid.counts_for(omega);
        std::size_t total = 0;
        for (auto c : counts) total += c;
        interval_grid = UniformGridSpec::from_counts({total});
    }
    const auto form_omega = assemble_form(omega, grid, s);
    const auto form_interval = assemble_form(interval, interval_grid, s);
    const double lam_omega = linear_lambda1(form_omega);
    const double lam_interval = linear_lambda1(form_interval);

    AuditReport report;
    report.name = "faber-krahn";
    report.tolerance = 0.0;
    report.params = {{"s", s}, {"domain", omega.to_string()}, {"interval", interval.to_string()}};
    report.record((lam_omega - lam_interval * (1.0 - 1e-8)) / lam_interval);
    report.details = {{"lambda_domain", lam_omega}, {"lambda_interval", lam_interval},
                      {"ratio", lam_omega / lam_interval}};
    return report;
}

}  // namespace fraceig
