#include "fraceig/gagliardo_form.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fraceig/errors.hpp"
#include "fraceig/numerics.hpp"

namespace fraceig {

namespace {

void check_order(double s) {
    if (!(s > 0.0 && s < 1.0)) throw InvalidParameter("fractional order s must lie in (0,1)");
}

// (near^{-2s} - far^{-2s}) / (2s) for 0 < near <= far, accurate when far ~ near.
double gap_integral(double near, double far, double s) {
    const double two_s = 2.0 * s;
    if (std::isinf(far)) return std::pow(near, -two_s) / two_s;
    return -std::pow(near, -two_s) * std::expm1(-two_s * std::log(far / near)) / two_s;
}

}  // namespace

UniformGridSpec UniformGridSpec::from_width(double h_target) {
    if (!(h_target > 0.0) || !std::isfinite(h_target)) throw InvalidParameter("grid width must be positive");
    UniformGridSpec spec;
    spec.width_ = h_target;
    return spec;
}

UniformGridSpec UniformGridSpec::from_counts(std::vector<std::size_t> counts) {
    if (counts.empty()) throw EmptyGrid("no cell counts given");
    if (std::any_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 0; }))
        throw EmptyGrid("cell counts must be at least 1");
    UniformGridSpec spec;
    spec.counts_ = std::move(counts);
    return spec;
}

std::vector<std::size_t> UniformGridSpec::counts_for(const OpenSet1D& omega) const {
    const auto& ivs = omega.intervals();
    if (width_) {
        std::vector<std::size_t> counts;
        for (const auto& iv : ivs)
            counts.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(iv.length() / *width_))));
        return counts;
    }
    if (counts_.size() != ivs.size())
        throw GridMismatch("grid has " + std::to_string(counts_.size()) + " component counts, domain has " +
                           std::to_string(ivs.size()) + " components");
    return counts_;
}

double exterior_integral(const OpenSet1D& omega, double x, double s) {
    const auto& ivs = omega.intervals();
    double total = 0.0;
    // left ray and gaps left of x
    total += gap_integral(x - ivs.front().lo, INFINITY, s);
    for (std::size_t j = 0; j + 1 < ivs.size(); ++j) {
        const double gap_lo = ivs[j].hi;
        const double gap_hi = ivs[j + 1].lo;
        if (gap_hi <= x)
            total += gap_integral(x - gap_hi, x - gap_lo, s);
        else if (gap_lo >= x)
            total += gap_integral(gap_lo - x, gap_hi - x, s);
    }
    total += gap_integral(ivs.back().hi - x, INFINITY, s);
    return total;
}

DiscreteGagliardoForm::DiscreteGagliardoForm(OpenSet1D omega, std::vector<double> nodes,
                                             std::vector<double> measures, double s)
    : s_(s), omega_(std::move(omega)), nodes_(std::move(nodes)), measures_(std::move(measures)) {
    check_order(s_);
    if (nodes_.empty()) throw EmptyGrid("form has no nodes");
    if (measures_.size() != nodes_.size()) throw GridMismatch("nodes and measures differ in length");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!omega_.contains(nodes_[i])) throw InvalidDomain("node outside the domain");
        if (!(measures_[i] > 0.0)) throw InvalidParameter("cell measures must be positive");
    }
    exterior_.resize(nodes_.size());
    parallel_for(nodes_.size(),
                 [&](std::size_t i) { exterior_[i] = measures_[i] * exterior_integral(omega_, nodes_[i], s_); });
    build_kernel();
}

DiscreteGagliardoForm::DiscreteGagliardoForm(OpenSet1D omega, std::vector<double> nodes,
                                             std::vector<double> measures, std::vector<double> exterior, double s)
    : s_(s), omega_(std::move(omega)), nodes_(std::move(nodes)), measures_(std::move(measures)),
      exterior_(std::move(exterior)) {
    check_order(s_);
    if (nodes_.empty()) throw EmptyGrid("form has no nodes");
    if (measures_.size() != nodes_.size() || exterior_.size() != nodes_.size())
        throw GridMismatch("nodes, measures and exterior weights differ in length");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!omega_.contains(nodes_[i])) throw InvalidDomain("node outside the domain");
        if (!(measures_[i] > 0.0)) throw InvalidParameter("cell measures must be positive");
    }
    build_kernel();
}

void DiscreteGagliardoForm::build_kernel() {
    const std::size_t n = nodes_.size();
    const double power = 1.0 + 2.0 * s_;
    kernel_ = DenseMatrix(n);
    delta_.resize(n);
    parallel_for(n, [&](std::size_t i) {
        auto row = kernel_.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dist = std::abs(nodes_[i] - nodes_[j]);
            if (!(dist > 0.0)) throw InvalidDomain("duplicate nodes");
            row[j] = measures_[i] * measures_[j] / std::pow(dist, power);
        }
        delta_[i] = dist_to_boundary(omega_, nodes_[i]);
    });
}

void DiscreteGagliardoForm::check_grid(std::span<const double> u) const {
    if (u.size() != nodes_.size())
        throw GridMismatch("grid function has " + std::to_string(u.size()) + " values, grid has " +
                           std::to_string(nodes_.size()) + " nodes");
}

double DiscreteGagliardoForm::energy(std::span<const double> u) const {
    check_grid(u);
    const std::size_t n = nodes_.size();
    std::vector<double> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = kernel_.row(i);
        const double ui = u[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = ui - u[j];
            acc += d * d * k[j];
        }
        rows[i] = acc + 2.0 * exterior_[i] * ui * ui;
    }
    return pairwise_sum(rows);
}

GridFunction DiscreteGagliardoForm::apply(std::span<const double> u) const {
    check_grid(u);
    const std::size_t n = nodes_.size();
    GridFunction out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = kernel_.row(i);
        const double ui = u[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += k[j] * (ui - u[j]);
        out[i] = 2.0 * acc + 2.0 * exterior_[i] * ui;
    }
    return out;
}

DenseMatrix DiscreteGagliardoForm::stiffness_matrix() const {
    const std::size_t n = nodes_.size();
    DenseMatrix a(n);
    for (std::size_t i = 0; i < n; ++i) {
        double diag = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            a(i, j) = -2.0 * kernel_(i, j);
            diag += kernel_(i, j);
        }
        a(i, i) = 2.0 * diag + 2.0 * exterior_[i];
    }
    return a;
}

DiscreteGagliardoForm assemble_form(const OpenSet1D& omega, const UniformGridSpec& grid, double s) {
    check_order(s);
    const auto counts = grid.counts_for(omega);
    std::vector<double> nodes;
    std::vector<double> measures;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        const auto& iv = omega.intervals()[j];
        const double h = iv.length() / static_cast<double>(counts[j]);
        for (std::size_t i = 0; i < counts[j]; ++i) {
            nodes.push_back(iv.lo + (static_cast<double>(i) + 0.5) * h);
            measures.push_back(h);
        }
    }
    return DiscreteGagliardoForm(omega, std::move(nodes), std::move(measures), s);
}

SubForm restrict_form(const DiscreteGagliardoForm& ambient, const OpenSet1D& subset) {
    std::vector<double> nodes;
    std::vector<double> measures;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < ambient.size(); ++i) {
        const double x = ambient.nodes()[i];
        const double m = ambient.measures()[i];
        const double slack = 1e-12 * m;
        const bool inside = std::any_of(subset.intervals().begin(), subset.intervals().end(), [&](const Interval& iv) {
            return iv.lo <= x - 0.5 * m + slack && x + 0.5 * m <= iv.hi + slack;
        });
        if (inside) {
            nodes.push_back(x);
            measures.push_back(m);
            index.push_back(i);
        }
    }
    if (nodes.empty()) throw EmptyGrid("no ambient cell fits inside " + subset.to_string());
    return SubForm{DiscreteGagliardoForm(subset, std::move(nodes), std::move(measures), ambient.s()),
                   std::move(index)};
}

GridFunction extend_by_zero(const SubForm& sub, std::span<const double> u, std::size_t ambient_size) {
    sub.form.check_grid(u);
    GridFunction out(ambient_size, 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) out.at(sub.ambient_index[k]) = u[k];
    return out;
}

double energy(const DiscreteGagliardoForm& form, std::span<const double> u) { return form.energy(u); }

double lq_norm(const DiscreteGagliardoForm& form, std::span<const double> u, double q) {
    if (!(q >= 1.0)) throw InvalidParameter("Lebesgue exponent must be at least 1");
    form.check_grid(u);
    const auto& m = form.measures();
    const double scale = max_abs(u);
    if (scale == 0.0) return 0.0;
    // factor out the sup norm so large q cannot overflow
    const double sum = pairwise_sum(u.size(), [&](std::size_t i) { return m[i] * std::pow(std::abs(u[i]) / scale, q); });
    return scale * std::pow(sum, 1.0 / q);
}

GridFunction apply_stiffness(const DiscreteGagliardoForm& form, std::span<const double> u) { return form.apply(u); }

double tail(const DiscreteGagliardoForm& form, std::span<const double> w, double x0, double rho) {
    if (!(rho > 0.0)) throw InvalidParameter("tail radius must be positive");
    form.check_grid(w);
    const double power = 1.0 + 2.0 * form.s();
    const auto& x = form.nodes();
    const auto& m = form.measures();
    const double sum = pairwise_sum(w.size(), [&](std::size_t i) {
        const double d = std::abs(x[i] - x0);
        return d >= rho ? m[i] * std::abs(w[i]) / std::pow(d, power) : 0.0;
    });
    return std::pow(rho, 2.0 * form.s()) * sum;
}

}  // namespace fraceig
