#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fraceig/open_set.hpp"

namespace fraceig {

/// Nodal values on the grid of a DiscreteGagliardoForm.
using GridFunction = std::vector<double>;

/// Cell-centered tiling of each component of a domain. Either a target
/// width (n_j = max(1, round(len_j / h))) or explicit per-component counts.
class UniformGridSpec {
public:
    static UniformGridSpec from_width(double h_target);
    static UniformGridSpec from_counts(std::vector<std::size_t> counts);

    /// Per-component cell counts for omega.
    std::vector<std::size_t> counts_for(const OpenSet1D& omega) const;

    std::optional<double> width() const noexcept { return width_; }

private:
    std::optional<double> width_;
    std::vector<std::size_t> counts_;
};

/// Dense row-major square matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * n_, n_}; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Discrete Gagliardo energy on a set of nodes inside an open set:
///
///   B_h(u) = Σ_{i≠j} (u_i - u_j)² K_ij + 2 Σ_i u_i² E_i,
///   K_ij = m_i m_j / |x_i - x_j|^{1+2s},  E_i = m_i ∫_{R∖Ω} |x_i - y|^{-1-2s} dy.
///
/// The exterior weights E are exact (closed-form ray and gap integrals over
/// the true complement). The stiffness action is
/// (A u)_i = 2 Σ_{j≠i} K_ij (u_i - u_j) + 2 E_i u_i, so <A u, u> = B_h(u).
/// A built form is immutable.
class DiscreteGagliardoForm {
public:
    /// Nodes and measures given explicitly; used for sub-grids of a common
    /// ambient grid. Throws InvalidParameter, EmptyGrid or InvalidDomain.
    DiscreteGagliardoForm(OpenSet1D omega, std::vector<double> nodes, std::vector<double> measures, double s);

    /// Same, with externally supplied exterior weights (deserialization and
    /// fault injection). exterior.size() must match nodes.
    DiscreteGagliardoForm(OpenSet1D omega, std::vector<double> nodes, std::vector<double> measures,
                          std::vector<double> exterior, double s);

    double s() const noexcept { return s_; }
    const OpenSet1D& domain() const noexcept { return omega_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& measures() const noexcept { return measures_; }
    const std::vector<double>& exterior() const noexcept { return exterior_; }
    double interaction(std::size_t i, std::size_t j) const noexcept { return kernel_(i, j); }

    /// Distance of every node to the boundary of the domain.
    const std::vector<double>& boundary_distance() const noexcept { return delta_; }

    double energy(std::span<const double> u) const;
    GridFunction apply(std::span<const double> u) const;

    /// Dense matrix of the stiffness action.
    DenseMatrix stiffness_matrix() const;

    /// Throws GridMismatch when u does not live on this grid.
    void check_grid(std::span<const double> u) const;

private:
    void build_kernel();

    double s_;
    OpenSet1D omega_;
    std::vector<double> nodes_;
    std::vector<double> measures_;
    std::vector<double> exterior_;
    std::vector<double> delta_;
    DenseMatrix kernel_;
};

/// Builds the cell-centered form on omega.
DiscreteGagliardoForm assemble_form(const OpenSet1D& omega, const UniformGridSpec& grid, double s);

/// ∫_{R∖Ω} |x - y|^{-1-2s} dy for x inside omega, in closed form.
double exterior_integral(const OpenSet1D& omega, double x, double s);

/// Result of restricting an ambient grid to a subset.
struct SubForm {
    DiscreteGagliardoForm form;
    std::vector<std::size_t> ambient_index;  ///< ambient node index of each sub-node
};

/// Keeps the ambient nodes whose cells lie inside subset and assembles the
/// form of subset on them. Throws EmptyGrid if no cell fits.
SubForm restrict_form(const DiscreteGagliardoForm& ambient, const OpenSet1D& subset);

/// Zero extension of a sub-grid function to the ambient grid.
GridFunction extend_by_zero(const SubForm& sub, std::span<const double> u, std::size_t ambient_size);

double energy(const DiscreteGagliardoForm& form, std::span<const double> u);

/// (Σ m_i |u_i|^q)^{1/q}. Throws InvalidParameter for q < 1.
double lq_norm(const DiscreteGagliardoForm& form, std::span<const double> u, double q);

GridFunction apply_stiffness(const DiscreteGagliardoForm& form, std::span<const double> u);

/// rho^{2s} Σ_{|x_i - x0| >= rho} m_i |w_i| / |x_i - x0|^{1+2s}.
double tail(const DiscreteGagliardoForm& form, std::span<const double> w, double x0, double rho);

}  // namespace fraceig
