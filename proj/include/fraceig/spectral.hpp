#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fraceig/audit_report.hpp"
#include "fraceig/gagliardo_form.hpp"
#include "fraceig/linalg.hpp"

namespace fraceig {

struct EigenSolveResult {
    double lambda = 0.0;
    GridFunction u;  ///< L^q-normalized; largest-magnitude entry positive
    std::size_t iterations = 0;
    double residual = 0.0;  ///< dual norm of A u - λ‖u‖_q^{2-q} M φ_q(u)
    double q = 2.0;
    double s = 0.5;
    std::uint64_t seed = 0;
};

/// Solver controls shared by the iterative routines.
struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 5000;
    std::uint64_t seed = 0;
};

/// B_h(u) / ‖u‖_q². Throws InvalidParameter for u = 0 or q <= 1.
double rayleigh(const DiscreteGagliardoForm& form, std::span<const double> u, double q);

/// sqrt(Σ r_i² / m_i) with r = A u - λ‖u‖_q^{2-q} M φ_q(u), φ_q(t) = |t|^{q-2} t.
double eigen_residual(const DiscreteGagliardoForm& form, std::span<const double> u, double q, double lambda);

/// 2N/(N - 2s) when 2s < N, +infinity otherwise.
double conjugate_exponent(int n_dim, double s);

/// Positive initial vector: constant for seed 0, otherwise uniform on
/// [0.5, 1.5) from the pinned generator.
GridFunction positive_start(std::size_t n, std::uint64_t seed);

/// Sub-homogeneous inverse iteration for q in (1, 2]:
/// v = A^{-1} M φ_q(u_k), u_{k+1} = v / ‖v‖_q, until the relative Rayleigh
/// change is at most tol and the residual at most tol·λ.
EigenSolveResult solve_lambda1(const DiscreteGagliardoForm& form, double q, const SolveOptions& options = {},
                               const StiffnessSolver* solver = nullptr);

/// Optional linear projection applied after every descent step, used to
/// keep iterates inside a symmetry-invariant subspace.
using SubspaceProjector = std::function<void(std::span<double>)>;

/// Riemannian gradient descent for q in (1, 2*_s) on the L^q unit sphere,
/// energy-preconditioned, with Armijo backtracking and renormalization.
/// Returns the stationary point reached (not guaranteed global for q > 2).
EigenSolveResult solve_lambda1_general(const DiscreteGagliardoForm& form, double q, const SolveOptions& options = {},
                                       std::optional<GridFunction> init = std::nullopt,
                                       const StiffnessSolver* solver = nullptr,
                                       const SubspaceProjector& projector = {});

struct SpectrumEntry {
    double lambda;
    GridFunction u;  ///< M-orthonormal
};

/// Lowest k linear (q = 2) eigenpairs via cyclic Jacobi on M^{-1/2} A M^{-1/2}.
std::vector<SpectrumEntry> full_spectrum_q2(const DiscreteGagliardoForm& form, std::size_t k);

struct CriticalPoint {
    double lambda;
    GridFunction u;
    std::size_t restart;
    std::size_t sign_changes;
    bool changes_sign;
    std::string init_kind;
    std::size_t iterations;
    double residual;
};

struct CriticalCluster {
    double lambda;  ///< smallest member value
    std::size_t multiplicity;
    std::size_t sign_changing;
    std::size_t representative;  ///< index into CriticalPointSet::points
};

struct CriticalPointSet {
    std::vector<CriticalPoint> points;  ///< converged points sorted by (λ, restart)
    std::vector<CriticalCluster> clusters;
    double cluster_tol = 0.0;
    std::size_t restarts = 0;
    std::size_t failed = 0;
    double lambda1 = 0.0;  ///< smallest converged value
    std::optional<double> gap_witness;  ///< smallest value above λ1(1 + 10 tol)
};

struct SearchOptions {
    std::size_t restarts = 50;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    double cluster_tol = 1e-6;  ///< relative
    std::size_t max_iter = 2000;
};

/// Random-restart search for constrained critical points of the Rayleigh
/// quotient. Restarts cycle through perturbed first eigenfunctions,
/// two-bump sign patterns and mixed-sign random vectors deflated against
/// the first eigenfunction. On reflection-symmetric grids the two-bump
/// restarts run inside the odd subspace, whose critical points are critical
/// points of the full problem.
CriticalPointSet critical_point_search(const DiscreteGagliardoForm& form, double q, const SearchOptions& options);

/// Number of sign changes of the nodal sequence, ignoring entries below
/// 1e-8 of the sup norm.
std::size_t count_sign_changes(std::span<const double> u);

/// Index permutation of the reflection x -> lower + upper - x when it maps
/// the grid onto itself with equal weights; empty otherwise.
std::vector<std::size_t> reflection_permutation(const DiscreteGagliardoForm& form);

/// λ1(Ω,s,2) >= λ1(I,s,2)(1 - 1e-8) where I is an interval with |I| = |Ω|.
AuditReport faber_krahn_check(const OpenSet1D& omega, double s, const UniformGridSpec& grid);

/// Orients u so that the entry of largest magnitude is positive.
void orient(std::span<double> u);

}  // namespace fraceig
