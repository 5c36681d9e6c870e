#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fraceig/audit_report.hpp"
#include "fraceig/gagliardo_form.hpp"
#include "fraceig/spectral.hpp"

namespace fraceig {

enum class LaneEmdenRoute { EigenScaled, FreeEnergy };

std::string to_string(LaneEmdenRoute route);

/// Positive solution w of the discrete Lane-Emden equation A w = M w^{q-1}.
struct LaneEmdenResult {
    GridFunction w;
    double q = 1.5;
    double s = 0.5;
    double lambda1 = 0.0;   ///< λ1(Ω,s,q) used (eigen route) or B(w)/‖w‖_q² (energy route)
    double residual = 0.0;  ///< ‖A w - M w^{q-1}‖ / ‖M w^{q-1}‖ in the dual norm
    std::size_t iterations = 0;
    LaneEmdenRoute route = LaneEmdenRoute::EigenScaled;
};

/// Relative dual-norm residual of A w - M |w|^{q-2} w.
double lane_emden_residual(const DiscreteGagliardoForm& form, std::span<const double> w, double q);

/// w = λ1^{1/(q-2)} u1 with (λ1, u1) from the inverse iteration.
LaneEmdenResult lane_emden_density(const DiscreteGagliardoForm& form, double q, double tol = 1e-12,
                                   std::uint64_t seed = 0);

/// (1/2) B_h(u) - (1/q) Σ m_i |u_i|^q.
double free_energy(const DiscreteGagliardoForm& form, double q, std::span<const double> u);

/// Minimizes the free energy over the nonnegative orthant by projected
/// gradient descent (diagonally scaled, Barzilai-Borwein trial steps,
/// Armijo backtracking along the projection arc).
LaneEmdenResult minimize_free_energy(const DiscreteGagliardoForm& form, double q, double tol = 1e-13,
                                     std::size_t max_iter = 200000, std::uint64_t seed = 0);

struct ExhaustionStep {
    double radius;
    OpenSet1D subset;
    LaneEmdenResult density;  ///< on the sub-grid
    GridFunction ambient_w;   ///< zero extension to the ambient grid
};

struct ExhaustionSequence {
    std::vector<ExhaustionStep> steps;
    std::vector<std::string> warnings;  ///< skipped radii
    double center = 0.0;
    GridFunction full_w;  ///< density of the whole set on the ambient grid
};

/// Densities of Ω ∩ B_r(center) for ascending radii, all on the ambient grid
/// of Ω. Radii whose ball misses Ω are skipped with a warning.
ExhaustionSequence exhaustion_sequence(const OpenSet1D& omega, double s, double q, const std::vector<double>& radii,
                                       const UniformGridSpec& grid, double center = 0.0, double tol = 1e-12);

/// w_{Ω1} <= w_{Ω2} + 1e-8‖w_{Ω2}‖_∞ at every node of Ω1, on the ambient grid
/// of Ω2. Throws PreconditionError unless Ω1 ⊆ Ω2.
AuditReport comparison_check(const OpenSet1D& inner, const OpenSet1D& outer, double s, double q,
                             const UniformGridSpec& grid, double tol = 1e-12);

/// Nodal monotonicity of an exhaustion sequence (each density below the next
/// and below the full density, 1e-8 relative slack) and stabilization once
/// the ball covers the whole set.
AuditReport exhaustion_check(const ExhaustionSequence& seq, const OpenSet1D& omega, double s, double q);

}  // namespace fraceig
