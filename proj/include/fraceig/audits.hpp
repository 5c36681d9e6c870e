#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fraceig/audit_report.hpp"
#include "fraceig/gagliardo_form.hpp"
#include "fraceig/lane_emden.hpp"
#include "fraceig/spectral.hpp"

namespace fraceig {

/// Constructive Hardy constant from the exterior-cone argument:
/// C = 2^{N+2s} N / (2θ) · max(D^N / ℓ^N, 1) with N = 1.
struct HardyConstant {
    double value;
    double theta;
    double ell;
    double diameter;
};

HardyConstant hardy_constant(const OpenSet1D& omega, double s);

/// Deterministic structured vectors (constant, hat, single node,
/// alternating sign) followed by `random` vectors uniform on [-1, 1].
std::vector<GridFunction> audit_vectors(const DiscreteGagliardoForm& form, std::size_t random, std::uint64_t seed);

/// Two layers: the pointwise bound E_i/m_i >= θ/2^{1+2s} · min(ℓ/D, 1) · δ_i^{-2s}
/// at every node (zero tolerance), and Σ m u² δ^{-2s} <= C B_h(u) on vectors.
AuditReport hardy_audit(const DiscreteGagliardoForm& form, std::size_t samples, std::uint64_t seed);

/// Σ m u² w^{q-2} <= B_h(u) + slack with slack = 10 · n · ‖u‖_∞² · max_i |r_i| / w_i,
/// r = A w - M w^{q-1}. Throws PreconditionError unless w > 0.
AuditReport picone_lane_emden_audit(const DiscreteGagliardoForm& form, double q, const LaneEmdenResult& w,
                                    std::size_t samples, std::uint64_t seed, bool include_basis = false);

/// Σ m u² δ^{s(q-2)} <= (Σ m u² δ^{-2s})^{(2-q)/2} (Σ m u²)^{q/2}, and the chain
/// obtained by inserting the Hardy bound.
AuditReport weighted_holder_audit(const DiscreteGagliardoForm& form, double q, std::size_t samples,
                                  std::uint64_t seed);

struct HopfFit {
    double c_est;  ///< min_i w_i / δ_i^s
    std::size_t argmin;
    std::vector<double> ratios;
};

HopfFit hopf_fit(const DiscreteGagliardoForm& form, const LaneEmdenResult& w);

/// λ1(Ω,s,2) >= ‖w‖_∞^{q-2} (1 - 1e-8).
AuditReport converse_linf_bound_audit(const DiscreteGagliardoForm& form, double q, const LaneEmdenResult& w);

/// One eigenpair entering the L^∞ ratio audit.
struct LinfSample {
    std::string label;
    double lambda;
    double sup_norm;
    double lq;
};

LinfSample make_linf_sample(const DiscreteGagliardoForm& form, const EigenSolveResult& result, std::string label);

/// Exponent 2*_s / (2 (2*_s - q)) of the sup bound; +inf branch returns 1.
double linf_exponent(double s, double q);

/// ρ = ‖u‖_∞ / (λ^β ‖u‖_q). scaled: same discrete problem on dilated
/// domains, must agree to 1e-10 relative. refined: grid refinements, spread
/// reported. For s >= 1/2 the audit is report-only.
AuditReport linf_ratio_audit(const std::vector<LinfSample>& scaled, const std::vector<LinfSample>& refined, double q,
                             double s);

/// Both sides of the local sup estimate for a nonnegative subsolution.
struct SubsolutionEstimate {
    double lhs;          ///< max of w over B_{r/2}(x0)
    double tail_term;    ///< δ Tail(w, x0, r/2)
    double source_term;  ///< δ r^{2s} f_bound
    double local_term;   ///< (r^{1-2s}/δ)^{1/(4s)} (mean of w² over B_r(x0))^{1/2}
    double rhs;
    double ratio;
};

SubsolutionEstimate subsolution_sup_audit(const DiscreteGagliardoForm& form, std::span<const double> w,
                                          double f_bound, double x0, double r, double delta);

struct SubsolutionConfig {
    double x0;
    double r;
    double delta;
};

/// Report-only sweep; the unknown constant is estimated as the largest ratio.
AuditReport subsolution_sweep(const DiscreteGagliardoForm& form, std::span<const double> w, double f_bound,
                              const std::vector<SubsolutionConfig>& configs);

/// B_h(|u|) <= B_h(u), strictly for mixed-sign u; equality to 1e-14 relative
/// for constant-sign u.
AuditReport sign_lemma_audit(const DiscreteGagliardoForm& form, std::size_t samples, std::uint64_t seed);

/// The stiffness matrix is a nonsingular M-matrix (positive couplings,
/// positive row sums 2E_i) and A^{-1} maps positive data to positive values.
AuditReport minimum_principle_audit(const DiscreteGagliardoForm& form);

/// ‖w‖_q = λ1^{1/(q-2)} and B_h(w) = Σ m w^q, both to 1e-8 relative.
AuditReport normalization_identity_audit(const DiscreteGagliardoForm& form, double q, const LaneEmdenResult& w);

}  // namespace fraceig
