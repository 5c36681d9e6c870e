#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fraceig/gagliardo_form.hpp"

namespace fraceig {

/// Lower-triangular Cholesky factor of a dense SPD matrix.
class CholeskyFactor {
public:
    /// Throws PreconditionError if the matrix is not positive definite.
    explicit CholeskyFactor(const DenseMatrix& a);

    std::vector<double> solve(std::span<const double> rhs) const;
    std::size_t size() const noexcept { return lower_.size(); }

private:
    DenseMatrix lower_;
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations;
    double relative_residual;
};

/// Jacobi-preconditioned conjugate gradients on A x = b.
CgResult conjugate_gradient(const DenseMatrix& a, std::span<const double> b, double rel_tol,
                            std::size_t max_iter, std::span<const double> x0 = {});

/// Solves A v = b for the stiffness matrix of a form: dense Cholesky up to
/// kDirectLimit nodes, preconditioned CG above, both to relative residual
/// 1e-12. Built once per form and shared by the iterative solvers.
class StiffnessSolver {
public:
    static constexpr std::size_t kDirectLimit = 600;

    explicit StiffnessSolver(const DiscreteGagliardoForm& form);

    std::vector<double> solve(std::span<const double> rhs) const;
    std::size_t size() const noexcept { return matrix_.size(); }

private:
    DenseMatrix matrix_;
    std::unique_ptr<CholeskyFactor> cholesky_;
};

struct SymmetricEigen {
    std::vector<double> values;         ///< ascending
    std::vector<std::vector<double>> vectors;  ///< orthonormal, vectors[k] pairs with values[k]
    std::size_t sweeps;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
/// rel_tol times the Frobenius norm of the matrix.
SymmetricEigen jacobi_eigen(DenseMatrix a, double rel_tol = 1e-12, std::size_t max_sweeps = 100);

}  // namespace fraceig
