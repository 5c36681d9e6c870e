#include "fraceig/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fraceig/errors.hpp"
#include "fraceig/numerics.hpp"

namespace fraceig {

CholeskyFactor::CholeskyFactor(const DenseMatrix& a) : lower_(a.size()) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        const auto lj = lower_.row(j);
        for (std::size_t k = 0; k < j; ++k) diag -= lj[k] * lj[k];
        if (!(diag > 0.0)) throw PreconditionError("matrix is not positive definite");
        const double pivot = std::sqrt(diag);
        lower_(j, j) = pivot;
        for (std::size_t i = j + 1; i < n; ++i) {
            const auto li = lower_.row(i);
            double acc = a(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= li[k] * lj[k];
            lower_(i, j) = acc / pivot;
        }
    }
}

std::vector<double> CholeskyFactor::solve(std::span<const double> rhs) const {
    const std::size_t n = lower_.size();
    std::vector<double> y(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
        const auto li = lower_.row(i);
        double acc = y[i];
        for (std::size_t k = 0; k < i; ++k) acc -= li[k] * y[k];
        y[i] = acc / li[i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) acc -= lower_(k, ii) * y[k];
        y[ii] = acc / lower_(ii, ii);
    }
    return y;
}

namespace {

std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto row = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
    return out;
}

}  // namespace

CgResult conjugate_gradient(const DenseMatrix& a, std::span<const double> b, double rel_tol,
                            std::size_t max_iter, std::span<const double> x0) {
    const std::size_t n = a.size();
    std::vector<double> x = x0.empty() ? std::vector<double>(n, 0.0) : std::vector<double>(x0.begin(), x0.end());
    std::vector<double> r(b.begin(), b.end());
    const auto ax = multiply(a, x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];

    const double b_norm = std::sqrt(dot(b, b));
    if (b_norm == 0.0) return {std::vector<double>(n, 0.0), 0, 0.0};

    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / a(i, i);
    std::vector<double> p = z;
    double rz = dot(r, z);
    double rel = std::sqrt(dot(r, r)) / b_norm;
    std::size_t it = 0;
    while (rel > rel_tol && it < max_iter) {
        const auto ap = multiply(a, p);
        const double alpha = rz / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / a(i, i);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rel = std::sqrt(dot(r, r)) / b_norm;
        ++it;
    }
    return {std::move(x), it, rel};
}

StiffnessSolver::StiffnessSolver(const DiscreteGagliardoForm& form) : matrix_(form.stiffness_matrix()) {
    if (matrix_.size() <= kDirectLimit) cholesky_ = std::make_unique<CholeskyFactor>(matrix_);
}

std::vector<double> StiffnessSolver::solve(std::span<const double> rhs) const {
    if (rhs.size() != matrix_.size()) throw GridMismatch("right-hand side does not match the stiffness matrix");
    if (cholesky_) return cholesky_->solve(rhs);
    auto result = conjugate_gradient(matrix_, rhs, 1e-12, 20 * matrix_.size());
    if (result.relative_residual > 1e-12)
        throw ConvergenceFailure("conjugate gradient stalled", std::move(result.x), result.relative_residual,
                                 result.relative_residual);
    return std::move(result.x);
}

SymmetricEigen jacobi_eigen(DenseMatrix a, double rel_tol, std::size_t max_sweeps) {
    const std::size_t n = a.size();
    DenseMatrix v(n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) total += a(i, j) * a(i, j);
    const double threshold = rel_tol * std::sqrt(total);

    auto off_norm = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) acc += a(i, j) * a(i, j);
        return std::sqrt(acc);
    };

    std::size_t sweep = 0;
    while (off_norm() > threshold) {
        if (sweep == max_sweeps) throw ConvergenceFailure("Jacobi sweeps exhausted", {}, off_norm(), off_norm());
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymmetricEigen out;
    out.sweeps = sweep;
    for (std::size_t idx : order) {
        out.values.push_back(a(idx, idx));
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v(k, idx);
        out.vectors.push_back(std::move(col));
    }
    return out;
}

}  // namespace fraceig
