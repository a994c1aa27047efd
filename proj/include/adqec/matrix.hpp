#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace adqec {

using complexd = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

/// Global default numeric tolerance. Operations that need a different
/// threshold take it as an explicit parameter.
inline constexpr double kDefaultTol = 1e-9;

inline bool all_finite(const cmat& m) {
    return m.array().real().isFinite().all() && m.array().imag().isFinite().all();
}

inline bool is_hermitian(const cmat& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Kronecker (tensor) product. Composite row index of the result pairs a
/// row of `a` (slow) with a row of `b` (fast): [ij] = i*b.rows() + j.
inline cmat kron(const cmat& a, const cmat& b) {
    cmat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Trace out one tensor factor of an operator on a d1 (x) d2 space.
/// Composite indices follow the global row-major pairing [ij] = i*d2 + j.
/// `which` selects the factor to trace over: 1 (slow) or 2 (fast).
inline cmat partial_trace(const cmat& m, int d1, int d2, int which) {
    if (d1 <= 0 || d2 <= 0 || m.rows() != m.cols() ||
        m.rows() != static_cast<Eigen::Index>(d1) * d2)
        throw std::invalid_argument("partial_trace: matrix side must equal d1*d2");
    if (which != 1 && which != 2)
        throw std::invalid_argument("partial_trace: subsystem selector must be 1 or 2");
    if (which == 2) {
        cmat out = cmat::Zero(d1, d1);
        for (int i = 0; i < d1; ++i)
            for (int ip = 0; ip < d1; ++ip)
                for (int j = 0; j < d2; ++j)
                    out(i, ip) += m(i * d2 + j, ip * d2 + j);
        return out;
    }
    cmat out = cmat::Zero(d2, d2);
    for (int j = 0; j < d2; ++j)
        for (int jp = 0; jp < d2; ++jp)
            for (int i = 0; i < d1; ++i)
                out(j, jp) += m(i * d2 + j, i * d2 + jp);
    return out;
}

struct HermEigResult {
    rvec eigenvalues;   // sorted descending
    cmat eigenvectors;  // unitary; column k pairs with eigenvalues[k]
};

/// Fix the global phase of a vector: largest-magnitude component made real
/// and nonnegative, so spectral decompositions are reproducible run to run.
inline void fix_phase(Eigen::Ref<cvec> v) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best + 1e-14) {
            best = a;
            imax = i;
        }
    }
    if (best <= 0.0) return;
    const complexd z = v[imax];
    if (std::abs(z) > 0.0) v *= std::conj(z) / std::abs(z);
}

/// Full spectral decomposition of a Hermitian matrix (symmetrized
/// internally), eigenvalues descending, eigenvector phases fixed.
inline HermEigResult herm_eig(const cmat& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("herm_eig: matrix must be square");
    const cmat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<cmat> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("herm_eig: eigensolver failed to converge");
    const Eigen::Index n = m.rows();
    HermEigResult res;
    res.eigenvalues = rvec(n);
    res.eigenvectors = cmat(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        res.eigenvalues[k] = es.eigenvalues()[n - 1 - k];
        res.eigenvectors.col(k) = es.eigenvectors().col(n - 1 - k);
        fix_phase(res.eigenvectors.col(k));
    }
    return res;
}

/// Frobenius-nearest positive semidefinite matrix: clip negative eigenvalues.
inline cmat psd_project(const cmat& m) {
    if (!is_hermitian(m, 1e-8))
        throw std::invalid_argument("psd_project: input must be Hermitian");
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (m + m.adjoint()));
    rvec w = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

/// Largest |eigenvalue| of a Hermitian matrix (its spectral norm).
inline double spectral_norm_herm(const cmat& m) {
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (m + m.adjoint()),
                                           Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues().minCoeff()),
                    std::abs(es.eigenvalues().maxCoeff()));
}

inline double min_eigenvalue_herm(const cmat& m) {
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (m + m.adjoint()),
                                           Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace adqec
