#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "adqec/matrix.hpp"

namespace adqec {

/// A channel as a finite set of Kraus operators, each d_out x d_in.
/// A physical (CPTP) channel satisfies sum_i K_i^dag K_i = I_{d_in}.
struct KrausChannel {
    int d_in = 0;
    int d_out = 0;
    std::vector<cmat> kraus;
};

/// A channel as its Choi operator on input (x) output space, with the
/// composite index [ik] = i*d_out + k (input slow, output fast):
///   X[(i*d_out+k), (i'*d_out+k')] = <k| A(|i><i'|) |k'>.
/// Complete positivity <=> X >= 0; trace preservation <=> Tr_out X = I_in.
struct ChoiMatrix {
    int d_in = 0;
    int d_out = 0;
    cmat matrix;
};

/// Column of the Choi matrix associated with one Kraus operator:
/// v[i*d_out + k] = K(k, i).
inline cvec choi_vec(const cmat& K) {
    const Eigen::Index dout = K.rows(), din = K.cols();
    cvec v(din * dout);
    for (Eigen::Index i = 0; i < din; ++i) v.segment(i * dout, dout) = K.col(i);
    return v;
}

/// Inverse of choi_vec: reshape a length d_in*d_out vector into d_out x d_in.
inline cmat choi_unvec(const cvec& v, int d_in, int d_out) {
    cmat K(d_out, d_in);
    for (int i = 0; i < d_in; ++i) K.col(i) = v.segment(i * d_out, d_out);
    return K;
}

inline double completeness_defect(const KrausChannel& ch) {
    cmat s = cmat::Zero(ch.d_in, ch.d_in);
    for (const cmat& K : ch.kraus) s += K.adjoint() * K;
    return (s - cmat::Identity(ch.d_in, ch.d_in)).norm();
}

/// Single-qubit amplitude damping: A0 = diag(1, sqrt(1-gamma)) and A1 with
/// the lone entry sqrt(gamma) mapping |1> -> |0>.
inline KrausChannel ad_kraus(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("ad_kraus: gamma must lie in [0, 1]");
    cmat a0 = cmat::Zero(2, 2), a1 = cmat::Zero(2, 2);
    a0(0, 0) = 1.0;
    a0(1, 1) = std::sqrt(1.0 - gamma);
    a1(0, 1) = std::sqrt(gamma);
    return KrausChannel{2, 2, {a0, a1}};
}

/// Hamming weight of a damping pattern = order of the error.
inline int damping_order(int pattern) {
    return std::popcount(static_cast<unsigned>(pattern));
}

/// Damping operator for one n-qubit pattern, the tensor product of A0/A1
/// picked by the bits of `pattern` (qubit 1 = most significant bit).
inline cmat damping_op(double gamma, int n, int pattern) {
    const KrausChannel ad = ad_kraus(gamma);
    cmat op = cmat::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        const int bit = (pattern >> (n - 1 - q)) & 1;
        op = kron(op, ad.kraus[bit]);
    }
    return op;
}

/// Independent amplitude damping on n qubits: 2^n Kraus operators ordered by
/// the damping pattern read as an n-bit number, ascending. kraus[m] damps the
/// qubits flagged by the bits of m.
inline KrausChannel nqubit_ad(double gamma, int n) {
    if (n < 1) throw std::invalid_argument("nqubit_ad: need at least one qubit");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("nqubit_ad: gamma must lie in [0, 1]");
    const int dim = 1 << n;
    KrausChannel ch{dim, dim, {}};
    ch.kraus.reserve(dim);
    for (int m = 0; m < dim; ++m) ch.kraus.push_back(damping_op(gamma, n, m));
    return ch;
}

inline ChoiMatrix kraus_to_choi(const KrausChannel& ch) {
    const int side = ch.d_in * ch.d_out;
    cmat X = cmat::Zero(side, side);
    for (const cmat& K : ch.kraus) {
        const cvec v = choi_vec(K);
        X.noalias() += v * v.adjoint();
    }
    return ChoiMatrix{ch.d_in, ch.d_out, std::move(X)};
}

/// Spectral decomposition of the Choi matrix back into Kraus operators:
/// one operator sqrt(lambda) * reshape(eigvec) per eigenvalue above
/// rank_tol * max eigenvalue. Throws if the Choi has a significantly
/// negative eigenvalue (not completely positive).
inline KrausChannel choi_to_kraus(const ChoiMatrix& x, double rank_tol = 1e-10) {
    const HermEigResult eig = herm_eig(x.matrix);
    const double lmax = std::max(eig.eigenvalues[0], 0.0);
    const double cut = rank_tol * std::max(lmax, 1.0);
    KrausChannel ch{x.d_in, x.d_out, {}};
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
        const double lam = eig.eigenvalues[k];
        if (lam < -cut)
            throw std::runtime_error("choi_to_kraus: negative eigenvalue " +
                                     std::to_string(lam) + "; input is not CP");
        if (lam <= cut) continue;
        ch.kraus.push_back(std::sqrt(lam) *
                           choi_unvec(eig.eigenvectors.col(k), x.d_in, x.d_out));
    }
    if (ch.kraus.empty()) ch.kraus.push_back(cmat::Zero(x.d_out, x.d_in));
    return ch;
}

/// Diagnostic report for complete positivity / trace preservation.
struct CptpReport {
    double min_eigenvalue = 0.0;  // of the Choi matrix
    double tp_deviation = 0.0;    // ||Tr_out X - I||_F
    double tol = kDefaultTol;
    bool cp_ok = false;
    bool tp_ok = false;
    bool pass() const { return cp_ok && tp_ok; }
};

inline CptpReport check_cptp(const ChoiMatrix& x, double tol = kDefaultTol) {
    CptpReport r;
    r.tol = tol;
    r.min_eigenvalue = min_eigenvalue_herm(x.matrix);
    r.tp_deviation = (partial_trace(x.matrix, x.d_in, x.d_out, 2) -
                      cmat::Identity(x.d_in, x.d_in))
                         .norm();
    r.cp_ok = r.min_eigenvalue >= -tol;
    r.tp_ok = r.tp_deviation <= tol;
    return r;
}

inline CptpReport check_cptp(const KrausChannel& ch, double tol = kDefaultTol) {
    return check_cptp(kraus_to_choi(ch), tol);
}

/// Channel composition second after first; Kraus set is all pairwise products.
inline KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
    if (first.d_out != second.d_in)
        throw std::invalid_argument("compose: dimension mismatch between stages");
    KrausChannel ch{first.d_in, second.d_out, {}};
    ch.kraus.reserve(first.kraus.size() * second.kraus.size());
    for (const cmat& a : second.kraus)
        for (const cmat& b : first.kraus) ch.kraus.push_back(a * b);
    return ch;
}

inline cmat apply_channel(const KrausChannel& ch, const cmat& rho) {
    if (rho.rows() != ch.d_in || rho.cols() != ch.d_in)
        throw std::invalid_argument("apply_channel: state dimension mismatch");
    cmat out = cmat::Zero(ch.d_out, ch.d_out);
    for (const cmat& K : ch.kraus) out.noalias() += K * rho * K.adjoint();
    return out;
}

}  // namespace adqec
