#pragma once

#include <cmath>
#include <stdexcept>

#include "adqec/channels.hpp"
#include "adqec/matrix.hpp"

namespace adqec {

/// One logical qubit in four physical qubits: two orthonormal codewords.
/// Basis kets |k1 k2 k3 k4> map to index k1*8 + k2*4 + k3*2 + k4.
struct CodePair {
    double gamma = 0.0;
    cvec zero_logical;
    cvec one_logical;
};

/// Largest damping rate for which the damping-adapted codeword exists
/// (radicand of the |0000> amplitude stays positive).
inline constexpr double kMaxCodeGamma = 1.0 - 0.70710678118654752440;

inline cvec basis16(int idx) {
    cvec v = cvec::Zero(16);
    v[idx] = 1.0;
    return v;
}

/// Four-qubit code tuned to amplitude damping of rate gamma:
///   |0_L> = sqrt(1 - 1/(2(1-g)^2)) |0000> + 1/(sqrt(2)(1-g)) |1111>
///   |1_L> = (|0011> + |0101> - |1010> + |1100>) / 2
inline CodePair optimized_code(double gamma) {
    if (!(gamma >= 0.0 && gamma < kMaxCodeGamma))
        throw std::domain_error("optimized_code: gamma must lie in [0, 1 - 1/sqrt(2))");
    const double c0 = std::sqrt(1.0 - 1.0 / (2.0 * (1.0 - gamma) * (1.0 - gamma)));
    const double c1 = 1.0 / (std::sqrt(2.0) * (1.0 - gamma));
    CodePair code;
    code.gamma = gamma;
    code.zero_logical = c0 * basis16(0b0000) + c1 * basis16(0b1111);
    code.one_logical = 0.5 * (basis16(0b0011) + basis16(0b0101) -
                              basis16(0b1010) + basis16(0b1100));
    return code;
}

/// The Leung-Nielsen-Chuang-Yamamoto four-qubit amplitude damping code.
inline CodePair leung_code() {
    const double s = 1.0 / std::sqrt(2.0);
    CodePair code;
    code.gamma = 0.0;
    code.zero_logical = s * (basis16(0b0000) + basis16(0b1111));
    code.one_logical = s * (basis16(0b0011) + basis16(0b1100));
    return code;
}

/// Encoding isometry V = |0_L><0| + |1_L><1| as a 16x2 matrix.
inline cmat code_isometry(const CodePair& code) {
    cmat v(16, 2);
    v.col(0) = code.zero_logical;
    v.col(1) = code.one_logical;
    return v;
}

/// Projector onto the two-dimensional code space.
inline cmat code_projector(const CodePair& code) {
    const cmat v = code_isometry(code);
    return v * v.adjoint();
}

/// Choi matrix of the isometric encoding channel rho -> V rho V^dag.
inline ChoiMatrix encoding_channel(const CodePair& code) {
    return kraus_to_choi(KrausChannel{2, 16, {code_isometry(code)}});
}

/// Orthonormal basis of the orthocomplement of the code space, via a
/// pivoted QR of [V | I]; columns are deterministic for a fixed code.
inline cmat code_complement(const CodePair& code) {
    cmat m(16, 18);
    m.leftCols(2) = code_isometry(code);
    m.rightCols(16) = cmat::Identity(16, 16);
    Eigen::ColPivHouseholderQR<cmat> qr(m);
    cmat q = qr.householderQ() * cmat::Identity(16, 16);
    // first two columns span the code space; re-orthogonalize the rest
    // against V exactly to guard against pivot reordering
    const cmat p = code_projector(code);
    cmat comp(16, 14);
    int filled = 0;
    for (int j = 0; j < 16 && filled < 14; ++j) {
        cvec cand = q.col(j) - p * q.col(j);
        for (int k = 0; k < filled; ++k) cand -= comp.col(k).dot(cand) * comp.col(k);
        const double nrm = cand.norm();
        if (nrm > 1e-8) comp.col(filled++) = cand / nrm;
    }
    if (filled != 14)
        throw std::runtime_error("code_complement: failed to complete basis");
    return comp;
}

/// Inverse of the encoding as a trace-preserving channel: V^dag on the code
/// space, with every orthocomplement direction sent to |0>.
inline KrausChannel decoding_channel(const CodePair& code) {
    KrausChannel ch{16, 2, {}};
    ch.kraus.push_back(code_isometry(code).adjoint());
    const cmat comp = code_complement(code);
    for (int j = 0; j < comp.cols(); ++j) {
        cmat k = cmat::Zero(2, 16);
        k.row(0) = comp.col(j).adjoint();
        ch.kraus.push_back(std::move(k));
    }
    return ch;
}

}  // namespace adqec
