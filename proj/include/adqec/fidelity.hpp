#pragma once

#include <variant>

#include "adqec/channels.hpp"
#include "adqec/codes.hpp"
#include "adqec/matrix.hpp"

namespace adqec {

/// Contraction of the noise Choi matrix against the encoding Choi matrix.
/// With enc: d -> n and noise: n -> n, the result lives on H_n (x) H_0 with
/// composite index [li] = l*d + i, the same pairing the fused
/// recovery-decoding Choi uses, so that
///   F_ent = (1/d^2) Tr[ X_DR * f_map(X_N, X_E) ].
/// Entry ([l'i'],[li]) = sum_{k,k'} X_N[(k,l),(k',l')] * X_E[(i,k),(i',k')].
inline cmat f_map(const ChoiMatrix& noise, const ChoiMatrix& enc) {
    const int n = noise.d_in;
    const int d = enc.d_in;
    if (noise.d_out != n || enc.d_out != n)
        throw std::invalid_argument("f_map: need noise n->n and encoding d->n");
    const cmat& XN = noise.matrix;
    const cmat& XE = enc.matrix;
    cmat out(n * d, n * d);
    for (int lp = 0; lp < n; ++lp)
        for (int ip = 0; ip < d; ++ip)
            for (int l = 0; l < n; ++l)
                for (int i = 0; i < d; ++i) {
                    complexd s = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int kp = 0; kp < n; ++kp)
                            s += XN(k * n + l, kp * n + lp) * XE(i * n + k, ip * n + kp);
                    out(lp * d + ip, l * d + i) = s;
                }
    return out;
}

/// Adjoint of f_map in the encoding slot: the unique map G with
///   Tr[X_DR f_map(X_N, X_E)] = Tr[G(X_N, X_DR) X_E]  for every X_E.
/// Output lives on H_0 (x) H_n with composite [jk] = j*n + k, matching the
/// encoding Choi convention.
inline cmat f_adjoint(const ChoiMatrix& noise, const ChoiMatrix& dr) {
    const int n = noise.d_in;
    const int d = dr.d_out;
    if (noise.d_out != n || dr.d_in != n)
        throw std::invalid_argument("f_adjoint: need noise n->n and recovery n->d");
    const cmat& XN = noise.matrix;
    const cmat& XDR = dr.matrix;
    cmat out(d * n, d * n);
    for (int jp = 0; jp < d; ++jp)
        for (int kp = 0; kp < n; ++kp)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < n; ++k) {
                    complexd s = 0.0;
                    for (int l = 0; l < n; ++l)
                        for (int lp = 0; lp < n; ++lp)
                            s += XN(k * n + l, kp * n + lp) * XDR(l * d + j, lp * d + jp);
                    out(jp * n + kp, j * n + k) = s;
                }
    return out;
}

/// Entanglement fidelity in the Choi picture: (1/d^2) Re Tr[X_DR * fmapped].
/// A non-negligible imaginary part signals an index-convention bug upstream.
inline double fidelity_from_choi(const ChoiMatrix& dr, const cmat& fmapped) {
    if (dr.matrix.rows() != fmapped.rows())
        throw std::invalid_argument("fidelity_from_choi: size mismatch");
    const complexd tr = (dr.matrix * fmapped).trace();
    if (std::abs(tr.imag()) > 1e-10)
        throw std::runtime_error("fidelity_from_choi: imaginary trace residue " +
                                 std::to_string(tr.imag()));
    const double d = static_cast<double>(dr.d_out);
    return tr.real() / (d * d);
}

/// Entanglement fidelity of a d->d channel for the maximally entangled
/// reference state: (1/d^2) sum_i |Tr K_i|^2.
inline double fidelity_direct(const KrausChannel& ch) {
    if (ch.d_in != ch.d_out)
        throw std::invalid_argument("fidelity_direct: channel must be square");
    double f = 0.0;
    for (const cmat& K : ch.kraus) {
        const complexd t = K.trace();
        f += std::norm(t);
    }
    const double d = static_cast<double>(ch.d_in);
    return f / (d * d);
}

/// A full error-correction scheme: encode 2 -> 16, noise 16 -> 16, then
/// either a 16 -> 16 recovery followed by the inverse-encoding decoder, or a
/// fused recovery+decoding map 16 -> 2 given as a Choi matrix.
struct SchemeSpec {
    CodePair code;
    KrausChannel noise;                               // 16 -> 16
    std::variant<KrausChannel, ChoiMatrix> recovery;  // 16->16 Kraus or fused 16->2 Choi
};

inline void validate_scheme(const SchemeSpec& s, double tol = kDefaultTol) {
    if (s.noise.d_in != 16 || s.noise.d_out != 16)
        throw std::invalid_argument("scheme: noise must be a 16->16 channel");
    if (!check_cptp(s.noise, tol).pass())
        throw std::invalid_argument("scheme: noise stage is not CPTP");
    if (const auto* rk = std::get_if<KrausChannel>(&s.recovery)) {
        if (rk->d_in != 16 || rk->d_out != 16)
            throw std::invalid_argument("scheme: recovery must be 16->16");
    } else {
        const auto& rc = std::get<ChoiMatrix>(s.recovery);
        if (rc.d_in != 16 || rc.d_out != 2)
            throw std::invalid_argument("scheme: fused recovery must be 16->2");
    }
}

/// Entanglement fidelity of decode . recovery . noise . encode as a 2->2 map.
/// For a 16->16 recovery the decoder applies the inverse encoding isometry;
/// amplitude left outside the code space after recovery is counted as loss
/// rather than remapped, so the figure matches the projective accounting the
/// recovery fixtures are designed for.
inline double scheme_fidelity(const SchemeSpec& s) {
    const cmat v = code_isometry(s.code);
    if (const auto* rk = std::get_if<KrausChannel>(&s.recovery)) {
        double f = 0.0;
        for (const cmat& r : rk->kraus) {
            const cmat vr = v.adjoint() * r;
            for (const cmat& nk : s.noise.kraus) {
                const complexd t = (vr * nk * v).trace();
                f += std::norm(t);
            }
        }
        return f / 4.0;
    }
    const auto& dr = std::get<ChoiMatrix>(s.recovery);
    return fidelity_from_choi(dr, f_map(kraus_to_choi(s.noise), encoding_channel(s.code)));
}

}  // namespace adqec
