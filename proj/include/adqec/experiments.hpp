#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "adqec/fidelity.hpp"
#include "adqec/optimizer.hpp"
#include "adqec/recovery.hpp"
#include "adqec/serialization.hpp"

namespace adqec {

struct SweepRecord {
    double gamma = 0.0;
    std::string scheme;
    double fidelity = 0.0;
    double infidelity = 0.0;
};

struct FitResult {
    double coefficient = 0.0;  // c in infidelity = c g^2 (+ d g^3)
    double cubic = 0.0;        // d, zero when the cubic term is not fitted
    double residual = 0.0;     // rms misfit
    std::vector<double> grid;
};

/// Least-squares fit of infidelity = c g^2 (optionally + d g^3), reporting c.
inline FitResult fit_infidelity(const std::vector<SweepRecord>& records,
                                bool include_cubic = true) {
    std::vector<double> g, y;
    for (const SweepRecord& r : records)
        if (r.gamma > 0) {
            g.push_back(r.gamma);
            y.push_back(r.infidelity);
        }
    if (g.size() < 4)
        throw std::invalid_argument("fit_infidelity: need at least 4 records with gamma > 0");
    FitResult fit;
    fit.grid = g;
    std::sort(fit.grid.begin(), fit.grid.end());
    if (!include_cubic) {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            num += y[i] * g[i] * g[i];
            den += g[i] * g[i] * g[i] * g[i];
        }
        if (den <= 0) throw std::invalid_argument("fit_infidelity: degenerate grid");
        fit.coefficient = num / den;
    } else {
        double s22 = 0, s23 = 0, s33 = 0, b2 = 0, b3 = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double g2 = g[i] * g[i], g3 = g2 * g[i];
            s22 += g2 * g2;
            s23 += g2 * g3;
            s33 += g3 * g3;
            b2 += y[i] * g2;
            b3 += y[i] * g3;
        }
        const double det = s22 * s33 - s23 * s23;
        if (std::abs(det) < 1e-30)
            throw std::invalid_argument("fit_infidelity: degenerate grid");
        fit.coefficient = (b2 * s33 - b3 * s23) / det;
        fit.cubic = (s22 * b3 - s23 * b2) / det;
    }
    double ss = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double model = fit.coefficient * g[i] * g[i] + fit.cubic * g[i] * g[i] * g[i];
        ss += (y[i] - model) * (y[i] - model);
    }
    fit.residual = std::sqrt(ss / static_cast<double>(g.size()));
    return fit;
}

inline const std::vector<std::string>& scheme_names() {
    static const std::vector<std::string> names = {
        "optimized+sdp", "leung+sdp", "optimized+analytical", "optimized+fitted",
        "custom"};
    return names;
}

struct SweepConfig {
    std::vector<double> gammas;
    std::vector<std::string> schemes;
    SdpSettings settings;
    std::optional<CodePair> custom_code;  // used by the "custom" scheme
};

struct SchemeValue {
    double fidelity = 0.0;
    json detail;  // per-point sidecar (solver output for SDP schemes)
};

inline SchemeValue evaluate_scheme(const std::string& scheme, double gamma,
                                   const SdpSettings& settings,
                                   const std::optional<CodePair>& custom_code) {
    SchemeValue v;
    const KrausChannel noise = nqubit_ad(gamma, 4);
    if (scheme == "optimized+sdp" || scheme == "leung+sdp" || scheme == "custom") {
        CodePair code;
        if (scheme == "optimized+sdp") code = optimized_code(gamma);
        else if (scheme == "leung+sdp") code = leung_code();
        else if (custom_code) code = *custom_code;
        else throw std::invalid_argument("custom scheme requires a code file");
        const HalfStepResult r =
            optimal_recovery(encoding_channel(code), kraus_to_choi(noise), settings);
        v.fidelity = r.fidelity;
        v.detail["gap_bound"] = r.gap_bound;
        v.detail["converged"] = r.converged;
        v.detail["dr_choi"] = to_json(r.choi);
    } else if (scheme == "optimized+analytical") {
        const RecoveryFixture fix = analytical_recovery(gamma);
        v.fidelity = scheme_fidelity(SchemeSpec{optimized_code(gamma), noise, fix.channel});
        v.detail["completeness_defect"] = fix.completeness_defect;
    } else if (scheme == "optimized+fitted") {
        const RecoveryFixture fix = fitted_recovery(gamma);
        v.fidelity = scheme_fidelity(SchemeSpec{optimized_code(gamma), noise, fix.channel});
        v.detail["completeness_defect"] = fix.completeness_defect;
        v.detail["gamma_in_validity"] = fix.gamma_in_validity;
    } else {
        throw std::invalid_argument("unknown scheme: " + scheme);
    }
    return v;
}

/// Run work items in parallel (one per gamma x scheme), assembling results in
/// deterministic (gamma, scheme) order regardless of scheduling.
template <typename Item, typename Fn>
auto parallel_map(const std::vector<Item>& items, Fn fn)
    -> std::vector<decltype(fn(items.front()))> {
    using Out = decltype(fn(items.front()));
    const unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(items.size())));
    if (workers <= 1) {
        std::vector<Out> out;
        out.reserve(items.size());
        for (const Item& it : items) out.push_back(fn(it));
        return out;
    }
    std::vector<std::future<Out>> futs;
    futs.reserve(items.size());
    for (const Item& it : items)
        futs.push_back(std::async(std::launch::async, [&fn, it] { return fn(it); }));
    std::vector<Out> out;
    out.reserve(items.size());
    for (auto& f : futs) out.push_back(f.get());
    return out;
}

struct SweepOutput {
    std::vector<SweepRecord> records;
    json sidecar;  // full solver detail per record
};

inline SweepOutput run_sweep(const SweepConfig& config) {
    for (const std::string& s : config.schemes)
        if (std::find(scheme_names().begin(), scheme_names().end(), s) ==
            scheme_names().end())
            throw std::invalid_argument("unknown scheme: " + s);
    struct Item {
        double gamma;
        std::string scheme;
    };
    std::vector<Item> items;
    std::vector<double> sorted = config.gammas;
    std::sort(sorted.begin(), sorted.end());
    for (const double g : sorted)
        for (const std::string& s : config.schemes) items.push_back({g, s});
    auto values = parallel_map(items, [&](const Item& it) {
        return evaluate_scheme(it.scheme, it.gamma, config.settings, config.custom_code);
    });
    SweepOutput out;
    out.sidecar = json::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        SweepRecord rec;
        rec.gamma = items[i].gamma;
        rec.scheme = items[i].scheme;
        rec.fidelity = values[i].fidelity;
        rec.infidelity = 1.0 - values[i].fidelity;
        out.records.push_back(rec);
        json side;
        side["gamma"] = items[i].gamma;
        side["scheme"] = items[i].scheme;
        side["fidelity"] = values[i].fidelity;
        side["detail"] = std::move(values[i].detail);
        out.sidecar.push_back(std::move(side));
    }
    return out;
}

inline std::string format_g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out = "gamma,scheme,fidelity,infidelity\n";
    for (const SweepRecord& r : records) {
        out += format_g12(r.gamma);
        out += ',';
        out += r.scheme;
        out += ',';
        out += format_g12(r.fidelity);
        out += ',';
        out += format_g12(r.infidelity);
        out += '\n';
    }
    return out;
}

inline std::vector<SweepRecord> parse_sweep_csv(const std::string& text) {
    std::vector<SweepRecord> records;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "gamma,scheme,fidelity,infidelity")
        throw std::invalid_argument("parse_sweep_csv: bad header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        SweepRecord r;
        std::string field;
        std::getline(ls, field, ',');
        r.gamma = std::stod(field);
        std::getline(ls, r.scheme, ',');
        std::getline(ls, field, ',');
        r.fidelity = std::stod(field);
        std::getline(ls, field, ',');
        r.infidelity = std::stod(field);
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// code-subspace comparison

/// Orthonormal basis (16x2) of the subspace an encoding Choi matrix maps
/// into: the top two eigenvectors of the output marginal.
inline cmat code_subspace_from_choi(const ChoiMatrix& enc) {
    const cmat marginal = partial_trace(enc.matrix, enc.d_in, enc.d_out, 1);
    const HermEigResult eig = herm_eig(marginal);
    cmat basis(enc.d_out, 2);
    basis.col(0) = eig.eigenvectors.col(0);
    basis.col(1) = eig.eigenvectors.col(1);
    return basis;
}

/// Mean squared cosine of the principal angles between two subspaces given
/// by orthonormal bases: Tr[P_a P_b] / 2. Equal subspaces give 1.
inline double subspace_overlap(const cmat& a, const cmat& b) {
    return (a.adjoint() * b).squaredNorm() / 2.0;
}

namespace detail {

/// 16x16 permutation matrix that relabels the four qubits by perm (image of
/// each qubit slot, qubit 1 = most significant bit).
inline cmat qubit_permutation(const std::array<int, 4>& perm) {
    cmat p = cmat::Zero(16, 16);
    for (int x = 0; x < 16; ++x) {
        int y = 0;
        for (int q = 0; q < 4; ++q) {
            const int bit = (x >> (3 - q)) & 1;
            y |= bit << (3 - perm[q]);
        }
        p(y, x) = 1.0;
    }
    return p;
}

inline std::vector<std::array<int, 4>> all_qubit_permutations() {
    std::array<int, 4> p = {0, 1, 2, 3};
    std::vector<std::array<int, 4>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

/// max over local phases of ||A^dag D(phi) B||^2 / 2 by coordinate ascent;
/// each coordinate has the closed-form maximizer phi_j = -arg Tr[M0^dag M1].
inline double phase_optimized_overlap(const cmat& a, const cmat& b) {
    std::array<double, 4> phi = {0, 0, 0, 0};
    double best = 0.0;
    for (int sweep = 0; sweep < 12; ++sweep) {
        for (int j = 0; j < 4; ++j) {
            cmat m0 = cmat::Zero(2, 2), m1 = cmat::Zero(2, 2);
            for (int x = 0; x < 16; ++x) {
                double ang = 0;
                for (int q = 0; q < 4; ++q)
                    if (q != j && ((x >> (3 - q)) & 1)) ang += phi[q];
                const complexd w = std::exp(complexd(0, ang));
                const bool has_j = (x >> (3 - j)) & 1;
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c) {
                        const complexd term = std::conj(a(x, r)) * w * b(x, c);
                        (has_j ? m1 : m0)(r, c) += term;
                    }
            }
            const complexd cross = (m0.adjoint() * m1).trace();
            phi[j] = -std::arg(cross);
            const double val =
                (m0 + std::exp(complexd(0, phi[j])) * m1).squaredNorm() / 2.0;
            best = std::max(best, val);
        }
    }
    return best;
}

}  // namespace detail

/// Subspace overlap maximized over the symmetry group of i.i.d. amplitude
/// damping (qubit permutations x local phase rotations, plus complex
/// conjugation). Independent damping commutes with these unitaries, so an
/// optimization run converges to an arbitrary element of the symmetry orbit
/// of the code; the gauged overlap compares orbits rather than
/// representatives.
inline double gauged_subspace_overlap(const cmat& reference, const cmat& extracted) {
    double best = 0.0;
    for (const auto& perm : detail::all_qubit_permutations()) {
        const cmat pb = detail::qubit_permutation(perm) * extracted;
        best = std::max(best, detail::phase_optimized_overlap(reference, pb));
        best = std::max(best, detail::phase_optimized_overlap(reference, pb.conjugate()));
    }
    return best;
}

struct OverlapRecord {
    double gamma = 0.0;
    double overlap = 0.0;      // gauged
    double raw_overlap = 0.0;  // against the literal representative
    double fidelity = 0.0;
    int rounds = 0;
    bool converged = false;
};

/// For each grid gamma, run the alternating optimization and compare the
/// resulting code subspace against the damping-adapted codeword span.
inline std::vector<OverlapRecord> compare_codewords(const std::vector<double>& grid,
                                                    const SdpSettings& settings) {
    auto run_one = [&settings](double gamma) {
        OverlapRecord rec;
        rec.gamma = gamma;
        const OptimizationResult opt =
            alternate_optimize(kraus_to_choi(nqubit_ad(gamma, 4)), settings);
        const cmat extracted = code_subspace_from_choi(opt.enc_choi);
        const cmat reference = code_isometry(optimized_code(gamma));
        rec.raw_overlap = subspace_overlap(reference, extracted);
        rec.overlap = gauged_subspace_overlap(reference, extracted);
        rec.fidelity = opt.fidelity;
        rec.rounds = opt.rounds;
        rec.converged = opt.converged;
        return rec;
    };
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    return parallel_map(sorted, run_one);
}

}  // namespace adqec
