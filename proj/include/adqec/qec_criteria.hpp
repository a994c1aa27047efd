#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "adqec/channels.hpp"
#include "adqec/codes.hpp"
#include "adqec/matrix.hpp"

namespace adqec {

/// The eleven damping events analyzed for the four-qubit codes: no damping,
/// the four single-qubit dampings, then the six double dampings, in this
/// fixed order.
inline const std::vector<int>& criteria_error_patterns() {
    static const std::vector<int> patterns = {
        0b0000, 0b1000, 0b0100, 0b0010, 0b0001, 0b1100,
        0b1010, 0b1001, 0b0110, 0b0101, 0b0011};
    return patterns;
}

struct ErrorSet {
    std::vector<cmat> ops;
    std::vector<int> patterns;  // damping pattern, qubit 1 = MSB
    std::vector<int> orders;    // Hamming weight of the pattern
    std::vector<std::string> labels;
};

inline ErrorSet error_set(double gamma) {
    ErrorSet set;
    for (const int p : criteria_error_patterns()) {
        set.ops.push_back(damping_op(gamma, 4, p));
        set.patterns.push_back(p);
        set.orders.push_back(damping_order(p));
        std::string label;
        for (int q = 3; q >= 0; --q) label += ((p >> q) & 1) ? '1' : '0';
        set.labels.push_back(label);
    }
    return set;
}

/// The three 11x11 code-vs-error overlap matrices. Entries follow the
/// appendix tabulation of the damping analysis, which pairs each error with
/// the adjoint of the other:  M_xy[a,b] = <x_L| E_a E_b^dag |y_L>.
/// (The plain <x_L|E_a^dag E_b|y_L> overlaps obey the same asymptotics but
/// different closed forms; the tabulated convention is the one the
/// deviation bounds are quoted for.)
struct QecMatrices {
    cmat m00, m01, m11;  // 11x11
    std::vector<std::string> error_labels;
    double gamma = 0.0;
};

inline QecMatrices qec_matrices(const CodePair& code, double gamma) {
    const ErrorSet set = error_set(gamma);
    const int n = static_cast<int>(set.ops.size());
    QecMatrices q;
    q.gamma = gamma;
    q.error_labels = set.labels;
    q.m00 = cmat(n, n);
    q.m01 = cmat(n, n);
    q.m11 = cmat(n, n);
    std::vector<cvec> a0(n), a1(n);  // E_a^dag |x_L>
    for (int a = 0; a < n; ++a) {
        a0[a] = set.ops[a].adjoint() * code.zero_logical;
        a1[a] = set.ops[a].adjoint() * code.one_logical;
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            q.m00(a, b) = a0[a].dot(a0[b]);
            q.m01(a, b) = a0[a].dot(a1[b]);
            q.m11(a, b) = a1[a].dot(a1[b]);
        }
    return q;
}

/// Residual of the overlap matrices from the exactly-correctable block
/// structure: with C_ab = (m00 + m11)/2, the violations are the logical
/// off-diagonal entries m01 and the diagonal-block mismatch (m00 - m11)/2.
/// delta_m keeps, entrywise, whichever violation dominates.
struct DeviationReport {
    cmat delta_m;
    double max_abs = 0.0;
    double gamma = 0.0;
};

inline DeviationReport deviation_max(const QecMatrices& q) {
    const Eigen::Index n = q.m01.rows();
    DeviationReport rep;
    rep.gamma = q.gamma;
    rep.delta_m = cmat(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const complexd off = q.m01(a, b);
            const complexd diag = 0.5 * (q.m00(a, b) - q.m11(a, b));
            rep.delta_m(a, b) = std::abs(off) >= std::abs(diag) ? off : diag;
        }
    rep.max_abs = rep.delta_m.cwiseAbs().maxCoeff();
    return rep;
}

enum class ErrorSubset {
    kUpToFirstOrder,  // no-damping and single-damping events (first 5)
    kAll,             // all eleven events
};

struct ResidualFit {
    double exponent = 0.0;  // log-log slope of the residual in gamma
    std::vector<double> gammas;
    std::vector<double> residuals;
};

/// Largest criteria violation at one gamma, restricted to a subset of errors.
inline double max_residual(const CodePair& code, double gamma, ErrorSubset subset) {
    const QecMatrices q = qec_matrices(code, gamma);
    const Eigen::Index k = subset == ErrorSubset::kUpToFirstOrder ? 5 : q.m01.rows();
    double r = 0.0;
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) {
            r = std::max(r, std::abs(q.m01(a, b)));
            r = std::max(r, 0.5 * std::abs(q.m00(a, b) - q.m11(a, b)));
        }
    return r;
}

/// Least-squares slope of log(residual) against log(gamma); the order at
/// which the code suppresses criteria violations on the chosen error subset.
inline ResidualFit residual_order(const std::function<CodePair(double)>& code_at,
                                  ErrorSubset subset,
                                  const std::vector<double>& gamma_grid) {
    if (gamma_grid.size() < 2)
        throw std::invalid_argument("residual_order: need at least two grid points");
    ResidualFit fit;
    for (const double g : gamma_grid) {
        if (!(g > 0.0 && g <= 0.1))
            throw std::invalid_argument("residual_order: grid must lie in (0, 0.1]");
        fit.gammas.push_back(g);
        fit.residuals.push_back(max_residual(code_at(g), g, subset));
    }
    bool degenerate = true;
    for (const double r : fit.residuals)
        if (r >= 1e-14) degenerate = false;
    if (degenerate)
        throw std::runtime_error("residual_order: residuals below 1e-14, fit degenerate");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(fit.gammas.size());
    for (std::size_t i = 0; i < fit.gammas.size(); ++i) {
        const double x = std::log(fit.gammas[i]);
        const double y = std::log(std::max(fit.residuals[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

}  // namespace adqec
