#include <catch2/catch_amalgamated.hpp>

#include "adqec/fidelity.hpp"
#include "adqec/recovery.hpp"
#include "test_helpers.hpp"

using namespace adqec;
using adqec::test::max_abs_diff;

TEST_CASE("analytical recovery is exactly trace preserving", "[recovery]") {
    for (const double g : {0.0, 0.02, 0.1, 0.2, 0.28}) {
        const RecoveryFixture fix = analytical_recovery(g);
        REQUIRE(fix.channel.kraus.size() == 8);
        REQUIRE(fix.completeness_defect < 1e-12);
        REQUIRE(check_cptp(fix.channel, 1e-12).pass());
    }
    REQUIRE_THROWS_AS(analytical_recovery(0.3), std::domain_error);
}

TEST_CASE("first operator projects the single-damping syndrome back",
          "[recovery]") {
    const double g = 0.07;
    const CodePair code = optimized_code(g);
    const RecoveryFixture fix = analytical_recovery(g);
    const cmat e1000 = damping_op(g, 4, 0b1000);
    adqec::test::Rand rng(51);
    for (int rep = 0; rep < 6; ++rep) {
        const double th = rng.unit() * M_PI, ph = rng.unit() * 2.0 * M_PI;
        const cvec psi = std::cos(th / 2.0) * code.zero_logical +
                         std::exp(complexd(0, ph)) * std::sin(th / 2.0) *
                             code.one_logical;
        const cvec recovered = fix.channel.kraus[0] * (e1000 * psi);
        const double overlap = std::abs(psi.dot(recovered)) / recovered.norm();
        REQUIRE(overlap == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("alpha and beta", "[recovery]") {
    const AlphaBeta at0 = alpha_beta(0.0);
    REQUIRE(at0.alpha == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    REQUIRE(at0.alpha * at0.alpha + at0.beta * at0.beta ==
            Catch::Approx(1.0).margin(1e-14));

    const AlphaBeta ab = alpha_beta(0.05);
    const double expect = std::sqrt(1.0 - 1.0 / (2.0 * 0.9025)) + 0.71 * 0.05 +
                          0.76 * 0.05 * 0.05;
    REQUIRE(ab.alpha == Catch::Approx(expect).epsilon(1e-12));
    REQUIRE(ab.alpha == Catch::Approx(0.70521987).epsilon(1e-7));
    REQUIRE_FALSE(ab.clamped);

    // the exact minimizer of the balancing objective drives the residual
    // to ~0 and differs from the series value
    REQUIRE(ab.exact_residual < 1e-10);
    REQUIRE(ab.exact_residual <= ab.series_residual);

    REQUIRE_THROWS_AS(alpha_beta(0.995), std::domain_error);
}

TEST_CASE("fitted recovery constants and flags", "[recovery]") {
    const RecoveryFixture fix = fitted_recovery(0.1);
    REQUIRE(fix.channel.kraus.size() == 10);
    REQUIRE(fix.gamma_in_validity);

    const double lo = std::sqrt(1.0 - 2.0 * std::sqrt(2.0) * 0.01) / std::sqrt(2.0);
    REQUIRE(lo == Catch::Approx(0.69703505).epsilon(1e-7));
    // R1 carries -lo on the <0000| column of |0_L>
    const CodePair code = optimized_code(0.1);
    const complexd entry = code.zero_logical.dot(fix.channel.kraus[0].col(0));
    REQUIRE(entry.real() == Catch::Approx(-lo).epsilon(1e-12));

    // (entry-)^2 + (entry+)^2 = 1 exactly
    const double hi = std::sqrt(1.0 + 2.0 * std::sqrt(2.0) * 0.01) / std::sqrt(2.0);
    REQUIRE(lo * lo + hi * hi == Catch::Approx(1.0).margin(1e-15));

    REQUIRE_FALSE(fitted_recovery(0.15).gamma_in_validity);
    REQUIRE(fitted_recovery(0.05).gamma_in_validity);
}

TEST_CASE("fitted recovery completeness defect stays small in range",
          "[recovery]") {
    for (double g = 0.01; g <= 0.1; g += 0.01) {
        const RecoveryFixture fix = fitted_recovery(g);
        REQUIRE(fix.completeness_defect < 5e-3);
    }
}

TEST_CASE("analytical recovery corrects first-order damping exactly",
          "[recovery]") {
    for (const double g : {0.03, 0.1, 0.2}) {
        const CodePair code = optimized_code(g);
        const FirstOrderReport rep =
            verify_first_order(code, analytical_recovery(g), g);
        REQUIRE(rep.min_first_order_fidelity == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("two-qubit dampings reachable from |0_L> are corrected", "[recovery]") {
    const double g = 0.09;
    const CodePair code = optimized_code(g);
    const RecoveryFixture fix = analytical_recovery(g);
    for (const int pattern : {0b0110, 0b1001}) {
        const cvec damaged = damping_op(g, 4, pattern) * code.zero_logical;
        REQUIRE(damaged.norm() > 0);
        const cmat rho =
            apply_channel(fix.channel, damaged * damaged.adjoint() / damaged.squaredNorm());
        const double f =
            (code.zero_logical.adjoint() * rho * code.zero_logical)(0, 0).real() /
            rho.trace().real();
        REQUIRE(f == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("no error at gamma = 0 is a fixed point", "[recovery]") {
    const CodePair code = optimized_code(0.0);
    const FirstOrderReport rep = verify_first_order(code, analytical_recovery(0.0), 0.0);
    REQUIRE(rep.entries[0].error_label == "0000");
    REQUIRE(rep.entries[0].min_fidelity == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("fitted recovery also fixes first-order damping approximately",
          "[recovery]") {
    const double g = 0.05;
    const FirstOrderReport rep =
        verify_first_order(optimized_code(g), fitted_recovery(g), g);
    // the printed four-decimal constants limit the accuracy
    REQUIRE(rep.min_first_order_fidelity > 1.0 - 5e-3);
}
