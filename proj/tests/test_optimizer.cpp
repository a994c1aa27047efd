#include <catch2/catch_amalgamated.hpp>

#include "adqec/optimizer.hpp"
#include "adqec/recovery.hpp"
#include "test_helpers.hpp"

using namespace adqec;
using adqec::test::Rand;
using adqec::test::max_abs_diff;

namespace {

SdpSettings fast_settings() {
    SdpSettings s;
    s.tol = 1e-9;
    s.restarts = 2;
    s.max_rounds = 12;
    return s;
}

}  // namespace

TEST_CASE("cptp_project fixed point and zero input", "[optimizer]") {
    const ChoiMatrix feasible = kraus_to_choi(ad_kraus(0.2));
    const ChoiMatrix again = cptp_project(feasible.matrix, 2, 2);
    REQUIRE((again.matrix - feasible.matrix).norm() < 1e-9);

    const ChoiMatrix from_zero = cptp_project(cmat::Zero(4, 4), 2, 2);
    REQUIRE((from_zero.matrix - 0.5 * cmat::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("cptp_project output is always CPTP", "[optimizer]") {
    Rand rng(61);
    for (int rep = 0; rep < 5; ++rep) {
        const cmat h = rng.hermitian(8);
        const ChoiMatrix x = cptp_project(h, 4, 2, 1e-10);
        REQUIRE(check_cptp(x, 1e-9).pass());
    }
    REQUIRE_THROWS_AS(cptp_project(cmat::Zero(4, 4), 4, 2), std::invalid_argument);
}

TEST_CASE("constant objective: trace constraint pins the value", "[optimizer]") {
    SdpSettings s;
    const SolveResult r = solve_linear_cptp_max(cmat::Identity(8, 8), 4, 2, s);
    REQUIRE(r.objective == Catch::Approx(4.0).margin(1e-7));
    REQUIRE(check_cptp(r.choi, 1e-8).pass());
}

TEST_CASE("interior point and projected gradient agree on random objectives",
          "[optimizer]") {
    Rand rng(62);
    for (int rep = 0; rep < 3; ++rep) {
        const cmat C = rng.hermitian(4);
        SdpSettings ip;
        SdpSettings pg;
        pg.method = SdpMethod::kProjectedGradient;
        pg.tol = 1e-10;
        pg.max_iters = 20000;
        const SolveResult a = solve_linear_cptp_max(C, 2, 2, ip);
        const SolveResult b = solve_linear_cptp_max(C, 2, 2, pg);
        REQUIRE(a.objective == Catch::Approx(b.objective).margin(5e-5));
        REQUIRE(a.gap_bound < 1e-7);
        REQUIRE(check_cptp(a.choi, 1e-8).pass());
        REQUIRE(check_cptp(b.choi, 1e-8).pass());
        // the certified value dominates any feasible point's objective
        REQUIRE(a.objective + a.gap_bound >= b.objective - 1e-9);
    }
}

TEST_CASE("perfect correction at gamma = 0", "[optimizer]") {
    const ChoiMatrix noise = kraus_to_choi(nqubit_ad(0.0, 4));
    const ChoiMatrix enc = encoding_channel(optimized_code(0.0));
    SdpSettings s;
    const HalfStepResult r = optimal_recovery(enc, noise, s);
    REQUIRE(r.fidelity == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("optimal recovery reproduces the reference fidelities at gamma = 0.05",
          "[optimizer]") {
    const double g = 0.05;
    const ChoiMatrix noise = kraus_to_choi(nqubit_ad(g, 4));
    SdpSettings s;

    const HalfStepResult opt =
        optimal_recovery(encoding_channel(optimized_code(g)), noise, s);
    REQUIRE(opt.fidelity == Catch::Approx(1.0 - 1.09 * g * g).margin(5e-4));
    REQUIRE(opt.gap_bound < 1e-7);

    const HalfStepResult leung =
        optimal_recovery(encoding_channel(leung_code()), noise, s);
    REQUIRE(leung.fidelity == Catch::Approx(1.0 - 1.25 * g * g).margin(5e-4));

    REQUIRE(opt.fidelity > leung.fidelity);
}

TEST_CASE("optimal recovery dominates the analytical fixture", "[optimizer]") {
    const double g = 0.06;
    const ChoiMatrix noise = kraus_to_choi(nqubit_ad(g, 4));
    SdpSettings s;
    const HalfStepResult opt =
        optimal_recovery(encoding_channel(optimized_code(g)), noise, s);
    const double analytical = scheme_fidelity(
        SchemeSpec{optimized_code(g), nqubit_ad(g, 4), analytical_recovery(g).channel});
    REQUIRE(opt.fidelity >= analytical - 1e-6);
}

TEST_CASE("re-optimizing the encoding never loses fidelity", "[optimizer]") {
    const double g = 0.05;
    const ChoiMatrix noise = kraus_to_choi(nqubit_ad(g, 4));
    SdpSettings s;
    const ChoiMatrix enc = encoding_channel(optimized_code(g));
    const HalfStepResult rec = optimal_recovery(enc, noise, s);
    const HalfStepResult enc2 = optimal_encoding(rec.choi, noise, s);
    REQUIRE(enc2.fidelity >= rec.fidelity - 1e-8);
}

TEST_CASE("optimal encoding achieves perfect fidelity at gamma = 0", "[optimizer]") {
    const ChoiMatrix noise = kraus_to_choi(nqubit_ad(0.0, 4));
    SdpSettings s;
    const ChoiMatrix dr = kraus_to_choi(decoding_channel(optimized_code(0.0)));
    const HalfStepResult r = optimal_encoding(dr, noise, s);
    REQUIRE(r.fidelity == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("solver beats random search on the single-qubit instance", "[optimizer]") {
    const double g = 0.1;
    const ChoiMatrix noise = kraus_to_choi(ad_kraus(g));
    const ChoiMatrix enc_id = kraus_to_choi(KrausChannel{2, 2, {cmat::Identity(2, 2)}});
    const cmat C = f_map(noise, enc_id);
    SdpSettings s;
    const SolveResult r = solve_linear_cptp_max(C, 2, 2, s);

    // identity recovery value
    const double f_id =
        (kraus_to_choi(KrausChannel{2, 2, {cmat::Identity(2, 2)}}).matrix * C)
            .trace()
            .real();
    REQUIRE(r.objective >= f_id - 1e-9);

    double best_random = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const ChoiMatrix cand = random_cptp(2, 2, 9000 + i);
        best_random = std::max(best_random, (cand.matrix * C).trace().real());
    }
    REQUIRE(r.objective >= best_random - 1e-9);
}

TEST_CASE("random_cptp determinism and spread", "[optimizer]") {
    const ChoiMatrix a = random_cptp(2, 16, 42);
    const ChoiMatrix b = random_cptp(2, 16, 42);
    REQUIRE(max_abs_diff(a.matrix, b.matrix) == 0.0);
    REQUIRE(check_cptp(a, 1e-9).pass());

    const ChoiMatrix c = random_cptp(2, 16, 43);
    REQUIRE((a.matrix - c.matrix).norm() > 1e-3);

    const ChoiMatrix small = random_cptp(4, 2, 7);
    REQUIRE(check_cptp(small, 1e-9).pass());
}

TEST_CASE("snap_to_isometry returns an isometric encoding", "[optimizer]") {
    const ChoiMatrix enc = random_cptp(2, 16, 5);
    const ChoiMatrix snapped = snap_to_isometry(enc);
    const KrausChannel k = choi_to_kraus(snapped);
    REQUIRE(k.kraus.size() == 1);
    REQUIRE((k.kraus[0].adjoint() * k.kraus[0] - cmat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("alternating optimization at gamma = 0 finds perfect fidelity",
          "[optimizer]") {
    const ChoiMatrix noise = kraus_to_choi(nqubit_ad(0.0, 4));
    SdpSettings s = fast_settings();
    s.max_rounds = 4;
    const OptimizationResult r = alternate_optimize(noise, s);
    REQUIRE(r.fidelity == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(r.rounds <= 4);
}

TEST_CASE("alternation trace is nondecreasing and self-consistent", "[optimizer]") {
    const double g = 0.05;
    const ChoiMatrix noise = kraus_to_choi(nqubit_ad(g, 4));
    SdpSettings s = fast_settings();
    s.restarts = 1;
    s.max_rounds = 8;
    const OptimizationResult r = alternate_optimize(noise, s);
    for (std::size_t i = 1; i < r.fidelity_trace.size(); ++i)
        REQUIRE(r.fidelity_trace[i] >= r.fidelity_trace[i - 1] - 1e-9);
    const double check = fidelity_from_choi(r.dr_choi, f_map(noise, r.enc_choi));
    REQUIRE(r.fidelity == Catch::Approx(check).margin(1e-9));
    REQUIRE(check_cptp(r.enc_choi, 1e-8).pass());
    REQUIRE(check_cptp(r.dr_choi, 1e-8).pass());
}

TEST_CASE("settings validation", "[optimizer]") {
    SdpSettings bad;
    bad.restarts = 0;
    REQUIRE_THROWS_AS(validate_settings(bad), std::invalid_argument);
    SdpSettings neg;
    neg.tol = -1.0;
    REQUIRE_THROWS_AS(validate_settings(neg), std::invalid_argument);
    REQUIRE_THROWS_AS(
        solve_linear_cptp_max(cmat::Random(4, 4), 2, 2, SdpSettings{}),
        std::invalid_argument);
}
