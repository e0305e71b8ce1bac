#include <doctest.h>

#include <cmath>

#include "ssm/cascade.hpp"
#include "ssm/errors.hpp"
#include "ssm/oracles.hpp"
#include "ssm/random.hpp"
#include "support/brute_force.hpp"

using namespace ssm;
using testing::scalar_system;

namespace {

const DiscreteLti& hippo100() {
    static const DiscreteLti sys = hippo_system(100, 0.5e-3);
    return sys;
}

double io_scale(const DiscreteLti& sys) { return spectral_norm(sys.c()) * spectral_norm(sys.bbar()); }

}  // namespace

TEST_CASE("plan") {
    SUBCASE("zero state matrix needs one stage") {
        const DiscreteLti sys(Matrix(3, 3), Matrix::constant(3, 2, 1.0), Matrix::constant(2, 3, 1.0), Matrix(2, 2));
        const CascadePlan p = plan(sys, 1e-12);
        CHECK(p.stages == 1);
        CHECK(p.bound == 0.0);
        CHECK(p.degree() == 1);
        CHECK_FALSE(p.heuristic);
    }
    SUBCASE("scalar closed form") {
        // 0.5^16 / 0.5 > 1e-6 >= 0.5^32 / 0.5
        const CascadePlan p = plan(scalar_system(0.5, 1, 1, 0), 1e-6);
        CHECK(p.stages == 5);
        CHECK(p.bound == doctest::Approx(std::ldexp(1.0, -31)).epsilon(1e-12));
        CHECK(p.criterion == StopCriterion::lemma_bound);
        CHECK(p.powers.size() == 5);
        CHECK(p.powers[4](0, 0) == std::ldexp(1.0, -16));
        CHECK(p.heuristic_tail == doctest::Approx(std::ldexp(1.0, -32)).epsilon(1e-14));
    }
    SUBCASE("hippo with the spectral decay criterion") {
        const CascadePlan p = plan(hippo100(), 1e-12, 40, StopCriterion::spectral_decay);
        CHECK(p.stages == 15);
        CHECK(p.degree() == 32767);
        CHECK(p.heuristic);
        CHECK(p.spectral_radius == hippo100().abar()(0, 0));
    }
    SUBCASE("hippo with the other criteria") {
        // ||Abar||_2 = 0.99985 < 1, so the rigorous bound applies but needs
        // 2^S * 1.5e-4 >= 28.3, i.e. S = 18. The measured tail norm
        // ||Abar^(2^15)||_2 ~ 1e-9 (non-normal growth) pushes power-norm to 16.
        const CascadePlan lemma = plan(hippo100(), 1e-12);
        CHECK(lemma.criterion == StopCriterion::lemma_bound);
        CHECK(lemma.gamma < 1.0);
        CHECK(lemma.stages == 18);
        CHECK(lemma.bound <= 1e-12);
        CHECK(plan(hippo100(), 1e-12, 40, StopCriterion::power_norm).stages == 16);
    }
    SUBCASE("powers are successive squares") {
        Rng rng(41);
        const DiscreteLti sys = random_stable_system(6, 1, 1, 0.95, rng);
        const CascadePlan p = plan(sys, 1e-10);
        for (std::size_t s = 0; s + 1 < p.powers.size(); ++s) {
            const Matrix sq = mat_mul(p.powers[s], p.powers[s]);
            CHECK(max_abs_diff(p.powers[s + 1], sq) <= 1e-12 * max_abs(sq));
        }
        CHECK(p.bound <= 1e-10);
    }
    SUBCASE("failures") {
        CHECK_THROWS_AS(plan(scalar_system(1.2, 1, 1, 0), 1e-6), PlanningError);
        CHECK_THROWS_AS(plan(scalar_system(0.5, 1, 1, 0), 0.0), ContractError);
        try {
            plan(scalar_system(0.9, 1, 1, 0), 1e-12, 2);
            FAIL("expected PlanningError");
        } catch (const PlanningError& e) {
            CHECK(e.best_stages() == 2);
            CHECK(e.best_value() == doctest::Approx(std::pow(0.9, 4) / 0.1));
        }
        // gamma >= 1 with rho < 1: lemma is not applicable, power-norm is.
        const DiscreteLti nonnormal(Matrix{{0.5, 2.0}, {0.0, 0.5}}, Matrix{{1}, {1}}, Matrix{{1, 0}}, Matrix{{0}});
        CHECK_THROWS_AS(plan(nonnormal, 1e-8, 40, StopCriterion::lemma_bound), PlanningError);
        const CascadePlan p = plan(nonnormal, 1e-8);
        CHECK(p.criterion == StopCriterion::power_norm);
        CHECK(p.heuristic);
        CHECK(std::isnan(p.bound));
        CHECK(std::isfinite(bound(p, nonnormal)));
    }
}

TEST_CASE("apply") {
    SUBCASE("zero state matrix") {
        const DiscreteLti sys(Matrix(2, 2), Matrix{{1, 0}, {2, 1}}, Matrix{{1, -1}}, Matrix{{0.5, 0.25}});
        const SignalBlock u = random_signal(2, 17, 1);
        const auto r = apply(plan_with_stages(sys, 4), sys, u);
        for (std::size_t l = 0; l < 17; ++l) {
            // C Bbar = [-1, -1]
            const double expected = -u(0, l) - u(1, l) + 0.5 * u(0, l) + 0.25 * u(1, l);
            CHECK(r.output(0, l) == doctest::Approx(expected).epsilon(1e-15));
        }
    }
    SUBCASE("scalar impulse truncated at degree 3") {
        const DiscreteLti sys = scalar_system(0.5, 1, 1, 0);
        const auto r = apply(plan_with_stages(sys, 2), sys, impulse(1, 6));
        const double expected[] = {1, 0.5, 0.25, 0.125, 0, 0};
        for (std::size_t l = 0; l < 6; ++l) CHECK(r.output(0, l) == expected[l]);
        CHECK(r.stats.stage_count == 2);
        CHECK(r.stats.effective_stages == 2);
        CHECK(r.stats.matvec_count == 5 + 4);
    }
    SUBCASE("hippo against the recurrence") {
        const CascadePlan p = plan(hippo100(), 1e-12, 40, StopCriterion::spectral_decay);
        const SignalBlock u = random_signal(1, 4096, 2024);
        const auto r = apply(p, hippo100(), u);
        CHECK(relative_l2_error(r.output, recurrence_apply(hippo100(), u)) <= 1e-10);
        CHECK(r.stats.effective_stages == 12);
        CHECK(r.stats.flops == r.stats.matvec_count * 2 * 100 * 100);
    }
    SUBCASE("mismatches") {
        const DiscreteLti sys = scalar_system(0.5, 1, 1, 0);
        CHECK_THROWS_AS(apply(plan_with_stages(sys, 2), sys, SignalBlock(2, 4)), ContractError);
        CHECK_THROWS_AS(apply(plan_with_stages(sys, 2), sys, SignalBlock(1, 0)), ContractError);
        CHECK_THROWS_AS(apply(plan_with_stages(hippo100(), 2), sys, SignalBlock(1, 4)), ContractError);
    }
}

TEST_CASE("bound") {
    SUBCASE("zero state matrix") {
        const DiscreteLti sys(Matrix(2, 2), Matrix{{1}, {1}}, Matrix{{1, 1}}, Matrix{{0}});
        CHECK(bound(plan_with_stages(sys, 3), sys) == 0.0);
    }
    SUBCASE("scalar bound is attained at z = 1") {
        const DiscreteLti sys = scalar_system(0.5, 1, 1, 0);
        const CascadePlan p = plan_with_stages(sys, 2);
        CHECK(bound(p, sys) == doctest::Approx(0.125).epsilon(1e-15));
        const complex diff = transfer_eval(sys, 1.0)(0, 0) - truncated_transfer_eval(sys, 1.0, p.powers, 2)(0, 0);
        CHECK(std::abs(diff) == doctest::Approx(0.125).epsilon(1e-13));
    }
    SUBCASE("random 8x8 with sigma_max 0.9") {
        Rng rng(42);
        const DiscreteLti sys = random_stable_system(8, 2, 2, 0.9, rng);
        const CascadePlan p = plan_with_stages(sys, 6);
        const FrequencyCheck f = frequency_check(p, sys, 512);
        CHECK(f.max_error <= bound(p, sys));
        CHECK(f.max_error > 0.0);
    }
}

TEST_CASE("frequency_check") {
    SUBCASE("zero state matrix") {
        const DiscreteLti sys(Matrix(2, 2), Matrix{{1}, {1}}, Matrix{{1, 1}}, Matrix{{0}});
        const FrequencyCheck f = frequency_check(plan_with_stages(sys, 2), sys, 16);
        CHECK(f.max_error == 0.0);
        CHECK(f.bound == 0.0);
    }
    SUBCASE("scalar worst case at z = 1") {
        const DiscreteLti sys = scalar_system(0.5, 1, 1, 0);
        const FrequencyCheck f = frequency_check(plan_with_stages(sys, 2), sys, 512);
        CHECK(std::abs(f.max_error - 0.125) <= 1e-12);
        CHECK(std::abs(f.worst_z - complex(1.0, 0.0)) < 1e-15);
    }
    SUBCASE("hippo sweep") {
        const DiscreteLti& sys = hippo100();
        // 15 stages: the tail is governed by ||Abar^(2^15)||_2 ~ 1e-9, not by
        // d_1^(2^15) ~ 6e-15; the measured worst error is ~2.2e-9 * scale.
        const FrequencyCheck f15 = frequency_check(plan_with_stages(sys, 15), sys, 256);
        CHECK(f15.max_error <= f15.bound);
        CHECK(f15.max_error <= 1e-8 * io_scale(sys));
        const FrequencyCheck f16 = frequency_check(plan_with_stages(sys, 16), sys, 256);
        CHECK(f16.max_error <= 1e-10 * io_scale(sys));
    }
    CHECK_THROWS_AS(frequency_check(plan_with_stages(scalar_system(0.5, 1, 1, 0), 1), scalar_system(0.5, 1, 1, 0), 1),
                    ContractError);
}

TEST_CASE("property: cascade equals the brute-force truncated convolution") {
    Rng rng(43);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t m = rng.index(1, 8);
        const std::size_t p = rng.index(1, 3);
        const std::size_t q = rng.index(1, 3);
        const std::size_t length = rng.index(1, 64);
        const std::size_t stages = rng.index(1, 6);
        const DiscreteLti sys = random_stable_system(m, p, q, rng.uniform(0.2, 0.95), rng);
        const SignalBlock u = random_signal(p, length, rng.next());
        const auto r = apply(plan_with_stages(sys, stages), sys, u);
        const SignalBlock ref = testing::truncated_convolution(sys, u, std::size_t{1} << stages);
        CHECK(relative_l2_error(r.output, ref) <= 1e-11);
    }
}

TEST_CASE("property: error shrinks below the requested tolerance") {
    Rng rng(44);
    const double tols[] = {1e-4, 1e-6, 1e-8};
    for (int trial = 0; trial < 15; ++trial) {
        const DiscreteLti sys = random_stable_system(rng.index(1, 8), 1, 1, 0.9, rng);
        const SignalBlock u = random_signal(1, 1024, rng.next());
        const SignalBlock ref = recurrence_apply(sys, u);
        for (double tol : tols) {
            const CascadePlan p = plan(sys, tol);
            for (std::size_t extra = 0; extra < 2; ++extra) {
                const auto r = apply(plan_with_stages(sys, p.stages + extra), sys, u);
                CHECK(relative_l2_error(r.output, ref) <= 10 * tol);
            }
        }
    }
}

TEST_CASE("property: executed stages grow like log2 L") {
    const DiscreteLti sys = scalar_system(0.5, 1, 1, 0);
    const CascadePlan p = plan_with_stages(sys, 15);
    for (std::size_t length : {1, 2, 3, 4, 5, 8, 9, 100, 1024, 1025, 40000}) {
        const auto r = apply(p, sys, random_signal(1, length, length));
        CHECK(r.stats.effective_stages == effective_stage_count(15, length));
        std::size_t expected = 0;
        if (length >= 2) expected = std::min<std::size_t>(15, static_cast<std::size_t>(std::floor(std::log2(length - 1))) + 1);
        CHECK(r.stats.effective_stages == expected);
        std::size_t matvecs = 0;
        for (std::size_t s = 0; s < r.stats.effective_stages; ++s) matvecs += length - (std::size_t{1} << s);
        CHECK(r.stats.matvec_count == matvecs);
    }
    CHECK(effective_stage_count(3, 100) == 3);
}

TEST_CASE("property: causality") {
    Rng rng(45);
    for (int trial = 0; trial < 20; ++trial) {
        const DiscreteLti sys = random_stable_system(rng.index(1, 6), 2, 2, 0.9, rng);
        const std::size_t length = rng.index(2, 64);
        const CascadePlan p = plan_with_stages(sys, rng.index(1, 7));
        SignalBlock u = random_signal(2, length, rng.next());
        const std::size_t cut = rng.index(0, length - 1);
        const auto full = apply(p, sys, u);
        for (std::size_t l = cut + 1; l < length; ++l) u(0, l) = u(1, l) = 0.0;
        const auto truncated = apply(p, sys, u);
        for (std::size_t l = 0; l <= cut; ++l) {
            CHECK(truncated.output(0, l) == full.output(0, l));
            CHECK(truncated.output(1, l) == full.output(1, l));
        }
    }
}

TEST_CASE("property: linearity") {
    Rng rng(46);
    for (int trial = 0; trial < 20; ++trial) {
        const DiscreteLti sys = random_stable_system(rng.index(1, 8), 2, 1, 0.9, rng);
        const std::size_t length = rng.index(1, 100);
        const CascadePlan p = plan_with_stages(sys, rng.index(1, 7));
        const SignalBlock u = random_signal(2, length, rng.next());
        const SignalBlock w = random_signal(2, length, rng.next());
        const double alpha = rng.uniform(-2, 2);
        const double beta = rng.uniform(-2, 2);
        const auto lhs = apply(p, sys, testing::combine(alpha, u, beta, w));
        const SignalBlock rhs = testing::combine(alpha, apply(p, sys, u).output, beta, apply(p, sys, w).output);
        CHECK(relative_l2_error(lhs.output, rhs) <= 1e-12);
    }
}

TEST_CASE("property: frequency error respects the bound") {
    Rng rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = rng.index(1, 8);
        const DiscreteLti sys = random_stable_system(m, rng.index(1, m), rng.index(1, m), 0.9, rng);
        const CascadePlan p = plan_with_stages(sys, rng.index(1, 6));
        const FrequencyCheck f = frequency_check(p, sys, 64);
        // For m = 1 with a positive pole the bound is attained at z = 1, so
        // the two sides may differ only by rounding.
        CHECK(f.max_error <= f.bound * (1 + 1e-12));
    }
}

TEST_CASE("threaded stages are bitwise identical to the sequential update") {
    Rng rng(48);
    const DiscreteLti sys = random_stable_system(7, 2, 3, 0.95, rng);
    const CascadePlan p = plan_with_stages(sys, 7);
    const SignalBlock u = random_signal(2, 300, 9);
    const auto seq = apply(p, sys, u);
    for (unsigned threads : {2u, 3u, 5u}) {
        const auto par = apply(p, sys, u, ApplyOptions{false, threads});
        CHECK(par.output == seq.output);
        CHECK(par.stats.matvec_count == seq.stats.matvec_count);
    }
}

TEST_CASE("stage kernel is bitwise identical to mat_vec") {
    // With enough stages the cascade equals the full recurrence up to the
    // order of the additions; for a single stage and L = 2 the only power
    // application is Abar v_0, which must match mat_vec exactly.
    Rng rng(49);
    const DiscreteLti sys(random_matrix(9, 9, rng, -0.1, 0.1), Matrix::identity(9), Matrix::identity(9), Matrix(9, 9));
    SignalBlock u = random_signal(9, 2, 3);
    for (std::size_t i = 0; i < 9; ++i) u(i, 1) = 0.0;
    const auto r = apply(plan_with_stages(sys, 1), sys, u);
    const Vector v0(std::vector<double>(u.column(0).begin(), u.column(0).end()));
    const Vector expected = mat_vec(sys.abar(), v0);
    for (std::size_t i = 0; i < 9; ++i) CHECK(r.output(i, 1) == expected[i]);
}
