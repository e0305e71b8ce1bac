#include <doctest.h>

#include <cmath>

#include "ssm/errors.hpp"
#include "ssm/lti.hpp"
#include "ssm/matrix.hpp"
#include "ssm/random.hpp"
#include "support/brute_force.hpp"

using namespace ssm;

TEST_CASE("mat_mul small cases") {
    const Matrix m{{0.3, -1.5}, {2.0, 4.25}};
    CHECK(mat_mul(Matrix::identity(2), m) == m);
    CHECK(mat_mul(Matrix{{0.5}}, Matrix{{0.5}}) == Matrix{{0.25}});
    const Matrix shear{{1, 1}, {0, 1}};
    CHECK(mat_mul(shear, shear) == Matrix{{1, 2}, {0, 1}});
}

TEST_CASE("mat_mul rejects mismatched shapes") {
    CHECK_THROWS_AS(mat_mul(Matrix(2, 3), Matrix(2, 3)), ContractError);
}

TEST_CASE("mat_vec small cases") {
    CHECK(mat_vec(Matrix::identity(3), Vector{1, 2, 3}) == Vector{1, 2, 3});
    CHECK(mat_vec(Matrix(3, 3), Vector{4, 5, 6}) == Vector{0, 0, 0});
    CHECK(mat_vec(Matrix{{2, 0}, {1, 1}}, Vector{1, 1}) == Vector{2, 2});
    CHECK_THROWS_AS(mat_vec(Matrix(2, 2), Vector{1, 2, 3}), ContractError);
}

TEST_CASE("repeated_squares") {
    SUBCASE("identity stays identity") {
        const auto p = repeated_squares(Matrix::identity(3), 4);
        REQUIRE(p.size() == 4);
        for (const auto& m : p) CHECK(m == Matrix::identity(3));
    }
    SUBCASE("scalar decay reaches 2^15") {
        const auto p = repeated_squares(Matrix{{0.999000499750125}}, 16);
        CHECK(p.back()(0, 0) == doctest::Approx(5.87548e-15).epsilon(1e-4));
    }
    SUBCASE("triangular powers keep structure and diagonal") {
        const DiscreteLti sys = hippo_system(100, 0.5e-3);
        const auto p = repeated_squares(sys.abar(), 16);
        auto diag = sys.abar().diagonal();
        for (std::size_t k = 0; k < p.size(); ++k) {
            CHECK(is_lower_triangular(p[k]));
            for (std::size_t i = 0; i < diag.size(); ++i) CHECK(p[k](i, i) == diag[i]);
            for (double& d : diag) d = d * d;
        }
    }
    CHECK_THROWS_AS(repeated_squares(Matrix(2, 3), 2), ContractError);
    CHECK_THROWS_AS(repeated_squares(Matrix(2, 2), 0), ContractError);
}

TEST_CASE("spectral_norm") {
    CHECK(spectral_norm(Matrix{{0.5, 0}, {0, 0.9}}) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(spectral_norm(Matrix(3, 4)) == 0.0);
    CHECK(spectral_norm(Matrix{{0, 1}, {0, 0}}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(spectral_norm(Matrix()), ContractError);
}

TEST_CASE("block_svd") {
    SUBCASE("outer product is rank one") {
        Matrix a(5, 4);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 4; ++j) a(i, j) = (1.0 + static_cast<double>(i)) * (0.5 - static_cast<double>(j));
        CHECK(block_svd(a, 1e-12).rank == 1);
    }
    SUBCASE("zero block is rank zero") {
        const auto svd = block_svd(Matrix(3, 3), 1e-12);
        CHECK(svd.rank == 0);
        CHECK(svd.u.rows() == 3);
        CHECK(svd.u.cols() == 0);
    }
    SUBCASE("full rank reconstruction") {
        Rng rng(7);
        const Matrix a = random_matrix(8, 8, rng);
        const auto svd = block_svd(a, 0.0);
        Matrix us = svd.u;
        for (std::size_t i = 0; i < us.rows(); ++i)
            for (std::size_t k = 0; k < svd.rank; ++k) us(i, k) *= svd.s[k];
        const Matrix residual = a - mat_mul(us, transpose(svd.v));
        CHECK(spectral_norm(residual) <= 1e-13 * svd.sigma_max);
    }
    SUBCASE("truncation error is below the cut") {
        Rng rng(8);
        const Matrix a = random_matrix(10, 6, rng);
        const auto svd = block_svd(a, 0.3);
        Matrix us = svd.u;
        for (std::size_t i = 0; i < us.rows(); ++i)
            for (std::size_t k = 0; k < svd.rank; ++k) us(i, k) *= svd.s[k];
        CHECK(svd.rank < 6);
        CHECK(spectral_norm(a - mat_mul(us, transpose(svd.v))) <= 0.3 * svd.sigma_max * (1 + 1e-12));
    }
    CHECK_THROWS_AS(block_svd(Matrix(2, 2), -1.0), ContractError);
}

TEST_CASE("solve") {
    SUBCASE("general system") {
        Rng rng(3);
        const Matrix a = random_matrix(6, 6, rng) + 3.0 * Matrix::identity(6);
        const Matrix b = random_matrix(6, 2, rng);
        const Matrix x = solve(a, b);
        CHECK(max_abs(mat_mul(a, x) - b) < 1e-13);
    }
    SUBCASE("triangular systems") {
        const Matrix lower{{2, 0, 0}, {1, 4, 0}, {-1, 2, 8}};
        const Matrix b{{2}, {5}, {9}};
        CHECK(solve(lower, b) == Matrix{{1}, {1}, {1}});
        CHECK(max_abs(mat_mul(transpose(lower), solve(transpose(lower), b)) - b) < 1e-15);
    }
    CHECK_THROWS_AS(solve(Matrix{{1, 2}, {2, 4}}, Matrix{{1}, {1}}), SingularError);
    CHECK_THROWS_AS(solve(Matrix{{1, 0}, {3, 0}}, Matrix{{1}, {1}}), SingularError);
}

TEST_CASE("spectral_radius_estimate") {
    CHECK(spectral_radius_estimate(Matrix{{0.5, 10}, {0, -0.7}}) == 0.7);
    const double t = 0.4;
    const Matrix rotation{{0.9 * std::cos(t), -0.9 * std::sin(t)}, {0.9 * std::sin(t), 0.9 * std::cos(t)}};
    CHECK(spectral_radius_estimate(rotation) == doctest::Approx(0.9).epsilon(1e-12));
    // Non-normal, non-triangular: similarity transform of a Jordan-like block.
    const Matrix jordan{{0.6, 5.0}, {0.0, 0.6}};
    const Matrix s{{1, 1}, {1, 2}};
    const Matrix sinv{{2, -1}, {-1, 1}};
    const Matrix a = mat_mul(mat_mul(s, jordan), sinv);
    const double rho = spectral_radius_estimate(a);
    CHECK(rho >= 0.6);
    CHECK(rho < 0.6 * 1.001);
    CHECK(spectral_radius_estimate(Matrix{{0, 1}, {0, 0}}) == 0.0);
}

TEST_CASE("property: mat_mul is associative to rounding") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = random_matrix(8, 8, rng);
        const Matrix b = random_matrix(8, 8, rng);
        const Matrix c = random_matrix(8, 8, rng);
        const double scale = spectral_norm(a) * spectral_norm(b) * spectral_norm(c);
        CHECK(spectral_norm(mat_mul(mat_mul(a, b), c) - mat_mul(a, mat_mul(b, c))) <= 1e-12 * scale);
    }
}

TEST_CASE("property: repeated squares match successive multiplication") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        Matrix a = random_matrix(4, 4, rng);
        a = (0.9 / spectral_norm(a)) * a;
        const auto squares = repeated_squares(a, 7);
        for (std::size_t k = 0; k < squares.size(); ++k) {
            const Matrix ref = testing::naive_power(a, std::size_t{1} << k);
            // Entries of a^64 can cancel to near zero, so the error is measured
            // against the largest entry of the reference.
            CHECK(max_abs_diff(squares[k], ref) <= 1e-12 * max_abs(ref));
        }
    }
}

TEST_CASE("property: spectral norm dominates eigenvalues of triangular matrices") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = rng.index(1, 8);
        Matrix a = random_matrix(n, n, rng, -2.0, 2.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) a(i, j) = 0.0;
        const double norm = spectral_norm(a);
        for (double lambda : a.diagonal()) CHECK(norm >= std::abs(lambda) * (1 - 1e-14));
    }
}
