#include <Eigen/SVD>
#include <cmath>

#include "doctest.h"
#include "syntens/linalg.hpp"
#include "test_util.hpp"

using namespace syntens;
using namespace testutil;

TEST_CASE("trilinear_apply rank-1 indicator") {
    CpTensor t = CpTensor::zero(2);
    t.weights = Eigen::VectorXd::Ones(1);
    t.factor_a = t.factor_b = t.factor_c = Matrix::Zero(1, 2);
    t.factor_a(0, 0) = t.factor_b(0, 0) = t.factor_c(0, 0) = 1.0;
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    CHECK(trilinear_apply(t, e1, e1, e1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("trilinear_apply zero tensor") {
    CpTensor t = CpTensor::zero(3);
    Rng rng(7);
    const Vector x = random_vector(3, rng), y = random_vector(3, rng), z = random_vector(3, rng);
    CHECK(trilinear_apply(t, x, y, z) == 0.0);
}

TEST_CASE("trilinear_apply matches dense contraction") {
    Rng rng(11);
    const CpTensor t = random_tensor(4, 2, rng);
    const DenseTensor dt = densify(t);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_vector(4, rng), y = random_vector(4, rng),
                     z = random_vector(4, rng);
        const double got = trilinear_apply(t, x, y, z);
        const double want = dense_trilinear(dt, x, y, z);
        CHECK(rel_err(got, want) < 1e-10);
    }
}

TEST_CASE("trilinear_apply dimension mismatch") {
    CpTensor t = CpTensor::zero(3);
    const Vector ok = Vector::Zero(3), bad = Vector::Zero(4);
    CHECK_THROWS_AS(trilinear_apply(t, bad, ok, ok), std::invalid_argument);
    CHECK_THROWS_AS(trilinear_apply(t, ok, bad, ok), std::invalid_argument);
    CHECK_THROWS_AS(trilinear_apply(t, ok, ok, bad), std::invalid_argument);
}

TEST_CASE("contract_two zero tensor and hand case") {
    CpTensor z = CpTensor::zero(5);
    Rng rng(3);
    CHECK(contract_two(z, random_vector(5, rng), random_vector(5, rng)).isZero(0.0));

    // rank-1, lambda=2, a=(1,0), b=(0,1), c=(1,1); x=(1,0), y=(0,1) -> (2,2)
    CpTensor t = CpTensor::zero(2);
    t.weights = Eigen::VectorXd::Constant(1, 2.0);
    t.factor_a = Matrix::Zero(1, 2);
    t.factor_b = Matrix::Zero(1, 2);
    t.factor_c = Matrix::Ones(1, 2);
    t.factor_a(0, 0) = 1.0;
    t.factor_b(0, 1) = 1.0;
    Vector x = Vector::Zero(2), y = Vector::Zero(2);
    x[0] = 1.0;
    y[1] = 1.0;
    const Vector out = contract_two(t, x, y);
    CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("adjoint identity <z, T(x,y,.)> == T(x,y,z)") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + static_cast<int>(rng.integer(7));
        const int rank = static_cast<int>(rng.integer(5));
        const CpTensor t = random_tensor(d, rank, rng);
        const Vector x = random_vector(d, rng), y = random_vector(d, rng),
                     z = random_vector(d, rng);
        const double via_vec = z.dot(contract_two(t, x, y));
        const double direct = trilinear_apply(t, x, y, z);
        CHECK(std::abs(via_vec - direct) <= 1e-12 * (1.0 + std::abs(direct)));
    }
}

TEST_CASE("multilinearity in the middle argument") {
    Rng rng(29);
    const int d = 5;
    const CpTensor t = random_tensor(d, 3, rng);
    const Vector x = random_vector(d, rng), y = random_vector(d, rng),
                 y2 = random_vector(d, rng), z = random_vector(d, rng);
    const double a = 0.7, b = -1.3;
    const double lhs = trilinear_apply(t, x, a * y + b * y2, z);
    const double rhs = a * trilinear_apply(t, x, y, z) + b * trilinear_apply(t, x, y2, z);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
}

TEST_CASE("slice_transpose_apply equals contract_two and the dense matrix route") {
    Rng rng(31);
    CpTensor z = CpTensor::zero(4);
    CHECK(slice_transpose_apply(z, random_vector(4, rng), random_vector(4, rng)).isZero(0.0));

    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + static_cast<int>(rng.integer(5));
        const CpTensor t = random_tensor(d, 1 + static_cast<int>(rng.integer(4)), rng);
        const Vector x = random_vector(d, rng), y = random_vector(d, rng);
        const Vector via_slice = slice_transpose_apply(t, x, y);
        const Vector via_contract = contract_two(t, x, y);
        CHECK((via_slice - via_contract).norm() <= 1e-12 * (1.0 + via_contract.norm()));
    }

    // dense oracle: build M by loops, then M^T y
    const CpTensor t = random_tensor(3, 2, rng);
    const DenseTensor dt = densify(t);
    const Vector x = random_vector(3, rng), y = random_vector(3, rng);
    const Matrix m = dense_slice(dt, x, false);
    const Vector want = m.transpose() * y;
    const Vector got = slice_transpose_apply(t, x, y);
    CHECK((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
}

TEST_CASE("slice_spectral_norm identity and diagonal cases") {
    CpTensor z = CpTensor::zero(4);
    const Vector x = Vector::Ones(4);
    const SpectralEstimate id = slice_spectral_norm(z, x, /*add_identity=*/true);
    CHECK(id.converged);
    CHECK(id.value == 1.0);

    const SpectralEstimate zero = slice_spectral_norm(z, x, /*add_identity=*/false);
    CHECK(zero.converged);
    CHECK(zero.value == 0.0);

    // slice at e1 equal to diag(3, 1)
    CpTensor t = CpTensor::zero(2);
    t.weights = Eigen::VectorXd(2);
    t.weights << 3.0, 1.0;
    t.factor_a = Matrix::Zero(2, 2);
    t.factor_b = Matrix::Zero(2, 2);
    t.factor_c = Matrix::Zero(2, 2);
    t.factor_a(0, 0) = 1.0;
    t.factor_b(0, 0) = 1.0;
    t.factor_c(0, 0) = 1.0;
    t.factor_a(1, 0) = 1.0;
    t.factor_b(1, 1) = 1.0;
    t.factor_c(1, 1) = 1.0;
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    const SpectralEstimate diag = slice_spectral_norm(t, e1, /*add_identity=*/false);
    CHECK(diag.converged);
    CHECK(diag.value == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("slice_spectral_norm matches dense SVD") {
    Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const CpTensor t = random_tensor(6, 3, rng);
        const Vector x = random_vector(6, rng);
        const bool add_id = trial % 2 == 0;
        const DenseTensor dt = densify(t);
        const Matrix m = dense_slice(dt, x, add_id);
        Eigen::JacobiSVD<Matrix> svd(m);
        const double want = svd.singularValues()[0];
        const SpectralEstimate got = slice_spectral_norm(t, x, add_id);
        CHECK(got.converged);
        CHECK(rel_err(got.value, want) < 1e-6);
    }
}

TEST_CASE("slice_frobenius identity cases") {
    CpTensor z = CpTensor::zero(25);
    const Vector x = Vector::Ones(25);
    CHECK(slice_frobenius_norm(z, x, true) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(slice_frobenius_norm(z, x, false) == 0.0);
}

TEST_CASE("slice_frobenius matches dense computation") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng.integer(7));
        const CpTensor t = random_tensor(d, 1 + static_cast<int>(rng.integer(4)), rng);
        const Vector x = random_vector(d, rng);
        const bool add_id = trial % 2 == 0;
        const Matrix m = dense_slice(densify(t), x, add_id);
        const double want = m.norm(); // Frobenius in Eigen
        const double got = slice_frobenius_norm(t, x, add_id);
        CHECK(rel_err(got, want) < 1e-10);
    }
}

TEST_CASE("sample_unit_sphere basics") {
    Rng rng(43);
    SUBCASE("d=1 gives +1 or -1") {
        for (int i = 0; i < 10; ++i) {
            const Vector v = sample_unit_sphere(1, rng);
            CHECK(std::abs(std::abs(v[0]) - 1.0) <= 1e-12);
        }
    }
    SUBCASE("unit norm") {
        for (int d : {2, 3, 17, 300}) {
            const Vector v = sample_unit_sphere(d, rng);
            CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
        }
    }
    SUBCASE("seed determinism") {
        Rng r1(99), r2(99);
        const Vector a = sample_unit_sphere(8, r1);
        const Vector b = sample_unit_sphere(8, r2);
        CHECK((a - b).norm() == 0.0);
    }
    SUBCASE("rejects non-positive dimension") {
        CHECK_THROWS_AS(sample_unit_sphere(0, rng), std::invalid_argument);
        CHECK_THROWS_AS(sample_unit_sphere(-2, rng), std::invalid_argument);
    }
}

TEST_CASE("sample_unit_sphere isotropy (Monte Carlo)") {
    Rng rng(47);
    const int d = 3, samples = 100000;
    Vector mean = Vector::Zero(d);
    for (int s = 0; s < samples; ++s) mean += sample_unit_sphere(d, rng);
    mean /= static_cast<double>(samples);
    const double sigma = 1.0 / std::sqrt(static_cast<double>(d) * samples);
    for (int i = 0; i < d; ++i) CHECK(std::abs(mean[i]) < 4.0 * sigma);
}

TEST_CASE("CP equals dense on random small instances") {
    Rng rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 2 + static_cast<int>(rng.integer(7));  // <= 8
        const int rank = static_cast<int>(rng.integer(5));   // <= 4
        const CpTensor t = random_tensor(d, rank, rng);
        const DenseTensor dt = densify(t);
        const Vector x = random_vector(d, rng), y = random_vector(d, rng),
                     z = random_vector(d, rng);
        CHECK(rel_err(trilinear_apply(t, x, y, z), dense_trilinear(dt, x, y, z)) < 1e-10);
        const Vector c2 = contract_two(t, x, y);
        const Vector cd = dense_contract_two(dt, x, y);
        CHECK((c2 - cd).norm() <= 1e-10 * (1.0 + cd.norm()));
    }
}

TEST_CASE("CpTensor validate") {
    CpTensor t = CpTensor::zero(3);
    CHECK_NOTHROW(t.validate());
    t.weights = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(t.validate(), std::invalid_argument); // factor shape mismatch
}
