#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>

#include "syntens/rng.hpp"

namespace syntens {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Third-order d x d x d tensor held in CP-factored form:
///
///   T = sum_r weights[r] * a_r (x) b_r (x) c_r
///
/// where a_r, b_r, c_r are rows of the three factor matrices (R x d each).
/// The three factors are independent; T is not assumed symmetric. Rank 0 is a
/// valid state and means T == 0. Also carries the per-root-word biases and the
/// global bias used by the tensor training objective, since they are trained,
/// stored, and shipped together with the factors.
struct CpTensor {
    int dim = 0;
    Eigen::VectorXd weights;             // R
    Matrix factor_a, factor_b, factor_c; // R x d
    std::unordered_map<std::uint32_t, double> root_bias;
    double global_bias = 0.0;

    CpTensor() = default;

    int rank() const { return static_cast<int>(weights.size()); }

    static CpTensor zero(int d);

    /// Bias for a root word, 0.0 if never touched.
    double root_bias_or_zero(std::uint32_t id) const {
        auto it = root_bias.find(id);
        return it == root_bias.end() ? 0.0 : it->second;
    }

    /// Throws std::invalid_argument if shapes are inconsistent or entries non-finite.
    void validate() const;
};

/// Result of the iterative spectral norm estimate.
struct SpectralEstimate {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// The d x d operator M = T(x,.,.) (+ beta I), kept factored:
///   M = sum_r alpha_r * b_r c_r^T + beta I,  alpha_r = weights[r] * <a_r, x>.
/// Never materializes the dense matrix; apply() and apply_transpose() cost O(Rd).
class SliceOperator {
public:
    SliceOperator(const CpTensor& t, const Vector& x, double identity_scale = 0.0);

    Vector apply(const Vector& v) const;           // M v
    Vector apply_transpose(const Vector& v) const; // M^T v

    int dim() const { return dim_; }
    double identity_scale() const { return identity_; }
    const Eigen::VectorXd& coeffs() const { return alpha_; }

private:
    int dim_;
    Eigen::VectorXd alpha_;
    const Matrix* b_;
    const Matrix* c_;
    double identity_;
};

/// T(x,y,z) = sum_r weights[r] <a_r,x> <b_r,y> <c_r,z>.
double trilinear_apply(const CpTensor& t, const Vector& x, const Vector& y, const Vector& z);

/// T(x,y,.) = sum_r weights[r] <a_r,x> <b_r,y> c_r. Satisfies
/// <z, contract_two(T,x,y)> == trilinear_apply(T,x,y,z).
Vector contract_two(const CpTensor& t, const Vector& x, const Vector& y);

/// [T(x,.,.)]^T y, computed through the factored slice operator. Equal to
/// contract_two(t, x, y) but exercises the matrix-route identity.
Vector slice_transpose_apply(const CpTensor& t, const Vector& x, const Vector& y);

/// Largest singular value of T(x,.,.) (+ I when add_identity), by power
/// iteration on M^T M. Seeded start vector; tolerance on successive estimates.
SpectralEstimate slice_spectral_norm(const CpTensor& t, const Vector& x, bool add_identity,
                                     double tol = 1e-8, int max_iters = 1000,
                                     std::uint64_t seed = 0);

/// Squared Frobenius norm of T(x,.,.) (+ I), computed from the CP factors via
/// Gram algebra; the dense matrix is never formed.
double slice_frobenius_sq(const CpTensor& t, const Vector& x, bool add_identity);

/// Frobenius norm (square root of slice_frobenius_sq).
double slice_frobenius_norm(const CpTensor& t, const Vector& x, bool add_identity);

/// Precomputed Gram products for repeated Frobenius evaluations against the
/// same tensor (the Gram matrices do not depend on the slicing vector).
struct SliceNormCache {
    explicit SliceNormCache(const CpTensor& t);
    double frobenius_sq(const Eigen::VectorXd& alpha, double identity_scale, int dim) const;

    Matrix gram_bc;          // (B B^T) .* (C C^T), R x R
    Eigen::VectorXd diag_bc; // <b_r, c_r>
};

/// Uniform sample from the unit sphere in R^d (Gaussian draw, normalized).
Vector sample_unit_sphere(int d, Rng& rng);

} // namespace syntens
