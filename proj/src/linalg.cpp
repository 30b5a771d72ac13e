#include "syntens/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace syntens {

namespace {

void check_dim(const CpTensor& t, const Vector& v, const char* who) {
    if (v.size() != t.dim) {
        throw std::invalid_argument(std::string(who) + ": vector length " +
                                    std::to_string(v.size()) + " != tensor dim " +
                                    std::to_string(t.dim));
    }
}

} // namespace

CpTensor CpTensor::zero(int d) {
    if (d <= 0) throw std::invalid_argument("CpTensor::zero: dim must be positive");
    CpTensor t;
    t.dim = d;
    t.weights = Eigen::VectorXd(0);
    t.factor_a = Matrix(0, d);
    t.factor_b = Matrix(0, d);
    t.factor_c = Matrix(0, d);
    return t;
}

void CpTensor::validate() const {
    if (dim <= 0) throw std::invalid_argument("CpTensor: dim must be positive");
    const int r = rank();
    auto check = [&](const Matrix& f, const char* name) {
        if (f.rows() != r || f.cols() != dim)
            throw std::invalid_argument(std::string("CpTensor: ") + name + " shape mismatch");
        if (!f.allFinite())
            throw std::invalid_argument(std::string("CpTensor: ") + name + " has non-finite entries");
    };
    check(factor_a, "factor_a");
    check(factor_b, "factor_b");
    check(factor_c, "factor_c");
    if (!weights.allFinite())
        throw std::invalid_argument("CpTensor: weights have non-finite entries");
    if (!std::isfinite(global_bias))
        throw std::invalid_argument("CpTensor: global bias non-finite");
}

SliceOperator::SliceOperator(const CpTensor& t, const Vector& x, double identity_scale)
    : dim_(t.dim), b_(&t.factor_b), c_(&t.factor_c), identity_(identity_scale) {
    check_dim(t, x, "SliceOperator");
    alpha_ = t.weights.cwiseProduct(t.factor_a * x);
}

Vector SliceOperator::apply(const Vector& v) const {
    if (v.size() != dim_) throw std::invalid_argument("SliceOperator::apply: dimension mismatch");
    Vector out = b_->transpose() * (alpha_.cwiseProduct(*c_ * v));
    if (identity_ != 0.0) out += identity_ * v;
    return out;
}

Vector SliceOperator::apply_transpose(const Vector& v) const {
    if (v.size() != dim_) throw std::invalid_argument("SliceOperator::apply_transpose: dimension mismatch");
    Vector out = c_->transpose() * (alpha_.cwiseProduct(*b_ * v));
    if (identity_ != 0.0) out += identity_ * v;
    return out;
}

double trilinear_apply(const CpTensor& t, const Vector& x, const Vector& y, const Vector& z) {
    check_dim(t, x, "trilinear_apply");
    check_dim(t, y, "trilinear_apply");
    check_dim(t, z, "trilinear_apply");
    if (t.rank() == 0) return 0.0;
    const Eigen::VectorXd ax = t.factor_a * x;
    const Eigen::VectorXd by = t.factor_b * y;
    const Eigen::VectorXd cz = t.factor_c * z;
    return t.weights.cwiseProduct(ax).cwiseProduct(by).dot(cz);
}

Vector contract_two(const CpTensor& t, const Vector& x, const Vector& y) {
    check_dim(t, x, "contract_two");
    check_dim(t, y, "contract_two");
    if (t.rank() == 0) return Vector::Zero(t.dim);
    const Eigen::VectorXd ax = t.factor_a * x;
    const Eigen::VectorXd by = t.factor_b * y;
    return t.factor_c.transpose() * t.weights.cwiseProduct(ax).cwiseProduct(by);
}

Vector slice_transpose_apply(const CpTensor& t, const Vector& x, const Vector& y) {
    check_dim(t, y, "slice_transpose_apply");
    return SliceOperator(t, x).apply_transpose(y);
}

SpectralEstimate slice_spectral_norm(const CpTensor& t, const Vector& x, bool add_identity,
                                     double tol, int max_iters, std::uint64_t seed) {
    check_dim(t, x, "slice_spectral_norm");
    const SliceOperator m(t, x, add_identity ? 1.0 : 0.0);

    Rng rng(seed);
    Vector v = sample_unit_sphere(t.dim, rng);

    SpectralEstimate est;
    double prev = -1.0;
    for (int it = 1; it <= max_iters; ++it) {
        const Vector mv = m.apply(v);
        const double num = mv.squaredNorm();
        const double den = v.squaredNorm();
        const double sigma = std::sqrt(num / den);
        est.value = sigma;
        est.iterations = it;
        if (sigma == 0.0) { // operator annihilates the start vector; norm estimate is 0
            est.converged = true;
            return est;
        }
        if (prev >= 0.0 && std::abs(sigma - prev) <= tol * std::max(1.0, sigma)) {
            est.converged = true;
            return est;
        }
        prev = sigma;
        Vector w = m.apply_transpose(mv);
        const double wn = w.norm();
        if (wn == 0.0) {
            est.converged = true;
            return est;
        }
        v = w / wn;
    }
    return est;
}

SliceNormCache::SliceNormCache(const CpTensor& t) {
    const int r = t.rank();
    if (r == 0) {
        gram_bc = Matrix(0, 0);
        diag_bc = Eigen::VectorXd(0);
        return;
    }
    gram_bc = (t.factor_b * t.factor_b.transpose())
                  .cwiseProduct(t.factor_c * t.factor_c.transpose());
    diag_bc = (t.factor_b.cwiseProduct(t.factor_c)).rowwise().sum();
}

double SliceNormCache::frobenius_sq(const Eigen::VectorXd& alpha, double identity_scale,
                                    int dim) const {
    double out = identity_scale * identity_scale * static_cast<double>(dim);
    if (alpha.size() > 0) {
        out += alpha.dot(gram_bc * alpha);
        if (identity_scale != 0.0) out += 2.0 * identity_scale * alpha.dot(diag_bc);
    }
    return out;
}

double slice_frobenius_sq(const CpTensor& t, const Vector& x, bool add_identity) {
    check_dim(t, x, "slice_frobenius_sq");
    const SliceNormCache cache(t);
    const Eigen::VectorXd alpha =
        t.rank() == 0 ? Eigen::VectorXd(0)
                      : Eigen::VectorXd(t.weights.cwiseProduct(t.factor_a * x));
    return cache.frobenius_sq(alpha, add_identity ? 1.0 : 0.0, t.dim);
}

double slice_frobenius_norm(const CpTensor& t, const Vector& x, bool add_identity) {
    return std::sqrt(slice_frobenius_sq(t, x, add_identity));
}

Vector sample_unit_sphere(int d, Rng& rng) {
    if (d <= 0) throw std::invalid_argument("sample_unit_sphere: d must be positive");
    Vector v(d);
    double norm = 0.0;
    do {
        for (int i = 0; i < d; ++i) v[i] = rng.normal();
        norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
}

} // namespace syntens
