#pragma once

#include "affinorm/polynomial.hpp"

#include <span>
#include <vector>

namespace affinorm {

// Gradient norms at or below this are treated as critical points.
double grad_floor(std::span<const double> x);

// Unit normal nu = g/|g| plus an orthonormal tangent basis T held implicitly as
// the first d-1 columns of a Householder reflector P = I - tau w w^T with
// P e_{d-1} = -sign(nu_{d-1}) nu. An optional (d-1)x(d-1) orthogonal matrix R
// switches to the completion T R.
class TangentFrame {
public:
    std::size_t dim() const { return nu_.size(); }
    std::size_t tangent_dim() const { return nu_.size() - 1; }
    const Vector& nu() const { return nu_; }
    double grad_norm() const { return grad_norm_; }
    bool rotated() const { return !rotation_.empty(); }

    // out = T v
    void lift(std::span<const double> v, std::span<double> out) const;
    // out = T^T y
    void project(std::span<const double> y, std::span<double> out) const;

    Vector lift(std::span<const double> v) const;
    Vector project(std::span<const double> y) const;

    // Column-major d x (d-1) copy of T. Refuses dimensions above kDenseCap.
    Vector dense_basis() const;

    // Same normal, basis T R. R is row-major, must be orthogonal.
    TangentFrame with_rotation(Vector rotation) const;

    friend TangentFrame build_frame(std::span<const double> g, double floor);

private:
    Vector nu_;
    Vector w_;
    double tau_ = 0.0;
    double grad_norm_ = 0.0;
    Vector rotation_;
};

// Throws ZeroGradient when |g| <= floor.
TangentFrame build_frame(std::span<const double> g, double floor);
TangentFrame build_frame(std::span<const double> g);

// Matrix-free tangent Hessian v -> T^T H(x) T v. Holds private scratch, so one
// instance per thread. Counts Hessian-vector products.
class TangentOperator {
public:
    TangentOperator(const SparsePolynomial& poly, std::span<const double> x, const TangentFrame& frame);

    std::size_t size() const { return frame_.tangent_dim(); }
    void apply(std::span<const double> v, std::span<double> out);
    std::int64_t hv_count() const { return hv_count_; }
    const KernelCounter& kernel_counter() const { return kernel_; }

private:
    const SparsePolynomial& poly_;
    std::span<const double> x_;
    const TangentFrame& frame_;
    Vector lifted_;
    Vector hv_;
    std::int64_t hv_count_ = 0;
    KernelCounter kernel_;
};

Vector tangent_op(const SparsePolynomial& poly, std::span<const double> x, const TangentFrame& frame,
                  std::span<const double> v);

// h = T^T H(x) nu, one Hessian-vector product.
Vector mixed_term(const SparsePolynomial& poly, std::span<const double> x, const TangentFrame& frame,
                  KernelCounter* counter = nullptr);

} // namespace affinorm
