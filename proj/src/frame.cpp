#include "affinorm/frame.hpp"

#include "affinorm/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace affinorm {

namespace {

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double e : v) {
        s += e * e;
    }
    return std::sqrt(s);
}

} // namespace

double grad_floor(std::span<const double> x)
{
    return 1e-12 * (1.0 + norm2(x));
}

TangentFrame build_frame(std::span<const double> g, double floor)
{
    const std::size_t d = g.size();
    if (d < 2) {
        throw DimensionMismatch("build_frame: need dimension >= 2");
    }
    for (double e : g) {
        if (!std::isfinite(e)) {
            throw NonFiniteValue("build_frame: non-finite gradient");
        }
    }
    const double gn = norm2(g);
    if (!(gn > floor)) {
        throw ZeroGradient("gradient norm " + std::to_string(gn) + " at or below floor " +
                           std::to_string(floor));
    }
    TangentFrame f;
    f.grad_norm_ = gn;
    f.nu_.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        f.nu_[i] = g[i] / gn;
    }
    // w = nu + sign(nu_last) e_last keeps |w|^2 = 2(1 + |nu_last|) >= 2
    f.w_ = f.nu_;
    const double sgn = f.nu_[d - 1] >= 0.0 ? 1.0 : -1.0;
    f.w_[d - 1] += sgn;
    double ww = 0.0;
    for (double e : f.w_) {
        ww += e * e;
    }
    f.tau_ = 2.0 / ww;
    return f;
}

TangentFrame build_frame(std::span<const double> g)
{
    return build_frame(g, 1e-12);
}

void TangentFrame::lift(std::span<const double> v, std::span<double> out) const
{
    const std::size_t n = tangent_dim();
    if (v.size() != n || out.size() != n + 1) {
        throw DimensionMismatch("TangentFrame::lift: size mismatch");
    }
    std::span<const double> src = v;
    Vector rv;
    if (rotated()) {
        rv.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += rotation_[i * n + j] * v[j];
            }
            rv[i] = s;
        }
        src = rv;
    }
    // P [v; 0] = [v; 0] - tau w (w_head . v)
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += w_[i] * src[i];
    }
    const double coef = tau_ * dot;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = src[i] - coef * w_[i];
    }
    out[n] = -coef * w_[n];
}

void TangentFrame::project(std::span<const double> y, std::span<double> out) const
{
    const std::size_t n = tangent_dim();
    if (y.size() != n + 1 || out.size() != n) {
        throw DimensionMismatch("TangentFrame::project: size mismatch");
    }
    double dot = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        dot += w_[i] * y[i];
    }
    const double coef = tau_ * dot;
    if (!rotated()) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = y[i] - coef * w_[i];
        }
        return;
    }
    Vector py(n);
    for (std::size_t i = 0; i < n; ++i) {
        py[i] = y[i] - coef * w_[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += rotation_[i * n + j] * py[i];
        }
        out[j] = s;
    }
}

Vector TangentFrame::lift(std::span<const double> v) const
{
    Vector out(dim());
    lift(v, out);
    return out;
}

Vector TangentFrame::project(std::span<const double> y) const
{
    Vector out(tangent_dim());
    project(y, out);
    return out;
}

Vector TangentFrame::dense_basis() const
{
    const std::size_t d = dim();
    if (d > kDenseCap) {
        throw std::invalid_argument("dense_basis: dimension " + std::to_string(d) + " exceeds dense cap");
    }
    const std::size_t n = d - 1;
    Vector basis(d * n);
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        lift(e, std::span<double>(basis).subspan(j * d, d));
        e[j] = 0.0;
    }
    return basis;
}

TangentFrame TangentFrame::with_rotation(Vector rotation) const
{
    const std::size_t n = tangent_dim();
    if (rotation.size() != n * n) {
        throw DimensionMismatch("with_rotation: expected (d-1)^2 entries");
    }
    TangentFrame f = *this;
    f.rotation_ = std::move(rotation);
    return f;
}

TangentOperator::TangentOperator(const SparsePolynomial& poly, std::span<const double> x,
                                 const TangentFrame& frame)
    : poly_(poly), x_(x), frame_(frame), lifted_(frame.dim()), hv_(frame.dim())
{
    if (x.size() != poly.dim() || frame.dim() != poly.dim()) {
        throw DimensionMismatch("TangentOperator: point, frame and polynomial dimensions differ");
    }
}

void TangentOperator::apply(std::span<const double> v, std::span<double> out)
{
    frame_.lift(v, lifted_);
    hess_vec(poly_, x_, lifted_, hv_, &kernel_);
    frame_.project(hv_, out);
    ++hv_count_;
}

Vector tangent_op(const SparsePolynomial& poly, std::span<const double> x, const TangentFrame& frame,
                  std::span<const double> v)
{
    TangentOperator op(poly, x, frame);
    Vector out(frame.tangent_dim());
    op.apply(v, out);
    return out;
}

Vector mixed_term(const SparsePolynomial& poly, std::span<const double> x, const TangentFrame& frame,
                  KernelCounter* counter)
{
    Vector hnu(poly.dim());
    hess_vec(poly, x, frame.nu(), hnu, counter);
    return frame.project(hnu);
}

} // namespace affinorm
