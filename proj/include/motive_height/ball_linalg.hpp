#ifndef MOTIVE_HEIGHT_BALL_LINALG_HPP
#define MOTIVE_HEIGHT_BALL_LINALG_HPP

#include <cmath>
#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "ball.hpp"

namespace motive_height
{

namespace detail
{

inline double approx_magnitude(const Complex &z)
{
    return std::hypot(z.re().mid_double(), z.im().mid_double());
}

// Index of the row >= col whose entry in column col excludes zero and has the
// largest midpoint magnitude; -1 when every candidate contains zero.
inline long choose_pivot(const ComplexMatrix &m, std::size_t col, std::size_t from)
{
    long best = -1;
    double best_mag = -1.0;
    for (std::size_t i = from; i < m.rows(); ++i) {
        if (m(i, col).contains_zero()) {
            continue;
        }
        double mag = approx_magnitude(m(i, col));
        if (mag > best_mag) {
            best_mag = mag;
            best = static_cast<long>(i);
        }
    }
    return best;
}

} // namespace detail

/// Certified solve of a x = b for square a. Returns nullopt when elimination
/// meets a pivot column whose entries all contain zero (a is singular or too
/// ill-conditioned for the working precision).
inline std::optional<ComplexMatrix> try_solve(ComplexMatrix a, ComplexMatrix b)
{
    if (!a.is_square() || a.rows() != b.rows()) {
        throw std::invalid_argument("try_solve: dimension mismatch");
    }
    const std::size_t n = a.rows();
    for (std::size_t col = 0; col < n; ++col) {
        long piv = detail::choose_pivot(a, col, col);
        if (piv < 0) {
            return std::nullopt;
        }
        a.swap_rows(col, static_cast<std::size_t>(piv));
        b.swap_rows(col, static_cast<std::size_t>(piv));
        for (std::size_t i = col + 1; i < n; ++i) {
            Complex f = a(i, col) / a(col, col);
            a(i, col) = Complex(Real(0, f.precision()));
            for (std::size_t j = col + 1; j < n; ++j) {
                a(i, j) -= f * a(col, j);
            }
            for (std::size_t j = 0; j < b.cols(); ++j) {
                b(i, j) -= f * b(col, j);
            }
        }
    }
    ComplexMatrix x(n, b.cols());
    for (std::size_t jj = 0; jj < b.cols(); ++jj) {
        for (std::size_t ii = n; ii-- > 0;) {
            Complex acc = b(ii, jj);
            for (std::size_t k = ii + 1; k < n; ++k) {
                acc -= a(ii, k) * x(k, jj);
            }
            x(ii, jj) = acc / a(ii, ii);
        }
    }
    return x;
}

inline ComplexMatrix solve(const ComplexMatrix &a, const ComplexMatrix &b)
{
    auto x = try_solve(a, b);
    if (!x) {
        throw precision_exhausted("linear system singular or unresolved at working precision");
    }
    return *x;
}

/// Certified determinant. When elimination stalls, the remaining minor is
/// bounded by Hadamard's inequality and folded into the radius.
inline Complex determinant(ComplexMatrix a)
{
    if (!a.is_square()) {
        throw std::invalid_argument("determinant of non-square matrix");
    }
    const std::size_t n = a.rows();
    long prec = default_precision;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto &z : a.row(i)) {
            prec = std::max(prec, z.precision());
        }
    }
    Complex det(Real(1, prec));
    for (std::size_t col = 0; col < n; ++col) {
        long piv = detail::choose_pivot(a, col, col);
        if (piv < 0) {
            // |det(rest)| <= prod of row norms of the remaining block.
            detail::Float bound(detail::radius_precision);
            mpfr_set_ui(bound.get(), 1, MPFR_RNDU);
            for (std::size_t i = col; i < n; ++i) {
                detail::Float row_sq(detail::radius_precision);
                for (std::size_t j = col; j < n; ++j) {
                    detail::Float m = a(i, j).magnitude_upper();
                    mpfr_sqr(m.get(), m.get(), MPFR_RNDU);
                    mpfr_add(row_sq.get(), row_sq.get(), m.get(), MPFR_RNDU);
                }
                mpfr_sqrt(row_sq.get(), row_sq.get(), MPFR_RNDU);
                mpfr_mul(bound.get(), bound.get(), row_sq.get(), MPFR_RNDU);
            }
            detail::Float scale = det.magnitude_upper();
            mpfr_mul(bound.get(), bound.get(), scale.get(), MPFR_RNDU);
            return Complex(Real(0, prec), Real(0, prec)).widened(bound);
        }
        if (static_cast<std::size_t>(piv) != col) {
            a.swap_rows(col, static_cast<std::size_t>(piv));
            det = -det;
        }
        det *= a(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            Complex f = a(i, col) / a(col, col);
            for (std::size_t j = col + 1; j < n; ++j) {
                a(i, j) -= f * a(col, j);
            }
        }
    }
    return det;
}

/// Numerical rank with a zero threshold of 2^-threshold_bits. An entry that
/// contains zero but is not certified below the threshold makes the rank
/// undecidable and raises precision_exhausted.
inline std::size_t numerical_rank(ComplexMatrix a, long threshold_bits)
{
    detail::Float threshold(detail::radius_precision);
    mpfr_set_ui_2exp(threshold.get(), 1, -threshold_bits, MPFR_RNDN);
    std::size_t r = 0;
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    while (r < rows && r < cols) {
        // Full pivoting over the trailing block.
        long bi = -1, bj = -1;
        double best = -1.0;
        for (std::size_t i = r; i < rows; ++i) {
            for (std::size_t j = r; j < cols; ++j) {
                if (a(i, j).contains_zero()) {
                    continue;
                }
                double mag = detail::approx_magnitude(a(i, j));
                if (mag > best) {
                    best = mag;
                    bi = static_cast<long>(i);
                    bj = static_cast<long>(j);
                }
            }
        }
        if (bi < 0) {
            for (std::size_t i = r; i < rows; ++i) {
                for (std::size_t j = r; j < cols; ++j) {
                    if (mpfr_cmp(a(i, j).magnitude_upper().get(), threshold.get()) > 0) {
                        throw precision_exhausted("rank undecidable: entry not resolved against zero threshold");
                    }
                }
            }
            break;
        }
        a.swap_rows(r, static_cast<std::size_t>(bi));
        a.swap_cols(r, static_cast<std::size_t>(bj));
        for (std::size_t i = r + 1; i < rows; ++i) {
            Complex f = a(i, r) / a(r, r);
            for (std::size_t j = r + 1; j < cols; ++j) {
                a(i, j) -= f * a(r, j);
            }
            a(i, r) = Complex(Real(0, f.precision()));
        }
        ++r;
    }
    return r;
}

/// Midpoint approximation in double precision (diagnostics only).
inline Eigen::MatrixXcd to_eigen(const ComplexMatrix &m)
{
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::complex<double>(m(i, j).re().mid_double(), m(i, j).im().mid_double());
        }
    }
    return out;
}

/// Smallest singular value of the midpoint matrix (an estimate, not certified).
inline double smallest_singular_value(const ComplexMatrix &m)
{
    if (m.rows() == 0 || m.cols() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
    return svd.singularValues().minCoeff();
}

} // namespace motive_height

#endif
