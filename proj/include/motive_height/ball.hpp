#ifndef MOTIVE_HEIGHT_BALL_HPP
#define MOTIVE_HEIGHT_BALL_HPP

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <utility>

#include <gmp.h>
#include <mpfr.h>

#include "errors.hpp"
#include "rational.hpp"

namespace motive_height
{

/// Default working precision in bits.
inline constexpr long default_precision = 128;

namespace detail
{

// Precision used for radii; radii are always rounded upwards.
inline constexpr mpfr_prec_t radius_precision = 64;

// Copyable RAII holder for an mpfr_t.
class Float
{
public:
    explicit Float(mpfr_prec_t prec = radius_precision)
    {
        mpfr_init2(m_value, prec);
        mpfr_set_zero(m_value, 1);
    }
    Float(const Float &other)
    {
        mpfr_init2(m_value, mpfr_get_prec(other.m_value));
        mpfr_set(m_value, other.m_value, MPFR_RNDN);
    }
    Float(Float &&other) noexcept
    {
        mpfr_init2(m_value, MPFR_PREC_MIN);
        mpfr_swap(m_value, other.m_value);
    }
    Float &operator=(const Float &other)
    {
        if (this != &other) {
            mpfr_set_prec(m_value, mpfr_get_prec(other.m_value));
            mpfr_set(m_value, other.m_value, MPFR_RNDN);
        }
        return *this;
    }
    Float &operator=(Float &&other) noexcept
    {
        mpfr_swap(m_value, other.m_value);
        return *this;
    }
    ~Float() { mpfr_clear(m_value); }

    mpfr_ptr get() noexcept { return m_value; }
    mpfr_srcptr get() const noexcept { return m_value; }
    mpfr_prec_t precision() const noexcept { return mpfr_get_prec(m_value); }

private:
    mpfr_t m_value;
};

// rad += ulp(mid) whenever the operation producing mid was inexact.
inline void add_rounding_error(Float &rad, const Float &mid, int ternary)
{
    if (ternary == 0 || mpfr_zero_p(mid.get())) {
        return;
    }
    Float ulp(radius_precision);
    mpfr_set_ui_2exp(ulp.get(), 1, mpfr_get_exp(mid.get()) - mid.precision(), MPFR_RNDU);
    mpfr_add(rad.get(), rad.get(), ulp.get(), MPFR_RNDU);
}

// |x| rounded up to radius precision.
inline Float abs_up(const Float &x)
{
    Float out(radius_precision);
    mpfr_abs(out.get(), x.get(), MPFR_RNDU);
    return out;
}

} // namespace detail

/// Real ball: a midpoint at working precision and a radius rounded upwards.
/// Every operation returns a ball containing all results of applying the
/// exact operation to points of the operand balls.
class Real
{
public:
    explicit Real(long prec = default_precision) : m_mid(prec), m_rad(detail::radius_precision) {}

    Real(long value, long prec) : Real(prec) { mpfr_set_si(m_mid.get(), value, MPFR_RNDN); }

    static Real from_rational(const Rational &q, long prec = default_precision)
    {
        Real out(prec);
        int t = mpfr_set_q(out.m_mid.get(), q.get_mpq_t(), MPFR_RNDN);
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    /// Ball with the given midpoint and an explicit extra radius.
    static Real with_radius(const Rational &mid, const Rational &radius, long prec = default_precision)
    {
        Real out = from_rational(mid, prec);
        detail::Float r(detail::radius_precision);
        mpfr_set_q(r.get(), radius.get_mpq_t(), MPFR_RNDU);
        mpfr_abs(r.get(), r.get(), MPFR_RNDU);
        mpfr_add(out.m_rad.get(), out.m_rad.get(), r.get(), MPFR_RNDU);
        return out;
    }

    static Real pi(long prec = default_precision)
    {
        Real out(prec);
        int t = mpfr_const_pi(out.m_mid.get(), MPFR_RNDN);
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    long precision() const noexcept { return static_cast<long>(m_mid.precision()); }
    const detail::Float &mid() const noexcept { return m_mid; }
    const detail::Float &rad() const noexcept { return m_rad; }

    bool is_exact() const noexcept { return mpfr_zero_p(m_rad.get()); }

    /// The midpoint as an exact ball.
    Real midpoint() const
    {
        Real out = *this;
        mpfr_set_zero(out.m_rad.get(), 1);
        return out;
    }
    bool is_zero() const noexcept { return is_exact() && mpfr_zero_p(m_mid.get()); }

    bool contains_zero() const
    {
        // Conservative: |mid| rounded down.
        detail::Float down(detail::radius_precision);
        mpfr_abs(down.get(), m_mid.get(), MPFR_RNDD);
        return mpfr_cmp(down.get(), m_rad.get()) <= 0;
    }

    /// True when every point of the ball is > 0.
    bool is_positive() const
    {
        if (mpfr_sgn(m_mid.get()) <= 0) {
            return false;
        }
        return !contains_zero();
    }

    bool is_negative() const
    {
        if (mpfr_sgn(m_mid.get()) >= 0) {
            return false;
        }
        return !contains_zero();
    }

    double mid_double() const { return mpfr_get_d(m_mid.get(), MPFR_RNDN); }
    double rad_double() const { return mpfr_get_d(m_rad.get(), MPFR_RNDU); }

    /// Midpoint in scientific-free "%.{digits}Rg" style.
    std::string mid_string(int digits) const
    {
        if (mpfr_zero_p(m_mid.get())) {
            return "0";
        }
        char *buf = nullptr;
        mpfr_asprintf(&buf, "%.*RNg", digits, m_mid.get());
        std::string out(buf);
        mpfr_free_str(buf);
        return out;
    }

    std::string rad_string() const
    {
        if (mpfr_zero_p(m_rad.get())) {
            return "0";
        }
        char *buf = nullptr;
        mpfr_asprintf(&buf, "%.2RUe", m_rad.get());
        std::string out(buf);
        mpfr_free_str(buf);
        return out;
    }

    /// Lower and upper endpoints, rounded outwards, at radius precision.
    detail::Float lower() const
    {
        detail::Float out(std::max<mpfr_prec_t>(m_mid.precision(), detail::radius_precision));
        mpfr_sub(out.get(), m_mid.get(), m_rad.get(), MPFR_RNDD);
        return out;
    }

    detail::Float upper() const
    {
        detail::Float out(std::max<mpfr_prec_t>(m_mid.precision(), detail::radius_precision));
        mpfr_add(out.get(), m_mid.get(), m_rad.get(), MPFR_RNDU);
        return out;
    }

    /// Upper bound on |x| over the ball.
    detail::Float magnitude_upper() const
    {
        detail::Float out = detail::abs_up(m_mid);
        mpfr_add(out.get(), out.get(), m_rad.get(), MPFR_RNDU);
        return out;
    }

    friend Real operator-(const Real &a)
    {
        Real out = a;
        mpfr_neg(out.m_mid.get(), out.m_mid.get(), MPFR_RNDN);
        return out;
    }

    friend Real operator+(const Real &a, const Real &b)
    {
        Real out(std::max(a.precision(), b.precision()));
        int t = mpfr_add(out.m_mid.get(), a.m_mid.get(), b.m_mid.get(), MPFR_RNDN);
        mpfr_add(out.m_rad.get(), a.m_rad.get(), b.m_rad.get(), MPFR_RNDU);
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    friend Real operator-(const Real &a, const Real &b)
    {
        Real out(std::max(a.precision(), b.precision()));
        int t = mpfr_sub(out.m_mid.get(), a.m_mid.get(), b.m_mid.get(), MPFR_RNDN);
        mpfr_add(out.m_rad.get(), a.m_rad.get(), b.m_rad.get(), MPFR_RNDU);
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    friend Real operator*(const Real &a, const Real &b)
    {
        Real out(std::max(a.precision(), b.precision()));
        int t = mpfr_mul(out.m_mid.get(), a.m_mid.get(), b.m_mid.get(), MPFR_RNDN);
        // |a|·rb + |b|·ra + ra·rb
        detail::Float am = detail::abs_up(a.m_mid);
        detail::Float bm = detail::abs_up(b.m_mid);
        detail::Float term(detail::radius_precision);
        mpfr_mul(out.m_rad.get(), am.get(), b.m_rad.get(), MPFR_RNDU);
        mpfr_mul(term.get(), bm.get(), a.m_rad.get(), MPFR_RNDU);
        mpfr_add(out.m_rad.get(), out.m_rad.get(), term.get(), MPFR_RNDU);
        mpfr_mul(term.get(), a.m_rad.get(), b.m_rad.get(), MPFR_RNDU);
        mpfr_add(out.m_rad.get(), out.m_rad.get(), term.get(), MPFR_RNDU);
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    friend Real operator/(const Real &a, const Real &b)
    {
        if (b.contains_zero()) {
            throw precision_exhausted("division by a ball containing zero");
        }
        Real out(std::max(a.precision(), b.precision()));
        int t = mpfr_div(out.m_mid.get(), a.m_mid.get(), b.m_mid.get(), MPFR_RNDN);
        // (|a|·rb + |b|·ra) / (|b|·(|b| - rb))
        detail::Float am = detail::abs_up(a.m_mid);
        detail::Float bm = detail::abs_up(b.m_mid);
        detail::Float num(detail::radius_precision);
        detail::Float term(detail::radius_precision);
        mpfr_mul(num.get(), am.get(), b.m_rad.get(), MPFR_RNDU);
        mpfr_mul(term.get(), bm.get(), a.m_rad.get(), MPFR_RNDU);
        mpfr_add(num.get(), num.get(), term.get(), MPFR_RNDU);
        if (!mpfr_zero_p(num.get())) {
            detail::Float bdown(detail::radius_precision);
            mpfr_abs(bdown.get(), b.m_mid.get(), MPFR_RNDD);
            detail::Float gap(detail::radius_precision);
            mpfr_sub(gap.get(), bdown.get(), b.m_rad.get(), MPFR_RNDD);
            detail::Float den(detail::radius_precision);
            mpfr_mul(den.get(), bdown.get(), gap.get(), MPFR_RNDD);
            mpfr_div(out.m_rad.get(), num.get(), den.get(), MPFR_RNDU);
        }
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    Real &operator+=(const Real &b) { return *this = *this + b; }
    Real &operator-=(const Real &b) { return *this = *this - b; }
    Real &operator*=(const Real &b) { return *this = *this * b; }
    Real &operator/=(const Real &b) { return *this = *this / b; }

    friend Real abs(const Real &a)
    {
        Real out = a;
        mpfr_abs(out.m_mid.get(), out.m_mid.get(), MPFR_RNDN);
        return out;
    }

    friend Real sqrt(const Real &a)
    {
        Real out(a.precision());
        if (a.is_zero()) {
            return out;
        }
        detail::Float lo = a.lower();
        if (mpfr_sgn(lo.get()) <= 0) {
            detail::Float hi = a.upper();
            if (mpfr_sgn(hi.get()) < 0) {
                throw std::domain_error("sqrt of a negative ball");
            }
            // Enclose [0, sqrt(hi)].
            detail::Float s(detail::radius_precision);
            mpfr_sqrt(s.get(), hi.get(), MPFR_RNDU);
            mpfr_div_2ui(s.get(), s.get(), 1, MPFR_RNDU);
            mpfr_set(out.m_mid.get(), s.get(), MPFR_RNDN);
            mpfr_set(out.m_rad.get(), s.get(), MPFR_RNDU);
            return out;
        }
        int t = mpfr_sqrt(out.m_mid.get(), a.m_mid.get(), MPFR_RNDN);
        if (!a.is_exact()) {
            // |sqrt(x) - sqrt(m)| <= r / (sqrt(m - r) + sqrt(m))
            detail::Float s1(detail::radius_precision);
            detail::Float s2(detail::radius_precision);
            mpfr_sqrt(s1.get(), lo.get(), MPFR_RNDD);
            mpfr_sqrt(s2.get(), a.m_mid.get(), MPFR_RNDD);
            mpfr_add(s1.get(), s1.get(), s2.get(), MPFR_RNDD);
            mpfr_div(out.m_rad.get(), a.m_rad.get(), s1.get(), MPFR_RNDU);
        }
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    friend Real log(const Real &a)
    {
        detail::Float lo = a.lower();
        if (mpfr_sgn(lo.get()) <= 0) {
            throw precision_exhausted("log of a ball not bounded away from zero");
        }
        Real out(a.precision());
        int t = mpfr_log(out.m_mid.get(), a.m_mid.get(), MPFR_RNDN);
        if (!a.is_exact()) {
            // |log x - log m| <= r / (m - r)
            mpfr_div(out.m_rad.get(), a.m_rad.get(), lo.get(), MPFR_RNDU);
        }
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    friend Real exp(const Real &a)
    {
        Real out(a.precision());
        int t = mpfr_exp(out.m_mid.get(), a.m_mid.get(), MPFR_RNDN);
        if (!a.is_exact()) {
            // |exp x - exp m| <= exp(m + r) · r
            detail::Float hi = a.upper();
            detail::Float e(detail::radius_precision);
            mpfr_exp(e.get(), hi.get(), MPFR_RNDU);
            mpfr_mul(out.m_rad.get(), e.get(), a.m_rad.get(), MPFR_RNDU);
        }
        detail::add_rounding_error(out.m_rad, out.m_mid, t);
        return out;
    }

    /// True when the two balls intersect.
    friend bool overlaps(const Real &a, const Real &b)
    {
        detail::Float diff(std::max<mpfr_prec_t>(std::max(a.m_mid.precision(), b.m_mid.precision()), 64) + 64);
        mpfr_sub(diff.get(), a.m_mid.get(), b.m_mid.get(), MPFR_RNDN);
        mpfr_abs(diff.get(), diff.get(), MPFR_RNDD);
        detail::Float r(detail::radius_precision);
        mpfr_add(r.get(), a.m_rad.get(), b.m_rad.get(), MPFR_RNDU);
        return mpfr_cmp(diff.get(), r.get()) <= 0;
    }

    /// Enlarges the radius by a nonnegative rational.
    Real widened(const Rational &extra) const
    {
        Real out = *this;
        detail::Float r(detail::radius_precision);
        mpfr_set_q(r.get(), extra.get_mpq_t(), MPFR_RNDU);
        mpfr_add(out.m_rad.get(), out.m_rad.get(), r.get(), MPFR_RNDU);
        return out;
    }

    /// Enlarges the radius by another ball's radius (upper bound on an
    /// additional uncertainty).
    Real widened(const detail::Float &extra) const
    {
        Real out = *this;
        mpfr_add(out.m_rad.get(), out.m_rad.get(), extra.get(), MPFR_RNDU);
        return out;
    }

private:
    detail::Float m_mid;
    detail::Float m_rad;
};

inline Real pow(const Real &base, long e)
{
    Real out(1, base.precision());
    Real b = base;
    long k = e < 0 ? -e : e;
    while (k > 0) {
        if (k & 1) {
            out *= b;
        }
        k >>= 1;
        if (k > 0) {
            b *= b;
        }
    }
    if (e < 0) {
        out = Real(1, base.precision()) / out;
    }
    return out;
}

/// Complex ball as a pair of real balls (rectangular enclosure).
class Complex
{
public:
    Complex() : Complex(0L) {}
    Complex(long value) : m_re(value, default_precision), m_im(0, default_precision) {}
    Complex(Real re, Real im) : m_re(std::move(re)), m_im(std::move(im)) {}
    explicit Complex(Real re) : m_re(std::move(re)), m_im(0, m_re.precision()) {}

    static Complex from_rational(const Rational &re, const Rational &im, long prec = default_precision)
    {
        return {Real::from_rational(re, prec), Real::from_rational(im, prec)};
    }

    static Complex i(long prec = default_precision) { return {Real(0, prec), Real(1, prec)}; }

    /// 2·pi·i at the given precision.
    static Complex two_pi_i(long prec = default_precision)
    {
        return {Real(0, prec), Real::pi(prec) * Real(2, prec)};
    }

    const Real &re() const noexcept { return m_re; }
    const Real &im() const noexcept { return m_im; }
    long precision() const noexcept { return std::max(m_re.precision(), m_im.precision()); }

    bool contains_zero() const { return m_re.contains_zero() && m_im.contains_zero(); }
    bool is_exact() const { return m_re.is_exact() && m_im.is_exact(); }

    friend Complex conj(const Complex &z) { return {z.m_re, -z.m_im}; }
    friend Complex operator-(const Complex &z) { return {-z.m_re, -z.m_im}; }
    friend Complex operator+(const Complex &a, const Complex &b) { return {a.m_re + b.m_re, a.m_im + b.m_im}; }
    friend Complex operator-(const Complex &a, const Complex &b) { return {a.m_re - b.m_re, a.m_im - b.m_im}; }

    friend Complex operator*(const Complex &a, const Complex &b)
    {
        return {a.m_re * b.m_re - a.m_im * b.m_im, a.m_re * b.m_im + a.m_im * b.m_re};
    }

    friend Complex operator*(const Complex &a, const Real &b) { return {a.m_re * b, a.m_im * b}; }

    /// |z|^2 as a real ball.
    friend Real norm(const Complex &z) { return z.m_re * z.m_re + z.m_im * z.m_im; }

    friend Real abs(const Complex &z)
    {
        if (z.m_im.is_zero()) {
            return abs(z.m_re);
        }
        if (z.m_re.is_zero()) {
            return abs(z.m_im);
        }
        return sqrt(norm(z));
    }

    friend Complex operator/(const Complex &a, const Complex &b)
    {
        if (b.m_im.is_zero()) {
            return {a.m_re / b.m_re, a.m_im / b.m_re};
        }
        Real d = norm(b);
        if (d.contains_zero()) {
            throw precision_exhausted("division by a complex ball containing zero");
        }
        Complex n = a * conj(b);
        return {n.m_re / d, n.m_im / d};
    }

    Complex &operator+=(const Complex &b) { return *this = *this + b; }
    Complex &operator-=(const Complex &b) { return *this = *this - b; }
    Complex &operator*=(const Complex &b) { return *this = *this * b; }
    Complex &operator/=(const Complex &b) { return *this = *this / b; }

    friend bool overlaps(const Complex &a, const Complex &b)
    {
        return overlaps(a.m_re, b.m_re) && overlaps(a.m_im, b.m_im);
    }

    /// Upper bound on |z| over the enclosure.
    detail::Float magnitude_upper() const
    {
        detail::Float x = m_re.magnitude_upper();
        detail::Float y = m_im.magnitude_upper();
        detail::Float out(detail::radius_precision);
        mpfr_hypot(out.get(), x.get(), y.get(), MPFR_RNDU);
        return out;
    }

    Complex widened(const detail::Float &extra) const { return {m_re.widened(extra), m_im.widened(extra)}; }

private:
    Real m_re;
    Real m_im;
};

inline Complex pow(const Complex &base, long e)
{
    Complex out(Real(1, base.precision()));
    Complex b = base;
    long k = e < 0 ? -e : e;
    while (k > 0) {
        if (k & 1) {
            out *= b;
        }
        k >>= 1;
        if (k > 0) {
            b *= b;
        }
    }
    if (e < 0) {
        out = Complex(Real(1, base.precision())) / out;
    }
    return out;
}

using ComplexMatrix = Matrix<Complex>;

inline ComplexMatrix to_complex(const RationalMatrix &m, long prec = default_precision)
{
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = Complex(Real::from_rational(m(i, j), prec));
        }
    }
    return out;
}

inline ComplexMatrix conj(const ComplexMatrix &m)
{
    return m.map([](const Complex &z) { return conj(z); });
}

} // namespace motive_height

#endif
