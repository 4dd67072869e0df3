#ifndef MOTIVE_HEIGHT_ELLIPTIC_HPP
#define MOTIVE_HEIGHT_ELLIPTIC_HPP

// H_1 of an elliptic curve as realization data.
//
// Convention: ω1, ω2 are periods of the invariant differential ω, so the
// Betti lattice H_1(E, Z) is identified with Zω1 + Zω2. The de Rham reference
// basis is (e_{-1}, e_0) with e_0 spanning M^0 (the line dual to ω); the
// period matrix is
//
//     P = [[1/ω1, -ω2/(2πi)],
//          [0,     ω1/(2πi)]]
//
// which makes |e| = (i∫ω∧ω̄)^{1/2} = (2·covol)^{1/2} for the generator of
// L(M)_Z on the window (-1, 1), i.e. h(M) = -½·log(i∫ω∧ω̄).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "ball.hpp"
#include "errors.hpp"
#include "fl.hpp"
#include "motive.hpp"

namespace motive_height
{

/// Degree-2 FL datum of H_1 at a good prime p >= 3: φ has characteristic
/// polynomial x² - (a_p/p)x + 1/p, D^{-1} = D, D^0 = Z_p·e_0, D^1 = 0.
inline FilPhiModule elliptic_fl_datum(long p, long ap)
{
    FilPhiModule m;
    m.p = p;
    m.lattice = Lattice::standard(2);
    m.phi = RationalMatrix(2, 2, Rational(0));
    m.phi(0, 0) = Rational(ap, p);
    m.phi(0, 0).canonicalize();
    m.phi(0, 1) = 1;
    m.phi(1, 0) = Rational(-1, p);
    m.first = -1;
    RationalMatrix e0(2, 1, Rational(0));
    e0(1, 0) = 1;
    m.steps = {m.lattice, Lattice::from_generators(e0)};
    return m;
}

/// Realization data from periods. `fl` supplies FL data at good primes,
/// `overrides` local lattice values at bad primes (every bad prime needs one).
inline MotiveData elliptic_curve_h1(const Complex &omega1, const Complex &omega2,
                                    const std::map<long, FilPhiModule> &fl = {},
                                    const std::map<long, LocalLatticeSpec> &overrides = {},
                                    const std::set<long> &bad_primes = {})
{
    if (omega1.contains_zero()) {
        throw degenerate_periods("ω1 is zero (or not certified nonzero)");
    }
    Complex tau = omega2 / omega1;
    if (tau.im().contains_zero()) {
        throw degenerate_periods("Im(ω2/ω1) is not certified nonzero");
    }
    const long prec = std::max(omega1.precision(), omega2.precision());
    const Complex tpi = Complex::two_pi_i(prec);
    MotiveData m;
    m.id = "elliptic";
    m.type.weight = -1;
    m.type.a = -1;
    m.type.hodge = {1, 1};
    m.period = ComplexMatrix(2, 2, Complex(Real(0, prec)));
    m.period(0, 0) = Complex(Real(1, prec)) / omega1;
    m.period(0, 1) = -omega2 / tpi;
    m.period(1, 1) = omega1 / tpi;
    for (const auto &[p, datum] : fl) {
        m.local[p] = datum;
    }
    for (long p : bad_primes) {
        if (!overrides.count(p)) {
            throw invalid_data("bad prime " + std::to_string(p) + " needs a local lattice override");
        }
    }
    for (const auto &[p, spec] : overrides) {
        m.local[p] = spec;
    }
    m.bad_primes = bad_primes;
    return m;
}

// ---------------------------------------------------------------------------
// Weierstrass models

struct WeierstrassCurve
{
    std::string label;
    std::array<long, 5> a{}; // a1, a2, a3, a4, a6

    long b2() const { return a[0] * a[0] + 4 * a[1]; }
    long b4() const { return 2 * a[3] + a[0] * a[2]; }
    long b6() const { return a[2] * a[2] + 4 * a[4]; }
    long b8() const
    {
        return a[0] * a[0] * a[4] + 4 * a[1] * a[4] - a[0] * a[2] * a[3] + a[1] * a[2] * a[2] - a[3] * a[3];
    }
    Integer discriminant() const
    {
        Integer B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
        return -B2 * B2 * B8 - 8 * B4 * B4 * B4 - 27 * B6 * B6 + 9 * B2 * B4 * B6;
    }

    /// Primes dividing the discriminant (bad primes when the model is minimal).
    std::set<long> bad_primes() const
    {
        std::set<long> out;
        Integer d = abs(discriminant());
        for (long q = 2; d > 1; ++q) {
            if (mpz_divisible_ui_p(d.get_mpz_t(), static_cast<unsigned long>(q))) {
                out.insert(q);
                while (mpz_divisible_ui_p(d.get_mpz_t(), static_cast<unsigned long>(q))) {
                    d /= q;
                }
            }
        }
        return out;
    }

    /// a_p = p + 1 - #E(F_p) by counting points.
    long trace_of_frobenius(long p) const
    {
        auto mod = [p](long x) { return ((x % p) + p) % p; };
        long affine = 0;
        for (long x = 0; x < p; ++x) {
            const long rhs = mod(mod(mod(x * x) * x) + mod(a[1] * mod(x * x)) + mod(a[3] * x) + a[4]);
            for (long y = 0; y < p; ++y) {
                const long lhs = mod(mod(y * y) + mod(a[0] * mod(x * y)) + mod(a[2] * y));
                affine += lhs == rhs;
            }
        }
        return p - affine;
    }
};

namespace detail
{

inline Real agm(Real x, Real y)
{
    const long prec = x.precision();
    detail::Float eps(radius_precision);
    mpfr_set_ui_2exp(eps.get(), 1, -(prec + 8), MPFR_RNDN);
    for (int i = 0; i < 10000; ++i) {
        Real gap = x - y;
        // The limit lies between the two means at every step; stop once the
        // balls touch or the gap is below working precision.
        if (overlaps(x, y) || mpfr_cmp(gap.magnitude_upper().get(), eps.get()) < 0) {
            return x.widened(gap.magnitude_upper());
        }
        Real nx = (x + y) / Real(2, prec);
        y = sqrt(x * y);
        x = nx;
    }
    throw precision_exhausted("agm did not converge");
}

// Real roots of c3 x³ + c2 x² + c1 x + c0, certified by a sign change around
// each refined root; descending order.
inline std::vector<Real> real_cubic_roots(const std::array<long, 4> &c, long prec)
{
    // Approximate roots in double precision.
    const double B = static_cast<double>(c[2]) / c[3], C = static_cast<double>(c[1]) / c[3],
                 D = static_cast<double>(c[0]) / c[3];
    const double pp = C - B * B / 3, qq = 2 * B * B * B / 27 - B * C / 3 + D;
    std::vector<double> approx;
    const double disc = qq * qq / 4 + pp * pp * pp / 27;
    if (disc < 0) {
        const double r = 2 * std::sqrt(-pp / 3);
        const double phi = std::acos(std::clamp(3 * qq / (pp * r), -1.0, 1.0));
        for (int k = 0; k < 3; ++k) {
            approx.push_back(r * std::cos(phi / 3 - 2 * std::numbers::pi * k / 3) - B / 3);
        }
    } else {
        const double s = std::sqrt(disc);
        approx.push_back(std::cbrt(-qq / 2 + s) + std::cbrt(-qq / 2 - s) - B / 3);
    }
    auto f = [&](const Real &x) {
        return ((Real(c[3], prec) * x + Real(c[2], prec)) * x + Real(c[1], prec)) * x + Real(c[0], prec);
    };
    auto df = [&](const Real &x) {
        return (Real(3 * c[3], prec) * x + Real(2 * c[2], prec)) * x + Real(c[1], prec);
    };
    std::vector<Real> roots;
    for (double guess : approx) {
        Real x = Real::from_rational(Rational(guess), prec);
        for (int it = 0; it < 200; ++it) {
            Real step = (f(x) / df(x)).midpoint();
            x = (x - step).midpoint();
            if (step.is_zero() || std::fabs(step.mid_double()) < std::ldexp(std::max(1.0, std::fabs(x.mid_double())), -static_cast<int>(prec) - 4)) {
                break;
            }
        }
        Rational eps(1);
        mpz_mul_2exp(eps.get_den_mpz_t(), eps.get_den_mpz_t(), static_cast<mp_bitcnt_t>(prec - 8));
        eps *= std::max(1.0, std::ceil(std::fabs(x.mid_double())));
        Real lo = x - Real::from_rational(eps, prec + 64);
        Real hi = x + Real::from_rational(eps, prec + 64);
        Real flo = f(lo), fhi = f(hi);
        if (!((flo.is_negative() && fhi.is_positive()) || (flo.is_positive() && fhi.is_negative()))) {
            throw precision_exhausted("cubic root could not be isolated");
        }
        roots.push_back(x.widened(eps));
    }
    std::sort(roots.begin(), roots.end(),
              [](const Real &u, const Real &v) { return u.mid_double() > v.mid_double(); });
    return roots;
}

} // namespace detail

/// Basis (ω1, ω2) of the period lattice of the invariant differential
/// dx/(2y + a1 x + a3), via the arithmetic-geometric mean.
inline std::pair<Complex, Complex> elliptic_periods(const WeierstrassCurve &e, long prec = default_precision)
{
    const long wp = prec + 32;
    const Integer delta = e.discriminant();
    if (delta == 0) {
        throw degenerate_periods("singular curve");
    }
    auto roots = detail::real_cubic_roots({e.b6(), 2 * e.b4(), e.b2(), 4}, wp);
    const Real pi = Real::pi(wp);
    const Real zero(0, wp);
    if (delta > 0) {
        if (roots.size() != 3) {
            throw precision_exhausted("expected three real roots");
        }
        const Real &e1 = roots[0], &e2 = roots[1], &e3 = roots[2];
        Real w1 = pi / detail::agm(sqrt(e1 - e3), sqrt(e1 - e2));
        Real w2 = pi / detail::agm(sqrt(e1 - e3), sqrt(e2 - e3));
        return {Complex(w1, zero), Complex(zero, w2)};
    }
    const Real &e1 = roots.front();
    const Real b2(e.b2(), wp), b4(e.b4(), wp);
    Real a = Real(3, wp) * e1 + b2 / Real(4, wp);
    Real b = sqrt(Real(3, wp) * e1 * e1 + b2 * e1 / Real(2, wp) + b4 / Real(2, wp));
    Real two_sqrt_b = Real(2, wp) * sqrt(b);
    Real w1 = Real(2, wp) * pi / detail::agm(two_sqrt_b, sqrt(Real(2, wp) * b + a));
    Real w2im = pi / detail::agm(two_sqrt_b, sqrt(Real(2, wp) * b - a));
    return {Complex(w1, zero), Complex(-(w1 / Real(2, wp)), w2im)};
}

/// Full builder for a minimal Weierstrass model: AGM periods, FL data from
/// point counts at good primes 3 <= p <= fl_bound, zero overrides (Néron
/// differential as reference) at the bad primes.
inline MotiveData elliptic_curve_h1(const WeierstrassCurve &e, long prec = default_precision, long fl_bound = 13)
{
    auto [w1, w2] = elliptic_periods(e, prec);
    const std::set<long> bad = e.bad_primes();
    std::map<long, FilPhiModule> fl;
    for (long p = 3; p <= fl_bound; ++p) {
        if (is_prime(p) && !bad.count(p)) {
            fl[p] = elliptic_fl_datum(p, e.trace_of_frobenius(p));
        }
    }
    std::map<long, LocalLatticeSpec> overrides;
    for (long p : bad) {
        overrides[p] = LocalLatticeSpec{p, {{-1, 0}, {0, 0}, {1, 0}}, Provenance::explicit_override};
    }
    MotiveData m = elliptic_curve_h1(w1, w2, fl, overrides, bad);
    m.id = "elliptic:" + e.label;
    return m;
}

inline WeierstrassCurve curve_11a1() { return {"11a1", {0, -1, 1, -10, -20}}; }
inline WeierstrassCurve curve_37a1() { return {"37a1", {0, 0, 1, -1, 0}}; }
/// y² = x³ - x: square period lattice.
inline WeierstrassCurve curve_32a2() { return {"32a2", {0, 0, 0, -1, 0}}; }

} // namespace motive_height

#endif
