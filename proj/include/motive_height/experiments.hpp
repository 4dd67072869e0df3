#ifndef MOTIVE_HEIGHT_EXPERIMENTS_HPP
#define MOTIVE_HEIGHT_EXPERIMENTS_HPP

// Identities that can be checked on realization data: s = t, the sublattice
// construction M^(n) with its height comparison, and n(M) bookkeeping.

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fl.hpp"
#include "motive.hpp"
#include "parallel.hpp"

namespace motive_height
{

// ---------------------------------------------------------------------------
// s and t

/// s = Σ r·h(r).
inline long s_invariant(const MotiveType &t)
{
    long s = 0;
    for (int r = t.a; r < t.b(); ++r) {
        s += static_cast<long>(r) * static_cast<long>(t.hodge_number(r));
    }
    return s;
}

/// t = w·rank/2.
inline Rational t_invariant(const MotiveType &t)
{
    Rational out(static_cast<long>(t.weight) * static_cast<long>(t.rank()), 2);
    out.canonicalize();
    return out;
}

inline long s_invariant(const MotiveData &m) { return s_invariant(m.type); }
inline Rational t_invariant(const MotiveData &m) { return t_invariant(m.type); }

struct SEqualsT
{
    bool pass = false;
    long s = 0;
    Rational t;
    Rational defect; // s - t
};

/// Works on the type alone so hand-made types that could never be valid
/// data can still be audited.
inline SEqualsT check_s_equals_t(const MotiveType &type)
{
    SEqualsT out;
    out.s = s_invariant(type);
    out.t = t_invariant(type);
    out.defect = Rational(out.s) - out.t;
    out.pass = out.defect == 0;
    return out;
}

inline SEqualsT check_s_equals_t(const MotiveData &m) { return check_s_equals_t(m.type); }

// ---------------------------------------------------------------------------
// Sublattices M^(n)

/// Quotient T → U of rank k at p. U is Z_p^k with the filtration and φ of
/// `target` (whose lattice must be the standard one at p).
struct QuotientSpec
{
    long p = 3;
    long n = 0;
    std::size_t k = 0;
    RationalMatrix q_dr;   // k x rank, de Rham reference coordinates
    RationalMatrix q_b;    // k x rank, integral, Betti coordinates
    FilPhiModule target;   // U with U^i and φ_U
    bool check_betti = true;
};

/// s(U) = Σ i·rank gr^i U.
inline long s_invariant(const FilPhiModule &u)
{
    long s = 0;
    for (int i = u.first; i < u.last(); ++i) {
        s += static_cast<long>(i) *
             (static_cast<long>(u.filtration(i).rank()) - static_cast<long>(u.filtration(i + 1).rank()));
    }
    return s;
}

namespace detail
{

inline Rational prime_power(long p, long e) { return rational_power(Rational(p), e); }

// True when every entry of x lies in p^n Z_(p).
inline bool divisible_by_prime_power(const RationalMatrix &x, long p, long n)
{
    return is_p_integral(scaled(x, prime_power(p, -n)), p);
}

inline FilPhiModule fl_at(const MotiveData &m, long p)
{
    auto it = m.local.find(p);
    if (it == m.local.end()) {
        return default_fl(m.type, p);
    }
    if (const auto *fl = std::get_if<FilPhiModule>(&it->second)) {
        return *fl;
    }
    throw incompatible_spec("sublattice: prime " + std::to_string(p) + " carries an override, not an FL datum");
}

} // namespace detail

/// Checks a QuotientSpec against the FL datum of M at p; throws incompatible_spec.
/// Compatibility with the filtration and with φ is required modulo p^n,
/// which is all the kernel construction sees.
inline void check_quotient_spec(const MotiveData &m, const QuotientSpec &spec)
{
    const std::size_t rank = m.rank();
    const long p = spec.p, n = spec.n;
    auto fail = [&](const std::string &what) {
        throw incompatible_spec("quotient spec at p=" + std::to_string(p) + ": " + what);
    };
    if (!is_prime(p)) {
        fail("not a prime");
    }
    if (n < 0) {
        fail("negative exponent");
    }
    if (spec.q_dr.rows() != spec.k || spec.q_dr.cols() != rank || spec.q_b.rows() != spec.k ||
        spec.q_b.cols() != rank) {
        fail("matrix sizes do not match rank " + std::to_string(rank) + " and k=" + std::to_string(spec.k));
    }
    if (!is_integral(spec.q_b)) {
        fail("q_B is not integral");
    }
    const FilPhiModule &u = spec.target;
    if (u.rank() != spec.k || u.p != p) {
        fail("target has the wrong rank or prime");
    }
    if (!locally_equal(u.lattice, Lattice::standard(spec.k), p)) {
        fail("target lattice is not the standard lattice");
    }
    if (spec.k == 0) {
        return;
    }
    const FilPhiModule d = detail::fl_at(m, p);
    const Lattice std_u = Lattice::standard(spec.k);
    if (!is_p_integral(spec.q_dr * d.lattice.basis(), p)) {
        fail("q_dR is not p-integral on D");
    }
    if (!locally_equal(d.lattice.transformed(spec.q_dr) + std_u.scaled(p), std_u, p)) {
        fail("q_dR is not surjective at p");
    }
    SmithForm sb = smith_normal_form(to_integer_exact(spec.q_b));
    if (sb.divisors.size() != spec.k) {
        fail("q_B is not surjective");
    }
    for (const Integer &e : sb.divisors) {
        if (valuation(e, p) != 0) {
            fail("q_B is not surjective at p");
        }
    }
    if (n == 0) {
        return;
    }
    const Lattice pn_u = std_u.scaled(detail::prime_power(p, n));
    const int lo = std::min(d.first, u.first), hi = std::max(d.last(), u.last());
    for (int i = lo; i <= hi; ++i) {
        Lattice image = d.filtration(i).transformed(spec.q_dr) + pn_u;
        Lattice declared = u.filtration(i) + pn_u;
        if (!locally_equal(image, declared, p)) {
            fail("q_dR does not map D^" + std::to_string(i) + " onto U^" + std::to_string(i) + " mod p^n");
        }
        Lattice di = d.filtration(i);
        if (di.rank() == 0) {
            continue;
        }
        RationalMatrix defect = (spec.q_dr * d.phi - u.phi * spec.q_dr) * di.basis();
        if (!detail::divisible_by_prime_power(scaled(defect, detail::prime_power(p, -i)), p, n)) {
            fail("q_dR does not commute with φ on D^" + std::to_string(i) + " mod p^n");
        }
    }
    if (spec.check_betti) {
        // q_B·P must kill the de Rham kernel of q_dR.
        RationalMatrix ker = kernel_basis(spec.q_dr);
        if (ker.cols() > 0) {
            const long prec = m.precision();
            ComplexMatrix x = to_complex(spec.q_b, prec) * m.period * to_complex(ker, prec);
            for (std::size_t r = 0; r < x.rows(); ++r) {
                for (std::size_t c = 0; c < x.cols(); ++c) {
                    if (!x(r, c).contains_zero()) {
                        fail("q_B and q_dR are not compatible through the period matrix");
                    }
                }
            }
        }
    }
}

struct Sublattice
{
    MotiveData motive;
    RationalMatrix betti_basis; // basis of H^(n) in the original Betti coordinates
    FilPhiModule fl;            // D^(n) with its filtration
};

inline Sublattice sublattice(const MotiveData &m, const QuotientSpec &spec)
{
    require_valid(m);
    check_quotient_spec(m, spec);
    const std::size_t rank = m.rank();
    Sublattice out;
    out.motive = m;
    out.betti_basis = RationalMatrix::identity(rank);
    out.fl = detail::fl_at(m, spec.p);
    if (spec.n == 0 || spec.k == 0) {
        return out;
    }
    FilPhiModule d = out.fl;
    FilPhiModule dn = d;
    dn.lattice = kernel_mod_prime_power(d.lattice, spec.q_dr, spec.p, spec.n);
    for (std::size_t j = 0; j < d.steps.size(); ++j) {
        dn.steps[j] = kernel_mod_prime_power(d.steps[j], spec.q_dr, spec.p, spec.n);
    }
    auto sd = check_strong_divisibility(dn);
    if (!sd.pass) {
        throw strong_divisibility_lost("sublattice at p=" + std::to_string(spec.p) + ": " + sd.message);
    }
    Lattice h = kernel_mod_prime_power(Lattice::standard(rank), spec.q_b, spec.p, spec.n);
    out.betti_basis = h.basis();
    const long prec = m.precision();
    out.motive.period = to_complex(inverse(h.basis()), prec) * m.period;
    out.motive.local[spec.p] = dn;
    out.motive.id = m.id + "^(" + std::to_string(spec.n) + ")";
    out.fl = dn;
    return out;
}

inline MotiveData sublattice_motive(const MotiveData &m, const QuotientSpec &spec)
{
    return sublattice(m, spec).motive;
}

/// The same quotient seen from M^(n): q_dR and q_B are divided by p^n and
/// q_B is re-expressed in the basis of H^(n), so that applying the result
/// with exponent m to M^(n) gives M^(n+m).
inline QuotientSpec advance(const QuotientSpec &spec, const RationalMatrix &betti_basis, long m)
{
    QuotientSpec out = spec;
    const Rational c = detail::prime_power(spec.p, -spec.n);
    out.q_dr = scaled(spec.q_dr, c);
    out.q_b = scaled(spec.q_b * betti_basis, c);
    out.n = m;
    return out;
}

struct InvarianceReport
{
    long p = 0, n = 0;
    std::size_t k = 0;
    int weight = 0;
    long s = 0;   // s(U)
    Rational t;   // t(U) = w·k/2
    HeightReport before, after;
    Rational lattice_ratio;    // scalar of L(M^(n))_Z over that of L(M)_Z
    Rational expected_ratio;   // p^{n·s}
    Integer betti_index;       // [H_Z : H^(n)]
    Rational betti_lhs;        // index^w
    Rational betti_rhs;        // p^{2nt}
    Real predicted_shift;      // -n(s - t) log p
    bool lattice_ok = false;
    bool betti_ok = false;
    bool height_ok = false;

    bool pass() const { return lattice_ok && betti_ok && height_ok; }
};

inline InvarianceReport invariance_experiment(const MotiveData &m, const QuotientSpec &spec)
{
    Sublattice sub = sublattice(m, spec);
    InvarianceReport r;
    r.p = spec.p;
    r.n = spec.n;
    r.k = spec.k;
    r.weight = m.type.weight;
    r.s = s_invariant(spec.target);
    r.t = Rational(static_cast<long>(m.type.weight) * static_cast<long>(spec.k), 2);
    r.t.canonicalize();
    r.before = height(m);
    r.after = height(sub.motive);
    r.lattice_ratio = r.after.lattice_scalar / r.before.lattice_scalar;
    r.expected_ratio = detail::prime_power(spec.p, spec.n * r.s);
    r.lattice_ok = r.lattice_ratio == r.expected_ratio;
    r.betti_index = abs(Integer(determinant(sub.betti_basis).get_num()));
    r.betti_lhs = rational_power(Rational(r.betti_index), m.type.weight);
    const Rational two_nt = 2 * spec.n * r.t; // = n·w·k, an integer
    r.betti_rhs = detail::prime_power(spec.p, two_nt.get_num().get_si());
    r.betti_ok = r.betti_lhs == r.betti_rhs &&
                 r.betti_index == Integer(detail::prime_power(spec.p, spec.n * static_cast<long>(spec.k)).get_num());
    r.height_ok = overlaps(r.after.h, r.before.h);
    const long prec = m.precision();
    const Rational defect = Rational(r.s) - r.t;
    r.predicted_shift = -(Real::from_rational(defect * spec.n, prec) * log(Real(spec.p, prec)));
    return r;
}

// ---------------------------------------------------------------------------
// Unit-root quotient of an ordinary elliptic FL datum

/// Root u of p·u² - a_p·u + 1 ≡ 0 (mod p^digits) with u ≡ a_p^{-1} (mod p),
/// as an integer in [0, p^digits).
inline Integer unit_root(long p, long ap, long digits)
{
    if (ap % p == 0) {
        throw incompatible_spec("unit root: p divides a_p, the datum is not ordinary");
    }
    Integer mod = 1, u = 0;
    mpz_ui_pow_ui(mod.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(digits));
    Integer a = ap;
    Integer ainv;
    Integer pz = p;
    mpz_invert(ainv.get_mpz_t(), Integer(((ap % p) + p) % p).get_mpz_t(), pz.get_mpz_t());
    u = ainv;
    // Newton: f(u) = p u² - a u + 1, f'(u) = 2pu - a, a unit.
    for (long prec = 1; prec < digits; prec *= 2) {
        Integer f = pz * u * u - a * u + 1;
        Integer df = 2 * pz * u - a;
        Integer inv;
        mpz_invert(inv.get_mpz_t(), df.get_mpz_t(), mod.get_mpz_t());
        u = u - f * inv;
        mpz_mod(u.get_mpz_t(), u.get_mpz_t(), mod.get_mpz_t());
    }
    mpz_mod(u.get_mpz_t(), u.get_mpz_t(), mod.get_mpz_t());
    return u;
}

/// Rank-1 quotient of the elliptic FL datum φ = [[a/p, 1], [-1/p, 0]] on
/// which φ acts by the unit root u. U^0 = U, so s(U) = 0. The Betti map is
/// any surjection (the quotient is not motivic, so no period check).
inline QuotientSpec unit_root_spec(long p, long ap, long n, const RationalMatrix &q_b)
{
    const long digits = n + 2;
    const Integer u = unit_root(p, ap, digits);
    Integer mod;
    mpz_ui_pow_ui(mod.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(digits));
    Integer uinv;
    mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), mod.get_mpz_t());
    QuotientSpec spec;
    spec.p = p;
    spec.n = n;
    spec.k = 1;
    spec.q_dr = RationalMatrix(1, 2, Rational(0));
    spec.q_dr(0, 0) = 1;
    spec.q_dr(0, 1) = Rational(uinv);
    spec.q_b = q_b;
    spec.target.p = p;
    spec.target.lattice = Lattice::standard(1);
    spec.target.phi = RationalMatrix(1, 1, Rational(u));
    spec.target.first = -1;
    spec.target.steps = {spec.target.lattice, spec.target.lattice};
    spec.check_betti = false;
    return spec;
}

// ---------------------------------------------------------------------------
// n(M) and the abc table

/// n(M) = Σ_{bad p} log p.
inline Real n_of_m(const MotiveData &m, long prec = default_precision)
{
    Integer radical = 1;
    for (long p : m.bad_primes) {
        radical *= p;
    }
    if (radical == 1) {
        return Real(0, prec);
    }
    return log(Real::from_rational(Rational(radical), prec));
}

struct AbcRow
{
    std::string id;
    int a = 0, b = 0;
    Real h;
    Real n;
};

/// One row per motive, in input order. Over Q the discriminant term is 0 and
/// the degree is 1, so only h and n are reported.
inline std::vector<AbcRow> abc_report(const std::vector<MotiveData> &batch, const HeightOptions &options = {},
                                      unsigned threads = 0)
{
    return parallel_map(
        batch,
        [&](const MotiveData &m) {
            HeightReport h = height(m, options);
            return AbcRow{m.id, h.a, h.b, h.h, n_of_m(m, m.precision())};
        },
        threads);
}

} // namespace motive_height

#endif
