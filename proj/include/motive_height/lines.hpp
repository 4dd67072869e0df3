#ifndef MOTIVE_HEIGHT_LINES_HPP
#define MOTIVE_HEIGHT_LINES_HPP

// Exact lattice bookkeeping over Z and Z_(p), and metrized one-dimensional
// spaces.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ball.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace motive_height
{

// ---------------------------------------------------------------------------
// Smith normal form

struct SmithForm
{
    std::vector<Integer> divisors; // d_1 | d_2 | ... , length min(rows, cols)
    IntegerMatrix left;            // U, unimodular, rows x rows
    IntegerMatrix right;           // V, unimodular, cols x cols
};

/// Smith normal form U·m·V = diag(d_1, ..., d_k) with d_i >= 0 and
/// d_i | d_{i+1}.
inline SmithForm smith_normal_form(IntegerMatrix a)
{
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    IntegerMatrix u = IntegerMatrix::identity(rows);
    IntegerMatrix v = IntegerMatrix::identity(cols);
    const std::size_t k = std::min(rows, cols);

    auto row_op = [&](std::size_t target, std::size_t source, const Integer &f) {
        // row_target -= f * row_source
        for (std::size_t j = 0; j < cols; ++j) {
            a(target, j) -= f * a(source, j);
        }
        for (std::size_t j = 0; j < rows; ++j) {
            u(target, j) -= f * u(source, j);
        }
    };
    auto col_op = [&](std::size_t target, std::size_t source, const Integer &f) {
        for (std::size_t i = 0; i < rows; ++i) {
            a(i, target) -= f * a(i, source);
        }
        for (std::size_t i = 0; i < cols; ++i) {
            v(i, target) -= f * v(i, source);
        }
    };

    for (std::size_t t = 0; t < k; ++t) {
        while (true) {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            bool found = false;
            std::size_t pi = t, pj = t;
            Integer best;
            for (std::size_t i = t; i < rows; ++i) {
                for (std::size_t j = t; j < cols; ++j) {
                    if (a(i, j) != 0 && (!found || abs(a(i, j)) < best)) {
                        best = abs(a(i, j));
                        pi = i;
                        pj = j;
                        found = true;
                    }
                }
            }
            if (!found) {
                break;
            }
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);

            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (a(i, t) != 0) {
                    Integer q;
                    mpz_fdiv_q(q.get_mpz_t(), a(i, t).get_mpz_t(), a(t, t).get_mpz_t());
                    row_op(i, t, q);
                    if (a(i, t) != 0) {
                        clean = false;
                    }
                }
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (a(t, j) != 0) {
                    Integer q;
                    mpz_fdiv_q(q.get_mpz_t(), a(t, j).get_mpz_t(), a(t, t).get_mpz_t());
                    col_op(j, t, q);
                    if (a(t, j) != 0) {
                        clean = false;
                    }
                }
            }
            if (!clean) {
                continue;
            }
            // Enforce divisibility of the trailing block by the pivot.
            bool divisible = true;
            for (std::size_t i = t + 1; i < rows && divisible; ++i) {
                for (std::size_t j = t + 1; j < cols; ++j) {
                    if (!mpz_divisible_p(a(i, j).get_mpz_t(), a(t, t).get_mpz_t())) {
                        // row_t += row_i
                        row_op(t, i, Integer(-1));
                        divisible = false;
                        break;
                    }
                }
            }
            if (divisible) {
                break;
            }
        }
        if (a(t, t) < 0) {
            for (std::size_t j = 0; j < cols; ++j) {
                a(t, j) = -a(t, j);
            }
            for (std::size_t j = 0; j < rows; ++j) {
                u(t, j) = -u(t, j);
            }
        }
    }
    SmithForm out;
    for (std::size_t t = 0; t < k; ++t) {
        out.divisors.push_back(a(t, t));
    }
    out.left = std::move(u);
    out.right = std::move(v);
    return out;
}

inline Integer integer_determinant(const IntegerMatrix &m)
{
    Rational d = determinant(to_rational(m));
    return d.get_num();
}

// ---------------------------------------------------------------------------
// Hermite normal form and lattices

/// Column-style Hermite normal form of the lattice spanned by the columns of
/// an integer matrix. Returns a basis in column echelon form: pivots positive,
/// entries left of a pivot reduced into [0, pivot).
inline IntegerMatrix hermite_normal_form(IntegerMatrix a)
{
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    std::size_t c = 0;
    std::vector<std::size_t> pivot_rows;
    for (std::size_t i = 0; i < rows && c < cols; ++i) {
        // Euclid on columns c..cols-1 along row i.
        for (std::size_t j = c + 1; j < cols; ++j) {
            while (a(i, j) != 0) {
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), a(i, c).get_mpz_t(), a(i, j).get_mpz_t());
                for (std::size_t r = 0; r < rows; ++r) {
                    a(r, c) -= q * a(r, j);
                }
                a.swap_cols(c, j);
            }
        }
        if (a(i, c) == 0) {
            continue;
        }
        if (a(i, c) < 0) {
            for (std::size_t r = 0; r < rows; ++r) {
                a(r, c) = -a(r, c);
            }
        }
        for (std::size_t k = 0; k < c; ++k) {
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), a(i, k).get_mpz_t(), a(i, c).get_mpz_t());
            if (q != 0) {
                for (std::size_t r = 0; r < rows; ++r) {
                    a(r, k) -= q * a(r, c);
                }
            }
        }
        pivot_rows.push_back(i);
        ++c;
    }
    return a.columns(0, c);
}

/// A lattice (free Z-module) in Q^n, stored as a basis in canonical
/// Hermite form. Rank may be below the ambient dimension.
class Lattice
{
public:
    Lattice() = default;

    /// Lattice spanned by the columns of the given rational matrix.
    static Lattice from_generators(const RationalMatrix &generators)
    {
        Lattice out;
        out.m_ambient = generators.rows();
        Integer den = common_denominator(generators);
        IntegerMatrix scaled(generators.rows(), generators.cols());
        for (std::size_t i = 0; i < generators.rows(); ++i) {
            for (std::size_t j = 0; j < generators.cols(); ++j) {
                Rational x = generators(i, j) * den;
                scaled(i, j) = x.get_num();
            }
        }
        IntegerMatrix h = hermite_normal_form(std::move(scaled));
        out.m_basis = to_rational(h);
        Rational inv(1, 1);
        inv /= den;
        for (std::size_t i = 0; i < out.m_basis.rows(); ++i) {
            for (auto &x : out.m_basis.row(i)) {
                x *= inv;
            }
        }
        return out;
    }

    static Lattice standard(std::size_t n) { return from_generators(RationalMatrix::identity(n)); }

    static Lattice zero(std::size_t n)
    {
        Lattice out;
        out.m_ambient = n;
        out.m_basis = RationalMatrix(n, 0);
        return out;
    }

    std::size_t ambient_dimension() const noexcept { return m_ambient; }
    std::size_t rank() const noexcept { return m_basis.cols(); }
    bool is_full_rank() const noexcept { return rank() == m_ambient; }
    const RationalMatrix &basis() const noexcept { return m_basis; }

    /// Determinant of the basis (full rank only); the covolume up to sign.
    Rational determinant() const
    {
        if (!is_full_rank()) {
            throw std::invalid_argument("determinant of a lattice that is not full rank");
        }
        return motive_height::determinant(m_basis);
    }

    friend bool operator==(const Lattice &a, const Lattice &b)
    {
        return a.m_ambient == b.m_ambient && a.m_basis == b.m_basis;
    }

    /// Image under a linear map given in ambient coordinates.
    Lattice transformed(const RationalMatrix &map) const
    {
        if (rank() == 0) {
            return zero(map.rows());
        }
        return from_generators(map * m_basis);
    }

    /// Sum with another lattice in the same ambient space.
    Lattice operator+(const Lattice &other) const
    {
        return from_generators(hconcat(m_basis, other.m_basis));
    }

    Lattice scaled(const Rational &c) const
    {
        if (rank() == 0) {
            return *this;
        }
        return from_generators(motive_height::scaled(m_basis, c));
    }

private:
    std::size_t m_ambient = 0;
    RationalMatrix m_basis;
};

using LatticeBasis = Lattice;

/// Coordinates of inner's basis in terms of outer's basis, or nullopt when
/// inner does not lie in the Q-span of outer.
inline std::optional<RationalMatrix> coordinates_in(const Lattice &outer, const Lattice &inner)
{
    if (outer.ambient_dimension() != inner.ambient_dimension()) {
        throw std::invalid_argument("lattices live in different ambient spaces");
    }
    if (inner.rank() == 0) {
        return RationalMatrix(outer.rank(), 0);
    }
    if (outer.rank() == 0) {
        return std::nullopt;
    }
    return solve(outer.basis(), inner.basis());
}

/// inner ⊆ outer after tensoring with Z_(p).
inline bool locally_contains(const Lattice &outer, const Lattice &inner, long p)
{
    auto x = coordinates_in(outer, inner);
    return x && is_p_integral(*x, p);
}

inline bool locally_equal(const Lattice &a, const Lattice &b, long p)
{
    return a.rank() == b.rank() && locally_contains(a, b, p) && locally_contains(b, a, p);
}

/// inner ⊆ outer over Z.
inline bool contains(const Lattice &outer, const Lattice &inner)
{
    auto x = coordinates_in(outer, inner);
    return x && is_integral(*x);
}

/// v_p of the index [outer : inner] computed as v_p(det) of the
/// change-of-basis matrix. Both lattices must have the same rank and
/// inner ⊆ outer must hold after localization at p.
inline int quotient_lattice_valuation(const Lattice &outer, const Lattice &inner, long p)
{
    if (outer.rank() != inner.rank()) {
        throw not_sublattice("quotient_lattice_valuation: ranks differ, index is infinite");
    }
    auto x = coordinates_in(outer, inner);
    if (!x) {
        throw not_sublattice("quotient_lattice_valuation: inner is not in the span of outer");
    }
    if (!is_p_integral(*x, p)) {
        throw not_sublattice("quotient_lattice_valuation: inner is not contained in outer at p");
    }
    if (x->rows() == 0) {
        return 0;
    }
    return valuation(determinant(*x), p);
}

/// Z-lattice {x in Z^c : m x = 0}, a saturated sublattice of Z^c.
inline Lattice saturated_kernel(const RationalMatrix &m)
{
    RationalMatrix k = kernel_basis(m);
    if (k.cols() == 0) {
        return Lattice::zero(m.cols());
    }
    Integer den = common_denominator(k);
    IntegerMatrix ki = to_integer_exact(motive_height::scaled(k, Rational(den)));
    SmithForm s = smith_normal_form(ki);
    // k = U^-1 · D · V^-1 with D of rank d, so the first d columns of U^-1
    // span the saturation.
    RationalMatrix uinv = inverse(to_rational(s.left));
    return Lattice::from_generators(uinv.columns(0, k.cols()));
}

/// Saturation of a lattice inside Q^n relative to the standard lattice Z^n:
/// Z^n ∩ span(L).
inline Lattice saturation_in_standard(const Lattice &l)
{
    if (l.rank() == 0) {
        return l;
    }
    // span(L) = kernel of a matrix whose rows span the annihilator.
    RationalMatrix ann = kernel_basis(l.basis().transposed()).transposed();
    if (ann.rows() == 0) {
        return Lattice::standard(l.ambient_dimension());
    }
    return saturated_kernel(ann);
}

/// Sublattice {v in L : first k coordinates of v vanish}.
inline Lattice intersect_with_tail_subspace(const Lattice &l, std::size_t k)
{
    if (k == 0 || l.rank() == 0) {
        return l;
    }
    RationalMatrix top = l.basis().block(0, 0, k, l.rank());
    Lattice coeffs = saturated_kernel(top);
    if (coeffs.rank() == 0) {
        return Lattice::zero(l.ambient_dimension());
    }
    return Lattice::from_generators(l.basis() * coeffs.basis());
}

/// Sublattice {v in L : q v ≡ 0 mod p^n Z_(p)^k} for a rational k x amb
/// matrix q that is p-integral on L. The result agrees with L away from p.
inline Lattice kernel_mod_prime_power(const Lattice &l, const RationalMatrix &q, long p, long n)
{
    if (n == 0 || l.rank() == 0) {
        return l;
    }
    RationalMatrix qb = q * l.basis();
    if (!is_p_integral(qb, p)) {
        throw std::invalid_argument("kernel_mod_prime_power: map is not p-integral on the lattice");
    }
    Integer den = common_denominator(qb); // prime to p
    IntegerMatrix qi = to_integer_exact(motive_height::scaled(qb, Rational(den)));
    SmithForm s = smith_normal_form(qi);
    Integer pn;
    mpz_ui_pow_ui(pn.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(n));
    RationalMatrix scale = RationalMatrix::identity(l.rank());
    for (std::size_t i = 0; i < s.divisors.size(); ++i) {
        Integer g;
        mpz_gcd(g.get_mpz_t(), s.divisors[i].get_mpz_t(), pn.get_mpz_t());
        scale(i, i) = Rational(pn / g);
    }
    RationalMatrix coeffs = to_rational(s.right) * scale;
    return Lattice::from_generators(l.basis() * coeffs);
}

// ---------------------------------------------------------------------------
// Adelic data on a line

/// Finitely supported map prime -> exponent; zero exponents are not stored.
class ValuationMap
{
public:
    ValuationMap() = default;
    ValuationMap(std::initializer_list<std::pair<const long, long>> init)
    {
        for (const auto &[p, v] : init) {
            add(p, v);
        }
    }

    void add(long p, long v)
    {
        if (v == 0) {
            return;
        }
        long &slot = m_values[p];
        slot += v;
        if (slot == 0) {
            m_values.erase(p);
        }
    }

    long at(long p) const
    {
        auto it = m_values.find(p);
        return it == m_values.end() ? 0 : it->second;
    }

    const std::map<long, long> &entries() const noexcept { return m_values; }
    bool empty() const noexcept { return m_values.empty(); }

    friend ValuationMap operator+(ValuationMap a, const ValuationMap &b)
    {
        for (const auto &[p, v] : b.m_values) {
            a.add(p, v);
        }
        return a;
    }

    friend bool operator==(const ValuationMap &a, const ValuationMap &b) { return a.m_values == b.m_values; }

private:
    std::map<long, long> m_values;
};

/// Generator of the global lattice L_Q ∩ L_Ẑ: the unique positive rational
/// with the prescribed p-adic valuations.
inline Rational intersect_adelic(const ValuationMap &v)
{
    Rational out = 1;
    for (const auto &[p, e] : v.entries()) {
        out *= rational_power(Rational(p), e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrized lines

/// A one-dimensional Q-space with a reference generator `ref`, the lattice
/// lattice_scalar·Z·ref and (optionally) the metric value |ref|.
struct MetrizedLine
{
    std::string label;
    Rational lattice_scalar = 1;
    std::optional<Real> metric_ref;

    /// Determinant of the zero space: scalar 1, metric exactly 1.
    static MetrizedLine trivial() { return {"1", Rational(1), Real(1, default_precision)}; }

    const Real &metric() const
    {
        if (!metric_ref) {
            throw missing_metric("line '" + label + "' carries no metric");
        }
        return *metric_ref;
    }

    /// |e| for the lattice generator e = lattice_scalar·ref.
    Real generator_metric() const
    {
        const Real &m = metric();
        return Real::from_rational(lattice_scalar, m.precision()) * m;
    }
};

/// Tensor product ⊗ line_i^{⊗ e_i}. The metric is present only when every
/// factor with nonzero exponent carries one.
inline MetrizedLine line_tensor(const std::vector<std::pair<MetrizedLine, long>> &factors)
{
    MetrizedLine out;
    out.lattice_scalar = 1;
    std::optional<Real> metric = Real(1, default_precision);
    std::string label;
    for (const auto &[line, e] : factors) {
        if (e == 0) {
            continue;
        }
        if (line.lattice_scalar <= 0) {
            throw std::invalid_argument("line_tensor: lattice scalar must be positive");
        }
        out.lattice_scalar *= rational_power(line.lattice_scalar, e);
        if (metric && line.metric_ref) {
            metric = *metric * pow(*line.metric_ref, e);
        } else {
            metric.reset();
        }
        if (!label.empty()) {
            label += "*";
        }
        label += "(" + line.label + ")^" + std::to_string(e);
    }
    out.label = label.empty() ? "1" : label;
    out.metric_ref = std::move(metric);
    return out;
}

} // namespace motive_height

#endif
