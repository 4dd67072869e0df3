#ifndef MOTIVE_HEIGHT_RATIONAL_HPP
#define MOTIVE_HEIGHT_RATIONAL_HPP

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "errors.hpp"
#include "matrix.hpp"

namespace motive_height
{

using Integer = mpz_class;
using Rational = mpq_class;
using RationalMatrix = Matrix<Rational>;
using IntegerMatrix = Matrix<Integer>;

/// Sentinel returned as the valuation of zero.
inline constexpr int valuation_infinity = INT_MAX;

inline bool is_prime(long n)
{
    if (n < 2) {
        return false;
    }
    for (long d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            return false;
        }
    }
    return true;
}

inline int valuation(const Integer &x, long p)
{
    if (x == 0) {
        return valuation_infinity;
    }
    Integer t = abs(x);
    Integer pp = p;
    int v = 0;
    while (mpz_divisible_p(t.get_mpz_t(), pp.get_mpz_t())) {
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), pp.get_mpz_t());
        ++v;
    }
    return v;
}

inline int valuation(const Rational &x, long p)
{
    if (x == 0) {
        return valuation_infinity;
    }
    return valuation(Integer(x.get_num()), p) - valuation(Integer(x.get_den()), p);
}

inline bool is_p_integral(const Rational &x, long p)
{
    return valuation(Integer(x.get_den()), p) == 0;
}

inline Rational rational_power(const Rational &base, long e)
{
    Rational out = 1;
    Rational b = base;
    long k = e < 0 ? -e : e;
    while (k > 0) {
        if (k & 1) {
            out *= b;
        }
        b *= b;
        k >>= 1;
    }
    if (e < 0) {
        if (out == 0) {
            throw std::domain_error("negative power of zero");
        }
        out = 1 / out;
    }
    return out;
}

/// Parses "n", "n/d" or a decimal literal such as "-1.25e-3" into an exact
/// rational. Binary floating point is never involved.
inline Rational parse_rational(std::string_view text)
{
    auto fail = [&]() -> Rational { throw parse_error("not an exact rational: '" + std::string(text) + "'"); };
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.pop_back();
    }
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) {
        ++start;
    }
    s = s.substr(start);
    if (s.empty()) {
        return fail();
    }
    if (auto slash = s.find('/'); slash != std::string::npos) {
        Integer num, den;
        if (num.set_str(s.substr(0, slash), 10) != 0 || den.set_str(s.substr(slash + 1), 10) != 0 || den == 0) {
            return fail();
        }
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') {
        negative = s[i] == '-';
        ++i;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    bool any_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            any_digit = true;
            if (seen_point) {
                ++frac_digits;
            }
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit) {
        return fail();
    }
    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') {
            return fail();
        }
        std::string exp_text = s.substr(i + 1);
        if (exp_text.empty()) {
            return fail();
        }
        std::size_t used = 0;
        try {
            exponent = std::stol(exp_text, &used);
        } catch (const std::exception &) {
            return fail();
        }
        if (used != exp_text.size()) {
            return fail();
        }
    }
    Integer mantissa(digits, 10);
    Rational q(mantissa);
    q *= rational_power(Rational(10), exponent - frac_digits);
    if (negative) {
        q = -q;
    }
    return q;
}

/// Canonical text form: "n" for integers, "n/d" otherwise.
inline std::string to_string(const Rational &q)
{
    return q.get_str(10);
}

inline std::string to_string(const Integer &z)
{
    return z.get_str(10);
}

// ---------------------------------------------------------------------------
// Exact Gaussian elimination over Q.

struct RowEchelon
{
    RationalMatrix reduced;               // reduced row echelon form
    std::vector<std::size_t> pivot_cols;  // pivot column of each nonzero row
};

inline RowEchelon row_reduce(RationalMatrix m)
{
    RowEchelon out;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t pivot = row;
        while (pivot < m.rows() && m(pivot, col) == 0) {
            ++pivot;
        }
        if (pivot == m.rows()) {
            continue;
        }
        m.swap_rows(row, pivot);
        Rational inv = 1 / m(row, col);
        for (std::size_t j = col; j < m.cols(); ++j) {
            m(row, j) *= inv;
        }
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == row || m(i, col) == 0) {
                continue;
            }
            Rational f = m(i, col);
            for (std::size_t j = col; j < m.cols(); ++j) {
                m(i, j) -= f * m(row, j);
            }
        }
        out.pivot_cols.push_back(col);
        ++row;
    }
    out.reduced = std::move(m);
    return out;
}

inline std::size_t rank(const RationalMatrix &m)
{
    return row_reduce(m).pivot_cols.size();
}

inline Rational determinant(RationalMatrix m)
{
    if (!m.is_square()) {
        throw std::invalid_argument("determinant of non-square matrix");
    }
    Rational det = 1;
    const std::size_t n = m.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && m(pivot, col) == 0) {
            ++pivot;
        }
        if (pivot == n) {
            return 0;
        }
        if (pivot != col) {
            m.swap_rows(pivot, col);
            det = -det;
        }
        det *= m(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            if (m(i, col) == 0) {
                continue;
            }
            Rational f = m(i, col) / m(col, col);
            for (std::size_t j = col; j < n; ++j) {
                m(i, j) -= f * m(col, j);
            }
        }
    }
    return det;
}

/// Solves a x = b for x when a has full column rank; nullopt when the system
/// is inconsistent.
inline std::optional<RationalMatrix> solve(const RationalMatrix &a, const RationalMatrix &b)
{
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("solve: row mismatch");
    }
    RowEchelon e = row_reduce(hconcat(a, b));
    const std::size_t n = a.cols();
    std::size_t rank_a = 0;
    for (std::size_t c : e.pivot_cols) {
        if (c >= n) {
            return std::nullopt;
        }
        ++rank_a;
    }
    if (rank_a != n) {
        throw std::invalid_argument("solve: matrix lacks full column rank");
    }
    RationalMatrix x(n, b.cols(), Rational(0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            x(i, j) = e.reduced(i, n + j);
        }
    }
    return x;
}

inline RationalMatrix inverse(const RationalMatrix &a)
{
    if (!a.is_square()) {
        throw std::invalid_argument("inverse of non-square matrix");
    }
    if (rank(a) != a.rows()) {
        throw std::domain_error("inverse of singular matrix");
    }
    return *solve(a, RationalMatrix::identity(a.rows()));
}

/// Basis (as columns) of the right kernel of m over Q.
inline RationalMatrix kernel_basis(const RationalMatrix &m)
{
    RowEchelon e = row_reduce(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (std::size_t c : e.pivot_cols) {
        is_pivot[c] = true;
    }
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (!is_pivot[c]) {
            free_cols.push_back(c);
        }
    }
    RationalMatrix k(m.cols(), free_cols.size(), Rational(0));
    for (std::size_t f = 0; f < free_cols.size(); ++f) {
        k(free_cols[f], f) = 1;
        for (std::size_t r = 0; r < e.pivot_cols.size(); ++r) {
            k(e.pivot_cols[r], f) = -e.reduced(r, free_cols[f]);
        }
    }
    return k;
}

inline RationalMatrix to_rational(const IntegerMatrix &m)
{
    return m.map([](const Integer &x) { return Rational(x); });
}

/// Least common multiple of all denominators (1 for the empty matrix).
inline Integer common_denominator(const RationalMatrix &m)
{
    Integer l = 1;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (const auto &x : m.row(i)) {
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
        }
    }
    return l;
}

inline IntegerMatrix to_integer_exact(const RationalMatrix &m)
{
    IntegerMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j).get_den() != 1) {
                throw std::invalid_argument("matrix entry is not an integer");
            }
            out(i, j) = m(i, j).get_num();
        }
    }
    return out;
}

inline bool is_integral(const RationalMatrix &m)
{
    return common_denominator(m) == 1;
}

inline bool is_p_integral(const RationalMatrix &m, long p)
{
    return valuation(common_denominator(m), p) == 0;
}

/// Minimum p-adic valuation over all entries (valuation_infinity if zero).
inline int min_valuation(const RationalMatrix &m, long p)
{
    int v = valuation_infinity;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (const auto &x : m.row(i)) {
            if (x != 0) {
                v = std::min(v, valuation(x, p));
            }
        }
    }
    return v;
}

} // namespace motive_height

#endif
