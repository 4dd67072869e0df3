#ifndef MOTIVE_HEIGHT_FL_HPP
#define MOTIVE_HEIGHT_FL_HPP

// Filtered φ-modules in the Fontaine–Laffaille range over Q_p.
//
// Lattices live in Q^n (the de Rham reference coordinates) and are only ever
// compared after localization at p, so a lattice stands for its Z_(p)-span.

#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lines.hpp"
#include "rational.hpp"

namespace motive_height
{

struct FilPhiModule
{
    long p = 2;
    Lattice lattice;            // D, full rank
    RationalMatrix phi;         // φ in ambient coordinates
    int first = 0;              // a: D^a = D
    std::vector<Lattice> steps; // D^a, D^{a+1}, ..., D^{b-1}; D^b = 0

    std::size_t rank() const noexcept { return lattice.ambient_dimension(); }
    int last() const noexcept { return first + static_cast<int>(steps.size()); }

    Lattice filtration(int i) const
    {
        if (i <= first) {
            return lattice;
        }
        if (i >= last()) {
            return Lattice::zero(rank());
        }
        return steps[static_cast<std::size_t>(i - first)];
    }

    /// Largest i with D^i = D (at p).
    int effective_first() const
    {
        int i = first;
        while (i + 1 < last() && locally_equal(filtration(i + 1), lattice, p)) {
            ++i;
        }
        return i;
    }

    /// Smallest i with D^i = 0.
    int effective_last() const
    {
        int i = last();
        while (i - 1 > first && filtration(i - 1).rank() == 0) {
            --i;
        }
        return i;
    }
};

enum class Provenance { computed_from_fl, explicit_override, default_good };

inline const char *to_string(Provenance p)
{
    switch (p) {
    case Provenance::computed_from_fl:
        return "computed-from-FL";
    case Provenance::explicit_override:
        return "explicit-override";
    case Provenance::default_good:
        return "default-good";
    }
    return "?";
}

/// v_p of L_r(T_p) relative to the reference generator, for r in [a, b].
/// Outside that range the values are constant.
struct LocalLatticeSpec
{
    long p = 2;
    std::map<int, long> values;
    Provenance provenance = Provenance::default_good;

    long at(int r) const
    {
        if (values.empty()) {
            return 0;
        }
        if (r <= values.begin()->first) {
            return values.begin()->second;
        }
        if (r >= values.rbegin()->first) {
            return values.rbegin()->second;
        }
        auto it = values.find(r);
        if (it == values.end()) {
            throw invalid_data("local lattice spec at p=" + std::to_string(p) + " has no value for r=" +
                               std::to_string(r));
        }
        return it->second;
    }

    friend bool operator==(const LocalLatticeSpec &, const LocalLatticeSpec &) = default;
};

// ---------------------------------------------------------------------------
// Structural checks

/// Problems with the shape of the datum (nestedness, saturation, D^a = D,
/// invertible φ); empty when the datum is well formed.
inline std::vector<std::string> structure_problems(const FilPhiModule &m)
{
    std::vector<std::string> out;
    const long p = m.p;
    if (!is_prime(p)) {
        out.push_back("p=" + std::to_string(p) + " is not prime");
        return out;
    }
    const std::size_t n = m.rank();
    if (!m.lattice.is_full_rank()) {
        out.push_back("D is not of full rank");
        return out;
    }
    if (m.phi.rows() != n || m.phi.cols() != n || rank(m.phi) != n) {
        out.push_back("phi is not an invertible " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
    if (m.steps.empty() || !locally_equal(m.steps.front(), m.lattice, p)) {
        out.push_back("D^" + std::to_string(m.first) + " differs from D");
    }
    for (int i = m.first; i < m.last(); ++i) {
        Lattice di = m.filtration(i);
        if (di.ambient_dimension() != n) {
            out.push_back("D^" + std::to_string(i) + " lives in the wrong dimension");
            continue;
        }
        if (!locally_contains(m.lattice, di, p)) {
            out.push_back("D^" + std::to_string(i) + " is not contained in D");
            continue;
        }
        if (!locally_contains(di, m.filtration(i + 1), p)) {
            out.push_back("D^" + std::to_string(i + 1) + " is not contained in D^" + std::to_string(i));
        }
        // Saturation: D/D^i has no p-torsion.
        if (di.rank() > 0) {
            RationalMatrix x = *coordinates_in(m.lattice, di);
            Integer den = common_denominator(x);
            SmithForm s = smith_normal_form(to_integer_exact(scaled(x, Rational(den))));
            for (const Integer &d : s.divisors) {
                if (d != 0 && valuation(d, p) > 0) {
                    out.push_back("D^" + std::to_string(i) + " is not saturated in D at p=" + std::to_string(p));
                    break;
                }
            }
        }
    }
    return out;
}

inline void require_structure(const FilPhiModule &m)
{
    auto problems = structure_problems(m);
    if (!problems.empty()) {
        throw invalid_data("FL datum at p=" + std::to_string(m.p) + ": " + problems.front());
    }
}

inline void require_window(const FilPhiModule &m)
{
    const int len = m.effective_last() - m.effective_first();
    if (len > m.p - 1) {
        throw window_too_wide("FL datum at p=" + std::to_string(m.p) + ": filtration length " +
                              std::to_string(len) + " exceeds p-1");
    }
}

// ---------------------------------------------------------------------------
// Strong divisibility

struct StrongDivisibilityReport
{
    bool pass = false;
    Lattice witness; // S = Σ_i p^{-i} φ D^i
    std::string message;
};

inline Lattice strong_divisibility_sum(const FilPhiModule &m)
{
    const std::size_t n = m.rank();
    RationalMatrix gens(n, 0);
    for (int i = m.first; i < m.last(); ++i) {
        Lattice di = m.filtration(i);
        if (di.rank() == 0) {
            continue;
        }
        gens = hconcat(gens, scaled(m.phi * di.basis(), rational_power(Rational(m.p), -i)));
    }
    if (gens.cols() == 0) {
        return Lattice::zero(n);
    }
    return Lattice::from_generators(gens);
}

inline StrongDivisibilityReport check_strong_divisibility(const FilPhiModule &m)
{
    require_structure(m);
    require_window(m);
    StrongDivisibilityReport report;
    report.witness = strong_divisibility_sum(m);
    if (report.witness.rank() != m.rank()) {
        report.message = "sum of p^-i phi D^i has rank " + std::to_string(report.witness.rank());
        return report;
    }
    const bool up = locally_contains(m.lattice, report.witness, m.p);
    const bool down = locally_contains(report.witness, m.lattice, m.p);
    report.pass = up && down;
    if (!up) {
        report.message = "sum of p^-i phi D^i is not contained in D";
    } else if (!down) {
        report.message = "sum of p^-i phi D^i is a proper sublattice of D (index p^" +
                         std::to_string(quotient_lattice_valuation(m.lattice, report.witness, m.p)) + ")";
    }
    return report;
}

inline void require_strong_divisibility(const FilPhiModule &m)
{
    auto report = check_strong_divisibility(m);
    if (!report.pass) {
        throw invalid_data("FL datum at p=" + std::to_string(m.p) + " fails strong divisibility: " + report.message);
    }
}

// ---------------------------------------------------------------------------
// Constructions

/// D(r)^i = D^{i+r}, φ(r) = p^{-r} φ.
inline FilPhiModule tate_twist(const FilPhiModule &m, int r)
{
    FilPhiModule out = m;
    out.first = m.first - r;
    out.phi = scaled(m.phi, rational_power(Rational(m.p), -r));
    require_window(out);
    return out;
}

/// Datum with D = Z_p^n, φ = 1 and D^0 = D, D^1 = 0.
inline FilPhiModule trivial_fl_module(long p, std::size_t n = 1)
{
    FilPhiModule m;
    m.p = p;
    m.lattice = Lattice::standard(n);
    m.phi = RationalMatrix::identity(n);
    m.first = 0;
    m.steps = {m.lattice};
    return m;
}

/// Standard lattice with the filtration adapted to the reference basis
/// (D^r spanned by the last Σ_{i>=r} h(i) vectors) and φ = g·diag(p^{r(j)})
/// where r(j) is the block index of basis vector j. With g = 1 this is the
/// simplest datum compatible with a Hodge type.
inline FilPhiModule adapted_fl_module(long p, int first, const std::vector<std::size_t> &hodge_numbers,
                                      const RationalMatrix &g = {})
{
    std::size_t n = 0;
    for (auto h : hodge_numbers) {
        n += h;
    }
    FilPhiModule m;
    m.p = p;
    m.lattice = Lattice::standard(n);
    m.first = first;
    RationalMatrix diag = RationalMatrix::identity(n);
    std::size_t col = 0;
    for (std::size_t k = 0; k < hodge_numbers.size(); ++k) {
        const int r = first + static_cast<int>(k);
        m.steps.push_back(intersect_with_tail_subspace(m.lattice, col));
        for (std::size_t j = 0; j < hodge_numbers[k]; ++j, ++col) {
            diag(col, col) = rational_power(Rational(p), r);
        }
    }
    m.phi = g.rows() == 0 ? diag : g * diag;
    return m;
}

/// Block sum: coordinates of m1 first, then m2.
inline FilPhiModule fl_direct_sum(const FilPhiModule &m1, const FilPhiModule &m2)
{
    if (m1.p != m2.p) {
        throw std::invalid_argument("fl_direct_sum: different primes");
    }
    FilPhiModule out;
    out.p = m1.p;
    out.lattice = Lattice::from_generators(block_diagonal(m1.lattice.basis(), m2.lattice.basis()));
    out.phi = block_diagonal(m1.phi, m2.phi);
    out.first = std::min(m1.first, m2.first);
    const int last = std::max(m1.last(), m2.last());
    for (int i = out.first; i < last; ++i) {
        RationalMatrix b = block_diagonal(m1.filtration(i).basis(), m2.filtration(i).basis());
        out.steps.push_back(b.cols() == 0 ? Lattice::zero(out.rank()) : Lattice::from_generators(b));
    }
    return out;
}

/// Image under the ambient change of coordinates x ↦ g x.
inline FilPhiModule transformed(const FilPhiModule &m, const RationalMatrix &g)
{
    FilPhiModule out;
    out.p = m.p;
    out.lattice = m.lattice.transformed(g);
    out.phi = g * m.phi * inverse(g);
    out.first = m.first;
    for (const auto &s : m.steps) {
        out.steps.push_back(s.transformed(g));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cohomology

/// ker(1 - φ) ∩ D^0, saturated.
inline Lattice h0(const FilPhiModule &m)
{
    require_strong_divisibility(m);
    const std::size_t n = m.rank();
    Lattice d0 = m.filtration(0);
    if (d0.rank() == 0) {
        return Lattice::zero(n);
    }
    RationalMatrix one_minus_phi = RationalMatrix::identity(n) - m.phi;
    Lattice coeffs = saturated_kernel(one_minus_phi * d0.basis());
    if (coeffs.rank() == 0) {
        return Lattice::zero(n);
    }
    return Lattice::from_generators(d0.basis() * coeffs.basis());
}

struct H1cf
{
    std::size_t free_rank = 0;
    std::vector<Integer> torsion; // p-power elementary divisors > 1
};

/// Structure of coker(1 - φ : D^0 → D) over Z_p.
inline H1cf h1cf(const FilPhiModule &m)
{
    require_strong_divisibility(m);
    const std::size_t n = m.rank();
    H1cf out;
    Lattice d0 = m.filtration(0);
    if (d0.rank() == 0) {
        out.free_rank = n;
        return out;
    }
    RationalMatrix image = (RationalMatrix::identity(n) - m.phi) * d0.basis();
    RationalMatrix x = *solve(m.lattice.basis(), image);
    if (!is_p_integral(x, m.p)) {
        throw invalid_data("h1cf: (1 - phi) does not map D^0 into D");
    }
    // Denominators are p-units; clearing them does not change the structure at p.
    Integer den = common_denominator(x);
    SmithForm s = smith_normal_form(to_integer_exact(scaled(x, Rational(den))));
    std::size_t r = 0;
    for (const Integer &d : s.divisors) {
        if (d == 0) {
            continue;
        }
        ++r;
        int v = valuation(d, m.p);
        if (v > 0) {
            Integer t;
            mpz_ui_pow_ui(t.get_mpz_t(), static_cast<unsigned long>(m.p), static_cast<unsigned long>(v));
            out.torsion.push_back(t);
        }
    }
    out.free_rank = n - r;
    return out;
}

// ---------------------------------------------------------------------------
// Local integral structure

/// v(r) = v_p(det(D/D^r)) against the reference basis of Q^n / M^r, where M^r
/// is the span of the last rank(D^r) coordinate vectors. Requires D^r to be
/// D ∩ M^r at p for every r in [a, b].
inline LocalLatticeSpec local_valuations(const FilPhiModule &m, int a, int b)
{
    require_strong_divisibility(m);
    const std::size_t n = m.rank();
    LocalLatticeSpec out;
    out.p = m.p;
    out.provenance = Provenance::computed_from_fl;
    for (int r = a; r <= b; ++r) {
        Lattice dr = m.filtration(r);
        const std::size_t k = n - dr.rank();
        if (!locally_equal(dr, intersect_with_tail_subspace(m.lattice, k), m.p)) {
            throw invalid_data("local_valuations: D^" + std::to_string(r) +
                               " is not cut out by the last reference coordinates");
        }
        if (k == 0) {
            out.values[r] = 0;
            continue;
        }
        Lattice image = Lattice::from_generators(m.lattice.basis().block(0, 0, k, n));
        out.values[r] = valuation(image.determinant(), m.p);
    }
    return out;
}

} // namespace motive_height

#endif
