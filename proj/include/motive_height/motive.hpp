#ifndef MOTIVE_HEIGHT_MOTIVE_HPP
#define MOTIVE_HEIGHT_MOTIVE_HPP

// Realization data of a Z-motive over Q and its height.
//
// Coordinates: the de Rham reference basis is adapted to the Hodge filtration
// (block r of width h(r), M^r spanned by blocks >= r), the Betti lattice is
// Z^n, and column j of the period matrix P is de Rham reference vector j in
// Betti coordinates.

#include <numeric>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ball.hpp"
#include "errors.hpp"
#include "fl.hpp"
#include "hodge.hpp"
#include "lines.hpp"

namespace motive_height
{

struct MotiveType
{
    int weight = 0;
    int a = 0;                      // window [a, b)
    std::vector<std::size_t> hodge; // h(a), ..., h(b-1)

    int b() const noexcept { return a + static_cast<int>(hodge.size()); }
    std::size_t rank() const { return std::accumulate(hodge.begin(), hodge.end(), std::size_t{0}); }

    std::size_t hodge_number(int r) const
    {
        if (r < a || r >= b()) {
            return 0;
        }
        return hodge[static_cast<std::size_t>(r - a)];
    }

    /// dim M_dR / M^r_dR.
    std::size_t codimension(int r) const
    {
        std::size_t k = 0;
        for (int i = a; i < r && i < b(); ++i) {
            k += hodge_number(i);
        }
        return k;
    }

    friend bool operator==(const MotiveType &, const MotiveType &) = default;
};

using LocalDatum = std::variant<FilPhiModule, LocalLatticeSpec>;

struct MotiveData
{
    std::string id;
    MotiveType type;
    ComplexMatrix period;
    std::map<long, LocalDatum> local;
    std::set<long> bad_primes;

    std::size_t rank() const { return type.rank(); }

    HodgeStructure hodge() const
    {
        HodgeStructure h;
        h.weight = type.weight;
        h.first = type.a;
        h.hodge_numbers = type.hodge;
        h.basis = period;
        return h;
    }

    long precision() const { return hodge().precision(); }
};

// ---------------------------------------------------------------------------
// Validation

struct ValidationIssue
{
    std::string kind;     // e.g. "WindowTooWide", "StrongDivisibility", "Purity"
    std::string location; // e.g. "local[p=5]", "period"
    std::string message;
};

struct ValidationReport
{
    std::vector<ValidationIssue> issues;
    PurityReport purity;

    bool ok() const noexcept { return issues.empty(); }

    std::string summary() const
    {
        std::string out;
        for (const auto &i : issues) {
            if (!out.empty()) {
                out += "\n";
            }
            out += i.kind + " at " + i.location + ": " + i.message;
        }
        return out;
    }
};

inline std::string prime_location(long p) { return "local[p=" + std::to_string(p) + "]"; }

inline ValidationReport validate(const MotiveData &m)
{
    ValidationReport report;
    auto issue = [&](std::string kind, std::string where, std::string what) {
        report.issues.push_back({std::move(kind), std::move(where), std::move(what)});
    };
    const std::size_t n = m.rank();
    if (n == 0) {
        issue("Shape", "type", "rank is zero");
        return report;
    }
    if (!m.period.is_square() || m.period.rows() != n) {
        issue("Shape", "period", "period matrix is not " + std::to_string(n) + "x" + std::to_string(n));
        return report;
    }
    report.purity = purity_check(m.hodge());
    if (!report.purity.pass) {
        issue("Purity", "period", report.purity.message);
    }
    const int a = m.type.a, b = m.type.b();
    for (const auto &[p, datum] : m.local) {
        const std::string where = prime_location(p);
        if (!is_prime(p)) {
            issue("Shape", where, "not a prime");
            continue;
        }
        if (const auto *fl = std::get_if<FilPhiModule>(&datum)) {
            if (fl->p != p) {
                issue("Shape", where, "FL datum is declared at p=" + std::to_string(fl->p));
                continue;
            }
            if (fl->rank() != n) {
                issue("Shape", where, "FL datum has rank " + std::to_string(fl->rank()));
                continue;
            }
            if (b - a > p - 1) {
                issue("WindowTooWide", where,
                      "window (" + std::to_string(a) + "," + std::to_string(b) + ") is longer than p-1");
                continue;
            }
            try {
                StrongDivisibilityReport sd = check_strong_divisibility(*fl);
                if (!sd.pass) {
                    issue("StrongDivisibility", where, sd.message);
                    continue;
                }
                for (int r = a; r <= b; ++r) {
                    if (fl->filtration(r).rank() != n - m.type.codimension(r)) {
                        issue("Filtration", where,
                              "D^" + std::to_string(r) + " has rank " + std::to_string(fl->filtration(r).rank()) +
                                  ", the Hodge type requires " + std::to_string(n - m.type.codimension(r)));
                        break;
                    }
                }
                local_valuations(*fl, a, b);
            } catch (const window_too_wide &e) {
                issue("WindowTooWide", where, e.what());
            } catch (const invalid_data &e) {
                issue("Filtration", where, e.what());
            }
        } else {
            const auto &spec = std::get<LocalLatticeSpec>(datum);
            if (spec.p != p) {
                issue("Shape", where, "override is declared at p=" + std::to_string(spec.p));
            }
        }
    }
    return report;
}

inline void require_valid(const MotiveData &m)
{
    ValidationReport r = validate(m);
    if (!r.ok()) {
        if (r.issues.front().kind == "WindowTooWide") {
            throw window_too_wide(r.summary());
        }
        throw invalid_data(r.summary());
    }
}

// ---------------------------------------------------------------------------
// Lattices

inline LocalLatticeSpec local_spec(const MotiveData &m, long p)
{
    auto it = m.local.find(p);
    if (it == m.local.end()) {
        LocalLatticeSpec s;
        s.p = p;
        s.provenance = Provenance::default_good;
        return s;
    }
    if (const auto *fl = std::get_if<FilPhiModule>(&it->second)) {
        return local_valuations(*fl, m.type.a, m.type.b());
    }
    return std::get<LocalLatticeSpec>(it->second);
}

inline std::map<long, LocalLatticeSpec> local_specs(const MotiveData &m)
{
    std::map<long, LocalLatticeSpec> out;
    for (const auto &[p, datum] : m.local) {
        out.emplace(p, local_spec(m, p));
    }
    return out;
}

inline ValuationMap global_valuations(const std::map<long, LocalLatticeSpec> &specs, int r)
{
    ValuationMap v;
    for (const auto &[p, s] : specs) {
        v.add(p, s.at(r));
    }
    return v;
}

/// p ↦ v_{p,r} for every prime with local data.
inline ValuationMap global_valuations(const MotiveData &m, int r)
{
    return global_valuations(local_specs(m), r);
}

/// Generator of L_r(M)_Z relative to the reference generator of
/// det(M_dR / M^r_dR).
inline Rational global_lattice(const MotiveData &m, int r)
{
    require_valid(m);
    return intersect_adelic(global_valuations(m, r));
}

struct Contribution
{
    long p;
    int r;
    long v;
    Provenance provenance;
};

struct HeightOptions
{
    // ⊗_r (L_r^{-1} ⊗ L_{r+1})^{⊗r} instead of the windowed formula.
    bool simple_definition = false;
};

namespace detail
{

// Exponent of L_r in the lattice formula.
inline long lattice_exponent(int r, int a, int b, bool simple)
{
    if (simple) {
        // Σ_i i·(δ_{r,i+1} - δ_{r,i}) over i in [a, b)
        long e = 0;
        if (r - 1 >= a && r - 1 < b) {
            e += r - 1;
        }
        if (r >= a && r < b) {
            e -= r;
        }
        return e;
    }
    if (r > a && r < b) {
        return -1;
    }
    if (r == b) {
        return b - 1;
    }
    return 0;
}

} // namespace detail

inline MetrizedLine assemble_height_line(const MotiveData &m, const HeightOptions &options = {})
{
    require_valid(m);
    const int a = m.type.a, b = m.type.b();
    const auto specs = local_specs(m);
    std::vector<std::pair<MetrizedLine, long>> factors;
    for (int r = a; r <= b; ++r) {
        long e = detail::lattice_exponent(r, a, b, options.simple_definition);
        if (e == 0) {
            continue;
        }
        factors.push_back({MetrizedLine{"L_" + std::to_string(r), intersect_adelic(global_valuations(specs, r)),
                                        std::nullopt},
                           e});
    }
    MetrizedLine lattice_part = line_tensor(factors);
    MetrizedLine out;
    out.label = "L(M)[" + lattice_part.label + "]";
    out.lattice_scalar = lattice_part.lattice_scalar;
    out.metric_ref = reference_metric(m.hodge()).norm;
    return out;
}

struct HeightReport
{
    int a = 0, b = 0;
    Real h;
    Real H;               // |e|^{-1}
    Real metric;          // |e|
    Real reference_norm;  // |ref|
    Complex pairing;      // z, up to sign
    Rational lattice_scalar = 1;
    std::vector<Contribution> per_prime;
    std::vector<std::string> warnings;
};

inline HeightReport height(const MotiveData &m, const HeightOptions &options = {})
{
    MetrizedLine line = assemble_height_line(m, options);
    const long prec = m.precision();
    HeightReport out;
    out.a = m.type.a;
    out.b = m.type.b();
    LineMetric lm = reference_metric(m.hodge());
    out.pairing = lm.pairing;
    out.reference_norm = lm.norm;
    out.lattice_scalar = line.lattice_scalar;
    out.metric = line.generator_metric();
    out.h = -log(out.reference_norm);
    if (line.lattice_scalar != 1) {
        out.h -= log(Real::from_rational(line.lattice_scalar, prec));
    }
    out.H = Real(1, prec) / out.metric;
    for (const auto &[p, s] : local_specs(m)) {
        for (int r = out.a; r <= out.b; ++r) {
            if (s.at(r) != 0) {
                out.per_prime.push_back({p, r, s.at(r), s.provenance});
            }
        }
    }
    for (long p : m.bad_primes) {
        if (!m.local.count(p)) {
            out.warnings.push_back("bad prime " + std::to_string(p) + " has no local data; treated as default");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Constructions

/// Same datum with the window extended or trimmed to [a, b); the Hodge
/// numbers dropped by trimming must vanish.
inline MotiveData with_window(const MotiveData &m, int a, int b)
{
    if (a > b) {
        throw invalid_data("window (" + std::to_string(a) + "," + std::to_string(b) + ") has a > b");
    }
    for (int r = m.type.a; r < m.type.b(); ++r) {
        if ((r < a || r >= b) && m.type.hodge_number(r) != 0) {
            throw window_mismatch("window (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") does not contain the Hodge type");
        }
    }
    MotiveData out = m;
    out.type.a = a;
    out.type.hodge.clear();
    for (int r = a; r < b; ++r) {
        out.type.hodge.push_back(m.type.hodge_number(r));
    }
    return out;
}

/// Change of de Rham reference basis e' = e·T for T invertible and adapted
/// (block r of e' lies in M^r and spans it modulo M^{r+1}).
inline MotiveData change_dr_basis(const MotiveData &m, const RationalMatrix &t)
{
    const std::size_t n = m.rank();
    if (t.rows() != n || t.cols() != n) {
        throw std::invalid_argument("change_dr_basis: wrong size");
    }
    MotiveData out = m;
    out.period = m.period * to_complex(t, m.precision());
    const RationalMatrix tinv = inverse(t);
    // det of the diagonal blocks, for the override bookkeeping.
    std::map<int, Rational> block_det;
    for (int r = m.type.a; r < m.type.b(); ++r) {
        const std::size_t off = m.type.codimension(r), d = m.type.hodge_number(r);
        for (std::size_t i = 0; i < off; ++i) {
            for (std::size_t j = off; j < off + d; ++j) {
                if (t(i, j) != 0) {
                    throw invalid_data("change_dr_basis: matrix is not adapted to the filtration");
                }
            }
        }
        block_det[r] = d == 0 ? Rational(1) : determinant(t.block(off, off, d, d));
    }
    // Default-good primes dividing a block determinant get explicit values.
    std::set<long> touched;
    for (const auto &[r, d] : block_det) {
        for (const Integer &z : {Integer(d.get_num()), Integer(d.get_den())}) {
            Integer rest = abs(z);
            for (long q = 2; rest > 1; ++q) {
                if (!mpz_divisible_ui_p(rest.get_mpz_t(), static_cast<unsigned long>(q))) {
                    continue;
                }
                touched.insert(q);
                while (mpz_divisible_ui_p(rest.get_mpz_t(), static_cast<unsigned long>(q))) {
                    rest /= q;
                }
            }
        }
    }
    for (long q : touched) {
        if (!out.local.count(q)) {
            LocalLatticeSpec s;
            s.p = q;
            s.provenance = Provenance::explicit_override;
            for (int r = m.type.a; r <= m.type.b(); ++r) {
                s.values[r] = 0;
            }
            out.local[q] = s;
        }
    }
    for (auto &[p, datum] : out.local) {
        if (auto *fl = std::get_if<FilPhiModule>(&datum)) {
            *fl = transformed(*fl, tinv);
        } else {
            auto &spec = std::get<LocalLatticeSpec>(datum);
            for (auto &[r, v] : spec.values) {
                for (int i = m.type.a; i < r && i < m.type.b(); ++i) {
                    v -= valuation(block_det[i], p);
                }
            }
        }
    }
    return out;
}

namespace detail
{

// Permutation taking [M1 coordinates | M2 coordinates] to the interleaved
// order block r of M1, block r of M2, r ascending: column j of the result is
// the new position of old coordinate j.
inline RationalMatrix interleave_permutation(const MotiveType &t1, const MotiveType &t2)
{
    const std::size_t n1 = t1.rank(), n = n1 + t2.rank();
    RationalMatrix perm(n, n, Rational(0));
    std::size_t pos = 0;
    for (int r = t1.a; r < t1.b(); ++r) {
        for (std::size_t k = 0; k < t1.hodge_number(r); ++k) {
            perm(pos++, t1.codimension(r) + k) = 1;
        }
        for (std::size_t k = 0; k < t2.hodge_number(r); ++k) {
            perm(pos++, n1 + t2.codimension(r) + k) = 1;
        }
    }
    return perm;
}

inline FilPhiModule default_fl(const MotiveType &t, long p)
{
    return adapted_fl_module(p, t.a, t.hodge);
}

} // namespace detail

/// Block sum of two data of equal weight and window.
inline MotiveData direct_sum(const MotiveData &m1, const MotiveData &m2)
{
    if (m1.type.weight != m2.type.weight) {
        throw weight_mismatch("direct_sum: weights " + std::to_string(m1.type.weight) + " and " +
                              std::to_string(m2.type.weight));
    }
    if (m1.type.a != m2.type.a || m1.type.b() != m2.type.b()) {
        throw window_mismatch("direct_sum: windows differ");
    }
    MotiveData out;
    out.id = m1.id + "+" + m2.id;
    out.type.weight = m1.type.weight;
    out.type.a = m1.type.a;
    for (int r = m1.type.a; r < m1.type.b(); ++r) {
        out.type.hodge.push_back(m1.type.hodge_number(r) + m2.type.hodge_number(r));
    }
    out.period = direct_sum(m1.hodge(), m2.hodge()).basis;
    const RationalMatrix perm = detail::interleave_permutation(m1.type, m2.type);
    std::set<long> primes;
    for (const auto &[p, d] : m1.local) {
        primes.insert(p);
    }
    for (const auto &[p, d] : m2.local) {
        primes.insert(p);
    }
    const int len = m1.type.b() - m1.type.a;
    for (long p : primes) {
        auto fl_of = [&](const MotiveData &m) -> std::optional<FilPhiModule> {
            auto it = m.local.find(p);
            if (it == m.local.end()) {
                if (len <= p - 1) {
                    return detail::default_fl(m.type, p);
                }
                return std::nullopt;
            }
            if (const auto *fl = std::get_if<FilPhiModule>(&it->second)) {
                return *fl;
            }
            return std::nullopt;
        };
        auto f1 = fl_of(m1), f2 = fl_of(m2);
        if (f1 && f2) {
            out.local[p] = transformed(fl_direct_sum(*f1, *f2), perm);
        } else {
            LocalLatticeSpec s1 = local_spec(m1, p), s2 = local_spec(m2, p);
            LocalLatticeSpec sum;
            sum.p = p;
            sum.provenance = Provenance::explicit_override;
            for (int r = out.type.a; r <= out.type.b(); ++r) {
                sum.values[r] = s1.at(r) + s2.at(r);
            }
            out.local[p] = sum;
        }
    }
    out.bad_primes = m1.bad_primes;
    out.bad_primes.insert(m2.bad_primes.begin(), m2.bad_primes.end());
    return out;
}

/// M(r): weight w - 2r, gr^j M(r) = gr^{j+r} M, P·(2πi)^{-r}.
inline MotiveData tate_twist(const MotiveData &m, int r)
{
    MotiveData out = m;
    out.id = m.id + "(" + std::to_string(r) + ")";
    out.type.weight = m.type.weight - 2 * r;
    out.type.a = m.type.a - r;
    const Complex factor = pow(Complex::two_pi_i(m.precision()), -r);
    for (std::size_t i = 0; i < out.period.rows(); ++i) {
        for (std::size_t j = 0; j < out.period.cols(); ++j) {
            out.period(i, j) = m.period(i, j) * factor;
        }
    }
    for (auto &[p, datum] : out.local) {
        if (auto *fl = std::get_if<FilPhiModule>(&datum)) {
            *fl = tate_twist(*fl, r);
        } else {
            auto &spec = std::get<LocalLatticeSpec>(datum);
            std::map<int, long> shifted;
            for (const auto &[j, v] : spec.values) {
                shifted[j - r] = v;
            }
            spec.values = shifted;
        }
    }
    return out;
}

/// Q(r): rank 1, weight -2r, gr^{-r}, period (2πi)^{-r}. FL data are
/// attached at the listed primes; all other primes are default-good.
inline MotiveData tate_motive(int r, long prec = default_precision, const std::vector<long> &fl_primes = {})
{
    MotiveData m;
    m.id = "tate:" + std::to_string(r);
    m.type.weight = 0;
    m.type.a = 0;
    m.type.hodge = {1};
    m.period = ComplexMatrix(1, 1, Complex(Real(1, prec)));
    for (long p : fl_primes) {
        m.local[p] = trivial_fl_module(p);
    }
    MotiveData out = tate_twist(m, r);
    out.id = m.id;
    return out;
}

} // namespace motive_height

#endif
