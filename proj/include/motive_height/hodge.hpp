#ifndef MOTIVE_HEIGHT_HODGE_HPP
#define MOTIVE_HEIGHT_HODGE_HPP

// Pure Hodge structures (H_Z, F) with H_Z = Z^n and the canonical metric on
// L(H) = ⊗_r (det F^r/F^{r+1})^{⊗r}.
//
// A filtration is carried by an adapted basis: an invertible n x n complex
// matrix whose columns are grouped in blocks r = first, first+1, ..., with
// block r of width h(r), such that F^r is spanned by the columns of all
// blocks >= r. Columns are expressed in the coordinates of H_Z.

#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ball.hpp"
#include "ball_linalg.hpp"
#include "errors.hpp"

namespace motive_height
{

struct HodgeStructure
{
    int weight = 0;
    int first = 0;                         // lowest block index a, F^a = C^n
    std::vector<std::size_t> hodge_numbers; // h(first + k)
    ComplexMatrix basis;                   // adapted basis, n x n

    std::size_t rank() const noexcept { return basis.rows(); }
    int last() const noexcept { return first + static_cast<int>(hodge_numbers.size()); }

    std::size_t hodge_number(int r) const
    {
        if (r < first || r >= last()) {
            return 0;
        }
        return hodge_numbers[static_cast<std::size_t>(r - first)];
    }

    /// Column offset of block r (clamped to [0, n]).
    std::size_t offset(int r) const
    {
        std::size_t off = 0;
        for (int i = first; i < r && i < last(); ++i) {
            off += hodge_number(i);
        }
        return off;
    }

    std::size_t filtration_dimension(int r) const { return rank() - offset(r); }

    /// Adapted basis of F^r.
    ComplexMatrix filtration(int r) const
    {
        std::size_t off = offset(r);
        return basis.columns(off, rank() - off);
    }

    /// Columns of block r (a lift of a basis of F^r/F^{r+1}).
    ComplexMatrix graded_block(int r) const { return basis.columns(offset(r), hodge_number(r)); }

    long precision() const
    {
        long prec = default_precision;
        for (std::size_t i = 0; i < basis.rows(); ++i) {
            for (const auto &z : basis.row(i)) {
                prec = std::max(prec, z.precision());
            }
        }
        return prec;
    }

    void check_shape() const
    {
        std::size_t total = std::accumulate(hodge_numbers.begin(), hodge_numbers.end(), std::size_t{0});
        if (!basis.is_square() || total != basis.rows()) {
            throw invalid_data("Hodge structure: Hodge numbers do not match the basis size");
        }
    }
};

/// Builds the adapted-basis form from explicit spanning matrices of
/// F^{r_min}, ..., F^{r_max - 1} (F^{r_max} = 0). Checks F^{r_min} = C^n and
/// nestedness at the working precision.
inline HodgeStructure hodge_from_filtration(int weight, int r_min, const std::vector<ComplexMatrix> &spans)
{
    if (spans.empty()) {
        throw invalid_data("empty filtration");
    }
    const std::size_t n = spans.front().rows();
    long prec = default_precision;
    for (const auto &m : spans) {
        if (m.rows() != n) {
            throw invalid_data("filtration spans live in different dimensions");
        }
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (const auto &z : m.row(i)) {
                prec = std::max(prec, z.precision());
            }
        }
    }
    const long threshold = prec / 2;
    // Work from the top filtration step downwards, extending a basis.
    ComplexMatrix chosen(n, 0);
    std::vector<ComplexMatrix> blocks(spans.size(), ComplexMatrix(n, 0));
    std::size_t previous_rank = 0;
    for (std::size_t k = spans.size(); k-- > 0;) {
        const ComplexMatrix &f = spans[k];
        std::size_t rank_f = numerical_rank(f, threshold);
        if (numerical_rank(hconcat(f, chosen), threshold) != rank_f) {
            throw invalid_data("filtration is not nested at F^" + std::to_string(r_min + static_cast<int>(k) + 1));
        }
        if (rank_f < previous_rank) {
            throw invalid_data("filtration dimension increases");
        }
        ComplexMatrix block(n, 0);
        for (std::size_t j = 0; j < f.cols() && chosen.cols() + block.cols() < rank_f; ++j) {
            ComplexMatrix candidate = hconcat(hconcat(chosen, block), f.columns(j, 1));
            if (numerical_rank(candidate, threshold) == candidate.cols()) {
                block = hconcat(block, f.columns(j, 1));
            }
        }
        blocks[k] = block;
        chosen = hconcat(chosen, block);
        previous_rank = rank_f;
    }
    if (chosen.cols() != n) {
        throw invalid_data("F^" + std::to_string(r_min) + " does not span the whole space");
    }
    HodgeStructure h;
    h.weight = weight;
    h.first = r_min;
    ComplexMatrix basis(n, 0);
    for (const auto &b : blocks) {
        h.hodge_numbers.push_back(b.cols());
        basis = hconcat(basis, b);
    }
    h.basis = basis;
    return h;
}

// ---------------------------------------------------------------------------
// Purity

struct PurityReport
{
    bool pass = false;
    std::size_t dimension_defect = 0;      // |n - Σ_r dim H^{r,w-r}|
    double smallest_singular_value = 0.0;  // over the splitting matrices
    std::map<int, std::size_t> dimensions; // dim H^{r,w-r}
    std::string message;
};

namespace detail
{

// [F^r | conj F^{w-r+1}]: square and invertible for every r iff H is pure.
inline ComplexMatrix splitting_matrix(const HodgeStructure &h, int r)
{
    return hconcat(h.filtration(r), conj(h.filtration(h.weight - r + 1)));
}

} // namespace detail

inline PurityReport purity_check(const HodgeStructure &h)
{
    h.check_shape();
    PurityReport report;
    const std::size_t n = h.rank();
    const long threshold = h.precision() / 2;
    std::size_t total = 0;
    // Scan every index whose piece could be nonzero, including the
    // conjugate indices w - r of the declared window.
    const int lo = std::min(h.first, h.weight - h.last() + 1);
    const int hi = std::max(h.last(), h.weight - h.first + 1);
    for (int r = lo; r < hi; ++r) {
        // dim(F^r ∩ conj F^{w-r}) = dim F^r + dim F^{w-r} - dim(F^r + conj F^{w-r})
        ComplexMatrix fr = h.filtration(r);
        ComplexMatrix fbar = conj(h.filtration(h.weight - r));
        std::size_t sum_rank = numerical_rank(hconcat(fr, fbar), threshold);
        std::size_t d = fr.cols() + fbar.cols() - sum_rank;
        if (d > 0) {
            report.dimensions[r] = d;
        }
        total += d;
    }
    report.dimension_defect = total > n ? total - n : n - total;
    double smallest = std::numeric_limits<double>::infinity();
    bool split = true;
    for (int r = h.first + 1; r < h.last(); ++r) {
        ComplexMatrix s = detail::splitting_matrix(h, r);
        if (!s.is_square()) {
            split = false;
            report.message = "F^" + std::to_string(r) + " and conj F^" + std::to_string(h.weight - r + 1) +
                             " have complementary dimensions mismatch";
            break;
        }
        smallest = std::min(smallest, smallest_singular_value(s));
        if (determinant(s).contains_zero()) {
            split = false;
            report.message = "F^" + std::to_string(r) + " + conj F^" + std::to_string(h.weight - r + 1) +
                             " is not a direct sum";
            break;
        }
    }
    if (h.last() - h.first <= 1) {
        // A single graded piece: pure iff that piece is H^{w/2,w/2}.
        smallest = smallest_singular_value(h.basis);
    }
    report.smallest_singular_value = std::isinf(smallest) ? 0.0 : smallest;
    for (const auto &[r, d] : report.dimensions) {
        if (h.hodge_number(r) != d) {
            split = false;
            if (report.message.empty()) {
                report.message = "dim H^{" + std::to_string(r) + "," + std::to_string(h.weight - r) +
                                 "} differs from the declared Hodge number";
            }
        }
    }
    report.pass = split && report.dimension_defect == 0;
    if (!report.pass && report.message.empty()) {
        report.message = "Hodge pieces do not sum to the whole space";
    }
    return report;
}

// ---------------------------------------------------------------------------
// Decomposition

struct HodgeDecomposition
{
    int weight = 0;
    std::map<int, ComplexMatrix> pieces; // basis of H^{r,w-r}
    std::map<int, std::size_t> dimensions;
};

inline HodgeDecomposition hodge_decompose(const HodgeStructure &h)
{
    PurityReport purity = purity_check(h);
    if (!purity.pass) {
        throw invalid_data("hodge_decompose: not pure of weight " + std::to_string(h.weight) + ": " +
                           purity.message);
    }
    HodgeDecomposition out;
    out.weight = h.weight;
    for (int r = h.first; r < h.last(); ++r) {
        const std::size_t d = h.hodge_number(r);
        if (d == 0) {
            continue;
        }
        // v_r = f + g with f in F^{r+1}, g in conj F^{w-r}; g is the
        // H^{r,w-r} component of v_r.
        ComplexMatrix upper = h.filtration(r + 1);
        ComplexMatrix lower = conj(h.filtration(h.weight - r));
        ComplexMatrix x = solve(hconcat(upper, lower), h.graded_block(r));
        ComplexMatrix coeff = x.block(upper.cols(), 0, lower.cols(), d);
        out.pieces[r] = lower * coeff;
        out.dimensions[r] = d;
    }
    // F^r = ⊕_{r' >= r} H^{r', w-r'}
    const long threshold = h.precision() / 2;
    for (int r = h.first; r < h.last(); ++r) {
        ComplexMatrix sum(h.rank(), 0);
        for (const auto &[rp, piece] : out.pieces) {
            if (rp >= r) {
                sum = hconcat(sum, piece);
            }
        }
        ComplexMatrix fr = h.filtration(r);
        if (numerical_rank(hconcat(fr, sum), threshold) != fr.cols() || numerical_rank(sum, threshold) != fr.cols()) {
            throw precision_exhausted("hodge_decompose: reconstruction of F^" + std::to_string(r) + " failed");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metric

struct LineMetric
{
    Complex pairing; // z with s ⊗ conj(s) = z · e^{⊗w}; meaningful up to sign
    Real norm;       // |s| = |z|^{1/2}
};

/// Metric of the reference generator s = ⊗_r (∧ block_r)^{⊗r} of L(H).
///
/// With b_r the H^{r,w-r} component of ∧ block_r, conj(b_{w-r}) = λ_r b_r and
/// ∧_r b_r = δ · e where δ = det(basis); then z = δ^w · ∏_r λ_r^{w-r}.
/// λ_r is read off in F^r/F^{r+1} through the splitting
/// C^n = F^r ⊕ conj F^{w-r+1}.
inline LineMetric reference_metric(const HodgeStructure &h)
{
    h.check_shape();
    Complex delta = determinant(h.basis);
    if (delta.contains_zero()) {
        throw precision_exhausted("reference_metric: adapted basis not certified invertible");
    }
    Complex z = pow(delta, h.weight);
    for (int r = h.first; r < h.last(); ++r) {
        const std::size_t d = h.hodge_number(r);
        if (d == 0) {
            continue;
        }
        const int conj_index = h.weight - r;
        if (h.hodge_number(conj_index) != d) {
            throw invalid_data("reference_metric: Hodge numbers are not symmetric about w/2");
        }
        ComplexMatrix split = detail::splitting_matrix(h, r);
        if (!split.is_square()) {
            throw invalid_data("reference_metric: filtration does not split");
        }
        ComplexMatrix x = solve(split, conj(h.graded_block(conj_index)));
        Complex lambda = determinant(x.block(0, 0, d, d));
        if (lambda.contains_zero()) {
            throw precision_exhausted("reference_metric: conjugation factor not resolved");
        }
        z *= pow(lambda, conj_index);
    }
    Real modulus = abs(z);
    if (!modulus.is_positive()) {
        throw precision_exhausted("reference_metric: pairing not bounded away from zero");
    }
    return {z, sqrt(modulus)};
}

/// |c · s| for the element c·s of L(H), s the reference generator.
inline Real line_metric(const HodgeStructure &h, const Complex &coordinate)
{
    if (coordinate.contains_zero()) {
        throw zero_vector("line_metric: target is zero (or not certified nonzero)");
    }
    return abs(coordinate) * reference_metric(h).norm;
}

/// |⊗_r (c_r · ∧ block_r)^{⊗r}| for per-piece scalars c_r.
inline Real line_metric(const HodgeStructure &h, const std::map<int, Complex> &piece_coordinates)
{
    Complex c(Real(1, h.precision()));
    for (const auto &[r, cr] : piece_coordinates) {
        if (cr.contains_zero()) {
            throw zero_vector("line_metric: zero coordinate in gr^" + std::to_string(r));
        }
        c *= pow(cr, r);
    }
    return line_metric(h, c);
}

/// Direct sum of two structures of equal weight; blocks are interleaved so
/// the result is again in adapted form (block r of h1, then block r of h2).
inline HodgeStructure direct_sum(const HodgeStructure &h1, const HodgeStructure &h2)
{
    if (h1.weight != h2.weight) {
        throw weight_mismatch("direct_sum: weights differ");
    }
    const int a = std::min(h1.first, h2.first);
    const int b = std::max(h1.last(), h2.last());
    const std::size_t n1 = h1.rank();
    const std::size_t n = n1 + h2.rank();
    HodgeStructure out;
    out.weight = h1.weight;
    out.first = a;
    out.basis = ComplexMatrix(n, n, Complex(0L));
    std::size_t col = 0;
    for (int r = a; r < b; ++r) {
        out.hodge_numbers.push_back(h1.hodge_number(r) + h2.hodge_number(r));
        ComplexMatrix b1 = h1.graded_block(r);
        ComplexMatrix b2 = h2.graded_block(r);
        for (std::size_t j = 0; j < b1.cols(); ++j, ++col) {
            for (std::size_t i = 0; i < n1; ++i) {
                out.basis(i, col) = b1(i, j);
            }
        }
        for (std::size_t j = 0; j < b2.cols(); ++j, ++col) {
            for (std::size_t i = 0; i < h2.rank(); ++i) {
                out.basis(n1 + i, col) = b2(i, j);
            }
        }
    }
    return out;
}

} // namespace motive_height

#endif
