#include <random>

#include <gtest/gtest.h>

#include "motive_height/fl.hpp"
#include "oracles/strong_divisibility.hpp"
#include "support/fl_instances.hpp"

using namespace motive_height;
using support::random_type;
using support::to_oracle;

namespace
{

RationalMatrix diag(std::initializer_list<Rational> entries)
{
    RationalMatrix m(entries.size(), entries.size(), Rational(0));
    std::size_t i = 0;
    for (const auto &e : entries) {
        m(i, i) = e;
        ++i;
    }
    return m;
}

Lattice span(std::initializer_list<std::initializer_list<long>> columns, std::size_t n)
{
    RationalMatrix m(n, columns.size(), Rational(0));
    std::size_t j = 0;
    for (const auto &c : columns) {
        std::size_t i = 0;
        for (long x : c) {
            m(i++, j) = x;
        }
        ++j;
    }
    return Lattice::from_generators(m);
}

FilPhiModule qp1(long p) { return tate_twist(trivial_fl_module(p), 1); }

RationalMatrix random_unit_matrix(std::mt19937_64 &rng, std::size_t n, long p)
{
    std::uniform_int_distribution<long> e(-4, 4);
    for (;;) {
        RationalMatrix g(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                g(i, j) = e(rng);
            }
        }
        Rational d = determinant(g);
        if (d != 0 && valuation(d, p) == 0) {
            return g;
        }
    }
}

RationalMatrix random_unimodular(std::mt19937_64 &rng, std::size_t n)
{
    RationalMatrix g = RationalMatrix::identity(n);
    std::uniform_int_distribution<long> c(-2, 2);
    std::uniform_int_distribution<std::size_t> idx(0, n - 1);
    for (int s = 0; s < 5; ++s) {
        std::size_t i = idx(rng), j = idx(rng);
        if (i == j) {
            continue;
        }
        Rational k = c(rng);
        for (std::size_t col = 0; col < n; ++col) {
            g(i, col) += k * g(j, col);
        }
    }
    return g;
}

} // namespace

TEST(StrongDivisibility, TateOne)
{
    FilPhiModule m;
    m.p = 5;
    m.lattice = Lattice::standard(1);
    m.phi = diag({Rational(1, 5)});
    m.first = -1;
    m.steps = {m.lattice};
    EXPECT_TRUE(check_strong_divisibility(m).pass);
    EXPECT_EQ(m.filtration(0).rank(), 0u);
}

TEST(StrongDivisibility, Trivial)
{
    EXPECT_TRUE(check_strong_divisibility(trivial_fl_module(3)).pass);
}

TEST(StrongDivisibility, ShiftedTrivialFails)
{
    FilPhiModule m = trivial_fl_module(3);
    m.first = 1;
    StrongDivisibilityReport r = check_strong_divisibility(m);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.witness, Lattice::standard(1).scaled(Rational(1, 3)));
}

TEST(StrongDivisibility, WindowTooWide)
{
    // Filtration length 4 exceeds p - 1 = 2 at p = 3 but not at p = 5.
    FilPhiModule m = adapted_fl_module(3, 0, {1, 0, 0, 1});
    EXPECT_THROW(check_strong_divisibility(m), window_too_wide);
    EXPECT_TRUE(check_strong_divisibility(adapted_fl_module(5, 0, {1, 0, 0, 1})).pass);
}

TEST(StrongDivisibility, RejectsUnsaturatedStep)
{
    FilPhiModule m = trivial_fl_module(3, 2);
    m.first = -1;
    m.steps = {m.lattice, span({{0, 3}}, 2)};
    EXPECT_THROW(check_strong_divisibility(m), invalid_data);
}

TEST(StrongDivisibility, AgreesWithOracleOnRandomData)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<long> coin(0, 1);
    int failing = 0, passing = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const long p = coin(rng) ? 3 : 5;
        const std::size_t n = 1 + trial % 3;
        auto type = random_type(rng, n, static_cast<std::size_t>(p - 1));
        FilPhiModule m = adapted_fl_module(p, -1, type, random_unit_matrix(rng, n, p));
        if (coin(rng)) {
            // Perturb φ by p-adically small or large amounts.
            std::uniform_int_distribution<long> e(-3, 3);
            RationalMatrix noise(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    noise(i, j) = Rational(e(rng), coin(rng) ? 1 : p);
                }
            }
            m.phi = m.phi + noise;
            if (rank(m.phi) != n) {
                continue;
            }
        }
        m = transformed(m, random_unimodular(rng, n));
        bool got = check_strong_divisibility(m).pass;
        EXPECT_EQ(got, oracle::strongly_divisible(to_oracle(m)));
        (got ? passing : failing)++;
    }
    EXPECT_GT(passing, 10);
    EXPECT_GT(failing, 10);
}

TEST(StrongDivisibility, InvariantUnderChangeOfBasis)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        FilPhiModule m = adapted_fl_module(5, 0, {1, 1, 1}, random_unit_matrix(rng, 3, 5));
        FilPhiModule bad = m;
        bad.phi = scaled(bad.phi, Rational(5));
        RationalMatrix g = random_unit_matrix(rng, 3, 5);
        EXPECT_TRUE(check_strong_divisibility(transformed(m, g)).pass);
        EXPECT_FALSE(check_strong_divisibility(transformed(bad, g)).pass);
    }
}

TEST(TateTwist, TrivialToTateOne)
{
    FilPhiModule t = tate_twist(trivial_fl_module(2), 1);
    EXPECT_EQ(t.first, -1);
    EXPECT_EQ(t.phi, diag({Rational(1, 2)}));
    EXPECT_EQ(t.filtration(-1), Lattice::standard(1));
    EXPECT_EQ(t.filtration(0).rank(), 0u);
    EXPECT_TRUE(check_strong_divisibility(t).pass);
}

TEST(TateTwist, ZeroAndInverse)
{
    FilPhiModule m = adapted_fl_module(7, -1, {1, 2});
    FilPhiModule z = tate_twist(m, 0);
    EXPECT_EQ(z.phi, m.phi);
    EXPECT_EQ(z.first, m.first);
    FilPhiModule back = tate_twist(tate_twist(m, 3), -3);
    EXPECT_EQ(back.phi, m.phi);
    EXPECT_EQ(back.first, m.first);
    EXPECT_EQ(back.steps, m.steps);
}

TEST(TateTwist, PreservesStrongDivisibility)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        FilPhiModule m = adapted_fl_module(5, 0, random_type(rng, 3, 4), random_unit_matrix(rng, 3, 5));
        for (int r = -3; r <= 3; ++r) {
            EXPECT_TRUE(check_strong_divisibility(tate_twist(m, r)).pass);
        }
    }
}

TEST(H0, Examples)
{
    EXPECT_EQ(h0(trivial_fl_module(3)).rank(), 1u);
    EXPECT_EQ(h0(qp1(3)).rank(), 0u);
    FilPhiModule m;
    m.p = 3;
    m.lattice = Lattice::standard(2);
    m.phi = diag({Rational(1), Rational(1, 3)});
    m.first = -1;
    m.steps = {m.lattice, span({{1, 0}}, 2)};
    ASSERT_TRUE(check_strong_divisibility(m).pass);
    Lattice k = h0(m);
    EXPECT_EQ(k, span({{1, 0}}, 2));
}

TEST(H1cf, Examples)
{
    H1cf a = h1cf(qp1(5));
    EXPECT_EQ(a.free_rank, 1u);
    EXPECT_TRUE(a.torsion.empty());
    H1cf b = h1cf(trivial_fl_module(5));
    EXPECT_EQ(b.free_rank, 1u);
    EXPECT_TRUE(b.torsion.empty());
    FilPhiModule c = trivial_fl_module(5);
    c.phi = diag({Rational(6)});
    H1cf hc = h1cf(c);
    EXPECT_EQ(hc.free_rank, 0u);
    ASSERT_EQ(hc.torsion.size(), 1u);
    EXPECT_EQ(hc.torsion[0], 5);
}

TEST(H1cf, RankNullity)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + trial % 3;
        FilPhiModule m = adapted_fl_module(3, -1, random_type(rng, n, 2), random_unit_matrix(rng, n, 3));
        m = transformed(m, random_unimodular(rng, n));
        Lattice d0 = m.filtration(0);
        std::size_t image_rank =
            d0.rank() == 0 ? 0 : rank((RationalMatrix::identity(n) - m.phi) * d0.basis());
        EXPECT_EQ(h0(m).rank() + image_rank, d0.rank());
        EXPECT_EQ(h1cf(m).free_rank, n - image_rank);
    }
}

TEST(H1cf, TorsionMatchesDeterminant)
{
    // D^0 = D: the torsion order is p^{v_p det(1 - φ)} when 1 - φ is invertible.
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        FilPhiModule m = adapted_fl_module(5, 0, {2}, random_unit_matrix(rng, 2, 5));
        Rational d = determinant(RationalMatrix::identity(2) - m.phi);
        if (d == 0) {
            continue;
        }
        H1cf h = h1cf(m);
        EXPECT_EQ(h.free_rank, 0u);
        Integer order = 1;
        for (const auto &t : h.torsion) {
            order *= t;
        }
        EXPECT_EQ(valuation(order, 5), valuation(d, 5));
    }
}

TEST(LocalValuations, Trivial)
{
    LocalLatticeSpec s = local_valuations(trivial_fl_module(3), 0, 1);
    EXPECT_EQ(s.at(0), 0);
    EXPECT_EQ(s.at(1), 0);
    EXPECT_EQ(s.provenance, Provenance::computed_from_fl);
}

TEST(LocalValuations, TateOne)
{
    EXPECT_EQ(local_valuations(qp1(3), -1, 0).at(0), 0);
}

TEST(LocalValuations, ScaledLattice)
{
    FilPhiModule m = trivial_fl_module(3, 2);
    m.lattice = Lattice::standard(2).scaled(Rational(3));
    m.steps = {m.lattice};
    EXPECT_EQ(local_valuations(m, 0, 1).at(1), 2);
    EXPECT_EQ(local_valuations(m, 0, 1).at(0), 0);
}

TEST(LocalValuations, TwistRelation)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        FilPhiModule m = adapted_fl_module(5, -1, random_type(rng, 3, 4), random_unit_matrix(rng, 3, 5));
        // Rescale D along the adapted flag so that v is not identically 0.
        RationalMatrix s = diag({Rational(5), Rational(1), Rational(25)});
        m = transformed(m, s);
        LocalLatticeSpec base = local_valuations(m, -3, 5);
        for (int r = -2; r <= 4; ++r) {
            LocalLatticeSpec t = local_valuations(tate_twist(m, r), -3 - r, 5 - r);
            EXPECT_EQ(t.at(0), base.at(r));
        }
    }
}

TEST(DirectSum, Additivity)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        FilPhiModule a = adapted_fl_module(5, -1, {1, 1}, random_unit_matrix(rng, 2, 5));
        FilPhiModule b = adapted_fl_module(5, -1, {1, 0, 1}, random_unit_matrix(rng, 2, 5));
        FilPhiModule s = fl_direct_sum(a, b);
        ASSERT_TRUE(check_strong_divisibility(s).pass);
        EXPECT_EQ(h0(s).rank(), h0(a).rank() + h0(b).rank());
        EXPECT_EQ(h1cf(s).free_rank, h1cf(a).free_rank + h1cf(b).free_rank);
    }
}
