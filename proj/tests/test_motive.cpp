#include <random>

#include <gtest/gtest.h>

#include "motive_height/motive.hpp"
#include "support/random_motives.hpp"

using namespace motive_height;

namespace
{

constexpr long prec = 128;

Real log_two_pi() { return log(Real(2, prec) * Real::pi(prec)); }

MotiveData weight_zero_rank_two()
{
    MotiveData m;
    m.id = "w0";
    m.type.weight = 0;
    m.type.a = 0;
    m.type.hodge = {2};
    m.period = ComplexMatrix::identity(2, Complex(Real(1, prec)), Complex(Real(0, prec)));
    return m;
}

bool close(const Real &x, const Real &y) { return overlaps(x, y); }

} // namespace

TEST(Validate, TrivialMotive)
{
    EXPECT_TRUE(validate(tate_motive(0)).ok());
    EXPECT_TRUE(validate(tate_motive(1, prec, {2, 3, 5})).ok());
}

TEST(Validate, StrongDivisibilityFailure)
{
    MotiveData m = tate_motive(0);
    FilPhiModule fl = trivial_fl_module(3);
    fl.phi(0, 0) = 3;
    m.local[3] = fl;
    ValidationReport r = validate(m);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.issues.front().kind, "StrongDivisibility");
    EXPECT_EQ(r.issues.front().location, "local[p=3]");
}

TEST(Validate, WindowTooWide)
{
    MotiveData m = with_window(tate_motive(0, prec, {3}), 0, 4);
    ValidationReport r = validate(m);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.issues.front().kind, "WindowTooWide");
    EXPECT_THROW(height(m), window_too_wide);
}

TEST(Validate, FiltrationRankMismatch)
{
    MotiveData m = tate_motive(0);
    m.local[5] = tate_twist(trivial_fl_module(5), 1);
    EXPECT_FALSE(validate(m).ok());
}

TEST(Validate, NonPurePeriod)
{
    MotiveData m = weight_zero_rank_two();
    m.type.weight = 1;
    m.type.hodge = {1, 1};
    m.period = ComplexMatrix::identity(2, Complex(Real(1, prec)), Complex(Real(0, prec)));
    ValidationReport r = validate(m);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.issues.front().kind, "Purity");
}

TEST(GlobalLattice, AllDefault)
{
    MotiveData m = tate_motive(1);
    for (int r = -3; r <= 3; ++r) {
        EXPECT_EQ(global_lattice(m, r), 1);
    }
}

TEST(GlobalLattice, Override)
{
    MotiveData m = with_window(tate_motive(0), 0, 1);
    LocalLatticeSpec s;
    s.p = 2;
    s.provenance = Provenance::explicit_override;
    s.values = {{0, 0}, {1, 3}};
    m.local[2] = s;
    EXPECT_EQ(global_lattice(m, 1), 8);
    EXPECT_EQ(global_lattice(m, 0), 1);
}

TEST(GlobalLattice, ScaledFlLattice)
{
    MotiveData m = weight_zero_rank_two();
    FilPhiModule fl = trivial_fl_module(3, 2);
    fl.lattice = Lattice::standard(2).scaled(Rational(3));
    fl.steps = {fl.lattice};
    m.local[3] = fl;
    EXPECT_EQ(global_lattice(m, 1), 9);
    EXPECT_EQ(global_lattice(m, 0), 1);
}

TEST(HeightLine, TateZero)
{
    MetrizedLine l = assemble_height_line(tate_motive(0));
    EXPECT_EQ(l.lattice_scalar, 1);
    EXPECT_TRUE(l.metric().is_exact());
    EXPECT_EQ(l.metric().mid_double(), 1.0);
}

TEST(HeightLine, TateOneAndMinusOne)
{
    Real two_pi = Real(2, prec) * Real::pi(prec);
    MotiveData q1 = tate_motive(1);
    EXPECT_EQ(q1.type.a, -1);
    EXPECT_EQ(q1.type.b(), 0);
    MetrizedLine l1 = assemble_height_line(q1);
    EXPECT_EQ(l1.lattice_scalar, 1);
    EXPECT_TRUE(close(l1.metric(), two_pi));
    MotiveData qm1 = tate_motive(-1);
    EXPECT_EQ(qm1.type.a, 1);
    EXPECT_EQ(qm1.type.b(), 2);
    EXPECT_TRUE(close(assemble_height_line(qm1).metric(), two_pi));
}

TEST(Height, TateValues)
{
    HeightReport h0 = height(tate_motive(0));
    EXPECT_TRUE(h0.h.is_zero());
    for (int r : {1, -1}) {
        HeightReport h = height(tate_motive(r, prec, {2, 3}));
        EXPECT_TRUE(close(h.h, -log_two_pi()));
        EXPECT_LT(h.h.rad_double(), 1e-30);
        EXPECT_NEAR(h.h.mid_double(), -1.8378770664093453, 1e-15);
        EXPECT_TRUE(close(h.H, exp(h.h)));
        EXPECT_TRUE(close(h.H * Real(2, prec) * Real::pi(prec), Real(1, prec)));
    }
}

TEST(Height, OverrideShiftsHeight)
{
    // L_1 generator 8·ref and window (0, 1) on weight 0: h = -log 8.
    MotiveData m = with_window(tate_motive(0), 0, 1);
    LocalLatticeSpec s;
    s.p = 2;
    s.provenance = Provenance::explicit_override;
    s.values = {{0, 0}, {1, 3}};
    m.local[2] = s;
    HeightReport h = height(m);
    // b - 1 = 0: L_1 enters with exponent 0, so h = 0.
    EXPECT_TRUE(h.h.is_zero());
    MotiveData m2 = with_window(m, 0, 2);
    m2.local[2] = LocalLatticeSpec{2, {{0, 0}, {1, 3}, {2, 3}}, Provenance::explicit_override};
    // Window (0, 2): L_1^{-1} ⊗ L_2^{1}: scalar 1.
    EXPECT_EQ(height(m2).lattice_scalar, 1);
}

TEST(DirectSum, TrivialSum)
{
    MotiveData m = direct_sum(tate_motive(0), tate_motive(0));
    EXPECT_EQ(m.rank(), 2u);
    EXPECT_TRUE(height(m).h.is_zero());
}

TEST(DirectSum, TateOneTwice)
{
    HeightReport h = height(direct_sum(tate_motive(1, prec, {3}), tate_motive(1)));
    EXPECT_TRUE(close(h.h, Real(-2, prec) * log_two_pi()));
}

TEST(DirectSum, Mismatches)
{
    EXPECT_THROW(direct_sum(tate_motive(0), tate_motive(1)), weight_mismatch);
    MotiveData a = with_window(tate_motive(0), -1, 1);
    EXPECT_THROW(direct_sum(a, tate_motive(0)), window_mismatch);
}

TEST(DirectSum, BadPrimesUnion)
{
    MotiveData a = tate_motive(0), b = tate_motive(0);
    a.bad_primes = {2};
    b.bad_primes = {3, 2};
    EXPECT_EQ(direct_sum(a, b).bad_primes, (std::set<long>{2, 3}));
}

TEST(Properties, TrivialSummandsContributeNothing)
{
    MotiveData m = tate_motive(0);
    for (int k = 0; k < 5; ++k) {
        m = direct_sum(m, tate_motive(0, prec, {5}));
        EXPECT_TRUE(height(m).h.is_zero());
    }
}

TEST(Properties, Additivity)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        support::PieceOptions o = support::random_admissible_options(rng, 5);
        auto g1 = support::random_motive(rng, o, 3);
        auto g2 = support::random_motive(rng, o, 3);
        Real lhs = height(direct_sum(g1.motive, g2.motive)).h;
        Real rhs = height(g1.motive).h + height(g2.motive).h;
        EXPECT_TRUE(close(lhs, rhs)) << lhs.mid_double() << " vs " << rhs.mid_double();
    }
}

TEST(Properties, RebasingCovariance)
{
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 15; ++trial) {
        support::PieceOptions o = support::random_admissible_options(rng, 7);
        auto g = support::random_motive(rng, o, 4);
        RationalMatrix t = support::random_adapted(rng, g.motive.type, 7);
        Real before = height(g.motive).h;
        Real after = height(change_dr_basis(g.motive, t)).h;
        EXPECT_TRUE(close(before, after)) << before.mid_double() << " vs " << after.mid_double();
        // The pieces before any change of basis give the same total.
        Real pieces(0, prec);
        for (const auto &piece : g.pieces) {
            pieces += height(piece).h;
        }
        EXPECT_TRUE(close(before, pieces));
    }
}

TEST(Properties, DefaultConsistency)
{
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        support::PieceOptions o = support::random_admissible_options(rng, 5);
        auto g = support::random_motive(rng, o, 4);
        MotiveData m = g.motive;
        m.local.erase(11);
        MotiveData with_fl = m;
        with_fl.local[11] = adapted_fl_module(11, m.type.a, m.type.hodge);
        for (int r = m.type.a - 1; r <= m.type.b() + 1; ++r) {
            EXPECT_EQ(global_lattice(m, r), global_lattice(with_fl, r));
        }
    }
}

TEST(Properties, WindowStability)
{
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        support::PieceOptions o = support::random_admissible_options(rng, 7);
        o.b = std::min(o.b, o.a + 3);
        auto g = support::random_motive(rng, o, 3);
        MotiveData wider = with_window(g.motive, g.motive.type.a - 2, g.motive.type.b());
        EXPECT_TRUE(close(height(g.motive).h, height(wider).h));
    }
}

TEST(Properties, SimpleDefinitionAgrees)
{
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 10; ++trial) {
        support::PieceOptions o = support::random_admissible_options(rng, 5);
        auto g = support::random_motive(rng, o, 4);
        HeightReport a = height(g.motive);
        HeightReport b = height(g.motive, {.simple_definition = true});
        EXPECT_EQ(a.lattice_scalar, b.lattice_scalar);
    }
}

TEST(TateTwist, MatchesBuilder)
{
    MotiveData twisted = tate_twist(tate_motive(0, prec, {5}), 2);
    MotiveData direct = tate_motive(2, prec, {5});
    EXPECT_EQ(twisted.type, direct.type);
    EXPECT_TRUE(overlaps(twisted.period(0, 0), direct.period(0, 0)));
    EXPECT_TRUE(close(height(twisted).h, height(direct).h));
}
