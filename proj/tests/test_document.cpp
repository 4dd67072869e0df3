#include <string>

#include <gtest/gtest.h>

#include "motive_height/document.hpp"
#include "motive_height/elliptic.hpp"

using namespace motive_height;

namespace
{

constexpr long prec = 128;

const char *tate_one = R"({
  "format_version": "1",
  "metadata": {"id": "tate:1", "note": "free-form"},
  "type": {"weight": -2, "a": -1, "b": 0, "hodge": {"-1": 1}},
  "dr": {"rank": 1, "reference": "adapted", "filtration": {"-1": 1, "0": 0}},
  "betti": {"rank": 1},
  "period": [[{"re": "1", "im": "0", "two_pi_i_power": -1}]],
  "local": [],
  "bad_primes": []
})";

// Rank 2, weight 0, with an FL datum written non-canonically and an override.
const char *with_local = R"({
  "bad_primes": [7],
  "betti": {"rank": 2},
  "dr": {"filtration": {"0": 2, "1": 0}, "rank": 2, "reference": "adapted"},
  "format_version": "1",
  "local": [
    {"p": 7, "override": {"0": 0, "1": 1}},
    {"p": 3, "fl": {
      "phi": [["2/2", "0"], ["0", "3/3"]],
      "lattice": [["1", "0"], ["0", "1"], ["1", "1"]],
      "filtration": [{"index": 0, "lattice": [["2", "0"], ["1", "0"], ["0", "1"]]}]
    }}
  ],
  "metadata": {"id": "w0"},
  "period": [[{"re": "1", "im": "0"}, {"re": "0", "im": "0"}],
             [{"re": "0", "im": "0"}, {"re": "1", "im": "0"}]],
  "type": {"a": 0, "b": 1, "hodge": {"0": 2}, "weight": 0}
})";

std::string replace(std::string text, const std::string &from, const std::string &to)
{
    auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    if (pos != std::string::npos) {
        text.replace(pos, from.size(), to);
    }
    return text;
}

} // namespace

TEST(Document, TateDocumentHeight)
{
    MotiveData m = to_motive(parse_document(tate_one), prec);
    EXPECT_TRUE(validate(m).ok());
    HeightReport r = height(m);
    Real want = -log(Real(2, prec) * Real::pi(prec));
    EXPECT_TRUE(overlaps(r.h, want));
    EXPECT_LT(r.h.rad_double(), 1e-30);
    EXPECT_EQ(r.h.mid_string(11), "-1.8378770664");
}

TEST(Document, CanonicalFormIsStable)
{
    const std::string once = canonicalize(with_local);
    EXPECT_EQ(canonicalize(once), once);
    // Rationals in lowest terms, lattices reduced, keys sorted.
    EXPECT_NE(once.find("\"1\""), std::string::npos);
    EXPECT_EQ(once.find("2/2"), std::string::npos);
    EXPECT_LT(once.find("\"bad_primes\""), once.find("\"betti\""));
    MotiveDocument doc = parse_document(once);
    const auto &fl = std::get<FilPhiModule>(doc.local.at(3));
    EXPECT_TRUE(fl.lattice == Lattice::standard(2));
    EXPECT_EQ(fl.phi, RationalMatrix::identity(2));
    EXPECT_EQ(std::get<LocalLatticeSpec>(doc.local.at(7)).values.at(1), 1);
    EXPECT_EQ(doc.metadata.at("id"), "w0");
}

TEST(Document, FreeFormMetadataSurvives)
{
    const std::string once = canonicalize(tate_one);
    EXPECT_NE(once.find("\"note\": \"free-form\""), std::string::npos);
}

TEST(Document, LocalDataReachTheHeight)
{
    MotiveData m = to_motive(parse_document(with_local), prec);
    EXPECT_TRUE(validate(m).ok()) << validate(m).summary();
    // Window (0, 1): L_1 enters with exponent b - 1 = 0, so the override
    // v(1) = 1 at 7 shows in L_1 but not in h.
    EXPECT_TRUE(height(m).h.is_zero());
    EXPECT_EQ(global_lattice(m, 1), Rational(7));
}

TEST(Document, EllipticRoundTrip)
{
    MotiveData e = elliptic_curve_h1(curve_11a1(), prec);
    MotiveDocument doc = document_from_motive(e);
    const std::string text = serialize(doc);
    EXPECT_EQ(canonicalize(text), text);
    MotiveData back = to_motive(parse_document(text), prec);
    EXPECT_TRUE(validate(back).ok());
    HeightReport a = height(e), b = height(back);
    EXPECT_TRUE(overlaps(a.h, b.h));
    EXPECT_LT(b.h.rad_double(), 1e-30);
    EXPECT_EQ(back.local.size(), e.local.size());
    EXPECT_EQ(back.bad_primes, e.bad_primes);
}

TEST(Document, PrintedPeriodsCoverTheBall)
{
    MotiveData e = elliptic_curve_h1(curve_37a1(), prec);
    MotiveDocument doc = document_from_motive(e);
    MotiveData back = to_motive(doc, prec);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            EXPECT_TRUE(overlaps(back.period(i, j).re(), e.period(i, j).re()));
            EXPECT_TRUE(overlaps(back.period(i, j).im(), e.period(i, j).im()));
            if (doc.period[i][j].digits) {
                EXPECT_GE(*doc.period[i][j].digits, 35);
            }
        }
    }
}

TEST(Document, QuotientSpecRoundTrip)
{
    QuotientSpec s;
    s.p = 5;
    s.k = 1;
    s.q_dr = RationalMatrix(1, 2, Rational(0));
    s.q_dr(0, 1) = Rational(3, 2);
    s.q_b = RationalMatrix(1, 2, Rational(1));
    s.target = trivial_fl_module(5);
    s.check_betti = false;
    const std::string text = serialize(s);
    QuotientSpec back = parse_quotient_spec(text, 2);
    EXPECT_EQ(back.p, 5);
    EXPECT_EQ(back.k, 1u);
    EXPECT_EQ(back.q_dr, s.q_dr);
    EXPECT_EQ(back.q_b, s.q_b);
    EXPECT_FALSE(back.check_betti);
    EXPECT_EQ(serialize(back), text);
}

TEST(Document, MalformedInputs)
{
    EXPECT_THROW(parse_document("{"), parse_error);
    EXPECT_THROW(parse_document("[]"), parse_error);
    EXPECT_THROW(parse_document(replace(tate_one, "\"format_version\": \"1\"", "\"format_version\": \"2\"")),
                 parse_error);
    EXPECT_THROW(parse_document(replace(tate_one, "\"re\": \"1\"", "\"re\": 1.0")), parse_error);
    EXPECT_THROW(parse_document(replace(tate_one, "\"re\": \"1\"", "\"re\": \"one\"")), parse_error);
    EXPECT_THROW(parse_document(replace(tate_one, "\"betti\": {\"rank\": 1}", "\"betti\": {\"rank\": 2}")),
                 parse_error);
    EXPECT_THROW(parse_document(replace(tate_one, "\"-1\": 1, \"0\": 0", "\"-1\": 1, \"0\": 1")), parse_error);
    EXPECT_THROW(parse_document(replace(tate_one, "\"bad_primes\": []", "\"bad_primes\": [], \"extra\": 1")),
                 parse_error);
    EXPECT_THROW(parse_document(replace(tate_one, "\"hodge\": {\"-1\": 1}", "\"hodge\": {\"x\": 1}")), parse_error);
    EXPECT_THROW(parse_document(replace(with_local, "{\"index\": 0, \"lattice\": [[\"2\", \"0\"], [\"1\", \"0\"], [\"0\", \"1\"]]}",
                                        "{\"index\": 0, \"lattice\": []}, {\"index\": 0, \"lattice\": []}")),
                 parse_error);
    EXPECT_THROW(parse_document(replace(with_local, "\"p\": 7, \"override\"", "\"p\": 3, \"override\"")),
                 parse_error);
    EXPECT_THROW(parse_document(replace(with_local, "[\"2/2\", \"0\"]", "[\"2/2\"]")), parse_error);
}

TEST(Document, StructuralProblemsAreValidationFailures)
{
    // Non-nested filtration parses but fails validation with a location.
    std::string text = replace(with_local, "\"filtration\": [{\"index\": 0, \"lattice\": [[\"2\", \"0\"], [\"1\", \"0\"], [\"0\", \"1\"]]}]",
                               "\"filtration\": [{\"index\": 0, \"lattice\": [[\"1\", \"0\"], [\"0\", \"1\"]]}, "
                               "{\"index\": 1, \"lattice\": [[\"1\", \"0\"]]}, {\"index\": 2, \"lattice\": [[\"0\", \"1\"]]}]");
    MotiveData m = to_motive(parse_document(text), prec);
    ValidationReport r = validate(m);
    ASSERT_FALSE(r.ok());
    EXPECT_NE(r.summary().find("local[p=3]"), std::string::npos) << r.summary();
}
