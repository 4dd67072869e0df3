#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "motive_height/cli.hpp"

using namespace motive_height;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
    int code;
    std::string out, err;
};

Outcome run(const std::vector<std::string> &args)
{
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Scratch directory removed on destruction.
class Scratch
{
public:
    Scratch()
    {
        static std::atomic<int> counter{0};
        m_dir = fs::temp_directory_path() /
                ("motive_height_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(m_dir);
    }
    ~Scratch() { fs::remove_all(m_dir); }

    std::string write(const std::string &name, const std::string &text) const
    {
        fs::path p = m_dir / name;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
    std::string path() const { return m_dir.string(); }

private:
    fs::path m_dir;
};

std::string example(const std::string &name)
{
    Outcome o = run({"example", name});
    EXPECT_EQ(o.code, 0) << o.err;
    return o.out;
}

// Rank 2, weight 0; the filtration at 3 has D^2 ⊄ D^1.
const char *non_nested = R"({
  "bad_primes": [],
  "betti": {"rank": 2},
  "dr": {"filtration": {"0": 2, "1": 0}, "rank": 2, "reference": "adapted"},
  "format_version": "1",
  "local": [
    {"p": 3, "fl": {
      "phi": [["1", "0"], ["0", "1"]],
      "lattice": [["1", "0"], ["0", "1"]],
      "filtration": [{"index": 0, "lattice": [["1", "0"], ["0", "1"]]},
                     {"index": 1, "lattice": [["1", "0"]]},
                     {"index": 2, "lattice": [["0", "1"]]}]
    }}
  ],
  "metadata": {"id": "non-nested"},
  "period": [[{"re": "1", "im": "0"}, {"re": "0", "im": "0"}],
             [{"re": "0", "im": "0"}, {"re": "1", "im": "0"}]],
  "type": {"a": 0, "b": 1, "hodge": {"0": 2}, "weight": 0}
})";

double radius_of(const std::string &report, const std::string &prefix)
{
    std::smatch m;
    std::regex re(prefix + " = \\S+ ± (\\S+)");
    EXPECT_TRUE(std::regex_search(report, m, re)) << report;
    return std::stod(m[1].str());
}

} // namespace

TEST(Cli, TrivialTateHeightIsExactZero)
{
    Scratch s;
    Outcome o = run({"height", s.write("t0.json", example("tate:0"))});
    EXPECT_EQ(o.code, 0);
    EXPECT_NE(o.out.find("h = 0 ± 0\n"), std::string::npos) << o.out;
    EXPECT_NE(o.out.find("window: (0, 1)"), std::string::npos);
}

TEST(Cli, TateOneHeightIsMinusLogTwoPi)
{
    Scratch s;
    Outcome o = run({"height", s.write("t1.json", example("tate:1")), "--precision", "128"});
    ASSERT_EQ(o.code, 0) << o.err;
    // -log 2π = -1.83787706640934548356065947281123527972...
    EXPECT_NE(o.out.find("h = -1.8378770664093454835606594728"), std::string::npos) << o.out;
    EXPECT_LT(radius_of(o.out, "h"), 1e-30);
    EXPECT_NE(o.out.find("window: (-1, 0)"), std::string::npos);
}

TEST(Cli, WindowOverrideIsEchoed)
{
    Scratch s;
    Outcome o = run({"height", s.write("t1.json", example("tate:1")), "--window", "-2,1"});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("window: (-2, 1)"), std::string::npos) << o.out;
    EXPECT_EQ(run({"height", s.path() + "/t1.json", "--window", "x"}).code, 3);
}

TEST(Cli, NonNestedFiltrationFailsValidationWithLocation)
{
    Scratch s;
    Outcome o = run({"validate", s.write("bad.json", non_nested)});
    EXPECT_EQ(o.code, 1);
    EXPECT_NE(o.out.find("local[p=3]"), std::string::npos) << o.out;
    EXPECT_EQ(run({"height", s.path() + "/bad.json"}).code, 1);
}

TEST(Cli, MalformedInputExitsThree)
{
    Scratch s;
    Outcome o = run({"validate", s.write("junk.json", "{\"format_version\": ")});
    EXPECT_EQ(o.code, 3);
    EXPECT_FALSE(o.err.empty());
    EXPECT_EQ(run({"height", s.path() + "/missing.json"}).code, 3);
    EXPECT_EQ(run({"frobnicate"}).code, 3);
    EXPECT_EQ(run({"height"}).code, 3);
    EXPECT_EQ(run({"example", "tate:x"}).code, 3);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ExamplesRoundTripAndValidate)
{
    Scratch s;
    for (const char *name : {"trivial", "tate:0", "tate:1", "tate:-1", "tate:3", "elliptic:square", "elliptic:11a1",
                             "elliptic:37a1"}) {
        std::string text = example(name);
        EXPECT_EQ(serialize(parse_document(text)), text) << name;
        Outcome o = run({"validate", s.write("e.json", text)});
        EXPECT_EQ(o.code, 0) << name << "\n" << o.out;
        EXPECT_EQ(o.out, "valid\n");
    }
}

TEST(Cli, Deterministic)
{
    Scratch s;
    std::string path = s.write("e.json", example("elliptic:11a1"));
    for (const char *cmd : {"height", "validate", "invariants"}) {
        Outcome a = run({cmd, path});
        Outcome b = run({cmd, path});
        EXPECT_EQ(a.code, b.code);
        EXPECT_EQ(a.out, b.out) << cmd;
    }
    EXPECT_EQ(example("elliptic:square"), example("elliptic:square"));
}

TEST(Cli, PrecisionNeverIncreasesRadius)
{
    Scratch s;
    std::string path = s.write("e.json", run({"example", "elliptic:square", "--precision", "512"}).out);
    double last = 1e300;
    for (const char *bits : {"64", "96", "128", "192", "256", "384"}) {
        Outcome o = run({"height", path, "--precision", bits});
        ASSERT_EQ(o.code, 0) << o.err;
        double r = radius_of(o.out, "h");
        EXPECT_LE(r, last) << bits;
        last = r;
    }
}

TEST(Cli, HeightOfEllipticExample)
{
    Scratch s;
    Outcome o = run({"height", s.write("e.json", example("elliptic:11a1")), "--digits", "15"});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("h = -0.654583431398376"), std::string::npos) << o.out;
    EXPECT_NE(o.out.find("window: (-1, 1)"), std::string::npos);
}

TEST(Cli, LocalReportsProvenanceAndCohomology)
{
    Scratch s;
    std::string path = s.write("e.json", example("elliptic:11a1"));
    Outcome good = run({"local", path, "3"});
    ASSERT_EQ(good.code, 0) << good.err;
    EXPECT_NE(good.out.find("p = 3 (computed-from-FL)"), std::string::npos) << good.out;
    EXPECT_NE(good.out.find("h1cf: free rank"), std::string::npos);
    Outcome bad = run({"local", path, "11"});
    EXPECT_NE(bad.out.find("explicit-override"), std::string::npos) << bad.out;
    Outcome far = run({"local", path, "101"});
    EXPECT_NE(far.out.find("default-good"), std::string::npos) << far.out;
    EXPECT_EQ(run({"local", path, "12"}).code, 3);
}

TEST(Cli, InvariantsPassForBuilders)
{
    Scratch s;
    Outcome o = run({"invariants", s.write("e.json", example("elliptic:37a1"))});
    EXPECT_EQ(o.code, 0);
    EXPECT_NE(o.out.find("s = -1\nt = -1\ns - t = 0\ns = t: pass"), std::string::npos) << o.out;
}

TEST(Cli, InvariantsFailForNonMotivicType)
{
    Scratch s;
    // Weight 1 with a single Hodge class in degree 0 cannot be motivic.
    std::string text = R"({
  "format_version": "1",
  "metadata": {"id": "odd"},
  "type": {"weight": 1, "a": 0, "b": 1, "hodge": {"0": 1}},
  "dr": {"rank": 1, "reference": "adapted", "filtration": {"0": 1, "1": 0}},
  "betti": {"rank": 1},
  "period": [[{"re": "1", "im": "0"}]],
  "local": [],
  "bad_primes": []
})";
    Outcome o = run({"invariants", s.write("odd.json", text)});
    EXPECT_EQ(o.code, 1);
    EXPECT_NE(o.out.find("s - t = -1/2"), std::string::npos) << o.out;
}

TEST(Cli, ExperimentOnTateMotive)
{
    Scratch s;
    MotiveData t = tate_motive(1, 128, {3});
    std::string doc = s.write("t.json", serialize(document_from_motive(t)));
    QuotientSpec q;
    q.p = 3;
    q.k = 1;
    q.q_dr = RationalMatrix::identity(1);
    q.q_b = RationalMatrix::identity(1);
    q.target = std::get<FilPhiModule>(t.local.at(3));
    std::string spec = s.write("q.json", serialize(q));
    Outcome o = run({"experiment", doc, spec, "2"});
    ASSERT_EQ(o.code, 0) << o.err << o.out;
    EXPECT_NE(o.out.find("lattice ratio: 1/9"), std::string::npos) << o.out;
    EXPECT_NE(o.out.find("Betti index: 9"), std::string::npos);
    EXPECT_NE(o.out.find("invariance: pass"), std::string::npos);
    EXPECT_EQ(run({"experiment", doc, spec, "-1"}).code, 3);
}

TEST(Cli, BatchKeepsInputOrderAcrossThreadCounts)
{
    Scratch s;
    std::vector<std::string> names = {"tate:0", "elliptic:11a1", "tate:1", "elliptic:square", "trivial",
                                      "tate:-1", "elliptic:37a1", "tate:2"};
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < names.size(); ++i) {
        paths.push_back(s.write("docs/" + std::to_string(i) + ".json", example(names[i])));
    }
    std::vector<std::string> reversed(paths.rbegin(), paths.rend());
    std::vector<std::string> args = {"batch", "--format", "rows"};

    std::string reference;
    for (const char *threads : {"1", "2", "3", "8"}) {
        std::vector<std::string> a = args;
        a.insert(a.end(), {"--threads", threads});
        a.insert(a.end(), reversed.begin(), reversed.end());
        Outcome o = run(a);
        ASSERT_EQ(o.code, 0) << o.err;
        if (reference.empty()) {
            reference = o.out;
        }
        EXPECT_EQ(o.out, reference) << threads;
    }
    std::istringstream lines(reference);
    std::string line;
    for (auto it = names.rbegin(); it != names.rend(); ++it) {
        ASSERT_TRUE(std::getline(lines, line));
        EXPECT_EQ(line.substr(0, line.find('\t')), *it);
    }

    // A directory is read in sorted file-name order.
    Outcome dir = run({"batch", "--format", "rows", s.path() + "/docs"});
    ASSERT_EQ(dir.code, 0);
    std::istringstream dl(dir.out);
    for (const auto &n : names) {
        ASSERT_TRUE(std::getline(dl, line));
        EXPECT_EQ(line.substr(0, line.find('\t')), n);
    }
}

TEST(Cli, RowsHaveSixTabSeparatedFields)
{
    Scratch s;
    Outcome o = run({"batch", "--format", "rows", s.write("e.json", example("elliptic:11a1")),
                     s.write("t.json", example("tate:0"))});
    ASSERT_EQ(o.code, 0);
    std::istringstream lines(o.out);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(lines, line)) {
        std::vector<std::string> fields;
        std::istringstream f(line);
        std::string field;
        while (std::getline(f, field, '\t')) {
            fields.push_back(field);
        }
        rows.push_back(fields);
    }
    ASSERT_EQ(rows.size(), 2u);
    ASSERT_EQ(rows[0].size(), 6u);
    EXPECT_EQ(rows[0][0], "elliptic:11a1");
    EXPECT_EQ(rows[0][1], "-1");
    EXPECT_EQ(rows[0][2], "1");
    EXPECT_NEAR(std::stod(rows[0][3]), -0.6545834313983757, 1e-15);
    EXPECT_NEAR(std::stod(rows[0][5]), std::log(11.0), 1e-15);
    EXPECT_EQ(rows[1], (std::vector<std::string>{"tate:0", "0", "1", "0", "0", "0"}));
}

TEST(Cli, BatchReportsFailuresOnStderrAndKeepsGoing)
{
    Scratch s;
    Outcome o = run({"batch", "--format", "rows", s.write("a.json", example("tate:0")), s.write("b.json", "{"),
                     s.write("c.json", example("tate:1"))});
    EXPECT_EQ(o.code, 3);
    EXPECT_NE(o.err.find("b.json"), std::string::npos);
    EXPECT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 2);
}
