#ifndef MOTIVE_HEIGHT_DOCUMENT_HPP
#define MOTIVE_HEIGHT_DOCUMENT_HPP

// JSON documents for realization data and quotient specs.
//
// Exact numbers are strings ("3/4", "-2", "0.125"); integers that index
// things (p, weight, window, Hodge numbers) are JSON integers. A period entry
// is {"re", "im"} decimal strings with an optional "precision" d (each part
// is within 10^-d of the true value; absent means exact) and an optional
// "two_pi_i_power" k multiplying the entry by (2πi)^k. Lattices are lists of
// generator vectors; φ is a list of rows. Canonical output sorts keys,
// rewrites rationals in lowest terms and lattices in Hermite normal form.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ball.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "fl.hpp"
#include "motive.hpp"
#include "rational.hpp"

namespace motive_height
{

inline constexpr const char *format_version = "1";

using json = nlohmann::json;

struct PeriodEntry
{
    std::string re = "0", im = "0";
    std::optional<long> digits; // absent: exact
    long two_pi_i_power = 0;

    friend bool operator==(const PeriodEntry &, const PeriodEntry &) = default;
};

struct MotiveDocument
{
    std::string id;
    json metadata = json::object(); // free-form; "id" mirrors `id`
    MotiveType type;
    std::vector<std::vector<PeriodEntry>> period;
    std::map<long, LocalDatum> local;
    std::set<long> bad_primes;
};

namespace detail
{

[[noreturn]] inline void malformed(const std::string &where, const std::string &what)
{
    throw parse_error(where + ": " + what);
}

inline const json &field(const json &j, const char *key, const std::string &where)
{
    if (!j.is_object() || !j.contains(key)) {
        malformed(where, std::string("missing field \"") + key + "\"");
    }
    return j.at(key);
}

inline long integer_field(const json &j, const std::string &where)
{
    if (!j.is_number_integer()) {
        malformed(where, "expected an integer");
    }
    return j.get<long>();
}

inline Rational rational_field(const json &j, const std::string &where)
{
    if (!j.is_string()) {
        malformed(where, "exact numbers must be strings");
    }
    try {
        return parse_rational(j.get<std::string>());
    } catch (const parse_error &e) {
        malformed(where, e.what());
    }
}

inline RationalMatrix rows_field(const json &j, std::size_t cols, const std::string &where)
{
    if (!j.is_array()) {
        malformed(where, "expected a list of rows");
    }
    RationalMatrix m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            malformed(where, "row " + std::to_string(i) + " has the wrong length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(i, c) = rational_field(j[i][c], where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
        }
    }
    return m;
}

inline json rows_json(const RationalMatrix &m)
{
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row.push_back(to_string(m(i, j)));
        }
        out.push_back(row);
    }
    return out;
}

inline Lattice lattice_field(const json &j, std::size_t n, const std::string &where)
{
    if (!j.is_array()) {
        malformed(where, "expected a list of generator vectors");
    }
    if (j.empty()) {
        return Lattice::zero(n);
    }
    RationalMatrix gens = rows_field(j, n, where).transposed();
    return Lattice::from_generators(gens);
}

inline json lattice_json(const Lattice &l)
{
    return rows_json(l.basis().transposed());
}

inline FilPhiModule fl_field(const json &j, long p, std::size_t n, const std::string &where)
{
    FilPhiModule m;
    m.p = p;
    m.phi = rows_field(field(j, "phi", where), n, where + ".phi");
    if (m.phi.rows() != n) {
        malformed(where + ".phi", "expected " + std::to_string(n) + " rows");
    }
    m.lattice = lattice_field(field(j, "lattice", where), n, where + ".lattice");
    const json &filt = field(j, "filtration", where);
    if (!filt.is_array() || filt.empty()) {
        malformed(where + ".filtration", "expected a nonempty list");
    }
    std::map<long, Lattice> steps;
    for (std::size_t i = 0; i < filt.size(); ++i) {
        const std::string w = where + ".filtration[" + std::to_string(i) + "]";
        long index = integer_field(field(filt[i], "index", w), w + ".index");
        if (steps.count(index)) {
            malformed(w, "duplicate index " + std::to_string(index));
        }
        steps[index] = lattice_field(field(filt[i], "lattice", w), n, w + ".lattice");
    }
    m.first = static_cast<int>(steps.begin()->first);
    long expect = steps.begin()->first;
    for (auto &[i, l] : steps) {
        if (i != expect++) {
            malformed(where + ".filtration", "indices must be consecutive");
        }
        m.steps.push_back(std::move(l));
    }
    return m;
}

inline json fl_json(const FilPhiModule &m)
{
    json filt = json::array();
    for (int i = m.first; i < m.last(); ++i) {
        filt.push_back({{"index", i}, {"lattice", lattice_json(m.filtration(i))}});
    }
    return {{"phi", rows_json(m.phi)}, {"lattice", lattice_json(m.lattice)}, {"filtration", filt}};
}

inline long integer_key(const std::string &key, const std::string &where)
{
    try {
        std::size_t used = 0;
        long r = std::stol(key, &used);
        if (used == key.size()) {
            return r;
        }
    } catch (const std::exception &) {
    }
    malformed(where, "key \"" + key + "\" is not an integer");
}

inline void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where)
{
    if (!j.is_object()) {
        malformed(where, "expected an object");
    }
    for (const auto &[key, value] : j.items()) {
        bool ok = false;
        for (const char *a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            malformed(where, "unknown field \"" + key + "\"");
        }
    }
}

inline void check_version(const json &j)
{
    const json &v = field(j, "format_version", "document");
    if (!v.is_string() || v.get<std::string>() != format_version) {
        malformed("document.format_version", std::string("unsupported, expected \"") + format_version + "\"");
    }
}

inline json parse_json(const std::string &text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw parse_error(std::string("not valid JSON: ") + e.what());
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Motive documents

inline MotiveDocument document_from_json(const json &j)
{
    using namespace detail;
    if (!j.is_object()) {
        malformed("document", "expected an object");
    }
    check_keys(j, {"format_version", "metadata", "type", "dr", "betti", "period", "local", "bad_primes"}, "document");
    check_version(j);
    MotiveDocument doc;

    const json &meta = field(j, "metadata", "document");
    if (!meta.is_object()) {
        malformed("metadata", "expected an object");
    }
    const json &id = field(meta, "id", "metadata");
    if (!id.is_string()) {
        malformed("metadata.id", "expected a string");
    }
    doc.id = id.get<std::string>();
    doc.metadata = meta;

    const json &type = field(j, "type", "document");
    check_keys(type, {"weight", "a", "b", "hodge"}, "type");
    doc.type.weight = static_cast<int>(integer_field(field(type, "weight", "type"), "type.weight"));
    doc.type.a = static_cast<int>(integer_field(field(type, "a", "type"), "type.a"));
    const long b = integer_field(field(type, "b", "type"), "type.b");
    if (b < doc.type.a) {
        malformed("type", "window needs a <= b");
    }
    doc.type.hodge.assign(static_cast<std::size_t>(b - doc.type.a), 0);
    const json &hodge = field(type, "hodge", "type");
    if (!hodge.is_object()) {
        malformed("type.hodge", "expected an object r -> h(r)");
    }
    for (const auto &[key, value] : hodge.items()) {
        const long r = integer_key(key, "type.hodge");
        long h = integer_field(value, "type.hodge[" + key + "]");
        if (h < 0) {
            malformed("type.hodge[" + key + "]", "negative Hodge number");
        }
        if (r < doc.type.a || r >= b) {
            if (h != 0) {
                malformed("type.hodge[" + key + "]", "nonzero Hodge number outside the window");
            }
            continue;
        }
        doc.type.hodge[static_cast<std::size_t>(r - doc.type.a)] = static_cast<std::size_t>(h);
    }
    const std::size_t n = doc.type.rank();

    const json &dr = field(j, "dr", "document");
    check_keys(dr, {"rank", "reference", "filtration"}, "dr");
    if (integer_field(field(dr, "rank", "dr"), "dr.rank") != static_cast<long>(n)) {
        malformed("dr.rank", "does not match the Hodge numbers");
    }
    const json &ref = field(dr, "reference", "dr");
    if (!ref.is_string() || ref.get<std::string>() != "adapted") {
        malformed("dr.reference", "only \"adapted\" reference bases are supported");
    }
    const json &fdims = field(dr, "filtration", "dr");
    if (!fdims.is_object()) {
        malformed("dr.filtration", "expected an object r -> dim M^r");
    }
    for (const auto &[key, value] : fdims.items()) {
        const long r = integer_key(key, "dr.filtration");
        const long dim = integer_field(value, "dr.filtration[" + key + "]");
        const long expected = static_cast<long>(n - doc.type.codimension(static_cast<int>(r)));
        if (dim != expected) {
            malformed("dr.filtration[" + key + "]", "dim M^" + key + " = " + std::to_string(dim) +
                                                        " disagrees with the Hodge numbers (" +
                                                        std::to_string(expected) + ")");
        }
    }

    const json &betti = field(j, "betti", "document");
    check_keys(betti, {"rank"}, "betti");
    if (integer_field(field(betti, "rank", "betti"), "betti.rank") != static_cast<long>(n)) {
        malformed("betti.rank", "does not match the de Rham rank");
    }

    const json &period = field(j, "period", "document");
    if (!period.is_array() || period.size() != n) {
        malformed("period", "expected " + std::to_string(n) + " rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!period[i].is_array() || period[i].size() != n) {
            malformed("period[" + std::to_string(i) + "]", "expected " + std::to_string(n) + " entries");
        }
        std::vector<PeriodEntry> row;
        for (std::size_t c = 0; c < n; ++c) {
            const std::string w = "period[" + std::to_string(i) + "][" + std::to_string(c) + "]";
            const json &e = period[i][c];
            check_keys(e, {"re", "im", "precision", "two_pi_i_power"}, w);
            PeriodEntry entry;
            rational_field(field(e, "re", w), w + ".re");
            rational_field(field(e, "im", w), w + ".im");
            entry.re = e.at("re").get<std::string>();
            entry.im = e.at("im").get<std::string>();
            if (e.contains("precision")) {
                entry.digits = integer_field(e.at("precision"), w + ".precision");
                if (*entry.digits < 0) {
                    malformed(w + ".precision", "must be nonnegative");
                }
            }
            if (e.contains("two_pi_i_power")) {
                entry.two_pi_i_power = integer_field(e.at("two_pi_i_power"), w + ".two_pi_i_power");
            }
            row.push_back(entry);
        }
        doc.period.push_back(row);
    }

    const json &local = field(j, "local", "document");
    if (!local.is_array()) {
        malformed("local", "expected a list");
    }
    for (std::size_t i = 0; i < local.size(); ++i) {
        const std::string w = "local[" + std::to_string(i) + "]";
        const json &e = local[i];
        check_keys(e, {"p", "fl", "override"}, w);
        const long p = integer_field(field(e, "p", w), w + ".p");
        if (p < 2) {
            malformed(w + ".p", "not a prime");
        }
        if (doc.local.count(p)) {
            malformed(w, "duplicate prime " + std::to_string(p));
        }
        if (e.contains("fl") == e.contains("override")) {
            malformed(w, "needs exactly one of \"fl\" and \"override\"");
        }
        if (e.contains("fl")) {
            doc.local[p] = fl_field(e.at("fl"), p, n, w + ".fl");
        } else {
            const json &o = e.at("override");
            if (!o.is_object()) {
                malformed(w + ".override", "expected an object r -> v");
            }
            LocalLatticeSpec spec;
            spec.p = p;
            spec.provenance = Provenance::explicit_override;
            for (const auto &[key, value] : o.items()) {
                const long r = integer_key(key, w + ".override");
                spec.values[static_cast<int>(r)] = integer_field(value, w + ".override[" + key + "]");
            }
            doc.local[p] = spec;
        }
    }

    const json &bad = field(j, "bad_primes", "document");
    if (!bad.is_array()) {
        malformed("bad_primes", "expected a list");
    }
    for (const auto &b : bad) {
        doc.bad_primes.insert(integer_field(b, "bad_primes"));
    }
    return doc;
}

inline MotiveDocument parse_document(const std::string &text)
{
    return document_from_json(detail::parse_json(text));
}

inline json to_json(const MotiveDocument &doc)
{
    json out;
    out["format_version"] = format_version;
    json meta = doc.metadata.is_object() ? doc.metadata : json::object();
    meta["id"] = doc.id;
    out["metadata"] = meta;
    json hodge = json::object();
    for (int r = doc.type.a; r < doc.type.b(); ++r) {
        hodge[std::to_string(r)] = doc.type.hodge_number(r);
    }
    out["type"] = {{"weight", doc.type.weight}, {"a", doc.type.a}, {"b", doc.type.b()}, {"hodge", hodge}};
    const std::size_t n = doc.type.rank();
    json fdims = json::object();
    for (int r = doc.type.a; r <= doc.type.b(); ++r) {
        fdims[std::to_string(r)] = n - doc.type.codimension(r);
    }
    out["dr"] = {{"rank", n}, {"reference", "adapted"}, {"filtration", fdims}};
    out["betti"] = {{"rank", n}};
    json period = json::array();
    for (const auto &row : doc.period) {
        json r = json::array();
        for (const auto &e : row) {
            json entry = {{"re", e.re}, {"im", e.im}};
            if (e.digits) {
                entry["precision"] = *e.digits;
            }
            if (e.two_pi_i_power != 0) {
                entry["two_pi_i_power"] = e.two_pi_i_power;
            }
            r.push_back(entry);
        }
        period.push_back(r);
    }
    out["period"] = period;
    json local = json::array();
    for (const auto &[p, datum] : doc.local) {
        if (const auto *fl = std::get_if<FilPhiModule>(&datum)) {
            local.push_back({{"p", p}, {"fl", detail::fl_json(*fl)}});
        } else {
            json o = json::object();
            for (const auto &[r, v] : std::get<LocalLatticeSpec>(datum).values) {
                o[std::to_string(r)] = v;
            }
            local.push_back({{"p", p}, {"override", o}});
        }
    }
    out["local"] = local;
    out["bad_primes"] = doc.bad_primes;
    return out;
}

/// Canonical text: sorted keys, two-space indentation, trailing newline.
inline std::string serialize(const MotiveDocument &doc) { return to_json(doc).dump(2) + "\n"; }

inline std::string canonicalize(const std::string &text) { return serialize(parse_document(text)); }

// ---------------------------------------------------------------------------
// Documents <-> data

namespace detail
{

inline Real decimal_ball(const std::string &text, std::optional<long> digits, long prec)
{
    Real x = Real::from_rational(parse_rational(text), prec);
    if (digits) {
        x = x.widened(rational_power(Rational(10), -*digits));
    }
    return x;
}

} // namespace detail

inline MotiveData to_motive(const MotiveDocument &doc, long prec = default_precision)
{
    MotiveData m;
    m.id = doc.id;
    m.type = doc.type;
    const std::size_t n = doc.type.rank();
    m.period = ComplexMatrix(n, n, Complex(Real(0, prec)));
    const Complex tpi = Complex::two_pi_i(prec);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const PeriodEntry &e = doc.period[i][j];
            Complex z(detail::decimal_ball(e.re, e.digits, prec), detail::decimal_ball(e.im, e.digits, prec));
            if (e.two_pi_i_power != 0) {
                z = z * pow(tpi, e.two_pi_i_power);
            }
            m.period(i, j) = z;
        }
    }
    m.local = doc.local;
    m.bad_primes = doc.bad_primes;
    return m;
}

namespace detail
{

// Decimal text of a ball part and the number of decimal places d such that
// the text is within 10^-d of every point of the ball; nullopt when exact.
inline std::pair<std::string, std::optional<long>> decimal_of(const Real &x, int sig)
{
    std::string text = x.mid_string(sig);
    Rational printed = parse_rational(text);
    Rational mid;
    mpfr_get_q(mid.get_mpq_t(), x.mid().get());
    Rational err = abs(printed - mid);
    Rational rad;
    mpfr_get_q(rad.get_mpq_t(), x.rad().get());
    err += rad;
    if (err == 0) {
        return {text, std::nullopt};
    }
    // Largest d with err <= 10^-d.
    const double e = err.get_d();
    long d = e > 0 ? static_cast<long>(std::floor(-std::log10(e))) + 1 : 400;
    while (err > rational_power(Rational(10), -d)) {
        --d;
    }
    return {text, d};
}

} // namespace detail

/// Document for certified data: every period entry is printed with enough
/// digits for the working precision and a precision field covering both the
/// ball radius and the decimal rounding.
inline MotiveDocument document_from_motive(const MotiveData &m)
{
    MotiveDocument doc;
    doc.id = m.id;
    doc.metadata = {{"id", m.id}};
    doc.type = m.type;
    const int sig = static_cast<int>(std::ceil(static_cast<double>(m.precision()) * std::log10(2.0))) + 3;
    for (std::size_t i = 0; i < m.period.rows(); ++i) {
        std::vector<PeriodEntry> row;
        for (std::size_t j = 0; j < m.period.cols(); ++j) {
            auto [re, dre] = detail::decimal_of(m.period(i, j).re(), sig);
            auto [im, dim] = detail::decimal_of(m.period(i, j).im(), sig);
            PeriodEntry e;
            e.re = re;
            e.im = im;
            if (dre || dim) {
                e.digits = std::min(dre.value_or(dim.value_or(0)), dim.value_or(dre.value_or(0)));
            }
            row.push_back(e);
        }
        doc.period.push_back(row);
    }
    doc.local = m.local;
    doc.bad_primes = m.bad_primes;
    return doc;
}

// ---------------------------------------------------------------------------
// Quotient specs

/// {"format_version", "quotient": {"p", "k", "q_dr", "q_b", "target",
/// "check_betti"?}}; the exponent n comes from the caller.
inline QuotientSpec parse_quotient_spec(const std::string &text, std::size_t rank)
{
    using namespace detail;
    json j = parse_json(text);
    if (!j.is_object()) {
        malformed("spec", "expected an object");
    }
    check_keys(j, {"format_version", "quotient"}, "spec");
    check_version(j);
    const json &q = field(j, "quotient", "spec");
    check_keys(q, {"p", "k", "q_dr", "q_b", "target", "check_betti"}, "quotient");
    QuotientSpec spec;
    spec.p = integer_field(field(q, "p", "quotient"), "quotient.p");
    const long k = integer_field(field(q, "k", "quotient"), "quotient.k");
    if (k < 0) {
        malformed("quotient.k", "must be nonnegative");
    }
    spec.k = static_cast<std::size_t>(k);
    spec.q_dr = rows_field(field(q, "q_dr", "quotient"), rank, "quotient.q_dr");
    spec.q_b = rows_field(field(q, "q_b", "quotient"), rank, "quotient.q_b");
    spec.target = fl_field(field(q, "target", "quotient"), spec.p, spec.k, "quotient.target");
    if (q.contains("check_betti")) {
        if (!q.at("check_betti").is_boolean()) {
            malformed("quotient.check_betti", "expected true or false");
        }
        spec.check_betti = q.at("check_betti").get<bool>();
    }
    return spec;
}

inline std::string serialize(const QuotientSpec &spec)
{
    json q = {{"p", spec.p},
              {"k", spec.k},
              {"q_dr", detail::rows_json(spec.q_dr)},
              {"q_b", detail::rows_json(spec.q_b)},
              {"target", detail::fl_json(spec.target)},
              {"check_betti", spec.check_betti}};
    json out = {{"format_version", format_version}, {"quotient", q}};
    return out.dump(2) + "\n";
}

} // namespace motive_height

#endif
