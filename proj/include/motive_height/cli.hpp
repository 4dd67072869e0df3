#ifndef MOTIVE_HEIGHT_CLI_HPP
#define MOTIVE_HEIGHT_CLI_HPP

// Command-line front end. run() is the whole program minus argv handling so
// tests can drive it in-process.
//
// Exit codes: 0 ok, 1 validation failure (or a failed check), 2 precision
// exhausted, 3 malformed input.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "document.hpp"
#include "elliptic.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "motive.hpp"
#include "parallel.hpp"

namespace motive_height::cli
{

enum Exit : int { ok = 0, invalid = 1, precision = 2, malformed = 3 };

struct Options
{
    long precision = default_precision;
    std::string window;
    std::string format = "text";
    int digits = 30;
    bool simple_definition = false;
    unsigned threads = 0;
};

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw parse_error(path + ": cannot read file");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string format_real(const Real &x, int digits) { return x.mid_string(digits) + " ± " + x.rad_string(); }

// ---------------------------------------------------------------------------
// Example documents

inline MotiveDocument tate_document(int r)
{
    MotiveDocument doc;
    doc.id = "tate:" + std::to_string(r);
    doc.metadata = {{"id", doc.id}};
    doc.type.weight = -2 * r;
    doc.type.a = -r;
    doc.type.hodge = {1};
    PeriodEntry e;
    e.re = "1";
    e.two_pi_i_power = -r;
    doc.period = {{e}};
    return doc;
}

/// Documents emitted by `example`: trivial, tate:<r>, elliptic:square and
/// elliptic:<label> for the built-in curves.
inline MotiveDocument example_document(const std::string &name, long prec = default_precision)
{
    if (name == "trivial") {
        MotiveDocument doc = tate_document(0);
        doc.id = "trivial";
        doc.metadata = {{"id", doc.id}};
        for (long p : {2L, 3L, 5L}) {
            doc.local[p] = trivial_fl_module(p);
        }
        return doc;
    }
    if (name.rfind("tate:", 0) == 0) {
        const std::string arg = name.substr(5);
        try {
            std::size_t used = 0;
            int r = std::stoi(arg, &used);
            if (used == arg.size()) {
                return tate_document(r);
            }
        } catch (const std::exception &) {
        }
        throw parse_error("example: bad twist in '" + name + "'");
    }
    if (name.rfind("elliptic:", 0) == 0) {
        const std::string label = name.substr(9);
        WeierstrassCurve e;
        if (label == "square" || label == "32a2") {
            e = curve_32a2();
        } else if (label == "11a1") {
            e = curve_11a1();
        } else if (label == "37a1") {
            e = curve_37a1();
        } else {
            throw parse_error("example: unknown curve '" + label + "' (square, 11a1, 37a1, 32a2)");
        }
        MotiveDocument doc = document_from_motive(elliptic_curve_h1(e, prec));
        doc.id = name;
        doc.metadata = {{"id", name}, {"curve", e.label}, {"a_invariants", e.a}};
        return doc;
    }
    throw parse_error("example: unknown name '" + name + "' (trivial, tate:<r>, elliptic:square, elliptic:11a1, "
                      "elliptic:37a1)");
}

// ---------------------------------------------------------------------------
// Commands

inline MotiveData load(const std::string &path, const Options &o)
{
    MotiveData m = to_motive(parse_document(read_file(path)), o.precision);
    if (!o.window.empty()) {
        int a = 0, b = 0;
        char comma = 0;
        std::istringstream s(o.window);
        if (!(s >> a >> comma >> b) || comma != ',' || !s.eof()) {
            throw parse_error("--window expects a,b");
        }
        m = with_window(m, a, b);
    }
    return m;
}

inline int report_validation(const ValidationReport &r, std::ostream &out)
{
    if (r.ok()) {
        out << "valid\n";
        return ok;
    }
    out << "invalid: " << r.issues.size() << (r.issues.size() == 1 ? " issue\n" : " issues\n");
    for (const auto &i : r.issues) {
        out << "  " << i.kind << " at " << i.location << ": " << i.message << "\n";
    }
    return invalid;
}

inline int cmd_validate(const std::string &path, const Options &o, std::ostream &out)
{
    return report_validation(validate(load(path, o)), out);
}

inline std::string height_row(const MotiveData &m, const HeightReport &r, int digits)
{
    return m.id + "\t" + std::to_string(r.a) + "\t" + std::to_string(r.b) + "\t" + r.h.mid_string(digits) + "\t" +
           r.h.rad_string() + "\t" + n_of_m(m, m.precision()).mid_string(digits);
}

inline int cmd_height(const std::string &path, const Options &o, std::ostream &out)
{
    MotiveData m = load(path, o);
    ValidationReport v = validate(m);
    if (!v.ok()) {
        return report_validation(v, out);
    }
    HeightOptions ho;
    ho.simple_definition = o.simple_definition;
    HeightReport r = height(m, ho);
    if (o.format == "rows") {
        out << height_row(m, r, o.digits) << "\n";
        return ok;
    }
    out << "id: " << m.id << "\n";
    out << "window: (" << r.a << ", " << r.b << ")\n";
    if (o.simple_definition) {
        out << "definition: simple\n";
    }
    out << "h = " << format_real(r.h, o.digits) << "\n";
    out << "H = " << format_real(r.H, o.digits) << "\n";
    out << "lattice scalar: " << to_string(r.lattice_scalar) << "\n";
    out << "reference norm: " << format_real(r.reference_norm, o.digits) << "\n";
    if (r.per_prime.empty()) {
        out << "local contributions: none\n";
    } else {
        out << "local contributions:\n";
        for (const auto &c : r.per_prime) {
            out << "  p=" << c.p << " r=" << c.r << " v=" << c.v << " (" << to_string(c.provenance) << ")\n";
        }
    }
    for (const auto &w : r.warnings) {
        out << "warning: " << w << "\n";
    }
    return ok;
}

inline int cmd_local(const std::string &path, long p, const Options &o, std::ostream &out)
{
    MotiveData m = load(path, o);
    ValidationReport v = validate(m);
    if (!v.ok()) {
        return report_validation(v, out);
    }
    if (!is_prime(p)) {
        throw parse_error("local: " + std::to_string(p) + " is not prime");
    }
    LocalLatticeSpec s = local_spec(m, p);
    out << "p = " << p << " (" << to_string(s.provenance) << ")\n";
    out << "window: (" << m.type.a << ", " << m.type.b() << ")\n";
    for (int r = m.type.a; r <= m.type.b(); ++r) {
        out << "v(" << r << ") = " << s.at(r) << "\n";
    }
    auto it = m.local.find(p);
    if (it != m.local.end()) {
        if (const auto *fl = std::get_if<FilPhiModule>(&it->second)) {
            out << "h0 rank: " << h0(*fl).rank() << "\n";
            H1cf h1 = h1cf(*fl);
            out << "h1cf: free rank " << h1.free_rank << ", torsion [";
            for (std::size_t i = 0; i < h1.torsion.size(); ++i) {
                out << (i ? ", " : "") << to_string(h1.torsion[i]);
            }
            out << "]\n";
        }
    }
    return ok;
}

inline int cmd_invariants(const std::string &path, const Options &o, std::ostream &out)
{
    MotiveData m = load(path, o);
    SEqualsT r = check_s_equals_t(m);
    out << "s = " << r.s << "\n";
    out << "t = " << to_string(r.t) << "\n";
    out << "s - t = " << to_string(r.defect) << "\n";
    out << "s = t: " << (r.pass ? "pass" : "fail") << "\n";
    return r.pass ? ok : invalid;
}

inline int cmd_experiment(const std::string &path, const std::string &spec_path, long n, const Options &o,
                          std::ostream &out)
{
    MotiveData m = load(path, o);
    ValidationReport v = validate(m);
    if (!v.ok()) {
        return report_validation(v, out);
    }
    QuotientSpec spec = parse_quotient_spec(read_file(spec_path), m.rank());
    spec.n = n;
    InvarianceReport r = invariance_experiment(m, spec);
    auto verdict = [](bool b) { return b ? "pass" : "fail"; };
    out << "p = " << r.p << ", n = " << r.n << ", k = " << r.k << ", w = " << r.weight << "\n";
    out << "s(U) = " << r.s << ", t(U) = " << to_string(r.t) << "\n";
    out << "lattice ratio: " << to_string(r.lattice_ratio) << " (p^(n·s) = " << to_string(r.expected_ratio)
        << ") " << verdict(r.lattice_ok) << "\n";
    out << "Betti index: " << to_string(r.betti_index) << "; index^w = " << to_string(r.betti_lhs)
        << ", p^(2n·t) = " << to_string(r.betti_rhs) << " " << verdict(r.betti_ok) << "\n";
    out << "h(M) = " << format_real(r.before.h, o.digits) << "\n";
    out << "h(M^(n)) = " << format_real(r.after.h, o.digits) << "\n";
    out << "predicted shift -n(s-t)·log p = " << format_real(r.predicted_shift, o.digits) << "\n";
    out << "heights equal within radii: " << verdict(r.height_ok) << "\n";
    out << "invariance: " << verdict(r.pass()) << "\n";
    return r.pass() ? ok : invalid;
}

inline int exit_code_of(const std::exception_ptr &e, std::string &message);

inline int cmd_batch(const std::vector<std::string> &inputs, const Options &o, std::ostream &out, std::ostream &err)
{
    std::vector<std::string> paths;
    for (const auto &in : inputs) {
        if (std::filesystem::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto &entry : std::filesystem::directory_iterator(in)) {
                if (entry.is_regular_file() && entry.path().extension() == ".json") {
                    found.push_back(entry.path().string());
                }
            }
            std::sort(found.begin(), found.end());
            paths.insert(paths.end(), found.begin(), found.end());
        } else {
            paths.push_back(in);
        }
    }
    struct Result
    {
        int code = ok;
        std::string row, message;
    };
    HeightOptions ho;
    ho.simple_definition = o.simple_definition;
    std::vector<Result> results = parallel_map(
        paths,
        [&](const std::string &path) {
            Result res;
            try {
                MotiveData m = load(path, o);
                ValidationReport v = validate(m);
                if (!v.ok()) {
                    res.code = invalid;
                    res.message = v.summary();
                    return res;
                }
                HeightReport r = height(m, ho);
                if (o.format == "rows") {
                    res.row = height_row(m, r, o.digits);
                } else {
                    res.row = m.id + "  (" + std::to_string(r.a) + ", " + std::to_string(r.b) +
                              ")  h = " + format_real(r.h, o.digits) +
                              "  n(M) = " + n_of_m(m, m.precision()).mid_string(o.digits);
                }
            } catch (...) {
                res.code = exit_code_of(std::current_exception(), res.message);
            }
            return res;
        },
        o.threads);
    int code = ok;
    if (o.format != "rows") {
        out << "# over Q: log|D_K| = 0, [K:Q] = 1; no inequality is asserted\n";
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].code != ok) {
            err << paths[i] << ": " << results[i].message << "\n";
            code = std::max(code, results[i].code);
            continue;
        }
        out << results[i].row << "\n";
    }
    return code;
}

inline int cmd_example(const std::string &name, const Options &o, std::ostream &out)
{
    out << serialize(example_document(name, o.precision));
    return ok;
}

// ---------------------------------------------------------------------------
// Errors and dispatch

inline int exit_code_of(const std::exception_ptr &e, std::string &message)
{
    try {
        std::rethrow_exception(e);
    } catch (const parse_error &x) {
        message = x.what();
        return malformed;
    } catch (const precision_exhausted &x) {
        message = x.what();
        return precision;
    } catch (const error &x) {
        message = x.what();
        return invalid;
    } catch (const std::exception &x) {
        message = x.what();
        return malformed;
    }
}

inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Heights of motives from realization data", "motive-height"};
    app.require_subcommand(1);
    Options o;
    std::string path, spec_path, name;
    std::vector<std::string> inputs;
    long prime = 0, n = 0;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--precision", o.precision, "working precision in bits")->check(CLI::Range(16L, 1L << 20));
        sub->add_option("--digits", o.digits, "significant digits shown")->check(CLI::Range(1, 10000));
    };
    auto height_flags = [&](CLI::App *sub) {
        sub->add_option("--window", o.window, "window a,b replacing the document's");
        sub->add_option("--format", o.format, "text or rows")->check(CLI::IsMember({"text", "rows"}));
        sub->add_flag("--simple-definition", o.simple_definition, "use ⊗_r (L_r^-1 ⊗ L_{r+1})^r");
    };

    CLI::App *validate_cmd = app.add_subcommand("validate", "check every invariant of a document");
    validate_cmd->add_option("document", path)->required();
    common(validate_cmd);
    validate_cmd->add_option("--window", o.window, "window a,b replacing the document's");

    CLI::App *height_cmd = app.add_subcommand("height", "compute h(M) and H(M)");
    height_cmd->add_option("document", path)->required();
    common(height_cmd);
    height_flags(height_cmd);

    CLI::App *local_cmd = app.add_subcommand("local", "local lattice values at a prime");
    local_cmd->add_option("document", path)->required();
    local_cmd->add_option("prime", prime)->required();
    common(local_cmd);
    local_cmd->add_option("--window", o.window, "window a,b replacing the document's");

    CLI::App *inv_cmd = app.add_subcommand("invariants", "s, t and the s = t check");
    inv_cmd->add_option("document", path)->required();
    common(inv_cmd);

    CLI::App *exp_cmd = app.add_subcommand("experiment", "sublattice invariance experiment");
    exp_cmd->add_option("document", path)->required();
    exp_cmd->add_option("spec", spec_path)->required();
    exp_cmd->add_option("n", n)->required()->check(CLI::NonNegativeNumber);
    common(exp_cmd);

    CLI::App *batch_cmd = app.add_subcommand("batch", "h and n(M) for many documents");
    batch_cmd->add_option("inputs", inputs, "documents or directories of *.json")->required();
    common(batch_cmd);
    height_flags(batch_cmd);
    batch_cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");

    CLI::App *example_cmd = app.add_subcommand("example", "print a builder document");
    example_cmd->add_option("name", name, "trivial, tate:<r>, elliptic:square, elliptic:11a1, elliptic:37a1")
        ->required();
    common(example_cmd);

    std::vector<std::string> argv_storage = {"motive-height"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char *> argv;
    for (const auto &a : argv_storage) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : malformed;
    }

    try {
        if (*validate_cmd) {
            return cmd_validate(path, o, out);
        }
        if (*height_cmd) {
            return cmd_height(path, o, out);
        }
        if (*local_cmd) {
            return cmd_local(path, prime, o, out);
        }
        if (*inv_cmd) {
            return cmd_invariants(path, o, out);
        }
        if (*exp_cmd) {
            return cmd_experiment(path, spec_path, n, o, out);
        }
        if (*batch_cmd) {
            return cmd_batch(inputs, o, out, err);
        }
        if (*example_cmd) {
            return cmd_example(name, o, out);
        }
    } catch (...) {
        std::string message;
        const int code = exit_code_of(std::current_exception(), message);
        err << "error: " << message << "\n";
        return code;
    }
    return malformed;
}

} // namespace motive_height::cli

#endif
