#pragma once

#include "sscirc/boundary.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sscirc {

using json = nlohmann::json;

namespace detail {

/// Non-finite doubles travel as the strings "inf", "-inf", "nan".
inline json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double num(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw InvalidArgument("bad number in JSON: " + s);
    }
    return j.get<double>();
}

template <typename T>
json opt(const std::optional<T>& v);

template <typename T>
std::optional<T> opt_from(const json& j);

}  // namespace detail

inline void to_json(json& j, const Rational& r) { j = r.str(); }
inline void from_json(const json& j, Rational& r) { r = Rational::parse(j.get<std::string>()); }

inline void to_json(json& j, const EigenResult& e) {
    j = json{{"lambda", detail::num(e.lambda)},
             {"x", {e.x[0], e.x[1], e.x[2]}},
             {"residual", detail::num(e.residual)},
             {"starts_used", e.starts_used},
             {"structured_lambda", detail::num(e.structured_lambda)},
             {"multistart_lambda", detail::num(e.multistart_lambda)},
             {"reduction_counterexample", e.reduction_counterexample},
             {"seed", e.seed}};
}

inline void from_json(const json& j, EigenResult& e) {
    e.lambda = detail::num(j.at("lambda"));
    for (std::size_t i = 0; i < 3; ++i) e.x[i] = j.at("x").at(i).get<double>();
    e.residual = detail::num(j.at("residual"));
    e.starts_used = j.at("starts_used").get<int>();
    e.structured_lambda = detail::num(j.at("structured_lambda"));
    e.multistart_lambda = detail::num(j.at("multistart_lambda"));
    e.reduction_counterexample = j.at("reduction_counterexample").get<bool>();
    e.seed = j.at("seed").get<std::uint64_t>();
}

/// Basis exponents, rows of the lower triangle of G, min_eig, reconstruction_error.
inline void to_json(json& j, const GramCertificate& g) {
    json basis = json::array();
    for (const auto& e : g.basis.monos) basis.push_back({e[0], e[1], e[2]});
    json lower = json::array();
    for (Eigen::Index i = 0; i < g.G.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k <= i; ++k) row.push_back(g.G(i, k));
        lower.push_back(std::move(row));
    }
    j = json{{"half_degree", g.basis.k},
             {"basis", std::move(basis)},
             {"gram_lower", std::move(lower)},
             {"min_eig", detail::num(g.min_eig)},
             {"reconstruction_error", detail::num(g.reconstruction_error)}};
}

inline void from_json(const json& j, GramCertificate& g) {
    g.basis.k = j.at("half_degree").get<int>();
    g.basis.monos.clear();
    for (const auto& e : j.at("basis")) g.basis.monos.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
    const auto& lower = j.at("gram_lower");
    const auto n = static_cast<Eigen::Index>(lower.size());
    if (n != static_cast<Eigen::Index>(g.basis.monos.size()))
        throw InvalidArgument("Gram matrix size does not match the basis");
    g.G.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = lower.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != i + 1) throw InvalidArgument("malformed Gram lower triangle");
        for (Eigen::Index k = 0; k <= i; ++k) g.G(i, k) = g.G(k, i) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    g.min_eig = detail::num(j.at("min_eig"));
    g.reconstruction_error = detail::num(j.at("reconstruction_error"));
}

inline MMethod parse_method(const std::string& s) {
    for (MMethod m : {MMethod::closed_form, MMethod::linear_segment, MMethod::sdp, MMethod::bisection})
        if (to_string(m) == s) return m;
    throw InvalidArgument("unknown M method: " + s);
}

inline void to_json(json& j, const CertificateBundle& b) {
    j = json{{"m", b.m},
             {"u", b.u},
             {"c", b.c},
             {"critical_value", detail::num(b.critical_value)},
             {"method", to_string(b.method)},
             {"certificate", detail::opt(b.certificate)},
             {"certificate_margin", detail::num(b.certificate_margin)},
             {"minimizer", detail::opt(b.minimizer)},
             {"minimizer_value", detail::num(b.minimizer_value)},
             {"minimizer_threshold", detail::num(b.minimizer_threshold)},
             {"status", b.confirmed ? "CONFIRMED" : "UNCONFIRMED"},
             {"note", b.note}};
}

inline void from_json(const json& j, CertificateBundle& b) {
    b.m = j.at("m").get<int>();
    b.u = j.at("u").get<double>();
    b.c = j.at("c").get<double>();
    b.critical_value = detail::num(j.at("critical_value"));
    b.method = parse_method(j.at("method").get<std::string>());
    b.certificate = detail::opt_from<GramCertificate>(j.at("certificate"));
    b.certificate_margin = detail::num(j.at("certificate_margin"));
    b.minimizer = detail::opt_from<EigenResult>(j.at("minimizer"));
    b.minimizer_value = detail::num(j.at("minimizer_value"));
    b.minimizer_threshold = detail::num(j.at("minimizer_threshold"));
    b.confirmed = j.at("status").get<std::string>() == "CONFIRMED";
    b.note = j.at("note").get<std::string>();
}

inline void to_json(json& j, const Breakpoint& bp) {
    j = json{{"kind", bp.kind == BreakpointKind::u0 ? "u0" : "v0"},
             {"m", bp.m},
             {"value", bp.value},
             {"decimal", bp.value.to_double()},
             {"verified", bp.verified},
             {"lambda", detail::num(bp.lambda)},
             {"lambda_residual", detail::num(bp.lambda_residual)},
             {"note", bp.note}};
}

inline void from_json(const json& j, Breakpoint& bp) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "u0" && kind != "v0") throw InvalidArgument("unknown breakpoint kind: " + kind);
    bp.kind = kind == "u0" ? BreakpointKind::u0 : BreakpointKind::v0;
    bp.m = j.at("m").get<int>();
    bp.value = j.at("value").get<Rational>();
    bp.verified = j.at("verified").get<bool>();
    bp.lambda = detail::num(j.at("lambda"));
    bp.lambda_residual = detail::num(j.at("lambda_residual"));
    bp.note = j.at("note").get<std::string>();
}

inline ReportStatus parse_status(const std::string& s) {
    for (ReportStatus st : {ReportStatus::confirmed, ReportStatus::unconfirmed, ReportStatus::solver_failure})
        if (to_string(st) == s) return st;
    throw InvalidArgument("unknown report status: " + s);
}

inline void to_json(json& j, const BoundaryReport& r) {
    j = json{{"m", r.m},
             {"u", r.u},
             {"c", r.c},
             {"alpha", r.alpha},
             {"canonical_u", r.canonical_u},
             {"canonical_c", r.canonical_c},
             {"N", detail::num(r.n)},
             {"N_provenance", r.n_provenance},
             {"M", detail::num(r.m_value)},
             {"M_method", r.m_method},
             {"gap", detail::num(r.gap)},
             {"breakpoint", detail::opt(r.breakpoint)},
             {"certificates", detail::opt(r.certificates)},
             {"status", to_string(r.status)},
             {"errors", r.errors},
             {"config",
              {{"seed", r.seed},
               {"n_starts", r.n_starts},
               {"tol_d", r.tol_d},
               {"sdp_tol", r.sdp_tol},
               {"psd_tol", r.psd_tol},
               {"residual_tol", r.residual_tol},
               {"confirm_tolerance", r.confirm_tolerance}}}};
}

inline void from_json(const json& j, BoundaryReport& r) {
    r.m = j.at("m").get<int>();
    r.u = j.at("u").get<Rational>();
    r.c = j.at("c").get<Rational>();
    r.alpha = j.at("alpha").get<double>();
    r.canonical_u = j.at("canonical_u").get<Rational>();
    r.canonical_c = j.at("canonical_c").get<int>();
    r.n = detail::num(j.at("N"));
    r.n_provenance = j.at("N_provenance").get<std::string>();
    r.m_value = detail::num(j.at("M"));
    r.m_method = j.at("M_method").get<std::string>();
    r.gap = detail::num(j.at("gap"));
    r.breakpoint = detail::opt_from<Breakpoint>(j.at("breakpoint"));
    r.certificates = detail::opt_from<CertificateBundle>(j.at("certificates"));
    r.status = parse_status(j.at("status").get<std::string>());
    r.errors = j.at("errors").get<std::vector<std::string>>();
    const auto& c = j.at("config");
    r.seed = c.at("seed").get<std::uint64_t>();
    r.n_starts = c.at("n_starts").get<int>();
    r.tol_d = c.at("tol_d").get<double>();
    r.sdp_tol = c.at("sdp_tol").get<double>();
    r.psd_tol = c.at("psd_tol").get<double>();
    r.residual_tol = c.at("residual_tol").get<double>();
    r.confirm_tolerance = c.at("confirm_tolerance").get<double>();
}

namespace detail {
template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}
}  // namespace detail

// ---------------------------------------------------------------- config

enum class OutputFormat { pretty, json, csv };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "pretty") return OutputFormat::pretty;
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    throw InvalidArgument("unknown output format: " + s);
}

inline std::string to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::pretty: return "pretty";
        case OutputFormat::json: return "json";
        case OutputFormat::csv: return "csv";
    }
    return "pretty";
}

struct RunConfig {
    double tol_d = 1e-7;
    double residual_tol = 1e-9;
    double sdp_tol = 1e-9;
    double psd_tol = 1e-7;
    double sos_tol = 1e-7;
    double confirm_abs = 1e-5;
    double confirm_rel = 1e-5;
    int n_starts = 64;
    int sdp_max_iter = 100;
    int eigen_max_iters = 400;
    std::uint64_t seed = 20160707;
    int max_m = kMaxOrder;
    int jobs = 1;
    bool bisection = false;
    OutputFormat format = OutputFormat::pretty;
    std::string out;

    /// One "key = value" assignment. Unknown keys throw.
    void set(const std::string& key, const std::string& value) {
        auto real = [&] {
            std::size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos != value.size() || !(v > 0)) throw InvalidArgument(key + " must be a positive number");
            return v;
        };
        auto integer = [&](int lo) {
            std::size_t pos = 0;
            const long long v = std::stoll(value, &pos);
            if (pos != value.size() || v < lo) throw InvalidArgument(key + " must be an integer >= " + std::to_string(lo));
            return v;
        };
        try {
            if (key == "tol_d") tol_d = real();
            else if (key == "residual_tol") residual_tol = real();
            else if (key == "sdp_tol") sdp_tol = real();
            else if (key == "psd_tol") psd_tol = real();
            else if (key == "sos_tol") sos_tol = real();
            else if (key == "confirm_abs") confirm_abs = real();
            else if (key == "confirm_rel") confirm_rel = real();
            else if (key == "n_starts") n_starts = static_cast<int>(integer(1));
            else if (key == "sdp_max_iter") sdp_max_iter = static_cast<int>(integer(1));
            else if (key == "eigen_max_iters") eigen_max_iters = static_cast<int>(integer(1));
            else if (key == "seed") seed = static_cast<std::uint64_t>(integer(0));
            else if (key == "max_m") max_m = static_cast<int>(integer(4));
            else if (key == "jobs") jobs = static_cast<int>(integer(1));
            else if (key == "bisection") {
                if (value != "true" && value != "false") throw InvalidArgument("bisection must be true or false");
                bisection = value == "true";
            } else if (key == "format") format = parse_format(value);
            else if (key == "out") out = value;
            else throw InvalidArgument("unknown config key: " + key);
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const InvalidArgument*>(&e)) throw;
            throw InvalidArgument("bad value for " + key + ": " + value);
        }
    }

    /// Flat "key = value" lines; '#' starts a comment.
    void load_text(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void load_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw InvalidArgument("cannot read config file " + path);
        load_text(std::string(std::istreambuf_iterator<char>(f), {}));
    }

    [[nodiscard]] AnalysisConfig analysis() const {
        AnalysisConfig a;
        a.eigen.n_starts = n_starts;
        a.eigen.residual_tol = residual_tol;
        a.eigen.max_iters = eigen_max_iters;
        a.eigen.seed = seed;
        a.mvalue.tol_d = tol_d;
        a.mvalue.bisection = bisection;
        a.mvalue.sos.sdp_tol = sdp_tol;
        a.mvalue.sos.max_iter = sdp_max_iter;
        a.psd_tol = psd_tol;
        a.sos_tol = sos_tol;
        a.confirm_abs = confirm_abs;
        a.confirm_rel = confirm_rel;
        return a;
    }

    [[nodiscard]] json to_json() const {
        return json{{"tol_d", tol_d},         {"residual_tol", residual_tol},
                    {"sdp_tol", sdp_tol},     {"psd_tol", psd_tol},
                    {"sos_tol", sos_tol},     {"confirm_abs", confirm_abs},
                    {"confirm_rel", confirm_rel}, {"n_starts", n_starts},
                    {"sdp_max_iter", sdp_max_iter}, {"eigen_max_iters", eigen_max_iters},
                    {"seed", seed},           {"max_m", max_m},
                    {"jobs", jobs},           {"bisection", bisection},
                    {"format", sscirc::to_string(format)}, {"out", out}};
    }
};

// ---------------------------------------------------------------- fixtures

class FixtureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FixtureRow {
    int table = 0;
    int m = 0;
    int c = 0;
    std::string u_text;
    Rational u;
    std::string m_expected_text;
    std::string n_expected_text;
    double m_expected = 0.0;
    double n_expected = 0.0;
    /// Row lies on a linear segment; compared against the closed form.
    bool exact = false;
    /// Row whose printed M and N disagree beyond the usual tolerance.
    bool flagged = false;
};

inline constexpr const char* kFixtureHeader = "table,m,c,u,M_expected,N_expected,exact,flagged";

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FixtureError("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), {}};
}

inline std::vector<FixtureRow> parse_fixture(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kFixtureHeader) throw FixtureError("fixture header mismatch");
    std::vector<FixtureRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 8) throw FixtureError("fixture line " + std::to_string(lineno) + ": expected 8 fields");
        try {
            FixtureRow r;
            r.table = std::stoi(f[0]);
            r.m = std::stoi(f[1]);
            r.c = std::stoi(f[2]);
            r.u_text = f[3];
            r.u = Rational::parse(f[3]);
            r.m_expected_text = f[4];
            r.n_expected_text = f[5];
            r.m_expected = std::stod(f[4]);
            r.n_expected = std::stod(f[5]);
            r.exact = f[6] == "1";
            r.flagged = f[7] == "1";
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw FixtureError("fixture line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

inline std::vector<FixtureRow> load_fixture(const std::string& path) { return parse_fixture(read_file(path)); }

#ifdef SSCIRC_DATA_DIR
inline std::string default_fixture_path() { return std::string(SSCIRC_DATA_DIR) + "/reference_tables.csv"; }
#else
inline std::string default_fixture_path() { return "data/reference_tables.csv"; }
#endif

/// Tolerance for a computed value against a printed one.
inline double row_tolerance(const FixtureRow& row, double expected) {
    const double abs_tol = row.flagged ? 5e-3 : 1e-4;
    return std::max(abs_tol, 1e-5 * std::abs(expected));
}

inline constexpr double kExactRowTolerance = 1e-9;

struct RowResult {
    FixtureRow row;
    double m_computed = std::numeric_limits<double>::quiet_NaN();
    double n_computed = std::numeric_limits<double>::quiet_NaN();
    /// Closed form on exact rows.
    std::optional<double> exact_value;
    bool pass = false;
    std::string status;
    std::string error;
};

inline RowResult check_row(const FixtureRow& row, const AnalysisConfig& cfg) {
    RowResult r;
    r.row = row;
    AnalysisConfig c = cfg;
    c.certify = false;
    const BoundaryReport rep = analyze(row.m, row.u, Rational(row.c), c);
    r.status = to_string(rep.status);
    if (rep.status == ReportStatus::solver_failure) {
        for (const auto& e : rep.errors) r.error += (r.error.empty() ? "" : "; ") + e;
        return r;
    }
    r.m_computed = rep.m_value;
    r.n_computed = rep.n;
    if (row.exact) {
        const double lin = linear_threshold(row.m, row.u, Rational(row.c));
        r.exact_value = lin;
        r.pass = std::abs(r.m_computed - lin) <= kExactRowTolerance && std::abs(r.n_computed - lin) <= kExactRowTolerance &&
                 std::abs(row.n_expected - lin) <= row_tolerance(row, lin);
    } else {
        r.pass = std::abs(r.m_computed - row.m_expected) <= row_tolerance(row, row.m_expected) &&
                 std::abs(r.n_computed - row.n_expected) <= row_tolerance(row, row.n_expected);
    }
    return r;
}

inline constexpr const char* kCsvHeader = "table,m,c,u,M_computed,N_computed,M_expected,N_expected,pass";

inline std::string format_double(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string csv_line(const RowResult& r) {
    return std::to_string(r.row.table) + "," + std::to_string(r.row.m) + "," + std::to_string(r.row.c) + "," +
           r.row.u_text + "," + format_double(r.m_computed) + "," + format_double(r.n_computed) + "," +
           r.row.m_expected_text + "," + r.row.n_expected_text + "," + (r.pass ? "1" : "0");
}

}  // namespace sscirc
