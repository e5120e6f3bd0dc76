#include "sscirc/io.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using namespace sscirc;

enum Exit : int {
    kOk = 0,
    kRowsFailed = 1,
    kUsage = 2,
    kUnconfirmed = 3,
    kSolverFailure = 4,
    kFixtureMissing = 5,
};

struct Globals {
    std::string config_path;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string format;
    std::string out;
    std::vector<std::string> sets;
};

Rational parse_rational(const std::string& name, const std::string& text) {
    try {
        return Rational::parse(text);
    } catch (const std::exception& e) {
        throw InvalidArgument("--" + name + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

/// Emit to --out when given, else stdout.
void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty())
        std::cout << text;
    else
        write_text(cfg.out, text);
}

std::string vec_str(const Vec3& x) {
    return "(" + format_double(x[0], 10) + ", " + format_double(x[1], 10) + ", " + format_double(x[2], 10) + ")";
}

// ---------------------------------------------------------------- eval

int cmd_eval(const RunConfig& cfg, int m, double d, double u, double c, const std::string& xs) {
    std::vector<double> v;
    std::stringstream ss(xs);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t pos = 0;
        try {
            v.push_back(std::stod(cell, &pos));
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != cell.size()) throw InvalidArgument("--x: cannot parse '" + cell + "'");
    }
    if (v.size() != 3) throw InvalidArgument("--x needs three comma separated numbers");
    const CirculantTensor t(m, d, u, c);
    const Vec3 x{v[0], v[1], v[2]};
    const double f = eval_form(t, x);
    const Vec3 g = apply_power(t, x);
    if (cfg.format == OutputFormat::json) {
        emit(cfg, json{{"m", m}, {"d", d}, {"u", u}, {"c", c}, {"x", v}, {"f", f}, {"Ax^{m-1}", {g[0], g[1], g[2]}}}
                          .dump(2) +
                      "\n");
    } else if (cfg.format == OutputFormat::csv) {
        char buf[512];
        std::snprintf(buf, sizeof buf, "m,d,u,c,x1,x2,x3,f,g1,g2,g3\n%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      m, d, u, c, v[0], v[1], v[2], f, g[0], g[1], g[2]);
        emit(cfg, buf);
    } else {
        char buf[256];
        std::snprintf(buf, sizeof buf, "f(x) = %.17g\nA x^{m-1} = (%.17g, %.17g, %.17g)\n", f, g[0], g[1], g[2]);
        emit(cfg, buf);
    }
    return kOk;
}

// ---------------------------------------------------------------- analyze

std::string pretty_report(const BoundaryReport& r) {
    std::ostringstream o;
    o << "m = " << r.m << ", u = " << r.u.str() << ", c = " << r.c.str() << "\n";
    if (r.alpha != 1.0) o << "scale " << r.alpha << " onto u' = " << r.canonical_u.str() << ", c' = " << r.canonical_c << "\n";
    o << "N = " << format_double(r.n) << "  [" << r.n_provenance << "]\n";
    o << "M = " << format_double(r.m_value) << "  [" << r.m_method << "]\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", r.gap);
    o << "gap M - N = " << buf << "  (tolerance " << r.confirm_tolerance << ")\n";
    if (r.breakpoint)
        o << (r.breakpoint->kind == BreakpointKind::u0 ? "u0 = " : "v0 = ") << r.breakpoint->value.str()
          << (r.breakpoint->verified ? " (verified)" : " (not verified)") << "\n";
    if (r.certificates) {
        const auto& b = *r.certificates;
        o << "certificate: " << (b.certificate ? "Gram matrix verified" : "none");
        if (b.minimizer) o << ", minimizer " << vec_str(b.minimizer->x) << " f = " << b.minimizer_value;
        o << (b.confirmed ? " [CONFIRMED]" : " [UNCONFIRMED]") << "\n";
        if (!b.note.empty()) o << "  note: " << b.note << "\n";
    }
    for (const auto& e : r.errors) o << "error: " << e << "\n";
    o << to_string(r.status) << "\n";
    return o.str();
}

int status_exit(ReportStatus s) {
    switch (s) {
        case ReportStatus::confirmed: return kOk;
        case ReportStatus::unconfirmed: return kUnconfirmed;
        case ReportStatus::solver_failure: return kSolverFailure;
    }
    return kSolverFailure;
}

int cmd_analyze(const RunConfig& cfg, int m, const std::string& us, const std::string& cs) {
    require_even_order(m);
    if (m > cfg.max_m) throw InvalidArgument("m exceeds configured max_m");
    const BoundaryReport r = analyze(m, parse_rational("u", us), parse_rational("c", cs), cfg.analysis());
    json j = r;
    j["run_config"] = cfg.to_json();
    if (cfg.format == OutputFormat::json)
        emit(cfg, j.dump(2) + "\n");
    else if (cfg.format == OutputFormat::csv)
        emit(cfg, "m,c,u,M,N,gap,confirmed\n" + std::to_string(r.m) + "," + r.c.str() + "," + r.u.str() + "," +
                      format_double(r.m_value) + "," + format_double(r.n) + "," + format_double(r.gap, 15) + "," +
                      (r.status == ReportStatus::confirmed ? "1" : "0") + "\n");
    else
        emit(cfg, pretty_report(r));
    return status_exit(r.status);
}

// ---------------------------------------------------------------- table

int cmd_table(const RunConfig& cfg, int table, bool all, const std::string& fixture_path) {
    if (!all && (table < 1 || table > 9)) throw InvalidArgument("--table must be in 1..9 (or use --all)");
    std::vector<FixtureRow> rows;
    try {
        for (auto& r : load_fixture(fixture_path))
            if (all || r.table == table) rows.push_back(std::move(r));
    } catch (const FixtureError& e) {
        std::cerr << "fixture: " << e.what() << "\n";
        return kFixtureMissing;
    }
    const AnalysisConfig acfg = cfg.analysis();
    std::vector<RowResult> results(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                results[i] = check_row(rows[i], acfg);
            } catch (const std::exception& e) {
                results[i].row = rows[i];
                results[i].status = "SOLVER-FAILURE";
                results[i].error = e.what();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(rows.size())));
    std::vector<std::future<void>> pool;
    for (int k = 0; k < jobs; ++k) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();

    std::string csv = std::string(kCsvHeader) + "\n";
    bool all_pass = true;
    for (const auto& r : results) {
        csv += csv_line(r) + "\n";
        all_pass = all_pass && r.pass;
    }
    if (cfg.format == OutputFormat::csv) {
        std::cout << csv;
    } else if (cfg.format == OutputFormat::json) {
        json arr = json::array();
        for (const auto& r : results)
            arr.push_back({{"table", r.row.table}, {"m", r.row.m}, {"c", r.row.c}, {"u", r.row.u_text},
                           {"M_computed", detail::num(r.m_computed)}, {"N_computed", detail::num(r.n_computed)},
                           {"M_expected", r.row.m_expected_text}, {"N_expected", r.row.n_expected_text},
                           {"exact", r.row.exact}, {"pass", r.pass}, {"status", r.status}, {"error", r.error}});
        std::cout << json{{"rows", arr}, {"all_pass", all_pass}, {"run_config", cfg.to_json()}}.dump(2) << "\n";
    } else {
        std::printf("%-5s %-3s %-3s %-12s %-22s %-22s %-22s %-22s %s\n", "table", "m", "c", "u", "M computed",
                    "N computed", "M expected", "N expected", "result");
        for (const auto& r : results) {
            std::printf("%-5d %-3d %-3d %-12s %-22s %-22s %-22s %-22s %s%s\n", r.row.table, r.row.m, r.row.c,
                        r.row.u_text.c_str(), format_double(r.m_computed).c_str(), format_double(r.n_computed).c_str(),
                        r.row.m_expected_text.c_str(), r.row.n_expected_text.c_str(), r.pass ? "PASS" : "FAIL",
                        r.row.exact ? " (exact)" : (r.row.flagged ? " (flagged)" : ""));
            if (!r.error.empty()) std::printf("      error: %s\n", r.error.c_str());
        }
        std::size_t passed = 0;
        for (const auto& r : results) passed += r.pass;
        std::printf("%zu/%zu rows pass\n", passed, results.size());
    }
    if (!cfg.out.empty()) write_text(cfg.out, csv);
    return all_pass ? kOk : kRowsFailed;
}

// ---------------------------------------------------------------- breakpoints

int cmd_breakpoints(const RunConfig& cfg, int m) {
    require_even_order(m);
    const AnalysisConfig a = cfg.analysis();
    const Breakpoint u0 = breakpoint_u0(m, a.eigen, a.psd_tol);
    const Breakpoint v0 = breakpoint_v0(m, a.eigen, a.psd_tol);
    if (cfg.format == OutputFormat::json) {
        emit(cfg, json{{"m", m}, {"u0", u0}, {"v0", v0}, {"run_config", cfg.to_json()}}.dump(2) + "\n");
    } else if (cfg.format == OutputFormat::csv) {
        std::string s = "kind,m,value,decimal,verified,lambda,lambda_residual\n";
        for (const auto* bp : {&u0, &v0}) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s,%d,%s,%.17g,%d,%.17g,%.17g\n", bp->kind == BreakpointKind::u0 ? "u0" : "v0",
                          m, bp->value.str().c_str(), bp->value.to_double(), bp->verified ? 1 : 0, bp->lambda,
                          bp->lambda_residual);
            s += buf;
        }
        emit(cfg, s);
    } else {
        std::ostringstream o;
        for (const auto* bp : {&u0, &v0}) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s = %s = %.15g  %s  lambda_min = %.3e  residual = %.3e\n",
                          bp->kind == BreakpointKind::u0 ? "u0" : "v0", bp->value.str().c_str(), bp->value.to_double(),
                          bp->verified ? "verified" : "NOT VERIFIED", bp->lambda, bp->lambda_residual);
            o << buf;
            if (!bp->note.empty()) o << "  note: " << bp->note << "\n";
        }
        emit(cfg, o.str());
    }
    return u0.verified && v0.verified ? kOk : kUnconfirmed;
}

// ---------------------------------------------------------------- certify

int cmd_certify(const RunConfig& cfg, int m, const std::string& us, const std::string& cs) {
    require_even_order(m);
    const AnalysisConfig a = cfg.analysis();
    const Rational u = parse_rational("u", us), c = parse_rational("c", cs);
    CertifyOptions opt;
    opt.mvalue = a.mvalue;
    opt.eigen = a.eigen;
    CertificateBundle b;
    try {
        b = certify_pns_free(m, u.to_double(), c.to_double(), opt);
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    }
    json j = b;
    j["run_config"] = cfg.to_json();
    if (cfg.out.empty() || cfg.format == OutputFormat::json) std::cout << j.dump(2) << "\n";
    if (!cfg.out.empty()) write_text(cfg.out, j.dump(2) + "\n");
    if (cfg.format == OutputFormat::pretty && !cfg.out.empty()) {
        std::printf("M = %.12f [%s]\n", b.critical_value, to_string(b.method).c_str());
        if (b.minimizer) std::printf("minimizer %s, f = %.3e\n", vec_str(b.minimizer->x).c_str(), b.minimizer_value);
        std::printf("%s\n", b.confirmed ? "CONFIRMED" : "UNCONFIRMED");
    }
    return b.confirmed ? kOk : kUnconfirmed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Positivity, SOS and boundary analysis for 3D strongly symmetric circulant tensors A(m,d,u,c)"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    auto* o_config = app.add_option("--config", g.config_path, "key = value config file")->check(CLI::ExistingFile);
    auto* o_seed = app.add_option("--seed", g.seed, "multistart seed");
    auto* o_jobs = app.add_option("--jobs", g.jobs, "parallel table rows")->check(CLI::PositiveNumber);
    auto* o_format = app.add_option("--format", g.format, "pretty, json or csv")->check(CLI::IsMember({"pretty", "json", "csv"}));
    auto* o_out = app.add_option("--out", g.out, "output path");
    app.add_option("--set", g.sets, "override a config key, key=value");
    (void)o_config;

    int m = 0, table = 0;
    double d = 0, ud = 0, cd = 0;
    std::string xs, us, cs, fixture = default_fixture_path();
    bool all = false;

    auto* eval = app.add_subcommand("eval", "evaluate f(x) and A x^{m-1}");
    eval->add_option("--m", m)->required();
    eval->add_option("--d", d)->required();
    eval->add_option("--u", ud)->required();
    eval->add_option("--c", cd)->required();
    eval->add_option("--x", xs, "x1,x2,x3")->required();

    auto* an = app.add_subcommand("analyze", "M_c(u), N_c(u) and certificates at one point");
    an->add_option("--m", m)->required();
    an->add_option("--u", us, "rational or decimal")->required();
    an->add_option("--c", cs, "rational or decimal")->required();

    auto* tb = app.add_subcommand("table", "recompute the reference tables");
    auto* o_table = tb->add_option("--table", table, "table number 1..9");
    auto* o_all = tb->add_flag("--all", all, "all tables");
    o_table->excludes(o_all);
    tb->add_option("--fixture", fixture, "reference CSV");

    auto* bp = app.add_subcommand("breakpoints", "u0 and v0 with PSD verification");
    bp->add_option("--m", m)->required();

    auto* ce = app.add_subcommand("certify", "critical value, Gram certificate and minimizer");
    ce->add_option("--m", m)->required();
    ce->add_option("--u", us)->required();
    ce->add_option("--c", cs)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    RunConfig cfg;
    try {
        if (!g.config_path.empty()) cfg.load_file(g.config_path);
        for (const auto& s : g.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw InvalidArgument("--set expects key=value");
            cfg.set(s.substr(0, eq), s.substr(eq + 1));
        }
        if (o_seed->count()) cfg.seed = g.seed;
        if (o_jobs->count()) cfg.jobs = g.jobs;
        if (o_format->count()) cfg.format = parse_format(g.format);
        if (o_out->count()) cfg.out = g.out;
        if (tb->parsed() && !o_table->count() && !all) throw InvalidArgument("table needs --table k or --all");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (eval->parsed()) return cmd_eval(cfg, m, d, ud, cd, xs);
        if (an->parsed()) return cmd_analyze(cfg, m, us, cs);
        if (tb->parsed()) return cmd_table(cfg, table, all, fixture);
        if (bp->parsed()) return cmd_breakpoints(cfg, m);
        if (ce->parsed()) return cmd_certify(cfg, m, us, cs);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverFailure;
    }
    return kUsage;
}
