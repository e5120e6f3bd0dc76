#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct Invocation {
    int code = -1;
    std::string out;
};

/// Runs the CLI with stderr folded into stdout.
Invocation run(const std::string& args) {
    const std::string cmd = std::string(SSCIRC_CLI_PATH) + " " + args + " 2>&1";
    Invocation r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

bool has(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

TEST(Cli, Eval) {
    const Invocation r = run("eval --m 6 --d 0 --u 1 --c 0 --x 1,1,1");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(has(r.out, "f(x) = 186")) << r.out;
    const Invocation csv = run("eval --m 6 --d 1 --u 0 --c 0 --x 2,0,0 --format csv");
    EXPECT_EQ(csv.code, 0);
    EXPECT_TRUE(has(csv.out, "6,1,0,0,2,0,0,64,32,0,0")) << csv.out;
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("analyze --m 6").code, 2);
    EXPECT_EQ(run("analyze --m 7 --u 1 --c 0").code, 2);
    EXPECT_EQ(run("analyze --m 6 --u abc --c 0").code, 2);
    EXPECT_EQ(run("table").code, 2);
    EXPECT_EQ(run("table --table 12").code, 2);
    EXPECT_EQ(run("--set nosuchkey=1 breakpoints --m 6").code, 2);
    EXPECT_EQ(run("--format xml breakpoints --m 6").code, 2);
}

TEST(Cli, AnalyzeConfirmed) {
    const Invocation r = run("analyze --m 6 --u 2 --c -1");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(has(r.out, "CONFIRMED")) << r.out;
    EXPECT_TRUE(has(r.out, "linear-segment")) << r.out;
    const Invocation j = run("analyze --m 6 --u 1 --c 0 --format json");
    EXPECT_EQ(j.code, 0) << j.out;
    EXPECT_TRUE(has(j.out, "\"status\": \"CONFIRMED\"")) << j.out;
}

TEST(Cli, Breakpoints) {
    const Invocation r = run("breakpoints --m 6");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(has(r.out, "45/16")) << r.out;
    EXPECT_TRUE(has(r.out, "-70/11")) << r.out;
}

TEST(Cli, CertifyWritesJson) {
    const auto path = std::filesystem::temp_directory_path() / "sscirc_cli_certify.json";
    std::filesystem::remove(path);
    const Invocation r = run("certify --m 6 --u -1 --c -1 --out " + path.string());
    EXPECT_EQ(r.code, 0) << r.out;
    std::ifstream f(path);
    const std::string text((std::istreambuf_iterator<char>(f)), {});
    EXPECT_TRUE(has(text, "\"status\": \"CONFIRMED\"")) << text;
    std::filesystem::remove(path);
}

TEST(Cli, TableCsvAndMissingFixture) {
    const auto path = std::filesystem::temp_directory_path() / "sscirc_cli_table.csv";
    std::filesystem::remove(path);
    const Invocation r = run("table --table 2 --format csv --out " + path.string());
    EXPECT_EQ(r.code, 0) << r.out;
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    EXPECT_EQ(header, "table,m,c,u,M_computed,N_computed,M_expected,N_expected,pass");
    int rows = 0;
    for (std::string line; std::getline(f, line);) {
        ++rows;
        EXPECT_EQ(line.back(), '1') << line;
    }
    EXPECT_EQ(rows, 7);
    std::filesystem::remove(path);

    EXPECT_EQ(run("table --table 1 --fixture /nonexistent.csv").code, 5);
}

}  // namespace
