// Drives the installed binary end to end: exit codes, output schemas,
// determinism of emitted files.

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string tmp = std::string(CMX_CLI_PATH) + ".out.txt";
    const std::string cmd = std::string(CMX_CLI_PATH) + " " + args + " > " + tmp + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    std::ifstream in(tmp);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("help lists subcommands and fails cleanly on bad flags") {
    RunResult help = run("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("xi") != std::string::npos);
    CHECK(help.output.find("exponent") != std::string::npos);
    CHECK(help.output.find("simulate") != std::string::npos);
    CHECK(help.output.find("oracle") != std::string::npos);

    RunResult xh = run("xi --help");
    for (const char* flag : {"--rate", "--theta-lo", "--theta-hi", "--theta-step", "--delta", "--mode",
                             "--out", "--format", "--denom-floor", "--threads"})
        CHECK(xh.output.find(flag) != std::string::npos);

    CHECK(run("xi --no-such-flag").exit_code == 2);
    CHECK(run("bogus-subcommand").exit_code == 2);
}

TEST_CASE("xi requires a rate and rejects unknown modes") {
    RunResult missing = run("xi --channel bsc --theta-lo 0.05 --theta-hi 0.2 --theta-step 0.05");
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("--rate") != std::string::npos);
    CHECK(run("xi --rate 0.1 --mode wat").exit_code == 2);
}

TEST_CASE("xi bsc-closed reproduces the unit fraction") {
    const std::string out = std::string(CMX_CLI_PATH) + ".xi.json";
    RunResult r = run("xi --channel bsc --theta-lo 0.05 --theta-hi 0.30 --theta-step 0.05 "
                      "--rate 0.1 --delta uniform --mode bsc-closed --rho-points 150 --refine 2 --out " + out);
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(slurp(out));
    CHECK(doc.at("schema") == "cmx.xi_result/1");
    CHECK(doc.at("config").at("rate_nats").get<double>() == doctest::Approx(0.1));
    const double xi = doc.at("result").at("xi").get<double>();
    CHECK(xi == doctest::Approx(1.0).epsilon(0.01));
    CHECK(doc.at("result").at("witness").contains("theta"));
}

TEST_CASE("xi exits 3 when the whole family is above capacity") {
    RunResult r = run("xi --channel bsc --theta-lo 0.40 --theta-hi 0.45 --theta-step 0.05 "
                      "--rate 0.5 --mode bsc-closed");
    CHECK(r.exit_code == 3);
}

TEST_CASE("xi rejects exact mode on large alphabets") {
    const std::string grid = std::string(CMX_CLI_PATH) + ".family.json";
    {
        std::ofstream f(grid);
        f << R"({"grid":[{"label":"five","channel":{"x_size":5,"y_size":5,"rows":[)";
        for (int r = 0; r < 5; ++r) {
            f << "[0.2,0.2,0.2,0.2,0.2]" << (r < 4 ? "," : "");
        }
        f << "]}}]}";
    }
    RunResult r = run("xi --channel file:" + grid + " --rate 0.1 --mode exact");
    CHECK(r.exit_code == 2);
}

TEST_CASE("exponent emits the maximizing rho") {
    RunResult r = run("exponent --theta 0.1 --rate 0.1");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.output);
    CHECK(doc.at("result").at("value").get<double>() == doctest::Approx(0.1231435513).epsilon(1e-8));
    CHECK(doc.at("result").at("rho_hat").get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    RunResult cap = run("exponent --theta 0.11 --quantity capacity");
    const auto capdoc = nlohmann::json::parse(cap.output);
    CHECK(capdoc.at("result").at("value").get<double>() == doctest::Approx(0.3466318436).epsilon(1e-6));
}

TEST_CASE("simulate requires a seed and produces byte-identical reruns") {
    CHECK(run("simulate conv --b 1 --n 2 --K 3 --L 16 --theta 0.02 --trials 50").exit_code == 2);

    const std::string out1 = std::string(CMX_CLI_PATH) + ".sim1.json";
    const std::string out2 = std::string(CMX_CLI_PATH) + ".sim2.json";
    const std::string flags = "simulate conv --b 1 --n 2 --K 3 --L 16 --theta 0.02 "
                              "--decoder two-trellis --trials 400 --seed 7 --out ";
    REQUIRE(run(flags + out1).exit_code == 0);
    REQUIRE(run(flags + out2).exit_code == 0);
    CHECK(slurp(out1) == slurp(out2));
    const auto doc = nlohmann::json::parse(slurp(out1));
    CHECK(doc.at("schema") == "cmx.sim_report/1");
    CHECK(doc.at("config").at("seed") == 7);
    CHECK(doc.at("result").at("info_bits") == 400 * 16);
}

TEST_CASE("simulate block and ratio run end to end") {
    RunResult r = run("simulate block --ensemble iid --M 4 --N 24 --theta 0.05 --decoder rho "
                      "--trials 2000 --seed 3");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.output);
    CHECK(doc.at("result").at("trials") == 2000);

    const std::string out = std::string(CMX_CLI_PATH) + ".ratio.csv";
    RunResult rt = run("simulate ratio --M 4 --N 24 --decoder rho --xi 1.0 --trials 500 --seed 5 "
                       "--theta-lo 0.05 --theta-hi 0.15 --theta-step 0.05 --format csv --out " + out);
    REQUIRE(rt.exit_code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("theta,N,trials,errors,p_hat,ci_lo,ci_hi,ratio\n", 0) == 0);
    int lines = 0;
    for (char c : csv) lines += c == '\n' ? 1 : 0;
    CHECK(lines == 4); // header + 3 thetas
}

TEST_CASE("oracle subcommands enforce capacity limits") {
    RunResult r = run("oracle moment --N 12 --theta 0.1 --alpha 1.0 --dist typeclass");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.output);
    CHECK(doc.at("result").at("gap").get<double>() == doctest::Approx(0.0514).epsilon(0.02));

    CHECK(run("oracle moment --N 25 --theta 0.1").exit_code == 4);
    CHECK(run("oracle exact-error --N 16 --K 2 --theta 0.1").exit_code == 4);

    RunResult e = run("oracle exact-error --N 6 --K 2 --theta 0.1 --decoder minimax --seed 11");
    REQUIRE(e.exit_code == 0);
    const auto edoc = nlohmann::json::parse(e.output);
    CHECK(edoc.at("result").at("spread").get<double>() <= 1e-12);
}
