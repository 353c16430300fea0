#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef EDPA_CLI_PATH
#define EDPA_CLI_PATH "edpa"
#endif

namespace {

int run(const std::string& args, std::string* stdout_text = nullptr) {
    std::string cmd = std::string(EDPA_CLI_PATH) + " " + args + " > /tmp/edpa_cli_out.txt 2>&1";
    int rc = std::system(cmd.c_str());
    if (stdout_text) {
        std::ifstream f("/tmp/edpa_cli_out.txt");
        std::ostringstream ss;
        ss << f.rdbuf();
        *stdout_text = ss.str();
    }
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("verify subcommand exit codes") {
    std::string out;
    CHECK(run("verify --suite theta --tol 1e-8 --seeds 10", &out) == 0);
    CHECK(out.find("\"pass\": true") != std::string::npos);
    CHECK(run("verify --suite lemmas --tol 1e-8 --seeds 5", &out) == 0);
    // unknown suite -> usage error
    CHECK(run("verify --suite bogus", &out) == 2);
    // impossible tolerance -> check failure, exit 1
    CHECK(run("verify --suite theta --tol 1e-30 --seeds 2", &out) == 1);
}

TEST_CASE("kernel subcommand emits agreeing rows") {
    std::string out;
    CHECK(run("kernel --N 3 --r 1 --tstar 4 --s 0.1 --x 0.5 --t 0.3 --y 2.0 --form both",
              &out) == 0);
    CHECK(out.find("s,x,t,y,re_k,im_k,form,budget") != std::string::npos);
    // parse the two re_k values and compare
    std::istringstream ss(out);
    std::string line;
    std::getline(ss, line);  // header
    double re[2] = {0, 0};
    int idx = 0;
    while (std::getline(ss, line) && idx < 2) {
        double s_, x_, t_, y_, rek, imk;
        char form[32];
        int parsed = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%31[^,]", &s_, &x_, &t_,
                                 &y_, &rek, &imk, form);
        REQUIRE(parsed == 7);
        re[idx++] = rek;
    }
    REQUIRE(idx == 2);
    CHECK(std::abs(re[0] - re[1]) < 1e-6);
}

TEST_CASE("density equilibrium is uniform N over 2 pi r") {
    std::string out;
    CHECK(run("density --family equilibrium --N 4 --r 1 --grid 8", &out) == 0);
    std::istringstream ss(out);
    std::string line;
    std::getline(ss, line);
    int rows = 0;
    while (std::getline(ss, line)) {
        double x, rho;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &x, &rho) == 2);
        CHECK(std::abs(rho - 4.0 / (2.0 * 3.14159265358979)) < 1e-12);
        ++rows;
    }
    CHECK(rows == 8);
}

TEST_CASE("simulate determinism across runs and worker counts") {
    std::string base =
        "simulate --model dyson --N 3 --dt 1e-4 --paths 100 --tend 0.5 --seed 7 --bins 16";
    setenv("EDPA_THREADS", "1", 1);
    CHECK(run(base + " --out /tmp/edpa_sim_a.csv") == 0);
    CHECK(run(base + " --out /tmp/edpa_sim_b.csv") == 0);
    setenv("EDPA_THREADS", "8", 1);
    CHECK(run(base + " --out /tmp/edpa_sim_c.csv") == 0);
    unsetenv("EDPA_THREADS");
    auto a = slurp("/tmp/edpa_sim_a.csv");
    CHECK(a == slurp("/tmp/edpa_sim_b.csv"));
    CHECK(a == slurp("/tmp/edpa_sim_c.csv"));
    CHECK(!a.empty());
    // manifest written alongside
    auto m = slurp("/tmp/edpa_sim_a.csv.manifest.json");
    CHECK(m.find("\"subcommand\": \"simulate\"") != std::string::npos);
    CHECK(m.find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("relax subcommand reports decreasing distance") {
    std::string out;
    CHECK(run("relax --N 4 --r 1 --T 1 5 20", &out) == 0);
    std::istringstream ss(out);
    std::string line;
    std::getline(ss, line);
    double prev = 1e18;
    int rows = 0;
    while (std::getline(ss, line)) {
        double T, d;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &T, &d) == 2);
        CHECK(d < prev);
        prev = d;
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(prev < 1e-6);
}

TEST_CASE("dmr and eval subcommands run") {
    std::string out;
    CHECK(run("dmr --observable one --N 3 --r 1 --tstar 4 --T 0.4 --paths 500 --seed 3", &out) ==
          0);
    CHECK(out.find("observable,estimate,stderr,paths") != std::string::npos);
    CHECK(run("eval --what single --r 1 --tstar 4 --s 0.1 --t 0.8 --x 2.0 --y 3.0", &out) == 0);
    CHECK(out.find("\"value\"") != std::string::npos);
    CHECK(run("eval --what qkm --N 3 --r 1 --tstar 4 --t 0.1 --y 0.3 2.0 4.2", &out) == 0);
    CHECK(out.find("closed_form") != std::string::npos);
    // valid tpd evaluation from the equidistant start
    CHECK(run("eval --what tpd --N 3 --r 1 --tstar 4 --s 0 --t 0.3 "
              "--x 0 2.0943951023931953 4.1887902047863905 --y 0.4 2.2 4.3",
              &out) == 0);
    CHECK(out.find("\"value\"") != std::string::npos);
    // error surfaces as exit 1 with a structured message
    CHECK(run("eval --what tpd --N 3 --r 1 --tstar 4 --s 0.5 --t 0.2 --x 0.3 2.0 4.2 "
              "--y 0.4 2.1 4.3",
              &out) == 1);
    CHECK(out.find("error") != std::string::npos);
}
