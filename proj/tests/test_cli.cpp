// End-to-end tests of the phaselab binary.  The test runner passes the
// binary path in PHASELAB_BIN (set by CMake).

#include "catch2/catch_amalgamated.hpp"
#include "json.hpp"

#include "phaselab/diffraction.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class CliFixture {
  public:
    CliFixture() {
        const char* bin = std::getenv("PHASELAB_BIN");
        REQUIRE(bin != nullptr);
        bin_ = bin;
        dir_ = fs::temp_directory_path() / ("phaselab_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    ~CliFixture() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    RunResult run(const std::string& args) const {
        const fs::path outfile = dir_ / "stdout.txt";
        const fs::path errfile = dir_ / "stderr.txt";
        const std::string cmd = bin_ + " " + args + " > " + outfile.string() + " 2> " + errfile.string();
        const int rc = std::system(cmd.c_str());
        RunResult r;
        r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        r.out = slurp(outfile);
        r.err = slurp(errfile);
        return r;
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

  private:
    std::string bin_;
    fs::path dir_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE_METHOD(CliFixture, "redundancy command") {
    SECTION("exact values for p = (1/3, 2/3)") {
        const auto r = run("redundancy --probs 1/3,2/3 --n-start 1 --n-end 3 --method exact");
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(r.out);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0] == std::vector<std::string>{"n", "R_n", "flags"});
        CHECK(rows[1][0] == "1");
        CHECK_THAT(std::stod(rows[1][1]), Catch::Matchers::WithinAbs(0.4150375, 1e-7));
        CHECK_THAT(std::stod(rows[2][1]), Catch::Matchers::WithinAbs(0.8300750, 1e-7));
        CHECK_THAT(std::stod(rows[3][1]), Catch::Matchers::WithinAbs(0.2451125, 1e-7));
    }
    SECTION("dyadic source: all zeros") {
        const auto r = run("redundancy --probs 1/2,1/2 --n-start 1 --n-end 4 --method exact");
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(r.out);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(std::stod(rows[i][1]) == 0.0);
        }
    }
    SECTION("probabilities must sum to 1: exit 2") {
        const auto r = run("redundancy --probs 0.3 --n-start 1 --n-end 1");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("sum to 1") != std::string::npos);
    }
    SECTION("resource limit: exit 3") {
        const auto r = run("redundancy --probs 0.2,0.3,0.5 --n-start 100000 --n-end 100000 --method exact");
        CHECK(r.exit_code == 3);
    }
    SECTION("json format embeds a manifest and is reproducible modulo wall time") {
        const std::string args = "redundancy --probs 1/3,2/3 --n-start 1 --n-end 5 --format json --out " +
                                 path("a.json").string();
        REQUIRE(run(args).exit_code == 0);
        auto a = json::parse(slurp(path("a.json")));
        REQUIRE(run(args).exit_code == 0);
        auto b = json::parse(slurp(path("a.json")));
        REQUIRE(a.contains("manifest"));
        CHECK(a["manifest"].contains("wall_time_seconds"));
        CHECK(a["manifest"]["version"] == "phaselab 0.1.0");
        a["manifest"].erase("wall_time_seconds");
        b["manifest"].erase("wall_time_seconds");
        CHECK(a.dump() == b.dump());
    }
}

TEST_CASE_METHOD(CliFixture, "diffraction command") {
    SECTION("exact intensity at the Bragg point") {
        const auto r = run("diffraction --distances 1,2 --probs 0.5,0.5 --n 16 --method exact "
                           "--q-min 6.283185307179586 --q-max 6.283185307179586 --q-steps 1");
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(r.out);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == std::vector<std::string>{"q", "intensity", "near_coherent"});
        CHECK(std::stod(rows[1][1]) == 256.0);
        CHECK(rows[1][2] == "1");
    }
    SECTION("q = pi is far from coherence and matches the limit form") {
        const auto r = run("diffraction --distances 1,2 --probs 0.5,0.5 --n 64 --method exact "
                           "--q-min 3.141592653589793 --q-max 3.141592653589793 --q-steps 1");
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(r.out);
        CHECK(rows[1][2] == "0");
        // C(pi) = 0, so I/n should be near 1
        CHECK_THAT(std::stod(rows[1][1]) / 64.0, Catch::Matchers::WithinAbs(1.0, 0.05));
    }
    SECTION("mc with zero samples: exit 2") {
        const auto r = run("diffraction --distances 1,2 --probs 0.5,0.5 --n 16 --method mc --samples 0");
        CHECK(r.exit_code == 2);
    }
    SECTION("asymptotic near-coherent cells are empty, flagged, not an error") {
        const auto r = run("diffraction --distances 1,2 --probs 0.5,0.5 --method asymptotic "
                           "--q-min 0 --q-max 3.141592653589793 --q-steps 2");
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(r.out);
        REQUIRE(rows.size() == 3);
        CHECK(rows[1][1].empty());   // q = 0 diverges
        CHECK(rows[1][2] == "1");
        CHECK_FALSE(rows[2][1].empty());
        CHECK(rows[2][2] == "0");
    }
    SECTION("identical invocations produce byte-identical data files") {
        const std::string args =
            "diffraction --distances 1,1.4142135623730951 --probs 0.5,0.5 --n 32 --method mc "
            "--samples 200 --seed 7 --q-min 0 --q-max 12 --q-steps 20 --out ";
        REQUIRE(run(args + path("m1.csv").string()).exit_code == 0);
        REQUIRE(run(args + path("m2.csv").string()).exit_code == 0);
        const std::string f1 = slurp(path("m1.csv"));
        const std::string f2 = slurp(path("m2.csv"));
        CHECK(!f1.empty());
        CHECK(f1 == f2);
        // a manifest sidecar sits next to the data file
        CHECK(fs::exists(path("m1.csv.manifest.json")));
        const auto manifest = json::parse(slurp(path("m1.csv.manifest.json")));
        CHECK(manifest["seed"] == 7);
    }
    SECTION("json output masks divergent asymptotic cells with null") {
        const auto r = run("diffraction --distances 1,2 --probs 0.5,0.5 --method asymptotic "
                           "--q-min 0 --q-max 3.141592653589793 --q-steps 2 --format json");
        REQUIRE(r.exit_code == 0);
        const auto doc = json::parse(r.out);
        REQUIRE(doc["results"]["intensity"].size() == 2);
        CHECK(doc["results"]["intensity"][0].is_null());
        CHECK_THAT(doc["results"]["intensity"][1].get<double>(),
                   Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK(doc["results"]["near_coherent"][0] == true);
    }
    SECTION("csv values round-trip against the library") {
        const auto r = run("diffraction --distances 1,1.4142135623730951 --probs 0.5,0.5 --n 16 "
                           "--method exact --q-min 0.5 --q-max 9.5 --q-steps 10");
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(r.out);
        const phaselab::HTMedium medium({1.0, 1.4142135623730951},
                                        phaselab::ProbabilityVector({0.5, 0.5}));
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double q = std::stod(rows[i][0]);
            const double I = std::stod(rows[i][1]);
            REQUIRE(std::abs(I - phaselab::exact_intensity(medium, 16, q)) <= 1e-12);
        }
    }
}

TEST_CASE_METHOD(CliFixture, "report commands") {
    SECTION("commensurability") {
        const auto r = run("commensurability --values 3/4,1/2");
        REQUIRE(r.exit_code == 0);
        const auto doc = json::parse(r.out);
        CHECK(doc["results"]["classification"] == "Rational");
        CHECK(doc["results"]["m0"] == 4);
        CHECK(doc["parameters"]["qmax"] == 1000000);
        // stable top-level key order
        const auto i = r.out.find("\"input\"");
        const auto p = r.out.find("\"parameters\"");
        const auto s = r.out.find("\"results\"");
        const auto m = r.out.find("\"manifest\"");
        CHECK(i < p);
        CHECK(p < s);
        CHECK(s < m);
    }
    SECTION("commensurability of an irrational value") {
        const auto r = run("commensurability --values 1.4142135623730951");
        REQUIRE(r.exit_code == 0);
        const auto doc = json::parse(r.out);
        CHECK(doc["results"]["classification"] == "IrrationalAtTolerance");
        CHECK(doc["results"]["m0"].is_null());
    }
    SECTION("bragg") {
        const auto r = run("bragg --distances 2,3 --probs 0.3,0.7 --peaks 3");
        REQUIRE(r.exit_code == 0);
        const auto doc = json::parse(r.out);
        CHECK(doc["results"]["commensurate"] == true);
        CHECK(doc["results"]["m0"] == 2);
        CHECK_THAT(doc["results"]["lambda0"].get<double>(), Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK(doc["results"]["peak_wavenumbers"].size() == 3);
    }
    SECTION("duality") {
        const auto r = run("duality --probs 1/3,2/3");
        REQUIRE(r.exit_code == 0);
        const auto doc = json::parse(r.out);
        CHECK(doc["results"]["matched"] == true);
        const double omega0 = doc["results"]["source"]["omega0"].get<double>();
        const double q0 = doc["results"]["medium"]["q0"].get<double>();
        CHECK(std::abs(omega0 - q0) <= 1e-9);
    }
    SECTION("markov") {
        {
            std::ofstream f(path("uniform2.json"));
            f << R"({"states": 2, "rows": [[0.5, 0.5], [0.5, 0.5]]})";
        }
        const auto r = run("markov --matrix " + path("uniform2.json").string() + " --m-max 3");
        REQUIRE(r.exit_code == 0);
        const auto doc = json::parse(r.out);
        CHECK(doc["results"]["classification"] == "Oscillatory");
        CHECK(doc["results"]["flagged_m"] == json::array({1, 2, 3}));
        CHECK(doc["results"]["rho"].size() == 3);
    }
    SECTION("markov medium mode requires distances") {
        {
            std::ofstream f(path("nodist.json"));
            f << R"({"states": 2, "rows": [[0.5, 0.5], [0.5, 0.5]]})";
        }
        const auto r = run("markov --matrix " + path("nodist.json").string() + " --mode medium");
        CHECK(r.exit_code == 2);
    }
    SECTION("unknown subcommand / missing flags exit 2") {
        CHECK(run("frobnicate").exit_code == 2);
        CHECK(run("redundancy").exit_code == 2);
    }
    SECTION("numeric failure exits 4") {
        // lcm of the two exact denominators overflows 2^63-1
        const auto r = run("commensurability --values 1/4294967311,1/4294967357");
        CHECK(r.exit_code == 4);
        CHECK(r.err.find("numeric failure") != std::string::npos);
    }
}
