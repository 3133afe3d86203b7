#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SPILLOVER_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("spillover_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& stdout_file = "") {
    std::string cmd = kCli + " " + args;
    if (!stdout_file.empty()) cmd += " > " + stdout_file;
    cmd += " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

const char* kExclusionConfig = "r0_a = 3\nr0_b = 1.3\ntau_i = 7\ntau_r = 100\n"
                               "tau_p = 30\nk = 100\ns = 1\n";

} // namespace

TEST_CASE("threshold subcommand prints the closed-form value") {
    TempDir tmp;
    const auto out = tmp.file("threshold.txt");
    REQUIRE(run("threshold --r0a 3 --r0b 1.2", out) == 0);
    CHECK(std::stod(slurp(out)) == Catch::Approx(0.25).margin(1e-12));

    SECTION("out-of-domain input is a usage error") {
        CHECK(run("threshold --r0a 1.2 --r0b 3") == 2);
    }
    SECTION("curve mode writes a CSV") {
        const auto csv = tmp.file("curve.csv");
        REQUIRE(run("threshold --r0a 3 --r0b-min 1.2 --r0b-max 2 --n 3 --out " + csv) == 0);
        const auto text = slurp(csv);
        CHECK(text.find("r0_b,s_threshold\n") == 0);
        std::istringstream lines(text);
        std::string line;
        std::getline(lines, line); // header
        std::getline(lines, line); // first point: r0_b = 1.2
        CHECK(std::stod(line.substr(line.find(',') + 1)) == Catch::Approx(0.25).margin(1e-12));
    }
}

TEST_CASE("simulate subcommand") {
    TempDir tmp;
    const auto conf = tmp.file("model.conf");
    write_file(conf, kExclusionConfig);
    const auto csv = tmp.file("traj.csv");
    const auto summary = tmp.file("summary.json");

    SECTION("exclusion regime summary") {
        REQUIRE(run("simulate " + conf + " --t-end 365 --samples 366 --out " + csv, summary) ==
                0);
        const auto j = nlohmann::json::parse(slurp(summary));
        CHECK(j.at("final_I_B").get<double>() < 1e-4);
        CHECK(j.at("final_I_A").get<double>() > 1e-3);
        const auto text = slurp(csv);
        CHECK(text.find("t,S_A,I_A,R_A,It_A,S_B,I_B,R_B,It_B,beta_A,beta_B,Re_A,Re_B\n") == 0);
    }
    SECTION("missing config file: exit 2, no output written") {
        CHECK(run("simulate " + tmp.file("nope.conf") + " --out " + csv) == 2);
        CHECK_FALSE(fs::exists(csv));
    }
    SECTION("zero samples: exit 2") {
        CHECK(run("simulate " + conf + " --samples 0 --out " + csv) == 2);
        CHECK_FALSE(fs::exists(csv));
    }
    SECTION("bad config value: exit 2") {
        const auto bad = tmp.file("bad.conf");
        write_file(bad, "s = 3\n");
        CHECK(run("simulate " + bad + " --out " + csv) == 2);
        CHECK_FALSE(fs::exists(csv));
    }
}

TEST_CASE("equilibria subcommand") {
    TempDir tmp;
    const auto conf = tmp.file("model.conf");
    write_file(conf, kExclusionConfig);
    const auto out = tmp.file("eq.json");
    REQUIRE(run("equilibria " + conf + " --out " + out) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    REQUIRE(j.size() == 4);
    CHECK(j[1].at("kind") == "boundary_a");
    CHECK(j[1].at("stability").at("stable") == "stable");
    CHECK(j[3].at("exists") == false); // endemic absent in the exclusion regime
}

TEST_CASE("sweep subcommand is deterministic across job counts") {
    TempDir tmp;
    const auto conf = tmp.file("model.conf");
    write_file(conf, "r0_a = 3\n");
    const auto out1 = tmp.file("grid1.csv"), out2 = tmp.file("grid2.csv");
    REQUIRE(run("sweep " + conf + " --grid 5x5 --jobs 1 --out " + out1) == 0);
    REQUIRE(run("sweep " + conf + " --grid 5x5 --jobs 4 --out " + out2) == 0);
    const auto a = slurp(out1), b = slurp(out2);
    REQUIRE(!a.empty());
    CHECK(a == b);
    CHECK(a.find("s,r0_b,persists_b,dominance_pct_b,analytic_coexist,margin\n") == 0);

    SECTION("malformed grid spec") {
        CHECK(run("sweep " + conf + " --grid five --out " + out1) == 2);
    }
}

TEST_CASE("identify subcommand is deterministic for a fixed seed") {
    TempDir tmp;
    const auto conf = tmp.file("ident.conf");
    write_file(conf, "r0_a = 3\nr0_b = 2\ns = 0\n"
                     "noise_levels = 0, 0.05\n"
                     "n_datasets = 2\n"
                     "sample_step = 20\nsample_end = 360\n"
                     "fit_params = beta_a, beta_b, tau_p\n");
    const auto csv1 = tmp.file("are1.csv"), csv2 = tmp.file("are2.csv");
    const auto json1 = tmp.file("sum1.json"), json2 = tmp.file("sum2.json");

    REQUIRE(run("identify " + conf + " --seed 7 --jobs 2 --out-csv " + csv1 + " --out-json " +
                json1) == 0);
    REQUIRE(run("identify " + conf + " --seed 7 --jobs 1 --out-csv " + csv2 + " --out-json " +
                json2) == 0);
    const auto a = slurp(csv1), b = slurp(csv2);
    REQUIRE(!a.empty());
    CHECK(a == b);
    CHECK(slurp(json1) == slurp(json2));
    CHECK(a.find("parameter,sigma,ARE\n") == 0);

    const auto j = nlohmann::json::parse(slurp(json1));
    CHECK(j.at("classification").contains("beta_a"));
    CHECK(j.at("aggregate_failure") == false);

    SECTION("unknown config knob: exit 2") {
        const auto bad = tmp.file("bad.conf");
        write_file(bad, "noise = 1\n");
        CHECK(run("identify " + bad + " --out-csv " + csv1) == 2);
    }
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("") == 2);                // no subcommand
    CHECK(run("frobnicate") == 2);      // unknown subcommand
    CHECK(run("simulate") == 2);        // missing required arguments
    CHECK(run("threshold") == 2);       // missing --r0a
}
