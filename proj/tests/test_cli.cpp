#include "nyqtune/cli.hpp"
#include "nyqtune/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace nyqtune;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "nyqtune_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> output_bytes(const json& manifest) {
    std::map<std::string, std::string> m;
    for (const auto& o : manifest.at("outputs")) m[o.at("path")] = slurp(o.at("path").get<std::string>());
    return m;
}

// every output exists and parses in its declared format
void check_outputs(const json& manifest) {
    REQUIRE_FALSE(manifest.at("outputs").empty());
    for (const auto& o : manifest.at("outputs")) {
        const fs::path p = o.at("path").get<std::string>();
        REQUIRE(fs::exists(p));
        if (o.at("format") == "csv") {
            auto t = io::read_csv(p);
            CHECK_FALSE(t.header.empty());
            for (const auto& row : t.rows) CHECK(row.size() == t.header.size());
        } else {
            CHECK_NOTHROW(io::read_json(p));
        }
    }
}

// re-running the recorded argv reproduces every output byte for byte
void check_replay(const json& manifest) {
    const auto before = output_bytes(manifest);
    for (const auto& [path, _] : before) fs::remove(path);
    auto again = run(manifest.at("argv").get<std::vector<std::string>>());
    REQUIRE(again.code == 0);
    CHECK(output_bytes(manifest) == before);
}

const char* kSmallPipeline = R"({"reduction_ga": {"population": 30, "generations": 40},
  "tuning_ga": {"population": 10, "generations": 5}, "gp": {"population": 60, "generations": 10}})";

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run({"--version"}).code == 0);
    CHECK(run({"--help"}).code == 0);
    auto none = run({});
    CHECK(none.code == 2);
    auto unknown = run({"frobnicate"});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(run({"bench", "list", "--bogus"}).code == 2);
    CHECK(run({"reduce", "--bench", "P9:1", "--seed", "1"}).code == 2);
    CHECK(run({"bench", "show", "--bench", "P1:3.5"}).code == 1);
    // randomized commands need a seed
    unsetenv("NYQTUNE_SEED");
    auto seedless = run({"reduce", "--bench", "P1:3", "--out", fresh_dir("seedless").string()});
    CHECK(seedless.code == 2);
    CHECK(seedless.err.find("seed") != std::string::npos);
}

TEST_CASE("bench") {
    auto r = run({"bench", "list"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "class,parameter");
    int n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 38);

    auto j = run({"bench", "list", "--json"});
    CHECK(json::parse(j.out).size() == 38);

    auto show = run({"bench", "show", "--bench", "P2:0.5"});
    REQUIRE(show.code == 0);
    auto s = json::parse(show.out);
    CHECK(s["stable"] == true);
    CHECK(s["published"]["J_min"] == 0.173435);
}

TEST_CASE("reduce writes results and replays bitwise") {
    const auto dir = fresh_dir("reduce");
    auto r = run({"reduce", "--bench", "P1:3", "--template", "soptd", "--objective", "nyquist", "--seed", "7",
                  "--population", "30", "--generations", "40", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto result = io::read_json(dir / "reduce_P1_3_soptd_nyquist.json");
    CHECK(result == json::parse(r.out));
    CHECK(result["seed"] == 7);
    CHECK(result["model"]["kind"] == "SOPTD");
    auto csv = io::read_csv(dir / "reduce_P1_3_soptd_nyquist_nyquist.csv");
    CHECK(csv.rows.size() == 500);

    auto manifest = io::read_json(dir / "reduce_P1_3_soptd_nyquist.manifest.json");
    CHECK(manifest["command"] == "reduce");
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["version"] == cli::kVersion);
    check_outputs(manifest);
    check_replay(manifest);

    SUBCASE("seed from the environment") {
        const auto env_dir = fresh_dir("reduce_env");
        setenv("NYQTUNE_SEED", "7", 1);
        auto e = run({"reduce", "--bench", "P1:3", "--population", "30", "--generations", "40", "--out",
                      env_dir.string()});
        unsetenv("NYQTUNE_SEED");
        REQUIRE(e.code == 0);
        CHECK(json::parse(e.out) == result);
    }
}

TEST_CASE("tune") {
    const auto dir = fresh_dir("tune");
    auto r = run({"tune", "--bench", "P1:3", "--kind", "pid", "--seed", "3", "--population", "10",
                  "--generations", "5", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto manifest = io::read_json(dir / "tune_P1_3_pid.manifest.json");
    check_outputs(manifest);
    check_replay(manifest);
    auto traj = io::read_csv(dir / "tune_P1_3_pid_trajectory.csv");
    CHECK(traj.header == std::vector<std::string>{"t", "y", "u", "e"});
}

TEST_CASE("rules eval") {
    auto f = run({"rules", "eval", "--kind", "fopid", "--tau-max", "1.335035", "--tau-min", "1.296596", "--L",
                  "0.458524"});
    REQUIRE(f.code == 0);
    auto j = json::parse(f.out);
    for (const char* k : {"Kp", "Ki", "Kd", "lambda", "mu"}) CHECK(j.contains(k));
    CHECK(j["Kp"].get<double>() == doctest::Approx(0.94431213177082732).epsilon(1e-12));
    CHECK(j["mu"].get<double>() == doctest::Approx(0.33814820874680494).epsilon(1e-12));

    auto p = run({"rules", "eval", "--kind", "pid", "--tau-max", "1.335035", "--tau-min", "1.296596", "--L",
                  "0.458524"});
    REQUIRE(p.code == 0);
    auto jp = json::parse(p.out);
    CHECK_FALSE(jp.contains("lambda"));
    CHECK(jp["Kd"].get<double>() == doctest::Approx(1.4679451341450781).epsilon(1e-12));
    CHECK(run({"rules", "eval", "--kind", "pid", "--tau-max", "1"}).code == 2);
}

TEST_CASE("rules compare") {
    const auto dir = fresh_dir("compare");
    auto r = run({"rules", "compare", "--bench", "P1:5", "--kind", "pid", "--model", "published", "--seed", "2",
                  "--population", "10", "--generations", "5", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto csv = io::read_csv(dir / "compare_P1_5_pid.csv");
    CHECK(csv.header == std::vector<std::string>{"t", "y_GA", "y_rule", "u_GA", "u_rule"});
    auto manifest = io::read_json(dir / "compare_P1_5_pid.manifest.json");
    check_outputs(manifest);
    check_replay(manifest);
}

TEST_CASE("gp run") {
    const auto dir = fresh_dir("gp");
    io::CsvTable t{{"a", "b", "y"}, {}};
    for (int i = 0; i < 30; ++i) {
        const double a = 0.1 * i, b = 2.0 - 0.07 * i * i / 10.0;
        t.rows.push_back({io::num(a), io::num(b), io::num(a * b + 1.0)});
    }
    io::write_csv(dir / "data.csv", t);
    auto r = run({"gp", "run", "--data", (dir / "data.csv").string(), "--target", "y", "--seed", "5",
                  "--population", "80", "--generations", "15", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto manifest = io::read_json(dir / "gp_y.manifest.json");
    check_outputs(manifest);
    check_replay(manifest);
    auto archive = io::read_json(dir / "gp_y_archive.json");
    REQUIRE(archive.is_array());
    for (const auto& p : archive) {
        CHECK(p.contains("expression_string"));
        CHECK(p.contains("weights"));
    }
    auto pareto = io::read_csv(dir / "gp_y_pareto.csv");
    CHECK(pareto.header == std::vector<std::string>{"fitness", "complexity", "is_front"});
    CHECK(run({"gp", "run", "--data", (dir / "data.csv").string(), "--target", "nope", "--seed", "5"}).code == 2);
}

TEST_CASE("pipeline full") {
    const auto base = fresh_dir("pipeline");
    {
        std::ofstream cfg(base / "small.json");
        cfg << kSmallPipeline;
    }
    const std::vector<std::string> plants{"--plants", "P1:3,P1:5,P2:0.5,P3:0.5,P4:0.5,P3:10"};
    auto args = [&](const std::string& out) {
        std::vector<std::string> a{"pipeline", "full", "--seed", "3", "--config", (base / "small.json").string(),
                                   "--out", (base / out).string()};
        a.insert(a.end(), plants.begin(), plants.end());
        return a;
    };
    auto a = run(args("a"));
    REQUIRE(a.code == 0);
    auto b = run(args("b"));
    REQUIRE(b.code == 0);

    auto summary = io::read_json(base / "a" / "summary.json");
    CHECK(summary == io::read_json(base / "b" / "summary.json"));
    CHECK(slurp(base / "a" / "summary.json") == slurp(base / "b" / "summary.json"));
    CHECK(summary["representative"].size() == 4);
    CHECK(summary["plants_total"] == 6);

    auto table = io::read_csv(base / "a" / "table1_analogue.csv");
    CHECK(table.header == std::vector<std::string>{"class", "parameter", "J_min", "K", "tau_max", "tau_min", "L"});
    CHECK(table.rows.size() == 6);

    auto manifest = io::read_json(base / "a" / "manifest.json");
    check_outputs(manifest);
    check_replay(manifest);

    // the recorded config alone reproduces the run
    io::write_json(base / "replay.json", manifest["config"]);
    auto c = run({"pipeline", "full", "--seed", "3", "--config", (base / "replay.json").string(), "--out",
                  (base / "c").string()});
    REQUIRE(c.code == 0);
    CHECK(slurp(base / "c" / "summary.json") == slurp(base / "a" / "summary.json"));
}
