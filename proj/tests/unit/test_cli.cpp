#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "greenbvp/cli.hpp"
#include "greenbvp/io.hpp"

using namespace greenbvp;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
    Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("greenbvp_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_problem(const fs::path& dir, const std::string& text) {
    const auto path = dir / "problem.txt";
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("greens on the presets reports the kernel constants") {
    auto r = run({"greens", "--preset", "example-3.5"});
    REQUIRE(r.code == cli::ok);
    auto j = r.json();
    CHECK(j["norms"]["sup_l2"].get<double>() == doctest::Approx(1.00066).epsilon(1e-5));
    CHECK(j["norms"]["sup_abs"].get<double>() == doctest::Approx(1.08198).epsilon(1e-5));
    CHECK(j["thresholds"]["mu"].get<double>() == doctest::Approx(0.924).epsilon(1e-3));
    CHECK(j["grid"] == 512);

    r = run({"greens", "--preset", "example-3.6"});
    REQUIRE(r.code == cli::ok);
    j = r.json();
    CHECK(j["norms"]["sup_l2"].get<double>() == doctest::Approx(1.00065).epsilon(1e-5));
    CHECK(j["thresholds"]["m"].get<double>() == doctest::Approx(0.999).epsilon(1e-3));
}

TEST_CASE("greens exits with the incompatibility code and quotes the determinant") {
    const auto dir = scratch("incompatible");
    const auto path = write_problem(dir, "a2 = 1\na1 = 0\na0 = 0\nbc = periodic\n");
    const auto r = run({"greens", path.string(), "--grid", "64"});
    CHECK(r.code == cli::incompatible);
    CHECK(r.err.find("determinant") != std::string::npos);
    CHECK(r.out.empty());
}

TEST_CASE("greens writes report and kernel snapshot") {
    const auto dir = scratch("greens_out");
    const auto r = run({"greens", "--preset", "example-3.5", "--grid", "8", "--out", dir.string(), "--csv"});
    REQUIRE(r.code == cli::ok);
    CHECK(slurp(dir / "greens.json") == r.out);
    std::ifstream csv(dir / "kernel.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
    }
    CHECK(rows == 10);
}

TEST_CASE("check exit code follows the evaluable conditions") {
    for (const char* preset : {"example-3.5", "example-3.6", "example-4.3"}) {
        CAPTURE(preset);
        CHECK(run({"check", "--preset", preset}).code == cli::ok);
    }
    auto r = run({"check", "--preset", "example-4.3"});
    auto j = r.json();
    REQUIRE(j["conditions"].size() == 1);
    CHECK(j["conditions"][0]["condition_id"] == "lipschitz_l1");
    CHECK(j["conditions"][0]["lhs"].get<double>() == doctest::Approx(0.97378).epsilon(1e-4));

    // Perturbed growth cannot hold on this kernel once m >= 0 is declared.
    r = run({"check", "--preset", "example-3.6", "--conditions", "sublinear_growth,perturbed_growth"});
    CHECK(r.code == cli::condition_failure);
    j = r.json();
    CHECK(j["conditions"][0]["pass"] == true);
    CHECK(j["conditions"][1]["pass"] == false);

    const auto dir = scratch("check");
    const auto path = write_problem(dir, "preset = example-4.3\nmu = 0.95\n");
    CHECK(run({"check", path.string()}).code == cli::condition_failure);
}

TEST_CASE("check reports a missing declaration as not evaluable") {
    const auto dir = scratch("check_missing");
    const auto path = write_problem(dir, "a0 = -1\nf0 = sin(x)\nconditions = eta_norm\n");
    const auto r = run({"check", path.string(), "--grid", "64"});
    CHECK(r.code == cli::ok);
    CHECK(r.json()["conditions"][0]["evaluable"] == false);
}

TEST_CASE("solve writes CSV and a summary with increment ratios") {
    const auto dir = scratch("solve");
    const auto r = run({"solve", "--preset", "example-4.3", "--grid", "128", "--out", dir.string()});
    REQUIRE(r.code == cli::ok);
    const auto j = r.json();
    CHECK(j["converged"] == true);
    CHECK(j["guaranteed"] == true);
    CHECK(j["max_increment_ratio"].get<double>() <= j["contraction_q"].get<double>() + 0.05);
    CHECK(fs::exists(dir / "solution.csv"));
    CHECK(slurp(dir / "summary.json") == r.out);
}

TEST_CASE("solve reports divergence with the increment history") {
    const auto dir = scratch("diverge");
    const auto path = write_problem(dir, "a0 = -1\nf0 = 3*x + 1\nmu = 3\n");
    const auto r = run({"solve", path.string(), "--grid", "64", "--max-iter", "20"});
    CHECK(r.code == cli::divergence);
    CHECK(r.err.find("increments") != std::string::npos);
}

TEST_CASE("spectral examples") {
    auto r = run({"spectral", "--preset", "example-3.5", "--method", "both"});
    REQUIRE(r.code == cli::ok);
    auto j = r.json();
    CHECK(j["method"] == "both");
    CHECK(j["mesh"] == 512);
    CHECK(j["power"]["radius"].get<double>() == doctest::Approx(0.6).epsilon(1e-3));
    CHECK(j["hill"]["radius"].get<double>() == doctest::Approx(0.6).epsilon(1e-3));
    CHECK(j["gap"].get<double>() <= 2e-3);
    CHECK(j.contains("radius"));
    CHECK(j.contains("iterations"));

    const auto dir = scratch("spectral");
    auto path = write_problem(dir, "preset = example-3.5\neta = 0\n");
    r = run({"spectral", path.string(), "--method", "power", "--grid", "64"});
    REQUIRE(r.code == cli::ok);
    CHECK(r.json()["radius"] == 0.0);

    path = write_problem(dir, "preset = example-3.5\neta = 0.3 + 0.1*sin(2*pi*t)\n");
    r = run({"spectral", path.string(), "--method", "both", "--grid", "256"});
    REQUIRE(r.code == cli::ok);
    CHECK(r.json()["gap"].get<double>() <= 2e-3);
}

TEST_CASE("spectral refuses hill for a sign-indefinite kernel") {
    const auto dir = scratch("spectral_refuse");
    // Dirichlet x'' + 12 x: the kernel changes sign.
    const auto path = write_problem(dir, "a0 = 12\nbc = dirichlet\neta = 0.2\n");
    auto r = run({"spectral", path.string(), "--method", "hill", "--grid", "64"});
    CHECK(r.code == cli::condition_failure);
    CHECK(r.err.find("refused") != std::string::npos);
    r = run({"spectral", path.string(), "--method", "both", "--grid", "64"});
    CHECK(r.code == cli::ok);
    CHECK(r.json()["hill"].is_null());
}

TEST_CASE("funnel writes manifest and member files") {
    const auto dir = scratch("funnel");
    const auto r = run({"funnel", "--preset", "example-3.5", "--grid", "64", "--members", "6", "--seed", "3",
                        "--out", dir.string()});
    REQUIRE(r.code == cli::ok);
    const auto manifest = Json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["seed"] == 3);
    CHECK(manifest["converged_count"] == 6);
    for (const char* key : {"diameter_c1", "max_residual", "bound_R"}) {
        CHECK(manifest.contains(key));
    }
    for (int k = 0; k < 6; ++k) {
        CHECK(fs::exists(dir / ("member_00" + std::to_string(k) + ".csv")));
    }
}

TEST_CASE("funnel perturbation scheme and warning exit") {
    const auto dir = scratch("funnel_scheme");
    auto path = write_problem(dir, "a0 = -4\ndim = 2\nf0 = atan(x)\nc = 0\nm = 0\naccretive = true\n");
    auto r = run({"funnel", path.string(), "--grid", "128", "--perturb", "4,16", "--out", (dir / "a").string()});
    REQUIRE(r.code == cli::ok);
    CHECK(r.json()["scheme"]["all_ok"] == true);

    // An expanding box map: the iteration cannot converge for most members.
    path = write_problem(dir, "a0 = -1\nrhs = box\nf0 = 4*x\nrho = 0.5\n");
    r = run({"funnel", path.string(), "--grid", "32", "--members", "4", "--out", (dir / "b").string()});
    CHECK(r.code == cli::divergence);
    CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("identical inputs give byte-identical JSON") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    for (const auto& cmd : std::vector<std::vector<std::string>>{
             {"greens", "--preset", "example-3.6", "--grid", "64"},
             {"check", "--preset", "example-3.5", "--grid", "64"},
             {"solve", "--preset", "example-3.6", "--grid", "64", "--selection", "random", "--seed", "9"},
             {"spectral", "--preset", "example-3.5", "--grid", "64"},
             {"funnel", "--preset", "example-3.5", "--grid", "64", "--members", "4", "--seed", "5"}}) {
        auto ca = cmd;
        auto cb = cmd;
        ca.insert(ca.end(), {"--out", a.string()});
        cb.insert(cb.end(), {"--out", b.string()});
        const auto ra = run(ca);
        const auto rb = run(cb);
        CAPTURE(cmd[0]);
        CHECK(ra.code == rb.code);
        // The funnel report names its output directory; everything else must match byte for byte.
        if (cmd[0] == "funnel") {
            CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
            CHECK(slurp(a / "member_000.csv") == slurp(b / "member_000.csv"));
        } else {
            CHECK(ra.out == rb.out);
        }
    }
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == cli::usage);
    CHECK(run({"frobnicate"}).code == cli::usage);
    CHECK(run({"greens"}).code == cli::usage);
    CHECK(run({"greens", "--preset", "example-0"}).code == cli::usage);
    CHECK(run({"greens", "--preset", "example-3.5", "--grid", "7"}).code == cli::usage);
    CHECK(run({"greens", "/nonexistent/problem.txt"}).code == cli::usage);
    CHECK(run({"greens", "--help"}).code == cli::ok);
}

TEST_CASE("preset files match the built-in presets") {
    for (const char* name : {"example-3.5", "example-3.6", "example-4.3"}) {
        CAPTURE(name);
        const fs::path file = fs::path(GREENBVP_PRESET_DIR) / (std::string(name) + ".txt");
        REQUIRE(fs::exists(file));
        for (const char* cmd : {"greens", "check", "spectral"}) {
            CAPTURE(cmd);
            const auto from_file = run({cmd, file.string(), "--grid", "64"});
            const auto built_in = run({cmd, "--preset", name, "--grid", "64"});
            CHECK(from_file.code == built_in.code);
            CHECK(from_file.out == built_in.out);
        }
    }
}
