#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli = LABEL_AUDIT_CLI;

int run(const std::string& args) {
    const std::string cmd =
        std::string(cli) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is),
            std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const char* name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// Small end-to-end workspace reused by several cases.
struct Pipeline {
    fs::path out;
    explicit Pipeline(const char* name) : out(fresh_dir(name)) {
        const std::string o = " --out " + out.string();
        REQUIRE(run("synth --classes 4 --dim 8 --per-class 100 "
                    "--separation 6" + o) == 0);
        REQUIRE(run("inject --kind uniform --rate 0.1" + o) == 0);
        REQUIRE(run("train --epochs 3" + o) == 0);
        REQUIRE(run("score --methods sim-cos,sc,gd --m 80 --k 20" + o) == 0);
    }
    std::string o() const { return " --out " + out.string(); }
};

} // namespace

TEST_CASE("full pipeline produces every artifact") {
    Pipeline p("la_cli_pipe");
    CHECK(run("rank --method sim-cos" + p.o()) == 0);
    CHECK(run("rectify --m 80 --k 20 --p 0.1" + p.o()) == 0);
    CHECK(run("evaluate" + p.o()) == 0);
    CHECK(run("theory-check --alpha 0.9 --classes 4" + p.o()) == 0);
    CHECK(run("report" + p.o()) == 0);

    for (const char* name :
         {"train.bin", "val.bin", "test.bin", "noisy.bin", "noise_report.csv",
          "checkpoints/epoch_001.ckpt", "checkpoints/epoch_003.ckpt",
          "scores.csv", "ranking.csv", "cleaned.bin", "rectify_log.csv",
          "detection_curves.csv", "theory.json", "report.json",
          "detection_curves.svg", "similarity_histograms.svg",
          "norm_histograms.svg"})
        CHECK(fs::exists(p.out / name));

    const std::string scores = slurp(p.out / "scores.csv");
    CHECK(scores.rfind("id,method,score,rank", 0) == 0);
    CHECK(scores.find("sim-cos") != std::string::npos);
    CHECK(scores.find(",sc,") != std::string::npos);
    CHECK(scores.find(",gd,") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and thread-count independent") {
    Pipeline p("la_cli_det");
    const std::string first = slurp(p.out / "scores.csv");
    REQUIRE(run("score --methods sim-cos,sc,gd --m 80 --k 20" + p.o()) == 0);
    CHECK(slurp(p.out / "scores.csv") == first);
    REQUIRE(run("score --methods sim-cos,sc,gd --m 80 --k 20 --threads 4" +
                p.o()) == 0);
    CHECK(slurp(p.out / "scores.csv") == first);

    REQUIRE(run("rectify --m 80 --k 20" + p.o()) == 0);
    const std::string log = slurp(p.out / "rectify_log.csv");
    const std::string cleaned = slurp(p.out / "cleaned.bin");
    REQUIRE(run("rectify --m 80 --k 20 --threads 4" + p.o()) == 0);
    CHECK(slurp(p.out / "rectify_log.csv") == log);
    CHECK(slurp(p.out / "cleaned.bin") == cleaned);
}

TEST_CASE("evaluate without a noise report exits with the metric code") {
    const fs::path out = fresh_dir("la_cli_nonoise");
    CHECK(run("evaluate --out " + out.string()) == 5);
}

TEST_CASE("argument errors exit with code 2") {
    const fs::path out = fresh_dir("la_cli_args");
    CHECK(run("--bogus-flag synth --out " + out.string()) == 2);
    CHECK(run("inject --kind nonsense --out " + out.string()) == 2);
    Pipeline p("la_cli_args2");
    CHECK(run("score --methods nonsense --m 80" + p.o()) == 2);
    CHECK(run("rank --method missing" + p.o()) == 2);
}

TEST_CASE("format errors exit with code 3") {
    const fs::path out = fresh_dir("la_cli_fmt");
    const fs::path cfg = out / "broken.json";
    std::ofstream(cfg) << "{not json";
    CHECK(run("--config " + cfg.string() + " synth --out " + out.string()) ==
          3);
    const fs::path junk = out / "junk.bin";
    std::ofstream(junk) << "XXXX";
    CHECK(run("inject --in " + junk.string() + " --out " + out.string()) == 3);
}

TEST_CASE("config file supplies values, flags override them") {
    const fs::path out = fresh_dir("la_cli_cfg");
    const fs::path cfg = out / "cfg.json";
    std::ofstream(cfg) << R"({"synth": {"classes": 3, "per_class": 40},
                              "noise": {"rate": 0.25}})";
    const std::string base =
        "--config " + cfg.string() + " --out " + out.string();
    REQUIRE(run(base + " synth --dim 6") == 0);
    REQUIRE(run(base + " inject") == 0);
    // 3 classes x 40 per class = 120 rows, rate 0.25 -> 30 flips
    std::string report = slurp(out / "noise_report.csv");
    CHECK(std::count(report.begin(), report.end(), '\n') == 31);

    // flag wins over the config value
    REQUIRE(run(base + " inject --rate 0.1") == 0);
    report = slurp(out / "noise_report.csv");
    CHECK(std::count(report.begin(), report.end(), '\n') == 13);
}

TEST_CASE("the output directory falls back to the environment variable") {
    const fs::path out = fresh_dir("la_cli_env");
    const std::string cmd = std::string("LABEL_AUDIT_OUT=") + out.string() +
                            " " + cli +
                            " synth --classes 2 --dim 4 --per-class 20"
                            " >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(out / "train.bin"));
}
