#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "proxemo/gait.hpp"
#include "proxemo/navsim.hpp"

namespace fs = std::filesystem;
using namespace proxemo;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string out_path = "cli_test_stdout.txt";
    const std::string cmd = std::string(PROXEMO_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    std::remove(out_path.c_str());
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("cli_test") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("synth is deterministic byte for byte") {
    TempDir a("synth_a"), b("synth_b");
    const RunResult r1 =
        run_cli("synth --emotion sad --seed 7 --count 2 --out-dir " + a.path.string());
    REQUIRE(r1.exit_code == 0);
    const RunResult r2 =
        run_cli("synth --emotion sad --seed 7 --count 2 --out-dir " + b.path.string());
    REQUIRE(r2.exit_code == 0);

    std::vector<fs::path> files_a, files_b;
    for (const auto& e : fs::directory_iterator(a.path)) files_a.push_back(e.path());
    for (const auto& e : fs::directory_iterator(b.path)) files_b.push_back(e.path());
    std::sort(files_a.begin(), files_a.end());
    std::sort(files_b.begin(), files_b.end());
    REQUIRE(files_a.size() == 2);
    REQUIRE(files_b.size() == 2);
    for (std::size_t i = 0; i < files_a.size(); ++i) {
        CHECK(files_a[i].filename() == files_b[i].filename());
        CHECK(slurp(files_a[i]) == slurp(files_b[i]));
    }
}

TEST_CASE("augment emits 288 labeled files") {
    TempDir dir("augment");
    REQUIRE(run_cli("synth --emotion happy --seed 1 --out-dir " + dir.path.string()).exit_code == 0);
    fs::path input;
    for (const auto& e : fs::directory_iterator(dir.path)) input = e.path();

    const fs::path aug_dir = dir.path / "aug";
    const RunResult r =
        run_cli("augment --input " + input.string() + " --out-dir " + aug_dir.string());
    REQUIRE(r.exit_code == 0);

    int count = 0;
    int per_view[4] = {0, 0, 0, 0};
    for (const auto& e : fs::directory_iterator(aug_dir)) {
        ++count;
        const LabeledGait lg = read_gait_csv(e.path().string());
        ++per_view[static_cast<int>(lg.view_group)];
        CHECK(lg.emotion == EmotionClass::happy);
    }
    CHECK(count == 288);
    for (int i = 0; i < 4; ++i) CHECK(per_view[i] == 72);
}

TEST_CASE("embed writes pxi and png artifacts") {
    TempDir dir("embed");
    REQUIRE(run_cli("synth --emotion neutral --seed 2 --out-dir " + dir.path.string()).exit_code == 0);
    fs::path input;
    for (const auto& e : fs::directory_iterator(dir.path))
        if (e.path().extension() == ".csv") input = e.path();

    const fs::path pxi = dir.path / "img.pxi";
    const fs::path png = dir.path / "img.png";
    const RunResult r = run_cli("embed --input " + input.string() + " --out " + pxi.string() +
                                " --png " + png.string() + " --size 64");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::file_size(pxi) == 4 + 12 + 64 * 64 * 3 * sizeof(double));
    CHECK(fs::exists(png));
}

TEST_CASE("infer with the oracle grid prints the comfort-space table value") {
    TempDir dir("infer");
    REQUIRE(run_cli("synth --emotion sad --seed 3 --out-dir " + dir.path.string()).exit_code == 0);
    fs::path input;
    for (const auto& e : fs::directory_iterator(dir.path)) input = e.path();

    const RunResult r = run_cli("infer --gait " + input.string() + " --oracle-grid");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("emotion: sad") != std::string::npos);
    CHECK(r.output.find("view_group: front") != std::string::npos);
    CHECK(r.output.find("comfort_space_m: 1.1271") != std::string::npos);
}

TEST_CASE("train, eval and infer round trip on a tiny dataset") {
    TempDir dir("train");
    // two emotions, two seeds each; augment one gait per class into views
    for (const char* emo : {"sad", "happy"}) {
        REQUIRE(run_cli(std::string("synth --emotion ") + emo + " --seed 10 --count 1 --noise 0.05 --out-dir " +
                        dir.path.string())
                    .exit_code == 0);
    }
    const fs::path data = dir.path / "data";
    fs::create_directories(data);
    for (const auto& e : fs::directory_iterator(dir.path)) {
        if (e.path().extension() != ".csv") continue;
        // keep only a handful of angles to stay fast: augment into a temp dir
        const fs::path aug = dir.path / (e.path().stem().string() + "_aug");
        REQUIRE(run_cli("augment --input " + e.path().string() + " --out-dir " + aug.string())
                    .exit_code == 0);
        int kept = 0;
        std::vector<fs::path> entries;
        for (const auto& f : fs::directory_iterator(aug)) entries.push_back(f.path());
        std::sort(entries.begin(), entries.end());
        for (const auto& f : entries) {
            if (kept % 9 == 0) fs::copy_file(f, data / f.filename());
            ++kept;
        }
    }

    const fs::path ckpt = dir.path / "model.ckpt";
    const fs::path history = dir.path / "history.csv";
    const RunResult tr = run_cli("train --data-dir " + data.string() + " --out " + ckpt.string() +
                                 " --history " + history.string() +
                                 " --epochs 2 --input-size 32 --batch-size 8 --seed 4");
    REQUIRE(tr.exit_code == 0);
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(history));

    TempDir eval_dir("eval");
    const RunResult ev = run_cli("eval --checkpoint " + ckpt.string() + " --data-dir " +
                                 data.string() + " --out-dir " + eval_dir.path.string());
    REQUIRE(ev.exit_code == 0);
    CHECK(fs::exists(eval_dir.path / "report.csv"));
    CHECK(fs::exists(eval_dir.path / "confusion.csv"));
    CHECK(ev.output.find("mean accuracy") != std::string::npos);

    fs::path one_gait;
    for (const auto& f : fs::directory_iterator(data)) one_gait = f.path();
    const RunResult inf =
        run_cli("infer --checkpoint " + ckpt.string() + " --gait " + one_gait.string());
    REQUIRE(inf.exit_code == 0);
    CHECK(inf.output.find("comfort_space_m:") != std::string::npos);
}

TEST_CASE("simulate runs a scenario file and plots it") {
    TempDir dir("simulate");
    Scenario s;
    s.world.robot_start = {0.0, 0.0};
    s.world.robot_heading = 0.0;
    s.world.goal = {6.0, 0.0};
    Pedestrian p;
    p.position = {5.0, 0.0};
    p.heading = M_PI;
    p.emotion = EmotionClass::sad;
    s.world.pedestrians.push_back(p);
    s.config.mode = SimMode::oracle;
    s.config.n_beams = 120;
    s.config.max_range = 7.0;
    s.config.sensor_range = 7.0;
    s.config.resolution = 0.05;
    s.config.max_steps = 400;
    const fs::path scen = dir.path / "scenario.txt";
    save_scenario(scen.string(), s);

    const fs::path out = dir.path / "out";
    const RunResult r =
        run_cli("simulate --scenario " + scen.string() + " --out-dir " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(out / "episode.csv"));
    CHECK(fs::exists(out / "report.txt"));
    CHECK(fs::exists(out / "episode.svg"));
    CHECK(r.output.find("goal_reached: yes") != std::string::npos);

    const RunResult pl = run_cli("plot --episode " + (out / "episode.csv").string() +
                                 " --scenario " + scen.string() + " --out " +
                                 (dir.path / "replot.svg").string());
    REQUIRE(pl.exit_code == 0);
    CHECK(fs::exists(dir.path / "replot.svg"));
}

TEST_CASE("simulate is idempotent given identical inputs") {
    TempDir dir("idempotent");
    Scenario s;
    s.world.goal = {4.0, 0.0};
    Pedestrian p;
    p.position = {3.0, 1.0};
    p.heading = M_PI;
    p.emotion = EmotionClass::happy;
    s.world.pedestrians.push_back(p);
    s.config.mode = SimMode::oracle;
    s.config.n_beams = 90;
    s.config.max_steps = 200;
    s.config.resolution = 0.05;
    const fs::path scen = dir.path / "scenario.txt";
    save_scenario(scen.string(), s);

    const fs::path o1 = dir.path / "o1", o2 = dir.path / "o2";
    REQUIRE(run_cli("simulate --scenario " + scen.string() + " --out-dir " + o1.string()).exit_code == 0);
    REQUIRE(run_cli("simulate --scenario " + scen.string() + " --out-dir " + o2.string()).exit_code == 0);
    CHECK(slurp(o1 / "episode.csv") == slurp(o2 / "episode.csv"));
    CHECK(slurp(o1 / "report.txt") == slurp(o2 / "report.txt"));
}

TEST_CASE("cli reports distinct exit codes per failure class") {
    CHECK(run_cli("synth").exit_code == 2);                       // missing required flag
    CHECK(run_cli("augment --input missing.csv").exit_code == 4);  // missing file
    CHECK(run_cli("infer --gait missing.csv --oracle-grid").exit_code == 4);

    TempDir dir("errors");
    const fs::path bad = dir.path / "bad.csv";
    std::ofstream(bad.string()) << "not,a,gait\n";
    CHECK(run_cli("infer --gait " + bad.string() + " --oracle-grid").exit_code == 5);  // malformed

    const fs::path gait = dir.path / "g";
    REQUIRE(run_cli("synth --emotion angry --seed 5 --out-dir " + gait.string()).exit_code == 0);
    fs::path gait_file;
    for (const auto& e : fs::directory_iterator(gait)) gait_file = e.path();
    CHECK(run_cli("infer --gait " + gait_file.string()).exit_code == 3);  // needs checkpoint
}

TEST_CASE("help is available for every subcommand") {
    for (const char* sub : {"synth", "augment", "embed", "train", "eval", "infer", "simulate", "plot"}) {
        const RunResult r = run_cli(std::string(sub) + " --help");
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("--help") != std::string::npos);
    }
}
