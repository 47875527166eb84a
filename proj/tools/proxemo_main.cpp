#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "proxemo/embedding.hpp"
#include "proxemo/errors.hpp"
#include "proxemo/gait.hpp"
#include "proxemo/model.hpp"
#include "proxemo/navsim.hpp"
#include "proxemo/parallel.hpp"
#include "proxemo/proxemics.hpp"

namespace fs = std::filesystem;
using namespace proxemo;

namespace {

// Exit codes, also documented in the README:
// 0 ok, 1 unknown error, 2 usage, 3 config, 4 missing file, 5 malformed
// content, 6 shape mismatch, 7 invalid input.
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitFile = 4;
constexpr int kExitFormat = 5;
constexpr int kExitShape = 6;
constexpr int kExitInvalid = 7;

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open config: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("config line without '=': " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
        };
        strip(key);
        strip(value);
        out[key] = value;
    }
    return out;
}

std::vector<std::string> sorted_gait_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw FileError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FileError("no .csv gait files in " + dir);
    return files;
}

std::vector<LabeledImage> load_dataset(const std::string& dir, int input_size) {
    std::vector<LabeledImage> out;
    for (const auto& path : sorted_gait_files(dir)) {
        const LabeledGait lg = read_gait_csv(path);
        out.push_back({gait_to_image(lg.gait, input_size), lg.emotion, lg.view_group});
    }
    return out;
}

SoftmaxGrid one_hot_grid(EmotionClass e, ViewGroup v) {
    SoftmaxGrid g;
    g.p.fill(0.0);
    g.p[static_cast<std::size_t>(grid_cell(static_cast<int>(e), static_cast<int>(v)))] = 1.0;
    return g;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string emotion = "neutral";
    std::uint64_t seed = 0;
    double noise = 0.0;
    int count = 1;
    std::string out_dir = ".";
};

int run_synth(const SynthArgs& a) {
    const EmotionClass e = emotion_from_string(a.emotion);
    fs::create_directories(a.out_dir);
    for (int i = 0; i < a.count; ++i) {
        const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
        const LabeledGait lg = synthesize_gait(e, seed, a.noise);
        char name[128];
        std::snprintf(name, sizeof(name), "gait_%s_s%llu.csv", a.emotion.c_str(),
                      static_cast<unsigned long long>(seed));
        write_gait_csv((fs::path(a.out_dir) / name).string(), lg);
    }
    std::cout << "wrote " << a.count << " gait file(s) to " << a.out_dir << "\n";
    return 0;
}

struct AugmentArgs {
    std::string input;
    std::string out_dir = ".";
};

int run_augment(const AugmentArgs& a) {
    const LabeledGait lg = read_gait_csv(a.input);
    fs::create_directories(a.out_dir);
    const std::string stem = fs::path(a.input).stem().string();
    const auto set = generate_augmentation_set(lg.gait);
    std::size_t i = 0;
    for (int step = 0; step < 72; ++step)
        for (int tz = 1; tz <= 4; ++tz, ++i) {
            LabeledGait out{set[i].first, lg.emotion, set[i].second, lg.source};
            char name[160];
            std::snprintf(name, sizeof(name), "%s_t%03d_z%d.csv", stem.c_str(), 5 * step, tz);
            write_gait_csv((fs::path(a.out_dir) / name).string(), out);
        }
    std::cout << "wrote " << set.size() << " augmented gaits to " << a.out_dir << "\n";
    return 0;
}

struct EmbedArgs {
    std::string input;
    std::string out;
    std::string png;
    int size = 244;
    bool raw = false;
};

int run_embed(const EmbedArgs& a) {
    const LabeledGait lg = read_gait_csv(a.input);
    const GaitImage img =
        a.raw ? embed_gait(normalize_gait(lg.gait)) : gait_to_image(lg.gait, a.size);
    write_image_pxi(a.out, img);
    if (!a.png.empty()) write_image_png(a.png, img);
    std::cout << "embedded " << a.input << " -> " << a.out << " (" << img.height << "x"
              << img.width << ")\n";
    return 0;
}

struct TrainArgs {
    std::string data_dir;
    std::string out = "model.ckpt";
    std::string history;
    std::string config_file;
    TrainConfig cfg;
    ModelConfig model;
};

int run_train(CLI::App* cmd, TrainArgs& a) {
    if (!a.config_file.empty()) {
        // precedence: defaults < config file < explicit flags
        const auto file_cfg = read_config_file(a.config_file);
        auto apply = [&](const char* flag, const char* key, auto setter) {
            const auto it = file_cfg.find(key);
            if (it != file_cfg.end() && cmd->count(flag) == 0) setter(it->second);
        };
        try {
            apply("--epochs", "epochs", [&](const std::string& v) { a.cfg.epochs = std::stoi(v); });
            apply("--batch-size", "batch_size",
                  [&](const std::string& v) { a.cfg.batch_size = std::stoi(v); });
            apply("--input-size", "input_size",
                  [&](const std::string& v) { a.cfg.input_size = std::stoi(v); });
            apply("--seed", "seed", [&](const std::string& v) { a.cfg.seed = std::stoull(v); });
            apply("--lr", "lr", [&](const std::string& v) { a.cfg.adam.lr = std::stod(v); });
            apply("--val-fraction", "val_fraction",
                  [&](const std::string& v) { a.cfg.val_fraction = std::stod(v); });
            apply("--early-stop", "early_stop_val_acc",
                  [&](const std::string& v) { a.cfg.early_stop_val_acc = std::stod(v); });
            apply("--groups", "groups", [&](const std::string& v) { a.model.groups = std::stoi(v); });
        } catch (const std::invalid_argument&) {
            throw FormatError("config: non-numeric value for a numeric key");
        }
    }

    const auto dataset = load_dataset(a.data_dir, a.cfg.input_size);
    std::cout << "training on " << dataset.size() << " samples (input " << a.cfg.input_size
              << "x" << a.cfg.input_size << ", groups " << a.model.groups << ")\n";
    TrainResult result = train(dataset, a.cfg, a.model);
    result.net.save(a.out);
    if (!a.history.empty()) write_history_csv(a.history, result.history);
    if (!result.history.empty()) {
        const auto& last = result.history.back();
        std::cout << "epochs run: " << result.history.size() << "  final train acc "
                  << last.train_acc << "%  val acc " << last.val_acc << "%\n";
    }
    std::cout << "checkpoint: " << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string data_dir;
    std::string out_dir = ".";
};

int run_eval(const EvalArgs& a) {
    GaitClassifier net = GaitClassifier::load(a.checkpoint);
    const auto dataset = load_dataset(a.data_dir, net.config().input_size);
    const EvalReport report = evaluate(net, dataset);
    fs::create_directories(a.out_dir);
    write_report_csv((fs::path(a.out_dir) / "report.csv").string(), report);
    write_confusion_csv((fs::path(a.out_dir) / "confusion.csv").string(), report);
    std::cout << report_summary(report);
    return 0;
}

struct InferArgs {
    std::string checkpoint;
    std::string gait;
    bool oracle_grid = false;
};

int run_infer(const InferArgs& a) {
    const LabeledGait lg = read_gait_csv(a.gait);
    SoftmaxGrid grid;
    if (a.oracle_grid) {
        grid = one_hot_grid(lg.emotion, lg.view_group);
    } else {
        if (a.checkpoint.empty())
            throw ConfigError("infer: --checkpoint is required unless --oracle-grid is set");
        GaitClassifier net = GaitClassifier::load(a.checkpoint);
        grid = net.forward(gait_to_image(lg.gait, net.config().input_size));
    }
    const auto [e, v] = grid.argmax();
    std::printf("emotion: %s\n", to_string(static_cast<EmotionClass>(e)));
    std::printf("view_group: %s\n", to_string(static_cast<ViewGroup>(v)));
    std::printf("confidence: %.4f\n", grid.p[static_cast<std::size_t>(grid_cell(e, v))]);
    std::printf("comfort_space_m: %.6g\n", comfort_space(grid));
    return 0;
}

struct SimulateArgs {
    std::string scenario;
    std::string checkpoint;
    std::string out_dir = ".";
    std::string mode_override;
    bool svg = true;
};

int run_simulate(const SimulateArgs& a) {
    Scenario s = load_scenario(a.scenario);
    if (!a.mode_override.empty()) s.config.mode = sim_mode_from_string(a.mode_override);

    GaitClassifier* net_ptr = nullptr;
    std::optional<GaitClassifier> net;
    if (s.config.mode == SimMode::proxemo) {
        if (a.checkpoint.empty())
            throw ConfigError("simulate: proxemo mode needs --checkpoint");
        net.emplace(GaitClassifier::load(a.checkpoint));
        net_ptr = &*net;
    }

    const EpisodeLog log = run_episode(s.world, s.config, net_ptr);
    fs::create_directories(a.out_dir);
    write_episode_csv((fs::path(a.out_dir) / "episode.csv").string(), log);
    const ClearanceReport report = clearance_report(log);
    {
        std::ofstream out((fs::path(a.out_dir) / "report.txt").string());
        out << report_to_string(report);
    }
    if (a.svg) write_episode_svg((fs::path(a.out_dir) / "episode.svg").string(), log, s.world);
    std::cout << report_to_string(report);
    return 0;
}

struct PlotArgs {
    std::string episode;
    std::string scenario;
    std::string image;
    std::string out;
};

int run_plot(const PlotArgs& a) {
    if (!a.image.empty()) {
        write_image_png(a.out, read_image_pxi(a.image));
        std::cout << "wrote " << a.out << "\n";
        return 0;
    }
    if (a.episode.empty()) throw ConfigError("plot: need --episode or --image");
    const EpisodeLog log = read_episode_csv(a.episode);
    World world;
    if (!a.scenario.empty()) world = load_scenario(a.scenario).world;
    if (!log.steps.empty() && world.goal.x == 0.0 && world.goal.y == 0.0) {
        world.goal = {log.steps.back().x, log.steps.back().y};
    }
    write_episode_svg(a.out, log, world);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gait-based emotion classification and socially aware navigation"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate labeled synthetic gait files");
    synth_cmd->add_option("--emotion", synth.emotion, "angry|sad|happy|neutral")->required();
    synth_cmd->add_option("--seed", synth.seed, "base RNG seed");
    synth_cmd->add_option("--noise", synth.noise, "jitter scale (>= 0)");
    synth_cmd->add_option("--count", synth.count, "number of gaits");
    synth_cmd->add_option("--out-dir", synth.out_dir, "output directory");

    AugmentArgs augment;
    auto* augment_cmd = app.add_subcommand("augment", "apply the 288-view expansion to one gait");
    augment_cmd->add_option("--input", augment.input, "gait csv file")->required();
    augment_cmd->add_option("--out-dir", augment.out_dir, "output directory");

    EmbedArgs embed;
    auto* embed_cmd = app.add_subcommand("embed", "embed a gait file as an image");
    embed_cmd->add_option("--input", embed.input, "gait csv file")->required();
    embed_cmd->add_option("--out", embed.out, "output .pxi image")->required();
    embed_cmd->add_option("--png", embed.png, "also write an 8-bit PNG");
    embed_cmd->add_option("--size", embed.size, "upscaled square size (default 244)");
    embed_cmd->add_flag("--raw", embed.raw, "emit the raw 75x16 embedding instead");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train the classifier on a gait directory");
    train_cmd->add_option("--data-dir", train_args.data_dir, "directory of labeled gait csvs")
        ->required();
    train_cmd->add_option("--out", train_args.out, "checkpoint path");
    train_cmd->add_option("--history", train_args.history, "write epoch history csv");
    train_cmd->add_option("--config", train_args.config_file, "key=value config file");
    train_cmd->add_option("--epochs", train_args.cfg.epochs, "training epochs");
    train_cmd->add_option("--batch-size", train_args.cfg.batch_size, "minibatch size");
    train_cmd->add_option("--input-size", train_args.cfg.input_size, "network input size");
    train_cmd->add_option("--seed", train_args.cfg.seed, "RNG seed");
    train_cmd->add_option("--lr", train_args.cfg.adam.lr, "base learning rate");
    train_cmd->add_option("--val-fraction", train_args.cfg.val_fraction, "held-out fraction");
    train_cmd->add_option("--early-stop", train_args.cfg.early_stop_val_acc,
                          "stop at this val mean accuracy (%)");
    train_cmd->add_option("--groups", train_args.model.groups, "view groups n_g");
    train_cmd->add_flag("--verbose", train_args.cfg.verbose, "log each epoch to stderr");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a gait directory");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint")->required();
    eval_cmd->add_option("--data-dir", eval_args.data_dir, "directory of labeled gait csvs")
        ->required();
    eval_cmd->add_option("--out-dir", eval_args.out_dir, "report output directory");

    InferArgs infer_args;
    auto* infer_cmd = app.add_subcommand("infer", "classify one gait and print its comfort space");
    infer_cmd->add_option("--checkpoint", infer_args.checkpoint, "model checkpoint");
    infer_cmd->add_option("--gait", infer_args.gait, "gait csv file")->required();
    infer_cmd->add_flag("--oracle-grid", infer_args.oracle_grid,
                        "use the file's labels as a one-hot grid (no network)");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "run a navigation episode from a scenario file");
    sim_cmd->add_option("--scenario", sim_args.scenario, "scenario file")->required();
    sim_cmd->add_option("--checkpoint", sim_args.checkpoint, "model checkpoint (proxemo mode)");
    sim_cmd->add_option("--out-dir", sim_args.out_dir, "output directory");
    sim_cmd->add_option("--mode", sim_args.mode_override, "override mode: proxemo|oracle|no-emotion");
    sim_cmd->add_flag("!--no-svg", sim_args.svg, "skip the SVG plot");

    PlotArgs plot_args;
    auto* plot_cmd = app.add_subcommand("plot", "render an episode csv or pxi image");
    plot_cmd->add_option("--episode", plot_args.episode, "episode csv");
    plot_cmd->add_option("--scenario", plot_args.scenario, "scenario file (for walls/goal)");
    plot_cmd->add_option("--image", plot_args.image, "pxi image to convert to PNG");
    plot_cmd->add_option("--out", plot_args.out, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (threads > 0) set_num_threads(threads);

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (synth_cmd->parsed()) return run_synth(synth);
        if (augment_cmd->parsed()) return run_augment(augment);
        if (embed_cmd->parsed()) return run_embed(embed);
        if (train_cmd->parsed()) return run_train(train_cmd, train_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (infer_cmd->parsed()) return run_infer(infer_args);
        if (sim_cmd->parsed()) return run_simulate(sim_args);
        if (plot_cmd->parsed()) return run_plot(plot_args);
    } catch (const ConfigError& e) {
        std::cerr << "proxemo " << stage << ": config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FileError& e) {
        std::cerr << "proxemo " << stage << ": file error: " << e.what() << "\n";
        return kExitFile;
    } catch (const FormatError& e) {
        std::cerr << "proxemo " << stage << ": format error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const ShapeError& e) {
        std::cerr << "proxemo " << stage << ": shape error: " << e.what() << "\n";
        return kExitShape;
    } catch (const InvalidInputError& e) {
        std::cerr << "proxemo " << stage << ": invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "proxemo " << stage << ": error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
