// Command-line front end: run, sweep, eval, gen-synth, check.

#include "selfclust/config.hpp"
#include "selfclust/pipeline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace selfclust;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

template <typename T>
std::vector<T> parse_list(const std::string& text, T (*parse)(const std::string&)) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list: " + text);
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("not a number: " + s);
    return v;
}

BootFeature parse_feature(const std::string& s) {
    return parse_boot_feature(s);
}

/// Integers separated by whitespace or commas, a JSON array, or a run report
/// (its final_labels).
Labels read_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
        try {
            const auto j = json::parse(text);
            return (j.is_object() ? j.at("final_labels") : j).get<Labels>();
        } catch (const json::exception& e) {
            throw DataError("malformed label file " + path.string() + ": " + e.what());
        }
    }
    Labels labels;
    std::string token;
    std::stringstream ss(text);
    while (ss >> token) {
        std::stringstream parts(token);
        std::string item;
        while (std::getline(parts, item, ',')) {
            if (item.empty()) continue;
            try {
                labels.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw DataError("non-integer label '" + item + "' in " + path.string());
            }
        }
    }
    return labels;
}

/// Relative dataset paths in a config file are resolved against the file's folder.
void resolve_paths(DatasetSpec& spec, const fs::path& config_path) {
    const auto base = config_path.parent_path();
    auto fix = [&](fs::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    fix(spec.images);
    fix(spec.root);
    fix(spec.path);
    if (spec.labels) fix(*spec.labels);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-training image clustering: boot clustering refined by a learner trained on reliable pseudo-labels"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;

    auto* run_cmd = app.add_subcommand("run", "Run the boot stage and the iterative main stage");
    run_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_path, "output directory")->required();

    std::string deltas = "0.2";
    std::string small_deltas = "0.1";
    std::string features = "raw";
    int repeats = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid of runs over delta, small delta and boot features");
    sweep_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--deltas", deltas, "comma-separated initial belief ratios");
    sweep_cmd->add_option("--small-deltas", small_deltas, "comma-separated relaxation steps");
    sweep_cmd->add_option("--features", features, "comma-separated boot features (raw,hog,gabor,raw_pca)");
    sweep_cmd->add_option("--repeats", repeats, "repeats per cell (seed, seed+1, ...)")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", out_path, "output directory")->required();

    std::string truth_path;
    std::string pred_path;
    std::string features_path;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate predicted labels against ground truth");
    eval_cmd->add_option("--truth", truth_path, "label file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--pred", pred_path, "label file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--features", features_path, "feature CSV for DBI")->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", out_path, "also write the JSON record here");

    DatasetSpec synth;
    auto* gen_cmd = app.add_subcommand("gen-synth", "Generate a Gaussian-blob dataset as CSV");
    gen_cmd->add_option("--k", synth.synth_k, "classes")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--per-class", synth.synth_per_class, "samples per class")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--dim-signal", synth.synth_dim_signal, "informative coordinates")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--dim-noise", synth.synth_dim_noise, "pure-noise coordinates")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--separation", synth.synth_separation, "minimum distance between class means");
    gen_cmd->add_option("--noise-scale", synth.synth_noise_scale, "noise standard deviation");
    gen_cmd->add_option("--seed", synth.synth_seed, "random seed");
    gen_cmd->add_option("--out", out_path, "CSV output path")->required();

    std::string report_path;
    auto* check_cmd = app.add_subcommand("check", "Replay a run report and verify the reliable-set constraints");
    check_cmd->add_option("--report", report_path, "report.json")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run_cmd) {
            auto cfg = load_config(config_path);
            resolve_paths(cfg.dataset, config_path);
            const auto ds = load_dataset(cfg.dataset);
            const auto report = run(ds, cfg.run);
            write_report(report, out_path);
            const auto problems = replay_check(report_to_json(report));
            for (const auto& p : problems) std::cerr << "invariant: " << p << '\n';
            if (!problems.empty()) return kExitInvariant;
            std::cout << "iterations: " << report.iterations.size() << ", termination: " << to_string(report.termination)
                      << '\n';
            if (report.boot.eval) std::cout << "boot  JC,FMI,NMI,ARI,ACC,DBI: " << eval_csv_row(*report.boot.eval) << '\n';
            if (const auto& fin = report.final_eval(); fin && !report.iterations.empty())
                std::cout << "final JC,FMI,NMI,ARI,ACC,DBI: " << eval_csv_row(*fin) << '\n';
        } else if (*sweep_cmd) {
            auto cfg = load_config(config_path);
            resolve_paths(cfg.dataset, config_path);
            const auto ds = load_dataset(cfg.dataset);
            const auto result = sweep(ds, cfg.run, parse_list<double>(deltas, parse_double),
                                      parse_list<double>(small_deltas, parse_double),
                                      parse_list<BootFeature>(features, parse_feature), repeats);
            write_sweep(result, out_path);
            std::cout << "runs: " << result.runs.size() << ", written to " << out_path << '\n';
        } else if (*eval_cmd) {
            const auto truth = read_labels(truth_path);
            const auto pred = read_labels(pred_path);
            std::optional<FeatureMatrix> f;
            if (!features_path.empty()) f = read_feature_csv(features_path);
            if (f && f->rows() != static_cast<int>(pred.size()))
                throw DataError("feature rows do not match label count");
            const auto e = evaluate(truth, pred, f ? &f->data : nullptr);
            const auto j = eval_to_json(e);
            std::cout << j.dump(2) << '\n';
            std::cout << "JC,FMI,NMI,ARI,ACC,DBI\n" << eval_csv_row(e) << '\n';
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                if (!out) throw DataError("cannot write file: " + out_path);
                out << j.dump(2) << '\n';
            }
        } else if (*gen_cmd) {
            SeededRng rng(synth.synth_seed);
            const auto ds = gen_synth_blobs(synth.synth_k, synth.synth_per_class, synth.synth_dim_signal,
                                            synth.synth_dim_noise, synth.synth_separation, synth.synth_noise_scale, rng);
            write_csv_dataset(ds, out_path);
            std::cout << "wrote " << ds.size() << " samples of dimension " << ds.dim() << " to " << out_path << '\n';
        } else if (*check_cmd) {
            std::ifstream in(report_path);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::exception& e) {
                throw DataError(std::string("malformed run report: ") + e.what());
            }
            const auto problems = replay_check(j);
            for (const auto& p : problems) std::cout << "violation: " << p << '\n';
            if (!problems.empty()) return kExitInvariant;
            std::cout << "ok\n";
        }
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}
