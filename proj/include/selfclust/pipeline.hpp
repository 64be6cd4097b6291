#pragma once

#include "selfclust/config.hpp"
#include "selfclust/metrics.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace selfclust {

enum class Termination { pool_exhausted, kmax_reached };

std::string to_string(Termination t);

struct BootRecord {
    std::string feature;
    int feature_dim = 0;
    Labels labels;
    std::optional<EvalReport> eval;
    double wall_time = 0;
};

/// One pass of the main stage.
struct IterationRecord {
    int k = 0;                   ///< iteration index, from 0
    double delta_effective = 0;
    IndexList ccn_added;         ///< samples promoted this iteration, ascending
    Labels ccn_added_labels;     ///< their frozen pseudo-labels
    int ccn_total = 0;           ///< |reliable set| after promotion
    int active_remaining = 0;
    double learner_initial_loss = 0;
    double learner_final_loss = 0;
    std::optional<EvalReport> eval;
    double wall_time = 0;
};

struct RunReport {
    RunConfig config;
    BootRecord boot;
    std::vector<IterationRecord> iterations;
    Labels final_labels;
    Termination termination = Termination::kmax_reached;

    /// Evaluation of the last stage (last iteration, or boot when there was none).
    const std::optional<EvalReport>& final_eval() const;
};

/// Boot stage followed by the iterative main stage:
///   boot: features -> clustering -> labels and centroids;
///   loop: cohesion on the active pool -> promote the closest delta fraction per
///   cluster -> train (warm start) on all reliable samples -> predict the active
///   pool -> learned features -> centroids as per-pseudo-label means of the reliable
///   samples -> delta += small_delta.
/// The loop runs at most k_max times and stops early once the pool is empty.
RunReport run(const Dataset& ds, const RunConfig& cfg);

struct SweepRun {
    double delta = 0;
    double small_delta = 0;
    BootFeature feature = BootFeature::raw;
    int repeat = 0;
    std::uint64_t seed = 0;
    EvalReport boot;
    EvalReport final;
    int iterations = 0;
    Termination termination = Termination::kmax_reached;
};

struct SweepTau {
    double delta = 0;
    double small_delta = 0;
    /// Indexed jc, fmi, nmi, ari, acc.
    std::array<double, 5> boot{};
    std::array<double, 5> final{};
};

struct SweepReport {
    std::vector<SweepRun> runs;
    std::vector<SweepTau> tau;   ///< only when at least two features were swept
};

/// Full grid deltas x small_deltas x features x repeats. Repeat r uses seed cfg.seed + r.
/// Requires ground-truth labels.
SweepReport sweep(const Dataset& ds, const RunConfig& cfg, const std::vector<double>& deltas,
                  const std::vector<double>& small_deltas, const std::vector<BootFeature>& features, int repeats);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
nlohmann::json sweep_to_json(const SweepReport& report);
nlohmann::json eval_to_json(const EvalReport& e);
EvalReport eval_from_json(const nlohmann::json& j);

/// Writes `<dir>/report.json` and `<dir>/iterations.csv` (boot row plus one row per
/// iteration).
void write_report(const RunReport& report, const std::filesystem::path& dir);
RunReport read_report(const std::filesystem::path& json_path);

void write_sweep(const SweepReport& report, const std::filesystem::path& dir);

/// CSV row in the column order JC, FMI, NMI, ARI, ACC, DBI.
std::string eval_csv_row(const EvalReport& e);

/// Replays the promotion history stored in a report JSON and lists every violated
/// reliable-set constraint: strictly growing, inclusion-monotone chain; frozen labels
/// unchanged in the final labelling; consistent totals; delta schedule
/// delta, delta + small_delta, ... clamped at 1. Empty when the report is sound.
std::vector<std::string> replay_check(const nlohmann::json& report);

}  // namespace selfclust
