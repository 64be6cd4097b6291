#pragma once

#include "selfclust/cluster.hpp"
#include "selfclust/dataset.hpp"
#include "selfclust/features.hpp"
#include "selfclust/learner.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace selfclust {

/// What the learner sees as input: flattened pixels, or the boot features.
enum class LearnerInput { raw, boot };

struct RunConfig {
    int k = 10;
    double delta = 0.2;        ///< initial belief ratio
    double small_delta = 0.1;  ///< per-iteration relaxation of delta
    int k_max = 10;
    BootFeature boot_feature = BootFeature::raw;
    ClusterMethod clusterer = ClusterMethod::kmeans;
    Distance distance = Distance::euclidean;
    LearnerHyper learner;
    LearnerInput learner_input = LearnerInput::raw;
    FeatureOptions features;
    KMeansOptions kmeans;
    GmmOptions gmm;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

/// Where a run's samples come from, plus optional shape normalization.
struct DatasetSpec {
    std::string type = "synth";  ///< idx | dir | csv | synth
    std::filesystem::path images;
    std::optional<std::filesystem::path> labels;
    std::filesystem::path root;
    std::filesystem::path path;
    int csv_height = 1;

    int synth_k = 3;
    int synth_per_class = 100;
    int synth_dim_signal = 5;
    int synth_dim_noise = 20;
    double synth_separation = 4.0;
    double synth_noise_scale = 1.0;
    std::uint64_t synth_seed = 0;

    std::optional<std::pair<int, int>> reshape;
    std::optional<std::pair<int, int>> resize;
    bool resize_nearest = false;
};

Dataset load_dataset(const DatasetSpec& spec);

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
void to_json(nlohmann::json& j, const DatasetSpec& s);
void from_json(const nlohmann::json& j, DatasetSpec& s);

/// A config file: RunConfig fields at top level plus an optional "dataset" object.
struct ConfigFile {
    RunConfig run;
    DatasetSpec dataset;
};

ConfigFile load_config(const std::filesystem::path& path);

}  // namespace selfclust
