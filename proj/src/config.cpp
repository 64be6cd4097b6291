#include "selfclust/config.hpp"

#include <fstream>

namespace selfclust {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

std::optional<std::pair<int, int>> read_shape(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const auto v = j.at(key).get<std::vector<int>>();
    if (v.size() != 2) throw std::invalid_argument(std::string(key) + " must be [height, width]");
    return std::make_pair(v[0], v[1]);
}

}  // namespace

void RunConfig::validate() const {
    if (k < 2) throw std::invalid_argument("config: k must be >= 2");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("config: delta must be in (0, 1]");
    if (!(small_delta >= 0.0 && small_delta <= 1.0)) throw std::invalid_argument("config: small_delta must be in [0, 1]");
    if (k_max < 0) throw std::invalid_argument("config: k_max must be >= 0");
    if (learner.hidden < 1 || learner.epochs < 0 || learner.batch_size < 1 || !(learner.learning_rate > 0))
        throw std::invalid_argument("config: invalid learner hyperparameters");
    if (kmeans.max_iter < 1 || gmm.max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
}

void to_json(json& j, const RunConfig& c) {
    j = json{
        {"k", c.k},
        {"delta", c.delta},
        {"small_delta", c.small_delta},
        {"k_max", c.k_max},
        {"boot_feature", to_string(c.boot_feature)},
        {"clusterer", to_string(c.clusterer)},
        {"distance", to_string(c.distance)},
        {"learner_input", c.learner_input == LearnerInput::boot ? "boot" : "raw"},
        {"seed", c.seed},
        {"learner",
         {{"hidden", c.learner.hidden},
          {"epochs", c.learner.epochs},
          {"learning_rate", c.learner.learning_rate},
          {"batch_size", c.learner.batch_size},
          {"momentum", c.learner.momentum},
          {"weight_decay", c.learner.weight_decay},
          {"min_std", c.learner.min_std}}},
        {"hog",
         {{"cell", c.features.hog.cell}, {"block", c.features.hog.block}, {"bins", c.features.hog.bins},
          {"epsilon", c.features.hog.epsilon}}},
        {"gabor",
         {{"scales", c.features.gabor.scales},
          {"orients", c.features.gabor.orients},
          {"min_wavelength", c.features.gabor.min_wavelength},
          {"scale_step", c.features.gabor.scale_step},
          {"sigma_ratio", c.features.gabor.sigma_ratio},
          {"aspect", c.features.gabor.aspect},
          {"radius_sigmas", c.features.gabor.radius_sigmas}}},
        {"pca_dim", c.features.pca_dim},
        {"kmeans", {{"max_iter", c.kmeans.max_iter}, {"tol", c.kmeans.tol}, {"restarts", c.kmeans.restarts}}},
        {"gmm", {{"max_iter", c.gmm.max_iter}, {"tol", c.gmm.tol}, {"variance_floor", c.gmm.variance_floor}}},
    };
}

void from_json(const json& j, RunConfig& c) {
    read_opt(j, "k", c.k);
    read_opt(j, "delta", c.delta);
    read_opt(j, "small_delta", c.small_delta);
    read_opt(j, "k_max", c.k_max);
    read_opt(j, "seed", c.seed);
    if (j.contains("boot_feature")) c.boot_feature = parse_boot_feature(j.at("boot_feature").get<std::string>());
    if (j.contains("clusterer")) c.clusterer = parse_cluster_method(j.at("clusterer").get<std::string>());
    if (j.contains("distance")) c.distance = parse_distance(j.at("distance").get<std::string>());
    if (j.contains("learner_input")) {
        const auto v = j.at("learner_input").get<std::string>();
        if (v != "raw" && v != "boot") throw std::invalid_argument("learner_input must be raw or boot");
        c.learner_input = v == "boot" ? LearnerInput::boot : LearnerInput::raw;
    }
    if (j.contains("learner")) {
        const auto& l = j.at("learner");
        read_opt(l, "hidden", c.learner.hidden);
        read_opt(l, "epochs", c.learner.epochs);
        read_opt(l, "learning_rate", c.learner.learning_rate);
        read_opt(l, "batch_size", c.learner.batch_size);
        read_opt(l, "momentum", c.learner.momentum);
        read_opt(l, "weight_decay", c.learner.weight_decay);
        read_opt(l, "min_std", c.learner.min_std);
    }
    if (j.contains("hog")) {
        const auto& h = j.at("hog");
        read_opt(h, "cell", c.features.hog.cell);
        read_opt(h, "block", c.features.hog.block);
        read_opt(h, "bins", c.features.hog.bins);
        read_opt(h, "epsilon", c.features.hog.epsilon);
    }
    if (j.contains("gabor")) {
        const auto& g = j.at("gabor");
        read_opt(g, "scales", c.features.gabor.scales);
        read_opt(g, "orients", c.features.gabor.orients);
        read_opt(g, "min_wavelength", c.features.gabor.min_wavelength);
        read_opt(g, "scale_step", c.features.gabor.scale_step);
        read_opt(g, "sigma_ratio", c.features.gabor.sigma_ratio);
        read_opt(g, "aspect", c.features.gabor.aspect);
        read_opt(g, "radius_sigmas", c.features.gabor.radius_sigmas);
    }
    read_opt(j, "pca_dim", c.features.pca_dim);
    if (j.contains("kmeans")) {
        const auto& k = j.at("kmeans");
        read_opt(k, "max_iter", c.kmeans.max_iter);
        read_opt(k, "tol", c.kmeans.tol);
        read_opt(k, "restarts", c.kmeans.restarts);
    }
    if (j.contains("gmm")) {
        const auto& g = j.at("gmm");
        read_opt(g, "max_iter", c.gmm.max_iter);
        read_opt(g, "tol", c.gmm.tol);
        read_opt(g, "variance_floor", c.gmm.variance_floor);
    }
    c.gmm.init = c.kmeans;
}

void to_json(json& j, const DatasetSpec& s) {
    j = json{{"type", s.type}};
    if (s.type == "idx") {
        j["images"] = s.images.string();
        if (s.labels) j["labels"] = s.labels->string();
    } else if (s.type == "dir") {
        j["root"] = s.root.string();
    } else if (s.type == "csv") {
        j["path"] = s.path.string();
        j["height"] = s.csv_height;
    } else {
        j["k"] = s.synth_k;
        j["per_class"] = s.synth_per_class;
        j["dim_signal"] = s.synth_dim_signal;
        j["dim_noise"] = s.synth_dim_noise;
        j["separation"] = s.synth_separation;
        j["noise_scale"] = s.synth_noise_scale;
        j["seed"] = s.synth_seed;
    }
    if (s.reshape) j["reshape"] = {s.reshape->first, s.reshape->second};
    if (s.resize) j["resize"] = {s.resize->first, s.resize->second};
    if (s.resize_nearest) j["resize_nearest"] = true;
}

void from_json(const json& j, DatasetSpec& s) {
    read_opt(j, "type", s.type);
    if (j.contains("images")) s.images = j.at("images").get<std::string>();
    if (j.contains("labels")) s.labels = std::filesystem::path(j.at("labels").get<std::string>());
    if (j.contains("root")) s.root = j.at("root").get<std::string>();
    if (j.contains("path")) s.path = j.at("path").get<std::string>();
    read_opt(j, "height", s.csv_height);
    read_opt(j, "k", s.synth_k);
    read_opt(j, "per_class", s.synth_per_class);
    read_opt(j, "dim_signal", s.synth_dim_signal);
    read_opt(j, "dim_noise", s.synth_dim_noise);
    read_opt(j, "separation", s.synth_separation);
    read_opt(j, "noise_scale", s.synth_noise_scale);
    read_opt(j, "seed", s.synth_seed);
    s.reshape = read_shape(j, "reshape");
    s.resize = read_shape(j, "resize");
    read_opt(j, "resize_nearest", s.resize_nearest);
}

Dataset load_dataset(const DatasetSpec& spec) {
    Dataset ds;
    if (spec.type == "idx") {
        ds = load_mnist_idx(spec.images, spec.labels);
    } else if (spec.type == "dir") {
        ds = load_image_dir(spec.root, spec.resize);
    } else if (spec.type == "csv") {
        ds = load_csv_dataset(spec.path, spec.csv_height);
    } else if (spec.type == "synth") {
        SeededRng rng(spec.synth_seed);
        ds = gen_synth_blobs(spec.synth_k, spec.synth_per_class, spec.synth_dim_signal, spec.synth_dim_noise,
                             spec.synth_separation, spec.synth_noise_scale, rng);
    } else {
        throw std::invalid_argument("unknown dataset type: " + spec.type);
    }
    if (spec.reshape) ds = reshape(ds, spec.reshape->first, spec.reshape->second);
    if (spec.resize && spec.type != "dir") ds = resize(ds, spec.resize->first, spec.resize->second, spec.resize_nearest);
    return ds;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config JSON: ") + e.what());
    }
    ConfigFile cfg;
    try {
        cfg.run = j.get<RunConfig>();
        if (j.contains("dataset")) cfg.dataset = j.at("dataset").get<DatasetSpec>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("invalid config field: ") + e.what());
    }
    cfg.run.validate();
    return cfg;
}

}  // namespace selfclust
