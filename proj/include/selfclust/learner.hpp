#pragma once

#include "selfclust/rng.hpp"
#include "selfclust/types.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace selfclust {

struct LearnerHyper {
    int hidden = 128;
    int epochs = 20;
    double learning_rate = 0.05;
    int batch_size = 32;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    /// Lower bound on the per-dimension scale used for input standardization.
    double min_std = 1.0;
};

/// One-hidden-layer rectifier network with a softmax output. The hidden activations
/// serve as learned features.
struct LearnerModel {
    RowVector input_mean;   ///< standardization, fitted on the first training set
    RowVector input_scale;
    Matrix w1;              ///< hidden x input
    Vector b1;
    Matrix w2;              ///< classes x hidden
    Vector b2;
    double initial_loss = 0;         ///< training objective before the last train() call
    std::vector<double> loss_trace;  ///< training objective after each epoch of that call

    int input_dim() const { return static_cast<int>(w1.cols()); }
    int hidden() const { return static_cast<int>(w1.rows()); }
    int classes() const { return static_cast<int>(w2.rows()); }
};

/// True when every parameter, standardization entry and trace value is bit-identical.
bool identical(const LearnerModel& a, const LearnerModel& b);

struct TrainSet {
    Matrix inputs;                 ///< one row per sample, unstandardized
    Labels labels;                 ///< in [0, K)
    std::vector<double> weights;   ///< empty means all ones

    int size() const { return static_cast<int>(inputs.rows()); }
};

struct LearnerGradients {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

/// Mean weighted softmax cross-entropy plus (weight_decay / 2) * (|w1|^2 + |w2|^2),
/// and its exact gradient.
std::pair<double, LearnerGradients> loss_and_gradient(const LearnerModel& model, const Matrix& inputs,
                                                      const Labels& labels, const std::vector<double>& weights,
                                                      double weight_decay);

/// Randomly initialised model whose standardization is fitted on `inputs`.
LearnerModel init_learner(const Matrix& inputs, int k, const LearnerHyper& hyper, SeededRng& rng);

/// Mini-batch gradient descent with momentum. With `init` the parameters and
/// standardization start from it (warm start); otherwise from init_learner.
LearnerModel train(const TrainSet& ts, int k, const std::optional<LearnerModel>& init, const LearnerHyper& hyper,
                   SeededRng& rng);

/// Hidden-layer activations, N x hidden.
Matrix features(const LearnerModel& model, const Matrix& inputs);

/// Output logits, N x K.
Matrix logits(const LearnerModel& model, const Matrix& inputs);

/// Argmax of the logits, ties to the lower class index.
Labels predict(const LearnerModel& model, const Matrix& inputs);

void save_learner(const LearnerModel& model, const std::filesystem::path& path);
LearnerModel load_learner(const std::filesystem::path& path);

}  // namespace selfclust
