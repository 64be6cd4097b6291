#include "selfclust/learner.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace selfclust {

namespace {

Matrix standardize(const LearnerModel& m, const Matrix& inputs) {
    if (inputs.cols() != m.input_dim())
        throw std::invalid_argument("learner: input dimension " + std::to_string(inputs.cols()) +
                                    " does not match model dimension " + std::to_string(m.input_dim()));
    return (inputs.rowwise() - m.input_mean).array().rowwise() / m.input_scale.array();
}

Matrix hidden_from_standardized(const LearnerModel& m, const Matrix& z) {
    Matrix pre = z * m.w1.transpose();
    pre.rowwise() += m.b1.transpose();
    return pre.cwiseMax(0.0);
}

double decay_term(const LearnerModel& m, double weight_decay) {
    return 0.5 * weight_decay * (m.w1.squaredNorm() + m.w2.squaredNorm());
}

void check_finite(const LearnerModel& m) {
    if (!m.w1.allFinite() || !m.b1.allFinite() || !m.w2.allFinite() || !m.b2.allFinite())
        throw std::runtime_error("learner: training diverged (non-finite parameters)");
}

std::vector<double> to_vec(const auto& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

}  // namespace

std::pair<double, LearnerGradients> loss_and_gradient(const LearnerModel& m, const Matrix& inputs, const Labels& labels,
                                                      const std::vector<double>& weights, double weight_decay) {
    const auto n = inputs.rows();
    if (labels.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("learner: one label per sample");
    const Matrix z = standardize(m, inputs);
    const Matrix h = hidden_from_standardized(m, z);
    Matrix out = h * m.w2.transpose();
    out.rowwise() += m.b2.transpose();

    double total_weight = 0;
    for (Eigen::Index i = 0; i < n; ++i) total_weight += weights.empty() ? 1.0 : weights[i];

    double loss = 0;
    Matrix d_out(n, m.classes());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = (weights.empty() ? 1.0 : weights[i]) / total_weight;
        const double mx = out.row(i).maxCoeff();
        const RowVector e = (out.row(i).array() - mx).exp();
        const double s = e.sum();
        loss -= w * (out(i, labels[i]) - mx - std::log(s));
        d_out.row(i) = w * e / s;
        d_out(i, labels[i]) -= w;
    }
    loss += decay_term(m, weight_decay);

    LearnerGradients g;
    g.w2 = d_out.transpose() * h + weight_decay * m.w2;
    g.b2 = d_out.colwise().sum().transpose();
    const Matrix d_hidden = (d_out * m.w2).cwiseProduct((h.array() > 0.0).cast<double>().matrix());
    g.w1 = d_hidden.transpose() * z + weight_decay * m.w1;
    g.b1 = d_hidden.colwise().sum().transpose();
    return {loss, std::move(g)};
}

LearnerModel init_learner(const Matrix& inputs, int k, const LearnerHyper& hyper, SeededRng& rng) {
    if (k < 2) throw std::invalid_argument("learner: k must be >= 2");
    if (inputs.rows() < 1) throw std::invalid_argument("learner: empty training set");
    if (hyper.hidden < 1) throw std::invalid_argument("learner: hidden width must be positive");
    const auto dim = inputs.cols();
    LearnerModel m;
    m.input_mean = inputs.colwise().mean();
    const RowVector var = (inputs.rowwise() - m.input_mean).array().square().colwise().mean();
    m.input_scale = var.cwiseSqrt().cwiseMax(hyper.min_std);

    auto uniform_init = [&](Matrix& w, Eigen::Index rows, Eigen::Index cols) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        w.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                w(r, c) = limit * (2.0 * rng.uniform(SeededRng::kInitWeights) - 1.0);
    };
    uniform_init(m.w1, hyper.hidden, dim);
    uniform_init(m.w2, k, hyper.hidden);
    m.b1 = Vector::Zero(hyper.hidden);
    m.b2 = Vector::Zero(k);
    return m;
}

LearnerModel train(const TrainSet& ts, int k, const std::optional<LearnerModel>& init, const LearnerHyper& hyper,
                   SeededRng& rng) {
    if (k < 2) throw std::invalid_argument("learner: k must be >= 2");
    if (ts.size() == 0) throw std::invalid_argument("learner: empty training set");
    if (ts.size() < k) throw std::invalid_argument("learner: fewer training samples than classes");
    if (ts.labels.size() != static_cast<std::size_t>(ts.size()))
        throw std::invalid_argument("learner: one label per training sample");
    if (!ts.weights.empty() && ts.weights.size() != ts.labels.size())
        throw std::invalid_argument("learner: one weight per training sample");
    for (int l : ts.labels)
        if (l < 0 || l >= k) throw std::invalid_argument("learner: label out of range");
    if (hyper.epochs < 0 || hyper.batch_size < 1) throw std::invalid_argument("learner: bad hyperparameters");

    LearnerModel m = init ? *init : init_learner(ts.inputs, k, hyper, rng);
    if (init) {
        if (m.classes() != k) throw std::invalid_argument("learner: warm-start model has a different class count");
        if (hyper.epochs == 0) return m;
    }
    m.initial_loss = loss_and_gradient(m, ts.inputs, ts.labels, ts.weights, hyper.weight_decay).first;
    m.loss_trace.clear();

    LearnerGradients velocity{Matrix::Zero(m.w1.rows(), m.w1.cols()), Vector::Zero(m.b1.size()),
                              Matrix::Zero(m.w2.rows(), m.w2.cols()), Vector::Zero(m.b2.size())};
    IndexList order(ts.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        shuffle(order, rng, SeededRng::kShuffling);
        for (int start = 0; start < ts.size(); start += hyper.batch_size) {
            const int stop = std::min(ts.size(), start + hyper.batch_size);
            Matrix batch(stop - start, ts.inputs.cols());
            Labels labels(stop - start);
            std::vector<double> weights;
            for (int r = start; r < stop; ++r) {
                batch.row(r - start) = ts.inputs.row(order[r]);
                labels[r - start] = ts.labels[order[r]];
                if (!ts.weights.empty()) weights.push_back(ts.weights[order[r]]);
            }
            const auto [loss, g] = loss_and_gradient(m, batch, labels, weights, hyper.weight_decay);
            velocity.w1 = hyper.momentum * velocity.w1 - hyper.learning_rate * g.w1;
            velocity.b1 = hyper.momentum * velocity.b1 - hyper.learning_rate * g.b1;
            velocity.w2 = hyper.momentum * velocity.w2 - hyper.learning_rate * g.w2;
            velocity.b2 = hyper.momentum * velocity.b2 - hyper.learning_rate * g.b2;
            m.w1 += velocity.w1;
            m.b1 += velocity.b1;
            m.w2 += velocity.w2;
            m.b2 += velocity.b2;
        }
        check_finite(m);
        m.loss_trace.push_back(loss_and_gradient(m, ts.inputs, ts.labels, ts.weights, hyper.weight_decay).first);
    }
    return m;
}

bool identical(const LearnerModel& a, const LearnerModel& b) {
    auto same = [](const auto& x, const auto& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() &&
               std::equal(x.data(), x.data() + x.size(), y.data());
    };
    return same(a.input_mean, b.input_mean) && same(a.input_scale, b.input_scale) && same(a.w1, b.w1) &&
           same(a.b1, b.b1) && same(a.w2, b.w2) && same(a.b2, b.b2) && a.initial_loss == b.initial_loss &&
           a.loss_trace == b.loss_trace;
}

Matrix features(const LearnerModel& model, const Matrix& inputs) {
    return hidden_from_standardized(model, standardize(model, inputs));
}

Matrix logits(const LearnerModel& model, const Matrix& inputs) {
    Matrix out = features(model, inputs) * model.w2.transpose();
    out.rowwise() += model.b2.transpose();
    return out;
}

Labels predict(const LearnerModel& model, const Matrix& inputs) {
    const Matrix out = logits(model, inputs);
    Labels labels(out.rows());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        int best = 0;
        for (Eigen::Index c = 1; c < out.cols(); ++c)
            if (out(i, c) > out(i, best)) best = static_cast<int>(c);
        labels[i] = best;
    }
    return labels;
}

void save_learner(const LearnerModel& m, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "selfclust-learner";
    j["version"] = 1;
    j["input_dim"] = m.input_dim();
    j["hidden"] = m.hidden();
    j["classes"] = m.classes();
    j["input_mean"] = to_vec(m.input_mean);
    j["input_scale"] = to_vec(m.input_scale);
    j["w1"] = to_vec(m.w1);
    j["b1"] = to_vec(m.b1);
    j["w2"] = to_vec(m.w2);
    j["b2"] = to_vec(m.b2);
    j["initial_loss"] = m.initial_loss;
    j["loss_trace"] = m.loss_trace;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << j.dump();
}

LearnerModel load_learner(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed learner checkpoint: ") + e.what());
    }
    if (j.value("format", "") != "selfclust-learner" || j.value("version", 0) != 1)
        throw DataError("unsupported learner checkpoint format");

    const int dim = j.at("input_dim");
    const int hidden = j.at("hidden");
    const int classes = j.at("classes");
    auto read = [&](const char* key, auto& target, Eigen::Index rows, Eigen::Index cols) {
        const auto values = j.at(key).get<std::vector<double>>();
        if (values.size() != static_cast<std::size_t>(rows * cols))
            throw DataError(std::string("checkpoint field has wrong size: ") + key);
        target.resize(rows, cols);
        std::copy(values.begin(), values.end(), target.data());
    };
    LearnerModel m;
    read("input_mean", m.input_mean, 1, dim);
    read("input_scale", m.input_scale, 1, dim);
    read("w1", m.w1, hidden, dim);
    read("b1", m.b1, hidden, 1);
    read("w2", m.w2, classes, hidden);
    read("b2", m.b2, classes, 1);
    m.initial_loss = j.at("initial_loss");
    m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    return m;
}

}  // namespace selfclust
