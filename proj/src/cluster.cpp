#include "selfclust/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace selfclust {

namespace {

void check_inputs(const Matrix& features, int k) {
    if (k < 2) throw std::invalid_argument("cluster: k must be at least 2");
    if (k > features.rows())
        throw std::invalid_argument("cluster: k=" + std::to_string(k) + " exceeds sample count " +
                                    std::to_string(features.rows()));
    if (!features.allFinite()) throw DataError("cluster: NaN or Inf in features");
}

double squared_sum(const std::vector<double>& d) {
    double s = 0;
    for (double v : d) s += v * v;
    return s;
}

ClusterModel lloyd(const Matrix& x, int k, Distance metric, SeededRng& rng, const KMeansOptions& opt) {
    const auto n = x.rows();
    ClusterModel model;
    model.method = ClusterMethod::kmeans;
    model.centroids.resize(k, x.cols());
    const auto seeds = kmeanspp_seeds(x, k, metric, rng);
    for (int c = 0; c < k; ++c) model.centroids.row(c) = x.row(seeds[c]);

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        auto [labels, dist] = assign(x, model.centroids, metric);
        model.labels = std::move(labels);
        model.distances = std::move(dist);
        model.objective_trace.push_back(squared_sum(model.distances));
        model.iterations = iter + 1;

        Matrix sums = Matrix::Zero(k, x.cols());
        std::vector<int> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(model.labels[i]) += x.row(i);
            ++counts[model.labels[i]];
        }
        Matrix next = model.centroids;
        std::vector<bool> taken(n, false);
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                next.row(c) = sums.row(c) / counts[c];
                continue;
            }
            // Empty cluster: move it onto the sample farthest from its own centroid.
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i)
                if (!taken[i] && (far < 0 || model.distances[i] > model.distances[far])) far = i;
            taken[far] = true;
            next.row(c) = x.row(far);
        }
        double shift = 0;
        for (int c = 0; c < k; ++c) shift = std::max(shift, (next.row(c) - model.centroids.row(c)).norm());
        model.centroids = std::move(next);
        if (shift < opt.tol) break;
    }
    auto [labels, dist] = assign(x, model.centroids, metric);
    model.labels = std::move(labels);
    model.distances = std::move(dist);
    const double final_objective = squared_sum(model.distances);
    if (final_objective != model.objective_trace.back()) model.objective_trace.push_back(final_objective);
    model.inertia = std::accumulate(model.distances.begin(), model.distances.end(), 0.0);
    return model;
}

double log_sum_exp(const Eigen::Ref<const RowVector>& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

ClusterMethod parse_cluster_method(std::string_view name) {
    if (name == "kmeans") return ClusterMethod::kmeans;
    if (name == "gmm") return ClusterMethod::gmm;
    throw std::invalid_argument("unknown clusterer: " + std::string(name));
}

std::string to_string(ClusterMethod m) {
    return m == ClusterMethod::gmm ? "gmm" : "kmeans";
}

std::pair<Labels, std::vector<double>> assign(const Matrix& features, const Matrix& centroids, Distance metric) {
    if (features.cols() != centroids.cols())
        throw std::invalid_argument("assign: dimension mismatch (" + std::to_string(features.cols()) + " vs " +
                                    std::to_string(centroids.cols()) + ")");
    if (centroids.rows() < 1) throw std::invalid_argument("assign: no centroids");
    const auto n = features.rows();
    Labels labels(n);
    std::vector<double> dist(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double d = distance(features.row(i), centroids.row(c), metric);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        labels[i] = best;
        dist[i] = best_d;
    }
    return {std::move(labels), std::move(dist)};
}

std::pair<Labels, std::vector<double>> assign(const FeatureMatrix& f, const ClusterModel& model, Distance metric) {
    return assign(f.data, model.centroids, metric);
}

IndexList kmeanspp_seeds(const Matrix& x, int k, Distance metric, SeededRng& rng) {
    check_inputs(x, k);
    const auto n = x.rows();
    IndexList seeds;
    seeds.push_back(static_cast<int>(rng.below(SeededRng::kInitCentroids, static_cast<std::uint64_t>(n))));
    std::vector<double> weight(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(seeds.size()) < k) {
        const auto last = x.row(seeds.back());
        double total = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = distance(x.row(i), last, metric);
            weight[i] = std::min(weight[i], d * d);
            total += weight[i];
        }
        int pick = -1;
        if (total > 0) {
            double target = rng.uniform(SeededRng::kInitCentroids) * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (weight[i] <= 0) continue;
                pick = static_cast<int>(i);
                target -= weight[i];
                if (target < 0) break;
            }
        } else {
            // Every sample coincides with a seed; take any sample not yet chosen.
            for (Eigen::Index i = 0; i < n && pick < 0; ++i)
                if (std::find(seeds.begin(), seeds.end(), static_cast<int>(i)) == seeds.end()) pick = static_cast<int>(i);
        }
        seeds.push_back(pick);
    }
    return seeds;
}

ClusterModel kmeans_fit(const FeatureMatrix& f, int k, Distance metric, SeededRng& rng, const KMeansOptions& opt) {
    check_inputs(f.data, k);
    if (opt.max_iter < 1) throw std::invalid_argument("kmeans_fit: max_iter must be >= 1");
    ClusterModel best;
    double best_objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, opt.restarts); ++r) {
        auto model = lloyd(f.data, k, metric, rng, opt);
        const double objective = model.objective_trace.back();
        if (objective < best_objective) {
            best_objective = objective;
            best = std::move(model);
        }
    }
    return best;
}

std::pair<Matrix, double> gmm_log_responsibilities(const Matrix& x, const GmmParams& p) {
    const auto n = x.rows();
    const auto k = p.means.rows();
    const auto dim = x.cols();
    Matrix log_resp(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double log_w = p.weights(c) > 0 ? std::log(p.weights(c)) : -std::numeric_limits<double>::infinity();
        const RowVector inv_var = p.variances.row(c).cwiseInverse();
        const double log_norm =
            -0.5 * (dim * std::log(2 * std::numbers::pi) + p.variances.row(c).array().log().sum());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double maha = (x.row(i) - p.means.row(c)).array().square().matrix().dot(inv_var);
            log_resp(i, c) = log_w + log_norm - 0.5 * maha;
        }
    }
    double ll = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lse = log_sum_exp(log_resp.row(i));
        ll += lse;
        log_resp.row(i).array() -= lse;
    }
    return {std::move(log_resp), ll};
}

std::pair<ClusterModel, GmmParams> gmm_fit(const FeatureMatrix& f, int k, SeededRng& rng, const GmmOptions& opt) {
    check_inputs(f.data, k);
    if (opt.max_iter < 1) throw std::invalid_argument("gmm_fit: max_iter must be >= 1");
    const Matrix& x = f.data;
    const auto n = x.rows();
    const auto dim = x.cols();

    const auto init = kmeans_fit(f, k, Distance::euclidean, rng, opt.init);
    GmmParams p;
    p.weights = Vector::Zero(k);
    p.means = init.centroids;
    p.variances = Matrix::Zero(k, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = init.labels[i];
        p.weights(c) += 1;
        p.variances.row(c) += (x.row(i) - p.means.row(c)).array().square().matrix();
    }
    for (int c = 0; c < k; ++c) {
        if (p.weights(c) > 0) p.variances.row(c) /= p.weights(c);
    }
    p.variances = p.variances.cwiseMax(opt.variance_floor);
    p.weights /= static_cast<double>(n);

    Matrix log_resp;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        auto [lr, ll] = gmm_log_responsibilities(x, p);
        log_resp = std::move(lr);
        const bool converged = !p.log_likelihood_trace.empty() && ll - p.log_likelihood_trace.back() < opt.tol;
        p.log_likelihood_trace.push_back(ll);
        if (converged) break;

        // M-step. Clamping each diagonal variance at the floor is the exact constrained
        // maximiser, so the likelihood stays monotone.
        const Matrix resp = log_resp.array().exp();
        const Vector nk = resp.colwise().sum().transpose();
        for (int c = 0; c < k; ++c) {
            if (nk(c) <= std::numeric_limits<double>::min()) {
                p.weights(c) = 0;
                continue;
            }
            const RowVector mean = (resp.col(c).transpose() * x) / nk(c);
            RowVector var = RowVector::Zero(dim);
            for (Eigen::Index i = 0; i < n; ++i) var += resp(i, c) * (x.row(i) - mean).array().square().matrix();
            p.means.row(c) = mean;
            p.variances.row(c) = (var / nk(c)).cwiseMax(opt.variance_floor);
            p.weights(c) = nk(c) / static_cast<double>(n);
        }
        p.weights /= p.weights.sum();
        if (iter + 1 == opt.max_iter) {
            auto [lr_final, ll_final] = gmm_log_responsibilities(x, p);
            log_resp = std::move(lr_final);
            p.log_likelihood_trace.push_back(ll_final);
        }
    }

    ClusterModel model;
    model.method = ClusterMethod::gmm;
    model.centroids = p.means;
    model.labels.resize(n);
    model.distances.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        log_resp.row(i).maxCoeff(&best);
        model.labels[i] = static_cast<int>(best);
        model.distances[i] = (x.row(i) - p.means.row(best)).norm();
    }
    model.inertia = std::accumulate(model.distances.begin(), model.distances.end(), 0.0);
    model.iterations = static_cast<int>(p.log_likelihood_trace.size());
    model.objective_trace.push_back(squared_sum(model.distances));
    return {std::move(model), std::move(p)};
}

}  // namespace selfclust
