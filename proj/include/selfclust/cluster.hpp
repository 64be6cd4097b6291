#pragma once

#include "selfclust/features.hpp"
#include "selfclust/rng.hpp"
#include "selfclust/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace selfclust {

enum class ClusterMethod { kmeans, gmm };

ClusterMethod parse_cluster_method(std::string_view name);
std::string to_string(ClusterMethod m);

/// Centroids, assignments and per-sample distances of one clustering.
struct ClusterModel {
    Matrix centroids;            ///< K x D
    Labels labels;               ///< N, in [0, K)
    std::vector<double> distances;
    double inertia = 0;          ///< sum of `distances`
    ClusterMethod method = ClusterMethod::kmeans;
    /// Lloyd objective (sum of squared assignment distances) after each iteration of
    /// the winning restart. Nonincreasing for the Euclidean metric.
    std::vector<double> objective_trace;
    int iterations = 0;

    int k() const { return static_cast<int>(centroids.rows()); }
};

struct GmmParams {
    Vector weights;     ///< K, sums to 1
    Matrix means;       ///< K x D
    Matrix variances;   ///< K x D, diagonal covariances, each >= variance floor
    std::vector<double> log_likelihood_trace;
};

struct KMeansOptions {
    int max_iter = 100;
    double tol = 1e-6;
    int restarts = 3;
};

struct GmmOptions {
    int max_iter = 100;
    double tol = 1e-6;
    double variance_floor = 1e-6;
    KMeansOptions init;
};

/// Nearest-centroid labels and distances. Ties go to the lower centroid index.
std::pair<Labels, std::vector<double>> assign(const Matrix& features, const Matrix& centroids, Distance metric);
std::pair<Labels, std::vector<double>> assign(const FeatureMatrix& f, const ClusterModel& model, Distance metric);

/// Lloyd's algorithm with k-means++ seeding. Assignment uses `metric`, the update
/// step takes member means. An empty cluster is re-seeded with the sample farthest
/// from its current centroid. The best of `restarts` runs (lowest Lloyd objective)
/// is returned.
ClusterModel kmeans_fit(const FeatureMatrix& f, int k, Distance metric, SeededRng& rng,
                        const KMeansOptions& options = {});

/// k-means++ seeding: indices of the k chosen samples.
IndexList kmeanspp_seeds(const Matrix& features, int k, Distance metric, SeededRng& rng);

/// Diagonal-covariance EM initialised from a Euclidean k-means fit. Responsibilities
/// are computed in log space; labels are the argmax responsibility and distances are
/// Euclidean distances to the assigned component mean.
std::pair<ClusterModel, GmmParams> gmm_fit(const FeatureMatrix& f, int k, SeededRng& rng,
                                           const GmmOptions& options = {});

/// Per-sample log responsibilities (N x K) and the total log-likelihood.
std::pair<Matrix, double> gmm_log_responsibilities(const Matrix& features, const GmmParams& params);

}  // namespace selfclust
