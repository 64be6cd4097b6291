#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfclust {

/// Row-major so one row is one sample and rows can be handed out as spans.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Labels = std::vector<int>;
using IndexList = std::vector<int>;

/// Malformed or inconsistent input data (files, label vectors, feature shapes).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A runtime check of an algorithmic invariant failed.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Distance { euclidean, cityblock, chessboard };

Distance parse_distance(std::string_view name);
std::string to_string(Distance d);

/// Distance between two equally sized row vectors under `metric`.
template <typename A, typename B>
double distance(const A& a, const B& b, Distance metric) {
    switch (metric) {
        case Distance::cityblock:
            return (a - b).cwiseAbs().sum();
        case Distance::chessboard:
            return (a - b).cwiseAbs().maxCoeff();
        case Distance::euclidean:
        default:
            return (a - b).norm();
    }
}

}  // namespace selfclust
