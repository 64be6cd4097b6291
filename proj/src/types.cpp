#include "selfclust/types.hpp"

namespace selfclust {

Distance parse_distance(std::string_view name) {
    if (name == "euclidean") return Distance::euclidean;
    if (name == "cityblock") return Distance::cityblock;
    if (name == "chessboard") return Distance::chessboard;
    throw std::invalid_argument("unknown distance metric: " + std::string(name));
}

std::string to_string(Distance d) {
    switch (d) {
        case Distance::cityblock: return "cityblock";
        case Distance::chessboard: return "chessboard";
        case Distance::euclidean:
        default: return "euclidean";
    }
}

}  // namespace selfclust
