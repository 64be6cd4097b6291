#pragma once

#include "selfclust/rng.hpp"
#include "selfclust/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace selfclust {

/// N grayscale images of one common size, stored flattened row-major, one image per
/// row of `pixels`. Values lie in [0, 1].
struct Dataset {
    int height = 0;
    int width = 0;
    Matrix pixels;                       ///< N x (height * width)
    std::optional<Labels> true_labels;   ///< ground truth, evaluation only
    std::vector<std::string> names;

    int size() const { return static_cast<int>(pixels.rows()); }
    int dim() const { return height * width; }

    /// View of image `i` as a height x width matrix.
    Eigen::Map<const Matrix> image(int i) const {
        return Eigen::Map<const Matrix>(pixels.row(i).data(), height, width);
    }

    /// Number of distinct ground-truth classes (max label + 1), 0 without labels.
    int num_classes() const;

    /// Throws DataError if any structural invariant is broken.
    void validate() const;
};

/// Reads an IDX image file (magic 2051) and optional IDX label file (magic 2049).
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::optional<std::filesystem::path>& labels_path = std::nullopt);

/// Writes pixels quantized to bytes (round(255 * p)) and, when present, labels.
void write_mnist_idx(const Dataset& ds, const std::filesystem::path& images_path,
                     const std::optional<std::filesystem::path>& labels_path = std::nullopt);

/// Loads a class-per-subdirectory corpus of PGM (P5) or 8-bit grayscale PNG files.
/// Subdirectories sorted by name become labels 0, 1, ...; files within a directory
/// are read in name order. When `target` is set, every image is resized to it
/// (bilinear) before the size check.
Dataset load_image_dir(const std::filesystem::path& root,
                       std::optional<std::pair<int, int>> target = std::nullopt);

/// Binary P5 PGM with maxval 255.
Matrix read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Matrix& image);

/// k Gaussian blobs whose means are at least `separation` apart in the first
/// `dim_signal` coordinates, followed by `dim_noise` zero-mean noise coordinates.
/// Signal coordinates get Gaussian noise of std `noise_scale`, noise coordinates of
/// std `noise_ratio * noise_scale`. The
/// whole sample matrix is then mapped into [0, 1] by one global affine rescale, which
/// preserves every distance ratio. Emitted as 1 x (dim_signal + dim_noise) images.
Dataset gen_synth_blobs(int k, int per_class, int dim_signal, int dim_noise, double separation,
                        double noise_scale, SeededRng& rng, double noise_ratio = 1.0);

/// Reinterprets every image as height x width (same pixel count, row-major order).
Dataset reshape(const Dataset& ds, int height, int width);

/// Resamples every image to height x width. Bilinear, or nearest-neighbour when
/// `nearest` is set. This is the single size-normalization hook for corpora whose
/// images differ in size.
Dataset resize(const Dataset& ds, int height, int width, bool nearest = false);

/// Keeps the rows in `indices`, in that order.
Dataset subset(const Dataset& ds, const IndexList& indices);

/// CSV dataset: header `name,label,x0,...`, one sample per line. Label -1 means unknown.
/// Read back with the given image height (width = columns / height).
void write_csv_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_csv_dataset(const std::filesystem::path& path, int height = 1);

}  // namespace selfclust
