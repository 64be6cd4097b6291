#pragma once

#include "selfclust/dataset.hpp"
#include "selfclust/types.hpp"

#include <filesystem>
#include <string>

namespace selfclust {

/// One feature row per sample.
struct FeatureMatrix {
    Matrix data;
    std::string feature_name;

    int rows() const { return static_cast<int>(data.rows()); }
    int dim() const { return static_cast<int>(data.cols()); }
};

/// Boot-stage feature families.
enum class BootFeature { raw, hog, gabor, raw_pca };

BootFeature parse_boot_feature(std::string_view name);
std::string to_string(BootFeature f);

struct HogParams {
    int cell = 7;   ///< cell side in pixels
    int block = 2;  ///< block side in cells
    int bins = 9;   ///< unsigned orientation bins over [0, pi)
    double epsilon = 1e-3;
};

struct GaborParams {
    int scales = 4;
    int orients = 6;
    double min_wavelength = 3.0;  ///< wavelength of the finest scale, in pixels
    double scale_step = 1.4142135623730951;
    double sigma_ratio = 0.56;    ///< Gaussian sigma / wavelength (about one octave bandwidth)
    double aspect = 0.5;          ///< envelope aspect ratio across the carrier
    double radius_sigmas = 2.0;   ///< kernel half-size, in sigmas
};

FeatureMatrix extract_raw(const Dataset& ds);

/// Dalal-Triggs HOG: central-difference gradients, unsigned orientation histograms per
/// cell with linear interpolation between neighbouring bin centres (bin b is centred
/// at b * pi / bins), overlapping blocks with stride one cell, L2 normalization
/// v / sqrt(|v|^2 + eps^2).
FeatureMatrix extract_hog(const Dataset& ds, const HogParams& params = {});

/// Magnitude of each pixel's gradient per orientation bin, before cell pooling or
/// normalization. Returned as height x width x bins, flattened (pixel-major).
std::vector<double> hog_orientation_votes(const Matrix& image, int bins);

/// One complex Gabor filter of the bank, zero-DC and unit L2 norm.
struct GaborKernel {
    double wavelength = 0;
    double theta = 0;
    Matrix real;
    Matrix imag;
};

/// Filters ordered scale-major: index = scale * orients + orient.
std::vector<GaborKernel> gabor_bank(const GaborParams& params);

/// For each filter: mean and standard deviation of |response| over all positions
/// where the kernel fits inside the image. D = 2 * scales * orients, laid out
/// [mean_0, std_0, mean_1, std_1, ...].
FeatureMatrix extract_gabor(const Dataset& ds, const GaborParams& params = {});

struct PcaModel {
    RowVector mean;
    Matrix components;   ///< d x D, orthonormal rows
    Vector explained_variance;

    int input_dim() const { return static_cast<int>(mean.size()); }
    int output_dim() const { return static_cast<int>(components.rows()); }
};

/// Principal directions of the mean-centred rows (thin SVD). Variances use the N - 1
/// divisor. Each component is signed so its largest-magnitude coefficient is positive.
PcaModel fit_pca(const FeatureMatrix& f, int d);
FeatureMatrix apply_pca(const PcaModel& model, const FeatureMatrix& f);

/// Default target dimension for raw_pca: min(50, N - 1), at least 1.
int default_pca_dim(int n_samples, int input_dim);

struct FeatureOptions {
    HogParams hog;
    GaborParams gabor;
    int pca_dim = 0;  ///< 0 selects default_pca_dim
};

/// Dispatches to the extractor for `kind`.
FeatureMatrix extract_boot_features(const Dataset& ds, BootFeature kind, const FeatureOptions& options = {});

/// First line `<feature_name>,<dim>`, then one `name,v0,...` row per sample.
void write_feature_csv(const FeatureMatrix& f, const std::vector<std::string>& names,
                       const std::filesystem::path& path);
FeatureMatrix read_feature_csv(const std::filesystem::path& path, std::vector<std::string>* names = nullptr);

}  // namespace selfclust
