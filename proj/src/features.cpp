#include "selfclust/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <numbers>

namespace selfclust {

BootFeature parse_boot_feature(std::string_view name) {
    if (name == "raw") return BootFeature::raw;
    if (name == "hog") return BootFeature::hog;
    if (name == "gabor") return BootFeature::gabor;
    if (name == "raw_pca") return BootFeature::raw_pca;
    throw std::invalid_argument("unknown boot feature: " + std::string(name));
}

std::string to_string(BootFeature f) {
    switch (f) {
        case BootFeature::hog: return "hog";
        case BootFeature::gabor: return "gabor";
        case BootFeature::raw_pca: return "raw_pca";
        case BootFeature::raw:
        default: return "raw";
    }
}

FeatureMatrix extract_raw(const Dataset& ds) {
    return {ds.pixels, "raw"};
}

std::vector<double> hog_orientation_votes(const Matrix& image, int bins) {
    const auto h = static_cast<int>(image.rows());
    const auto w = static_cast<int>(image.cols());
    const double bin_width = std::numbers::pi / bins;
    std::vector<double> votes(static_cast<std::size_t>(h) * w * bins, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // [-1, 0, 1] with replicated borders
            const double gx = image(y, std::min(x + 1, w - 1)) - image(y, std::max(x - 1, 0));
            const double gy = image(std::min(y + 1, h - 1), x) - image(std::max(y - 1, 0), x);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx);
            if (angle < 0) angle += std::numbers::pi;
            if (angle >= std::numbers::pi) angle -= std::numbers::pi;
            const double pos = angle / bin_width;
            const int lo = static_cast<int>(std::floor(pos)) % bins;
            const int hi = (lo + 1) % bins;
            const double frac = pos - std::floor(pos);
            double* cell = votes.data() + (static_cast<std::size_t>(y) * w + x) * bins;
            cell[lo] += mag * (1.0 - frac);
            cell[hi] += mag * frac;
        }
    }
    return votes;
}

FeatureMatrix extract_hog(const Dataset& ds, const HogParams& p) {
    if (p.cell < 1 || p.block < 1 || p.bins < 1) throw std::invalid_argument("extract_hog: parameters must be positive");
    if (ds.height < p.cell || ds.width < p.cell) throw std::invalid_argument("extract_hog: image smaller than one cell");
    if (ds.height % p.cell != 0 || ds.width % p.cell != 0)
        throw std::invalid_argument("extract_hog: cell size must divide image height and width");
    const int cells_y = ds.height / p.cell;
    const int cells_x = ds.width / p.cell;
    if (p.block > cells_y || p.block > cells_x)
        throw std::invalid_argument("extract_hog: block larger than the cell grid");

    const int blocks_y = cells_y - p.block + 1;
    const int blocks_x = cells_x - p.block + 1;
    const int block_len = p.block * p.block * p.bins;
    FeatureMatrix out{Matrix(ds.size(), blocks_y * blocks_x * block_len), "hog"};

    std::vector<double> cells(static_cast<std::size_t>(cells_y) * cells_x * p.bins);
    for (int i = 0; i < ds.size(); ++i) {
        const Matrix img = ds.image(i);
        const auto votes = hog_orientation_votes(img, p.bins);
        std::fill(cells.begin(), cells.end(), 0.0);
        for (int y = 0; y < ds.height; ++y)
            for (int x = 0; x < ds.width; ++x) {
                const double* v = votes.data() + (static_cast<std::size_t>(y) * ds.width + x) * p.bins;
                double* c = cells.data() + (static_cast<std::size_t>(y / p.cell) * cells_x + x / p.cell) * p.bins;
                for (int b = 0; b < p.bins; ++b) c[b] += v[b];
            }

        Eigen::Index col = 0;
        std::vector<double> block(block_len);
        for (int by = 0; by < blocks_y; ++by)
            for (int bx = 0; bx < blocks_x; ++bx) {
                int n = 0;
                for (int cy = by; cy < by + p.block; ++cy)
                    for (int cx = bx; cx < bx + p.block; ++cx)
                        for (int b = 0; b < p.bins; ++b)
                            block[n++] = cells[(static_cast<std::size_t>(cy) * cells_x + cx) * p.bins + b];
                double sq = 0;
                for (double v : block) sq += v * v;
                const double norm = std::sqrt(sq + p.epsilon * p.epsilon);
                for (double v : block) out.data(i, col++) = v / norm;
            }
    }
    return out;
}

std::vector<GaborKernel> gabor_bank(const GaborParams& p) {
    if (p.scales < 1 || p.orients < 1) throw std::invalid_argument("gabor_bank: scales and orients must be >= 1");
    std::vector<GaborKernel> bank;
    bank.reserve(static_cast<std::size_t>(p.scales) * p.orients);
    for (int s = 0; s < p.scales; ++s) {
        const double lambda = p.min_wavelength * std::pow(p.scale_step, s);
        const double sigma = p.sigma_ratio * lambda;
        const int r = static_cast<int>(std::ceil(p.radius_sigmas * sigma));
        for (int o = 0; o < p.orients; ++o) {
            const double theta = std::numbers::pi * o / p.orients;
            const double ct = std::cos(theta);
            const double st = std::sin(theta);
            Matrix env(2 * r + 1, 2 * r + 1);
            Matrix carrier_re(2 * r + 1, 2 * r + 1);
            Matrix carrier_im(2 * r + 1, 2 * r + 1);
            for (int y = -r; y <= r; ++y)
                for (int x = -r; x <= r; ++x) {
                    const double xr = x * ct + y * st;
                    const double yr = -x * st + y * ct;
                    env(y + r, x + r) =
                        std::exp(-(xr * xr + p.aspect * p.aspect * yr * yr) / (2 * sigma * sigma));
                    carrier_re(y + r, x + r) = std::cos(2 * std::numbers::pi * xr / lambda);
                    carrier_im(y + r, x + r) = std::sin(2 * std::numbers::pi * xr / lambda);
                }
            // Subtract a scaled envelope so each part sums to zero.
            const double env_sum = env.sum();
            const double k_re = env.cwiseProduct(carrier_re).sum() / env_sum;
            const double k_im = env.cwiseProduct(carrier_im).sum() / env_sum;
            GaborKernel kernel;
            kernel.wavelength = lambda;
            kernel.theta = theta;
            kernel.real = env.cwiseProduct((carrier_re.array() - k_re).matrix());
            kernel.imag = env.cwiseProduct((carrier_im.array() - k_im).matrix());
            const double norm = std::sqrt(kernel.real.squaredNorm() + kernel.imag.squaredNorm());
            kernel.real /= norm;
            kernel.imag /= norm;
            bank.push_back(std::move(kernel));
        }
    }
    return bank;
}

FeatureMatrix extract_gabor(const Dataset& ds, const GaborParams& p) {
    const auto bank = gabor_bank(p);
    for (const auto& k : bank)
        if (k.real.rows() > ds.height || k.real.cols() > ds.width)
            throw std::invalid_argument("extract_gabor: filter kernel (" + std::to_string(k.real.rows()) +
                                        " px) larger than image");

    FeatureMatrix out{Matrix(ds.size(), 2 * static_cast<Eigen::Index>(bank.size())), "gabor"};
    for (int i = 0; i < ds.size(); ++i) {
        const Matrix img = ds.image(i);
        for (std::size_t f = 0; f < bank.size(); ++f) {
            const auto& k = bank[f];
            const auto kh = k.real.rows();
            const auto kw = k.real.cols();
            const auto oh = img.rows() - kh + 1;
            const auto ow = img.cols() - kw + 1;
            double sum = 0;
            double sum_sq = 0;
            for (Eigen::Index y = 0; y < oh; ++y)
                for (Eigen::Index x = 0; x < ow; ++x) {
                    const auto patch = img.block(y, x, kh, kw);
                    const double re = patch.cwiseProduct(k.real).sum();
                    const double im = patch.cwiseProduct(k.imag).sum();
                    const double mag = std::sqrt(re * re + im * im);
                    sum += mag;
                    sum_sq += mag * mag;
                }
            const double count = static_cast<double>(oh * ow);
            const double mean = sum / count;
            const double var = std::max(0.0, sum_sq / count - mean * mean);
            out.data(i, static_cast<Eigen::Index>(2 * f)) = mean;
            out.data(i, static_cast<Eigen::Index>(2 * f + 1)) = std::sqrt(var);
        }
    }
    return out;
}

PcaModel fit_pca(const FeatureMatrix& f, int d) {
    const int n = f.rows();
    const int dim = f.dim();
    if (d < 1 || d > std::min(n, dim))
        throw std::invalid_argument("fit_pca: d=" + std::to_string(d) + " outside [1, min(N, D)]");

    PcaModel model;
    model.mean = f.data.colwise().mean();
    const Matrix centred = f.data.rowwise() - model.mean;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    const Eigen::MatrixXd& v = svd.matrixV();
    const Vector& s = svd.singularValues();
    const double divisor = std::max(1, n - 1);

    model.components.resize(d, dim);
    model.explained_variance.resize(d);
    for (int c = 0; c < d; ++c) {
        RowVector comp = v.col(c).transpose();
        Eigen::Index arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp(arg) < 0) comp = -comp;
        model.components.row(c) = comp;
        model.explained_variance(c) = c < s.size() ? s(c) * s(c) / divisor : 0.0;
    }
    return model;
}

FeatureMatrix apply_pca(const PcaModel& model, const FeatureMatrix& f) {
    if (f.dim() != model.input_dim())
        throw std::invalid_argument("apply_pca: dimension mismatch (" + std::to_string(f.dim()) + " vs " +
                                    std::to_string(model.input_dim()) + ")");
    return {(f.data.rowwise() - model.mean) * model.components.transpose(), f.feature_name + "_pca"};
}

int default_pca_dim(int n_samples, int input_dim) {
    return std::max(1, std::min({50, n_samples - 1, input_dim}));
}

FeatureMatrix extract_boot_features(const Dataset& ds, BootFeature kind, const FeatureOptions& options) {
    switch (kind) {
        case BootFeature::hog: return extract_hog(ds, options.hog);
        case BootFeature::gabor: return extract_gabor(ds, options.gabor);
        case BootFeature::raw_pca: {
            const auto raw = extract_raw(ds);
            const int d = options.pca_dim > 0 ? options.pca_dim : default_pca_dim(raw.rows(), raw.dim());
            auto projected = apply_pca(fit_pca(raw, d), raw);
            projected.feature_name = "raw_pca";
            return projected;
        }
        case BootFeature::raw:
        default: return extract_raw(ds);
    }
}

void write_feature_csv(const FeatureMatrix& f, const std::vector<std::string>& names,
                       const std::filesystem::path& path) {
    if (names.size() != static_cast<std::size_t>(f.rows()))
        throw std::invalid_argument("write_feature_csv: one name per row required");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path.string());
    out.precision(17);
    out << f.feature_name << ',' << f.dim() << '\n';
    for (int i = 0; i < f.rows(); ++i) {
        out << names[i];
        for (int j = 0; j < f.dim(); ++j) out << ',' << f.data(i, j);
        out << '\n';
    }
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path, std::vector<std::string>* names) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty feature file: " + path.string());
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("feature file header must be <name>,<dim>");
    FeatureMatrix f;
    f.feature_name = line.substr(0, comma);
    int dim = 0;
    try {
        dim = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
        throw DataError("feature file header must be <name>,<dim>");
    }
    if (dim < 1) throw DataError("feature dimension must be positive");

    std::vector<double> values;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        if (names) names->push_back(cell);
        int count = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
            ++count;
        }
        if (count != dim) throw DataError("feature row " + std::to_string(rows) + " has wrong length");
        ++rows;
    }
    f.data = Eigen::Map<const Matrix>(values.data(), rows, dim);
    if (!f.data.allFinite()) throw DataError("non-finite feature value");
    return f;
}

}  // namespace selfclust
