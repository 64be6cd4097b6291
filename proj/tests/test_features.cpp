#include "doctest.h"
#include "test_util.hpp"

#include "selfclust/features.hpp"

#include <cmath>
#include <numbers>

using namespace selfclust;

namespace {

Dataset single(const Matrix& img) {
    Dataset ds;
    ds.height = static_cast<int>(img.rows());
    ds.width = static_cast<int>(img.cols());
    ds.pixels = Eigen::Map<const Matrix>(img.data(), 1, img.size());
    ds.names = {"0"};
    return ds;
}

Dataset random_images(int n, int h, int w, std::uint64_t seed) {
    SeededRng rng(seed);
    Dataset ds;
    ds.height = h;
    ds.width = w;
    ds.pixels.resize(n, h * w);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < h * w; ++j) ds.pixels(i, j) = rng.uniform("img");
        ds.names.push_back(std::to_string(i));
    }
    return ds;
}

FeatureMatrix fm(const Matrix& m) {
    return {m, "test"};
}

}  // namespace

TEST_CASE("raw features flatten row-major") {
    Matrix img(2, 2);
    img << 0, 0.5, 1, 0;
    const auto f = extract_raw(single(img));
    CHECK(f.rows() == 1);
    CHECK(f.dim() == 4);
    CHECK(f.data(0, 0) == 0.0);
    CHECK(f.data(0, 1) == 0.5);
    CHECK(f.data(0, 2) == 1.0);
    CHECK(f.data(0, 3) == 0.0);

    auto ds = random_images(3, 4, 5, 1);
    ds.pixels.row(2) = ds.pixels.row(0);
    const auto g = extract_raw(ds);
    CHECK(g.rows() == 3);
    CHECK(g.dim() == 20);
    CHECK(g.data.row(0) == g.data.row(2));
}

TEST_CASE("HOG of a constant image is all zeros") {
    const auto f = extract_hog(single(Matrix::Constant(28, 28, 0.4)));
    CHECK(f.data.allFinite());
    CHECK(f.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("HOG dimension on 28x28 with cell 7, block 2, bins 9") {
    const auto f = extract_hog(random_images(2, 28, 28, 2));
    // 4x4 cells, 3x3 block positions, 2x2 cells of 9 bins each
    CHECK(f.dim() == 3 * 3 * 2 * 2 * 9);
    // Count emitted values directly: each block contributes block^2 * bins entries.
    HogParams p;
    const int cells = 28 / p.cell;
    const int positions = (cells - p.block + 1) * (cells - p.block + 1);
    CHECK(f.dim() == positions * p.block * p.block * p.bins);
    CHECK(f.dim() == 324);
}

TEST_CASE("HOG ramp: all gradient energy lands in the horizontal-gradient bin") {
    Matrix img(7, 7);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c) img(r, c) = c / 6.0;
    const int bins = 9;
    const auto votes = hog_orientation_votes(img, bins);
    std::vector<double> per_bin(bins, 0.0);
    for (int p = 0; p < 49; ++p)
        for (int b = 0; b < bins; ++b) per_bin[b] += votes[p * bins + b];
    // Per row: two border pixels with one-sided step 1/6, five interior with 2/6.
    CHECK(per_bin[0] == doctest::Approx(7 * (2.0 / 6 + 5 * 2.0 / 6)).epsilon(1e-12));
    for (int b = 1; b < bins; ++b) CHECK(per_bin[b] == 0.0);
}

TEST_CASE("HOG block vectors have at most unit norm") {
    HogParams p;
    const auto f = extract_hog(random_images(5, 28, 28, 3), p);
    const int block_len = p.block * p.block * p.bins;
    for (int i = 0; i < f.rows(); ++i)
        for (int b = 0; b < f.dim() / block_len; ++b)
            CHECK(f.data.row(i).segment(b * block_len, block_len).norm() <= 1 + 1e-9);
}

TEST_CASE("Gabor bank shape and zero-DC kernels") {
    GaborParams p;
    const auto bank = gabor_bank(p);
    CHECK(bank.size() == 24);
    for (const auto& k : bank) {
        CHECK(std::abs(k.real.sum()) < 1e-12);
        CHECK(std::abs(k.imag.sum()) < 1e-12);
        CHECK(k.real.squaredNorm() + k.imag.squaredNorm() == doctest::Approx(1.0));
    }
    const auto f = extract_gabor(random_images(2, 28, 28, 4), p);
    CHECK(f.dim() == 48);
}

TEST_CASE("Gabor response to a constant image vanishes") {
    const auto f = extract_gabor(single(Matrix::Constant(28, 28, 0.7)));
    for (int j = 0; j < f.dim(); j += 2) CHECK(std::abs(f.data(0, j)) < 1e-10);
}

TEST_CASE("Gabor grating excites its matched filter most") {
    GaborParams p;
    const auto bank = gabor_bank(p);
    for (std::size_t target = 0; target < bank.size(); ++target) {
        const double lambda = bank[target].wavelength;
        const double theta = bank[target].theta;
        Matrix img(48, 48);
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x)
                img(y, x) = 0.5 + 0.5 * std::cos(2 * std::numbers::pi * (x * std::cos(theta) + y * std::sin(theta)) /
                                                 lambda);
        const auto f = extract_gabor(single(img), p);
        std::size_t best = 0;
        for (std::size_t k = 1; k < bank.size(); ++k)
            if (f.data(0, 2 * k) > f.data(0, 2 * best)) best = k;
        CAPTURE(target);
        CHECK(best == target);
    }
}

TEST_CASE("Gabor rejects kernels larger than the image") {
    CHECK_THROWS_AS(extract_gabor(single(Matrix::Zero(8, 8))), std::invalid_argument);
}

TEST_CASE("PCA on collinear points") {
    Matrix x(5, 2);
    for (int i = 0; i < 5; ++i) x.row(i) << i, 2.0 * i + 1;
    const auto model = fit_pca(fm(x), 1);
    const Matrix centred = x.rowwise() - x.colwise().mean();
    const double total = centred.squaredNorm() / 4;
    CHECK(model.explained_variance(0) == doctest::Approx(total).epsilon(1e-12));
    const Matrix proj = apply_pca(model, fm(x)).data;
    const Matrix recon = proj * model.components;
    CHECK((recon - centred).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("PCA with a complete basis reconstructs the data") {
    const auto ds = random_images(10, 2, 3, 5);
    const auto model = fit_pca(fm(ds.pixels), 6);
    const Matrix centred = ds.pixels.rowwise() - ds.pixels.colwise().mean();
    const Matrix recon = apply_pca(model, fm(ds.pixels)).data * model.components;
    CHECK((recon - centred).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("PCA hand example: dominant axis and projection") {
    Matrix x(4, 2);
    x << 1, 0, -1, 0, 0, 0.1, 0, -0.1;
    const auto model = fit_pca(fm(x), 1);
    CHECK(model.components(0, 0) == doctest::Approx(1.0));
    CHECK(model.components(0, 1) == doctest::Approx(0.0));
    Matrix probe(1, 2);
    probe << 2, 0;
    CHECK(std::abs(apply_pca(model, fm(probe)).data(0, 0)) == doctest::Approx(2.0));
    CHECK(apply_pca(model, fm(model.mean)).data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("PCA properties on random data") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ds = random_images(30, 3, 4, seed);
        const auto f = fm(ds.pixels);
        const int d = 5;
        const auto model = fit_pca(f, d);
        const Matrix gram = model.components * model.components.transpose();
        CHECK((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-8);
        for (int c = 0; c < d; ++c) {
            CHECK(model.explained_variance(c) >= 0);
            if (c > 0) CHECK(model.explained_variance(c) <= model.explained_variance(c - 1));
        }
        const auto out = apply_pca(model, f);
        CHECK(out.rows() == 30);
        CHECK(out.dim() == d);
        const double total = (ds.pixels.rowwise() - ds.pixels.colwise().mean()).squaredNorm();
        CHECK(out.data.squaredNorm() <= total + 1e-8);
        const auto full = apply_pca(fit_pca(f, 12), f);
        CHECK(full.data.squaredNorm() == doctest::Approx(total).epsilon(1e-10));
    }
    CHECK(default_pca_dim(1000, 784) == 50);
    CHECK(default_pca_dim(10, 784) == 9);
    CHECK(default_pca_dim(1, 4) == 1);
}

TEST_CASE("extractors are deterministic") {
    const auto ds = random_images(3, 28, 28, 6);
    for (auto kind : {BootFeature::raw, BootFeature::hog, BootFeature::gabor, BootFeature::raw_pca}) {
        const auto a = extract_boot_features(ds, kind);
        const auto b = extract_boot_features(ds, kind);
        CHECK(a.data == b.data);
        CHECK(a.rows() == 3);
        CHECK(a.data.allFinite());
        CHECK(a.feature_name == to_string(kind));
    }
}

TEST_CASE("feature CSV round trip") {
    TempDir dir;
    const auto f = extract_boot_features(random_images(4, 28, 28, 7), BootFeature::hog);
    const std::vector<std::string> names{"a", "b", "c", "d"};
    write_feature_csv(f, names, dir / "f.csv");
    std::vector<std::string> back_names;
    const auto back = read_feature_csv(dir / "f.csv", &back_names);
    CHECK(back_names == names);
    CHECK(back.feature_name == "hog");
    CHECK(back.data == f.data);
}
