#include "selfclust/dataset.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace selfclust {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

std::vector<unsigned char> read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset) {
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> bytes{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                    static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(bytes.data(), bytes.size());
}

unsigned char quantize(double p) {
    return static_cast<unsigned char>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0));
}

Matrix read_png(const fs::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!fp) throw DataError("cannot open file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("unreadable PNG file: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("PNG is not 8-bit grayscale: " + path.string());
    }
    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * width;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    Matrix img(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img(y, x) = raw[y * width + x] / 255.0;
    return img;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

int Dataset::num_classes() const {
    if (!true_labels || true_labels->empty()) return 0;
    return *std::max_element(true_labels->begin(), true_labels->end()) + 1;
}

void Dataset::validate() const {
    if (pixels.rows() < 1) throw DataError("no samples found");
    if (height < 1 || width < 1 || pixels.cols() != static_cast<Eigen::Index>(height) * width)
        throw DataError("inconsistent image dimensions");
    if (names.size() != static_cast<std::size_t>(pixels.rows()))
        throw DataError("sample name count does not match sample count");
    if (!pixels.allFinite()) throw DataError("non-finite pixel value");
    if (pixels.minCoeff() < 0.0 || pixels.maxCoeff() > 1.0) throw DataError("pixel value outside [0, 1]");
    if (true_labels) {
        if (true_labels->size() != static_cast<std::size_t>(pixels.rows()))
            throw DataError("label count does not match sample count");
        std::set<int> seen(true_labels->begin(), true_labels->end());
        if (*seen.begin() != 0 || *seen.rbegin() != static_cast<int>(seen.size()) - 1)
            throw DataError("labels are not a contiguous 0-based range");
    }
}

Dataset load_mnist_idx(const fs::path& images_path, const std::optional<fs::path>& labels_path) {
    const auto buf = read_all(images_path);
    if (buf.size() < 16) throw DataError("truncated image file header: " + images_path.string());
    const auto magic = read_be32(buf, 0);
    if (magic != kIdxImageMagic) throw DataError("wrong magic for image file");
    const auto count = read_be32(buf, 4);
    const auto rows = read_be32(buf, 8);
    const auto cols = read_be32(buf, 12);
    const std::size_t expected = 16 + std::size_t{count} * rows * cols;
    if (buf.size() < expected) throw DataError("truncated image payload: " + images_path.string());

    Dataset ds;
    ds.height = static_cast<int>(rows);
    ds.width = static_cast<int>(cols);
    ds.pixels.resize(count, static_cast<Eigen::Index>(rows) * cols);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < std::size_t{rows} * cols; ++j)
            ds.pixels(i, j) = buf[16 + i * rows * cols + j] / 255.0;
    ds.names.reserve(count);
    for (std::size_t i = 0; i < count; ++i) ds.names.push_back("idx_" + std::to_string(i));

    if (labels_path) {
        const auto lbuf = read_all(*labels_path);
        if (lbuf.size() < 8) throw DataError("truncated label file header: " + labels_path->string());
        if (read_be32(lbuf, 0) != kIdxLabelMagic) throw DataError("wrong magic for label file");
        const auto lcount = read_be32(lbuf, 4);
        if (lbuf.size() < 8 + std::size_t{lcount})
            throw DataError("truncated label payload: " + labels_path->string());
        if (lcount != count)
            throw DataError("count mismatch between image and label files (" + std::to_string(count) +
                            " vs " + std::to_string(lcount) + ")");
        Labels labels(lbuf.begin() + 8, lbuf.begin() + 8 + lcount);
        ds.true_labels = std::move(labels);
    }
    ds.validate();
    return ds;
}

void write_mnist_idx(const Dataset& ds, const fs::path& images_path,
                     const std::optional<fs::path>& labels_path) {
    std::ofstream out(images_path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + images_path.string());
    write_be32(out, kIdxImageMagic);
    write_be32(out, static_cast<std::uint32_t>(ds.size()));
    write_be32(out, static_cast<std::uint32_t>(ds.height));
    write_be32(out, static_cast<std::uint32_t>(ds.width));
    for (Eigen::Index i = 0; i < ds.pixels.rows(); ++i)
        for (Eigen::Index j = 0; j < ds.pixels.cols(); ++j) out.put(static_cast<char>(quantize(ds.pixels(i, j))));

    if (labels_path) {
        if (!ds.true_labels) throw DataError("dataset has no labels to write");
        std::ofstream lout(*labels_path, std::ios::binary);
        if (!lout) throw DataError("cannot write file: " + labels_path->string());
        write_be32(lout, kIdxLabelMagic);
        write_be32(lout, static_cast<std::uint32_t>(ds.size()));
        for (int label : *ds.true_labels) {
            if (label < 0 || label > 255) throw DataError("label does not fit an IDX byte");
            lout.put(static_cast<char>(label));
        }
    }
}

Matrix read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw DataError("not a binary PGM (P5) file: " + path.string());

    auto next_int = [&]() {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
            in >> std::ws;
        }
        int v = -1;
        in >> v;
        if (!in) throw DataError("malformed PGM header: " + path.string());
        return v;
    };
    const int width = next_int();
    const int height = next_int();
    const int maxval = next_int();
    if (width < 1 || height < 1 || maxval != 255)
        throw DataError("unsupported PGM (need maxval 255): " + path.string());
    in.get();  // single whitespace after maxval

    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw DataError("truncated PGM payload: " + path.string());

    Matrix img(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img(y, x) = raw[y * width + x] / 255.0;
    return img;
}

void write_pgm(const fs::path& path, const Matrix& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
    for (Eigen::Index y = 0; y < image.rows(); ++y)
        for (Eigen::Index x = 0; x < image.cols(); ++x) out.put(static_cast<char>(quantize(image(y, x))));
}

Dataset load_image_dir(const fs::path& root, std::optional<std::pair<int, int>> target) {
    if (!fs::is_directory(root)) throw DataError("not a directory: " + root.string());
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());

    std::vector<Matrix> images;
    Dataset ds;
    Labels labels;
    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dirs[c])) {
            if (!entry.is_regular_file()) continue;
            auto ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
            if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            auto ext = file.extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
            images.push_back(ext == ".png" ? read_png(file) : read_pgm(file));
            labels.push_back(static_cast<int>(c));
            ds.names.push_back(class_dirs[c].filename().string() + "/" + file.filename().string());
        }
    }
    if (images.empty()) throw DataError("no samples found");

    if (target) {
        for (auto& img : images) {
            Dataset one;
            one.height = static_cast<int>(img.rows());
            one.width = static_cast<int>(img.cols());
            one.pixels = Eigen::Map<const Matrix>(img.data(), 1, img.size());
            img = Eigen::Map<const Matrix>(resize(one, target->first, target->second).pixels.data(),
                                           target->first, target->second);
        }
    }

    ds.height = static_cast<int>(images.front().rows());
    ds.width = static_cast<int>(images.front().cols());
    ds.pixels.resize(static_cast<Eigen::Index>(images.size()), ds.height * ds.width);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].rows() != ds.height || images[i].cols() != ds.width)
            throw DataError("inconsistent image dimensions");
        ds.pixels.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const RowVector>(images[i].data(), images[i].size());
    }
    // Class folders without image files leave gaps in the label range; compact them.
    std::vector<int> remap(class_dirs.size(), -1);
    int next = 0;
    for (int& l : labels) {
        if (remap[l] < 0) remap[l] = next++;
        l = remap[l];
    }
    ds.true_labels = std::move(labels);
    ds.validate();
    return ds;
}

Dataset gen_synth_blobs(int k, int per_class, int dim_signal, int dim_noise, double separation,
                        double noise_scale, SeededRng& rng, double noise_ratio) {
    if (k < 1 || per_class < 1 || dim_signal < 1 || dim_noise < 0)
        throw std::invalid_argument("gen_synth_blobs: counts must be positive");
    if (!(separation > 0)) throw std::invalid_argument("gen_synth_blobs: separation must be positive");
    if (noise_scale < 0 || noise_ratio < 0)
        throw std::invalid_argument("gen_synth_blobs: noise scales must be nonnegative");

    // Class means: a scaled simplex (all pairwise distances equal `separation`) when it
    // fits in the signal subspace, otherwise an integer lattice of spacing `separation`.
    Matrix means = Matrix::Zero(k, dim_signal);
    if (k <= dim_signal) {
        for (int c = 0; c < k; ++c) means(c, c) = separation / std::sqrt(2.0);
    } else {
        int base = 2;
        while (std::pow(base, dim_signal) < k) ++base;
        for (int c = 0; c < k; ++c) {
            int code = c;
            for (int d = 0; d < dim_signal; ++d) {
                means(c, d) = separation * (code % base);
                code /= base;
            }
        }
    }

    const int n = k * per_class;
    const int dim = dim_signal + dim_noise;
    Dataset ds;
    ds.height = 1;
    ds.width = dim;
    ds.pixels.resize(n, dim);
    Labels labels(n);
    for (int c = 0; c < k; ++c) {
        for (int j = 0; j < per_class; ++j) {
            const int i = c * per_class + j;
            labels[i] = c;
            for (int d = 0; d < dim; ++d) {
                const bool signal = d < dim_signal;
                const double centre = signal ? means(c, d) : 0.0;
                const double scale = signal ? noise_scale : noise_ratio * noise_scale;
                ds.pixels(i, d) = centre + scale * rng.normal(SeededRng::kSynthData);
            }
            ds.names.push_back("blob" + std::to_string(c) + "_" + std::to_string(j));
        }
    }

    const double lo = ds.pixels.minCoeff();
    const double hi = ds.pixels.maxCoeff();
    if (hi > lo) {
        ds.pixels = (ds.pixels.array() - lo) / (hi - lo);
    } else {
        ds.pixels.setZero();
    }
    ds.true_labels = std::move(labels);
    ds.validate();
    return ds;
}

Dataset reshape(const Dataset& ds, int height, int width) {
    if (height < 1 || width < 1 || static_cast<Eigen::Index>(height) * width != ds.pixels.cols())
        throw std::invalid_argument("reshape: pixel count must be preserved");
    Dataset out = ds;
    out.height = height;
    out.width = width;
    return out;
}

Dataset resize(const Dataset& ds, int height, int width, bool nearest) {
    if (height < 1 || width < 1) throw std::invalid_argument("resize: target size must be positive");
    Dataset out = ds;
    out.height = height;
    out.width = width;
    out.pixels.resize(ds.pixels.rows(), static_cast<Eigen::Index>(height) * width);

    // Pixel-centre alignment: output pixel y samples source coordinate (y + 0.5) * sy - 0.5.
    const double sy = static_cast<double>(ds.height) / height;
    const double sx = static_cast<double>(ds.width) / width;
    for (Eigen::Index i = 0; i < ds.pixels.rows(); ++i) {
        const auto src = ds.image(static_cast<int>(i));
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                double value;
                if (nearest) {
                    const int iy = std::min(ds.height - 1, static_cast<int>(std::floor((y + 0.5) * sy)));
                    const int ix = std::min(ds.width - 1, static_cast<int>(std::floor((x + 0.5) * sx)));
                    value = src(iy, ix);
                } else {
                    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, ds.height - 1.0);
                    const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, ds.width - 1.0);
                    const int y0 = static_cast<int>(fy);
                    const int x0 = static_cast<int>(fx);
                    const int y1 = std::min(y0 + 1, ds.height - 1);
                    const int x1 = std::min(x0 + 1, ds.width - 1);
                    const double wy = fy - y0;
                    const double wx = fx - x0;
                    value = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                            wy * ((1 - wx) * src(y1, x0) + wx * src(y1, x1));
                }
                out.pixels(i, static_cast<Eigen::Index>(y) * width + x) = value;
            }
        }
    }
    return out;
}

Dataset subset(const Dataset& ds, const IndexList& indices) {
    Dataset out;
    out.height = ds.height;
    out.width = ds.width;
    out.pixels.resize(static_cast<Eigen::Index>(indices.size()), ds.pixels.cols());
    Labels labels;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const int i = indices[r];
        if (i < 0 || i >= ds.size()) throw std::out_of_range("subset: index out of range");
        out.pixels.row(static_cast<Eigen::Index>(r)) = ds.pixels.row(i);
        out.names.push_back(ds.names[i]);
        if (ds.true_labels) labels.push_back((*ds.true_labels)[i]);
    }
    if (ds.true_labels) {
        // Keep the contiguous-range invariant after dropping classes.
        std::vector<int> present(labels.begin(), labels.end());
        std::sort(present.begin(), present.end());
        present.erase(std::unique(present.begin(), present.end()), present.end());
        for (int& l : labels) l = static_cast<int>(std::lower_bound(present.begin(), present.end(), l) - present.begin());
        out.true_labels = std::move(labels);
    }
    return out;
}

void write_csv_dataset(const Dataset& ds, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path.string());
    out.precision(17);
    out << "name,label";
    for (Eigen::Index j = 0; j < ds.pixels.cols(); ++j) out << ",x" << j;
    out << '\n';
    for (int i = 0; i < ds.size(); ++i) {
        out << ds.names[i] << ',' << (ds.true_labels ? (*ds.true_labels)[i] : -1);
        for (Eigen::Index j = 0; j < ds.pixels.cols(); ++j) out << ',' << ds.pixels(i, j);
        out << '\n';
    }
}

Dataset load_csv_dataset(const fs::path& path, int height) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("no samples found");
    const auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "name" || header[1] != "label")
        throw DataError("CSV dataset header must start with name,label");
    const auto dim = static_cast<Eigen::Index>(header.size() - 2);
    if (height < 1 || dim % height != 0) throw DataError("inconsistent image dimensions");

    std::vector<std::vector<double>> rows;
    Labels labels;
    bool all_labelled = true;
    Dataset ds;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (static_cast<Eigen::Index>(cells.size()) != dim + 2)
            throw DataError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(dim + 2));
        ds.names.push_back(cells[0]);
        const int label = std::stoi(cells[1]);
        all_labelled = all_labelled && label >= 0;
        labels.push_back(label);
        std::vector<double> row(dim);
        for (Eigen::Index j = 0; j < dim; ++j) row[j] = std::stod(cells[j + 2]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("no samples found");
    ds.height = height;
    ds.width = static_cast<int>(dim / height);
    ds.pixels.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        ds.pixels.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const RowVector>(rows[i].data(), dim);
    if (all_labelled) ds.true_labels = std::move(labels);
    ds.validate();
    return ds;
}

}  // namespace selfclust
