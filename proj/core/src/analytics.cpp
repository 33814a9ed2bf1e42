#include "mfid/analytics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mfid/error.hpp"
#include "mfid/random.hpp"
#include "shifted_mean.hpp"

namespace mfid {

namespace {

// Relative variance below which a component counts as carrying no signal.
constexpr double kDegenerateRatio = 1e-10;

std::size_t count_degenerate(const std::vector<double>& variance) {
    if (variance.empty()) return 0;
    const double top = variance.front();
    return static_cast<std::size_t>(std::count_if(variance.begin(), variance.end(), [top](double v) {
        return top <= 0.0 || v <= kDegenerateRatio * top;
    }));
}

void orient(std::vector<double>& component) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < component.size(); ++i) {
        if (std::abs(component[i]) > std::abs(component[arg])) arg = i;
    }
    if (component[arg] < 0.0) {
        for (double& v : component) v = -v;
    }
}

}  // namespace

PCAModel pca_fit(std::span<const std::vector<double>> rows, const PcaOptions& options) {
    const std::size_t k = options.components;
    if (k == 0) throw InvalidArgument("PCA needs at least one component");
    const std::size_t n = rows.size();
    if (n < std::max<std::size_t>(k, 2)) {
        throw InvalidArgument("PCA with " + std::to_string(k) + " components needs at least " +
                              std::to_string(std::max<std::size_t>(k, 2)) + " samples, got " +
                              std::to_string(n));
    }
    const std::size_t d = rows.front().size();
    if (d < k) throw InvalidArgument("PCA asks for more components than dimensions");
    for (const auto& r : rows) {
        if (r.size() != d) throw InvalidArgument("PCA samples have different lengths");
    }

    PCAModel model;
    model.mean = detail::shifted_mean(n, d, [&](std::size_t i) -> const std::vector<double>& { return rows[i]; });

    Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j] - model.mean[j];

    const Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");

    const auto& evals = solver.eigenvalues();   // ascending
    const auto& evecs = solver.eigenvectors();
    for (std::size_t c = 0; c < k; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - c);
        std::vector<double> comp(d);
        for (std::size_t j = 0; j < d; ++j) comp[j] = evecs(static_cast<Eigen::Index>(j), col);
        orient(comp);
        model.components.push_back(std::move(comp));
        model.explained_variance.push_back(std::max(evals(col), 0.0));
    }
    model.degenerate_components = count_degenerate(model.explained_variance);

    if (model.explained_variance.front() <= 0.0 && !options.allow_degenerate) {
        throw DegenerateData("PCA input has zero variance (all samples identical)");
    }
    return model;
}

PCAModel pca_fit(std::span<const PersistenceImage> pis, const PcaOptions& options) {
    if (pis.empty()) throw InvalidArgument("PCA needs at least one persistence image");
    const auto& spec = pis.front().spec();
    std::vector<std::vector<double>> rows;
    rows.reserve(pis.size());
    for (const auto& pi : pis) {
        if (!(pi.spec() == spec)) throw InvalidArgument("persistence images have different grid specs");
        rows.emplace_back(pi.values().begin(), pi.values().end());
    }
    return pca_fit(std::span<const std::vector<double>>(rows), options);
}

std::vector<double> pca_project(const PCAModel& model, std::span<const double> x) {
    if (x.size() != model.dimension()) {
        throw InvalidArgument("cannot project a " + std::to_string(x.size()) +
                              "-vector with a " + std::to_string(model.dimension()) +
                              "-dimensional PCA model");
    }
    std::vector<double> out(model.rank(), 0.0);
    for (std::size_t c = 0; c < model.rank(); ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) acc += model.components[c][j] * (x[j] - model.mean[j]);
        out[c] = acc;
    }
    return out;
}

std::vector<double> pca_project(const PCAModel& model, const PersistenceImage& pi) {
    return pca_project(model, pi.values());
}

std::string pca_model_to_json(const PCAModel& model) {
    nlohmann::ordered_json j;
    j["mean"] = model.mean;
    j["components"] = model.components;
    j["explained_variance"] = model.explained_variance;
    return j.dump(2);
}

PCAModel pca_model_from_json(std::string_view text) {
    PCAModel model;
    try {
        const auto j = nlohmann::json::parse(text);
        model.mean = j.at("mean").get<std::vector<double>>();
        model.components = j.at("components").get<std::vector<std::vector<double>>>();
        model.explained_variance = j.at("explained_variance").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidArgument(std::string("bad PCA model JSON: ") + ex.what());
    }
    if (model.components.size() != model.explained_variance.size()) {
        throw InvalidArgument("PCA model has mismatched component and variance counts");
    }
    for (const auto& c : model.components) {
        if (c.size() != model.mean.size()) throw InvalidArgument("PCA component length differs from mean");
    }
    model.degenerate_components = count_degenerate(model.explained_variance);
    return model;
}

void save_pca_model(const PCAModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << pca_model_to_json(model) << '\n';
}

PCAModel load_pca_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return pca_model_from_json(buf.str());
}

double pi_distance(const PersistenceImage& a, const PersistenceImage& b) {
    if (!(a.spec() == b.spec())) throw InvalidArgument("persistence images have different grid specs");
    double acc = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double diff = va[i] - vb[i];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

std::string_view to_string(NormalizationMode mode) noexcept {
    return mode == NormalizationMode::per_image_centering ? "per_image_centering" : "corpus_minmax";
}

NormalizationMode parse_normalization_mode(std::string_view text) {
    if (text == "per_image_centering") return NormalizationMode::per_image_centering;
    if (text == "corpus_minmax") return NormalizationMode::corpus_minmax;
    throw InvalidArgument("unknown normalization mode '" + std::string(text) + "'");
}

NormalizationResult normalize_condition(std::span<const GrayImage> images, NormalizationMode mode) {
    if (images.empty()) throw InvalidArgument("cannot normalize an empty corpus");

    std::vector<std::vector<double>> shifted;
    shifted.reserve(images.size());
    if (mode == NormalizationMode::per_image_centering) {
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& img : images) {
            for (double v : img.pixels()) total += v;
            count += img.size();
        }
        const double corpus_mean = total / static_cast<double>(count);
        for (const auto& img : images) {
            const double offset = corpus_mean - img.mean();
            std::vector<double> px(img.pixels().begin(), img.pixels().end());
            for (double& v : px) v += offset;
            shifted.push_back(std::move(px));
        }
    } else {
        for (const auto& img : images) shifted.emplace_back(img.pixels().begin(), img.pixels().end());
    }

    double lo = shifted.front().front();
    double hi = lo;
    for (const auto& px : shifted) {
        const auto [mn, mx] = std::minmax_element(px.begin(), px.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    if (!(hi > lo)) throw DegenerateData("corpus has no intensity spread after centering");

    NormalizationResult result;
    result.mode = mode;
    result.corpus_min = lo;
    result.corpus_max = hi;
    const double span = hi - lo;
    for (std::size_t i = 0; i < images.size(); ++i) {
        auto& px = shifted[i];
        for (double& v : px) {
            v = (v - lo) / span;
            if (v < 0.0 || v > 1.0) {
                v = std::clamp(v, 0.0, 1.0);
                ++result.clamped;
            }
        }
        result.images.emplace_back(images[i].width(), images[i].height(), std::move(px));
    }
    return result;
}

std::vector<double> evenly_spaced_thresholds(std::size_t n) {
    if (n < 2) throw InvalidArgument("need at least two thresholds");
    std::vector<double> t(n);
    const double denom = static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) t[j] = static_cast<double>(j) / denom;
    return t;
}

AreaFractionCurve area_fraction_curve(const GrayImage& image, std::span<const double> thresholds) {
    if (image.empty()) throw InvalidArgument("area fraction of an empty image");
    std::vector<double> sorted(image.pixels().begin(), image.pixels().end());
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(sorted.size());

    AreaFractionCurve curve;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    curve.fractions.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto first_at_or_above = std::lower_bound(sorted.begin(), sorted.end(), t);
        curve.fractions.push_back(static_cast<double>(sorted.end() - first_at_or_above) / total);
    }
    return curve;
}

AreaFractionCurve area_fraction_curve(const GrayImage& image) {
    const auto t = evenly_spaced_thresholds(10);
    return area_fraction_curve(image, t);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::uint64_t seed) {
    k = std::min(k, n);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

AreaFractionCurve average_curves(std::span<const AreaFractionCurve> curves) {
    if (curves.empty()) throw InvalidArgument("cannot average an empty list of curves");
    for (const auto& c : curves) {
        if (c.thresholds != curves.front().thresholds) {
            throw InvalidArgument("area-fraction curves use different thresholds");
        }
    }
    AreaFractionCurve out;
    out.thresholds = curves.front().thresholds;
    out.fractions = detail::shifted_mean(curves.size(), out.thresholds.size(),
                                         [&](std::size_t i) -> const std::vector<double>& {
                                             return curves[i].fractions;
                                         });
    return out;
}

AreaFractionCurve mean_area_fraction(std::span<const GrayImage> corpus, std::size_t sample_size,
                                     std::uint64_t seed) {
    if (corpus.empty()) throw InvalidArgument("mean area fraction of an empty corpus");
    if (sample_size == 0) throw InvalidArgument("sample size must be positive");
    const auto picks = sample_without_replacement(corpus.size(), sample_size, seed);
    std::vector<AreaFractionCurve> curves;
    curves.reserve(picks.size());
    for (std::size_t i : picks) curves.push_back(area_fraction_curve(corpus[i]));
    return average_curves(curves);
}

double max_abs_gap(const AreaFractionCurve& a, const AreaFractionCurve& b) {
    if (a.thresholds != b.thresholds) throw InvalidArgument("area-fraction curves use different thresholds");
    double gap = 0.0;
    for (std::size_t j = 0; j < a.fractions.size(); ++j) {
        gap = std::max(gap, std::abs(a.fractions[j] - b.fractions[j]));
    }
    return gap;
}

void write_area_fraction_csv(const AreaFractionCurve& curve, std::ostream& out) {
    if (curve.thresholds.size() != curve.fractions.size()) {
        throw InvalidArgument("area-fraction curve has mismatched lengths");
    }
    out << "threshold,mean_fraction\n";
    char buf[64];
    for (std::size_t j = 0; j < curve.thresholds.size(); ++j) {
        auto [e1, ec1] = std::to_chars(buf, buf + sizeof buf, curve.thresholds[j]);
        out.write(buf, e1 - buf);
        out << ',';
        auto [e2, ec2] = std::to_chars(buf, buf + sizeof buf, curve.fractions[j]);
        out.write(buf, e2 - buf);
        out << '\n';
    }
}

}  // namespace mfid
