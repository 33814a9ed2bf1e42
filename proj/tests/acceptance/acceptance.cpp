// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL. Optional data-dependent checks read their inputs from:
//   MFID_FEED_RATES  text file with the 32 experiment feed rates
//   MFID_REAL_CONFIG pipeline config JSON pointing at the real corpora

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "generators.hpp"
#include "json.hpp"
#include "mfid/analytics.hpp"
#include "mfid/cubical.hpp"
#include "mfid/dataset.hpp"
#include "mfid/error.hpp"
#include "mfid/persim.hpp"
#include "mfid/pipeline.hpp"
#include "mfid/synthgen.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace mfid;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

Outcome pass(std::string d) { return {Status::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::fail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::skip, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double gaussian(Rng& rng) {
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Experimental and synthetic corpus directories for pipeline-level checks.
PipelineConfig corpus_config(const testing::TempDir& dir, const std::string& exp,
                             const std::string& syn, const std::string& out) {
    PipelineConfig cfg;
    cfg.experimental_manifest = dir / (exp + "/manifest.csv");
    cfg.synthetic_manifest = dir / (syn + "/manifest.csv");
    cfg.output_dir = dir / out;
    cfg.seed = 2024;
    cfg.area_sample_size = 1000;
    return cfg;
}

Outcome oracle_equivalence() {
    Rng rng(1001);
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kChips = 150;
    std::size_t points = 0;
    for (int i = 0; i < kChips; ++i) {
        const std::size_t w = 4 + rng.below(13);
        const std::size_t h = 4 + rng.below(13);
        const GrayImage chip = i % 2 == 0 ? testing::random_chip(w, h, rng)
                                          : testing::quantized_chip(w, h, 3 + rng.below(4), rng);
        auto fast = compute_persistence(chip);
        auto slow = brute_force_persistence(chip);
        fast.canonicalize();
        slow.canonicalize();
        if (!(fast == slow)) return fail(fmt("chip %d (%zux%zu): diagrams differ", i, w, h));
        points += fast.size();
    }
    const double secs = seconds_since(t0);
    const std::string detail = fmt("%d chips 4x4..16x16, %zu points, %.2f s", kChips, points, secs);
    return secs < 60.0 ? pass(detail) : fail(detail + " (limit 60 s)");
}

Outcome blob_recovery() {
    Rng rng(1002);
    constexpr int kSpecs = 50;
    for (int i = 0; i < kSpecs; ++i) {
        const std::size_t k = static_cast<std::size_t>(i % 11);
        MicrostructureSpec spec;
        spec.width = 128;
        spec.height = 128;
        spec.background_level = rng.uniform(0.05, 0.3);
        for (int attempt = 0; spec.blobs.size() < k; ++attempt) {
            if (attempt > 100000) return fail(fmt("spec %d: could not place %zu blobs", i, k));
            const double r = rng.uniform(2.0, 7.0);
            const Blob b{static_cast<double>(rng.below(128)), static_cast<double>(rng.below(128)), r,
                         rng.uniform(spec.background_level + 0.05, 1.0), BlobProfile::plateau};
            if (touches_border(b, 128, 128)) continue;
            auto candidate = spec;
            candidate.blobs.push_back(b);
            try {
                candidate.validate();
            } catch (const InvalidArgument&) {
                continue;
            }
            spec = std::move(candidate);
        }
        if (expected_h1_count(spec) != k) return fail(fmt("spec %d: expected count %zu", i, expected_h1_count(spec)));

        const auto chips = extract_chips(generate(spec, 0), ChipSpec{128, 64});
        if (chips.size() != 1) return fail("chipping a 128x128 image did not give one chip");
        auto dgm = compute_persistence(chips[0]);
        if (dgm.size() != k) return fail(fmt("spec %d: %zu points for %zu blobs", i, dgm.size(), k));
        std::vector<double> deaths;
        for (const auto& p : dgm.points) deaths.push_back(p.death);
        std::vector<double> peaks;
        for (const auto& b : spec.blobs) peaks.push_back(b.peak);
        std::sort(deaths.begin(), deaths.end());
        std::sort(peaks.begin(), peaks.end());
        for (std::size_t j = 0; j < k; ++j) {
            if (std::abs(deaths[j] - peaks[j]) > 1e-12) {
                return fail(fmt("spec %d: death %.17g vs peak %.17g", i, deaths[j], peaks[j]));
            }
        }
    }
    return pass(fmt("%d noise-free specs, k = 0..10 interior plateau blobs, deaths = peaks to 1e-12", kSpecs));
}

Outcome pi_contract() {
    const PIGridSpec spec;
    if (vectorize({}, spec).rows() != 10 || vectorize({}, spec).cols() != 10) return fail("grid is not 10x10");

    Rng rng(1003);
    auto random_diagram = [&](std::size_t n) {
        PersistenceDiagram d;
        for (std::size_t i = 0; i < n; ++i) {
            const double b = rng.uniform01();
            d.points.push_back({b, b + (1.0 - b) * rng.uniform01()});
        }
        return d;
    };

    double linearity = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto a = random_diagram(rng.below(25));
        const auto b = random_diagram(rng.below(25));
        PersistenceDiagram u = a;
        u.points.insert(u.points.end(), b.points.begin(), b.points.end());
        const auto pa = vectorize(a, spec);
        const auto pb = vectorize(b, spec);
        const auto pu = vectorize(u, spec);
        for (std::size_t i = 0; i < 100; ++i) {
            linearity = std::max(linearity, std::abs(pu.values()[i] - pa.values()[i] - pb.values()[i]));
        }
    }
    if (linearity > 1e-12) return fail(fmt("linearity error %.3g", linearity));

    for (double b : {0.0, 0.25, 0.5, 1.0}) {
        const auto pi = vectorize(PersistenceDiagram{{{b, b}}}, spec);
        for (double v : pi.values()) {
            if (v != 0.0) return fail("zero-persistence point has nonzero weight");
        }
    }

    const double bound = std::sqrt(2.0) * std::sqrt(2.0 / std::numbers::pi) / spec.sigma + 1.0;
    double worst_ratio = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double b = rng.uniform(0.05, 0.9);
        const double p = rng.uniform(0.05, 0.95 - b);
        const double delta = std::exp(rng.uniform(std::log(1e-4), std::log(1e-2)));
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const auto before = vectorize(PersistenceDiagram{{{b, b + p}}}, spec);
        const double b2 = b + delta * std::cos(angle);
        const double p2 = p + delta * std::sin(angle);
        const auto after = vectorize(PersistenceDiagram{{{b2, b2 + p2}}}, spec);
        double l1 = 0.0;
        for (std::size_t i = 0; i < 100; ++i) l1 += std::abs(before.values()[i] - after.values()[i]);
        worst_ratio = std::max(worst_ratio, l1 / delta);
    }
    if (!(worst_ratio <= bound)) return fail(fmt("stability ratio %.4g exceeds %.4g", worst_ratio, bound));

    double mass_error = 0.0;
    for (int t = 0; t < 10; ++t) {
        const double b = rng.uniform(0.1, 0.8);
        const double p = rng.uniform(0.05, 0.9 - b);
        const auto pi = vectorize(PersistenceDiagram{{{b, b + p}}}, spec);
        double total = 0.0;
        for (std::size_t r = 0; r < 10; ++r) {
            for (std::size_t c = 0; c < 10; ++c) {
                const double oracle = p * testing::gaussian_mass_2d(b, p, spec.sigma, c * 0.1, (c + 1) * 0.1,
                                                                    r * 0.1, (r + 1) * 0.1);
                mass_error = std::max(mass_error, std::abs(pi(r, c) - oracle));
                total += oracle;
            }
        }
        mass_error = std::max(mass_error, std::abs(pi.total_mass() - total));
    }
    if (mass_error > 1e-6) return fail(fmt("kernel mass differs from quadrature by %.3g", mass_error));

    return pass(fmt("10x10; linearity %.1e; stability ratio max %.2f <= %.2f; mass error %.1e",
                    linearity, worst_ratio, bound, mass_error));
}

Outcome pca_contract() {
    Rng rng(1004);
    auto oracle_gap = [](const std::vector<std::vector<double>>& rows) {
        const auto model = pca_fit(rows);
        const std::size_t n = rows.size();
        const std::size_t d = rows[0].size();
        std::vector<double> mean(d, 0.0);
        for (const auto& r : rows)
            for (std::size_t k = 0; k < d; ++k) mean[k] += r[k];
        for (double& v : mean) v /= static_cast<double>(n);
        std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
        for (const auto& r : rows)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
        for (auto& row : cov)
            for (double& v : row) v /= static_cast<double>(n - 1);
        const auto [values, vectors] = testing::jacobi_eigen(cov);
        double worst = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += model.components[c][k] * vectors[c][k];
            const double sign = dot < 0 ? -1.0 : 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                worst = std::max(worst, std::abs(model.components[c][k] - sign * vectors[c][k]));
            }
            worst = std::max(worst, std::abs(model.explained_variance[c] - values[c]) / values[c]);
        }
        return worst;
    };

    std::vector<std::vector<double>> gauss(500, std::vector<double>(100));
    for (auto& r : gauss)
        for (double& v : r) v = gaussian(rng);
    const double gauss_gap = oracle_gap(gauss);

    std::vector<std::vector<double>> pis;
    for (const auto& img : generate_corpus(Preset::t5_like, 120, 128, 128, 77)) {
        const auto pi = vectorize(compute_persistence(img), PIGridSpec{});
        pis.emplace_back(pi.values().begin(), pi.values().end());
    }
    const double pi_gap = oracle_gap(pis);
    if (gauss_gap > 1e-8 || pi_gap > 1e-8) {
        return fail(fmt("oracle gap %.3g (Gaussian), %.3g (PI corpus)", gauss_gap, pi_gap));
    }

    testing::TempDir dir("mfid-accept");
    testing::write_preset_corpus(dir / "e", Preset::t5_like, 8, 192, 11, Origin::experimental);
    testing::write_preset_corpus(dir / "s1", Preset::t5_like, 8, 192, 12, Origin::synthetic);
    testing::write_preset_corpus(dir / "s2", Preset::t6_like, 13, 192, 13, Origin::synthetic);
    const auto r1 = run_pipeline(corpus_config(dir, "e", "s1", "o1"));
    const auto r2 = run_pipeline(corpus_config(dir, "e", "s2", "o2"));
    if (!(r1.groups.at(0).pca == r2.groups.at(0).pca)) return fail("PCA model changed with the synthetic corpus");
    if (testing::read_file(dir / "o1/T5_uts_pca.json") != testing::read_file(dir / "o2/T5_uts_pca.json")) {
        return fail("PCA model file changed with the synthetic corpus");
    }
    return pass(fmt("max deviation from Jacobi %.1e (Gaussian), %.1e (PI corpus); model unchanged under synthetic swap",
                    gauss_gap, pi_gap));
}

Outcome area_fractions() {
    const auto t = evenly_spaced_thresholds();
    if (t.size() != 10 || t.front() != 0.0 || t.back() != 1.0) return fail("threshold set is not 10 points spanning [0, 1]");
    for (std::size_t j = 1; j < t.size(); ++j) {
        if (std::abs((t[j] - t[j - 1]) - 1.0 / 9.0) > 1e-12) return fail("thresholds are not evenly spaced");
    }

    const auto corpus = generate_corpus(Preset::t6_like, 1200, 64, 64, 505);
    for (const auto& img : corpus) {
        const auto c = area_fraction_curve(img);
        for (std::size_t j = 1; j < c.fractions.size(); ++j) {
            if (c.fractions[j] > c.fractions[j - 1]) return fail("curve increases");
        }
    }
    const auto a = mean_area_fraction(corpus, 1000, 99);
    const auto b = mean_area_fraction(corpus, 1000, 99);
    if (std::memcmp(a.fractions.data(), b.fractions.data(), a.fractions.size() * sizeof(double)) != 0) {
        return fail("direct 1000-image mean differs between runs");
    }
    for (std::size_t j = 1; j < a.fractions.size(); ++j) {
        if (a.fractions[j] > a.fractions[j - 1]) return fail("mean curve increases");
    }

    // End to end: 1200 chips, 1000 sampled, normalized, twice and at two worker counts.
    testing::TempDir dir("mfid-accept");
    testing::write_preset_corpus(dir / "e", Preset::t5_like, 300, 128, 21, Origin::experimental);
    testing::write_preset_corpus(dir / "s", Preset::t6_like, 300, 128, 22, Origin::synthetic);
    auto cfg = corpus_config(dir, "e", "s", "o");
    cfg.chip_spec = ChipSpec{64, 64};
    run_pipeline(cfg);
    const auto first = testing::read_file(dir / "o/T5_uts_area_experimental.csv") +
                       testing::read_file(dir / "o/T5_uts_area_synthetic.csv");
    cfg.workers = 4;
    run_pipeline(cfg);
    const auto second = testing::read_file(dir / "o/T5_uts_area_experimental.csv") +
                        testing::read_file(dir / "o/T5_uts_area_synthetic.csv");
    if (first != second) return fail("pipeline area-fraction CSVs differ between runs");
    return pass("10 thresholds 0..1 step 1/9; 1200 monotone curves; 1000-image means byte-identical");
}

Outcome self_comparison_and_separation() {
    testing::TempDir dir("mfid-accept");
    testing::write_preset_corpus(dir / "same", Preset::t5_like, 10, 192, 31, Origin::experimental);
    const auto self = run_pipeline(corpus_config(dir, "same", "same", "self"));
    if (self.groups.empty()) return fail("self-comparison produced no groups");
    for (const auto& g : self.groups) {
        if (g.pi_distance != 0.0 || g.max_area_fraction_gap != 0.0) {
            return fail(fmt("%s: distance %.3g, gap %.3g", g.id.c_str(), g.pi_distance, g.max_area_fraction_gap));
        }
    }

    std::string detail = "self: distance 0, gap 0; ratios";
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const std::string s = std::to_string(seed);
        testing::write_preset_corpus(dir / ("a" + s), Preset::t5_like, 12, 192, seed * 1000 + 1, Origin::experimental);
        testing::write_preset_corpus(dir / ("b" + s), Preset::t5_like, 12, 192, seed * 1000 + 2, Origin::synthetic);
        testing::write_preset_corpus(dir / ("c" + s), Preset::t6_like, 12, 192, seed * 1000 + 3, Origin::synthetic);
        const double base = run_pipeline(corpus_config(dir, "a" + s, "b" + s, "ob" + s)).groups.at(0).pi_distance;
        const double sep = run_pipeline(corpus_config(dir, "a" + s, "c" + s, "oc" + s)).groups.at(0).pi_distance;
        if (!(sep > 5.0 * base)) return fail(fmt("seed %d: separation %.4g vs baseline %.4g", int(seed), sep, base));
        detail += fmt(" %.0fx", sep / base);
    }
    return pass(detail + " (> 5x, 3 seeds)");
}

Outcome chipping_arithmetic() {
    const ChipSpec spec{128, 64};
    const std::size_t per_image = chip_count(2560, 1920, spec);
    if (per_image != 1131) return fail(fmt("2560x1920 gives %zu chips", per_image));

    std::ifstream in(MFID_SOURCE_DIR "/configs/full_scale_corpus.json");
    if (!in) return fail("configs/full_scale_corpus.json not found");
    const auto j = nlohmann::json::parse(in);
    const std::size_t images = j.at("experiments").get<std::size_t>() * j.at("images_per_experiment").get<std::size_t>();
    const ChipSpec cfg_spec{j.at("chip_spec").at("chip_size").get<std::size_t>(),
                            j.at("chip_spec").at("stride").get<std::size_t>()};
    const std::size_t total =
        images * chip_count(j.at("image_width").get<std::size_t>(), j.at("image_height").get<std::size_t>(), cfg_spec);
    const double decades = std::abs(std::log10(static_cast<double>(total) / 4.37e5));
    const std::string detail = fmt("1131 chips per image; %zu images -> %zu chips", images, total);
    return decades < 0.5 ? pass(detail) : fail(detail + " (not on the 4e5 scale)");
}

Outcome table_counts() {
    const char* path = std::getenv("MFID_FEED_RATES");
    if (!path || !*path) return skip("MFID_FEED_RATES not set");
    std::ifstream in(path);
    if (!in) return fail(std::string("cannot read ") + path);
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::replace(token.begin(), token.end(), ',', ' ');
        std::istringstream parts(token);
        double v;
        while (parts >> v) values.push_back(v);
    }
    if (values.size() != 32) return fail(fmt("expected 32 feed rates, read %zu", values.size()));
    const auto binning = fit_tertile_binning(values, "feed_rate");
    std::size_t counts[3] = {0, 0, 0};
    for (double v : values) ++counts[static_cast<int>(binning.label(v))];
    const std::string detail = fmt("low/mid/hi = %zu/%zu/%zu", counts[0], counts[1], counts[2]);
    return counts[0] == 9 && counts[1] == 8 && counts[2] == 15 ? pass(detail) : fail(detail + " (want 9/8/15)");
}

Outcome real_corpus_gap() {
    const char* path = std::getenv("MFID_REAL_CONFIG");
    if (!path || !*path) return skip("MFID_REAL_CONFIG not set");
    const auto report = run_pipeline(load_pipeline_config(path));
    std::string detail;
    bool ok = true;
    bool any = false;
    for (const auto& g : report.groups) {
        if (g.temper != Temper::t5) continue;
        any = true;
        detail += fmt("%s gap %.3f; ", g.id.c_str(), g.max_area_fraction_gap);
        ok = ok && g.max_area_fraction_gap < 0.10;
    }
    if (!any) return fail("no T5 group in the report");
    return ok ? pass(detail) : fail(detail + "(limit 0.10)");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"oracle equivalence", oracle_equivalence},
        {"blob-count recovery", blob_recovery},
        {"PI contract", pi_contract},
        {"PCA contract", pca_contract},
        {"area fractions", area_fractions},
        {"self-comparison null and preset separation", self_comparison_and_separation},
        {"chipping arithmetic", chipping_arithmetic},
        {"feed-rate tertile counts (optional, data)", table_counts},
        {"T5 area-fraction gap on real corpora (optional, data)", real_corpus_gap},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = check();
        } catch (const std::exception& ex) {
            out = fail(std::string("exception: ") + ex.what());
        }
        const char* tag = out.status == Status::pass ? "PASS" : out.status == Status::fail ? "FAIL" : "SKIP";
        failures += out.status == Status::fail;
        std::printf("[%s] %s: %s [%.1f s]\n", tag, name, out.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
