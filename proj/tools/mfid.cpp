#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfid/analytics.hpp"
#include "mfid/cubical.hpp"
#include "mfid/dataset.hpp"
#include "mfid/error.hpp"
#include "mfid/image_io.hpp"
#include "mfid/manifest.hpp"
#include "mfid/parallel.hpp"
#include "mfid/persim.hpp"
#include "mfid/pipeline.hpp"
#include "mfid/synthgen.hpp"

namespace fs = std::filesystem;
using namespace mfid;

namespace {

// Exit codes: 0 complete, 1 groups skipped, 2 hard error.
constexpr int kExitError = 2;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::optional<fs::path> out;

    fs::path out_dir() const { return out.value_or(fs::path(".")); }
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write '" + path.string() + "'");
}

bool is_manifest(const fs::path& p) {
    const auto ext = p.extension().string();
    return ext == ".csv" || ext == ".json";
}

std::string chip_name(const std::string& stem, const ChipAnchor& a) {
    return stem + "-y" + std::to_string(a.y) + "-x" + std::to_string(a.x);
}

// "<id>.dgm.csv" -> "<id>", "<id>.pi.csv" -> "<id>".
std::string strip_suffix(const fs::path& p, const std::string& suffix) {
    const std::string name = p.filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) return name.substr(0, name.size() - suffix.size());
    return p.stem().string();
}

void add_grid_options(CLI::App* cmd, PIGridSpec& spec, std::string& evaluation) {
    cmd->add_option("--bins-x", spec.bins_x, "Birth bins")->capture_default_str();
    cmd->add_option("--bins-y", spec.bins_y, "Persistence bins")->capture_default_str();
    cmd->add_option("--birth-max", spec.birth_max, "Upper end of the birth axis")->capture_default_str();
    cmd->add_option("--persistence-max", spec.persistence_max, "Upper end of the persistence axis")
        ->capture_default_str();
    cmd->add_option("--sigma", spec.sigma, "Gaussian kernel standard deviation")->capture_default_str();
    cmd->add_option("--evaluation", evaluation, "bin_integral or bin_center")
        ->check(CLI::IsMember({"bin_integral", "bin_center"}))
        ->capture_default_str();
}

KernelEvaluation parse_evaluation(const std::string& s) {
    return s == "bin_center" ? KernelEvaluation::bin_center : KernelEvaluation::bin_integral;
}

// chip ---------------------------------------------------------------------

struct ChipArgs {
    std::vector<fs::path> inputs;
    ChipSpec spec;
    bool count_only = false;
};

int run_chip(const ChipArgs& a, const Globals& g) {
    const fs::path out = g.out_dir();
    if (!a.count_only) ensure_dir(out);

    struct Job {
        fs::path image;
        std::string stem;
        const ManifestEntry* entry = nullptr;
    };
    std::vector<CorpusManifest> manifests;
    manifests.reserve(a.inputs.size());
    std::vector<Job> jobs;
    for (const auto& in : a.inputs) {
        if (is_manifest(in)) {
            manifests.push_back(load_manifest(in));
            for (const auto& e : manifests.back().entries) {
                jobs.push_back({resolve_entry_path(e, in), fs::path(e.path).stem().string(), &e});
            }
        } else {
            jobs.push_back({in, in.stem().string(), nullptr});
        }
    }

    std::vector<std::vector<ManifestEntry>> produced(jobs.size());
    std::vector<std::size_t> counts(jobs.size());
    parallel_for(jobs.size(), g.workers, [&](std::size_t i) {
        const GrayImage image = load_image(jobs[i].image);
        const auto anchors = chip_anchors(image.width(), image.height(), a.spec);
        counts[i] = anchors.size();
        if (a.count_only) return;
        for (const auto& anchor : anchors) {
            const std::string name = chip_name(jobs[i].stem, anchor) + ".png";
            save_png(crop_chip(image, anchor, a.spec.chip_size), out / name);
            if (jobs[i].entry) {
                ManifestEntry e = *jobs[i].entry;
                e.path = name;
                produced[i].push_back(std::move(e));
            }
        }
    });

    std::size_t total = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        std::cout << jobs[i].image.string() << '\t' << counts[i] << '\n';
        total += counts[i];
    }
    std::cout << "total\t" << total << '\n';

    if (!a.count_only && !manifests.empty()) {
        CorpusManifest chips;
        for (auto& p : produced) std::move(p.begin(), p.end(), std::back_inserter(chips.entries));
        save_manifest(chips, out / "chips.csv");
        save_manifest(chips, out / "chips.json");
    }
    return 0;
}

// bin ----------------------------------------------------------------------

struct BinArgs {
    fs::path manifest;
    std::string condition;
};

int run_bin(const BinArgs& a, const Globals& g) {
    const CorpusManifest manifest = load_manifest(a.manifest);
    const auto values = condition_values(manifest, a.condition);
    const ConditionBinning binning = fit_tertile_binning(values, a.condition);
    const LabelingResult result = assign_labels(manifest, binning);

    std::map<BinLabel, std::size_t> counts;
    for (double v : values) ++counts[binning.label(v)];
    std::printf("%s: low <= %.17g < mid <= %.17g < hi\n", a.condition.c_str(), binning.lower_threshold,
                binning.upper_threshold);
    std::printf("counts low/mid/hi: %zu/%zu/%zu (labeled %zu, skipped %zu)\n", counts[BinLabel::low],
                counts[BinLabel::mid], counts[BinLabel::hi], result.labeled, result.skipped);

    const fs::path out = g.out_dir();
    ensure_dir(out);
    const std::string stem = a.manifest.stem().string() + "_labeled";
    save_manifest(result.manifest, out / (stem + ".csv"));
    save_manifest(result.manifest, out / (stem + ".json"));
    return 0;
}

// ph -----------------------------------------------------------------------

struct PhArgs {
    std::vector<fs::path> images;
    bool brute_force = false;
};

int run_ph(const PhArgs& a, const Globals& g) {
    const fs::path out = g.out_dir();
    ensure_dir(out);
    std::vector<std::size_t> sizes(a.images.size());
    parallel_for(a.images.size(), g.workers, [&](std::size_t i) {
        const GrayImage chip = load_image(a.images[i]);
        const auto dgm = a.brute_force ? brute_force_persistence(chip) : compute_persistence(chip);
        sizes[i] = dgm.size();
        save_diagram(dgm, out / (a.images[i].stem().string() + ".dgm.csv"));
    });
    for (std::size_t i = 0; i < a.images.size(); ++i) {
        std::cout << a.images[i].stem().string() << '\t' << sizes[i] << '\n';
    }
    return 0;
}

// pi -----------------------------------------------------------------------

struct PiArgs {
    std::vector<fs::path> diagrams;
    PIGridSpec spec;
    std::string evaluation = "bin_integral";
    std::string average;
};

int run_pi(PiArgs a, const Globals& g) {
    a.spec.evaluation = parse_evaluation(a.evaluation);
    a.spec.validate();
    const fs::path out = g.out_dir();
    ensure_dir(out);
    std::vector<PersistenceImage> pis(a.diagrams.size());
    parallel_for(a.diagrams.size(), g.workers, [&](std::size_t i) {
        pis[i] = vectorize(load_diagram(a.diagrams[i]), a.spec);
        save_pi(pis[i], out, strip_suffix(a.diagrams[i], ".dgm.csv"));
    });
    if (!a.average.empty()) {
        const auto path = save_pi(average_pis(pis), out, a.average);
        std::cout << "average\t" << path.string() << '\n';
    }
    std::cout << "images\t" << pis.size() << '\n';
    return 0;
}

// pca ----------------------------------------------------------------------

struct PcaArgs {
    std::vector<fs::path> fit;
    std::vector<fs::path> project;
    fs::path model;
    std::size_t components = 3;
    std::string temper;
};

int run_pca(const PcaArgs& a, const Globals& g) {
    if (a.fit.empty() == a.model.empty()) throw InvalidArgument("give exactly one of --fit or --model");
    const fs::path out = g.out_dir();
    ensure_dir(out);

    auto load_all = [&](const std::vector<fs::path>& paths) {
        std::vector<PersistenceImage> pis(paths.size());
        parallel_for(paths.size(), g.workers, [&](std::size_t i) { pis[i] = load_pi(paths[i]); });
        return pis;
    };
    const auto fit_pis = load_all(a.fit);
    PCAModel model;
    if (a.model.empty()) {
        PcaOptions opts;
        opts.components = a.components;
        opts.allow_degenerate = true;
        model = pca_fit(std::span<const PersistenceImage>(fit_pis), opts);
        save_pca_model(model, out / "pca.json");
        std::cout << "explained_variance";
        for (double v : model.explained_variance) std::cout << '\t' << v;
        std::cout << '\n';
    } else {
        model = load_pca_model(a.model);
    }

    const Temper temper = a.temper.empty() ? Temper::t5 : parse_temper(a.temper);
    std::vector<ProjectionRow> rows;
    auto project = [&](const std::vector<fs::path>& paths, const std::vector<PersistenceImage>& pis,
                       Origin origin) {
        for (std::size_t i = 0; i < pis.size(); ++i) {
            rows.push_back({strip_suffix(paths[i], ".pi.csv"), origin, temper, std::nullopt,
                            pca_project(model, pis[i])});
        }
    };
    project(a.fit, fit_pis, Origin::experimental);
    project(a.project, load_all(a.project), Origin::synthetic);
    std::ostringstream csv;
    write_projection_csv(rows, csv);
    write_file(out / "projections.csv", csv.str());
    return 0;
}

// area ---------------------------------------------------------------------

struct AreaArgs {
    fs::path manifest;
    ChipSpec spec;
    std::size_t sample = 1000;
    std::string mode = "per_image_centering";
    std::string condition;
    std::string temper;
};

int run_area(const AreaArgs& a, const Globals& g) {
    if (!g.seed) throw InvalidArgument("area sampling needs an explicit --seed");
    const CorpusManifest manifest = load_manifest(a.manifest);
    std::vector<const ManifestEntry*> entries;
    for (const auto& e : manifest.entries) {
        if (!a.condition.empty() && e.condition_name != a.condition) continue;
        if (!a.temper.empty() && e.temper != parse_temper(a.temper)) continue;
        entries.push_back(&e);
    }
    if (entries.empty()) throw InvalidArgument("no manifest entries match the filters");

    std::vector<std::vector<GrayImage>> per_entry(entries.size());
    parallel_for(entries.size(), g.workers, [&](std::size_t i) {
        per_entry[i] = extract_chips(load_image(resolve_entry_path(*entries[i], a.manifest)), a.spec);
    });
    std::vector<GrayImage> chips;
    for (auto& v : per_entry) std::move(v.begin(), v.end(), std::back_inserter(chips));

    std::vector<GrayImage> sample;
    for (std::size_t i : sample_without_replacement(chips.size(), a.sample, *g.seed)) sample.push_back(chips[i]);
    const auto norm = normalize_condition(sample, parse_normalization_mode(a.mode));
    std::vector<AreaFractionCurve> curves(norm.images.size());
    parallel_for(curves.size(), g.workers, [&](std::size_t i) { curves[i] = area_fraction_curve(norm.images[i]); });
    const auto curve = average_curves(curves);

    const fs::path out = g.out_dir();
    ensure_dir(out);
    std::ostringstream csv;
    write_area_fraction_csv(curve, csv);
    write_file(out / "area.csv", csv.str());
    std::cout << "chips\t" << chips.size() << "\nsampled\t" << sample.size() << "\nclamped\t" << norm.clamped
              << '\n';
    return 0;
}

// synthgen -----------------------------------------------------------------

struct SynthArgs {
    std::string preset;
    CorpusWriteOptions opts;
    std::string temper = "T5";
    std::string origin = "synthetic";
    std::optional<double> condition_value;
    int depth = 16;
};

int run_synthgen(SynthArgs a, const Globals& g) {
    a.opts.preset = parse_preset(a.preset);
    a.opts.temper = parse_temper(a.temper);
    a.opts.origin = parse_origin(a.origin);
    a.opts.condition_value = a.condition_value;
    a.opts.depth = a.depth == 8 ? BitDepth::eight : BitDepth::sixteen;
    a.opts.seed = g.seed.value_or(0);
    a.opts.workers = g.workers;
    const fs::path out = g.out_dir();
    const auto manifest = write_corpus(a.opts, out);
    save_manifest(manifest, out / "manifest.csv");
    save_manifest(manifest, out / "manifest.json");
    std::cout << "images\t" << manifest.entries.size() << "\nmanifest\t" << (out / "manifest.csv").string() << '\n';
    return 0;
}

// report -------------------------------------------------------------------

struct ReportArgs {
    fs::path config;
    fs::path experimental;
    fs::path synthetic;
    std::vector<std::string> conditions;
    std::optional<std::string> mode;
    std::optional<std::size_t> sample;
    std::optional<std::size_t> chip_size;
    std::optional<std::size_t> stride;
};

int run_report(const ReportArgs& a, const Globals& g) {
    PipelineConfig cfg;
    if (!a.config.empty()) cfg = load_pipeline_config(a.config);
    if (!a.experimental.empty()) cfg.experimental_manifest = a.experimental;
    if (!a.synthetic.empty()) cfg.synthetic_manifest = a.synthetic;
    if (cfg.experimental_manifest.empty() || cfg.synthetic_manifest.empty()) {
        throw InvalidArgument("report needs a config file or both --experimental and --synthetic");
    }
    if (!a.conditions.empty()) {
        cfg.conditions.clear();
        for (const auto& c : a.conditions) cfg.conditions.push_back({c, {}});
    }
    if (a.mode) cfg.normalization_mode = parse_normalization_mode(*a.mode);
    if (a.sample) cfg.area_sample_size = *a.sample;
    if (a.chip_size) cfg.chip_spec.chip_size = *a.chip_size;
    if (a.stride) cfg.chip_spec.stride = *a.stride;
    if (g.seed) cfg.seed = *g.seed;
    if (g.out) cfg.output_dir = *g.out;
    cfg.workers = g.workers;

    const FidelityReport report = run_pipeline(cfg);
    for (const auto& grp : report.groups) {
        std::printf("%s\tpi_distance %.6g\tmax_area_fraction_gap %.6g\tchips %zu/%zu\n", grp.id.c_str(),
                    grp.pi_distance, grp.max_area_fraction_gap, grp.experimental_chips, grp.synthetic_chips);
    }
    for (const auto& s : report.skipped) std::printf("%s\tskipped: %s\n", s.id.c_str(), s.reason.c_str());
    std::printf("report\t%s\n", (cfg.output_dir / "report.json").string().c_str());
    return exit_status(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological fidelity checks for microstructure image corpora"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed = 0;
    std::string out;
    auto* seed_opt = app.add_option("--seed", seed, "Seed for every random choice");
    app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    auto* out_opt = app.add_option("--out", out, "Output directory");

    ChipArgs chip;
    auto* chip_cmd = app.add_subcommand("chip", "Cut images (or manifest entries) into overlapping chips");
    chip_cmd->add_option("inputs", chip.inputs, "Images, or manifests whose entries are chipped")->required();
    chip_cmd->add_option("--chip-size", chip.spec.chip_size)->capture_default_str();
    chip_cmd->add_option("--stride", chip.spec.stride)->capture_default_str();
    chip_cmd->add_flag("--count-only", chip.count_only, "Report chip counts without writing chips");

    BinArgs bin;
    auto* bin_cmd = app.add_subcommand("bin", "Fit tertile bins for a condition and label a manifest");
    bin_cmd->add_option("manifest", bin.manifest)->required();
    bin_cmd->add_option("--condition", bin.condition, "Condition name, e.g. feed_rate or uts")->required();

    PhArgs ph;
    auto* ph_cmd = app.add_subcommand("ph", "One-dimensional persistence diagrams of chips");
    ph_cmd->add_option("images", ph.images)->required();
    ph_cmd->add_flag("--brute-force", ph.brute_force, "Use the unoptimized reference reduction");

    PiArgs pi;
    auto* pi_cmd = app.add_subcommand("pi", "Persistence images from diagram files");
    pi_cmd->add_option("diagrams", pi.diagrams, "<chip_id>.dgm.csv files")->required();
    add_grid_options(pi_cmd, pi.spec, pi.evaluation);
    pi_cmd->add_option("--average", pi.average, "Also write the average image under this name");

    PcaArgs pca;
    auto* pca_cmd = app.add_subcommand("pca", "Fit PCA on experimental PIs and project PIs onto it");
    pca_cmd->add_option("--fit", pca.fit, "Experimental .pi.csv files to fit on");
    pca_cmd->add_option("--model", pca.model, "Existing pca.json instead of fitting");
    pca_cmd->add_option("--project", pca.project, "Synthetic .pi.csv files to project");
    pca_cmd->add_option("--components", pca.components)->capture_default_str();
    pca_cmd->add_option("--temper", pca.temper, "Temper written to the projection rows");

    AreaArgs area;
    auto* area_cmd = app.add_subcommand("area", "Mean area-fraction curve over a seeded chip sample");
    area_cmd->add_option("manifest", area.manifest)->required();
    area_cmd->add_option("--chip-size", area.spec.chip_size)->capture_default_str();
    area_cmd->add_option("--stride", area.spec.stride)->capture_default_str();
    area_cmd->add_option("--sample", area.sample, "Chips sampled without replacement")->capture_default_str();
    area_cmd->add_option("--mode", area.mode)
        ->check(CLI::IsMember({"per_image_centering", "corpus_minmax"}))
        ->capture_default_str();
    area_cmd->add_option("--condition", area.condition, "Only entries with this condition name");
    area_cmd->add_option("--temper", area.temper, "Only entries with this temper");

    SynthArgs syn;
    auto* syn_cmd = app.add_subcommand("synthgen", "Procedural corpus with a manifest");
    syn_cmd->add_option("--preset", syn.preset)->check(CLI::IsMember({"t5_like", "t6_like"}))->required();
    syn_cmd->add_option("--count", syn.opts.count)->required();
    syn_cmd->add_option("--width", syn.opts.width)->capture_default_str();
    syn_cmd->add_option("--height", syn.opts.height)->capture_default_str();
    syn_cmd->add_option("--temper", syn.temper)->capture_default_str();
    syn_cmd->add_option("--origin", syn.origin)->capture_default_str();
    syn_cmd->add_option("--condition-name", syn.opts.condition_name, "Defaults to the preset name");
    syn_cmd->add_option("--condition-value", syn.condition_value);
    syn_cmd->add_option("--prefix", syn.opts.file_prefix)->capture_default_str();
    syn_cmd->add_option("--depth", syn.depth, "PNG bit depth")->check(CLI::IsMember({8, 16}))->capture_default_str();

    ReportArgs rep;
    auto* rep_cmd = app.add_subcommand("report", "Full fidelity report: PIs, PCA, area fractions, plots");
    rep_cmd->add_option("config", rep.config, "Pipeline config JSON");
    rep_cmd->add_option("--experimental", rep.experimental, "Experimental manifest");
    rep_cmd->add_option("--synthetic", rep.synthetic, "Synthetic manifest");
    rep_cmd->add_option("--condition", rep.conditions, "Condition names to compare (repeatable)");
    rep_cmd->add_option("--mode", rep.mode)->check(CLI::IsMember({"per_image_centering", "corpus_minmax"}));
    rep_cmd->add_option("--sample", rep.sample, "Area-fraction sample size");
    rep_cmd->add_option("--chip-size", rep.chip_size);
    rep_cmd->add_option("--stride", rep.stride);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }
    if (seed_opt->count() > 0) g.seed = seed;
    if (out_opt->count() > 0) g.out = fs::path(out);

    try {
        if (chip_cmd->parsed()) return run_chip(chip, g);
        if (bin_cmd->parsed()) return run_bin(bin, g);
        if (ph_cmd->parsed()) return run_ph(ph, g);
        if (pi_cmd->parsed()) return run_pi(pi, g);
        if (pca_cmd->parsed()) return run_pca(pca, g);
        if (area_cmd->parsed()) return run_area(area, g);
        if (syn_cmd->parsed()) return run_synthgen(syn, g);
        if (rep_cmd->parsed()) return run_report(rep, g);
    } catch (const std::exception& e) {
        std::cerr << "mfid: error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
