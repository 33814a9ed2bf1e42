#include "mfid/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mfid/cubical.hpp"
#include "mfid/error.hpp"
#include "mfid/image_io.hpp"
#include "mfid/parallel.hpp"
#include "mfid/plots.hpp"
#include "mfid/random.hpp"

namespace mfid {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ojson pi_spec_json(const PIGridSpec& spec) {
    return ojson::parse(pi_spec_to_json(spec));
}

std::string group_id(Temper t, const std::string& condition) {
    return std::string(to_string(t)) + "_" + condition;
}

std::vector<std::string> plot_names(const std::string& id) {
    return {id + "_pi.svg", id + "_pca.svg", id + "_area.svg"};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// One chip of one side of a group.
struct ChipRecord {
    std::size_t entry = 0;  // index into the side's entry list
    ChipAnchor anchor;
    std::string chip_id;
};

struct SideData {
    std::vector<const ManifestEntry*> entries;
    fs::path manifest_path;
    std::vector<ChipRecord> chips;
    std::vector<PersistenceImage> pis;
};

void compute_side(SideData& side, const PipelineConfig& config) {
    const std::size_t n = side.entries.size();
    std::vector<std::vector<ChipRecord>> chips(n);
    std::vector<std::vector<PersistenceImage>> pis(n);

    parallel_for(n, config.workers, [&](std::size_t e) {
        const ManifestEntry& entry = *side.entries[e];
        const GrayImage image = load_image(resolve_entry_path(entry, side.manifest_path));
        const std::string stem = fs::path(entry.path).stem().string();
        for (const ChipAnchor& a : chip_anchors(image.width(), image.height(), config.chip_spec)) {
            const GrayImage chip = crop_chip(image, a, config.chip_spec.chip_size);
            pis[e].push_back(vectorize(compute_persistence(chip), config.pi_spec));
            chips[e].push_back({e, a,
                                "e" + std::to_string(e) + "-" + stem + "-y" + std::to_string(a.y) +
                                    "-x" + std::to_string(a.x)});
        }
    });
    for (std::size_t e = 0; e < n; ++e) {
        std::move(chips[e].begin(), chips[e].end(), std::back_inserter(side.chips));
        std::move(pis[e].begin(), pis[e].end(), std::back_inserter(side.pis));
    }
}

// Seeded chip sample, normalized within the condition, averaged into one curve.
AreaFractionCurve side_area_fraction(const SideData& side, const PipelineConfig& config,
                                     std::uint64_t seed, std::size_t& clamped) {
    const auto picks = sample_without_replacement(side.chips.size(), config.area_sample_size, seed);
    std::map<std::size_t, std::vector<std::size_t>> by_entry;  // entry -> positions in picks
    for (std::size_t i = 0; i < picks.size(); ++i) by_entry[side.chips[picks[i]].entry].push_back(i);

    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> jobs(by_entry.begin(), by_entry.end());
    std::vector<GrayImage> sample(picks.size());
    parallel_for(jobs.size(), config.workers, [&](std::size_t j) {
        const auto& [entry, positions] = jobs[j];
        const GrayImage image = load_image(resolve_entry_path(*side.entries[entry], side.manifest_path));
        for (std::size_t pos : positions) {
            sample[pos] = crop_chip(image, side.chips[picks[pos]].anchor, config.chip_spec.chip_size);
        }
    });

    NormalizationResult norm = normalize_condition(sample, config.normalization_mode);
    clamped = norm.clamped;
    std::vector<AreaFractionCurve> curves(norm.images.size());
    parallel_for(norm.images.size(), config.workers,
                 [&](std::size_t i) { curves[i] = area_fraction_curve(norm.images[i]); });
    return average_curves(curves);
}

GroupReport run_group(Temper temper, const std::string& condition, SideData& exp, SideData& syn,
                      const PipelineConfig& config) {
    GroupReport g;
    g.id = group_id(temper, condition);
    g.temper = temper;
    g.condition_name = condition;
    g.experimental_images = exp.entries.size();
    g.synthetic_images = syn.entries.size();

    compute_side(exp, config);
    compute_side(syn, config);
    g.experimental_chips = exp.chips.size();
    g.synthetic_chips = syn.chips.size();
    if (exp.pis.empty() || syn.pis.empty()) throw InvalidArgument("a corpus produced no chips");

    g.average_experimental = average_pis(exp.pis);
    g.average_synthetic = average_pis(syn.pis);
    g.pi_distance = pi_distance(g.average_experimental, g.average_synthetic);

    PcaOptions opts;
    opts.components = config.pca_components;
    opts.allow_degenerate = true;
    g.pca = pca_fit(std::span<const PersistenceImage>(exp.pis), opts);

    auto project_side = [&](const SideData& side, Origin origin) {
        for (std::size_t i = 0; i < side.chips.size(); ++i) {
            const ManifestEntry& entry = *side.entries[side.chips[i].entry];
            g.projections.push_back({side.chips[i].chip_id, origin, entry.temper, entry.bin_label,
                                     pca_project(g.pca, side.pis[i])});
        }
    };
    project_side(exp, Origin::experimental);
    project_side(syn, Origin::synthetic);

    // Same seed on both sides, so identical corpora draw identical samples.
    const std::uint64_t area_seed = stream_seed(config.seed, fnv1a(g.id));
    g.area_experimental = side_area_fraction(exp, config, area_seed, g.clamped_experimental);
    g.area_synthetic = side_area_fraction(syn, config, area_seed, g.clamped_synthetic);
    g.max_area_fraction_gap = max_abs_gap(g.area_experimental, g.area_synthetic);

    const fs::path& out = config.output_dir;
    save_pi(g.average_experimental, out, g.id + "_avg_experimental");
    save_pi(g.average_synthetic, out, g.id + "_avg_synthetic");
    save_pca_model(g.pca, out / (g.id + "_pca.json"));
    std::ostringstream proj;
    write_projection_csv(g.projections, proj);
    write_text(out / (g.id + "_projections.csv"), proj.str());
    for (const auto& [curve, suffix] : {std::pair{&g.area_experimental, "_area_experimental.csv"},
                                        std::pair{&g.area_synthetic, "_area_synthetic.csv"}}) {
        std::ostringstream area;
        write_area_fraction_csv(*curve, area);
        write_text(out / (g.id + suffix), area.str());
    }
    g.artifacts = {g.id + "_avg_experimental.pi.csv", g.id + "_avg_experimental.pi.json",
                   g.id + "_avg_synthetic.pi.csv",    g.id + "_avg_synthetic.pi.json",
                   g.id + "_pca.json",                g.id + "_projections.csv",
                   g.id + "_area_experimental.csv",   g.id + "_area_synthetic.csv"};
    for (auto& name : plot_names(g.id)) g.artifacts.push_back(std::move(name));
    return g;
}

ojson grid_json(const PersistenceImage& pi) {
    ojson rows = ojson::array();
    for (std::size_t r = 0; r < pi.rows(); ++r) {
        ojson row = ojson::array();
        for (std::size_t c = 0; c < pi.cols(); ++c) row.push_back(pi(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_projection_csv(const std::vector<ProjectionRow>& rows, std::ostream& out) {
    out << "chip_id,origin,temper,bin_label,pc1,pc2,pc3\n";
    char buf[64];
    for (const auto& row : rows) {
        out << row.chip_id << ',' << to_string(row.origin) << ',' << to_string(row.temper) << ','
            << (row.bin_label ? to_string(*row.bin_label) : std::string_view());
        for (std::size_t c = 0; c < 3; ++c) {
            out << ',';
            if (c < row.coordinates.size()) {
                auto [end, ec] = std::to_chars(buf, buf + sizeof buf, row.coordinates[c]);
                out.write(buf, end - buf);
            }
        }
        out << '\n';
    }
}

PipelineConfig pipeline_config_from_json(const std::string& text, const fs::path& base_dir) {
    PipelineConfig cfg;
    try {
        const auto j = nlohmann::json::parse(text);
        auto resolve = [&](const std::string& p) {
            fs::path path(p);
            return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
        };
        cfg.experimental_manifest = resolve(j.at("experimental_manifest").get<std::string>());
        cfg.synthetic_manifest = resolve(j.at("synthetic_manifest").get<std::string>());
        if (j.contains("chip_spec")) {
            cfg.chip_spec.chip_size = j["chip_spec"].value("chip_size", cfg.chip_spec.chip_size);
            cfg.chip_spec.stride = j["chip_spec"].value("stride", cfg.chip_spec.stride);
        }
        if (j.contains("pi_spec")) {
            // Fill in defaults for keys the caller left out.
            auto merged = nlohmann::json::parse(pi_spec_to_json(cfg.pi_spec));
            merged.update(j["pi_spec"]);
            cfg.pi_spec = pi_spec_from_json(merged.dump());
        }
        if (j.contains("conditions")) {
            for (const auto& c : j["conditions"]) {
                ConditionSelector sel;
                sel.condition_name = c.at("condition_name").get<std::string>();
                if (c.contains("tempers")) {
                    for (const auto& t : c["tempers"]) sel.tempers.push_back(parse_temper(t.get<std::string>()));
                }
                cfg.conditions.push_back(std::move(sel));
            }
        }
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("output_dir")) cfg.output_dir = resolve(j["output_dir"].get<std::string>());
        if (j.contains("normalization_mode")) {
            cfg.normalization_mode = parse_normalization_mode(j["normalization_mode"].get<std::string>());
        }
        cfg.workers = j.value("workers", cfg.workers);
        cfg.area_sample_size = j.value("area_sample_size", cfg.area_sample_size);
        cfg.pca_components = j.value("pca_components", cfg.pca_components);
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidArgument(std::string("bad pipeline config: ") + ex.what());
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return pipeline_config_from_json(buf.str(), path.parent_path());
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
    ojson j;
    j["experimental_manifest"] = cfg.experimental_manifest.string();
    j["synthetic_manifest"] = cfg.synthetic_manifest.string();
    j["chip_spec"] = {{"chip_size", cfg.chip_spec.chip_size}, {"stride", cfg.chip_spec.stride}};
    j["pi_spec"] = pi_spec_json(cfg.pi_spec);
    ojson conds = ojson::array();
    for (const auto& c : cfg.conditions) {
        ojson tempers = ojson::array();
        for (Temper t : c.tempers) tempers.push_back(to_string(t));
        conds.push_back({{"condition_name", c.condition_name}, {"tempers", tempers}});
    }
    j["conditions"] = conds;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir.string();
    j["normalization_mode"] = to_string(cfg.normalization_mode);
    j["area_sample_size"] = cfg.area_sample_size;
    j["pca_components"] = cfg.pca_components;
    // Worker count is deliberately absent: results do not depend on it.
    return j.dump(2);
}

FidelityReport run_pipeline(const PipelineConfig& config) {
    config.pi_spec.validate();
    if (config.workers == 0) throw InvalidArgument("worker count must be at least 1");
    if (config.area_sample_size == 0) throw InvalidArgument("area-fraction sample size must be positive");

    const CorpusManifest exp_manifest = load_manifest(config.experimental_manifest);
    const CorpusManifest syn_manifest = load_manifest(config.synthetic_manifest);

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.output_dir.string() + "': " + ec.message());

    std::vector<ConditionSelector> selectors = config.conditions;
    if (selectors.empty()) {
        std::set<std::string> names;
        for (const auto* m : {&exp_manifest, &syn_manifest})
            for (const auto& e : m->entries)
                if (!e.condition_name.empty()) names.insert(e.condition_name);
        for (const auto& n : names) selectors.push_back({n, {}});
    }

    FidelityReport report;
    report.config = config;
    for (const auto& sel : selectors) {
        std::set<Temper> tempers(sel.tempers.begin(), sel.tempers.end());
        if (tempers.empty()) {
            for (const auto* m : {&exp_manifest, &syn_manifest})
                for (const auto& e : m->entries)
                    if (e.condition_name == sel.condition_name) tempers.insert(e.temper);
        }
        for (Temper t : tempers) {
            SideData exp{{}, config.experimental_manifest, {}, {}};
            SideData syn{{}, config.synthetic_manifest, {}, {}};
            for (const auto& e : exp_manifest.entries)
                if (e.temper == t && e.condition_name == sel.condition_name) exp.entries.push_back(&e);
            for (const auto& e : syn_manifest.entries)
                if (e.temper == t && e.condition_name == sel.condition_name) syn.entries.push_back(&e);

            const std::string id = group_id(t, sel.condition_name);
            if (exp.entries.empty() || syn.entries.empty()) {
                report.skipped.push_back({id, t, sel.condition_name,
                                          exp.entries.empty() ? "no experimental entries"
                                                              : "no synthetic entries"});
                continue;
            }
            try {
                report.groups.push_back(run_group(t, sel.condition_name, exp, syn, config));
            } catch (const Error& ex) {
                throw Error(id + ": " + ex.what());
            }
        }
    }

    emit_plots(report, config.output_dir);
    write_text(config.output_dir / "report.json", report_to_json(report));
    return report;
}

int exit_status(const FidelityReport& report) {
    return report.skipped.empty() && !report.groups.empty() ? 0 : 1;
}

std::string report_to_json(const FidelityReport& report) {
    ojson j;
    j["schema_version"] = FidelityReport::kSchemaVersion;
    j["normalization_mode"] = to_string(report.config.normalization_mode);
    j["seed"] = report.config.seed;
    j["config"] = ojson::parse(pipeline_config_to_json(report.config));

    ojson groups = ojson::array();
    for (const auto& g : report.groups) {
        ojson gj;
        gj["id"] = g.id;
        gj["temper"] = to_string(g.temper);
        gj["condition_name"] = g.condition_name;
        gj["experimental"] = {{"images", g.experimental_images},
                              {"chips", g.experimental_chips},
                              {"average_pi", grid_json(g.average_experimental)},
                              {"mean_area_fraction", g.area_experimental.fractions},
                              {"clamped_pixels", g.clamped_experimental}};
        gj["synthetic"] = {{"images", g.synthetic_images},
                           {"chips", g.synthetic_chips},
                           {"average_pi", grid_json(g.average_synthetic)},
                           {"mean_area_fraction", g.area_synthetic.fractions},
                           {"clamped_pixels", g.clamped_synthetic}};
        gj["pi_distance"] = g.pi_distance;
        gj["area_fraction_thresholds"] = g.area_experimental.thresholds;
        gj["max_area_fraction_gap"] = g.max_area_fraction_gap;
        gj["pca"] = {{"explained_variance", g.pca.explained_variance},
                     {"degenerate_components", g.pca.degenerate_components},
                     {"fit_on", "experimental"}};
        gj["artifacts"] = g.artifacts;
        groups.push_back(std::move(gj));
    }
    j["groups"] = groups;

    ojson skipped = ojson::array();
    for (const auto& s : report.skipped) {
        skipped.push_back({{"id", s.id},
                           {"temper", to_string(s.temper)},
                           {"condition_name", s.condition_name},
                           {"reason", s.reason}});
    }
    j["skipped"] = skipped;
    j["exit_status"] = exit_status(report);
    return j.dump(2) + "\n";
}

std::vector<fs::path> emit_plots(const FidelityReport& report, const fs::path& output_dir) {
    std::vector<fs::path> written;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + output_dir.string() + "': " + ec.message());
    for (const auto& g : report.groups) {
        const auto names = plot_names(g.id);
        const fs::path pi_path = output_dir / names[0];
        const fs::path pca_path = output_dir / names[1];
        const fs::path area_path = output_dir / names[2];
        write_text(pi_path, svg::pi_heatmap_pair(g.average_experimental, g.average_synthetic,
                                                 "Average persistence images: " + g.id));
        write_text(pca_path, svg::pca_panels(g.projections, "PCA projections (experimental fit): " + g.id));
        write_text(area_path, svg::area_fraction_chart(g.area_experimental, g.area_synthetic,
                                                       "Mean area fraction: " + g.id));
        written.insert(written.end(), {pi_path, pca_path, area_path});
    }
    return written;
}

}  // namespace mfid
