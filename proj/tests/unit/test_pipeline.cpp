#include <algorithm>

#include "corpus.hpp"
#include "doctest.h"
#include "mfid/error.hpp"
#include "mfid/pipeline.hpp"
#include "mfid/plots.hpp"
#include "temp_dir.hpp"

using namespace mfid;
using testing::read_file;
using testing::write_preset_corpus;

namespace {

PipelineConfig small_config(const std::filesystem::path& exp, const std::filesystem::path& syn,
                            const std::filesystem::path& out) {
    PipelineConfig cfg;
    cfg.experimental_manifest = exp;
    cfg.synthetic_manifest = syn;
    cfg.chip_spec = ChipSpec{32, 32};
    cfg.output_dir = out;
    cfg.seed = 17;
    cfg.area_sample_size = 20;
    return cfg;
}

}  // namespace

TEST_CASE("self-comparison gives zero distance and zero gap") {
    testing::TempDir dir;
    const auto m = write_preset_corpus(dir / "a", Preset::t5_like, 4, 64, 1, Origin::experimental);
    const auto report = run_pipeline(small_config(m, m, dir / "out"));
    REQUIRE(report.groups.size() == 1);
    const auto& g = report.groups[0];
    CHECK(g.id == "T5_uts");
    CHECK(g.experimental_chips == 16);
    CHECK(g.synthetic_chips == 16);
    CHECK(g.pi_distance == 0.0);
    CHECK(g.max_area_fraction_gap == 0.0);
    CHECK(exit_status(report) == 0);
    for (const auto& name : g.artifacts) CHECK(std::filesystem::exists(dir / "out" / name));
    CHECK(std::filesystem::exists(dir / "out" / "report.json"));
}

TEST_CASE("t5-like against t6-like exceeds the same-preset baseline") {
    testing::TempDir dir;
    const auto t5a = write_preset_corpus(dir / "t5a", Preset::t5_like, 6, 64, 10, Origin::experimental);
    const auto t5b = write_preset_corpus(dir / "t5b", Preset::t5_like, 6, 64, 20, Origin::synthetic);
    const auto t6 = write_preset_corpus(dir / "t6", Preset::t6_like, 6, 64, 30, Origin::synthetic);
    const double baseline = run_pipeline(small_config(t5a, t5b, dir / "o1")).groups.at(0).pi_distance;
    const double separated = run_pipeline(small_config(t5a, t6, dir / "o2")).groups.at(0).pi_distance;
    CHECK(baseline > 0.0);
    CHECK(separated > baseline);
}

TEST_CASE("an empty synthetic manifest skips every group") {
    testing::TempDir dir;
    const auto m = write_preset_corpus(dir / "a", Preset::t5_like, 2, 64, 1, Origin::experimental);
    save_manifest(CorpusManifest{}, dir / "empty.csv");
    const auto report = run_pipeline(small_config(m, dir / "empty.csv", dir / "out"));
    CHECK(report.groups.empty());
    REQUIRE(report.skipped.size() == 1);
    CHECK(report.skipped[0].reason == "no synthetic entries");
    CHECK(exit_status(report) == 1);
    CHECK(read_file(dir / "out" / "report.json").find("\"exit_status\": 1") != std::string::npos);
}

TEST_CASE("groups follow temper and condition") {
    testing::TempDir dir;
    auto exp = load_manifest(write_preset_corpus(dir / "e5", Preset::t5_like, 2, 64, 1, Origin::experimental));
    const auto e6 = load_manifest(
        write_preset_corpus(dir / "e6", Preset::t6_like, 2, 64, 2, Origin::experimental, Temper::t6));
    for (auto& e : exp.entries) e.path = "e5/" + e.path;
    for (auto e : e6.entries) {
        e.path = "e6/" + e.path;
        exp.entries.push_back(e);
    }
    save_manifest(exp, dir / "exp.csv");
    auto syn = load_manifest(write_preset_corpus(dir / "s5", Preset::t5_like, 2, 64, 3, Origin::synthetic));
    for (auto& e : syn.entries) e.path = "s5/" + e.path;
    save_manifest(syn, dir / "syn.csv");

    auto cfg = small_config(dir / "exp.csv", dir / "syn.csv", dir / "out");
    auto report = run_pipeline(cfg);
    REQUIRE(report.groups.size() == 1);
    CHECK(report.groups[0].id == "T5_uts");
    REQUIRE(report.skipped.size() == 1);
    CHECK(report.skipped[0].id == "T6_uts");
    CHECK(report.skipped[0].reason == "no synthetic entries");

    cfg.conditions = {{"uts", {Temper::t5}}};
    report = run_pipeline(cfg);
    CHECK(report.groups.size() == 1);
    CHECK(report.skipped.empty());
    CHECK(exit_status(report) == 0);
}

TEST_CASE("report.json is byte-identical across runs and worker counts") {
    testing::TempDir dir;
    const auto a = write_preset_corpus(dir / "a", Preset::t5_like, 5, 64, 4, Origin::experimental);
    const auto b = write_preset_corpus(dir / "b", Preset::t6_like, 5, 64, 5, Origin::synthetic);
    auto cfg = small_config(a, b, dir / "out");
    run_pipeline(cfg);
    const std::string first = read_file(dir / "out" / "report.json");
    const std::string first_proj = read_file(dir / "out" / "T5_uts_projections.csv");
    run_pipeline(cfg);
    CHECK(read_file(dir / "out" / "report.json") == first);
    cfg.workers = 4;
    run_pipeline(cfg);
    CHECK(read_file(dir / "out" / "report.json") == first);
    CHECK(read_file(dir / "out" / "T5_uts_projections.csv") == first_proj);
    CHECK(first.find("\"schema_version\": 1") != std::string::npos);
}

TEST_CASE("PCA model does not depend on the synthetic corpus") {
    testing::TempDir dir;
    const auto e = write_preset_corpus(dir / "e", Preset::t5_like, 4, 64, 6, Origin::experimental);
    const auto s1 = write_preset_corpus(dir / "s1", Preset::t5_like, 4, 64, 7, Origin::synthetic);
    const auto s2 = write_preset_corpus(dir / "s2", Preset::t6_like, 7, 64, 8, Origin::synthetic);
    const auto r1 = run_pipeline(small_config(e, s1, dir / "o1"));
    const auto r2 = run_pipeline(small_config(e, s2, dir / "o2"));
    CHECK(r1.groups.at(0).pca == r2.groups.at(0).pca);
    CHECK(read_file(dir / "o1" / "T5_uts_pca.json") == read_file(dir / "o2" / "T5_uts_pca.json"));
}

TEST_CASE("projection and area CSV artifacts") {
    testing::TempDir dir;
    const auto e = write_preset_corpus(dir / "e", Preset::t5_like, 2, 64, 6, Origin::experimental);
    const auto s = write_preset_corpus(dir / "s", Preset::t6_like, 3, 64, 7, Origin::synthetic);
    const auto r = run_pipeline(small_config(e, s, dir / "out"));
    const std::string proj = read_file(dir / "out" / "T5_uts_projections.csv");
    CHECK(proj.rfind("chip_id,origin,temper,bin_label,pc1,pc2,pc3\n", 0) == 0);
    CHECK(std::count(proj.begin(), proj.end(), '\n') == 1 + 8 + 12);
    CHECK(proj.find(",synthetic,T5,,") != std::string::npos);
    const std::string area = read_file(dir / "out" / "T5_uts_area_experimental.csv");
    CHECK(area.rfind("threshold,mean_fraction\n0,1\n", 0) == 0);
    CHECK(std::count(area.begin(), area.end(), '\n') == 11);
    const auto pi = load_pi(dir / "out" / "T5_uts_avg_synthetic.pi.csv");
    CHECK(pi == r.groups[0].average_synthetic);
}

TEST_CASE("plots: three SVGs per group, deterministic, blank scale for zero PIs") {
    testing::TempDir dir;
    const auto e = write_preset_corpus(dir / "e", Preset::t5_like, 2, 64, 6, Origin::experimental);
    const auto report = run_pipeline(small_config(e, e, dir / "out"));
    const auto first = emit_plots(report, dir / "again");
    CHECK(first.size() == 3);
    for (const auto& p : first) {
        CHECK(p.extension() == ".svg");
        CHECK(read_file(p) == read_file(dir / "out" / p.filename()));
    }

    const PersistenceImage zero{PIGridSpec{}};
    const std::string svg = svg::pi_heatmap_pair(zero, zero, "zero");
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("inf") == std::string::npos);
    CHECK(svg.find("color scale 0 .. 0.00") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("pipeline config JSON") {
    const auto cfg = pipeline_config_from_json(R"({
        "experimental_manifest": "exp.csv",
        "synthetic_manifest": "/abs/syn.json",
        "chip_spec": {"chip_size": 64, "stride": 32},
        "pi_spec": {"kernel_sigma": 0.1},
        "conditions": [{"condition_name": "feed_rate", "tempers": ["T6"]}],
        "seed": 42,
        "normalization_mode": "corpus_minmax",
        "area_sample_size": 50
    })",
                                               "/base");
    CHECK(cfg.experimental_manifest == std::filesystem::path("/base/exp.csv"));
    CHECK(cfg.synthetic_manifest == std::filesystem::path("/abs/syn.json"));
    CHECK(cfg.chip_spec.chip_size == 64);
    CHECK(cfg.chip_spec.stride == 32);
    CHECK(cfg.pi_spec.sigma == 0.1);
    CHECK(cfg.pi_spec.bins_x == 10);
    REQUIRE(cfg.conditions.size() == 1);
    CHECK(cfg.conditions[0].tempers == std::vector<Temper>{Temper::t6});
    CHECK(cfg.seed == 42);
    CHECK(cfg.normalization_mode == NormalizationMode::corpus_minmax);
    CHECK(cfg.area_sample_size == 50);

    const auto again = pipeline_config_from_json(pipeline_config_to_json(cfg));
    CHECK(pipeline_config_to_json(again) == pipeline_config_to_json(cfg));

    CHECK_THROWS_AS(pipeline_config_from_json("{}"), InvalidArgument);
    CHECK_THROWS_AS(pipeline_config_from_json("not json"), InvalidArgument);
}

TEST_CASE("missing images surface with the group id") {
    testing::TempDir dir;
    CorpusManifest m;
    m.entries.push_back({"nope.png", Temper::t5, Origin::experimental, "uts", std::nullopt, std::nullopt});
    save_manifest(m, dir / "m.csv");
    try {
        run_pipeline(small_config(dir / "m.csv", dir / "m.csv", dir / "out"));
        FAIL("expected an error");
    } catch (const Error& ex) {
        CHECK(std::string(ex.what()).rfind("T5_uts: ", 0) == 0);
    }
}
