#include "doctest.h"
#include "test_util.hpp"

#include "selfclust/pipeline.hpp"

#include <fstream>
#include <set>
#include <sstream>

using namespace selfclust;

namespace {

Dataset blobs(double separation, std::uint64_t seed, int per_class = 40) {
    SeededRng rng(seed);
    return gen_synth_blobs(3, per_class, 5, 20, separation, 1.0, rng);
}

RunConfig small_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.k = 3;
    cfg.delta = 0.2;
    cfg.small_delta = 0.1;
    cfg.k_max = 10;
    cfg.seed = seed;
    cfg.learner.hidden = 32;
    cfg.learner.epochs = 5;
    return cfg;
}

/// Report JSON without wall-clock fields, for determinism comparisons.
nlohmann::json timeless(const RunReport& r) {
    auto j = report_to_json(r);
    j["boot"].erase("wall_time");
    for (auto& it : j["iterations"]) it.erase("wall_time");
    return j;
}

int count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("k_max = 0 yields a boot-only report") {
    TempDir dir;
    const auto ds = blobs(4.0, 1);
    auto cfg = small_config(1);
    cfg.k_max = 0;
    const auto r = run(ds, cfg);
    CHECK(r.iterations.empty());
    CHECK(r.final_labels == r.boot.labels);
    CHECK(r.termination == Termination::kmax_reached);
    REQUIRE(r.boot.eval.has_value());
    CHECK(r.final_eval()->acc == r.boot.eval->acc);
    CHECK(r.boot.eval->dbi_normalized == 1.0);
    write_report(r, dir.path());
    CHECK(count_lines(dir / "iterations.csv") == 2);  // header + boot row
    CHECK(replay_check(report_to_json(r)).empty());
}

TEST_CASE("small_delta = 1 finishes within two iterations") {
    const auto ds = blobs(4.0, 2);
    auto cfg = small_config(2);
    cfg.small_delta = 1.0;
    const auto r = run(ds, cfg);
    CHECK(r.iterations.size() <= 2);
    CHECK(r.termination == Termination::pool_exhausted);
    CHECK(r.iterations.back().delta_effective == 1.0);
    CHECK(replay_check(report_to_json(r)).empty());
}

TEST_CASE("separable blobs end pool_exhausted with perfect accuracy") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto ds = blobs(50.0, seed, 100);
        auto cfg = small_config(seed);
        const auto r = run(ds, cfg);
        CHECK(r.termination == Termination::pool_exhausted);
        CHECK(r.final_eval()->acc == 1.0);
        // delta reaches 1 at the ninth step (0.2, 0.3, ..., 1.0) at the latest
        CHECK(r.iterations.size() <= 9);
        CHECK(replay_check(report_to_json(r)).empty());
    }
}

TEST_CASE("run report structure and chain invariants") {
    const auto ds = blobs(4.0, 4);
    auto cfg = small_config(4);
    cfg.k_max = 5;
    const auto r = run(ds, cfg);
    CHECK(r.iterations.size() == 5);
    CHECK(r.termination == Termination::kmax_reached);
    int prev = 0;
    std::set<int> seen;
    for (std::size_t t = 0; t < r.iterations.size(); ++t) {
        const auto& it = r.iterations[t];
        CHECK(it.k == static_cast<int>(t));
        CHECK(it.delta_effective == doctest::Approx(0.2 + 0.1 * t));
        CHECK(it.ccn_total > prev);
        prev = it.ccn_total;
        for (std::size_t a = 0; a < it.ccn_added.size(); ++a) {
            CHECK(seen.insert(it.ccn_added[a]).second);
            CHECK(r.final_labels[it.ccn_added[a]] == it.ccn_added_labels[a]);
        }
        CHECK(it.active_remaining == ds.size() - it.ccn_total);
        REQUIRE(it.eval.has_value());
        CHECK(it.eval->dbi_normalized.has_value());
    }
    for (int l : r.final_labels) {
        CHECK(l >= 0);
        CHECK(l < 3);
    }
}

TEST_CASE("identical inputs give identical reports") {
    const auto ds = blobs(4.0, 5);
    const auto cfg = small_config(5);
    CHECK(timeless(run(ds, cfg)) == timeless(run(ds, cfg)));
}

TEST_CASE("write and read round trip") {
    TempDir dir;
    const auto ds = blobs(4.0, 6);
    auto cfg = small_config(6);
    cfg.k_max = 4;
    const auto r = run(ds, cfg);
    write_report(r, dir.path());
    CHECK(count_lines(dir / "iterations.csv") == 1 + 1 + 4);
    const auto back = read_report(dir / "report.json");
    CHECK(back.final_labels == r.final_labels);
    CHECK(back.boot.labels == r.boot.labels);
    REQUIRE(back.iterations.size() == r.iterations.size());
    for (std::size_t t = 0; t < r.iterations.size(); ++t) {
        const auto& a = r.iterations[t];
        const auto& b = back.iterations[t];
        CHECK(b.ccn_added == a.ccn_added);
        CHECK(b.delta_effective == doctest::Approx(a.delta_effective).epsilon(1e-12));
        CHECK(b.learner_final_loss == doctest::Approx(a.learner_final_loss).epsilon(1e-12));
        CHECK(b.eval->acc == doctest::Approx(a.eval->acc).epsilon(1e-12));
        CHECK(b.eval->nmi == doctest::Approx(a.eval->nmi).epsilon(1e-12));
        CHECK(*b.eval->dbi == doctest::Approx(*a.eval->dbi).epsilon(1e-12));
    }
    CHECK(back.config.seed == r.config.seed);
    CHECK(back.termination == r.termination);
    CHECK(timeless(back) == timeless(r));
}

TEST_CASE("replay_check flags corrupted histories") {
    const auto ds = blobs(4.0, 7);
    auto cfg = small_config(7);
    cfg.k_max = 4;
    const auto good = report_to_json(run(ds, cfg));
    REQUIRE(replay_check(good).empty());

    SUBCASE("frozen label mutated in the final labelling") {
        auto j = good;
        const int i = j["iterations"][0]["ccn_added"][0];
        const int l = j["final_labels"][i];
        j["final_labels"][i] = (l + 1) % 3;
        CHECK_FALSE(replay_check(j).empty());
    }
    SUBCASE("sample promoted twice") {
        auto j = good;
        j["iterations"][1]["ccn_added"].push_back(j["iterations"][0]["ccn_added"][0]);
        j["iterations"][1]["ccn_added_labels"].push_back(j["iterations"][0]["ccn_added_labels"][0]);
        CHECK_FALSE(replay_check(j).empty());
    }
    SUBCASE("empty promotion") {
        auto j = good;
        j["iterations"][2]["ccn_added"] = nlohmann::json::array();
        j["iterations"][2]["ccn_added_labels"] = nlohmann::json::array();
        CHECK_FALSE(replay_check(j).empty());
    }
    SUBCASE("delta schedule altered") {
        auto j = good;
        j["iterations"][1]["delta_effective"] = 0.5;
        CHECK_FALSE(replay_check(j).empty());
    }
    SUBCASE("wrong termination") {
        auto j = good;
        j["termination"] = "pool_exhausted";
        CHECK_FALSE(replay_check(j).empty());
    }
    SUBCASE("missing field") {
        auto j = good;
        j.erase("final_labels");
        CHECK_FALSE(replay_check(j).empty());
    }
}

TEST_CASE("single-cell sweep equals the plain run") {
    const auto ds = blobs(4.0, 8);
    auto cfg = small_config(8);
    cfg.k_max = 3;
    const auto r = run(ds, cfg);
    const auto s = sweep(ds, cfg, {cfg.delta}, {cfg.small_delta}, {cfg.boot_feature}, 1);
    REQUIRE(s.runs.size() == 1);
    CHECK(s.tau.empty());
    CHECK(s.runs[0].final.acc == r.final_eval()->acc);
    CHECK(s.runs[0].final.nmi == r.final_eval()->nmi);
    CHECK(s.runs[0].boot.acc == r.boot.eval->acc);
    CHECK(s.runs[0].iterations == static_cast<int>(r.iterations.size()));
}

TEST_CASE("larger small_delta never needs more iterations") {
    const auto ds = blobs(4.0, 9);
    auto cfg = small_config(9);
    cfg.k_max = 20;
    const auto s = sweep(ds, cfg, {0.2}, {0.05, 0.2}, {BootFeature::raw}, 1);
    REQUIRE(s.runs.size() == 2);
    CHECK(s.runs[1].iterations <= s.runs[0].iterations);
    // upper bounds from the schedule: 0.2 + 0.05 t hits 1 at t = 16, 0.2 + 0.2 t at t = 4
    CHECK(s.runs[0].iterations <= 17);
    CHECK(s.runs[1].iterations <= 5);
    CHECK(s.runs[0].termination == Termination::pool_exhausted);
    CHECK(s.runs[1].termination == Termination::pool_exhausted);
}

TEST_CASE("feature sweep emits tau rows") {
    TempDir dir;
    auto ds = resize(reshape(blobs(4.0, 10), 5, 5), 15, 15, true);
    auto cfg = small_config(10);
    cfg.k_max = 2;
    cfg.features.hog.cell = 3;
    cfg.features.gabor.scales = 2;
    cfg.features.gabor.orients = 4;
    const auto s = sweep(ds, cfg, {0.2}, {0.1}, {BootFeature::raw, BootFeature::hog}, 2);
    CHECK(s.runs.size() == 4);
    REQUIRE(s.tau.size() == 1);
    CHECK(s.tau[0].boot[4] >= 0);
    write_sweep(s, dir.path());
    CHECK(count_lines(dir / "sweep.csv") == 5);
    std::ifstream in(dir / "sweep.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("runs").size() == 4);
    CHECK(j.at("cells").size() == 2);
    CHECK(j.at("tau").size() == 1);
}

TEST_CASE("gmm boot and alternate metrics run end to end") {
    const auto ds = blobs(6.0, 11);
    auto cfg = small_config(11);
    cfg.k_max = 3;
    cfg.clusterer = ClusterMethod::gmm;
    CHECK(replay_check(report_to_json(run(ds, cfg))).empty());
    cfg.clusterer = ClusterMethod::kmeans;
    cfg.distance = Distance::cityblock;
    CHECK(replay_check(report_to_json(run(ds, cfg))).empty());
    cfg.learner_input = LearnerInput::boot;
    cfg.boot_feature = BootFeature::raw_pca;
    CHECK(replay_check(report_to_json(run(ds, cfg))).empty());
}

TEST_CASE("eval CSV row has six columns") {
    EvalReport e;
    e.acc = 0.5;
    e.dbi = 0.2;
    const auto row = eval_csv_row(e);
    CHECK(std::count(row.begin(), row.end(), ',') == 5);
}
