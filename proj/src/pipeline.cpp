#include "selfclust/pipeline.hpp"

#include "selfclust/sampler.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace selfclust {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix rows_of(const Matrix& m, const IndexList& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(idx[r]);
    return out;
}

/// Per-label means of `space` over the reliable samples. Labels with no reliable
/// member fall back to the mean of their active members, then to the previous
/// centroid.
Matrix refresh_centroids(const Matrix& space, const ReliabilityState& state, const Labels& current,
                         const Matrix& previous, int k) {
    Matrix sums = Matrix::Zero(k, space.cols());
    std::vector<int> counts(k, 0);
    for (const auto& [i, label] : state.frozen_labels()) {
        sums.row(label) += space.row(i);
        ++counts[label];
    }
    Matrix active_sums = Matrix::Zero(k, space.cols());
    std::vector<int> active_counts(k, 0);
    for (int i : state.active()) {
        active_sums.row(current[i]) += space.row(i);
        ++active_counts[current[i]];
    }
    Matrix out(k, space.cols());
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
            out.row(c) = sums.row(c) / counts[c];
        } else if (active_counts[c] > 0) {
            out.row(c) = active_sums.row(c) / active_counts[c];
        } else if (previous.cols() == space.cols()) {
            out.row(c) = previous.row(c);
        } else {
            out.row(c).setZero();
        }
    }
    return out;
}

std::optional<EvalReport> evaluate_stage(const Dataset& ds, const Labels& labels, const Matrix& space,
                                         std::optional<double> boot_dbi) {
    if (!ds.true_labels) return std::nullopt;
    auto e = evaluate(*ds.true_labels, labels, &space);
    if (e.dbi && boot_dbi && *boot_dbi > 0) e.dbi_normalized = dbi_normalized(*e.dbi, *boot_dbi);
    return e;
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::optional<double> number_or_null(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

Termination parse_termination(const std::string& s) {
    if (s == "pool_exhausted") return Termination::pool_exhausted;
    if (s == "kmax_reached") return Termination::kmax_reached;
    throw DataError("unknown termination reason: " + s);
}

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

void write_eval_cells(std::ostream& out, const std::optional<EvalReport>& e) {
    if (!e) {
        out << ",,,,,,";
        return;
    }
    out << ',' << format_number(e->jc) << ',' << format_number(e->fmi) << ',' << format_number(e->nmi) << ','
        << format_number(e->ari) << ',' << format_number(e->acc) << ',' << format_optional(e->dbi) << ','
        << format_optional(e->dbi_normalized);
}

std::array<double, 5> index_values(const EvalReport& e) {
    return {e.jc, e.fmi, e.nmi, e.ari, e.acc};
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string to_string(Termination t) {
    return t == Termination::pool_exhausted ? "pool_exhausted" : "kmax_reached";
}

const std::optional<EvalReport>& RunReport::final_eval() const {
    return iterations.empty() ? boot.eval : iterations.back().eval;
}

RunReport run(const Dataset& ds, const RunConfig& cfg) {
    cfg.validate();
    ds.validate();
    if (cfg.k > ds.size()) throw std::invalid_argument("run: k exceeds the number of samples");

    SeededRng rng(cfg.seed);
    RunReport report;
    report.config = cfg;

    // Boot stage.
    const auto boot_start = std::chrono::steady_clock::now();
    const FeatureMatrix boot = extract_boot_features(ds, cfg.boot_feature, cfg.features);
    ClusterModel clusters = cfg.clusterer == ClusterMethod::gmm
                                ? gmm_fit(boot, cfg.k, rng, cfg.gmm).first
                                : kmeans_fit(boot, cfg.k, cfg.distance, rng, cfg.kmeans);
    report.boot.feature = boot.feature_name;
    report.boot.feature_dim = boot.dim();
    report.boot.labels = clusters.labels;
    report.boot.eval = evaluate_stage(ds, clusters.labels, boot.data, std::nullopt);
    if (report.boot.eval && report.boot.eval->dbi && *report.boot.eval->dbi > 0)
        report.boot.eval->dbi_normalized = 1.0;
    report.boot.wall_time = seconds_since(boot_start);
    const std::optional<double> boot_dbi = report.boot.eval ? report.boot.eval->dbi : std::nullopt;

    // Main stage.
    const Matrix& learner_inputs = cfg.learner_input == LearnerInput::raw ? ds.pixels : boot.data;
    Matrix space = boot.data;
    Matrix centroids = clusters.centroids;
    Labels current = clusters.labels;
    ReliabilityState state(ds.size());
    std::optional<LearnerModel> model;
    double delta = cfg.delta;

    for (int k = 0; k < cfg.k_max && !state.active().empty(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        IterationRecord rec;
        rec.k = k;
        rec.delta_effective = delta;

        const IndexList previous = state.active();
        const auto scores = cohesion(space, current, centroids, cfg.distance, previous);
        rec.ccn_added = select_ccn(scores, delta);
        for (int i : rec.ccn_added) rec.ccn_added_labels.push_back(current[i]);
        state.commit(rec.ccn_added, rec.ccn_added_labels);
        state.check_invariants();
        const Split parts = split(state, previous);
        if (parts.newly_reliable != rec.ccn_added) throw InvariantViolation("split disagrees with the promoted set");

        const IndexList reliable = state.reliable();
        TrainSet ts;
        ts.inputs = rows_of(learner_inputs, reliable);
        for (int i : reliable) ts.labels.push_back(state.frozen_labels().at(i));
        model = train(ts, cfg.k, model, cfg.learner, rng);
        rec.learner_initial_loss = model->initial_loss;
        rec.learner_final_loss = model->loss_trace.empty() ? model->initial_loss : model->loss_trace.back();

        if (!parts.remaining.empty()) {
            const Labels predicted = predict(*model, rows_of(learner_inputs, parts.remaining));
            for (std::size_t r = 0; r < parts.remaining.size(); ++r) current[parts.remaining[r]] = predicted[r];
        }

        space = features(*model, learner_inputs);
        centroids = refresh_centroids(space, state, current, centroids, cfg.k);

        for (const auto& [i, label] : state.frozen_labels())
            if (current[i] != label) throw InvariantViolation("frozen pseudo-label changed");

        rec.ccn_total = state.reliable_count();
        rec.active_remaining = static_cast<int>(state.active().size());
        rec.eval = evaluate_stage(ds, current, space, boot_dbi);
        rec.wall_time = seconds_since(start);
        report.iterations.push_back(std::move(rec));

        delta = advance_delta(delta, cfg.small_delta);
    }

    report.termination = state.active().empty() ? Termination::pool_exhausted : Termination::kmax_reached;
    report.final_labels = std::move(current);
    return report;
}

SweepReport sweep(const Dataset& ds, const RunConfig& cfg, const std::vector<double>& deltas,
                  const std::vector<double>& small_deltas, const std::vector<BootFeature>& features, int repeats) {
    if (deltas.empty() || small_deltas.empty() || features.empty() || repeats < 1)
        throw std::invalid_argument("sweep: every grid axis must be nonempty and repeats >= 1");
    if (!ds.true_labels) throw DataError("sweep: ground-truth labels required");

    SweepReport out;
    for (double d : deltas)
        for (double sd : small_deltas) {
            for (BootFeature f : features)
                for (int r = 0; r < repeats; ++r) {
                    RunConfig c = cfg;
                    c.delta = d;
                    c.small_delta = sd;
                    c.boot_feature = f;
                    c.seed = cfg.seed + static_cast<std::uint64_t>(r);
                    const auto rep = run(ds, c);
                    SweepRun sr;
                    sr.delta = d;
                    sr.small_delta = sd;
                    sr.feature = f;
                    sr.repeat = r;
                    sr.seed = c.seed;
                    sr.boot = *rep.boot.eval;
                    sr.final = *rep.final_eval();
                    sr.iterations = static_cast<int>(rep.iterations.size());
                    sr.termination = rep.termination;
                    out.runs.push_back(sr);
                }
            if (features.size() < 2) continue;
            SweepTau t;
            t.delta = d;
            t.small_delta = sd;
            for (std::size_t idx = 0; idx < 5; ++idx) {
                std::vector<double> boot_means;
                std::vector<double> final_means;
                for (BootFeature f : features) {
                    std::vector<double> b;
                    std::vector<double> fin;
                    for (const auto& sr : out.runs)
                        if (sr.delta == d && sr.small_delta == sd && sr.feature == f) {
                            b.push_back(index_values(sr.boot)[idx]);
                            fin.push_back(index_values(sr.final)[idx]);
                        }
                    boot_means.push_back(mean_of(b));
                    final_means.push_back(mean_of(fin));
                }
                auto safe_tau = [](const std::vector<double>& v) {
                    return mean_of(v) == 0.0 ? std::nan("") : tau(v, StdMode::sample);
                };
                t.boot[idx] = safe_tau(boot_means);
                t.final[idx] = safe_tau(final_means);
            }
            out.tau.push_back(t);
        }
    return out;
}

json eval_to_json(const EvalReport& e) {
    return json{{"jc", e.jc},
                {"fmi", e.fmi},
                {"nmi", e.nmi},
                {"ari", e.ari},
                {"acc", e.acc},
                {"dbi", optional_number(e.dbi)},
                {"dbi_normalized", optional_number(e.dbi_normalized)}};
}

EvalReport eval_from_json(const json& j) {
    EvalReport e;
    e.jc = j.at("jc");
    e.fmi = j.at("fmi");
    e.nmi = j.at("nmi");
    e.ari = j.at("ari");
    e.acc = j.at("acc");
    e.dbi = number_or_null(j, "dbi");
    e.dbi_normalized = number_or_null(j, "dbi_normalized");
    return e;
}

json report_to_json(const RunReport& r) {
    json boot{{"feature", r.boot.feature},
              {"feature_dim", r.boot.feature_dim},
              {"labels", r.boot.labels},
              {"eval", r.boot.eval ? eval_to_json(*r.boot.eval) : json(nullptr)},
              {"wall_time", r.boot.wall_time}};
    json iterations = json::array();
    for (const auto& it : r.iterations) {
        iterations.push_back(json{{"k", it.k},
                                  {"delta_effective", it.delta_effective},
                                  {"ccn_added", it.ccn_added},
                                  {"ccn_added_labels", it.ccn_added_labels},
                                  {"ccn_total", it.ccn_total},
                                  {"active_remaining", it.active_remaining},
                                  {"learner_loss", {{"initial", it.learner_initial_loss}, {"final", it.learner_final_loss}}},
                                  {"eval", it.eval ? eval_to_json(*it.eval) : json(nullptr)},
                                  {"wall_time", it.wall_time}});
    }
    return json{{"config", r.config},
                {"boot", boot},
                {"iterations", iterations},
                {"final_labels", r.final_labels},
                {"termination", to_string(r.termination)}};
}

RunReport report_from_json(const json& j) {
    RunReport r;
    try {
        r.config = j.at("config").get<RunConfig>();
        const auto& b = j.at("boot");
        r.boot.feature = b.at("feature");
        r.boot.feature_dim = b.at("feature_dim");
        r.boot.labels = b.at("labels").get<Labels>();
        if (!b.at("eval").is_null()) r.boot.eval = eval_from_json(b.at("eval"));
        r.boot.wall_time = b.at("wall_time");
        for (const auto& it : j.at("iterations")) {
            IterationRecord rec;
            rec.k = it.at("k");
            rec.delta_effective = it.at("delta_effective");
            rec.ccn_added = it.at("ccn_added").get<IndexList>();
            rec.ccn_added_labels = it.at("ccn_added_labels").get<Labels>();
            rec.ccn_total = it.at("ccn_total");
            rec.active_remaining = it.at("active_remaining");
            rec.learner_initial_loss = it.at("learner_loss").at("initial");
            rec.learner_final_loss = it.at("learner_loss").at("final");
            if (!it.at("eval").is_null()) rec.eval = eval_from_json(it.at("eval"));
            rec.wall_time = it.at("wall_time");
            r.iterations.push_back(std::move(rec));
        }
        r.final_labels = j.at("final_labels").get<Labels>();
        r.termination = parse_termination(j.at("termination").get<std::string>());
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed run report: ") + e.what());
    }
    return r;
}

json sweep_to_json(const SweepReport& s) {
    json runs = json::array();
    for (const auto& r : s.runs)
        runs.push_back(json{{"delta", r.delta},
                            {"small_delta", r.small_delta},
                            {"feature", to_string(r.feature)},
                            {"repeat", r.repeat},
                            {"seed", r.seed},
                            {"boot", eval_to_json(r.boot)},
                            {"final", eval_to_json(r.final)},
                            {"iterations", r.iterations},
                            {"termination", to_string(r.termination)}});

    // Per-cell mean +- std over repeats.
    std::map<std::tuple<double, double, std::string>, std::vector<const SweepRun*>> cells;
    for (const auto& r : s.runs) cells[{r.delta, r.small_delta, to_string(r.feature)}].push_back(&r);
    json summary = json::array();
    for (const auto& [key, members] : cells) {
        auto collect = [&](auto getter) {
            std::vector<double> v;
            for (const auto* m : members) v.push_back(getter(*m));
            return json{{"mean", mean_of(v)}, {"std", std_of(v)}};
        };
        summary.push_back(json{{"delta", std::get<0>(key)},
                               {"small_delta", std::get<1>(key)},
                               {"feature", std::get<2>(key)},
                               {"boot_acc", collect([](const SweepRun& r) { return r.boot.acc; })},
                               {"boot_nmi", collect([](const SweepRun& r) { return r.boot.nmi; })},
                               {"final_acc", collect([](const SweepRun& r) { return r.final.acc; })},
                               {"final_nmi", collect([](const SweepRun& r) { return r.final.nmi; })},
                               {"iterations", collect([](const SweepRun& r) { return double(r.iterations); })}});
    }

    std::map<double, std::vector<double>> per_small_delta;
    for (const auto& r : s.runs) per_small_delta[r.small_delta].push_back(r.iterations);
    json iteration_counts = json::array();
    for (const auto& [sd, counts] : per_small_delta)
        iteration_counts.push_back(json{{"small_delta", sd}, {"mean", mean_of(counts)}, {"std", std_of(counts)}});

    json tau_rows = json::array();
    const std::array<const char*, 5> names{"jc", "fmi", "nmi", "ari", "acc"};
    for (const auto& t : s.tau) {
        json boot;
        json fin;
        for (std::size_t i = 0; i < names.size(); ++i) {
            boot[names[i]] = std::isnan(t.boot[i]) ? json(nullptr) : json(t.boot[i]);
            fin[names[i]] = std::isnan(t.final[i]) ? json(nullptr) : json(t.final[i]);
        }
        tau_rows.push_back(json{{"delta", t.delta}, {"small_delta", t.small_delta}, {"boot", boot}, {"final", fin}});
    }
    return json{{"runs", runs}, {"cells", summary}, {"iteration_counts", iteration_counts}, {"tau", tau_rows}};
}

std::string eval_csv_row(const EvalReport& e) {
    return format_number(e.jc) + ',' + format_number(e.fmi) + ',' + format_number(e.nmi) + ',' +
           format_number(e.ari) + ',' + format_number(e.acc) + ',' + format_optional(e.dbi);
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw DataError("cannot write file: " + (dir / "report.json").string());
        out << report_to_json(report).dump(2) << '\n';
        if (!out) throw DataError("write failed: " + (dir / "report.json").string());
    }
    std::ofstream csv(dir / "iterations.csv");
    if (!csv) throw DataError("cannot write file: " + (dir / "iterations.csv").string());
    csv << "stage,k,delta_effective,ccn_added,ccn_total,active_remaining,loss_initial,loss_final,"
           "jc,fmi,nmi,ari,acc,dbi,dbi_normalized,wall_time\n";
    csv << "boot,,,,0," << report.final_labels.size() << ",,";
    write_eval_cells(csv, report.boot.eval);
    csv << ',' << format_number(report.boot.wall_time) << '\n';
    for (const auto& it : report.iterations) {
        csv << "main," << it.k << ',' << format_number(it.delta_effective) << ',' << it.ccn_added.size() << ','
            << it.ccn_total << ',' << it.active_remaining << ',' << format_number(it.learner_initial_loss) << ','
            << format_number(it.learner_final_loss);
        write_eval_cells(csv, it.eval);
        csv << ',' << format_number(it.wall_time) << '\n';
    }
    if (!csv) throw DataError("write failed: " + (dir / "iterations.csv").string());
}

RunReport read_report(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw DataError("cannot open file: " + json_path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed run report: ") + e.what());
    }
    return report_from_json(j);
}

void write_sweep(const SweepReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "sweep.json");
    if (!out) throw DataError("cannot write file: " + (dir / "sweep.json").string());
    out << sweep_to_json(report).dump(2) << '\n';

    std::ofstream csv(dir / "sweep.csv");
    if (!csv) throw DataError("cannot write file: " + (dir / "sweep.csv").string());
    csv << "delta,small_delta,feature,repeat,seed,iterations,termination,"
           "boot_jc,boot_fmi,boot_nmi,boot_ari,boot_acc,boot_dbi,final_jc,final_fmi,final_nmi,final_ari,final_acc,"
           "final_dbi\n";
    for (const auto& r : report.runs)
        csv << format_number(r.delta) << ',' << format_number(r.small_delta) << ',' << to_string(r.feature) << ','
            << r.repeat << ',' << r.seed << ',' << r.iterations << ',' << to_string(r.termination) << ','
            << eval_csv_row(r.boot) << ',' << eval_csv_row(r.final) << '\n';
}

std::vector<std::string> replay_check(const json& report) {
    std::vector<std::string> problems;
    auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };
    try {
        const auto& cfg = report.at("config");
        const int k = cfg.at("k");
        const int k_max = cfg.at("k_max");
        const double delta0 = cfg.at("delta");
        const double small_delta = cfg.at("small_delta");
        const auto final_labels = report.at("final_labels").get<std::vector<int>>();
        const auto n = static_cast<int>(final_labels.size());
        const auto& iterations = report.at("iterations");
        const std::string termination = report.at("termination");

        for (int i = 0; i < n; ++i)
            if (final_labels[i] < 0 || final_labels[i] >= k)
                fail("final label of sample " + std::to_string(i) + " out of range");

        std::map<int, int> frozen;
        double expected_delta = delta0;
        int previous_total = 0;
        for (std::size_t t = 0; t < iterations.size(); ++t) {
            const auto& it = iterations[t];
            const std::string where = "iteration " + std::to_string(t) + ": ";
            const auto added = it.at("ccn_added").get<std::vector<int>>();
            const auto labels = it.at("ccn_added_labels").get<std::vector<int>>();
            if (it.at("k").get<int>() != static_cast<int>(t)) fail(where + "iteration index out of sequence");
            if (added.size() != labels.size()) fail(where + "promoted samples and labels differ in length");
            if (added.empty()) fail(where + "reliable set did not grow");
            std::set<int> unique(added.begin(), added.end());
            if (unique.size() != added.size()) fail(where + "sample promoted twice in one iteration");
            for (std::size_t a = 0; a < added.size() && a < labels.size(); ++a) {
                const int i = added[a];
                if (i < 0 || i >= n) {
                    fail(where + "promoted index out of range");
                    continue;
                }
                if (labels[a] < 0 || labels[a] >= k) fail(where + "pseudo-label out of range");
                if (!frozen.emplace(i, labels[a]).second)
                    fail(where + "sample " + std::to_string(i) + " promoted again (reliable set not inclusion-monotone)");
            }
            const int total = it.at("ccn_total");
            if (total != static_cast<int>(frozen.size())) fail(where + "ccn_total disagrees with replayed history");
            if (total <= previous_total) fail(where + "ccn_total not strictly increasing");
            previous_total = total;
            if (it.at("active_remaining").get<int>() != n - total) fail(where + "active pool size inconsistent");
            const double de = it.at("delta_effective");
            if (std::abs(de - expected_delta) > 1e-12) fail(where + "delta schedule broken");
            expected_delta = std::min(1.0, expected_delta + small_delta);
        }
        for (const auto& [i, label] : frozen)
            if (i < n && final_labels[i] != label)
                fail("frozen label of sample " + std::to_string(i) + " changed in the final labelling");

        if (termination == "pool_exhausted") {
            if (static_cast<int>(frozen.size()) != n) fail("pool_exhausted but some samples are still active");
        } else if (termination == "kmax_reached") {
            if (static_cast<int>(iterations.size()) != k_max) fail("kmax_reached after a different iteration count");
        } else {
            fail("unknown termination reason");
        }
        if (static_cast<int>(iterations.size()) > k_max) fail("more iterations than k_max");
    } catch (const json::exception& e) {
        fail(std::string("malformed report: ") + e.what());
    }
    return problems;
}

}  // namespace selfclust
