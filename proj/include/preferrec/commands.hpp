/**
 * @file commands.hpp
 * @brief CLI-level commands: prepare, run, baseline, ablate, eval.
 *
 * Every command reads a RunConfig, works inside an output directory, and
 * writes deterministic artifacts (no timestamps, fixed float formatting).
 */

#ifndef PREFERREC_COMMANDS_HPP
#define PREFERREC_COMMANDS_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pipeline.hpp"

namespace preferrec {

namespace detail {

/// FNV-1a hash of a whole file, as 16 hex digits.
[[nodiscard]] inline std::string file_hash_hex(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open " + path + " for hashing");
    std::ostringstream buffer;
    buffer << f.rdbuf();
    const std::string bytes = buffer.str();
    char out[17];
    std::snprintf(out, sizeof out, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return out;
}

[[nodiscard]] inline std::uintmax_t file_bytes(const std::string& path) {
    std::error_code ec;
    const auto n = std::filesystem::file_size(path, ec);
    if (ec) throw data_error("cannot stat " + path);
    return n;
}

inline std::string join_items(const SolutionList& list) {
    std::string out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(list[i]);
    }
    return out;
}

[[nodiscard]] inline bool parse_item_list(const std::string& text, SolutionList& out) {
    out.clear();
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, '|')) {
        std::int64_t v = 0;
        if (!parse_i64(token, v)) return false;
        out.push_back(v);
    }
    return !out.empty();
}

} // namespace detail

/// Artifact names written by cmd_prepare, in manifest order.
inline const std::vector<std::string>& prepared_artifact_names() {
    static const std::vector<std::string> names = {
        "split.tsv", "candidates_test.tsv", "candidates_val.tsv", "item_features.tsv"};
    return names;
}

/**
 * @brief Writes the four prepared artifacts plus manifest.json into dir.
 */
inline void write_prepared(const PreparedData& prepared, const RunConfig& config,
                           const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    detail::write_split_tsv((base / "split.tsv").string(), prepared.split);
    detail::write_candidates_tsv((base / "candidates_test.tsv").string(),
                                 prepared.test_candidates);
    detail::write_candidates_tsv((base / "candidates_val.tsv").string(),
                                 prepared.val_candidates);
    detail::write_item_features_tsv((base / "item_features.tsv").string(), prepared.catalog);

    nlohmann::ordered_json manifest;
    manifest["format"] = 1;
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = config.evolution.seed;
    manifest["users"] = prepared.users.size();
    manifest["items"] = prepared.catalog.size();
    manifest["categories"] = prepared.catalog.total_categories();
    manifest["artifacts"] = nlohmann::ordered_json::array();
    for (const std::string& name : prepared_artifact_names()) {
        const std::string path = (base / name).string();
        manifest["artifacts"].push_back({{"name", name},
                                         {"bytes", detail::file_bytes(path)},
                                         {"fnv1a64", detail::file_hash_hex(path)}});
    }
    nlohmann::ordered_json inputs;
    if (!config.data.interactions.empty()) inputs["interactions"] = config.data.interactions;
    if (!config.data.scores.empty()) inputs["scores"] = config.data.scores;
    if (!config.data.embeddings.empty()) inputs["embeddings"] = config.data.embeddings;
    if (config.data.uniform_fallback) inputs["scores"] = "<uniform-fallback>";
    manifest["inputs"] = inputs;

    std::ofstream mf(base / "manifest.json", std::ios::binary);
    if (!mf) throw data_error("cannot open " + (base / "manifest.json").string());
    mf << manifest.dump(2) << '\n';
}

/**
 * @brief Loads prepared artifacts from dir, verifying manifest hashes.
 *
 * The split table is informational and is not reloaded.
 */
[[nodiscard]] inline PreparedData load_prepared(const std::string& dir) {
    const std::filesystem::path base(dir);
    const std::string manifest_path = (base / "manifest.json").string();
    std::ifstream mf(manifest_path, std::ios::binary);
    if (!mf) throw data_error("cannot open " + manifest_path);
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(manifest_path + ": " + e.what());
    }
    if (!manifest.contains("artifacts") || !manifest["artifacts"].is_array())
        throw data_error(manifest_path + ": missing artifacts list");
    for (const auto& entry : manifest["artifacts"]) {
        const std::string name = entry.at("name").get<std::string>();
        const std::string path = (base / name).string();
        if (!std::filesystem::exists(path))
            throw data_error("prepared artifact missing: " + path);
        const std::string expected = entry.at("fnv1a64").get<std::string>();
        const std::string actual = detail::file_hash_hex(path);
        if (expected != actual)
            throw data_error("prepared artifact modified since prepare: " + path +
                             " (expected " + expected + ", found " + actual + ")");
    }

    PreparedData prepared;
    prepared.catalog = detail::read_item_features_tsv((base / "item_features.tsv").string());
    prepared.test_candidates =
        detail::read_candidates_tsv((base / "candidates_test.tsv").string());
    prepared.val_candidates =
        detail::read_candidates_tsv((base / "candidates_val.tsv").string());
    if (prepared.test_candidates.empty())
        throw data_error(dir + ": no test candidates");
    for (const auto& [user, cand] : prepared.test_candidates) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (!std::isfinite(cand.score_at(i)))
                throw data_error("non-finite candidate score for user " + std::to_string(user));
            if (!prepared.catalog.contains(cand.item_at(i)))
                throw data_error("candidate item " + std::to_string(cand.item_at(i)) +
                                 " of user " + std::to_string(user) + " is not in the catalog");
        }
        prepared.users.push_back(user);
        prepared.positives.emplace(user, cand.positive());
    }
    return prepared;
}

/// Loads prepared data from config.data.prepared_dir or builds it in memory.
[[nodiscard]] inline PreparedData resolve_prepared(const RunConfig& config,
                                                   const std::string& out_dir) {
    if (!config.data.prepared_dir.empty()) return load_prepared(config.data.prepared_dir);
    const std::string materialize =
        (std::filesystem::path(out_dir) / "dataset").string();
    return prepare_data(config, materialize);
}

namespace detail {

inline void write_final_lists_tsv(const std::string& path, const RunResult& result,
                                  const PreparedData& prepared) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user\tlambda\tis_default\titems\tacc\tdiv\tnov\n", f);
    auto dump = [f](UserId user, int lambda, int is_default, const SolutionList& list,
                    const ObjectiveVector& o) {
        std::fprintf(f, "%lld\t%d\t%d\t%s\t%.17g\t%.17g\t%.17g\n",
                     static_cast<long long>(user), lambda, is_default,
                     join_items(list).c_str(), o.acc, o.div, o.nov);
    };
    for (const auto& [user, list] : result.default_lists) {
        const auto& front_idx = result.fronts.at(user);
        const auto& members = result.populations.at(user).members;
        auto sel = result.selections.find(user);
        if (sel != result.selections.end()) {
            for (const auto& [lambda, pos] : sel->second.by_lambda) {
                const Individual& m = members[front_idx[pos]];
                dump(user, lambda, lambda == sel->second.default_lambda ? 1 : 0, m.list,
                     m.objectives);
            }
        } else {
            // No anchors were produced; emit the fallback list only.
            ObjectiveVector o{};
            for (std::size_t idx : front_idx) {
                if (members[idx].list == list) {
                    o = members[idx].objectives;
                    break;
                }
            }
            dump(user, -1, 1, list, o);
        }
    }
    (void)prepared;
    std::fclose(f);
}

inline void write_fronts_tsv(const std::string& path, const RunResult& result) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user\tmember\titems\tacc\tdiv\tnov\n", f);
    for (const auto& [user, front_idx] : result.fronts) {
        const auto& members = result.populations.at(user).members;
        for (std::size_t idx : front_idx) {
            const Individual& m = members[idx];
            std::fprintf(f, "%lld\t%zu\t%s\t%.17g\t%.17g\t%.17g\n",
                         static_cast<long long>(user), idx, join_items(m.list).c_str(),
                         m.objectives.acc, m.objectives.div, m.objectives.nov);
        }
    }
    std::fclose(f);
}

inline void write_anchors_tsv(const std::string& path, const RunResult& result) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user\tlambda\titems\tacc\tdiv\tnov\n", f);
    for (const auto& [user, set] : result.anchors) {
        for (const Anchor& a : set.anchors) {
            std::fprintf(f, "%lld\t%d\t%s\t%.17g\t%.17g\t%.17g\n",
                         static_cast<long long>(user), a.lambda, join_items(a.list).c_str(),
                         a.fitness.acc, a.fitness.div, a.fitness.nov);
        }
    }
    std::fclose(f);
}

inline void write_hv_trace_csv(const std::string& path, const RunResult& result) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("generation,mean_front_hv\n", f);
    for (std::size_t g = 0; g < result.hv_trace.size(); ++g)
        std::fprintf(f, "%zu,%.17g\n", g, result.hv_trace[g]);
    std::fclose(f);
}

inline void write_loss_trace_csv(const std::string& path, const RunResult& result) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("round,epoch,loss\n", f);
    for (const auto& [round, losses] : result.loss_trace)
        for (std::size_t e = 0; e < losses.size(); ++e)
            std::fprintf(f, "%d,%zu,%.17g\n", round, e + 1, losses[e]);
    std::fclose(f);
}

inline void write_per_user_csv(const std::string& path, const RunResult& result,
                               const PreparedData& prepared) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user,items,hit,positive_rank,front_size\n", f);
    for (const auto& [user, list] : result.default_lists) {
        const ItemId positive = prepared.positives.at(user);
        int rank = -1;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i] == positive) {
                rank = static_cast<int>(i) + 1;
                break;
            }
        }
        std::fprintf(f, "%lld,%s,%d,%d,%zu\n", static_cast<long long>(user),
                     join_items(list).c_str(), rank > 0 ? 1 : 0, rank,
                     result.fronts.at(user).size());
    }
    std::fclose(f);
}

inline std::string render_report(const MetricsReport& metrics, const RunConfig& config,
                                 const RunResult* result) {
    std::ostringstream out;
    char buf[64];
    auto kv = [&out, &buf](const std::string& key, double value) {
        std::snprintf(buf, sizeof buf, "%.6f", value);
        out << key << " = " << buf << '\n';
    };
    out << "config_hash = " << config_hash(config) << '\n';
    out << "seed = " << config.evolution.seed << '\n';
    if (result != nullptr) {
        out << "generations = " << config.evolution.generations << '\n';
        out << "transfer_rounds = " << result->transfer_rounds << '\n';
        std::snprintf(buf, sizeof buf, "%.9g", result->label_sum_max_deviation);
        out << "label_sum_max_deviation = " << buf << '\n';
        std::snprintf(buf, sizeof buf, "%.9g", result->mean_front_hypervolume);
        out << "mean_front_hypervolume = " << buf << '\n';
    }
    for (int k : metrics.cutoffs) {
        const std::string suffix = "@" + std::to_string(k);
        kv("hr" + suffix, metrics.hr.at(k));
        kv("ndcg" + suffix, metrics.ndcg.at(k));
        kv("div" + suffix, metrics.div.at(k));
        kv("nov" + suffix, metrics.nov.at(k));
        kv("f1" + suffix, metrics.f1.at(k));
        kv("f2" + suffix, metrics.f2.at(k));
    }
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open " + path + " for writing");
    f << text;
}

/// Per-user hypervolume of the final rank-0 front.
[[nodiscard]] inline std::map<UserId, double> per_user_front_hv(const RunResult& result) {
    std::map<UserId, double> out;
    for (const auto& [user, front_idx] : result.fronts) {
        const auto& members = result.populations.at(user).members;
        std::vector<ObjectiveVector> pts;
        pts.reserve(front_idx.size());
        for (std::size_t idx : front_idx) pts.push_back(members[idx].objectives);
        out.emplace(user, hypervolume_3d(pts));
    }
    return out;
}

} // namespace detail

/// Writes every run artifact into dir.
inline void write_run_outputs(const RunResult& result, const RunConfig& config,
                              const PreparedData& prepared, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    detail::write_final_lists_tsv((base / "final_lists.tsv").string(), result, prepared);
    detail::write_fronts_tsv((base / "fronts.tsv").string(), result);
    detail::write_anchors_tsv((base / "anchors.tsv").string(), result);
    detail::write_hv_trace_csv((base / "hv_trace.csv").string(), result);
    detail::write_loss_trace_csv((base / "loss_trace.csv").string(), result);
    detail::write_per_user_csv((base / "per_user.csv").string(), result, prepared);
    detail::write_text_file((base / "report.txt").string(),
                            detail::render_report(result.metrics, config, &result));
    if (!result.scorer.users.empty())
        save_params(result.scorer, (base / "scorer.ckpt").string());
}

/// Builds the dataset artifacts and the manifest. Returns a process exit code.
/// A null log suppresses console output; files are written either way.
inline int cmd_prepare(const RunConfig& config, const std::string& out_dir,
                       std::FILE* log = stdout) {
    const std::string materialize =
        (std::filesystem::path(out_dir) / "dataset").string();
    RunConfig resolved = config;
    if (config.data.synthetic) {
        // prepare_data materializes synthetic inputs here; record those paths
        // in the manifest rather than the empty originals.
        resolved.data.interactions =
            (std::filesystem::path(materialize) / "interactions.tsv").string();
        resolved.data.scores = (std::filesystem::path(materialize) / "scores.tsv").string();
    }
    const PreparedData prepared = prepare_data(config, materialize);
    write_prepared(prepared, resolved, out_dir);
    if (log)
        std::fprintf(log, "prepared %s: users=%zu items=%zu categories=%zu\n", out_dir.c_str(),
                     prepared.users.size(), prepared.catalog.size(),
                     prepared.catalog.total_categories());
    return 0;
}

/// Full optimization run. Returns a process exit code.
inline int cmd_run(const RunConfig& config, const std::string& out_dir, int threads,
                   std::FILE* log = stdout) {
    const PreparedData prepared = resolve_prepared(config, out_dir);
    const RunResult result = run_pipeline(config, prepared, threads);
    write_run_outputs(result, config, prepared, out_dir);
    if (log) std::fputs(detail::render_report(result.metrics, config, &result).c_str(), log);
    return 0;
}

/// Score-ordered and diversity-greedy reference rankers on the same data.
inline int cmd_baseline(const RunConfig& config, const std::string& out_dir, int threads,
                        std::FILE* log = stdout) {
    (void)threads;
    const PreparedData prepared = resolve_prepared(config, out_dir);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base(out_dir);
    const std::size_t K = config.evolution.list_length;
    const NoveltyMode mode = config.novelty();

    struct Method {
        std::string name;
        std::function<SolutionList(const CandidateSet&)> build;
    };
    std::vector<Method> methods;
    methods.push_back({"topk", [&](const CandidateSet& c) { return topk_list(c, K); }});
    methods.push_back(
        {"mmr", [&](const CandidateSet& c) { return mmr_list(c, prepared.catalog, K); }});

    for (const Method& method : methods) {
        std::map<UserId, SolutionList> lists;
        for (const auto& [user, cand] : prepared.test_candidates)
            lists.emplace(user, method.build(cand));
        const MetricsReport metrics = compute_metrics(lists, prepared.positives,
                                                      prepared.catalog, mode,
                                                      config.evaluation.cutoffs);
        std::FILE* f =
            std::fopen((base / ("baseline_" + method.name + ".tsv")).string().c_str(), "wb");
        if (!f) throw data_error("cannot write baseline lists for " + method.name);
        std::fputs("user\titems\tacc\tdiv\tnov\n", f);
        for (const auto& [user, list] : lists) {
            const CandidateSet& cand = prepared.test_candidates.at(user);
            EvalContext ctx{&cand, &prepared.catalog, mode};
            const ObjectiveVector o = evaluate(list, ctx);
            std::fprintf(f, "%lld\t%s\t%.17g\t%.17g\t%.17g\n", static_cast<long long>(user),
                         detail::join_items(list).c_str(), o.acc, o.div, o.nov);
        }
        std::fclose(f);
        const std::string report = detail::render_report(metrics, config, nullptr);
        detail::write_text_file((base / ("report_" + method.name + ".txt")).string(), report);
        if (log) std::fprintf(log, "[%s]\n%s", method.name.c_str(), report.c_str());
    }
    return 0;
}

/// Same seed and data, with and without knowledge transfer.
inline int cmd_ablate(const RunConfig& config, const std::string& out_dir, int threads,
                      std::FILE* log = stdout) {
    const PreparedData prepared = resolve_prepared(config, out_dir);
    RunConfig with_kt = config;
    if (with_kt.transfer.interval <= 0) with_kt.transfer.interval = 3;
    RunConfig without_kt = with_kt;
    without_kt.transfer.interval = 0;

    const RunResult kt = run_pipeline(with_kt, prepared, threads);
    const RunResult wokt = run_pipeline(without_kt, prepared, threads);
    const std::filesystem::path base(out_dir);
    write_run_outputs(kt, with_kt, prepared, (base / "kt").string());
    write_run_outputs(wokt, without_kt, prepared, (base / "wokt").string());

    const auto hv_kt = detail::per_user_front_hv(kt);
    const auto hv_wokt = detail::per_user_front_hv(wokt);
    std::size_t wins = 0, ties = 0;
    double sum_kt = 0.0, sum_wokt = 0.0;
    std::FILE* f = std::fopen((base / "ablation.csv").string().c_str(), "wb");
    if (!f) throw data_error("cannot write ablation.csv");
    std::fputs("user,hv_kt,hv_wokt,delta,win\n", f);
    for (const auto& [user, a] : hv_kt) {
        const double b = hv_wokt.at(user);
        sum_kt += a;
        sum_wokt += b;
        if (a > b) ++wins;
        if (a == b) ++ties;
        std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%d\n", static_cast<long long>(user), a, b,
                     a - b, a > b ? 1 : 0);
    }
    std::fclose(f);
    const double n = static_cast<double>(hv_kt.size());

    std::ostringstream report;
    char buf[64];
    auto kv = [&report, &buf](const std::string& key, double value) {
        std::snprintf(buf, sizeof buf, "%.9g", value);
        report << key << " = " << buf << '\n';
    };
    report << "config_hash_kt = " << config_hash(with_kt) << '\n';
    report << "config_hash_wokt = " << config_hash(without_kt) << '\n';
    report << "users = " << hv_kt.size() << '\n';
    kv("mean_front_hv_kt", sum_kt / n);
    kv("mean_front_hv_wokt", sum_wokt / n);
    kv("win_rate", static_cast<double>(wins) / n);
    kv("tie_rate", static_cast<double>(ties) / n);
    for (int k : config.evaluation.cutoffs) {
        const std::string suffix = "@" + std::to_string(k);
        kv("kt_f1" + suffix, kt.metrics.f1.at(k));
        kv("kt_f2" + suffix, kt.metrics.f2.at(k));
        kv("wokt_f1" + suffix, wokt.metrics.f1.at(k));
        kv("wokt_f2" + suffix, wokt.metrics.f2.at(k));
    }
    detail::write_text_file((base / "ablation_report.txt").string(), report.str());
    if (log) std::fputs(report.str().c_str(), log);
    return 0;
}

/// Recomputes metrics for previously written final lists.
inline int cmd_eval(const RunConfig& config, const std::string& lists_path,
                    const std::string& out_dir, std::FILE* log = stdout) {
    const PreparedData prepared = resolve_prepared(config, out_dir);
    std::ifstream f(lists_path);
    if (!f) throw data_error("cannot open " + lists_path);
    std::string line;
    if (!std::getline(f, line)) throw data_error(lists_path + " is empty");
    std::map<UserId, SolutionList> lists;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_line(line, '\t');
        // user, lambda, is_default, items[, ...objectives]
        UserId user = -1;
        std::int64_t lambda = 0, is_default = 0;
        SolutionList items;
        const bool ok = fields.size() >= 4 && detail::parse_i64(fields[0], user) &&
                        detail::parse_i64(fields[1], lambda) &&
                        detail::parse_i64(fields[2], is_default) &&
                        detail::parse_item_list(fields[3], items);
        if (!ok) throw data_error(lists_path + ":" + std::to_string(line_no) +
                                  ": malformed row");
        if (is_default != 0) lists[user] = std::move(items);
    }
    if (lists.empty()) throw data_error(lists_path + ": no default lists found");
    for (const auto& [user, list] : lists) {
        if (prepared.positives.find(user) == prepared.positives.end())
            throw data_error("final lists mention unknown user " + std::to_string(user));
        (void)list;
    }
    const MetricsReport metrics = compute_metrics(lists, prepared.positives, prepared.catalog,
                                                  config.novelty(), config.evaluation.cutoffs);
    std::filesystem::create_directories(out_dir);
    const std::string report = detail::render_report(metrics, config, nullptr);
    detail::write_text_file(
        (std::filesystem::path(out_dir) / "eval_report.txt").string(), report);
    if (log) std::fputs(report.c_str(), log);
    return 0;
}

} // namespace preferrec

#endif // PREFERREC_COMMANDS_HPP
