/**
 * @file pipeline.hpp
 * @brief End-to-end orchestration: data preparation, the per-user evolution
 *        loop with periodic knowledge transfer, final selection, and metrics.
 *
 * Parallelism is per user: each user owns dedicated random streams, all
 * cross-user aggregation iterates users in ascending id order, and scorer
 * training runs on the orchestration thread. Outputs are therefore
 * byte-identical for a fixed (config, seed) regardless of thread count.
 */

#ifndef PREFERREC_PIPELINE_HPP
#define PREFERREC_PIPELINE_HPP

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "baselines.hpp"
#include "config.hpp"
#include "core.hpp"
#include "data.hpp"
#include "evolution.hpp"
#include "guided_init.hpp"
#include "metrics.hpp"
#include "pareto_net.hpp"
#include "preference.hpp"
#include "selection.hpp"
#include "synthetic.hpp"
#include "transfer.hpp"

namespace preferrec {

/**
 * @brief Runs fn(0..n-1) on up to `threads` workers (0 = hardware default).
 *
 * Work items are claimed through an atomic counter; the first exception is
 * rethrown on the calling thread after all workers join.
 */
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t n_threads = threads > 0 ? static_cast<std::size_t>(threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Everything the optimization stage consumes.
struct PreparedData {
    ItemCatalog catalog;
    std::map<UserId, CandidateSet> test_candidates;
    std::map<UserId, CandidateSet> val_candidates;
    std::map<UserId, ItemId> positives; ///< held-out test item per user
    std::vector<UserId> users;          ///< ascending
    SplitResult split; ///< populated by prepare_data, empty after load_prepared
};

/**
 * @brief Builds prepared data in memory from the configured source.
 *
 * With data.synthetic the dataset is first generated and materialized under
 * `materialize_dir` (so downstream artifacts reference real files), then
 * loaded through the ordinary path. Candidate pools are built for both the
 * test and validation sides and scored from the configured source.
 */
[[nodiscard]] inline PreparedData prepare_data(RunConfig config,
                                               const std::string& materialize_dir = "") {
    config.validate();
    if (config.data.synthetic) {
        SyntheticSpec spec;
        spec.users = config.data.synthetic_users;
        spec.items = config.data.synthetic_items;
        spec.categories = config.data.synthetic_categories;
        spec.seed = config.evolution.seed;
        const SyntheticDataset dataset = generate_synthetic(spec);
        const std::filesystem::path dir(materialize_dir.empty() ? "." : materialize_dir);
        std::filesystem::create_directories(dir);
        config.data.interactions = (dir / "interactions.tsv").string();
        config.data.scores = (dir / "scores.tsv").string();
        config.data.delimiter = "tab";
        write_interactions_tsv(config.data.interactions, dataset);
        write_scores_tsv(config.data.scores, dataset);
    }

    LoadOptions load_options;
    load_options.delimiter = config.delimiter_char();
    load_options.max_malformed = config.data.max_malformed;

    const auto interactions = load_interactions(config.data.interactions, load_options);
    if (interactions.empty())
        throw data_error("no interactions loaded from " + config.data.interactions);
    SplitResult split = leave_one_out(interactions, config.data.min_history);
    if (split.test.empty()) throw data_error("every user was dropped by the split");

    PreparedData prepared;
    prepared.catalog = build_catalog(interactions, split);

    CandidateOptions cand_options;
    cand_options.negatives = config.data.negatives;
    cand_options.seed = config.evolution.seed;
    const auto catalog_items = prepared.catalog.sorted_items();
    prepared.test_candidates =
        build_candidates(split, interactions, catalog_items, SplitRole::test, cand_options);
    prepared.val_candidates =
        build_candidates(split, interactions, catalog_items, SplitRole::validation, cand_options);

    if (config.data.uniform_fallback) {
        uniform_fallback_scores(prepared.test_candidates);
        uniform_fallback_scores(prepared.val_candidates);
    } else {
        if (config.data.scores.empty())
            throw config_error("config needs data.scores or data.uniform_fallback = true");
        load_scores(config.data.scores, prepared.test_candidates, load_options);
        load_scores(config.data.scores, prepared.val_candidates, load_options);
    }

    std::map<ItemId, std::vector<double>> embeddings;
    if (!config.data.embeddings.empty())
        embeddings = load_embeddings(config.data.embeddings, load_options);
    assemble_features(prepared.catalog, embeddings);

    for (const auto& [user, cand] : prepared.test_candidates) {
        prepared.users.push_back(user);
        prepared.positives.emplace(user, cand.positive());
    }
    prepared.split = std::move(split);
    return prepared;
}

namespace detail {

inline void write_candidates_tsv(const std::string& path,
                                 const std::map<UserId, CandidateSet>& candidates) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user\tposition\titem\tscore\tis_positive\n", f);
    for (const auto& [user, cand] : candidates) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            std::fprintf(f, "%lld\t%zu\t%lld\t%.17g\t%d\n", static_cast<long long>(user), i,
                         static_cast<long long>(cand.item_at(i)), cand.score_at(i),
                         cand.item_at(i) == cand.positive() ? 1 : 0);
        }
    }
    std::fclose(f);
}

inline std::map<UserId, CandidateSet> read_candidates_tsv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw data_error(path + " is empty");
    struct Row { std::size_t position; ItemId item; double score; int positive; };
    std::map<UserId, std::vector<Row>> rows;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_line(line, '\t');
        UserId user = -1;
        std::int64_t position = 0;
        Row r{};
        std::int64_t item = 0, positive = 0;
        const bool ok = fields.size() == 5 && parse_i64(fields[0], user) &&
                        parse_i64(fields[1], position) && parse_i64(fields[2], item) &&
                        parse_double(fields[3], r.score) && parse_i64(fields[4], positive);
        if (!ok) throw data_error(path + ":" + std::to_string(line_no) + ": malformed row");
        r.position = static_cast<std::size_t>(position);
        r.item = item;
        r.positive = static_cast<int>(positive);
        rows[user].push_back(r);
    }
    std::map<UserId, CandidateSet> out;
    for (auto& [user, list] : rows) {
        std::sort(list.begin(), list.end(),
                  [](const Row& a, const Row& b) { return a.position < b.position; });
        std::vector<ItemId> items;
        std::vector<double> scores;
        ItemId positive = -1;
        for (const Row& r : list) {
            items.push_back(r.item);
            scores.push_back(r.score);
            if (r.positive) positive = r.item;
        }
        out.emplace(user, CandidateSet(user, std::move(items), std::move(scores), positive));
    }
    return out;
}

inline void write_item_features_tsv(const std::string& path, const ItemCatalog& catalog) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("item\tcategories\tpop_count\tfeatures\n", f);
    for (ItemId item : catalog.sorted_items()) {
        const ItemMeta& m = catalog.meta(item);
        std::fprintf(f, "%lld\t", static_cast<long long>(item));
        for (std::size_t c = 0; c < m.categories.size(); ++c)
            std::fprintf(f, "%s%d", c ? "|" : "", m.categories[c]);
        std::fprintf(f, "\t%lld\t", static_cast<long long>(m.pop_count));
        const auto& x = catalog.feature(item);
        for (std::size_t i = 0; i < x.size(); ++i)
            std::fprintf(f, "%s%.17g", i ? " " : "", x[i]);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

inline ItemCatalog read_item_features_tsv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw data_error(path + " is empty");
    std::vector<ItemMeta> metas;
    std::vector<std::pair<ItemId, std::vector<double>>> features;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_line(line, '\t');
        ItemMeta m;
        std::vector<double> x;
        bool ok = fields.size() == 4 && parse_i64(fields[0], m.item) &&
                  parse_categories(fields[1], m.categories) &&
                  parse_i64(fields[2], m.pop_count);
        if (ok) {
            std::istringstream ss(fields[3]);
            std::string tok;
            while (ss >> tok) {
                double v = 0.0;
                if (!parse_double(tok, v)) { ok = false; break; }
                x.push_back(v);
            }
            ok = ok && !x.empty();
        }
        if (!ok) throw data_error(path + ":" + std::to_string(line_no) + ": malformed row");
        features.emplace_back(m.item, std::move(x));
        metas.push_back(std::move(m));
    }
    ItemCatalog catalog(std::move(metas));
    for (auto& [item, x] : features) catalog.set_feature(item, std::move(x));
    return catalog;
}

inline void write_split_tsv(const std::string& path, const SplitResult& split) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user\titem\ttimestamp\tcategories\trole\n", f);
    auto dump = [f](const Interaction& it, const char* role) {
        std::fprintf(f, "%lld\t%lld\t%lld\t", static_cast<long long>(it.user),
                     static_cast<long long>(it.item), static_cast<long long>(it.timestamp));
        for (std::size_t c = 0; c < it.categories.size(); ++c)
            std::fprintf(f, "%s%d", c ? "|" : "", it.categories[c]);
        std::fprintf(f, "\t%s\n", role);
    };
    for (const auto& it : split.train) dump(it, "train");
    for (const auto& kv : split.validation) dump(kv.second, "validation");
    for (const auto& kv : split.test) dump(kv.second, "test");
    std::fclose(f);
}

} // namespace detail

/// Aggregate metrics of one set of final lists.
struct MetricsReport {
    std::vector<int> cutoffs;
    std::map<int, double> hr, ndcg, div, nov, f1, f2;
    double mean_front_hypervolume = 0.0; ///< 0 when no fronts were involved
};

[[nodiscard]] inline MetricsReport compute_metrics(const std::map<UserId, SolutionList>& lists,
                                                   const std::map<UserId, ItemId>& positives,
                                                   const ItemCatalog& catalog, NoveltyMode mode,
                                                   const std::vector<int>& cutoffs) {
    MetricsReport r;
    r.cutoffs = cutoffs;
    for (int k : cutoffs) {
        const auto ku = static_cast<std::size_t>(k);
        r.hr[k] = hr_at_k(lists, positives, ku);
        r.ndcg[k] = ndcg_at_k(lists, positives, ku);
        r.div[k] = mean_div_at_k(lists, catalog, ku);
        r.nov[k] = mean_nov_at_k(lists, catalog, ku, mode);
        r.f1[k] = f_beta(r.hr[k], r.div[k], r.nov[k], 1.0);
        r.f2[k] = f_beta(r.hr[k], r.div[k], r.nov[k], 2.0);
    }
    return r;
}

/// Full result of one optimization run.
struct RunResult {
    std::map<UserId, Population> populations;           ///< final populations
    std::map<UserId, std::vector<std::size_t>> fronts;  ///< rank-0 indices per user
    std::map<UserId, AnchorSet> anchors;                ///< from the last transfer round
    std::map<UserId, SelectedLists> selections;         ///< per-lambda picks (if anchors)
    std::map<UserId, SolutionList> default_lists;       ///< one list per user
    std::vector<double> hv_trace;                       ///< mean front hv, index = generation
    std::vector<std::pair<int, std::vector<double>>> loss_trace; ///< (round, per-epoch loss)
    double label_sum_max_deviation = 0.0; ///< max |sum - 1| over (user, cluster, round)
    int transfer_rounds = 0;
    ScorerParams scorer;  ///< trained parameters (empty users when never trained)
    MetricsReport metrics;
    double mean_front_hypervolume = 0.0;
};

/**
 * @brief The optimization loop.
 *
 * Per generation every user population evolves one step; every
 * transfer.interval generations (when enabled) the preference builder turns
 * all populations into a shared training set, the scorer is (re)trained, and
 * per-user anchors are synthesized and merged. After the final generation the
 * default list of each user is selected (angle-based when anchors exist,
 * otherwise the front member with the best balanced F-measure).
 */
[[nodiscard]] inline RunResult run_pipeline(const RunConfig& config, const PreparedData& prepared,
                                            int threads = 0) {
    config.validate();
    if (prepared.users.empty()) throw data_error("prepared data contains no users");
    const std::uint64_t seed = config.evolution.seed;
    const std::size_t K = config.evolution.list_length;
    const NoveltyMode mode = config.novelty();
    const EvolutionConfig evo = config.evolution_config();
    const std::size_t n_users = prepared.users.size();
    const int interval = config.transfer.interval;
    const bool transfer_enabled = interval > 0 && interval <= config.evolution.generations;
    const std::size_t n_clusters = config.transfer.clusters;

    for (const auto& [user, cand] : prepared.test_candidates) {
        if (K > cand.size())
            throw config_error("list_length " + std::to_string(K) +
                               " exceeds the candidate pool of user " + std::to_string(user));
    }

    RunResult result;

    // Initial populations.
    std::vector<Population> pops(n_users);
    if (config.evolution.guided_init) {
        auto seeded = guided_init(prepared.test_candidates, prepared.catalog, mode,
                                  config.evolution.pop_size, K, evo,
                                  config.guided_init_config(), seed);
        for (std::size_t i = 0; i < n_users; ++i)
            pops[i] = std::move(seeded.at(prepared.users[i]));
    } else {
        parallel_for(n_users, threads, [&](std::size_t i) {
            const UserId user = prepared.users[i];
            const CandidateSet& cand = prepared.test_candidates.at(user);
            EvalContext ctx{&cand, &prepared.catalog, mode};
            Rng rng = Rng::for_user(seed, user, "init");
            pops[i] = random_init(cand, config.evolution.pop_size, K, ctx, rng);
        });
    }

    std::vector<double> hv_slots(n_users, 0.0);
    auto record_trace = [&]() {
        parallel_for(n_users, threads, [&](std::size_t i) {
            std::vector<Individual> copy = pops[i].members;
            const auto fronts = fast_nondominated_sort(copy);
            std::vector<ObjectiveVector> pts;
            pts.reserve(fronts[0].size());
            for (std::size_t idx : fronts[0]) pts.push_back(copy[idx].objectives);
            hv_slots[i] = hypervolume_3d(pts);
        });
        double sum = 0.0;
        for (double v : hv_slots) sum += v;
        result.hv_trace.push_back(sum / static_cast<double>(n_users));
    };
    record_trace(); // generation 0 (after initialization)

    ScorerParams params;
    bool scorer_ready = false;
    std::vector<std::vector<PreferenceExample>> example_slots(n_users);
    std::vector<PreferenceExample> retained;
    std::vector<AnchorSet> anchor_slots(n_users);
    std::atomic<std::uint64_t> label_dev_bits{0}; // max |sum-1| as ordered bits
    auto update_label_dev = [&label_dev_bits](double dev) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof dev);
        std::memcpy(&bits, &dev, sizeof bits);
        std::uint64_t prev = label_dev_bits.load();
        while (bits > prev && !label_dev_bits.compare_exchange_weak(prev, bits)) {}
    };

    for (int g = 1; g <= config.evolution.generations; ++g) {
        parallel_for(n_users, threads, [&](std::size_t i) {
            const UserId user = prepared.users[i];
            const CandidateSet& cand = prepared.test_candidates.at(user);
            EvalContext ctx{&cand, &prepared.catalog, mode};
            // One stream per (user, generation): variation randomness is
            // independent of how many draws earlier generations consumed.
            Rng rng = Rng::for_user(seed, user, "evolve-" + std::to_string(g));
            pops[i] = evolve_generation(std::move(pops[i]), cand, ctx, evo, rng);
        });

        if (transfer_enabled && g % interval == 0) {
            ++result.transfer_rounds;
            // Build examples per user, then concatenate in user order.
            parallel_for(n_users, threads, [&](std::size_t i) {
                example_slots[i] = build_examples(pops[i], prepared.catalog, n_clusters);
                // Label-sum diagnostic per (user, cluster).
                std::map<int, double> sums;
                for (const auto& ex : example_slots[i]) sums[ex.lambda] += ex.label;
                double dev = 0.0;
                for (const auto& [lambda, s] : sums) dev = std::max(dev, std::fabs(s - 1.0));
                update_label_dev(dev);
            });
            std::vector<PreferenceExample> examples = retained;
            for (auto& slot : example_slots) {
                examples.insert(examples.end(), std::make_move_iterator(slot.begin()),
                                std::make_move_iterator(slot.end()));
                slot.clear();
            }
            if (config.transfer.retain_examples) retained = examples;

            if (!scorer_ready || !config.scorer.warm_start) {
                Rng init_rng = Rng::for_stream(
                    seed, "scorer-init-" + std::to_string(result.transfer_rounds));
                params = init_params(prepared.users,
                                     prepared.catalog.feature_dim() + n_clusters,
                                     config.scorer_config(), init_rng);
                scorer_ready = true;
            }
            ScorerConfig train_config = config.scorer_config();
            train_config.seed =
                splitmix64(seed ^ (0xA11CEULL + static_cast<std::uint64_t>(result.transfer_rounds)));
            auto losses = train(params, examples, train_config);
            result.loss_trace.emplace_back(result.transfer_rounds, std::move(losses));

            parallel_for(n_users, threads, [&](std::size_t i) {
                const UserId user = prepared.users[i];
                const CandidateSet& cand = prepared.test_candidates.at(user);
                EvalContext ctx{&cand, &prepared.catalog, mode};
                anchor_slots[i] = knowledge_transfer(params, user, n_clusters, K, ctx);
                pops[i] = merge(std::move(pops[i]), anchor_slots[i]);
            });
        }
        record_trace();
    }

    std::uint64_t bits = label_dev_bits.load();
    std::memcpy(&result.label_sum_max_deviation, &bits, sizeof bits);
    if (scorer_ready) result.scorer = std::move(params);

    // Final fronts and list selection.
    std::vector<SelectedLists> selection_slots(n_users);
    std::vector<std::vector<std::size_t>> front_slots(n_users);
    std::vector<SolutionList> default_slots(n_users);
    const bool have_anchors = result.transfer_rounds > 0;
    parallel_for(n_users, threads, [&](std::size_t i) {
        auto fronts = fast_nondominated_sort(pops[i].members);
        front_slots[i] = fronts[0];
        std::vector<Individual> front;
        front.reserve(fronts[0].size());
        for (std::size_t idx : fronts[0]) front.push_back(pops[i].members[idx]);
        if (have_anchors) {
            SelectionPolicy policy;
            policy.pinned_lambda = config.selection.pinned_lambda;
            selection_slots[i] = select_final(front, anchor_slots[i], policy);
            default_slots[i] =
                front[selection_slots[i].by_lambda.at(selection_slots[i].default_lambda)].list;
        } else {
            // No anchors to point at: fall back to the front member with the
            // best balanced F-measure of its own objectives.
            std::size_t best = 0;
            double best_q = -1.0;
            for (std::size_t j = 0; j < front.size(); ++j) {
                const ObjectiveVector& o = front[j].objectives;
                const double q = f_beta(o.acc, o.div, o.nov, 1.0);
                if (q > best_q) {
                    best_q = q;
                    best = j;
                }
            }
            default_slots[i] = front[best].list;
        }
    });

    for (std::size_t i = 0; i < n_users; ++i) {
        const UserId user = prepared.users[i];
        result.fronts.emplace(user, std::move(front_slots[i]));
        if (have_anchors) {
            result.anchors.emplace(user, std::move(anchor_slots[i]));
            result.selections.emplace(user, std::move(selection_slots[i]));
        }
        result.default_lists.emplace(user, std::move(default_slots[i]));
        result.populations.emplace(user, std::move(pops[i]));
    }

    result.mean_front_hypervolume = result.hv_trace.back();
    result.metrics = compute_metrics(result.default_lists, prepared.positives, prepared.catalog,
                                     mode, config.evaluation.cutoffs);
    result.metrics.mean_front_hypervolume = result.mean_front_hypervolume;
    return result;
}

} // namespace preferrec

#endif // PREFERREC_PIPELINE_HPP
