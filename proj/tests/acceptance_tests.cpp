// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
//
// Each criterion exercises a released behavior end to end (frozen metric
// values, oracle agreement, numeric gradients, operator validity, the
// knowledge-transfer ablation, bitwise determinism, label normalization,
// baseline equivalences, and metric shape properties).

#include <preferrec/commands.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace preferrec;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int hw_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// ---------------------------------------------------------------------------
// Criterion 1: four frozen F-measure values reproduce within 5e-4, in
// millisecond time.
// ---------------------------------------------------------------------------
Outcome criterion1() {
    struct Case {
        double hr, div, nov, beta, expected;
    };
    const std::vector<Case> cases = {
        {0.8124, 0.3587, 0.6521, 1.0, 0.3127},
        {0.8124, 0.3587, 0.6521, 2.0, 0.3522},
        {0.8978, 0.5307, 0.7105, 1.0, 0.4748},
        {0.8978, 0.5307, 0.7105, 2.0, 0.5197},
    };
    const auto t0 = Clock::now();
    double max_err = 0.0;
    for (const Case& c : cases)
        max_err = std::max(max_err, std::fabs(f_beta(c.hr, c.div, c.nov, c.beta) - c.expected));
    const double ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(Clock::now() - t0)
            .count();
    if (max_err > 5e-4)
        return {false, fmt("frozen F-measure values off by %.3g (> 5e-4)", max_err)};
    if (ms > 100.0) return {false, fmt("F-measure evaluation took %.1f ms (> 100 ms)", ms)};
    return {true, fmt("four frozen F-measure values reproduced, max abs err %.2g", max_err)};
}

// ---------------------------------------------------------------------------
// Criterion 2: the fast non-dominated sort matches an exhaustive peeling
// oracle exactly on 1000 random populations of size <= 64, within 10 s.
// ---------------------------------------------------------------------------
std::vector<int> oracle_ranks(const std::vector<Individual>& m) {
    std::vector<int> rank(m.size(), -1);
    std::size_t assigned = 0;
    int r = 0;
    while (assigned < m.size()) {
        std::vector<std::size_t> current;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (rank[i] != -1) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < m.size() && !dominated; ++j)
                if (j != i && rank[j] == -1 && dominates(m[j].objectives, m[i].objectives))
                    dominated = true;
            if (!dominated) current.push_back(i);
        }
        for (std::size_t i : current) rank[i] = r;
        assigned += current.size();
        ++r;
    }
    return rank;
}

Outcome criterion2() {
    const auto t0 = Clock::now();
    Rng rng = Rng::for_stream(2026, "acceptance-sort");
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(64);
        std::vector<Individual> members(n);
        const bool quantized = rng.bernoulli(0.3); // coarse grids force ties
        for (auto& ind : members) {
            auto draw = [&] {
                double v = rng.uniform_real();
                if (quantized) v = std::floor(v * 4.0) / 4.0;
                return v;
            };
            ind.objectives = {draw(), draw(), draw()};
        }
        const std::vector<int> expected = oracle_ranks(members);
        const auto fronts = fast_nondominated_sort(members);
        for (std::size_t i = 0; i < n; ++i)
            if (members[i].rank != expected[i])
                return {false, fmt("trial %d: rank of member %zu is %d, oracle says %d", trial,
                                   i, members[i].rank, expected[i])};
        std::size_t covered = 0;
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            for (std::size_t i : fronts[r])
                if (expected[i] != static_cast<int>(r))
                    return {false, fmt("trial %d: front %zu lists member %zu of oracle rank %d",
                                       trial, r, i, expected[i])};
            covered += fronts[r].size();
        }
        if (covered != n)
            return {false, fmt("trial %d: fronts cover %zu of %zu members", trial, covered, n)};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > 10.0) return {false, fmt("sort comparison took %.1f s (> 10 s)", secs)};
    return {true, "non-dominated sort matches the exhaustive oracle on 1000 random populations"};
}

// ---------------------------------------------------------------------------
// Criterion 3: analytic gradients match central finite differences within
// 1e-4 relative error on 100 random small networks, within 30 s.
// ---------------------------------------------------------------------------
std::vector<double*> all_params(ScorerParams& p) {
    std::vector<double*> out;
    for (auto& v : p.emb) out.push_back(&v);
    for (auto& v : p.W1) out.push_back(&v);
    for (auto& v : p.b1) out.push_back(&v);
    for (auto& v : p.W2) out.push_back(&v);
    for (auto& v : p.b2) out.push_back(&v);
    for (auto& v : p.W3) out.push_back(&v);
    out.push_back(&p.b3);
    return out;
}

std::vector<double> flat_gradients(const Gradients& g) {
    std::vector<double> out;
    out.insert(out.end(), g.emb.begin(), g.emb.end());
    out.insert(out.end(), g.W1.begin(), g.W1.end());
    out.insert(out.end(), g.b1.begin(), g.b1.end());
    out.insert(out.end(), g.W2.begin(), g.W2.end());
    out.insert(out.end(), g.b2.begin(), g.b2.end());
    out.insert(out.end(), g.W3.begin(), g.W3.end());
    out.push_back(g.b3);
    return out;
}

Outcome criterion3() {
    const auto t0 = Clock::now();
    Rng rng = Rng::for_stream(2026, "acceptance-grad");
    double worst_rel = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t feature_dim = 3 + rng.uniform_index(6);
        ScorerConfig config;
        config.user_dim = static_cast<int>(2 + rng.uniform_index(3));
        config.hidden1 = static_cast<int>(4 + rng.uniform_index(5));
        config.hidden2 = static_cast<int>(3 + rng.uniform_index(4));
        const std::vector<UserId> users = {1, 2, 3};
        ScorerParams p = init_params(users, feature_dim, config, rng);

        const std::size_t batch = 4 + rng.uniform_index(7);
        std::vector<PreferenceExample> examples(batch);
        for (auto& ex : examples) {
            ex.user = users[rng.uniform_index(users.size())];
            ex.item = static_cast<ItemId>(rng.uniform_index(50));
            ex.features.resize(feature_dim);
            for (auto& v : ex.features) v = rng.uniform_real();
            ex.label = rng.uniform_real();
        }
        std::vector<std::size_t> idx(batch);
        std::iota(idx.begin(), idx.end(), 0);

        const std::vector<double> analytic = flat_gradients(backward(p, examples, idx));
        auto params = all_params(p);
        if (params.size() != analytic.size())
            return {false, fmt("trial %d: %zu parameters but %zu gradient entries", trial,
                               params.size(), analytic.size())};
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto rel_to = [&](double fd) {
                const double diff = std::fabs(fd - analytic[i]);
                return diff <= 1e-9
                           ? 0.0
                           : diff / std::max({1e-8, std::fabs(fd), std::fabs(analytic[i])});
            };
            const auto loss_at = [&](double delta) {
                const double saved = *params[i];
                *params[i] = saved + delta;
                const double value = batch_loss(p, examples, idx);
                *params[i] = saved;
                return value;
            };
            const double h = 1e-6;
            const double central = (loss_at(h) - loss_at(-h)) / (2 * h);
            double rel = rel_to(central);
            if (rel > 1e-4) {
                // A rectified unit whose pre-activation sits at (or within h
                // of) zero makes the loss one-sided-differentiable in this
                // coordinate: the central secant averages the two slopes and
                // estimates no derivative at all. The analytic value must
                // then equal one of the one-sided secants; a genuinely wrong
                // gradient matches neither side.
                const double hs = 1e-7;
                const double mid = loss_at(0.0);
                const double right = (loss_at(hs) - mid) / hs;
                const double left = (mid - loss_at(-hs)) / hs;
                rel = std::min(rel_to(right), rel_to(left));
            }
            worst_rel = std::max(worst_rel, rel);
            if (rel > 1e-4)
                return {false, fmt("trial %d: coordinate %zu analytic %.6g vs central %.6g "
                                   "(rel err %.3g > 1e-4, no one-sided match)",
                                   trial, i, analytic[i], central, rel)};
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > 30.0) return {false, fmt("gradient comparison took %.1f s (> 30 s)", secs)};
    return {true, fmt("analytic gradients match central differences on 100 random networks "
                      "(worst rel err %.2g)",
                      worst_rel)};
}

// ---------------------------------------------------------------------------
// Criterion 4: 10000 random crossover + mutation + repair applications yield
// only valid duplicate-free fixed-length lists, within 10 s.
// ---------------------------------------------------------------------------
Outcome criterion4() {
    const auto t0 = Clock::now();
    Rng rng = Rng::for_stream(2026, "acceptance-ops");

    std::vector<ItemMeta> metas;
    for (ItemId item = 0; item < 200; ++item) {
        std::vector<CategoryId> cats;
        const std::size_t n_cats = 1 + rng.uniform_index(3);
        for (std::size_t c = 0; c < n_cats; ++c)
            cats.push_back(static_cast<CategoryId>(rng.uniform_index(12)));
        std::sort(cats.begin(), cats.end());
        cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
        metas.push_back({item, cats, 1 + static_cast<int>(rng.uniform_index(50)), {}});
    }
    const ItemCatalog catalog(std::move(metas));

    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 5 + rng.uniform_index(36);
        const std::size_t k = 1 + rng.uniform_index(n);
        std::vector<ItemId> pool(200);
        std::iota(pool.begin(), pool.end(), 0);
        rng.shuffle(pool);
        pool.resize(n);
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng.uniform_real();
        const CandidateSet cand(trial, pool, scores);
        const EvalContext ctx{&cand, &catalog, NoveltyMode::normalized};

        const SolutionList a = random_solution(cand, k, rng);
        const SolutionList b = random_solution(cand, k, rng);
        auto [ca, cb] = crossover(a, b, cand, rng);
        for (const SolutionList* child : {&ca, &cb})
            if (!is_valid_solution(*child, cand, k))
                return {false, fmt("trial %d: crossover produced an invalid list (k=%zu)",
                                   trial, k)};
        Individual ia{ca, evaluate(ca, ctx), 0, 0.0};
        Individual ib{cb, evaluate(cb, ctx), 0, 0.0};
        mutate(ia, cand, ctx, 1.0, rng); // always mutate: exercise the operator
        mutate(ib, cand, ctx, 0.3, rng); // sometimes mutate: exercise the gate
        for (const Individual* child : {&ia, &ib})
            if (!is_valid_solution(child->list, cand, k))
                return {false,
                        fmt("trial %d: mutation produced an invalid list (k=%zu)", trial, k)};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > 10.0) return {false, fmt("operator sweep took %.1f s (> 10 s)", secs)};
    return {true, "10000 crossover+mutation+repair applications produced only valid lists"};
}

// ---------------------------------------------------------------------------
// Criterion 5: on the reference synthetic dataset (200 users, 500 items, 20
// categories, list length 10, population 50, 10 generations, transfer every
// 3, seed 7) enabling knowledge transfer does not lower the mean final-front
// hypervolume and strictly wins on at least 55% of users, all within 5 min.
// Criterion 7 reuses the transfer run to check label normalization.
// ---------------------------------------------------------------------------
struct AblationState {
    std::optional<RunResult> kt;
    std::optional<PreparedData> prepared;
};

Outcome criterion5(AblationState& state) {
    const auto t0 = Clock::now();
    RunConfig config;
    config.data.synthetic = true; // users/items/categories keep reference defaults
    config.evolution.seed = 7;

    const auto dir = fresh_dir("preferrec_accept_ablation");
    PreparedData prepared = prepare_data(config, dir.string());

    RunConfig with_kt = config;
    with_kt.transfer.interval = 3;
    RunConfig without_kt = config;
    without_kt.transfer.interval = 0;

    RunResult kt = run_pipeline(with_kt, prepared, hw_threads());
    const RunResult wokt = run_pipeline(without_kt, prepared, hw_threads());

    const auto hv_kt = detail::per_user_front_hv(kt);
    const auto hv_wokt = detail::per_user_front_hv(wokt);
    double sum_kt = 0.0, sum_wokt = 0.0;
    std::size_t wins = 0;
    for (const auto& [user, hv] : hv_kt) {
        const double other = hv_wokt.at(user);
        sum_kt += hv;
        sum_wokt += other;
        if (hv > other) ++wins;
    }
    const double n = static_cast<double>(hv_kt.size());
    const double mean_kt = sum_kt / n;
    const double mean_wokt = sum_wokt / n;
    const double win_rate = static_cast<double>(wins) / n;

    state.kt = std::move(kt);
    state.prepared = std::move(prepared);
    std::filesystem::remove_all(dir);

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const std::string stats = fmt("mean hv %.6f vs %.6f, win rate %.3f, %.0f s", mean_kt,
                                  mean_wokt, win_rate, secs);
    if (mean_kt < mean_wokt)
        return {false, "transfer lowered the mean front hypervolume: " + stats};
    if (win_rate < 0.55)
        return {false, "transfer won on fewer than 55% of users: " + stats};
    if (secs > 300.0) return {false, "ablation exceeded the 5 minute budget: " + stats};
    return {true, "knowledge transfer keeps mean front hypervolume and wins per user (" +
                      stats + ")"};
}

// ---------------------------------------------------------------------------
// Criterion 6: two complete runs with the same config and seed write
// byte-identical output trees.
// ---------------------------------------------------------------------------
std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream f(entry.path(), std::ios::binary);
        std::ostringstream bytes;
        bytes << f.rdbuf();
        files[std::filesystem::relative(entry.path(), root).string()] = bytes.str();
    }
    return files;
}

Outcome criterion6() {
    RunConfig config;
    config.data.synthetic = true;
    config.data.synthetic_users = 30;
    config.data.synthetic_items = 150;
    config.data.synthetic_categories = 8;
    config.evolution.seed = 11;
    config.evolution.pop_size = 20;
    config.evolution.generations = 6;
    config.evolution.list_length = 5;
    config.evolution.user_clusters = 4;
    config.evolution.init_generations = 2;
    config.scorer.hidden1 = 32;
    config.scorer.hidden2 = 16;
    config.scorer.user_dim = 8;
    config.scorer.epochs = 2;
    config.transfer.clusters = 5;
    config.evaluation.cutoffs = {5};

    const auto dir_a = fresh_dir("preferrec_accept_det_a");
    const auto dir_b = fresh_dir("preferrec_accept_det_b");
    if (cmd_run(config, dir_a.string(), 1, nullptr) != 0 ||
        cmd_run(config, dir_b.string(), 3, nullptr) != 0)
        return {false, "a run command exited nonzero"};

    const auto tree_a = read_tree(dir_a);
    const auto tree_b = read_tree(dir_b);
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    if (tree_a.size() != tree_b.size())
        return {false, fmt("runs wrote %zu vs %zu files", tree_a.size(), tree_b.size())};
    if (tree_a.empty()) return {false, "runs wrote no files"};
    for (const auto& [name, bytes] : tree_a) {
        const auto it = tree_b.find(name);
        if (it == tree_b.end()) return {false, "second run is missing " + name};
        if (it->second != bytes) return {false, name + " differs between the two runs"};
    }
    return {true, fmt("two identically seeded runs wrote byte-identical trees (%zu files, "
                      "thread counts 1 and 3)",
                      tree_a.size())};
}

// ---------------------------------------------------------------------------
// Criterion 7: every per-(user, cluster) soft-label distribution built during
// the full reference run sums to 1 within 1e-9.
// ---------------------------------------------------------------------------
Outcome criterion7(const AblationState& state) {
    if (!state.kt)
        return {false, "no reference transfer run available (see the ablation criterion)"};
    const double dev = state.kt->label_sum_max_deviation;
    if (state.kt->transfer_rounds <= 0)
        return {false, "reference run performed no transfer rounds"};
    if (!(dev <= 1e-9))
        return {false, fmt("max |label sum - 1| = %.3g exceeds 1e-9", dev)};
    return {true, fmt("all soft-label sums within %.2g of 1 across %d transfer rounds", dev,
                      state.kt->transfer_rounds)};
}

// ---------------------------------------------------------------------------
// Criterion 8: the diversity-aware baseline with trade-off 1 emits lists
// identical to plain top-k on random pools and on the reference dataset.
// ---------------------------------------------------------------------------
Outcome criterion8(const AblationState& state) {
    Rng rng = Rng::for_stream(2026, "acceptance-mmr");
    std::vector<ItemMeta> metas;
    for (ItemId item = 0; item < 300; ++item)
        metas.push_back({item,
                         {static_cast<CategoryId>(rng.uniform_index(10))},
                         1 + static_cast<int>(rng.uniform_index(40)),
                         {}});
    const ItemCatalog catalog(std::move(metas));

    std::size_t checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 5 + rng.uniform_index(60);
        const std::size_t k = 1 + rng.uniform_index(n);
        std::vector<ItemId> pool(300);
        std::iota(pool.begin(), pool.end(), 0);
        rng.shuffle(pool);
        pool.resize(n);
        std::vector<double> scores(n);
        for (auto& s : scores) // quantized scores make ties common
            s = std::floor(rng.uniform_real() * 8.0) / 8.0;
        const CandidateSet cand(trial, pool, scores);
        if (mmr_list(cand, catalog, k, 1.0) != topk_list(cand, k))
            return {false, fmt("random pool %d: lists diverge at trade-off 1", trial)};
        ++checked;
    }

    if (state.prepared) {
        const std::size_t k = 10;
        for (const auto& [user, cand] : state.prepared->test_candidates) {
            if (mmr_list(cand, state.prepared->catalog, k, 1.0) != topk_list(cand, k))
                return {false,
                        fmt("reference dataset: lists diverge for user %lld",
                            static_cast<long long>(user))};
            ++checked;
        }
    }
    return {true, fmt("trade-off 1 reproduced plain top-k on %zu candidate pools", checked)};
}

// ---------------------------------------------------------------------------
// Criterion 9: the F-measure is symmetric in its diversity/novelty arguments
// and strictly monotone in each argument over 1000 random triples, and the
// hit rate is monotone in the cutoff on random fixtures.
// ---------------------------------------------------------------------------
Outcome criterion9() {
    Rng rng = Rng::for_stream(2026, "acceptance-fbeta");
    for (int trial = 0; trial < 1000; ++trial) {
        const double h = 0.01 + 0.94 * rng.uniform_real();
        const double d = 0.01 + 0.94 * rng.uniform_real();
        const double n = 0.01 + 0.94 * rng.uniform_real();
        for (double beta : {1.0, 2.0}) {
            const double base = f_beta(h, d, n, beta);
            if (std::fabs(base - f_beta(h, n, d, beta)) > 1e-12)
                return {false, fmt("trial %d: swapping the last two arguments changed the "
                                   "F-measure at beta %.0f",
                                   trial, beta)};
            const double step = 0.01 + 0.04 * rng.uniform_real();
            if (!(f_beta(h + step, d, n, beta) > base))
                return {false, fmt("trial %d: F-measure not strictly increasing in the first "
                                   "argument at beta %.0f",
                                   trial, beta)};
            if (!(f_beta(h, d + step, n, beta) > base))
                return {false, fmt("trial %d: F-measure not strictly increasing in the second "
                                   "argument at beta %.0f",
                                   trial, beta)};
            if (!(f_beta(h, d, n + step, beta) > base))
                return {false, fmt("trial %d: F-measure not strictly increasing in the third "
                                   "argument at beta %.0f",
                                   trial, beta)};
        }
    }

    for (int fixture = 0; fixture < 30; ++fixture) {
        const std::size_t users = 1 + rng.uniform_index(20);
        std::map<UserId, SolutionList> lists;
        std::map<UserId, ItemId> positives;
        for (std::size_t u = 0; u < users; ++u) {
            SolutionList list(10);
            std::vector<ItemId> pool(40);
            std::iota(pool.begin(), pool.end(), 0);
            rng.shuffle(pool);
            std::copy_n(pool.begin(), 10, list.begin());
            lists[static_cast<UserId>(u)] = list;
            // Half the positives sit somewhere in the list, half outside it.
            positives[static_cast<UserId>(u)] =
                rng.bernoulli(0.5) ? list[rng.uniform_index(10)] : pool[10 + rng.uniform_index(30)];
        }
        double previous = 0.0;
        for (std::size_t k = 1; k <= 10; ++k) {
            const double hr = hr_at_k(lists, positives, k);
            if (hr + 1e-15 < previous)
                return {false, fmt("fixture %d: hit rate fell from %.6f to %.6f when the "
                                   "cutoff grew to %zu",
                                   fixture, previous, hr, k)};
            previous = hr;
        }
    }
    return {true, "F-measure symmetry and strict monotonicity hold on 1000 random triples; "
                  "hit rate is monotone in the cutoff"};
}

} // namespace

int main() {
    struct Entry {
        int id;
        std::function<Outcome()> run;
    };
    AblationState state;
    const std::vector<Entry> entries = {
        {1, [] { return criterion1(); }},
        {2, [] { return criterion2(); }},
        {3, [] { return criterion3(); }},
        {4, [] { return criterion4(); }},
        {5, [&state] { return criterion5(state); }},
        {6, [] { return criterion6(); }},
        {7, [&state] { return criterion7(state); }},
        {8, [&state] { return criterion8(state); }},
        {9, [] { return criterion9(); }},
    };

    int failures = 0;
    for (const Entry& entry : entries) {
        const auto t0 = Clock::now();
        Outcome outcome;
        try {
            outcome = entry.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("unexpected exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("%s criterion %d: %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL", entry.id,
                    outcome.detail.c_str(), secs);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    if (failures == 0) {
        std::printf("all 9 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d of 9 acceptance criteria FAILED\n", failures);
    return 1;
}
