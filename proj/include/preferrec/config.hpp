/**
 * @file config.hpp
 * @brief Run configuration: a sectioned key-value file, defaults, validation,
 *        and a canonical serialization used for content hashing.
 *
 * File syntax: `[section]` headers, `key = value` pairs, `#` comments, blank
 * lines ignored. Unknown sections or keys are configuration errors, so typos
 * fail loudly. Sections: data, evolution, scorer, transfer, selection,
 * evaluation.
 */

#ifndef PREFERREC_CONFIG_HPP
#define PREFERREC_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "evolution.hpp"
#include "guided_init.hpp"
#include "objectives.hpp"
#include "pareto_net.hpp"
#include "rng.hpp"

namespace preferrec {

struct RunConfig {
    struct Data {
        std::string interactions;      ///< interaction log path
        std::string scores;            ///< base-score file path
        std::string embeddings;        ///< optional item-embedding file path
        std::string prepared_dir;      ///< optional: load prepared artifacts instead
        std::string delimiter = "tab"; ///< tab | comma
        bool uniform_fallback = false; ///< rank-reciprocal scores instead of a file
        std::size_t max_malformed = 0;
        std::size_t min_history = 3;
        std::size_t negatives = 99;
        bool synthetic = false;        ///< generate the dataset instead of loading
        std::size_t synthetic_users = 200;
        std::size_t synthetic_items = 500;
        std::size_t synthetic_categories = 20;
    } data;

    struct Evolution {
        std::uint64_t seed = 42;
        std::size_t pop_size = 50;
        int generations = 10;
        double crossover_prob = 0.9;
        double mutation_prob = 0.2;
        std::size_t list_length = 10;
        std::string novelty_mode = "normalized";
        bool guided_init = true;
        std::size_t user_clusters = 10;
        int init_generations = 10;
    } evolution;

    struct Scorer {
        int user_dim = 16;
        int hidden1 = 128;
        int hidden2 = 64;
        double learning_rate = 0.001;
        int batch_size = 256;
        int epochs = 10;
        bool warm_start = true;
    } scorer;

    struct Transfer {
        int interval = 3;          ///< transfer every `interval` generations; 0 disables
        std::size_t clusters = 10; ///< preference cluster count N_c
        bool retain_examples = false;
    } transfer;

    struct Selection {
        int pinned_lambda = -1;
    } selection;

    struct Evaluation {
        std::vector<int> cutoffs = {5, 10};
    } evaluation;

    [[nodiscard]] char delimiter_char() const {
        if (data.delimiter == "tab") return '\t';
        if (data.delimiter == "comma") return ',';
        throw config_error("unknown delimiter '" + data.delimiter + "' (expected tab|comma)");
    }

    [[nodiscard]] NoveltyMode novelty() const { return parse_novelty_mode(evolution.novelty_mode); }

    [[nodiscard]] EvolutionConfig evolution_config() const {
        EvolutionConfig c;
        c.pop_size = evolution.pop_size;
        c.generations = evolution.generations;
        c.crossover_prob = evolution.crossover_prob;
        c.mutation_prob = evolution.mutation_prob;
        return c;
    }

    [[nodiscard]] GuidedInitConfig guided_init_config() const {
        GuidedInitConfig c;
        c.user_clusters = evolution.user_clusters;
        c.init_generations = evolution.init_generations;
        return c;
    }

    [[nodiscard]] ScorerConfig scorer_config() const {
        ScorerConfig c;
        c.user_dim = scorer.user_dim;
        c.hidden1 = scorer.hidden1;
        c.hidden2 = scorer.hidden2;
        c.learning_rate = scorer.learning_rate;
        c.batch_size = scorer.batch_size;
        c.epochs = scorer.epochs;
        c.seed = evolution.seed;
        return c;
    }

    void validate() const {
        (void)delimiter_char();
        (void)novelty();
        evolution_config().validate();
        guided_init_config().validate();
        scorer_config().validate();
        if (evolution.list_length == 0) throw config_error("list_length must be positive");
        if (evolution.list_length > data.negatives + 1)
            throw config_error("list_length cannot exceed the candidate pool size");
        if (transfer.interval < 0) throw config_error("transfer interval must be >= 0");
        if (transfer.clusters == 0) throw config_error("transfer clusters must be positive");
        if (transfer.clusters > evolution.pop_size)
            throw config_error("transfer clusters cannot exceed pop_size");
        if (evaluation.cutoffs.empty()) throw config_error("evaluation cutoffs must be non-empty");
        for (int k : evaluation.cutoffs) {
            if (k < 1 || static_cast<std::size_t>(k) > evolution.list_length)
                throw config_error("evaluation cutoff " + std::to_string(k) +
                                   " must lie in [1, list_length]");
        }
        if (!data.synthetic && data.prepared_dir.empty() && data.interactions.empty())
            throw config_error("config needs data.interactions, data.prepared_dir, or "
                               "data.synthetic = true");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("key '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(x);
    } catch (...) {
        throw config_error("key '" + key + "' expects an unsigned integer, got '" + v + "'");
    }
}

inline int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw config_error("key '" + key + "' expects an integer, got '" + v + "'");
    }
}

inline double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw config_error("key '" + key + "' expects a number, got '" + v + "'");
    }
}

inline std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
    std::vector<int> out;
    std::string part;
    std::istringstream ss(v);
    while (std::getline(ss, part, ',')) out.push_back(parse_int(trim(part), key));
    if (out.empty()) throw config_error("key '" + key + "' expects a comma-separated list");
    return out;
}

} // namespace detail

/// Applies one `section.key = value` assignment onto a config.
inline void apply_config_entry(RunConfig& c, const std::string& section, const std::string& key,
                               const std::string& value) {
    using detail::parse_bool;
    using detail::parse_int;
    using detail::parse_int_list;
    using detail::parse_real;
    using detail::parse_u64;
    const std::string full = section + "." + key;

    if (section == "data") {
        if (key == "interactions") c.data.interactions = value;
        else if (key == "scores") c.data.scores = value;
        else if (key == "embeddings") c.data.embeddings = value;
        else if (key == "prepared_dir") c.data.prepared_dir = value;
        else if (key == "delimiter") c.data.delimiter = value;
        else if (key == "uniform_fallback") c.data.uniform_fallback = parse_bool(value, full);
        else if (key == "max_malformed") c.data.max_malformed = parse_u64(value, full);
        else if (key == "min_history") c.data.min_history = parse_u64(value, full);
        else if (key == "negatives") c.data.negatives = parse_u64(value, full);
        else if (key == "synthetic") c.data.synthetic = parse_bool(value, full);
        else if (key == "synthetic_users") c.data.synthetic_users = parse_u64(value, full);
        else if (key == "synthetic_items") c.data.synthetic_items = parse_u64(value, full);
        else if (key == "synthetic_categories")
            c.data.synthetic_categories = parse_u64(value, full);
        else throw config_error("unknown config key '" + full + "'");
    } else if (section == "evolution") {
        if (key == "seed") c.evolution.seed = parse_u64(value, full);
        else if (key == "pop_size") c.evolution.pop_size = parse_u64(value, full);
        else if (key == "generations") c.evolution.generations = parse_int(value, full);
        else if (key == "crossover_prob") c.evolution.crossover_prob = parse_real(value, full);
        else if (key == "mutation_prob") c.evolution.mutation_prob = parse_real(value, full);
        else if (key == "list_length") c.evolution.list_length = parse_u64(value, full);
        else if (key == "novelty_mode") c.evolution.novelty_mode = value;
        else if (key == "guided_init") c.evolution.guided_init = parse_bool(value, full);
        else if (key == "user_clusters") c.evolution.user_clusters = parse_u64(value, full);
        else if (key == "init_generations") c.evolution.init_generations = parse_int(value, full);
        else throw config_error("unknown config key '" + full + "'");
    } else if (section == "scorer") {
        if (key == "user_dim") c.scorer.user_dim = parse_int(value, full);
        else if (key == "hidden1") c.scorer.hidden1 = parse_int(value, full);
        else if (key == "hidden2") c.scorer.hidden2 = parse_int(value, full);
        else if (key == "learning_rate") c.scorer.learning_rate = parse_real(value, full);
        else if (key == "batch_size") c.scorer.batch_size = parse_int(value, full);
        else if (key == "epochs") c.scorer.epochs = parse_int(value, full);
        else if (key == "warm_start") c.scorer.warm_start = parse_bool(value, full);
        else throw config_error("unknown config key '" + full + "'");
    } else if (section == "transfer") {
        if (key == "interval") c.transfer.interval = parse_int(value, full);
        else if (key == "clusters") c.transfer.clusters = parse_u64(value, full);
        else if (key == "retain_examples") c.transfer.retain_examples = parse_bool(value, full);
        else throw config_error("unknown config key '" + full + "'");
    } else if (section == "selection") {
        if (key == "pinned_lambda") c.selection.pinned_lambda = parse_int(value, full);
        else throw config_error("unknown config key '" + full + "'");
    } else if (section == "evaluation") {
        if (key == "cutoffs") c.evaluation.cutoffs = parse_int_list(value, full);
        else throw config_error("unknown config key '" + full + "'");
    } else {
        throw config_error("unknown config section '" + section + "'");
    }
}

/// Parses a config file on top of the defaults. Unknown keys are errors.
[[nodiscard]] inline RunConfig parse_config_text(std::istream& in, const std::string& origin) {
    RunConfig c;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error(origin + ":" + std::to_string(line_no) +
                                   ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty())
            throw config_error(origin + ":" + std::to_string(line_no) +
                               ": key outside any [section]");
        try {
            apply_config_entry(c, section, key, value);
        } catch (const config_error& e) {
            throw config_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file " + path);
    return parse_config_text(f, path);
}

/// Canonical key-value rendering of the resolved config; hashing this gives a
/// stable content hash, independent of file formatting.
[[nodiscard]] inline std::string canonical_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[data]\n"
        << "delimiter = " << c.data.delimiter << "\n"
        << "embeddings = " << c.data.embeddings << "\n"
        << "interactions = " << c.data.interactions << "\n"
        << "max_malformed = " << c.data.max_malformed << "\n"
        << "min_history = " << c.data.min_history << "\n"
        << "negatives = " << c.data.negatives << "\n"
        << "prepared_dir = " << c.data.prepared_dir << "\n"
        << "scores = " << c.data.scores << "\n"
        << "synthetic = " << (c.data.synthetic ? "true" : "false") << "\n"
        << "synthetic_categories = " << c.data.synthetic_categories << "\n"
        << "synthetic_items = " << c.data.synthetic_items << "\n"
        << "synthetic_users = " << c.data.synthetic_users << "\n"
        << "uniform_fallback = " << (c.data.uniform_fallback ? "true" : "false") << "\n";
    char buf[64];
    out << "[evolution]\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.evolution.crossover_prob);
    out << "crossover_prob = " << buf << "\n"
        << "generations = " << c.evolution.generations << "\n"
        << "guided_init = " << (c.evolution.guided_init ? "true" : "false") << "\n"
        << "init_generations = " << c.evolution.init_generations << "\n"
        << "list_length = " << c.evolution.list_length << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.evolution.mutation_prob);
    out << "mutation_prob = " << buf << "\n"
        << "novelty_mode = " << c.evolution.novelty_mode << "\n"
        << "pop_size = " << c.evolution.pop_size << "\n"
        << "seed = " << c.evolution.seed << "\n"
        << "user_clusters = " << c.evolution.user_clusters << "\n";
    out << "[scorer]\n"
        << "batch_size = " << c.scorer.batch_size << "\n"
        << "epochs = " << c.scorer.epochs << "\n"
        << "hidden1 = " << c.scorer.hidden1 << "\n"
        << "hidden2 = " << c.scorer.hidden2 << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.scorer.learning_rate);
    out << "learning_rate = " << buf << "\n"
        << "user_dim = " << c.scorer.user_dim << "\n"
        << "warm_start = " << (c.scorer.warm_start ? "true" : "false") << "\n";
    out << "[transfer]\n"
        << "clusters = " << c.transfer.clusters << "\n"
        << "interval = " << c.transfer.interval << "\n"
        << "retain_examples = " << (c.transfer.retain_examples ? "true" : "false") << "\n";
    out << "[selection]\n"
        << "pinned_lambda = " << c.selection.pinned_lambda << "\n";
    out << "[evaluation]\ncutoffs = ";
    for (std::size_t i = 0; i < c.evaluation.cutoffs.size(); ++i)
        out << (i ? "," : "") << c.evaluation.cutoffs[i];
    out << "\n";
    return out.str();
}

/// 16-hex-digit content hash of the canonical config rendering.
[[nodiscard]] inline std::string config_hash(const RunConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_config(c))));
    return buf;
}

} // namespace preferrec

#endif // PREFERREC_CONFIG_HPP
