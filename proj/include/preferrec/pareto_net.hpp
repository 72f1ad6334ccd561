/**
 * @file pareto_net.hpp
 * @brief Preference-conditioned MLP scorer with analytic backprop and Adam.
 *
 * Architecture: input [x_i || one-hot(lambda) || user embedding] -> two ReLU
 * hidden layers -> sigmoid output. The user embedding is a learned table row
 * looked up by user id; only rows of users present in a batch receive
 * gradient. Training minimizes soft-target binary cross-entropy, averaged per
 * batch, with the prediction clamped away from {0, 1} inside the loss.
 *
 * Everything is plain double arithmetic with fixed accumulation order, so a
 * training run is a pure function of (params, examples, config).
 */

#ifndef PREFERREC_PARETO_NET_HPP
#define PREFERREC_PARETO_NET_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "preference.hpp"
#include "rng.hpp"

namespace preferrec {

/// Prediction clamp used inside the loss.
inline constexpr double kProbClamp = 1e-7;

struct ScorerConfig {
    int user_dim = 16;
    int hidden1 = 128;
    int hidden2 = 64;
    double learning_rate = 0.001;
    int batch_size = 256;
    int epochs = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (user_dim < 1 || hidden1 < 1 || hidden2 < 1)
            throw config_error("scorer dimensions must be positive");
        if (learning_rate < 0.0) throw config_error("learning_rate must be non-negative");
        if (batch_size < 1) throw config_error("batch_size must be positive");
        if (epochs < 0) throw config_error("epochs must be non-negative");
    }
};

/**
 * @brief All learnable parameters plus the user-id-to-row mapping.
 *
 * Weight matrices are stored input-major: W1[k * hidden1 + j] connects input
 * k to hidden unit j, and likewise for W2. W3 maps the second hidden layer to
 * the single output logit.
 */
struct ScorerParams {
    std::vector<UserId> users;                      ///< sorted user ids, row order
    std::unordered_map<UserId, std::size_t> user_row;
    std::size_t feature_dim = 0;                    ///< d_x + N_c (without embedding)
    int user_dim = 0;
    int hidden1 = 0;
    int hidden2 = 0;
    std::vector<double> emb; ///< users.size() x user_dim
    std::vector<double> W1;  ///< input_dim x hidden1
    std::vector<double> b1;  ///< hidden1
    std::vector<double> W2;  ///< hidden1 x hidden2
    std::vector<double> b2;  ///< hidden2
    std::vector<double> W3;  ///< hidden2
    double b3 = 0.0;

    [[nodiscard]] std::size_t input_dim() const {
        return feature_dim + static_cast<std::size_t>(user_dim);
    }

    [[nodiscard]] std::size_t row_of(UserId user) const {
        auto it = user_row.find(user);
        if (it == user_row.end())
            throw data_error("user " + std::to_string(user) + " unknown to the scorer");
        return it->second;
    }
};

/// Gradients of the mean batch loss, shaped like the parameters.
struct Gradients {
    std::vector<double> emb, W1, b1, W2, b2, W3;
    double b3 = 0.0;
};

/**
 * @brief Fresh parameters with uniform Glorot-style initialization.
 *
 * Dense layers draw from +-sqrt(6 / (fan_in + fan_out)); embedding rows from
 * +-sqrt(6 / (1 + user_dim)). feature_dim is the example feature width
 * (d_x + N_c); the input layer additionally consumes the embedding.
 */
[[nodiscard]] inline ScorerParams init_params(std::vector<UserId> users,
                                              std::size_t feature_dim,
                                              const ScorerConfig& config, Rng& rng) {
    config.validate();
    if (users.empty()) throw config_error("scorer needs at least one user");
    if (feature_dim == 0) throw config_error("scorer feature dimension must be positive");
    std::sort(users.begin(), users.end());
    if (std::adjacent_find(users.begin(), users.end()) != users.end())
        throw config_error("duplicate user ids passed to the scorer");

    ScorerParams p;
    p.users = std::move(users);
    for (std::size_t i = 0; i < p.users.size(); ++i) p.user_row.emplace(p.users[i], i);
    p.feature_dim = feature_dim;
    p.user_dim = config.user_dim;
    p.hidden1 = config.hidden1;
    p.hidden2 = config.hidden2;

    auto fill_uniform = [&rng](std::vector<double>& v, std::size_t n, double bound) {
        v.resize(n);
        for (double& x : v) x = (rng.uniform_real() * 2.0 - 1.0) * bound;
    };
    const std::size_t in = p.input_dim();
    fill_uniform(p.emb, p.users.size() * static_cast<std::size_t>(p.user_dim),
                 std::sqrt(6.0 / (1.0 + p.user_dim)));
    fill_uniform(p.W1, in * static_cast<std::size_t>(p.hidden1),
                 std::sqrt(6.0 / (static_cast<double>(in) + p.hidden1)));
    p.b1.assign(static_cast<std::size_t>(p.hidden1), 0.0);
    fill_uniform(p.W2, static_cast<std::size_t>(p.hidden1) * p.hidden2,
                 std::sqrt(6.0 / (static_cast<double>(p.hidden1) + p.hidden2)));
    p.b2.assign(static_cast<std::size_t>(p.hidden2), 0.0);
    fill_uniform(p.W3, static_cast<std::size_t>(p.hidden2),
                 std::sqrt(6.0 / (static_cast<double>(p.hidden2) + 1.0)));
    p.b3 = 0.0;
    return p;
}

/// Soft-target binary cross-entropy with the prediction clamped to
/// [kProbClamp, 1 - kProbClamp].
[[nodiscard]] inline double bce_loss(double y_hat, double target) {
    const double y = std::clamp(y_hat, kProbClamp, 1.0 - kProbClamp);
    return -(target * std::log(y) + (1.0 - target) * std::log(1.0 - y));
}

namespace detail {

/// Reusable batch buffers; sized for the largest batch seen.
struct NetWorkspace {
    std::vector<double> X;    ///< B x input_dim
    std::vector<double> A1;   ///< B x hidden1 (post-ReLU)
    std::vector<double> A2;   ///< B x hidden2 (post-ReLU)
    std::vector<double> Y;    ///< B predictions (sigmoid)
    std::vector<double> D3;   ///< B output deltas
    std::vector<double> D2;   ///< B x hidden2
    std::vector<double> D1;   ///< B x hidden1
    std::vector<std::size_t> rows; ///< B embedding rows
};

/// Assembles inputs and runs the batch forward pass; returns mean loss.
inline double forward_batch(const ScorerParams& p, const std::vector<PreferenceExample>& examples,
                            const std::vector<std::size_t>& idx, NetWorkspace& ws) {
    const std::size_t B = idx.size();
    const std::size_t in = p.input_dim();
    const std::size_t h1 = static_cast<std::size_t>(p.hidden1);
    const std::size_t h2 = static_cast<std::size_t>(p.hidden2);
    const std::size_t du = static_cast<std::size_t>(p.user_dim);
    ws.X.assign(B * in, 0.0);
    ws.A1.assign(B * h1, 0.0);
    ws.A2.assign(B * h2, 0.0);
    ws.Y.assign(B, 0.0);
    ws.rows.resize(B);

    for (std::size_t b = 0; b < B; ++b) {
        const PreferenceExample& ex = examples[idx[b]];
        if (ex.features.size() != p.feature_dim)
            throw config_error("example feature width " + std::to_string(ex.features.size()) +
                               " does not match scorer width " + std::to_string(p.feature_dim));
        const std::size_t row = p.row_of(ex.user);
        ws.rows[b] = row;
        double* x = &ws.X[b * in];
        for (std::size_t k = 0; k < p.feature_dim; ++k) x[k] = ex.features[k];
        const double* e = &p.emb[row * du];
        for (std::size_t k = 0; k < du; ++k) x[p.feature_dim + k] = e[k];
    }

    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const double* x = &ws.X[b * in];
        double* a1 = &ws.A1[b * h1];
        for (std::size_t k = 0; k < in; ++k) {
            const double xk = x[k];
            if (xk == 0.0) continue;
            const double* w = &p.W1[k * h1];
            for (std::size_t j = 0; j < h1; ++j) a1[j] += xk * w[j];
        }
        for (std::size_t j = 0; j < h1; ++j) a1[j] = std::max(0.0, a1[j] + p.b1[j]);

        double* a2 = &ws.A2[b * h2];
        for (std::size_t k = 0; k < h1; ++k) {
            const double ak = a1[k];
            if (ak == 0.0) continue;
            const double* w = &p.W2[k * h2];
            for (std::size_t j = 0; j < h2; ++j) a2[j] += ak * w[j];
        }
        double z3 = p.b3;
        for (std::size_t j = 0; j < h2; ++j) {
            a2[j] = std::max(0.0, a2[j] + p.b2[j]);
            z3 += a2[j] * p.W3[j];
        }
        const double y_hat = 1.0 / (1.0 + std::exp(-z3));
        ws.Y[b] = y_hat;
        loss += bce_loss(y_hat, examples[idx[b]].label);
    }
    return loss / static_cast<double>(B);
}

/// Backprop of the mean batch loss; forward_batch must have run on ws.
inline void backward_batch(const ScorerParams& p, const std::vector<PreferenceExample>& examples,
                           const std::vector<std::size_t>& idx, NetWorkspace& ws, Gradients& g) {
    const std::size_t B = idx.size();
    const std::size_t in = p.input_dim();
    const std::size_t h1 = static_cast<std::size_t>(p.hidden1);
    const std::size_t h2 = static_cast<std::size_t>(p.hidden2);
    const std::size_t du = static_cast<std::size_t>(p.user_dim);
    g.emb.assign(p.emb.size(), 0.0);
    g.W1.assign(p.W1.size(), 0.0);
    g.b1.assign(p.b1.size(), 0.0);
    g.W2.assign(p.W2.size(), 0.0);
    g.b2.assign(p.b2.size(), 0.0);
    g.W3.assign(p.W3.size(), 0.0);
    g.b3 = 0.0;
    ws.D3.assign(B, 0.0);
    ws.D2.assign(B * h2, 0.0);
    ws.D1.assign(B * h1, 0.0);

    for (std::size_t b = 0; b < B; ++b) {
        const double y_hat = ws.Y[b];
        // The loss clamps the prediction; beyond the clamp it is locally
        // constant in the logit, so the delta is zero there.
        if (y_hat <= kProbClamp || y_hat >= 1.0 - kProbClamp) continue;
        ws.D3[b] = (y_hat - examples[idx[b]].label) / static_cast<double>(B);
    }

    for (std::size_t b = 0; b < B; ++b) {
        const double d3 = ws.D3[b];
        const double* a2 = &ws.A2[b * h2];
        double* d2 = &ws.D2[b * h2];
        g.b3 += d3;
        for (std::size_t j = 0; j < h2; ++j) {
            g.W3[j] += a2[j] * d3;
            d2[j] = (a2[j] > 0.0) ? p.W3[j] * d3 : 0.0;
            g.b2[j] += d2[j];
        }
        const double* a1 = &ws.A1[b * h1];
        for (std::size_t k = 0; k < h1; ++k) {
            const double ak = a1[k];
            if (ak == 0.0) continue;
            const double* d2row = d2;
            double* gw = &g.W2[k * h2];
            for (std::size_t j = 0; j < h2; ++j) gw[j] += ak * d2row[j];
        }
        double* d1 = &ws.D1[b * h1];
        for (std::size_t k = 0; k < h1; ++k) {
            if (a1[k] <= 0.0) { d1[k] = 0.0; continue; }
            const double* w = &p.W2[k * h2];
            double s = 0.0;
            for (std::size_t j = 0; j < h2; ++j) s += w[j] * d2[j];
            d1[k] = s;
            g.b1[k] += s;
        }
        const double* x = &ws.X[b * in];
        for (std::size_t k = 0; k < in; ++k) {
            const double xk = x[k];
            if (xk == 0.0) continue;
            double* gw = &g.W1[k * h1];
            for (std::size_t j = 0; j < h1; ++j) gw[j] += xk * d1[j];
        }
        // Embedding gradient: backprop through the input slice the row fed.
        double* ge = &g.emb[ws.rows[b] * du];
        for (std::size_t k = 0; k < du; ++k) {
            const double* w = &p.W1[(p.feature_dim + k) * h1];
            double s = 0.0;
            for (std::size_t j = 0; j < h1; ++j) s += w[j] * d1[j];
            ge[k] += s;
        }
    }
}

} // namespace detail

/// Mean soft-target BCE of one batch (by example indices).
[[nodiscard]] inline double batch_loss(const ScorerParams& p,
                                       const std::vector<PreferenceExample>& examples,
                                       const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw config_error("batch_loss requires a non-empty batch");
    detail::NetWorkspace ws;
    return detail::forward_batch(p, examples, idx, ws);
}

/// Gradients of the mean batch loss with respect to every parameter.
[[nodiscard]] inline Gradients backward(const ScorerParams& p,
                                        const std::vector<PreferenceExample>& examples,
                                        const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw config_error("backward requires a non-empty batch");
    detail::NetWorkspace ws;
    detail::forward_batch(p, examples, idx, ws);
    Gradients g;
    detail::backward_batch(p, examples, idx, ws, g);
    return g;
}

/// Single-example prediction. Features carry [x_i || one-hot(lambda)].
[[nodiscard]] inline double forward(const ScorerParams& p, const std::vector<double>& features,
                                    UserId user) {
    if (features.size() != p.feature_dim)
        throw config_error("feature width " + std::to_string(features.size()) +
                           " does not match scorer width " + std::to_string(p.feature_dim));
    std::vector<PreferenceExample> one(1);
    one[0].user = user;
    one[0].features = features;
    one[0].label = 0.0;
    detail::NetWorkspace ws;
    (void)detail::forward_batch(p, one, {0}, ws);
    return ws.Y[0];
}

/**
 * @brief Adam training over shuffled minibatches.
 *
 * Runs config.epochs passes; each epoch shuffles the example order with a
 * stream derived from config.seed, then steps batch by batch. Returns the
 * per-epoch mean loss trace. Aborts with numeric_error if the loss leaves
 * the finite range.
 */
inline std::vector<double> train(ScorerParams& p, const std::vector<PreferenceExample>& examples,
                                 const ScorerConfig& config) {
    config.validate();
    if (examples.empty()) throw config_error("train requires at least one example");

    struct AdamState {
        std::vector<double> m, v;
        explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
    };
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    AdamState s_emb(p.emb.size()), s_W1(p.W1.size()), s_b1(p.b1.size()), s_W2(p.W2.size()),
        s_b2(p.b2.size()), s_W3(p.W3.size()), s_b3(1);
    long long t = 0;

    auto adam_step = [&](std::vector<double>& param, const std::vector<double>& grad,
                         AdamState& st, double bc1, double bc2) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * grad[i];
            st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * grad[i] * grad[i];
            param[i] -= config.learning_rate * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + eps);
        }
    };

    Rng shuffle_rng = Rng::for_stream(config.seed, "scorer-train");
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    detail::NetWorkspace ws;
    Gradients g;
    std::vector<double> epoch_losses;
    epoch_losses.reserve(static_cast<std::size_t>(config.epochs));
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
            const double loss = detail::forward_batch(p, examples, idx, ws);
            if (!std::isfinite(loss))
                throw numeric_error("training loss became non-finite at epoch " +
                                    std::to_string(epoch) + ", batch offset " +
                                    std::to_string(start));
            loss_sum += loss * static_cast<double>(idx.size());
            detail::backward_batch(p, examples, idx, ws, g);
            ++t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
            adam_step(p.emb, g.emb, s_emb, bc1, bc2);
            adam_step(p.W1, g.W1, s_W1, bc1, bc2);
            adam_step(p.b1, g.b1, s_b1, bc1, bc2);
            adam_step(p.W2, g.W2, s_W2, bc1, bc2);
            adam_step(p.b2, g.b2, s_b2, bc1, bc2);
            adam_step(p.W3, g.W3, s_W3, bc1, bc2);
            s_b3.m[0] = beta1 * s_b3.m[0] + (1.0 - beta1) * g.b3;
            s_b3.v[0] = beta2 * s_b3.v[0] + (1.0 - beta2) * g.b3 * g.b3;
            p.b3 -= config.learning_rate * (s_b3.m[0] / bc1) / (std::sqrt(s_b3.v[0] / bc2) + eps);
        }
        epoch_losses.push_back(loss_sum / static_cast<double>(examples.size()));
    }
    return epoch_losses;
}

/**
 * @brief Predicted inclusion scores for every candidate of one user under one
 *        preference condition lambda.
 *
 * The catalog's assembled feature width plus n_clusters must equal the
 * scorer's feature width.
 */
[[nodiscard]] inline std::map<ItemId, double>
predict_scores(const ScorerParams& p, UserId user, int lambda, std::size_t n_clusters,
               const CandidateSet& cand, const ItemCatalog& catalog) {
    if (lambda < 0 || static_cast<std::size_t>(lambda) >= n_clusters)
        throw config_error("lambda " + std::to_string(lambda) + " outside [0, " +
                           std::to_string(n_clusters) + ")");
    if (catalog.feature_dim() + n_clusters != p.feature_dim)
        throw config_error("catalog feature width " + std::to_string(catalog.feature_dim()) +
                           " + " + std::to_string(n_clusters) +
                           " clusters does not match scorer width " +
                           std::to_string(p.feature_dim));

    std::vector<PreferenceExample> batch_examples;
    batch_examples.reserve(cand.size());
    std::vector<std::size_t> idx(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        PreferenceExample ex;
        ex.user = user;
        const std::vector<double>& x = catalog.feature(cand.item_at(i));
        ex.features.reserve(p.feature_dim);
        ex.features.insert(ex.features.end(), x.begin(), x.end());
        for (std::size_t c = 0; c < n_clusters; ++c)
            ex.features.push_back(static_cast<int>(c) == lambda ? 1.0 : 0.0);
        batch_examples.push_back(std::move(ex));
        idx[i] = i;
    }
    detail::NetWorkspace ws;
    (void)detail::forward_batch(p, batch_examples, idx, ws);
    std::map<ItemId, double> scores;
    for (std::size_t i = 0; i < cand.size(); ++i) scores[cand.item_at(i)] = ws.Y[i];
    return scores;
}

/// Writes a checkpoint: versioned text with a dimensions header and hex-float
/// parameter values (bit-exact round trip).
inline void save_params(const ScorerParams& p, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fprintf(f, "preferrec-scorer 1\n%zu %d %d %d %zu\n", p.feature_dim, p.user_dim,
                 p.hidden1, p.hidden2, p.users.size());
    for (std::size_t i = 0; i < p.users.size(); ++i)
        std::fprintf(f, "%s%lld", i ? " " : "", static_cast<long long>(p.users[i]));
    std::fputc('\n', f);
    auto dump = [f](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) std::fprintf(f, "%s%a", i ? " " : "", v[i]);
        std::fputc('\n', f);
    };
    dump(p.emb);
    dump(p.W1);
    dump(p.b1);
    dump(p.W2);
    dump(p.b2);
    dump(p.W3);
    std::fprintf(f, "%a\n", p.b3);
    std::fclose(f);
}

/// Reads a checkpoint written by save_params.
[[nodiscard]] inline ScorerParams load_params(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open " + path);
    std::string magic;
    int version = 0;
    f >> magic >> version;
    if (magic != "preferrec-scorer" || version != 1)
        throw data_error("unrecognized checkpoint header in " + path);
    ScorerParams p;
    std::size_t n_users = 0;
    f >> p.feature_dim >> p.user_dim >> p.hidden1 >> p.hidden2 >> n_users;
    if (!f || p.feature_dim == 0 || p.user_dim < 1 || p.hidden1 < 1 || p.hidden2 < 1)
        throw data_error("corrupt checkpoint dimensions in " + path);
    p.users.resize(n_users);
    for (auto& u : p.users) f >> u;
    for (std::size_t i = 0; i < p.users.size(); ++i) p.user_row.emplace(p.users[i], i);
    auto slurp = [&f, &path](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        std::string tok;
        for (auto& x : v) {
            if (!(f >> tok)) throw data_error("truncated checkpoint " + path);
            x = std::strtod(tok.c_str(), nullptr);
        }
    };
    const std::size_t in = p.input_dim();
    slurp(p.emb, n_users * static_cast<std::size_t>(p.user_dim));
    slurp(p.W1, in * static_cast<std::size_t>(p.hidden1));
    slurp(p.b1, static_cast<std::size_t>(p.hidden1));
    slurp(p.W2, static_cast<std::size_t>(p.hidden1) * p.hidden2);
    slurp(p.b2, static_cast<std::size_t>(p.hidden2));
    slurp(p.W3, static_cast<std::size_t>(p.hidden2));
    std::string tok;
    if (!(f >> tok)) throw data_error("truncated checkpoint " + path);
    p.b3 = std::strtod(tok.c_str(), nullptr);
    return p;
}

} // namespace preferrec

#endif // PREFERREC_PARETO_NET_HPP
