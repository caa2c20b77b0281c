#pragma once

/**
 * Latent Dirichlet allocation by collapsed Gibbs sampling.
 *
 *   theta[d] ~ Dir(alpha)          document-topic mixture
 *   phi[k]   ~ Dir(beta)           topic-word distribution
 *   z[d,n]   ~ Mult(theta[d])
 *   w[d,n]   ~ Mult(phi[z[d,n]])
 *
 * theta and phi are integrated out; each sweep resamples every z[d,n] from
 *
 *   p(z = k | rest) ∝ (n_dk[d][k] + alpha) (n_kw[k][w] + beta) / (n_k[k] + V beta)
 *
 * with all counts excluding token (d, n). Inference on held-out documents
 * runs the same chain with n_kw and n_k frozen.
 */

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "senseforge/corpus.hpp"
#include "senseforge/error.hpp"
#include "senseforge/rng.hpp"

namespace senseforge {

using TopicId = std::uint32_t;

struct LdaConfig {
  std::size_t topics = 400;
  double alpha = 50.0 / 400.0;
  double beta = 0.01;
  std::size_t train_iters = 1000;
  std::size_t infer_iters = 100;
  std::size_t infer_burn_in = 50;
  std::uint64_t seed = 1;

  // Defaults with alpha = 50 / K.
  static LdaConfig with_topics(std::size_t k) {
    LdaConfig c;
    c.topics = k;
    c.alpha = k > 0 ? 50.0 / static_cast<double>(k) : 0.0;
    return c;
  }

  void validate() const {
    if (topics < 1) throw ConfigError("topic count K must be >= 1");
    if (!(alpha > 0)) throw ConfigError("alpha must be > 0");
    if (!(beta > 0)) throw ConfigError("beta must be > 0");
    if (train_iters < 1) throw ConfigError("train_iters must be >= 1");
    if (infer_burn_in >= infer_iters) throw ConfigError("infer_burn_in must be < infer_iters");
  }

  friend bool operator==(const LdaConfig&, const LdaConfig&) = default;
};

// Topic-word counts of a trained model. Immutable once training returns.
class TopicModel {
 public:
  TopicModel(Vocabulary vocab, LdaConfig config)
      : vocab_(std::move(vocab)),
        config_(config),
        n_kw_(config.topics * vocab_.size(), 0),
        n_k_(config.topics, 0) {
    config_.validate();
  }

  std::size_t topics() const noexcept { return config_.topics; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const LdaConfig& config() const noexcept { return config_; }

  std::int64_t count(std::size_t k, WordId w) const { return n_kw_[k * vocab_size() + w]; }
  std::int64_t topic_total(std::size_t k) const { return n_k_[k]; }

  std::span<const std::int64_t> topic_row(std::size_t k) const {
    return {n_kw_.data() + k * vocab_size(), vocab_size()};
  }

  std::int64_t total_tokens() const { return std::accumulate(n_k_.begin(), n_k_.end(), std::int64_t{0}); }

  // n_k[k] == sum_w n_kw[k][w] and no negative counts.
  bool consistent() const {
    for (std::size_t k = 0; k < topics(); ++k) {
      std::int64_t sum = 0;
      for (auto c : topic_row(k)) {
        if (c < 0) return false;
        sum += c;
      }
      if (sum != n_k_[k]) return false;
    }
    return true;
  }

  void add(std::size_t k, WordId w, std::int64_t delta) {
    n_kw_[k * vocab_size() + w] += delta;
    n_k_[k] += delta;
  }

  friend bool operator==(const TopicModel& a, const TopicModel& b) {
    return a.vocab_ == b.vocab_ && a.config_ == b.config_ && a.n_kw_ == b.n_kw_;
  }

 private:
  Vocabulary vocab_;
  LdaConfig config_;
  std::vector<std::int64_t> n_kw_;  // K x V, row-major
  std::vector<std::int64_t> n_k_;
};

// Per-token assignments z[d][n] and document-topic counts n_dk (M x K).
struct SamplerState {
  std::size_t topics = 0;
  std::vector<std::vector<TopicId>> z;
  std::vector<std::int64_t> n_dk;

  std::int64_t doc_topic(std::size_t d, std::size_t k) const { return n_dk[d * topics + k]; }
  std::span<const std::int64_t> doc_row(std::size_t d) const {
    return {n_dk.data() + d * topics, topics};
  }
};

struct TopicDistribution {
  std::vector<double> theta;
};

namespace detail {

// Unnormalized full conditional into `out`; returns the sum. `doc_exclude`
// and `model_exclude` name a topic whose count is reduced by one before
// evaluation (the token's current topic), or -1 for none.
inline double conditional_weights(std::span<double> out, std::span<const std::int64_t> doc_counts,
                                  const TopicModel& model, WordId w, double alpha, double beta,
                                  long doc_exclude, long model_exclude) {
  const double v_beta = static_cast<double>(model.vocab_size()) * beta;
  double total = 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const long sk = static_cast<long>(k);
    double nd = static_cast<double>(doc_counts[k] - (sk == doc_exclude ? 1 : 0));
    double nkw = static_cast<double>(model.count(k, w) - (sk == model_exclude ? 1 : 0));
    double nk = static_cast<double>(model.topic_total(k) - (sk == model_exclude ? 1 : 0));
    double p = (nd + alpha) * (nkw + beta) / (nk + v_beta);
    out[k] = p;
    total += p;
  }
  return total;
}

inline std::size_t draw(std::span<const double> weights, double total, Rng& rng) {
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    u -= weights[k];
    if (u < 0) return k;
  }
  return weights.size() - 1;
}

}  // namespace detail

// Trains one model. Documents are copied in; the vocabulary is the one the
// documents were encoded against.
class GibbsSampler {
 public:
  GibbsSampler(std::vector<EncodedDocument> docs, Vocabulary vocab, const LdaConfig& config)
      : docs_(std::move(docs)), model_(std::move(vocab), config), rng_(config.seed) {
    const std::size_t K = config.topics;
    std::size_t tokens = 0;
    for (const auto& doc : docs_) {
      for (WordId w : doc.tokens)
        if (w >= model_.vocab_size())
          throw ConfigError("document '" + doc.instance_id + "' has token id outside the vocabulary");
      tokens += doc.length();
    }
    if (tokens == 0) throw TrainingError("no tokens to train on");

    state_.topics = K;
    state_.z.resize(docs_.size());
    state_.n_dk.assign(docs_.size() * K, 0);
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      state_.z[d].resize(docs_[d].length());
      for (std::size_t n = 0; n < docs_[d].length(); ++n) {
        auto k = static_cast<TopicId>(rng_.index(K));
        state_.z[d][n] = k;
        state_.n_dk[d * K + k] += 1;
        model_.add(k, docs_[d].tokens[n], 1);
      }
    }
    weights_.resize(K);
  }

  // One pass over every token in document order.
  void sweep() {
    const std::size_t K = state_.topics;
    const double alpha = model_.config().alpha;
    const double beta = model_.config().beta;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      std::span<std::int64_t> row(state_.n_dk.data() + d * K, K);
      auto& zd = state_.z[d];
      const auto& words = docs_[d].tokens;
      for (std::size_t n = 0; n < words.size(); ++n) {
        const WordId w = words[n];
        const TopicId old = zd[n];
        row[old] -= 1;
        model_.add(old, w, -1);
        double total =
            detail::conditional_weights(weights_, row, model_, w, alpha, beta, -1, -1);
        auto k = static_cast<TopicId>(detail::draw(weights_, total, rng_));
        zd[n] = k;
        row[k] += 1;
        model_.add(k, w, 1);
      }
    }
    ++sweeps_;
  }

  void run(std::size_t iters) {
    for (std::size_t i = 0; i < iters; ++i) sweep();
  }

  std::size_t sweeps() const noexcept { return sweeps_; }
  const SamplerState& state() const noexcept { return state_; }
  const TopicModel& model() const noexcept { return model_; }
  const std::vector<EncodedDocument>& documents() const noexcept { return docs_; }

  TopicModel release() && { return std::move(model_); }

 private:
  std::vector<EncodedDocument> docs_;
  TopicModel model_;
  SamplerState state_;
  Rng rng_;
  std::vector<double> weights_;
  std::size_t sweeps_ = 0;
};

// Runs config.train_iters sweeps. Throws TrainingError if all docs are empty.
inline TopicModel train(std::vector<EncodedDocument> docs, Vocabulary vocab,
                        const LdaConfig& config) {
  config.validate();
  GibbsSampler sampler(std::move(docs), std::move(vocab), config);
  sampler.run(config.train_iters);
  return std::move(sampler).release();
}

// Normalized full conditional for token (d, n). The state's counts include
// the token; it is excluded here without mutating anything.
inline std::vector<double> full_conditional(const std::vector<EncodedDocument>& docs,
                                            std::size_t d, std::size_t n,
                                            const SamplerState& state, const TopicModel& model) {
  const TopicId current = state.z.at(d).at(n);
  const WordId w = docs.at(d).tokens.at(n);
  std::vector<double> p(model.topics());
  double total = detail::conditional_weights(p, state.doc_row(d), model, w, model.config().alpha,
                                             model.config().beta, current, current);
  for (auto& x : p) x /= total;
  return p;
}

// theta for a held-out document against a frozen model, averaged over the
// post-burn-in sweeps. The random stream is keyed by instance id.
inline TopicDistribution infer_theta(const EncodedDocument& doc, const TopicModel& model,
                                     const LdaConfig& config) {
  config.validate();
  const std::size_t K = model.topics();
  if (config.topics != K) throw ConfigError("inference config K differs from the model's K");
  const double alpha = config.alpha;
  const double beta = config.beta;
  const std::size_t N = doc.length();
  if (N == 0) return {std::vector<double>(K, 1.0 / static_cast<double>(K))};
  for (WordId w : doc.tokens)
    if (w >= model.vocab_size())
      throw ConfigError("document '" + doc.instance_id + "' has token id outside the vocabulary");

  Rng rng(derive_seed(config.seed, "infer/" + doc.instance_id));
  std::vector<TopicId> z(N);
  std::vector<std::int64_t> counts(K, 0);
  for (std::size_t n = 0; n < N; ++n) {
    z[n] = static_cast<TopicId>(rng.index(K));
    counts[z[n]] += 1;
  }

  std::vector<double> weights(K);
  std::vector<double> accum(K, 0.0);
  const double denom = static_cast<double>(N) + static_cast<double>(K) * alpha;
  for (std::size_t it = 0; it < config.infer_iters; ++it) {
    for (std::size_t n = 0; n < N; ++n) {
      counts[z[n]] -= 1;
      double total =
          detail::conditional_weights(weights, counts, model, doc.tokens[n], alpha, beta, -1, -1);
      z[n] = static_cast<TopicId>(detail::draw(weights, total, rng));
      counts[z[n]] += 1;
    }
    if (it >= config.infer_burn_in)
      for (std::size_t k = 0; k < K; ++k)
        accum[k] += (static_cast<double>(counts[k]) + alpha) / denom;
  }

  const double samples = static_cast<double>(config.infer_iters - config.infer_burn_in);
  TopicDistribution out{std::move(accum)};
  double sum = 0;
  for (auto& t : out.theta) sum += (t /= samples);
  for (auto& t : out.theta) t /= sum;
  return out;
}

inline TopicDistribution infer_theta(const EncodedDocument& doc, const TopicModel& model) {
  return infer_theta(doc, model, model.config());
}

// Topic-word distributions: phi[k][w] = (n_kw + beta) / (n_k + V beta).
inline std::vector<std::vector<double>> phi(const TopicModel& model) {
  const double beta = model.config().beta;
  const double v_beta = static_cast<double>(model.vocab_size()) * beta;
  std::vector<std::vector<double>> out(model.topics(), std::vector<double>(model.vocab_size()));
  for (std::size_t k = 0; k < model.topics(); ++k) {
    const double denom = static_cast<double>(model.topic_total(k)) + v_beta;
    for (std::size_t w = 0; w < model.vocab_size(); ++w)
      out[k][w] = (static_cast<double>(model.count(k, static_cast<WordId>(w))) + beta) / denom;
  }
  return out;
}

}  // namespace senseforge
