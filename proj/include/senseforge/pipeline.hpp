#pragma once

// Per-target-word sense induction: train a topic model on the word's training
// instances, infer theta for each test instance, cluster the thetas with
// cosine K-means, and score the clusters against a gold key.
//
// Every random stream is derived from (seed, target word) or
// (seed, instance id), so results do not depend on worker count or on which
// other words are present.

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "senseforge/clustering.hpp"
#include "senseforge/corpus.hpp"
#include "senseforge/error.hpp"
#include "senseforge/lda.hpp"
#include "senseforge/metrics.hpp"
#include "senseforge/model_io.hpp"
#include "senseforge/report.hpp"
#include "senseforge/rng.hpp"

namespace senseforge {

enum class ClusterPolicy { fixed, gold };

struct RunConfig {
  std::filesystem::path train_corpus;
  std::filesystem::path test_corpus;  // empty: train on the test instances
  std::optional<std::filesystem::path> gold_key;
  LdaConfig lda = LdaConfig::with_topics(400);
  bool auto_alpha = true;  // alpha = 50 / K, recomputed when K changes
  ClusterConfig cluster;
  ClusterPolicy policy = ClusterPolicy::fixed;
  std::string headline = "instance_weighted";
  std::size_t min_count = 1;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::filesystem::path output_dir;  // empty: nothing is written

  void validate() const {
    lda.validate();
    cluster.validate();
    if (train_corpus.empty()) throw ConfigError("a corpus path is required");
    if (policy == ClusterPolicy::gold && !gold_key)
      throw ConfigError("--clusters gold requires a gold key file");
    if (headline != "instance_weighted" && headline != "uniform")
      throw ConfigError("aggregation must be instance_weighted or uniform");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
  }

  // Everything that influences results. Worker count and output location
  // deliberately do not appear.
  nlohmann::json echo() const {
    return {{"train_corpus", train_corpus.string()},
            {"test_corpus", test_corpus.empty() ? train_corpus.string() : test_corpus.string()},
            {"gold_key", gold_key ? gold_key->string() : ""},
            {"topics", lda.topics},
            {"alpha", lda.alpha},
            {"beta", lda.beta},
            {"train_iters", lda.train_iters},
            {"infer_iters", lda.infer_iters},
            {"infer_burn_in", lda.infer_burn_in},
            {"clusters", policy == ClusterPolicy::gold ? nlohmann::json("gold")
                                                       : nlohmann::json(cluster.clusters)},
            {"cluster_max_iters", cluster.max_iters},
            {"cluster_restarts", cluster.restarts},
            {"min_count", min_count},
            {"aggregation", headline},
            {"seed", seed}};
  }
};

// Per-word streams.
inline LdaConfig lda_config_for(LdaConfig base, std::uint64_t seed, const std::string& target) {
  base.seed = derive_seed(seed, "lda/" + target);
  return base;
}

inline ClusterConfig cluster_config_for(ClusterConfig base, std::uint64_t seed,
                                        const std::string& target, std::size_t clusters) {
  base.seed = derive_seed(seed, "cluster/" + target);
  base.clusters = clusters;
  return base;
}

inline std::string cluster_label(const std::string& target, std::size_t index) {
  return target + ".cluster" + std::to_string(index);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

// ---------------------------------------------------------------------------
// Theta records and files: one JSON object per line, {target, id, theta}.

struct ThetaRecord {
  std::string target;
  std::string id;
  std::vector<double> theta;

  friend bool operator==(const ThetaRecord&, const ThetaRecord&) = default;
};

inline void write_thetas(const std::vector<ThetaRecord>& records, std::ostream& out) {
  for (const auto& r : records)
    out << nlohmann::json{{"target", r.target}, {"id", r.id}, {"theta", r.theta}}.dump() << '\n';
}

inline std::vector<ThetaRecord> parse_thetas(std::istream& in, const std::string& source) {
  std::vector<ThetaRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ThetaRecord r{j.at("target").get<std::string>(), j.at("id").get<std::string>(),
                    j.at("theta").get<std::vector<double>>()};
      Target::parse(r.target);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return out;
}

inline void save_thetas(const std::vector<ThetaRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_thetas(records, out);
}

inline std::vector<ThetaRecord> load_thetas(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return parse_thetas(in, path.string());
}

// ---------------------------------------------------------------------------
// Per-word stages

// Vocabulary and model come from the training instances only.
inline TopicModel train_word_model(const std::vector<Instance>& instances, const LdaConfig& lda,
                                   std::size_t min_count) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(instances.size());
  for (const auto& inst : instances) tokens.push_back(tokenize(inst.text));
  auto vocab = Vocabulary::build(tokens, min_count);
  std::vector<EncodedDocument> docs;
  for (std::size_t i = 0; i < instances.size(); ++i)
    docs.push_back(encode_tokens(instances[i].id, tokens[i], vocab));
  return senseforge::train(std::move(docs), std::move(vocab), lda);
}

inline std::vector<ThetaRecord> infer_word(const TopicModel& model, const std::vector<Instance>& test) {
  std::vector<ThetaRecord> out;
  out.reserve(test.size());
  for (const auto& inst : test)
    out.push_back({inst.target.key(), inst.id, infer_theta(encode(inst, model.vocab()), model).theta});
  return out;
}

struct WordClustering {
  Clustering clustering;
  std::map<std::string, std::string> labels;  // instance id -> cluster label
};

inline WordClustering cluster_word(const std::string& target, const std::vector<ThetaRecord>& thetas,
                                   const ClusterConfig& config) {
  std::vector<LabeledPoint> points;
  points.reserve(thetas.size());
  for (const auto& t : thetas) points.push_back({t.id, t.theta});
  WordClustering out{kmeans_cosine(points, config), {}};
  for (const auto& [id, c] : out.clustering.assignment) out.labels[id] = cluster_label(target, c);
  return out;
}

// Number of distinct gold senses among the given instances.
inline std::size_t gold_class_count(const GoldStandard::LabelMap& labels,
                                    const std::vector<std::string>& ids) {
  std::set<std::string> senses;
  for (const auto& id : ids)
    if (auto it = labels.find(id); it != labels.end()) senses.insert(it->second);
  return senses.size();
}

struct WordOutcome {
  Target target;
  std::vector<ThetaRecord> thetas;
  WordClustering clustering;
  std::optional<ContingencyTable> table;
  std::optional<ScoreReport> scores;
};

// The full per-word pipeline. `lda` and `cluster` are the word's own configs
// (see lda_config_for / cluster_config_for). Scores are filled in when gold
// labels are supplied.
inline WordOutcome run_target_word(const Target& target, const std::vector<Instance>& train,
                                   const std::vector<Instance>& test, const LdaConfig& lda,
                                   const ClusterConfig& cluster, std::size_t min_count = 1,
                                   const GoldStandard::LabelMap* gold = nullptr) {
  if (test.empty()) throw ConfigError(target.key() + ": no test instances");
  WordOutcome out;
  out.target = target;
  auto model = train_word_model(train, lda, min_count);
  out.thetas = infer_word(model, test);
  out.clustering = cluster_word(target.key(), out.thetas, cluster);
  if (gold) {
    out.table = contingency(*gold, out.clustering.labels);
    out.scores = score(*out.table);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-corpus runs

namespace detail {

inline std::string annotate(const std::string& target, const std::exception& e) {
  return target + ": " + e.what();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace detail

// Scores a system key against a gold key, one table per system target word.
inline RunReport score_keys(const SystemKey& system, const GoldStandard& gold,
                            nlohmann::json config = nlohmann::json::object(),
                            const std::string& headline = "instance_weighted") {
  RunReport report;
  report.config = std::move(config);
  report.headline = headline;
  for (const auto& target : system.targets()) {
    const auto key = target.key();
    try {
      const auto* labels = gold.labels(key);
      if (!labels) throw DomainError("no gold labels for this target");
      auto table = contingency(*labels, *system.labels(key));
      auto s = score(table);
      report.words.push_back({target, std::move(table), s});
    } catch (const Error& e) {
      report.failures.push_back({key, detail::annotate(key, e)});
    }
  }
  aggregate(report);
  return report;
}

inline void write_report_files(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  detail::write_text(dir / "results.tsv", results_tsv(report.headline_scores()));
  detail::write_text(dir / "words.tsv", words_tsv(report));
  std::filesystem::create_directories(dir / "contingency");
  for (const auto& w : report.words) {
    auto cr = emit_contingency_report(w.target.key(), w.table);
    detail::write_text(dir / "contingency" / (w.target.key() + ".txt"), cr.text);
    detail::write_text(dir / "contingency" / (w.target.key() + ".json"), cr.json.dump(2) + "\n");
  }
}

struct RunResult {
  SystemKey system;
  std::vector<ThetaRecord> thetas;
  RunReport report;
};

// End to end over every target word. Unreadable inputs are fatal; per-word
// failures are recorded in the report.
inline RunResult run_all(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const auto train_instances = load_instances(config.train_corpus);
  const auto test_instances =
      config.test_corpus.empty() ? train_instances : load_instances(config.test_corpus);
  std::optional<GoldStandard> gold;
  if (config.gold_key) gold = load_key_file(*config.gold_key);

  const auto train_groups = group_by_target(train_instances);
  const auto test_groups = group_by_target(test_instances);
  {
    std::set<std::string> a, b;
    for (const auto& [k, v] : train_groups) a.insert(k);
    for (const auto& [k, v] : test_groups) b.insert(k);
    if (a != b) throw ConfigError("train and test corpora cover different target words");
  }

  std::vector<std::string> targets;
  for (const auto& [k, v] : test_groups) targets.push_back(k);

  struct Slot {
    std::optional<WordOutcome> outcome;
    std::string error;
  };
  std::vector<Slot> slots(targets.size());

  parallel_for(targets.size(), config.workers, [&](std::size_t i) {
    const auto& key = targets[i];
    try {
      const auto& test = test_groups.at(key);
      std::size_t C = config.cluster.clusters;
      if (config.policy == ClusterPolicy::gold) {
        const auto* labels = gold->labels(key);
        std::vector<std::string> ids;
        for (const auto& inst : test) ids.push_back(inst.id);
        C = labels ? gold_class_count(*labels, ids) : 0;
        if (C == 0) throw ConfigError("no gold labels to size the clustering");
      }
      auto lda = config.lda;
      if (config.auto_alpha) lda.alpha = 50.0 / static_cast<double>(lda.topics);
      slots[i].outcome = run_target_word(test.front().target, train_groups.at(key), test,
                                         lda_config_for(lda, config.seed, key),
                                         cluster_config_for(config.cluster, config.seed, key, C),
                                         config.min_count);
    } catch (const std::exception& e) {
      slots[i].error = detail::annotate(key, e);
    }
  });

  RunResult result;
  std::vector<WordFailure> failures;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!slots[i].outcome) {
      failures.push_back({targets[i], slots[i].error});
      continue;
    }
    const auto& o = *slots[i].outcome;
    for (const auto& [id, label] : o.clustering.labels) result.system.add(o.target, id, label);
    result.thetas.insert(result.thetas.end(), o.thetas.begin(), o.thetas.end());
  }

  auto echo = config.echo();
  echo["alpha"] = config.auto_alpha ? nlohmann::json("50/K") : nlohmann::json(config.lda.alpha);
  if (gold) {
    result.report = score_keys(result.system, *gold, echo, config.headline);
  } else {
    result.report.config = echo;
    result.report.headline = config.headline;
  }
  failures.insert(failures.end(), result.report.failures.begin(), result.report.failures.end());
  std::sort(failures.begin(), failures.end(),
            [](const auto& a, const auto& b) { return a.target < b.target; });
  result.report.failures = std::move(failures);
  result.report.workers = config.workers;
  result.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    write_key_file(result.system, config.output_dir / "system.key");
    save_thetas(result.thetas, config.output_dir / "thetas.jsonl");
    write_report_files(result.report, config.output_dir);
  }
  return result;
}

// ---------------------------------------------------------------------------
// K sweep

struct SweepRow {
  std::size_t topics = 0;
  GroupScores instance_weighted;
  GroupScores uniform;
  std::size_t failures = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string headline = "instance_weighted";

  const GroupScores& headline_scores(const SweepRow& r) const {
    return headline == "uniform" ? r.uniform : r.instance_weighted;
  }
};

// K / V-measure / F-score (x100, All words), one column per K.
inline std::string sweep_tsv(const SweepResult& sweep) {
  std::ostringstream o;
  o << 'K';
  for (const auto& r : sweep.rows) o << '\t' << r.topics;
  o << "\nV-measure";
  for (const auto& r : sweep.rows) o << '\t' << detail::pct_cell(sweep.headline_scores(r).all, &ScoreReport::v_measure);
  o << "\nF-score";
  for (const auto& r : sweep.rows) o << '\t' << detail::pct_cell(sweep.headline_scores(r).all, &ScoreReport::f_score);
  o << '\n';
  return o.str();
}

inline nlohmann::json to_json(const SweepResult& sweep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : sweep.rows)
    rows.push_back({{"topics", r.topics},
                    {"instance_weighted", to_json(r.instance_weighted)},
                    {"uniform", to_json(r.uniform)},
                    {"failures", r.failures}});
  return {{"schema", "senseforge.sweep"}, {"schema_version", 1}, {"headline", sweep.headline}, {"rows", rows}};
}

// One run_all per K, each written to <output_dir>/k<K>/ when an output
// directory is set. Requires at least two distinct K values.
inline SweepResult sweep_k(const RunConfig& config, const std::vector<std::size_t>& k_values) {
  if (std::set<std::size_t>(k_values.begin(), k_values.end()).size() < 2)
    throw ConfigError("sweep-k needs at least two distinct K values");
  if (!config.gold_key) throw ConfigError("sweep-k needs a gold key to score each K");
  SweepResult sweep;
  sweep.headline = config.headline;
  for (auto k : k_values) {
    RunConfig c = config;
    c.lda.topics = k;
    if (c.auto_alpha) c.lda.alpha = 50.0 / static_cast<double>(k);
    if (!config.output_dir.empty()) c.output_dir = config.output_dir / ("k" + std::to_string(k));
    auto result = run_all(c);
    sweep.rows.push_back({k, result.report.instance_weighted, result.report.uniform,
                          result.report.failures.size()});
  }
  if (!config.output_dir.empty()) {
    detail::write_text(config.output_dir / "sweep.tsv", sweep_tsv(sweep));
    detail::write_text(config.output_dir / "sweep.json", to_json(sweep).dump(2) + "\n");
  }
  return sweep;
}

}  // namespace senseforge
