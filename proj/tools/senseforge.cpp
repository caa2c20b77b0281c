// senseforge: word sense induction from topic distributions.
//
//   senseforge train   --corpus <path> --k <K> --out <dir>
//   senseforge infer   --models <dir> --corpus <path> --out <thetas.jsonl>
//   senseforge cluster --thetas <path> --clusters <C|gold> --out <system.key>
//   senseforge score   --system <key> --gold <key> --out <report.json>
//   senseforge run     --corpus <path> --gold <key> --clusters <C|gold> --out <dir>
//   senseforge sweep-k --k-values 10,50,200,400,500 ...run flags...
//   senseforge synth   --out <corpus.jsonl> --gold-out <key>

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "senseforge/pipeline.hpp"
#include "senseforge/synthetic.hpp"

namespace sf = senseforge;
namespace fs = std::filesystem;

namespace {

struct LdaFlags {
  std::size_t k = 400;
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iters = 1000;
  std::size_t infer_iters = 100;
  std::size_t burn_in = 50;
  std::size_t min_count = 1;

  void add(CLI::App* app) {
    app->add_option("--k", k, "Number of topics K")->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "Document-topic prior (default 50/K)");
    app->add_option("--beta", beta, "Topic-word prior");
    app->add_option("--iters", iters, "Training sweeps");
    app->add_option("--infer-iters", infer_iters, "Inference sweeps");
    app->add_option("--burn-in", burn_in, "Inference sweeps discarded before averaging");
    app->add_option("--min-count", min_count, "Minimum word frequency");
  }

  sf::LdaConfig config() const {
    auto c = sf::LdaConfig::with_topics(k);
    if (alpha) c.alpha = *alpha;
    c.beta = beta;
    c.train_iters = iters;
    c.infer_iters = infer_iters;
    c.infer_burn_in = burn_in;
    return c;
  }
};

struct ClusterFlags {
  std::string clusters;
  std::size_t restarts = 10;
  std::size_t max_iters = 100;

  void add(CLI::App* app, bool required) {
    auto* opt = app->add_option("--clusters", clusters, "Cluster count C, or 'gold' for the gold class count");
    if (required) opt->required();
    app->add_option("--restarts", restarts, "K-means restarts");
    app->add_option("--cluster-iters", max_iters, "K-means iteration cap");
  }

  bool gold() const { return clusters == "gold"; }

  std::size_t count() const {
    try {
      std::size_t pos = 0;
      auto c = std::stoul(clusters, &pos);
      if (pos != clusters.size() || c == 0) throw std::invalid_argument("");
      return c;
    } catch (const std::exception&) {
      throw sf::ConfigError("--clusters must be a positive integer or 'gold'");
    }
  }

  sf::ClusterConfig config() const {
    sf::ClusterConfig c;
    c.clusters = gold() ? 1 : count();
    c.restarts = restarts;
    c.max_iters = max_iters;
    return c;
  }
};

// Flag, then SENSEFORGE_SEED, then 1.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SENSEFORGE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw sf::ConfigError(std::string("SENSEFORGE_SEED is not an integer: ") + env);
    }
  }
  return 1;
}

int report_failures(const std::vector<sf::WordFailure>& failures) {
  for (const auto& f : failures) std::cerr << "error: " << f.error << "\n";
  return failures.empty() ? 0 : 1;
}

std::vector<std::size_t> parse_k_values(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      auto k = std::stoul(item, &pos);
      if (pos != item.size() || k == 0) throw std::invalid_argument("");
      out.push_back(k);
    } catch (const std::exception&) {
      throw sf::ConfigError("bad K value '" + item + "' in --k-values");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word sense induction by clustering LDA topic distributions"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  LdaFlags lda;
  ClusterFlags cl;

  // train
  auto* train = app.add_subcommand("train", "Train one topic model per target word");
  std::string train_corpus, train_out;
  train->add_option("--corpus", train_corpus, "JSONL file or dir-per-target corpus")->required();
  train->add_option("--out", train_out, "Model directory")->required();
  train->add_option("--seed", seed, "Random seed (falls back to SENSEFORGE_SEED)");
  train->add_option("--workers", workers, "Parallel target words");
  lda.add(train);

  // infer
  auto* infer = app.add_subcommand("infer", "Infer topic distributions for test instances");
  std::string models_dir, infer_corpus, thetas_out;
  infer->add_option("--models", models_dir, "Model directory from 'train'")->required();
  infer->add_option("--corpus", infer_corpus, "Test corpus")->required();
  infer->add_option("--out", thetas_out, "Output thetas JSONL")->required();
  infer->add_option("--workers", workers, "Parallel target words");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster topic distributions into senses");
  std::string thetas_in, cluster_gold, key_out;
  cluster->add_option("--thetas", thetas_in, "Thetas JSONL from 'infer'")->required();
  cluster->add_option("--gold", cluster_gold, "Gold key (needed for --clusters gold)");
  cluster->add_option("--out", key_out, "System key file")->required();
  cluster->add_option("--seed", seed, "Random seed (falls back to SENSEFORGE_SEED)");
  cl.add(cluster, true);

  // score
  auto* score = app.add_subcommand("score", "Score a system key against a gold key");
  std::string system_key, gold_key, report_out, tsv_out, aggregation = "instance_weighted";
  score->add_option("--system", system_key, "System key file")->required();
  score->add_option("--gold", gold_key, "Gold key file")->required();
  score->add_option("--out", report_out, "Report JSON")->required();
  score->add_option("--tsv", tsv_out, "Optional results table (TSV)");
  score->add_option("--aggregation", aggregation, "instance_weighted | uniform");

  // run / sweep-k share flags
  std::string run_corpus, run_train, run_test, run_gold, run_out, k_values;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--corpus", run_corpus, "Corpus used for both training and testing");
    sub->add_option("--train-corpus", run_train, "Training corpus");
    sub->add_option("--test-corpus", run_test, "Test corpus");
    sub->add_option("--gold", run_gold, "Gold key file");
    sub->add_option("--out", run_out, "Output directory")->required();
    sub->add_option("--seed", seed, "Random seed (falls back to SENSEFORGE_SEED)");
    sub->add_option("--workers", workers, "Parallel target words");
    sub->add_option("--aggregation", aggregation, "Headline aggregation: instance_weighted | uniform");
    lda.add(sub);
    cl.add(sub, true);
  };
  auto* run = app.add_subcommand("run", "Train, infer, cluster and score end to end");
  add_run_flags(run);
  auto* sweep = app.add_subcommand("sweep-k", "Repeat 'run' for several topic counts");
  add_run_flags(sweep);
  sweep->add_option("--k-values", k_values, "Comma-separated K values")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic separable-sense corpus and gold key");
  std::string synth_out, synth_gold;
  std::vector<std::string> synth_targets{"promotion.n"};
  std::size_t senses = 4, per_sense = 40, words_per_sense = 12, tokens = 40;
  synth->add_option("--out", synth_out, "Corpus JSONL")->required();
  synth->add_option("--gold-out", synth_gold, "Gold key file")->required();
  synth->add_option("--targets", synth_targets, "Target words, e.g. promotion.n")->delimiter(',');
  synth->add_option("--senses", senses, "Senses per target");
  synth->add_option("--per-sense", per_sense, "Instances per sense");
  synth->add_option("--words-per-sense", words_per_sense, "Vocabulary size of each sense");
  synth->add_option("--tokens", tokens, "Tokens per instance");
  synth->add_option("--seed", seed, "Random seed (falls back to SENSEFORGE_SEED)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const auto base_seed = resolve_seed(seed);
      auto groups = sf::group_by_target(sf::load_instances(train_corpus));
      fs::create_directories(train_out);
      std::vector<std::string> targets;
      for (const auto& [k, v] : groups) targets.push_back(k);
      std::vector<std::string> errors(targets.size());
      sf::parallel_for(targets.size(), workers, [&](std::size_t i) {
        const auto& key = targets[i];
        try {
          auto model = sf::train_word_model(groups.at(key), sf::lda_config_for(lda.config(), base_seed, key),
                                            lda.min_count);
          sf::save_model(model, key, fs::path(train_out) / (key + ".model"));
        } catch (const std::exception& e) {
          errors[i] = key + ": " + e.what();
        }
      });
      std::vector<sf::WordFailure> failures;
      for (std::size_t i = 0; i < targets.size(); ++i)
        if (!errors[i].empty()) failures.push_back({targets[i], errors[i]});
      return report_failures(failures);
    }

    if (infer->parsed()) {
      auto groups = sf::group_by_target(sf::load_instances(infer_corpus));
      std::vector<std::string> targets;
      for (const auto& [k, v] : groups) targets.push_back(k);
      std::vector<std::vector<sf::ThetaRecord>> results(targets.size());
      std::vector<std::string> errors(targets.size());
      sf::parallel_for(targets.size(), workers, [&](std::size_t i) {
        const auto& key = targets[i];
        try {
          auto stored = sf::load_model(fs::path(models_dir) / (key + ".model"));
          results[i] = sf::infer_word(stored.model, groups.at(key));
        } catch (const std::exception& e) {
          errors[i] = key + ": " + e.what();
        }
      });
      std::vector<sf::ThetaRecord> all;
      std::vector<sf::WordFailure> failures;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!errors[i].empty()) failures.push_back({targets[i], errors[i]});
        all.insert(all.end(), results[i].begin(), results[i].end());
      }
      sf::save_thetas(all, thetas_out);
      return report_failures(failures);
    }

    if (cluster->parsed()) {
      const auto base_seed = resolve_seed(seed);
      if (cl.gold() && cluster_gold.empty()) throw sf::ConfigError("--clusters gold requires --gold");
      std::optional<sf::GoldStandard> gold;
      if (!cluster_gold.empty()) gold = sf::load_key_file(cluster_gold);
      std::map<std::string, std::vector<sf::ThetaRecord>> by_target;
      for (auto& r : sf::load_thetas(thetas_in)) by_target[r.target].push_back(std::move(r));
      sf::SystemKey system;
      std::vector<sf::WordFailure> failures;
      for (const auto& [key, records] : by_target) {
        try {
          std::size_t C = 0;
          if (cl.gold()) {
            const auto* labels = gold->labels(key);
            std::vector<std::string> ids;
            for (const auto& r : records) ids.push_back(r.id);
            C = labels ? sf::gold_class_count(*labels, ids) : 0;
            if (C == 0) throw sf::ConfigError("no gold labels to size the clustering");
          } else {
            C = cl.count();
          }
          auto wc = sf::cluster_word(key, records, sf::cluster_config_for(cl.config(), base_seed, key, C));
          auto target = sf::Target::parse(key);
          for (const auto& [id, label] : wc.labels) system.add(target, id, label);
        } catch (const std::exception& e) {
          failures.push_back({key, key + ": " + e.what()});
        }
      }
      sf::write_key_file(system, key_out);
      return report_failures(failures);
    }

    if (score->parsed()) {
      auto report = sf::score_keys(sf::load_key_file(system_key), sf::load_key_file(gold_key),
                                   {{"system_key", system_key}, {"gold_key", gold_key}, {"aggregation", aggregation}},
                                   aggregation);
      std::ofstream(report_out, std::ios::binary) << sf::to_json(report).dump(2) << "\n";
      if (!tsv_out.empty()) std::ofstream(tsv_out, std::ios::binary) << sf::results_tsv(report.headline_scores());
      std::cout << sf::results_tsv(report.headline_scores());
      return report_failures(report.failures);
    }

    if (run->parsed() || sweep->parsed()) {
      sf::RunConfig config;
      if (!run_corpus.empty()) {
        if (!run_train.empty() || !run_test.empty())
          throw sf::ConfigError("use either --corpus or --train-corpus/--test-corpus");
        config.train_corpus = run_corpus;
      } else {
        if (run_train.empty()) throw sf::ConfigError("--corpus or --train-corpus is required");
        config.train_corpus = run_train;
        config.test_corpus = run_test;
      }
      if (!run_gold.empty()) config.gold_key = fs::path(run_gold);
      config.lda = lda.config();
      config.auto_alpha = !lda.alpha.has_value();
      config.cluster = cl.config();
      config.policy = cl.gold() ? sf::ClusterPolicy::gold : sf::ClusterPolicy::fixed;
      config.headline = aggregation;
      config.min_count = lda.min_count;
      config.seed = resolve_seed(seed);
      config.workers = workers;
      config.output_dir = run_out;

      if (sweep->parsed()) {
        auto result = sf::sweep_k(config, parse_k_values(k_values));
        std::cout << sf::sweep_tsv(result);
        std::size_t failed = 0;
        for (const auto& r : result.rows) failed += r.failures;
        return failed == 0 ? 0 : 1;
      }
      auto result = sf::run_all(config);
      std::cout << sf::results_tsv(result.report.headline_scores());
      return report_failures(result.report.failures);
    }

    if (synth->parsed()) {
      const auto base_seed = resolve_seed(seed);
      std::ofstream out(synth_out, std::ios::binary);
      if (!out) throw sf::ConfigError("cannot write " + synth_out);
      sf::GoldStandard gold;
      for (const auto& t : synth_targets) {
        sf::synthetic::SenseCorpusSpec spec;
        spec.target = sf::Target::parse(t);
        spec.instances_per_sense.assign(senses, per_sense);
        spec.words_per_sense = words_per_sense;
        spec.tokens_per_instance = tokens;
        spec.seed = base_seed;
        auto corpus = sf::synthetic::sense_corpus(spec);
        for (const auto& inst : corpus.instances)
          out << nlohmann::json{{"target", inst.target.key()}, {"id", inst.id}, {"text", inst.text}}.dump()
              << "\n";
        for (const auto& [key, labels] : corpus.gold.entries())
          for (const auto& [id, label] : labels) gold.add(spec.target, id, label);
      }
      sf::write_key_file(gold, synth_gold);
      return 0;
    }
  } catch (const sf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
