#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "senseforge/pipeline.hpp"
#include "senseforge/synthetic.hpp"
#include "test_util.hpp"

using namespace senseforge;

namespace {

void write_corpus(const std::vector<Instance>& xs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& x : xs)
    out << nlohmann::json{{"target", x.target.key()}, {"id", x.id}, {"text", x.text}}.dump() << "\n";
}

struct Fixture {
  test_util::TempDir dir;
  std::filesystem::path corpus = dir.path() / "corpus.jsonl";
  std::filesystem::path gold = dir.path() / "gold.key";
  std::vector<Instance> instances;
  GoldStandard key;

  // Two targets (a noun and a verb) plus optional extras.
  explicit Fixture(std::vector<Instance> extra = {}) {
    for (auto [lemma, pos, senses] : {std::tuple{"promotion", Pos::noun, 3}, std::tuple{"serve", Pos::verb, 2}}) {
      synthetic::SenseCorpusSpec spec;
      spec.target = Target{lemma, pos};
      spec.instances_per_sense.assign(senses, 8);
      spec.tokens_per_instance = 25;
      auto c = synthetic::sense_corpus(spec);
      instances.insert(instances.end(), c.instances.begin(), c.instances.end());
      for (const auto& [t, labels] : c.gold.entries())
        for (const auto& [id, label] : labels) key.add(spec.target, id, label);
    }
    instances.insert(instances.end(), extra.begin(), extra.end());
    write_corpus(instances, corpus);
    write_key_file(key, gold);
  }

  RunConfig config() const {
    RunConfig c;
    c.train_corpus = corpus;
    c.gold_key = gold;
    c.lda = LdaConfig::with_topics(8);
    c.lda.train_iters = 150;
    c.lda.infer_iters = 30;
    c.lda.infer_burn_in = 10;
    c.policy = ClusterPolicy::gold;
    c.seed = 11;
    return c;
  }
};

}  // namespace

TEST(RunTargetWord, PromotionShapedFixture) {
  synthetic::SenseCorpusSpec spec;
  spec.instances_per_sense = {4, 9, 13, 1};  // 27 instances, four senses
  auto c = synthetic::sense_corpus(spec);
  auto lda = LdaConfig::with_topics(10);
  lda.train_iters = 200;
  ClusterConfig cl;
  cl.clusters = 4;
  auto out = run_target_word(spec.target, c.instances, c.instances, lda, cl, 1,
                             c.gold.labels("promotion.n"));
  EXPECT_EQ(out.clustering.labels.size(), 27u);
  std::set<std::string> clusters;
  for (const auto& [id, label] : out.clustering.labels) clusters.insert(label);
  EXPECT_EQ(clusters.size(), 4u);
  ASSERT_TRUE(out.table);
  EXPECT_EQ(out.table->total(), 27);
}

TEST(RunTargetWord, SingleTopicSingleCluster) {
  synthetic::SenseCorpusSpec spec;
  spec.instances_per_sense = {5, 5, 5};
  auto c = synthetic::sense_corpus(spec);
  auto lda = LdaConfig::with_topics(1);
  lda.train_iters = 20;
  ClusterConfig cl;
  cl.clusters = 1;
  auto out = run_target_word(spec.target, c.instances, c.instances, lda, cl, 1,
                             c.gold.labels("promotion.n"));
  for (const auto& [id, label] : out.clustering.labels) EXPECT_EQ(label, "promotion.n.cluster0");
  EXPECT_EQ(out.scores->v_measure, 0.0);
}

TEST(RunTargetWord, EmptyTrainingTextFails) {
  Target t{"odd", Pos::noun};
  std::vector<Instance> xs{{t, "o1", "123 456"}, {t, "o2", "!!"}};
  EXPECT_THROW(run_target_word(t, xs, xs, LdaConfig::with_topics(2), ClusterConfig{}), TrainingError);
}

TEST(RunAll, ReportStructure) {
  Fixture f;
  auto r = run_all(f.config());
  ASSERT_EQ(r.report.words.size(), 2u);
  EXPECT_TRUE(r.report.failures.empty());
  EXPECT_TRUE(r.report.instance_weighted.all);
  EXPECT_TRUE(r.report.instance_weighted.verbs);
  EXPECT_TRUE(r.report.instance_weighted.nouns);
  EXPECT_TRUE(r.report.uniform.all);
  EXPECT_EQ(r.system.size(), f.instances.size());
  auto j = to_json(r.report);
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["aggregates"]["instance_weighted"].size(), 3u);
}

TEST(RunAll, AggregateEqualsPooledOracle) {
  Fixture f;
  auto r = run_all(f.config());
  // Materialize every instance as (target/class, target/cluster).
  std::map<std::string, int> cls, clu;
  std::vector<std::pair<int, int>> xs;
  for (const auto& [target, labels] : r.system.entries())
    for (const auto& [id, cluster] : labels) {
      auto g = f.key.labels(target)->at(id);
      auto ci = cls.emplace(target + "/" + g, static_cast<int>(cls.size())).first->second;
      auto ki = clu.emplace(target + "/" + cluster, static_cast<int>(clu.size())).first->second;
      xs.emplace_back(ci, ki);
    }
  auto o = oracle::v_scores(xs);
  EXPECT_NEAR(r.report.instance_weighted.all->v_measure, o.v_measure, 1e-12);
  double mean_v = (r.report.words[0].scores.v_measure + r.report.words[1].scores.v_measure) / 2;
  EXPECT_NEAR(r.report.uniform.all->v_measure, mean_v, 1e-15);
  EXPECT_EQ(r.report.instance_weighted.nouns->v_measure, r.report.words[0].scores.v_measure);
}

TEST(RunAll, DeterministicAcrossWorkerCounts) {
  Fixture f;
  auto c1 = f.config();
  c1.output_dir = f.dir.path() / "w1";
  auto c3 = c1;
  c3.workers = 3;
  c3.output_dir = f.dir.path() / "w3";
  auto a = run_all(c1);
  auto b = run_all(c3);
  EXPECT_EQ(test_util::slurp(c1.output_dir / "system.key"), test_util::slurp(c3.output_dir / "system.key"));
  EXPECT_EQ(deterministic_dump(to_json(a.report)), deterministic_dump(to_json(b.report)));
  EXPECT_EQ(test_util::slurp(c1.output_dir / "thetas.jsonl"), test_util::slurp(c3.output_dir / "thetas.jsonl"));
}

TEST(RunAll, PerWordIsolation) {
  Fixture f;
  auto full = run_all(f.config());
  std::vector<Instance> nouns;
  for (const auto& x : f.instances)
    if (x.target.pos == Pos::noun) nouns.push_back(x);
  auto path = f.dir.path() / "nouns.jsonl";
  write_corpus(nouns, path);
  auto c = f.config();
  c.train_corpus = path;
  auto only = run_all(c);
  ASSERT_EQ(only.report.words.size(), 1u);
  EXPECT_EQ(only.report.words[0].scores, full.report.words[0].scores);
}

TEST(RunAll, DegenerateWordIsRecordedNotFatal) {
  Target odd{"odd", Pos::verb};
  Fixture f({{odd, "odd.v.1", "1 2 3"}, {odd, "odd.v.2", "..."}});
  auto c = f.config();
  c.policy = ClusterPolicy::fixed;
  c.cluster.clusters = 2;
  auto r = run_all(c);
  EXPECT_EQ(r.report.words.size(), 2u);
  ASSERT_EQ(r.report.failures.size(), 1u);
  EXPECT_EQ(r.report.failures[0].target, "odd.v");
}

TEST(RunAll, ConfigErrors) {
  Fixture f;
  auto c = f.config();
  c.gold_key.reset();
  EXPECT_THROW(run_all(c), ConfigError);  // gold policy without gold key
  c = f.config();
  c.train_corpus = f.dir.path() / "missing.jsonl";
  EXPECT_THROW(run_all(c), ConfigError);

  std::vector<Instance> verbs;
  for (const auto& x : f.instances)
    if (x.target.pos == Pos::verb) verbs.push_back(x);
  write_corpus(verbs, f.dir.path() / "verbs.jsonl");
  c = f.config();
  c.test_corpus = f.dir.path() / "verbs.jsonl";
  EXPECT_THROW(run_all(c), ConfigError);
}

TEST(RunAll, StagedPathMatchesEndToEnd) {
  Fixture f;
  auto config = f.config();
  auto r = run_all(config);

  SystemKey staged;
  for (const auto& [key, xs] : group_by_target(f.instances)) {
    auto lda = config.lda;
    lda.alpha = 50.0 / static_cast<double>(lda.topics);
    auto model = train_word_model(xs, lda_config_for(lda, config.seed, key), 1);
    std::stringstream buf;
    write_model(model, key, buf);
    auto stored = read_model(buf, "mem");
    auto thetas = infer_word(stored.model, xs);
    std::vector<std::string> ids;
    for (const auto& x : xs) ids.push_back(x.id);
    auto C = gold_class_count(*f.key.labels(key), ids);
    auto wc = cluster_word(key, thetas, cluster_config_for(config.cluster, config.seed, key, C));
    for (const auto& [id, label] : wc.labels) staged.add(Target::parse(key), id, label);
  }
  EXPECT_EQ(staged, r.system);
}

TEST(Thetas, RoundTripAndLineErrors) {
  std::vector<ThetaRecord> rs{{"a.n", "a1", {0.25, 0.75}}, {"b.v", "b1", {1.0 / 3, 2.0 / 3}}};
  std::stringstream buf;
  write_thetas(rs, buf);
  EXPECT_EQ(parse_thetas(buf, "mem"), rs);
  std::stringstream bad("{\"target\":\"a.n\",\"id\":\"a1\",\"theta\":[1]}\n{\"id\":\"x\"}\n");
  try {
    parse_thetas(bad, "t.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ContingencyReport, DiagonalAndPromotionShape) {
  ContingencyTable diag{{"s0", "s1"}, {"c0", "c1"}, {{3, 0}, {0, 2}}};
  auto d = emit_contingency_report("x.n", diag);
  for (const auto& pc : d.json["per_cluster"]) EXPECT_EQ(pc["classes"].size(), 1u);

  ContingencyTable promo{{"job", "offer", "encourage", "issue"},
                         {"c1", "c2", "c3", "c4"},
                         {{3, 0, 0, 1}, {0, 5, 0, 4}, {3, 3, 4, 3}, {0, 1, 0, 0}}};
  auto r = emit_contingency_report("promotion.n", promo);
  auto sizes = promo.cluster_sizes();
  for (std::size_t j = 0; j < 4; ++j) {
    std::int64_t sum = 0;
    for (auto& [label, n] : r.json["per_cluster"][j]["classes"].items()) sum += n.get<std::int64_t>();
    EXPECT_EQ(sum, sizes[j]);
    EXPECT_EQ(r.json["per_cluster"][j]["size"], sizes[j]);
  }
  auto reparsed = table_from_json(nlohmann::json::parse(r.json.dump()));
  EXPECT_EQ(reparsed, promo);
  EXPECT_NE(r.text.find("c3 (4): encourage=4"), std::string::npos);
}

TEST(Report, JsonRoundTripIsLossless) {
  Fixture f;
  auto r = run_all(f.config()).report;
  auto j = to_json(r);
  auto back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  nlohmann::json wrong = j;
  wrong["schema_version"] = 99;
  EXPECT_THROW(report_from_json(wrong), ParseError);
}

TEST(Report, ResultsTsvShape) {
  GroupScores g;
  ScoreReport s;
  s.v_measure = 0.084;
  s.f_score = 0.639;
  g.all = s;
  g.nouns = s;
  EXPECT_EQ(results_tsv(g), "\tAll\tVerbs\tNouns\nV-measure\t8.4\t-\t8.4\nF-score\t63.9\t-\t63.9\n");
}

TEST(Sweep, RejectsSingleK) {
  Fixture f;
  EXPECT_THROW(sweep_k(f.config(), {10}), ConfigError);
  EXPECT_THROW(sweep_k(f.config(), {10, 10}), ConfigError);
}

TEST(Sweep, TableShape) {
  Fixture f;
  auto c = f.config();
  c.output_dir = f.dir.path() / "sweep";
  auto s = sweep_k(c, {2, 6});
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[1].topics, 6u);
  auto tsv = test_util::slurp(c.output_dir / "sweep.tsv");
  EXPECT_EQ(tsv.substr(0, 6), "K\t2\t6\n");
  EXPECT_TRUE(std::filesystem::exists(c.output_dir / "k6" / "report.json"));
}
