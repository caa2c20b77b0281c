#pragma once

// Run reports: JSON (schema-versioned), TSV result tables, and per-word
// cluster-by-class cross tabulations.

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "senseforge/corpus.hpp"
#include "senseforge/error.hpp"
#include "senseforge/metrics.hpp"

namespace senseforge {

inline constexpr const char* kReportSchema = "senseforge.report";
inline constexpr int kReportSchemaVersion = 1;

struct WordReport {
  Target target;
  ContingencyTable table;
  ScoreReport scores;
};

struct GroupScores {
  std::optional<ScoreReport> all;
  std::optional<ScoreReport> verbs;
  std::optional<ScoreReport> nouns;

  friend bool operator==(const GroupScores&, const GroupScores&) = default;
};

struct WordFailure {
  std::string target;
  std::string error;

  friend bool operator==(const WordFailure&, const WordFailure&) = default;
};

struct RunReport {
  nlohmann::json config = nlohmann::json::object();
  std::vector<WordReport> words;
  std::vector<WordFailure> failures;
  GroupScores instance_weighted;
  GroupScores uniform;
  std::string headline = "instance_weighted";
  // Excluded from determinism comparisons.
  double elapsed_seconds = 0;
  std::size_t workers = 1;

  const GroupScores& headline_scores() const {
    return headline == "uniform" ? uniform : instance_weighted;
  }
};

// ---------------------------------------------------------------------------
// Aggregation

// Instance-weighted scores come from the block-diagonal concatenation of the
// per-word tables; uniform scores are the unweighted mean over words.
inline void aggregate(RunReport& report) {
  auto pooled = [&](auto pick) -> std::optional<ScoreReport> {
    std::vector<std::pair<std::string, ContingencyTable>> parts;
    for (const auto& w : report.words)
      if (pick(w)) parts.emplace_back(w.target.key(), w.table);
    if (parts.empty()) return std::nullopt;
    return score(concatenate(parts));
  };
  auto mean = [&](auto pick) -> std::optional<ScoreReport> {
    ScoreReport s;
    std::size_t n = 0;
    for (const auto& w : report.words) {
      if (!pick(w)) continue;
      s.homogeneity += w.scores.homogeneity;
      s.completeness += w.scores.completeness;
      s.v_measure += w.scores.v_measure;
      s.paired_precision += w.scores.paired_precision;
      s.paired_recall += w.scores.paired_recall;
      s.f_score += w.scores.f_score;
      ++n;
    }
    if (n == 0) return std::nullopt;
    const double d = static_cast<double>(n);
    s.homogeneity /= d;
    s.completeness /= d;
    s.v_measure /= d;
    s.paired_precision /= d;
    s.paired_recall /= d;
    s.f_score /= d;
    return s;
  };
  auto any = [](const WordReport&) { return true; };
  auto verb = [](const WordReport& w) { return w.target.pos == Pos::verb; };
  auto noun = [](const WordReport& w) { return w.target.pos == Pos::noun; };
  report.instance_weighted = {pooled(any), pooled(verb), pooled(noun)};
  report.uniform = {mean(any), mean(verb), mean(noun)};
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ContingencyTable& t) {
  return {{"classes", t.classes},
          {"clusters", t.clusters},
          {"counts", t.counts},
          {"unlabeled", t.unlabeled},
          {"unclustered", t.unclustered}};
}

inline ContingencyTable table_from_json(const nlohmann::json& j) {
  ContingencyTable t;
  t.classes = j.at("classes").get<std::vector<std::string>>();
  t.clusters = j.at("clusters").get<std::vector<std::string>>();
  t.counts = j.at("counts").get<std::vector<std::vector<std::int64_t>>>();
  t.unlabeled = j.value("unlabeled", std::size_t{0});
  t.unclustered = j.value("unclustered", std::size_t{0});
  if (t.counts.size() != t.classes.size())
    throw ParseError("contingency", 0, "row count does not match class labels");
  for (const auto& row : t.counts)
    if (row.size() != t.clusters.size())
      throw ParseError("contingency", 0, "column count does not match cluster labels");
  return t;
}

inline nlohmann::json to_json(const ScoreReport& s) {
  return {{"homogeneity", s.homogeneity},
          {"completeness", s.completeness},
          {"v_measure", s.v_measure},
          {"paired_precision", s.paired_precision},
          {"paired_recall", s.paired_recall},
          {"f_score", s.f_score},
          {"percent",
           {{"v_measure", ScoreReport::percent(s.v_measure)},
            {"f_score", ScoreReport::percent(s.f_score)}}}};
}

inline ScoreReport scores_from_json(const nlohmann::json& j) {
  ScoreReport s;
  s.homogeneity = j.at("homogeneity").get<double>();
  s.completeness = j.at("completeness").get<double>();
  s.v_measure = j.at("v_measure").get<double>();
  s.paired_precision = j.at("paired_precision").get<double>();
  s.paired_recall = j.at("paired_recall").get<double>();
  s.f_score = j.at("f_score").get<double>();
  return s;
}

inline nlohmann::json to_json(const GroupScores& g) {
  auto opt = [](const std::optional<ScoreReport>& s) {
    return s ? to_json(*s) : nlohmann::json(nullptr);
  };
  return {{"all", opt(g.all)}, {"verbs", opt(g.verbs)}, {"nouns", opt(g.nouns)}};
}

inline GroupScores groups_from_json(const nlohmann::json& j) {
  auto opt = [](const nlohmann::json& s) -> std::optional<ScoreReport> {
    if (s.is_null()) return std::nullopt;
    return scores_from_json(s);
  };
  return {opt(j.at("all")), opt(j.at("verbs")), opt(j.at("nouns"))};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : r.words)
    words.push_back({{"target", w.target.key()},
                     {"instances", w.table.total()},
                     {"scores", to_json(w.scores)},
                     {"contingency", to_json(w.table)}});
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures) failures.push_back({{"target", f.target}, {"error", f.error}});
  return {{"schema", kReportSchema},
          {"schema_version", kReportSchemaVersion},
          {"config", r.config},
          {"headline", r.headline},
          {"words", words},
          {"failures", failures},
          {"aggregates",
           {{"instance_weighted", to_json(r.instance_weighted)}, {"uniform", to_json(r.uniform)}}},
          {"timing", {{"elapsed_seconds", r.elapsed_seconds}, {"workers", r.workers}}}};
}

inline RunReport report_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != kReportSchema)
    throw ParseError("report", 0, "not a senseforge report");
  if (j.value("schema_version", 0) != kReportSchemaVersion)
    throw ParseError("report", 0, "unsupported report schema version");
  RunReport r;
  r.config = j.at("config");
  r.headline = j.at("headline").get<std::string>();
  for (const auto& w : j.at("words"))
    r.words.push_back({Target::parse(w.at("target").get<std::string>()),
                       table_from_json(w.at("contingency")), scores_from_json(w.at("scores"))});
  for (const auto& f : j.at("failures"))
    r.failures.push_back({f.at("target").get<std::string>(), f.at("error").get<std::string>()});
  r.instance_weighted = groups_from_json(j.at("aggregates").at("instance_weighted"));
  r.uniform = groups_from_json(j.at("aggregates").at("uniform"));
  r.elapsed_seconds = j.at("timing").at("elapsed_seconds").get<double>();
  r.workers = j.at("timing").at("workers").get<std::size_t>();
  return r;
}

// Report JSON with the timing block removed, for reproducibility checks.
inline std::string deterministic_dump(nlohmann::json j) {
  j.erase("timing");
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// TSV tables

namespace detail {

inline std::string pct_cell(const std::optional<ScoreReport>& s, double ScoreReport::*field) {
  if (!s) return "-";
  std::ostringstream o;
  o << std::fixed << std::setprecision(1) << ScoreReport::percent((*s).*field);
  return o.str();
}

}  // namespace detail

// V-measure and F-score (x100) by All / Verbs / Nouns.
inline std::string results_tsv(const GroupScores& g) {
  std::ostringstream o;
  o << "\tAll\tVerbs\tNouns\n";
  o << "V-measure\t" << detail::pct_cell(g.all, &ScoreReport::v_measure) << '\t'
    << detail::pct_cell(g.verbs, &ScoreReport::v_measure) << '\t'
    << detail::pct_cell(g.nouns, &ScoreReport::v_measure) << '\n';
  o << "F-score\t" << detail::pct_cell(g.all, &ScoreReport::f_score) << '\t'
    << detail::pct_cell(g.verbs, &ScoreReport::f_score) << '\t'
    << detail::pct_cell(g.nouns, &ScoreReport::f_score) << '\n';
  return o.str();
}

// Per-word rows: target, instances, homogeneity, completeness, V, P, R, F (x100).
inline std::string words_tsv(const RunReport& r) {
  std::ostringstream o;
  o << "target\tinstances\thomogeneity\tcompleteness\tv_measure\tprecision\trecall\tf_score\n";
  o << std::fixed << std::setprecision(1);
  for (const auto& w : r.words) {
    const auto& s = w.scores;
    o << w.target.key() << '\t' << w.table.total() << '\t' << 100 * s.homogeneity << '\t'
      << 100 * s.completeness << '\t' << 100 * s.v_measure << '\t' << 100 * s.paired_precision
      << '\t' << 100 * s.paired_recall << '\t' << 100 * s.f_score << '\n';
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// Cluster-by-class cross tabulation

struct ContingencyReport {
  std::string text;
  nlohmann::json json;
};

inline ContingencyReport emit_contingency_report(const std::string& target,
                                                 const ContingencyTable& t) {
  ContingencyReport out;
  std::ostringstream o;
  const auto sizes = t.cluster_sizes();
  o << target << ": " << t.total() << " instances, " << t.rows() << " classes, " << t.cols()
    << " clusters\n";
  nlohmann::json per_cluster = nlohmann::json::array();
  for (std::size_t j = 0; j < t.cols(); ++j) {
    o << "  " << t.clusters[j] << " (" << sizes[j] << "):";
    nlohmann::json classes = nlohmann::json::object();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      if (t.counts[i][j] == 0) continue;
      o << ' ' << t.classes[i] << '=' << t.counts[i][j];
      classes[t.classes[i]] = t.counts[i][j];
    }
    o << '\n';
    per_cluster.push_back({{"cluster", t.clusters[j]}, {"size", sizes[j]}, {"classes", classes}});
  }
  out.text = o.str();
  out.json = to_json(t);
  out.json["target"] = target;
  out.json["per_cluster"] = std::move(per_cluster);
  return out;
}

}  // namespace senseforge
