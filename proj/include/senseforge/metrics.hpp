#pragma once

// External clustering scores over a class x cluster contingency table a_ij.
//
//   homogeneity  = 1 - H(GS|C) / H(GS)
//   completeness = 1 - H(C|GS) / H(C)
//   V-measure    = harmonic mean of the two
//
// and the paired F-score, where precision and recall are taken over unordered
// instance pairs that share a cluster / share a class.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "senseforge/error.hpp"

namespace senseforge {

struct ContingencyTable {
  std::vector<std::string> classes;               // rows, GS_i
  std::vector<std::string> clusters;              // columns, C_j
  std::vector<std::vector<std::int64_t>> counts;  // counts[i][j] = a_ij
  // Instances seen on only one side of the comparison.
  std::size_t unlabeled = 0;    // clustered, no gold label
  std::size_t unclustered = 0;  // gold label, not clustered

  std::size_t rows() const noexcept { return counts.size(); }
  std::size_t cols() const noexcept { return counts.empty() ? 0 : counts[0].size(); }

  std::int64_t total() const {
    std::int64_t n = 0;
    for (const auto& row : counts)
      for (auto a : row) n += a;
    return n;
  }

  std::vector<std::int64_t> class_sizes() const {
    std::vector<std::int64_t> out(rows(), 0);
    for (std::size_t i = 0; i < rows(); ++i)
      for (auto a : counts[i]) out[i] += a;
    return out;
  }

  std::vector<std::int64_t> cluster_sizes() const {
    std::vector<std::int64_t> out(cols(), 0);
    for (const auto& row : counts)
      for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
    return out;
  }

  ContingencyTable transposed() const {
    ContingencyTable t;
    t.classes = clusters;
    t.clusters = classes;
    t.unlabeled = unclustered;
    t.unclustered = unlabeled;
    t.counts.assign(cols(), std::vector<std::int64_t>(rows(), 0));
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) t.counts[j][i] = counts[i][j];
    return t;
  }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

// Builds a_ij from instance -> class and instance -> cluster label maps.
// Labels are ordered lexicographically. Throws DomainError on zero overlap.
inline ContingencyTable contingency(const std::map<std::string, std::string>& gold,
                                    const std::map<std::string, std::string>& system) {
  std::set<std::string> class_set, cluster_set;
  ContingencyTable t;
  for (const auto& [id, cluster] : system) {
    auto g = gold.find(id);
    if (g == gold.end()) {
      ++t.unlabeled;
      continue;
    }
    class_set.insert(g->second);
    cluster_set.insert(cluster);
  }
  for (const auto& [id, label] : gold)
    if (!system.contains(id)) ++t.unclustered;
  if (class_set.empty()) throw DomainError("no instance is both labeled and clustered");

  t.classes.assign(class_set.begin(), class_set.end());
  t.clusters.assign(cluster_set.begin(), cluster_set.end());
  auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), s) - v.begin());
  };
  t.counts.assign(t.classes.size(), std::vector<std::int64_t>(t.clusters.size(), 0));
  for (const auto& [id, cluster] : system) {
    auto g = gold.find(id);
    if (g == gold.end()) continue;
    t.counts[index_of(t.classes, g->second)][index_of(t.clusters, cluster)] += 1;
  }
  return t;
}

// Block-diagonal concatenation; labels are prefixed with "<prefix>/".
inline ContingencyTable concatenate(const std::vector<std::pair<std::string, ContingencyTable>>& parts) {
  ContingencyTable out;
  std::size_t R = 0, Cn = 0;
  for (const auto& [name, t] : parts) {
    R += t.rows();
    Cn += t.cols();
  }
  out.counts.assign(R, std::vector<std::int64_t>(Cn, 0));
  std::size_t r0 = 0, c0 = 0;
  for (const auto& [name, t] : parts) {
    for (const auto& c : t.classes) out.classes.push_back(name + "/" + c);
    for (const auto& c : t.clusters) out.clusters.push_back(name + "/" + c);
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < t.cols(); ++j) out.counts[r0 + i][c0 + j] = t.counts[i][j];
    out.unlabeled += t.unlabeled;
    out.unclustered += t.unclustered;
    r0 += t.rows();
    c0 += t.cols();
  }
  return out;
}

enum class LogBase { two, e };

namespace detail {

inline double log_in(double x, LogBase base) { return base == LogBase::two ? std::log2(x) : std::log(x); }

inline void require_nonempty(const ContingencyTable& t) {
  if (t.total() <= 0) throw DomainError("contingency table is empty");
}

inline double harmonic_mean(double a, double b) {
  if (a <= 0 || b <= 0) return 0.0;
  return 2.0 * a * b / (a + b);
}

inline std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace detail

// 1 when H(GS) = 0 (a single class).
inline double homogeneity(const ContingencyTable& t, LogBase base = LogBase::two) {
  detail::require_nonempty(t);
  const double N = static_cast<double>(t.total());
  double h_gs = 0;
  for (auto r : t.class_sizes())
    if (r > 0) h_gs -= (r / N) * detail::log_in(r / N, base);
  if (h_gs == 0) return 1.0;

  const auto col = t.cluster_sizes();
  double h_gs_c = 0;
  for (std::size_t j = 0; j < t.cols(); ++j)
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const auto a = t.counts[i][j];
      if (a > 0) h_gs_c -= (a / N) * detail::log_in(static_cast<double>(a) / col[j], base);
    }
  return std::clamp(1.0 - h_gs_c / h_gs, 0.0, 1.0);
}

// The row/column dual of homogeneity; 1 when H(C) = 0 (a single cluster).
inline double completeness(const ContingencyTable& t, LogBase base = LogBase::two) {
  return homogeneity(t.transposed(), base);
}

inline double v_measure(const ContingencyTable& t, LogBase base = LogBase::two) {
  return detail::harmonic_mean(homogeneity(t, base), completeness(t, base));
}

struct PairedF {
  double precision = 0;
  double recall = 0;
  double f_score = 0;
};

// Zero cluster pairs -> precision 0; zero class pairs -> recall 0.
inline PairedF paired_f_score(const ContingencyTable& t) {
  if (t.total() < 2) throw DomainError("paired F-score needs at least two instances");
  std::int64_t common = 0, cluster_pairs = 0, class_pairs = 0;
  for (const auto& row : t.counts)
    for (auto a : row) common += detail::pairs(a);
  for (auto c : t.cluster_sizes()) cluster_pairs += detail::pairs(c);
  for (auto r : t.class_sizes()) class_pairs += detail::pairs(r);
  PairedF f;
  f.precision = cluster_pairs > 0 ? static_cast<double>(common) / cluster_pairs : 0.0;
  f.recall = class_pairs > 0 ? static_cast<double>(common) / class_pairs : 0.0;
  f.f_score = detail::harmonic_mean(f.precision, f.recall);
  return f;
}

struct ScoreReport {
  double homogeneity = 0;
  double completeness = 0;
  double v_measure = 0;
  double paired_precision = 0;
  double paired_recall = 0;
  double f_score = 0;

  // Presentation scale used in result tables (e.g. 8.4, 63.9).
  static double percent(double x) { return 100.0 * x; }

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

// Tables with a single instance get F = 0 (no pairs exist).
inline ScoreReport score(const ContingencyTable& t) {
  ScoreReport s;
  s.homogeneity = homogeneity(t);
  s.completeness = completeness(t);
  s.v_measure = detail::harmonic_mean(s.homogeneity, s.completeness);
  if (t.total() >= 2) {
    auto f = paired_f_score(t);
    s.paired_precision = f.precision;
    s.paired_recall = f.recall;
    s.f_score = f.f_score;
  }
  return s;
}

inline double purity(const ContingencyTable& t) {
  detail::require_nonempty(t);
  std::int64_t hit = 0;
  for (std::size_t j = 0; j < t.cols(); ++j) {
    std::int64_t best = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) best = std::max(best, t.counts[i][j]);
    hit += best;
  }
  return static_cast<double>(hit) / static_cast<double>(t.total());
}

}  // namespace senseforge
