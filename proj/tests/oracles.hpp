#pragma once

// Test-only reference evaluators. These work from materialized instances or
// exhaustive enumeration and share no code with the library's scoring path.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "senseforge/metrics.hpp"

namespace oracle {

// One (class, cluster) pair per instance.
inline std::vector<std::pair<int, int>> materialize(const senseforge::ContingencyTable& t) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j)
      for (std::int64_t n = 0; n < t.counts[i][j]; ++n)
        out.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return out;
}

struct Entropies {
  double h_gs = 0, h_c = 0, h_gs_given_c = 0, h_c_given_gs = 0;
};

// Eqs. for H(GS), H(C), H(GS|C), H(C|GS), evaluated term by term from counts
// tallied over the instance list, natural log.
inline Entropies entropies(const std::vector<std::pair<int, int>>& xs) {
  std::map<int, double> cls, clu;
  std::map<std::pair<int, int>, double> joint;
  for (auto [g, c] : xs) {
    cls[g] += 1;
    clu[c] += 1;
    joint[{g, c}] += 1;
  }
  const double N = static_cast<double>(xs.size());
  Entropies e;
  for (auto [g, n] : cls) e.h_gs -= n / N * std::log(n / N);
  for (auto [c, n] : clu) e.h_c -= n / N * std::log(n / N);
  for (auto [gc, n] : joint) {
    e.h_gs_given_c -= n / N * std::log(n / clu[gc.second]);
    e.h_c_given_gs -= n / N * std::log(n / cls[gc.first]);
  }
  return e;
}

struct Scores {
  double homogeneity, completeness, v_measure;
};

inline Scores v_scores(const std::vector<std::pair<int, int>>& xs) {
  auto e = entropies(xs);
  Scores s;
  s.homogeneity = e.h_gs == 0 ? 1.0 : 1.0 - e.h_gs_given_c / e.h_gs;
  s.completeness = e.h_c == 0 ? 1.0 : 1.0 - e.h_c_given_gs / e.h_c;
  s.v_measure = (s.homogeneity + s.completeness) == 0
                    ? 0.0
                    : 2 * s.homogeneity * s.completeness / (s.homogeneity + s.completeness);
  return s;
}

struct PairCounts {
  std::int64_t common = 0, cluster_pairs = 0, class_pairs = 0;
};

// Every unordered instance pair, checked one at a time.
inline PairCounts enumerate_pairs(const std::vector<std::pair<int, int>>& xs) {
  PairCounts p;
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = a + 1; b < xs.size(); ++b) {
      bool same_class = xs[a].first == xs[b].first;
      bool same_cluster = xs[a].second == xs[b].second;
      p.class_pairs += same_class;
      p.cluster_pairs += same_cluster;
      p.common += same_class && same_cluster;
    }
  return p;
}

// Random table with 1..max_dim rows/cols, total in [2, max_n], many empty cells.
inline senseforge::ContingencyTable random_table(std::mt19937_64& gen, std::size_t max_dim,
                                                 std::int64_t max_n) {
  std::uniform_int_distribution<std::size_t> dim(1, max_dim);
  senseforge::ContingencyTable t;
  const std::size_t R = dim(gen), C = dim(gen);
  for (std::size_t i = 0; i < R; ++i) t.classes.push_back("c" + std::to_string(i));
  for (std::size_t j = 0; j < C; ++j) t.clusters.push_back("k" + std::to_string(j));
  t.counts.assign(R, std::vector<std::int64_t>(C, 0));
  const std::int64_t N = std::uniform_int_distribution<std::int64_t>(2, max_n)(gen);
  // Skewed cell weights so that some cells stay empty.
  std::vector<double> w(R * C);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& x : w) x = u(gen) < 0.3 ? 0.0 : std::pow(u(gen), 3.0);
  w[std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(gen)] += 0.1;
  std::discrete_distribution<std::size_t> cell(w.begin(), w.end());
  for (std::int64_t n = 0; n < N; ++n) {
    auto k = cell(gen);
    t.counts[k / C][k % C] += 1;
  }
  return t;
}

// Minimal spherical objective over every 2-partition with both sides
// non-empty: sum over groups of (n - |sum of unit vectors|).
inline std::pair<double, std::vector<int>> best_two_partition(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts[0].size();
  std::vector<std::vector<double>> unit;
  for (const auto& p : pts) {
    double s = 0;
    for (double x : p) s += x * x;
    s = std::sqrt(s);
    std::vector<double> u;
    for (double x : p) u.push_back(x / s);
    unit.push_back(u);
  }
  double best = 1e300;
  std::vector<int> best_assign;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double obj = 0;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> sum(dim, 0.0);
      double count = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
          for (std::size_t d = 0; d < dim; ++d) sum[d] += unit[i][d];
          count += 1;
        }
      double norm = 0;
      for (double x : sum) norm += x * x;
      obj += count - std::sqrt(norm);
    }
    if (obj < best - 1e-15) {
      best = obj;
      best_assign.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) best_assign[i] = (mask >> i) & 1u;
    }
  }
  return {best, best_assign};
}

// True when the two labelings induce the same partition.
template <typename A, typename B>
bool same_partition(const std::vector<A>& a, const std::vector<B>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

}  // namespace oracle
