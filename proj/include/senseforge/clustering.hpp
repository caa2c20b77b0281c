#pragma once

// Spherical K-means: points and centroids live on the unit sphere and the
// objective is sum_i (1 - cos(x_i, c_{a(i)})).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "senseforge/error.hpp"
#include "senseforge/rng.hpp"

namespace senseforge {

struct ClusterConfig {
  std::size_t clusters = 1;
  std::size_t max_iters = 100;
  std::uint64_t seed = 1;
  std::size_t restarts = 10;

  void validate() const {
    if (clusters < 1) throw ConfigError("cluster count C must be >= 1");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
  }
};

struct LabeledPoint {
  std::string id;
  std::vector<double> values;
};

struct Clustering {
  std::map<std::string, std::size_t> assignment;
  std::vector<std::vector<double>> centroids;
  double objective = 0;
  std::size_t iterations = 0;
  // Objective after every assignment and centroid step of the returned restart.
  std::vector<double> trace;

  std::size_t clusters() const noexcept { return centroids.size(); }
};

inline double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Throws DomainError for zero-norm inputs or mismatched dimensions.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("cosine of vectors with different dimensions");
  const double na = norm(a), nb = norm(b);
  if (!(na > 0) || !(nb > 0)) throw DomainError("cosine similarity of a zero-norm vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

namespace detail {

// Index of the most similar centroid; ties go to the lowest index.
inline std::size_t nearest(std::span<const double> x, const std::vector<std::vector<double>>& cs,
                           double* similarity = nullptr) {
  std::size_t best = 0;
  double best_sim = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cs.size(); ++j) {
    double s = dot(x, cs[j]);
    if (s > best_sim) {
      best_sim = s;
      best = j;
    }
  }
  if (similarity) *similarity = best_sim;
  return best;
}

struct Run {
  std::vector<std::size_t> assign;
  std::vector<std::vector<double>> centroids;
  double objective = 0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

inline double objective(const std::vector<std::vector<double>>& xs,
                        const std::vector<std::size_t>& assign,
                        const std::vector<std::vector<double>>& cs) {
  double j = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) j += 1.0 - dot(xs[i], cs[assign[i]]);
  return j;
}

// k-means++ seeding with cosine distance 1 - cos.
inline std::vector<std::vector<double>> seed_centroids(const std::vector<std::vector<double>>& xs,
                                                       std::size_t C, Rng& rng) {
  const std::size_t N = xs.size();
  std::vector<std::vector<double>> cs;
  std::vector<bool> chosen(N, false);
  std::size_t first = rng.index(N);
  cs.push_back(xs[first]);
  chosen[first] = true;
  std::vector<double> dist(N);
  for (std::size_t i = 0; i < N; ++i) dist[i] = std::max(0.0, 1.0 - dot(xs[i], cs[0]));
  while (cs.size() < C) {
    double total = 0;
    for (std::size_t i = 0; i < N; ++i) total += chosen[i] ? 0.0 : dist[i] * dist[i];
    std::size_t pick = N;
    if (total > 0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < N; ++i) {
        if (chosen[i]) continue;
        pick = i;
        u -= dist[i] * dist[i];
        if (u < 0) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < N; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[rng.index(rest.size())];
    }
    chosen[pick] = true;
    cs.push_back(xs[pick]);
    for (std::size_t i = 0; i < N; ++i)
      dist[i] = std::min(dist[i], std::max(0.0, 1.0 - dot(xs[i], cs.back())));
  }
  return cs;
}

inline Run run_once(const std::vector<std::vector<double>>& xs, std::size_t C,
                    std::size_t max_iters, Rng& rng) {
  const std::size_t N = xs.size();
  const std::size_t dim = xs[0].size();
  Run r;
  r.centroids = seed_centroids(xs, C, rng);
  r.assign.assign(N, 0);
  std::vector<std::size_t> prev;
  std::vector<double> sims(N);
  bool converged = false;

  for (std::size_t it = 0; it < max_iters; ++it) {
    r.iterations = it + 1;
    std::vector<std::size_t> sizes(C, 0);
    for (std::size_t i = 0; i < N; ++i) {
      r.assign[i] = nearest(xs[i], r.centroids, &sims[i]);
      ++sizes[r.assign[i]];
    }
    // Empty cluster: move the worst-served point (from a cluster that can
    // spare it) into it and restart the assignment step.
    bool repaired = false;
    for (std::size_t j = 0; j < C; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t worst = N;
      for (std::size_t i = 0; i < N; ++i)
        if (sizes[r.assign[i]] > 1 && (worst == N || sims[i] < sims[worst])) worst = i;
      if (worst == N) break;
      --sizes[r.assign[worst]];
      r.assign[worst] = j;
      ++sizes[j];
      sims[worst] = 1.0;
      r.centroids[j] = xs[worst];
      repaired = true;
    }
    r.trace.push_back(objective(xs, r.assign, r.centroids));
    if (repaired) continue;
    if (r.assign == prev) {
      converged = true;
      break;
    }
    prev = r.assign;

    std::vector<std::vector<double>> sums(C, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t d = 0; d < dim; ++d) sums[r.assign[i]][d] += xs[i][d];
    for (std::size_t j = 0; j < C; ++j) {
      double n = norm(sums[j]);
      if (n > 0) {
        for (auto& v : sums[j]) v /= n;
        r.centroids[j] = std::move(sums[j]);
      }
    }
    r.trace.push_back(objective(xs, r.assign, r.centroids));
  }

  if (!converged) {
    // Leave the assignment nearest-optimal for the final centroids.
    for (std::size_t i = 0; i < N; ++i) r.assign[i] = nearest(xs[i], r.centroids);
    r.trace.push_back(objective(xs, r.assign, r.centroids));
  }
  r.objective = r.trace.back();
  return r;
}

}  // namespace detail

// Points are processed in instance-id order and the random stream is keyed by
// the sorted ids, so the partition does not depend on input order.
inline Clustering kmeans_cosine(const std::vector<LabeledPoint>& points, const ClusterConfig& config) {
  config.validate();
  if (points.empty()) throw ConfigError("k-means needs at least one point");
  if (config.clusters > points.size())
    throw ConfigError("cluster count " + std::to_string(config.clusters) + " exceeds point count " +
                      std::to_string(points.size()));

  std::vector<const LabeledPoint*> order;
  for (const auto& p : points) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (order[i]->id == order[i - 1]->id)
      throw IntegrityError("duplicate point id '" + order[i]->id + "'");

  const std::size_t dim = order[0]->values.size();
  std::vector<std::vector<double>> xs;
  xs.reserve(order.size());
  std::string id_key;
  for (const auto* p : order) {
    if (p->values.size() != dim) throw DomainError("point '" + p->id + "' has wrong dimension");
    double n = norm(p->values);
    if (!(n > 0) || !std::isfinite(n)) throw DomainError("point '" + p->id + "' has zero norm");
    std::vector<double> x(p->values);
    for (auto& v : x) v /= n;
    xs.push_back(std::move(x));
    id_key += p->id;
    id_key += '\n';
  }

  const std::uint64_t base = derive_seed(config.seed, id_key);
  detail::Run best;
  bool have = false;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(base, "restart/" + std::to_string(r)));
    auto run = detail::run_once(xs, config.clusters, config.max_iters, rng);
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
  }

  Clustering out;
  for (std::size_t i = 0; i < order.size(); ++i) out.assignment[order[i]->id] = best.assign[i];
  out.centroids = std::move(best.centroids);
  out.objective = best.objective;
  out.iterations = best.iterations;
  out.trace = std::move(best.trace);
  return out;
}

}  // namespace senseforge
