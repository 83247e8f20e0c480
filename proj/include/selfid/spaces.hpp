#pragma once

// Memory space and self space: the records, their metrics, and the
// pairwise distance matrix that feeds continuum detection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfid/linalg.hpp"

namespace selfid {

using MemoryId = std::string;

// One episodic record: when it happened, what it was, how intense it felt.
struct Memory {
  MemoryId id;
  double time = 0.0;
  Vector content;
  double emotion = 0.0;

  bool operator==(const Memory&) const = default;
};

enum class ContentMetric { Euclidean, CosineDistance };

struct MemoryMetricConfig {
  double w_t = 1.0;
  double w_c = 1.0;
  double w_e = 1.0;
  ContentMetric content_metric = ContentMetric::Euclidean;

  void validate() const {
    for (double w : {w_t, w_c, w_e})
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("memory metric weights must be positive and finite");
  }
};

struct SelfIdentity {
  Vector attributes;

  std::size_t dim() const { return attributes.size(); }
  bool operator==(const SelfIdentity&) const = default;
};

// L^p exponent; p = infinity selects the max norm.
struct SelfMetricConfig {
  double p = 2.0;

  void validate() const {
    if (!(p >= 1.0)) throw std::invalid_argument("self metric exponent p must be >= 1");
  }
};

namespace detail {

inline void check_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << " dimension mismatch: " << a << " vs " << b;
    throw std::invalid_argument(os.str());
  }
}

inline void check_finite_memory(const Memory& m) {
  if (!std::isfinite(m.time) || !std::isfinite(m.emotion) || !all_finite(m.content))
    throw std::invalid_argument("memory '" + m.id + "' has a non-finite field");
}

}  // namespace detail

inline double content_distance(std::span<const double> c1, std::span<const double> c2,
                               ContentMetric kind) {
  detail::check_same_dim(c1.size(), c2.size(), "content");
  if (kind == ContentMetric::Euclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
      const double d = c1[i] - c2[i];
      s += d * d;
    }
    return std::sqrt(s);
  }
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    dot += c1[i] * c2[i];
    n1 += c1[i] * c1[i];
    n2 += c2[i] * c2[i];
  }
  if (n1 == 0.0 || n2 == 0.0)
    throw std::invalid_argument("cosine distance is undefined for a zero content vector");
  const double cosine = std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), -1.0, 1.0);
  return 1.0 - cosine;
}

// Composite distance: sqrt(w_t dt^2 + w_c dc^2 + w_e de^2).
inline double memory_distance(const Memory& m1, const Memory& m2, const MemoryMetricConfig& cfg) {
  detail::check_same_dim(m1.content.size(), m2.content.size(), "memory content");
  detail::check_finite_memory(m1);
  detail::check_finite_memory(m2);
  const double dt = m1.time - m2.time;
  const double de = m1.emotion - m2.emotion;
  const double dc = content_distance(m1.content, m2.content, cfg.content_metric);
  return std::sqrt(cfg.w_t * dt * dt + cfg.w_c * dc * dc + cfg.w_e * de * de);
}

inline double lp_distance(std::span<const double> a, std::span<const double> b, double p) {
  detail::check_same_dim(a.size(), b.size(), "self identity");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  }
  if (p == 2.0) return content_distance(a, b, ContentMetric::Euclidean);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

inline double self_distance(const SelfIdentity& s1, const SelfIdentity& s2,
                            const SelfMetricConfig& cfg = {}) {
  cfg.validate();
  return lp_distance(s1.attributes, s2.attributes, cfg.p);
}

// Dense symmetric matrix of memory distances, zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}
  DistanceMatrix(std::size_t n, std::vector<double> row_major) : n_(n), d_(std::move(row_major)) {
    if (d_.size() != n * n) throw std::invalid_argument("distance matrix must be square");
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }

  double max_entry() const {
    double m = 0.0;
    for (double v : d_) m = std::max(m, v);
    return m;
  }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

inline DistanceMatrix pairwise_distance_matrix(std::span<const Memory> memories,
                                               const MemoryMetricConfig& cfg) {
  if (memories.empty()) throw std::invalid_argument("pairwise distances need at least one memory");
  cfg.validate();
  const std::size_t n = memories.size();
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double v;
      try {
        v = memory_distance(memories[i], memories[j], cfg);
      } catch (const std::invalid_argument& e) {
        std::ostringstream os;
        os << "memories (" << i << ", " << j << "): " << e.what();
        throw std::invalid_argument(os.str());
      }
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  if (n == 1) detail::check_finite_memory(memories[0]);
  return d;
}

// Homogeneous collection of memories sharing one content dimension.
struct MemorySet {
  std::size_t k_c = 0;
  std::vector<Memory> memories;

  void validate() const {
    for (const auto& m : memories) {
      if (m.content.size() != k_c) {
        std::ostringstream os;
        os << "memory '" << m.id << "' has content dimension " << m.content.size()
           << ", expected k_c = " << k_c;
        throw std::invalid_argument(os.str());
      }
      detail::check_finite_memory(m);
    }
  }
};

}  // namespace selfid
