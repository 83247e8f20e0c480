#pragma once

// Identity recognition: an affine map from memory features to self-identities,
// a frozen base plus a trainable low-rank adapter,
//
//   I(m) = (W0 + (alpha / r) * A * B) * x(m) + bias.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "selfid/linalg.hpp"
#include "selfid/spaces.hpp"

namespace selfid {

// Multipliers applied to time and emotion when they are appended to content.
struct FeatureScaling {
  double time_scale = 1.0;
  double emotion_scale = 1.0;

  bool operator==(const FeatureScaling&) const = default;
};

inline Vector feature_vector(const Memory& m, const FeatureScaling& scaling = {}) {
  Vector x;
  x.reserve(m.content.size() + 2);
  x.insert(x.end(), m.content.begin(), m.content.end());
  x.push_back(m.time * scaling.time_scale);
  x.push_back(m.emotion * scaling.emotion_scale);
  return x;
}

struct AdaptedRecognizer {
  Matrix base_weights;  // n x k, frozen
  Vector base_bias;     // n, frozen
  Matrix adapter_a;     // n x r
  Matrix adapter_b;     // r x k
  double alpha = 8.0;
  FeatureScaling scaling;
  std::uint64_t seed = 0;

  std::size_t output_dim() const { return base_weights.rows(); }
  std::size_t input_dim() const { return base_weights.cols(); }
  std::size_t rank() const { return adapter_a.cols(); }
  double adapter_scale() const { return alpha / static_cast<double>(rank()); }

  void validate() const {
    const std::size_t n = output_dim(), k = input_dim(), r = rank();
    std::ostringstream os;
    if (r == 0) os << "adapter rank must be positive";
    else if (r > std::min(n, k)) os << "adapter rank " << r << " exceeds min(n, k) = " << std::min(n, k);
    else if (base_bias.size() != n) os << "bias has dimension " << base_bias.size() << ", expected " << n;
    else if (adapter_a.rows() != n) os << "adapter A has " << adapter_a.rows() << " rows, expected " << n;
    else if (adapter_b.rows() != r || adapter_b.cols() != k)
      os << "adapter B is " << adapter_b.rows() << "x" << adapter_b.cols() << ", expected " << r << "x" << k;
    else if (!(alpha > 0.0) || !std::isfinite(alpha)) os << "alpha must be positive";
    else if (!all_finite(base_weights.flat()) || !all_finite(base_bias) ||
             !all_finite(adapter_a.flat()) || !all_finite(adapter_b.flat()))
      os << "recognizer parameters must be finite";
    if (!os.str().empty()) throw std::invalid_argument(os.str());
  }

  // W0 + (alpha / r) A B
  Matrix effective_weights() const {
    Matrix w = base_weights;
    const Matrix ab = matmul(adapter_a, adapter_b);
    const double s = adapter_scale();
    for (std::size_t i = 0; i < w.size(); ++i) w.flat()[i] += s * ab.flat()[i];
    return w;
  }

  bool operator==(const AdaptedRecognizer&) const = default;
};

// Frozen base map alone: W0 x + bias.
inline Vector base_map(const AdaptedRecognizer& rec, std::span<const double> x) {
  Vector y = matvec(rec.base_weights, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += rec.base_bias[i];
  return y;
}

inline Vector recognize_features(const AdaptedRecognizer& rec, std::span<const double> x) {
  if (x.size() != rec.input_dim()) {
    std::ostringstream os;
    os << "feature dimension " << x.size() << " does not match recognizer input dimension "
       << rec.input_dim();
    throw std::invalid_argument(os.str());
  }
  const Vector bx = matvec(rec.adapter_b, x);
  const Vector abx = matvec(rec.adapter_a, bx);
  const double s = rec.adapter_scale();
  Vector y = matvec(rec.base_weights, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (y[i] + s * abx[i]) + rec.base_bias[i];
  return y;
}

inline SelfIdentity recognize(const AdaptedRecognizer& rec, const Memory& m) {
  return {recognize_features(rec, feature_vector(m, rec.scaling))};
}

// Adapter factors start with A ~ N(0, init_std^2) and B = 0, so the initial
// recognizer equals its base map exactly.
inline AdaptedRecognizer make_recognizer(Matrix base_weights, Vector base_bias, std::size_t rank,
                                         double alpha, FeatureScaling scaling, std::uint64_t seed,
                                         double init_std = 0.02) {
  const std::size_t n = base_weights.rows(), k = base_weights.cols();
  AdaptedRecognizer rec{std::move(base_weights), std::move(base_bias), Matrix(n, rank),
                        Matrix(rank, k), alpha, scaling, seed};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, init_std);
  for (double& v : rec.adapter_a.flat()) v = gauss(rng);
  rec.validate();
  return rec;
}

struct ContinuityDiagnostic {
  double lipschitz_estimate = 0.0;
  std::size_t sample_pairs = 0;
};

// Largest observed ratio d_S(I(m1), I(m2)) / d_M(m1, m2) over sampled pairs
// with positive memory distance. Self distance is Euclidean.
inline ContinuityDiagnostic estimate_lipschitz(const AdaptedRecognizer& rec,
                                               std::span<const Memory> memories,
                                               const MemoryMetricConfig& cfg, std::size_t pairs,
                                               std::uint64_t seed = 0) {
  if (memories.size() < 2) throw std::invalid_argument("Lipschitz estimate needs at least two memories");
  if (pairs == 0) throw std::invalid_argument("Lipschitz estimate needs at least one pair");
  cfg.validate();

  bool degenerate = true;
  for (std::size_t i = 1; i < memories.size() && degenerate; ++i)
    degenerate = memory_distance(memories[0], memories[i], cfg) == 0.0;
  if (degenerate) throw std::invalid_argument("all memories coincide; continuity ratio undefined");

  std::vector<SelfIdentity> outputs;
  outputs.reserve(memories.size());
  for (const auto& m : memories) outputs.push_back(recognize(rec, m));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, memories.size() - 1);
  ContinuityDiagnostic diag;
  for (std::size_t s = 0; s < pairs; ++s) {
    std::size_t i = pick(rng), j = pick(rng);
    while (j == i) j = pick(rng);
    const double dm = memory_distance(memories[i], memories[j], cfg);
    if (dm == 0.0) continue;
    const double ds = lp_distance(outputs[i].attributes, outputs[j].attributes, 2.0);
    diag.lipschitz_estimate = std::max(diag.lipschitz_estimate, ds / dm);
    ++diag.sample_pairs;
  }
  return diag;
}

}  // namespace selfid
