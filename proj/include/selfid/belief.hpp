#pragma once

// Belief over a finite set of identity atoms. For memory m with recognized
// identity I(m), atom j receives
//
//   p_j = w_j exp(-d_S(I(m), s_j) / tau) / sum_j' w_j' exp(-d_S(I(m), s_j') / tau)
//
// where w_j is the atom's mass under the identity measure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfid/recognition.hpp"
#include "selfid/spaces.hpp"

namespace selfid {

struct IdentityMeasure {
  std::vector<SelfIdentity> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
  std::size_t dim() const { return atoms.empty() ? 0 : atoms.front().dim(); }

  void validate() const {
    if (atoms.empty()) throw std::invalid_argument("identity measure has no atoms");
    if (weights.size() != atoms.size())
      throw std::invalid_argument("identity measure needs one weight per atom");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("identity measure weights must be positive and finite");
    for (const auto& a : atoms) {
      if (a.dim() != dim()) throw std::invalid_argument("identity measure atoms differ in dimension");
      if (!all_finite(a.attributes)) throw std::invalid_argument("identity measure atom is not finite");
    }
  }
};

struct BeliefDistribution {
  std::vector<double> probabilities;
  double temperature = 1.0;
};

class BeliefThreshold {
 public:
  explicit BeliefThreshold(double b) : b_(b) {
    if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("belief threshold must lie in (0, 1]");
  }
  double value() const { return b_; }

 private:
  double b_;
};

// Softmax of log w_j - d_j / tau, shifted by the maximum logit.
inline BeliefDistribution belief_from_distances(std::span<const double> distances,
                                                std::span<const double> weights, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature tau must be positive");
  if (distances.empty()) throw std::invalid_argument("belief over an empty measure");
  const std::size_t n = distances.size();
  std::vector<double> logits(n);
  for (std::size_t j = 0; j < n; ++j) logits[j] = std::log(weights[j]) - distances[j] / tau;
  const double shift = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - shift);
    total += l;
  }
  for (double& l : logits) l /= total;
  return {std::move(logits), tau};
}

inline std::vector<double> atom_distances(const SelfIdentity& s, const IdentityMeasure& mu) {
  std::vector<double> d(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu.atoms[j].dim() != s.dim()) {
      std::ostringstream os;
      os << "atom dimension " << mu.atoms[j].dim() << " does not match identity dimension " << s.dim();
      throw std::invalid_argument(os.str());
    }
    d[j] = lp_distance(s.attributes, mu.atoms[j].attributes, 2.0);
  }
  return d;
}

inline BeliefDistribution belief_distribution(const AdaptedRecognizer& rec, const Memory& m,
                                              const IdentityMeasure& mu, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature tau must be positive");
  mu.validate();
  return belief_from_distances(atom_distances(recognize(rec, m), mu), mu.weights, tau);
}

inline double probability_of(const BeliefDistribution& dist, const std::set<std::size_t>& atoms) {
  double p = 0.0;
  for (std::size_t i : atoms) {
    if (i >= dist.probabilities.size()) {
      std::ostringstream os;
      os << "atom index " << i << " out of range (" << dist.probabilities.size() << " atoms)";
      throw std::out_of_range(os.str());
    }
    p += dist.probabilities[i];
  }
  return p;
}

struct Condition2Row {
  MemoryId memory_id;
  double distance_to_s_star = 0.0;
  double belief_at_s_star = 0.0;
  bool constancy_ok = false;
  bool belief_ok = false;
  bool passed() const { return constancy_ok && belief_ok; }
};

struct Condition2Verdict {
  std::size_t s_star_index = 0;
  SelfIdentity s_star;
  SelfIdentity mean_output;
  double tau = 0.0;
  double threshold = 0.0;
  double delta_s = 0.0;
  std::vector<Condition2Row> rows;
  bool holds = false;

  std::vector<MemoryId> failing_memories() const {
    std::vector<MemoryId> ids;
    for (const auto& r : rows)
      if (!r.passed()) ids.push_back(r.memory_id);
    return ids;
  }
};

// Nearest atom to a point; ties go to the lowest index.
inline std::size_t nearest_atom(const SelfIdentity& s, const IdentityMeasure& mu) {
  const auto d = atom_distances(s, mu);
  return static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
}

inline SelfIdentity mean_identity(std::span<const SelfIdentity> outputs) {
  Vector mean(outputs.front().dim(), 0.0);
  for (const auto& o : outputs)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += o.attributes[i];
  for (double& v : mean) v /= static_cast<double>(outputs.size());
  return {std::move(mean)};
}

// Stable recognition plus confident belief across a continuum: every memory
// lands within delta_s of the candidate s* and assigns it belief >= b.
inline Condition2Verdict check_condition_2(const AdaptedRecognizer& rec,
                                           std::span<const Memory> memories,
                                           const IdentityMeasure& mu, double tau,
                                           BeliefThreshold threshold, double delta_s) {
  if (memories.empty()) throw std::invalid_argument("condition 2 needs at least one memory");
  if (!(tau > 0.0)) throw std::invalid_argument("temperature tau must be positive");
  if (!(delta_s >= 0.0)) throw std::invalid_argument("delta_s must be nonnegative");
  mu.validate();

  std::vector<SelfIdentity> outputs;
  outputs.reserve(memories.size());
  for (const auto& m : memories) outputs.push_back(recognize(rec, m));

  Condition2Verdict v;
  v.tau = tau;
  v.threshold = threshold.value();
  v.delta_s = delta_s;
  v.mean_output = mean_identity(outputs);
  v.s_star_index = nearest_atom(v.mean_output, mu);
  v.s_star = mu.atoms[v.s_star_index];
  v.holds = true;
  for (std::size_t i = 0; i < memories.size(); ++i) {
    const auto d = atom_distances(outputs[i], mu);
    const auto belief = belief_from_distances(d, mu.weights, tau);
    Condition2Row row{memories[i].id, d[v.s_star_index], belief.probabilities[v.s_star_index]};
    row.constancy_ok = row.distance_to_s_star <= delta_s;
    row.belief_ok = row.belief_at_s_star >= threshold.value();
    v.holds = v.holds && row.passed();
    v.rows.push_back(std::move(row));
  }
  return v;
}

inline constexpr double kTauMin = 1e-6;
inline constexpr double kTauMax = 1e6;

// Smallest belief any memory assigns to the given atom at temperature tau.
inline double min_belief_at(std::span<const std::vector<double>> distances,
                            const IdentityMeasure& mu, std::size_t atom, double tau) {
  double lowest = 1.0;
  for (const auto& d : distances)
    lowest = std::min(lowest, belief_from_distances(d, mu.weights, tau).probabilities[atom]);
  return lowest;
}

// Largest tau in [1e-6, 1e6] keeping belief at s* >= b on every memory, found
// by bisection in log tau. nullopt when even the smallest tau fails.
inline std::optional<double> calibrate_tau(const AdaptedRecognizer& rec,
                                           std::span<const Memory> memories,
                                           const IdentityMeasure& mu, BeliefThreshold target,
                                           std::size_t s_star_index) {
  mu.validate();
  if (s_star_index >= mu.size()) throw std::out_of_range("s* atom index out of range");
  if (memories.empty()) throw std::invalid_argument("calibration needs at least one memory");

  std::vector<std::vector<double>> distances;
  distances.reserve(memories.size());
  for (const auto& m : memories) distances.push_back(atom_distances(recognize(rec, m), mu));
  const double b = target.value();
  auto feasible = [&](double tau) { return min_belief_at(distances, mu, s_star_index, tau) >= b; };

  if (!feasible(kTauMin)) return std::nullopt;
  if (feasible(kTauMax)) return kTauMax;

  // Bisection relies on min-belief falling as tau grows; confirm on a grid first.
  constexpr int kGrid = 48;
  double previous = 1.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double tau = kTauMin * std::pow(kTauMax / kTauMin, static_cast<double>(i) / kGrid);
    const double current = min_belief_at(distances, mu, s_star_index, tau);
    if (current > previous + 1e-12)
      throw std::runtime_error("min belief is not monotone in tau; bisection would be unreliable");
    previous = current;
  }

  double lo = std::log(kTauMin), hi = std::log(kTauMax);
  double best = kTauMin;
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double tau = std::exp(mid);
    if (feasible(tau)) {
      lo = mid;
      best = tau;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace selfid
