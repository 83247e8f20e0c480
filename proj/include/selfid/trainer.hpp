#pragma once

// Adapter training for the recognizer and end-to-end self verification.
//
// The loss is the mean squared Euclidean error between recognized and target
// identities. Only the adapter factors A and B are trained; W0 and the bias
// stay frozen. Each optimizer step accumulates grad_accum_steps micro-batches,
// averages them, clips the global (A, B) norm, then applies PlainGD or AdamW
// with decoupled weight decay.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "selfid/belief.hpp"
#include "selfid/continuum.hpp"
#include "selfid/random.hpp"
#include "selfid/recognition.hpp"

namespace selfid {

struct LabeledMemory {
  Memory memory;
  SelfIdentity target;
};

enum class OptimizerKind { PlainGD, AdamW };

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t epochs = 20;
  std::size_t batch_size = 5;
  std::size_t grad_accum_steps = 4;
  double clip_max_norm = 0.3;
  double weight_decay = 0.01;
  OptimizerKind optimizer = OptimizerKind::AdamW;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t eval_every_epochs = 2;
  std::uint64_t seed = 0;

  void validate() const {
    std::vector<std::string> bad;
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) bad.push_back("learning_rate must be >= 0");
    if (epochs == 0) bad.push_back("epochs must be positive");
    if (batch_size == 0) bad.push_back("batch_size must be positive");
    if (grad_accum_steps == 0) bad.push_back("grad_accum_steps must be positive");
    if (!(clip_max_norm > 0.0)) bad.push_back("clip_max_norm must be positive");
    if (!(weight_decay >= 0.0)) bad.push_back("weight_decay must be nonnegative");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) bad.push_back("adam_beta1 must be in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) bad.push_back("adam_beta2 must be in [0, 1)");
    if (!(adam_eps > 0.0)) bad.push_back("adam_eps must be positive");
    if (eval_every_epochs == 0) bad.push_back("eval_every_epochs must be positive");
    if (!bad.empty()) {
      std::string msg = "invalid training config:";
      for (const auto& b : bad) msg += " " + b + ";";
      throw std::invalid_argument(msg);
    }
  }
};

inline constexpr double kConvergenceUpdateNorm = 1e-8;

struct AdapterGradients {
  Matrix a;
  Matrix b;

  double norm() const { return std::sqrt(frobenius_sq(a) + frobenius_sq(b)); }
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t step, const std::string& quantity)
      : std::runtime_error("non-finite " + quantity + " at step " + std::to_string(step)),
        step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

namespace detail {

inline void check_target(const AdaptedRecognizer& rec, const LabeledMemory& item) {
  if (item.target.dim() != rec.output_dim()) {
    std::ostringstream os;
    os << "target for '" << item.memory.id << "' has dimension " << item.target.dim()
       << ", recognizer outputs " << rec.output_dim();
    throw std::invalid_argument(os.str());
  }
}

struct Example {
  Vector features;
  const Vector* target;
};

inline std::vector<Example> featurize(const AdaptedRecognizer& rec,
                                      std::span<const LabeledMemory> batch) {
  std::vector<Example> out;
  out.reserve(batch.size());
  for (const auto& item : batch) {
    check_target(rec, item);
    out.push_back({feature_vector(item.memory, rec.scaling), &item.target.attributes});
  }
  return out;
}

template <typename Range>
double loss_of(const AdaptedRecognizer& rec, const Range& examples) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Example& ex : examples) {
    const Vector y = recognize_features(rec, ex.features);
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = y[i] - (*ex.target)[i];
      sq += r * r;
    }
    total += sq;
    ++count;
  }
  return total / static_cast<double>(count);
}

// dL/dA = s G B^T, dL/dB = s A^T G with G = (2/N) sum_i r_i x_i^T.
template <typename Range>
std::pair<AdapterGradients, double> loss_and_gradients(const AdaptedRecognizer& rec,
                                                       const Range& examples) {
  const std::size_t n = rec.output_dim(), k = rec.input_dim();
  Matrix g(n, k);
  double total = 0.0;
  std::size_t count = 0;
  for (const Example& ex : examples) {
    const Vector y = recognize_features(rec, ex.features);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (*ex.target)[i];
      total += r * r;
      for (std::size_t j = 0; j < k; ++j) g(i, j) += r * ex.features[j];
    }
    ++count;
  }
  const double inv = 2.0 / static_cast<double>(count);
  for (double& v : g.flat()) v *= inv;
  const double s = rec.adapter_scale();
  AdapterGradients grads{matmul(g, transpose(rec.adapter_b)), matmul(transpose(rec.adapter_a), g)};
  for (double& v : grads.a.flat()) v *= s;
  for (double& v : grads.b.flat()) v *= s;
  return {std::move(grads), total / static_cast<double>(count)};
}

}  // namespace detail

inline double loss(const AdaptedRecognizer& rec, std::span<const LabeledMemory> batch) {
  if (batch.empty()) throw std::invalid_argument("loss over an empty batch");
  return detail::loss_of(rec, detail::featurize(rec, batch));
}

inline AdapterGradients gradients(const AdaptedRecognizer& rec,
                                  std::span<const LabeledMemory> batch) {
  if (batch.empty()) throw std::invalid_argument("gradients over an empty batch");
  return detail::loss_and_gradients(rec, detail::featurize(rec, batch)).first;
}

// Rescales in place so the joint norm is at most max_norm; returns the norm
// before clipping. Gradients already within the cap are left untouched.
inline double clip_global_norm(AdapterGradients& g, double max_norm) {
  const double norm = g.norm();
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& v : g.a.flat()) v *= scale;
    for (double& v : g.b.flat()) v *= scale;
  }
  return norm;
}

// Optimizer state for the two adapter factors.
class AdapterOptimizer {
 public:
  AdapterOptimizer(const TrainConfig& cfg, const AdaptedRecognizer& rec)
      : cfg_(cfg),
        m_a_(rec.adapter_a.rows(), rec.adapter_a.cols()),
        v_a_(rec.adapter_a.rows(), rec.adapter_a.cols()),
        m_b_(rec.adapter_b.rows(), rec.adapter_b.cols()),
        v_b_(rec.adapter_b.rows(), rec.adapter_b.cols()) {}

  // Applies one update and returns its norm over (A, B).
  double step(AdaptedRecognizer& rec, const AdapterGradients& g) {
    ++t_;
    double update_sq = 0.0;
    update_sq += apply(rec.adapter_a, g.a, m_a_, v_a_);
    update_sq += apply(rec.adapter_b, g.b, m_b_, v_b_);
    return std::sqrt(update_sq);
  }

 private:
  double apply(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v) {
    const double lr = cfg_.learning_rate;
    const double decay = 1.0 - lr * cfg_.weight_decay;
    double update_sq = 0.0;
    auto p = param.flat();
    auto gr = grad.flat();
    if (cfg_.optimizer == OptimizerKind::PlainGD) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double before = p[i];
        p[i] = p[i] * decay - lr * gr[i];
        update_sq += (p[i] - before) * (p[i] - before);
      }
      return update_sq;
    }
    const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    auto mm = m.flat();
    auto vv = v.flat();
    for (std::size_t i = 0; i < p.size(); ++i) {
      mm[i] = b1 * mm[i] + (1.0 - b1) * gr[i];
      vv[i] = b2 * vv[i] + (1.0 - b2) * gr[i] * gr[i];
      const double m_hat = mm[i] / bias1;
      const double v_hat = vv[i] / bias2;
      const double before = p[i];
      p[i] = p[i] * decay - lr * m_hat / (std::sqrt(v_hat) + cfg_.adam_eps);
      update_sq += (p[i] - before) * (p[i] - before);
    }
    return update_sq;
  }

  TrainConfig cfg_;
  std::size_t t_ = 0;
  Matrix m_a_, v_a_, m_b_, v_b_;
};

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  double grad_norm_preclip = 0.0;
  double update_norm = 0.0;
  double param_norm = 0.0;  // joint (A, B) norm after the update
};

struct Checkpoint {
  std::size_t epoch = 0;
  AdaptedRecognizer recognizer;
};

struct TrainingTrace {
  std::vector<StepRecord> steps;
  std::vector<double> epoch_mean_loss;
  std::vector<Checkpoint> checkpoints;
  std::optional<std::size_t> convergence_step;
  double initial_loss = 0.0;  // full-data loss before training
  double final_loss = 0.0;    // full-data loss after training
};

struct TrainResult {
  AdaptedRecognizer recognizer;
  TrainingTrace trace;
};

inline TrainResult train(const AdaptedRecognizer& initial, std::span<const LabeledMemory> data,
                         const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("training data is empty");
  cfg.validate();
  initial.validate();

  const auto examples = detail::featurize(initial, data);
  TrainResult result{initial, {}};
  AdaptedRecognizer& rec = result.recognizer;
  TrainingTrace& trace = result.trace;
  AdapterOptimizer optimizer(cfg, rec);
  trace.initial_loss = detail::loss_of(rec, examples);

  std::size_t step = 0;
  std::vector<detail::Example> micro;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = seeded_permutation(examples.size(), mix_seed(cfg.seed, epoch));
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;

    for (std::size_t pos = 0; pos < order.size();) {
      // One optimizer step: up to grad_accum_steps micro-batches.
      AdapterGradients accum{Matrix(rec.adapter_a.rows(), rec.adapter_a.cols()),
                             Matrix(rec.adapter_b.rows(), rec.adapter_b.cols())};
      double group_loss = 0.0;
      std::size_t micro_count = 0;
      for (; micro_count < cfg.grad_accum_steps && pos < order.size(); ++micro_count) {
        micro.clear();
        for (std::size_t i = 0; i < cfg.batch_size && pos < order.size(); ++i, ++pos)
          micro.push_back(examples[order[pos]]);
        auto [g, l] = detail::loss_and_gradients(rec, micro);
        for (std::size_t i = 0; i < accum.a.size(); ++i) accum.a.flat()[i] += g.a.flat()[i];
        for (std::size_t i = 0; i < accum.b.size(); ++i) accum.b.flat()[i] += g.b.flat()[i];
        group_loss += l;
      }
      ++step;
      const double inv = 1.0 / static_cast<double>(micro_count);
      for (double& v : accum.a.flat()) v *= inv;
      for (double& v : accum.b.flat()) v *= inv;
      group_loss *= inv;

      if (!std::isfinite(group_loss)) throw TrainingDiverged(step, "loss");
      if (!all_finite(accum.a.flat()) || !all_finite(accum.b.flat()))
        throw TrainingDiverged(step, "gradient");

      StepRecord rec_step{step, epoch, group_loss, clip_global_norm(accum, cfg.clip_max_norm)};
      if (!std::isfinite(rec_step.grad_norm_preclip)) throw TrainingDiverged(step, "gradient norm");
      rec_step.update_norm = optimizer.step(rec, accum);
      if (!all_finite(rec.adapter_a.flat()) || !all_finite(rec.adapter_b.flat()))
        throw TrainingDiverged(step, "parameter");
      rec_step.param_norm = std::sqrt(frobenius_sq(rec.adapter_a) + frobenius_sq(rec.adapter_b));
      if (!trace.convergence_step && rec_step.update_norm < kConvergenceUpdateNorm)
        trace.convergence_step = step;
      trace.steps.push_back(rec_step);
      epoch_loss += group_loss;
      ++epoch_steps;
    }

    trace.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(epoch_steps));
    if (epoch % cfg.eval_every_epochs == 0) trace.checkpoints.push_back({epoch, rec});
  }
  trace.final_loss = detail::loss_of(rec, examples);
  return result;
}

struct SelfVerdict {
  ContinuumReport continuum;
  bool condition1 = false;
  // Evaluated on the largest component.
  Condition2Verdict condition2_detail;
  bool condition2 = false;
  std::optional<SelfIdentity> s_star;
  bool possesses_self = false;
};

// Condition 1 over all memories, condition 2 over the largest continuum; the
// agent possesses a self when both hold on one continuum covering everything.
inline SelfVerdict verify_self_possession(const AdaptedRecognizer& rec,
                                          std::span<const Memory> memories,
                                          const MemoryMetricConfig& metric_cfg, double epsilon,
                                          const IdentityMeasure& mu, double tau,
                                          BeliefThreshold threshold, double delta_s) {
  if (memories.empty()) throw std::invalid_argument("verification needs at least one memory");
  SelfVerdict v;
  v.continuum = check_condition_1(memories, metric_cfg, epsilon);
  v.condition1 = v.continuum.is_single_continuum;

  const auto& largest = v.continuum.components[v.continuum.largest_component_index()];
  std::vector<Memory> members;
  members.reserve(largest.size());
  std::size_t cursor = 0;
  for (const auto& m : memories)
    if (cursor < largest.size() && m.id == largest[cursor]) {
      members.push_back(m);
      ++cursor;
    }

  v.condition2_detail = check_condition_2(rec, members, mu, tau, threshold, delta_s);
  v.condition2 = v.condition2_detail.holds;
  if (v.condition2) v.s_star = v.condition2_detail.s_star;
  v.possesses_self = v.condition1 && v.condition2;
  return v;
}

}  // namespace selfid
