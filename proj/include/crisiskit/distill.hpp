#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crisiskit/adam.hpp"
#include "crisiskit/encoder.hpp"
#include "crisiskit/finetune.hpp"

namespace crisiskit {

struct TaskDistillConfig {
  double alpha = 0.5;        // soft-loss weight
  double temperature = 1.0;  // softening for the KL term
  double learning_rate = 2e-5;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;
  double min_improvement = 1e-4;
  std::uint64_t seed = 42;

  void validate() const {
    num::check(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0,1]");
    num::check(temperature > 0.0, "temperature must be positive");
    num::check(batch_size >= 1 && max_epochs >= 1, "config fields must be positive");
    num::check(patience < max_epochs, "patience must be below max epochs");
  }
};

struct GenericDistillConfig {
  PoolingMode pooling = PoolingMode::MeanPool;  // student side; teacher is always mean
  double learning_rate = 2e-4;
  int batch_size = 1024;
  int epochs = 1;
  double ema_factor = 0.98;
  std::uint64_t seed = 42;

  void validate() const {
    num::check(epochs >= 1, "epochs must be >= 1");
    num::check(batch_size >= 1, "batch size must be >= 1");
    num::check(ema_factor > 0.0 && ema_factor < 1.0, "ema factor must lie in (0,1)");
  }
};

/// Ordered (step, loss) pairs for one training run.
struct LossTrace {
  std::string tag;
  std::vector<std::pair<std::int64_t, double>> points;

  void append(std::int64_t step, double loss) {
    num::check(points.empty() || step > points.back().first,
               "loss trace steps must increase");
    num::check(std::isfinite(loss), "loss trace values must be finite");
    points.push_back({step, loss});
  }

  void to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "step,loss,tag\n";
    for (const auto& [step, loss] : points) out << step << ',' << loss << ',' << tag << "\n";
  }
};

struct TaskDistillResult {
  double best_val_f1 = 0;
  int best_epoch = 0;
  int epochs_run = 0;
  LossTrace trace;
};

/// Task-specific distillation: per batch,
///   loss = alpha * KL(teacher_logits, student_logits, T) +
///          (1 - alpha) * CE(student_logits, hard labels),
/// trained until validation macro F1 stops improving. The teacher is
/// frozen; teacher logits are recomputed per batch.
template <class Real>
TaskDistillResult distill_task(const Classifier<Real>& teacher, Classifier<Real>& student,
                               const TextDataset& ds, const Splits& splits,
                               const TaskDistillConfig& cfg) {
  cfg.validate();
  num::check(teacher.encoder.cfg.num_classes == student.encoder.cfg.num_classes,
             "teacher and student must share the class schema");
  num::check(teacher.encoder.cfg.vocab_size == student.encoder.cfg.vocab_size,
             "teacher and student must share one tokenizer");
  teacher.set_trainable(false);
  student.set_trainable(true);

  num::Adam<Real> opt(student.params(), {.lr = cfg.learning_rate});
  Rng order_rng = named_stream(cfg.seed, "batch-order");
  EarlyStopper stopper(cfg.patience, cfg.min_improvement);

  TaskDistillResult result;
  result.trace.tag = "task";
  std::vector<num::Tensor<Real>> best_params = snapshot(student.params());
  std::vector<size_t> order = splits.train;
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    for (size_t start = 0; start < order.size(); start += size_t(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + size_t(cfg.batch_size));
      std::span<const size_t> idx(order.data() + start, end - start);
      auto batch = gather_batch<Real>(ds, idx);
      std::vector<int> labels;
      for (size_t i : idx) labels.push_back(ds.labels[i]);

      auto teacher_logits = teacher.logits(batch);  // constant: teacher is frozen
      auto student_logits = student.logits(batch);
      auto soft = num::kl_distill_loss(teacher_logits->value, student_logits,
                                       cfg.temperature);
      auto hard = num::cross_entropy_loss(student_logits, labels, {});
      auto loss = num::blend(soft, hard, cfg.alpha);
      if (!std::isfinite(double(loss->value.data[0]))) throw std::runtime_error("diverged");

      opt.zero_grad();
      num::backward(loss);
      opt.step();
      result.trace.append(++step, double(loss->value.data[0]));
    }

    const double val_f1 = evaluate_macro_f1(student, ds, splits.val, cfg.batch_size);
    result.epochs_run = epoch;
    const bool stop = stopper.observe(val_f1);
    if (stopper.improved_last()) best_params = snapshot(student.params());
    if (stop) break;
  }
  restore(student.params(), best_params);
  result.best_val_f1 = stopper.best();
  result.best_epoch = stopper.best_epoch();
  return result;
}

struct GenericDistillResult {
  LossTrace trace;
  double initial_smoothed = 0;
  double final_smoothed = 0;
};

/// Generic distillation: minimize MSE between the downsampled mean-pooled
/// teacher embedding and the student's pooled embedding. D trains jointly
/// with the student; default is a single pass over the corpus.
template <class Real>
GenericDistillResult distill_generic(const EncoderModel<Real>& teacher,
                                     EncoderModel<Real>& student,
                                     DownsampleProjection<Real>& projection,
                                     const TextDataset& corpus,
                                     const GenericDistillConfig& cfg) {
  cfg.validate();
  if (corpus.size() == 0) throw std::runtime_error("empty corpus");
  num::check(projection.weight->value.shape[0] == teacher.cfg.hidden_size &&
                 projection.weight->value.shape[1] == student.cfg.hidden_size,
             "projection shape must map teacher width to student width");
  num::check(teacher.cfg.vocab_size == student.cfg.vocab_size,
             "teacher and student must share one tokenizer");
  teacher.set_trainable(false);
  student.set_trainable(true);

  std::vector<num::NodePtr<Real>> params = student.params();
  params.push_back(projection.weight);
  params.push_back(projection.bias);
  num::Adam<Real> opt(params, {.lr = cfg.learning_rate});
  Rng order_rng = named_stream(cfg.seed, "batch-order");

  GenericDistillResult result;
  result.trace.tag = std::string("generic-") + to_string(cfg.pooling);
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  double ema = 0;
  bool ema_started = false;
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    for (size_t start = 0; start < order.size(); start += size_t(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + size_t(cfg.batch_size));
      std::span<const size_t> idx(order.data() + start, end - start);
      auto batch = gather_batch<Real>(corpus, idx);
      const auto mask = batch.template mask_tensor<Real>();

      auto teacher_pooled = num::mean_pool(teacher.forward(batch), mask);
      auto target = projection.project(teacher_pooled);
      auto student_pooled = pool(student.forward(batch), mask, cfg.pooling);
      auto loss = num::mse_loss(target, student_pooled);
      if (!std::isfinite(double(loss->value.data[0]))) throw std::runtime_error("diverged");

      opt.zero_grad();
      num::backward(loss);
      opt.step();

      const double l = double(loss->value.data[0]);
      if (!ema_started) {
        ema = l;
        ema_started = true;
        result.initial_smoothed = ema;
      } else {
        ema = cfg.ema_factor * ema + (1.0 - cfg.ema_factor) * l;
      }
      result.trace.append(++step, l);
    }
  }
  result.final_smoothed = ema;
  return result;
}

struct PoolingComparison {
  double mean_pool_final_loss = 0;
  double cls_final_loss = 0;
  LossTrace mean_pool_trace;
  LossTrace cls_trace;
};

/// Trains two identically-initialized students, one per pooling mode, under
/// identical seeds, and reports the final smoothed losses side by side.
template <class Real>
PoolingComparison compare_pooling(const EncoderModel<Real>& teacher,
                                  const EncoderConfig& student_cfg,
                                  const TextDataset& corpus, GenericDistillConfig cfg) {
  PoolingComparison out;
  for (PoolingMode mode : {PoolingMode::MeanPool, PoolingMode::ClsToken}) {
    Rng init_rng = named_stream(cfg.seed, "student-init");
    EncoderModel<Real> student = EncoderModel<Real>::init(student_cfg, init_rng);
    Rng proj_rng = named_stream(cfg.seed, "projection-init");
    auto projection = DownsampleProjection<Real>::init(teacher.cfg.hidden_size,
                                                       student_cfg.hidden_size, proj_rng);
    cfg.pooling = mode;
    auto result = distill_generic(teacher, student, projection, corpus, cfg);
    if (mode == PoolingMode::MeanPool) {
      out.mean_pool_final_loss = result.final_smoothed;
      out.mean_pool_trace = std::move(result.trace);
    } else {
      out.cls_final_loss = result.final_smoothed;
      out.cls_trace = std::move(result.trace);
    }
  }
  return out;
}

}  // namespace crisiskit
