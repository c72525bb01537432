// src/train/trainer.cc

// Copyright 2026  MC-MixIT Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcmixit/train/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mcmixit/metrics.h"

namespace mcmixit {

namespace fs = std::filesystem;

namespace {

bool SilentSpan(std::span<const double> x) {
  return Energy(x) <= kZeroReferenceEnergyPerSample * static_cast<double>(x.size());
}

// Removes LOCK on scope exit, including during exception unwinding.
class LockFile {
 public:
  explicit LockFile(const std::string& path) : path_(path) {
    if (fs::exists(path_)) {
      throw TrainingError("run directory is locked by another run: " + path_);
    }
    std::ofstream f(path_);
    if (!f) throw TrainingError("cannot create lock file: " + path_);
    f << "locked\n";
  }
  ~LockFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string path_;
};

std::string MetricsLine(const StepMetrics& m) {
  nlohmann::json rec;
  rec["step"] = m.step;
  rec["loss"] = m.loss;
  if (std::isfinite(m.supervised_loss)) rec["sup_loss"] = m.supervised_loss;
  if (std::isfinite(m.unsupervised_loss)) rec["unsup_loss"] = m.unsupervised_loss;
  rec["grad_norm"] = m.grad_norm;
  rec["wall_ms"] = m.wall_ms;
  return rec.dump();
}

}  // namespace

void TrainConfig::Check() const {
  if (!(learning_rate > 0.0)) throw TrainingError("train config: learning_rate must be > 0");
  if (batch_size < 1) throw TrainingError("train config: batch_size must be >= 1");
  if (steps < 1) throw TrainingError("train config: steps must be >= 1");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0) {
    throw TrainingError("train config: Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw TrainingError("train config: adam_eps must be > 0");
  if (semi_mix_ratio < 0.0 || semi_mix_ratio > 1.0) {
    throw TrainingError("train config: semi_mix_ratio must lie in [0, 1]");
  }
  if (precision != 64) {
    throw TrainingError(
        "train config: precision 64 is the only supported value; 32-bit mode would break the "
        "reproducibility contract");
  }
  if (mode == Mode::kSupervised && supervised_kind == ExampleKind::kUnsupervisedMom) {
    throw TrainingError("train config: supervised mode needs a supervised example kind");
  }
}

const char* TrainModeName(TrainConfig::Mode mode) {
  switch (mode) {
    case TrainConfig::Mode::kSupervised: return "supervised";
    case TrainConfig::Mode::kUnsupervised: return "unsupervised";
    case TrainConfig::Mode::kSemi: return "semi";
  }
  throw TrainingError("unknown train mode");
}

TrainConfig::Mode ParseTrainMode(const std::string& name) {
  if (name == "supervised") return TrainConfig::Mode::kSupervised;
  if (name == "unsupervised") return TrainConfig::Mode::kUnsupervised;
  if (name == "semi") return TrainConfig::Mode::kSemi;
  throw TrainingError("unknown train mode: " + name);
}

ad::Tensor AssignmentLossGraph(const ForwardResult& forward, const EstimateSet& references,
                               const MixingMatrix& matrix, const LossConfig& config) {
  const int n_refs = references.num_members();
  const int n_channels = references.num_channels();
  const int n_estimates = static_cast<int>(forward.waveforms.size());
  if (matrix.num_estimates() != n_estimates || matrix.num_refs != n_refs) {
    throw TrainingError("loss graph: matrix does not match shapes");
  }
  const int64_t t = references.num_frames();
  ad::Tensor total;
  for (int n = 0; n < n_refs; ++n) {
    for (int c = 0; c < n_channels; ++c) {
      auto ref_span = references.channel(n, c);
      if (SilentSpan(ref_span)) continue;
      ad::Tensor mix;
      for (int m = 0; m < n_estimates; ++m) {
        if (matrix.assignment[static_cast<size_t>(m)] != n) continue;
        const auto& w = forward.waveforms[static_cast<size_t>(m)][static_cast<size_t>(c)];
        mix = mix.defined() ? ad::Add(mix, w) : w;
      }
      if (!mix.defined()) {
        mix = ad::Tensor::Constant(std::vector<double>(static_cast<size_t>(t), 0.0), {t});
      }
      auto ref = ad::Tensor::Constant(std::vector<double>(ref_span.begin(), ref_span.end()), {t});
      const double ref_energy = Energy(ref_span);
      auto err_energy = ad::SumAll(ad::Square(ad::Sub(mix, ref)));
      auto term = ad::AddScalar(
          ad::ScalarMul(ad::Log10(ad::AddScalar(err_energy, config.tau * ref_energy)), 10.0),
          -10.0 * std::log10(ref_energy));
      total = total.defined() ? ad::Add(total, term) : term;
    }
  }
  if (!total.defined()) throw DegenerateReferenceError("loss graph: all references zero-energy");
  return total;
}

StepMetrics TrainStep(ModelParams& params, Adam& adam, const std::vector<TrainingExample>& batch,
                      const TrainConfig& config) {
  if (batch.empty()) throw TrainingError("train step: empty batch");
  const auto t0 = std::chrono::steady_clock::now();
  const LossConfig loss_config;
  ad::Tensor total;
  double sup_sum = 0.0;
  double unsup_sum = 0.0;
  int sup_count = 0;
  int unsup_count = 0;
  for (const auto& ex : batch) {
    auto fwd = Forward(ex.input, params);
    const EstimateSet estimates = fwd.ToEstimateSet();
    const bool unsupervised = ex.kind == ExampleKind::kUnsupervisedMom;
    AssignmentResult search;
    try {
      search = unsupervised ? McMixitLoss(ex.references, estimates, loss_config)
                            : PitLoss(ex.references, estimates, loss_config);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at example " + ex.id);
    }
    auto ex_loss = AssignmentLossGraph(fwd, ex.references, search.matrix, loss_config);
    const double value = ex_loss.item();
    if (!std::isfinite(value)) {
      throw NumericalError("train step: non-finite loss at example " + ex.id);
    }
    if (std::abs(value - search.loss) > 1e-6 * std::max(1.0, std::abs(search.loss))) {
      throw NumericalError("train step: loss graph diverged from search at example " + ex.id);
    }
    if (unsupervised) {
      unsup_sum += value;
      ++unsup_count;
    } else {
      sup_sum += value;
      ++sup_count;
    }
    total = total.defined() ? ad::Add(total, ex_loss) : ex_loss;
  }
  total = ad::ScalarMul(total, 1.0 / static_cast<double>(batch.size()));

  StepMetrics metrics;
  metrics.loss = total.item();
  if (sup_count > 0) metrics.supervised_loss = sup_sum / sup_count;
  if (unsup_count > 0) metrics.unsupervised_loss = unsup_sum / unsup_count;

  ad::Backward(total);
  double norm_sq = 0.0;
  for (const auto& [name, tensor] : params.NamedTensors()) {
    for (double g : tensor.grad()) norm_sq += g * g;
  }
  metrics.grad_norm = std::sqrt(norm_sq);
  if (!std::isfinite(metrics.grad_norm)) {
    throw NumericalError("train step: non-finite gradient (first example " + batch.front().id +
                         ")");
  }
  (void)config;
  adam.Step();
  metrics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return metrics;
}

std::string EvalReport::ToText() const {
  std::ostringstream os;
  os << "examples: " << examples << "  mics: " << mics << "\n";
  os << "mean SI-SNRi: " << mean_si_snri << " dB\n";
  for (size_t n = 0; n < per_source_si_snri.size(); ++n) {
    os << "S" << (n + 1) << " SI-SNRi: " << per_source_si_snri[n] << " dB (n=" << per_source_count[n]
       << ")\n";
  }
  os << "skipped references: " << skipped_references << "\n";
  os << "mean assignment loss: " << mean_assignment_loss << "\n";
  return os.str();
}

namespace {

struct EvalSums {
  double si_sum = 0.0;
  int64_t si_count = 0;
  double loss_sum = 0.0;
  int64_t loss_count = 0;
};

void EvalOneExample(const ModelParams& params, const TrainingExample& ex,
                    const EvalOptions& options, EvalReport& report, EvalSums& sums) {
  const int n_refs = ex.references.num_members();
  if (report.per_source_si_snri.empty()) {
    report.per_source_si_snri.assign(static_cast<size_t>(n_refs), 0.0);
    report.per_source_count.assign(static_cast<size_t>(n_refs), 0);
  }
  ad::NoGradGuard no_grad;
  const auto fwd = Forward(ex.input, params);
  const EstimateSet estimates = fwd.ToEstimateSet();
  const int n_estimates = estimates.num_members();

  try {
    const AssignmentResult search =
        ex.kind == ExampleKind::kUnsupervisedMom ? McMixitLoss(ex.references, estimates, options.loss)
                                                 : PitLoss(ex.references, estimates, options.loss);
    sums.loss_sum += search.loss;
    ++sums.loss_count;
    const auto mix0 = ex.input.channel(0);
    for (int n = 0; n < n_refs; ++n) {
      const auto ref0 = ex.references.channel(n, 0);
      double score = 0.0;
      try {
        const double base = SiSnr(ref0, mix0, options.loss);
        if (options.oracle_remix) {
          std::vector<double> remix(ref0.size(), 0.0);
          for (int m = 0; m < n_estimates; ++m) {
            if (search.matrix.assignment[static_cast<size_t>(m)] != n) continue;
            const auto est0 = estimates.channel(m, 0);
            for (size_t s = 0; s < remix.size(); ++s) remix[s] += est0[s];
          }
          score = SiSnr(ref0, remix, options.loss) - base;
        } else {
          double best = -std::numeric_limits<double>::infinity();
          for (int m = 0; m < n_estimates; ++m) {
            best = std::max(best, SiSnr(ref0, estimates.channel(m, 0), options.loss));
          }
          score = best - base;
        }
      } catch (const DegenerateReferenceError&) {
        ++report.skipped_references;
        continue;
      }
      sums.si_sum += score;
      ++sums.si_count;
      report.per_source_si_snri[static_cast<size_t>(n)] += score;
      ++report.per_source_count[static_cast<size_t>(n)];
    }
  } catch (const DegenerateReferenceError&) {
    report.skipped_references += n_refs;
  }
  ++report.examples;
}

EvalReport FinishEval(EvalReport report, const EvalSums& sums) {
  if (sums.si_count > 0) report.mean_si_snri = sums.si_sum / static_cast<double>(sums.si_count);
  for (size_t n = 0; n < report.per_source_si_snri.size(); ++n) {
    if (report.per_source_count[n] > 0) {
      report.per_source_si_snri[n] /= static_cast<double>(report.per_source_count[n]);
    }
  }
  if (sums.loss_count > 0) {
    report.mean_assignment_loss = sums.loss_sum / static_cast<double>(sums.loss_count);
  }
  return report;
}

}  // namespace

EvalReport Evaluate(const ModelParams& params, const DatasetStream& stream,
                    const EvalOptions& options) {
  EvalReport report;
  report.mics = stream.config().mics;
  EvalSums sums;
  for (int64_t i = 0; i < options.num_examples; ++i) {
    EvalOneExample(params, stream.Example(static_cast<uint64_t>(i)), options, report, sums);
  }
  return FinishEval(std::move(report), sums);
}

EvalReport EvaluateExamples(const ModelParams& params,
                            const std::vector<TrainingExample>& examples,
                            const EvalOptions& options) {
  EvalReport report;
  if (!examples.empty()) report.mics = examples.front().input.num_channels();
  EvalSums sums;
  for (const auto& ex : examples) EvalOneExample(params, ex, options, report, sums);
  return FinishEval(std::move(report), sums);
}

Trainer::Trainer(const ModelConfig& model_config, const TrainConfig& train_config,
                 const DataConfig& data_config, const TrainerOptions& options)
    : model_config_(model_config),
      train_config_(train_config),
      data_config_(data_config),
      options_(options),
      rng_(DeriveSeed(options.seed, 0x7121, 0)) {
  model_config_.Check();
  train_config_.Check();
  data_config_.Check();
  if (options_.run_dir.empty()) throw TrainingError("trainer: run_dir must be set");
  if (train_config_.mode != TrainConfig::Mode::kSupervised) {
    unsup_stream_.emplace(data_config_, ExampleKind::kUnsupervisedMom, Split::kTrain);
  }
  if (train_config_.mode != TrainConfig::Mode::kUnsupervised) {
    sup_stream_.emplace(data_config_, train_config_.supervised_kind, Split::kTrain);
  }
}

std::string Trainer::CheckpointPath() const {
  return (fs::path(options_.run_dir) / "checkpoint.bin").string();
}

std::string Trainer::MetricsPath() const {
  return (fs::path(options_.run_dir) / "metrics.jsonl").string();
}

std::vector<TrainingExample> Trainer::AssembleBatch() {
  int sup_n = 0;
  const int batch = train_config_.batch_size;
  switch (train_config_.mode) {
    case TrainConfig::Mode::kSupervised: sup_n = batch; break;
    case TrainConfig::Mode::kUnsupervised: sup_n = 0; break;
    case TrainConfig::Mode::kSemi:
      sup_n = static_cast<int>(std::llround(train_config_.semi_mix_ratio * batch));
      sup_n = std::min(std::max(sup_n, 0), batch);
      break;
  }
  std::vector<TrainingExample> out;
  out.reserve(static_cast<size_t>(batch));
  for (int i = 0; i < sup_n; ++i) out.push_back(sup_stream_->Example(sup_index_++));
  for (int i = sup_n; i < batch; ++i) out.push_back(unsup_stream_->Example(unsup_index_++));
  return out;
}

void Trainer::SaveState() {
  Checkpoint ck;
  ck.params = params_;
  ck.optimizer = adam_->Snapshot();
  TrainerSnapshot tr;
  tr.step = static_cast<uint64_t>(step_);
  tr.unsup_index = unsup_index_;
  tr.sup_index = sup_index_;
  tr.rng_state = rng_.state();
  ck.trainer = tr;
  SaveCheckpoint(CheckpointPath(), ck);
}

int64_t Trainer::Run() {
  std::error_code ec;
  fs::create_directories(options_.run_dir, ec);
  if (ec) throw TrainingError("cannot create run dir: " + options_.run_dir + ": " + ec.message());
  LockFile lock((fs::path(options_.run_dir) / "LOCK").string());

  const bool resuming = fs::exists(CheckpointPath());
  if (resuming) {
    Checkpoint ck = LoadCheckpoint(CheckpointPath());
    if (!(ck.params.config == model_config_)) {
      throw TrainingError("resume: checkpoint model config differs from the requested config");
    }
    if (!ck.optimizer || !ck.trainer) {
      throw TrainingError("resume: checkpoint lacks optimizer or trainer state");
    }
    params_ = std::move(ck.params);
    adam_.emplace(params_, train_config_.learning_rate, train_config_.adam_beta1,
                  train_config_.adam_beta2, train_config_.adam_eps);
    adam_->Restore(*ck.optimizer);
    step_ = static_cast<int64_t>(ck.trainer->step);
    unsup_index_ = ck.trainer->unsup_index;
    sup_index_ = ck.trainer->sup_index;
    rng_.set_state(ck.trainer->rng_state);
    // Drop metric records past the checkpoint so the resumed log continues
    // the same trajectory without duplicates.
    if (fs::exists(MetricsPath())) {
      std::ifstream in(MetricsPath());
      std::vector<std::string> kept;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("step")) continue;
        if (rec["step"].get<int64_t>() <= step_) kept.push_back(line);
      }
      in.close();
      std::ofstream out(MetricsPath(), std::ios::trunc);
      for (const auto& l : kept) out << l << "\n";
    }
  } else {
    params_ = InitParams(model_config_, options_.seed);
    if (!train_config_.warm_start_path.empty()) {
      WarmStart(params_, train_config_.warm_start_path);
    }
    adam_.emplace(params_, train_config_.learning_rate, train_config_.adam_beta1,
                  train_config_.adam_beta2, train_config_.adam_eps);
    std::ofstream(MetricsPath(), std::ios::trunc);
  }

  std::ofstream metrics(MetricsPath(), std::ios::app);
  if (!metrics) throw TrainingError("cannot open metrics log: " + MetricsPath());
  while (step_ < train_config_.steps) {
    auto batch = AssembleBatch();
    StepMetrics sm = TrainStep(params_, *adam_, batch, train_config_);
    sm.step = ++step_;
    metrics << MetricsLine(sm) << "\n";
    metrics.flush();
    if (options_.checkpoint_interval > 0 && step_ % options_.checkpoint_interval == 0) {
      SaveState();
    }
  }
  SaveState();
  return step_;
}

}  // namespace mcmixit
