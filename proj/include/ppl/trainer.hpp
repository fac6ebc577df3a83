#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppl/datagen.hpp"
#include "ppl/histogram.hpp"
#include "ppl/losses.hpp"
#include "ppl/metrics.hpp"
#include "ppl/mixer.hpp"
#include "ppl/model.hpp"
#include "ppl/rng.hpp"
#include "ppl/sampler.hpp"
#include "ppl/schedules.hpp"

namespace ppl {

// How the per-class loss weights n_y^(-alpha(E)) evolve:
//   none    weights stay 1
//   rw      fully re-weighted from epoch 0
//   drw     step to full re-weighting at the window end
//   crt_rw  drw plus frozen representation from the window end
//   ppw     progressive transition across the window
enum class WeightMode { None, Rw, Drw, CrtRw, Ppw };

// Same scheme for the sampling exponent q(E); pb runs the transition over
// the whole training range.
enum class SamplerMode { None, Rs, Drs, CrtRs, Pb, Pps };

enum class BatchMixMode { None, Mixup, Remix, PPmix };

const char* to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& name);
const char* to_string(SamplerMode mode);
SamplerMode sampler_mode_from_string(const std::string& name);
const char* to_string(BatchMixMode mode);
BatchMixMode batch_mix_mode_from_string(const std::string& name);

struct TrainConfig {
  int epochs = 200;
  int batch = 64;
  double lr = 0.1;
  std::vector<int> milestones = {160, 180};  // strictly increasing, < epochs
  double lr_decay = 0.1;
  Architecture model = Architecture::Linear;
  int hidden = 32;

  PhaseSchedule phase;  // shared transition window and transform
  WeightMode weight_mode = WeightMode::None;
  double weight_delta = 1.0;
  SamplerMode sampler_mode = SamplerMode::None;
  double sampler_delta = 1.0;
  BatchMixMode mix_mode = BatchMixMode::None;
  MixConfig mix;

  LossConfig loss;
  // resolves loss.margin_scale from the histogram when set
  std::optional<double> max_margin;

  std::optional<int> freeze_at;  // cRT: representation frozen from here on
  bool renormalize = true;       // divide each step by the batch weight sum
  std::optional<double> anneal_rho;  // lr /= rho per transition epoch
  std::uint64_t seed = 1;
};

void validate(const TrainConfig& cfg, const DataBundle& data);

// Weighting exponent alpha(E) implied by the weight mode.
double weight_alpha_at(const TrainConfig& cfg, int epoch);
// Sampling exponent q(E) implied by the sampler mode (1 when not sampling).
double sampler_q_at(const TrainConfig& cfg, int epoch);
// Epoch at which the representation freezes, if any (explicit or implied by
// the crt modes).
std::optional<int> freeze_epoch(const TrainConfig& cfg);

// Thrown when a training loss stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// A mini-batch of column features with (possibly mixed) targets. Unmixed
// rows use y2 == y1 and lambda_y == 1.
struct MixedTarget {
  int y1 = 0;
  int y2 = 0;
  double lambda_y = 1.0;
};

struct Batch {
  Eigen::MatrixXd x;  // in_dim x m
  std::vector<MixedTarget> targets;
};

struct Gradients {
  std::vector<Layer> layers;  // same shapes as the model
};

struct BatchResult {
  double loss = 0.0;
  Gradients grads;
};

// Loss and parameter gradients of the weighted batch objective
//   sum_i [ lam_i w(y1_i) loss(x_i, y1_i) + (1-lam_i) w(y2_i) loss(x_i, y2_i) ] / Z
// with Z the sum of the per-slot weights when renormalize is set, the batch
// size otherwise. Scaling all class weights by a constant then cancels from
// every update.
BatchResult forward_backward(const Model& model, const Batch& batch,
                             const LossConfig& loss_cfg,
                             const ClassHistogram& hist,
                             const Eigen::VectorXd& class_weights,
                             bool renormalize);

// Training-epoch presentation order as dataset row indices: a plain
// without-replacement shuffle when not sampling, otherwise a two-stage
// class-probability draw with exponent q.
std::vector<int> epoch_order(const Dataset& train, SamplerMode mode, double q,
                             Rng& rng);

struct TrainResult {
  Model model;
  RunRecord record;
};

TrainResult train(const TrainConfig& cfg, const DataBundle& data,
                  const HmtThresholds& hmt);

// Named baseline configurations (method presets). A preset fully determines
// the weight / sampler / mix modes and the loss family relative to the base
// config.
struct MethodSpec {
  WeightMode weight = WeightMode::None;
  SamplerMode sampler = SamplerMode::None;
  BatchMixMode mix = BatchMixMode::None;
  LossFamily loss = LossFamily::CrossEntropy;
};

const std::vector<std::string>& method_names();
MethodSpec method_spec(const std::string& name);
void apply_method(TrainConfig& cfg, const std::string& name);

struct MethodResult {
  std::string method;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> errors;  // one entry per seed; empty on success
  std::vector<double> overall;      // final-epoch metrics per seed
  std::vector<double> macro_avg;
  std::vector<double> head;
  std::vector<double> medium;
  std::vector<double> tail;
  SummaryStats overall_stats;
  SummaryStats macro_stats;
};

// Runs each method over the shared data with the shared seed list;
// per-run failures are recorded and do not abort the suite.
std::vector<MethodResult> run_baseline_suite(
    const TrainConfig& base, const DataBundle& data, const HmtThresholds& hmt,
    const std::vector<std::string>& methods,
    const std::vector<std::uint64_t>& seeds);

}  // namespace ppl
