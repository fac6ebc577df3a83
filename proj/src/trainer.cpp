#include "ppl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ppl {

const char* to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::None:
      return "none";
    case WeightMode::Rw:
      return "rw";
    case WeightMode::Drw:
      return "drw";
    case WeightMode::CrtRw:
      return "crt_rw";
    case WeightMode::Ppw:
      return "ppw";
  }
  return "none";
}

WeightMode weight_mode_from_string(const std::string& name) {
  if (name == "none") return WeightMode::None;
  if (name == "rw") return WeightMode::Rw;
  if (name == "drw") return WeightMode::Drw;
  if (name == "crt_rw") return WeightMode::CrtRw;
  if (name == "ppw") return WeightMode::Ppw;
  throw std::invalid_argument("unknown weight mode '" + name +
                              "' (expected none|rw|drw|crt_rw|ppw)");
}

const char* to_string(SamplerMode mode) {
  switch (mode) {
    case SamplerMode::None:
      return "none";
    case SamplerMode::Rs:
      return "rs";
    case SamplerMode::Drs:
      return "drs";
    case SamplerMode::CrtRs:
      return "crt_rs";
    case SamplerMode::Pb:
      return "pb";
    case SamplerMode::Pps:
      return "pps";
  }
  return "none";
}

SamplerMode sampler_mode_from_string(const std::string& name) {
  if (name == "none") return SamplerMode::None;
  if (name == "rs") return SamplerMode::Rs;
  if (name == "drs") return SamplerMode::Drs;
  if (name == "crt_rs") return SamplerMode::CrtRs;
  if (name == "pb") return SamplerMode::Pb;
  if (name == "pps") return SamplerMode::Pps;
  throw std::invalid_argument("unknown sampler mode '" + name +
                              "' (expected none|rs|drs|crt_rs|pb|pps)");
}

const char* to_string(BatchMixMode mode) {
  switch (mode) {
    case BatchMixMode::None:
      return "none";
    case BatchMixMode::Mixup:
      return "mixup";
    case BatchMixMode::Remix:
      return "remix";
    case BatchMixMode::PPmix:
      return "ppmix";
  }
  return "none";
}

BatchMixMode batch_mix_mode_from_string(const std::string& name) {
  if (name == "none") return BatchMixMode::None;
  if (name == "mixup") return BatchMixMode::Mixup;
  if (name == "remix") return BatchMixMode::Remix;
  if (name == "ppmix") return BatchMixMode::PPmix;
  throw std::invalid_argument("unknown mix mode '" + name +
                              "' (expected none|mixup|remix|ppmix)");
}

namespace {

// window implied by a schedule mode; step modes collapse to e0 == e1
PhaseSchedule mode_window(const TrainConfig& cfg, int step_at, int start,
                          int end, double delta) {
  PhaseSchedule s = cfg.phase;
  s.delta = delta;
  if (step_at >= 0) {
    s.e0 = s.e1 = step_at;
  } else {
    s.e0 = start;
    s.e1 = end;
  }
  return s;
}

}  // namespace

double weight_alpha_at(const TrainConfig& cfg, int epoch) {
  switch (cfg.weight_mode) {
    case WeightMode::None:
      return 0.0;
    case WeightMode::Rw:
      return alpha_at(mode_window(cfg, 0, 0, 0, cfg.weight_delta), epoch);
    case WeightMode::Drw:
    case WeightMode::CrtRw:
      return alpha_at(mode_window(cfg, cfg.phase.e1, 0, 0, cfg.weight_delta),
                      epoch);
    case WeightMode::Ppw: {
      PhaseSchedule s = cfg.phase;
      s.delta = cfg.weight_delta;
      return alpha_at(s, epoch);
    }
  }
  return 0.0;
}

double sampler_q_at(const TrainConfig& cfg, int epoch) {
  switch (cfg.sampler_mode) {
    case SamplerMode::None:
      return 1.0;
    case SamplerMode::Rs:
      return q_at(mode_window(cfg, 0, 0, 0, cfg.sampler_delta), epoch);
    case SamplerMode::Drs:
    case SamplerMode::CrtRs:
      return q_at(mode_window(cfg, cfg.phase.e1, 0, 0, cfg.sampler_delta),
                  epoch);
    case SamplerMode::Pb:
      return q_at(mode_window(cfg, -1, 0, cfg.epochs, cfg.sampler_delta),
                  epoch);
    case SamplerMode::Pps: {
      PhaseSchedule s = cfg.phase;
      s.delta = cfg.sampler_delta;
      return q_at(s, epoch);
    }
  }
  return 1.0;
}

std::optional<int> freeze_epoch(const TrainConfig& cfg) {
  if (cfg.freeze_at) return cfg.freeze_at;
  if (cfg.weight_mode == WeightMode::CrtRw ||
      cfg.sampler_mode == SamplerMode::CrtRs) {
    return cfg.phase.e1;
  }
  return std::nullopt;
}

void validate(const TrainConfig& cfg, const DataBundle& data) {
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.batch < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(cfg.lr_decay > 0.0)) {
    throw std::invalid_argument("lr decay factor must be > 0");
  }
  for (std::size_t i = 0; i < cfg.milestones.size(); ++i) {
    if (cfg.milestones[i] < 0 || cfg.milestones[i] >= cfg.epochs) {
      throw std::invalid_argument("milestones must lie in [0, epochs)");
    }
    if (i > 0 && cfg.milestones[i] <= cfg.milestones[i - 1]) {
      throw std::invalid_argument("milestones must be strictly increasing");
    }
  }
  validate(cfg.phase);
  validate(cfg.mix);
  validate(cfg.loss);
  if (cfg.weight_delta <= 0.0) {
    throw std::invalid_argument("weight delta must be > 0");
  }
  if (cfg.sampler_mode != SamplerMode::None &&
      !(cfg.sampler_delta > 0.0 && cfg.sampler_delta <= 1.0)) {
    throw std::invalid_argument("sampler delta must lie in (0,1]");
  }
  if (cfg.anneal_rho && !(*cfg.anneal_rho >= 1.0)) {
    throw std::invalid_argument("anneal rho must be >= 1");
  }
  if (freeze_epoch(cfg) && cfg.model != Architecture::Mlp) {
    throw std::invalid_argument(
        "freezing the representation requires the mlp model");
  }
  if (cfg.max_margin && *cfg.max_margin < 0.0) {
    throw std::invalid_argument("max margin must be >= 0");
  }
  if (data.train.dim() != data.val.dim() ||
      data.train.num_classes() != data.val.num_classes()) {
    throw std::invalid_argument("train and validation splits do not match");
  }
  if (cfg.hidden < 1 && cfg.model == Architecture::Mlp) {
    throw std::invalid_argument("hidden width must be >= 1");
  }
}

BatchResult forward_backward(const Model& model, const Batch& batch,
                             const LossConfig& loss_cfg,
                             const ClassHistogram& hist,
                             const Eigen::VectorXd& class_weights,
                             bool renormalize) {
  const auto m = static_cast<Eigen::Index>(batch.targets.size());
  if (m == 0) throw std::invalid_argument("empty batch");
  if (batch.x.cols() != m) {
    throw std::invalid_argument("batch feature/target count mismatch");
  }
  if (class_weights.size() != hist.num_classes()) {
    throw std::invalid_argument("class weight vector has the wrong length");
  }

  const bool is_mlp = model.architecture() == Architecture::Mlp;
  Eigen::MatrixXd hidden;  // post-activation, only for the mlp
  Eigen::MatrixXd logits;
  if (is_mlp) {
    hidden = ((model.layers()[0].weight * batch.x).colwise() +
              model.layers()[0].bias)
                 .array()
                 .tanh();
    logits =
        (model.layers()[1].weight * hidden).colwise() + model.layers()[1].bias;
  } else {
    logits =
        (model.layers()[0].weight * batch.x).colwise() + model.layers()[0].bias;
  }

  // per-slot dL/dz scaled by the term coefficients, plus the normalizer
  Eigen::MatrixXd dlogits(logits.rows(), m);
  double weighted_loss = 0.0;
  double weight_sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const MixedTarget& t = batch.targets[static_cast<std::size_t>(i)];
    const double c1 = t.lambda_y * class_weights(t.y1);
    const double c2 = (1.0 - t.lambda_y) * class_weights(t.y2);
    weight_sum += c1 + c2;
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(logits.rows());
    if (c1 != 0.0) {
      const LossOutput lo = loss_grad(loss_cfg, hist, logits.col(i), t.y1);
      weighted_loss += c1 * lo.value;
      dz += c1 * lo.grad;
    }
    if (c2 != 0.0) {
      const LossOutput lo = loss_grad(loss_cfg, hist, logits.col(i), t.y2);
      weighted_loss += c2 * lo.value;
      dz += c2 * lo.grad;
    }
    dlogits.col(i) = dz;
  }
  const double z =
      renormalize ? weight_sum : static_cast<double>(m);
  if (!(z > 0.0)) throw std::invalid_argument("batch weights sum to zero");
  dlogits /= z;

  BatchResult out;
  out.loss = weighted_loss / z;
  out.grads.layers.resize(model.layers().size());
  if (is_mlp) {
    out.grads.layers[1].weight = dlogits * hidden.transpose();
    out.grads.layers[1].bias = dlogits.rowwise().sum();
    const Eigen::MatrixXd dhidden =
        (model.layers()[1].weight.transpose() * dlogits).array() *
        (1.0 - hidden.array().square());
    out.grads.layers[0].weight = dhidden * batch.x.transpose();
    out.grads.layers[0].bias = dhidden.rowwise().sum();
  } else {
    out.grads.layers[0].weight = dlogits * batch.x.transpose();
    out.grads.layers[0].bias = dlogits.rowwise().sum();
  }
  return out;
}

std::vector<int> epoch_order(const Dataset& train, SamplerMode mode, double q,
                             Rng& rng) {
  std::vector<int> order;
  const auto n = static_cast<std::size_t>(train.size());
  if (mode == SamplerMode::None) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    return order;
  }
  order.reserve(n);
  for (const SampleRef& ref :
       draw_epoch(train.histogram(), q, train.size(), rng)) {
    order.push_back(train.rows_of_class(ref.class_index)[static_cast<std::size_t>(
        ref.within_class)]);
  }
  return order;
}

namespace {

Batch build_batch(const TrainConfig& cfg, const Dataset& train,
                  const std::vector<int>& order, std::size_t begin,
                  std::size_t end, int epoch, Rng& mix_rng) {
  const auto m = static_cast<Eigen::Index>(end - begin);
  Batch batch;
  batch.x.resize(train.dim(), m);
  batch.targets.resize(static_cast<std::size_t>(m));

  if (cfg.mix_mode == BatchMixMode::None) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const int row = order[begin + static_cast<std::size_t>(i)];
      batch.x.col(i) = train.features().row(row).transpose();
      const int y = train.labels()[static_cast<std::size_t>(row)];
      batch.targets[static_cast<std::size_t>(i)] = MixedTarget{y, y, 1.0};
    }
    return batch;
  }

  MixConfig mix = cfg.mix;
  switch (cfg.mix_mode) {
    case BatchMixMode::Mixup:
      mix.mode = MixMode::Mixup;
      break;
    case BatchMixMode::Remix:
      mix.mode = MixMode::Remix;
      break;
    default:
      mix.mode = MixMode::PPmix;
      break;
  }
  // pair the batch against a shuffled copy of itself
  std::vector<int> partner(static_cast<std::size_t>(m));
  std::iota(partner.begin(), partner.end(), 0);
  mix_rng.shuffle(partner);
  const ClassHistogram& hist = train.histogram();
  for (Eigen::Index i = 0; i < m; ++i) {
    const int row1 = order[begin + static_cast<std::size_t>(i)];
    const int row2 =
        order[begin + static_cast<std::size_t>(
                          partner[static_cast<std::size_t>(i)])];
    const int y1 = train.labels()[static_cast<std::size_t>(row1)];
    const int y2 = train.labels()[static_cast<std::size_t>(row2)];
    const double lambda_x = mix_rng.beta(mix.beta_param, mix.beta_param);
    const MixBounds bounds = mix_bounds(mix, cfg.phase, epoch, lambda_x);
    const double lambda_y = label_lambda(mix, lambda_x, hist.count(y1),
                                         hist.count(y2), bounds.lambda0,
                                         bounds.lambda1);
    batch.x.col(i) =
        lambda_x * train.features().row(row1).transpose() +
        (1.0 - lambda_x) * train.features().row(row2).transpose();
    batch.targets[static_cast<std::size_t>(i)] =
        MixedTarget{y1, y2, lambda_y};
  }
  return batch;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const DataBundle& data,
                  const HmtThresholds& hmt) {
  validate(cfg, data);
  const Dataset& tr = data.train;
  const ClassHistogram& hist = tr.histogram();

  LossConfig loss_cfg = cfg.loss;
  if (cfg.max_margin) {
    loss_cfg.margin_scale = margin_scale_for_max_margin(hist, *cfg.max_margin);
  }

  Rng init_rng(cfg.seed, 0);
  Rng sampler_rng(cfg.seed, 1);
  Rng mix_rng(cfg.seed, 2);

  Model model = cfg.model == Architecture::Mlp
                    ? Model::mlp(tr.dim(), cfg.hidden, tr.num_classes(),
                                 init_rng)
                    : Model::linear(tr.dim(), tr.num_classes(), init_rng);

  const std::optional<int> freeze = freeze_epoch(cfg);
  const std::vector<Bucket> buckets = hmt_split(hist, hmt);
  const auto n = static_cast<std::size_t>(tr.size());
  const auto batch_size = static_cast<std::size_t>(cfg.batch);

  double lr = cfg.lr;
  RunRecord record;
  record.rows.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (std::find(cfg.milestones.begin(), cfg.milestones.end(), epoch) !=
        cfg.milestones.end()) {
      lr *= cfg.lr_decay;
    }

    const double alpha = weight_alpha_at(cfg, epoch);
    Eigen::VectorXd weights(hist.num_classes());
    for (int j = 0; j < hist.num_classes(); ++j) {
      weights(j) = class_weight(hist, j, alpha);
    }

    const double q = sampler_q_at(cfg, epoch);
    const std::vector<int> order =
        epoch_order(tr, cfg.sampler_mode, q, sampler_rng);

    const bool frozen = freeze && epoch >= *freeze;
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < n; begin += batch_size) {
      const std::size_t end = std::min(begin + batch_size, n);
      const Batch batch =
          build_batch(cfg, tr, order, begin, end, epoch, mix_rng);
      BatchResult res;
      try {
        res = forward_backward(model, batch, loss_cfg, hist, weights,
                               cfg.renormalize);
      } catch (const std::domain_error& e) {
        // non-finite logits mean the parameters have already blown up
        throw DivergenceError(epoch, "training diverged at epoch " +
                                         std::to_string(epoch) + ": " +
                                         e.what());
      }
      if (!std::isfinite(res.loss)) {
        throw DivergenceError(epoch, "training diverged at epoch " +
                                         std::to_string(epoch) +
                                         ": non-finite loss");
      }
      const std::size_t first_layer = frozen ? model.layers().size() - 1 : 0;
      for (std::size_t l = first_layer; l < model.layers().size(); ++l) {
        model.layers()[l].weight -= lr * res.grads.layers[l].weight;
        model.layers()[l].bias -= lr * res.grads.layers[l].bias;
      }
      epoch_loss += res.loss;
      ++batches;
    }
    if (!model.all_finite()) {
      throw DivergenceError(epoch, "training diverged at epoch " +
                                       std::to_string(epoch) +
                                       ": non-finite parameters");
    }
    if (cfg.anneal_rho && epoch >= cfg.phase.e0 && epoch <= cfg.phase.e1) {
      lr /= *cfg.anneal_rho;
    }

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = epoch_loss / static_cast<double>(batches);
    row.lr = lr;
    row.alpha = alpha;
    row.q = q;
    row.eval = evaluate(model, data.val);
    row.hmt = hmt_accuracy(buckets, row.eval.per_class);
    record.rows.push_back(std::move(row));
  }

  record.best_epoch = 0;
  record.best_overall = record.rows.front().eval.overall;
  for (const EpochRow& row : record.rows) {
    if (row.eval.overall > record.best_overall) {
      record.best_overall = row.eval.overall;
      record.best_epoch = row.epoch;
    }
  }
  return TrainResult{std::move(model), std::move(record)};
}

namespace {

struct NamedMethod {
  const char* name;
  MethodSpec spec;
};

const NamedMethod kMethods[] = {
    {"ce", {WeightMode::None, SamplerMode::None, BatchMixMode::None,
            LossFamily::CrossEntropy}},
    {"rw", {WeightMode::Rw, SamplerMode::None, BatchMixMode::None,
            LossFamily::CrossEntropy}},
    {"drw", {WeightMode::Drw, SamplerMode::None, BatchMixMode::None,
             LossFamily::CrossEntropy}},
    {"crt_rw", {WeightMode::CrtRw, SamplerMode::None, BatchMixMode::None,
                LossFamily::CrossEntropy}},
    {"ppw", {WeightMode::Ppw, SamplerMode::None, BatchMixMode::None,
             LossFamily::CrossEntropy}},
    {"rs", {WeightMode::None, SamplerMode::Rs, BatchMixMode::None,
            LossFamily::CrossEntropy}},
    {"drs", {WeightMode::None, SamplerMode::Drs, BatchMixMode::None,
             LossFamily::CrossEntropy}},
    {"crt_rs", {WeightMode::None, SamplerMode::CrtRs, BatchMixMode::None,
                LossFamily::CrossEntropy}},
    {"pb", {WeightMode::None, SamplerMode::Pb, BatchMixMode::None,
            LossFamily::CrossEntropy}},
    {"pps", {WeightMode::None, SamplerMode::Pps, BatchMixMode::None,
             LossFamily::CrossEntropy}},
    {"mixup", {WeightMode::None, SamplerMode::None, BatchMixMode::Mixup,
               LossFamily::CrossEntropy}},
    {"remix", {WeightMode::None, SamplerMode::None, BatchMixMode::Remix,
               LossFamily::CrossEntropy}},
    {"ppmix", {WeightMode::None, SamplerMode::None, BatchMixMode::PPmix,
               LossFamily::CrossEntropy}},
    {"focal", {WeightMode::None, SamplerMode::None, BatchMixMode::None,
               LossFamily::Focal}},
    {"ldam", {WeightMode::None, SamplerMode::None, BatchMixMode::None,
              LossFamily::Ldam}},
    {"cri", {WeightMode::None, SamplerMode::None, BatchMixMode::None,
             LossFamily::Cri}},
    {"cri+ppw", {WeightMode::Ppw, SamplerMode::None, BatchMixMode::None,
                 LossFamily::Cri}},
    {"cri+ppw+ppmix", {WeightMode::Ppw, SamplerMode::None,
                       BatchMixMode::PPmix, LossFamily::Cri}},
};

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const NamedMethod& m : kMethods) v.emplace_back(m.name);
    return v;
  }();
  return names;
}

MethodSpec method_spec(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const NamedMethod& m : kMethods) {
    if (lower == m.name) return m.spec;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

void apply_method(TrainConfig& cfg, const std::string& name) {
  const MethodSpec spec = method_spec(name);
  cfg.weight_mode = spec.weight;
  cfg.sampler_mode = spec.sampler;
  cfg.mix_mode = spec.mix;
  cfg.loss.family = spec.loss;
}

std::vector<MethodResult> run_baseline_suite(
    const TrainConfig& base, const DataBundle& data, const HmtThresholds& hmt,
    const std::vector<std::string>& methods,
    const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  std::vector<MethodResult> results;
  results.reserve(methods.size());
  for (const std::string& method : methods) {
    MethodResult r;
    r.method = method;
    TrainConfig cfg = base;
    apply_method(cfg, method);
    for (std::uint64_t seed : seeds) {
      cfg.seed = seed;
      r.seeds.push_back(seed);
      try {
        const TrainResult res = train(cfg, data, hmt);
        const EpochRow& last = res.record.final_row();
        r.errors.emplace_back();
        r.overall.push_back(last.eval.overall);
        r.macro_avg.push_back(last.eval.macro_avg);
        r.head.push_back(last.hmt.head);
        r.medium.push_back(last.hmt.medium);
        r.tail.push_back(last.hmt.tail);
      } catch (const std::exception& e) {
        r.errors.emplace_back(e.what());
      }
    }
    if (!r.overall.empty()) {
      r.overall_stats = aggregate(r.overall);
      r.macro_stats = aggregate(r.macro_avg);
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace ppl
