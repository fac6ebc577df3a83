#include "ppl/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "ppl/version.hpp"

namespace ppl {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << text;
}

}  // namespace

TrainConfig train_config_from(const Config& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.get_int("train.epochs");
  tc.batch = cfg.get_int("train.batch");
  tc.lr = cfg.get_double("train.lr");
  tc.milestones = cfg.get_int_list("train.milestones");
  tc.lr_decay = cfg.get_double("train.lr_decay");
  tc.model = architecture_from_string(cfg.get_string("train.model"));
  tc.hidden = cfg.get_int("train.hidden");

  tc.phase.e0 = cfg.get_int("phase.e0");
  tc.phase.e1 = cfg.get_int("phase.e1");
  tc.phase.delta = cfg.get_double("phase.delta");
  tc.phase.transform.form =
      transform_form_from_string(cfg.get_string("phase.kind"));
  tc.phase.transform.rho = cfg.get_double("phase.rho");

  tc.weight_mode = weight_mode_from_string(cfg.get_string("weight.mode"));
  tc.weight_delta = cfg.is_set("weight.delta") ? cfg.get_double("weight.delta")
                                               : tc.phase.delta;
  tc.sampler_mode = sampler_mode_from_string(cfg.get_string("sampler.mode"));
  tc.sampler_delta = cfg.is_set("sampler.delta")
                         ? cfg.get_double("sampler.delta")
                         : tc.phase.delta;
  tc.mix_mode = batch_mix_mode_from_string(cfg.get_string("mix.mode"));
  tc.mix.kappa = cfg.get_double("mix.kappa");
  tc.mix.tau = cfg.get_double("mix.tau");
  tc.mix.beta_param = cfg.get_double("mix.beta");

  tc.loss.family = loss_family_from_string(cfg.get_string("loss.family"));
  tc.loss.gamma = cfg.get_double("loss.gamma");
  tc.loss.threshold = cfg.get_double("loss.t");
  tc.loss.sigma = sigma_variant_from_string(cfg.get_string("loss.sigma"));
  tc.loss.focus_uses_margin = cfg.get_bool("loss.focus_margin");
  if (cfg.is_set("loss.s")) {
    tc.loss.margin_scale = cfg.get_double("loss.s");
    tc.max_margin = std::nullopt;
  } else {
    tc.max_margin = cfg.get_double("loss.max_margin");
  }

  tc.freeze_at = cfg.get_optional_int("train.freeze_at");
  tc.renormalize = cfg.get_bool("train.renorm");
  tc.anneal_rho = cfg.get_optional_double("train.anneal_rho");
  tc.seed = cfg.get_uint64("train.seed");
  return tc;
}

namespace {

DataBundle split_file_bundle(Dataset full, int val_per_class,
                             std::uint64_t seed) {
  if (val_per_class < 1) {
    throw ConfigError("data.val_per_class must be >= 1");
  }
  Rng rng(seed, 3);
  std::vector<char> to_val(static_cast<std::size_t>(full.size()), 0);
  for (int c = 0; c < full.num_classes(); ++c) {
    std::vector<int> rows = full.rows_of_class(c);
    if (static_cast<int>(rows.size()) <= val_per_class) {
      throw std::runtime_error(
          "class " + std::to_string(c) + " has only " +
          std::to_string(rows.size()) +
          " samples, not enough to carve data.val_per_class = " +
          std::to_string(val_per_class) + " and keep a train split");
    }
    rng.shuffle(rows);
    for (int i = 0; i < val_per_class; ++i) {
      to_val[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = 1;
    }
  }
  const auto take = [&](bool val, Split split) {
    std::int64_t n = 0;
    for (char f : to_val) n += (f != 0) == val;
    Eigen::MatrixXd x(n, full.dim());
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::int64_t r = 0;
    for (std::int64_t i = 0; i < full.size(); ++i) {
      if ((to_val[static_cast<std::size_t>(i)] != 0) != val) continue;
      x.row(r) = full.features().row(i);
      labels[static_cast<std::size_t>(r)] =
          full.labels()[static_cast<std::size_t>(i)];
      ++r;
    }
    return Dataset(std::move(x), std::move(labels), full.num_classes(), split);
  };
  Dataset train = take(false, Split::Train);
  Dataset val = take(true, Split::Validation);
  return DataBundle{std::move(train), std::move(val), Eigen::MatrixXd()};
}

}  // namespace

DataBundle data_from(const Config& cfg) {
  const std::string kind = cfg.get_string("data.kind");
  const auto seed = cfg.get_uint64("data.seed");
  if (kind == "file") {
    if (!cfg.is_set("data.path")) {
      throw ConfigError("data.kind = file requires data.path");
    }
    Dataset full = load_tabular(cfg.get_string("data.path"),
                                cfg.get_bool("data.header"));
    return split_file_bundle(std::move(full),
                             cfg.get_int("data.val_per_class"), seed);
  }
  if (kind != "synth") {
    throw ConfigError("config key 'data.kind' must be synth or file, got '" +
                      kind + "'");
  }
  ImbalanceProfile profile;
  profile.kind = profile_kind_from_string(cfg.get_string("data.profile"));
  profile.imbalance_factor = cfg.get_double("data.if");
  profile.n_max = cfg.get_int64("data.nmax");
  profile.num_classes = cfg.get_int("data.c");
  ClassHistogram counts = profile_counts(profile);
  DataBundle bundle = synth_gaussians(
      counts, cfg.get_int("data.dim"), cfg.get_double("data.sep"),
      cfg.get_double("data.noise"), cfg.get_int("data.val_per_class"), seed);
  const double qr = cfg.get_double("data.qr");
  if (qr != 1.0) {
    bundle.train = apply_qr(bundle.train, qr, seed + 0x9e37);
  }
  return bundle;
}

HmtThresholds hmt_from(const Config& cfg, const ClassHistogram& hist) {
  const auto n_max = static_cast<double>(hist.max_count());
  return HmtThresholds{cfg.get_double("metrics.head_frac") * n_max,
                       cfg.get_double("metrics.tail_frac") * n_max};
}

std::vector<std::pair<std::string, std::string>> method_patch(
    const std::string& method) {
  const MethodSpec spec = method_spec(method);
  return {{"weight.mode", to_string(spec.weight)},
          {"sampler.mode", to_string(spec.sampler)},
          {"mix.mode", to_string(spec.mix)},
          {"loss.family", to_string(spec.loss)}};
}

std::string epoch_csv(const RunRecord& record) {
  std::string out = "epoch,train_loss,lr,alpha,q,overall,macro,head,medium,tail";
  const auto c = record.rows.front().eval.per_class.size();
  for (Eigen::Index j = 0; j < c; ++j) {
    out += ",class_" + std::to_string(j);
  }
  out += "\n";
  for (const EpochRow& row : record.rows) {
    out += std::to_string(row.epoch);
    out += "," + fmt(row.train_loss);
    out += "," + fmt(row.lr);
    out += "," + fmt(row.alpha);
    out += "," + fmt(row.q);
    out += "," + fmt(row.eval.overall);
    out += "," + fmt(row.eval.macro_avg);
    out += "," + fmt(row.hmt.head);
    out += "," + fmt(row.hmt.medium);
    out += "," + fmt(row.hmt.tail);
    for (Eigen::Index j = 0; j < c; ++j) {
      out += "," + fmt(row.eval.per_class(j));
    }
    out += "\n";
  }
  return out;
}

std::string summary_text(const Config& cfg, const RunRecord& record) {
  const EpochRow& last = record.final_row();
  std::string out;
  out += "version = ";
  out += kVersion;
  out += "\n";
  out += "seed = " + cfg.get_string("train.seed") + "\n";
  out += "epochs = " + std::to_string(record.rows.size()) + "\n";
  out += "best_epoch = " + std::to_string(record.best_epoch) + "\n";
  out += "best_overall = " + fmt(record.best_overall) + "\n";
  out += "final_train_loss = " + fmt(last.train_loss) + "\n";
  out += "final_overall = " + fmt(last.eval.overall) + "\n";
  out += "final_macro = " + fmt(last.eval.macro_avg) + "\n";
  out += "final_head = " + fmt(last.hmt.head) + "\n";
  out += "final_medium = " + fmt(last.hmt.medium) + "\n";
  out += "final_tail = " + fmt(last.hmt.tail) + "\n";
  out += "final_per_class =";
  for (Eigen::Index j = 0; j < last.eval.per_class.size(); ++j) {
    out += (j == 0 ? " " : ",") + fmt(last.eval.per_class(j));
  }
  out += "\n";
  return out;
}

std::string schedule_dump_csv(const Config& cfg) {
  const TrainConfig tc = train_config_from(cfg);
  validate(tc.phase);
  if (tc.phase.delta > 1.0) {
    throw ConfigError(
        "schedule dump needs phase.delta <= 1 for the sampling exponent");
  }
  std::string out = "epoch,alpha,q,lambda0,lambda1\n";
  for (int e = 0; e <= tc.epochs; ++e) {
    const double a = alpha_at(tc.phase, e);
    const double q = q_at(tc.phase, e);
    const MixBounds b = mix_bounds_at(tc.phase, e, 0.5);
    out += std::to_string(e) + "," + fmt(a) + "," + fmt(q) + "," +
           fmt(b.lambda0) + "," + fmt(b.lambda1) + "\n";
  }
  return out;
}

TrainResult run_single(const Config& cfg,
                       const std::optional<std::filesystem::path>& out_dir) {
  const TrainConfig tc = train_config_from(cfg);
  const DataBundle data = data_from(cfg);
  const HmtThresholds hmt = hmt_from(cfg, data.train.histogram());
  TrainResult result = train(tc, data, hmt);
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_file(*out_dir / "config.resolved", cfg.resolved_text());
    write_file(*out_dir / "epochs.csv", epoch_csv(result.record));
    write_file(*out_dir / "summary.txt", summary_text(cfg, result.record));
    result.model.save((*out_dir / "model.json").string());
  }
  return result;
}

namespace {

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out += ok ? c : '-';
  }
  return out;
}

std::string csv_safe(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += (c == ',' || c == '\n' || c == '\r') ? ';' : c;
  }
  return out;
}

}  // namespace

GridOutput run_grid(const Config& base, const std::vector<GridAxis>& axes,
                    const std::optional<std::filesystem::path>& out_dir,
                    int jobs) {
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  for (const GridAxis& axis : axes) {
    if (axis.values.empty()) {
      throw ConfigError("grid axis '" + axis.key + "' has no values");
    }
    if (axis.key == "method") {
      for (const std::string& v : axis.values) method_patch(v);  // validates
    } else {
      base.raw(axis.key);  // validates the key exists
    }
  }

  std::size_t total = 1;
  for (const GridAxis& axis : axes) total *= axis.values.size();

  GridOutput out;
  out.cells.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    GridCell& cell = out.cells[i];
    cell.index = i;
    std::size_t rest = i;
    std::size_t radix = total;
    for (const GridAxis& axis : axes) {
      radix /= axis.values.size();
      const std::size_t pick = rest / radix;
      rest %= radix;
      cell.assignment.emplace_back(axis.key, axis.values[pick]);
    }
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "%04zu", i);
    cell.dir_name = prefix;
    for (const auto& [key, value] : cell.assignment) {
      cell.dir_name += "_" + sanitize(key) + "-" + sanitize(value);
    }
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      GridCell& cell = out.cells[i];
      try {
        Config cfg = base;
        for (const auto& [key, value] : cell.assignment) {
          if (key == "method") {
            for (const auto& [pk, pv] : method_patch(value)) cfg.set(pk, pv);
          } else {
            cfg.set(key, value);
          }
        }
        std::optional<std::filesystem::path> cell_dir;
        if (out_dir) cell_dir = *out_dir / "cells" / cell.dir_name;
        const TrainResult res = run_single(cfg, cell_dir);
        const EpochRow& last = res.record.final_row();
        cell.overall = last.eval.overall;
        cell.macro_avg = last.eval.macro_avg;
        cell.head = last.hmt.head;
        cell.medium = last.hmt.medium;
        cell.tail = last.hmt.tail;
        cell.best_epoch = res.record.best_epoch;
        cell.best_overall = res.record.best_overall;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  if (out_dir) std::filesystem::create_directories(*out_dir / "cells");
  if (jobs == 1 || total <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), total);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // per-cell table, in cell-index order
  std::string agg = "cell";
  for (const GridAxis& axis : axes) agg += "," + axis.key;
  agg += ",status,overall,macro,head,medium,tail,best_epoch,best_overall\n";
  for (const GridCell& cell : out.cells) {
    agg += cell.dir_name;
    for (const auto& [key, value] : cell.assignment) {
      agg += "," + csv_safe(value);
    }
    if (cell.error.empty()) {
      agg += ",ok," + fmt(cell.overall) + "," + fmt(cell.macro_avg) + "," +
             fmt(cell.head) + "," + fmt(cell.medium) + "," + fmt(cell.tail) +
             "," + std::to_string(cell.best_epoch) + "," +
             fmt(cell.best_overall);
    } else {
      agg += ",error:" + csv_safe(cell.error) + ",,,,,,,";
      ++out.failures;
    }
    agg += "\n";
  }
  out.aggregate_csv = std::move(agg);

  // mean/stddev over the train.seed axis, grouped by the remaining axes
  std::string mean = "group,n_seeds";
  for (const char* metric : {"overall", "macro", "head", "medium", "tail"}) {
    mean += std::string(",mean_") + metric + ",std_" + metric;
  }
  mean += "\n";
  std::map<std::string, std::vector<const GridCell*>> groups;
  std::vector<std::string> group_order;
  for (const GridCell& cell : out.cells) {
    std::string key;
    for (const auto& [k, v] : cell.assignment) {
      if (k == "train.seed") continue;
      if (!key.empty()) key += "__";
      key += k + "-" + sanitize(v);
    }
    if (key.empty()) key = "all";
    if (groups.find(key) == groups.end()) group_order.push_back(key);
    groups[key].push_back(&cell);
  }
  for (const std::string& key : group_order) {
    std::vector<double> overall;
    std::vector<double> macro;
    std::vector<double> head;
    std::vector<double> medium;
    std::vector<double> tail;
    for (const GridCell* cell : groups[key]) {
      if (!cell->error.empty()) continue;
      overall.push_back(cell->overall);
      macro.push_back(cell->macro_avg);
      head.push_back(cell->head);
      medium.push_back(cell->medium);
      tail.push_back(cell->tail);
    }
    mean += key + "," + std::to_string(overall.size());
    if (overall.empty()) {
      mean += ",,,,,,,,,,";
    } else {
      for (const std::vector<double>* v :
           {&overall, &macro, &head, &medium, &tail}) {
        const SummaryStats s = aggregate(*v);
        mean += "," + fmt(s.mean) + "," + fmt(s.stddev);
      }
    }
    mean += "\n";
  }
  out.mean_csv = std::move(mean);

  if (out_dir) {
    write_file(*out_dir / "aggregate.csv", out.aggregate_csv);
    write_file(*out_dir / "aggregate_mean.csv", out.mean_csv);
  }
  return out;
}

LossCheckResult loss_check(const Config& cfg, int cases, bool corrupt) {
  const TrainConfig tc = train_config_from(cfg);
  LossConfig loss_cfg = tc.loss;
  std::vector<std::int64_t> counts = {500, 150, 40, 12, 5};
  const ClassHistogram hist(std::move(counts));
  if (tc.max_margin) {
    loss_cfg.margin_scale = margin_scale_for_max_margin(hist, *tc.max_margin);
  }

  std::vector<SigmaVariant> variants = {loss_cfg.sigma};
  if (loss_cfg.family == LossFamily::Cri) {
    variants = {SigmaVariant::Zero, SigmaVariant::Constant,
                SigmaVariant::Linear, SigmaVariant::None};
  }

  Rng rng(cfg.get_uint64("train.seed"), 7);
  const int c = hist.num_classes();
  const double h = 1e-5;
  LossCheckResult result;
  result.pass = true;
  for (const SigmaVariant variant : variants) {
    LossConfig lc = loss_cfg;
    lc.sigma = variant;
    int done = 0;
    while (done < cases) {
      Eigen::VectorXd z(c);
      for (int j = 0; j < c; ++j) z(j) = 3.0 * rng.normal();
      const int y = static_cast<int>(rng.uniform_index(
          static_cast<std::uint64_t>(c)));
      if (lc.family == LossFamily::Cri && lc.sigma != SigmaVariant::None) {
        const double margin = ldam_margin(hist, y, lc.margin_scale);
        if (std::abs(softmax_prob(z, y, margin) - lc.threshold) < 1e-3) {
          continue;  // keep away from the threshold kink
        }
      }
      ++done;
      LossOutput lo = loss_grad(lc, hist, z, y);
      if (corrupt) lo.grad(0) += 1e-3;
      for (int j = 0; j < c; ++j) {
        Eigen::VectorXd zp = z;
        Eigen::VectorXd zm = z;
        zp(j) += h;
        zm(j) -= h;
        const double fd = (loss_forward(lc, hist, zp, y) -
                           loss_forward(lc, hist, zm, y)) /
                          (2.0 * h);
        const double dev = std::abs(lo.grad(j) - fd);
        const double tol = 1e-6 + 1e-4 * std::abs(fd);
        result.worst_abs = std::max(result.worst_abs, dev);
        result.worst_ratio = std::max(result.worst_ratio, dev / tol);
      }
    }
  }
  result.pass = result.worst_ratio <= 1.0;
  return result;
}

}  // namespace ppl
