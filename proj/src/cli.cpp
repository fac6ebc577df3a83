#include "ppl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "ppl/experiment.hpp"
#include "ppl/version.hpp"

namespace ppl {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file");
  cmd->add_option("--set", opts.overrides,
                  "override a config key (key=value, repeatable)");
  cmd->add_option("--seed", opts.seed, "shorthand for --set train.seed=N");
}

Config load_config(const CommonOpts& opts) {
  Config cfg = opts.config_path.empty() ? Config::defaults()
                                        : Config::from_file(opts.config_path);
  cfg.apply_overrides(opts.overrides);
  if (opts.seed) cfg.set("train.seed", std::to_string(*opts.seed));
  return cfg;
}

// axis values: comma list, with a:b expanding to the inclusive integer range
std::vector<std::string> expand_axis_values(const std::string& key,
                                            const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const std::size_t colon = cell.find(':');
    if (colon == std::string::npos) {
      out.push_back(cell);
      continue;
    }
    try {
      std::size_t used = 0;
      const long lo = std::stol(cell.substr(0, colon), &used);
      const long hi = std::stol(cell.substr(colon + 1));
      if (lo > hi) throw std::invalid_argument("empty range");
      for (long v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
    } catch (const std::exception&) {
      throw ConfigError("axis '" + key + "': bad range '" + cell + "'");
    }
  }
  if (out.empty()) {
    throw ConfigError("axis '" + key + "' has no values");
  }
  return out;
}

std::vector<GridAxis> parse_axes(const std::vector<std::string>& specs) {
  std::vector<GridAxis> axes;
  for (const std::string& spec : specs) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("axis '" + spec + "' is not of the form key=v1,v2");
    }
    GridAxis axis;
    axis.key = spec.substr(0, eq);
    axis.values = expand_axis_values(axis.key, spec.substr(eq + 1));
    axes.push_back(std::move(axis));
  }
  return axes;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"phased progressive learning harness for imbalanced "
               "classification"};
  app.set_version_flag("--version", std::string("ppl ") + kVersion);
  app.require_subcommand(1);

  CommonOpts train_opts;
  std::string train_out;
  CLI::App* cmd_train =
      app.add_subcommand("train", "train one configuration");
  add_common(cmd_train, train_opts);
  cmd_train->add_option("--out", train_out, "output directory")->required();

  CommonOpts grid_opts;
  std::string grid_out;
  std::vector<std::string> axis_specs;
  int jobs = 1;
  CLI::App* cmd_grid = app.add_subcommand(
      "grid", "run the cartesian product of config axes");
  add_common(cmd_grid, grid_opts);
  cmd_grid->add_option("--axis", axis_specs,
                       "grid axis key=v1,v2 or key=a:b (repeatable; the key "
                       "'method' selects baseline presets)");
  cmd_grid->add_option("--out", grid_out, "output directory");
  cmd_grid->add_option("--jobs", jobs, "concurrent cells")
      ->check(CLI::PositiveNumber);

  CommonOpts sched_opts;
  std::string sched_out;
  CLI::App* cmd_sched = app.add_subcommand(
      "schedule-dump", "emit epoch,alpha,q,lambda0,lambda1 as CSV");
  add_common(cmd_sched, sched_opts);
  cmd_sched->add_option("--out", sched_out, "output file (default stdout)");

  CommonOpts check_opts;
  int check_cases = 1000;
  bool corrupt = false;
  CLI::App* cmd_check = app.add_subcommand(
      "loss-check", "finite-difference audit of the loss gradients");
  add_common(cmd_check, check_opts);
  cmd_check->add_option("--cases", check_cases, "random cases per variant")
      ->check(CLI::PositiveNumber);
  cmd_check->add_flag("--corrupt", corrupt,
                      "perturb the analytic gradient (audit self-test)");

  CommonOpts eval_opts;
  std::string model_path;
  std::string eval_out;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "evaluate a saved model on the config data");
  add_common(cmd_eval, eval_opts);
  cmd_eval->add_option("--model", model_path, "model.json path")->required();
  cmd_eval->add_option("--out", eval_out, "output file (default stdout)");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  std::string prog = "ppl";
  argv.push_back(prog.data());
  for (std::string& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << app.version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (cmd_train->parsed()) {
      const Config cfg = load_config(train_opts);
      const TrainResult res =
          run_single(cfg, std::filesystem::path(train_out));
      const EpochRow& last = res.record.final_row();
      out << "final overall " << last.eval.overall << ", macro "
          << last.eval.macro_avg << ", best " << res.record.best_overall
          << " @ epoch " << res.record.best_epoch << "\n";
      return kExitOk;
    }
    if (cmd_grid->parsed()) {
      const Config cfg = load_config(grid_opts);
      std::optional<std::filesystem::path> dir;
      if (!grid_out.empty()) dir = std::filesystem::path(grid_out);
      const GridOutput res = run_grid(cfg, parse_axes(axis_specs), dir, jobs);
      if (!dir) out << res.aggregate_csv;
      out << "grid: " << res.cells.size() << " cells, " << res.failures
          << " failed\n";
      return res.failures == 0 ? kExitOk : kExitNumerical;
    }
    if (cmd_sched->parsed()) {
      const Config cfg = load_config(sched_opts);
      const std::string csv = schedule_dump_csv(cfg);
      if (sched_out.empty()) {
        out << csv;
      } else {
        write_text(sched_out, csv);
      }
      return kExitOk;
    }
    if (cmd_check->parsed()) {
      const Config cfg = load_config(check_opts);
      const LossCheckResult res = loss_check(cfg, check_cases, corrupt);
      out << "loss-check: worst abs deviation " << res.worst_abs
          << ", worst tolerance ratio " << res.worst_ratio << " -> "
          << (res.pass ? "pass" : "FAIL") << "\n";
      return res.pass ? kExitOk : kExitNumerical;
    }
    if (cmd_eval->parsed()) {
      const Config cfg = load_config(eval_opts);
      const Model model = Model::load(model_path);
      const DataBundle data = data_from(cfg);
      const Evaluation ev = evaluate(model, data.val);
      const HmtAccuracy hmt = hmt_accuracy(
          hmt_split(data.train.histogram(),
                    hmt_from(cfg, data.train.histogram())),
          ev.per_class);
      std::string text;
      text += "overall = " + std::to_string(ev.overall) + "\n";
      text += "macro = " + std::to_string(ev.macro_avg) + "\n";
      text += "head = " + std::to_string(hmt.head) + "\n";
      text += "medium = " + std::to_string(hmt.medium) + "\n";
      text += "tail = " + std::to_string(hmt.tail) + "\n";
      if (eval_out.empty()) {
        out << text;
      } else {
        write_text(eval_out, text);
      }
      return kExitOk;
    }
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace ppl
