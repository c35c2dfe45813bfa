// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/cli.hpp"

#include <CLI11.hpp>

#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "aadit/binary_io.hpp"
#include "aadit/gradcheck.hpp"

namespace aadit {

namespace fs = std::filesystem;

std::string RunConfig::resolved_dataset_path() const {
  return dataset_path.empty() ? out_dir + "/dataset.aadd" : dataset_path;
}

void RunConfig::write(KeyValueWriter& out) const {
  data.write(out);
  train.write(out);
  probe.write(out);
  out.add("run.dataset", dataset_path);
  out.add("run.out", out_dir);
  out.add("run.checkpoint", checkpoint_path);
  out.add("run.jobs", jobs);
}

void RunConfig::read(const KeyValueReader& in) {
  data.read(in);
  train.read(in);
  probe.read(in);
  in.read("run.dataset", dataset_path);
  in.read("run.out", out_dir);
  in.read("run.checkpoint", checkpoint_path);
  in.read("run.jobs", jobs);
  const std::vector<std::string> unknown = in.unused_keys();
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& key : unknown) msg += " " + key;
    throw ConfigError(msg);
  }
}

std::string RunConfig::canonical() const {
  KeyValueWriter out;
  write(out);
  return out.str();
}

namespace {

// Command-line flags that map one-to-one onto config keys.
class FlagTable {
 public:
  explicit FlagTable(CLI::App* app) : app_(app) {}

  void add(const std::string& flag, const std::string& key, const std::string& help) {
    values_.emplace_back();
    CLI::Option* opt = app_->add_option(flag, values_.back(), help);
    entries_.push_back({opt, key, &values_.back()});
  }

  KeyValueReader overrides() const {
    KeyValueReader reader;
    for (const Entry& e : entries_) {
      if (e.option->count() > 0) reader.set(e.key, *e.value);
    }
    return reader;
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::string key;
    std::string* value;
  };
  CLI::App* app_;
  std::deque<std::string> values_;
  std::vector<Entry> entries_;
};

struct Command {
  CLI::App* app = nullptr;
  std::unique_ptr<FlagTable> flags;
  std::string config_path;
};

Command make_command(CLI::App& root, const std::string& name, const std::string& help,
                     const std::string& seed_key) {
  Command cmd;
  cmd.app = root.add_subcommand(name, help);
  cmd.flags = std::make_unique<FlagTable>(cmd.app);
  cmd.app->add_option("--config", cmd.config_path, "key=value config file");
  cmd.flags->add("--seed", seed_key, "random seed");
  cmd.flags->add("--out", "run.out", "output directory");
  cmd.flags->add("--jobs", "run.jobs", "worker threads for evaluation");
  return cmd;
}

RunConfig resolve(const Command& cmd) {
  RunConfig config;
  if (!cmd.config_path.empty()) {
    const std::string text = read_file(cmd.config_path);
    config.read(KeyValueReader::parse(text, cmd.config_path));
  }
  config.read(cmd.flags->overrides());
  if (config.jobs < 1) throw ConfigError("run.jobs must be >= 1");
  return config;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory: " + ec.message());
}

void echo_config(std::ostream& out, const RunConfig& config) {
  out << "# resolved config\n" << config.canonical() << "# end config\n";
}

int cmd_gen_data(const RunConfig& config, std::ostream& out) {
  config.data.validate();
  echo_config(out, config);
  const Dataset dataset = generate(config.data);
  const std::string path = config.resolved_dataset_path();
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    ensure_dir(parent.string());
  }
  dataset_save(dataset, path);

  std::vector<std::size_t> per_domain(static_cast<std::size_t>(config.data.domains), 0);
  std::vector<std::size_t> per_class(static_cast<std::size_t>(config.data.classes), 0);
  for (const auto* split : {&dataset.train, &dataset.test}) {
    for (const SequenceSample& s : *split) {
      per_domain[static_cast<std::size_t>(s.domains.front())] += s.domains.size();
      for (Label y : s.classes) ++per_class[static_cast<std::size_t>(y)];
    }
  }
  out << "wrote " << path << ": " << dataset.train.size() << " train / " << dataset.test.size()
      << " test sequences\n";
  out << "frames per domain:";
  for (std::size_t u = 0; u < per_domain.size(); ++u) out << " " << u << "=" << per_domain[u];
  out << "\nframes per class:";
  for (std::size_t c = 0; c < per_class.size(); ++c) out << " " << c << "=" << per_class[c];
  out << "\n";
  return kExitOk;
}

std::vector<Index> parse_list(const std::vector<std::string>& raw, const char* what) {
  std::vector<Index> out;
  for (const std::string& item : raw) {
    for (const std::string& part : split(item, ',')) out.push_back(parse_int(part, what));
  }
  return out;
}

std::string run_directory(const std::string& base, const TrainConfig& train, bool sweep) {
  if (!sweep) return base;
  return base + "/window" + std::to_string(train.attention.window()) + "_ra" +
         std::to_string(train.attention.key_dim);
}

void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::string text = metrics_csv_header() + "\n";
  for (const MetricsRow& row : rows) text += format_metrics_row(row) + "\n";
  write_file(path, text);
}

int cmd_train(RunConfig config, const std::vector<std::string>& windows,
              const std::vector<std::string>& window_sizes, const std::vector<std::string>& ras,
              std::ostream& out) {
  const std::string dataset_path = config.resolved_dataset_path();
  const Dataset dataset = dataset_load(dataset_path);
  config.train.input_dim = dataset.config.frame_dim;
  config.train.classes = dataset.config.classes;
  config.train.domains = dataset.config.domains;
  config.dataset_path = dataset_path;

  std::vector<Index> lefts = parse_list(windows, "--window");
  for (Index size : parse_list(window_sizes, "--window-size")) {
    if (size < 1 || size % 2 == 0) {
      throw ConfigError("--window-size must be odd and >= 1 (symmetric window), got " +
                        std::to_string(size));
    }
    lefts.push_back((size - 1) / 2);
  }
  std::vector<Index> key_dims = parse_list(ras, "--ra");
  const bool sweep = lefts.size() > 1 || key_dims.size() > 1;
  if (lefts.empty()) lefts.push_back(-1);
  if (key_dims.empty()) key_dims.push_back(config.train.attention.key_dim);

  std::vector<RunConfig> runs;
  for (Index left : lefts) {
    for (Index key_dim : key_dims) {
      RunConfig run = config;
      if (left >= 0) {
        run.train.attention.left = left;
        run.train.attention.right = left;
      }
      run.train.attention.key_dim = key_dim;
      run.train.validate();
      check_compatible(run.train, dataset.config);
      run.out_dir = run_directory(config.out_dir, run.train, sweep);
      runs.push_back(std::move(run));
    }
  }

  for (const RunConfig& run : runs) {
    echo_config(out, run);
    ensure_dir(run.out_dir);
    write_file(run.out_dir + "/run_config.txt", run.canonical());
    const TrainResult result = train_loop(run.train, dataset, run.out_dir);
    write_metrics(run.out_dir + "/metrics.csv", result.history);
    out << metrics_csv_header() << "\n";
    for (const MetricsRow& row : result.history) out << format_metrics_row(row) << "\n";
    out << "wrote " << run.out_dir << "/metrics.csv and checkpoints\n";
  }
  return kExitOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  if (config.checkpoint_path.empty()) throw ConfigError("eval needs --checkpoint");
  const TrainState state = checkpoint_load(config.checkpoint_path);
  const Dataset dataset = dataset_load(config.resolved_dataset_path());
  check_compatible(state.config, dataset.config);
  echo_config(out, config);

  const int jobs = static_cast<int>(config.jobs);
  MetricsRow row = evaluate(state.model, dataset.test, jobs);
  row.step = state.step;
  row.probe_acc = domain_probe_accuracy(state.model, dataset, config.probe, jobs);

  ensure_dir(config.out_dir);
  const std::string path = config.out_dir + "/eval.csv";
  const bool fresh = !fs::exists(path);
  std::ofstream csv(path, std::ios::app);
  if (!csv) throw IoError(path + ": cannot open for appending");
  if (fresh) csv << metrics_csv_header() << "\n";
  csv << format_metrics_row(row) << "\n";
  if (!csv) throw IoError(path + ": write failed");

  out << metrics_csv_header() << "\n" << format_metrics_row(row) << "\n";
  return kExitOk;
}

int cmd_gradcheck(const GradCheckOptions& options, std::ostream& out) {
  const std::vector<GradCheckRow> rows = run_gradcheck(options);
  const double tol = options.resolved_tolerance();
  out << "h=" << format_double(options.h) << " tolerance=" << format_double(tol) << "\n";
  out << std::left << std::setw(24) << "configuration" << std::setw(22) << "group"
      << "max_rel_error  status\n";
  std::vector<std::string> failed;
  for (const GradCheckRow& row : rows) {
    out << std::left << std::setw(24) << row.configuration << std::setw(22) << row.group
        << std::setw(14) << std::scientific << std::setprecision(3) << row.max_rel_error
        << " " << (row.pass ? "ok" : "FAIL") << "\n";
    if (!row.pass) failed.push_back(row.configuration + " " + row.group);
  }
  out << std::defaultfloat;
  if (!failed.empty()) {
    out << "gradcheck failed for:";
    for (const std::string& f : failed) out << " [" << f << "]";
    out << "\n";
    return kExitGradCheck;
  }
  out << "all " << rows.size() << " groups pass\n";
  return kExitOk;
}

int cmd_export_attention(const RunConfig& config, const std::vector<std::string>& sequences,
                         const std::string& split_name, std::ostream& out) {
  if (config.checkpoint_path.empty()) throw ConfigError("export-attention needs --checkpoint");
  const TrainState state = checkpoint_load(config.checkpoint_path);
  if (state.model.mode != Mode::kAadit) {
    throw ConfigError(config.checkpoint_path + ": export-attention needs an aadit checkpoint, got " +
                      to_string(state.model.mode));
  }
  const Dataset dataset = dataset_load(config.resolved_dataset_path());
  check_compatible(state.config, dataset.config);
  if (split_name != "train" && split_name != "test") {
    throw ConfigError("--split must be train or test");
  }
  const std::vector<SequenceSample>& split = split_name == "train" ? dataset.train : dataset.test;
  std::vector<Index> indices = parse_list(sequences, "--sequences");
  if (indices.empty()) indices.push_back(0);
  ensure_dir(config.out_dir);
  for (Index i : indices) {
    if (i < 0 || i >= static_cast<Index>(split.size())) {
      throw ConfigError("sequence index " + std::to_string(i) + " outside the " + split_name +
                        " split (" + std::to_string(split.size()) + " sequences)");
    }
    const std::string path =
        config.out_dir + "/attention_" + split_name + "_" + std::to_string(i) + ".csv";
    export_attention(attention_trace(state.model, split[static_cast<std::size_t>(i)]), path);
    out << "wrote " << path << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial domain-invariant training with attentive domain classifiers"};
  app.require_subcommand(1);

  Command gen = make_command(app, "gen-data", "generate a synthetic multi-domain dataset",
                             "data.seed");
  gen.flags->add("--dataset", "run.dataset", "dataset file to write");
  gen.flags->add("--domains", "data.domains", "number of domains");
  gen.flags->add("--classes", "data.classes", "number of classes (class 0 is silence)");
  gen.flags->add("--frame-dim", "data.frame_dim", "frame dimension");
  gen.flags->add("--frames", "data.frames", "frames per sequence");
  gen.flags->add("--train-per-domain", "data.train_per_domain", "training sequences per domain");
  gen.flags->add("--test-per-domain", "data.test_per_domain", "test sequences per domain");
  gen.flags->add("--segment-mean", "data.segment_mean", "mean class segment length");
  gen.flags->add("--noise", "data.noise", "isotropic noise standard deviation");
  gen.flags->add("--shift", "data.shift", "domain offset norm");

  Command train = make_command(app, "train", "train baseline, adit or aadit models", "train.seed");
  std::vector<std::string> windows, window_sizes, ras;
  train.flags->add("--dataset", "run.dataset", "dataset file");
  train.flags->add("--mode", "train.mode", "baseline, adit or aadit");
  train.flags->add("--lambda", "train.lambda", "gradient reversal weight");
  train.flags->add("--mu", "train.mu", "learning rate");
  train.flags->add("--split-depth", "train.split_depth", "acoustic layers in the feature extractor");
  train.flags->add("--heads", "attention.heads", "attention heads");
  train.flags->add("--score", "attention.score", "dot or additive");
  train.flags->add("--pos-enc", "attention.pos_enc", "on or off");
  train.flags->add("--epochs", "train.epochs", "training epochs");
  train.flags->add("--batch", "train.batch", "sequences per minibatch");
  train.app->add_option("--window", windows, "symmetric context L = R; comma list sweeps")
      ->delimiter(',');
  train.app->add_option("--window-size", window_sizes, "total window L + R + 1 (odd); list sweeps")
      ->delimiter(',');
  train.app->add_option("--ra", ras, "key/query dimension; comma list sweeps")->delimiter(',');

  Command eval = make_command(app, "eval", "domain probe and accuracy report", "probe.seed");
  eval.flags->add("--dataset", "run.dataset", "dataset file");
  eval.flags->add("--checkpoint", "run.checkpoint", "checkpoint file");
  eval.flags->add("--probe-epochs", "probe.epochs", "probe training epochs");
  eval.flags->add("--probe-mu", "probe.mu", "probe learning rate");
  eval.flags->add("--probe-hidden", "probe.hidden", "probe hidden widths, comma list");

  CLI::App* grad = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  grad->set_help_flag("--help", "print this help message and exit");
  GradCheckOptions grad_options;
  bool inject_flip = false;
  std::string grad_config;
  std::string grad_out;
  int grad_jobs = 1;
  grad->add_option("--config", grad_config, "accepted for uniformity; unused");
  grad->add_option("--seed", grad_options.seed, "instance seed");
  grad->add_option("--out", grad_out, "accepted for uniformity; unused");
  grad->add_option("--jobs", grad_jobs, "accepted for uniformity; unused");
  grad->add_option("--h", grad_options.h, "central-difference step");
  grad->add_option("--tol", grad_options.tolerance, "pass threshold (default by step size)");
  grad->add_option("--lambda", grad_options.lambda, "reversal weight of the composite check");
  grad->add_flag("--inject-grl-flip", inject_flip, "test hook: flip the reversal sign")
      ->group("");

  Command exp = make_command(app, "export-attention", "write attention heatmap CSVs", "train.seed");
  std::vector<std::string> sequences;
  std::string split_name = "test";
  exp.flags->add("--dataset", "run.dataset", "dataset file");
  exp.flags->add("--checkpoint", "run.checkpoint", "aadit checkpoint file");
  exp.app->add_option("--sequences", sequences, "sequence indices, comma list")->delimiter(',');
  exp.app->add_option("--split", split_name, "train or test");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (gen.app->parsed()) return cmd_gen_data(resolve(gen), out);
    if (train.app->parsed()) return cmd_train(resolve(train), windows, window_sizes, ras, out);
    if (eval.app->parsed()) return cmd_eval(resolve(eval), out);
    if (grad->parsed()) {
      grad_options.flip_reversal_sign = inject_flip;
      if (!(grad_options.h > 0)) throw ConfigError("--h must be > 0");
      return cmd_gradcheck(grad_options, out);
    }
    if (exp.app->parsed()) return cmd_export_attention(resolve(exp), sequences, split_name, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace aadit
