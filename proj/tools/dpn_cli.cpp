// Copyright 2026 The dpn-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: gen-data, train, attack, evaluate and oracle-check.
//
// Every command writes its artifacts and a manifest.json (resolved settings
// plus artifact digests) into --out. `--replay MANIFEST` fills every option
// not given on the command line from an earlier manifest.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpn/attacks.hpp"
#include "dpn/checkpoint.hpp"
#include "dpn/config.hpp"
#include "dpn/data.hpp"
#include "dpn/detection.hpp"
#include "dpn/error.hpp"
#include "dpn/oracle.hpp"
#include "dpn/report_io.hpp"
#include "dpn/training.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Bad command line or unparseable configuration.
class UsageError : public dpn::Error {
 public:
  using dpn::Error::Error;
};

std::string absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

/// Writes text into the output directory and records its digest.
void emit(const fs::path& out, const std::string& name, const std::string& text,
          dpn::RunManifest& manifest) {
  dpn::write_text_file(out / name, text);
  manifest.artifacts[name] = dpn::sha256_hex(text);
}

void write_manifest(const fs::path& out, const dpn::RunManifest& manifest) {
  dpn::write_text_file(out / "manifest.json", manifest.to_json());
}

// ---- shared loaders ------------------------------------------------------------

dpn::TrainConfig load_config_or_usage(const std::string& path) {
  if (path.empty()) return {};
  try {
    return dpn::load_train_config(path);
  } catch (const dpn::FormatError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

dpn::DatasetSplit load_csv_split(const fs::path& dir) {
  dpn::DatasetSplit split;
  split.train = dpn::read_csv_dataset(dir / "train.csv");
  if (fs::exists(dir / "valid.csv")) split.valid = dpn::read_csv_dataset(dir / "valid.csv");
  if (fs::exists(dir / "test.csv")) split.test = dpn::read_csv_dataset(dir / "test.csv");
  int max_label = 0;
  for (const auto* set : {&split.train, &split.valid, &split.test}) {
    for (int l : set->labels) max_label = std::max(max_label, l);
  }
  split.num_classes = static_cast<std::size_t>(max_label) + 1;
  split.sample_shape = {split.train.x.dim(1)};
  split.validate();
  return split;
}

dpn::HeadKind head_for(const std::string& model) {
  return model == "dnn" ? dpn::HeadKind::kSoftmax : dpn::HeadKind::kDirichlet;
}

/// The --model flag if given, otherwise the setting recorded next to the
/// checkpoint by `train`.
std::string resolve_model_kind(const std::string& flag, const fs::path& checkpoint) {
  if (!flag.empty()) return flag;
  const fs::path manifest_path = checkpoint.parent_path() / "manifest.json";
  if (fs::exists(manifest_path)) {
    const auto m = dpn::RunManifest::from_json(dpn::read_text_file(manifest_path));
    if (auto it = m.settings.find("model"); it != m.settings.end()) return it->second;
  }
  throw UsageError("--model is required: no training manifest next to " + checkpoint.string());
}

dpn::Model load_model(const fs::path& checkpoint, const std::string& model_kind) {
  return dpn::model_from_parameters(dpn::load_checkpoint(checkpoint), head_for(model_kind));
}

// ---- gen-data -------------------------------------------------------------------

struct GenDataArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_gen_data(const GenDataArgs& args) {
  dpn::SyntheticSpec spec = dpn::SyntheticSpec::three_class_default();
  if (!args.config.empty()) {
    try {
      spec = dpn::parse_synthetic_spec(dpn::read_text_file(args.config));
    } catch (const dpn::FormatError& e) {
      throw UsageError(args.config + ": " + e.what());
    }
  }
  if (args.seed) spec.seed = *args.seed;
  const auto data = dpn::gen_synthetic(spec);

  const fs::path out(args.out);
  dpn::DirectoryLock lock(out);
  dpn::RunManifest manifest;
  manifest.command = "gen-data";
  manifest.seed = spec.seed;
  manifest.settings = {{"config", absolute(args.config)}, {"seed", std::to_string(spec.seed)}};
  manifest.config = dpn::format_synthetic_spec(spec);

  dpn::write_csv_dataset(out / "train.csv", data.split.train);
  dpn::write_csv_dataset(out / "valid.csv", data.split.valid);
  dpn::write_csv_dataset(out / "test.csv", data.split.test);
  dpn::write_csv_features(out / "ood.csv", data.ood);
  for (const char* name : {"train.csv", "valid.csv", "test.csv", "ood.csv"}) {
    manifest.artifacts[name] = dpn::sha256_file(out / name);
  }
  emit(out, "synthetic.txt", manifest.config, manifest);
  write_manifest(out, manifest);
  std::cout << "wrote " << data.split.train.size() << " train, " << data.split.valid.size()
            << " valid, " << data.split.test.size() << " test and " << data.ood.rows()
            << " out-of-domain rows to " << out.string() << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string data;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_train(const TrainArgs& args) {
  dpn::TrainConfig cfg = load_config_or_usage(args.config);
  if (args.seed) cfg.seed = *args.seed;
  const fs::path data_dir(args.data);
  const auto split = load_csv_split(data_dir);

  const bool adversarial = cfg.ood_source.kind == dpn::OodSourceKind::kFgsmAdv;
  if (adversarial && args.model == "pn-kl") {
    throw UsageError("adversarial Prior Network training uses the reverse KL: use --model pn-rkl");
  }
  if (args.model == "dnn" && !adversarial && cfg.gamma > 0.0) {
    throw UsageError("gamma > 0 needs a Prior Network model");
  }

  // Out-of-domain rows: the named dataset when the config asks for one,
  // otherwise ood.csv (if present) is only monitored.
  dpn::Tensor ood;
  if (cfg.ood_source.kind == dpn::OodSourceKind::kDataset) {
    ood = dpn::read_csv_features(data_dir / (cfg.ood_source.dataset + ".csv"));
  } else if (fs::exists(data_dir / "ood.csv")) {
    ood = dpn::read_csv_features(data_dir / "ood.csv");
  }
  dpn::TrainOptions options;
  if (!ood.empty()) options.ood_x = &ood;

  dpn::ModelSpec spec;
  spec.input_dim = split.input_dim();
  spec.num_classes = split.num_classes;
  spec.hidden.assign(cfg.hidden_layers, cfg.hidden_width);
  spec.dropout_keep = cfg.dropout_keep;
  spec.head = head_for(args.model);
  dpn::Model model(spec, cfg.seed);

  const fs::path out(args.out);
  dpn::DirectoryLock lock(out);
  dpn::RunManifest manifest;
  manifest.command = "train";
  manifest.seed = cfg.seed;
  manifest.settings = {{"config", absolute(args.config)},
                       {"data", absolute(args.data)},
                       {"model", args.model},
                       {"seed", std::to_string(cfg.seed)}};
  manifest.config = dpn::format_train_config(cfg);

  dpn::TrainHistory history;
  try {
    if (args.model == "dnn") {
      history = adversarial ? dpn::train_dnn_adversarial(model, split, cfg, options)
                            : dpn::train_standard(model, split, cfg, dpn::TrainObjective::kDnnNll,
                                                  options);
    } else if (adversarial) {
      history = dpn::train_pn_adversarial(model, split, cfg, options);
    } else {
      const auto objective =
          args.model == "pn-kl" ? dpn::TrainObjective::kPnKl : dpn::TrainObjective::kPnRkl;
      history = dpn::train_standard(model, split, cfg, objective, options);
    }
  } catch (const dpn::TrainingAborted& e) {
    dpn::write_text_file(out / "history.csv", e.history().to_csv());
    throw;
  }

  dpn::save_checkpoint(out / "model.ckpt", model.parameters());
  manifest.artifacts["model.ckpt"] = dpn::sha256_file(out / "model.ckpt");
  emit(out, "history.csv", history.to_csv(), manifest);
  emit(out, "config.txt", manifest.config, manifest);
  write_manifest(out, manifest);

  const auto& last = history.epochs.back();
  std::cout << "trained " << args.model << " for " << history.epochs.size()
            << " epochs: train_loss " << last.train_loss << ", train_acc " << last.train_acc;
  if (!split.test.empty()) std::cout << ", test_acc " << dpn::accuracy(model, split.test);
  std::cout << "\n";
  return 0;
}

// ---- attack ---------------------------------------------------------------------

struct AttackArgs {
  std::string checkpoint;
  std::string model;
  std::string data;
  std::string split = "test";
  std::string attack = "fgsm";
  double eps = 0.1;
  std::string norm = "inf";
  int steps = 10;
  double step_size = 0.0;
  double soft_c = 1.0;
  std::string loss = "nll";
  double beta_in = 100.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_attack(const AttackArgs& args) {
  const std::string model_kind = resolve_model_kind(args.model, args.checkpoint);
  const dpn::Model model = load_model(args.checkpoint, model_kind);
  const auto set = dpn::read_csv_dataset(fs::path(args.data) / (args.split + ".csv"));

  dpn::AttackConfig cfg;
  cfg.norm = dpn::parse_norm(args.norm);
  cfg.epsilon = args.eps;
  cfg.steps = args.steps;
  cfg.step_size = args.step_size;
  cfg.soft_c = args.soft_c;
  cfg.momentum_decay = args.attack == "bim" ? 0.0 : 1.0;
  cfg.loss_kind =
      args.loss == "rkl" ? dpn::LossKind::kRklTargetDirichlet : dpn::LossKind::kNllTarget;
  if (args.attack == "fgsm" && cfg.norm != dpn::Norm::kLinf) {
    throw UsageError("fgsm is an L-inf attack; use --attack fgm for other norms");
  }
  if (cfg.loss_kind == dpn::LossKind::kRklTargetDirichlet && model_kind == "dnn") {
    throw UsageError("--loss rkl needs a Prior Network checkpoint");
  }
  try {
    cfg.validate();
  } catch (const dpn::DomainError& e) {
    throw UsageError(e.what());
  }
  const dpn::TargetConcentration tc{args.beta_in, 1.0, model.num_classes()};

  std::mt19937_64 rng(args.seed);
  const int k = static_cast<int>(model.num_classes());
  std::vector<dpn::AttackRecord> records;
  dpn::LabeledSet adversarial;
  adversarial.x = dpn::Tensor(set.x.shape());
  adversarial.labels = set.labels;
  std::size_t successes = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const dpn::Tensor x = set.x.gather_rows(std::vector<std::size_t>{i});
    const int target = dpn::select_target_class(rng, set.labels[i], k);
    dpn::AttackResult r;
    if (args.attack == "fgsm") r = dpn::fgsm(model, x, target, cfg, tc);
    else if (args.attack == "fgm") r = dpn::fgm(model, x, target, cfg, tc);
    else if (args.attack == "soft") r = dpn::soft_constraint_attack(model, x, target, cfg, tc);
    else r = dpn::iterative_attack(model, x, target, cfg, tc);
    dpn::mark_success(model, r);
    successes += r.success;
    std::copy(r.x_adv.data().begin(), r.x_adv.data().end(), adversarial.x.row(i).begin());
    records.push_back(dpn::to_record(i, r));
  }

  const fs::path out(args.out);
  dpn::DirectoryLock lock(out);
  dpn::RunManifest manifest;
  manifest.command = "attack";
  manifest.seed = args.seed;
  std::ostringstream eps, step_size, soft_c, beta_in;
  eps.precision(17);
  step_size.precision(17);
  soft_c.precision(17);
  beta_in.precision(17);
  eps << args.eps;
  step_size << args.step_size;
  soft_c << args.soft_c;
  beta_in << args.beta_in;
  manifest.settings = {{"checkpoint", absolute(args.checkpoint)},
                       {"model", model_kind},
                       {"data", absolute(args.data)},
                       {"split", args.split},
                       {"attack", args.attack},
                       {"eps", eps.str()},
                       {"norm", args.norm},
                       {"steps", std::to_string(args.steps)},
                       {"step-size", step_size.str()},
                       {"soft-c", soft_c.str()},
                       {"loss", args.loss},
                       {"beta-in", beta_in.str()},
                       {"seed", std::to_string(args.seed)}};
  dpn::write_csv_dataset(out / "adv.csv", adversarial);
  manifest.artifacts["adv.csv"] = dpn::sha256_file(out / "adv.csv");
  emit(out, "attacks.jsonl", dpn::encode_attack_manifest(records), manifest);
  write_manifest(out, manifest);
  std::cout << args.attack << " on " << set.size() << " rows: success rate "
            << static_cast<double>(successes) / static_cast<double>(set.size()) << "\n";
  return 0;
}

// ---- evaluate -------------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string model;
  std::string data;
  std::string attacks;
  std::vector<std::string> measures;
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  const std::string model_kind = resolve_model_kind(args.model, args.checkpoint);
  const dpn::Model model = load_model(args.checkpoint, model_kind);
  const auto natural = dpn::read_csv_dataset(fs::path(args.data) / "test.csv");
  const fs::path attack_dir(args.attacks);
  const auto adversarial = dpn::read_csv_dataset(attack_dir / "adv.csv");
  const auto records =
      dpn::decode_attack_manifest(dpn::read_text_file(attack_dir / "attacks.jsonl"));
  if (records.size() != adversarial.size()) {
    throw dpn::FormatError("attacks.jsonl has " + std::to_string(records.size()) +
                           " records but adv.csv has " + std::to_string(adversarial.size()) +
                           " rows");
  }
  std::vector<dpn::AttackResult> results(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = results[i];
    r.x_adv = adversarial.x.gather_rows(std::vector<std::size_t>{i});
    r.target_class = records[i].target_class;
    r.epsilon = records[i].epsilon;
    r.norm = records[i].norm;
    r.achieved_delta = records[i].achieved_delta;
    r.success = records[i].success;
  }

  std::vector<std::string> names = args.measures;
  if (names.empty()) {
    for (auto m : dpn::all_measures()) {
      if (model_kind != "dnn" || m == dpn::Measure::kMaxProb ||
          m == dpn::Measure::kPredictiveEntropy) {
        names.emplace_back(dpn::measure_name(m));
      }
    }
  }
  std::vector<dpn::Measure> measures;
  for (const auto& n : names) measures.push_back(dpn::parse_measure(n));
  if (model_kind == "dnn") {
    for (auto m : measures) {
      if (m != dpn::Measure::kMaxProb && m != dpn::Measure::kPredictiveEntropy) {
        throw UsageError("measure " + std::string(dpn::measure_name(m)) +
                         " needs a Prior Network checkpoint");
      }
    }
  }
  const auto report = dpn::joint_report(model, natural, results, adversarial.labels, measures);

  const fs::path out(args.out);
  dpn::DirectoryLock lock(out);
  dpn::RunManifest manifest;
  manifest.command = "evaluate";
  std::string joined;
  for (const auto& n : names) joined += (joined.empty() ? "" : ",") + n;
  manifest.settings = {{"checkpoint", absolute(args.checkpoint)},
                       {"model", model_kind},
                       {"data", absolute(args.data)},
                       {"attacks", absolute(args.attacks)},
                       {"measure", joined}};
  emit(out, "report.json", report.to_json(), manifest);
  emit(out, "report.csv", report.to_csv(), manifest);
  write_manifest(out, manifest);
  for (const auto& r : report.overall) {
    std::cout << r.measure << ": auroc " << r.auroc << ", natural accuracy " << r.accuracy_natural
              << ", attack success " << r.attack_success_rate << "\n";
  }
  return 0;
}

// ---- oracle-check ---------------------------------------------------------------

int run_oracle_check(const std::string& out) {
  const auto results = dpn::oracle::run_suite();
  bool all_pass = true;
  nlohmann::json json = nlohmann::json::array();
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.seconds << " s): " << r.detail
              << "\n";
    json.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  if (!out.empty()) {
    const fs::path dir(out);
    dpn::DirectoryLock lock(dir);
    dpn::RunManifest manifest;
    manifest.command = "oracle-check";
    emit(dir, "oracle.json", json.dump(2) + "\n", manifest);
    write_manifest(dir, manifest);
  }
  return all_pass ? 0 : kExitRuntime;
}

// ---- replay ---------------------------------------------------------------------

/// Appends "--key value" for every manifest setting whose flag is absent from
/// the command line. Returns the arguments unchanged without --replay.
std::vector<std::string> apply_replay(std::vector<std::string> args) {
  std::string manifest_path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string flag = a.substr(0, a.find('='));
    given.insert(flag);
    if (flag == "--replay") {
      if (a.find('=') != std::string::npos) manifest_path = a.substr(a.find('=') + 1);
      else if (i + 1 < args.size()) manifest_path = args[i + 1];
    }
  }
  if (manifest_path.empty()) return args;
  const auto manifest = dpn::RunManifest::from_json(dpn::read_text_file(manifest_path));
  if (args.size() < 2 || args[1] != manifest.command) {
    throw UsageError("manifest " + manifest_path + " records command '" + manifest.command + "'");
  }
  for (const auto& [key, value] : manifest.settings) {
    if (given.count("--" + key) || value.empty()) continue;
    if (key == "measure") {
      std::stringstream ss(value);
      for (std::string m; std::getline(ss, m, ',');) {
        args.push_back("--measure");
        args.push_back(m);
      }
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

int run(int argc, char** argv) {
  CLI::App app{"Dirichlet Prior Network toolkit"};
  app.require_subcommand(1);
  std::string replay;

  auto add_replay = [&](CLI::App* cmd) {
    cmd->add_option("--replay", replay, "Take unspecified options from a manifest.json");
  };

  const std::vector<std::string> models{"dnn", "pn-kl", "pn-rkl"};
  std::vector<std::string> measure_names;
  for (auto m : dpn::all_measures()) measure_names.emplace_back(dpn::measure_name(m));

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic toy task");
  gen_cmd->add_option("--config", gen.config, "Synthetic spec (key = value)")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--seed", gen.seed, "Overrides the spec seed");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  add_replay(gen_cmd);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", train.config, "Training config (key = value)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--data", train.data, "Directory with train.csv, valid.csv, test.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  train_cmd->add_option("--model", train.model, "Model kind")
      ->required()
      ->check(CLI::IsMember(models));
  train_cmd->add_option("--seed", train.seed, "Overrides the config seed");
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  add_replay(train_cmd);

  AttackArgs attack;
  auto* attack_cmd = app.add_subcommand("attack", "Targeted attacks on a data split");
  attack_cmd->add_option("--checkpoint", attack.checkpoint, "model.ckpt")
      ->required()
      ->check(CLI::ExistingFile);
  attack_cmd->add_option("--model", attack.model, "Model kind (default: from the training manifest)")
      ->check(CLI::IsMember(models));
  attack_cmd->add_option("--data", attack.data, "Data directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  attack_cmd->add_option("--split", attack.split, "Split to attack")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  attack_cmd->add_option("--attack", attack.attack, "Attack")
      ->check(CLI::IsMember({"fgsm", "fgm", "bim", "mim", "soft"}));
  attack_cmd->add_option("--eps", attack.eps, "Perturbation budget");
  attack_cmd->add_option("--norm", attack.norm, "Constraint norm")
      ->check(CLI::IsMember({"1", "2", "inf"}));
  attack_cmd->add_option("--steps", attack.steps, "Iterations of bim, mim and soft");
  attack_cmd->add_option("--step-size", attack.step_size, "Per-step size (0: eps / steps)");
  attack_cmd->add_option("--soft-c", attack.soft_c, "Distance weight of the soft attack");
  attack_cmd->add_option("--loss", attack.loss, "Attack loss")
      ->check(CLI::IsMember({"nll", "rkl"}));
  attack_cmd->add_option("--beta-in", attack.beta_in, "Target concentration for --loss rkl");
  attack_cmd->add_option("--seed", attack.seed, "Seed of the target-class draw");
  attack_cmd->add_option("--out", attack.out, "Output directory")->required();
  add_replay(attack_cmd);

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Detection and robustness report");
  eval_cmd->add_option("--checkpoint", evaluate.checkpoint, "model.ckpt")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--model", evaluate.model, "Model kind (default: from the training manifest)")
      ->check(CLI::IsMember(models));
  eval_cmd->add_option("--data", evaluate.data, "Data directory with test.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--attacks", evaluate.attacks, "Output directory of an attack run")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--measure", evaluate.measures, "Uncertainty measure (repeatable)")
      ->check(CLI::IsMember(measure_names));
  eval_cmd->add_option("--out", evaluate.out, "Output directory")->required();
  add_replay(eval_cmd);

  std::string oracle_out;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Run the numerical oracle suite");
  oracle_cmd->add_option("--out", oracle_out, "Optional output directory");

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = apply_replay(std::move(args));
  } catch (const dpn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen_data(gen);
    if (*train_cmd) return run_train(train);
    if (*attack_cmd) return run_attack(attack);
    if (*eval_cmd) return run_evaluate(evaluate);
    return run_oracle_check(oracle_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
