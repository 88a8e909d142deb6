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

#include "dpn/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "dpn/error.hpp"

namespace dpn {

std::string format_ood_source(const OodSource& source) {
  switch (source.kind) {
    case OodSourceKind::kNone: return "none";
    case OodSourceKind::kFgsmAdv: return "fgsm_adv";
    case OodSourceKind::kDataset: return "dataset:" + source.dataset;
  }
  return "none";
}

OodSource parse_ood_source(std::string_view text) {
  if (text == "none") return OodSource::none();
  if (text == "fgsm_adv") return OodSource::fgsm_adv();
  constexpr std::string_view prefix = "dataset:";
  if (text.starts_with(prefix) && text.size() > prefix.size()) {
    return OodSource::named(std::string(text.substr(prefix.size())));
  }
  throw FormatError("bad ood_source '" + std::string(text) +
                    "' (expected none, fgsm_adv or dataset:<name>)");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw FormatError("invalid train config: " + msg); };
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) fail("eta0 must be > 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (cycle_length < 1 || cycle_length > epochs) fail("cycle_length must lie in [1, epochs]");
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) fail("dropout_keep must lie in (0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be finite and >= 0");
  if (!(beta_in > 0.0) || !std::isfinite(beta_in)) fail("beta_in must be > 0");
  if (!(beta_adv > 0.0) || !std::isfinite(beta_adv)) fail("beta_adv must be > 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (hidden_width < 1) fail("hidden_width must be >= 1");
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw FormatError("duplicate key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw FormatError("key '" + key + "': '" + v + "' is not a number");
  }
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  if (v.empty() || v[0] == '-') throw FormatError("key '" + key + "': expected a non-negative integer");
  const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || errno == ERANGE) {
    throw FormatError("key '" + key + "': '" + v + "' is not an unsigned integer");
  }
  return u;
}

int to_int(const std::string& key, const std::string& v) {
  const auto u = to_u64(key, v);
  if (u > 1'000'000'000ULL) throw FormatError("key '" + key + "': value too large");
  return static_cast<int>(u);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw FormatError("key '" + key + "': expected true or false");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig cfg;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "eta0") cfg.eta0 = to_double(key, value);
    else if (key == "epochs") cfg.epochs = to_int(key, value);
    else if (key == "cycle_length") cfg.cycle_length = to_int(key, value);
    else if (key == "dropout_keep") cfg.dropout_keep = to_double(key, value);
    else if (key == "gamma") cfg.gamma = to_double(key, value);
    else if (key == "beta_in") cfg.beta_in = to_double(key, value);
    else if (key == "beta_adv") cfg.beta_adv = to_double(key, value);
    else if (key == "ood_source") cfg.ood_source = parse_ood_source(value);
    else if (key == "batch_size") cfg.batch_size = to_u64(key, value);
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "hidden_width") cfg.hidden_width = to_u64(key, value);
    else if (key == "hidden_layers") cfg.hidden_layers = to_u64(key, value);
    else if (key == "augment") cfg.augment = to_bool(key, value);
    else throw FormatError("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

std::string format_train_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "eta0 = " << fmt_double(cfg.eta0) << "\n"
      << "epochs = " << cfg.epochs << "\n"
      << "cycle_length = " << cfg.cycle_length << "\n"
      << "dropout_keep = " << fmt_double(cfg.dropout_keep) << "\n"
      << "gamma = " << fmt_double(cfg.gamma) << "\n"
      << "beta_in = " << fmt_double(cfg.beta_in) << "\n"
      << "beta_adv = " << fmt_double(cfg.beta_adv) << "\n"
      << "ood_source = " << format_ood_source(cfg.ood_source) << "\n"
      << "batch_size = " << cfg.batch_size << "\n"
      << "seed = " << cfg.seed << "\n"
      << "hidden_width = " << cfg.hidden_width << "\n"
      << "hidden_layers = " << cfg.hidden_layers << "\n"
      << "augment = " << (cfg.augment ? "true" : "false") << "\n";
  return out.str();
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str());
}

std::vector<TrainingTableRow> training_table() {
  struct Raw {
    const char* dataset;
    const char* model;
    double eta0;
    int epochs;
    int cycle;
    double keep;
    double gamma;  // "-" entries are 0
    double beta;   // "-" entries keep the default of 1e2
    OodSource ood;
  };
  const auto none = OodSource::none();
  const auto adv = OodSource::fgsm_adv();
  const Raw raw[] = {
      {"MNIST", "DNN", 1e-3, 20, 10, 0.5, 0.0, 1e2, none},
      {"MNIST", "PN-KL", 1e-3, 20, 10, 0.5, 0.0, 1e3, none},
      {"MNIST", "PN-RKL", 1e-3, 20, 10, 0.5, 0.0, 1e3, none},
      {"SVHN", "DNN", 1e-3, 40, 30, 0.5, 0.0, 1e2, none},
      {"SVHN", "PN-KL", 5e-4, 40, 30, 0.7, 1.0, 1e3, OodSource::named("CIFAR-10")},
      {"SVHN", "PN-RKL", 5e-6, 40, 30, 0.7, 10.0, 1e3, OodSource::named("CIFAR-10")},
      {"CIFAR-10", "DNN", 1e-3, 45, 30, 0.5, 0.0, 1e2, none},
      {"CIFAR-10", "DNN-ADV", 1e-3, 45, 30, 0.5, 0.0, 1e2, adv},
      {"CIFAR-10", "PN-KL", 5e-4, 45, 30, 0.7, 1.0, 1e2, OodSource::named("CIFAR-100")},
      {"CIFAR-10", "PN-RKL", 5e-6, 45, 30, 0.7, 10.0, 1e2, OodSource::named("CIFAR-100")},
      {"CIFAR-10", "PN", 5e-6, 45, 30, 0.7, 30.0, 1e2, adv},
      {"CIFAR-100", "DNN", 1e-3, 100, 70, 0.5, 0.0, 1e2, none},
      {"CIFAR-100", "DNN-ADV", 1e-3, 100, 70, 0.5, 0.0, 1e2, adv},
      {"CIFAR-100", "PN-KL", 5e-4, 100, 70, 0.7, 1.0, 1e2, OodSource::named("TinyImageNet")},
      {"CIFAR-100", "PN-RKL", 5e-6, 100, 70, 0.7, 10.0, 1e2, OodSource::named("TinyImageNet")},
      {"CIFAR-100", "PN", 5e-4, 100, 70, 0.7, 30.0, 1e2, adv},
      {"TinyImageNet", "DNN", 1e-3, 120, 80, 0.5, 0.0, 1e2, none},
      {"TinyImageNet", "PN-KL", 5e-4, 120, 80, 0.5, 0.0, 1e2, none},
      {"TinyImageNet", "PN-RKL", 5e-6, 120, 80, 0.5, 0.0, 1e2, none},
  };
  std::vector<TrainingTableRow> rows;
  for (const auto& r : raw) {
    TrainConfig cfg;
    cfg.eta0 = r.eta0;
    cfg.epochs = r.epochs;
    cfg.cycle_length = r.cycle;
    cfg.dropout_keep = r.keep;
    cfg.gamma = r.gamma;
    cfg.beta_in = r.beta;
    cfg.beta_adv = 1.0;
    cfg.ood_source = r.ood;
    cfg.batch_size = 128;
    cfg.augment = std::string_view(r.dataset).starts_with("CIFAR") ||
                  std::string_view(r.dataset) == "TinyImageNet";
    rows.push_back({r.dataset, r.model, cfg});
  }
  return rows;
}

std::vector<DatasetInfo> dataset_table() {
  return {
      {"MNIST", 55000, 5000, 10000, 10},    {"SVHN", 73257, 0, 26032, 10},
      {"CIFAR-10", 50000, 0, 10000, 10},    {"LSUN", 0, 0, 10000, 10},
      {"CIFAR-100", 50000, 0, 10000, 100},  {"TinyImageNet", 100000, 10000, 10000, 200},
  };
}

}  // namespace dpn
