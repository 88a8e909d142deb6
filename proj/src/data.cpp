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

#include "dpn/data.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>

#include "dpn/config.hpp"
#include "dpn/error.hpp"

namespace dpn {

LabeledSet LabeledSet::subset(std::span<const std::size_t> indices) const {
  LabeledSet out;
  out.x = x.gather_rows(indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels.at(i));
  return out;
}

void DatasetSplit::validate() const {
  if (num_classes < 2) throw FormatError("dataset needs at least two classes");
  const std::size_t width = input_dim();
  auto check = [&](const LabeledSet& set, const char* name) {
    if (set.empty()) return;
    if (set.x.rank() != 2 || set.x.rows() != set.size() || set.x.dim(1) != width) {
      throw FormatError(std::string(name) + " split has inconsistent shape " +
                        shape_string(set.x.shape()));
    }
    for (int l : set.labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= num_classes) {
        throw FormatError(std::string(name) + " split has label " + std::to_string(l) +
                          " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
  };
  check(train, "train");
  check(valid, "valid");
  check(test, "test");
}

// ---- synthetic -------------------------------------------------------------

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw DomainError("synthetic spec needs K >= 2");
  if (means.size() != num_classes) {
    throw DomainError("synthetic spec needs one mean per class");
  }
  if (!(cov_scale > 0.0) || !std::isfinite(cov_scale)) {
    throw DomainError("degenerate covariance: cov_scale must be > 0");
  }
  if (!(pad_sigma >= 0.0)) throw DomainError("pad_sigma must be >= 0");
  if (ambient_dim < 2) throw DomainError("ambient_dim must be >= 2");
  if (points_per_class == 0) throw DomainError("points_per_class must be positive");
  double max_norm = 0.0;
  for (const auto& m : means) {
    max_norm = std::max(max_norm, std::hypot(m[0] - center[0], m[1] - center[1]));
  }
  if (!(ood_ring_radius > max_norm)) {
    throw DomainError("ood_ring_radius must exceed the largest class-mean distance from the center");
  }
}

SyntheticSpec SyntheticSpec::three_class_default() {
  SyntheticSpec s;
  s.num_classes = 3;
  s.center = {0.5, 0.5};
  for (int k = 0; k < 3; ++k) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 3.0;
    s.means.push_back({0.5 + 0.25 * std::cos(angle), 0.5 + 0.25 * std::sin(angle)});
  }
  s.cov_scale = 0.05;
  s.ood_ring_radius = 0.45;
  s.ambient_dim = 10;
  s.pad_value = 0.5;
  s.pad_sigma = 0.02;
  return s;
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> blob(0.0, spec.cov_scale);
  std::normal_distribution<double> pad(0.0, spec.pad_sigma > 0.0 ? spec.pad_sigma : 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const std::size_t d = spec.ambient_dim;

  auto fill_pad = [&](std::vector<double>& out) {
    for (std::size_t j = 2; j < d; ++j) {
      out.push_back(spec.pad_sigma > 0.0 ? spec.pad_value + pad(rng) : spec.pad_value);
    }
  };
  auto make_split = [&](std::size_t per_class) {
    LabeledSet set;
    if (per_class == 0) return set;
    std::vector<double> data;
    data.reserve(per_class * spec.num_classes * d);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      for (std::size_t i = 0; i < per_class; ++i) {
        data.push_back(spec.means[k][0] + blob(rng));
        data.push_back(spec.means[k][1] + blob(rng));
        fill_pad(data);
        set.labels.push_back(static_cast<int>(k));
      }
    }
    set.x = Tensor({set.labels.size(), d}, std::move(data));
    return set;
  };

  SyntheticData out;
  out.split.num_classes = spec.num_classes;
  out.split.sample_shape = {d};
  out.split.train = make_split(spec.points_per_class);
  out.split.valid = make_split(spec.valid_per_class);
  out.split.test = make_split(spec.test_per_class);
  if (spec.ood_points > 0) {
    std::vector<double> ring;
    ring.reserve(spec.ood_points * d);
    for (std::size_t i = 0; i < spec.ood_points; ++i) {
      const double a = angle(rng);
      ring.push_back(spec.center[0] + spec.ood_ring_radius * std::cos(a));
      ring.push_back(spec.center[1] + spec.ood_ring_radius * std::sin(a));
      fill_pad(ring);
    }
    out.ood = Tensor({spec.ood_points, d}, std::move(ring));
  }
  return out;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw FormatError("key '" + key + "': '" + v + "' is not a number");
  }
  return d;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  char* end = nullptr;
  if (v.empty() || v[0] == '-') throw FormatError("key '" + key + "': expected a non-negative integer");
  const auto u = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size()) throw FormatError("key '" + key + "': '" + v + "' is not an integer");
  return static_cast<std::size_t>(u);
}

std::array<double, 2> parse_point(const std::string& key, const std::string& v) {
  const auto comma = v.find(',');
  if (comma == std::string::npos) throw FormatError("key '" + key + "': expected 'x,y'");
  return {parse_double(key, v.substr(0, comma)), parse_double(key, v.substr(comma + 1))};
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec s = SyntheticSpec::three_class_default();
  bool means_given = false;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "num_classes") s.num_classes = parse_size(key, value);
    else if (key == "points_per_class") s.points_per_class = parse_size(key, value);
    else if (key == "valid_per_class") s.valid_per_class = parse_size(key, value);
    else if (key == "test_per_class") s.test_per_class = parse_size(key, value);
    else if (key == "ood_points") s.ood_points = parse_size(key, value);
    else if (key == "cov_scale") s.cov_scale = parse_double(key, value);
    else if (key == "ood_ring_radius") s.ood_ring_radius = parse_double(key, value);
    else if (key == "center") s.center = parse_point(key, value);
    else if (key == "ambient_dim") s.ambient_dim = parse_size(key, value);
    else if (key == "pad_value") s.pad_value = parse_double(key, value);
    else if (key == "pad_sigma") s.pad_sigma = parse_double(key, value);
    else if (key == "seed") s.seed = parse_size(key, value);
    else if (key == "means") {
      s.means.clear();
      std::stringstream in(value);
      std::string item;
      while (std::getline(in, item, ';')) s.means.push_back(parse_point(key, item));
      means_given = true;
    } else {
      throw FormatError("unknown synthetic key '" + key + "'");
    }
  }
  if (!means_given && s.means.size() != s.num_classes) {
    throw FormatError("synthetic spec: 'means' is required when num_classes differs from 3");
  }
  s.validate();
  return s;
}

std::string format_synthetic_spec(const SyntheticSpec& s) {
  std::ostringstream out;
  out << "num_classes = " << s.num_classes << "\n"
      << "points_per_class = " << s.points_per_class << "\n"
      << "valid_per_class = " << s.valid_per_class << "\n"
      << "test_per_class = " << s.test_per_class << "\n"
      << "ood_points = " << s.ood_points << "\n"
      << "means = ";
  for (std::size_t k = 0; k < s.means.size(); ++k) {
    if (k) out << ";";
    out << fmt_double(s.means[k][0]) << "," << fmt_double(s.means[k][1]);
  }
  out << "\n"
      << "cov_scale = " << fmt_double(s.cov_scale) << "\n"
      << "ood_ring_radius = " << fmt_double(s.ood_ring_radius) << "\n"
      << "center = " << fmt_double(s.center[0]) << "," << fmt_double(s.center[1]) << "\n"
      << "ambient_dim = " << s.ambient_dim << "\n"
      << "pad_value = " << fmt_double(s.pad_value) << "\n"
      << "pad_sigma = " << fmt_double(s.pad_sigma) << "\n"
      << "seed = " << s.seed << "\n";
  return out.str();
}

// ---- IDX -------------------------------------------------------------------

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (bytes.size() < offset + 4) throw FormatError("IDX: truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected) {
  if (bytes.empty()) throw FormatError("IDX: empty file");
  const auto magic = read_be32(bytes, 0);
  if (magic != expected) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "IDX: bad magic 0x%08x (expected 0x%08x)", magic, expected);
    throw FormatError(buf);
  }
}

}  // namespace

Tensor decode_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImages);
  const std::size_t n = read_be32(bytes, 4);
  const std::size_t rows = read_be32(bytes, 8);
  const std::size_t cols = read_be32(bytes, 12);
  if (n == 0 || rows == 0 || cols == 0) throw FormatError("IDX: zero-sized image dimension");
  const std::size_t payload = n * rows * cols;
  if (bytes.size() - 16 != payload) {
    throw FormatError("IDX: payload holds " + std::to_string(bytes.size() - 16) +
                      " bytes, header declares " + std::to_string(payload));
  }
  std::vector<double> data(payload);
  for (std::size_t i = 0; i < payload; ++i) data[i] = bytes[16 + i] / 255.0;
  return Tensor({n, rows, cols}, std::move(data));
}

std::vector<int> decode_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabels);
  const std::size_t n = read_be32(bytes, 4);
  if (bytes.size() - 8 != n) {
    throw FormatError("IDX: label payload holds " + std::to_string(bytes.size() - 8) +
                      " bytes, header declares " + std::to_string(n));
  }
  return {bytes.begin() + 8, bytes.end()};
}

std::vector<std::uint8_t> encode_idx_images(std::span<const std::uint8_t> pixels, std::uint32_t count,
                                            std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != std::size_t{count} * rows * cols) {
    throw ShapeError("encode_idx_images: pixel count does not match dimensions");
  }
  std::vector<std::uint8_t> out;
  write_be32(out, kIdxImages);
  write_be32(out, count);
  write_be32(out, rows);
  write_be32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  write_be32(out, kIdxLabels);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

Tensor load_idx_images(const std::filesystem::path& path) { return decode_idx_images(read_file(path)); }

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  return decode_idx_labels(read_file(path));
}

LabeledSet load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                    Shape* sample_shape) {
  Tensor x = load_idx_images(images);
  std::vector<int> y = load_idx_labels(labels);
  if (x.dim(0) != y.size()) {
    throw FormatError("IDX: " + std::to_string(x.dim(0)) + " images but " +
                      std::to_string(y.size()) + " labels");
  }
  if (sample_shape) *sample_shape = {x.dim(1), x.dim(2)};
  LabeledSet set;
  set.x = x.reshaped({x.dim(0), x.dim(1) * x.dim(2)});
  set.labels = std::move(y);
  return set;
}

// ---- CSV -------------------------------------------------------------------

namespace {

void write_rows(const std::filesystem::path& path, const Tensor& x, const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const std::size_t d = x.row_size();
  for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << "x" << j;
  if (labels) out << ",label";
  out << "\n";
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << fmt_double(x.at(r, j));
    if (labels) out << "," << (*labels)[r];
    out << "\n";
  }
}

std::vector<std::vector<std::string>> read_cells(const std::filesystem::path& path,
                                                 std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      *header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != header->size()) {
        throw FormatError(path.string() + ": row " + std::to_string(rows.size() + 1) + " has " +
                          std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(header->size()));
      }
      rows.push_back(std::move(cells));
    }
  }
  if (first) throw FormatError(path.string() + ": empty CSV file");
  return rows;
}

}  // namespace

void write_csv_dataset(const std::filesystem::path& path, const LabeledSet& set) {
  write_rows(path, set.x, &set.labels);
}

void write_csv_features(const std::filesystem::path& path, const Tensor& x) {
  write_rows(path, x, nullptr);
}

LabeledSet read_csv_dataset(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_cells(path, &header);
  if (header.size() < 2 || header.back() != "label") {
    throw FormatError(path.string() + ": last column must be 'label'");
  }
  LabeledSet set;
  if (rows.empty()) return set;
  const std::size_t d = header.size() - 1;
  std::vector<double> data;
  data.reserve(rows.size() * d);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < d; ++j) data.push_back(parse_double(header[j], row[j]));
    set.labels.push_back(static_cast<int>(parse_size("label", row[d])));
  }
  set.x = Tensor({rows.size(), d}, std::move(data));
  return set;
}

Tensor read_csv_features(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_cells(path, &header);
  if (rows.empty()) return {};
  std::vector<double> data;
  data.reserve(rows.size() * header.size());
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < header.size(); ++j) data.push_back(parse_double(header[j], row[j]));
  }
  return Tensor({rows.size(), header.size()}, std::move(data));
}

}  // namespace dpn
