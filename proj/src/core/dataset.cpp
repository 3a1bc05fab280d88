#include "sve/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "sve/csv.hpp"
#include "sve/error.hpp"
#include "sve/raster_io.hpp"

namespace sve {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestHeader = "id,image,mask,label,split,provenance";

std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

int parse_label(std::string_view text, const std::string& context) {
  const auto value = csv::parse_int(text);
  if (!value) fail(ErrorCode::kMalformed, context + ": label '" + std::string(text) + "' is not an integer");
  if (*value < 0 || *value >= kClassCount) {
    fail(ErrorCode::kOutOfRange, context + ": label " + std::to_string(*value) + " outside 0.." +
                                     std::to_string(kClassCount - 1));
  }
  return static_cast<int>(*value);
}

fs::path resolve(const fs::path& base, const std::string& text) {
  fs::path p(text);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::string relative_to(const fs::path& path, const fs::path& base) {
  if (base.empty()) return path.generic_string();
  return path.lexically_proximate(base).generic_string();
}

}  // namespace

const std::array<std::string, kClassCount>& stare_class_names() {
  static const std::array<std::string, kClassCount> names = {
      "None (Normal)", "Emboli", "BRAO", "CRAO", "BRVO", "CRVO", "Hemi-CRVO",
      "BDR/NPDR",      "PDR",    "ASR",  "HTR",  "Coat's", "Macroaneurism", "CNV"};
  return names;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  if (text == "unassigned" || text.empty()) return Split::kUnassigned;
  fail(ErrorCode::kMalformed, "unknown split '" + std::string(text) + "'");
}

std::string Provenance::to_string() const {
  if (!augmented) return "original";
  return "augmented:" + join(sources, '+') + ":" + join(ops, ';') + ":" + std::to_string(seed);
}

Provenance Provenance::parse(std::string_view text) {
  if (text == "original" || text.empty()) return {};
  const auto parts = split_on(text, ':');
  if (parts.size() != 4 || parts[0] != "augmented") {
    fail(ErrorCode::kMalformed, "malformed provenance '" + std::string(text) + "'");
  }
  Provenance p;
  p.augmented = true;
  if (!parts[1].empty()) p.sources = split_on(parts[1], '+');
  if (!parts[2].empty()) p.ops = split_on(parts[2], ';');
  // Seeds are 64-bit unsigned, beyond the range of parse_int.
  try {
    if (parts[3].empty() || !std::all_of(parts[3].begin(), parts[3].end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw std::invalid_argument("not a decimal seed");
    }
    std::size_t used = 0;
    p.seed = std::stoull(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(ErrorCode::kMalformed, "malformed provenance seed in '" + std::string(text) + "'");
  }
  return p;
}

bool is_valid_sample_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
  });
}

void Manifest::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (!is_valid_sample_id(r.id)) fail(ErrorCode::kMalformed, "invalid sample id '" + r.id + "'");
    if (!seen.insert(r.id).second) fail(ErrorCode::kDuplicateId, "duplicate sample id '" + r.id + "'");
    if (r.label < 0 || r.label >= kClassCount) {
      fail(ErrorCode::kOutOfRange, "sample '" + r.id + "' has label " + std::to_string(r.label));
    }
    if (r.provenance.augmented && r.provenance.sources.empty()) {
      fail(ErrorCode::kMalformed, "augmented sample '" + r.id + "' has no sources");
    }
  }
}

const SampleRecord* Manifest::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

Manifest load_manifest(const fs::path& path, const ManifestLoadOptions& options) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) fail(ErrorCode::kMalformed, "manifest " + path.string() + " has no header");
  {
    std::ostringstream header;
    csv::write_row(header, rows.front());
    auto h = header.str();
    h.pop_back();
    if (h != kManifestHeader) {
      fail(ErrorCode::kMalformed, "manifest header must be '" + std::string(kManifestHeader) + "', got '" + h + "'");
    }
  }
  const fs::path base = path.parent_path();
  Manifest manifest;
  manifest.name = path.stem().string();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    const std::string context = path.string() + ":" + std::to_string(i + 1);
    if (row.size() != 6) fail(ErrorCode::kMalformed, context + ": expected 6 columns, got " + std::to_string(row.size()));
    SampleRecord r;
    r.id = row[0];
    if (row[1].empty()) fail(ErrorCode::kMalformed, context + ": empty image path");
    r.image = resolve(base, row[1]);
    if (!row[2].empty()) r.mask = resolve(base, row[2]);
    r.label = parse_label(row[3], context);
    r.split = parse_split(row[4]);
    r.provenance = Provenance::parse(row[5]);
    manifest.records.push_back(std::move(r));
  }
  manifest.validate();
  if (options.check_files) {
    for (const auto& r : manifest.records) {
      if (!fs::exists(r.image)) fail(ErrorCode::kNotFound, "sample '" + r.id + "': missing image " + r.image.string());
      if (r.mask && !fs::exists(*r.mask)) fail(ErrorCode::kNotFound, "sample '" + r.id + "': missing mask " + r.mask->string());
      if (r.mask) {
        const auto image = load_raster(r.image);
        const auto mask = load_raster(*r.mask);
        if (image.width() != mask.width() || image.height() != mask.height()) {
          fail(ErrorCode::kDimensionMismatch, "sample '" + r.id + "': mask dimensions differ from image");
        }
      }
    }
  }
  return manifest;
}

std::string manifest_to_csv(const Manifest& manifest, const fs::path& base_dir) {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : manifest.records) {
    csv::write_row(out, {r.id, relative_to(r.image, base_dir), r.mask ? relative_to(*r.mask, base_dir) : "",
                         std::to_string(r.label), std::string(to_string(r.split)), r.provenance.to_string()});
  }
  return out.str();
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  manifest.validate();
  csv::write_text(path, manifest_to_csv(manifest, path.parent_path()));
}

std::array<std::size_t, 3> split_sizes(std::size_t count, const SplitRatios& ratios) {
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double quota = static_cast<double>(count) * r[k];
    sizes[k] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[k] = quota - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t k = 0; assigned < count; k = (k + 1) % 3) {
    ++sizes[order[k]];
    ++assigned;
  }
  if (count >= 3 && sizes[0] == 0) {
    const int donor = sizes[1] >= sizes[2] ? 1 : 2;
    --sizes[donor];
    ++sizes[0];
  }
  return sizes;
}

Manifest stratified_split(const Manifest& manifest, const SplitRatios& ratios, RngSeed seed) {
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  for (double v : r) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "split ratios must be positive");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument, "split ratios must sum to 1");
  }
  manifest.validate();
  Manifest out = manifest;
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    if (!out.records[i].provenance.augmented) by_class[out.records[i].label].push_back(i);
  }
  constexpr std::array<Split, 3> kSplits = {Split::kTrain, Split::kVal, Split::kTest};
  for (auto& [label, members] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(members);
    const auto sizes = split_sizes(members.size(), ratios);
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      for (std::size_t n = 0; n < sizes[k]; ++n) out.records[members[pos++]].split = kSplits[k];
    }
  }
  return out;
}

std::size_t Distribution::total() const {
  std::size_t sum = 0;
  for (const auto& [split, row] : counts) sum += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return sum;
}

std::size_t Distribution::count(Split split, int label) const {
  const auto it = counts.find(split);
  return it == counts.end() ? 0 : it->second.at(static_cast<std::size_t>(label));
}

Distribution summarize_distribution(const Manifest& manifest) {
  Distribution d;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) d.counts[s].fill(0);
  for (const auto& r : manifest.records) {
    if (r.split == Split::kUnassigned) {
      fail(ErrorCode::kInvalidArgument, "sample '" + r.id + "' has no split assigned");
    }
    ++d.counts[r.split].at(static_cast<std::size_t>(r.label));
  }
  return d;
}

ManifestInitResult manifest_init(const fs::path& images_dir, const fs::path& labels_file,
                                 const std::optional<fs::path>& masks_dir) {
  if (!fs::is_directory(images_dir)) fail(ErrorCode::kNotFound, "image directory not found: " + images_dir.string());
  ManifestInitResult result;
  result.manifest.name = images_dir.filename().string();

  std::map<std::string, fs::path> images;
  for (const auto& entry : fs::directory_iterator(images_dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".ppm") images[entry.path().stem().string()] = entry.path().lexically_normal();
  }
  std::map<std::string, fs::path> masks;
  if (masks_dir) {
    if (!fs::is_directory(*masks_dir)) fail(ErrorCode::kNotFound, "mask directory not found: " + masks_dir->string());
    for (const auto& entry : fs::directory_iterator(*masks_dir)) {
      if (entry.is_regular_file()) masks[entry.path().stem().string()] = entry.path().lexically_normal();
    }
  }

  const auto text = csv::read_text(labels_file);
  std::istringstream lines(text);
  std::string line;
  std::set<std::string> labelled;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    std::string stem, label_text;
    if (!(fields >> stem) || stem.front() == '#') continue;
    if (!(fields >> label_text)) {
      fail(ErrorCode::kMalformed, labels_file.string() + ":" + std::to_string(line_no) + ": missing label");
    }
    const auto label = csv::parse_int(label_text);
    if (!label) {
      fail(ErrorCode::kMalformed, labels_file.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    if (*label < 0 || *label >= kClassCount) {
      ++result.skipped;
      continue;
    }
    const auto it = images.find(stem);
    if (it == images.end()) {
      result.warnings.push_back("no image for labelled stem '" + stem + "'");
      continue;
    }
    if (!labelled.insert(stem).second) fail(ErrorCode::kDuplicateId, "stem '" + stem + "' labelled twice");
    SampleRecord r;
    r.id = stem;
    r.image = it->second;
    if (const auto m = masks.find(stem); m != masks.end()) r.mask = m->second;
    r.label = static_cast<int>(*label);
    result.manifest.records.push_back(std::move(r));
  }
  for (const auto& [stem, path] : images) {
    if (!labelled.count(stem)) result.warnings.push_back("image '" + stem + "' has no label");
  }
  std::sort(result.manifest.records.begin(), result.manifest.records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.id < b.id; });
  result.manifest.validate();
  return result;
}

}  // namespace sve
