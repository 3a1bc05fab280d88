#include "sve/augmentation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

#include "json.hpp"
#include "sve/csv.hpp"
#include "sve/error.hpp"
#include "sve/parallel.hpp"
#include "sve/raster_io.hpp"

namespace sve {

namespace {

using nlohmann::json;

// Snaps sample coordinates that land within this distance outside the frame
// back onto the border, so exact quarter turns and full turns do not lose
// their edge rows to rounding noise.
constexpr double kBorderSnap = 1e-9;

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void cos_sin_degrees(double degrees, double& c, double& s) {
  double a = std::fmod(degrees, 360.0);
  if (a < 0) a += 360.0;
  if (a == 0.0) { c = 1; s = 0; return; }
  if (a == 90.0) { c = 0; s = 1; return; }
  if (a == 180.0) { c = -1; s = 0; return; }
  if (a == 270.0) { c = 0; s = -1; return; }
  const double r = a * std::numbers::pi / 180.0;
  c = std::cos(r);
  s = std::sin(r);
}

}  // namespace

RasterImage rotate(const RasterImage& image, double degrees) {
  double c, s;
  cos_sin_degrees(degrees, c, s);
  const int w = image.width(), h = image.height();
  RasterImage out(w, h);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  for (int y = 0; y < h; ++y) {
    const double dy = y - cy;
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      double sx = c * dx + s * dy + cx;
      double sy = -s * dx + c * dy + cy;
      if (sx < -kBorderSnap || sy < -kBorderSnap || sx > w - 1 + kBorderSnap || sy > h - 1 + kBorderSnap) continue;
      sx = std::clamp(sx, 0.0, w - 1.0);
      sy = std::clamp(sy, 0.0, h - 1.0);
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = image.channel(x0, y0, ch) * (1 - fx) + image.channel(x1, y0, ch) * fx;
        const double bottom = image.channel(x0, y1, ch) * (1 - fx) + image.channel(x1, y1, ch) * fx;
        out.channel(x, y, ch) = quantize(top * (1 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

RasterImage mirror(const RasterImage& image, MirrorAxis axis) {
  const int w = image.width(), h = image.height();
  RasterImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = axis == MirrorAxis::kHorizontal ? w - 1 - x : x;
      const int sy = axis == MirrorAxis::kVertical ? h - 1 - y : y;
      out.set(x, y, image.at(sx, sy));
    }
  }
  return out;
}

RasterImage add_gaussian_noise(const RasterImage& image, double mean, double stddev, RngSeed seed) {
  if (!(stddev >= 0.0) || !std::isfinite(stddev) || !std::isfinite(mean)) {
    fail(ErrorCode::kInvalidArgument, "noise standard deviation must be finite and >= 0");
  }
  RasterImage out = image;
  Rng rng(seed);
  for (auto& byte : out.bytes()) byte = quantize(byte + rng.normal(mean, stddev));
  return out;
}

PixelBox sample_cutmix_box(int width, int height, Rng& rng) {
  const double total = static_cast<double>(width) * height;
  const auto lo = static_cast<long long>(std::ceil(kCutmixMinFraction * total - 1e-9));
  const auto hi = static_cast<long long>(std::floor(kCutmixMaxFraction * total + 1e-9));
  const double fraction = rng.uniform(kCutmixMinFraction, kCutmixMaxFraction);
  int bh = std::clamp(static_cast<int>(std::lround(std::sqrt(fraction) * height)), 1, height);
  int bw = std::clamp(static_cast<int>(std::lround(fraction * total / bh)), 1, width);
  auto area = [&] { return static_cast<long long>(bw) * bh; };
  while (area() < lo && (bw < width || bh < height)) (bw < width ? bw : bh)++;
  while (area() > hi && (bw > 1 || bh > 1)) (bw > 1 ? bw : bh)--;
  if (area() < lo || area() > hi) {
    std::vector<std::pair<int, int>> feasible;
    for (int hh = 1; hh <= height; ++hh)
      for (int ww = 1; ww <= width; ++ww)
        if (static_cast<long long>(ww) * hh >= lo && static_cast<long long>(ww) * hh <= hi) feasible.emplace_back(ww, hh);
    if (feasible.empty()) {
      fail(ErrorCode::kInvalidArgument, "image " + std::to_string(width) + "x" + std::to_string(height) +
                                            " admits no cutmix rectangle covering 10-40% of its area");
    }
    std::tie(bw, bh) = feasible[rng.below(feasible.size())];
  }
  PixelBox box;
  box.width = bw;
  box.height = bh;
  box.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(width - bw + 1)));
  box.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(height - bh + 1)));
  return box;
}

RasterImage cutmix_same_class(const RasterImage& a, const RasterImage& b, int label_a, int label_b, RngSeed seed,
                              PixelBox* box_out) {
  if (label_a != label_b) {
    fail(ErrorCode::kClassMismatch, "cutmix sources have labels " + std::to_string(label_a) + " and " +
                                        std::to_string(label_b));
  }
  if (a.width() != b.width() || a.height() != b.height()) {
    fail(ErrorCode::kDimensionMismatch, "cutmix sources differ in size");
  }
  Rng rng(seed);
  const PixelBox box = sample_cutmix_box(a.width(), a.height(), rng);
  RasterImage out = a;
  for (int y = box.y; y < box.y + box.height; ++y)
    for (int x = box.x; x < box.x + box.width; ++x) out.set(x, y, b.at(x, y));
  if (box_out) *box_out = box;
  return out;
}

RasterImage random_crop(const RasterImage& image, int crop_height, int crop_width, RngSeed seed, PixelBox* box_out) {
  if (crop_height < 1 || crop_width < 1 || crop_height > image.height() || crop_width > image.width()) {
    fail(ErrorCode::kInvalidArgument, "crop " + std::to_string(crop_width) + "x" + std::to_string(crop_height) +
                                          " does not fit in image " + std::to_string(image.width()) + "x" +
                                          std::to_string(image.height()));
  }
  Rng rng(seed);
  PixelBox box{0, 0, crop_width, crop_height};
  box.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(image.width() - crop_width + 1)));
  box.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(image.height() - crop_height + 1)));
  RasterImage out(crop_width, crop_height);
  for (int y = 0; y < crop_height; ++y)
    for (int x = 0; x < crop_width; ++x) out.set(x, y, image.at(box.x + x, box.y + y));
  if (box_out) *box_out = box;
  return out;
}

RasterImage random_crop_resize(const RasterImage& image, double ratio, RngSeed seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) fail(ErrorCode::kInvalidArgument, "crop ratio must be in (0, 1]");
  const int ch = std::max(1, static_cast<int>(std::lround(image.height() * ratio)));
  const int cw = std::max(1, static_cast<int>(std::lround(image.width() * ratio)));
  return resize_bilinear(random_crop(image, ch, cw, seed), image.width(), image.height());
}

std::string AugOp::to_string() const {
  switch (kind) {
    case AugOpKind::kRotate: return "rotate(" + shortest(angle) + ")";
    case AugOpKind::kMirror: return axis == MirrorAxis::kHorizontal ? "mirror(horizontal)" : "mirror(vertical)";
    case AugOpKind::kNoise: return "noise(" + shortest(noise_mean) + "," + shortest(noise_std) + ")";
    case AugOpKind::kCutmix: return "cutmix(" + partner + ")";
    case AugOpKind::kCrop: return "crop(" + shortest(crop_ratio) + ")";
  }
  return "";
}

AugOp AugOp::parse(std::string_view text) {
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    fail(ErrorCode::kMalformed, "malformed augmentation op '" + std::string(text) + "'");
  }
  const auto name = text.substr(0, open);
  const auto arg = text.substr(open + 1, text.size() - open - 2);
  auto number = [&](std::string_view s) {
    const auto v = csv::parse_double(s);
    if (!v || !std::isfinite(*v)) fail(ErrorCode::kMalformed, "bad number in op '" + std::string(text) + "'");
    return *v;
  };
  AugOp op;
  if (name == "rotate") {
    op.kind = AugOpKind::kRotate;
    op.angle = number(arg);
  } else if (name == "mirror") {
    op.kind = AugOpKind::kMirror;
    if (arg == "horizontal") op.axis = MirrorAxis::kHorizontal;
    else if (arg == "vertical") op.axis = MirrorAxis::kVertical;
    else fail(ErrorCode::kMalformed, "bad mirror axis in '" + std::string(text) + "'");
  } else if (name == "noise") {
    op.kind = AugOpKind::kNoise;
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) fail(ErrorCode::kMalformed, "noise op needs mean,std");
    op.noise_mean = number(arg.substr(0, comma));
    op.noise_std = number(arg.substr(comma + 1));
  } else if (name == "cutmix") {
    op.kind = AugOpKind::kCutmix;
    op.partner = std::string(arg);
    if (!is_valid_sample_id(op.partner)) fail(ErrorCode::kMalformed, "bad cutmix partner in '" + std::string(text) + "'");
  } else if (name == "crop") {
    op.kind = AugOpKind::kCrop;
    op.crop_ratio = number(arg);
  } else {
    fail(ErrorCode::kMalformed, "unknown augmentation op '" + std::string(text) + "'");
  }
  return op;
}

std::size_t AugmentationPlan::size() const {
  std::size_t n = 0;
  for (const auto& [label, entries] : per_class) n += entries.size();
  return n;
}

std::string AugmentationPlan::to_json() const {
  json classes = json::object();
  for (const auto& [label, entries] : per_class) {
    json list = json::array();
    for (const auto& e : entries) {
      json ops = json::array();
      for (const auto& op : e.ops) ops.push_back(op.to_string());
      list.push_back({{"source", e.source_id}, {"derived", e.derived_id}, {"ops", ops}, {"seed", e.seed.value}});
    }
    classes[std::to_string(label)] = list;
  }
  json doc = {{"format", "sve-augmentation-plan"}, {"version", 1}, {"seed", seed.value},
              {"target", target},            {"classes", classes}};
  return doc.dump(2) + "\n";
}

AugmentationPlan AugmentationPlan::from_json(std::string_view text) {
  AugmentationPlan plan;
  try {
    const auto doc = json::parse(text);
    if (doc.at("format") != "sve-augmentation-plan") fail(ErrorCode::kMalformed, "not an augmentation plan");
    if (doc.at("version") != 1) fail(ErrorCode::kVersionMismatch, "unsupported augmentation plan version");
    plan.seed = RngSeed{doc.at("seed").get<std::uint64_t>()};
    plan.target = doc.at("target").get<std::size_t>();
    for (const auto& [key, list] : doc.at("classes").items()) {
      const auto label = csv::parse_int(key);
      if (!label || *label < 0 || *label >= kClassCount) fail(ErrorCode::kOutOfRange, "bad class key " + key);
      auto& entries = plan.per_class[static_cast<int>(*label)];
      for (const auto& e : list) {
        PlannedSample s;
        s.source_id = e.at("source").get<std::string>();
        s.derived_id = e.at("derived").get<std::string>();
        s.seed = RngSeed{e.at("seed").get<std::uint64_t>()};
        for (const auto& op : e.at("ops")) s.ops.push_back(AugOp::parse(op.get<std::string>()));
        entries.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("corrupt augmentation plan: ") + e.what());
  }
  return plan;
}

const std::vector<double>& default_rotation_angles() {
  static const std::vector<double> angles = {5, -5, 10, -10, 15, -15, 30, -30, 45, -45, 90, 180, 270};
  return angles;
}

std::size_t default_balance_target(const std::map<int, std::vector<std::string>>& class_members) {
  std::size_t largest = 0;
  for (const auto& [label, members] : class_members) largest = std::max(largest, members.size());
  return (largest + 9) / 10 * 10;
}

AugmentationPlan build_balance_plan(const std::map<int, std::vector<std::string>>& class_members,
                                    const BalanceOptions& options, RngSeed seed) {
  std::size_t largest = 0;
  for (const auto& [label, members] : class_members) {
    if (members.empty()) fail(ErrorCode::kInvalidArgument, "class " + std::to_string(label) + " has no samples to augment");
    largest = std::max(largest, members.size());
  }
  if (options.target < largest && !options.allow_undershoot) {
    fail(ErrorCode::kInvalidArgument, "target " + std::to_string(options.target) + " is below the largest class (" +
                                          std::to_string(largest) + "); allow undershoot explicitly");
  }
  if (!(options.noise_std >= 0.0)) fail(ErrorCode::kInvalidArgument, "noise std must be >= 0");

  AugmentationPlan plan;
  plan.seed = seed;
  plan.target = options.target;
  for (const auto& [label, original_members] : class_members) {
    if (original_members.size() >= options.target) continue;
    const std::size_t needed = options.target - original_members.size();
    auto members = original_members;
    Rng rng(derive_seed(seed, "class-order:" + std::to_string(label)));
    rng.shuffle(members);
    const std::size_t n = members.size();

    auto& entries = plan.per_class[label];
    auto add = [&](const std::string& source, AugOp op) {
      PlannedSample s;
      s.source_id = source;
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "__aug%03zu", entries.size());
      s.derived_id = source + suffix;
      s.ops.push_back(std::move(op));
      if (options.random_crop) {
        AugOp crop;
        crop.kind = AugOpKind::kCrop;
        crop.crop_ratio = options.crop_ratio;
        s.ops.push_back(crop);
      }
      s.seed = derive_seed(seed, s.derived_id);
      entries.push_back(std::move(s));
      return entries.size() >= needed;
    };
    auto fill = [&]() {
      for (double angle : options.angles) {
        for (const auto& src : members) {
          AugOp op;
          op.kind = AugOpKind::kRotate;
          op.angle = angle;
          if (add(src, op)) return;
        }
      }
      for (auto axis : {MirrorAxis::kHorizontal, MirrorAxis::kVertical}) {
        for (const auto& src : members) {
          AugOp op;
          op.kind = AugOpKind::kMirror;
          op.axis = axis;
          if (add(src, op)) return;
        }
      }
      auto noise = [&](const std::string& src) {
        AugOp op;
        op.kind = AugOpKind::kNoise;
        op.noise_mean = options.noise_mean;
        op.noise_std = options.noise_std;
        return add(src, op);
      };
      for (const auto& src : members)
        if (noise(src)) return;
      for (std::size_t offset = 1; offset < n; ++offset) {
        for (std::size_t i = 0; i < n; ++i) {
          AugOp op;
          op.kind = AugOpKind::kCutmix;
          op.partner = members[(i + offset) % n];
          if (add(members[i], op)) return;
        }
      }
      for (;;)
        for (const auto& src : members)
          if (noise(src)) return;
    };
    fill();
  }
  return plan;
}

std::map<int, std::vector<std::string>> class_members(const Manifest& manifest, const std::set<Split>& splits) {
  std::map<int, std::vector<std::string>> out;
  for (const auto& r : manifest.records) {
    if (!r.provenance.augmented && splits.count(r.split)) out[r.label].push_back(r.id);
  }
  return out;
}

Manifest execute_plan(const AugmentationPlan& plan, const Manifest& manifest, const ExecuteOptions& options) {
  manifest.validate();
  auto eligible = [&](const std::string& id, int label) -> const SampleRecord& {
    const SampleRecord* r = manifest.find(id);
    if (!r) fail(ErrorCode::kNotFound, "plan references unknown sample '" + id + "'");
    if (!options.eligible_splits.count(r->split)) {
      fail(ErrorCode::kInvalidArgument, "sample '" + id + "' is in the " + std::string(to_string(r->split)) +
                                            " split, which is not eligible for augmentation");
    }
    if (r->label != label) {
      fail(ErrorCode::kClassMismatch, "sample '" + id + "' is planned under class " + std::to_string(label) +
                                          " but is labelled " + std::to_string(r->label));
    }
    return *r;
  };

  struct Job {
    const PlannedSample* entry;
    const SampleRecord* source;
    int label;
  };
  std::vector<Job> jobs;
  for (const auto& [label, entries] : plan.per_class) {
    for (const auto& e : entries) {
      const auto& src = eligible(e.source_id, label);
      for (const auto& op : e.ops)
        if (op.kind == AugOpKind::kCutmix) eligible(op.partner, label);
      jobs.push_back({&e, &src, label});
    }
  }
  if (jobs.empty()) return manifest;

  std::filesystem::create_directories(options.out_dir);
  std::vector<std::filesystem::path> outputs(jobs.size());
  parallel_for(jobs.size(), options.jobs, [&](std::size_t j) {
    const auto& job = jobs[j];
    RasterImage image = load_raster(job.source->image);
    for (std::size_t k = 0; k < job.entry->ops.size(); ++k) {
      const auto& op = job.entry->ops[k];
      const RngSeed step_seed = derive_seed(job.entry->seed, static_cast<std::uint64_t>(k));
      switch (op.kind) {
        case AugOpKind::kRotate: image = rotate(image, op.angle); break;
        case AugOpKind::kMirror: image = mirror(image, op.axis); break;
        case AugOpKind::kNoise: image = add_gaussian_noise(image, op.noise_mean, op.noise_std, step_seed); break;
        case AugOpKind::kCutmix: {
          const auto partner = load_raster(manifest.find(op.partner)->image);
          image = cutmix_same_class(image, partner, job.label, job.label, step_seed);
          break;
        }
        case AugOpKind::kCrop: image = random_crop_resize(image, op.crop_ratio, step_seed); break;
      }
    }
    outputs[j] = (options.out_dir / (job.entry->derived_id + ".png")).lexically_normal();
    save_raster(image, outputs[j]);
  });

  Manifest out = manifest;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    SampleRecord r;
    r.id = job.entry->derived_id;
    r.image = outputs[j];
    r.label = job.label;
    r.split = job.source->split;
    r.provenance.augmented = true;
    r.provenance.sources.push_back(job.entry->source_id);
    for (const auto& op : job.entry->ops) {
      if (op.kind == AugOpKind::kCutmix) r.provenance.sources.push_back(op.partner);
      r.provenance.ops.push_back(op.to_string());
    }
    r.provenance.seed = job.entry->seed.value;
    out.records.push_back(std::move(r));
  }
  out.validate();
  return out;
}

}  // namespace sve
