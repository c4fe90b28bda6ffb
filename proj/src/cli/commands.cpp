//==============================================================================
// Copyright 2026 The lidarfeat Authors
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
//==============================================================================

#include "commands.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lidarfeat/cli.hpp"
#include "lidarfeat/error.hpp"
#include "lidarfeat/eval_metrics.hpp"
#include "lidarfeat/geometry.hpp"
#include "lidarfeat/parallel.hpp"
#include "lidarfeat/sdsc_cost.hpp"
#include "lidarfeat/strfd_sampler.hpp"

namespace lidarfeat::cli {

namespace {

using json = nlohmann::ordered_json;

std::string frame_stem(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06lld", static_cast<long long>(index));
  return buf;
}

const std::string& single_input(const Options& opt, const char* what) {
  if (opt.inputs.size() != 1) throw UsageError(std::string("--in must name exactly one ") + what);
  return opt.inputs.front();
}

fs::path output_dir(const Options& opt) {
  if (opt.out.empty()) throw UsageError("--out is required");
  const fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  file << text;
  if (!file) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

void emit(const json& report, std::ostream& out, const std::optional<fs::path>& file) {
  const std::string text = report.dump(2) + "\n";
  if (file) write_text(*file, text);
  out << text;
}

json header(const char* command) {
  json j;
  j["spec_version"] = kReportVersion;
  j["command"] = command;
  return j;
}

json policy_json(const RangeKPolicy& p) {
  return {{"k_close", p.k_close},
          {"k_mid", p.k_mid},
          {"k_far", p.k_far},
          {"theta_deg", p.theta_deg},
          {"delta_max", p.delta_max},
          {"boundary_close_mid", p.boundary_close_mid},
          {"boundary_mid_far", p.boundary_mid_far}};
}

std::size_t label_count(const fs::path& path) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::FileNotFound, path.string());
  return static_cast<std::size_t>(bytes / 4);
}

/// Runs `per_frame` over the catalog. Frames are spread over the workers when
/// there are enough of them; otherwise each frame gets every worker.
template <typename Fn>
void for_each_frame(const FrameCatalog& catalog, int threads, Fn&& per_frame) {
  const auto frames = static_cast<Index>(catalog.frames.size());
  if (frames >= threads) {
    parallel_for(frames, threads, [&](Index begin, Index end) {
      for (Index i = begin; i < end; ++i) per_frame(static_cast<std::size_t>(i), 1);
    });
  } else {
    for (Index i = 0; i < frames; ++i) per_frame(static_cast<std::size_t>(i), threads);
  }
}

}  // namespace

DatasetProfile resolve_profile(const Options& opt) {
  try {
    DatasetProfile p = profile_by_name(opt.profile);
    if (opt.k_near) p.policy.k_close = *opt.k_near;
    if (opt.k_mid) p.policy.k_mid = *opt.k_mid;
    if (opt.k_far) p.policy.k_far = *opt.k_far;
    if (opt.delta_max) p.policy.delta_max = *opt.delta_max;
    if (opt.theta) p.policy.theta_deg = *opt.theta;
    p.finalize();
    return p;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void run_extract(const Options& opt, std::ostream& out) {
  const DatasetProfile profile = resolve_profile(opt);
  const FrameCatalog catalog = scan_sequence(single_input(opt, "sequence directory"));
  const fs::path dir = output_dir(opt);
  const RangeKPolicy& policy = profile.policy;

  std::vector<json> entries(catalog.frames.size());
  for_each_frame(catalog, opt.threads, [&](std::size_t pos, int inner_threads) {
    const FrameEntry& frame = catalog.frames[pos];
    const PointCloud cloud = read_point_cloud(frame.cloud_path, static_cast<std::uint32_t>(frame.frame_index));
    const RapidCloud rc = prepare_rapid_cloud(cloud);
    const ExtractOptions options{opt.outlier, inner_threads};

    StackedFeatures features;
    Index excluded = 0;
    if (opt.mode == "r-rapid") {
      const RingPartition rings = partition_rings(rc.xyz, profile.beams, profile.dphi(), profile.phi_origin());
      excluded = static_cast<Index>(rings.excluded.size());
      features = r_rapid(rc, rings, policy, options);
    } else if (opt.mode == "c-rapid") {
      if (!frame.label_path) {
        throw Error(ErrorCode::FileNotFound, "frame " + std::to_string(frame.frame_index) + " (" +
                                                 frame.cloud_path.string() + ") has no label file");
      }
      std::vector<std::uint16_t> labels = read_labels(*frame.label_path, static_cast<std::size_t>(cloud.size())).semantic;
      if (opt.raw_labels) labels = map_labels(profile, labels);
      features = c_rapid(rc, labels, policy, options);
    } else {
      features = mnps_rapid(rc, policy, options);
    }

    const std::string stem = frame_stem(frame.frame_index);
    write_features(dir / (stem + ".rapd"), to_point_order(features, cloud.size()), static_cast<std::uint32_t>(policy.max_k()));

    std::vector<int> k(static_cast<std::size_t>(cloud.size()), 0);
    std::vector<int> flags(static_cast<std::size_t>(cloud.size()), 0);
    Index degenerate = 0;
    Index clamped = 0;
    for (Index r = 0; r < features.rows(); ++r) {
      const auto point = static_cast<std::size_t>(features.anchor[static_cast<std::size_t>(r)]);
      k[point] = features.k[static_cast<std::size_t>(r)];
      flags[point] = features.flags[static_cast<std::size_t>(r)];
      if (flags[point] & kRowDegenerate) ++degenerate;
      if (flags[point] & kRowClampedK) ++clamped;
    }
    json meta = header("extract");
    meta["frame"] = frame.frame_index;
    meta["points"] = cloud.size();
    meta["k"] = k;
    meta["flags"] = flags;
    write_text(dir / (stem + ".meta.json"), meta.dump() + "\n");

    entries[pos] = {{"frame", frame.frame_index},      {"file", stem + ".rapd"},  {"points", cloud.size()},
                    {"degenerate_rows", degenerate}, {"clamped_rows", clamped}, {"excluded_points", excluded}};
  });

  json summary = header("extract");
  summary["mode"] = opt.mode;
  summary["profile"] = profile.name;
  summary["policy"] = policy_json(policy);
  summary["outlier_threshold"] = opt.outlier;
  summary["feature_width"] = policy.feature_width();
  summary["sequence"] = catalog.sequence_id;
  summary["frames"] = entries;
  summary["warnings"] = catalog.warnings;
  emit(summary, out, dir / "summary.json");
}

void run_sample(const Options& opt, std::ostream& out) {
  if (opt.inputs.empty()) throw UsageError("--in must name at least one sequence directory");
  const DatasetProfile profile = resolve_profile(opt);
  const ImageSource source = parse_image_source(opt.source);
  std::vector<FrameCatalog> catalogs;
  for (const std::string& in : opt.inputs) catalogs.push_back(scan_sequence(in));

  const SamplingPlan plan =
      strfd_sample(catalogs, opt.q, opt.beta, make_image_loader(source, profile.projection), source, opt.threads);

  json report = header("sample");
  report["params"] = {{"q", plan.q}, {"beta", plan.beta}, {"source", to_string(plan.source)}};
  report["sequences"] = json::object();
  report["totals"] = json::object();
  for (const FrameCatalog& catalog : catalogs) {
    const auto& chosen = plan.sequences.at(catalog.sequence_id);
    report["sequences"][catalog.sequence_id] = chosen;
    report["totals"][catalog.sequence_id] = {{"frames", catalog.frames.size()}, {"selected", chosen.size()}};
  }
  std::optional<fs::path> file;
  if (!opt.out.empty()) file = output_dir(opt) / "plan.json";
  emit(report, out, file);
}

void run_tta(const Options& opt, std::ostream& out) {
  const DatasetProfile profile = resolve_profile(opt);
  const FrameCatalog catalog = scan_sequence(single_input(opt, "sequence directory"));
  const fs::path dir = output_dir(opt);

  std::vector<json> entries(catalog.frames.size());
  for_each_frame(catalog, opt.threads, [&](std::size_t pos, int) {
    const FrameEntry& frame = catalog.frames[pos];
    const RapidCloud rc = prepare_rapid_cloud(read_point_cloud(frame.cloud_path));
    const Eigen::MatrixXd features =
        reflec_tta_features(rc.xyz, rc.reflectivity, profile.tta_grids, profile.histogram_bins);
    const std::string stem = frame_stem(frame.frame_index);
    write_features(dir / (stem + ".tta"), features.cast<float>(), static_cast<std::uint32_t>(profile.histogram_bins));
    entries[pos] = {{"frame", frame.frame_index}, {"file", stem + ".tta"}, {"points", rc.size()}};
  });

  json grids = json::array();
  for (const BinResolution& g : profile.tta_grids) grids.push_back({g.radial_bins, g.azimuth_bins});
  json summary = header("tta");
  summary["profile"] = profile.name;
  summary["grids"] = grids;
  summary["histogram_bins"] = profile.histogram_bins;
  summary["feature_width"] = static_cast<int>(profile.tta_grids.size()) * profile.histogram_bins;
  summary["sequence"] = catalog.sequence_id;
  summary["frames"] = entries;
  emit(summary, out, dir / "summary.json");
}

void run_eval_seg(const Options& opt, std::ostream& out) {
  if (opt.pred.empty() || opt.gt.empty()) throw UsageError("eval-seg needs --pred and --gt");
  const DatasetProfile profile = resolve_profile(opt);
  if (profile.class_count() == 0) throw UsageError("profile " + profile.name + " defines no classes");

  std::vector<std::pair<fs::path, fs::path>> pairs;  // (gt, pred)
  const fs::path gt_path(opt.gt);
  const fs::path pred_path(opt.pred);
  if (fs::is_directory(gt_path) != fs::is_directory(pred_path)) {
    throw UsageError("--pred and --gt must both be files or both be directories");
  }
  if (fs::is_directory(gt_path)) {
    for (const auto& entry : fs::directory_iterator(gt_path)) {
      if (entry.path().extension() == ".label") pairs.emplace_back(entry.path(), pred_path / entry.path().filename());
    }
    std::sort(pairs.begin(), pairs.end());
    if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no .label files in " + gt_path.string());
  } else {
    pairs.emplace_back(gt_path, pred_path);
  }

  const int classes = profile.class_count();
  std::vector<ConfusionMatrix> partial(pairs.size(), ConfusionMatrix(classes));
  parallel_for(static_cast<Index>(pairs.size()), opt.threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const auto& [gt_file, pred_file] = pairs[static_cast<std::size_t>(i)];
      const std::size_t n = label_count(gt_file);
      std::vector<std::uint16_t> gt = read_labels(gt_file, n).semantic;
      if (!fs::exists(pred_file)) throw Error(ErrorCode::FileNotFound, pred_file.string());
      std::vector<std::uint16_t> pred = read_labels(pred_file, n).semantic;
      if (opt.raw_labels) {
        gt = map_labels(profile, gt);
        pred = map_labels(profile, pred);
      }
      ConfusionMatrix& cm = partial[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < n; ++j) cm.add(gt[j], pred[j]);
    }
  });

  ConfusionMatrix total(classes);
  for (const ConfusionMatrix& cm : partial) total += cm;
  const MiouResult result = miou(total);

  json report = header("eval-seg");
  report["profile"] = profile.name;
  report["files"] = pairs.size();
  std::uint64_t evaluated = total.counts().sum();
  for (std::uint64_t u : total.unmatched()) evaluated += u;
  report["evaluated_points"] = evaluated;
  report["miou"] = result.miou;
  report["classes_counted"] = result.classes_counted;
  json per_class = json::array();
  std::ostringstream csv;
  csv << "id,name,tp,fp,fn,iou\n";
  for (int c = 0; c < classes; ++c) {
    const auto& iou = result.per_class_iou[static_cast<std::size_t>(c)];
    const std::string& name = profile.class_names[static_cast<std::size_t>(c)];
    json row = {{"id", c},
                {"name", name},
                {"tp", total.true_positives(c)},
                {"fp", total.false_positives(c)},
                {"fn", total.false_negatives(c)},
                {"absent", static_cast<bool>(result.absent[static_cast<std::size_t>(c)])}};
    row["iou"] = iou ? json(*iou) : json(nullptr);
    per_class.push_back(row);
    csv << c << ',' << name << ',' << total.true_positives(c) << ',' << total.false_positives(c) << ','
        << total.false_negatives(c) << ',';
    if (iou) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", *iou);
      csv << buf;
    }
    csv << '\n';
  }
  report["classes"] = per_class;

  std::optional<fs::path> file;
  if (!opt.out.empty()) {
    const fs::path dir = output_dir(opt);
    write_text(dir / "per_class.csv", csv.str());
    file = dir / "report.json";
  }
  emit(report, out, file);
}

void run_eval_depth(const Options& opt, std::ostream& out) {
  const fs::path path(single_input(opt, "CSV file"));
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::FileNotFound, path.string());

  std::vector<double> gt;
  std::vector<double> pred;
  std::string line;
  std::size_t line_no = 0;
  auto parse = [&](std::string_view text, double& value) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
  };
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    const auto comma = line.find(',');
    double d = 0.0;
    double p = 0.0;
    const bool ok = comma != std::string::npos && parse(std::string_view(line).substr(0, comma), d) &&
                    parse(std::string_view(line).substr(comma + 1), p);
    if (!ok) {
      if (gt.empty() && line_no == 1) continue;  // header row
      throw Error(ErrorCode::MalformedFile, path.string() + ": line " + std::to_string(line_no) + " is not gt,pred");
    }
    gt.push_back(d);
    pred.push_back(p);
  }

  const Eigen::Map<const Eigen::VectorXd> d(gt.data(), static_cast<Index>(gt.size()));
  const Eigen::Map<const Eigen::VectorXd> p(pred.data(), static_cast<Index>(pred.size()));
  const DepthMetrics m = depth_metrics(d, p);

  json report = header("eval-depth");
  report["pairs"] = gt.size();
  report["abs_rel"] = m.abs_rel;
  report["sq_rel"] = m.sq_rel;
  report["rmse"] = m.rmse;
  report["rmse_log"] = m.rmse_log;
  json acc = json::array();
  for (const ThresholdAccuracy& a : m.accuracy) acc.push_back({{"threshold", a.threshold}, {"fraction", a.fraction}});
  report["accuracy"] = acc;
  report["berhu"] = {{"delta", opt.berhu_delta}, {"mean", berhu_mean(p, d, opt.berhu_delta)}};

  std::optional<fs::path> out_file;
  if (!opt.out.empty()) out_file = output_dir(opt) / "depth_report.json";
  emit(report, out, out_file);
}

namespace {

std::uint64_t read_count(const json& layer, std::initializer_list<const char*> keys, std::size_t index,
                         std::optional<std::uint64_t> fallback = std::nullopt) {
  for (const char* key : keys) {
    if (!layer.contains(key)) continue;
    const json& v = layer.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw Error(ErrorCode::MalformedFile, "layer " + std::to_string(index) + ": '" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  if (fallback) return *fallback;
  throw Error(ErrorCode::MalformedFile, "layer " + std::to_string(index) + ": missing '" + *keys.begin() + "'");
}

std::array<std::uint64_t, 3> read_dims(const json& layer, const char* key, std::size_t index) {
  if (!layer.contains(key)) return {1, 1, 1};
  const json& v = layer.at(key);
  std::array<std::uint64_t, 3> dims{};
  if (v.is_number_integer()) {
    dims.fill(v.get<std::uint64_t>());
    return dims;
  }
  if (!v.is_array() || v.size() != 3) {
    throw Error(ErrorCode::MalformedFile, "layer " + std::to_string(index) + ": '" + key + "' must be an integer or 3 integers");
  }
  for (std::size_t d = 0; d < 3; ++d) {
    if (!v[d].is_number_integer() || v[d].get<std::int64_t>() < 0) {
      throw Error(ErrorCode::MalformedFile, "layer " + std::to_string(index) + ": '" + key + "' entries must be non-negative");
    }
    dims[d] = v[d].get<std::uint64_t>();
  }
  return dims;
}

json cost_json(const CostReport& r) {
  return {{"ssc_params", r.ssc_params}, {"sdsc_params", r.sdsc_params}, {"ssc_cost", r.ssc_cost},
          {"sdsc_cost", r.sdsc_cost},   {"cost_ratio", r.cost_ratio()},  {"param_ratio", r.param_ratio()}};
}

}  // namespace

void run_sdsc_cost(const Options& opt, std::ostream& out) {
  const fs::path path(single_input(opt, "JSON layer file"));
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::FileNotFound, path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(file);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::MalformedFile, path.string() + ": expected a JSON array of layers");

  std::vector<ConvLayerSpec> layers;
  json per_layer = json::array();
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json layer = doc[i];
    if (!layer.is_object()) throw Error(ErrorCode::MalformedFile, "layer " + std::to_string(i) + " is not an object");
    ConvLayerSpec spec;
    spec.in_channels = read_count(layer, {"in_channels", "M"}, i);
    spec.out_channels = read_count(layer, {"out_channels", "N"}, i);
    spec.kernel = read_dims(layer, "kernel", i);
    spec.grid = read_dims(layer, "grid", i);
    spec.active_inputs = read_count(layer, {"active_inputs", "a"}, i, spec.kernel_volume());
    try {
      validate(spec);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedFile, "layer " + std::to_string(i) + ": " + e.what());
    }
    json entry = json::object();
    entry["name"] = layer.contains("name") && layer["name"].is_string() ? layer["name"].get<std::string>()
                                                                        : "layer" + std::to_string(i);
    entry.update(cost_json(layer_report(spec)));
    per_layer.push_back(entry);
    layers.push_back(spec);
  }

  json report = header("sdsc-cost");
  report["layers"] = per_layer;
  report["total"] = cost_json(stack_report(layers));
  std::optional<fs::path> out_file;
  if (!opt.out.empty()) out_file = output_dir(opt) / "cost_report.json";
  emit(report, out, out_file);
}

void run_reflectivity(const Options& opt, std::ostream& out) {
  const FrameCatalog catalog = scan_sequence(single_input(opt, "sequence directory"));
  const fs::path dir = output_dir(opt);
  std::vector<json> entries(catalog.frames.size());
  for_each_frame(catalog, opt.threads, [&](std::size_t pos, int) {
    const FrameEntry& frame = catalog.frames[pos];
    const PointCloud cloud = read_point_cloud(frame.cloud_path);
    const Eigen::ArrayXd intensity = cloud.intensity().cast<double>();
    const Eigen::ArrayXd range = point_ranges(cloud.xyz().cast<double>()).array();
    FeatureMatrix rows(cloud.size(), 5);
    rows.leftCols<4>() = cloud.points;
    rows.col(4) = compute_reflectivity(intensity, range).cast<float>().matrix();
    const std::string stem = frame_stem(frame.frame_index);
    write_features(dir / (stem + ".refl"), rows, 0);
    entries[pos] = {{"frame", frame.frame_index}, {"file", stem + ".refl"}, {"points", cloud.size()}};
  });
  json summary = header("reflectivity");
  summary["columns"] = {"x", "y", "z", "intensity", "reflectivity"};
  summary["sequence"] = catalog.sequence_id;
  summary["frames"] = entries;
  emit(summary, out, dir / "summary.json");
}

}  // namespace lidarfeat::cli
