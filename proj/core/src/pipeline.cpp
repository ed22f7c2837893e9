#include "egotraj/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "egotraj/errors.hpp"
#include "egotraj/logging.hpp"

namespace egotraj {

using nlohmann::json;

namespace {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(jobs, static_cast<int>(n));
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

json registration_config_to_json(const RegistrationConfig& c) {
  return json{{"max_iterations", c.max_iterations},
              {"convergence_tol", c.convergence_tol},
              {"max_correspondence_dist", c.max_correspondence_dist},
              {"color_weight", c.color_weight},
              {"min_overlap_fraction", c.min_overlap_fraction}};
}

RegistrationConfig registration_config_from_json(const json& j) {
  RegistrationConfig c;
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.convergence_tol = j.value("convergence_tol", c.convergence_tol);
  c.max_correspondence_dist = j.value("max_correspondence_dist", c.max_correspondence_dist);
  c.color_weight = j.value("color_weight", c.color_weight);
  c.min_overlap_fraction = j.value("min_overlap_fraction", c.min_overlap_fraction);
  return c;
}

json curation_config_to_json(const CurationConfig& c) {
  return json{{"delta_td_m", c.delta_td_m},
              {"delta_bgts", c.delta_bgts},
              {"epsilon_motion", c.epsilon_motion},
              {"smoothing_window", c.smoothing_window},
              {"low_motion_skip_fraction", c.low_motion_skip_fraction},
              {"background_aggregation",
               c.background_aggregation == BackgroundAggregation::mean_displacement
                   ? "mean_displacement"
                   : "per_track_average"}};
}

CurationConfig curation_config_from_json(const json& j) {
  CurationConfig c;
  c.delta_td_m = j.value("delta_td_m", c.delta_td_m);
  c.delta_bgts = j.value("delta_bgts", c.delta_bgts);
  c.epsilon_motion = j.value("epsilon_motion", c.epsilon_motion);
  c.smoothing_window = j.value("smoothing_window", c.smoothing_window);
  c.low_motion_skip_fraction = j.value("low_motion_skip_fraction", c.low_motion_skip_fraction);
  if (j.value("background_aggregation", "mean_displacement") ==
      std::string("per_track_average")) {
    c.background_aggregation = BackgroundAggregation::per_track_average;
  }
  return c;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

void write_run_config(const std::filesystem::path& dir, const RunConfig& config) {
  write_text_file(dir / "run_config.json", config.to_json() + "\n");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string RunConfig::to_json() const {
  json j{{"registration", registration_config_to_json(registration)},
         {"curation", curation_config_to_json(curation)},
         {"horizon", horizon},
         {"shard_size", shard_size},
         {"delta_rotation_mode", egotraj::to_string(delta_rotation_mode)},
         {"jobs", jobs},
         {"seed", seed},
         {"dataset_tag", dataset_tag}};
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("run config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  if (j.contains("registration")) c.registration = registration_config_from_json(j["registration"]);
  if (j.contains("curation")) c.curation = curation_config_from_json(j["curation"]);
  c.horizon = j.value("horizon", c.horizon);
  c.shard_size = j.value("shard_size", c.shard_size);
  if (j.contains("delta_rotation_mode")) {
    const auto mode = delta_rotation_mode_from_string(j["delta_rotation_mode"].get<std::string>());
    if (mode) c.delta_rotation_mode = *mode;
  }
  c.jobs = j.value("jobs", c.jobs);
  c.seed = j.value("seed", c.seed);
  c.dataset_tag = j.value("dataset_tag", c.dataset_tag);
  return c;
}

ExtractOutcome run_extract(const std::filesystem::path& input_dir,
                           const std::filesystem::path& out_dir, const RunConfig& config) {
  if (!std::filesystem::is_directory(input_dir)) {
    throw IoError("input root is not a readable directory: " + input_dir.string());
  }
  std::vector<std::filesystem::path> bundles;
  for (const auto& entry : std::filesystem::directory_iterator(input_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".egtr") {
      bundles.push_back(entry.path());
    }
  }
  // Also accept bundles nested one level down (e.g. <input>/episodes/*.egtr).
  for (const auto& entry : std::filesystem::directory_iterator(input_dir)) {
    if (!entry.is_directory()) continue;
    for (const auto& sub : std::filesystem::directory_iterator(entry.path())) {
      if (sub.is_regular_file() && sub.path().extension() == ".egtr") {
        bundles.push_back(sub.path());
      }
    }
  }
  std::sort(bundles.begin(), bundles.end());
  if (bundles.empty()) {
    throw IoError("no .egtr bundles under " + input_dir.string());
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path manifest_path = out_dir / "manifest.jsonl";

  // Restartability: reuse results whose input content is unchanged.
  std::map<std::string, ManifestEntry> previous;
  if (std::filesystem::exists(manifest_path)) {
    try {
      const Manifest old = read_manifest(manifest_path);
      for (const ManifestEntry& e : old.episodes) previous[e.id] = e;
    } catch (const Error& e) {
      log::warn(std::string("ignoring unreadable previous manifest: ") + e.what());
    }
  }

  std::vector<ManifestEntry> entries(bundles.size());
  std::atomic<int> n_ok{0}, n_failed{0};

  parallel_for(bundles.size(), config.jobs, [&](std::size_t i) {
    const std::filesystem::path& bundle_path = bundles[i];
    ManifestEntry entry;
    try {
      const std::uint64_t input_hash = hash_file(bundle_path);
      Episode ep = read_episode(bundle_path);
      entry.id = ep.id;
      entry.verb = ep.verb;
      entry.object = ep.object;
      entry.source_dataset = ep.source_dataset;
      entry.frames = static_cast<int>(ep.frames.size());
      entry.input_hash = input_hash;

      const auto prev = previous.find(ep.id);
      if (prev != previous.end() && prev->second.input_hash == input_hash &&
          !prev->second.path.empty() &&
          std::filesystem::exists(out_dir / prev->second.path)) {
        entry = prev->second;
        log::debug("skipping unchanged episode " + ep.id);
        ++n_ok;
        entries[i] = std::move(entry);
        return;
      }

      const std::vector<RigidTransform> to_start =
          register_to_start_frame(ep.frames, config.registration);
      ExtractionResult extraction =
          extract_pose_sequence(ep.frames, to_start, ep.frame_rate_hz);
      ep.trajectory = std::move(extraction.trajectory);
      if (extraction.degenerate) {
        entry.error = "degenerate: " + extraction.degenerate_reason;
      }
      entry.path = write_episode(ep, out_dir);
      ++n_ok;
    } catch (const Error& e) {
      entry.error = e.what();
      entry.path.clear();
      if (entry.id.empty()) entry.id = bundle_path.stem().string();
      ++n_failed;
      log::warn("episode " + entry.id + " failed: " + entry.error);
    }
    entries[i] = std::move(entry);
  });

  Manifest manifest;
  manifest.dataset_tag = config.dataset_tag;
  manifest.episodes = std::move(entries);
  manifest.run_config_json = config.to_json();
  write_manifest(manifest, manifest_path);
  write_run_config(out_dir, config);

  return {n_ok.load(), n_failed.load(), manifest_path};
}

CurateOutcome run_curate(const std::filesystem::path& manifest_path, const RunConfig& config) {
  if (const auto problem = config.curation.validate()) {
    throw InvalidSpec("curation config: " + *problem);
  }
  Manifest manifest = read_manifest(manifest_path);
  const std::filesystem::path root = manifest_path.parent_path();

  struct Row {
    std::string id;
    std::string travel;
    std::string bgts;
    std::string verdict;
    std::string reason;
  };
  std::vector<Row> rows(manifest.episodes.size());
  std::vector<std::vector<ActionRecord>> kept_records(manifest.episodes.size());

  parallel_for(manifest.episodes.size(), config.jobs, [&](std::size_t i) {
    ManifestEntry& entry = manifest.episodes[i];
    Row& row = rows[i];
    row.id = entry.id;
    if (entry.path.empty()) {
      // Extraction never produced a file; the episode is degenerate by fiat.
      entry.verdict = Verdict::rejected_degenerate;
      row.verdict = to_string(*entry.verdict);
      row.reason = entry.error.empty() ? "missing episode file" : entry.error;
      return;
    }
    Episode ep = read_episode(root / entry.path);
    const bool force_degenerate = entry.error.rfind("degenerate:", 0) == 0;
    ep = curate(std::move(ep), config.curation, force_degenerate);
    const CurationReport& report = *ep.curation;
    entry.verdict = report.verdict;
    row.travel = format_double(report.travel_distance_m);
    row.bgts = report.bgts ? format_double(*report.bgts) : "insufficient-motion";
    row.verdict = to_string(report.verdict);
    row.reason = report.reason;
    write_episode(ep, root);
    if (report.verdict == Verdict::kept && ep.trajectory) {
      kept_records[i] = to_actions(*ep.trajectory, config.delta_rotation_mode);
    }
  });

  int kept = 0, rejected = 0;
  std::vector<ActionRecord> all_records;
  for (std::size_t i = 0; i < manifest.episodes.size(); ++i) {
    if (manifest.episodes[i].verdict == Verdict::kept) {
      ++kept;
      all_records.insert(all_records.end(), kept_records[i].begin(), kept_records[i].end());
    } else {
      ++rejected;
    }
  }

  manifest.curation_config = config.curation;
  manifest.delta_rotation_mode = config.delta_rotation_mode;
  if (all_records.size() >= 2) {
    manifest.norm_stats = compute_norm_stats(all_records, manifest.dataset_tag);
  }
  if (manifest.run_config_json.empty()) manifest.run_config_json = config.to_json();
  write_manifest(manifest, manifest_path);

  std::ostringstream csv;
  csv << "id,travel_distance_m,bgts,verdict,reason\n";
  for (const Row& row : rows) {
    std::string reason = row.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    csv << row.id << ',' << row.travel << ',' << row.bgts << ',' << row.verdict << ','
        << reason << '\n';
  }
  csv << "# kept=" << kept << " rejected=" << rejected
      << " total=" << manifest.episodes.size() << '\n';
  const std::filesystem::path csv_path = root / "curation_report.csv";
  write_text_file(csv_path, csv.str());
  write_run_config(root, config);

  return {kept, rejected, csv_path};
}

std::string run_stats(const std::filesystem::path& manifest_path, bool as_json) {
  const Manifest manifest = read_manifest(manifest_path);
  const DatasetStats all = dataset_stats(manifest, false);
  const DatasetStats kept = dataset_stats(manifest, true);
  if (as_json) {
    json j{{"dataset_tag", manifest.dataset_tag},
           {"all",
            json{{"episodes", all.episodes},
                 {"verbs", all.verbs},
                 {"objects", all.objects},
                 {"frames", all.frames}}},
           {"kept",
            json{{"episodes", kept.episodes},
                 {"verbs", kept.verbs},
                 {"objects", kept.objects},
                 {"frames", kept.frames}}}};
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "dataset: " << manifest.dataset_tag << "\n"
     << "episodes: " << all.episodes << " (kept " << kept.episodes << ")\n"
     << "verbs: " << all.verbs << " (kept " << kept.verbs << ")\n"
     << "objects: " << all.objects << " (kept " << kept.objects << ")\n"
     << "frames: " << all.frames << " (kept " << kept.frames << ")\n";
  return os.str();
}

SynthOutcome run_synth(const SceneSpec& base_spec, int count, std::uint64_t seed,
                       const std::filesystem::path& out_dir, const RunConfig& config) {
  if (count < 1) throw InvalidSpec("synth count must be >= 1");
  const std::filesystem::path bundles_dir = out_dir / "bundles";
  const std::filesystem::path gt_dir = out_dir / "gt";
  std::filesystem::create_directories(bundles_dir);
  std::filesystem::create_directories(gt_dir);

  std::vector<ManifestEntry> bundle_entries(static_cast<std::size_t>(count));
  std::vector<ManifestEntry> gt_entries(static_cast<std::size_t>(count));

  parallel_for(static_cast<std::size_t>(count), config.jobs, [&](std::size_t i) {
    SceneSpec spec = base_spec;
    spec.seed = seed + i;
    SynthEpisode synth = generate_episode(spec);

    ManifestEntry& be = bundle_entries[i];
    be.id = synth.episode.id;
    be.verb = synth.episode.verb;
    be.object = synth.episode.object;
    be.source_dataset = synth.episode.source_dataset;
    be.frames = static_cast<int>(synth.episode.frames.size());
    be.path = write_episode(synth.episode, bundles_dir);

    Episode gt_ep;
    gt_ep.id = synth.episode.id;
    gt_ep.instruction = synth.episode.instruction;
    gt_ep.verb = synth.episode.verb;
    gt_ep.object = synth.episode.object;
    gt_ep.source_dataset = synth.episode.source_dataset;
    gt_ep.frame_rate_hz = synth.episode.frame_rate_hz;
    gt_ep.trajectory = synth.gt.poses;
    ManifestEntry& ge = gt_entries[i];
    ge.id = gt_ep.id;
    ge.verb = gt_ep.verb;
    ge.object = gt_ep.object;
    ge.source_dataset = gt_ep.source_dataset;
    ge.frames = static_cast<int>(synth.gt.poses.poses.size());
    ge.path = write_episode(gt_ep, gt_dir);
  });

  Manifest bundles;
  bundles.dataset_tag = config.dataset_tag + "-bundles";
  bundles.episodes = std::move(bundle_entries);
  bundles.run_config_json = config.to_json();
  const std::filesystem::path bundles_manifest = bundles_dir / "manifest.jsonl";
  write_manifest(bundles, bundles_manifest);

  Manifest gt;
  gt.dataset_tag = config.dataset_tag + "-gt";
  gt.episodes = std::move(gt_entries);
  gt.run_config_json = config.to_json();
  const std::filesystem::path gt_manifest = gt_dir / "manifest.jsonl";
  write_manifest(gt, gt_manifest);

  SceneSpec resolved = base_spec;
  resolved.seed = seed;
  write_text_file(out_dir / "scene_spec.json", resolved.to_json() + "\n");
  write_run_config(out_dir, config);

  return {count, bundles_manifest, gt_manifest};
}

EvalOutcome run_eval(const std::filesystem::path& gt_manifest_path,
                     const std::filesystem::path& recovered_manifest_path,
                     const std::filesystem::path& out_path) {
  const Manifest gt_manifest = read_manifest(gt_manifest_path);
  const Manifest rec_manifest = read_manifest(recovered_manifest_path);
  const std::filesystem::path gt_root = gt_manifest_path.parent_path();
  const std::filesystem::path rec_root = recovered_manifest_path.parent_path();

  std::map<std::string, const ManifestEntry*> rec_by_id;
  for (const ManifestEntry& e : rec_manifest.episodes) {
    if (!e.path.empty()) rec_by_id[e.id] = &e;
  }

  EvalOutcome outcome;
  json episodes = json::array();
  double ate_sum = 0.0;
  for (const ManifestEntry& ge : gt_manifest.episodes) {
    const auto it = rec_by_id.find(ge.id);
    if (it == rec_by_id.end() || ge.path.empty()) continue;
    const Episode gt_ep = read_episode(gt_root / ge.path);
    const Episode rec_ep = read_episode(rec_root / it->second->path);
    if (!gt_ep.trajectory || !rec_ep.trajectory) continue;
    GroundTruth gt;
    gt.poses = *gt_ep.trajectory;
    const RecoveryMetrics m = evaluate_recovery(gt, *rec_ep.trajectory);
    episodes.push_back(json{{"id", ge.id},
                            {"ate_rmse_m", m.ate_rmse_m},
                            {"max_rot_geodesic_deg", m.max_rot_geodesic_deg}});
    ++outcome.episodes;
    ate_sum += m.ate_rmse_m;
    outcome.max_ate_rmse_m = std::max(outcome.max_ate_rmse_m, m.ate_rmse_m);
    outcome.max_rot_geodesic_deg =
        std::max(outcome.max_rot_geodesic_deg, m.max_rot_geodesic_deg);
  }
  outcome.mean_ate_rmse_m = outcome.episodes > 0 ? ate_sum / outcome.episodes : 0.0;

  json report{{"episodes", episodes},
              {"summary",
               json{{"count", outcome.episodes},
                    {"mean_ate_rmse_m", outcome.mean_ate_rmse_m},
                    {"max_ate_rmse_m", outcome.max_ate_rmse_m},
                    {"max_rot_geodesic_deg", outcome.max_rot_geodesic_deg}}}};
  write_text_file(out_path, report.dump(2) + "\n");
  outcome.report_path = out_path;
  return outcome;
}

ExportOutcome run_export(const std::filesystem::path& manifest_path,
                         const std::filesystem::path& out_dir, const RunConfig& config) {
  const Manifest manifest = read_manifest(manifest_path);
  if (manifest.delta_rotation_mode &&
      *manifest.delta_rotation_mode != config.delta_rotation_mode) {
    throw InvalidSpec(
        std::string("delta rotation mode mismatch: manifest recorded ") +
        to_string(*manifest.delta_rotation_mode) + ", requested " +
        to_string(config.delta_rotation_mode));
  }
  const ShardIndex index =
      export_training_shards(manifest, manifest_path.parent_path(), out_dir, config.horizon,
                             config.shard_size, config.seed);
  write_run_config(out_dir, config);
  return {index.total_chunks, static_cast<int>(index.shards.size()), out_dir / "index.json"};
}

}  // namespace egotraj
