#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "egotraj/actions.hpp"
#include "egotraj/curation.hpp"
#include "egotraj/datastore.hpp"
#include "egotraj/registration.hpp"
#include "egotraj/synth.hpp"

namespace egotraj {

/// Resolved configuration of a batch run. Every command serializes this next
/// to its outputs so runs can be reproduced and audited.
struct RunConfig {
  RegistrationConfig registration;
  CurationConfig curation;
  int horizon = 16;
  int shard_size = 256;
  DeltaRotationMode delta_rotation_mode = DeltaRotationMode::elementwise;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string dataset_tag = "egotraj";

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

struct ExtractOutcome {
  int n_ok = 0;
  int n_failed = 0;
  std::filesystem::path manifest_path;
};

/// Registers and extracts every *.egtr bundle under input_dir into out_dir.
/// Per-episode failures are recorded in the manifest, never abort the batch.
/// Bundles already processed (same content hash, output present) are skipped.
ExtractOutcome run_extract(const std::filesystem::path& input_dir,
                           const std::filesystem::path& out_dir, const RunConfig& config);

struct CurateOutcome {
  int kept = 0;
  int rejected = 0;
  std::filesystem::path csv_path;
};

/// Applies the curation filters to every episode in the manifest, rewrites
/// the episode files with their reports (kept ones smoothed), refreshes the
/// manifest verdicts, computes normalization statistics over the kept set,
/// and writes the per-episode CSV report.
CurateOutcome run_curate(const std::filesystem::path& manifest_path, const RunConfig& config);

/// Table-style dataset statistics, as human-readable text or JSON.
std::string run_stats(const std::filesystem::path& manifest_path, bool as_json);

struct SynthOutcome {
  int generated = 0;
  std::filesystem::path bundles_manifest;
  std::filesystem::path gt_manifest;
};

/// Generates `count` episodes from the base spec (seed, seed+1, ...): track
/// bundles for the pipeline under out/bundles and ground-truth trajectories
/// under out/gt.
SynthOutcome run_synth(const SceneSpec& base_spec, int count, std::uint64_t seed,
                       const std::filesystem::path& out_dir, const RunConfig& config);

struct EvalOutcome {
  int episodes = 0;
  double mean_ate_rmse_m = 0.0;
  double max_ate_rmse_m = 0.0;
  double max_rot_geodesic_deg = 0.0;
  std::filesystem::path report_path;
};

/// Compares recovered trajectories against ground truth by episode id and
/// writes a metrics JSON report.
EvalOutcome run_eval(const std::filesystem::path& gt_manifest_path,
                     const std::filesystem::path& recovered_manifest_path,
                     const std::filesystem::path& out_path);

struct ExportOutcome {
  std::size_t total_chunks = 0;
  int shards = 0;
  std::filesystem::path index_path;
};

/// Exports the kept episodes of a curated manifest as training shards.
ExportOutcome run_export(const std::filesystem::path& manifest_path,
                         const std::filesystem::path& out_dir, const RunConfig& config);

}  // namespace egotraj
