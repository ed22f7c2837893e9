#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egotraj/actions.hpp"
#include "egotraj/curation.hpp"
#include "egotraj/types.hpp"

namespace egotraj {

inline constexpr std::uint32_t kFormatVersion = 1;

/// Serializes the episode under root/episodes/<id>.egtr (atomic temp+rename)
/// and returns the path relative to root. The episode must validate cleanly.
std::string write_episode(const Episode& ep, const std::filesystem::path& root);

/// Reads one episode file. Throws BadMagic / VersionUnsupported /
/// TruncatedFile with the byte offset where the problem was found.
Episode read_episode(const std::filesystem::path& path);

/// FNV-1a 64-bit over a byte buffer; used for restartable batch runs.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t hash_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string id;
  std::string path;  // relative to the manifest directory; empty when no file exists
  std::optional<Verdict> verdict;
  std::string verb;
  std::string object;
  int frames = 0;
  std::string source_dataset;
  std::uint64_t input_hash = 0;
  std::string error;  // extraction failure or degeneracy note
};

struct Manifest {
  std::uint32_t format_version = kFormatVersion;
  std::string dataset_tag;
  std::vector<ManifestEntry> episodes;
  std::optional<NormStats> norm_stats;
  std::optional<CurationConfig> curation_config;
  std::optional<DeltaRotationMode> delta_rotation_mode;
  std::string run_config_json;  // opaque resolved run configuration
};

/// One JSON header line followed by one JSON line per episode. Writes are
/// atomic and guarded by an advisory .lock file (single writer).
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Reads and validates a manifest: unique ids, stats block consistent with
/// a recount, and every non-empty episode path present on disk.
/// Throws ManifestCorrupt on any violation.
Manifest read_manifest(const std::filesystem::path& path);

struct DatasetStats {
  std::size_t episodes = 0;
  std::size_t verbs = 0;
  std::size_t objects = 0;
  std::size_t frames = 0;
};

/// Episode/verb/object/frame counts, verbs and objects canonicalized by
/// case-folding and trimming. kept_only restricts to verdict == kept.
DatasetStats dataset_stats(const Manifest& manifest, bool kept_only);

struct ShardRun {
  std::string episode_id;
  int chunk_begin = 0;  // chunk ordinal within the episode, 0-based
  int chunk_end = 0;    // exclusive
};

struct ShardInfo {
  std::string file;
  int n_chunks = 0;
  std::vector<ShardRun> runs;
};

struct ShardIndex {
  std::uint32_t format_version = kFormatVersion;
  std::uint64_t seed = 0;
  int horizon = 0;
  int shard_size = 0;
  std::string dataset_tag;
  std::string delta_rotation_mode;
  std::size_t total_chunks = 0;
  std::vector<ShardInfo> shards;
};

/// Normalizes and chunks every kept episode and packs the chunks into
/// fixed-size shard files plus a JSON index. Episode order is shuffled
/// deterministically by the seed recorded in the index.
/// Throws MissingStats when the manifest has no normalization statistics.
ShardIndex export_training_shards(const Manifest& manifest,
                                  const std::filesystem::path& manifest_dir,
                                  const std::filesystem::path& out_dir, int horizon,
                                  int shard_size, std::uint64_t seed);

/// Reads back one shard file (round-trip check and downstream loading).
std::vector<ActionChunk> read_shard(const std::filesystem::path& path,
                                    std::vector<std::string>* episode_ids = nullptr);

ShardIndex read_shard_index(const std::filesystem::path& path);

}  // namespace egotraj
