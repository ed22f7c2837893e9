#include "egotraj/datastore.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "egotraj/errors.hpp"
#include "egotraj/rng.hpp"

namespace egotraj {

using nlohmann::json;

namespace {

static_assert(sizeof(double) == 8, "f64 on-disk layout requires 8-byte double");

// ---- little-endian buffer primitives ---------------------------------------

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& buf, std::int64_t v) { put_u64(buf, static_cast<std::uint64_t>(v)); }

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

class Cursor {
 public:
  Cursor(const std::string& data, std::uint64_t offset = 0) : data_(data), pos_(offset) {}

  std::uint64_t pos() const { return pos_; }
  std::uint64_t remaining() const { return data_.size() - pos_; }

  void require(std::uint64_t n, const char* what) const {
    if (pos_ + n > data_.size()) {
      throw TruncatedFile(std::string("unexpected end of file in ") + what,
                          static_cast<std::uint64_t>(data_.size()));
    }
  }

  std::uint32_t u32(const char* what) {
    require(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    require(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::int64_t i64(const char* what) { return static_cast<std::int64_t>(u64(what)); }

  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  std::string bytes(std::uint64_t n, const char* what) {
    require(n, what);
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  const std::string& data_;
  std::uint64_t pos_;
};

// ---- file helpers -----------------------------------------------------------

std::string load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Advisory single-writer lock next to the manifest.
class LockFile {
 public:
  explicit LockFile(const std::filesystem::path& target)
      : path_(target.string() + ".lock") {
    if (std::filesystem::exists(path_)) {
      throw IoError("manifest is locked by another writer: " + path_.string());
    }
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw IoError("cannot create lock file " + path_.string());
    out << "egotraj\n";
  }
  ~LockFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::filesystem::path path_;
};

std::string sanitize_id(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty()) out = "episode";
  return out;
}

std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::uint64_t parse_hex16(const std::string& s) {
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint64_t>(c - 'A' + 10);
  }
  return v;
}

std::string canonical_label(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  std::string out = s.substr(begin, end - begin);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// ---- JSON conversions --------------------------------------------------------

json dim_stats_to_json(const DimStats& s) {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  return json{{"q01", vec(s.q01)}, {"q99", vec(s.q99)}, {"mean", vec(s.mean)},
              {"std", vec(s.std)}};
}

DimStats dim_stats_from_json(const json& j) {
  auto vec = [](const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i];
    return v;
  };
  DimStats s;
  s.q01 = vec(j.at("q01"));
  s.q99 = vec(j.at("q99"));
  s.mean = vec(j.at("mean"));
  s.std = vec(j.at("std"));
  return s;
}

json norm_stats_to_json(const NormStats& s) {
  return json{{"dataset_tag", s.dataset_tag},
              {"action", dim_stats_to_json(s.action)},
              {"state", dim_stats_to_json(s.state)}};
}

NormStats norm_stats_from_json(const json& j) {
  NormStats s;
  s.dataset_tag = j.value("dataset_tag", "");
  s.action = dim_stats_from_json(j.at("action"));
  s.state = dim_stats_from_json(j.at("state"));
  return s;
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
  if (j.value("background_aggregation", "mean_displacement") == std::string("per_track_average")) {
    c.background_aggregation = BackgroundAggregation::per_track_average;
  }
  return c;
}

json curation_report_to_json(const CurationReport& r) {
  json j{{"travel_distance_m", r.travel_distance_m},
         {"verdict", to_string(r.verdict)},
         {"delta_td_m", r.delta_td_m},
         {"delta_bgts", r.delta_bgts},
         {"smoothed", r.smoothed},
         {"reason", r.reason}};
  if (r.bgts) {
    j["bgts"] = *r.bgts;
  } else {
    j["bgts"] = "insufficient-motion";
  }
  return j;
}

CurationReport curation_report_from_json(const json& j) {
  CurationReport r;
  r.travel_distance_m = j.value("travel_distance_m", 0.0);
  if (j.contains("bgts") && j["bgts"].is_number()) r.bgts = j["bgts"].get<double>();
  r.verdict = verdict_from_string(j.value("verdict", "kept")).value_or(Verdict::kept);
  r.delta_td_m = j.value("delta_td_m", 0.0);
  r.delta_bgts = j.value("delta_bgts", 0.0);
  r.smoothed = j.value("smoothed", false);
  r.reason = j.value("reason", "");
  return r;
}

// ---- episode binary blocks ---------------------------------------------------

void put_block(std::string& buf, const char tag[5], const std::string& payload) {
  buf.append(tag, 4);
  put_u64(buf, payload.size());
  buf.append(payload);
}

void put_points(std::string& payload, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(payload, m(r, c));
  }
}

Points3 read_points3(Cursor& cur, std::uint64_t rows, const char* what) {
  Points3 m(static_cast<Eigen::Index>(rows), 3);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) m(r, c) = cur.f64(what);
  }
  return m;
}

Points2 read_points2(Cursor& cur, std::uint64_t rows, const char* what) {
  Points2 m(static_cast<Eigen::Index>(rows), 2);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < 2; ++c) m(r, c) = cur.f64(what);
  }
  return m;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  const std::string data = load_file(path);
  return fnv1a64(data.data(), data.size());
}

std::string write_episode(const Episode& ep, const std::filesystem::path& root) {
  const auto violations = validate_episode(ep);
  if (!violations.empty()) {
    throw InvalidSpec("write_episode: episode invalid: " + violations.front());
  }

  const std::uint32_t t_count = ep.trajectory ? static_cast<std::uint32_t>(ep.trajectory->length()) : 0;
  const std::uint32_t n_points =
      ep.frames.empty() ? 0 : static_cast<std::uint32_t>(ep.frames.front().object_points.rows());
  std::uint32_t flags = 0;
  if (ep.trajectory) flags |= 1u;
  if (!ep.frames.empty()) flags |= 2u;
  if (ep.curation) flags |= 4u;

  std::string buf;
  buf.append("EGTR", 4);
  put_u32(buf, kFormatVersion);
  put_u32(buf, t_count);
  put_u32(buf, n_points);
  put_u32(buf, flags);

  if (ep.trajectory) {
    for (const Pose6DoF& p : ep.trajectory->poses) {
      for (int c = 0; c < 3; ++c) put_f64(buf, p.position(c));
    }
    for (const Pose6DoF& p : ep.trajectory->poses) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) put_f64(buf, p.rotation(r, c));
      }
    }
    std::string tidx;
    for (const Pose6DoF& p : ep.trajectory->poses) put_i64(tidx, p.timestamp_index);
    put_block(buf, "TIDX", tidx);
  }

  if (!ep.frames.empty()) {
    const std::uint32_t f_count = static_cast<std::uint32_t>(ep.frames.size());
    {
      std::string fidx;
      put_u32(fidx, f_count);
      for (const TrackedFrame& f : ep.frames) put_i64(fidx, f.frame_index);
      put_block(buf, "FIDX", fidx);
    }
    {
      std::string objp;
      put_u32(objp, f_count);
      put_u32(objp, n_points);
      for (const TrackedFrame& f : ep.frames) put_points(objp, f.object_points);
      put_block(buf, "OBJP", objp);
    }
    bool have_colors = true;
    for (const TrackedFrame& f : ep.frames) {
      if (f.object_colors.rows() != n_points) have_colors = false;
    }
    if (have_colors && n_points > 0) {
      std::string objc;
      put_u32(objc, f_count);
      put_u32(objc, n_points);
      for (const TrackedFrame& f : ep.frames) put_points(objc, f.object_colors);
      put_block(buf, "OBJC", objc);
    }
    bool have_scene = false;
    for (const TrackedFrame& f : ep.frames) {
      if (f.scene_points.rows() > 0) have_scene = true;
    }
    if (have_scene) {
      std::string scnp;
      put_u32(scnp, f_count);
      for (const TrackedFrame& f : ep.frames) {
        put_u32(scnp, static_cast<std::uint32_t>(f.scene_points.rows()));
        put_points(scnp, f.scene_points);
      }
      put_block(buf, "SCNP", scnp);
      bool have_scene_colors = true;
      for (const TrackedFrame& f : ep.frames) {
        if (f.scene_colors.rows() != f.scene_points.rows()) have_scene_colors = false;
      }
      if (have_scene_colors) {
        std::string scnc;
        put_u32(scnc, f_count);
        for (const TrackedFrame& f : ep.frames) {
          put_u32(scnc, static_cast<std::uint32_t>(f.scene_colors.rows()));
          put_points(scnc, f.scene_colors);
        }
        put_block(buf, "SCNC", scnc);
      }
    }
    const std::uint32_t k2d = static_cast<std::uint32_t>(ep.frames.front().object_track_2d.rows());
    if (k2d > 0) {
      std::string trk;
      put_u32(trk, f_count);
      put_u32(trk, k2d);
      for (const TrackedFrame& f : ep.frames) put_points(trk, f.object_track_2d);
      put_block(buf, "TRK2", trk);
    }
    const std::uint32_t n_bg = static_cast<std::uint32_t>(ep.frames.front().background_tracks_2d.size());
    if (n_bg > 0) {
      std::string bgt;
      put_u32(bgt, f_count);
      put_u32(bgt, n_bg);
      for (const TrackedFrame& f : ep.frames) {
        for (const Points2& track : f.background_tracks_2d) {
          put_u32(bgt, static_cast<std::uint32_t>(track.rows()));
          put_points(bgt, track);
        }
      }
      put_block(buf, "BGT2", bgt);
    }
  }

  json meta{{"id", ep.id},
            {"instruction", ep.instruction},
            {"verb", ep.verb},
            {"object", ep.object},
            {"source_dataset", ep.source_dataset},
            {"frame_rate_hz", ep.frame_rate_hz}};
  if (ep.trajectory) meta["trajectory_frame_rate_hz"] = ep.trajectory->frame_rate_hz;
  meta["curation"] = ep.curation ? curation_report_to_json(*ep.curation) : json(nullptr);
  put_block(buf, "META", meta.dump());

  const std::string rel =
      "episodes/" + sanitize_id(ep.id) + "-" +
      hex16(fnv1a64(ep.id.data(), ep.id.size())).substr(8) + ".egtr";
  write_file_atomic(root / rel, buf);
  return rel;
}

Episode read_episode(const std::filesystem::path& path) {
  const std::string data = load_file(path);
  Cursor cur(data);

  const std::string magic = cur.bytes(4, "magic");
  if (magic != "EGTR") throw BadMagic("bad magic '" + magic + "'", 0);
  const std::uint32_t version = cur.u32("format_version");
  if (version != kFormatVersion) {
    throw VersionUnsupported("unsupported format version " + std::to_string(version), 4);
  }
  const std::uint32_t t_count = cur.u32("T");
  cur.u32("N");
  cur.u32("flags");

  Episode ep;
  std::vector<Eigen::Vector3d> positions(t_count);
  std::vector<Eigen::Matrix3d> rotations(t_count);
  for (std::uint32_t t = 0; t < t_count; ++t) {
    for (int c = 0; c < 3; ++c) positions[t](c) = cur.f64("positions");
  }
  for (std::uint32_t t = 0; t < t_count; ++t) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) rotations[t](r, c) = cur.f64("rotations");
    }
  }
  if (t_count > 0) {
    Trajectory traj;
    traj.poses.resize(t_count);
    for (std::uint32_t t = 0; t < t_count; ++t) {
      traj.poses[t].position = positions[t];
      traj.poses[t].rotation = rotations[t];
      traj.poses[t].timestamp_index = static_cast<int>(t) + 1;
    }
    ep.trajectory = std::move(traj);
  }

  bool saw_meta = false;
  while (!saw_meta) {
    if (cur.remaining() == 0) {
      throw TruncatedFile("missing metadata trailer", cur.pos());
    }
    const std::string tag = cur.bytes(4, "block tag");
    const std::uint64_t len = cur.u64("block length");
    const std::uint64_t payload_start = cur.pos();
    cur.require(len, "block payload");

    if (tag == "META") {
      const std::string text = cur.bytes(len, "metadata");
      json meta;
      try {
        meta = json::parse(text);
      } catch (const json::exception& e) {
        throw FormatError(std::string("metadata JSON parse failed: ") + e.what(), payload_start);
      }
      ep.id = meta.value("id", "");
      ep.instruction = meta.value("instruction", "");
      ep.verb = meta.value("verb", "");
      ep.object = meta.value("object", "");
      ep.source_dataset = meta.value("source_dataset", "");
      ep.frame_rate_hz = meta.value("frame_rate_hz", 30.0);
      if (ep.trajectory) {
        ep.trajectory->frame_rate_hz = meta.value("trajectory_frame_rate_hz", ep.frame_rate_hz);
      }
      if (meta.contains("curation") && !meta["curation"].is_null()) {
        ep.curation = curation_report_from_json(meta["curation"]);
      }
      saw_meta = true;
    } else if (tag == "TIDX") {
      for (std::uint32_t t = 0; t < t_count && ep.trajectory; ++t) {
        ep.trajectory->poses[t].timestamp_index = static_cast<int>(cur.i64("TIDX"));
      }
    } else if (tag == "FIDX") {
      const std::uint32_t f_count = cur.u32("FIDX count");
      ep.frames.resize(f_count);
      for (std::uint32_t f = 0; f < f_count; ++f) {
        ep.frames[f].frame_index = static_cast<int>(cur.i64("FIDX"));
      }
    } else if (tag == "OBJP") {
      const std::uint32_t f_count = cur.u32("OBJP frames");
      const std::uint32_t n = cur.u32("OBJP points");
      if (ep.frames.size() < f_count) ep.frames.resize(f_count);
      for (std::uint32_t f = 0; f < f_count; ++f) {
        ep.frames[f].object_points = read_points3(cur, n, "OBJP");
      }
    } else if (tag == "OBJC") {
      const std::uint32_t f_count = cur.u32("OBJC frames");
      const std::uint32_t n = cur.u32("OBJC points");
      if (ep.frames.size() < f_count) ep.frames.resize(f_count);
      for (std::uint32_t f = 0; f < f_count; ++f) {
        ep.frames[f].object_colors = read_points3(cur, n, "OBJC");
      }
    } else if (tag == "SCNP") {
      const std::uint32_t f_count = cur.u32("SCNP frames");
      if (ep.frames.size() < f_count) ep.frames.resize(f_count);
      for (std::uint32_t f = 0; f < f_count; ++f) {
        const std::uint32_t m = cur.u32("SCNP count");
        ep.frames[f].scene_points = read_points3(cur, m, "SCNP");
      }
    } else if (tag == "SCNC") {
      const std::uint32_t f_count = cur.u32("SCNC frames");
      if (ep.frames.size() < f_count) ep.frames.resize(f_count);
      for (std::uint32_t f = 0; f < f_count; ++f) {
        const std::uint32_t m = cur.u32("SCNC count");
        ep.frames[f].scene_colors = read_points3(cur, m, "SCNC");
      }
    } else if (tag == "TRK2") {
      const std::uint32_t f_count = cur.u32("TRK2 frames");
      const std::uint32_t k = cur.u32("TRK2 points");
      if (ep.frames.size() < f_count) ep.frames.resize(f_count);
      for (std::uint32_t f = 0; f < f_count; ++f) {
        ep.frames[f].object_track_2d = read_points2(cur, k, "TRK2");
      }
    } else if (tag == "BGT2") {
      const std::uint32_t f_count = cur.u32("BGT2 frames");
      const std::uint32_t l = cur.u32("BGT2 tracks");
      if (ep.frames.size() < f_count) ep.frames.resize(f_count);
      for (std::uint32_t f = 0; f < f_count; ++f) {
        ep.frames[f].background_tracks_2d.resize(l);
        for (std::uint32_t i = 0; i < l; ++i) {
          const std::uint32_t kp = cur.u32("BGT2 count");
          ep.frames[f].background_tracks_2d[i] = read_points2(cur, kp, "BGT2");
        }
      }
    } else {
      cur.bytes(len, "unknown block");  // skip, forward compatible
    }
  }
  return ep;
}

// ---- manifest ---------------------------------------------------------------

namespace {

struct RecountedStats {
  std::size_t episodes = 0;
  std::size_t kept = 0;
  std::size_t verbs = 0;
  std::size_t objects = 0;
  std::size_t frames = 0;
};

RecountedStats recount(const Manifest& m) {
  RecountedStats s;
  std::set<std::string> verbs, objects;
  for (const ManifestEntry& e : m.episodes) {
    ++s.episodes;
    if (e.verdict && *e.verdict == Verdict::kept) ++s.kept;
    if (!e.verb.empty()) verbs.insert(canonical_label(e.verb));
    if (!e.object.empty()) objects.insert(canonical_label(e.object));
    s.frames += static_cast<std::size_t>(e.frames);
  }
  s.verbs = verbs.size();
  s.objects = objects.size();
  return s;
}

json entry_to_json(const ManifestEntry& e) {
  return json{{"id", e.id},
              {"path", e.path},
              {"verdict", e.verdict ? to_string(*e.verdict) : ""},
              {"verb", e.verb},
              {"object", e.object},
              {"frames", e.frames},
              {"source_dataset", e.source_dataset},
              {"input_hash", hex16(e.input_hash)},
              {"error", e.error}};
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.id = j.value("id", "");
  e.path = j.value("path", "");
  e.verdict = verdict_from_string(j.value("verdict", ""));
  e.verb = j.value("verb", "");
  e.object = j.value("object", "");
  e.frames = j.value("frames", 0);
  e.source_dataset = j.value("source_dataset", "");
  e.input_hash = parse_hex16(j.value("input_hash", "0"));
  e.error = j.value("error", "");
  return e;
}

}  // namespace

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  LockFile lock(path);

  const RecountedStats s = recount(manifest);
  json header{{"type", "header"},
              {"format_version", manifest.format_version},
              {"dataset_tag", manifest.dataset_tag},
              {"stats",
               json{{"episodes", s.episodes},
                    {"kept", s.kept},
                    {"verbs", s.verbs},
                    {"objects", s.objects},
                    {"frames", s.frames}}}};
  header["norm_stats"] = manifest.norm_stats ? norm_stats_to_json(*manifest.norm_stats) : json(nullptr);
  header["curation_config"] =
      manifest.curation_config ? curation_config_to_json(*manifest.curation_config) : json(nullptr);
  header["delta_rotation_mode"] =
      manifest.delta_rotation_mode ? json(to_string(*manifest.delta_rotation_mode)) : json(nullptr);
  header["run_config"] =
      manifest.run_config_json.empty() ? json(nullptr) : json::parse(manifest.run_config_json);

  std::string out = header.dump();
  out.push_back('\n');
  for (const ManifestEntry& e : manifest.episodes) {
    out += entry_to_json(e).dump();
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

Manifest read_manifest(const std::filesystem::path& path) {
  const std::string data = load_file(path);
  std::istringstream in(data);
  std::string line;
  Manifest m;
  bool have_header = false;
  json header_stats;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ManifestCorrupt("manifest line is not valid JSON: " + std::string(e.what()));
    }
    if (!have_header) {
      if (j.value("type", "") != "header") {
        throw ManifestCorrupt("manifest must start with a header line");
      }
      m.format_version = j.value("format_version", kFormatVersion);
      m.dataset_tag = j.value("dataset_tag", "");
      if (j.contains("norm_stats") && !j["norm_stats"].is_null()) {
        m.norm_stats = norm_stats_from_json(j["norm_stats"]);
      }
      if (j.contains("curation_config") && !j["curation_config"].is_null()) {
        m.curation_config = curation_config_from_json(j["curation_config"]);
      }
      if (j.contains("delta_rotation_mode") && j["delta_rotation_mode"].is_string()) {
        m.delta_rotation_mode =
            delta_rotation_mode_from_string(j["delta_rotation_mode"].get<std::string>());
      }
      if (j.contains("run_config") && !j["run_config"].is_null()) {
        m.run_config_json = j["run_config"].dump();
      }
      header_stats = j.value("stats", json::object());
      have_header = true;
    } else {
      m.episodes.push_back(entry_from_json(j));
    }
  }
  if (!have_header) throw ManifestCorrupt("manifest is empty (no header line)");

  std::set<std::string> ids;
  for (const ManifestEntry& e : m.episodes) {
    if (!ids.insert(e.id).second) {
      throw ManifestCorrupt("duplicate episode id: " + e.id);
    }
  }
  const RecountedStats s = recount(m);
  if (header_stats.value("episodes", std::size_t{0}) != s.episodes ||
      header_stats.value("kept", std::size_t{0}) != s.kept ||
      header_stats.value("verbs", std::size_t{0}) != s.verbs ||
      header_stats.value("objects", std::size_t{0}) != s.objects ||
      header_stats.value("frames", std::size_t{0}) != s.frames) {
    throw ManifestCorrupt("stats block does not match recomputed counts");
  }
  const std::filesystem::path root = path.parent_path();
  for (const ManifestEntry& e : m.episodes) {
    if (!e.path.empty() && !std::filesystem::exists(root / e.path)) {
      throw ManifestCorrupt("listed episode file missing: " + e.path);
    }
  }
  return m;
}

DatasetStats dataset_stats(const Manifest& manifest, bool kept_only) {
  DatasetStats out;
  std::set<std::string> verbs, objects;
  for (const ManifestEntry& e : manifest.episodes) {
    if (kept_only && (!e.verdict || *e.verdict != Verdict::kept)) continue;
    ++out.episodes;
    if (!e.verb.empty()) verbs.insert(canonical_label(e.verb));
    if (!e.object.empty()) objects.insert(canonical_label(e.object));
    out.frames += static_cast<std::size_t>(e.frames);
  }
  out.verbs = verbs.size();
  out.objects = objects.size();
  return out;
}

// ---- training shards ----------------------------------------------------------

namespace {

void append_chunk(std::string& buf, const std::string& episode_id, const ActionChunk& chunk) {
  put_u32(buf, static_cast<std::uint32_t>(episode_id.size()));
  buf.append(episode_id);
  put_u32(buf, static_cast<std::uint32_t>(chunk.start_t));
  put_u32(buf, static_cast<std::uint32_t>(chunk.actions.rows()));
  put_u32(buf, static_cast<std::uint32_t>(chunk.actions.cols()));
  put_u32(buf, static_cast<std::uint32_t>(chunk.state.size()));
  for (Eigen::Index r = 0; r < chunk.actions.rows(); ++r) {
    for (Eigen::Index c = 0; c < chunk.actions.cols(); ++c) put_f64(buf, chunk.actions(r, c));
  }
  for (Eigen::Index i = 0; i < chunk.state.size(); ++i) put_f64(buf, chunk.state(i));
  for (bool v : chunk.valid) buf.push_back(v ? 1 : 0);
  for (bool v : chunk.pad_mask) buf.push_back(v ? 1 : 0);
  for (bool v : chunk.state_pad_mask) buf.push_back(v ? 1 : 0);
}

json shard_index_to_json(const ShardIndex& idx) {
  json shards = json::array();
  for (const ShardInfo& s : idx.shards) {
    json runs = json::array();
    for (const ShardRun& r : s.runs) {
      runs.push_back(json{{"episode_id", r.episode_id},
                          {"chunk_begin", r.chunk_begin},
                          {"chunk_end", r.chunk_end}});
    }
    shards.push_back(json{{"file", s.file}, {"n_chunks", s.n_chunks}, {"runs", runs}});
  }
  return json{{"format_version", idx.format_version},
              {"seed", idx.seed},
              {"horizon", idx.horizon},
              {"shard_size", idx.shard_size},
              {"dataset_tag", idx.dataset_tag},
              {"delta_rotation_mode", idx.delta_rotation_mode},
              {"total_chunks", idx.total_chunks},
              {"shards", shards}};
}

}  // namespace

ShardIndex export_training_shards(const Manifest& manifest,
                                  const std::filesystem::path& manifest_dir,
                                  const std::filesystem::path& out_dir, int horizon,
                                  int shard_size, std::uint64_t seed) {
  if (!manifest.norm_stats) {
    throw MissingStats("export_training_shards: manifest has no normalization statistics");
  }
  if (horizon < 1 || shard_size < 1) {
    throw InvalidSpec("export_training_shards: horizon and shard_size must be >= 1");
  }
  const DeltaRotationMode mode =
      manifest.delta_rotation_mode.value_or(DeltaRotationMode::elementwise);

  std::vector<const ManifestEntry*> kept;
  for (const ManifestEntry& e : manifest.episodes) {
    if (e.verdict && *e.verdict == Verdict::kept && !e.path.empty()) kept.push_back(&e);
  }

  // Deterministic episode order for a given seed.
  Rng rng(seed ^ 0x5368617264734564ULL);
  for (std::size_t i = kept.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(kept[i - 1], kept[j]);
  }

  struct PendingChunk {
    std::string episode_id;
    int ordinal;
    ActionChunk chunk;
  };
  std::vector<PendingChunk> pending;
  for (const ManifestEntry* e : kept) {
    const Episode ep = read_episode(manifest_dir / e->path);
    if (!ep.trajectory) {
      throw ManifestCorrupt("kept episode has no trajectory: " + e->id);
    }
    std::vector<ActionRecord> records = to_actions(*ep.trajectory, mode);
    for (ActionRecord& rec : records) {
      rec = normalized_record(rec, *manifest.norm_stats);
      rec.source = ep.source_dataset;
    }
    std::vector<ActionChunk> chunks = chunk_actions(records, horizon);
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      pending.push_back({e->id, static_cast<int>(c), std::move(chunks[c])});
    }
  }

  ShardIndex index;
  index.seed = seed;
  index.horizon = horizon;
  index.shard_size = shard_size;
  index.dataset_tag = manifest.dataset_tag;
  index.delta_rotation_mode = to_string(mode);
  index.total_chunks = pending.size();

  std::filesystem::create_directories(out_dir);
  std::size_t pos = 0;
  int shard_no = 0;
  while (pos < pending.size()) {
    const std::size_t count =
        std::min(static_cast<std::size_t>(shard_size), pending.size() - pos);
    std::string buf;
    buf.append("EGSH", 4);
    put_u32(buf, kFormatVersion);
    put_u32(buf, static_cast<std::uint32_t>(count));

    ShardInfo info;
    char name[32];
    std::snprintf(name, sizeof(name), "shard-%05d.egsh", shard_no);
    info.file = name;
    info.n_chunks = static_cast<int>(count);
    for (std::size_t k = 0; k < count; ++k) {
      const PendingChunk& pc = pending[pos + k];
      append_chunk(buf, pc.episode_id, pc.chunk);
      if (!info.runs.empty() && info.runs.back().episode_id == pc.episode_id &&
          info.runs.back().chunk_end == pc.ordinal) {
        info.runs.back().chunk_end = pc.ordinal + 1;
      } else {
        info.runs.push_back({pc.episode_id, pc.ordinal, pc.ordinal + 1});
      }
    }
    write_file_atomic(out_dir / info.file, buf);
    index.shards.push_back(std::move(info));
    pos += count;
    ++shard_no;
  }

  write_file_atomic(out_dir / "index.json", shard_index_to_json(index).dump(2) + "\n");
  return index;
}

std::vector<ActionChunk> read_shard(const std::filesystem::path& path,
                                    std::vector<std::string>* episode_ids) {
  const std::string data = load_file(path);
  Cursor cur(data);
  const std::string magic = cur.bytes(4, "magic");
  if (magic != "EGSH") throw BadMagic("bad shard magic '" + magic + "'", 0);
  const std::uint32_t version = cur.u32("format_version");
  if (version != kFormatVersion) {
    throw VersionUnsupported("unsupported shard version " + std::to_string(version), 4);
  }
  const std::uint32_t n_chunks = cur.u32("n_chunks");
  std::vector<ActionChunk> chunks;
  chunks.reserve(n_chunks);
  for (std::uint32_t i = 0; i < n_chunks; ++i) {
    const std::uint32_t id_len = cur.u32("episode id length");
    const std::string id = cur.bytes(id_len, "episode id");
    if (episode_ids) episode_ids->push_back(id);
    ActionChunk chunk;
    chunk.start_t = static_cast<int>(cur.u32("start_t"));
    const std::uint32_t h = cur.u32("horizon");
    const std::uint32_t d = cur.u32("action dim");
    const std::uint32_t ds = cur.u32("state dim");
    chunk.actions.resize(h, d);
    for (std::uint32_t r = 0; r < h; ++r) {
      for (std::uint32_t c = 0; c < d; ++c) chunk.actions(r, c) = cur.f64("actions");
    }
    chunk.state.resize(ds);
    for (std::uint32_t k = 0; k < ds; ++k) chunk.state(k) = cur.f64("state");
    chunk.valid.resize(h);
    for (std::uint32_t k = 0; k < h; ++k) chunk.valid[k] = cur.bytes(1, "valid mask")[0] != 0;
    chunk.pad_mask.resize(d);
    for (std::uint32_t k = 0; k < d; ++k) chunk.pad_mask[k] = cur.bytes(1, "pad mask")[0] != 0;
    chunk.state_pad_mask.resize(ds);
    for (std::uint32_t k = 0; k < ds; ++k) {
      chunk.state_pad_mask[k] = cur.bytes(1, "state pad mask")[0] != 0;
    }
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

ShardIndex read_shard_index(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(load_file(path));
  } catch (const json::exception& e) {
    throw ManifestCorrupt("shard index is not valid JSON: " + std::string(e.what()));
  }
  ShardIndex idx;
  idx.format_version = j.value("format_version", kFormatVersion);
  idx.seed = j.value("seed", std::uint64_t{0});
  idx.horizon = j.value("horizon", 0);
  idx.shard_size = j.value("shard_size", 0);
  idx.dataset_tag = j.value("dataset_tag", "");
  idx.delta_rotation_mode = j.value("delta_rotation_mode", "elementwise");
  idx.total_chunks = j.value("total_chunks", std::size_t{0});
  for (const json& s : j.value("shards", json::array())) {
    ShardInfo info;
    info.file = s.value("file", "");
    info.n_chunks = s.value("n_chunks", 0);
    for (const json& r : s.value("runs", json::array())) {
      info.runs.push_back({r.value("episode_id", ""), r.value("chunk_begin", 0),
                           r.value("chunk_end", 0)});
    }
    idx.shards.push_back(std::move(info));
  }
  return idx;
}

}  // namespace egotraj
