#include "egotraj/actions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "egotraj/errors.hpp"

namespace egotraj {

Rot6d rot6d_from_rotation(const Eigen::Matrix3d& r) {
  Rot6d v;
  v << r(0, 0), r(1, 0), r(2, 0), r(0, 1), r(1, 1), r(2, 1);
  return v;
}

Eigen::Matrix3d rotation_from_rot6d(const Rot6d& v) {
  const Eigen::Vector3d a = v.head<3>();
  const Eigen::Vector3d b = v.tail<3>();
  if (a.norm() < 1e-12) throw DegenerateRot6D("rotation_from_rot6d: first column is zero");
  const Eigen::Vector3d c1 = a.normalized();
  const Eigen::Vector3d b_orth = b - c1.dot(b) * c1;
  if (b_orth.norm() < 1e-12 || c1.cross(b.normalized()).norm() <= 1e-9) {
    throw DegenerateRot6D("rotation_from_rot6d: columns are parallel or zero");
  }
  const Eigen::Vector3d c2 = b_orth.normalized();
  const Eigen::Vector3d c3 = c1.cross(c2);
  Eigen::Matrix3d r;
  r.col(0) = c1;
  r.col(1) = c2;
  r.col(2) = c3;
  return r;
}

const char* to_string(DeltaRotationMode m) {
  return m == DeltaRotationMode::elementwise ? "elementwise" : "relative";
}

std::optional<DeltaRotationMode> delta_rotation_mode_from_string(const std::string& s) {
  if (s == "elementwise") return DeltaRotationMode::elementwise;
  if (s == "relative") return DeltaRotationMode::relative;
  return std::nullopt;
}

std::vector<ActionRecord> to_actions(const Trajectory& traj, DeltaRotationMode mode) {
  const std::size_t t_count = traj.poses.size();
  std::vector<ActionRecord> records;
  if (t_count < 2) return records;
  records.reserve(t_count - 1);
  for (std::size_t t = 0; t + 1 < t_count; ++t) {
    const Pose6DoF& cur = traj.poses[t];
    const Pose6DoF& next = traj.poses[t + 1];
    ActionRecord rec;
    rec.t = cur.timestamp_index;
    rec.raw_values.resize(9);
    rec.raw_values.head<3>() = next.position - cur.position;
    if (mode == DeltaRotationMode::elementwise) {
      rec.raw_values.tail<6>() = rot6d_from_rotation(next.rotation) - rot6d_from_rotation(cur.rotation);
    } else {
      rec.raw_values.tail<6>() =
          rot6d_from_rotation(cur.rotation.transpose() * next.rotation);
    }
    rec.raw_state.resize(9);
    rec.raw_state.head<3>() = cur.position;
    rec.raw_state.tail<6>() = rot6d_from_rotation(cur.rotation);
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

// Linear-interpolation quantile over a sorted copy (index h = q * (n - 1)).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DimStats stats_over(const std::vector<ActionRecord>& records,
                    const Eigen::VectorXd ActionRecord::*field) {
  const Eigen::Index dim = (records.front().*field).size();
  DimStats out;
  out.q01.resize(dim);
  out.q99.resize(dim);
  out.mean.resize(dim);
  out.std.resize(dim);
  std::vector<double> column(records.size());
  for (Eigen::Index d = 0; d < dim; ++d) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if ((records[i].*field).size() != dim) {
        throw DimMismatch("compute_norm_stats: inconsistent record dimensionality");
      }
      column[i] = (records[i].*field)(d);
    }
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    out.q01(d) = quantile_sorted(sorted, 0.01);
    out.q99(d) = quantile_sorted(sorted, 0.99);
    double mean = 0.0;
    for (double x : column) mean += x;
    mean /= static_cast<double>(column.size());
    double var = 0.0;
    for (double x : column) var += (x - mean) * (x - mean);
    var /= static_cast<double>(column.size());
    out.mean(d) = mean;
    out.std(d) = std::sqrt(var);
  }
  return out;
}

}  // namespace

NormStats compute_norm_stats(const std::vector<ActionRecord>& records,
                             const std::string& dataset_tag) {
  if (records.size() < 2) {
    throw EmptyDataset("compute_norm_stats: at least 2 records required");
  }
  NormStats stats;
  stats.dataset_tag = dataset_tag;
  stats.action = stats_over(records, &ActionRecord::raw_values);
  stats.state = stats_over(records, &ActionRecord::raw_state);
  return stats;
}

Eigen::VectorXd normalize(const Eigen::VectorXd& v, const DimStats& stats) {
  if (v.size() != stats.q01.size()) {
    throw DimMismatch("normalize: vector/stats dimensionality mismatch");
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index d = 0; d < v.size(); ++d) {
    const double span = stats.q99(d) - stats.q01(d);
    if (span == 0.0) {
      out(d) = 0.0;
    } else {
      out(d) = std::clamp(2.0 * (v(d) - stats.q01(d)) / span - 1.0, -4.0, 4.0);
    }
  }
  return out;
}

Eigen::VectorXd denormalize(const Eigen::VectorXd& v_hat, const DimStats& stats) {
  if (v_hat.size() != stats.q01.size()) {
    throw DimMismatch("denormalize: vector/stats dimensionality mismatch");
  }
  Eigen::VectorXd out(v_hat.size());
  for (Eigen::Index d = 0; d < v_hat.size(); ++d) {
    const double span = stats.q99(d) - stats.q01(d);
    out(d) = stats.q01(d) + (v_hat(d) + 1.0) * span / 2.0;
  }
  return out;
}

ActionRecord normalized_record(const ActionRecord& rec, const NormStats& stats) {
  ActionRecord out = rec;
  out.values = normalize(rec.raw_values, stats.action);
  out.state = normalize(rec.raw_state, stats.state);
  out.pad_mask.assign(static_cast<std::size_t>(out.values.size()), true);
  out.state_pad_mask.assign(static_cast<std::size_t>(out.state.size()), true);
  if (out.source.empty()) out.source = stats.dataset_tag;
  return out;
}

MergedDataset merge_datasets(const std::vector<SourceDataset>& sources) {
  MergedDataset merged;
  if (sources.empty()) return merged;
  for (const SourceDataset& src : sources) {
    for (const ActionRecord& rec : src.records) {
      merged.action_dim = std::max(merged.action_dim, static_cast<int>(rec.raw_values.size()));
      merged.state_dim = std::max(merged.state_dim, static_cast<int>(rec.raw_state.size()));
    }
  }
  for (const SourceDataset& src : sources) {
    for (const ActionRecord& rec : src.records) {
      ActionRecord norm = normalized_record(rec, src.stats);
      ActionRecord out = norm;
      out.values = Eigen::VectorXd::Zero(merged.action_dim);
      out.values.head(norm.values.size()) = norm.values;
      out.state = Eigen::VectorXd::Zero(merged.state_dim);
      out.state.head(norm.state.size()) = norm.state;
      out.pad_mask.assign(static_cast<std::size_t>(merged.action_dim), false);
      std::fill(out.pad_mask.begin(),
                out.pad_mask.begin() + static_cast<std::ptrdiff_t>(norm.values.size()), true);
      out.state_pad_mask.assign(static_cast<std::size_t>(merged.state_dim), false);
      std::fill(out.state_pad_mask.begin(),
                out.state_pad_mask.begin() + static_cast<std::ptrdiff_t>(norm.state.size()), true);
      ++merged.per_source_counts[out.source];
      merged.records.push_back(std::move(out));
    }
  }
  return merged;
}

std::vector<ActionChunk> chunk_actions(const std::vector<ActionRecord>& records, int horizon) {
  std::vector<ActionChunk> chunks;
  if (records.empty() || horizon < 1) return chunks;

  const bool use_normalized = records.front().values.size() > 0;
  const Eigen::Index dim =
      use_normalized ? records.front().values.size() : records.front().raw_values.size();
  const Eigen::Index state_dim =
      use_normalized && records.front().state.size() > 0 ? records.front().state.size()
                                                         : records.front().raw_state.size();

  const std::size_t n = records.size();
  chunks.reserve(n);
  for (std::size_t start = 0; start < n; ++start) {
    ActionChunk chunk;
    chunk.actions = Eigen::MatrixXd::Zero(horizon, dim);
    chunk.valid.assign(static_cast<std::size_t>(horizon), false);
    const ActionRecord& head = records[start];
    chunk.state = use_normalized && head.state.size() > 0 ? head.state : head.raw_state;
    chunk.start_t = head.t;
    chunk.pad_mask = head.pad_mask.empty()
                         ? std::vector<bool>(static_cast<std::size_t>(dim), true)
                         : head.pad_mask;
    chunk.state_pad_mask = head.state_pad_mask.empty()
                               ? std::vector<bool>(static_cast<std::size_t>(state_dim), true)
                               : head.state_pad_mask;
    for (int j = 0; j < horizon && start + static_cast<std::size_t>(j) < n; ++j) {
      const ActionRecord& rec = records[start + static_cast<std::size_t>(j)];
      chunk.actions.row(j) = use_normalized ? rec.values.transpose() : rec.raw_values.transpose();
      chunk.valid[static_cast<std::size_t>(j)] = true;
    }
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

double action_mse(const ActionChunk& pred, const ActionChunk& gt) {
  if (pred.actions.rows() != gt.actions.rows() || pred.actions.cols() != gt.actions.cols()) {
    throw DimMismatch("action_mse: chunk shapes differ");
  }
  double acc = 0.0;
  int valid_steps = 0;
  for (Eigen::Index j = 0; j < gt.actions.rows(); ++j) {
    const bool ok = pred.valid[static_cast<std::size_t>(j)] &&
                    gt.valid[static_cast<std::size_t>(j)];
    if (!ok) continue;
    acc += (pred.actions.row(j) - gt.actions.row(j)).squaredNorm();
    ++valid_steps;
  }
  return valid_steps == 0 ? 0.0 : acc / static_cast<double>(valid_steps);
}

}  // namespace egotraj
