#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "egotraj/types.hpp"

namespace egotraj {

using Rot6d = Eigen::Matrix<double, 6, 1>;

/// First two columns of R, column-major flattened.
Rot6d rot6d_from_rotation(const Eigen::Matrix3d& r);

/// Gram-Schmidt recovery: c1 = normalize(v[0..3)),
/// c2 = normalize(v[3..6) - (c1 . v[3..6)) c1, c3 = c1 x c2.
/// Throws DegenerateRot6D on zero or parallel columns.
Eigen::Matrix3d rotation_from_rot6d(const Rot6d& v);

/// How the rotational displacement in an action is formed: element-wise
/// difference of rot6D vectors, or rot6D of the relative rotation
/// R_t^T R_{t+1}. Datasets record which mode produced them.
enum class DeltaRotationMode { elementwise, relative };

const char* to_string(DeltaRotationMode m);
std::optional<DeltaRotationMode> delta_rotation_mode_from_string(const std::string& s);

/// Converts a trajectory into T-1 displacement actions
/// [dx, dy, dz, d(rot6D)] with the absolute pose at t (position + rot6D) as
/// the proprioceptive state. Only raw_values/raw_state are filled here.
std::vector<ActionRecord> to_actions(const Trajectory& traj,
                                     DeltaRotationMode mode = DeltaRotationMode::elementwise);

/// Per-dimension q01/q99 (linear-interpolation quantiles), mean and std over
/// the whole record set, independently for actions and states.
/// Throws EmptyDataset for fewer than 2 records.
NormStats compute_norm_stats(const std::vector<ActionRecord>& records,
                             const std::string& dataset_tag = "");

/// v_hat_i = clip(2 (v_i - q01_i) / (q99_i - q01_i) - 1, -4, 4);
/// dimensions with q99 == q01 map to 0. Throws DimMismatch.
Eigen::VectorXd normalize(const Eigen::VectorXd& v, const DimStats& stats);

/// Exact inverse of normalize for unclipped, non-degenerate values;
/// degenerate dimensions map back to q01.
Eigen::VectorXd denormalize(const Eigen::VectorXd& v_hat, const DimStats& stats);

/// Fills values/state with the normalized vectors and all-native pad masks.
ActionRecord normalized_record(const ActionRecord& rec, const NormStats& stats);

struct SourceDataset {
  std::vector<ActionRecord> records;  // raw_values / raw_state filled
  NormStats stats;
};

struct MergedDataset {
  std::vector<ActionRecord> records;
  int action_dim = 0;
  int state_dim = 0;
  std::map<std::string, std::size_t> per_source_counts;
};

/// Normalizes every record with its own dataset's stats, zero-pads actions
/// and states to the largest dimensionality, and concatenates in input
/// order. Pad masks mark the padded dimensions; source tags are preserved.
MergedDataset merge_datasets(const std::vector<SourceDataset>& sources);

struct ActionChunk {
  Eigen::MatrixXd actions;           // H x d
  Eigen::VectorXd state;             // d_s, proprioception at chunk start
  std::vector<bool> valid;           // per step, false = tail padding
  std::vector<bool> pad_mask;        // per action dim
  std::vector<bool> state_pad_mask;  // per state dim
  int start_t = 1;

  int horizon() const { return static_cast<int>(actions.rows()); }
};

/// One chunk per action index; tail chunks are zero-padded with the validity
/// mask cleared. Chunks carry the normalized vectors when the records have
/// them, otherwise the raw ones.
std::vector<ActionChunk> chunk_actions(const std::vector<ActionRecord>& records, int horizon);

/// Mean over valid steps of the squared Euclidean distance between action
/// rows; steps masked out in either chunk are excluded from sum and divisor.
/// Throws DimMismatch on shape disagreement.
double action_mse(const ActionChunk& pred, const ActionChunk& gt);

}  // namespace egotraj
