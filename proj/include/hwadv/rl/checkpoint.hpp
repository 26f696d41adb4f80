#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hwadv/rl/learner.hpp"
#include "hwadv/rl/network.hpp"

namespace hwadv::rl {

/// Affine maps taking physical observation components to roughly [-1, 1].
/// Stored in every checkpoint so a policy is usable without the original
/// run configuration.
struct ObservationScaling {
  double y_center = 3.6;
  double y_half = 5.4;
  double v_half = 15.0;
  double dx_range = 200.0;
  double dy_range = 7.2;
  double dv_range = 30.0;

  double scale_y(double y) const { return (y - y_center) / y_half; }
  double scale_v(double v) const { return (v - v_half) / v_half; }

  friend bool operator==(const ObservationScaling&, const ObservationScaling&) = default;
};

/// Versioned binary container for a trained policy: layer dims, all
/// parameters as 64-bit floats, observation scaling and the TrainConfig.
/// save -> load -> save is byte-identical.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind; // "av" or "attacker"
  std::vector<int> layer_dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  ObservationScaling scaling;
  TrainConfig train;
};

Checkpoint make_checkpoint(std::string kind, const QNetwork& net,
                           const ObservationScaling& scaling, const TrainConfig& cfg);

QNetwork network_from(const Checkpoint& ckpt);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// Throws std::runtime_error on missing, truncated or mismatched files.
Checkpoint load_checkpoint(const std::string& path);

} // namespace hwadv::rl
