#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "touchreg/geometry.hpp"

namespace touchreg {

// A 3D point paired with the pixel where the sensor observed it.
struct Correspondence {
  Vec3 point;
  Vec2 pixel;
};

struct SolverConfig {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  double convergence_tol = 1e-10;  // relative change of the smoothed objective
  double huber_delta = 0.5;        // pixels
  int multistart_count = 16;
  std::uint64_t rng_seed = 0;

  // Throws Error(InvalidArgument) on non-positive fields or multistart_count < 1.
  void validate() const;
};

// Residual assigned to each component of a correspondence whose point lies at
// or behind the camera. Its Jacobian rows are zero.
inline constexpr double kBehindCameraPenalty = 1e6;

// Condition number of the tangent-space normal matrix above which a result is
// flagged as poorly constrained.
inline constexpr double kConditionWarningThreshold = 1e10;

inline constexpr std::size_t kMinResectionCorrespondences = 4;

struct ResectionResult {
  Pose pose;  // world -> sensor camera
  double mean_l1_error = 0.0;
  double smoothed_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<Vec2> per_point_residuals;  // projected - observed, in input order
  double condition_number = 0.0;
  bool condition_warning = false;
  int best_start = 0;
  // Smoothed objective at the start point followed by its value after every
  // accepted step of the winning start.
  std::vector<double> objective_history;
};

// Residuals (projected - observed) stacked as [du_0, dv_0, du_1, dv_1, ...].
Eigen::VectorXd reprojection_residuals(const Pose& world_to_cam, const Intrinsics& intr,
                                       std::span<const Correspondence> corrs);

// Mean over correspondences of the L1 norm of the reprojection residual.
// Throws Error(Precondition) for an empty list.
double objective(const Pose& world_to_cam, const Intrinsics& intr,
                 std::span<const Correspondence> corrs);

// Pseudo-Huber surrogate of `objective`: (1/M) sum_k delta * (sqrt(1 + (r_k/delta)^2) - 1)
// over all residual components. Tends to the mean L1 error as delta -> 0.
double smoothed_objective(const Pose& world_to_cam, const Intrinsics& intr,
                          std::span<const Correspondence> corrs, double delta);

// d(residuals)/d(qw, qx, qy, qz, tx, ty, tz), 2M x 7. The rotation is R(q / |q|),
// so the quaternion columns include the normalization.
Eigen::MatrixXd residual_jacobian(const Pose& world_to_cam, const Intrinsics& intr,
                                  std::span<const Correspondence> corrs);

// Levenberg-Marquardt from a single start.
ResectionResult refine(const Intrinsics& intr, std::span<const Correspondence> corrs,
                       const Pose& initial, const SolverConfig& cfg);

// Multistart resectioning. Deterministic for a fixed cfg.rng_seed and
// independent of the order of `corrs`. Throws Error(Precondition) for fewer
// than 4 correspondences and Error(Degenerate) when no start improves on its
// initialization.
ResectionResult solve(const Intrinsics& intr, std::span<const Correspondence> corrs,
                      const SolverConfig& cfg);

// Start poses used by `solve`, in seed order.
std::vector<Pose> initial_poses(std::span<const Correspondence> corrs, const SolverConfig& cfg);

// Condition number of J^T J restricted to the 6-dim pose tangent space.
double tangent_condition_number(const Pose& world_to_cam, const Intrinsics& intr,
                                std::span<const Correspondence> corrs);

}  // namespace touchreg
