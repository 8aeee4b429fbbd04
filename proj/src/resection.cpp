#include "touchreg/resection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "touchreg/error.hpp"
#include "touchreg/rng.hpp"

namespace touchreg {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

constexpr double kMaxDamping = 1e32;

void require_nonempty(std::span<const Correspondence> corrs) {
  if (corrs.empty())
    throw Error(ErrorKind::Precondition, "reprojection objective needs at least one correspondence");
}

Vec7 to_params(const Pose& p) {
  Vec7 x;
  x << p.rotation().w(), p.rotation().x(), p.rotation().y(), p.rotation().z(),
      p.translation().x(), p.translation().y(), p.translation().z();
  return x;
}

Pose from_params(const Vec7& x) {
  return Pose(Quaternion(x[0], x[1], x[2], x[3]), Vec3(x[4], x[5], x[6]));
}

// Pseudo-Huber cost of one residual component, divided by delta so that it
// approaches |r| as delta -> 0.
double pseudo_huber(double r, double delta) {
  const double s = r / delta;
  return delta * (std::sqrt(1.0 + s * s) - 1.0);
}

// IRLS weight: rho'(r) / r for rho = delta^2 (sqrt(1 + (r/delta)^2) - 1).
double pseudo_huber_weight(double r, double delta) {
  const double s = r / delta;
  return 1.0 / std::sqrt(1.0 + s * s);
}

bool correspondence_less(const Correspondence& a, const Correspondence& b) {
  return std::tie(a.point.x(), a.point.y(), a.point.z(), a.pixel.x(), a.pixel.y()) <
         std::tie(b.point.x(), b.point.y(), b.point.z(), b.pixel.x(), b.pixel.y());
}

// 7x6 basis of the quaternion/translation tangent space at p (right
// perturbation of the rotation).
Eigen::Matrix<double, 7, 6> tangent_basis(const Pose& p) {
  const double w = p.rotation().w(), x = p.rotation().x(), y = p.rotation().y(),
               z = p.rotation().z();
  Eigen::Matrix<double, 7, 6> b = Eigen::Matrix<double, 7, 6>::Zero();
  b.block<4, 3>(0, 0) << -x, -y, -z,
                          w, -z,  y,
                          z,  w, -x,
                         -y,  x,  w;
  b.block<4, 3>(0, 0) *= 0.5;
  b.block<3, 3>(4, 3).setIdentity();
  return b;
}

struct StartOutcome {
  ResectionResult result;
  double initial_objective = 0.0;
};

}  // namespace

void SolverConfig::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorKind::InvalidArgument, "solver config: " + what);
  };
  if (max_iterations <= 0) bad("max_iterations must be positive");
  if (!(initial_damping > 0.0)) bad("initial_damping must be positive");
  if (!(damping_up > 1.0)) bad("damping_up must be greater than 1");
  if (!(damping_down > 0.0 && damping_down < 1.0)) bad("damping_down must lie in (0, 1)");
  if (!(convergence_tol > 0.0)) bad("convergence_tol must be positive");
  if (!(huber_delta > 0.0)) bad("huber_delta must be positive");
  if (multistart_count < 1) bad("multistart_count must be at least 1");
}

Eigen::VectorXd reprojection_residuals(const Pose& world_to_cam, const Intrinsics& intr,
                                       std::span<const Correspondence> corrs) {
  Eigen::VectorXd r(2 * corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (const auto px = project(intr, world_to_cam, corrs[i].point)) {
      r.segment<2>(2 * i) = *px - corrs[i].pixel;
    } else {
      r.segment<2>(2 * i).setConstant(kBehindCameraPenalty);
    }
  }
  return r;
}

double objective(const Pose& world_to_cam, const Intrinsics& intr,
                 std::span<const Correspondence> corrs) {
  require_nonempty(corrs);
  const Eigen::VectorXd r = reprojection_residuals(world_to_cam, intr, corrs);
  double sum = 0.0;
  for (std::size_t i = 0; i < corrs.size(); ++i) sum += std::abs(r[2 * i]) + std::abs(r[2 * i + 1]);
  return sum / static_cast<double>(corrs.size());
}

double smoothed_objective(const Pose& world_to_cam, const Intrinsics& intr,
                          std::span<const Correspondence> corrs, double delta) {
  require_nonempty(corrs);
  const Eigen::VectorXd r = reprojection_residuals(world_to_cam, intr, corrs);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) sum += pseudo_huber(r[k], delta);
  return sum / static_cast<double>(corrs.size());
}

Eigen::MatrixXd residual_jacobian(const Pose& world_to_cam, const Intrinsics& intr,
                                  std::span<const Correspondence> corrs) {
  const Quaternion& q = world_to_cam.rotation();
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const Mat3 rot = world_to_cam.rotation_matrix();

  // dR/dq_k for the unit-quaternion formula, k = w, x, y, z.
  Mat3 dr[4];
  dr[0] << 0, -2 * z, 2 * y,
           2 * z, 0, -2 * x,
           -2 * y, 2 * x, 0;
  dr[1] << 0, 2 * y, 2 * z,
           2 * y, -4 * x, -2 * w,
           2 * z, 2 * w, -4 * x;
  dr[2] << -4 * y, 2 * x, 2 * w,
           2 * x, 0, 2 * z,
           -2 * w, 2 * z, -4 * y;
  dr[3] << -4 * z, -2 * w, 2 * x,
           2 * w, -4 * z, 2 * y,
           2 * x, 2 * y, 0;

  // Chain through q / |q| evaluated at |q| = 1.
  const Eigen::Vector4d qv(w, x, y, z);
  const Eigen::Matrix4d normalize_jac = Eigen::Matrix4d::Identity() - qv * qv.transpose();

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(corrs.size()), 7);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Vec3& pw = corrs[i].point;
    const Vec3 pc = rot * pw + world_to_cam.translation();
    if (!(pc.z() > kMinCameraDepth)) continue;  // penalty rows stay zero

    Eigen::Matrix<double, 3, 4> dpc_dqhat;
    for (int k = 0; k < 4; ++k) dpc_dqhat.col(k) = dr[k] * pw;
    const Eigen::Matrix<double, 3, 4> dpc_dq = dpc_dqhat * normalize_jac;

    const double inv_z = 1.0 / pc.z();
    Eigen::Matrix<double, 2, 3> dpx_dpc;
    dpx_dpc << intr.fx() * inv_z, 0.0, -intr.fx() * pc.x() * inv_z * inv_z,
               0.0, intr.fy() * inv_z, -intr.fy() * pc.y() * inv_z * inv_z;

    const auto row = 2 * static_cast<Eigen::Index>(i);
    jac.block<2, 4>(row, 0) = dpx_dpc * dpc_dq;
    jac.block<2, 3>(row, 4) = dpx_dpc;
  }
  return jac;
}

double tangent_condition_number(const Pose& world_to_cam, const Intrinsics& intr,
                                std::span<const Correspondence> corrs) {
  const Eigen::MatrixXd jt = residual_jacobian(world_to_cam, intr, corrs) * tangent_basis(world_to_cam);
  const Eigen::Matrix<double, 6, 6> normal = jt.transpose() * jt;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(normal);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

ResectionResult refine(const Intrinsics& intr, std::span<const Correspondence> corrs,
                       const Pose& initial, const SolverConfig& cfg) {
  cfg.validate();
  require_nonempty(corrs);
  const double delta = cfg.huber_delta;

  Pose pose = initial;
  double cost = smoothed_objective(pose, intr, corrs, delta);
  double lambda = cfg.initial_damping;

  ResectionResult out;
  out.objective_history.push_back(cost);

  int iter = 0;
  bool converged = false;
  while (iter < cfg.max_iterations && !converged) {
    ++iter;
    if (cost == 0.0) {
      converged = true;
      break;
    }
    const Eigen::VectorXd r = reprojection_residuals(pose, intr, corrs);
    const Eigen::MatrixXd jac = residual_jacobian(pose, intr, corrs);
    Eigen::VectorXd wts(r.size());
    for (Eigen::Index k = 0; k < r.size(); ++k) wts[k] = pseudo_huber_weight(r[k], delta);

    const Mat7 normal = jac.transpose() * wts.asDiagonal() * jac;
    const Vec7 grad = jac.transpose() * wts.asDiagonal() * r;
    if (!grad.allFinite()) break;
    if (grad.lpNorm<Eigen::Infinity>() == 0.0) {
      converged = true;
      break;
    }

    // The damping uses diag(normal) plus a tiny floor so the system stays
    // positive definite along the quaternion scale direction.
    const Vec7 diag = normal.diagonal().cwiseMax(1e-12 * (1.0 + normal.diagonal().maxCoeff()));
    bool accepted = false;
    while (lambda <= kMaxDamping) {
      Mat7 damped = normal;
      damped.diagonal() += lambda * diag;
      const Vec7 step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= cfg.damping_up;
        continue;
      }
      Vec7 x = to_params(pose) + step;
      const double qn = x.head<4>().norm();
      if (!(qn > 1e-12)) {
        lambda *= cfg.damping_up;
        continue;
      }
      x.head<4>() /= qn;
      const Pose candidate = from_params(x);
      const double new_cost = smoothed_objective(candidate, intr, corrs, delta);
      if (new_cost < cost) {
        const double rel_change = (cost - new_cost) / std::max(cost, std::numeric_limits<double>::min());
        pose = candidate;
        cost = new_cost;
        out.objective_history.push_back(cost);
        lambda = std::max(lambda * cfg.damping_down, 1e-15);
        accepted = true;
        if (rel_change < cfg.convergence_tol || step.norm() < 1e-15) converged = true;
        break;
      }
      lambda *= cfg.damping_up;
    }
    if (!accepted) {
      // No descent possible at any damping: numerically stationary.
      converged = true;
      break;
    }
  }

  out.pose = pose;
  out.smoothed_objective = cost;
  out.iterations = iter;
  out.converged = converged;
  out.mean_l1_error = objective(pose, intr, corrs);
  const Eigen::VectorXd r = reprojection_residuals(pose, intr, corrs);
  out.per_point_residuals.reserve(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) out.per_point_residuals.emplace_back(r.segment<2>(2 * i));
  out.condition_number = tangent_condition_number(pose, intr, corrs);
  out.condition_warning = !(out.condition_number <= kConditionWarningThreshold);
  return out;
}

std::vector<Pose> initial_poses(std::span<const Correspondence> corrs, const SolverConfig& cfg) {
  require_nonempty(corrs);
  Vec3 centroid = Vec3::Zero();
  for (const auto& c : corrs) centroid += c.point;
  centroid /= static_cast<double>(corrs.size());

  std::vector<double> extents;
  extents.reserve(corrs.size());
  for (const auto& c : corrs) extents.push_back((c.point - centroid).norm());
  std::nth_element(extents.begin(), extents.begin() + extents.size() / 2, extents.end());
  const double median_extent = extents[extents.size() / 2];
  // Three median extents keep most points in front of the camera whatever the
  // start rotation; the floor covers coincident points.
  const double depth = std::max(3.0 * median_extent, 1e-3);

  auto centered = [&](const Quaternion& q) {
    const Quaternion qn = q.normalized();
    return Pose(qn, Vec3(0.0, 0.0, depth) - qn * centroid);
  };

  std::vector<Pose> starts;
  starts.reserve(static_cast<std::size_t>(cfg.multistart_count));
  starts.push_back(centered(Quaternion::Identity()));
  SplitMix64 rng(cfg.rng_seed);
  for (int s = 1; s < cfg.multistart_count; ++s) starts.push_back(centered(random_rotation(rng)));
  return starts;
}

ResectionResult solve(const Intrinsics& intr, std::span<const Correspondence> corrs,
                      const SolverConfig& cfg) {
  cfg.validate();
  if (corrs.size() < kMinResectionCorrespondences)
    throw Error(ErrorKind::Precondition,
                "resectioning needs at least " + std::to_string(kMinResectionCorrespondences) +
                    " correspondences, got " + std::to_string(corrs.size()));

  // Canonical order makes the result independent of the caller's ordering.
  std::vector<std::size_t> order(corrs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return correspondence_less(corrs[a], corrs[b]); });
  std::vector<Correspondence> sorted;
  sorted.reserve(corrs.size());
  for (std::size_t i : order) sorted.push_back(corrs[i]);

  const std::vector<Pose> starts = initial_poses(sorted, cfg);
  std::optional<StartOutcome> best;
  bool any_improved = false;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    StartOutcome o;
    o.initial_objective = smoothed_objective(starts[s], intr, sorted, cfg.huber_delta);
    o.result = refine(intr, sorted, starts[s], cfg);
    o.result.best_start = static_cast<int>(s);
    if (o.result.smoothed_objective < o.initial_objective || o.initial_objective == 0.0)
      any_improved = true;
    const bool better =
        !best || o.result.smoothed_objective < best->result.smoothed_objective ||
        (o.result.smoothed_objective == best->result.smoothed_objective &&
         o.result.iterations < best->result.iterations);
    if (better) best = std::move(o);
  }
  if (!any_improved)
    throw Error(ErrorKind::Degenerate,
                "no multistart reduced the reprojection objective; the correspondence geometry is "
                "degenerate");

  ResectionResult result = std::move(best->result);
  // Report residuals in the caller's order.
  std::vector<Vec2> residuals(corrs.size());
  for (std::size_t k = 0; k < order.size(); ++k) residuals[order[k]] = result.per_point_residuals[k];
  result.per_point_residuals = std::move(residuals);
  return result;
}

}  // namespace touchreg
