#pragma once

// End-to-end inference: key points, 6-D merge, bi-equivariant transformer,
// SE(3) projection, plus the closed-form and iterative registration baselines.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bitr/layers.hpp"
#include "bitr/tensor_field.hpp"

namespace bitr {

struct ModelConfig {
  int keypoints = 32;          // L
  int neighbors = 24;          // k; clamped to L - 1 (or N - 1) per cloud
  int channels = 4;            // c
  int key_channels = 4;
  int extractor_layers = 2;
  int transformer_layers = 2;
  int max_degree = 1;          // per factor, 1 or 2
  int radial_hidden = 16;
  bool swap_tied = true;
  // All radial networks degree 0 except the last value path, which is
  // degree 1 with zero self-interaction. Off: every value path is degree 1.
  bool scale_chain = true;
  bool use_normals = false;

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
};

// Shared SE(3)-transformer applied to both clouds. The last layer reads the
// degree-0 features of its own cloud concatenated with the point-averaged
// degree-0 features of the partner cloud and emits L degree-0 logits.
struct KeypointExtractorParams {
  int keypoints = 0;
  bool use_normals = false;
  std::vector<LayerParams> layers;
  std::vector<EluParams> elus;  // one after every layer but the last
};

struct BitrModel {
  ModelConfig config;
  KeypointExtractorParams extractor;
  std::vector<LayerParams> layers;
  std::vector<EluParams> elus;  // one after every layer but the last
};

BitrModel make_model(const ModelConfig& config, std::uint64_t seed);

struct Keypoints {
  Cloud3 x;                 // L x 3, = sx * X
  Cloud3 y;                 // L x 3, = sy * Y
  Eigen::MatrixXd sx;       // L x M, rows are convex weights
  Eigen::MatrixXd sy;       // L x N
};

// Throws InvalidArgument when a cloud has fewer than 2 points or lacks the
// normals the extractor was built with.
Keypoints extract_keypoints(const KeypointExtractorParams& params, int neighbors,
                            const PointCloud& x, const PointCloud& y);

// Z_u = X~_u (+) Y~_u.
std::vector<Point6> merge_pc(const Cloud3& x, const Cloud3& y);

// Nearest rotation U diag(1, 1, det(U V^T)) V^T. Throws DegenerateSpectrum
// when sigma2 - sigma3 <= 1e-9 * sigma1.
Eigen::Matrix3d svd_project(const Eigen::Matrix3d& a);

// Least-squares rigid g with y_i ~ g x_i for corresponded rows. Throws
// InvalidArgument on a size mismatch or fewer than 3 points.
RigidTransform arun_solve(const Cloud3& x, const Cloud3& y);

struct AssemblyResult {
  RigidTransform g;
  Eigen::Vector3d singular_values = Eigen::Vector3d::Zero();  // of r_hat, descending
  Eigen::Matrix3d r_hat = Eigen::Matrix3d::Zero();
  Eigen::Vector3d t_x = Eigen::Vector3d::Zero();
  Eigen::Vector3d t_y = Eigen::Vector3d::Zero();
  Cloud3 keypoints_x;
  Cloud3 keypoints_y;
  double spectral_gap = 0.0;     // (sigma2 - sigma3) / sigma1
  bool near_degenerate = false;  // spectral_gap < 1e-6
};

// Reads r_hat, t_X, t_Y as point means of the (1,1), (1,0), (0,1) blocks
// and returns g = (r, (m(Y~) + t_Y) - r (m(X~) + t_X)).
AssemblyResult se3_project(const TensorField& f, const Cloud3& x, const Cloud3& y);

AssemblyResult bitr_forward(const BitrModel& model, const PointCloud& x,
                            const PointCloud& y);

// bitr(X, Y) o bitr(X, X); equals g exactly when Y = g X and the model is
// swap-tied. Throws InvalidArgument on an untied model.
RigidTransform complete_match(const BitrModel& model, const PointCloud& x,
                              const PointCloud& y);

struct Metrics {
  double rotation_deg = 0.0;
  double translation = 0.0;
};

Metrics metrics(const RigidTransform& g, const RigidTransform& gt);

// ||r^T r_gt - I||_F^2 + ||t_gt - t||^2.
double loss(const RigidTransform& g, const RigidTransform& gt);

struct AuditReport {
  int trials = 0;
  double delta_bi = 0.0;
  double delta_swap = 0.0;
  double delta_scale = 0.0;
};

// Maxima over random perturbations of
//   delta_bi    = ||bitr(g1 X, g2 Y) - g2 bitr(X, Y) g1^-1||_F
//   delta_swap  = ||bitr(Y', X') - bitr(X', Y')^-1||_F          (X' = g1 X, Y' = g2 Y)
//   delta_scale = ||r(cX', cY') - r(X', Y')||_F + ||t(cX', cY') - c t(X', Y')||
// with c cycling through 0.5, 2, 10. Transforms are 4x4 homogeneous.
AuditReport equivariance_audit(const BitrModel& model, const PointCloud& x,
                               const PointCloud& y, int trials, std::uint64_t seed);

struct IcpResult {
  RigidTransform g;
  double initial_mse = 0.0;
  double final_mse = 0.0;
  int iterations = 0;
};

// Aligns x onto y starting at g0: nearest neighbours in y of g(x), then
// arun_solve, until the mean squared distance improves by less than tol.
// Returns the best iterate, so final_mse <= initial_mse.
IcpResult icp_refine(const PointCloud& x, const PointCloud& y,
                     const RigidTransform& g0, int max_iter = 50, double tol = 1e-10);

}  // namespace bitr
