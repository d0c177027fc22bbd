#pragma once

#include "afp/ingest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace afp {

enum class Branch
{
  resnet,
  clip
};

enum class ProjectionKind
{
  identity_truncate,
  seeded_random_orthonormal,
  external_matrix
};

//! How branch features are mapped into the shared 512-d space.
//!
//! Matrices are stored as (branch_dim x 512); a branch vector x projects to
//! M^T x. For external_matrix both matrices must be supplied.
struct ProjectionSpec
{
  ProjectionKind kind = ProjectionKind::seeded_random_orthonormal;
  std::uint64_t seed = 0;
  std::optional<Eigen::MatrixXd> resnet_matrix;
  std::optional<Eigen::MatrixXd> clip_matrix;
};

//! Deterministic (dim x 512) matrix with orthonormal columns when dim >= 512,
//! orthonormal rows otherwise. The sequence depends only on seed and dim.
Eigen::MatrixXd seeded_orthonormal_matrix(std::size_t dim, std::uint64_t seed);

//! A ProjectionSpec bound to concrete branch dimensions, with its matrices
//! materialized once so per-frame projection is a single mat-vec.
class Projection
{
public:
  Projection(const ProjectionSpec& spec, const BranchDims& dims);

  ProjectionKind kind() const noexcept { return kind_; }
  std::size_t input_dim(Branch branch) const noexcept;

  //! Projects into 512-d without normalizing.
  Eigen::VectorXd project(std::span<const double> branch_vec,
                          Branch branch) const;

private:
  ProjectionKind kind_;
  BranchDims dims_;
  Eigen::MatrixXd resnet_;
  Eigen::MatrixXd clip_;
};

//! Projects and L2-normalizes one branch vector. Throws ZeroVectorError when
//! the projected norm is below 1e-12, ShapeError on a dimension mismatch.
std::vector<double> project_and_normalize(std::span<const double> branch_vec,
                                          const Projection& proj,
                                          Branch branch);

struct FusedFeature
{
  std::vector<double> vec;

  bool operator==(const FusedFeature&) const = default;
};

//! (1 - alpha) * resnet_n + alpha * clip_n, without renormalization.
FusedFeature fuse(std::span<const double> resnet_n,
                  std::span<const double> clip_n,
                  double alpha);

//! Fused features for every frame of a manifest, in manifest order.
//! Pre-fused payloads pass through untouched.
std::vector<FusedFeature> fuse_manifest(const Manifest& manifest,
                                        const ProjectionSpec& spec,
                                        double alpha);

//! Text matrix container: first line "rows cols", then one line per row of
//! whitespace-separated reals.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
void save_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);

} // namespace afp
