#include "afp/fusion.hpp"

#include "afp/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace afp {

namespace {

constexpr double kMinNorm = 1e-12;

// std::normal_distribution is implementation-defined; Box-Muller over the
// fully specified mt19937_64 keeps matrices identical across toolchains.
class GaussianStream
{
public:
  explicit GaussianStream(std::uint64_t seed)
    : engine_(seed)
  {}

  double next()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
      u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Eigen::MatrixXd orthonormal_columns(Eigen::MatrixXd g)
{
  const Eigen::Index rows = g.rows();
  const Eigen::Index cols = g.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  // Fix the sign ambiguity of QR so the result is a function of g alone.
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0)
      q.col(j) *= -1.0;
  return q;
}

std::uint64_t branch_seed(std::uint64_t seed, Branch branch)
{
  return seed * 2 + (branch == Branch::clip ? 1 : 0);
}

} // namespace

Eigen::MatrixXd seeded_orthonormal_matrix(std::size_t dim, std::uint64_t seed)
{
  if (dim == 0)
    throw ShapeError("projection input dimension must be positive");
  const auto n = static_cast<Eigen::Index>(dim);
  const auto k = static_cast<Eigen::Index>(kFusedDim);
  GaussianStream gauss(seed);
  if (n >= k) {
    Eigen::MatrixXd g(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        g(i, j) = gauss.next();
    return orthonormal_columns(std::move(g));
  }
  // Fewer inputs than outputs: build a (512 x dim) matrix with orthonormal
  // columns and transpose it, giving an isometric embedding.
  Eigen::MatrixXd g(k, n);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g(i, j) = gauss.next();
  return orthonormal_columns(std::move(g)).transpose();
}

Projection::Projection(const ProjectionSpec& spec, const BranchDims& dims)
  : kind_(spec.kind)
  , dims_(dims)
{
  switch (spec.kind) {
    case ProjectionKind::identity_truncate:
      if (dims.resnet < kFusedDim || dims.clip < kFusedDim)
        throw ValidationError(
          "identity_truncate needs branch dimensions >= 512, got resnet=" +
          std::to_string(dims.resnet) + " clip=" + std::to_string(dims.clip));
      break;
    case ProjectionKind::seeded_random_orthonormal:
      resnet_ = seeded_orthonormal_matrix(
        dims.resnet, branch_seed(spec.seed, Branch::resnet));
      clip_ =
        seeded_orthonormal_matrix(dims.clip, branch_seed(spec.seed, Branch::clip));
      break;
    case ProjectionKind::external_matrix: {
      if (!spec.resnet_matrix || !spec.clip_matrix)
        throw ValidationError("external_matrix projection needs both matrices");
      const auto check = [](const Eigen::MatrixXd& m, std::size_t rows,
                            const char* name) {
        if (static_cast<std::size_t>(m.rows()) != rows ||
            static_cast<std::size_t>(m.cols()) != kFusedDim)
          throw ShapeError(std::string(name) + " projection matrix is " +
                           std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected " +
                           std::to_string(rows) + "x512");
        if (!m.allFinite())
          throw ValidationError(std::string(name) +
                                " projection matrix has non-finite entries");
      };
      check(*spec.resnet_matrix, dims.resnet, "resnet");
      check(*spec.clip_matrix, dims.clip, "clip");
      resnet_ = *spec.resnet_matrix;
      clip_ = *spec.clip_matrix;
      break;
    }
  }
}

std::size_t Projection::input_dim(Branch branch) const noexcept
{
  return branch == Branch::resnet ? dims_.resnet : dims_.clip;
}

Eigen::VectorXd Projection::project(std::span<const double> branch_vec,
                                    Branch branch) const
{
  if (branch_vec.size() != input_dim(branch))
    throw ShapeError("branch vector has " + std::to_string(branch_vec.size()) +
                     " components, projection expects " +
                     std::to_string(input_dim(branch)));
  const Eigen::Map<const Eigen::VectorXd> x(
    branch_vec.data(), static_cast<Eigen::Index>(branch_vec.size()));
  if (kind_ == ProjectionKind::identity_truncate)
    return x.head(static_cast<Eigen::Index>(kFusedDim));
  const Eigen::MatrixXd& m = branch == Branch::resnet ? resnet_ : clip_;
  return m.transpose() * x;
}

std::vector<double> project_and_normalize(std::span<const double> branch_vec,
                                          const Projection& proj,
                                          Branch branch)
{
  Eigen::VectorXd y = proj.project(branch_vec, branch);
  const double norm = y.norm();
  if (!(norm >= kMinNorm))
    throw ZeroVectorError(
      std::string(branch == Branch::resnet ? "resnet" : "clip") +
      " branch projects to a zero vector");
  y /= norm;
  return { y.data(), y.data() + y.size() };
}

FusedFeature fuse(std::span<const double> resnet_n,
                  std::span<const double> clip_n,
                  double alpha)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw RangeError("alpha must lie in [0, 1]");
  if (resnet_n.size() != clip_n.size())
    throw ShapeError("fuse: branch vectors differ in dimension");
  FusedFeature out;
  out.vec.resize(resnet_n.size());
  for (std::size_t i = 0; i < resnet_n.size(); ++i)
    out.vec[i] = (1.0 - alpha) * resnet_n[i] + alpha * clip_n[i];
  return out;
}

std::vector<FusedFeature> fuse_manifest(const Manifest& manifest,
                                        const ProjectionSpec& spec,
                                        double alpha)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw RangeError("alpha must lie in [0, 1]");
  std::vector<FusedFeature> out;
  out.reserve(manifest.frames.size());
  if (manifest.prefused()) {
    for (const FrameRecord& f : manifest.frames)
      out.push_back({ std::get<PreFused>(f.features).vec });
    return out;
  }
  const Projection proj(spec, *manifest.dims);
  for (const FrameRecord& f : manifest.frames) {
    const auto& raw = std::get<RawPair>(f.features);
    try {
      const auto r = project_and_normalize(raw.resnet, proj, Branch::resnet);
      const auto c = project_and_normalize(raw.clip, proj, Branch::clip);
      out.push_back(fuse(r, c, alpha));
    } catch (const ZeroVectorError& e) {
      throw ZeroVectorError("frame '" + f.frame_id + "': " + e.what());
    }
  }
  return out;
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open matrix file '" + path.string() + "'");
  long long rows = 0;
  long long cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
    throw ParseError("matrix file '" + path.string() +
                     "': header must be 'rows cols'");
  Eigen::MatrixXd m(rows, cols);
  for (long long i = 0; i < rows; ++i)
    for (long long j = 0; j < cols; ++j)
      if (!(in >> m(i, j)))
        throw ParseError("matrix file '" + path.string() +
                         "': expected " + std::to_string(rows * cols) +
                         " values");
  std::string trailing;
  if (in >> trailing)
    throw ParseError("matrix file '" + path.string() + "': trailing data");
  return m;
}

void save_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write matrix file '" + path.string() + "'");
  out << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

} // namespace afp
