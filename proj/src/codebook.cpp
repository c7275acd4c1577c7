#include "oas/codebook.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "oas/errors.hpp"
#include "oas/rng.hpp"

namespace oas {

Codebook generate_codebook(int S, int N, double entry_variance, std::uint64_t seed) {
  if (S < 1) throw std::invalid_argument("generate_codebook: S must be >= 1");
  if (N < 1) throw std::invalid_argument("generate_codebook: N must be >= 1");
  if (!(entry_variance > 0.0))
    throw std::invalid_argument("generate_codebook: entry_variance must be > 0");

  Codebook cb;
  cb.vectors.resize(S, N);
  cb.entry_variance = entry_variance;
  cb.seed = seed;

  Rng rng(seed);
  const double sd = std::sqrt(entry_variance);
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n) cb.vectors(s, n) = sd * rng.normal();
  return cb;
}

void save_codebook(const Codebook& cb, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_codebook: cannot open " + path);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", cb.entry_variance);
  out << cb.size() << ' ' << cb.dim() << ' ' << buf << ' ' << cb.seed << '\n';
  for (int s = 0; s < cb.size(); ++s) {
    for (int n = 0; n < cb.dim(); ++n) {
      std::snprintf(buf, sizeof(buf), "%.17g", cb.vectors(s, n));
      out << buf << (n + 1 < cb.dim() ? ' ' : '\n');
    }
  }
  if (!out) throw std::runtime_error("save_codebook: write failed for " + path);
}

Codebook load_codebook(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_codebook: cannot open " + path);
  int S = 0, N = 0;
  double entry_variance = 0.0;
  std::uint64_t seed = 0;
  if (!(in >> S >> N >> entry_variance >> seed) || S < 1 || N < 1)
    throw std::runtime_error("load_codebook: bad header in " + path);
  Codebook cb;
  cb.vectors.resize(S, N);
  cb.entry_variance = entry_variance;
  cb.seed = seed;
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n)
      if (!(in >> cb.vectors(s, n)))
        throw std::runtime_error("load_codebook: truncated data in " + path);
  return cb;
}

SelectorMatrix::SelectorMatrix(std::vector<int> indices, int dim)
    : indices_(std::move(indices)), dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("SelectorMatrix: dimension must be >= 1");
  std::vector<bool> seen(dim_, false);
  for (int i : indices_) {
    if (i < 0 || i >= dim_)
      throw std::invalid_argument("SelectorMatrix: index " + std::to_string(i) +
                                  " out of range [0, " + std::to_string(dim_) + ")");
    if (seen[i])
      throw std::invalid_argument("SelectorMatrix: duplicate index " + std::to_string(i));
    seen[i] = true;
  }
}

Eigen::VectorXd SelectorMatrix::apply(const Eigen::VectorXd& v) const {
  if (v.size() != dim_) throw std::invalid_argument("SelectorMatrix::apply: size mismatch");
  Eigen::VectorXd out(rows());
  for (int l = 0; l < rows(); ++l) out(l) = v(indices_[l]);
  return out;
}

Eigen::VectorXd SelectorMatrix::apply_transpose(const Eigen::VectorXd& v) const {
  if (v.size() != rows())
    throw std::invalid_argument("SelectorMatrix::apply_transpose: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (int l = 0; l < rows(); ++l) out(indices_[l]) = v(l);
  return out;
}

Eigen::MatrixXd SelectorMatrix::dense() const {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(rows(), dim_);
  for (int l = 0; l < rows(); ++l) P(l, indices_[l]) = 1.0;
  return P;
}

SelectorMatrix sel(const std::vector<int>& index_set, int N) {
  return SelectorMatrix(index_set, N);
}

std::vector<int> complement_indices(const std::vector<int>& index_set, int N) {
  std::vector<bool> in_set(N, false);
  for (int i : index_set) {
    if (i < 0 || i >= N)
      throw std::invalid_argument("complement_indices: index out of range");
    in_set[i] = true;
  }
  std::vector<int> out;
  out.reserve(N - static_cast<int>(index_set.size()));
  for (int i = 0; i < N; ++i)
    if (!in_set[i]) out.push_back(i);
  return out;
}

SensingMatrix gather_rows(const Codebook& cb, const std::vector<int>& source_indices) {
  std::vector<bool> seen(cb.size(), false);
  for (int s : source_indices) {
    if (s < 0 || s >= cb.size())
      throw std::invalid_argument("gather_rows: source index out of range");
    if (seen[s]) throw std::invalid_argument("gather_rows: duplicate source index");
    seen[s] = true;
  }
  SensingMatrix A;
  A.source_indices = source_indices;
  A.rows.resize(static_cast<int>(source_indices.size()), cb.dim());
  for (int k = 0; k < A.sensors(); ++k) A.rows.row(k) = cb.vectors.row(source_indices[k]);
  return A;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& Q) {
  const auto K = Q.rows();
  const auto L = Q.cols();
  if (L < 1) throw std::invalid_argument("pseudo_inverse: empty matrix");
  if (K < L) throw std::invalid_argument("pseudo_inverse: requires rows >= cols");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Q);
  // |diag(R)| is nonincreasing under column pivoting; its extremes give a
  // cheap condition estimate.
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  const double dmax = diag(0);
  const double dmin = diag(L - 1);
  const double condition =
      dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "pseudo_inverse: ill-conditioned " << K << "x" << L
        << " matrix, condition estimate " << condition;
    throw SingularMatrixError(msg.str(), condition);
  }
  return qr.solve(Eigen::MatrixXd::Identity(K, K));
}

}  // namespace oas
