#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace oas {

// Condition-number ceiling for the decoupling filter; beyond this the
// decoupled noise variances are meaningless.
inline constexpr double kMaxCondition = 1e10;

// Predefined set of S candidate coefficient vectors in R^N, one per row.
// Immutable after construction; safe to share across workers.
struct Codebook {
  Eigen::MatrixXd vectors;  // S x N
  double entry_variance = 0.0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

// S vectors with i.i.d. zero-mean Gaussian entries of the given variance.
// Bit-for-bit reproducible from the seed.
Codebook generate_codebook(int S, int N, double entry_variance, std::uint64_t seed);

// Text matrix file, row-major, header line "S N entry_variance seed".
// Doubles are written with enough digits to round-trip exactly.
void save_codebook(const Codebook& cb, const std::string& path);
Codebook load_codebook(const std::string& path);

// Row selector onto an ordered index set: row l of the materialized matrix is
// the standard basis vector with its 1 at the l-th index of the set. Stored
// as indices and applied as gather/scatter; dense() exists for tests.
class SelectorMatrix {
 public:
  SelectorMatrix(std::vector<int> indices, int dim);

  int rows() const { return static_cast<int>(indices_.size()); }
  int dim() const { return dim_; }
  const std::vector<int>& indices() const { return indices_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;            // P v
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;  // P^T v
  Eigen::MatrixXd dense() const;

 private:
  std::vector<int> indices_;
  int dim_;
};

SelectorMatrix sel(const std::vector<int>& index_set, int N);

// Ascending complement of the index set in [0, N).
std::vector<int> complement_indices(const std::vector<int>& index_set, int N);

// K codebook rows stacked as a sensing matrix, remembering their positions.
struct SensingMatrix {
  Eigen::MatrixXd rows;             // K x N
  std::vector<int> source_indices;  // distinct positions in [0, S)

  int sensors() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
};

SensingMatrix gather_rows(const Codebook& cb, const std::vector<int>& source_indices);

// Left pseudo-inverse (Q^T Q)^{-1} Q^T of a K x L matrix with K >= L,
// computed through a column-pivoted QR factorization. Throws
// SingularMatrixError when the estimated condition number exceeds
// kMaxCondition.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& Q);

}  // namespace oas
