#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "oas/codebook.hpp"

namespace oas {

enum class SelectionKind { Random, Stepwise, Exhaustive };

SelectionKind selection_kind_from_string(const std::string& name);
std::string to_string(SelectionKind kind);

// K distinct codebook indices drawn uniformly at random.
std::vector<int> select_random(const Codebook& cb, int K, std::uint64_t seed);

// The K-subset minimizing the interference power ||U E^T x~||^2, where the
// rows of U are the chosen codewords and x~ is the current estimate restricted
// to the non-targeted samples. Ties resolve to the lexicographically smallest
// index set; the result is in ascending order. Refuses when C(S, K) exceeds
// the subset budget.
std::vector<int> select_exhaustive(const Codebook& cb, int K, const std::vector<int>& targets,
                                   const Eigen::VectorXd& x_hat,
                                   double subset_budget = 1e6);

// Greedy stepwise regression: the first codeword is drawn at random (seeded),
// then each step adds the unused codeword minimizing
//   f_k(u) = || (u^T E^T x~) P u + v_k ||^2,  v_k = P A_k A_k^T E^T x~,
// with A_k collecting the codewords chosen so far as columns. Ties resolve to
// the smallest codebook index.
std::vector<int> select_stepwise(const Codebook& cb, int K, const std::vector<int>& targets,
                                 const Eigen::VectorXd& x_hat, std::uint64_t seed);

// Interference power ||A E^T x~||^2 of the given codebook rows against the
// current estimate; diagnostic used by the engine and the tests.
double interference_power(const Codebook& cb, const std::vector<int>& rows,
                          const std::vector<int>& targets, const Eigen::VectorXd& x_hat);

}  // namespace oas
