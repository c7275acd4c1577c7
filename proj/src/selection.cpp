#include "oas/selection.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "oas/rng.hpp"

namespace oas {

namespace {

// x_hat with the targeted positions zeroed; this is E^T E x_hat = E^T x~.
Eigen::VectorXd zero_padded_residual(const std::vector<int>& targets,
                                     const Eigen::VectorXd& x_hat, int N) {
  if (x_hat.size() != N)
    throw std::invalid_argument("selection: estimate length does not match codebook dimension");
  sel(targets, N);  // validates the target set
  Eigen::VectorXd t = x_hat;
  for (int i : targets) t(i) = 0.0;
  return t;
}

double binomial_capped(int n, int k, double cap) {
  k = std::min(k, n - k);
  double v = 1.0;
  for (int i = 1; i <= k; ++i) {
    v *= static_cast<double>(n - k + i) / i;
    if (v > cap) return v;
  }
  return v;
}

}  // namespace

SelectionKind selection_kind_from_string(const std::string& name) {
  if (name == "random") return SelectionKind::Random;
  if (name == "stepwise") return SelectionKind::Stepwise;
  if (name == "exhaustive") return SelectionKind::Exhaustive;
  throw std::invalid_argument("unknown selection strategy: " + name);
}

std::string to_string(SelectionKind kind) {
  switch (kind) {
    case SelectionKind::Random: return "random";
    case SelectionKind::Stepwise: return "stepwise";
    case SelectionKind::Exhaustive: return "exhaustive";
  }
  return "unknown";
}

std::vector<int> select_random(const Codebook& cb, int K, std::uint64_t seed) {
  if (K < 1 || K > cb.size())
    throw std::invalid_argument("select_random: need 1 <= K <= S");
  Rng rng(seed);
  return rng.sample_indices(cb.size(), K);
}

std::vector<int> select_exhaustive(const Codebook& cb, int K, const std::vector<int>& targets,
                                   const Eigen::VectorXd& x_hat, double subset_budget) {
  const int S = cb.size();
  if (K < 1 || K > S) throw std::invalid_argument("select_exhaustive: need 1 <= K <= S");
  if (binomial_capped(S, K, subset_budget) > subset_budget) {
    std::ostringstream msg;
    msg << "select_exhaustive: C(" << S << ", " << K << ") exceeds the subset budget of "
        << subset_budget << "; use the stepwise strategy instead";
    throw std::invalid_argument(msg.str());
  }

  // The objective decomposes per selected row:
  //   ||U E^T x~||^2 = sum_k (u_k^T E^T x~)^2,
  // so sorting per-codeword scores yields the same subset as enumerating all
  // C(S, K) candidates, and value ties taken at the smallest index give the
  // lexicographically smallest minimizing set.
  const Eigen::VectorXd t = zero_padded_residual(targets, x_hat, cb.dim());
  const Eigen::VectorXd s = cb.vectors * t;

  std::vector<int> order(S);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = s(a) * s(a), sb = s(b) * s(b);
    return sa != sb ? sa < sb : a < b;
  });
  std::vector<int> chosen(order.begin(), order.begin() + K);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<int> select_stepwise(const Codebook& cb, int K, const std::vector<int>& targets,
                                 const Eigen::VectorXd& x_hat, std::uint64_t seed) {
  const int S = cb.size();
  if (K < 1 || K > S) throw std::invalid_argument("select_stepwise: need 1 <= K <= S");

  const Eigen::VectorXd t = zero_padded_residual(targets, x_hat, cb.dim());
  const int L = static_cast<int>(targets.size());

  // per-codeword precomputation: s_i = c_i^T E^T x~ and g_i = P c_i
  const Eigen::VectorXd s = cb.vectors * t;
  Eigen::MatrixXd g(S, L);
  for (int l = 0; l < L; ++l) g.col(l) = cb.vectors.col(targets[l]);
  const Eigen::VectorXd g2 = g.rowwise().squaredNorm();

  Rng rng(seed);
  const int first = static_cast<int>(rng.below(static_cast<std::uint64_t>(S)));

  std::vector<char> used(S, 0);
  std::vector<int> chosen;
  chosen.reserve(K);
  chosen.push_back(first);
  used[first] = 1;

  Eigen::VectorXd v = s(first) * g.row(first).transpose();
  for (int k = 1; k < K; ++k) {
    // f_k(c_i) = s_i^2 ||g_i||^2 + 2 s_i g_i.v + ||v||^2; the constant term is
    // shared by all candidates and dropped
    const Eigen::VectorXd gv = g * v;
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < S; ++i) {
      if (used[i]) continue;
      const double score = s(i) * s(i) * g2(i) + 2.0 * s(i) * gv(i);
      if (score < best_score) {
        best_score = score;
        best = i;
      }
    }
    chosen.push_back(best);
    used[best] = 1;
    v += s(best) * g.row(best).transpose();
  }
  return chosen;
}

double interference_power(const Codebook& cb, const std::vector<int>& rows,
                          const std::vector<int>& targets, const Eigen::VectorXd& x_hat) {
  const Eigen::VectorXd t = zero_padded_residual(targets, x_hat, cb.dim());
  double power = 0.0;
  for (int r : rows) {
    if (r < 0 || r >= cb.size())
      throw std::invalid_argument("interference_power: row index out of range");
    const double proj = cb.vectors.row(r).dot(t);
    power += proj * proj;
  }
  return power;
}

}  // namespace oas
