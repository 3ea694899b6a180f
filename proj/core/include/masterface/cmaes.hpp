#ifndef MASTERFACE_CMAES_HPP_
#define MASTERFACE_CMAES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "masterface/matrix.hpp"
#include "masterface/rng.hpp"

namespace masterface {

// Covariance Matrix Adaptation Evolution Strategy, maximization native,
// with an ask/tell interface. Standard rank-mu update with cumulative
// step-size adaptation; positive recombination weights only.

struct CmaParams {
  std::size_t dim = 0;
  std::size_t lambda = 0;      // population size
  std::size_t mu = 0;          // parents, floor(lambda/2)
  std::vector<double> weights; // mu entries, descending, sum 1
  double mu_eff = 0.0;         // (sum w)^2 / sum w^2
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double sigma0 = 0.3;
  double chi_n = 0.0;                 // E||N(0,I)||, closed-form approximation
  std::size_t eigen_interval = 1;     // cache refresh cadence in generations
};

// Standard parameter schedule: w_i ~ ln(mu + 1/2) - ln(i), learning rates
// from the usual closed forms in dim and mu_eff.
CmaParams default_params(std::size_t dim, std::size_t lambda, double sigma0 = 0.3);

struct EigenCache {
  std::vector<double> values;  // eigenvalues of cov, descending, floored > 0
  Matrix vectors;              // columns are the eigenvectors
  std::size_t generation = 0;  // generation the cache was computed at
};

struct CmaState {
  CmaParams params;
  std::vector<double> mean;
  double sigma = 0.0;
  Matrix cov;
  std::vector<double> p_sigma;
  std::vector<double> p_c;
  std::size_t generation = 0;
  EigenCache eigen;
};

struct Candidate {
  std::vector<double> latent;
  std::optional<double> fitness;
};

// Fresh state: identity covariance, zero paths, sigma = sigma0.
CmaState init(const CmaParams& params, const std::vector<double>& mean0);

// Decompose cov into the cache, flooring eigenvalues at 1e-16 of the largest.
// Throws NumericalError if the spectrum cannot be repaired.
void refresh_eigen_cache(CmaState& state);

// Sample lambda candidates mean + sigma * B * sqrt(D) * xi. Refreshes the
// eigen cache when stale; otherwise read-only. Deterministic given (state, rng).
std::vector<Candidate> ask(CmaState& state, NormalStream& rng);

// Rank by fitness (maximization, ties by sampling index), recombine the mean,
// update both evolution paths, the covariance, and the step size. Uses only
// the ranking, never fitness magnitudes, so strictly monotone fitness
// transformations leave the update bit-identical.
void tell(CmaState& state, const std::vector<Candidate>& candidates);

struct RestartCheck {
  bool restart = false;
  std::string reason;
};

// Signals a degenerate search distribution: covariance condition number above
// 1e14 ("condition") or sigma * sqrt(max eigenvalue) below 1e-12
// ("step-size collapse"). Uses the cached spectrum.
RestartCheck should_restart(const CmaState& state);

// Snapshot for run resumption; round-trips bit-exactly (the eigen cache is
// included so a stale cache survives the round trip unchanged).
nlohmann::json cma_snapshot(const CmaState& state, const NormalStream& rng);
CmaState cma_restore(const nlohmann::json& doc, NormalStream& rng_out);

}  // namespace masterface

#endif  // MASTERFACE_CMAES_HPP_
