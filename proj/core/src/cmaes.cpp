#include "masterface/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "masterface/errors.hpp"

namespace masterface {

using nlohmann::json;

CmaParams default_params(std::size_t dim, std::size_t lambda, double sigma0) {
  if (dim < 1) throw StructuralError("cmaes: dim must be at least 1");
  if (lambda < 2) throw StructuralError("cmaes: lambda must be at least 2");
  if (!(sigma0 > 0.0)) throw StructuralError("cmaes: sigma0 must be positive");

  CmaParams p;
  p.dim = dim;
  p.lambda = lambda;
  p.mu = lambda / 2;
  p.sigma0 = sigma0;

  std::vector<double> raw(p.mu);
  for (std::size_t i = 0; i < p.mu; ++i)
    raw[i] = std::log(static_cast<double>(p.mu) + 0.5) -
             std::log(static_cast<double>(i + 1));
  double s1 = 0.0, s2 = 0.0;
  for (double w : raw) {
    s1 += w;
    s2 += w * w;
  }
  p.mu_eff = s1 * s1 / s2;
  p.weights.resize(p.mu);
  for (std::size_t i = 0; i < p.mu; ++i) p.weights[i] = raw[i] / s1;

  const double d = static_cast<double>(dim);
  const double me = p.mu_eff;
  p.c_sigma = (me + 2.0) / (d + me + 5.0);
  p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((me - 1.0) / (d + 1.0)) - 1.0) + p.c_sigma;
  p.c_c = (4.0 + me / d) / (d + 4.0 + 2.0 * me / d);
  p.c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + me);
  p.c_mu = std::min(1.0 - p.c_1,
                    2.0 * (me - 2.0 + 1.0 / me) / ((d + 2.0) * (d + 2.0) + me));
  p.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
  p.eigen_interval = static_cast<std::size_t>(
      std::max(1.0, std::ceil(1.0 / (10.0 * d * (p.c_1 + p.c_mu)))));
  return p;
}

CmaState init(const CmaParams& params, const std::vector<double>& mean0) {
  if (mean0.size() != params.dim)
    throw StructuralError("cmaes init: mean0 length does not match dim");
  for (double v : mean0)
    if (!std::isfinite(v)) throw StructuralError("cmaes init: non-finite mean entry");

  CmaState s;
  s.params = params;
  s.mean = mean0;
  s.sigma = params.sigma0;
  s.cov = Matrix::identity(params.dim);
  s.p_sigma.assign(params.dim, 0.0);
  s.p_c.assign(params.dim, 0.0);
  s.generation = 0;
  s.eigen.values.assign(params.dim, 1.0);
  s.eigen.vectors = Matrix::identity(params.dim);
  s.eigen.generation = 0;
  return s;
}

void refresh_eigen_cache(CmaState& state) {
  SymEigenResult eig = sym_eig(state.cov);
  const double max_ev = eig.eigenvalues.front();
  if (!(max_ev > 0.0))
    throw NumericalError("cmaes: covariance not positive definite, largest eigenvalue <= 0");
  // Floor tiny/negative eigenvalues; the matching restart signal (condition
  // number 1e14) fires well before the floor becomes load-bearing.
  const double floor = max_ev * 1e-16;
  for (double& v : eig.eigenvalues)
    if (v < floor) v = floor;
  state.eigen.values = std::move(eig.eigenvalues);
  state.eigen.vectors = std::move(eig.vectors);
  state.eigen.generation = state.generation;
}

std::vector<Candidate> ask(CmaState& state, NormalStream& rng) {
  const CmaParams& p = state.params;
  if (state.generation - state.eigen.generation >= p.eigen_interval)
    refresh_eigen_cache(state);

  std::vector<double> axis(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) axis[i] = std::sqrt(state.eigen.values[i]);

  std::vector<Candidate> out(p.lambda);
  std::vector<double> scaled(p.dim);
  for (std::size_t c = 0; c < p.lambda; ++c) {
    for (std::size_t i = 0; i < p.dim; ++i) scaled[i] = axis[i] * rng.gauss();
    out[c].latent.resize(p.dim);
    for (std::size_t row = 0; row < p.dim; ++row) {
      double s = 0.0;
      for (std::size_t col = 0; col < p.dim; ++col)
        s += state.eigen.vectors(row, col) * scaled[col];
      out[c].latent[row] = state.mean[row] + state.sigma * s;
    }
  }
  return out;
}

void tell(CmaState& state, const std::vector<Candidate>& candidates) {
  const CmaParams& p = state.params;
  const std::size_t d = p.dim;
  if (candidates.size() != p.lambda)
    throw StructuralError("cmaes tell: candidate count does not equal lambda");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].latent.size() != d)
      throw StructuralError("cmaes tell: candidate latent dimension mismatch");
    if (!candidates[i].fitness.has_value() || !std::isfinite(*candidates[i].fitness)) {
      std::ostringstream msg;
      msg << "cmaes tell: fitness unset or non-finite at candidate index " << i;
      throw StructuralError(msg.str());
    }
  }

  // Rank for maximization; ties keep sampling order.
  std::vector<std::size_t> order(p.lambda);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *candidates[a].fitness > *candidates[b].fitness;
  });

  const std::vector<double> old_mean = state.mean;
  std::vector<double> new_mean(d, 0.0);
  for (std::size_t k = 0; k < p.mu; ++k) {
    const auto& x = candidates[order[k]].latent;
    const double w = p.weights[k];
    for (std::size_t j = 0; j < d; ++j) new_mean[j] += w * x[j];
  }

  std::vector<double> y_w(d);
  for (std::size_t j = 0; j < d; ++j) y_w[j] = (new_mean[j] - old_mean[j]) / state.sigma;

  // C^{-1/2} y_w through the cached basis (the one sampling used).
  std::vector<double> tmp(d, 0.0);
  for (std::size_t col = 0; col < d; ++col) {
    double s = 0.0;
    for (std::size_t row = 0; row < d; ++row) s += state.eigen.vectors(row, col) * y_w[row];
    tmp[col] = s / std::sqrt(state.eigen.values[col]);
  }
  std::vector<double> c_invsqrt_y(d, 0.0);
  for (std::size_t row = 0; row < d; ++row) {
    double s = 0.0;
    for (std::size_t col = 0; col < d; ++col) s += state.eigen.vectors(row, col) * tmp[col];
    c_invsqrt_y[row] = s;
  }

  const double cs = p.c_sigma;
  const double cs_in = std::sqrt(cs * (2.0 - cs) * p.mu_eff);
  for (std::size_t j = 0; j < d; ++j)
    state.p_sigma[j] = (1.0 - cs) * state.p_sigma[j] + cs_in * c_invsqrt_y[j];

  const double ps_norm = norm2(state.p_sigma);
  const double gen1 = static_cast<double>(state.generation + 1);
  const double unbias = std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * gen1));
  const bool h_sigma =
      ps_norm / unbias < (1.4 + 2.0 / (static_cast<double>(d) + 1.0)) * p.chi_n;

  const double cc = p.c_c;
  const double cc_in = h_sigma ? std::sqrt(cc * (2.0 - cc) * p.mu_eff) : 0.0;
  for (std::size_t j = 0; j < d; ++j)
    state.p_c[j] = (1.0 - cc) * state.p_c[j] + cc_in * y_w[j];

  // Rank-one + rank-mu covariance update with the stall correction
  // delta(h_sigma) * C folded into the decay factor.
  const double delta_h = h_sigma ? 0.0 : cc * (2.0 - cc);
  const double decay = 1.0 - p.c_1 - p.c_mu + p.c_1 * delta_h;
  std::vector<std::vector<double>> y_sel(p.mu, std::vector<double>(d));
  for (std::size_t k = 0; k < p.mu; ++k) {
    const auto& x = candidates[order[k]].latent;
    for (std::size_t j = 0; j < d; ++j) y_sel[k][j] = (x[j] - old_mean[j]) / state.sigma;
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double v = decay * state.cov(i, j) + p.c_1 * state.p_c[i] * state.p_c[j];
      for (std::size_t k = 0; k < p.mu; ++k)
        v += p.c_mu * p.weights[k] * y_sel[k][i] * y_sel[k][j];
      state.cov(i, j) = v;
      state.cov(j, i) = v;
    }
  }

  state.sigma *= std::exp((cs / p.d_sigma) * (ps_norm / p.chi_n - 1.0));
  state.mean = std::move(new_mean);
  ++state.generation;
}

RestartCheck should_restart(const CmaState& state) {
  const auto& vals = state.eigen.values;
  const double max_ev = vals.front();
  const double min_ev = vals.back();
  if (max_ev / min_ev > 1e14) return {true, "condition"};
  if (state.sigma * std::sqrt(max_ev) < 1e-12) return {true, "step-size collapse"};
  return {false, ""};
}

namespace {

json params_to_json(const CmaParams& p) {
  return json{{"dim", p.dim},
              {"lambda", p.lambda},
              {"mu", p.mu},
              {"weights", p.weights},
              {"mu_eff", p.mu_eff},
              {"c_sigma", p.c_sigma},
              {"d_sigma", p.d_sigma},
              {"c_c", p.c_c},
              {"c_1", p.c_1},
              {"c_mu", p.c_mu},
              {"sigma0", p.sigma0},
              {"chi_n", p.chi_n},
              {"eigen_interval", p.eigen_interval}};
}

CmaParams params_from_json(const json& j) {
  CmaParams p;
  p.dim = j.at("dim").get<std::size_t>();
  p.lambda = j.at("lambda").get<std::size_t>();
  p.mu = j.at("mu").get<std::size_t>();
  p.weights = j.at("weights").get<std::vector<double>>();
  p.mu_eff = j.at("mu_eff").get<double>();
  p.c_sigma = j.at("c_sigma").get<double>();
  p.d_sigma = j.at("d_sigma").get<double>();
  p.c_c = j.at("c_c").get<double>();
  p.c_1 = j.at("c_1").get<double>();
  p.c_mu = j.at("c_mu").get<double>();
  p.sigma0 = j.at("sigma0").get<double>();
  p.chi_n = j.at("chi_n").get<double>();
  p.eigen_interval = j.at("eigen_interval").get<std::size_t>();
  return p;
}

Matrix matrix_from_flat(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  if (flat.size() != rows * cols)
    throw StructuralError("cmaes snapshot: matrix payload has wrong length");
  Matrix m(rows, cols);
  m.data = flat;
  return m;
}

}  // namespace

json cma_snapshot(const CmaState& state, const NormalStream& rng) {
  return json{{"format", "cma-snapshot-v1"},
              {"params", params_to_json(state.params)},
              {"mean", state.mean},
              {"sigma", state.sigma},
              {"cov", state.cov.data},
              {"p_sigma", state.p_sigma},
              {"p_c", state.p_c},
              {"generation", state.generation},
              {"eigen",
               json{{"values", state.eigen.values},
                    {"vectors", state.eigen.vectors.data},
                    {"generation", state.eigen.generation}}},
              {"rng", json{{"seed", rng.seed()}, {"count", rng.count()}}}};
}

CmaState cma_restore(const json& doc, NormalStream& rng_out) {
  if (doc.value("format", "") != std::string("cma-snapshot-v1"))
    throw StructuralError("cmaes snapshot: unrecognized format tag");
  CmaState s;
  s.params = params_from_json(doc.at("params"));
  const std::size_t d = s.params.dim;
  s.mean = doc.at("mean").get<std::vector<double>>();
  if (s.mean.size() != d) throw StructuralError("cmaes snapshot: mean length mismatch");
  s.sigma = doc.at("sigma").get<double>();
  s.cov = matrix_from_flat(doc.at("cov").get<std::vector<double>>(), d, d);
  s.p_sigma = doc.at("p_sigma").get<std::vector<double>>();
  s.p_c = doc.at("p_c").get<std::vector<double>>();
  if (s.p_sigma.size() != d || s.p_c.size() != d)
    throw StructuralError("cmaes snapshot: path length mismatch");
  s.generation = doc.at("generation").get<std::size_t>();
  const json& ej = doc.at("eigen");
  s.eigen.values = ej.at("values").get<std::vector<double>>();
  if (s.eigen.values.size() != d)
    throw StructuralError("cmaes snapshot: eigenvalue payload mismatch");
  s.eigen.vectors = matrix_from_flat(ej.at("vectors").get<std::vector<double>>(), d, d);
  s.eigen.generation = ej.at("generation").get<std::size_t>();
  const json& rj = doc.at("rng");
  rng_out = NormalStream(rj.at("seed").get<std::uint64_t>(), rj.at("count").get<std::uint64_t>());
  return s;
}

}  // namespace masterface
