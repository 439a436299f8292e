#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cssense/recovery.hpp"

// Sequential evidence maximisation: basis functions enter, get re-estimated
// and leave one at a time, each step taking the largest gain in log evidence.

namespace cssense {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Cholesky with one ridge-stabilised retry.
Eigen::LLT<Mat> stable_llt(Mat h) {
  Eigen::LLT<Mat> llt(h);
  if (llt.info() == Eigen::Success) return llt;
  const double ridge = 1e-10 * std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  h.diagonal().array() += ridge;
  llt.compute(h);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("bayesian_recover: posterior covariance is singular");
  }
  return llt;
}

struct Model {
  std::vector<Eigen::Index> active;
  Vec alpha;  // precisions of the active columns, same order
};

struct Fit {
  Vec mu;          // posterior mean on the active set
  Vec sigma_diag;  // posterior variances on the active set
  Vec big_s;       // sparsity factor S_i for every column
  Vec big_q;       // quality factor Q_i for every column
  double log_evidence = 0.0;
  double resid_sq = 0.0;
};

Fit evaluate(const Mat& phi, const Vec& phi_t_y, const Vec& col_sq, const Vec& y, const Model& model,
             double beta) {
  const auto m = phi.rows();
  const auto s = static_cast<Eigen::Index>(model.active.size());
  Mat phi_a(m, s);
  for (Eigen::Index j = 0; j < s; ++j) phi_a.col(j) = phi.col(model.active[static_cast<std::size_t>(j)]);

  Mat h = beta * phi_a.transpose() * phi_a;
  h.diagonal() += model.alpha;
  const auto llt = stable_llt(std::move(h));
  Vec phi_a_t_y(s);
  for (Eigen::Index j = 0; j < s; ++j) phi_a_t_y[j] = phi_t_y[model.active[static_cast<std::size_t>(j)]];

  Fit f;
  f.mu = llt.solve(beta * phi_a_t_y);
  const Mat l_inv = llt.matrixL().solve(Mat::Identity(s, s));
  f.sigma_diag = l_inv.colwise().squaredNorm().transpose();

  // S_i = beta |phi_i|^2 - beta^2 g_i^T Sigma g_i,  Q_i = beta phi_i^T y - beta g_i^T mu
  const Mat g = phi_a.transpose() * phi;  // s x n
  const Mat lg = llt.matrixL().solve(g);
  f.big_s = beta * col_sq - beta * beta * lg.colwise().squaredNorm().transpose();
  f.big_q = beta * phi_t_y - beta * (g.transpose() * f.mu);

  const Vec r = y - phi_a * f.mu;
  f.resid_sq = r.squaredNorm();
  const double log_det_h = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double quad = beta * f.resid_sq + (model.alpha.array() * f.mu.array().square()).sum();
  const double log_det_c =
      -static_cast<double>(m) * std::log(beta) - model.alpha.array().log().sum() + log_det_h;
  f.log_evidence = -0.5 * (static_cast<double>(m) * std::log(2.0 * std::numbers::pi) + log_det_c + quad);
  return f;
}

enum class Action { none, add, update, remove };

struct Move {
  Action action = Action::none;
  Eigen::Index column = -1;
  double gain = 0.0;
  double alpha = 0.0;
};

// Best single add / re-estimate / delete. Each active column is charged
// `size_cost` nats of log evidence.
Move best_move(const Fit& fit, const Model& model, const std::vector<Eigen::Index>& slot,
               double prune_threshold, double size_cost) {
  const double inf = std::numeric_limits<double>::infinity();
  Move best;
  const auto n = fit.big_s.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double big_s = fit.big_s[i], big_q = fit.big_q[i];
    const Eigen::Index pos = slot[static_cast<std::size_t>(i)];
    double s = big_s, q = big_q;
    if (pos >= 0) {
      const double al = model.alpha[pos];
      s = al * big_s / (al - big_s);
      q = al * big_q / (al - big_s);
    }
    const double theta = q * q - s;
    double gain = 0.0;
    Action act = Action::none;
    double new_alpha = inf;
    if (theta > 0.0 && s > 0.0 && s * s / theta <= prune_threshold) {
      new_alpha = s * s / theta;
      if (pos < 0) {
        act = Action::add;
        gain = 0.5 * ((big_q * big_q - big_s) / big_s + std::log(big_s / (big_q * big_q))) - size_cost;
      } else {
        act = Action::update;
        const double delta = 1.0 / new_alpha - 1.0 / model.alpha[pos];
        gain = 0.5 * (big_q * big_q / (big_s + 1.0 / delta) - std::log1p(big_s * delta));
      }
    } else if (pos >= 0 && model.active.size() > 1) {
      act = Action::remove;
      const double al = model.alpha[pos];
      gain = 0.5 * (big_q * big_q / (big_s - al) - std::log1p(-big_s / al)) + size_cost;
    }
    if (act != Action::none && std::isfinite(gain) && gain > best.gain) best = {act, i, gain, new_alpha};
  }
  return best;
}

void apply_move(const Move& mv, Model& model, const std::vector<Eigen::Index>& slot) {
  const Eigen::Index pos = slot[static_cast<std::size_t>(mv.column)];
  switch (mv.action) {
    case Action::add:
      model.active.push_back(mv.column);
      model.alpha.conservativeResize(model.alpha.size() + 1);
      model.alpha[model.alpha.size() - 1] = mv.alpha;
      break;
    case Action::update:
      model.alpha[pos] = mv.alpha;
      break;
    case Action::remove: {
      model.active.erase(model.active.begin() + pos);
      Vec rest(model.alpha.size() - 1);
      rest << model.alpha.head(pos), model.alpha.tail(model.alpha.size() - pos - 1);
      model.alpha = rest;
      break;
    }
    case Action::none: break;
  }
}

double noise_precision(const Fit& fit, const Model& model, Eigen::Index m, double cap) {
  const double gamma_sum = (1.0 - model.alpha.array() * fit.sigma_diag.array()).sum();
  return std::min(std::max(static_cast<double>(m) - gamma_sum, 1e-6) / std::max(fit.resid_sq, 1e-300), cap);
}

}  // namespace

BayesianResult bayesian_recover(const MeasurementVector& y, const SensingMatrix& a,
                                const BayesOpts& opts) {
  if (y.size() != a.rows()) throw std::invalid_argument("bayesian_recover: dimension mismatch");
  if (a.rows() < 1) throw std::invalid_argument("bayesian_recover: need m >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = static_cast<Eigen::Index>(a.rows());
  const auto n = static_cast<Eigen::Index>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();

  BayesianResult out;
  RecoveryResult& res = out.base;
  res.measurements_used = a.rows();
  res.x_hat = Vec::Zero(n);
  out.signal_variance_hat = Vec::Zero(n);
  out.hyper_a = Vec::Constant(n, inf);

  const double y_sq = y.values.squaredNorm();
  if (y_sq == 0.0) {
    res.converged = true;
    out.hyper_b = inf;
    out.noise_variance_hat = std::numeric_limits<double>::min();
    res.recovery_time = std::chrono::steady_clock::now() - t0;
    return out;
  }

  const Mat phi = a.dense();
  const Vec phi_t_y = phi.transpose() * y.values;
  const Vec col_sq = phi.colwise().squaredNorm().transpose();
  double beta = static_cast<double>(m) / y_sq;
  const double beta_max = 1e10 * static_cast<double>(m) / y_sq;

  // seed the model with the best-aligned column
  Model model;
  {
    Eigen::Index best = 0;
    double best_proj = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (col_sq[i] <= 0.0) continue;
      const double p = phi_t_y[i] * phi_t_y[i] / col_sq[i];
      if (p > best_proj) {
        best_proj = p;
        best = i;
      }
    }
    if (best_proj <= 0.0) {
      res.converged = true;
      out.hyper_b = beta;
      out.noise_variance_hat = 1.0 / beta;
      res.recovery_time = std::chrono::steady_clock::now() - t0;
      return out;
    }
    const double excess = best_proj - 1.0 / beta;
    model.active = {best};
    model.alpha = Vec::Constant(1, excess > 0.0 ? col_sq[best] / excess : col_sq[best] / best_proj * 1e3);
  }

  const double size_cost = opts.size_cost >= 0.0 ? opts.size_cost : 0.5 * std::log(static_cast<double>(n));
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);  // column -> position in active
  auto reindex = [&] {
    std::fill(slot.begin(), slot.end(), -1);
    for (std::size_t j = 0; j < model.active.size(); ++j) {
      slot[static_cast<std::size_t>(model.active[j])] = static_cast<Eigen::Index>(j);
    }
  };
  reindex();
  Fit fit = evaluate(phi, phi_t_y, col_sq, y.values, model, beta);
  auto score = [&] { return fit.log_evidence - size_cost * static_cast<double>(model.active.size()); };
  std::size_t it = 0;
  auto record = [&] {
    ++it;
    res.iterations = it;
    res.objective_trace.push_back(-fit.log_evidence);
  };

  // Warm start: unpenalised moves with the noise level tracking every step.
  // Joint noise estimation drifts towards interpolating y once the support
  // is found, so keep the model with the best penalised evidence on the way.
  {
    Model kept = model;
    double kept_beta = beta;
    double kept_score = score();
    std::size_t stale = 0;
    const std::size_t patience = 25;
    while (it < opts.max_iter && stale < patience) {
      record();
      const Move mv = best_move(fit, model, slot, opts.prune_threshold, 0.0);
      if (mv.action == Action::none || mv.gain <= opts.tol * std::max(1.0, std::fabs(fit.log_evidence))) break;
      apply_move(mv, model, slot);
      reindex();
      fit = evaluate(phi, phi_t_y, col_sq, y.values, model, beta);
      beta = noise_precision(fit, model, m, beta_max);
      fit = evaluate(phi, phi_t_y, col_sq, y.values, model, beta);
      if (score() > kept_score) {
        kept = model;
        kept_beta = beta;
        kept_score = score();
        stale = 0;
      } else {
        ++stale;
      }
    }
    model = kept;
    beta = kept_beta;
    reindex();
    fit = evaluate(phi, phi_t_y, col_sq, y.values, model, beta);
  }

  // Refinement: penalised coordinate ascent at a held noise level, then one
  // noise update, until neither moves.
  while (it < opts.max_iter) {
    record();
    const double scale = std::max(1.0, std::fabs(fit.log_evidence));
    const Move mv = best_move(fit, model, slot, opts.prune_threshold, size_cost);
    if (mv.action != Action::none && mv.gain > opts.tol * scale) {
      apply_move(mv, model, slot);
      reindex();
      fit = evaluate(phi, phi_t_y, col_sq, y.values, model, beta);
      continue;
    }
    const double before = fit.log_evidence;
    const double next_beta = noise_precision(fit, model, m, beta_max);
    const bool settled = std::fabs(next_beta - beta) <= 1e-9 * beta;
    beta = next_beta;
    fit = evaluate(phi, phi_t_y, col_sq, y.values, model, beta);
    if (settled || std::fabs(fit.log_evidence - before) <= opts.tol * scale) {
      res.converged = true;
      break;
    }
  }

  for (std::size_t j = 0; j < model.active.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    res.x_hat[model.active[j]] = fit.mu[jj];
    out.signal_variance_hat[model.active[j]] = fit.sigma_diag[jj];
    out.hyper_a[model.active[j]] = model.alpha[jj];
  }
  out.hyper_b = beta;
  out.noise_variance_hat = 1.0 / beta;
  res.recovery_time = std::chrono::steady_clock::now() - t0;
  return out;
}

}  // namespace cssense
