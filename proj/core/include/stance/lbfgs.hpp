#pragma once

#include <deque>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace stance {

struct LbfgsOptions {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-5;  // converged when ||grad||_2 falls below
  int history = 10;
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0;
  double gradient_norm = 0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with two-loop recursion and backtracking Armijo line
// search. The objective must return the value and fill the gradient.
inline LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& objective,
    Eigen::VectorXd x0, const LbfgsOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd grad(n), new_grad(n);
  double fx = objective(x, grad);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  LbfgsResult result;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const double gnorm = grad.norm();
    if (gnorm <= opts.gradient_tolerance) {
      result.converged = true;
      result.iterations = iter;
      break;
    }

    // two-loop recursion
    Eigen::VectorXd dir = -grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(dir);
      dir -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      dir *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alpha[i] - beta) * s_hist[i];
    }

    double dg = grad.dot(dir);
    if (dg >= 0) {  // not a descent direction; restart from steepest descent
      dir = -grad;
      dg = -gnorm * gnorm;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // backtracking Armijo
    double step = 1.0;
    double new_fx = fx;
    Eigen::VectorXd new_x;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      new_x = x + step * dir;
      new_fx = objective(new_x, new_grad);
      if (std::isfinite(new_fx) && new_fx <= fx + 1e-4 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.iterations = iter;
      break;  // line search exhausted; report best point so far
    }

    Eigen::VectorXd s = new_x - x;
    Eigen::VectorXd y = new_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(new_x);
    fx = new_fx;
    grad = new_grad;
    result.iterations = iter + 1;
  }

  if (!result.converged && grad.norm() <= opts.gradient_tolerance) result.converged = true;
  result.x = std::move(x);
  result.value = fx;
  result.gradient_norm = grad.norm();
  return result;
}

}  // namespace stance
