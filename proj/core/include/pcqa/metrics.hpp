#ifndef PCQA_METRICS_HPP
#define PCQA_METRICS_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace pcqa {

struct LogisticParams {
  // yhat = b1 * (0.5 - 1 / (1 + exp(b2 * (y - b3)))) + b4 * y + b5
  std::array<double, 5> beta = {0, 0, 0, 0, 0};
  double fit_residual = 0.0;  // sum of squared mapping errors
};

double logistic5(const LogisticParams& params, double y);

// Least-squares fit by Nelder-Mead from the standard initialization, with the
// straight-line fit kept as a guaranteed fallback candidate: the returned
// mapping never has a larger residual (or a smaller PLCC) than the best
// linear fit.
LogisticParams fit_logistic(const std::vector<double>& pred, const std::vector<double>& mos);

struct EvalReport {
  size_t n = 0;
  double plcc = 0.0;   // Pearson on logistic-mapped predictions
  double srcc = 0.0;   // Spearman (average ranks)
  double krcc = 0.0;   // Kendall tau-b
  double rmse = 0.0;   // on mapped predictions, MOS units
  double rmse_raw = 0.0;
  LogisticParams logistic;
  std::vector<std::string> flags;

  std::string to_json() const;
  std::string to_table() const;
};

// Ranks with ties averaged (1-based).
std::vector<double> average_ranks(const std::vector<double>& values);

// Pearson correlation; sets *constant when either input has zero variance
// (result is then 0, never NaN).
double pearson(const std::vector<double>& x, const std::vector<double>& y,
               bool* constant = nullptr);

double spearman(const std::vector<double>& x, const std::vector<double>& y,
                bool* constant = nullptr);

// Tie-corrected Kendall tau-b via merge-sort inversion counting.
double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y,
                     bool* constant = nullptr);

// Full protocol: five-parameter logistic mapping, then PLCC / SRCC / KRCC /
// RMSE. Rank correlations are computed on the raw predictions (the mapping is
// monotone in practice and cannot change them). Requires n >= 3; the logistic
// fit engages from n >= 5, below that the linear candidate maps.
EvalReport evaluate_scores(const std::vector<double>& pred, const std::vector<double>& mos);

// Nelder-Mead minimizer used by the logistic fit (exposed for reuse).
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                                std::vector<double> start, int max_iter, double rel_tol);

}  // namespace pcqa

#endif  // PCQA_METRICS_HPP
