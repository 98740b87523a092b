#include "pcqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "pcqa/error.hpp"

namespace pcqa {

double logistic5(const LogisticParams& params, double y) {
  const auto& b = params.beta;
  double arg = b[1] * (y - b[2]);
  if (arg > 500.0) arg = 500.0;
  if (arg < -500.0) arg = -500.0;
  return b[0] * (0.5 - 1.0 / (1.0 + std::exp(arg))) + b[3] * y + b[4];
}

namespace {

double sse_of(const LogisticParams& params, const std::vector<double>& pred,
              const std::vector<double>& mos) {
  double sse = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    double d = logistic5(params, pred[i]) - mos[i];
    sse += d * d;
  }
  return sse;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                                std::vector<double> start, int max_iter, double rel_tol) {
  const size_t dim = start.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> simplex;
  simplex.push_back(start);
  for (size_t d = 0; d < dim; ++d) {
    std::vector<double> v = start;
    double step = 0.1 * std::max(std::abs(v[d]), 0.1);
    v[d] += step;
    simplex.push_back(std::move(v));
  }
  std::vector<double> fvals(simplex.size());
  for (size_t i = 0; i < simplex.size(); ++i) fvals[i] = fn(simplex[i]);

  auto order = [&]() {
    std::vector<size_t> idx(simplex.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fvals[a] < fvals[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (size_t i : idx) {
      s2.push_back(simplex[i]);
      f2.push_back(fvals[i]);
    }
    simplex.swap(s2);
    fvals.swap(f2);
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    order();

    // relative simplex extent against the best vertex
    double spread = 0.0, scale = 1.0;
    for (size_t d = 0; d < dim; ++d) scale = std::max(scale, std::abs(simplex[0][d]));
    for (size_t i = 1; i < simplex.size(); ++i)
      for (size_t d = 0; d < dim; ++d)
        spread = std::max(spread, std::abs(simplex[i][d] - simplex[0][d]));
    if (spread / scale < rel_tol) break;

    std::vector<double> centroid(dim, 0.0);
    for (size_t i = 0; i + 1 < simplex.size(); ++i)
      for (size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d];
    for (size_t d = 0; d < dim; ++d) centroid[d] /= static_cast<double>(simplex.size() - 1);

    const std::vector<double>& worst = simplex.back();
    std::vector<double> reflected(dim);
    for (size_t d = 0; d < dim; ++d) reflected[d] = centroid[d] + alpha * (centroid[d] - worst[d]);
    double f_ref = fn(reflected);

    if (f_ref < fvals[0]) {
      std::vector<double> expanded(dim);
      for (size_t d = 0; d < dim; ++d) expanded[d] = centroid[d] + gamma * (centroid[d] - worst[d]);
      double f_exp = fn(expanded);
      if (f_exp < f_ref) {
        simplex.back() = expanded;
        fvals.back() = f_exp;
      } else {
        simplex.back() = reflected;
        fvals.back() = f_ref;
      }
      continue;
    }
    if (f_ref < fvals[fvals.size() - 2]) {
      simplex.back() = reflected;
      fvals.back() = f_ref;
      continue;
    }
    // contraction
    std::vector<double> contracted(dim);
    if (f_ref < fvals.back()) {
      for (size_t d = 0; d < dim; ++d)
        contracted[d] = centroid[d] + rho * (reflected[d] - centroid[d]);
    } else {
      for (size_t d = 0; d < dim; ++d) contracted[d] = centroid[d] + rho * (worst[d] - centroid[d]);
    }
    double f_con = fn(contracted);
    if (f_con < std::min(f_ref, fvals.back())) {
      simplex.back() = contracted;
      fvals.back() = f_con;
      continue;
    }
    // shrink toward the best vertex
    for (size_t i = 1; i < simplex.size(); ++i) {
      for (size_t d = 0; d < dim; ++d)
        simplex[i][d] = simplex[0][d] + sigma * (simplex[i][d] - simplex[0][d]);
      fvals[i] = fn(simplex[i]);
    }
  }
  order();
  return simplex[0];
}

LogisticParams fit_logistic(const std::vector<double>& pred, const std::vector<double>& mos) {
  if (pred.size() != mos.size())
    throw Error(ErrorCode::LengthMismatch, "pred and mos lengths differ");
  if (pred.size() < 5)
    throw Error(ErrorCode::TooFewSamples, "logistic fit needs >= 5 samples");
  double mos_sd = std_of(mos);
  if (mos_sd == 0.0) throw Error(ErrorCode::ConstantTarget, "mos values are all equal");

  double pred_mean = mean_of(pred);
  double pred_sd = std_of(pred);
  double mos_mean = mean_of(mos);
  double mos_min = *std::min_element(mos.begin(), mos.end());
  double mos_max = *std::max_element(mos.begin(), mos.end());

  // straight-line least squares; always a valid member of the family (b1 = 0)
  LogisticParams linear;
  {
    double slope = 0.0;
    if (pred_sd > 0.0) {
      double cov = 0.0;
      for (size_t i = 0; i < pred.size(); ++i)
        cov += (pred[i] - pred_mean) * (mos[i] - mos_mean);
      cov /= static_cast<double>(pred.size());
      slope = cov / (pred_sd * pred_sd);
    }
    linear.beta = {0.0, pred_sd > 0.0 ? 1.0 / pred_sd : 1.0, pred_mean, slope,
                   mos_mean - slope * pred_mean};
    linear.fit_residual = sse_of(linear, pred, mos);
  }

  LogisticParams fitted;
  fitted.beta = {mos_max - mos_min, pred_sd > 0.0 ? 1.0 / pred_sd : 1.0, pred_mean, 0.0, mos_mean};
  auto objective = [&](const std::vector<double>& b) {
    LogisticParams p;
    std::copy_n(b.begin(), 5, p.beta.begin());
    return sse_of(p, pred, mos);
  };
  std::vector<double> best = nelder_mead(
      objective, {fitted.beta.begin(), fitted.beta.end()}, /*max_iter=*/2000, /*rel_tol=*/1e-10);
  std::copy_n(best.begin(), 5, fitted.beta.begin());
  fitted.fit_residual = sse_of(fitted, pred, mos);

  // keep the nonlinear fit only when it beats the line on both criteria it
  // guarantees: residual and mapped-PLCC
  auto mapped_plcc = [&](const LogisticParams& p) {
    std::vector<double> mapped(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) mapped[i] = logistic5(p, pred[i]);
    bool constant = false;
    double r = pearson(mapped, mos, &constant);
    return constant ? 0.0 : r;
  };
  if (fitted.fit_residual <= linear.fit_residual &&
      mapped_plcc(fitted) >= mapped_plcc(linear) - 1e-12)
    return fitted;
  return linear;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  size_t n = values.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y, bool* constant) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::TooFewSamples, "pearson needs >= 2 paired samples");
  double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    if (constant) *constant = true;
    return 0.0;
  }
  if (constant) *constant = false;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y, bool* constant) {
  return pearson(average_ranks(x), average_ranks(y), constant);
}

namespace {

// counts strict inversions in y by merge sort
uint64_t count_inversions(std::vector<double>& y, std::vector<double>& scratch, size_t lo,
                          size_t hi) {
  if (hi - lo < 2) return 0;
  size_t mid = lo + (hi - lo) / 2;
  uint64_t count = count_inversions(y, scratch, lo, mid) + count_inversions(y, scratch, mid, hi);
  size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (y[b] < y[a]) {
      count += mid - a;  // every remaining left element exceeds y[b]
      scratch[out++] = y[b++];
    } else {
      scratch[out++] = y[a++];
    }
  }
  while (a < mid) scratch[out++] = y[a++];
  while (b < hi) scratch[out++] = y[b++];
  std::copy(scratch.begin() + static_cast<long>(lo), scratch.begin() + static_cast<long>(hi),
            y.begin() + static_cast<long>(lo));
  return count;
}

uint64_t tie_pairs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  uint64_t pairs = 0;
  size_t i = 0;
  while (i < v.size()) {
    size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    uint64_t t = j - i + 1;
    pairs += t * (t - 1) / 2;
    i = j + 1;
  }
  return pairs;
}

}  // namespace

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y, bool* constant) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::TooFewSamples, "kendall needs >= 2 paired samples");
  size_t n = x.size();

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    if (y[a] != y[b]) return y[a] < y[b];
    return a < b;
  });

  uint64_t n0 = static_cast<uint64_t>(n) * (n - 1) / 2;
  uint64_t n1 = tie_pairs(x);
  uint64_t n2 = tie_pairs(y);

  // joint ties
  uint64_t n3 = 0;
  {
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && x[idx[j + 1]] == x[idx[i]] && y[idx[j + 1]] == y[idx[i]]) ++j;
      uint64_t t = j - i + 1;
      n3 += t * (t - 1) / 2;
      i = j + 1;
    }
  }

  if (n1 == n0 || n2 == n0) {
    if (constant) *constant = true;
    return 0.0;
  }
  if (constant) *constant = false;

  std::vector<double> y_sorted(n);
  for (size_t i = 0; i < n; ++i) y_sorted[i] = y[idx[i]];
  std::vector<double> scratch(n);
  uint64_t discordant = count_inversions(y_sorted, scratch, 0, n);

  // pairs untied in both coordinates split into concordant and discordant
  uint64_t untied = n0 - n1 - n2 + n3;
  double cd = static_cast<double>(untied) - 2.0 * static_cast<double>(discordant);
  double denom = std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
  return cd / denom;
}

EvalReport evaluate_scores(const std::vector<double>& pred, const std::vector<double>& mos) {
  if (pred.size() != mos.size())
    throw Error(ErrorCode::LengthMismatch, "pred and mos lengths differ");
  if (pred.size() < 3) throw Error(ErrorCode::TooFewSamples, "evaluation needs >= 3 samples");

  EvalReport report;
  report.n = pred.size();

  bool pred_constant = std_of(pred) == 0.0;
  bool mos_constant = std_of(mos) == 0.0;
  if (pred_constant) report.flags.push_back("constant-pred");
  if (mos_constant) report.flags.push_back("constant-mos");

  // mapping: full logistic fit from n >= 5, straight line below that
  if (!mos_constant && !pred_constant && pred.size() >= 5) {
    report.logistic = fit_logistic(pred, mos);
  } else {
    double slope = 0.0, intercept = mean_of(mos);
    if (!pred_constant) {
      double pm = mean_of(pred), mm = mean_of(mos), cov = 0.0, var = 0.0;
      for (size_t i = 0; i < pred.size(); ++i) {
        cov += (pred[i] - pm) * (mos[i] - mm);
        var += (pred[i] - pm) * (pred[i] - pm);
      }
      slope = cov / var;
      intercept = mm - slope * pm;
    }
    report.logistic.beta = {0.0, 1.0, 0.0, slope, intercept};
    report.logistic.fit_residual = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
      double d = logistic5(report.logistic, pred[i]) - mos[i];
      report.logistic.fit_residual += d * d;
    }
    if (pred.size() < 5) report.flags.push_back("linear-mapping");
  }

  std::vector<double> mapped(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) mapped[i] = logistic5(report.logistic, pred[i]);

  bool flag = false;
  report.plcc = pearson(mapped, mos, &flag);
  if (flag && !pred_constant && !mos_constant) report.flags.push_back("constant-mapped");
  report.srcc = spearman(pred, mos, &flag);
  report.krcc = kendall_tau_b(pred, mos, &flag);

  double sse_mapped = 0.0, sse_raw = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    sse_mapped += (mapped[i] - mos[i]) * (mapped[i] - mos[i]);
    sse_raw += (pred[i] - mos[i]) * (pred[i] - mos[i]);
  }
  report.rmse = std::sqrt(sse_mapped / static_cast<double>(pred.size()));
  report.rmse_raw = std::sqrt(sse_raw / static_cast<double>(pred.size()));
  return report;
}

std::string EvalReport::to_json() const {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "{\"n\": " << n << ", \"plcc\": " << num(plcc) << ", \"srcc\": " << num(srcc)
      << ", \"krcc\": " << num(krcc) << ", \"rmse\": " << num(rmse)
      << ", \"rmse_raw\": " << num(rmse_raw) << ", \"beta\": [";
  for (size_t i = 0; i < 5; ++i) out << (i ? ", " : "") << num(logistic.beta[i]);
  out << "], \"flags\": [";
  for (size_t i = 0; i < flags.size(); ++i) out << (i ? ", " : "") << '"' << flags[i] << '"';
  out << "]}";
  return out.str();
}

std::string EvalReport::to_table() const {
  char buf[256];
  std::string out;
  out += "metric   value\n";
  std::snprintf(buf, sizeof(buf), "plcc   %9.4f\nsrcc   %9.4f\nkrcc   %9.4f\nrmse   %9.4f\nn      %9zu\n",
                plcc, srcc, krcc, rmse, n);
  out += buf;
  if (!flags.empty()) {
    out += "flags: ";
    for (size_t i = 0; i < flags.size(); ++i) {
      if (i) out += ", ";
      out += flags[i];
    }
    out += "\n";
  }
  return out;
}

}  // namespace pcqa
