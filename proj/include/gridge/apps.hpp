#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gridge/matcore.hpp"
#include "gridge/parallel.hpp"
#include "gridge/select.hpp"
#include "gridge/simgen.hpp"

namespace gridge {

// ---------------------------------------------------------------------------
// Linear discriminant analysis with a plug-in precision matrix.

enum class Group { G1, G2 };

struct LdaModel {
  Vector mu1;
  Vector mu2;
  SymMatrix theta;
  Vector a;   // theta (mu1 - mu2)
  Vector mu;  // (mu1 + mu2) / 2
};

inline LdaModel lda_fit(const Matrix& x1, const Matrix& x2, const SymMatrix& theta_hat) {
  require(x1.rows() >= 1 && x2.rows() >= 1, ErrorKind::InvalidInput,
          "lda_fit: each group needs at least one row");
  require(x1.cols() == theta_hat.dim() && x2.cols() == theta_hat.dim(), ErrorKind::InvalidInput,
          "lda_fit: column count does not match precision dimension");
  LdaModel m;
  m.mu1 = x1.colwise().mean().transpose();
  m.mu2 = x2.colwise().mean().transpose();
  m.theta = theta_hat;
  m.a = theta_hat.mat() * (m.mu1 - m.mu2);
  m.mu = 0.5 * (m.mu1 + m.mu2);
  return m;
}

inline double lda_discriminant(const LdaModel& m, const Vector& x) { return m.a.dot(x - m.mu); }

/// G1 iff a'(x - mu) > 0; a zero discriminant goes to G2.
inline Group lda_classify(const LdaModel& m, const Vector& x) {
  require(x.size() == m.a.size(), ErrorKind::InvalidInput, "lda_classify: dimension mismatch");
  return lda_discriminant(m, x) > 0.0 ? Group::G1 : Group::G2;
}

inline double misclassification_rate(const LdaModel& m, const Matrix& x,
                                     const std::vector<Group>& labels) {
  require(static_cast<std::size_t>(x.rows()) == labels.size(), ErrorKind::InvalidInput,
          "misclassification_rate: label count mismatch");
  if (labels.empty()) return 0.0;
  std::size_t wrong = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (lda_classify(m, x.row(i).transpose()) != labels[static_cast<std::size_t>(i)]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

/// Within-class pooled covariance: each group centered on its own mean,
/// divided by the total row count.
inline SymMatrix pooled_covariance(const Matrix& x1, const Matrix& x2) {
  Matrix stacked(x1.rows() + x2.rows(), x1.cols());
  stacked << center_columns(x1), center_columns(x2);
  return sample_cov(stacked);
}

struct LdaProtocol {
  Eigen::Index train_size = 40;
  Eigen::Index validation_size = 40;  // 0: use the fixed tuning below
  double lambda = 0.5;
  double alpha = 0.2;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<double> alpha_grid = {0.2};
};

struct LdaRepetition {
  double rate = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
};

namespace detail {

inline void split_groups(const Matrix& x, const std::vector<Group>& labels,
                         const std::vector<Eigen::Index>& rows, Matrix& g1, Matrix& g2) {
  std::vector<Eigen::Index> r1, r2;
  for (auto r : rows) (labels[static_cast<std::size_t>(r)] == Group::G1 ? r1 : r2).push_back(r);
  g1 = x(r1, Eigen::all);
  g2 = x(r2, Eigen::all);
}

inline std::vector<Group> pick(const std::vector<Group>& labels,
                               const std::vector<Eigen::Index>& rows) {
  std::vector<Group> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace detail

/// One random train / validation / test split per repetition. With a
/// validation set, the tuning with the lowest validation misclassification
/// is chosen (ties: larger lambda, then smaller alpha), then the model is
/// refit on the training rows and scored on the test rows.
inline std::vector<LdaRepetition> misclassification_experiment(
    const Matrix& data, const std::vector<Group>& labels, const EstimatorSpec& spec,
    const LdaProtocol& protocol, int repetitions, std::uint64_t seed, int threads = 1) {
  const auto n = data.rows();
  require(static_cast<std::size_t>(n) == labels.size(), ErrorKind::InvalidInput,
          "lda experiment: label count mismatch");
  require(repetitions >= 1, ErrorKind::InvalidInput, "lda experiment: repetitions >= 1");
  require(protocol.train_size + protocol.validation_size < n, ErrorKind::InvalidSplit,
          "lda experiment: no rows left for testing");
  const bool has_g1 = std::find(labels.begin(), labels.end(), Group::G1) != labels.end();
  const bool has_g2 = std::find(labels.begin(), labels.end(), Group::G2) != labels.end();
  require(has_g1 && has_g2, ErrorKind::InvalidInput, "lda experiment: two classes required");

  std::vector<LdaRepetition> out(static_cast<std::size_t>(repetitions));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix_seed(seed, r));
    std::shuffle(order.begin(), order.end(), rng);
    const auto train_end = order.begin() + protocol.train_size;
    const auto valid_end = train_end + protocol.validation_size;
    const std::vector<Eigen::Index> train(order.begin(), train_end);
    const std::vector<Eigen::Index> valid(train_end, valid_end);
    const std::vector<Eigen::Index> test(valid_end, order.end());

    Matrix g1, g2;
    detail::split_groups(data, labels, train, g1, g2);
    require(g1.rows() >= 2 && g2.rows() >= 2, ErrorKind::InvalidSplit,
            "lda experiment: a class has fewer than 2 training rows in repetition " +
                std::to_string(r));
    const SymMatrix s = pooled_covariance(g1, g2);

    double lambda = protocol.lambda, alpha = protocol.alpha;
    if (!valid.empty()) {
      const Matrix xv = data(valid, Eigen::all);
      const auto lv = detail::pick(labels, valid);
      double best = std::numeric_limits<double>::infinity();
      auto alphas = uses_alpha(spec.method) ? protocol.alpha_grid : std::vector<double>{0.0};
      for (double l : detail::sorted_unique(protocol.lambda_grid))
        for (double a : detail::sorted_unique(alphas)) {
          double rate;
          try {
            rate = misclassification_rate(lda_fit(g1, g2, fit_estimator(spec, s, l, a)), xv, lv);
          } catch (const Error&) {
            continue;
          }
          if (rate < best || (rate == best && (l > lambda || (l == lambda && a < alpha)))) {
            best = rate;
            lambda = l;
            alpha = a;
          }
        }
      require(std::isfinite(best), ErrorKind::SelectionFailure,
              "lda experiment: every tuning value failed on the validation set");
    }
    const LdaModel model = lda_fit(g1, g2, fit_estimator(spec, s, lambda, alpha));
    out[r] = {misclassification_rate(model, data(test, Eigen::all), detail::pick(labels, test)),
              lambda, alpha};
  });
  return out;
}

/// Indices of columns whose sample variance exceeds `tol`.
inline std::vector<Eigen::Index> nonconstant_columns(const Matrix& x, double tol = 1e-12) {
  std::vector<Eigen::Index> keep;
  const Matrix c = center_columns(x);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (c.col(j).squaredNorm() / static_cast<double>(x.rows()) > tol) keep.push_back(j);
  return keep;
}

// ---------------------------------------------------------------------------
// Financial networks.

using Date = std::chrono::sys_days;

inline Date parse_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
    fail(ErrorKind::InputError, "invalid ISO-8601 date '" + s + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  require(ymd.ok(), ErrorKind::InputError, "invalid calendar date '" + s + "'");
  return Date{ymd};
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

struct TimeSeries {
  std::vector<Date> dates;
  std::vector<std::string> names;
  Matrix values;  // rows = dates
};

/// r[t] = ln(p[t+1] / p[t]) per column.
inline Matrix log_returns(const Matrix& prices) {
  require(prices.rows() >= 2, ErrorKind::InvalidInput, "log_returns: need at least 2 rows");
  for (Eigen::Index i = 0; i < prices.rows(); ++i)
    for (Eigen::Index j = 0; j < prices.cols(); ++j)
      if (!(prices(i, j) > 0.0))
        throw Error(ErrorKind::InvalidInput, "log_returns: nonpositive price at row " +
                                                 std::to_string(i + 1) + ", column " +
                                                 std::to_string(j + 1));
  const Eigen::Index n = prices.rows() - 1;
  return (prices.bottomRows(n).array() / prices.topRows(n).array()).log().matrix();
}

/// Returns are dated by the later of the two prices.
inline TimeSeries log_returns(const TimeSeries& prices) {
  TimeSeries out;
  out.values = log_returns(prices.values);
  out.names = prices.names;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  return out;
}

struct Edge {
  Eigen::Index i = 0;
  Eigen::Index j = 0;  // i < j
  double weight = 0.0;
};

struct EdgeList {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
};

inline std::vector<std::string> default_labels(Eigen::Index p) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < p; ++i) out.push_back("V" + std::to_string(i + 1));
  return out;
}

/// rho_ij = -theta_ij / sqrt(theta_ii theta_jj); |rho| below `threshold` is pruned.
inline EdgeList partial_correlations(const SymMatrix& theta_hat,
                                     std::vector<std::string> labels = {},
                                     double threshold = 1e-4) {
  require(is_positive_definite(theta_hat, 0.0), ErrorKind::NotPositiveDefinite,
          "partial_correlations: precision is not positive definite");
  const Eigen::Index p = theta_hat.dim();
  if (labels.empty()) labels = default_labels(p);
  require(static_cast<Eigen::Index>(labels.size()) == p, ErrorKind::InvalidInput,
          "partial_correlations: label count mismatch");
  EdgeList out;
  out.nodes = std::move(labels);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const double rho = -theta_hat(i, j) / std::sqrt(theta_hat(i, i) * theta_hat(j, j));
      if (std::abs(rho) >= threshold) out.edges.push_back({i, j, rho});
    }
  return out;
}

/// Sum of incident edge weights per node (absolute values unless `signed_weights`).
inline Vector node_strength(const EdgeList& g, bool signed_weights = false) {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(g.nodes.size()));
  for (const auto& e : g.edges) {
    const double w = signed_weights ? e.weight : std::abs(e.weight);
    s(e.i) += w;
    s(e.j) += w;
  }
  return s;
}

struct RollingConfig {
  int window_days = 365;
  int shift_days = 30;
  bool signed_strength = false;
  double prune_threshold = 1e-4;
};

struct WindowResult {
  Date start;
  Eigen::Index rows = 0;
  double mean_strength = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";  // otherwise the reason the window was skipped
  double lambda = 0.0;
  double alpha = 0.0;
  EdgeList edges;

  bool ok() const { return status == "ok"; }
};

struct StrengthSeries {
  std::vector<WindowResult> windows;
};

/// CV-tuned network on centered data, with the reason recorded when the
/// data cannot support an estimate.
inline WindowResult fit_network(const Matrix& returns, const std::vector<std::string>& names,
                                const EstimatorSpec& spec, const CvConfig& cv,
                                const RollingConfig& cfg = {}) {
  WindowResult w;
  w.rows = returns.rows();
  if (returns.rows() < returns.cols() + 1) {
    w.status = "insufficient rows (" + std::to_string(returns.rows()) + " < p + 1)";
    return w;
  }
  if (static_cast<Eigen::Index>(nonconstant_columns(returns).size()) != returns.cols()) {
    w.status = "zero-variance column (singular S)";
    return w;
  }
  try {
    const Matrix x = center_columns(returns);
    const CvResult sel = grid_search(x, spec, cv);
    const SymMatrix theta = refit(x, spec, sel);
    w.lambda = sel.best_lambda;
    w.alpha = sel.best_alpha;
    w.edges = partial_correlations(theta, names, cfg.prune_threshold);
    w.mean_strength = node_strength(w.edges, cfg.signed_strength).mean();
  } catch (const Error& e) {
    w.status = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return w;
}

/// Windows [first + k shift, first + k shift + window) for
/// k = 0 .. floor((span - window) / shift), span = last - first + 1 days.
inline StrengthSeries rolling_strength(const TimeSeries& returns, const EstimatorSpec& spec,
                                       const CvConfig& cv, const RollingConfig& cfg = {},
                                       int threads = 1) {
  require(cfg.window_days >= 1 && cfg.shift_days >= 1, ErrorKind::InvalidInput,
          "rolling_strength: window and shift must be positive");
  require(!returns.dates.empty() &&
              returns.dates.size() == static_cast<std::size_t>(returns.values.rows()),
          ErrorKind::InvalidInput, "rolling_strength: dates do not match rows");
  const Date first = returns.dates.front();
  const auto span = (returns.dates.back() - first).count() + 1;
  require(span >= cfg.window_days, ErrorKind::SpanError,
          "rolling_strength: series spans " + std::to_string(span) + " days, window is " +
              std::to_string(cfg.window_days));
  const auto count = static_cast<std::size_t>((span - cfg.window_days) / cfg.shift_days + 1);

  StrengthSeries out;
  out.windows.resize(count);
  parallel_for(count, threads, [&](std::size_t k) {
    const Date start = first + std::chrono::days(static_cast<int>(k) * cfg.shift_days);
    const Date end = start + std::chrono::days(cfg.window_days);
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < returns.dates.size(); ++i)
      if (returns.dates[i] >= start && returns.dates[i] < end)
        rows.push_back(static_cast<Eigen::Index>(i));
    WindowResult w = fit_network(returns.values(rows, Eigen::all), returns.names, spec, cv, cfg);
    w.start = start;
    out.windows[k] = std::move(w);
  });
  return out;
}

}  // namespace gridge
