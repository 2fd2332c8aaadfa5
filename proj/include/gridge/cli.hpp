#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridge/apps.hpp"
#include "gridge/dualcheck.hpp"
#include "gridge/estimators.hpp"
#include "gridge/io.hpp"
#include "gridge/metrics.hpp"
#include "gridge/select.hpp"
#include "gridge/simgen.hpp"

namespace gridge::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Run configuration

struct CvSection {
  int folds = 5;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<double> alpha_grid = default_alpha_grid();
  bool operator==(const CvSection&) const = default;
};

struct SimulateConfig {
  std::vector<std::string> networks = {"compound_symmetry"};
  std::vector<int> p = {20};
  int n = 50;
  int replications = 20;
  std::vector<std::string> methods = {"glasso", "alt_ridge_I", "two_step"};
  std::vector<std::string> targets = {"identity", "nu"};
  CvSection cv{};
  bool operator==(const SimulateConfig&) const = default;
};

struct EstimateConfig {
  std::string input;
  std::string input_kind = "data";  // data | covariance
  std::string method = "two_step";
  std::string target = "identity";
  double lambda = 1.0;
  double alpha = 0.2;
  bool tune = false;
  CvSection cv{};
  double prune_threshold = 1e-4;
  bool operator==(const EstimateConfig&) const = default;
};

struct CvCommandConfig {
  std::string input;
  std::string method = "two_step";
  std::string target = "identity";
  CvSection cv{};
  bool operator==(const CvCommandConfig&) const = default;
};

struct LdaConfig {
  std::string input;
  std::string label_column;  // empty: last column
  std::string positive_label = "g";
  std::string mode = "cv";  // cv | sweep
  std::vector<std::string> methods = {"alt_ridge_I", "two_step"};
  std::string target = "nu";
  int repetitions = 100;
  int train_size = 40;
  int validation_size = 40;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<double> alpha_grid = {0.2};
  double sweep_alpha = 0.2;
  int sweep_points = 50;
  double sweep_min = 0.1;
  double sweep_max = 0.9;
  bool drop_constant_columns = true;
  bool operator==(const LdaConfig&) const = default;
};

struct NetworkConfig {
  std::string input;
  std::string method = "two_step";
  std::string target = "identity";
  int window_days = 365;
  int shift_days = 30;
  bool signed_strength = false;
  bool per_year = true;
  double prune_threshold = 1e-4;
  CvSection cv{};
  bool operator==(const NetworkConfig&) const = default;
};

struct DualcheckConfig {
  int p = 3;
  int iterations = 15;
  int n = 50;
  double lambda = 0.6;
  double alpha = 0.4;
  int restarts = 8;
  bool operator==(const DualcheckConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 42;
  int threads = 1;
  SimulateConfig simulate{};
  EstimateConfig estimate{};
  CvCommandConfig cv{};
  LdaConfig lda{};
  NetworkConfig network{};
  DualcheckConfig dualcheck{};
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
  require(j.is_object(), ErrorKind::InvalidInput, where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const char* k) { return item.key() == k; });
    require(known, ErrorKind::InvalidInput, where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline json to_json(const CvSection& c) {
  return {{"folds", c.folds}, {"lambda_grid", c.lambda_grid}, {"alpha_grid", c.alpha_grid}};
}

inline CvSection cv_from_json(const json& j, const std::string& where) {
  detail::reject_unknown(j, {"folds", "lambda_grid", "alpha_grid"}, where);
  CvSection c;
  detail::read(j, "folds", c.folds, where);
  detail::read(j, "lambda_grid", c.lambda_grid, where);
  detail::read(j, "alpha_grid", c.alpha_grid, where);
  return c;
}

inline json to_json(const RunConfig& r) {
  const auto& s = r.simulate;
  const auto& e = r.estimate;
  const auto& c = r.cv;
  const auto& l = r.lda;
  const auto& n = r.network;
  const auto& d = r.dualcheck;
  return {
      {"seed", r.seed},
      {"threads", r.threads},
      {"simulate",
       {{"networks", s.networks}, {"p", s.p}, {"n", s.n}, {"replications", s.replications},
        {"methods", s.methods}, {"targets", s.targets}, {"cv", to_json(s.cv)}}},
      {"estimate",
       {{"input", e.input}, {"input_kind", e.input_kind}, {"method", e.method},
        {"target", e.target}, {"lambda", e.lambda}, {"alpha", e.alpha}, {"tune", e.tune},
        {"cv", to_json(e.cv)}, {"prune_threshold", e.prune_threshold}}},
      {"cv",
       {{"input", c.input}, {"method", c.method}, {"target", c.target}, {"cv", to_json(c.cv)}}},
      {"lda",
       {{"input", l.input}, {"label_column", l.label_column},
        {"positive_label", l.positive_label}, {"mode", l.mode}, {"methods", l.methods},
        {"target", l.target}, {"repetitions", l.repetitions}, {"train_size", l.train_size},
        {"validation_size", l.validation_size}, {"lambda_grid", l.lambda_grid},
        {"alpha_grid", l.alpha_grid}, {"sweep_alpha", l.sweep_alpha},
        {"sweep_points", l.sweep_points}, {"sweep_min", l.sweep_min},
        {"sweep_max", l.sweep_max}, {"drop_constant_columns", l.drop_constant_columns}}},
      {"network",
       {{"input", n.input}, {"method", n.method}, {"target", n.target},
        {"window_days", n.window_days}, {"shift_days", n.shift_days},
        {"signed_strength", n.signed_strength}, {"per_year", n.per_year},
        {"prune_threshold", n.prune_threshold}, {"cv", to_json(n.cv)}}},
      {"dualcheck",
       {{"p", d.p}, {"iterations", d.iterations}, {"n", d.n}, {"lambda", d.lambda},
        {"alpha", d.alpha}, {"restarts", d.restarts}}},
  };
}

inline RunConfig config_from_json(const json& j) {
  using detail::read;
  detail::reject_unknown(
      j, {"seed", "threads", "simulate", "estimate", "cv", "lda", "network", "dualcheck"},
      "config");
  RunConfig r;
  read(j, "seed", r.seed, "config");
  read(j, "threads", r.threads, "config");
  if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    const std::string w = "simulate";
    detail::reject_unknown(s, {"networks", "p", "n", "replications", "methods", "targets", "cv"},
                           w);
    auto& o = r.simulate;
    read(s, "networks", o.networks, w);
    read(s, "p", o.p, w);
    read(s, "n", o.n, w);
    read(s, "replications", o.replications, w);
    read(s, "methods", o.methods, w);
    read(s, "targets", o.targets, w);
    if (s.contains("cv")) o.cv = cv_from_json(s.at("cv"), w + ".cv");
  }
  if (j.contains("estimate")) {
    const auto& s = j.at("estimate");
    const std::string w = "estimate";
    detail::reject_unknown(s,
                           {"input", "input_kind", "method", "target", "lambda", "alpha", "tune",
                            "cv", "prune_threshold"},
                           w);
    auto& o = r.estimate;
    read(s, "input", o.input, w);
    read(s, "input_kind", o.input_kind, w);
    read(s, "method", o.method, w);
    read(s, "target", o.target, w);
    read(s, "lambda", o.lambda, w);
    read(s, "alpha", o.alpha, w);
    read(s, "tune", o.tune, w);
    read(s, "prune_threshold", o.prune_threshold, w);
    if (s.contains("cv")) o.cv = cv_from_json(s.at("cv"), w + ".cv");
  }
  if (j.contains("cv")) {
    const auto& s = j.at("cv");
    const std::string w = "cv";
    detail::reject_unknown(s, {"input", "method", "target", "cv"}, w);
    auto& o = r.cv;
    read(s, "input", o.input, w);
    read(s, "method", o.method, w);
    read(s, "target", o.target, w);
    if (s.contains("cv")) o.cv = cv_from_json(s.at("cv"), w + ".cv");
  }
  if (j.contains("lda")) {
    const auto& s = j.at("lda");
    const std::string w = "lda";
    detail::reject_unknown(
        s,
        {"input", "label_column", "positive_label", "mode", "methods", "target", "repetitions",
         "train_size", "validation_size", "lambda_grid", "alpha_grid", "sweep_alpha",
         "sweep_points", "sweep_min", "sweep_max", "drop_constant_columns"},
        w);
    auto& o = r.lda;
    read(s, "input", o.input, w);
    read(s, "label_column", o.label_column, w);
    read(s, "positive_label", o.positive_label, w);
    read(s, "mode", o.mode, w);
    read(s, "methods", o.methods, w);
    read(s, "target", o.target, w);
    read(s, "repetitions", o.repetitions, w);
    read(s, "train_size", o.train_size, w);
    read(s, "validation_size", o.validation_size, w);
    read(s, "lambda_grid", o.lambda_grid, w);
    read(s, "alpha_grid", o.alpha_grid, w);
    read(s, "sweep_alpha", o.sweep_alpha, w);
    read(s, "sweep_points", o.sweep_points, w);
    read(s, "sweep_min", o.sweep_min, w);
    read(s, "sweep_max", o.sweep_max, w);
    read(s, "drop_constant_columns", o.drop_constant_columns, w);
  }
  if (j.contains("network")) {
    const auto& s = j.at("network");
    const std::string w = "network";
    detail::reject_unknown(s,
                           {"input", "method", "target", "window_days", "shift_days",
                            "signed_strength", "per_year", "prune_threshold", "cv"},
                           w);
    auto& o = r.network;
    read(s, "input", o.input, w);
    read(s, "method", o.method, w);
    read(s, "target", o.target, w);
    read(s, "window_days", o.window_days, w);
    read(s, "shift_days", o.shift_days, w);
    read(s, "signed_strength", o.signed_strength, w);
    read(s, "per_year", o.per_year, w);
    read(s, "prune_threshold", o.prune_threshold, w);
    if (s.contains("cv")) o.cv = cv_from_json(s.at("cv"), w + ".cv");
  }
  if (j.contains("dualcheck")) {
    const auto& s = j.at("dualcheck");
    const std::string w = "dualcheck";
    detail::reject_unknown(s, {"p", "iterations", "n", "lambda", "alpha", "restarts"}, w);
    auto& o = r.dualcheck;
    read(s, "p", o.p, w);
    read(s, "iterations", o.iterations, w);
    read(s, "n", o.n, w);
    read(s, "lambda", o.lambda, w);
    read(s, "alpha", o.alpha, w);
    read(s, "restarts", o.restarts, w);
  }
  require(r.threads >= 1, ErrorKind::InvalidInput, "config: threads must be >= 1");
  return r;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InputError, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, "config: " + std::string(e.what()));
  }
  return config_from_json(j);
}

/// "zero", "identity", "nu", "gamma=<v>" or "file:<matrix.csv>".
inline TargetSpec parse_target(const std::string& s) {
  if (s == "zero") return ZeroTarget{};
  if (s == "identity") return IdentityTarget{};
  if (s == "nu") return ScalarNuTarget{};
  if (s.rfind("gamma=", 0) == 0) {
    double g;
    require(io::parse_double(s.substr(6), g), ErrorKind::InvalidInput,
            "invalid gamma target '" + s + "'");
    return ScalarGammaTarget{g};
  }
  if (s.rfind("file:", 0) == 0) return CustomTarget{io::read_matrix_csv(s.substr(5))};
  fail(ErrorKind::InvalidInput, "unknown target '" + s + "'");
}

inline CvConfig make_cv(const CvSection& c, std::uint64_t seed) {
  CvConfig cfg;
  cfg.folds = c.folds;
  cfg.lambda_grid = c.lambda_grid;
  cfg.alpha_grid = c.alpha_grid;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// simulate

/// Loss study: per (network, p) one ground truth, per replication one sample
/// shared by every (method, target) pair. Writes losses.csv with one detail
/// row per replication and one aggregate row (replication = "mean", *_sd
/// filled) per combination.
inline void cmd_simulate(const RunConfig& rc, const fs::path& out_dir) {
  const auto& cfg = rc.simulate;
  require(cfg.replications >= 1, ErrorKind::InvalidInput, "simulate: replications >= 1");
  require(cfg.n >= 2, ErrorKind::InvalidInput, "simulate: n >= 2");

  struct Combo {
    std::size_t truth;
    Method method;
    std::string method_name;
    std::string target_name;
  };
  struct TruthSlot {
    std::string network;
    int p;
    NetworkSpec spec;
  };
  std::vector<TruthSlot> truths;
  for (std::size_t a = 0; a < cfg.networks.size(); ++a)
    for (int p : cfg.p) {
      NetworkSpec spec{parse_network(cfg.networks[a]), p,
                       mix_seed(mix_seed(rc.seed, 0x5EED), truths.size())};
      truths.push_back({network_name(spec.model), p, spec});
    }
  std::vector<Combo> combos;
  for (std::size_t t = 0; t < truths.size(); ++t)
    for (const auto& m : cfg.methods)
      for (const auto& tg : cfg.targets) {
        parse_target(tg);
        combos.push_back({t, parse_method(m), m, tg});
      }

  std::vector<GroundTruth> generated(truths.size());
  std::vector<std::string> truth_error(truths.size());
  parallel_for(truths.size(), rc.threads, [&](std::size_t t) {
    try {
      generated[t] = make_network(truths[t].spec);
    } catch (const Error& e) {
      truth_error[t] = std::string(to_string(e.kind())) + ": " + e.what();
    }
  });

  struct Row {
    LossReport loss;
    double lambda = 0.0, alpha = 0.0;
    std::string error;
  };
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<Row> rows(combos.size() * reps);
  parallel_for(rows.size(), rc.threads, [&](std::size_t k) {
    const Combo& c = combos[k / reps];
    const std::size_t r = k % reps;
    Row& row = rows[k];
    if (!truth_error[c.truth].empty()) {
      row.error = truth_error[c.truth];
      return;
    }
    try {
      const GroundTruth& truth = generated[c.truth];
      const std::uint64_t data_seed = mix_seed(rc.seed, r);
      const Matrix x = sample_mvn(truth, cfg.n, mix_seed(data_seed, c.truth));
      EstimatorSpec spec{c.method, parse_target(c.target_name), {}};
      const CvResult sel = grid_search(x, spec, make_cv(cfg.cv, mix_seed(data_seed, 0xF01D)));
      const SymMatrix theta_hat = refit(x, spec, sel);
      row.lambda = sel.best_lambda;
      row.alpha = sel.best_alpha;
      row.loss = evaluate_losses(truth.sigma, truth.theta, theta_hat);
    } catch (const Error& e) {
      row.error = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  auto out = io::open_out(out_dir / "losses.csv");
  out << "method,target,network,p,replication,kl,l2,ql,sp,kl_sd,l2_sd,ql_sd,sp_sd,lambda,alpha,"
         "error\n";
  const auto prefix = [&](const Combo& c) {
    return c.method_name + "," + c.target_name + "," + truths[c.truth].network + "," +
           std::to_string(truths[c.truth].p) + ",";
  };
  for (std::size_t ci = 0; ci < combos.size(); ++ci)
    for (std::size_t r = 0; r < reps; ++r) {
      const Row& row = rows[ci * reps + r];
      out << prefix(combos[ci]) << r << ",";
      if (row.error.empty())
        out << io::fmt(row.loss.kl) << "," << io::fmt(row.loss.l2) << "," << io::fmt(row.loss.ql)
            << "," << io::fmt(row.loss.sp) << ",,,,," << io::fmt(row.lambda) << ","
            << io::fmt(row.alpha) << ",\n";
      else
        out << ",,,,,,,,,," << io::quote(row.error) << "\n";
    }
  for (std::size_t ci = 0; ci < combos.size(); ++ci) {
    std::vector<std::array<double, 4>> vals;
    for (std::size_t r = 0; r < reps; ++r) {
      const Row& row = rows[ci * reps + r];
      if (row.error.empty()) vals.push_back({row.loss.kl, row.loss.l2, row.loss.ql, row.loss.sp});
    }
    out << prefix(combos[ci]) << "mean,";
    if (vals.empty()) {
      out << ",,,,,,,,,,no successful replications\n";
      continue;
    }
    std::array<double, 4> mean{}, sd{};
    for (const auto& v : vals)
      for (int q = 0; q < 4; ++q) mean[q] += v[q] / static_cast<double>(vals.size());
    if (vals.size() > 1)
      for (int q = 0; q < 4; ++q) {
        double ss = 0.0;
        for (const auto& v : vals) ss += (v[q] - mean[q]) * (v[q] - mean[q]);
        sd[q] = std::sqrt(ss / static_cast<double>(vals.size() - 1));
      }
    for (int q = 0; q < 4; ++q) out << io::fmt(mean[q]) << ",";
    for (int q = 0; q < 4; ++q) out << io::fmt(sd[q]) << ",";
    out << ",," << (vals.size() == reps ? "" : std::to_string(reps - vals.size()) + " failed")
        << "\n";
  }
}

// ---------------------------------------------------------------------------
// estimate / cv

inline void cmd_estimate(const RunConfig& rc, const fs::path& out_dir) {
  const auto& cfg = rc.estimate;
  require(!cfg.input.empty(), ErrorKind::InvalidInput, "estimate: input path is required");
  EstimatorSpec spec{parse_method(cfg.method), parse_target(cfg.target), {}};
  std::vector<std::string> names;
  SymMatrix theta;
  double lambda = cfg.lambda, alpha = cfg.alpha;
  if (cfg.input_kind == "covariance") {
    require(!cfg.tune, ErrorKind::InvalidInput, "estimate: tuning needs raw data, not a covariance");
    const SymMatrix s = io::read_matrix_csv(cfg.input);
    names = default_labels(s.dim());
    theta = fit_estimator(spec, s, lambda, alpha);
  } else {
    require(cfg.input_kind == "data", ErrorKind::InvalidInput,
            "estimate: input_kind must be 'data' or 'covariance'");
    const Matrix x = center_columns(io::read_data_csv(cfg.input, &names));
    if (cfg.tune) {
      const CvResult sel = grid_search(x, spec, make_cv(cfg.cv, rc.seed), rc.threads);
      lambda = sel.best_lambda;
      alpha = sel.best_alpha;
      theta = refit(x, spec, sel);
    } else {
      theta = fit_estimator(spec, sample_cov(x), lambda, alpha);
    }
  }
  io::write_matrix_csv(out_dir / "theta.csv", theta.mat(), names);
  io::write_edges_csv(out_dir / "edges.csv", partial_correlations(theta, names, cfg.prune_threshold));
  auto meta = io::open_out(out_dir / "estimate.json");
  meta << json{{"method", cfg.method}, {"target", cfg.target}, {"lambda", lambda},
               {"alpha", alpha}, {"p", theta.dim()}}
              .dump(2)
       << "\n";
}

inline void cmd_cv(const RunConfig& rc, const fs::path& out_dir) {
  const auto& cfg = rc.cv;
  require(!cfg.input.empty(), ErrorKind::InvalidInput, "cv: input path is required");
  EstimatorSpec spec{parse_method(cfg.method), parse_target(cfg.target), {}};
  const Matrix x = center_columns(io::read_data_csv(cfg.input));
  const CvResult sel = grid_search(x, spec, make_cv(cfg.cv, rc.seed), rc.threads);
  auto out = io::open_out(out_dir / "score_surface.csv");
  out << "lambda,alpha,mean_score,sd_score,error\n";
  for (const auto& pt : sel.score_surface)
    out << io::fmt(pt.lambda) << "," << io::fmt(pt.alpha) << "," << io::fmt(pt.mean_score) << ","
        << io::fmt(pt.sd_score) << "," << io::quote(pt.error) << "\n";
  auto meta = io::open_out(out_dir / "cv.json");
  meta << json{{"method", cfg.method}, {"target", cfg.target}, {"best_lambda", sel.best_lambda},
               {"best_alpha", sel.best_alpha}}
              .dump(2)
       << "\n";
}

// ---------------------------------------------------------------------------
// lda

struct LabeledData {
  Matrix x;
  std::vector<Group> labels;
};

inline LabeledData read_labeled_csv(const LdaConfig& cfg) {
  const io::CsvTable t = io::read_csv(cfg.input, true);
  require(!t.rows.empty(), ErrorKind::InputError, cfg.input + ": no data rows");
  const std::size_t w = io::width(t);
  std::size_t label_col = w - 1;
  if (!cfg.label_column.empty()) {
    const auto it = std::find(t.header.begin(), t.header.end(), cfg.label_column);
    require(it != t.header.end(), ErrorKind::InputError,
            cfg.input + ": no column named '" + cfg.label_column + "'");
    label_col = static_cast<std::size_t>(it - t.header.begin());
  }
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < w; ++c)
    if (c != label_col) cols.push_back(c);
  LabeledData d;
  d.x = io::numeric_columns(t, cols, cfg.input);
  for (const auto& row : t.rows)
    d.labels.push_back(row[label_col] == cfg.positive_label ? Group::G1 : Group::G2);
  if (cfg.drop_constant_columns) {
    const auto keep = nonconstant_columns(d.x);
    d.x = Matrix(d.x(Eigen::all, keep));
  }
  return d;
}

inline void cmd_lda(const RunConfig& rc, const fs::path& out_dir) {
  const auto& cfg = rc.lda;
  require(!cfg.input.empty(), ErrorKind::InvalidInput, "lda: input path is required");
  const LabeledData data = read_labeled_csv(cfg);
  const TargetSpec target = parse_target(cfg.target);

  if (cfg.mode == "cv") {
    auto out = io::open_out(out_dir / "misclassification.csv");
    out << "method,repetition,rate,lambda,alpha\n";
    for (const auto& m : cfg.methods) {
      LdaProtocol protocol;
      protocol.train_size = cfg.train_size;
      protocol.validation_size = cfg.validation_size;
      protocol.lambda_grid = cfg.lambda_grid;
      protocol.alpha_grid = cfg.alpha_grid;
      const auto reps = misclassification_experiment(data.x, data.labels,
                                                     {parse_method(m), target, {}}, protocol,
                                                     cfg.repetitions, rc.seed, rc.threads);
      for (std::size_t r = 0; r < reps.size(); ++r)
        out << m << "," << r << "," << io::fmt(reps[r].rate) << "," << io::fmt(reps[r].lambda)
            << "," << io::fmt(reps[r].alpha) << "\n";
    }
    return;
  }
  require(cfg.mode == "sweep", ErrorKind::InvalidInput, "lda: mode must be 'cv' or 'sweep'");
  require(cfg.sweep_points >= 2, ErrorKind::InvalidInput, "lda: sweep_points >= 2");
  auto out = io::open_out(out_dir / "misclassification_sweep.csv");
  out << "method,rho,mean_rate,se_rate\n";
  for (const auto& m : cfg.methods) {
    for (int k = 0; k < cfg.sweep_points; ++k) {
      const double rho =
          cfg.sweep_min + (cfg.sweep_max - cfg.sweep_min) * k / (cfg.sweep_points - 1);
      LdaProtocol protocol;
      protocol.train_size = cfg.train_size;
      protocol.validation_size = 0;
      protocol.lambda = rho;
      protocol.alpha = cfg.sweep_alpha;
      const auto reps = misclassification_experiment(data.x, data.labels,
                                                     {parse_method(m), target, {}}, protocol,
                                                     cfg.repetitions, rc.seed, rc.threads);
      double mean = 0.0;
      for (const auto& r : reps) mean += r.rate / static_cast<double>(reps.size());
      double ss = 0.0;
      for (const auto& r : reps) ss += (r.rate - mean) * (r.rate - mean);
      const double se =
          reps.size() > 1 ? std::sqrt(ss / static_cast<double>(reps.size() - 1) / reps.size())
                          : 0.0;
      out << m << "," << io::fmt(rho) << "," << io::fmt(mean) << "," << io::fmt(se) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// network

inline void cmd_network(const RunConfig& rc, const fs::path& out_dir) {
  const auto& cfg = rc.network;
  require(!cfg.input.empty(), ErrorKind::InvalidInput, "network: input path is required");
  const TimeSeries returns = log_returns(io::read_price_csv(cfg.input));
  EstimatorSpec spec{parse_method(cfg.method), parse_target(cfg.target), {}};
  const CvConfig cv = make_cv(cfg.cv, rc.seed);
  RollingConfig roll;
  roll.window_days = cfg.window_days;
  roll.shift_days = cfg.shift_days;
  roll.signed_strength = cfg.signed_strength;
  roll.prune_threshold = cfg.prune_threshold;

  const StrengthSeries series = rolling_strength(returns, spec, cv, roll, rc.threads);
  auto out = io::open_out(out_dir / "strength.csv");
  out << "window_start,mean_strength,status,rows,lambda,alpha\n";
  for (std::size_t k = 0; k < series.windows.size(); ++k) {
    const auto& w = series.windows[k];
    out << format_date(w.start) << "," << io::fmt(w.mean_strength) << "," << io::quote(w.status)
        << "," << w.rows << "," << io::fmt(w.lambda) << "," << io::fmt(w.alpha) << "\n";
    if (w.ok()) {
      char name[64];
      std::snprintf(name, sizeof name, "window_%03zu.csv", k);
      io::write_edges_csv(out_dir / "edges" / name, w.edges);
    }
  }

  // Per calendar year and full-sample networks.
  std::map<int, std::vector<Eigen::Index>> by_year;
  for (std::size_t i = 0; i < returns.dates.size(); ++i)
    by_year[static_cast<int>(std::chrono::year_month_day{returns.dates[i]}.year())].push_back(
        static_cast<Eigen::Index>(i));
  std::vector<std::pair<std::string, std::vector<Eigen::Index>>> groups;
  if (cfg.per_year)
    for (const auto& [year, rows] : by_year) groups.emplace_back(std::to_string(year), rows);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(returns.values.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  groups.emplace_back("full", all);

  std::vector<WindowResult> fits(groups.size());
  parallel_for(groups.size(), rc.threads, [&](std::size_t g) {
    fits[g] = fit_network(returns.values(groups[g].second, Eigen::all), returns.names, spec, cv,
                          roll);
  });
  auto summary = io::open_out(out_dir / "networks.csv");
  summary << "period,rows,mean_strength,status,lambda,alpha\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& w = fits[g];
    summary << groups[g].first << "," << w.rows << "," << io::fmt(w.mean_strength) << ","
            << io::quote(w.status) << "," << io::fmt(w.lambda) << "," << io::fmt(w.alpha) << "\n";
    if (w.ok()) io::write_edges_csv(out_dir / ("edges_" + groups[g].first + ".csv"), w.edges);
  }
}

// ---------------------------------------------------------------------------
// dualcheck

struct DualcheckRow {
  Matrix u_diff;
  double theta_diff = 0.0;
};

/// Per iteration: sample S from the p-dimensional compound-symmetry model,
/// solve the dual numerically and compare with the glasso dual variable and
/// the two-step closed form.
inline std::vector<DualcheckRow> run_dualcheck(const DualcheckConfig& cfg, std::uint64_t seed,
                                               int threads) {
  require(cfg.p == 2 || cfg.p == 3, ErrorKind::UnsupportedDimension,
          "dualcheck: p must be 2 or 3, got " + std::to_string(cfg.p));
  require(cfg.iterations >= 1 && cfg.n >= 2, ErrorKind::InvalidInput,
          "dualcheck: iterations >= 1 and n >= 2 required");
  const GroundTruth truth = make_network({NetworkModel::CompoundSymmetry, cfg.p, 0});
  std::vector<DualcheckRow> rows(static_cast<std::size_t>(cfg.iterations));
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const std::uint64_t it_seed = mix_seed(seed, k);
    const SymMatrix s = sample_cov(sample_mvn(truth, cfg.n, it_seed));
    const DualProblem prob{s, SymMatrix::identity(cfg.p), {cfg.lambda, cfg.alpha}};
    DualSolverConfig solver;
    solver.restarts = cfg.restarts;
    solver.seed = mix_seed(it_seed, 1);
    const DualComparison cmp = compare_dual_detailed(prob, solver);
    rows[k] = {cmp.u_abs_diff, cmp.theta_max_diff};
  });
  return rows;
}

inline void cmd_dualcheck(const RunConfig& rc, const fs::path& out_dir) {
  const auto& cfg = rc.dualcheck;
  const auto rows = run_dualcheck(cfg, rc.seed, rc.threads);
  auto out = io::open_out(out_dir / "dualcheck.csv");
  out << "iteration";
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < cfg.p; ++i)
    for (int j = i + 1; j < cfg.p; ++j) pairs.emplace_back(i, j);
  for (const auto& [i, j] : pairs) out << ",u" << i + 1 << j + 1 << "_diff";
  out << ",theta_diff\n";
  char buf[32];
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out << k + 1;
    for (const auto& [i, j] : pairs) {
      std::snprintf(buf, sizeof buf, "%.6e", rows[k].u_diff(i, j));
      out << "," << buf;
    }
    std::snprintf(buf, sizeof buf, "%.6e", rows[k].theta_diff);
    out << "," << buf << "\n";
  }
}

inline void run_command(const std::string& name, const RunConfig& rc, const fs::path& out_dir) {
  if (name == "simulate") return cmd_simulate(rc, out_dir);
  if (name == "estimate") return cmd_estimate(rc, out_dir);
  if (name == "cv") return cmd_cv(rc, out_dir);
  if (name == "lda") return cmd_lda(rc, out_dir);
  if (name == "network") return cmd_network(rc, out_dir);
  if (name == "dualcheck") return cmd_dualcheck(rc, out_dir);
  fail(ErrorKind::InvalidInput, "unknown command '" + name + "'");
}

inline std::string error_json(const std::string& kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}}.dump();
}

}  // namespace gridge::cli
