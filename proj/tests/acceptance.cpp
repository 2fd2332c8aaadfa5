// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gridge/cli.hpp"
#include "test_util.hpp"

using namespace gridge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int failures = 0;

void run(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    out.pass = false;
    out.detail += "; runtime " + num(secs) + " s exceeds " + num(budget_s) + " s";
  }
  if (!out.pass) ++failures;
  std::printf("%s criterion %d: %s (%s; %.1f s)\n", out.pass ? "PASS" : "FAIL", id, title.c_str(),
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

struct Instance {
  SymMatrix s;
  double lambda;
};

// 100 random SPD sample covariances, p in {5, 20}, lambda in {0.1, 1, 10}.
std::vector<Instance> ridge_instances() {
  std::vector<Instance> out;
  const double lambdas[] = {0.1, 1.0, 10.0};
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index p = (k % 2 == 0) ? 5 : 20;
    const auto seed = static_cast<std::uint64_t>(1000 + k);
    out.push_back({gridge::testing::random_cov(p, 3 * p, seed), lambdas[(k / 2) % 3]});
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gridge_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Mean KL per method from the aggregate rows of losses.csv.
std::map<std::string, double> mean_kl(const fs::path& losses) {
  std::map<std::string, double> out;
  std::ifstream in(losses);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = io::split_csv_line(line);
    if (f.size() > 5 && f[4] == "mean" && !f[5].empty()) out[f[0]] = std::stod(f[5]);
  }
  return out;
}

}  // namespace

int main() {
  const auto instances = ridge_instances();

  run(1, "type-I ridge: inverse and inversion-free forms agree within 1e-8", 10, [&] {
    double worst = 0.0;
    for (const auto& in : instances) {
      const SymMatrix t = SymMatrix::identity(in.s.dim());
      worst = std::max(worst, max_abs(alt_ridge_I(in.s, t, in.lambda).mat() -
                                      alt_ridge_I_noinv(in.s, t, in.lambda).mat()));
    }
    return Outcome{worst < 1e-8, "100 instances, max diff " + num(worst)};
  });

  run(2, "type-I ridge: stationarity and Riccati residuals within 1e-6", 0, [&] {
    double stat = 0.0, ric = 0.0;
    for (const auto& in : instances) {
      const SymMatrix t = SymMatrix::identity(in.s.dim());
      const SymMatrix theta = alt_ridge_I(in.s, t, in.lambda);
      stat = std::max(stat, ridge_stationarity_residual(theta, in.s, t, in.lambda));
      ric = std::max(ric, riccati_residual(theta, in.s, t, in.lambda));
    }
    return Outcome{stat < 1e-6 && ric < 1e-6,
                   "stationarity " + num(stat) + ", Riccati " + num(ric)};
  });

  run(3, "limits: lambda -> 0 gives S^-1, lambda -> inf gives the target inverse", 0, [&] {
    double small = 0.0, large = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Eigen::Index p = 5 + static_cast<Eigen::Index>(seed);
      const SymMatrix s = gridge::testing::random_cov(p, 5 * p, seed);
      const SymMatrix t = SymMatrix::identity(p);
      const SymMatrix inv = spd_inverse(s);
      small = std::max(small, frobenius_norm(alt_ridge_I(s, t, 1e-8) - inv) / frobenius_norm(inv));
      large = std::max(large, max_abs(alt_ridge_I(s, t, 1e8).mat() - t.mat()));
    }
    return Outcome{small < 1e-4 && large < 1e-3,
                   "relative Frobenius at 1e-8: " + num(small) + ", max diff to I at 1e8: " + num(large)};
  });

  run(4, "reductions of the generalized and two-step estimators within 1e-8", 0, [&] {
    double g0 = 0.0, g2 = 0.0, ts = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Eigen::Index p = 3 + static_cast<Eigen::Index>(seed % 8);
      const SymMatrix s = gridge::testing::random_cov(p, 2 * p, 50 + seed);
      const SymMatrix gamma = SymMatrix::scalar(p, 0.5 + 0.05 * static_cast<double>(seed));
      const SymMatrix t = SymMatrix::identity(p);
      const double l = 0.1 * static_cast<double>(seed % 9 + 1);
      g0 = std::max(g0, max_abs(generalized(s, gamma, t, {0.0, l}).mat() - alt_ridge_I(s, t, l).mat()));
      g2 = std::max(g2, max_abs(generalized(s, gamma, t, {l, 0.0}).mat() - archetype1(s, gamma, l).mat()));
      ts = std::max(ts, max_abs(two_step(s, t, {l, 0.0}).mat() - alt_ridge_I(s, t, l).mat()));
    }
    return Outcome{g0 < 1e-8 && g2 < 1e-8 && ts < 1e-8,
                   "lambda1=0: " + num(g0) + ", lambda2=0: " + num(g2) + ", alpha=0: " + num(ts)};
  });

  run(5, "glasso: KKT, diagonal solution, unpenalized inverse", 30, [&] {
    double kkt = 0.0, diag = 0.0, inv = 0.0;
    bool converged = true, diagonal = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Eigen::Index p = 3 * static_cast<Eigen::Index>(seed);
      const SymMatrix s = gridge::testing::random_cov(p, 2 * p, 300 + seed);
      const double rho = 0.05 + 0.02 * static_cast<double>(seed % 4);
      const GlassoFit fit = glasso_fit(s, rho);
      converged = converged && fit.converged;
      kkt = std::max(kkt, kkt_check(fit, s, rho));

      const double big = max_abs_offdiag(s);
      const GlassoFit d = glasso_fit(s, big);
      diagonal = diagonal && d.theta.is_diagonal();
      for (Eigen::Index i = 0; i < p; ++i)
        diag = std::max(diag, std::abs(d.theta(i, i) - 1.0 / (s(i, i) + big)));

      inv = std::max(inv, max_abs(glasso_fit(s, 0.0).theta.mat() - spd_inverse(s).mat()));
    }
    return Outcome{converged && diagonal && kkt < 1e-4 && diag < 1e-12 && inv < 1e-6,
                   "p in 3..30: KKT " + num(kkt) + ", diagonal-solution error " + num(diag) +
                       ", rho=0 inverse error " + num(inv)};
  });

  run(6, "dual optimizer vs two-step closed form (p=2 within 1e-5, p=3 within 1e-2)", 60, [&] {
    cli::DualcheckConfig cfg;
    cfg.p = 2;
    double u2 = 0.0, t2 = 0.0;
    for (const auto& row : cli::run_dualcheck(cfg, 42, 1)) {
      u2 = std::max(u2, max_abs(row.u_diff));
      t2 = std::max(t2, row.theta_diff);
    }
    cfg.p = 3;
    double u3 = 0.0, t3 = 0.0;
    int over = 0;
    for (const auto& row : cli::run_dualcheck(cfg, 42, 1)) {
      const double m = max_abs(row.u_diff);
      u3 = std::max(u3, m);
      t3 = std::max(t3, row.theta_diff);
      if (m >= 1e-2) ++over;
    }
    return Outcome{u2 < 1e-5 && t2 < 1e-5 && u3 < 1e-2,
                   "p=2: U " + num(u2) + ", Theta " + num(t2) + "; p=3 (15 reps): max off-diagonal U " +
                       num(u3) + " (" + std::to_string(over) + " reps >= 1e-2), Theta " + num(t3)};
  });

  run(7, "simulation trend: two_step mean KL <= 1.05 x alt_ridge_I mean KL (network 1)", 300, [&] {
    cli::RunConfig rc;
    rc.simulate.networks = {"compound_symmetry"};
    rc.simulate.p = {20};
    rc.simulate.n = 50;
    rc.simulate.replications = 20;
    rc.simulate.methods = {"alt_ridge_I", "two_step"};
    rc.simulate.targets = {"identity"};
    const fs::path dir = scratch("sim");
    cli::cmd_simulate(rc, dir);
    const auto kl = mean_kl(dir / "losses.csv");
    if (!kl.count("two_step") || !kl.count("alt_ridge_I"))
      return Outcome{false, "missing aggregate rows"};
    const double a = kl.at("alt_ridge_I"), b = kl.at("two_step");
    return Outcome{b <= 1.05 * a, "two_step " + num(b) + ", alt_ridge_I " + num(a)};
  });

  run(8, "loss sanity: perfect estimate gives zeros, KL >= 0 on random pairs", 0, [&] {
    double worst_zero = 0.0;
    for (int m = 0; m < 6; ++m) {
      const GroundTruth g = make_network({static_cast<NetworkModel>(m), 20, 11});
      const LossReport r = evaluate_losses(g.sigma, g.theta, g.theta);
      worst_zero = std::max({worst_zero, std::abs(r.kl), r.l2, std::abs(r.ql), r.sp});
    }
    double min_kl = 1e300;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      min_kl = std::min(min_kl, kl_loss(gridge::testing::random_spd(6, 2 * seed + 1),
                                        gridge::testing::random_spd(6, 2 * seed + 2)));
    return Outcome{worst_zero < 1e-10 && min_kl >= 0.0,
                   "max |loss| at truth " + num(worst_zero) + ", min KL " + num(min_kl)};
  });

  run(9, "LDA application", 0, [&] {
    const char* env = std::getenv("GRIDGE_IONOSPHERE_CSV");
    const fs::path data = env ? fs::path(env) : fs::path("data/ionosphere.csv");
    if (fs::exists(data)) {
      cli::RunConfig rc;
      rc.lda.input = data.string();
      rc.lda.methods = {"two_step"};
      rc.lda.target = "nu";
      const fs::path dir = scratch("lda");
      cli::cmd_lda(rc, dir);
      std::vector<double> rates;
      std::ifstream in(dir / "misclassification.csv");
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) rates.push_back(std::stod(io::split_csv_line(line)[2]));
      std::sort(rates.begin(), rates.end());
      const double median = 0.5 * (rates[(rates.size() - 1) / 2] + rates[rates.size() / 2]);
      return Outcome{std::abs(median - 0.162) <= 0.05,
                     "ionosphere, median over " + std::to_string(rates.size()) + " splits " + num(median)};
    }
    // Synthetic substitutes: separated classes -> rate 0, identical classes -> chance.
    Matrix x = gridge::testing::random_matrix(240, 4, 77);
    std::vector<Group> labels;
    for (Eigen::Index i = 0; i < 240; ++i) labels.push_back(i % 2 == 0 ? Group::G1 : Group::G2);
    const EstimatorSpec spec{Method::TwoStep, ScalarNuTarget{}, {}};
    LdaProtocol protocol;
    protocol.lambda_grid = {0.01, 0.1, 1.0};
    auto mean_rate = [&](const Matrix& data) {
      double m = 0.0;
      const auto reps = misclassification_experiment(data, labels, spec, protocol, 50, 42);
      for (const auto& r : reps) m += r.rate / static_cast<double>(reps.size());
      return m;
    };
    const double chance = mean_rate(x);
    for (Eigen::Index i = 0; i < 240; i += 2) x.row(i).array() += 25.0;
    const double separated = mean_rate(x);
    return Outcome{separated == 0.0 && std::abs(chance - 0.5) <= 0.1,
                   "no local ionosphere data; synthetic substitutes: separated rate " + num(separated) +
                       ", identical-class rate " + num(chance) + " (chance 0.5)"};
  });

  run(10, "determinism of simulate and dualcheck across runs and thread counts", 0, [&] {
    cli::RunConfig rc;
    rc.simulate.networks = {"compound_symmetry", "random_sparse"};
    rc.simulate.p = {10};
    rc.simulate.n = 30;
    rc.simulate.replications = 4;
    rc.simulate.methods = {"glasso", "alt_ridge_I", "two_step"};
    rc.simulate.targets = {"identity", "nu"};
    rc.simulate.cv.lambda_grid = {0.01, 0.1, 1.0};
    rc.simulate.cv.alpha_grid = {0.0, 0.4, 1.0};
    rc.dualcheck.p = 3;
    rc.dualcheck.iterations = 6;
    std::vector<std::string> sims, duals;
    for (int threads : {1, 1, 8}) {
      rc.threads = threads;
      const fs::path dir = scratch("det_" + std::to_string(sims.size()));
      cli::cmd_simulate(rc, dir);
      cli::cmd_dualcheck(rc, dir);
      sims.push_back(slurp(dir / "losses.csv"));
      duals.push_back(slurp(dir / "dualcheck.csv"));
    }
    const bool ok = !sims[0].empty() && !duals[0].empty() && sims[0] == sims[1] &&
                    sims[0] == sims[2] && duals[0] == duals[1] && duals[0] == duals[2];
    return Outcome{ok, "repeat run and --threads 1 vs 8 byte-identical: " + std::string(ok ? "yes" : "no")};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
