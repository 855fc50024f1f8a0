#include <CLI11.hpp>

#include <iostream>

#include "mdcert/runner.hpp"

namespace {

using namespace mdcert;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitDiverged = 4;

Mode parse_mode(const std::string& s) {
  if (s == "ct") return Mode::Continuous;
  if (s == "dt") return Mode::Discrete;
  if (s == "proj") return Mode::Projected;
  throw CLI::ValidationError("--mode", "expected one of ct, dt, proj");
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    std::vector<double> vals;
    std::stringstream rs(row);
    std::string cell;
    while (std::getline(rs, cell, ',')) vals.push_back(std::stod(cell));
    if (!rows.empty() && vals.size() != rows[0].size())
      throw CLI::ValidationError("matrix", "ragged rows in '" + text + "'");
    rows.push_back(vals);
  }
  if (rows.empty()) throw CLI::ValidationError("matrix", "empty matrix literal");
  Eigen::MatrixXd M(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  return M;
}

void emit(const Csv& csv, const std::string& out) {
  if (out.empty())
    std::cout << csv.text();
  else
    csv.write_file(out);
}

struct CommonOpts {
  std::string mode = "dt";
  std::vector<double> kappas;
  double mu_f = 0, L_f = 0, mu_pb = 0, L_pb = 0;
  double eta = -1.0;
  std::string stepsize;
  std::string multipliers = "default";
  double tol = 1e-7;
  std::string out;
  uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--mode", o.mode, "problem mode: ct, dt, proj")
      ->check(CLI::IsMember({"ct", "dt", "proj"}));
  cmd->add_option("--kappa", o.kappas, "composite condition number(s)");
  cmd->add_option("--mu-f", o.mu_f, "lower curvature of f");
  cmd->add_option("--L-f", o.L_f, "upper curvature of f");
  cmd->add_option("--mu-phibar", o.mu_pb, "lower curvature of the conjugate DGF");
  cmd->add_option("--L-phibar", o.L_pb, "upper curvature of the conjugate DGF");
  cmd->add_option("--eta", o.eta, "explicit stepsize");
  cmd->add_option("--stepsize", o.stepsize, "stepsize rule: prop2")
      ->check(CLI::IsMember({"prop2"}));
  cmd->add_option("--multipliers", o.multipliers, "multiplier set: default or sector-only")
      ->check(CLI::IsMember({"default", "sector-only"}));
  cmd->add_option("--tol", o.tol, "bisection tolerance");
  cmd->add_option("--out", o.out, "output CSV path (stdout when omitted)");
  cmd->add_option("--seed", o.seed, "solver seed (runs are deterministic regardless)");
}

CertifyConfig to_config(const CommonOpts& o) {
  CertifyConfig cfg;
  cfg.mode = parse_mode(o.mode);
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  cfg.multipliers = o.multipliers == "sector-only" ? MultiplierMode::SectorOnly
                                                   : MultiplierMode::SectorPlusPopov;
  if (!o.kappas.empty()) {
    cfg.kappas = o.kappas;
  } else if (o.mu_f > 0 && o.L_f > 0 && o.mu_pb > 0 && o.L_pb > 0) {
    cfg.explicit_classes = true;
    cfg.f = {o.mu_f, o.L_f};
    cfg.phi = {1.0 / o.L_pb, 1.0 / o.mu_pb};  // conjugate pair
  } else {
    throw CLI::ValidationError("certify",
                               "need --kappa or all of --mu-f --L-f --mu-phibar --L-phibar");
  }
  if (o.eta > 0 && !o.stepsize.empty())
    throw CLI::ValidationError("certify", "--eta conflicts with --stepsize");
  if (o.eta > 0) cfg.eta = o.eta;
  if (cfg.mode == Mode::Continuous && o.eta <= 0) cfg.eta = 1.0;
  // dt/proj default to the Proposition-2 stepsize when --eta is absent.
  return cfg;
}

int cmd_certify(const CommonOpts& o) {
  CertifyConfig cfg = to_config(o);
  const auto pts = run_certify(cfg);
  emit(certify_csv(pts, cfg.mode == Mode::Continuous ? cfg.multipliers
                                                     : (cfg.mode == Mode::Discrete
                                                            ? MultiplierMode::SectorPlusOffByOne
                                                            : MultiplierMode::FullProjected)),
       o.out);
  return 0;
}

int cmd_sweep(const CommonOpts& o, double kmin, double kmax, int kcount) {
  CommonOpts opts = o;
  if (opts.kappas.empty()) {
    if (!(kmin >= 1.0 && kmax > kmin && kcount >= 2))
      throw CLI::ValidationError("sweep", "need --kappa list or --kappa-min/--kappa-max/--kappa-count");
    for (int i = 0; i < kcount; ++i)
      opts.kappas.push_back(kmin * std::pow(kmax / kmin, static_cast<double>(i) / (kcount - 1)));
  }
  return cmd_certify(opts);
}

int cmd_figure(int n, const std::string& outdir) {
  Csv csv = figure_csv(n);
  if (outdir.empty())
    std::cout << csv.text();
  else
    csv.write_file(outdir + "/fig" + std::to_string(n) + ".csv");
  return 0;
}

struct SimulateOpts {
  std::string instance;
  std::string Ftext, ptext, Phitext;
  double eta = -1.0;
  std::string stepsize;
  int steps = 300;
  std::string out;
  bool certify = false;
};

int cmd_simulate(const SimulateOpts& so) {
  SimInstance inst;
  if (!so.instance.empty()) {
    inst = sim_instance(so.instance);
  } else if (!so.Ftext.empty() && !so.ptext.empty()) {
    const Eigen::MatrixXd F = parse_matrix(so.Ftext);
    const Eigen::VectorXd p = Eigen::VectorXd(parse_matrix(so.ptext).reshaped());
    inst.name = "inline";
    inst.f = quadratic_function(F, p, "inline");
    inst.dgf = so.Phitext.empty() ? identity_dgf(static_cast<int>(F.rows()))
                                  : quadratic_dgf(parse_matrix(so.Phitext));
    ProblemSpec s;
    s.f = inst.f.cls;
    s.phi = inst.dgf.phi.cls;
    inst.eta = quadratic_rate(s).first;
    inst.x0 = Eigen::VectorXd::Constant(F.rows(), 5.0);
  } else {
    throw CLI::ValidationError("simulate", "need --instance or --F and --p");
  }
  if (so.eta > 0) inst.eta = so.eta;

  const SimSummary sum = run_sim(inst, so.steps);
  if (!so.out.empty()) trajectory_csv(sum.traj, inst.f).write_file(so.out);

  Csv summary({"instance", "eta", "steps", "rho_emp", "final_error", "rho_certified"});
  double rho_cert = std::numeric_limits<double>::quiet_NaN();
  if (so.certify) {
    RateQuery q;
    q.spec.mode = Mode::Discrete;
    q.spec.f = inst.f.cls;
    q.spec.phi = inst.dgf.phi.cls;
    q.spec.eta = inst.eta;
    rho_cert = dt_certified_rate(q).rho;
  }
  summary.row({inst.name, Csv::num(inst.eta), Csv::num(so.steps), Csv::num(sum.rate.rho),
               Csv::num(sum.final_error), Csv::num(rho_cert)});
  std::cout << summary.text();
  return sum.traj.diverged_at >= 0 ? kExitDiverged : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence-rate certification and simulation lab for mirror descent"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());

  CommonOpts certify_opts;
  CLI::App* certify = app.add_subcommand("certify", "certify convergence rates");
  add_common(certify, certify_opts);

  CommonOpts sweep_opts;
  double kmin = 0, kmax = 0;
  int kcount = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "certification sweep over a kappa grid");
  add_common(sweep, sweep_opts);
  sweep->add_option("--kappa-min", kmin, "lowest kappa of a log-spaced grid");
  sweep->add_option("--kappa-max", kmax, "highest kappa of a log-spaced grid");
  sweep->add_option("--kappa-count", kcount, "number of grid points");

  int fig_n = 0;
  std::string fig_out;
  CLI::App* figure = app.add_subcommand("figure", "reproduce figure data as CSV");
  figure->add_option("--n", fig_n, "figure number: 2, 3, 4 or 5")->required();
  figure->add_option("--out", fig_out, "output directory (stdout when omitted)");

  SimulateOpts sim_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "run MD/GD trajectories");
  simulate->add_option("--instance", sim_opts.instance,
                       "registered instance: quad63-gd, quad63-md, quad63-md-prop2");
  simulate->add_option("--F", sim_opts.Ftext, "inline quadratic: F as 'a,b;c,d'");
  simulate->add_option("--p", sim_opts.ptext, "inline quadratic: p as 'a,b'");
  simulate->add_option("--Phi", sim_opts.Phitext, "inline DGF matrix (identity when omitted)");
  simulate->add_option("--eta", sim_opts.eta, "explicit stepsize");
  simulate->add_option("--stepsize", sim_opts.stepsize, "stepsize rule: prop2")
      ->check(CLI::IsMember({"prop2"}));
  simulate->add_option("--steps", sim_opts.steps, "iteration count");
  simulate->add_option("--out", sim_opts.out, "trajectory CSV path");
  simulate->add_flag("--certify", sim_opts.certify, "also report the certified class rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (certify->parsed()) return cmd_certify(certify_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, kmin, kmax, kcount);
    if (figure->parsed()) return cmd_figure(fig_n, fig_out);
    if (simulate->parsed()) return cmd_simulate(sim_opts);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
