#include "mdcert/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>

namespace mdcert {

Csv::Csv(std::vector<std::string> header) : cols_(header.size()) {
  row(header);
}

std::string Csv::num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != cols_) throw std::invalid_argument("Csv: column count mismatch");
  for (size_t i = 0; i < cells.size(); ++i) {
    const std::string& c = cells[i];
    const bool quote = c.find_first_of(",\"\n") != std::string::npos;
    if (i) buf_ += ',';
    if (quote) {
      buf_ += '"';
      for (char ch : c) {
        if (ch == '"') buf_ += '"';
        buf_ += ch;
      }
      buf_ += '"';
    } else {
      buf_ += c;
    }
  }
  buf_ += "\r\n";
}

void Csv::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Csv: cannot open " + path);
  out << buf_;
}

ProblemSpec spec_from_kappa(Mode mode, double kappa) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("spec_from_kappa: kappa must be >= 1");
  const double r = std::sqrt(kappa);
  ProblemSpec spec;
  spec.mode = mode;
  spec.dim = 2;
  if (mode == Mode::Continuous) {
    spec.f = {1.0, r};
    spec.phi = {1.0 / r, 1.0};  // conjugate class (1, sqrt(kappa))
    spec.eta = 1.0;
  } else if (mode == Mode::Discrete) {
    spec.f = {1.0, r};
    spec.phi = {1.0 / r, 1.0};
    spec.eta = quadratic_rate(spec).first;
  } else {
    spec.f = {1.0 / r, 1.0};
    spec.phi = {1.0, r};  // conjugate class (1/sqrt(kappa), 1)
    spec.eta = quadratic_rate(spec).first;
  }
  return spec;
}

std::vector<CertifyPoint> run_certify(const CertifyConfig& cfg) {
  if (cfg.kappas.empty() && !cfg.explicit_classes)
    throw std::invalid_argument("run_certify: empty kappa grid");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("run_certify: tolerance must be positive");

  std::vector<ProblemSpec> specs;
  std::vector<double> kappas;
  if (cfg.explicit_classes) {
    ProblemSpec s;
    s.mode = cfg.mode;
    s.f = cfg.f;
    s.phi = cfg.phi;
    s.eta = 1.0;
    specs.push_back(s);
    kappas.push_back(composite_kappa(s));
  } else {
    for (double k : cfg.kappas) {
      specs.push_back(spec_from_kappa(cfg.mode, k));
      kappas.push_back(k);
    }
  }
  for (auto& s : specs) {
    if (cfg.eta > 0.0)
      s.eta = cfg.eta;
    else if (cfg.explicit_classes && cfg.mode != Mode::Continuous)
      s.eta = quadratic_rate(s).first;
    s.validate();
  }

  auto one = [&](const ProblemSpec& spec) {
    RateQuery q;
    q.spec = spec;
    q.tol = cfg.tol;
    q.sdp.seed = cfg.seed;
    switch (cfg.mode) {
      case Mode::Continuous:
        q.multipliers = cfg.multipliers == MultiplierMode::SectorOnly
                            ? MultiplierMode::SectorOnly
                            : MultiplierMode::SectorPlusPopov;
        return ct_certified_rate(q);
      case Mode::Discrete:
        q.multipliers = MultiplierMode::SectorPlusOffByOne;
        return dt_certified_rate(q);
      case Mode::Projected:
        q.multipliers = MultiplierMode::FullProjected;
        return proj_certified_rate(q);
    }
    throw std::logic_error("run_certify: bad mode");
  };

  std::vector<CertifyPoint> out(specs.size());
  if (cfg.parallel && specs.size() > 1) {
    std::vector<std::future<RateCertificate>> futs;
    futs.reserve(specs.size());
    for (const auto& s : specs)
      futs.push_back(std::async(std::launch::async, one, s));
    for (size_t i = 0; i < specs.size(); ++i) out[i] = {kappas[i], futs[i].get()};
  } else {
    for (size_t i = 0; i < specs.size(); ++i) out[i] = {kappas[i], one(specs[i])};
  }
  return out;
}

Csv certify_csv(const std::vector<CertifyPoint>& pts, MultiplierMode multipliers) {
  Csv csv({"kappa", "eta", "rho_certified", "margin", "multiplier_mode", "status"});
  for (const auto& p : pts)
    csv.row({Csv::num(p.kappa), Csv::num(p.cert.eta), Csv::num(p.cert.rho),
             Csv::num(p.cert.margin), to_string(multipliers),
             p.cert.certified ? "certified" : "uncertified"});
  return csv;
}

Csv figure2_csv() {
  const std::vector<double> grid = {1,  2,  5,  10, 15, 20, 25, 30, 32,
                                    33, 34, 35, 36, 40, 50, 70, 100};
  CertifyConfig cfg;
  cfg.mode = Mode::Continuous;
  cfg.kappas = grid;
  cfg.multipliers = MultiplierMode::SectorPlusPopov;
  const auto popov = run_certify(cfg);
  cfg.multipliers = MultiplierMode::SectorOnly;
  const auto sector = run_certify(cfg);

  Csv csv({"kappa", "rho_sector_popov", "rho_sector_only"});
  for (size_t i = 0; i < grid.size(); ++i)
    csv.row({Csv::num(grid[i]), Csv::num(popov[i].cert.rho), Csv::num(sector[i].cert.rho)});
  return csv;
}

Csv figure3_csv() {
  const std::vector<double> grid = {1.5, 2, 3, 5, 9, 15, 25, 50, 100, 200, 400};
  CertifyConfig cfg;
  cfg.mode = Mode::Discrete;
  cfg.kappas = grid;
  const auto pts = run_certify(cfg);

  Csv csv({"kappa", "eta", "rho_certified", "rho_analytic"});
  for (size_t i = 0; i < grid.size(); ++i) {
    const double k = grid[i];
    csv.row({Csv::num(k), Csv::num(pts[i].cert.eta), Csv::num(pts[i].cert.rho),
             Csv::num((k - 1.0) / (k + 1.0))});
  }
  return csv;
}

Csv figure4_csv() {
  const int N = 300;
  SimSummary gd = run_sim(sim_instance("quad63-gd"), N);
  SimSummary md = run_sim(sim_instance("quad63-md"), N);
  const SmoothFunction f = quad_6_3();
  Csv csv({"k", "gd_error", "md_error"});
  for (int k = 0; k <= N; ++k)
    csv.row({Csv::num(k), Csv::num(std::abs(f.value(gd.traj.x[k]) - gd.f_opt)),
             Csv::num(std::abs(f.value(md.traj.x[k]) - md.f_opt))});
  return csv;
}

Csv figure5_csv() {
  const std::vector<double> mus = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.35};
  Csv csv({"kappa", "eta", "rho_projected", "rho_unconstrained"});
  std::vector<std::future<std::pair<RateCertificate, RateCertificate>>> futs;
  for (double mu : mus) {
    futs.push_back(std::async(std::launch::async, [mu]() {
      const double kappa = 1.0 / (mu * mu);
      RateQuery q;
      q.spec = spec_from_kappa(Mode::Projected, kappa);
      q.multipliers = MultiplierMode::FullProjected;
      RateCertificate proj = proj_certified_rate(q);
      RateQuery qu;
      qu.spec = q.spec;
      qu.spec.mode = Mode::Discrete;
      qu.spec.eta = proj.eta;  // matched stepsize
      qu.multipliers = MultiplierMode::SectorPlusOffByOne;
      RateCertificate unc = dt_certified_rate(qu);
      return std::make_pair(proj, unc);
    }));
  }
  for (size_t i = 0; i < mus.size(); ++i) {
    auto [proj, unc] = futs[i].get();
    csv.row({Csv::num(1.0 / (mus[i] * mus[i])), Csv::num(proj.eta), Csv::num(proj.rho),
             Csv::num(unc.rho)});
  }
  return csv;
}

Csv figure_csv(int n) {
  switch (n) {
    case 2: return figure2_csv();
    case 3: return figure3_csv();
    case 4: return figure4_csv();
    case 5: return figure5_csv();
  }
  throw std::invalid_argument("figure_csv: n must be one of 2, 3, 4, 5");
}

SimInstance sim_instance(const std::string& name) {
  SimInstance inst;
  inst.name = name;
  if (name == "quad63-gd" || name == "quad63-md" || name == "quad63-md-prop2") {
    inst.f = quad_6_3();
    inst.x0 = (Eigen::VectorXd(2) << 5.0, 5.0).finished();
    if (name == "quad63-gd") {
      inst.dgf = identity_dgf(2);
      inst.eta = 2.0 / (inst.f.cls.L + inst.f.cls.mu);
    } else {
      inst.dgf = dgf_6_3();
      if (name == "quad63-md-prop2") {
        ProblemSpec s;
        s.f = inst.f.cls;
        s.phi = inst.dgf.phi.cls;
        inst.eta = quadratic_rate(s).first;
      } else {
        // Spectrum-matched stepsize: the refined Section-6.3 rate.
        Eigen::MatrixXd F(2, 2), Phi(2, 2);
        F << 100.0, -1.0, -1.0, 1.0;
        Phi << 10.0, 1.0, 1.0, 1.0;
        const Eigen::MatrixXd Phib = Phi.inverse();
        const SpectrumBound sb = spectrum_bound(F, Phib);
        inst.eta = 2.0 / (sb.lambda_max + sb.lambda_min);
      }
    }
    return inst;
  }
  throw std::invalid_argument("sim_instance: unknown instance '" + name + "'");
}

std::vector<std::string> sim_instance_names() {
  return {"quad63-gd", "quad63-md", "quad63-md-prop2"};
}

SimSummary run_sim(const SimInstance& inst, int steps) {
  SimSummary out;
  const Eigen::VectorXd z0 = inst.dgf.identity ? inst.x0 : Eigen::VectorXd(inst.dgf.phi.grad(inst.x0));
  out.traj = run_dt_md(inst.f, inst.dgf, z0, inst.eta, steps);
  out.f_opt = inst.f.value(*inst.f.minimizer);
  out.final_error = std::abs(inst.f.value(out.traj.x.back()) - out.f_opt);
  out.rate = empirical_rate(out.traj.distances_to(*inst.f.minimizer), out.traj.dt, Mode::Discrete);
  return out;
}

Csv trajectory_csv(const Trajectory& traj, const SmoothFunction& f) {
  std::vector<std::string> header = {"t"};
  const int d = traj.x.empty() ? 0 : static_cast<int>(traj.x[0].size());
  for (int i = 0; i < d; ++i) header.push_back("x" + std::to_string(i + 1));
  header.push_back("dist_to_opt");
  header.push_back("f_error");
  Csv csv(header);
  const double fopt = f.minimizer ? f.value(*f.minimizer) : 0.0;
  for (int k = 0; k < traj.steps(); ++k) {
    std::vector<std::string> cells = {Csv::num(k * traj.dt)};
    for (int i = 0; i < d; ++i) cells.push_back(Csv::num(traj.x[k][i]));
    cells.push_back(Csv::num(f.minimizer ? (traj.x[k] - *f.minimizer).norm() : 0.0));
    cells.push_back(Csv::num(std::abs(f.value(traj.x[k]) - fopt)));
    csv.row(cells);
  }
  return csv;
}

}  // namespace mdcert
