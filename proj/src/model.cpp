#include "mdcert/model.hpp"

#include <cmath>

namespace mdcert {

ConjugateClass conjugate_class(const FunctionClass& phi) {
  phi.validate();
  return {1.0 / phi.L, 1.0 / phi.mu};
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Continuous: return "ct";
    case Mode::Discrete: return "dt";
    case Mode::Projected: return "proj";
  }
  return "?";
}

double composite_kappa(const ProblemSpec& spec) {
  const ConjugateClass pb = spec.phibar();
  return spec.f.kappa() * (pb.L_bar / pb.mu_bar);
}

KronSystem::Realized KronSystem::realize(int dim) const {
  if (dim < 1) throw std::invalid_argument("KronSystem::realize: dim must be >= 1");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  auto kron = [&](const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows() * dim, X.cols() * dim);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        out.block(i * dim, j * dim, dim, dim) = X(i, j) * I;
    return out;
  };
  return {kron(A0), kron(B0), kron(C0), kron(D0)};
}

void KronSystem::validate() const {
  const auto n = A0.rows();
  if (A0.cols() != n) throw std::invalid_argument("KronSystem: A0 must be square");
  if (B0.rows() != n) throw std::invalid_argument("KronSystem: B0 row mismatch");
  if (C0.cols() != n) throw std::invalid_argument("KronSystem: C0 col mismatch");
  if (D0.rows() != C0.rows() || D0.cols() != B0.cols())
    throw std::invalid_argument("KronSystem: D0 shape mismatch");
  if (static_cast<Eigen::Index>(channel_sectors.size()) < B0.cols())
    throw std::invalid_argument("KronSystem: missing channel sectors");
  if (d < 1) throw std::invalid_argument("KronSystem: d must be >= 1");
}

double Witness::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end())
    throw std::invalid_argument("Witness: missing coordinate '" + name + "'");
  return it->second;
}

}  // namespace mdcert
