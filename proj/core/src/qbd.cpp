#include "p2pq/qbd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "p2pq/errors.hpp"

namespace p2pq::qbd {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr long kMaxBruteForceStates = 200000;

VectorXd phase_values(int phases) {
  return VectorXd::LinSpaced(phases, 0.0, static_cast<double>(phases - 1));
}

double poisson_tail_above(double rho, int cap) {
  // P(N > cap) = P(cap + 1, rho), the regularized lower incomplete gamma.
  return boost::math::gamma_p(static_cast<double>(cap) + 1.0, rho);
}

double rate_scale(const QbdBlocks& blocks) {
  return std::max(1.0, blocks.A1.cwiseAbs().rowwise().sum().maxCoeff());
}

void check_mean_drift(const QbdBlocks& blocks) {
  const int n = blocks.phases();
  // Phase generator of the level-independent part.
  const MatrixXd A = blocks.A0 + blocks.A1 + blocks.A2;
  MatrixXd system = A.transpose();
  system.row(n - 1).setOnes();
  VectorXd rhs = VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const VectorXd theta = system.fullPivLu().solve(rhs);
  const double up = theta.dot(blocks.A0.rowwise().sum());
  const double down = theta.dot(blocks.A2.rowwise().sum());
  if (!(up < down)) {
    std::ostringstream os;
    os << "QBD is not positive recurrent: mean upward drift " << up
       << " >= mean downward drift " << down;
    throw UnstableModel(os.str());
  }
}

// Clears negative roundoff; anything clearly negative is a solver failure.
template <class Derived>
void clamp_roundoff(Eigen::MatrixBase<Derived>& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double& v = m.derived().data()[i];
    if (v < 0.0) {
      if (v < -1e-12 * scale) {
        std::ostringstream os;
        os << what << " has a negative entry " << v;
        throw NumericalError(os.str());
      }
      v = 0.0;
    }
  }
}

MatrixXd logarithmic_reduction(const QbdBlocks& b, double tol, int max_iter) {
  const int n = b.phases();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const Eigen::PartialPivLU<MatrixXd> neg_a1(-b.A1);
  MatrixXd up = neg_a1.solve(b.A0);
  MatrixXd down = neg_a1.solve(b.A2);
  MatrixXd G = down;
  MatrixXd T = up;
  const VectorXd ones = VectorXd::Ones(n);
  const double scale = rate_scale(b);

  int iter = 0;
  auto rate_matrix = [&] {
    const MatrixXd U = b.A1 + b.A0 * G;
    return MatrixXd(b.A0 * (-U).partialPivLu().inverse());
  };
  for (; iter < max_iter; ++iter) {
    if ((ones - G * ones).cwiseAbs().maxCoeff() < 1e-14 || T.cwiseAbs().maxCoeff() < 1e-300) {
      break;
    }
    const MatrixXd mix = up * down + down * up;
    const Eigen::PartialPivLU<MatrixXd> lu(I - mix);
    const MatrixXd up_next = lu.solve(up * up);
    const MatrixXd down_next = lu.solve(down * down);
    G += T * down_next;
    T = T * up_next;
    up = up_next;
    down = down_next;
  }
  MatrixXd R = rate_matrix();
  const double res = r_residual(b, R);
  if (!(res <= tol * scale)) throw NoConvergence(iter, res);
  return R;
}

MatrixXd fixed_point(const QbdBlocks& b, double tol, int max_iter) {
  const int n = b.phases();
  const MatrixXd a1_inv = b.A1.partialPivLu().inverse();
  const double scale = rate_scale(b);
  MatrixXd R = MatrixXd::Zero(n, n);
  double res = r_residual(b, R);
  int iter = 0;
  for (; iter < max_iter && !(res <= tol * scale); ++iter) {
    R = -(b.A0 + R * R * b.A2) * a1_inv;
    res = r_residual(b, R);
  }
  if (!(res <= tol * scale)) throw NoConvergence(iter, res);
  return R;
}

Moments moments_from_levels(const std::vector<VectorXd>& levels, const VectorXd& s) {
  Moments m;
  const VectorXd s_fact = s.array() * (s.array() - 1.0);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const VectorXd& p = levels[k];
    const double kd = static_cast<double>(k);
    m.E_nc += kd * p.sum();
    m.E_ns += p.dot(s);
    m.E_ns_ns1 += p.dot(s_fact);
    m.E_nc_ns += kd * p.dot(s);
  }
  m.P_nc0 = levels.front().sum();
  m.G0_1 = levels.front().dot(s);
  m.G0_2 = levels.front().dot(s_fact);
  m.cov_nc_ns = m.E_nc_ns - m.E_nc * m.E_ns;
  return m;
}

}  // namespace

int default_phase_cap(const ModelParams& params) {
  const double rho_s = params.rho_s();
  return static_cast<int>(std::ceil(rho_s + 10.0 * std::sqrt(rho_s)));
}

QbdBlocks build_blocks(const ModelParams& params, int phase_cap) {
  if (phase_cap < 1) throw InvalidConfig("phase cap M_s must be >= 1");
  const int n = phase_cap + 1;
  QbdBlocks b{params};
  b.phase_cap = phase_cap;
  b.A0 = params.lambda_c() * MatrixXd::Identity(n, n);
  b.A2 = MatrixXd::Zero(n, n);
  b.A1 = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    b.A2(i, i) = i * params.mu_c();
    if (i < phase_cap) b.A1(i, i + 1) = params.lambda_s();
    if (i > 0) b.A1(i, i - 1) = i * params.mu_s();
  }
  b.B1 = b.A1;
  for (int i = 0; i < n; ++i) {
    const double server_out = b.A1.row(i).sum();
    b.A1(i, i) = -(server_out + params.lambda_c() + b.A2(i, i));
    b.B1(i, i) = -(server_out + params.lambda_c());
  }
  return b;
}

double r_residual(const QbdBlocks& blocks, const Eigen::MatrixXd& R) {
  const MatrixXd res = blocks.A0 + R * blocks.A1 + R * R * blocks.A2;
  return res.cwiseAbs().rowwise().sum().maxCoeff();
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  const Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd solve_R(const QbdBlocks& blocks, double tol, int max_iter,
                        RAlgorithm algorithm) {
  if (!(tol > 0.0)) throw InvalidConfig("R tolerance must be positive");
  if (max_iter < 1) throw InvalidConfig("R max_iter must be positive");
  check_mean_drift(blocks);
  MatrixXd R = algorithm == RAlgorithm::LogarithmicReduction
                   ? logarithmic_reduction(blocks, tol, max_iter)
                   : fixed_point(blocks, tol, max_iter);
  clamp_roundoff(R, "rate matrix R");
  const double sp = spectral_radius(R);
  if (!(sp < 1.0)) {
    std::ostringstream os;
    os << "spectral radius of R is " << sp << " >= 1";
    throw UnstableModel(os.str());
  }
  return R;
}

EquilibriumSolution solve_equilibrium(const QbdBlocks& blocks, const Eigen::MatrixXd& R,
                                      const EquilibriumOptions& options) {
  const int n = blocks.phases();
  if (R.rows() != n || R.cols() != n) throw InvalidConfig("R does not match the QBD blocks");
  if (const double sp = spectral_radius(R); !(sp < 1.0)) {
    std::ostringstream os;
    os << "spectral radius of R is " << sp << " >= 1";
    throw UnstableModel(os.str());
  }

  const MatrixXd I = MatrixXd::Identity(n, n);
  const Eigen::PartialPivLU<MatrixXd> i_minus_r(I - R);
  const MatrixXd N = i_minus_r.inverse();
  const VectorXd ones = VectorXd::Ones(n);
  const VectorXd n_ones = N * ones;

  const MatrixXd C = blocks.B1 + R * blocks.A2;
  Eigen::FullPivLU<MatrixXd> rank_probe(C);
  rank_probe.setThreshold(1e-12);
  if (rank_probe.rank() != n - 1) {
    std::ostringstream os;
    os << "boundary system has rank " << rank_probe.rank() << ", expected " << n - 1;
    throw SingularBoundary(os.str());
  }
  // pi0 C = 0 with one equation traded for the normalization pi0 N 1 = 1.
  MatrixXd system = C;
  system.col(0) = n_ones;
  VectorXd rhs = VectorXd::Zero(n);
  rhs(0) = 1.0;
  VectorXd pi0 = system.transpose().fullPivLu().solve(rhs);
  clamp_roundoff(pi0, "boundary vector pi_0");

  EquilibriumSolution sol{blocks.params};
  sol.phase_cap = blocks.phase_cap;
  sol.R = R;
  sol.phase_tail_bound = poisson_tail_above(sol.params.rho_s(), blocks.phase_cap);

  const Eigen::RowVectorXd pi0_row = pi0.transpose();
  const Eigen::RowVectorXd total = pi0_row * N;
  const Eigen::RowVectorXd level_weighted = pi0_row * R * N * N;
  sol.phase_marginal = total.transpose();
  sol.phase_level_moment = level_weighted.transpose();

  const VectorXd s = phase_values(n);
  const VectorXd s_fact = s.array() * (s.array() - 1.0);
  Moments& m = sol.moments;
  m.E_nc = level_weighted.sum();
  m.E_ns = total.dot(s);
  m.E_ns_ns1 = total.dot(s_fact);
  m.E_nc_ns = level_weighted.dot(s);
  m.cov_nc_ns = m.E_nc_ns - m.E_nc * m.E_ns;
  m.P_nc0 = pi0.sum();
  m.G0_1 = pi0.dot(s);
  m.G0_2 = pi0.dot(s_fact);

  Eigen::RowVectorXd level = pi0_row;
  for (;;) {
    sol.pi_levels.emplace_back(level.transpose());
    level = level * R;
    const double tail = level.dot(n_ones.transpose());
    if (tail < options.tail_target ||
        static_cast<int>(sol.pi_levels.size()) >= options.max_levels) {
      sol.tail_mass = std::max(0.0, tail);
      break;
    }
  }
  return sol;
}

EquilibriumSolution solve(const ModelParams& params, int phase_cap,
                          const EquilibriumOptions& options) {
  if (phase_cap == 0) phase_cap = default_phase_cap(params);
  const QbdBlocks blocks = build_blocks(params, phase_cap);
  return solve_equilibrium(blocks, solve_R(blocks), options);
}

Eigen::SparseMatrix<double> truncated_generator(const ModelParams& params, int phase_cap,
                                                int level_cap) {
  if (phase_cap < 0 || level_cap < 0) throw InvalidConfig("truncation caps must be >= 0");
  const long phases = phase_cap + 1;
  const long states = phases * (static_cast<long>(level_cap) + 1);
  if (states > kMaxBruteForceStates) {
    std::ostringstream os;
    os << "truncated chain has " << states << " states, limit is " << kMaxBruteForceStates;
    throw InvalidConfig(os.str());
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(states) * 5);
  for (long c = 0; c <= level_cap; ++c) {
    for (long s = 0; s < phases; ++s) {
      const long from = c * phases + s;
      double out = 0.0;
      auto add = [&](long to, double rate) {
        entries.emplace_back(from, to, rate);
        out += rate;
      };
      if (c < level_cap) add(from + phases, params.lambda_c());
      if (c > 0 && s > 0) add(from - phases, s * params.mu_c());
      if (s < phase_cap) add(from + 1, params.lambda_s());
      if (s > 0) add(from - 1, s * params.mu_s());
      entries.emplace_back(from, from, -out);
    }
  }
  Eigen::SparseMatrix<double> Q(states, states);
  Q.setFromTriplets(entries.begin(), entries.end());
  return Q;
}

EquilibriumSolution brute_force_truncated(const ModelParams& params, int phase_cap,
                                          int level_cap) {
  const Eigen::SparseMatrix<double> Q = truncated_generator(params, phase_cap, level_cap);
  const long states = Q.rows();
  const long phases = phase_cap + 1;

  // Solve Q^T pi = 0 with the first balance equation replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(Q.nonZeros() + states));
  for (int k = 0; k < Q.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(Q, k); it; ++it) {
      if (it.col() != 0) entries.emplace_back(it.col(), it.row(), it.value());
    }
  }
  for (long j = 0; j < states; ++j) entries.emplace_back(0, j, 1.0);
  Eigen::SparseMatrix<double> system(states, states);
  system.setFromTriplets(entries.begin(), entries.end());
  system.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw SingularGenerator("sparse LU of the truncated generator failed: " +
                            lu.lastErrorMessage());
  }
  VectorXd rhs = VectorXd::Zero(states);
  rhs(0) = 1.0;
  VectorXd pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !pi.allFinite()) {
    throw SingularGenerator("truncated generator solve produced no finite solution");
  }
  clamp_roundoff(pi, "brute-force stationary vector");

  EquilibriumSolution sol{params};
  sol.phase_cap = phase_cap;
  sol.phase_tail_bound = poisson_tail_above(params.rho_s(), phase_cap);
  sol.pi_levels.reserve(static_cast<std::size_t>(level_cap) + 1);
  sol.phase_marginal = VectorXd::Zero(phases);
  sol.phase_level_moment = VectorXd::Zero(phases);
  for (long c = 0; c <= level_cap; ++c) {
    VectorXd level = pi.segment(c * phases, phases);
    sol.phase_marginal += level;
    sol.phase_level_moment += static_cast<double>(c) * level;
    sol.pi_levels.push_back(std::move(level));
  }
  sol.moments = moments_from_levels(sol.pi_levels, phase_values(static_cast<int>(phases)));
  return sol;
}

double total_variation(const EquilibriumSolution& a, const EquilibriumSolution& b) {
  if (a.phase_cap != b.phase_cap) {
    throw InvalidConfig("total variation needs solutions with the same phase cap");
  }
  const std::size_t levels = std::max(a.pi_levels.size(), b.pi_levels.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < levels; ++k) {
    if (k < a.pi_levels.size() && k < b.pi_levels.size()) {
      sum += (a.pi_levels[k] - b.pi_levels[k]).cwiseAbs().sum();
    } else if (k < a.pi_levels.size()) {
      sum += a.pi_levels[k].cwiseAbs().sum();
    } else {
      sum += b.pi_levels[k].cwiseAbs().sum();
    }
  }
  sum += std::abs(a.tail_mass - b.tail_mass);
  return 0.5 * sum;
}

ConditionalProfiles conditional_profiles(const EquilibriumSolution& sol, double mass_cutoff) {
  ConditionalProfiles out;
  for (Eigen::Index i = 0; i < sol.phase_marginal.size(); ++i) {
    const double mass = sol.phase_marginal(i);
    if (mass >= mass_cutoff) {
      out.nc_given_ns.emplace_back(static_cast<int>(i), sol.phase_level_moment(i) / mass);
    }
  }
  if (sol.pi_levels.empty()) return out;
  const VectorXd s = phase_values(static_cast<int>(sol.pi_levels.front().size()));
  for (std::size_t k = 0; k < sol.pi_levels.size(); ++k) {
    const double mass = sol.pi_levels[k].sum();
    if (mass >= mass_cutoff) {
      out.ns_given_nc.emplace_back(static_cast<int>(k), sol.pi_levels[k].dot(s) / mass);
    }
  }
  return out;
}

}  // namespace p2pq::qbd
