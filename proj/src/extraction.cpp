#include "ptk/extraction.hpp"

#include "ptk/reduction.hpp"

#include <cmath>

namespace ptk {

namespace {

double spectral_abscissa(const std::vector<Complex>& eigs) {
  double a = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigs) a = std::max(a, z.real());
  return a;
}

}  // namespace

FeedbackLaw exact_feedback(const StateSpaceSystem& sys, const Matrix& X_minus, Supply supply) {
  FeedbackLaw law;
  law.supply = supply;
  law.kind = FeedbackLaw::Kind::Exact;
  if (supply == Supply::Passive) {
    const Matrix R = sys.D + sys.D.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(R));
    if (es.eigenvalues()(0) <= 1e-10) {
      throw std::runtime_error("exact_feedback: D + D^T singular; use epsilon_feedback");
    }
    law.K = -R.inverse() * (sys.C - sys.B.transpose() * X_minus);
  } else {
    const Matrix R = Matrix::Identity(sys.inputs(), sys.inputs()) - sys.D.transpose() * sys.D;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(R));
    if (es.eigenvalues()(0) <= 1e-10) {
      throw std::runtime_error("exact_feedback: I - D^T D singular; use epsilon_feedback");
    }
    law.K = R.inverse() * (sys.D.transpose() * sys.C + sys.B.transpose() * X_minus);
  }
  const Matrix Acl = sys.A + sys.B * law.K;
  law.closed_loop_spectrum = eigenvalues_of(Acl);
  const double tol = 1e-9 * (1.0 + Acl.norm());
  if (spectral_abscissa(law.closed_loop_spectrum) >= -tol) {
    // Non-decaying modes are admissible only on ker X_: then x^T X x still
    // converges and the extracted energy reaches the supremum.
    auto os = ordered_schur(Acl, SpectralRegion::closed_right(1e-8));
    if (os.in_region_count > 0) {
      const Matrix basis = os.basis.leftCols(os.in_region_count);
      if ((X_minus * basis).norm() > 1e-7 * (1.0 + X_minus.norm())) {
        throw std::runtime_error(
            "exact_feedback: marginal closed-loop spectrum outside ker X_; use epsilon_feedback");
      }
    }
  }
  return law;
}

StateSpaceSystem epsilon_transform(const StateSpaceSystem& sys, double eps, Supply supply) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("epsilon_transform: eps must be in (0,1)");
  }
  if (supply == Supply::Gain) {
    return StateSpaceSystem(sys.A, sys.B, (1.0 - eps) * sys.C, (1.0 - eps) * sys.D,
                            sys.label + ":eps");
  }
  if (sys.inputs() != sys.outputs()) {
    throw std::invalid_argument("epsilon_transform: passive supply requires m = n");
  }
  const int n = sys.inputs();
  const Matrix IeD = Matrix::Identity(n, n) + eps * sys.D;
  Eigen::FullPivLU<Matrix> lu(IeD);
  if (!lu.isInvertible()) {
    throw std::runtime_error("epsilon_transform: I + eps D singular");
  }
  const Matrix M = lu.inverse();
  const double s = std::sqrt(1.0 + eps * eps);
  StateSpaceSystem out(sys.A - eps * sys.B * M * sys.C, s * sys.B * M,
                       ((1.0 - eps * eps) / s) * M * sys.C,
                       (sys.D + eps * Matrix::Identity(n, n)) * M, sys.label + ":eps");
  // H_eps = (H + eps I)(I + eps H)^{-1} at sample points.
  for (double sp : {0.7, 1.3, 2.9}) {
    Complex z(sp, 0.3);
    bool fine = true;
    ComplexMatrix H, He;
    try {
      H = transfer_eval(sys, z);
      He = transfer_eval(out, z);
    } catch (const std::exception&) {
      fine = false;
    }
    if (!fine) continue;
    const ComplexMatrix expect =
        (H + eps * ComplexMatrix::Identity(n, n)) *
        (ComplexMatrix::Identity(n, n) + eps * H).inverse();
    if ((He - expect).norm() > 1e-8 * (1.0 + expect.norm())) {
      throw std::runtime_error("epsilon_transform: transfer law verification failed");
    }
  }
  return out;
}

EpsilonFeedbackResult epsilon_feedback(const StateSpaceSystem& sys, double eps, Supply supply) {
  auto obs = observer_staircase(sys);
  StateSpaceSystem part = obs.retained(sys);
  StateSpaceSystem esys = epsilon_transform(part, eps, supply);
  auto res = solve_min_are(esys, supply);
  if (!res.ok) {
    throw std::runtime_error("epsilon_feedback: ARE failed at eps=" + std::to_string(eps) +
                             " (" + res.failure + "); try a smaller eps");
  }
  const int r = obs.retained_dim;
  const int d = sys.states();
  Matrix Kpart;
  if (supply == Supply::Passive) {
    const Matrix Re = esys.D + esys.D.transpose();
    const Matrix Keps = -Re.inverse() * (esys.C - esys.B.transpose() * res.X);
    const int n = sys.inputs();
    const Matrix M = (Matrix::Identity(n, n) + eps * part.D).inverse();
    // u = (I + eps D)^{-1} (sqrt(1+eps^2) u_eps - eps C x)
    Kpart = M * (std::sqrt(1.0 + eps * eps) * Keps - eps * part.C);
  } else {
    const Matrix Re =
        Matrix::Identity(esys.inputs(), esys.inputs()) - esys.D.transpose() * esys.D;
    Kpart = Re.inverse() * (esys.D.transpose() * esys.C + esys.B.transpose() * res.X);
  }
  EpsilonFeedbackResult out;
  Matrix Kfull = Matrix::Zero(Kpart.rows(), d);
  Kfull.leftCols(r) = Kpart;
  out.law.K = Kfull * obs.T;
  out.law.kind = FeedbackLaw::Kind::Epsilon;
  out.law.epsilon = eps;
  out.law.supply = supply;
  out.law.closed_loop_spectrum = eigenvalues_of(sys.A + sys.B * out.law.K);
  Matrix Xe = Matrix::Zero(d, d);
  Xe.topLeftCorner(r, r) = res.X;
  out.X_eps = symmetrize(obs.T.transpose() * Xe * obs.T);
  return out;
}

namespace {

double simpson_total(const std::vector<double>& g, double h) {
  const size_t N = g.size() - 1;
  double total = 0.0;
  size_t k = 0;
  for (; k + 2 <= N; k += 2) total += h / 3.0 * (g[k] + 4.0 * g[k + 1] + g[k + 2]);
  if (k < N) total += h / 2.0 * (g[k] + g[k + 1]);  // odd tail
  return total;
}

}  // namespace

ExtractionRun simulate_extraction(const StateSpaceSystem& sys, const FeedbackLaw& law,
                                  const Vector& x0, double horizon, double step,
                                  std::optional<double> target) {
  if (step <= 0.0) throw std::invalid_argument("simulate_extraction: step must be positive");
  ExtractionRun run;
  run.x0 = x0;
  run.horizon = horizon;
  const Matrix Acl = sys.A + sys.B * law.K;
  Trajectory traj = integrate_linear_ode(Acl, x0, horizon, step);
  run.step = traj.step;
  run.times = traj.times;
  run.states = traj.states;
  const size_t N = traj.states.size();
  run.inputs.resize(N);
  run.outputs.resize(N);
  std::vector<double> g(N);
  for (size_t k = 0; k < N; ++k) {
    run.inputs[k] = law.K * traj.states[k];
    run.outputs[k] = sys.C * traj.states[k] + sys.D * run.inputs[k];
    g[k] = law.supply == Supply::Passive
               ? -run.inputs[k].dot(run.outputs[k])
               : run.outputs[k].squaredNorm() - run.inputs[k].squaredNorm();
  }
  run.cumulative_energy.resize(N, 0.0);
  for (size_t k = 2; k < N; k += 2) {
    run.cumulative_energy[k] = run.cumulative_energy[k - 2] +
                               run.step / 3.0 * (g[k - 2] + 4.0 * g[k - 1] + g[k]);
    run.cumulative_energy[k - 1] =
        run.cumulative_energy[k - 2] + run.step / 2.0 * (g[k - 2] + g[k - 1]);
  }
  run.extracted_energy = simpson_total(g, run.step);
  if (target) {
    run.target = *target;
  } else {
    auto ae = available_energy(sys, law.supply);
    if (ae.ok) {
      run.target = ae.storage.value(x0);
    } else {
      auto chain = law.supply == Supply::Passive ? run_chain_passive(sys) : run_chain_gain(sys);
      if (!chain.ok) {
        throw std::runtime_error("simulate_extraction: could not compute the target S_a(x0)");
      }
      run.target = chain.storage.value(x0);
    }
  }
  return run;
}

double energy_identity_check(const StateSpaceSystem& sys, const Matrix& X,
                             const ExtractionRun& run, Supply supply) {
  const size_t N = run.states.size();
  if (N < 3) throw std::invalid_argument("energy_identity_check: run too short");
  const Matrix lmi = supply == Supply::Passive ? omega(sys, X) : lambda_lmi(sys, X);
  std::vector<double> supply_term(N), quad_term(N);
  for (size_t k = 0; k < N; ++k) {
    const Vector& x = run.states[k];
    const Vector& u = run.inputs[k];
    const Vector& y = run.outputs[k];
    Vector xu(x.size() + u.size());
    xu << x, u;
    quad_term[k] = xu.dot(lmi * xu);
    supply_term[k] = supply == Supply::Passive ? 2.0 * u.dot(y) : u.squaredNorm() - y.squaredNorm();
  }
  const double lhs_int = simpson_total(supply_term, run.step);
  const double boundary = run.states.back().dot(X * run.states.back()) -
                          run.states.front().dot(X * run.states.front());
  const double rhs_int = simpson_total(quad_term, run.step);
  return std::abs(lhs_int - boundary - rhs_int);
}

EpsilonSweep epsilon_sweep(const StateSpaceSystem& sys, Supply supply) {
  EpsilonSweep out;
  Matrix prev;
  for (int k = 0; k <= 12; ++k) {
    const double eps = 0.2 * std::pow(2.0, -k);
    Matrix Xe;
    try {
      Xe = epsilon_feedback(sys, eps, supply).X_eps;
    } catch (const std::exception&) {
      continue;
    }
    out.epsilons.push_back(eps);
    out.X_eps.push_back(Xe);
    if (prev.size() > 0 && (Xe - prev).norm() < 1e-6) break;
    prev = Xe;
  }
  if (out.X_eps.empty()) throw std::runtime_error("epsilon_sweep: no eps succeeded");
  const size_t n = out.X_eps.size();
  if (n < 3) {
    out.extrapolated = out.X_eps.back();
    return out;
  }
  // Quadratic extrapolation in s = sqrt(eps) to s = 0 using the three
  // smallest values (X^eps - X_ behaves like c1 s + c2 s^2 for lossless
  // limits and like c s^2 in the regular case).
  const double s0 = std::sqrt(out.epsilons[n - 3]);
  const double s1 = std::sqrt(out.epsilons[n - 2]);
  const double s2 = std::sqrt(out.epsilons[n - 1]);
  const double l0 = (0 - s1) * (0 - s2) / ((s0 - s1) * (s0 - s2));
  const double l1 = (0 - s0) * (0 - s2) / ((s1 - s0) * (s1 - s2));
  const double l2 = (0 - s0) * (0 - s1) / ((s2 - s0) * (s2 - s1));
  out.extrapolated = l0 * out.X_eps[n - 3] + l1 * out.X_eps[n - 2] + l2 * out.X_eps[n - 1];
  return out;
}

}  // namespace ptk
