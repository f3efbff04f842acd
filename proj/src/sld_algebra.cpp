// Copyright 2026 The superres Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "superres/sld_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "superres/errors.hpp"

namespace superres {
namespace {

using Complex = std::complex<double>;

double block_scale(const BlockDecomposition& d1, const BlockDecomposition& d2) {
  const double s = std::max({max_abs(d1.a), max_abs(d1.b), max_abs(d2.a),
                             max_abs(d2.b), 1.0});
  return s * s;
}

Matrix2 commutator(const Matrix2& x, const Matrix2& y) { return x * y - y * x; }

Matrix2 symmetric_from(double v0, double v1, double v3) {
  Matrix2 m;
  m << v0 + v3, v1, v1, v0 - v3;
  return m;
}

}  // namespace

BlockDecomposition decompose_blocks(const Matrix4& l) {
  if (!is_symmetric(l)) throw ShapeError("SLD matrix is not symmetric");
  return {l.topLeftCorner<2, 2>(), l.topRightCorner<2, 2>(),
          l.bottomRightCorner<2, 2>()};
}

Matrix4 reassemble(const BlockDecomposition& d) {
  Matrix4 l;
  l.topLeftCorner<2, 2>() = d.a;
  l.topRightCorner<2, 2>() = d.b;
  l.bottomLeftCorner<2, 2>() = d.b.transpose();
  l.bottomRightCorner<2, 2>() = d.k;
  return l;
}

Matrix4 assemble_sld(const BlockDecomposition& d, const Matrix2& k) {
  if (std::abs(k(0, 1) - k(1, 0)) > 1e-14 * std::max(max_abs(k), 1e-300))
    throw ShapeError("kernel block is not symmetric");
  BlockDecomposition out = d;
  out.k = k;
  return reassemble(out);
}

// ---------------------------------------------------------------------------
// Pauli expansion

PauliVector PauliVector::from_hermitian(const Eigen::Matrix2cd& x) {
  const double scale = x.cwiseAbs().maxCoeff();
  if ((x - x.adjoint()).cwiseAbs().maxCoeff() > 1e-14 * scale)
    throw ShapeError("matrix is not Hermitian");
  // v_a = tr(sigma_a X) / 2
  PauliVector p;
  p.v[0] = 0.5 * (x(0, 0) + x(1, 1)).real();
  p.v[1] = 0.5 * (x(0, 1) + x(1, 0)).real();
  p.v[2] = 0.5 * (Complex(0.0, -1.0) * x(1, 0) + Complex(0.0, 1.0) * x(0, 1)).real();
  p.v[3] = 0.5 * (x(0, 0) - x(1, 1)).real();
  return p;
}

PauliVector PauliVector::from_symmetric(const Matrix2& x) {
  return from_hermitian(x.cast<Complex>());
}

Eigen::Matrix2cd PauliVector::to_hermitian() const {
  Eigen::Matrix2cd m;
  m << Complex(v[0] + v[3], 0.0), Complex(v[1], -v[2]),
      Complex(v[1], v[2]), Complex(v[0] - v[3], 0.0);
  return m;
}

Matrix2 PauliVector::to_symmetric() const {
  if (v[2] != 0.0)
    throw ShapeError("sigma_2 component makes the matrix complex");
  return symmetric_from(v[0], v[1], v[3]);
}

// ---------------------------------------------------------------------------
// Commutation conditions

double necessary_condition_residual(const BlockDecomposition& d1,
                                    const BlockDecomposition& d2) {
  const Matrix2 lhs = commutator(d1.a, d2.a);
  const Matrix2 rhs = d2.b * d1.b.transpose() - d1.b * d2.b.transpose();
  return max_abs(lhs - rhs);
}

ConditionResiduals condition_residuals(const BlockDecomposition& d1,
                                       const BlockDecomposition& d2,
                                       const Matrix2& k1, const Matrix2& k2) {
  ConditionResiduals r;
  r.c0 = necessary_condition_residual(d1, d2);

  const Matrix2 m1 =
      (d1.b * k2 - d2.b * k1) - (d2.a * d1.b - d1.a * d2.b);
  r.c1_components = {m1(0, 0), m1(0, 1), m1(1, 0), m1(1, 1)};
  r.c1 = max_abs(m1);

  const Matrix2 m2 = commutator(k1, k2) -
                     (d2.b.transpose() * d1.b - d1.b.transpose() * d2.b);
  r.c2_components = {0.5 * (m2(0, 1) + m2(1, 0)),
                     0.5 * std::abs(m2(0, 1) - m2(1, 0)),
                     0.5 * (m2(0, 0) - m2(1, 1))};
  r.c2 = max_abs(m2);
  return r;
}

const char* gauge_source_name(GaugeSource s) noexcept {
  return s == GaugeSource::kClosedForm ? "closed_form" : "least_norm";
}

// ---------------------------------------------------------------------------
// Least-norm solver

namespace {

// Unknowns: Pauli coefficients (v0, v1, v3) of K1 then of K2; v2 is zero for
// real symmetric blocks. When the K1 trace is pinned, v0(K1) is dropped.
class GaugeSystem {
 public:
  GaugeSystem(const BlockDecomposition& d1, const BlockDecomposition& d2,
              std::optional<double> k1_trace)
      : d1_(d1), d2_(d2), pinned_(k1_trace) {}

  int unknowns() const { return pinned_ ? 5 : 6; }

  std::pair<Matrix2, Matrix2> blocks(const Eigen::VectorXd& x) const {
    int i = 0;
    const double a0 = pinned_ ? *pinned_ : x(i++);
    const double a1 = x(i++);
    const double a3 = x(i++);
    const double b0 = x(i++);
    const double b1 = x(i++);
    const double b3 = x(i++);
    return {symmetric_from(a0, a1, a3), symmetric_from(b0, b1, b3)};
  }

  // Four (C1) entries followed by the single independent (C2) entry.
  Eigen::Matrix<double, 5, 1> residual(const Eigen::VectorXd& x) const {
    const auto [k1, k2] = blocks(x);
    const Matrix2 m1 =
        (d1_.b * k2 - d2_.b * k1) - (d2_.a * d1_.b - d1_.a * d2_.b);
    const Matrix2 m2 = commutator(k1, k2) -
                       (d2_.b.transpose() * d1_.b - d1_.b.transpose() * d2_.b);
    Eigen::Matrix<double, 5, 1> f;
    f << m1(0, 0), m1(0, 1), m1(1, 0), m1(1, 1), m2(0, 1);
    return f;
  }

  // The residual is at most quadratic in x, so a unit central difference is
  // the exact derivative.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd j(5, unknowns());
    for (int c = 0; c < unknowns(); ++c) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(unknowns());
      e(c) = 1.0;
      j.col(c) = 0.5 * (residual(x + e) - residual(x - e));
    }
    return j;
  }

 private:
  const BlockDecomposition& d1_;
  const BlockDecomposition& d2_;
  std::optional<double> pinned_;
};

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& b) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-12);
  return cod.solve(b);
}

struct NewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
};

NewtonResult newton_least_norm(const GaugeSystem& sys, double scale) {
  const int n = sys.unknowns();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

  // Least-norm solution of the linear (C1) rows.
  const Eigen::MatrixXd j0 = sys.jacobian(x);
  const Eigen::Matrix<double, 5, 1> f0 = sys.residual(x);
  x = -min_norm_solve(j0.topRows(4), f0.head(4));

  NewtonResult out;
  for (int it = 0; it < 100; ++it) {
    const Eigen::Matrix<double, 5, 1> f = sys.residual(x);
    if (f.cwiseAbs().maxCoeff() <= 1e-15 * scale) break;
    const Eigen::VectorXd step = min_norm_solve(sys.jacobian(x), f);
    x -= step;
    out.iterations = it + 1;
    if (step.cwiseAbs().maxCoeff() <= 1e-16 * (1.0 + x.cwiseAbs().maxCoeff()))
      break;
  }
  out.x = x;
  return out;
}

}  // namespace

GaugePair solve_gauge_least_norm(const BlockDecomposition& d1,
                                 const BlockDecomposition& d2,
                                 std::optional<double> k1_trace) {
  const double scale = block_scale(d1, d2);
  const double c0 = necessary_condition_residual(d1, d2);
  if (c0 > kGaugeResidualTolerance * scale) {
    std::ostringstream msg;
    msg << "necessary condition (C0) fails: residual " << c0
        << "; no commuting SLD pair exists";
    throw NoSolution(msg.str());
  }

  const double pinned = k1_trace.value_or(0.0);
  double worst = 0.0;
  for (const auto trace : {std::optional<double>(pinned), std::optional<double>()}) {
    const GaugeSystem sys(d1, d2, trace);
    const NewtonResult res = newton_least_norm(sys, scale);
    const auto [k1, k2] = sys.blocks(res.x);
    GaugePair pair{k1, k2, GaugeSource::kLeastNorm,
                   condition_residuals(d1, d2, k1, k2), res.iterations};
    const double r = std::max(pair.residuals.c1, pair.residuals.c2);
    if (r <= kGaugeResidualTolerance * scale) return pair;
    worst = r;
  }
  std::ostringstream msg;
  msg << "least-norm gauge solver did not converge: (C1)/(C2) residual "
      << worst;
  throw NoSolution(msg.str());
}

// ---------------------------------------------------------------------------
// Closed form

GaugePair closed_form_gauge(const OverlapSet& ov) {
  const double d = ov.delta;
  const double g = ov.gamma;
  if (std::abs(d) >= 1.0 - kSingularDeltaMargin)
    throw SingularBasis("closed-form gauge: delta too close to 1");
  if (std::abs(g) <= 1e-12)
    throw DomainError("closed-form gauge divides by gamma, which is ~0");

  const double w = 1.0 - d * d;
  PauliVector p1;
  p1.v = {2.0 * g / w - 2.0 * ov.kappa / g, 0.0, 0.0, -2.0 * d * g / w};
  PauliVector p2;
  p2.v = {0.0, ov.eta3 * ov.eta4 / g, 0.0, (1.0 + d * d) * g / w};

  const auto [l1, l2] = canonical_slds(ov);
  const BlockDecomposition d1 = decompose_blocks(l1);
  const BlockDecomposition d2 = decompose_blocks(l2);
  GaugePair pair{p1.to_symmetric(), p2.to_symmetric(), GaugeSource::kClosedForm,
                 {}, 0};
  pair.residuals = condition_residuals(d1, d2, pair.k1, pair.k2);

  const Matrix4 l1p = assemble_sld(d1, pair.k1);
  const Matrix4 l2p = assemble_sld(d2, pair.k2);
  const double comm = max_abs(Matrix4(l1p * l2p - l2p * l1p));
  if (comm > 1e-10 * block_scale(d1, d2)) {
    std::ostringstream msg;
    msg << "closed-form gauge does not commute: ||[L1', L2']||_max = " << comm;
    throw GaugeInvalid(msg.str(), comm);
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Simultaneous diagonalization

JointBasis joint_eigenbasis(const Matrix4& l1p, const Matrix4& l2p,
                            double tol) {
  const double scale = std::max(max_abs(l1p), max_abs(l2p));
  const double comm = max_abs(Matrix4(l1p * l2p - l2p * l1p));
  if (comm > tol * scale) {
    std::ostringstream msg;
    msg << "operators do not commute: ||[L1, L2]||_max = " << comm;
    throw NotCommuting(msg.str());
  }

  const Matrix4 mixed = l1p + kMixingWeight * l2p;
  Eigen::SelfAdjointEigenSolver<Matrix4> es(mixed);
  Matrix4 v = es.eigenvectors();
  const Eigen::Vector4d w = es.eigenvalues();

  // Re-diagonalize L2 inside clusters of (near-)degenerate mixed eigenvalues.
  const double gap = kDegeneracyGap * std::max(scale, 1.0);
  for (int start = 0; start < 4;) {
    int end = start + 1;
    while (end < 4 && w(end) - w(end - 1) < gap) ++end;
    const int size = end - start;
    if (size > 1) {
      const Eigen::MatrixXd u = v.middleCols(start, size);
      const Eigen::MatrixXd sub = u.transpose() * l2p * u;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(sub);
      v.middleCols(start, size) = u * inner.eigenvectors();
    }
    start = end;
  }

  const Matrix4 t1 = v.transpose() * l1p * v;
  const Matrix4 t2 = v.transpose() * l2p * v;
  const double off1 = max_abs(Matrix4(t1 - Matrix4(t1.diagonal().asDiagonal())));
  const double off2 = max_abs(Matrix4(t2 - Matrix4(t2.diagonal().asDiagonal())));
  if (std::max(off1, off2) > tol * std::max(scale, 1.0)) {
    std::ostringstream msg;
    msg << "joint basis leaves off-diagonal residual " << std::max(off1, off2);
    throw DegeneracyUnresolved(msg.str());
  }

  // Descending L1 eigenvalue, ties by descending L2 (insertion sort keeps the
  // tolerance-based comparison well defined).
  std::array<int, 4> order{0, 1, 2, 3};
  auto before = [&](int a, int b) {
    if (std::abs(t1(a, a) - t1(b, b)) > gap) return t1(a, a) > t1(b, b);
    return t2(a, a) > t2(b, b);
  };
  for (int i = 1; i < 4; ++i) {
    for (int j = i; j > 0 && before(order[j], order[j - 1]); --j)
      std::swap(order[j], order[j - 1]);
  }

  JointBasis basis;
  for (int j = 0; j < 4; ++j) {
    const int src = order[j];
    Eigen::Vector4d col = v.col(src);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0) col = -col;
    basis.vectors.col(j) = col;
    basis.eigenvalues[j] = {t1(src, src), t2(src, src)};
  }
  return basis;
}

double joint_basis_wavefunction(const JointBasis& basis, const PsfSpec& psf,
                                const SceneParams& scene, int j, double x) {
  if (j < 1 || j > 4) throw InvalidArgument("basis index must be in 1..4");
  const EBasis e(psf, scene);
  double v = 0.0;
  for (int k = 1; k <= 4; ++k) v += basis.vectors(k - 1, j - 1) * e.value(k, x);
  return v;
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

nlohmann::json matrix_json(const Matrix2& m) {
  return nlohmann::json::array(
      {nlohmann::json::array({m(0, 0), m(0, 1)}),
       nlohmann::json::array({m(1, 0), m(1, 1)})});
}

nlohmann::json blocks_json(const BlockDecomposition& d) {
  return {{"A", matrix_json(d.a)}, {"B", matrix_json(d.b)}, {"K", matrix_json(d.k)}};
}

}  // namespace

std::string gauge_diagnostics_json(const QuantumModel& model) {
  const BlockDecomposition d1 = decompose_blocks(model.l1);
  const BlockDecomposition d2 = decompose_blocks(model.l2);

  nlohmann::json out;
  out["theta1"] = model.scene.theta1();
  out["theta2"] = model.scene.theta2();
  out["overlaps"] = {{"delta", model.overlaps.delta}, {"kappa", model.overlaps.kappa},
                     {"gamma", model.overlaps.gamma}, {"beta", model.overlaps.beta},
                     {"eta3", model.overlaps.eta3},   {"eta4", model.overlaps.eta4}};
  out["canonical"] = {{"L1", blocks_json(d1)}, {"L2", blocks_json(d2)}};
  out["c0_residual"] = necessary_condition_residual(d1, d2);

  nlohmann::json solvers = nlohmann::json::array();
  for (const GaugeSource source : {GaugeSource::kClosedForm, GaugeSource::kLeastNorm}) {
    nlohmann::json entry;
    entry["solver"] = gauge_source_name(source);
    try {
      const GaugePair pair = source == GaugeSource::kClosedForm
                                 ? closed_form_gauge(model.overlaps)
                                 : solve_gauge_least_norm(d1, d2);
      const Matrix4 l1p = assemble_sld(d1, pair.k1);
      const Matrix4 l2p = assemble_sld(d2, pair.k2);
      entry["status"] = "ok";
      entry["K1_pauli"] = PauliVector::from_symmetric(pair.k1).v;
      entry["K2_pauli"] = PauliVector::from_symmetric(pair.k2).v;
      entry["c1_components"] = pair.residuals.c1_components;
      entry["c2_components"] = pair.residuals.c2_components;
      entry["c1_residual"] = pair.residuals.c1;
      entry["c2_residual"] = pair.residuals.c2;
      entry["iterations"] = pair.iterations;
      entry["commutator_norm"] = max_abs(Matrix4(l1p * l2p - l2p * l1p));
      const JointBasis basis = joint_eigenbasis(l1p, l2p);
      nlohmann::json eig = nlohmann::json::array();
      for (const EigenPair& e : basis.eigenvalues)
        eig.push_back(nlohmann::json::array({e.l1, e.l2}));
      entry["eigenvalues"] = eig;
      nlohmann::json cols = nlohmann::json::array();
      for (int j = 0; j < 4; ++j)
        cols.push_back({basis.vectors(0, j), basis.vectors(1, j),
                        basis.vectors(2, j), basis.vectors(3, j)});
      entry["phi"] = cols;
    } catch (const Error& e) {
      entry["status"] = "no_solution";
      entry["error"] = error_code_name(e.code());
      entry["message"] = e.what();
    }
    solvers.push_back(entry);
  }
  out["solvers"] = solvers;
  return out.dump(2);
}

}  // namespace superres
