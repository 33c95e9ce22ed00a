#include "trmfem/interfaces.hpp"

#include <algorithm>
#include <cmath>

#include "trmfem/materials.hpp"

namespace trmfem {

void BondLaw::validate(const std::string& path) const {
  if (!(s1 > 0.0 && s1 <= s2 && s2 <= s3))
    throw ValidationError(path, "requires 0 < s1 <= s2 <= s3");
  if (!(tau_f >= 0.0 && tau_f <= tau_max))
    throw ValidationError(path, "requires 0 <= tau_f <= tau_max");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ValidationError(path + ".alpha", "must be in (0, 1]");
  if (!(tangential_stiffness > 0.0))
    throw ValidationError(path + ".tangential_stiffness", "must be > 0");
}

double BondLaw::envelope(double s) const {
  if (tangential_disabled || s <= 0.0) return 0.0;
  double tau;
  if (s <= s1)
    tau = tau_max * std::pow(s / s1, alpha);
  else if (s <= s2)
    tau = tau_max;
  else if (s < s3)
    tau = tau_max + (tau_f - tau_max) * (s - s2) / (s3 - s2);
  else
    tau = tau_f;
  // cap the ascending branch at the initial stiffness k_t
  return std::min(tau, tangential_stiffness * s);
}

BondResult bond_traction(const BondLaw& law, double slip, const InterfaceState& s0) {
  if (!std::isfinite(slip)) throw Error("bond_traction: non-finite slip");
  BondResult r;
  r.state = s0;
  if (law.tangential_disabled) {
    r.state.slip = slip;
    r.state.traction = 0.0;
    return r;
  }

  const double s_abs = std::abs(slip);
  const double s_max = std::max(s0.max_slip, s_abs);
  r.state.max_slip = s_max;

  if (s_abs >= s_max - 1e-16 && s_abs > 0.0) {
    // on the envelope
    r.traction = std::copysign(law.envelope(s_abs), slip);
    const double d = 1e-9 * std::max(s_abs, law.s1);
    r.tangent = (law.envelope(s_abs + d) - law.envelope(std::max(s_abs - d, 0.0))) /
                (s_abs + d - std::max(s_abs - d, 0.0));
  } else {
    const double k_sec = s_max > 0.0 ? law.envelope(s_max) / s_max
                                     : law.tangential_stiffness;
    r.traction = k_sec * slip;
    r.tangent = k_sec;
  }
  if (s_abs == 0.0) r.tangent = law.tangential_stiffness;

  r.state.dissipated +=
      dissipation_increment_1d(s0.slip, s0.traction, slip, r.traction);
  r.state.slip = slip;
  r.state.traction = r.traction;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// 3x3 tangential/normal split operators for a unit axis t.
inline Mat3 axial_projector(const Vec3& t) { return t * t.transpose(); }

struct TangentialLaw {
  Vec3 force = Vec3::Zero();
  Mat3 stiffness = Mat3::Zero();
  InterfaceState state;
};

// Shared evaluation for point/surface laws that act on an in-plane relative
// displacement vector: traction along the instantaneous slip direction with
// magnitude from the envelope; isotropic secant stiffness off-axis.
TangentialLaw planar_bond(const BondLaw& law, const Vec3& rel_inplane, const Mat3& P,
                          const InterfaceState& s0, TangentMode mode) {
  TangentialLaw out;
  const double s = rel_inplane.norm();
  const BondResult b = bond_traction(law, s, s0);
  out.state = b.state;
  if (law.tangential_disabled) return out;
  if (s > 1e-14) {
    const Vec3 dir = rel_inplane / s;
    out.force = b.traction * dir;
    const double k_sec = b.traction / s;
    const double k_dir = mode == TangentMode::Consistent ? b.tangent : k_sec;
    out.stiffness = k_dir * dir * dir.transpose() +
                    k_sec * (P - dir * dir.transpose());
  } else {
    out.stiffness = law.tangential_stiffness * P;
  }
  return out;
}

}  // namespace

LineInterfaceResult line_interface_forces(const LineInterfaceElement& e,
                                          const std::vector<Node>& nodes,
                                          const std::array<Vec3, 4>& u,
                                          const std::array<InterfaceState, 2>& s0,
                                          TangentMode mode) {
  LineInterfaceResult r;
  const Vec3 x0 = nodes[e.solid_node_ids[0]].coords;
  const Vec3 x1 = nodes[e.solid_node_ids[1]].coords;
  const double L = (x1 - x0).norm();
  if (!(L > 0.0)) throw Error("line interface " + std::to_string(e.id) + ": zero length");
  const Vec3 t = (x1 - x0) / L;
  const Mat3 T = axial_projector(t);
  const Mat3 Nrm = Mat3::Identity() - T;

  const QuadratureRule rule = line_quadrature_2();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double xi = rule.points[q].local[0];
    const double N[2] = {0.5 * (1.0 - xi), 0.5 * (1.0 + xi)};
    const Vec3 rel = N[0] * (u[0] - u[2]) + N[1] * (u[1] - u[3]);
    const double slip = t.dot(rel);

    const BondResult b = bond_traction(e.law, slip, s0[q]);
    r.states[q] = b.state;

    const double jw = 0.5 * L * rule.points[q].weight;
    const double pr = e.perimeter;
    double kt = b.tangent;
    if (mode != TangentMode::Consistent)
      kt = std::abs(slip) > 1e-14 ? b.traction / slip
                                  : (e.law.tangential_disabled
                                         ? 0.0
                                         : e.law.tangential_stiffness);
    // force per unit length on the truss side
    const Vec3 F = pr * (b.traction * t + e.law.normal_stiffness * (Nrm * rel));
    const Mat3 C = pr * (kt * T + e.law.normal_stiffness * Nrm);

    const double sgn[4] = {+1.0, +1.0, -1.0, -1.0};
    const double Na[4] = {N[0], N[1], N[0], N[1]};
    for (int a = 0; a < 4; ++a) {
      r.f.segment<3>(3 * a) += sgn[a] * Na[a] * jw * F;
      for (int bnode = 0; bnode < 4; ++bnode)
        r.K.block<3, 3>(3 * a, 3 * bnode) += sgn[a] * sgn[bnode] * Na[a] * Na[bnode] * jw * C;
    }
  }
  return r;
}

PointInterfaceResult point_interface_force(const PointInterfaceElement& e,
                                           const std::array<Vec3, 2>& u,
                                           const InterfaceState& s0,
                                           TangentMode mode) {
  PointInterfaceResult r;
  const Vec3 nu = e.plane_normal.normalized();
  const Mat3 P = Mat3::Identity() - nu * nu.transpose();
  const Vec3 rel = u[0] - u[1];

  const TangentialLaw tl = planar_bond(e.law, P * rel, P, s0, mode);
  r.state = tl.state;

  const Vec3 F = tl.force + e.law.normal_stiffness * nu.dot(rel) * nu;
  const Mat3 C = tl.stiffness + e.law.normal_stiffness * nu * nu.transpose();

  r.f.segment<3>(0) = F;
  r.f.segment<3>(3) = -F;
  r.K.block<3, 3>(0, 0) = C;
  r.K.block<3, 3>(3, 3) = C;
  r.K.block<3, 3>(0, 3) = -C;
  r.K.block<3, 3>(3, 0) = -C;
  return r;
}

SurfaceInterfaceResult surface_interface_forces(const SurfaceInterfaceElement& e,
                                                const std::vector<Node>& nodes,
                                                const std::array<Vec3, 8>& u,
                                                const std::array<InterfaceState, 4>& s0,
                                                TangentMode mode) {
  SurfaceInterfaceResult r;
  const QuadratureRule rule = quad_quadrature_2x2();

  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double xi = rule.points[q].local[0];
    const double eta = rule.points[q].local[1];
    const double N[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                         0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
    const double dNxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta),
                            -0.25 * (1 + eta)};
    const double dNeta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi),
                             0.25 * (1 - xi)};

    Vec3 g1 = Vec3::Zero(), g2 = Vec3::Zero();
    for (int a = 0; a < 4; ++a) {
      const Vec3& X = nodes[e.masonry_node_ids[a]].coords;
      g1 += dNxi[a] * X;
      g2 += dNeta[a] * X;
    }
    const Vec3 cross = g1.cross(g2);
    const double dA = cross.norm();
    if (!(dA > 0.0))
      throw Error("surface interface " + std::to_string(e.id) + ": degenerate face");
    const Vec3 nu = cross / dA;
    const Mat3 P = Mat3::Identity() - nu * nu.transpose();

    Vec3 rel = Vec3::Zero();
    for (int a = 0; a < 4; ++a) rel += N[a] * (u[a] - u[4 + a]);

    const TangentialLaw tl = planar_bond(e.law, P * rel, P, s0[q], mode);
    r.states[q] = tl.state;

    const double jw = dA * rule.points[q].weight;
    const Vec3 F = tl.force + e.law.normal_stiffness * nu.dot(rel) * nu;
    const Mat3 C = tl.stiffness + e.law.normal_stiffness * nu * nu.transpose();

    for (int a = 0; a < 8; ++a) {
      const double sa = a < 4 ? 1.0 : -1.0;
      const double Na = N[a % 4];
      r.f.segment<3>(3 * a) += sa * Na * jw * F;
      for (int b = 0; b < 8; ++b) {
        const double sb = b < 4 ? 1.0 : -1.0;
        r.K.block<3, 3>(3 * a, 3 * b) += sa * sb * Na * N[b % 4] * jw * C;
      }
    }
  }
  return r;
}

FrictionPointResult friction_point_force(const FrictionPointElement& e,
                                         const std::array<Vec3, 2>& u,
                                         const FrictionState& s0) {
  FrictionPointResult r;
  r.state = s0;
  const Vec3 nu = e.contact_normal.normalized();
  const Mat3 P = Mat3::Identity() - nu * nu.transpose();
  const double kn = e.params.normal_stiffness;
  const Vec3 rel = u[0] - u[1];

  const double gap = nu.dot(rel);  // positive = closing
  const bool closed = gap > 0.0;
  const double k_eff = closed ? kn : e.params.open_stiffness_factor * kn;
  const double N = closed ? kn * gap : 0.0;
  r.normal_force = N;

  Vec3 F = k_eff * gap * nu;
  Mat3 C = k_eff * nu * nu.transpose();

  const Vec3 trial_e = P * (rel - s0.plastic_slip);
  const Vec3 T_trial = kn * trial_e;
  const double cap = e.params.friction_coefficient * N;
  if (!closed || cap <= 0.0) {
    // no tangential capacity: slide freely, keep a small regularizing stiffness
    r.state.plastic_slip = P * rel;
    C += e.params.open_stiffness_factor * kn * P;
  } else if (T_trial.norm() <= cap) {
    F += T_trial;
    C += kn * P;
  } else {
    const double en = trial_e.norm();
    const Vec3 dir = trial_e / en;
    const Vec3 T = cap * dir;
    F += T;
    r.state.plastic_slip = s0.plastic_slip + (en - cap / kn) * dir;
    r.state.dissipated += cap * (en - cap / kn);
    // consistent with the radial return: T = mu*N(u)*dir(e(u))
    C += e.params.friction_coefficient * dir * (kn * nu).transpose() +
         cap / en * (P - dir * dir.transpose());
  }

  r.f.segment<3>(0) = F;
  r.f.segment<3>(3) = -F;
  r.K.block<3, 3>(0, 0) = C;
  r.K.block<3, 3>(3, 3) = C;
  r.K.block<3, 3>(0, 3) = -C;
  r.K.block<3, 3>(3, 0) = -C;
  return r;
}

}  // namespace trmfem
