#include <doctest.h>

#include <cmath>
#include <random>

#include "trmfem/catalog.hpp"
#include "trmfem/interfaces.hpp"

using namespace trmfem;

namespace {

const Catalog& cat = Catalog::builtin();

// closed-form envelope, written independently of the implementation
double envelope_oracle(const BondLaw& law, double s) {
  if (s <= 0.0) return 0.0;
  double tau;
  if (s <= law.s1)
    tau = law.tau_max * std::pow(s / law.s1, law.alpha);
  else if (s <= law.s2)
    tau = law.tau_max;
  else if (s < law.s3)
    tau = law.tau_max + (law.tau_f - law.tau_max) * (s - law.s2) / (law.s3 - law.s2);
  else
    tau = law.tau_f;
  return std::min(tau, law.tangential_stiffness * s);
}

}  // namespace

TEST_CASE("bond law: table values on the C8 twisted line law") {
  const BondLaw law = cat.bond("line-twisted");
  CHECK(bond_traction(law, 0.1, {}).traction == doctest::Approx(3.30));
  CHECK(bond_traction(law, 0.05, {}).traction ==
        doctest::Approx(3.30 * std::pow(0.5, 0.4)).epsilon(1e-12));
  CHECK(bond_traction(law, 0.05, {}).traction == doctest::Approx(2.5015).epsilon(1e-3));
  CHECK(bond_traction(law, 0.65, {}).traction == doctest::Approx(2.75).epsilon(1e-12));
  CHECK(bond_traction(law, 0.0, {}).traction == 0.0);
  CHECK(bond_traction(law, 2.0, {}).traction == doctest::Approx(2.20));
}

TEST_CASE("bond law: envelope matches the closed form at 50 probe slips") {
  for (const auto& label : cat.bond_labels()) {
    const BondLaw law = cat.bond(label);
    for (int i = 0; i < 50; ++i) {
      const double s = law.s3 * 1.4 * (i + 0.5) / 50.0;
      const BondResult r = bond_traction(law, s, {});
      CHECK(std::abs(r.traction - envelope_oracle(law, s)) < 1e-9);
      // signed symmetry
      CHECK(std::abs(bond_traction(law, -s, {}).traction + envelope_oracle(law, s)) <
            1e-9);
    }
  }
}

TEST_CASE("bond law: envelope is continuous at every segment joint") {
  for (const auto& label : cat.bond_labels()) {
    const BondLaw law = cat.bond(label);
    for (double joint : {law.s1, law.s2, law.s3}) {
      const double lo = bond_traction(law, joint * (1.0 - 1e-10), {}).traction;
      const double hi = bond_traction(law, joint * (1.0 + 1e-10), {}).traction;
      CHECK(std::abs(hi - lo) < 1e-9 * std::max(1.0, law.tau_max));
    }
  }
}

TEST_CASE("bond law: initial tangent is capped at k_t") {
  const BondLaw law = cat.bond("line-twisted");
  const BondResult r0 = bond_traction(law, 0.0, {});
  CHECK(r0.tangent == doctest::Approx(law.tangential_stiffness));
  // within the capped region the response is linear at k_t
  const double s_tiny = 1e-5;
  CHECK(bond_traction(law, s_tiny, {}).traction ==
        doctest::Approx(law.tangential_stiffness * s_tiny).epsilon(1e-12));
}

TEST_CASE("bond law: secant unloading and reloading, irreversible max slip") {
  const BondLaw law = cat.bond("line-twisted");
  InterfaceState s;
  const BondResult peak = bond_traction(law, 0.5, s);
  s = peak.state;
  CHECK(s.max_slip == doctest::Approx(0.5));

  const BondResult half = bond_traction(law, 0.25, s);
  CHECK(half.traction == doctest::Approx(0.5 * peak.traction).epsilon(1e-12));
  s = half.state;
  CHECK(s.max_slip == doctest::Approx(0.5));

  // reversal: traction follows the slip sign through the origin
  const BondResult rev = bond_traction(law, -0.25, s);
  CHECK(rev.traction == doctest::Approx(-0.5 * peak.traction).epsilon(1e-12));
}

TEST_CASE("bond law: three load-unload cycles never dissipate negative work") {
  for (const auto& label : cat.bond_labels()) {
    const BondLaw law = cat.bond(label);
    InterfaceState s;
    double last = 0.0;
    const double a = law.s3;
    const double cycle[] = {0.3 * a, 0.05 * a, 0.6 * a, -0.2 * a, 1.1 * a, 0.0};
    for (double target : cycle) {
      double from = s.slip;
      for (int i = 1; i <= 40; ++i) {
        const double slip = from + (target - from) * i / 40.0;
        s = bond_traction(law, slip, s).state;
        CHECK(s.dissipated >= last - 1e-10);
        last = s.dissipated;
      }
    }
  }
}

TEST_CASE("point interface: intersection strengths and release") {
  PointInterfaceElement e;
  e.id = 0;
  e.node_pair = {0, 1};
  e.plane_normal = Vec3::UnitZ();

  e.law = cat.bond("point-parallel");
  const PointInterfaceResult at_s1 =
      point_interface_force(e, {Vec3(0.5, 0, 0), Vec3(0, 0, 0)}, {});
  CHECK(at_s1.f.segment<3>(0).norm() == doctest::Approx(550.0));  // K = 0.55 kN

  const PointInterfaceResult zero = point_interface_force(e, {Vec3::Zero(), Vec3::Zero()}, {});
  CHECK(zero.f.norm() == 0.0);

  e.law = cat.bond("point-twisted");
  const PointInterfaceResult released =
      point_interface_force(e, {Vec3(10.0, 0, 0), Vec3(0, 0, 0)}, {});
  CHECK(released.f.norm() == doctest::Approx(0.0).epsilon(1e-9));

  // out-of-plane relative motion is free (k_n = 0 for intersections)
  const PointInterfaceResult normal =
      point_interface_force(e, {Vec3(0, 0, 0.3), Vec3(0, 0, 0)}, {});
  CHECK(normal.f.norm() == doctest::Approx(0.0));
}

TEST_CASE("line interface: slip resultant and normal penalty") {
  std::vector<Node> nodes = {{0, Vec3(0, 0, 0)},
                             {1, Vec3(16.5, 0, 0)},
                             {2, Vec3(0, 0, 0)},
                             {3, Vec3(16.5, 0, 0)}};
  LineInterfaceElement e;
  e.id = 0;
  e.truss_node_ids = {0, 1};
  e.solid_node_ids = {2, 3};
  e.law = cat.bond("line-parallel");
  e.perimeter = cat.line_perimeter("line-parallel");

  // uniform slip 0.1 mm = s_1: force = tau_max * p * L = 2.00 * 18.00 * 16.5
  std::array<Vec3, 4> u = {Vec3(0.1, 0, 0), Vec3(0.1, 0, 0), Vec3::Zero(), Vec3::Zero()};
  const LineInterfaceResult r = line_interface_forces(e, nodes, u, {});
  const double truss_axial = r.f[0] + r.f[3];
  CHECK(truss_axial == doctest::Approx(594.0).epsilon(1e-9));

  // zero relative displacement: zero forces
  std::array<Vec3, 4> moving = {Vec3(1, 2, 3), Vec3(1, 2, 3), Vec3(1, 2, 3),
                                Vec3(1, 2, 3)};
  CHECK(line_interface_forces(e, nodes, moving, {}).f.norm() == doctest::Approx(0.0));

  // pure normal offset: k_n * delta * (p * L), no tangential force
  const double dn = 0.01;
  std::array<Vec3, 4> off = {Vec3(0, dn, 0), Vec3(0, dn, 0), Vec3::Zero(), Vec3::Zero()};
  const LineInterfaceResult rn = line_interface_forces(e, nodes, off, {});
  CHECK(rn.f[1] + rn.f[4] ==
        doctest::Approx(e.law.normal_stiffness * dn * e.perimeter * 16.5).epsilon(1e-9));
  CHECK(std::abs(rn.f[0] + rn.f[3]) < 1e-12);
}

TEST_CASE("surface interface: shear resultant, residual, normal penalty") {
  std::vector<Node> nodes;
  for (int side = 0; side < 2; ++side) {
    nodes.push_back({4 * side + 0, Vec3(0, 0, 0)});
    nodes.push_back({4 * side + 1, Vec3(16.5, 0, 0)});
    nodes.push_back({4 * side + 2, Vec3(16.5, 16.5, 0)});
    nodes.push_back({4 * side + 3, Vec3(0, 16.5, 0)});
  }
  SurfaceInterfaceElement e;
  e.id = 0;
  e.mortar_node_ids = {0, 1, 2, 3};
  e.masonry_node_ids = {4, 5, 6, 7};
  e.law = cat.bond("surface");

  std::array<Vec3, 8> u{};
  for (int a = 0; a < 4; ++a) u[a] = Vec3(0.04, 0, 0);  // slip s_1 over the face
  std::array<InterfaceState, 4> s0{};
  const SurfaceInterfaceResult r = surface_interface_forces(e, nodes, u, s0);
  double shear = 0.0;
  for (int a = 0; a < 4; ++a) shear += r.f[3 * a + 0];
  CHECK(shear == doctest::Approx(1.18 * 16.5 * 16.5).epsilon(1e-9));

  // beyond s_3 the traction falls to the residual 0.02 MPa
  for (int a = 0; a < 4; ++a) u[a] = Vec3(0.2, 0, 0);
  const SurfaceInterfaceResult rr = surface_interface_forces(e, nodes, u, s0);
  double shear_res = 0.0;
  for (int a = 0; a < 4; ++a) shear_res += rr.f[3 * a + 0];
  CHECK(shear_res == doctest::Approx(0.02 * 16.5 * 16.5).epsilon(1e-9));

  // normal separation engages the 1e4 penalty
  for (int a = 0; a < 4; ++a) u[a] = Vec3(0, 0, 0.001);
  const SurfaceInterfaceResult rz = surface_interface_forces(e, nodes, u, s0);
  double normal = 0.0;
  for (int a = 0; a < 4; ++a) normal += rz.f[3 * a + 2];
  CHECK(normal == doctest::Approx(1e4 * 0.001 * 16.5 * 16.5).epsilon(1e-9));
}

TEST_CASE("interfaces: action-reaction and zero moment for arbitrary displacements") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  auto rv = [&]() { return Vec3(d(rng), d(rng), d(rng)); };

  std::vector<Node> nodes = {{0, Vec3(0, 0, 0)}, {1, Vec3(16.5, 0, 0)},
                             {2, Vec3(0, 0, 0)}, {3, Vec3(16.5, 0, 0)}};
  LineInterfaceElement le;
  le.id = 0;
  le.truss_node_ids = {0, 1};
  le.solid_node_ids = {2, 3};
  le.law = cat.bond("line-twisted");
  le.perimeter = 9.57;

  for (int trial = 0; trial < 50; ++trial) {
    std::array<Vec3, 4> u = {rv(), rv(), rv(), rv()};
    const LineInterfaceResult r = line_interface_forces(le, nodes, u, {});
    Vec3 sum = Vec3::Zero(), moment = Vec3::Zero();
    const Vec3 centroid(8.25, 0, 0);
    const int ids[4] = {0, 1, 2, 3};
    for (int a = 0; a < 4; ++a) {
      const Vec3 f = r.f.segment<3>(3 * a);
      sum += f;
      moment += (nodes[ids[a]].coords - centroid).cross(f);
    }
    CHECK(sum.norm() < 1e-9);
    CHECK(moment.norm() < 1e-9);
  }

  PointInterfaceElement pe;
  pe.id = 0;
  pe.node_pair = {0, 1};
  pe.law = cat.bond("point-twisted");
  pe.plane_normal = Vec3::UnitZ();
  for (int trial = 0; trial < 50; ++trial) {
    std::array<Vec3, 2> u = {rv(), rv()};
    const PointInterfaceResult r = point_interface_force(pe, u, {});
    CHECK((r.f.segment<3>(0) + r.f.segment<3>(3)).norm() < 1e-9);
  }
}

TEST_CASE("friction point: Coulomb cap, compression-only normal") {
  FrictionPointElement e;
  e.id = 0;
  e.node_pair = {0, 1};
  e.params = {1.0e4, 0.30, 1.0e-4};
  e.contact_normal = Vec3(0, 0, -1);  // closing when the wall moves toward -z

  // normal force 1000 N: gap = 0.1 mm of closure
  const double gap = 1000.0 / 1.0e4;
  {
    // large tangential motion: capacity = mu * N = 300 N
    std::array<Vec3, 2> u = {Vec3(5.0, 0, -gap), Vec3::Zero()};
    const FrictionPointResult r = friction_point_force(e, u, {});
    CHECK(r.normal_force == doctest::Approx(1000.0));
    const double tangential = std::hypot(r.f[0], r.f[1]);
    CHECK(tangential == doctest::Approx(300.0).epsilon(1e-9));
  }
  {
    // doubled friction coefficient -> 600 N
    FrictionPointElement e2 = e;
    e2.params.friction_coefficient = 0.60;
    std::array<Vec3, 2> u = {Vec3(5.0, 0, -gap), Vec3::Zero()};
    CHECK(std::hypot(friction_point_force(e2, u, {}).f[0],
                     friction_point_force(e2, u, {}).f[1]) ==
          doctest::Approx(600.0).epsilon(1e-9));
  }
  {
    // zero normal force: zero tangential capacity
    std::array<Vec3, 2> u = {Vec3(5.0, 0, 0), Vec3::Zero()};
    const FrictionPointResult r = friction_point_force(e, u, {});
    CHECK(std::hypot(r.f[0], r.f[1]) == doctest::Approx(0.0));
  }
  {
    // opening: only the small regularizing stiffness acts
    std::array<Vec3, 2> u = {Vec3(0, 0, +0.1), Vec3::Zero()};
    const FrictionPointResult r = friction_point_force(e, u, {});
    CHECK(r.normal_force == 0.0);
    CHECK(std::abs(r.f[2]) <= 1.0e-4 * 1.0e4 * 0.1 + 1e-12);
  }

  // property: |tangential| never exceeds mu*N (plus slack) for random motions
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  FrictionState state;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<Vec3, 2> u = {Vec3(d(rng), d(rng), d(rng)), Vec3::Zero()};
    const FrictionPointResult r = friction_point_force(e, u, state);
    state = r.state;
    const double cap = 0.30 * r.normal_force;
    CHECK(std::hypot(r.f[0], r.f[1]) <= cap + 1e-9 * std::max(1.0, r.normal_force));
  }
}

TEST_CASE("ablated laws keep the normal penalty only") {
  BondLaw law = cat.bond("surface");
  law.tangential_disabled = true;
  CHECK(bond_traction(law, 0.05, {}).traction == 0.0);
  CHECK(bond_traction(law, 0.05, {}).tangent == 0.0);
  CHECK(law.normal_stiffness == doctest::Approx(1e4));
}

TEST_CASE("bond law validation") {
  BondLaw law = cat.bond("line-twisted");
  law.s1 = 0.0;
  CHECK_THROWS_AS(law.validate("law"), ValidationError);
  law = cat.bond("line-twisted");
  law.tau_f = law.tau_max * 2.0;
  CHECK_THROWS_AS(law.validate("law"), ValidationError);
}
