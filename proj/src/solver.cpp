#include "trmfem/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace trmfem {

void ConvergenceConfig::validate(const std::string& path) const {
  if (!(rel_force_norm > 0.0) || !(rel_disp_norm > 0.0))
    throw ValidationError(path, "convergence norms must be > 0");
  if (max_iterations < 1) throw ValidationError(path + ".max_iterations", "must be >= 1");
  if (max_bisections < 0) throw ValidationError(path + ".max_bisections", "must be >= 0");
}

ModelStates ModelStates::sized_for(const Model& model) {
  ModelStates s;
  s.hex.resize(model.hexes.size());
  s.truss.resize(model.trusses.size());
  s.line.resize(model.line_interfaces.size());
  s.point.resize(model.point_interfaces.size());
  s.surface.resize(model.surface_interfaces.size());
  s.friction.resize(model.friction_points.size());
  return s;
}

FieldSnapshot snapshot_fields(const Model& model, const ModelStates& states) {
  FieldSnapshot f;
  f.hex_tensile_damage.resize(model.hexes.size(), 0.0);
  f.hex_compressive_kappa.resize(model.hexes.size(), 0.0);
  f.hex_dissipated.resize(model.hexes.size(), 0.0);
  for (std::size_t i = 0; i < model.hexes.size(); ++i) {
    for (const auto& q : states.hex[i]) {
      f.hex_tensile_damage[i] = std::max(f.hex_tensile_damage[i], q.d_t);
      f.hex_compressive_kappa[i] = std::max(f.hex_compressive_kappa[i], q.kappa_c);
      f.hex_dissipated[i] += q.dissipated / 8.0;
    }
  }
  f.truss_stress.resize(model.trusses.size(), 0.0);
  for (std::size_t i = 0; i < model.trusses.size(); ++i)
    f.truss_stress[i] = states.truss[i].stress;
  f.line_slip.resize(model.line_interfaces.size(), 0.0);
  for (std::size_t i = 0; i < model.line_interfaces.size(); ++i)
    for (const auto& q : states.line[i])
      f.line_slip[i] = std::max(f.line_slip[i], std::abs(q.slip));
  f.point_slip.resize(model.point_interfaces.size(), 0.0);
  for (std::size_t i = 0; i < model.point_interfaces.size(); ++i)
    f.point_slip[i] = std::abs(states.point[i].slip);
  f.surface_slip.resize(model.surface_interfaces.size(), 0.0);
  for (std::size_t i = 0; i < model.surface_interfaces.size(); ++i)
    for (const auto& q : states.surface[i])
      f.surface_slip[i] = std::max(f.surface_slip[i], std::abs(q.slip));
  return f;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace {

inline Vec3 node_disp(const Eigen::VectorXd& u, int node) {
  return Vec3(u[3 * node + 0], u[3 * node + 1], u[3 * node + 2]);
}

struct TripletSink {
  std::vector<Eigen::Triplet<double>> triplets;
  void add(int gi, int gj, double v) {
    if (v != 0.0) triplets.emplace_back(gi, gj, v);
  }
  template <int N>
  void add_block(const std::array<int, N>& nodes,
                 const Eigen::Matrix<double, 3 * N, 3 * N>& K) {
    for (int a = 0; a < N; ++a)
      for (int i = 0; i < 3; ++i)
        for (int b = 0; b < N; ++b)
          for (int j = 0; j < 3; ++j)
            add(3 * nodes[a] + i, 3 * nodes[b] + j, K(3 * a + i, 3 * b + j));
  }
};

}  // namespace

AssembledSystem assemble(const Model& model, const Eigen::VectorXd& u,
                         const ModelStates& committed, TangentMode mode) {
  const int n = model.dof_count();
  AssembledSystem out;
  out.internal_force = Eigen::VectorXd::Zero(n);
  out.trial_states = committed;
  TripletSink K;

  const QuadratureRule hex_rule = hex_quadrature_2x2x2();

  for (std::size_t ei = 0; ei < model.hexes.size(); ++ei) {
    const HexElement& e = model.hexes[ei];
    const Material& mat = model.materials.at(e.material_id);

    Eigen::Matrix<double, 24, 1> ue;
    for (int a = 0; a < 8; ++a) ue.segment<3>(3 * a) = node_disp(u, e.node_ids[a]);

    Eigen::Matrix<double, 24, 1> fe = Eigen::Matrix<double, 24, 1>::Zero();
    Eigen::Matrix<double, 24, 24> Ke = Eigen::Matrix<double, 24, 24>::Zero();

    double h = 0.0;
    if (mat.kind == Material::Kind::Bulk) h = characteristic_length(e, model.nodes);

    for (std::size_t q = 0; q < hex_rule.points.size(); ++q) {
      const HexBMatrix bm = hex_b_matrix(e, model.nodes, hex_rule.points[q].local);
      const double jw = bm.det_jacobian * hex_rule.points[q].weight;
      const Vec6 strain = bm.B * ue;

      Vec6 stress;
      Mat6 D;
      if (mat.kind == Material::Kind::Bulk) {
        try {
          BulkResult r = bulk_update(mat.bulk, strain, h, committed.hex[ei][q], mode);
          stress = r.stress;
          D = r.tangent;
          out.trial_states.hex[ei][q] = r.state;
        } catch (const Error& err) {
          throw MaterialFailureError(e.id, static_cast<int>(q), err.what());
        }
      } else {
        D = isotropic_elasticity(mat.elastic.young_modulus, mat.elastic.poisson);
        stress = D * strain;
      }
      fe += bm.B.transpose() * stress * jw;
      Ke += bm.B.transpose() * D * bm.B * jw;
    }

    std::array<int, 8> dofs;
    for (int a = 0; a < 8; ++a) dofs[a] = e.node_ids[a];
    for (int a = 0; a < 8; ++a)
      out.internal_force.segment<3>(3 * e.node_ids[a]) += fe.segment<3>(3 * a);
    K.add_block<8>(dofs, Ke);
  }

  for (std::size_t ei = 0; ei < model.trusses.size(); ++ei) {
    const TrussElement& e = model.trusses[ei];
    const Material& mat = model.materials.at(e.material_id);
    const Vec3 d = model.nodes[e.node_ids[1]].coords - model.nodes[e.node_ids[0]].coords;
    const double L = d.norm();
    const Vec3 t = d / L;
    const double strain = truss_axial_strain(e, model.nodes, node_disp(u, e.node_ids[0]),
                                             node_disp(u, e.node_ids[1]));

    double stress, Et;
    if (mat.kind == Material::Kind::Yarn) {
      YarnResult r = yarn_update(mat.yarn, strain, committed.truss[ei]);
      stress = r.stress;
      if (mode == TangentMode::Consistent)
        Et = r.tangent;
      else if (mode == TangentMode::Secant)
        Et = strain > 1e-16 ? r.stress / strain : mat.yarn.elastic.young_modulus;
      else
        Et = mat.yarn.elastic.young_modulus;
      out.trial_states.truss[ei] = r.state;
    } else {
      stress = mat.elastic.young_modulus * strain;
      Et = mat.elastic.young_modulus;
    }

    const Vec3 f = stress * e.area * t;
    out.internal_force.segment<3>(3 * e.node_ids[0]) -= f;
    out.internal_force.segment<3>(3 * e.node_ids[1]) += f;

    const Mat3 kb = (Et * e.area / L) * t * t.transpose();
    Eigen::Matrix<double, 6, 6> Ke;
    Ke.block<3, 3>(0, 0) = kb;
    Ke.block<3, 3>(3, 3) = kb;
    Ke.block<3, 3>(0, 3) = -kb;
    Ke.block<3, 3>(3, 0) = -kb;
    K.add_block<2>({e.node_ids[0], e.node_ids[1]}, Ke);
  }

  for (std::size_t ei = 0; ei < model.line_interfaces.size(); ++ei) {
    const LineInterfaceElement& e = model.line_interfaces[ei];
    std::array<Vec3, 4> ue = {node_disp(u, e.truss_node_ids[0]),
                              node_disp(u, e.truss_node_ids[1]),
                              node_disp(u, e.solid_node_ids[0]),
                              node_disp(u, e.solid_node_ids[1])};
    LineInterfaceResult r =
        line_interface_forces(e, model.nodes, ue, committed.line[ei], mode);
    out.trial_states.line[ei] = r.states;
    const std::array<int, 4> dofs = {e.truss_node_ids[0], e.truss_node_ids[1],
                                     e.solid_node_ids[0], e.solid_node_ids[1]};
    for (int a = 0; a < 4; ++a)
      out.internal_force.segment<3>(3 * dofs[a]) += r.f.segment<3>(3 * a);
    K.add_block<4>(dofs, r.K);
  }

  for (std::size_t ei = 0; ei < model.point_interfaces.size(); ++ei) {
    const PointInterfaceElement& e = model.point_interfaces[ei];
    std::array<Vec3, 2> ue = {node_disp(u, e.node_pair[0]), node_disp(u, e.node_pair[1])};
    PointInterfaceResult r = point_interface_force(e, ue, committed.point[ei], mode);
    out.trial_states.point[ei] = r.state;
    const std::array<int, 2> dofs = {e.node_pair[0], e.node_pair[1]};
    for (int a = 0; a < 2; ++a)
      out.internal_force.segment<3>(3 * dofs[a]) += r.f.segment<3>(3 * a);
    K.add_block<2>(dofs, r.K);
  }

  for (std::size_t ei = 0; ei < model.surface_interfaces.size(); ++ei) {
    const SurfaceInterfaceElement& e = model.surface_interfaces[ei];
    std::array<Vec3, 8> ue;
    for (int a = 0; a < 4; ++a) {
      ue[a] = node_disp(u, e.mortar_node_ids[a]);
      ue[4 + a] = node_disp(u, e.masonry_node_ids[a]);
    }
    SurfaceInterfaceResult r =
        surface_interface_forces(e, model.nodes, ue, committed.surface[ei], mode);
    out.trial_states.surface[ei] = r.states;
    std::array<int, 8> dofs;
    for (int a = 0; a < 4; ++a) {
      dofs[a] = e.mortar_node_ids[a];
      dofs[4 + a] = e.masonry_node_ids[a];
    }
    for (int a = 0; a < 8; ++a)
      out.internal_force.segment<3>(3 * dofs[a]) += r.f.segment<3>(3 * a);
    K.add_block<8>(dofs, r.K);
  }

  for (std::size_t ei = 0; ei < model.friction_points.size(); ++ei) {
    const FrictionPointElement& e = model.friction_points[ei];
    std::array<Vec3, 2> ue = {node_disp(u, e.node_pair[0]), node_disp(u, e.node_pair[1])};
    FrictionPointResult r = friction_point_force(e, ue, committed.friction[ei]);
    out.trial_states.friction[ei] = r.state;
    const std::array<int, 2> dofs = {e.node_pair[0], e.node_pair[1]};
    for (int a = 0; a < 2; ++a)
      out.internal_force.segment<3>(3 * dofs[a]) += r.f.segment<3>(3 * a);
    K.add_block<2>(dofs, r.K);
  }

  out.tangent.resize(n, n);
  out.tangent.setFromTriplets(K.triplets.begin(), K.triplets.end());
  return out;
}

Eigen::VectorXd assemble_gravity(const Model& model, const Vec3& direction) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(model.dof_count());
  const QuadratureRule rule = hex_quadrature_2x2x2();
  for (const auto& e : model.hexes) {
    const double gamma = model.materials[e.material_id].self_weight();
    if (gamma <= 0.0) continue;
    const Vec3 bf = gamma * kSelfWeightToForceDensity * direction;  // N/mm^3
    for (const auto& qp : rule.points) {
      const HexShape shape = hex_shape(qp.local);
      const double jw = hex_b_matrix(e, model.nodes, qp.local).det_jacobian * qp.weight;
      for (int a = 0; a < 8; ++a)
        f.segment<3>(3 * e.node_ids[a]) += shape.values[a] * bf * jw;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Staged solution
// ---------------------------------------------------------------------------

namespace {

struct DofPartition {
  std::vector<int> full_to_free;  // -1 when constrained
  std::vector<int> free_to_full;
  int n_free = 0;

  Eigen::VectorXd restrict_free(const Eigen::VectorXd& full) const {
    Eigen::VectorXd r(n_free);
    for (int i = 0; i < n_free; ++i) r[i] = full[free_to_full[i]];
    return r;
  }
};

DofPartition make_partition(const Model& model, const std::vector<PrescribedDof>& pres) {
  DofPartition p;
  const int n = model.dof_count();
  p.full_to_free.assign(n, 0);
  for (const auto& f : model.fixed_dofs) p.full_to_free[3 * f.node + f.dof] = -1;
  for (const auto& f : pres) {
    const int g = 3 * f.node + f.dof;
    if (p.full_to_free[g] == -1)
      throw ValidationError("stage.prescribed",
                            "dof is both fixed and prescribed (node " +
                                std::to_string(f.node) + ")");
    p.full_to_free[g] = -1;
  }
  for (int g = 0; g < n; ++g) {
    if (p.full_to_free[g] == 0) {
      p.full_to_free[g] = p.n_free;
      p.free_to_full.push_back(g);
      ++p.n_free;
    }
  }
  return p;
}

Eigen::SparseMatrix<double> reduce_matrix(const Eigen::SparseMatrix<double>& K,
                                          const DofPartition& p) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(K.nonZeros());
  for (int col = 0; col < K.outerSize(); ++col) {
    const int jc = p.full_to_free[col];
    if (jc < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const int ir = p.full_to_free[it.row()];
      if (ir >= 0) t.emplace_back(ir, jc, it.value());
    }
  }
  Eigen::SparseMatrix<double> R(p.n_free, p.n_free);
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

struct StageContext {
  const Model* model = nullptr;
  const ConvergenceConfig* config = nullptr;
  const LoadStage* stage = nullptr;
  DofPartition partition;
  Eigen::VectorXd f_ext_base;    // from completed stages
  Eigen::VectorXd f_stage;       // this stage's load (scaled by the ramp parameter)
  Eigen::VectorXd load_pattern;  // deflection-control pattern, unit resultant
  std::vector<double> prescribed_start;
  double control_start = 0.0;
  double force_scale = 0.0;  // largest equilibrium force level seen this stage
};

struct PassResult {
  bool converged = false;
  int iterations = 0;
  ModelStates states;
  Eigen::VectorXd internal_force;  // at the converged displacement
};

void apply_prescribed(const StageContext& ctx, Eigen::VectorXd& u, double tau) {
  const LoadStage& s = *ctx.stage;
  for (std::size_t i = 0; i < s.prescribed.size(); ++i) {
    const auto& p = s.prescribed[i];
    u[3 * p.node + p.dof] = ctx.prescribed_start[i] + tau * s.target * p.scale;
  }
}

// One equilibrium pass at ramp parameter tau. The Newton pass uses the
// consistent tangent; the fallback pass uses the damaged-secant operator,
// which stays positive on softening branches.
PassResult iterate(StageContext& ctx, Eigen::VectorXd& u, double& lambda,
                   const ModelStates& committed, double tau, TangentMode mode,
                   int max_iter) {
  const Model& model = *ctx.model;
  const ConvergenceConfig& cfg = *ctx.config;
  const DofPartition& part = ctx.partition;
  PassResult res;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool pattern_analyzed = false;

  const bool defl = ctx.stage->deflection_control;
  const double control_target = ctx.control_start + tau * ctx.stage->target;

  double last_correction = std::numeric_limits<double>::infinity();
  double first_residual = 0.0;
  double prev_residual = std::numeric_limits<double>::infinity();
  double prev2_residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd last_du;
  double last_dlambda = 0.0;
  int backtracks = 0;
  double disp_ref = 0.0;
  for (std::size_t i = 0; i < ctx.stage->prescribed.size(); ++i) {
    const auto& p = ctx.stage->prescribed[i];
    const double du = u[3 * p.node + p.dof] - ctx.prescribed_start[i];
    disp_ref += du * du;
  }
  disp_ref = std::sqrt(disp_ref);
  const Eigen::VectorXd u_at_entry = u;

  for (int iter = 0; iter <= max_iter; ++iter) {
    AssembledSystem sys;
    try {
      sys = assemble(model, u, committed, mode);
    } catch (const Error&) {
      return res;  // caller bisects
    }
    if (!sys.internal_force.allFinite()) return res;

    Eigen::VectorXd f_ext = ctx.f_ext_base + tau * ctx.f_stage;
    if (defl) f_ext += lambda * ctx.load_pattern;

    const Eigen::VectorXd r = part.restrict_free(f_ext - sys.internal_force);

    if (iter == 0) first_residual = r.norm();

    // backtrack when a step grew the residual or fell into a period-2 cycle
    const bool grew = r.norm() > 1.2 * prev_residual;
    const bool cycling = std::isfinite(prev2_residual) &&
                         std::abs(r.norm() - prev2_residual) < 0.02 * r.norm() &&
                         r.norm() > 1.5 * prev_residual;
    if (iter > 0 && (grew || cycling) && backtracks < 60 &&
        last_du.size() == part.n_free) {
      for (int i = 0; i < part.n_free; ++i) u[part.free_to_full[i]] -= 0.5 * last_du[i];
      last_du *= 0.5;
      lambda -= 0.5 * last_dlambda;
      last_dlambda *= 0.5;
      ++backtracks;
      --iter;
      continue;
    }
    prev2_residual = prev_residual;
    prev_residual = r.norm();

    const double force_ref = std::max(
        {ctx.force_scale, part.restrict_free(f_ext).norm(), first_residual, 1e-6});
    const bool force_ok = r.norm() <= cfg.rel_force_norm * force_ref;
    const double disp_scale = std::max({disp_ref, (u - u_at_entry).norm(), 1e-12});
    // a vanishing residual implies the next correction vanishes too
    const bool disp_ok = last_correction <= cfg.rel_disp_norm * disp_scale ||
                         r.norm() <= 0.01 * cfg.rel_force_norm * force_ref;
    if (std::getenv("TRMFEM_TRACE"))
      std::fprintf(stderr, "    it=%d r=%.3e ref=%.3e du=%.3e secant=%d\n", iter,
                   r.norm(), force_ref, last_correction,
                   mode == TangentMode::Secant ? 1 : 0);
    if (iter > 0 && force_ok && disp_ok) {
      res.converged = true;
      res.iterations = iter;
      ctx.force_scale = std::max(ctx.force_scale, (sys.internal_force - f_ext).norm());
      res.states = std::move(sys.trial_states);
      res.internal_force = std::move(sys.internal_force);
      return res;
    }
    if (iter == max_iter) return res;

    Eigen::VectorXd du_free, dp_free;
    if (part.n_free == 0) {
      last_correction = 0.0;
      continue;
    }
    Eigen::SparseMatrix<double> Kff = reduce_matrix(sys.tangent, part);
    if (!pattern_analyzed) {
      lu.analyzePattern(Kff);
      pattern_analyzed = true;
    }
    lu.factorize(Kff);
    if (lu.info() != Eigen::Success) return res;  // singular: bisect or fall back
    du_free = lu.solve(r);
    if (defl) dp_free = lu.solve(part.restrict_free(ctx.load_pattern));
    if (!du_free.allFinite()) return res;
    if (defl && !dp_free.allFinite()) return res;

    if (defl) {
      double c_dot_du = 0.0, c_dot_dp = 0.0;
      const double c_now = ctx.stage->control.evaluate(u);
      for (const auto& t : ctx.stage->control.terms) {
        const int g = part.full_to_free[3 * t.node + t.dof];
        if (g >= 0) {
          c_dot_du += t.coeff * du_free[g];
          c_dot_dp += t.coeff * dp_free[g];
        }
      }
      if (std::abs(c_dot_dp) < 1e-30) return res;
      const double dlambda = (control_target - c_now - c_dot_du) / c_dot_dp;
      du_free += dlambda * dp_free;
      lambda += dlambda;
      last_dlambda = dlambda;
    } else {
      last_dlambda = 0.0;
    }

    for (int i = 0; i < part.n_free; ++i) u[part.free_to_full[i]] += du_free[i];
    last_correction = du_free.norm();
    last_du = std::move(du_free);
  }
  return res;
}

}  // namespace

SolutionHistory run_staged_analysis(const Model& model, const AnalysisSetup& setup,
                                    const ConvergenceConfig& config) {
  config.validate("convergence");
  SolutionHistory history;
  ModelStates committed = ModelStates::sized_for(model);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(model.dof_count());
  Eigen::VectorXd f_ext_base = Eigen::VectorXd::Zero(model.dof_count());
  double lambda = 0.0;

  for (std::size_t si = 0; si < setup.stages.size(); ++si) {
    const LoadStage& stage = setup.stages[si];
    const bool is_ramp = stage.kind == LoadStage::Kind::DisplacementRamp;
    if (is_ramp) history.ramp_stage_index = static_cast<int>(si);

    StageContext ctx;
    ctx.model = &model;
    ctx.config = &config;
    ctx.stage = &stage;
    ctx.partition = make_partition(model, stage.prescribed);
    ctx.f_ext_base = f_ext_base;
    ctx.f_stage = Eigen::VectorXd::Zero(model.dof_count());
    ctx.load_pattern = Eigen::VectorXd::Zero(model.dof_count());

    if (stage.kind == LoadStage::Kind::ConstantForces) {
      for (const auto& f : stage.forces) ctx.f_stage[3 * f.node + f.dof] += f.value;
    } else if (stage.kind == LoadStage::Kind::Gravity) {
      ctx.f_stage = assemble_gravity(model, stage.gravity_direction.normalized());
    }
    if (stage.deflection_control) {
      double resultant = 0.0;
      for (const auto& f : stage.load_pattern) resultant += std::abs(f.value);
      if (!(resultant > 0.0))
        throw ValidationError("stage.load_pattern", "empty load pattern");
      for (const auto& f : stage.load_pattern)
        ctx.load_pattern[3 * f.node + f.dof] += f.value / resultant;
      ctx.control_start = stage.control.evaluate(u);
    }
    ctx.prescribed_start.resize(stage.prescribed.size());
    for (std::size_t i = 0; i < stage.prescribed.size(); ++i) {
      const auto& p = stage.prescribed[i];
      ctx.prescribed_start[i] = u[3 * p.node + p.dof];
    }

    double running_peak = 0.0;
    bool post_peak = false;
    bool stage_done = false;
    double tau = 0.0;

    auto record = [&](double tau_now, const PassResult& pass) {
      Increment rec;
      rec.stage = static_cast<int>(si);
      rec.u = u;
      rec.newton_iterations = pass.iterations;
      rec.fields = snapshot_fields(model, committed);

      Eigen::VectorXd f_ext = ctx.f_ext_base + tau_now * ctx.f_stage;
      if (stage.deflection_control) f_ext += lambda * ctx.load_pattern;
      const Eigen::VectorXd reaction_full = pass.internal_force - f_ext;

      double reaction = 0.0;
      if (stage.deflection_control) {
        reaction = lambda;
        rec.control = stage.control.evaluate(u) - ctx.control_start;
      } else {
        for (std::size_t i = 0; i < stage.prescribed.size(); ++i) {
          const auto& p = stage.prescribed[i];
          reaction += p.scale * reaction_full[3 * p.node + p.dof];
        }
        rec.control = tau_now * stage.target;
      }
      rec.load_factor = lambda;
      rec.reaction_kN = reaction * model.reaction_multiplicity / 1000.0;
      for (const auto& name : setup.reaction_sets) {
        const NodeSet& set = model.node_set(name);
        Vec3 sum = Vec3::Zero();
        for (int nid : set.node_ids) sum += reaction_full.segment<3>(3 * nid);
        rec.set_reactions[name] = sum;
      }
      history.increments.push_back(std::move(rec));

      if (is_ramp) {
        const double f_abs = std::abs(history.increments.back().reaction_kN);
        history.peak_reaction_kN = std::max(history.peak_reaction_kN, f_abs);
        if (f_abs >= running_peak)
          running_peak = f_abs;
        else
          post_peak = true;
        if (stage.stop_fraction > 0.0 && post_peak &&
            f_abs < stage.stop_fraction * running_peak) {
          history.termination = "stopped: reaction drop";
          stage_done = true;
        }
      }
    };

    std::function<bool(double, double, int)> advance = [&](double from, double to,
                                                           int depth) -> bool {
      const Eigen::VectorXd u_save = u;
      const double lambda_save = lambda;

      apply_prescribed(ctx, u, to);
      PassResult pass = iterate(ctx, u, lambda, committed, to,
                                TangentMode::Consistent, config.max_iterations);
      if (!pass.converged) {
        u = u_save;
        lambda = lambda_save;
        apply_prescribed(ctx, u, to);
        pass = iterate(ctx, u, lambda, committed, to, TangentMode::Secant,
                       config.fallback_iterations);
      }
      if (pass.converged) {
        committed = std::move(pass.states);
        tau = to;
        record(to, pass);
        return true;
      }
      u = u_save;
      lambda = lambda_save;
      if (depth >= config.max_bisections) return false;
      const double mid = 0.5 * (from + to);
      if (!advance(from, mid, depth + 1)) return false;
      if (stage_done) return true;  // stop criterion hit inside the first half
      return advance(mid, to, depth + 1);
    };

    const double dtau = 1.0 / std::max(1, stage.increments);
    for (int inc = 1; inc <= stage.increments && !stage_done; ++inc) {
      if (!advance(tau, inc * dtau, 0)) {
        history.termination = "terminated: non-convergence";
        stage_done = true;
      }
    }

    if (history.termination != "completed") break;
    f_ext_base += ctx.f_stage;
  }
  history.final_states = std::move(committed);
  return history;
}

std::vector<double> recover_reaction(const SolutionHistory& history, const Model& model,
                                     const std::string& set_name, int dof) {
  std::vector<double> out;
  out.reserve(history.increments.size());
  for (const auto& inc : history.increments) {
    auto it = inc.set_reactions.find(set_name);
    if (it == inc.set_reactions.end())
      throw ValidationError("recover_reaction",
                            "node set '" + set_name + "' was not recorded");
    out.push_back(it->second[dof] * model.reaction_multiplicity / 1000.0);
  }
  return out;
}

}  // namespace trmfem
