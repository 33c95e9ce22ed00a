#include "trmfem/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "trmfem/model_io.hpp"

namespace trmfem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << content;
}

void apply_override(BulkDPParams& p, const json& j, const std::string& path) {
  if (j.contains("E_GPa")) p.elastic.young_modulus = j.at("E_GPa").get<double>() * 1000.0;
  if (j.contains("poisson")) p.elastic.poisson = j.at("poisson");
  if (j.contains("f_c")) p.compressive_strength = j.at("f_c");
  if (j.contains("f_t")) p.tensile_strength = j.at("f_t");
  if (j.contains("dilation_deg")) p.dilation_deg = j.at("dilation_deg");
  if (j.contains("b_h")) p.hardening_b = j.at("b_h");
  if (j.contains("h_p")) p.hardening_offset = j.at("h_p");
  if (j.contains("wf_over_h")) p.wf_over_h = j.at("wf_over_h");
  if (j.contains("a_soft")) p.a_soft = j.at("a_soft");
  p.validate(path);
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("config", std::string("invalid JSON: ") + e.what());
  }

  RunConfig cfg;
  const json& s = j.at("sample");
  const std::string setup_s = s.at("setup");
  SampleSpec::Setup setup;
  if (setup_s == "DC")
    setup = SampleSpec::Setup::DC;
  else if (setup_s == "IB")
    setup = SampleSpec::Setup::IB;
  else if (setup_s == "OB")
    setup = SampleSpec::Setup::OB;
  else
    throw ValidationError("sample.setup", "must be DC, IB or OB");

  cfg.sample = SampleSpec::resolve(setup, s.at("masonry"), s.value("mortar", ""),
                                   s.value("mesh_pitch", 0));
  if (s.contains("masonry_thickness")) cfg.sample.masonry_thickness = s.at("masonry_thickness");
  if (s.contains("coating_thickness")) cfg.sample.coating_thickness = s.at("coating_thickness");
  if (s.contains("yarn_orientation")) cfg.sample.yarn_orientation = s.at("yarn_orientation");
  if (s.contains("pre_compression")) cfg.sample.pre_compression = s.at("pre_compression");
  if (s.contains("friction_mu")) cfg.sample.friction_mu = s.at("friction_mu");
  if (s.contains("refinement")) cfg.sample.refinement = s.at("refinement");
  if (s.contains("device_extent")) cfg.sample.device_extent = s.at("device_extent");
  if (s.contains("elastic_only")) cfg.sample.elastic_only = s.at("elastic_only");

  if (j.contains("material_overrides")) {
    const json& mo = j.at("material_overrides");
    if (mo.contains("masonry"))
      apply_override(cfg.sample.masonry, mo.at("masonry"), "material_overrides.masonry");
    if (mo.contains("mortar")) {
      if (!cfg.sample.coated())
        throw ValidationError("material_overrides.mortar", "sample has no coating");
      apply_override(cfg.sample.mortar, mo.at("mortar"), "material_overrides.mortar");
    }
    if (mo.contains("yarn")) {
      const json& y = mo.at("yarn");
      for (YarnDamageParams* p : {&cfg.sample.yarn_twisted, &cfg.sample.yarn_parallel}) {
        if (y.contains("E_scale"))
          p->elastic.young_modulus *= y.at("E_scale").get<double>();
        if (y.contains("strain_scale")) {
          p->peak_strain *= y.at("strain_scale").get<double>();
          p->zero_stress_strain *= y.at("strain_scale").get<double>();
        }
        p->validate("material_overrides.yarn");
      }
      if (y.contains("area_scale"))
        cfg.sample.yarn_area *= y.at("area_scale").get<double>();
    }
  }

  if (j.contains("convergence")) {
    const json& c = j.at("convergence");
    cfg.convergence.rel_force_norm = c.value("rel_force_norm", 1e-3);
    cfg.convergence.rel_disp_norm = c.value("rel_disp_norm", 1e-3);
    cfg.convergence.max_iterations = c.value("max_iterations", 40);
    cfg.convergence.max_bisections = c.value("max_bisections", 10);
    cfg.convergence.fallback_iterations = c.value("fallback_iterations", 400);
  }
  cfg.convergence.validate("convergence");

  if (j.contains("ramp")) {
    const json& r = j.at("ramp");
    cfg.ramp.target = r.value("target", 0.0);
    cfg.ramp.increments = r.value("increments", 150);
    cfg.ramp.stop_fraction = r.value("stop_fraction", 0.30);
    cfg.ramp.pre_increments = r.value("pre_increments", 5);
    if (cfg.ramp.increments < 1)
      throw ValidationError("ramp.increments", "must be >= 1");
  }

  cfg.output_dir = j.value("output_dir", "out");
  cfg.fields_export = j.value("fields_export", "auto");
  cfg.export_model = j.value("export_model", false);
  if (cfg.fields_export != "auto" && cfg.fields_export != "none" &&
      cfg.fields_export != "all")
    throw ValidationError("fields_export", "must be auto, none or all");

  cfg.sample.validate();
  cfg.canonical = j.dump();  // nlohmann keeps object keys sorted
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("config", "cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

uint64_t config_hash(const std::string& canonical) {
  // FNV-1a 64
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

namespace {

json metrics_json(const RunOutcome& out, const SolutionHistory& history) {
  json m;
  m["id"] = out.id;
  m["termination"] = out.termination;
  m["increments"] = history.increments.size();
  if (out.dc) {
    m["F_DCmax_kN"] = out.dc->f_max_kN;
    m["gamma_at_max_permille"] = out.dc->gamma_at_max;
    if (out.dc->f_dc8_kN) {
      m["F_DC8_kN"] = *out.dc->f_dc8_kN;
      m["F_DC8_over_F_DCmax"] = *out.dc->ratio_f8_fmax;
    }
  }
  if (out.bend) {
    m["F_u_kN"] = out.bend->f_u_kN;
    m["delta_u_mm"] = out.bend->delta_u;
    if (out.bend->f_cr_kN) {
      m["F_cr_kN"] = *out.bend->f_cr_kN;
      m["delta_cr_mm"] = *out.bend->delta_cr;
    }
  }
  if (out.failure) {
    m["failure_x"] = out.failure->x;
    m["failure_F_kN"] = out.failure->f_kN;
  }
  return m;
}

RunOutcome run_built(const RunConfig& config, BuildResult build) {
  const auto t0 = std::chrono::steady_clock::now();
  audit_model(build.model);

  RunOutcome out;
  out.id = build.model.meta.sample_id;
  out.output_dir = fs::path(config.output_dir);
  fs::create_directories(out.output_dir);

  SolutionHistory history = run_staged_analysis(build.model, build.analysis,
                                                config.convergence);
  out.termination = history.termination;

  const auto kind = config.sample.setup == SampleSpec::Setup::DC
                        ? CapacityCurve::Abscissa::GammaDCPermille
                        : config.sample.setup == SampleSpec::Setup::IB
                              ? CapacityCurve::Abscissa::DeflectionIB
                              : CapacityCurve::Abscissa::DeflectionOB;
  out.curve = capacity_curve(history, build.analysis.gauges, kind);
  out.curve.validate();

  if (!out.curve.x.empty()) {
    if (kind == CapacityCurve::Abscissa::GammaDCPermille)
      out.dc = extract_dc_metrics(out.curve);
    else
      out.bend = extract_bend_metrics(out.curve, history);
    out.failure = yarn_failure_point(out.curve, history, build.model);
  }

  write_file(out.output_dir / "curve.csv", out.curve.csv());
  write_file(out.output_dir / "metrics.json", metrics_json(out, history).dump(2) + "\n");

  if (config.fields_export != "none" && !history.increments.empty()) {
    const fs::path fdir = out.output_dir / "fields";
    fs::create_directories(fdir);
    std::vector<std::size_t> selected;
    if (config.fields_export == "all") {
      for (std::size_t i = 0; i < history.increments.size(); ++i) selected.push_back(i);
    } else {
      // first crack, peak, last
      std::size_t peak = 0;
      for (std::size_t i = 0; i < history.increments.size(); ++i)
        if (std::abs(history.increments[i].reaction_kN) >
            std::abs(history.increments[peak].reaction_kN))
          peak = i;
      for (std::size_t i = 0; i < history.increments.size(); ++i) {
        const auto& d = history.increments[i].fields.hex_tensile_damage;
        if (std::any_of(d.begin(), d.end(), [](double v) { return v > 0.0; })) {
          selected.push_back(i);
          break;
        }
      }
      selected.push_back(peak);
      selected.push_back(history.increments.size() - 1);
      std::sort(selected.begin(), selected.end());
      selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
    }
    for (std::size_t i : selected) {
      char name[32];
      std::snprintf(name, sizeof(name), "step_%04zu.vtk", i);
      export_fields(build.model, history.increments[i], (fdir / name).string());
    }
  }

  if (config.export_model) {
    write_file(out.output_dir / "model.json", model_to_json(build.model));
    export_mesh_vtk(build.model, (out.output_dir / "mesh.vtk").string());
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest;
  manifest["config_hash"] = hash_hex(config_hash(config.canonical));
  manifest["code_version"] = kVersion;
  manifest["wall_time_s"] = wall;
  manifest["termination"] = history.termination;
  manifest["increments_committed"] = history.increments.size();
  manifest["sample_id"] = out.id;
  write_file(out.output_dir / "manifest.json", manifest.dump(2) + "\n");

  out.exit_code = history.termination == "terminated: non-convergence" ? 3 : 0;
  return out;
}

}  // namespace

RunOutcome cmd_run(const RunConfig& config) {
  return run_built(config, build_model(config.sample, config.ramp));
}

// ---------------------------------------------------------------------------
// ablation
// ---------------------------------------------------------------------------

AblationClass ablation_from_string(const std::string& s) {
  if (s == "IL") return AblationClass::IL;
  if (s == "IP") return AblationClass::IP;
  if (s == "IF") return AblationClass::IF;
  throw ValidationError("ablate.class", "must be IL, IP or IF");
}

void apply_ablation(Model& model, AblationClass cls) {
  switch (cls) {
    case AblationClass::IL:
      if (model.line_interfaces.empty())
        throw ValidationError("ablate", "model has no line interfaces (unstrengthened?)");
      for (auto& e : model.line_interfaces) e.law.tangential_disabled = true;
      break;
    case AblationClass::IP:
      if (model.point_interfaces.empty())
        throw ValidationError("ablate", "model has no point interfaces (unstrengthened?)");
      for (auto& e : model.point_interfaces) e.law.tangential_disabled = true;
      break;
    case AblationClass::IF:
      if (model.surface_interfaces.empty())
        throw ValidationError("ablate", "model has no surface interfaces (uncoated?)");
      for (auto& e : model.surface_interfaces)
        if (e.law.tau_max < 1e11)  // keep welded device ties
          e.law.tangential_disabled = true;
      break;
  }
}

RunOutcome cmd_ablate(const RunConfig& config, AblationClass cls) {
  if (!config.sample.strengthened())
    throw ValidationError("ablate", "ablation requires a strengthened model");
  BuildResult build = build_model(config.sample, config.ramp);
  apply_ablation(build.model, cls);
  return run_built(config, std::move(build));
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

void apply_variant(SampleSpec& spec, const std::string& variant) {
  const double up = 1.33, down = 0.67;
  auto mult = [&](const std::string& v) { return v.back() == '+' ? up : down; };
  const std::string head = variant.substr(0, 2);

  if (head == "YT") {
    const double m = mult(variant);
    for (YarnDamageParams* p : {&spec.yarn_twisted, &spec.yarn_parallel}) {
      p->peak_strain *= m;
      p->zero_stress_strain *= m;
    }
  } else if (head == "YY") {
    const double m = mult(variant);
    spec.yarn_twisted.elastic.young_modulus *= m;
    spec.yarn_parallel.elastic.young_modulus *= m;
  } else if (head == "YA") {
    spec.yarn_area *= mult(variant);
  } else if (head == "YO") {
    spec.swap_orientation = !spec.swap_orientation;
  } else if (head == "CT") {
    spec.mortar.tensile_strength *= mult(variant);
  } else if (head == "CC") {
    spec.mortar.compressive_strength *= mult(variant);
  } else if (head == "CY") {
    spec.mortar.elastic.young_modulus *= mult(variant);
  } else if (head == "MT") {
    spec.masonry.tensile_strength *= mult(variant);
  } else if (head == "MC") {
    spec.masonry.compressive_strength *= mult(variant);
  } else if (head == "MY") {
    spec.masonry.elastic.young_modulus *= mult(variant);
  } else if (head == "MU") {
    spec.friction_mu *= 2.0;
  } else if (variant == "IL" || variant == "IP" || variant == "IF") {
    // handled at the model level
  } else {
    throw ValidationError("sweep.variants", "unknown variant '" + variant + "'");
  }
}

SweepSpec SweepSpec::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("sweep", "cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ValidationError("sweep", std::string("invalid JSON: ") + e.what());
  }
  SweepSpec spec;
  spec.base = RunConfig::from_json_text(j.at("base").dump());
  spec.output_dir = j.value("output_dir", "sweep");
  if (j.contains("variants") && j.at("variants").is_array()) {
    for (const auto& v : j.at("variants")) spec.variants.push_back(v.get<std::string>());
  } else {
    spec.variants = {"YT+", "YT-", "YY+", "YY-", "YA+", "YA-", "YO",
                     "CT+", "CT-", "CC+", "CC-", "CY+", "CY-",
                     "MT+", "MT-", "MC+", "MC-", "MY+", "MY-"};
    if (spec.base.sample.strengthened()) {
      spec.variants.push_back("IL");
      spec.variants.push_back("IP");
      spec.variants.push_back("IF");
    }
  }
  return spec;
}

namespace {

SweepRow row_from_outcome(const std::string& variant, const RunOutcome& out) {
  SweepRow row;
  row.variant = variant;
  row.status = out.termination;
  if (out.dc) {
    row.f_max = out.dc->f_max_kN;
    row.x_at_max = out.dc->gamma_at_max;
    row.f_secondary = out.dc->f_dc8_kN;
  } else if (out.bend) {
    row.f_max = out.bend->f_u_kN;
    row.x_at_max = out.bend->delta_u;
    row.f_secondary = out.bend->f_cr_kN;
  }
  if (out.failure) {
    row.failure_x = out.failure->x;
    row.failure_f = out.failure->f_kN;
  }
  return row;
}

std::string opt_csv(const std::optional<double>& v) {
  return v ? fmt17(*v) : std::string();
}

}  // namespace

SweepOutcome cmd_sweep(const SweepSpec& spec) {
  SweepOutcome out;
  const fs::path root(spec.output_dir);
  fs::create_directories(root);

  struct Task {
    std::string variant;
    RunConfig config;
    std::optional<AblationClass> ablation;
  };
  std::vector<Task> tasks;
  {
    Task base;
    base.variant = "base";
    base.config = spec.base;
    base.config.output_dir = (root / "base").string();
    tasks.push_back(base);
  }
  for (const auto& v : spec.variants) {
    Task t;
    t.variant = v;
    t.config = spec.base;
    t.config.output_dir = (root / v).string();
    if (v == "IL" || v == "IP" || v == "IF")
      t.ablation = ablation_from_string(v);
    else
      apply_variant(t.config.sample, v);
    tasks.push_back(t);
  }

  std::vector<SweepRow> rows(tasks.size());
  const int workers =
      std::max(1, std::min(worker_count(), static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const RunOutcome r = tasks[i].ablation
                                 ? cmd_ablate(tasks[i].config, *tasks[i].ablation)
                                 : cmd_run(tasks[i].config);
        rows[i] = row_from_outcome(tasks[i].variant, r);
      } catch (const std::exception& e) {
        rows[i].variant = tasks[i].variant;
        rows[i].status = std::string("failed: ") + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  out.rows = rows;
  std::ostringstream csv;
  csv << "variant,status,F_max_kN,x_at_max,F_secondary_kN,failure_x,failure_F_kN\n";
  for (const auto& r : rows)
    csv << r.variant << "," << r.status << "," << opt_csv(r.f_max) << ","
        << opt_csv(r.x_at_max) << "," << opt_csv(r.f_secondary) << ","
        << opt_csv(r.failure_x) << "," << opt_csv(r.failure_f) << "\n";
  out.matrix_csv = root / "matrix.csv";
  write_file(out.matrix_csv, csv.str());
  return out;
}

// ---------------------------------------------------------------------------
// drivers
// ---------------------------------------------------------------------------

std::string DriverCurve::csv() const {
  std::ostringstream os;
  os << x_label << "," << y_label << "\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    os << fmt17(x[i]) << "," << fmt17(y[i]) << "\n";
  return os.str();
}

namespace {

std::vector<double> path_points(const std::vector<double>& targets, int steps) {
  std::vector<double> pts;
  double from = 0.0;
  for (double to : targets) {
    for (int i = 1; i <= steps; ++i) pts.push_back(from + (to - from) * i / steps);
    from = to;
  }
  return pts;
}

}  // namespace

DriverCurve drive_yarn(const YarnDamageParams& p, const std::vector<double>& targets,
                       int steps) {
  DriverCurve c;
  c.x_label = "strain";
  c.y_label = "stress_MPa";
  YarnState state;
  for (double eps : path_points(targets, steps)) {
    const YarnResult r = yarn_update(p, eps, state);
    state = r.state;
    c.x.push_back(eps);
    c.y.push_back(r.stress);
  }
  return c;
}

DriverCurve drive_bond(const BondLaw& law, const std::vector<double>& targets, int steps) {
  DriverCurve c;
  c.x_label = "slip_mm";
  c.y_label = "traction";
  InterfaceState state;
  for (double s : path_points(targets, steps)) {
    const BondResult r = bond_traction(law, s, state);
    state = r.state;
    c.x.push_back(s);
    c.y.push_back(r.traction);
  }
  return c;
}

DriverCurve drive_bulk_uniaxial(const BulkDPParams& p, double h,
                                const std::vector<double>& targets, int steps,
                                bool uniaxial_stress) {
  DriverCurve c;
  c.x_label = "strain";
  c.y_label = "stress_MPa";
  BulkState state;
  double lat = 0.0;  // lateral strain (both transverse directions)
  for (double eps : path_points(targets, steps)) {
    Vec6 strain = Vec6::Zero();
    strain[0] = eps;
    BulkResult r;
    if (!uniaxial_stress) {
      r = bulk_update(p, strain, h, state);
    } else {
      // Zero the lateral stress with both transverse strains equal. The
      // lateral stress is monotone in the lateral strain along the physical
      // branch, so march from the last converged value to the first sign
      // change and bisect; a Newton step could hop across the tensile
      // softening branch instead.
      auto lateral_stress = [&](double l) {
        strain[1] = strain[2] = l;
        return bulk_update(p, strain, h, state).stress[1];
      };
      const double tol = 1e-10 * std::max(1.0, p.compressive_strength);
      double s_lo = lateral_stress(lat);
      if (std::abs(s_lo) > tol) {
        const double dir = s_lo < 0.0 ? 1.0 : -1.0;
        const double dl =
            std::max(1e-7, 0.25 * p.tensile_strength / p.elastic.young_modulus);
        double lo = lat, hi = lat;
        double s_hi = s_lo;
        for (int k = 0; k < 4000 && s_hi * s_lo > 0.0; ++k) {
          lo = hi;
          s_lo = s_hi;
          hi += dir * dl;
          s_hi = lateral_stress(hi);
        }
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double sm = lateral_stress(mid);
          if (std::abs(sm) < tol) {
            lo = hi = mid;
            break;
          }
          if (sm * s_lo > 0.0)
            lo = mid;
          else
            hi = mid;
        }
        lat = 0.5 * (lo + hi);
      }
      strain[1] = strain[2] = lat;
      r = bulk_update(p, strain, h, state);
    }
    state = r.state;
    c.x.push_back(eps);
    c.y.push_back(r.stress[0]);
  }
  return c;
}

DriverCurve cmd_driver(const std::string& law_id, const std::vector<double>& targets,
                       int steps, double h) {
  const Catalog& cat = Catalog::builtin();
  for (const auto& label : cat.bulk_labels())
    if (label == law_id) return drive_bulk_uniaxial(cat.bulk(label), h, targets, steps);
  if (law_id == "yarn-S-parallel" || law_id == "yarn-S-twisted")
    return drive_yarn(cat.yarn(law_id), targets, steps);
  for (const auto& label : cat.bond_labels())
    if (label == law_id) return drive_bond(cat.bond(label), targets, steps);
  throw ValidationError("driver.law", "unknown law '" + law_id + "'");
}

int worker_count() {
  const char* env = std::getenv("TRMFEM_THREADS");
  if (env) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 4;
}

}  // namespace trmfem
