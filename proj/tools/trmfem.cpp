#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "trmfem/model_io.hpp"
#include "trmfem/runner.hpp"

namespace {

std::vector<double> parse_targets(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

void print_outcome(const trmfem::RunOutcome& out) {
  std::cout << out.id << ": " << out.termination;
  if (out.dc) {
    std::cout << "  F_max=" << out.dc->f_max_kN << " kN"
              << " at gamma=" << out.dc->gamma_at_max << " permille";
    if (out.dc->f_dc8_kN) std::cout << "  F_DC8=" << *out.dc->f_dc8_kN << " kN";
  } else if (out.bend) {
    std::cout << "  F_u=" << out.bend->f_u_kN << " kN at " << out.bend->delta_u << " mm";
    if (out.bend->f_cr_kN)
      std::cout << "  F_cr=" << *out.bend->f_cr_kN << " kN at " << *out.bend->delta_cr
                << " mm";
  }
  std::cout << "\n  artifacts in " << out.output_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trmfem - detailed-level simulation of TRM/CRM strengthened masonry"};
  app.require_subcommand(1);

  std::string config_path, output_dir, ablate_class;
  std::string law_id, targets_spec = "0.02";
  int driver_steps = 200;
  double driver_h = 15.9836;
  std::string out_path;

  auto* run = app.add_subcommand("run", "run one analysis from a JSON config");
  run->add_option("config", config_path, "RunConfig JSON path")->required();
  run->add_option("--output-dir", output_dir, "override the config output directory");

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep batch");
  sweep->add_option("sweep", config_path, "SweepSpec JSON path")->required();
  sweep->add_option("--output-dir", output_dir, "override the sweep output directory");

  auto* ablate = app.add_subcommand("ablate", "run with one interface class unbonded");
  ablate->add_option("config", config_path, "RunConfig JSON path")->required();
  ablate->add_option("--class", ablate_class, "IL | IP | IF")->required();
  ablate->add_option("--output-dir", output_dir, "override the config output directory");

  auto* driver = app.add_subcommand("driver", "material point / bond law driver");
  driver->add_option("--law", law_id, "catalog law id")->required();
  driver->add_option("--path", targets_spec,
                     "comma-separated path targets (strain or slip)");
  driver->add_option("--steps", driver_steps, "steps per path segment");
  driver->add_option("--h", driver_h, "characteristic length for bulk laws [mm]");
  driver->add_option("--out", out_path, "CSV output path (default stdout)");

  auto* catalog = app.add_subcommand("catalog", "write the material catalog JSON");
  catalog->add_option("--out", out_path, "output path (default stdout)");

  auto* exportm = app.add_subcommand("export-model", "build and export model files");
  exportm->add_option("config", config_path, "RunConfig JSON path")->required();
  exportm->add_option("--output-dir", output_dir, "override the config output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      trmfem::RunConfig cfg = trmfem::RunConfig::from_file(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      const auto out = trmfem::cmd_run(cfg);
      print_outcome(out);
      return out.exit_code;
    }
    if (sweep->parsed()) {
      trmfem::SweepSpec spec = trmfem::SweepSpec::from_file(config_path);
      if (!output_dir.empty()) spec.output_dir = output_dir;
      const auto out = trmfem::cmd_sweep(spec);
      std::cout << "sweep matrix: " << out.matrix_csv.string() << "\n";
      for (const auto& row : out.rows)
        std::cout << "  " << row.variant << ": " << row.status << "\n";
      return 0;
    }
    if (ablate->parsed()) {
      trmfem::RunConfig cfg = trmfem::RunConfig::from_file(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      const auto out = trmfem::cmd_ablate(cfg, trmfem::ablation_from_string(ablate_class));
      print_outcome(out);
      return out.exit_code;
    }
    if (driver->parsed()) {
      const auto curve =
          trmfem::cmd_driver(law_id, parse_targets(targets_spec), driver_steps, driver_h);
      if (out_path.empty()) {
        std::cout << curve.csv();
      } else {
        std::ofstream os(out_path, std::ios::binary);
        os << curve.csv();
      }
      return 0;
    }
    if (catalog->parsed()) {
      const std::string text = trmfem::Catalog::builtin().to_json();
      if (out_path.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream os(out_path, std::ios::binary);
        os << text << "\n";
      }
      return 0;
    }
    if (exportm->parsed()) {
      trmfem::RunConfig cfg = trmfem::RunConfig::from_file(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      const auto build = trmfem::build_model(cfg.sample, cfg.ramp);
      trmfem::audit_model(build.model);
      std::filesystem::create_directories(cfg.output_dir);
      const auto dir = std::filesystem::path(cfg.output_dir);
      {
        std::ofstream os(dir / "model.json", std::ios::binary);
        os << trmfem::model_to_json(build.model);
      }
      trmfem::export_mesh_vtk(build.model, (dir / "mesh.vtk").string());
      std::cout << "model.json and mesh.vtk written to " << dir.string() << "\n";
      return 0;
    }
  } catch (const trmfem::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
