#include "erbfit/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "erbfit/density.hpp"
#include "erbfit/error.hpp"
#include "erbfit/mesher.hpp"
#include "erbfit/metrics.hpp"
#include "erbfit/model_io.hpp"
#include "erbfit/pqr.hpp"
#include "erbfit/trainer.hpp"

namespace erbfit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct SparsifyArgs {
  std::string input, out, trace;
  double decay = kDefaultDecay;
  double isovalue = kDefaultIsovalue;
  TrainConfig config;
};

int cmd_sparsify(const SparsifyArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const AtomSet atoms = parse_pqr_file(args.input);
  const TrainResult result = train(atoms, args.config, args.decay,
                                   args.isovalue);
  const auto t1 = std::chrono::steady_clock::now();
  const double seconds = std::chrono::duration<double>(t1 - t0).count();

  ModelDoc doc;
  doc.params = result.params;
  doc.source = atoms.source_name;
  doc.decay = args.decay;
  doc.isovalue = args.isovalue;
  doc.iterations = args.config.max_iter;
  doc.seed = args.config.seed;
  doc.box = result.box;
  write_model_file(args.out, doc);

  if (!args.trace.empty()) write_trace_csv_file(args.trace, result.trace);

  const SparseStats stats =
      sparse_stats(result.atom_count, result.params.neuron_count());

  json manifest;
  manifest["molecule"] = atoms.source_name;
  manifest["input"] = args.input;
  manifest["model"] = args.out;
  if (!args.trace.empty()) manifest["trace"] = args.trace;
  manifest["decay"] = args.decay;
  manifest["isovalue"] = args.isovalue;
  manifest["seed"] = args.config.seed;
  manifest["atom_count"] = stats.n_atoms;
  manifest["neuron_count"] = stats.n_neurons;
  manifest["sparse_ratio"] = stats.ratio;
  manifest["training_points"] = result.training_points;
  manifest["duration_seconds"] = seconds;
  manifest["config"] = {{"max_iter", args.config.max_iter},
                        {"sparse_iter", args.config.sparse_iter},
                        {"batch_size", args.config.batch_size},
                        {"tol1", args.config.tol1},
                        {"tol2", args.config.tol2},
                        {"check_step", args.config.check_step},
                        {"learning_rate", args.config.learning_rate},
                        {"beta1", args.config.beta1},
                        {"beta2", args.config.beta2},
                        {"epsilon", args.config.epsilon},
                        {"rho1_initial", args.config.rho1_initial},
                        {"rho2_initial", args.config.rho2_initial},
                        {"grid_spacing", args.config.grid_spacing},
                        {"padding", args.config.padding},
                        {"band", args.config.band},
                        {"legacy_init", args.config.legacy_init}};
  std::ofstream mf(args.out + ".manifest.json");
  if (!mf) throw Error("cannot write manifest next to '" + args.out + "'");
  mf << manifest.dump(2) << "\n";

  std::cout << atoms.source_name << ": " << stats.n_atoms << " atoms -> "
            << stats.n_neurons << " neurons (sparse ratio "
            << stats.ratio << ") in " << seconds << " s\n";
  return 0;
}

bool is_model_file(const std::string& path) {
  std::ifstream in(path);
  std::string first;
  in >> first;
  return first == "erbfit-model";
}

struct MeshArgs {
  std::string input, out;
  double isovalue = kDefaultIsovalue;
  double spacing = 0.5;
  double decay = kDefaultDecay;
  double padding = 5.0;
};

int cmd_mesh(const MeshArgs& args) {
  TriMesh mesh;
  if (is_model_file(args.input)) {
    const ModelDoc doc = read_model_file(args.input);
    mesh = mesh_from_model(doc.params, doc.box, args.spacing, doc.isovalue);
  } else {
    const AtomSet atoms = parse_pqr_file(args.input);
    const DensityMap map{atoms, args.decay, 0.0};
    const BoundingBox box = bounding_box(atoms, args.padding);
    mesh = mesh_from_map(map, box, args.spacing, args.isovalue);
  }
  if (mesh.empty())
    std::cerr << "warning: level set is empty, writing an empty mesh\n";
  write_mesh_file(args.out, mesh);
  std::cout << args.out << ": " << mesh.vertices.size() << " vertices, "
            << mesh.triangles.size() << " triangles\n";
  return 0;
}

struct CompareArgs {
  std::string a, b, out;
  double samples = 10.0;
};

int cmd_compare(const CompareArgs& args) {
  const TriMesh mesh_a = read_mesh_file(args.a);
  const TriMesh mesh_b = read_mesh_file(args.b);
  const ShapeReport report = compare_shapes(mesh_a, mesh_b, args.samples);

  std::string name = fs::path(args.a).stem().string();
  std::ofstream out(args.out);
  if (!out) throw Error("cannot open '" + args.out + "' for writing");
  if (args.out.size() >= 4 &&
      args.out.compare(args.out.size() - 4, 4, ".csv") == 0)
    write_report_csv(out, report, name);
  else
    write_report(out, report, name);

  std::cout << "error_area " << report.error_area << "  error_volume "
            << report.error_volume << "  hausdorff " << report.hausdorff
            << "\n";
  return 0;
}

struct ReportArgs {
  std::string manifests, out;
};

int cmd_report(const ReportArgs& args) {
  struct Row {
    std::string molecule;
    long natom = 0;
    long neurons = 0;
    double ratio = 0.0;
  };
  std::vector<Row> rows;
  if (!fs::is_directory(args.manifests))
    throw Error("'" + args.manifests + "' is not a directory");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(args.manifests)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 14 &&
        name.compare(name.size() - 14, 14, ".manifest.json") == 0)
      paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    std::ifstream in(path);
    json j;
    in >> j;
    rows.push_back({j.at("molecule").get<std::string>(),
                    j.at("atom_count").get<long>(),
                    j.at("neuron_count").get<long>(),
                    j.at("sparse_ratio").get<double>()});
  }
  if (rows.empty())
    throw Error("no *.manifest.json files under '" + args.manifests + "'");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.natom < b.natom; });

  std::ofstream out(args.out);
  if (!out) throw Error("cannot open '" + args.out + "' for writing");
  out << "molecule,natom,neurons,sparse_ratio\n";
  char buf[160];
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%ld,%ld,%.6g\n", r.molecule.c_str(),
                  r.natom, r.neurons, r.ratio);
    out << buf;
  }
  std::cout << rows.size() << " molecules -> " << args.out << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Sparse ellipsoid-RBF representation of molecular Gaussian "
               "density maps"};
  app.require_subcommand(1);

  SparsifyArgs sp;
  CLI::App* sparsify = app.add_subcommand(
      "sparsify", "Fit a sparse ellipsoid-RBF model to a PQR molecule");
  sparsify->add_option("--input", sp.input, "PQR file")->required();
  sparsify->add_option("--out", sp.out, "model output path")->required();
  sparsify->add_option("--trace", sp.trace, "training trace CSV path");
  sparsify->add_option("--decay", sp.decay, "Gaussian decay rate d");
  sparsify->add_option("--isovalue", sp.isovalue, "surface isovalue c");
  sparsify->add_option("--grid-spacing", sp.config.grid_spacing,
                       "training grid spacing (Å)");
  sparsify->add_option("--padding", sp.config.padding, "bounding-box padding (Å)");
  sparsify->add_option("--band", sp.config.band,
                       "training-point selection band around the isovalue");
  sparsify->add_option("--max-iter", sp.config.max_iter, "total iterations");
  sparsify->add_option("--sparse-iter", sp.config.sparse_iter,
                       "iterations of the sparse phase");
  sparsify->add_option("--batch-size", sp.config.batch_size, "batch size");
  sparsify->add_option("--tol1", sp.config.tol1, "pruning threshold on |w~|");
  sparsify->add_option("--tol2", sp.config.tol2, "max-error tolerance");
  sparsify->add_option("--check-step", sp.config.check_step,
                       "pruning/error-check cadence");
  sparsify->add_option("--lr", sp.config.learning_rate, "ADAM learning rate");
  sparsify->add_option("--seed", sp.config.seed, "RNG seed");
  sparsify->add_flag("--legacy-init", sp.config.legacy_init,
                     "constant-0.5 axis initialization");

  MeshArgs me;
  CLI::App* mesh = app.add_subcommand(
      "mesh", "Extract the isosurface mesh of a PQR map or a model");
  mesh->add_option("--input", me.input, "PQR or model file")->required();
  mesh->add_option("--out", me.out, "OBJ/OFF output path")->required();
  mesh->add_option("--isovalue", me.isovalue, "isovalue (PQR input)");
  mesh->add_option("--spacing", me.spacing, "sampling grid spacing (Å)");
  mesh->add_option("--decay", me.decay, "decay rate (PQR input)");
  mesh->add_option("--padding", me.padding, "bounding-box padding (PQR input)");

  CompareArgs cp;
  CLI::App* compare =
      app.add_subcommand("compare", "Shape metrics between two meshes");
  compare->add_option("--a", cp.a, "reference mesh")->required();
  compare->add_option("--b", cp.b, "compared mesh")->required();
  compare->add_option("--samples", cp.samples, "Hausdorff samples per Å²");
  compare->add_option("--out", cp.out, "report path (.csv for a CSV row)")
      ->required();

  ReportArgs rp;
  CLI::App* report = app.add_subcommand(
      "report", "Aggregate run manifests into a sparsity table");
  report->add_option("--manifests", rp.manifests, "directory of manifests")
      ->required();
  report->add_option("--out", rp.out, "CSV output path")->required();

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sparsify->parsed()) return cmd_sparsify(sp);
    if (mesh->parsed()) return cmd_mesh(me);
    if (compare->parsed()) return cmd_compare(cp);
    if (report->parsed()) return cmd_report(rp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("erbfit");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace erbfit
