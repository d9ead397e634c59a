#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "erbfit/density.hpp"
#include "erbfit/erbf.hpp"
#include "erbfit/error.hpp"
#include "erbfit/pqr.hpp"

namespace erbfit {

// Lattice points with |phi - isovalue| <= band and their phi labels.
struct TrainingSet {
  std::vector<double> px, py, pz;
  std::vector<double> targets;
  double isovalue = kDefaultIsovalue;
  double band = 1.0;
  UniformGrid grid;  // construction grid

  std::size_t size() const { return targets.size(); }
  Vec3 point(std::size_t m) const { return {px[m], py[m], pz[m]}; }
};

struct TrainConfig {
  long max_iter = 10000;
  long sparse_iter = 6000;
  long batch_size = 1000;
  double tol1 = 1e-3;        // prune threshold on |w~|
  double tol2 = 0.1;         // max-density-error tolerance at checkpoints
  long check_step = 20;      // prune / error-check cadence
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double rho1_initial = 1.0;
  double rho2_initial = 1.0;
  double grid_spacing = 1.0;  // Å
  double padding = 5.0;       // Å
  double band = 1.0;
  std::uint64_t seed = 42;
  bool legacy_init = false;  // constant-0.5 axis lengths instead of exact-match
  std::size_t grid_point_cap = kGridPointCap;
};

struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second raw moment, >= 0
  long step_count = 0;

  static AdamState zeros(std::size_t n) { return {std::vector<double>(n, 0.0),
                                                  std::vector<double>(n, 0.0),
                                                  0}; }
};

struct TraceRow {
  long iteration = 0;
  double loss = 0.0;
  long neuron_count = 0;
  double max_error = 0.0;  // max |Psi - target| over the iteration's batch
  bool has_max_error = false;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
};

// CSV rows (iteration, loss, neuron_count, max_error); max_error left empty
// on iterations without a checkpoint evaluation.
void write_trace_csv(std::ostream& out, const TrainTrace& trace);
void write_trace_csv_file(const std::string& path, const TrainTrace& trace);

// Training aborted on a non-finite loss or gradient; the partial trace rides
// along for diagnosis.
struct DivergenceError : NumericalError {
  DivergenceError(const std::string& msg, TrainTrace partial)
      : NumericalError(msg), trace(std::move(partial)) {}
  TrainTrace trace;
};

// Discretizes the padded bounding box at config.grid_spacing, labels every
// lattice point with phi, keeps those with |phi - isovalue| <= config.band.
// Throws ValidationError when the band selects nothing.
TrainingSet build_training_set(const DensityMap& map, const TrainConfig& config,
                               double isovalue);

// One neuron per atom, chosen so the network reproduces phi exactly:
// center = atom center, angles = 0, d~_q = decay^(1/4) (so the squared-entry
// diagonal equals decay), w~ = exp(decay r^2 / 2). With legacy_lengths the
// axis entries are the constant 0.5 instead (d~_q = sqrt(0.5)), which does
// not reproduce phi under the substituted exponent.
ErbfParams initialize(const AtomSet& atoms, double decay,
                      bool legacy_lengths = false);

// Removes neurons with |w~| < tol1 along with their optimizer-state slots,
// preserving survivor order. Keeps the largest-|w~| neuron when the sweep
// would otherwise remove everything and min_keep is 1; with min_keep 0 that
// case throws ValidationError (degenerate model).
std::size_t prune(ErbfParams& params, AdamState& adam, double tol1,
                  std::size_t min_keep = 0);

// One bias-corrected ADAM update: sigma <- sigma - tau * m_hat/(sqrt(v_hat)+eps).
void adam_step(ErbfParams& params, AdamState& adam,
               std::span<const double> gradient, const TrainConfig& config);

struct TrainResult {
  ErbfParams params;
  TrainTrace trace;
  BoundingBox box;  // padded training box
  std::size_t training_points = 0;
  std::size_t atom_count = 0;
};

// Full sparse-optimization loop: seeded epoch-shuffled batches, pruning
// every check_step iterations, and per-iteration alternation of the two
// loss terms driven by the batch max error — sparsity-only (rho1, 0) while
// the error is within tol2, accuracy-only (0, rho2) while it is not, and
// permanently (0, rho2) with pruning disabled once past sparse_iter. One
// ADAM step per iteration. Deterministic given seed.
TrainResult train(const AtomSet& atoms, const TrainConfig& config,
                  double decay = kDefaultDecay,
                  double isovalue = kDefaultIsovalue);

}  // namespace erbfit
