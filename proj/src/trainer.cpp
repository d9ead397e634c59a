#include "erbfit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "erbfit/kernels.hpp"
#include "erbfit/rng.hpp"

namespace erbfit {

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  char buf[96];
  out << "iteration,loss,neuron_count,max_error\n";
  for (const TraceRow& r : trace.rows) {
    if (r.has_max_error)
      std::snprintf(buf, sizeof(buf), "%ld,%.17g,%ld,%.17g\n", r.iteration,
                    r.loss, r.neuron_count, r.max_error);
    else
      std::snprintf(buf, sizeof(buf), "%ld,%.17g,%ld,\n", r.iteration, r.loss,
                    r.neuron_count);
    out << buf;
  }
}

void write_trace_csv_file(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
}

TrainingSet build_training_set(const DensityMap& map, const TrainConfig& config,
                               double isovalue) {
  if (!(isovalue > 0.0))
    throw ValidationError("build_training_set: isovalue must be > 0");
  const BoundingBox box = bounding_box(map.atoms, config.padding);
  const UniformGrid grid = make_grid(box, config.grid_spacing);
  const ScalarField field = sample_grid(map, grid, config.grid_point_cap);

  TrainingSet set;
  set.isovalue = isovalue;
  set.band = config.band;
  set.grid = grid;
  const Vec3 h = grid.spacing();
  for (int k = 0; k < grid.nz; ++k)
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const double value = field.values[grid.index(i, j, k)];
        if (std::abs(value - isovalue) <= config.band) {
          set.px.push_back(box.min_corner.x + i * h.x);
          set.py.push_back(box.min_corner.y + j * h.y);
          set.pz.push_back(box.min_corner.z + k * h.z);
          set.targets.push_back(value);
        }
      }
  if (set.targets.empty()) {
    throw ValidationError(
        "build_training_set: no lattice point within " +
        std::to_string(config.band) + " of isovalue " +
        std::to_string(isovalue) +
        "; widen the band or refine the grid spacing");
  }
  return set;
}

ErbfParams initialize(const AtomSet& atoms, double decay, bool legacy_lengths) {
  if (!(decay > 0.0)) throw ValidationError("initialize: decay must be > 0");
  const double dt = legacy_lengths ? std::sqrt(0.5) : std::pow(decay, 0.25);
  ErbfParams params;
  params.neurons.reserve(atoms.size());
  for (const Atom& a : atoms.atoms) {
    ErbfNeuron n;
    n.w_tilde = std::exp(0.5 * decay * a.radius * a.radius);
    n.d_tilde = {dt, dt, dt};
    n.center = a.center;
    n.angles = {0.0, 0.0, 0.0};
    params.neurons.push_back(n);
  }
  return params;
}

std::size_t prune(ErbfParams& params, AdamState& adam, double tol1,
                  std::size_t min_keep) {
  if (!(tol1 > 0.0)) throw ValidationError("prune: tol1 must be > 0");
  const std::size_t n = params.neuron_count();
  std::vector<bool> keep(n);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    keep[i] = std::abs(params.neurons[i].w_tilde) >= tol1;
    kept += keep[i];
  }
  if (kept == 0) {
    if (min_keep == 0)
      throw ValidationError(
          "prune: every neuron fell below tol1 (degenerate model)");
    // Keep the strongest survivor rather than emptying the model.
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(params.neurons[i].w_tilde) >
          std::abs(params.neurons[best].w_tilde))
        best = i;
    keep[best] = true;
    kept = 1;
  }
  if (kept == n) return 0;

  std::size_t w = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    params.neurons[w] = params.neurons[i];
    for (int k = 0; k < 10; ++k) {
      adam.m[10 * w + k] = adam.m[10 * i + k];
      adam.v[10 * w + k] = adam.v[10 * i + k];
    }
    ++w;
  }
  params.neurons.resize(kept);
  adam.m.resize(10 * kept);
  adam.v.resize(10 * kept);
  return n - kept;
}

void adam_step(ErbfParams& params, AdamState& adam,
               std::span<const double> gradient, const TrainConfig& config) {
  const std::size_t n = params.scalar_count();
  if (gradient.size() != n || adam.m.size() != n || adam.v.size() != n)
    throw ValidationError("adam_step: length mismatch");
  for (double g : gradient)
    if (!std::isfinite(g))
      throw NumericalError("adam_step: non-finite gradient component");

  std::vector<double> flat = pack(params);
  adam.step_count += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, double(adam.step_count));
  const double bc2 = 1.0 - std::pow(config.beta2, double(adam.step_count));
  for (std::size_t k = 0; k < n; ++k) {
    const double g = gradient[k];
    adam.m[k] = config.beta1 * adam.m[k] + (1.0 - config.beta1) * g;
    adam.v[k] = config.beta2 * adam.v[k] + (1.0 - config.beta2) * g * g;
    const double m_hat = adam.m[k] / bc1;
    const double v_hat = adam.v[k] / bc2;
    flat[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  unpack(flat, params);
}

namespace {

void validate(const TrainConfig& c) {
  if (c.sparse_iter > c.max_iter)
    throw ValidationError("train: sparse_iter must be <= max_iter");
  if (c.batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (!(c.tol1 > 0.0 && c.tol2 > 0.0))
    throw ValidationError("train: tolerances must be > 0");
  if (c.check_step < 1) throw ValidationError("train: check_step must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ValidationError("train: bad learning rate");
  if (!(c.grid_spacing > 0.0) || !(c.padding >= 0.0) || !(c.band > 0.0))
    throw ValidationError("train: bad grid parameters");
  if (c.rho1_initial < 0.0 || c.rho2_initial < 0.0 ||
      (c.rho1_initial == 0.0 && c.rho2_initial == 0.0))
    throw ValidationError("train: rho weights must be >= 0 and not both zero");
}

}  // namespace

TrainResult train(const AtomSet& atoms, const TrainConfig& config, double decay,
                  double isovalue) {
  validate(config);

  DensityMap map{atoms, decay, 0.0};
  const TrainingSet set = build_training_set(map, config, isovalue);
  const std::size_t total = set.size();

  ErbfParams params = initialize(atoms, decay, config.legacy_init);
  AdamState adam = AdamState::zeros(params.scalar_count());

  std::mt19937_64 gen(config.seed);
  std::vector<std::size_t> order(total);
  for (std::size_t m = 0; m < total; ++m) order[m] = m;
  shuffle(order, gen);
  std::size_t cursor = 0;

  const std::size_t batch_cap =
      std::min<std::size_t>(config.batch_size, total);
  std::vector<double> bx(batch_cap), by(batch_cap), bz(batch_cap),
      bt(batch_cap);
  std::vector<double> grad, psi_cache, acc, resid;
  PackedNeurons packed;

  TrainTrace trace;
  trace.rows.reserve(config.max_iter);

  for (long iter = 1; iter <= config.max_iter; ++iter) {
    const bool checkpoint = (iter % config.check_step == 0);
    if (checkpoint && iter <= config.sparse_iter)
      prune(params, adam, config.tol1, 1);

    // Next batch from the epoch-shuffled order.
    if (cursor >= total) {
      shuffle(order, gen);
      cursor = 0;
    }
    const std::size_t bsize = std::min<std::size_t>(batch_cap, total - cursor);
    for (std::size_t b = 0; b < bsize; ++b) {
      const std::size_t m = order[cursor + b];
      bx[b] = set.px[m];
      by[b] = set.py[m];
      bz[b] = set.pz[m];
      bt[b] = set.targets[m];
    }
    cursor += bsize;

    const std::size_t n = params.neuron_count();
    const std::size_t np4 = kernels::round_up4(bsize);
    grad.resize(10 * n);
    psi_cache.resize(n * np4);
    acc.resize(np4);
    resid.resize(np4);
    packed.build(params, true);
    const double es = kernels::es_grad_block(
        packed.view(), bx.data(), by.data(), bz.data(), bt.data(), bsize,
        grad.data(), psi_cache.data(), acc.data(), resid.data());
    double max_err = 0.0;
    for (std::size_t b = 0; b < bsize; ++b)
      max_err = std::max(max_err, std::abs(resid[b]));
    const double rms_err = std::sqrt(es / double(bsize));

    LossWeights rho;
    if (iter > config.sparse_iter || rms_err > config.tol2 ||
        config.rho1_initial == 0.0) {
      // Accuracy phase: past sparse_iter, or repairing a fit whose batch
      // RMS density error drifted out of tolerance (or rho1_initial
      // disables the sparsity term outright).
      rho = {0.0, config.rho2_initial};
    } else {
      // Sparse phase: both terms act; the L1 bias prunes what the data
      // term does not defend.
      rho = {config.rho1_initial, config.rho2_initial};
    }

    double loss_value = rho.rho2 * es;
    if (rho.rho1 != 0.0) loss_value += rho.rho1 * l1_term(params);
    for (std::size_t i = 0; i < n; ++i) {
      double* g = grad.data() + 10 * i;
      for (int k = 0; k < 10; ++k) g[k] *= rho.rho2;
      const ErbfNeuron& nr = params.neurons[i];
      g[0] += 2.0 * rho.rho1 * nr.w_tilde;
      g[1] += 2.0 * rho.rho1 * nr.d_tilde.x;
      g[2] += 2.0 * rho.rho1 * nr.d_tilde.y;
      g[3] += 2.0 * rho.rho1 * nr.d_tilde.z;
    }

    TraceRow row;
    row.iteration = iter;
    row.loss = loss_value;
    row.neuron_count = static_cast<long>(n);
    row.max_error = max_err;
    row.has_max_error = true;
    trace.rows.push_back(row);

    if (!std::isfinite(loss_value))
      throw DivergenceError("train: loss diverged at iteration " +
                                std::to_string(iter),
                            trace);
    bool grad_ok = true;
    for (double g : grad)
      if (!std::isfinite(g)) {
        grad_ok = false;
        break;
      }
    if (!grad_ok)
      throw DivergenceError("train: gradient diverged at iteration " +
                                std::to_string(iter),
                            trace);

    adam_step(params, adam, grad, config);
  }

  TrainResult result;
  result.params = std::move(params);
  result.trace = std::move(trace);
  result.box = set.grid.box;
  result.training_points = total;
  result.atom_count = atoms.size();
  return result;
}

}  // namespace erbfit
