// Deterministic generator of synthetic small-molecule PQR files: a branched
// random walk at covalent-bond step lengths with van-der-Waals-like radii,
// optionally biased toward the centroid for compact blobs. The committed
// files under data/ record their seeds in a REMARK line.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

#include "erbfit/rng.hpp"
#include "erbfit/vec.hpp"

namespace {

using erbfit::Vec3;

double gauss(std::mt19937_64& gen) {
  // Box-Muller; rejects the origin to keep log finite.
  double u1 = erbfit::uniform_unit(gen);
  while (u1 <= 1e-300) u1 = erbfit::uniform_unit(gen);
  const double u2 = erbfit::uniform_unit(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

Vec3 random_unit(std::mt19937_64& gen) {
  Vec3 v{gauss(gen), gauss(gen), gauss(gen)};
  const double n = v.norm();
  return n > 1e-12 ? v * (1.0 / n) : Vec3{1, 0, 0};
}

struct Element {
  const char* name;
  double radius;
  double weight;
};

// Organic-molecule composition; hydrogens get the small CHARMM-like radius
// so they stay submerged in their parent's envelope.
const Element kElements[] = {
    {"H", 1.00, 0.42}, {"C", 1.70, 0.30}, {"N", 1.55, 0.11},
    {"O", 1.52, 0.13}, {"S", 1.80, 0.04},
};

const Element& pick_element(std::mt19937_64& gen) {
  double u = erbfit::uniform_unit(gen);
  for (const Element& e : kElements) {
    if (u < e.weight) return e;
    u -= e.weight;
  }
  return kElements[1];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic molecule as a PQR file"};
  int n_atoms = 39;
  unsigned long long seed = 1;
  double compact = 0.35;  // 0 = extended chain, 1 = tight blob
  std::string out_path;
  app.add_option("--atoms", n_atoms, "atom count")->required();
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--compact", compact, "centroid pull in [0,1]");
  app.add_option("--out", out_path, "output PQR path")->required();
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 gen(seed);
  std::vector<Vec3> centers;
  std::vector<const Element*> elems;
  std::vector<std::size_t> heavy;  // hydrogens are terminal
  centers.push_back({0, 0, 0});
  elems.push_back(&kElements[1]);  // start on carbon
  heavy.push_back(0);
  Vec3 centroid{0, 0, 0};
  double min_sep = 0.92;

  while (static_cast<int>(centers.size()) < n_atoms) {
    const Element& elem = pick_element(gen);
    const bool is_h = elem.name[0] == 'H';
    // Covalent-scale steps: hydrogens sit close to their parent so their
    // spheres stay mostly submerged, like force-field geometries.
    const double bond = is_h ? 1.05 : 1.45;

    // Attach heavy atoms near the growth front, hydrogens anywhere heavy.
    const std::size_t attach =
        is_h || erbfit::uniform_unit(gen) < 0.35
            ? heavy[erbfit::uniform_below(gen, heavy.size())]
            : heavy.back();
    const Vec3 base = centers[attach];

    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      Vec3 dir = random_unit(gen);
      Vec3 pull = centroid - base;
      const double pn = pull.norm();
      if (pn > 1e-9 && !is_h) dir += compact * (pull * (1.0 / pn));
      dir = dir * (1.0 / dir.norm());
      const Vec3 cand = base + dir * bond;

      bool ok = true;
      for (std::size_t i = 0; i < centers.size(); ++i) {
        const double sep = (i == attach) ? 0.0 : min_sep;
        if (i != attach && (cand - centers[i]).norm2() < sep * sep) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      centers.push_back(cand);
      elems.push_back(&elem);
      if (!is_h) heavy.push_back(centers.size() - 1);
      centroid = {0, 0, 0};
      for (const Vec3& c : centers) centroid += c;
      centroid = centroid * (1.0 / centers.size());
      placed = true;
    }
    if (!placed) {
      // Saturated pocket; relax the separation a touch and retry.
      min_sep *= 0.98;
    }
  }

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot open " << out_path << "\n";
    return 1;
  }
  out << "REMARK synthetic molecule, seed " << seed << ", compact " << compact
      << "\n";
  char buf[160];
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double charge = 0.4 * gauss(gen);
    std::snprintf(buf, sizeof(buf),
                  "ATOM  %5zu %-3s MOL %5zu    %8.3f %8.3f %8.3f %7.4f %6.4f\n",
                  i + 1, elems[i]->name, i + 1, centers[i].x, centers[i].y,
                  centers[i].z, charge, elems[i]->radius);
    out << buf;
  }
  out << "END\n";
  std::cout << out_path << ": " << centers.size() << " atoms\n";
  return 0;
}
