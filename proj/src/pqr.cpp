#include "erbfit/pqr.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "erbfit/error.hpp"

namespace erbfit {

namespace {

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream iss(line);
  std::string t;
  while (iss >> t) toks.push_back(std::move(t));
  return toks;
}

}  // namespace

AtomSet parse_pqr(std::istream& in, const std::string& source_name) {
  AtomSet set;
  set.source_name = source_name;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0] != "ATOM" && toks[0] != "HETATM") continue;

    if (toks.size() < 6) {
      throw ParseError("pqr line " + std::to_string(line_no) +
                       ": atom record has fewer than 5 fields after '" +
                       toks[0] + "'");
    }
    // Last five tokens: x y z charge radius.
    double f[5];
    for (int k = 0; k < 5; ++k) {
      const std::string& tok = toks[toks.size() - 5 + k];
      if (!parse_double(tok, f[k])) {
        throw ParseError("pqr line " + std::to_string(line_no) +
                         ": malformed numeric field '" + tok + "'");
      }
    }
    Atom atom;
    atom.center = {f[0], f[1], f[2]};
    atom.charge = f[3];
    atom.radius = f[4];

    const std::size_t index = set.atoms.size() + 1;  // 1-based
    if (!(atom.radius > 0.0)) {
      throw ValidationError("atom " + std::to_string(index) + " (line " +
                            std::to_string(line_no) +
                            "): radius must be positive, got " +
                            std::to_string(atom.radius));
    }
    if (!atom.center.finite() || !std::isfinite(atom.charge)) {
      throw ValidationError("atom " + std::to_string(index) + " (line " +
                            std::to_string(line_no) +
                            "): non-finite coordinate or charge");
    }
    set.atoms.push_back(atom);
  }

  if (set.atoms.empty()) {
    throw ValidationError("empty molecule: no ATOM/HETATM records in '" +
                          source_name + "'");
  }
  return set;
}

AtomSet parse_pqr_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open PQR file '" + path + "'");
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos)
    name = name.substr(0, dot);
  return parse_pqr(in, name);
}

void write_pqr(std::ostream& out, const AtomSet& atoms) {
  char buf[256];
  int serial = 0;
  for (const Atom& a : atoms.atoms) {
    ++serial;
    std::snprintf(buf, sizeof(buf),
                  "ATOM %6d  X   MOL %5d %.17g %.17g %.17g %.17g %.17g\n",
                  serial, serial, a.center.x, a.center.y, a.center.z, a.charge,
                  a.radius);
    out << buf;
  }
  out << "END\n";
}

void write_pqr_file(const std::string& path, const AtomSet& atoms) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_pqr(out, atoms);
}

BoundingBox bounding_box(const AtomSet& atoms, double padding) {
  if (atoms.atoms.empty()) throw ValidationError("bounding_box: empty AtomSet");
  if (padding < 0.0) throw ValidationError("bounding_box: negative padding");

  const Atom& a0 = atoms.atoms.front();
  Vec3 lo = a0.center - Vec3{a0.radius, a0.radius, a0.radius};
  Vec3 hi = a0.center + Vec3{a0.radius, a0.radius, a0.radius};
  for (const Atom& a : atoms.atoms) {
    Vec3 r{a.radius, a.radius, a.radius};
    lo = min(lo, a.center - r);
    hi = max(hi, a.center + r);
  }
  Vec3 pad{padding, padding, padding};
  return {lo - pad, hi + pad};
}

}  // namespace erbfit
