#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "erbfit/vec.hpp"

namespace erbfit {

struct Atom {
  Vec3 center;    // Å
  double radius;  // Å, > 0
  double charge;  // parsed and kept as metadata; the fit ignores it
};

struct AtomSet {
  std::vector<Atom> atoms;
  std::string source_name;

  std::size_t size() const { return atoms.size(); }
};

struct BoundingBox {
  Vec3 min_corner;
  Vec3 max_corner;

  Vec3 extent() const { return max_corner - min_corner; }
  bool contains(const Vec3& p) const {
    return p.x >= min_corner.x && p.x <= max_corner.x && p.y >= min_corner.y &&
           p.y <= max_corner.y && p.z >= min_corner.z && p.z <= max_corner.z;
  }
};

// Parses PQR text. One Atom per ATOM/HETATM record, in file order; the last
// five whitespace-separated tokens of a record are x y z charge radius
// (intermediate columns vary in the wild and are not interpreted).
// Throws ParseError (with 1-based line number) on malformed numeric fields,
// ValidationError on non-positive radius or non-finite coordinates, and
// ValidationError("empty molecule ...") when no atom records are present.
AtomSet parse_pqr(std::istream& in, const std::string& source_name);
AtomSet parse_pqr_file(const std::string& path);

// Serializes in a form parse_pqr round-trips to identical centers/radii.
void write_pqr(std::ostream& out, const AtomSet& atoms);
void write_pqr_file(const std::string& path, const AtomSet& atoms);

// Componentwise [min(center - radius), max(center + radius)] widened by
// `padding` on every side. padding must be >= 0.
BoundingBox bounding_box(const AtomSet& atoms, double padding);

}  // namespace erbfit
