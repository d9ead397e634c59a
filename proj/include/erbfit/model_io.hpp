#pragma once

#include <iosfwd>
#include <string>

#include "erbfit/density.hpp"
#include "erbfit/erbf.hpp"
#include "erbfit/pqr.hpp"

namespace erbfit {

// Self-describing model document. Stores physical values (w = w~^2,
// d_q = d~_q^2, both non-negative), so readers recover the tilde variables
// by square roots. Metadata makes cmd_mesh work on a model file alone.
struct ModelDoc {
  ErbfParams params;
  std::string source;  // molecule label
  double decay = kDefaultDecay;
  double isovalue = kDefaultIsovalue;
  long iterations = 0;
  unsigned long long seed = 0;
  BoundingBox box;  // training bounding box (padded)
};

// %.17g formatting throughout: identical doubles serialize to identical
// bytes, which the determinism contract relies on.
void write_model(std::ostream& out, const ModelDoc& doc);
void write_model_file(const std::string& path, const ModelDoc& doc);
ModelDoc read_model(std::istream& in);
ModelDoc read_model_file(const std::string& path);

}  // namespace erbfit
