#include "erbfit/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "erbfit/error.hpp"

namespace erbfit {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_model(std::ostream& out, const ModelDoc& doc) {
  out << "erbfit-model 1\n";
  out << "source " << doc.source << "\n";
  out << "decay " << g17(doc.decay) << "\n";
  out << "isovalue " << g17(doc.isovalue) << "\n";
  out << "iterations " << doc.iterations << "\n";
  out << "seed " << doc.seed << "\n";
  out << "box " << g17(doc.box.min_corner.x) << " " << g17(doc.box.min_corner.y)
      << " " << g17(doc.box.min_corner.z) << " " << g17(doc.box.max_corner.x)
      << " " << g17(doc.box.max_corner.y) << " " << g17(doc.box.max_corner.z)
      << "\n";
  out << "neurons " << doc.params.neuron_count() << "\n";
  out << "# weight dx dy dz cx cy cz alpha beta gamma\n";
  for (const ErbfNeuron& n : doc.params.neurons) {
    out << g17(n.w_tilde * n.w_tilde) << " " << g17(n.d_tilde.x * n.d_tilde.x)
        << " " << g17(n.d_tilde.y * n.d_tilde.y) << " "
        << g17(n.d_tilde.z * n.d_tilde.z) << " " << g17(n.center.x) << " "
        << g17(n.center.y) << " " << g17(n.center.z) << " " << g17(n.angles.x)
        << " " << g17(n.angles.y) << " " << g17(n.angles.z) << "\n";
  }
}

void write_model_file(const std::string& path, const ModelDoc& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_model(out, doc);
}

ModelDoc read_model(std::istream& in) {
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != "erbfit-model" || version != 1)
    throw ParseError("not an erbfit-model document");

  ModelDoc doc;
  std::size_t n_neurons = 0;
  bool have_neurons = false;
  while (in >> word) {
    if (word == "source") {
      in >> doc.source;
    } else if (word == "decay") {
      in >> doc.decay;
    } else if (word == "isovalue") {
      in >> doc.isovalue;
    } else if (word == "iterations") {
      in >> doc.iterations;
    } else if (word == "seed") {
      in >> doc.seed;
    } else if (word == "box") {
      in >> doc.box.min_corner.x >> doc.box.min_corner.y >>
          doc.box.min_corner.z >> doc.box.max_corner.x >>
          doc.box.max_corner.y >> doc.box.max_corner.z;
    } else if (word == "neurons") {
      in >> n_neurons;
      have_neurons = true;
      break;
    } else {
      throw ParseError("model: unknown header field '" + word + "'");
    }
    if (!in) throw ParseError("model: malformed value for '" + word + "'");
  }
  if (!have_neurons) throw ParseError("model: missing neurons section");

  std::string line;
  std::getline(in, line);  // rest of the neurons line
  doc.params.neurons.reserve(n_neurons);
  while (doc.params.neurons.size() < n_neurons && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double w, d0, d1, d2;
    ErbfNeuron nr;
    row >> w >> d0 >> d1 >> d2 >> nr.center.x >> nr.center.y >> nr.center.z >>
        nr.angles.x >> nr.angles.y >> nr.angles.z;
    if (!row)
      throw ParseError("model: malformed neuron row " +
                       std::to_string(doc.params.neurons.size() + 1));
    if (w < 0.0 || d0 < 0.0 || d1 < 0.0 || d2 < 0.0)
      throw ValidationError("model: negative weight or axis value in row " +
                            std::to_string(doc.params.neurons.size() + 1));
    nr.w_tilde = std::sqrt(w);
    nr.d_tilde = {std::sqrt(d0), std::sqrt(d1), std::sqrt(d2)};
    doc.params.neurons.push_back(nr);
  }
  if (doc.params.neurons.size() != n_neurons)
    throw ParseError("model: expected " + std::to_string(n_neurons) +
                     " neuron rows, found " +
                     std::to_string(doc.params.neurons.size()));
  return doc;
}

ModelDoc read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  return read_model(in);
}

}  // namespace erbfit
