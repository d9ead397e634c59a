#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "erbfit/error.hpp"
#include "erbfit/model_io.hpp"
#include "testutil.hpp"

using namespace erbfit;

TEST_CASE("model document round-trips") {
  std::mt19937_64 gen(71);
  ModelDoc doc;
  doc.params = testutil::random_params(gen, 6);
  // Stored values are squares, so make tildes non-negative for exact
  // round-tripping (training keeps them positive in practice; sqrt(w^2)
  // recovers |w~|, which represents the same network either way).
  for (auto& n : doc.params.neurons) n.w_tilde = std::abs(n.w_tilde);
  doc.source = "mol42";
  doc.decay = 0.5;
  doc.isovalue = 1.0;
  doc.iterations = 10000;
  doc.seed = 1234567890123ULL;
  doc.box = {{-8.5, -7, -6}, {9, 8.25, 7.125}};

  std::ostringstream out;
  write_model(out, doc);
  std::istringstream in(out.str());
  const ModelDoc back = read_model(in);

  CHECK(back.source == doc.source);
  CHECK(back.decay == doc.decay);
  CHECK(back.isovalue == doc.isovalue);
  CHECK(back.iterations == doc.iterations);
  CHECK(back.seed == doc.seed);
  CHECK(back.box.min_corner.x == doc.box.min_corner.x);
  CHECK(back.box.max_corner.z == doc.box.max_corner.z);
  REQUIRE(back.params.neuron_count() == doc.params.neuron_count());
  for (std::size_t i = 0; i < doc.params.neuron_count(); ++i) {
    const ErbfNeuron& a = doc.params.neurons[i];
    const ErbfNeuron& b = back.params.neurons[i];
    // w and d round-trip through squares: relative 1-ulp agreement.
    CHECK(b.w_tilde == doctest::Approx(a.w_tilde).epsilon(1e-15));
    CHECK(b.d_tilde.x == doctest::Approx(a.d_tilde.x).epsilon(1e-15));
    CHECK(b.center.x == a.center.x);
    CHECK(b.center.y == a.center.y);
    CHECK(b.angles.z == a.angles.z);
  }
}

TEST_CASE("identical documents serialize to identical bytes") {
  std::mt19937_64 gen(72);
  ModelDoc doc;
  doc.params = testutil::random_params(gen, 4);
  doc.source = "det";
  std::ostringstream a, b;
  write_model(a, doc);
  write_model(b, doc);
  CHECK(a.str() == b.str());
}

TEST_CASE("reader rejects malformed documents") {
  SUBCASE("wrong magic") {
    std::istringstream in("not-a-model 1\n");
    CHECK_THROWS_AS(read_model(in), ParseError);
  }
  SUBCASE("negative stored weight") {
    std::istringstream in(
        "erbfit-model 1\nsource x\nneurons 1\n"
        "-1 0.5 0.5 0.5 0 0 0 0 0 0\n");
    CHECK_THROWS_AS(read_model(in), ValidationError);
  }
  SUBCASE("truncated neuron rows") {
    std::istringstream in("erbfit-model 1\nsource x\nneurons 2\n"
                          "1 0.5 0.5 0.5 0 0 0 0 0 0\n");
    CHECK_THROWS_AS(read_model(in), ParseError);
  }
}
