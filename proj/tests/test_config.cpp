#include <doctest.h>

#include <sstream>

#include "kgsm/config.hpp"
#include "kgsm/csv.hpp"

using namespace kgsm;
using nlohmann::json;

namespace {

ExperimentConfig random_config(RngStream& s) {
  ExperimentConfig c;
  const SpectrumKind kinds[] = {SpectrumKind::OneSmall, SpectrumKind::TwoSmall,
                                SpectrumKind::Linear,   SpectrumKind::ManySmall,
                                SpectrumKind::ConvexPoly, SpectrumKind::ConcavePoly,
                                SpectrumKind::Explicit};
  c.preset.kind = kinds[s.uniform_index(7)];
  if (c.preset.kind == SpectrumKind::Explicit) {
    c.preset = SpectrumPreset::from_sigma({3.0, 2.0, s.uniform()}, 10 + s.uniform_index(5));
  }
  if (s.uniform() < 0.2) {
    c.generator = "gaussian";
  }
  c.methods = {Method::Kgsm};
  if (s.uniform() < 0.5) {
    c.methods.push_back(Method::Hbm);
  }
  c.mass = s.uniform();
  if (s.uniform() < 0.5) {
    c.beta = s.uniform();
  }
  c.iterations = s.uniform_index(1000000);
  c.trials = 1 + s.uniform_index(10);
  c.tracked = {1 + s.uniform_index(c.preset.cols)};
  c.seed = s.next_u64();
  c.stride = s.uniform_index(10);
  c.sampling = s.uniform() < 0.5 ? Sampling::Uniform : Sampling::SquaredNorm;
  c.zero_start = s.uniform() < 0.5;
  c.output = "dir_" + std::to_string(s.uniform_index(100));
  c.svg = s.uniform() < 0.5;
  return c;
}

} // namespace

TEST_CASE("config JSON round trip is the identity") {
  RngStream s(1);
  for (int i = 0; i < 200; ++i) {
    const ExperimentConfig c = random_config(s);
    const json j = to_json(c);
    const ExperimentConfig back = config_from_json(json::parse(j.dump()));
    CHECK(back == c);
    CHECK(to_json(back) == j);
    CHECK_NOTHROW(c.validate());
  }
  const ExperimentConfig defaults;
  CHECK(config_from_json(json::object()) == defaults);
  CHECK(config_from_json(to_json(defaults)) == defaults);
}

TEST_CASE("config documents are strict") {
  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"masss", 0.5}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"system", {{"preset", "tiny"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"system", {{"colz", 3}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"methods", {"newton"}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"beta", "later"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"iterations", "many"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"sampling", "random"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"x0", "ones"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"system", {{"preset", "explicit"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"system", {{"preset", "linear"}, {"sigma", {1.0}}}}}),
                  ConfigError);
  const auto e = config_from_json({{"system", {{"preset", "explicit"}, {"sigma", {2.0, 1.0}}}}});
  CHECK(e.preset.cols == 2);
  CHECK(e.preset.explicit_sigma == Vector{2.0, 1.0});
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.methods = {Method::Kaczmarz};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.mass = 0.0;
  CHECK_NOTHROW(c.validate());
  c.beta = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  const auto k = config_from_json({{"methods", {"kaczmarz"}}});
  CHECK(k.mass == 0.0);
  CHECK_NOTHROW(k.validate());

  ExperimentConfig d;
  d.mass = 1.5;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = {};
  d.beta = 1.0;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = {};
  d.trials = 0;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = {};
  d.tracked = {21};
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.tracked = {0};
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = {};
  d.preset.rows = 10;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = {};
  d.preset.kind = SpectrumKind::Linear;
  d.preset.cols = 30;
  d.preset.rows = 100;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = {};
  d.methods.clear();
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = {};
  d.generator = "sparse";
  CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("tracked directions") {
  ExperimentConfig c;
  CHECK(c.tracked_zero_based() == std::vector<std::size_t>{19});
  c.tracked = {20, 1, 20};
  CHECK(c.tracked_zero_based() == std::vector<std::size_t>{0, 19});
}

TEST_CASE("instances regenerate bit for bit") {
  const SystemDescriptor d{"spectrum", SpectrumPreset::named(SpectrumKind::TwoSmall), 42};
  const Instance a = make_instance(d, false);
  const Instance b = make_instance(d, false);
  CHECK(a.system.b == b.system.b);
  CHECK(a.x0 == b.x0);
  CHECK(regenerate(d).b == a.system.b);
  const Instance z = make_instance(d, true);
  CHECK(z.x0 == Vector(20, 0.0));
  CHECK(z.system.b == a.system.b);
  CHECK_THROWS_AS(make_instance({"sparse", d.preset, 1}, false), ConfigError);
}

TEST_CASE("system export") {
  const SystemDescriptor d{"gaussian", SpectrumPreset::named(SpectrumKind::OneSmall, 7, 3), 5};
  const LinearSystem sys = regenerate(d);
  const json j = system_to_json(sys, d);
  CHECK(j.at("rows") == 7);
  CHECK(j.at("cols") == 3);
  CHECK(j.at("a").size() == 7);
  CHECK(j.at("a")[2][1].get<double>() == sys.a(2, 1));
  CHECK(j.at("b").get<Vector>() == sys.b);
  CHECK(j.at("descriptor").at("seed") == 5);
  CHECK(j.at("descriptor").at("generator") == "gaussian");

  std::istringstream in(system_to_csv(sys));
  const auto t = csv::read(in);
  CHECK(t.header.size() == 4);
  CHECK(t.rows.size() == 7);
  CHECK(t.numeric_column("b") == sys.b);
  CHECK(t.numeric_column("a_3")[6] == sys.a(6, 2));
}
