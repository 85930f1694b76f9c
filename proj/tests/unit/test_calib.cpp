// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "qfl/calib.hpp"

using namespace qfl;
namespace fs = std::filesystem;

namespace {

BackendProfile make_line_profile(const std::string& name, int n, double err2q,
                                 double err1q = 3e-4, double ro = 0.01, double t1 = 100.0,
                                 double t2 = 80.0) {
  BackendProfile p;
  p.name = name;
  p.num_qubits = n;
  for (int i = 0; i + 1 < n; ++i) {
    p.coupling.push_back({i, i + 1});
    p.err_2q.push_back(err2q);
  }
  p.t1_us.assign(n, t1);
  p.t2_us.assign(n, t2);
  p.readout_error.assign(n, ro);
  p.err_1q.assign(n, err1q);
  p.gate_time_us = 0.05;
  return p;
}

fs::path write_profile_json(const BackendProfile& p, const std::string& filename) {
  nlohmann::json j;
  j["name"] = p.name;
  j["num_qubits"] = p.num_qubits;
  for (const auto& e : p.coupling) j["coupling"].push_back({e[0], e[1]});
  j["t1_us"] = p.t1_us;
  j["t2_us"] = p.t2_us;
  j["readout_error"] = p.readout_error;
  j["err_1q"] = p.err_1q;
  for (std::size_t i = 0; i < p.coupling.size(); ++i)
    j["err_2q"].push_back({{"edge", {p.coupling[i][0], p.coupling[i][1]}}, {"value", p.err_2q[i]}});
  j["gate_time_us"] = p.gate_time_us;

  const fs::path dir = fs::temp_directory_path() / "qfl_calib_test";
  fs::create_directories(dir);
  const fs::path path = dir / filename;
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

}  // namespace

TEST_CASE("load_profile round-trips a 5-qubit line profile") {
  const auto path = write_profile_json(make_line_profile("linear5", 5, 0.01), "linear5.json");
  const auto p = load_profile(path.string());
  CHECK(p.name == "linear5");
  CHECK(p.num_qubits == 5);
  CHECK(p.coupling.size() == 4);
  CHECK(p.err_2q.size() == 4);
  CHECK(p.adjacent(2, 3));
  CHECK_FALSE(p.adjacent(0, 4));
  CHECK(p.connected());
}

TEST_CASE("load_profile rejects an out-of-range two-qubit error") {
  auto p = make_line_profile("bad2q", 5, 0.01);
  p.err_2q[2] = 1.5;
  const auto path = write_profile_json(p, "bad2q.json");
  CHECK_THROWS_WITH_AS(load_profile(path.string()),
                       doctest::Contains("err_2q out of [0,1]"), std::runtime_error);
}

TEST_CASE("load_profile rejects an edge referencing a missing qubit") {
  auto p = make_line_profile("badedge", 5, 0.01);
  p.coupling.push_back({0, 7});
  p.err_2q.push_back(0.01);
  const auto path = write_profile_json(p, "badedge.json");
  CHECK_THROWS_WITH_AS(load_profile(path.string()),
                       doctest::Contains("edge references missing qubit"), std::runtime_error);
}

TEST_CASE("load_profile rejects per-qubit arrays of the wrong arity") {
  auto p = make_line_profile("shortarr", 5, 0.01);
  p.t1_us.pop_back();
  const auto path = write_profile_json(p, "shortarr.json");
  CHECK_THROWS(load_profile(path.string()));
}

TEST_CASE("validate warns but does not reject T2 > 2*T1") {
  auto p = make_line_profile("hot", 3, 0.01, 3e-4, 0.01, 50.0, 120.0);
  const auto warnings = p.validate();
  CHECK(warnings.size() == 3);
}

TEST_CASE("composite score of a single profile is the weight sum") {
  const auto scored = composite_score({make_line_profile("solo", 5, 0.02)}, CompositeWeights{});
  REQUIRE(scored.size() == 1);
  CHECK(scored[0].second == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("identical profiles share the same composite score") {
  const auto a = make_line_profile("a", 5, 0.02);
  auto b = a;
  b.name = "b";
  const auto scored = composite_score({a, b}, CompositeWeights{});
  CHECK(scored[0].second == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(scored[1].second == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("composite score separates profiles differing only in two-qubit error") {
  // Hand evaluation: median eps2q = 0.03, C_A = 5*(0.01/0.03) + 5, C_B = 5*(0.05/0.03) + 5.
  const auto a = make_line_profile("a", 5, 0.01);
  const auto b = make_line_profile("b", 5, 0.05);
  const auto scored = composite_score({a, b}, CompositeWeights{});
  CHECK(scored[0].second == doctest::Approx(20.0 / 3.0).epsilon(1e-6));
  CHECK(scored[1].second == doctest::Approx(40.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("composite score is covariant under per-component rescaling") {
  std::vector<BackendProfile> profiles;
  for (int i = 0; i < 6; ++i)
    profiles.push_back(make_line_profile("p" + std::to_string(i), 5, 0.01 + 0.01 * i,
                                         1e-4 * (i + 1), 0.01 * (i + 1)));
  const auto base = composite_score(profiles, CompositeWeights{});
  for (auto& p : profiles)
    for (auto& e : p.err_2q) e *= 3.0;
  const auto scaled = composite_score(profiles, CompositeWeights{});
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(scaled[i].second == doctest::Approx(base[i].second).epsilon(1e-9));
  for (const auto& [name, c] : base) CHECK(c >= 0.0);
}

TEST_CASE("empty profile set is rejected") {
  CHECK_THROWS(composite_score({}, CompositeWeights{}));
}

TEST_CASE("rank_and_pool splits ten backends into two pools of five") {
  std::vector<std::pair<std::string, double>> scored;
  for (int i = 0; i < 10; ++i) scored.push_back({"b" + std::to_string(i), 10.0 - i});
  const auto r = rank_and_pool(scored, 5);
  CHECK(r.good_pool.size() == 5);
  CHECK(r.bad_pool.size() == 5);
  CHECK(r.best == "b9");  // lowest score after sorting
  std::set<std::string> good(r.good_pool.begin(), r.good_pool.end());
  for (const auto& n : r.bad_pool) CHECK(good.count(n) == 0);
  // Permutation: all names preserved.
  std::set<std::string> names;
  for (const auto& [n, c] : r.scored) names.insert(n);
  CHECK(names.size() == 10);
}

TEST_CASE("rank_and_pool minimal case") {
  const auto r = rank_and_pool({{"x", 2.0}, {"y", 1.0}}, 1);
  CHECK(r.good_pool == std::vector<std::string>{"y"});
  CHECK(r.bad_pool == std::vector<std::string>{"x"});
  CHECK(r.best == "y");
}

TEST_CASE("rank_and_pool breaks score ties by name") {
  const auto r = rank_and_pool({{"B", 3.0}, {"A", 3.0}, {"C", 9.0}}, 1);
  CHECK(r.good_pool == std::vector<std::string>{"A"});
  CHECK(r.best == "A");
}

TEST_CASE("rank_and_pool rejects oversized pools") {
  CHECK_THROWS(rank_and_pool({{"a", 1.0}, {"b", 2.0}, {"c", 3.0}}, 2));
}

TEST_CASE("assign_clients honors the bad-client ratio exactly") {
  BackendRanking r;
  r.good_pool = {"g0", "g1"};
  r.bad_pool = {"b0", "b1", "b2"};
  const auto a = assign_clients(r, 10, 0.8, 123);
  REQUIRE(a.size() == 10);
  int bad = 0;
  for (const auto& c : a) {
    if (c.group == ClientGroup::Bad) {
      ++bad;
      CHECK(c.backend[0] == 'b');
    } else {
      CHECK(c.backend[0] == 'g');
    }
  }
  CHECK(bad == 8);
  for (int i = 0; i < 10; ++i) CHECK(a[i].client_id == i);
}

TEST_CASE("assign_clients boundary ratios") {
  BackendRanking r;
  r.good_pool = {"g0"};
  r.bad_pool = {"X", "Y"};
  for (const auto& c : assign_clients(r, 7, 0.0, 5)) CHECK(c.group == ClientGroup::Good);
  const auto all_bad = assign_clients(r, 3, 1.0, 5);
  for (const auto& c : all_bad) {
    CHECK(c.group == ClientGroup::Bad);
    CHECK((c.backend == "X" || c.backend == "Y"));
  }
}

TEST_CASE("assign_clients is reproducible per seed and split-stable across seeds") {
  BackendRanking r;
  r.good_pool = {"g0", "g1", "g2"};
  r.bad_pool = {"b0", "b1", "b2"};
  const auto a1 = assign_clients(r, 10, 0.5, 77);
  const auto a2 = assign_clients(r, 10, 0.5, 77);
  REQUIRE(a1.size() == a2.size());
  for (std::size_t i = 0; i < a1.size(); ++i) {
    CHECK(a1[i].backend == a2[i].backend);
    CHECK(a1[i].group == a2[i].group);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    int bad = 0;
    for (const auto& c : assign_clients(r, 10, 0.5, seed))
      if (c.group == ClientGroup::Bad) ++bad;
    CHECK(bad == 5);
  }
}

TEST_CASE("round-half-up on the bad count") {
  BackendRanking r;
  r.good_pool = {"g"};
  r.bad_pool = {"b"};
  int bad = 0;
  for (const auto& c : assign_clients(r, 5, 0.5, 1))  // 2.5 -> 3
    if (c.group == ClientGroup::Bad) ++bad;
  CHECK(bad == 3);
}

TEST_CASE("median conventions") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({1.0, 2.0}) == 1.5);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
}
