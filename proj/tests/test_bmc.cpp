#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "habs/bmc.hpp"
#include "habs/ltl.hpp"
#include "habs/sat.hpp"
#include "habs/ts.hpp"
#include "support/oracles.hpp"

using habs::Alphabet;
using habs::BmcEncoding;
using habs::LtlPtr;
using habs::SatStatus;
using habs::StateId;
using habs::Trace;
using habs::TransitionSystem;

namespace {

Alphabet one_mode() { return {{"q0"}, {"o", "A", "B"}}; }

bool bmc_sat(const TransitionSystem& ts, const LtlPtr& phi, const Alphabet& alpha,
             std::uint32_t bound, const std::vector<StateId>& initials = {}) {
  const BmcEncoding enc = habs::encode_bmc(ts, phi, alpha, bound, initials);
  return habs::sat_solve(enc.cnf).status == SatStatus::satisfiable;
}

}  // namespace

TEST_CASE("self-loop satisfying an invariant has no counterexample at any bound") {
  const TransitionSystem ts({"s"}, {"q0,o"}, {{0, 0}});
  const LtlPtr phi = habs::parse_ltl("G (q0,o)", one_mode());
  for (std::uint32_t k = 1; k <= 5; ++k) CHECK_FALSE(bmc_sat(ts, phi, one_mode(), k));
}

TEST_CASE("one-step reachability of a bad output") {
  const TransitionSystem ts({"a", "b"}, {"q0,A", "q0,B"}, {{0, 1}});
  const Alphabet alpha = one_mode();
  const LtlPtr phi = habs::parse_ltl("G (q0,A)", alpha);

  const BmcEncoding enc = habs::encode_bmc(ts, phi, alpha, 1);
  const habs::SatResult r = habs::sat_solve(enc.cnf);
  REQUIRE(r.status == SatStatus::satisfiable);
  CHECK(r.assignment.at(1));  // variable 1 is pinned true

  const std::vector<StateId> path = habs::decode_state_path(enc, r.assignment);
  CHECK(path == std::vector<StateId>{0, 1});
  CHECK_FALSE(habs::decode_loop_back(enc, r.assignment).has_value());

  const Trace w = habs::decode_witness(enc, r.assignment, ts);
  REQUIRE(w.steps.size() == 2);
  CHECK(w.steps[0].label == static_cast<std::uint32_t>(alpha.label_index("A")));
  CHECK(w.steps[1].label == static_cast<std::uint32_t>(alpha.label_index("B")));
  CHECK(habs::eval_trace(habs::ltl_not(phi), w));
}

TEST_CASE("initial-state constraint narrows the search") {
  const TransitionSystem ts({"a", "b"}, {"q0,A", "q0,B"}, {{0, 1}});
  const Alphabet alpha = one_mode();
  const LtlPtr phi = habs::parse_ltl("G (q0,A)", alpha);

  CHECK(bmc_sat(ts, phi, alpha, 1, {0}));
  // b is a deadlock: no length-1 path starts there.
  CHECK_FALSE(bmc_sat(ts, phi, alpha, 1, {1}));
  // An empty set leaves the start unconstrained.
  CHECK(bmc_sat(ts, phi, alpha, 1));
}

TEST_CASE("encoding metadata matches the documented layout") {
  const TransitionSystem ts({"a", "b"}, {"q0,A", "q0,B"}, {{0, 1}, {1, 0}});
  const LtlPtr phi = habs::parse_ltl("G (q0,A)", one_mode());
  const BmcEncoding enc = habs::encode_bmc(ts, phi, one_mode(), 2);

  CHECK(enc.num_states == 2);
  CHECK(enc.bound == 2);
  CHECK(enc.state_var(0, 0) == 2);
  CHECK(enc.state_var(0, 1) == 3);
  CHECK(enc.state_var(2, 1) == 7);
  CHECK(enc.loop_var(0) == 8);
  CHECK(enc.loop_var(2) == 10);
  CHECK(enc.cnf.num_vars >= enc.loop_var(2));
  CHECK(enc.cnf.var_map_note.find("bmc layout v1") != std::string::npos);

  // Variable 1 is the pinned constant.
  bool pinned = false;
  for (const auto& clause : enc.cnf.clauses)
    if (clause.size() == 1 && clause[0] == 1) pinned = true;
  CHECK(pinned);
}

TEST_CASE("encoder rejects bad inputs") {
  const TransitionSystem ts({"a"}, {"q0,A"}, {{0, 0}});
  const Alphabet alpha = one_mode();
  const LtlPtr phi = habs::parse_ltl("G (q0,A)", alpha);

  CHECK_THROWS_AS(habs::encode_bmc(ts, nullptr, alpha, 2), std::invalid_argument);
  CHECK_THROWS_AS(habs::encode_bmc(ts, phi, alpha, 0), std::invalid_argument);
  CHECK_THROWS_AS(habs::encode_bmc(ts, phi, alpha, 2, {5}), std::invalid_argument);

  // Output label missing from the atom universe.
  const TransitionSystem off({"a"}, {"q0,zz"}, {{0, 0}});
  CHECK_THROWS_AS(habs::encode_bmc(off, phi, alpha, 2), std::invalid_argument);
  const TransitionSystem bare({"a"}, {"plain"}, {{0, 0}});
  CHECK_THROWS_AS(habs::encode_bmc(bare, phi, alpha, 2), std::invalid_argument);
}

TEST_CASE("malformed assignments fail loudly in the decoder") {
  const TransitionSystem ts({"a", "b"}, {"q0,A", "q0,B"}, {{0, 1}});
  const BmcEncoding enc = habs::encode_bmc(ts, habs::parse_ltl("G (q0,A)", one_mode()),
                                           one_mode(), 1);

  std::vector<bool> silent(static_cast<std::size_t>(enc.cnf.num_vars) + 1, false);
  CHECK_THROWS_AS(habs::decode_state_path(enc, silent), std::logic_error);

  std::vector<bool> doubled(silent);
  doubled[static_cast<std::size_t>(enc.state_var(0, 0))] = true;
  doubled[static_cast<std::size_t>(enc.state_var(0, 1))] = true;
  CHECK_THROWS_AS(habs::decode_state_path(enc, doubled), std::logic_error);

  CHECK_THROWS_AS(habs::decode_state_path(enc, std::vector<bool>(3, false)),
                  std::invalid_argument);
}

TEST_CASE("verdicts agree with exhaustive path enumeration") {
  testsup::Rng rng(60601);
  const Alphabet alpha = {{"m0", "m1"}, {"x", "y", "z"}};
  const std::vector<std::string> pool = {"m0,x", "m0,y", "m1,z", "m1,x"};
  std::uniform_int_distribution<std::uint32_t> size_dist(1, 6);
  std::uniform_int_distribution<std::uint32_t> bound_dist(1, 6);
  std::bernoulli_distribution force_total(0.5);

  int sat_seen = 0, unsat_seen = 0;
  for (int round = 0; round < 120; ++round) {
    const TransitionSystem ts =
        testsup::random_ts(rng, size_dist(rng), pool, 0.35, force_total(rng));
    const LtlPtr phi = testsup::random_ltl(rng, alpha, 6);
    const std::uint32_t k = bound_dist(rng);

    const bool expected = testsup::bmc_exists_counterexample(ts, phi, alpha, k);
    const BmcEncoding enc = habs::encode_bmc(ts, phi, alpha, k);
    const habs::SatResult r = habs::sat_solve(enc.cnf);
    const bool got = r.status == SatStatus::satisfiable;
    REQUIRE(got == expected);

    if (got) {
      ++sat_seen;
      // decode_witness replays the path and re-checks the violation; any
      // inconsistency throws.
      const Trace w = habs::decode_witness(enc, r.assignment, ts);
      CHECK(w.steps.size() == k + 1);
      if (w.loop_back) CHECK(*w.loop_back <= k);
      CHECK(habs::eval_trace(habs::ltl_not(phi), w));
    } else {
      ++unsat_seen;
    }
  }
  CHECK(sat_seen > 15);
  CHECK(unsat_seen > 15);
}

TEST_CASE("initial-state constraint agrees with the enumeration oracle") {
  testsup::Rng rng(991);
  const Alphabet alpha = {{"m0", "m1"}, {"x", "y", "z"}};
  const std::vector<std::string> pool = {"m0,x", "m0,y", "m1,z"};

  for (int round = 0; round < 40; ++round) {
    const TransitionSystem ts = testsup::random_ts(rng, 5, pool, 0.3, false);
    const LtlPtr phi = testsup::random_ltl(rng, alpha, 5);
    const std::vector<StateId> inits = {0, 2};
    const std::uint32_t k = 3;
    CHECK(bmc_sat(ts, phi, alpha, k, inits) ==
          testsup::bmc_exists_counterexample(ts, phi, alpha, k, inits));
  }
}

TEST_CASE("bisimilar systems give identical verdicts") {
  testsup::Rng rng(313);
  const Alphabet alpha = {{"m0", "m1"}, {"x", "y"}};
  const std::vector<std::string> pool = {"m0,x", "m0,y", "m1,x"};

  for (int round = 0; round < 30; ++round) {
    const TransitionSystem ts = testsup::random_ts(rng, 6, pool, 0.4, true);
    const habs::StatePartition part = habs::coarsest_bisimulation(ts);
    const TransitionSystem q = habs::quotient(ts, part);

    const LtlPtr phi = testsup::random_ltl(rng, alpha, 5);
    for (std::uint32_t k = 1; k <= 4; ++k)
      CHECK(bmc_sat(ts, phi, alpha, k) == bmc_sat(q, phi, alpha, k));
  }
}
