#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hh"
#include "qswarm/security.hpp"

using namespace qswarm;

namespace {

// Exact disagreement probability between r1 and r2 on a valid round, from
// the oracle measurement tree: c measures qubit 0 in the round basis, eve
// measures qubit 0 in her basis, r1 re-measures qubit 0, r2 measures qubit
// 1. Outcome order in each branch: (c, eve, r1, r2).
double intercept_disagreement(oracle::B round_basis, oracle::B eve_basis) {
  const auto branches = oracle::enumerate_branches(
      oracle::phi_plus(), {{0, round_basis},
                           {0, eve_basis},
                           {0, round_basis},
                           {1, round_basis}});
  double p = 0.0;
  for (const auto& b : branches) {
    if (b.outcomes[2] != b.outcomes[3]) p += b.probability;
  }
  return p;
}

double eve_r1_agreement(oracle::B round_basis, oracle::B eve_basis) {
  const auto branches = oracle::enumerate_branches(
      oracle::phi_plus(), {{0, round_basis},
                           {0, eve_basis},
                           {0, eve_basis},   // r1 happens to share eve's basis
                           {1, round_basis}});
  double p = 0.0;
  for (const auto& b : branches) {
    if (b.outcomes[1] == b.outcomes[2]) p += b.probability;
  }
  return p;
}

}  // namespace

TEST(DetectionRounds, PassivePredefinedGivesThreeEqualValuesEveryRound) {
  RngPool pool(1);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  const DetectionRecords rec =
      run_detection_rounds(2000, BasisMode::Predefined, EveStrategy{}, rngs);
  ASSERT_EQ(rec.c.entries.size(), 2000u);
  for (std::size_t i = 0; i < 2000; ++i) {
    EXPECT_EQ(rec.c.entries[i].basis, rec.r1.entries[i].basis);
    EXPECT_EQ(rec.c.entries[i].bit, rec.r1.entries[i].bit);
    EXPECT_EQ(rec.c.entries[i].bit, rec.r2.entries[i].bit);
  }
  EXPECT_TRUE(rec.eve.entries.empty());
}

TEST(DetectionRounds, PassiveRandomAgreesOnEverySiftedRound) {
  RngPool pool(2);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  const DetectionRecords rec =
      run_detection_rounds(8000, BasisMode::Random, EveStrategy{}, rngs);
  const auto valid = sift(rec.c, rec.r1, rec.r2);
  ASSERT_GT(valid.size(), 0u);
  for (std::size_t round : valid) {
    EXPECT_EQ(rec.c.entries[round].bit, rec.r1.entries[round].bit);
    EXPECT_EQ(rec.c.entries[round].bit, rec.r2.entries[round].bit);
  }
}

TEST(DetectionRounds, EveSharingR1sBasisReadsR1sValue) {
  // Oracle: in every branch where eve and r1 use the same basis, their bits
  // agree with certainty, whatever the round basis was.
  for (oracle::B round_basis : {oracle::B::Z, oracle::B::X}) {
    for (oracle::B shared : {oracle::B::Z, oracle::B::X}) {
      EXPECT_DOUBLE_EQ(eve_r1_agreement(round_basis, shared), 1.0);
    }
  }
  // Implementation: fixed-Z eve against r1 rounds that happen to use Z.
  RngPool pool(3);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  EveStrategy eve;
  eve.mode = EveMode::InterceptResendFixedBasis;
  eve.fixed_basis = Basis::Z;
  const DetectionRecords rec =
      run_detection_rounds(4000, BasisMode::Random, eve, rngs);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < rec.eve.entries.size(); ++i) {
    if (rec.r1.entries[i].basis == Basis::Z) {
      EXPECT_EQ(rec.eve.entries[i].bit, rec.r1.entries[i].bit);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(DetectionRounds, InterceptResendDisagreementMatchesTheBranchOracle) {
  // Exact oracle: invisible in the matching basis, a coin flip otherwise,
  // so a random-basis eve leaves 1/4 disagreement on sifted rounds.
  double expected = 0.0;
  for (oracle::B round_basis : {oracle::B::Z, oracle::B::X}) {
    for (oracle::B eve_basis : {oracle::B::Z, oracle::B::X}) {
      const double p = intercept_disagreement(round_basis, eve_basis);
      if (round_basis == eve_basis) {
        EXPECT_DOUBLE_EQ(p, 0.0);
      } else {
        EXPECT_DOUBLE_EQ(p, 0.5);
      }
      expected += 0.25 * p;
    }
  }
  EXPECT_DOUBLE_EQ(expected, 0.25);

  RngPool pool(4);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  EveStrategy eve;
  eve.mode = EveMode::InterceptResendRandomBasis;
  const DetectionRecords rec =
      run_detection_rounds(40000, BasisMode::Random, eve, rngs);
  const auto valid = sift(rec.c, rec.r1, rec.r2);
  ASSERT_GE(valid.size(), 9000u);
  std::size_t disagreements = 0;
  for (std::size_t round : valid) {
    if (rec.r1.entries[round].bit != rec.r2.entries[round].bit) ++disagreements;
  }
  const double qber = static_cast<double>(disagreements) / valid.size();
  EXPECT_TRUE(oracle::within_3sigma(qber, expected, valid.size())) << qber;
}

TEST(Sift, KeepsOnlyRoundsWhereAllThreeBasesAgree) {
  MeasurementRecord c{"c", {}}, r1{"r1", {}}, r2{"r2", {}};
  c.entries = {{0, Basis::Z, 0}, {1, Basis::Z, 1}, {2, Basis::X, 0}};
  r1.entries = {{0, Basis::Z, 0}, {1, Basis::X, 1}, {2, Basis::X, 0}};
  r2.entries = {{0, Basis::Z, 0}, {1, Basis::Z, 1}, {2, Basis::X, 1}};
  EXPECT_EQ(sift(c, r1, r2), (std::vector<std::size_t>{0, 2}));

  r2.entries.pop_back();
  EXPECT_THROW(sift(c, r1, r2), std::invalid_argument);
}

TEST(Sift, RandomBasisValidFractionIsAQuarter) {
  RngPool pool(5);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  const std::size_t rounds = 10000;
  const DetectionRecords rec =
      run_detection_rounds(rounds, BasisMode::Random, EveStrategy{}, rngs);
  const double fraction =
      static_cast<double>(sift(rec.c, rec.r1, rec.r2).size()) / rounds;
  EXPECT_TRUE(oracle::within_3sigma(fraction, 0.25, rounds)) << fraction;
}

TEST(EstimateQber, PassiveChannelIsCleanAndConsumesItsSample) {
  RngPool pool(6);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  const DetectionRecords rec =
      run_detection_rounds(2000, BasisMode::Random, EveStrategy{}, rngs);
  const auto valid = sift(rec.c, rec.r1, rec.r2);
  std::mt19937_64 sample_rng = pool.stream("sample");
  const QberEstimate est =
      estimate_qber(valid, rec.r1, rec.r2, 64, 0.1, sample_rng);
  EXPECT_EQ(est.report.qber, 0.0);
  EXPECT_EQ(est.report.verdict, Verdict::Clean);
  EXPECT_EQ(est.report.rounds_used, 64u);

  // Sampled and remaining rounds partition the valid set.
  EXPECT_EQ(est.sampled_rounds.size() + est.remaining_rounds.size(), valid.size());
  std::set<std::size_t> sampled(est.sampled_rounds.begin(), est.sampled_rounds.end());
  for (std::size_t round : est.remaining_rounds) {
    EXPECT_FALSE(sampled.count(round));
  }
  std::set<std::size_t> all(valid.begin(), valid.end());
  for (std::size_t round : est.sampled_rounds) EXPECT_TRUE(all.count(round));
}

TEST(EstimateQber, RequiresEnoughValidRounds) {
  MeasurementRecord r1{"r1", {}}, r2{"r2", {}};
  for (std::size_t i = 0; i < 10; ++i) {
    r1.entries.push_back({i, Basis::Z, 0});
    r2.entries.push_back({i, Basis::Z, 0});
  }
  const std::vector<std::size_t> valid{0, 1, 2, 3};
  std::mt19937_64 rng(7);
  EXPECT_THROW(estimate_qber(valid, r1, r2, 5, 0.1, rng), std::invalid_argument);
  EXPECT_THROW(estimate_qber(valid, r1, r2, 0, 0.1, rng), std::invalid_argument);
}

TEST(EstimateQber, FixedBasisEveOnHerBasisRoundsIsInvisible) {
  // Honest parties run a constant-Z predefined schedule; eve intercepts in
  // Z every round. No disturbance is possible, so the error rate is zero.
  RngPool pool(8);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  EveStrategy eve;
  eve.mode = EveMode::InterceptResendFixedBasis;
  eve.fixed_basis = Basis::Z;
  const DetectionRecords rec = run_detection_rounds(
      2000, BasisMode::Predefined, eve, rngs, {Basis::Z});
  const auto valid = sift(rec.c, rec.r1, rec.r2);
  ASSERT_EQ(valid.size(), 2000u);
  std::mt19937_64 sample_rng = pool.stream("sample");
  const QberEstimate est =
      estimate_qber(valid, rec.r1, rec.r2, 256, 0.1, sample_rng);
  EXPECT_EQ(est.report.qber, 0.0);
  EXPECT_EQ(est.report.verdict, Verdict::Clean);
}

TEST(EstimateQber, DetectionPowerAgainstRandomEveMatchesTheBinomialTail) {
  // With sample 64 and threshold 0.1, detection needs >= 7 disagreements.
  // Exact tail: P(Bin(64, 1/4) <= 6) is far below 1%.
  const long double miss = oracle::binomial_cdf(64, 6, 0.25L);
  EXPECT_LT(miss, 0.01L);
  EXPECT_GT(1.0L - miss, 0.99L);

  RngPool pool(9);
  DetectionRngs rngs = DetectionRngs::from_pool(pool);
  std::mt19937_64 sample_rng = pool.stream("sample");
  EveStrategy eve;
  eve.mode = EveMode::InterceptResendRandomBasis;
  std::size_t detected = 0;
  const std::size_t trials = 200;
  for (std::size_t t = 0; t < trials; ++t) {
    const DetectionRecords rec =
        run_detection_rounds(360, BasisMode::Random, eve, rngs);
    const auto valid = sift(rec.c, rec.r1, rec.r2);
    ASSERT_GE(valid.size(), 64u);
    const QberEstimate est =
        estimate_qber(valid, rec.r1, rec.r2, 64, 0.1, sample_rng);
    if (est.report.verdict == Verdict::EavesdropperDetected) ++detected;
  }
  EXPECT_GE(static_cast<double>(detected) / trials, 0.99);
}

// ---------------------------------------------------------------------------
// Byzantine strategies
// ---------------------------------------------------------------------------

namespace {

struct ByzRunStats {
  std::size_t matches = 0;
  std::size_t steps = 0;
  std::vector<std::vector<MoveLogEntry>> logs;
  std::vector<Direction> honest_history;
};

ByzRunStats run_byz(ByzantineStrategy strategy, std::size_t n_honest,
                    std::size_t steps, std::uint64_t seed) {
  RngPool pool(seed);
  std::mt19937_64 schedule = pool.stream("schedule");
  std::vector<std::mt19937_64> honest_rngs;
  for (std::size_t i = 0; i < n_honest; ++i) {
    honest_rngs.push_back(pool.stream("measure:" + std::to_string(i)));
  }
  std::vector<std::mt19937_64> byz_rngs;
  byz_rngs.push_back(pool.stream("byz:0"));

  ByzRunStats stats;
  stats.steps = steps;
  stats.logs.assign(n_honest + 1, {});
  for (std::size_t step = 0; step < steps; ++step) {
    const Basis basis = random_basis(schedule);
    const ByzantineStepResult res =
        byzantine_walk_step(n_honest, {strategy}, basis, step,
                            stats.honest_history, honest_rngs, byz_rngs);
    stats.honest_history.push_back(res.honest_direction);
    for (std::size_t k = 0; k < n_honest; ++k) {
      stats.logs[k].push_back({true, res.honest_direction, 0});
    }
    const ByzantineMove& mv = res.byzantine[0];
    stats.logs[n_honest].push_back({mv.moved, mv.direction, mv.lag});
    if (mv.matched_honest) ++stats.matches;
  }
  return stats;
}

}  // namespace

TEST(ByzantineWalk, HonestRobotsAlwaysAgreeDespiteInterference) {
  for (ByzantineMethod method :
       {ByzantineMethod::GuessBasis, ByzantineMethod::RandomDirection}) {
    const ByzRunStats stats = run_byz({method, 1}, 3, 2000, 11);
    EXPECT_EQ(stats.honest_history.size(), 2000u);  // never threw
  }
}

TEST(ByzantineWalk, RandomDirectionMatchesAQuarterOfTheTime) {
  const std::size_t steps = 10000;
  const ByzRunStats stats =
      run_byz({ByzantineMethod::RandomDirection, 1}, 2, steps, 12);
  const double rate = static_cast<double>(stats.matches) / steps;
  EXPECT_TRUE(oracle::within_3sigma(rate, 0.25, steps)) << rate;
}

TEST(ByzantineWalk, GuessBasisMatchesFiveEighthsNotOneHalf) {
  // Oracle: a correct basis guess (p = 1/2) reproduces both honest bits; a
  // wrong guess leaves each resource bit agreeing with probability 1/2,
  // hence the directions agree 1/4 of the time. The per-resource agreement
  // is derived from the measurement tree, not assumed.
  double p_match = 0.0;
  for (oracle::B honest : {oracle::B::Z, oracle::B::X}) {
    for (oracle::B guess : {oracle::B::Z, oracle::B::X}) {
      oracle::Vec state = oracle::ghz(3);
      if (honest == oracle::B::X) {
        // (|+++> + |--->)/sqrt(2): rotate each qubit's labels.
        using oracle::C;
        oracle::Vec plus = oracle::kron(
            oracle::kron(oracle::scale(oracle::kInvSqrt2,
                                       oracle::add(oracle::ket("0"), oracle::ket("1"))),
                         oracle::scale(oracle::kInvSqrt2,
                                       oracle::add(oracle::ket("0"), oracle::ket("1")))),
            oracle::scale(oracle::kInvSqrt2,
                          oracle::add(oracle::ket("0"), oracle::ket("1"))));
        oracle::Vec minus = oracle::kron(
            oracle::kron(
                oracle::scale(oracle::kInvSqrt2,
                              oracle::add(oracle::ket("0"),
                                          oracle::scale(C{-1, 0}, oracle::ket("1")))),
                oracle::scale(oracle::kInvSqrt2,
                              oracle::add(oracle::ket("0"),
                                          oracle::scale(C{-1, 0}, oracle::ket("1"))))),
            oracle::scale(oracle::kInvSqrt2,
                          oracle::add(oracle::ket("0"),
                                      oracle::scale(C{-1, 0}, oracle::ket("1")))));
        state = oracle::scale(oracle::kInvSqrt2, oracle::add(plus, minus));
      }
      // Honest robots hold qubits 0 and 1, the guesser holds qubit 2.
      const auto branches = oracle::enumerate_branches(
          state, {{0, honest}, {1, honest}, {2, guess}});
      double bit_agree = 0.0;
      for (const auto& b : branches) {
        EXPECT_EQ(b.outcomes[0], b.outcomes[1]);  // honest correlation intact
        if (b.outcomes[2] == b.outcomes[0]) bit_agree += b.probability;
      }
      const double expected_bit = honest == guess ? 1.0 : 0.5;
      EXPECT_NEAR(bit_agree, expected_bit, 1e-12);
      p_match += 0.25 * bit_agree * bit_agree;  // two independent resources
    }
  }
  EXPECT_DOUBLE_EQ(p_match, 0.625);

  const std::size_t steps = 10000;
  const ByzRunStats stats =
      run_byz({ByzantineMethod::GuessBasis, 1}, 2, steps, 13);
  const double rate = static_cast<double>(stats.matches) / steps;
  EXPECT_TRUE(oracle::within_3sigma(rate, 0.625, steps)) << rate;
  // And it is visibly not the naive one-half.
  EXPECT_GT(rate, 0.58);
}

TEST(ByzantineWalk, FollowerCopiesThePreviousHonestMoveLate) {
  const std::size_t steps = 500;
  const ByzRunStats stats =
      run_byz({ByzantineMethod::FollowWithDelay, 1}, 2, steps, 14);
  const auto& follower = stats.logs.back();
  EXPECT_FALSE(follower[0].moved);  // nothing to copy yet
  for (std::size_t t = 1; t < steps; ++t) {
    ASSERT_TRUE(follower[t].moved);
    EXPECT_EQ(follower[t].direction, stats.honest_history[t - 1]);
    EXPECT_GT(follower[t].lag, 0);
  }
}

TEST(IdentifyByzantine, FollowerIsFlaggedByTimingHonestNever) {
  const ByzRunStats stats =
      run_byz({ByzantineMethod::FollowWithDelay, 1}, 2, 200, 15);
  const IdentificationReport report = identify_byzantine(stats.logs, 20, 1.0);
  EXPECT_EQ(report.flagged_by_timing, (std::vector<std::size_t>{2}));
  EXPECT_EQ(report.suspects, (std::vector<std::size_t>{2}));
}

TEST(IdentifyByzantine, RandomMoverIsFlaggedByMismatch) {
  // Escaping the flag needs 20 straight lucky matches: p = 0.25^20.
  const double escape = std::pow(0.25, 20.0);
  EXPECT_LT(escape, 1e-12);
  for (std::uint64_t seed = 20; seed < 40; ++seed) {
    const ByzRunStats stats =
        run_byz({ByzantineMethod::RandomDirection, 1}, 2, 20, seed);
    const IdentificationReport report = identify_byzantine(stats.logs, 20, 1.0);
    EXPECT_EQ(report.suspects, (std::vector<std::size_t>{2})) << "seed " << seed;
    EXPECT_TRUE(report.flagged_by_timing.empty());
  }
}

TEST(IdentifyByzantine, ValidatesItsInputs) {
  const ByzRunStats stats =
      run_byz({ByzantineMethod::RandomDirection, 1}, 2, 10, 16);
  EXPECT_THROW(identify_byzantine(stats.logs, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(identify_byzantine(stats.logs, 11, 1.0), std::invalid_argument);
  EXPECT_THROW(identify_byzantine({}, 5, 1.0), std::invalid_argument);
}

TEST(ByzantineWalk, ValidatesItsInputs) {
  std::vector<std::mt19937_64> honest(1, std::mt19937_64(1));
  std::vector<std::mt19937_64> byz;
  std::vector<Direction> history;
  EXPECT_THROW(byzantine_walk_step(0, {}, Basis::Z, 0, history, byz, byz),
               std::invalid_argument);
  EXPECT_THROW(byzantine_walk_step(2, {}, Basis::Z, 0, history, honest, byz),
               std::invalid_argument);
  EXPECT_THROW(
      byzantine_walk_step(1, {{ByzantineMethod::FollowWithDelay, 0}}, Basis::Z,
                          0, history, honest, honest),
      std::invalid_argument);
}
