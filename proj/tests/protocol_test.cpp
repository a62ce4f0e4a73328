#include "qsdc/protocol.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>

#include "oracles.hpp"
#include "qsdc/errors.hpp"

using namespace qsdc;

namespace {

BitString bits(const char* s) { return BitString::parse(s); }

}  // namespace

TEST(XorCrypt, TruthTable) {
  EXPECT_EQ(xor_crypt(bits("1011"), bits("0110")), bits("1101"));
  EXPECT_EQ(xor_crypt(bits("1011"), bits("0000")), bits("1011"));
}

TEST(XorCrypt, Involution) {
  RandomSource rng(11);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng.below(100);
    const auto m = BitString::random(n, rng);
    const auto k = BitString::random(n, rng);
    EXPECT_EQ(xor_crypt(xor_crypt(m, k), k), m);
  }
}

TEST(XorCrypt, LengthMismatchThrows) {
  EXPECT_THROW(xor_crypt(bits("101"), bits("10")), ConfigError);
}

TEST(BuildSequences, LengthBookkeeping) {
  RandomSource rng(12);
  const auto seq = build_sequences(bits("1010"), bits("01"), rng);
  EXPECT_EQ(seq.qubits.size(), 6u);
  ASSERT_EQ(seq.identity_positions.size(), 2u);
  EXPECT_LT(seq.identity_positions[0], seq.identity_positions[1]);
  EXPECT_EQ(seq.message_positions().size(), 4u);
}

TEST(BuildSequences, EmptyIdentityLeavesMessageSequence) {
  RandomSource rng(13);
  const auto c = bits("110010");
  const auto seq = build_sequences(c, BitString{}, rng);
  EXPECT_TRUE(seq.identity_positions.empty());
  ASSERT_EQ(seq.qubits.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(announce_encoding(seq.qubits[i]), c[i]);
}

TEST(BuildSequences, IdentityPositionUniformOverSlots) {
  RandomSource rng(14);
  std::array<std::size_t, 3> counts{};
  constexpr std::size_t kBuilds = 10000;
  for (std::size_t i = 0; i < kBuilds; ++i) {
    const auto seq = build_sequences(bits("01"), bits("1"), rng);
    ++counts.at(seq.identity_positions.at(0));
  }
  for (auto c : counts) EXPECT_NEAR(c / double(kBuilds), 1.0 / 3.0, 0.02);
}

TEST(BuildSequences, ExtractionInvertsInterleaving) {
  RandomSource rng(15);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto c = BitString::random(rng.below(20), rng);
    const auto id_b = BitString::random(rng.below(20), rng);
    const auto seq = build_sequences(c, id_b, rng);
    const auto ids = seq.identity_qubits();
    const auto msg = seq.message_qubits();
    ASSERT_EQ(ids.size(), id_b.size());
    ASSERT_EQ(msg.size(), c.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_EQ(basis_of(ids[i]), basis_for_bit(id_b[i]));
    for (std::size_t i = 0; i < msg.size(); ++i) ASSERT_EQ(announce_encoding(msg[i]), c[i]);
    ASSERT_TRUE(std::is_sorted(seq.identity_positions.begin(), seq.identity_positions.end()));
  }
}

TEST(Interleave, MultipleGroupsPartitionTheSequence) {
  RandomSource rng(16);
  const std::vector<QubitState> base(5, QubitState::Z0);
  const std::vector<QubitState> groups[] = {std::vector<QubitState>(3, QubitState::X1),
                                            std::vector<QubitState>(2, QubitState::Z1)};
  const auto mixed = interleave(base, groups, rng);
  ASSERT_EQ(mixed.qubits.size(), 10u);
  EXPECT_EQ(extract(mixed.qubits, mixed.group_positions[0]), groups[0]);
  EXPECT_EQ(extract(mixed.qubits, mixed.group_positions[1]), groups[1]);
  const auto rest = complement_positions(10, mixed.group_positions);
  EXPECT_EQ(extract(mixed.qubits, rest), base);
}

TEST(BobProcessIdentity, HonestIdealRunMatchesExpected) {
  RandomSource rng(17);
  const auto id_b = BitString::random(64, rng);
  const auto seq = build_sequences(BitString::random(32, rng), id_b, rng);
  const auto resp =
      bob_process_identity(seq.qubits, seq.identity_positions, id_b, ChannelConfig::ideal(), rng);
  BitString expected;
  for (auto q : seq.identity_qubits()) expected.push_back(announce_encoding(q));
  EXPECT_EQ(resp.announcement, expected);
  const auto v = alice_verify(resp.announcement, expected, resp.received_mask, VerificationPolicy{});
  EXPECT_EQ(v.verdict, Verdict::accept);
  EXPECT_EQ(v.mismatch_rate, 0.0);
}

TEST(BobProcessIdentity, AllLost) {
  RandomSource rng(18);
  const auto id_b = bits("0110");
  const auto seq = build_sequences(bits("11"), id_b, rng);
  const auto resp =
      bob_process_identity(seq.qubits, seq.identity_positions, id_b, ChannelConfig{1.0, 0.0}, rng);
  EXPECT_TRUE(resp.announcement.empty());
  EXPECT_EQ(resp.received_mask, std::vector<bool>(4, false));
}

TEST(BobProcessIdentity, CrossBasisAnnouncementIsFair) {
  RandomSource rng(19);
  const std::vector<QubitState> wire = {QubitState::Z0};
  const std::vector<std::size_t> pos = {0};
  std::size_t ones = 0;
  for (int i = 0; i < 100000; ++i)
    ones += bob_process_identity(wire, pos, bits("1"), ChannelConfig::ideal(), rng).announcement[0];
  EXPECT_TRUE(oracle::within_sigmas(ones, 100000, 0.5, 4.0));
}

TEST(BobProcessIdentity, RejectsBadPositions) {
  RandomSource rng(20);
  const std::vector<QubitState> wire = {QubitState::Z0, QubitState::X1};
  const std::vector<std::size_t> out_of_range = {5};
  EXPECT_THROW(bob_process_identity(wire, out_of_range, bits("0"), ChannelConfig::ideal(), rng),
               ProtocolError);
  const std::vector<std::size_t> too_many = {0, 1};
  EXPECT_THROW(bob_process_identity(wire, too_many, bits("0"), ChannelConfig::ideal(), rng),
               ProtocolError);
}

TEST(AliceVerify, PerfectMatch) {
  const auto v = alice_verify(bits("0110"), bits("0110"), std::vector<bool>(4, true), {});
  EXPECT_EQ(v.verdict, Verdict::accept);
  EXPECT_EQ(v.mismatch_rate, 0.0);
}

TEST(AliceVerify, OneMismatchInEight) {
  const auto v = alice_verify(bits("00000001"), bits("00000000"), std::vector<bool>(8, true),
                              VerificationPolicy{0.02});
  EXPECT_EQ(v.verdict, Verdict::reject);
  EXPECT_DOUBLE_EQ(v.mismatch_rate, 0.125);
}

TEST(AliceVerify, TieAtThresholdAccepts) {
  const auto v = alice_verify(bits("00000001"), bits("00000000"), std::vector<bool>(8, true),
                              VerificationPolicy{0.125});
  EXPECT_EQ(v.verdict, Verdict::accept);
}

TEST(AliceVerify, RateOnlyOverReceived) {
  // Positions 1 and 3 lost; position 2 expects 1 but Bob announced 0.
  const auto v = alice_verify(bits("00"), bits("0110"), {true, false, true, false}, {0.5});
  EXPECT_EQ(v.received, 2u);
  EXPECT_EQ(v.mismatches, 1u);
  EXPECT_DOUBLE_EQ(v.mismatch_rate, 0.5);
  EXPECT_EQ(v.verdict, Verdict::accept);
}

TEST(AliceVerify, NothingReceivedRejects) {
  const auto v = alice_verify(BitString{}, bits("0101"), std::vector<bool>(4, false), {});
  EXPECT_EQ(v.verdict, Verdict::reject);
  EXPECT_FALSE(v.diagnostic.empty());
}

TEST(AliceVerify, MisalignedAnnouncementIsAProtocolError) {
  EXPECT_THROW(alice_verify(bits("0"), bits("01"), {true, true}, {}), ProtocolError);
}

TEST(RunSession, HonestIdealRoundTrip) {
  RandomSource rng(21);
  for (int i = 0; i < 1000; ++i) {
    const auto m = BitString::random(1 + rng.below(40), rng);
    const auto id_a = BitString::random(m.size(), rng);
    const auto id_b = BitString::random(64, rng);
    const auto rec = run_session(m, id_a, id_b, ChannelConfig::ideal(), {}, rng);
    ASSERT_EQ(rec.alice_verdict, Verdict::accept);
    ASSERT_EQ(rec.mismatch_rate, 0.0);
    ASSERT_EQ(rec.bob_announcement, rec.alice_expected);
    ASSERT_TRUE(rec.decrypted_message.has_value());
    ASSERT_EQ(*rec.decrypted_message, m);
  }
}

TEST(RunSession, ZeroMessageExposesKeyAsCiphertext) {
  RandomSource rng(22);
  const auto rec = run_session(bits("0000"), bits("1010"), bits("0110"), ChannelConfig::ideal(), {}, rng);
  EXPECT_EQ(rec.ciphertext, bits("1010"));
}

TEST(RunSession, LengthMismatchIsConfigError) {
  RandomSource rng(23);
  EXPECT_THROW(run_session(bits("000"), bits("10"), bits("01"), ChannelConfig::ideal(), {}, rng),
               ConfigError);
}

TEST(RunSession, RejectedSessionDoesNotDecrypt) {
  RandomSource rng(24);
  const auto rec = run_session(bits("0101"), bits("1100"), bits("0110"), ChannelConfig{0.0, 1.0},
                               VerificationPolicy{0.02}, rng);
  EXPECT_EQ(rec.alice_verdict, Verdict::reject);
  EXPECT_DOUBLE_EQ(rec.mismatch_rate, 1.0);
  EXPECT_FALSE(rec.decrypted_message.has_value());
  EXPECT_FALSE(rec.received_ciphertext.has_value());
}

TEST(RunSession, NoisyChannelRejectRateMatchesBinomialOracle) {
  // A partner flip on an identity photon always changes Bob's announcement,
  // so mismatches ~ Bin(64, 0.1); at threshold 0.02 Alice tolerates one.
  const std::size_t tolerated = oracle::tolerated_mismatches(64, 0.02);
  ASSERT_EQ(tolerated, 1u);
  const double reject_oracle = static_cast<double>(1.0L - oracle::binomial_cdf(64, tolerated, 0.1L));
  EXPECT_NEAR(reject_oracle, 0.99043685028694537, 1e-12);
  EXPECT_GE(reject_oracle, 0.99);

  RandomSource rng(25);
  constexpr std::size_t kSessions = 10000;
  std::size_t rejects = 0;
  for (std::size_t i = 0; i < kSessions; ++i) {
    const auto m = BitString::random(16, rng);
    const auto rec = run_session(m, BitString::random(16, rng), BitString::random(64, rng),
                                 ChannelConfig{0.0, 0.10}, VerificationPolicy{0.02}, rng);
    rejects += rec.alice_verdict == Verdict::reject;
  }
  EXPECT_TRUE(oracle::within_sigmas(rejects, kSessions, reject_oracle, 4.0)) << rejects;
}

TEST(RunSession, MismatchRateMonotoneInFlipProbability) {
  double previous = -1.0;
  for (int step = 0; step <= 10; ++step) {
    const double p_flip = step * 0.01;
    RandomSource rng(100 + step);
    double total = 0.0;
    constexpr int kSessions = 10000;
    for (int i = 0; i < kSessions; ++i) {
      const auto rec = run_session(BitString::random(8, rng), BitString::random(8, rng),
                                   BitString::random(64, rng), ChannelConfig{0.0, p_flip},
                                   VerificationPolicy{1.0}, rng);
      total += rec.mismatch_rate;
    }
    const double mean = total / kSessions;
    EXPECT_GE(mean, previous) << "p_flip=" << p_flip;
    EXPECT_NEAR(mean, p_flip, 0.003);
    previous = mean;
  }
}

TEST(RunSession, DecryptionAlwaysInvertsReceivedCiphertext) {
  RandomSource rng(26);
  for (int i = 0; i < 2000; ++i) {
    const auto m = BitString::random(32, rng);
    const auto id_a = BitString::random(32, rng);
    const auto rec = run_session(m, id_a, BitString::random(32, rng), ChannelConfig{0.2, 0.01},
                                 VerificationPolicy{0.1}, rng);
    if (!rec.decrypted_message) {
      ASSERT_EQ(rec.alice_verdict, Verdict::reject);
      continue;
    }
    ASSERT_EQ(rec.alice_verdict, Verdict::accept);
    ASSERT_EQ(*rec.decrypted_message, xor_crypt(*rec.received_ciphertext, id_a));
  }
}

TEST(RunSession, LostMessagePhotonsAreReportedAsErasures) {
  RandomSource rng(27);
  const auto m = BitString::random(200, rng);
  const auto rec = run_session(m, BitString::random(200, rng), BitString::random(64, rng),
                               ChannelConfig{0.5, 0.0}, {}, rng);
  ASSERT_EQ(rec.alice_verdict, Verdict::accept);
  EXPECT_GT(rec.message_erasures.size(), 50u);
  EXPECT_LT(rec.message_erasures.size(), 150u);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (std::binary_search(rec.message_erasures.begin(), rec.message_erasures.end(), i)) continue;
    EXPECT_EQ((*rec.decrypted_message)[i], m[i]);
  }
}

TEST(RunSession, SeedDeterminism) {
  auto run = [](std::uint64_t seed) {
    RandomSource rng(seed);
    const auto m = BitString::random(24, rng);
    return run_session(m, BitString::random(24, rng), BitString::random(24, rng),
                       ChannelConfig{0.1, 0.05}, {0.3}, rng);
  };
  const auto a = run(99), b = run(99);
  EXPECT_EQ(a.sent.qubits, b.sent.qubits);
  EXPECT_EQ(a.bob_announcement, b.bob_announcement);
  EXPECT_EQ(a.received_mask, b.received_mask);
  EXPECT_EQ(a.decrypted_message, b.decrypted_message);
}
