#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "dmchain/error.hpp"
#include "dmchain/ledger/network.hpp"
#include "ledger_oracle.hpp"
#include "support.hpp"

using namespace dmchain;
using namespace dmchain::ledger;

namespace {

Clock counting_clock() {
    auto t = std::make_shared<std::int64_t>(1'700'000'000'000);
    return [t] { return (*t)++; };
}

NetworkOptions test_options(std::size_t batch = 1) {
    NetworkOptions o;
    o.sealing_batch = batch;
    o.clock = counting_clock();
    o.seed = 7;
    return o;
}

struct Fixture {
    Network net;
    KeyPair ca;
    Network::Registration hospital, doctor, p1, p2, user, expert;

    explicit Fixture(NetworkOptions o = test_options()) : net(std::move(o)) {
        ca = net.bootstrap_ca("ca", "ca-proof", "0000");
        hospital = net.register_participant("H1", Role::Hospital, "h-proof", "1111");
        doctor = net.register_participant("D1", Role::AlliedHealthProfessional, "d-proof", "2222", {"H1"});
        p1 = net.register_participant("P1", Role::Patient, "p1-proof", "3333", {"H1"});
        p2 = net.register_participant("P2", Role::Patient, "p2-proof", "4444");
        user = net.register_participant("U1", Role::ExternalUser, "u-proof", "5555");
        expert = net.register_participant("E1", Role::MedicalExpert, "e-proof", "6666");
    }
};

TxRequest request(TxType type, const std::string& actor, const std::string& subject,
                  std::optional<Hash> payload = std::nullopt) {
    TxRequest r;
    r.type = type;
    r.actor = actor;
    r.subject = subject;
    r.payload_hash = payload;
    return r;
}

bool contains_denial(const std::vector<Transaction>& trail, TxType type) {
    return std::any_of(trail.begin(), trail.end(),
                       [&](const Transaction& t) { return t.type == type && t.status == TxStatus::Denied; });
}

} // namespace

TEST(Digest, KnownVectorAndHex) {
    EXPECT_EQ(to_hex(sha256("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256("ab", "c"), sha256("abc"));
    const auto h = sha256("x");
    EXPECT_EQ(parse_hash(to_hex(h)), h);
    EXPECT_FALSE(parse_hash("zz"));
    EXPECT_FALSE(parse_hash(std::string(64, 'g')));
}

TEST(Codec, BlockRoundTrip) {
    Block b;
    b.index = 3;
    b.prev_hash = sha256("prev");
    b.header = "h";
    b.timestamp_ms = -5;
    Transaction t;
    t.type = TxType::LabResultsUpdate;
    t.actor = "a";
    t.subject = "s";
    t.payload_hash = sha256("p");
    t.note = std::string("bin\0ary", 7);
    t.tx_id = t.compute_id();
    b.txs = {t, t};
    b.block_hash = b.compute_hash();
    EXPECT_EQ(decode_block(encode_block(b)), b);
    const auto bytes = encode_block(b);
    EXPECT_THROW(decode_block(std::string_view(bytes).substr(0, bytes.size() - 3)), LoadError);
}

TEST(Codec, EnumNamesRoundTrip) {
    for (Role r : kAllRoles)
        EXPECT_EQ(parse_role(to_string(r)), r);
    for (int i = 0; i <= static_cast<int>(TxType::PipelineFailure); ++i)
        EXPECT_EQ(parse_tx_type(to_string(static_cast<TxType>(i))), static_cast<TxType>(i));
    for (int i = 0; i < 8; ++i)
        EXPECT_EQ(parse_asset_class(to_string(static_cast<AssetClass>(i))), static_cast<AssetClass>(i));
    EXPECT_THROW(parse_role("Nurse"), ConfigError);
}

TEST(Registration, RecordedByCa) {
    Fixture f;
    const auto trail = f.net.audit_trail("P1");
    ASSERT_FALSE(trail.empty());
    EXPECT_EQ(trail.front().type, TxType::ParticipantRegistration);
    EXPECT_EQ(trail.front().actor, "ca");
    EXPECT_EQ(trail.front().status, TxStatus::Accepted);
    EXPECT_TRUE(f.p1.receipt.accepted());
    const auto p = f.net.participant("P1");
    ASSERT_TRUE(p);
    EXPECT_NE(p->credential.pin_digest, sha256("3333"));
    EXPECT_EQ(f.net.participants().size(), 7u);
}

TEST(Registration, Errors) {
    Network bare(test_options());
    EXPECT_THROW(bare.register_participant("X", Role::Patient, "x", "1"), RegistrationError);
    Fixture f;
    EXPECT_THROW(f.net.register_participant("P1", Role::Patient, "p", "1"), RegistrationError);
    EXPECT_THROW(f.net.register_participant("", Role::Patient, "p", "1"), RegistrationError);
    EXPECT_THROW(f.net.bootstrap_ca("ca2", "c", "1"), RegistrationError);
    EXPECT_THROW(f.net.register_participant("CA2", Role::CertificateAuthority, "c", "1"), RegistrationError);
    EXPECT_THROW(f.net.register_participant("P9", Role::Patient, "c", "1", {"P2"}), RegistrationError);
    EXPECT_THROW(f.net.register_participant("P9", Role::Patient, "c", "1", {"nowhere"}), RegistrationError);
}

TEST(Recovery, IssuesNewKeyAndRetiresOld) {
    Fixture f;
    const auto fresh = f.net.recover_credentials("P1", "3333", "p1-proof");
    EXPECT_NE(fresh.key_pair_id, f.p1.keys.key_pair_id);
    const auto h = f.net.store_offchain("sleep 7h");
    auto req = request(TxType::SocialContextualUpdate, "P1", "P1", h);
    EXPECT_FALSE(f.net.submit(req, f.p1.keys).accepted());
    EXPECT_TRUE(f.net.submit(req, fresh).accepted());
    const auto trail = f.net.audit_trail("P1");
    EXPECT_TRUE(std::any_of(trail.begin(), trail.end(), [](const Transaction& t) {
        return t.type == TxType::CredentialRecovery && t.status == TxStatus::Accepted;
    }));
}

TEST(Recovery, WrongPinIsAuditedAndThrows) {
    Fixture f;
    EXPECT_THROW(f.net.recover_credentials("P1", "9999", "p1-proof"), AuthError);
    EXPECT_THROW(f.net.recover_credentials("P1", "3333", "forged"), AuthError);
    EXPECT_THROW(f.net.recover_credentials("ghost", "1", "x"), AuthError);
    EXPECT_TRUE(contains_denial(f.net.audit_trail("P1"), TxType::CredentialRecovery));
    // old key still works after failed attempts
    const auto h = f.net.store_offchain("diet");
    EXPECT_TRUE(f.net.submit(request(TxType::SocialContextualUpdate, "P1", "P1", h), f.p1.keys).accepted());
}

TEST(Recovery, RevokedParticipant) {
    Fixture f;
    f.net.revoke("P2");
    EXPECT_TRUE(f.net.participant("P2")->credential.revoked);
    const auto h = f.net.store_offchain("x");
    const auto r = f.net.submit(request(TxType::SocialContextualUpdate, "P2", "P2", h), f.p2.keys);
    EXPECT_FALSE(r.accepted());
    EXPECT_EQ(r.reason, "credential revoked");
    EXPECT_THROW(f.net.recover_credentials("P2", "4444", "p2-proof"), AuthError);
    EXPECT_THROW(f.net.revoke("ca"), RegistrationError);
    EXPECT_THROW(f.net.revoke("ghost"), NotFoundError);
}

TEST(OffChain, RoundTripAndDedup) {
    OffChainStore s;
    const auto a = s.put("payload");
    EXPECT_EQ(a, sha256("payload"));
    EXPECT_EQ(s.put("payload"), a);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(s.get(a), "payload");
    EXPECT_THROW(s.get(sha256("other")), NotFoundError);
    EXPECT_THROW(s.put(""), DomainError);
}

TEST(OffChain, PersistsAndRejectsCorruptBlob) {
    dmtest::TempDir dir;
    Hash h;
    {
        OffChainStore s(dir.path);
        h = s.put("kept");
    }
    OffChainStore again(dir.path);
    EXPECT_EQ(again.get(h), "kept");
    std::ofstream(dir.path / to_hex(h)) << "changed";
    EXPECT_THROW(OffChainStore{dir.path}, LoadError);
}

TEST(Network, LabUpdateForAffiliatedPatientNotifiesPatient) {
    Fixture f;
    const auto h = f.net.store_offchain("HbA1c 6.1");
    const auto r = f.net.submit(request(TxType::LabResultsUpdate, "H1", "P1", h), f.hospital.keys);
    ASSERT_TRUE(r.accepted()) << r.reason;
    const auto ev = f.net.events();
    EXPECT_TRUE(std::any_of(ev.begin(), ev.end(), [&](const Event& e) {
        return e.tx_id == r.tx_id && e.recipient == "P1" && e.type == TxType::LabResultsUpdate;
    }));
    // unaffiliated patient
    const auto r2 = f.net.submit(request(TxType::LabResultsUpdate, "H1", "P2", h), f.hospital.keys);
    EXPECT_FALSE(r2.accepted());
}

TEST(Network, PatientQueryOnOtherPatientDeniedAndAudited) {
    Fixture f;
    const auto r = f.net.submit(request(TxType::Query, "P1", "P2"), f.p1.keys);
    EXPECT_FALSE(r.accepted());
    EXPECT_FALSE(r.reason.empty());
    const auto trail = f.net.audit_trail("P2");
    EXPECT_TRUE(std::any_of(trail.begin(), trail.end(), [&](const Transaction& t) {
        return t.tx_id == r.tx_id && t.status == TxStatus::Denied && t.actor == "P1";
    }));
    EXPECT_TRUE(f.net.submit(request(TxType::Query, "P1", "P1"), f.p1.keys).accepted());
}

TEST(Network, ExternalUserRiskFactorsAccepted) {
    Fixture f;
    const auto h = f.net.store_offchain(R"({"Glucose":140})");
    const auto r = f.net.submit(request(TxType::RiskFactorsForPrediction, "U1", "U1", h), f.user.keys);
    EXPECT_TRUE(r.accepted()) << r.reason;
    const auto other = f.net.submit(request(TxType::RiskFactorsForPrediction, "U1", "P1", h), f.user.keys);
    EXPECT_FALSE(other.accepted());
}

TEST(Network, DenyOrder) {
    Fixture f;
    const auto h = f.net.store_offchain("x");
    auto req = request(TxType::SocialContextualUpdate, "P1", "P1", h);
    EXPECT_EQ(f.net.submit(request(TxType::Query, "ghost", "P1"), f.p1.keys).reason, "unknown actor");
    EXPECT_EQ(f.net.submit(req, f.p2.keys).reason, "key pair does not belong to the actor");
    auto forged = sign(req, f.p1.keys);
    forged.request.subject = "P2";
    EXPECT_EQ(f.net.submit(forged).reason, "bad signature");
    EXPECT_EQ(f.net.submit(request(TxType::Query, "P1", ""), f.p1.keys).reason, "missing subject");
    EXPECT_EQ(f.net.submit(request(TxType::SocialContextualUpdate, "P1", "P1"), f.p1.keys).reason,
              "update transaction without payload hash");
    EXPECT_EQ(f.net.submit(request(TxType::SocialContextualUpdate, "P1", "P1", sha256("absent")), f.p1.keys).reason,
              "payload hash does not resolve in the off-chain store");
    auto ch = req;
    ch.channel = "nope";
    EXPECT_THROW(f.net.submit(ch, f.p1.keys), NotFoundError);
    EXPECT_TRUE(f.net.unresolved_payloads().empty());
}

TEST(Network, ExtraDenyRuleOverridesGrant) {
    Fixture f;
    f.net.add_rule(Rule{std::string("H1"), AssetClass::LabResults, Action::Write, Scope::Specific, "P1", false});
    const auto h = f.net.store_offchain("x");
    EXPECT_EQ(f.net.submit(request(TxType::LabResultsUpdate, "H1", "P1", h), f.hospital.keys).reason,
              "denied by rule");
    EXPECT_TRUE(f.net.submit(request(TxType::MedicalRecordUpdate, "H1", "P1", h), f.hospital.keys).accepted());
}

TEST(Network, EventsAreReplayOfLog) {
    Fixture f;
    std::mt19937_64 rng(3);
    const std::vector<std::pair<std::string, const KeyPair*>> actors = {
        {"H1", &f.hospital.keys}, {"D1", &f.doctor.keys}, {"P1", &f.p1.keys},
        {"P2", &f.p2.keys},       {"U1", &f.user.keys},   {"E1", &f.expert.keys}};
    const std::vector<std::string> subjects = {"H1", "D1", "P1", "P2", "U1", "E1"};
    for (int i = 0; i < 300; ++i) {
        const auto& [actor, key] = actors[rng() % actors.size()];
        const auto type = static_cast<TxType>(rng() % 8);
        const auto h = f.net.store_offchain("payload " + std::to_string(i));
        f.net.submit(request(type, actor, subjects[rng() % subjects.size()], h), *key);
    }
    EXPECT_EQ(replay_events(kMainChannel, f.net.transactions()), f.net.events());
    EXPECT_FALSE(f.net.events().empty());
    EXPECT_TRUE(f.net.verify().ok);
    EXPECT_TRUE(f.net.unresolved_payloads().empty());
}

TEST(Network, AppendOnlyAndBatching) {
    Fixture f(test_options(4));
    const auto before = f.net.blocks();
    for (int i = 0; i < 9; ++i)
        f.net.submit(request(TxType::Query, "P1", "P1"), f.p1.keys);
    const auto after = f.net.blocks();
    ASSERT_GE(after.size(), before.size());
    for (std::size_t i = 0; i < before.size(); ++i)
        EXPECT_EQ(after[i], before[i]);
    for (std::size_t i = 1; i < after.size(); ++i)
        EXPECT_EQ(after[i].txs.size(), 4u);
    EXPECT_LT(f.net.pending().size(), 4u);
    const auto total = f.net.transactions().size();
    f.net.flush();
    EXPECT_TRUE(f.net.pending().empty());
    EXPECT_EQ(f.net.transactions().size(), total);
    EXPECT_TRUE(f.net.verify().ok);
}

TEST(Network, ChannelsAreIsolated) {
    Fixture f;
    f.net.add_channel("research");
    auto req = request(TxType::Query, "P1", "P1");
    req.channel = "research";
    EXPECT_TRUE(f.net.submit(req, f.p1.keys).accepted());
    EXPECT_EQ(f.net.transactions("research").size(), 1u);
    EXPECT_TRUE(f.net.audit_trail("P1", "research").size() == 1);
    EXPECT_THROW(f.net.add_channel("a/b"), ConfigError);
}

TEST(Tamper, MutatedBlockIsLocalized) {
    Fixture f;
    for (int i = 0; i < 20; ++i)
        f.net.submit(request(TxType::Query, "P1", i % 2 ? "P1" : "P2"), f.p1.keys);
    const auto blocks = f.net.blocks();
    ASSERT_TRUE(verify_blocks(blocks, blocks.back().block_hash).ok);
    const auto out = dmtest::tamper_trials(blocks, 100, 11);
    EXPECT_EQ(out.localized, out.trials);
}

TEST(Tamper, RehashedBlockBreaksNextLinkOrHead) {
    Fixture f;
    const auto blocks = f.net.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        auto copy = blocks;
        copy[i].timestamp_ms += 1;
        copy[i].block_hash = copy[i].compute_hash();
        const auto v = verify_blocks(copy, blocks.back().block_hash);
        ASSERT_FALSE(v.ok);
        EXPECT_EQ(*v.first_bad, i + 1);
    }
}

TEST(Tamper, TruncationDetectedViaHead) {
    Fixture f;
    auto blocks = f.net.blocks();
    const auto head = blocks.back().block_hash;
    blocks.pop_back();
    const auto v = verify_blocks(blocks, head);
    EXPECT_FALSE(v.ok);
    EXPECT_EQ(*v.first_bad, blocks.size());
    EXPECT_TRUE(verify_blocks(blocks).ok);
}

TEST(Persistence, ReloadKeepsChainRegistryAndEvents) {
    dmtest::TempDir dir;
    auto opt = test_options();
    opt.state_dir = dir.path;
    KeyPair hk;
    std::vector<Event> events;
    std::size_t n = 0;
    {
        Fixture f(opt);
        hk = f.hospital.keys;
        const auto h = f.net.store_offchain("lab");
        ASSERT_TRUE(f.net.submit(request(TxType::LabResultsUpdate, "H1", "P1", h), hk).accepted());
        events = f.net.events();
        n = f.net.transactions().size();
    }
    auto opt2 = test_options();
    opt2.state_dir = dir.path;
    opt2.seed = 99;
    Network again(opt2);
    EXPECT_EQ(again.transactions().size(), n);
    EXPECT_EQ(again.events(), events);
    EXPECT_TRUE(again.verify().ok);
    EXPECT_TRUE(again.unresolved_payloads().empty());
    const auto h = again.store_offchain("lab2");
    EXPECT_TRUE(again.submit(request(TxType::LabResultsUpdate, "H1", "P1", h), hk).accepted());
    EXPECT_THROW(again.register_participant("P1", Role::Patient, "p", "1"), RegistrationError);
}

TEST(Persistence, TamperedFileRefusesToOpen) {
    dmtest::TempDir dir;
    auto opt = test_options();
    opt.state_dir = dir.path;
    {
        Fixture f(opt);
    }
    const auto file = dir.path / "ledger" / "main.blocks";
    auto blocks = load_block_file(file);
    ASSERT_GT(blocks.size(), 2u);
    blocks[2].txs[0].note = "edited";
    {
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        for (const auto& b : blocks) {
            const auto bytes = encode_block(b);
            ByteWriter len;
            len.u64(bytes.size());
            out << len.str() << bytes;
        }
    }
    EXPECT_THROW(Chain::open(file, kMainChannel, 1, counting_clock()), StateError);
    auto opt2 = test_options();
    opt2.state_dir = dir.path;
    EXPECT_THROW(Network{opt2}, StateError);
}

TEST(Policy, StandardMatchesIndependentTable) {
    const auto out = dmtest::fuzz_standard_policy(5000, 17);
    EXPECT_EQ(out.mismatches, 0u);
    EXPECT_GT(out.allowed, 100u);
    EXPECT_LT(out.allowed, out.cases);
}

TEST(Policy, DefaultDenyAndSelfRead) {
    AccessPolicy empty;
    Affiliations aff;
    EXPECT_TRUE(empty.evaluate({"a", Role::Patient, "a", AssetClass::MedicalRecord, Action::Read}, aff).allowed);
    EXPECT_FALSE(empty.evaluate({"a", Role::Patient, "a", AssetClass::MedicalRecord, Action::Write}, aff).allowed);
    empty.add(Rule{Role::Patient, AssetClass::MedicalRecord, Action::Read, Scope::Self, {}, false});
    EXPECT_FALSE(empty.evaluate({"a", Role::Patient, "a", AssetClass::MedicalRecord, Action::Read}, aff).allowed);
}

TEST(Policy, NetworkSubmissionsAgreeWithTable) {
    Fixture f;
    const std::vector<const Network::Registration*> regs = {&f.hospital, &f.doctor, &f.p1,
                                                            &f.p2,       &f.user,   &f.expert};
    const auto aff = f.net.affiliations();
    dmtest::HospitalSets hs;
    for (const auto& [id, set] : aff.all())
        hs[id] = set;
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        const auto* who = regs[rng() % regs.size()];
        const auto& subject = regs[rng() % regs.size()]->participant.id;
        const auto type = static_cast<TxType>(rng() % 8);
        const auto h = f.net.store_offchain("x" + std::to_string(i));
        const auto r = f.net.submit(request(type, who->participant.id, subject, h), who->keys);
        const bool want = dmtest::expected_allowed(who->participant.role, who->participant.id, subject,
                                                   default_asset_class(type), action_of(type),
                                                   dmtest::oracle_related(hs, who->participant.id, subject));
        EXPECT_EQ(r.accepted(), want) << to_string(type) << " " << who->participant.id << "->" << subject;
        ++checked;
    }
    EXPECT_EQ(checked, 400);
}

TEST(Network, ConcurrentSubmitsAllRecorded) {
    Fixture f;
    const auto before = f.net.transactions().size();
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&] {
            for (int i = 0; i < 25; ++i)
                f.net.submit(request(TxType::Query, "P1", "P1"), f.p1.keys);
        });
    for (auto& t : threads)
        t.join();
    const auto txs = f.net.transactions();
    EXPECT_EQ(txs.size(), before + 100);
    std::set<std::uint64_t> nonces;
    for (const auto& t : txs)
        nonces.insert(t.nonce);
    EXPECT_EQ(nonces.size(), txs.size());
    EXPECT_TRUE(f.net.verify().ok);
}
