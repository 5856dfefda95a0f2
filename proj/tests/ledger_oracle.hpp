#pragma once

// Grant table written out independently of AccessPolicy::standard(), plus
// randomized tamper and policy-fuzz drivers shared by the unit and
// acceptance tests.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dmchain/ledger/chain.hpp"
#include "dmchain/ledger/policy.hpp"

namespace dmtest {

using HospitalSets = std::map<std::string, std::set<std::string>>;

inline bool oracle_related(const HospitalSets& hs, const std::string& a, const std::string& b) {
    auto of = [&](const std::string& x) {
        std::set<std::string> s;
        if (auto it = hs.find(x); it != hs.end())
            s = it->second;
        return s;
    };
    const auto ha = of(a), hb = of(b);
    if (ha.count(b) || hb.count(a))
        return true;
    for (const auto& h : ha)
        if (hb.count(h))
            return true;
    return false;
}

inline bool expected_allowed(dmchain::ledger::Role role, const std::string& actor, const std::string& subject,
                             dmchain::ledger::AssetClass asset, dmchain::ledger::Action action, bool related) {
    using namespace dmchain::ledger;
    const bool self = actor == subject;
    const bool read = action == Action::Read;
    const bool aff = related && !self;
    if (read && self)
        return true;
    switch (role) {
    case Role::Hospital:
        if ((asset == AssetClass::MedicalRecord || asset == AssetClass::LabResults) && aff)
            return true;
        if (asset == AssetClass::SocialContextual && read && aff)
            return true;
        return read && (asset == AssetClass::RiskFactors || asset == AssetClass::Prediction);
    case Role::AlliedHealthProfessional:
        return (asset == AssetClass::MedicalRecord || asset == AssetClass::LabResults) && aff;
    case Role::Pharmacist:
        return asset == AssetClass::MedicalRecord && aff;
    case Role::Patient:
        return asset == AssetClass::SocialContextual && !read && self;
    case Role::ExternalUser:
        return asset == AssetClass::RiskFactors && !read && self;
    case Role::MedicalExpert:
        if (asset == AssetClass::ExpertFeedback && !read)
            return true;
        return read && (asset == AssetClass::RiskFactors || asset == AssetClass::Prediction);
    case Role::CertificateAuthority:
        return asset == AssetClass::Registry && !read;
    }
    return false;
}

struct FuzzOutcome {
    std::size_t cases = 0;
    std::size_t mismatches = 0;
    std::size_t allowed = 0;
};

/// Random populations and requests evaluated by AccessPolicy::standard() and
/// by the table above.
inline FuzzOutcome fuzz_standard_policy(std::size_t cases, std::uint64_t seed) {
    using namespace dmchain::ledger;
    std::mt19937_64 rng(seed);
    const auto policy = AccessPolicy::standard();
    FuzzOutcome out;
    while (out.cases < cases) {
        const int n = 2 + static_cast<int>(rng() % 7);
        std::vector<std::string> ids;
        std::vector<std::string> hospitals;
        std::map<std::string, Role> roles;
        for (int i = 0; i < n; ++i) {
            const std::string id = "p" + std::to_string(i);
            const Role r = kAllRoles[rng() % std::size(kAllRoles)];
            ids.push_back(id);
            roles[id] = r;
            if (r == Role::Hospital)
                hospitals.push_back(id);
        }
        HospitalSets hs;
        Affiliations aff;
        for (const auto& id : ids)
            for (const auto& h : hospitals)
                if (h != id && rng() % 2) {
                    hs[id].insert(h);
                    aff.add(id, h);
                }
        for (int k = 0; k < 50 && out.cases < cases; ++k) {
            Request q;
            q.actor = ids[rng() % ids.size()];
            q.actor_role = roles[q.actor];
            q.subject = rng() % 4 == 0 ? q.actor : ids[rng() % ids.size()];
            q.asset = static_cast<AssetClass>(rng() % 8);
            q.action = rng() % 2 ? Action::Read : Action::Write;
            const bool got = policy.evaluate(q, aff).allowed;
            const bool want = expected_allowed(q.actor_role, q.actor, q.subject, q.asset, q.action,
                                               oracle_related(hs, q.actor, q.subject));
            ++out.cases;
            out.allowed += got;
            out.mismatches += got != want;
        }
    }
    return out;
}

struct TamperOutcome {
    std::size_t trials = 0;
    std::size_t localized = 0;
};

/// Mutates one field of one random block (without re-hashing it) and checks
/// that verification fails at exactly that block.
inline TamperOutcome tamper_trials(const std::vector<dmchain::ledger::Block>& chain, std::size_t trials,
                                   std::uint64_t seed) {
    using namespace dmchain::ledger;
    std::mt19937_64 rng(seed);
    const auto head = chain.back().block_hash;
    TamperOutcome out;
    for (std::size_t t = 0; t < trials; ++t) {
        auto blocks = chain;
        const std::size_t i = rng() % blocks.size();
        Block& b = blocks[i];
        const int kind = static_cast<int>(rng() % 6);
        if (b.txs.empty() && kind < 3) {
            b.header += "x";
        } else if (kind == 0) {
            b.txs[rng() % b.txs.size()].note += "!";
        } else if (kind == 1) {
            auto& tx = b.txs[rng() % b.txs.size()];
            tx.subject += "x";
            tx.tx_id = tx.compute_id(); // consistent tx, stale block hash
        } else if (kind == 2) {
            auto& tx = b.txs[rng() % b.txs.size()];
            tx.status = tx.status == TxStatus::Accepted ? TxStatus::Denied : TxStatus::Accepted;
        } else if (kind == 3) {
            b.timestamp_ms += 1 + static_cast<std::int64_t>(rng() % 1000);
        } else if (kind == 4) {
            b.prev_hash[rng() % 32] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        } else {
            b.block_hash[rng() % 32] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        }
        const auto v = verify_blocks(blocks, head);
        ++out.trials;
        out.localized += !v.ok && v.first_bad && *v.first_bad == i;
    }
    return out;
}

} // namespace dmtest
