#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "dmchain/ledger/chain.hpp"
#include "dmchain/ledger/offchain.hpp"
#include "dmchain/ledger/policy.hpp"

namespace dmchain::ledger {

inline constexpr const char* kMainChannel = "main";

/// The PIN and identity proof are kept only as salted digests.
struct Credential {
    std::string key_pair_id;
    Hash salt{};
    Hash pin_digest{};
    Hash identity_proof_digest{};
    bool revoked = false;
};

struct Participant {
    std::string id;
    Role role = Role::Patient;
    Credential credential;
};

/// Held by the participant. The signature over a request is
/// SHA-256(secret || canonical request bytes).
struct KeyPair {
    std::string key_pair_id;
    std::string secret;
};

struct TxRequest {
    std::string channel = kMainChannel;
    TxType type = TxType::Query;
    std::optional<AssetClass> asset; ///< defaults to default_asset_class(type)
    std::string actor;
    std::string subject;
    std::optional<Hash> payload_hash;
    std::string reference;
    std::string note;
};

struct SignedRequest {
    TxRequest request;
    std::string key_pair_id;
    Hash signature{};
};

SignedRequest sign(const TxRequest& req, const KeyPair& key);

struct Receipt {
    Hash tx_id{};
    TxStatus status = TxStatus::Denied;
    std::string reason;
    std::string channel;

    bool accepted() const noexcept { return status == TxStatus::Accepted; }
};

struct Event {
    std::string channel;
    Hash tx_id{};
    TxType type = TxType::Query;
    std::string recipient;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Events as a pure function of accepted transactions, fed in log order.
/// Registration transactions update the role/affiliation view used to find
/// recipients.
class EventDeriver {
public:
    std::vector<Event> feed(const std::string& channel, const Transaction& tx);

private:
    std::map<std::string, Role> roles_;
    Affiliations aff_;
};

std::vector<Event> replay_events(const std::string& channel, std::span<const Transaction> log);

struct NetworkOptions {
    std::size_t sealing_batch = 1;
    Clock clock;                        ///< system clock when empty
    std::optional<std::uint64_t> seed;  ///< fixes key generation for tests
    std::optional<std::filesystem::path> state_dir;
};

/// Single-validator permissioned network: participant registry with a
/// certificate authority, named channels sharing that registry, one off-chain
/// store, an access policy and the derived event log. Submissions serialize
/// through one lock; reads take a shared lock.
class Network {
public:
    explicit Network(NetworkOptions opt = {});

    /// Creates the single certificate authority. Throws RegistrationError if
    /// one exists.
    KeyPair bootstrap_ca(const std::string& id, std::string_view identity_proof, std::string_view pin);

    struct Registration {
        Participant participant;
        KeyPair keys;
        Receipt receipt;
    };
    /// Issues a credential and records a registration transaction signed by
    /// the CA. Throws RegistrationError without a CA, on a duplicate id or an
    /// unknown hospital.
    Registration register_participant(const std::string& id, Role role, std::string_view identity_proof,
                                      std::string_view pin, const std::vector<std::string>& hospitals = {});

    /// Revokes the old key pair and issues a new one when the PIN and proof
    /// match. A mismatch or a revoked participant throws AuthError after the
    /// attempt is recorded.
    KeyPair recover_credentials(const std::string& id, std::string_view pin, std::string_view identity_proof);

    /// Revokes the participant's current credential (CA action, recorded).
    void revoke(const std::string& id);

    /// Accepted requests enter the channel; rejected ones are recorded with
    /// status Denied and a reason. Never throws for policy or signature
    /// failures; an unknown channel throws NotFoundError.
    Receipt submit(const SignedRequest& req);
    Receipt submit(const TxRequest& req, const KeyPair& key) { return submit(sign(req, key)); }

    Hash store_offchain(std::string_view payload) { return store_.put(payload); }
    std::string fetch_offchain(const Hash& h) const { return store_.get(h); }
    const OffChainStore& store() const noexcept { return store_; }

    void add_channel(const std::string& name);
    std::vector<std::string> channels() const;
    void add_rule(Rule r);
    AccessPolicy policy() const;
    Affiliations affiliations() const;
    std::optional<Participant> participant(const std::string& id) const;
    std::vector<Participant> participants() const;

    /// Seals every channel's pending set.
    void flush();

    std::vector<Block> blocks(const std::string& channel = kMainChannel) const;
    std::vector<Transaction> pending(const std::string& channel = kMainChannel) const;
    VerifyResult verify(const std::string& channel = kMainChannel) const;
    /// Sealed then pending transactions, in order.
    std::vector<Transaction> transactions(const std::string& channel = kMainChannel) const;

    /// Transactions (including denied ones) whose actor, subject, reference,
    /// tx id hex or payload hash hex equals `key`, in block order.
    std::vector<Transaction> audit_trail(const std::string& key, const std::string& channel = kMainChannel) const;

    std::vector<Event> events() const;

    /// Payload hashes of accepted update-type transactions that are missing
    /// from the off-chain store.
    std::vector<Hash> unresolved_payloads(const std::string& channel = kMainChannel) const;

private:
    Chain& chain_locked(const std::string& channel);
    const Chain& chain_locked(const std::string& channel) const;
    KeyPair issue_locked(Participant& p, std::string_view identity_proof, std::string_view pin);
    Receipt submit_locked(const SignedRequest& req);
    Receipt record_locked(Transaction tx, const std::string& channel);
    Receipt admin_tx_locked(TxType type, const std::string& subject, std::string reference, std::string note);
    std::string random_token(std::size_t bytes);
    void save_registry_locked() const;
    void load_registry_locked();

    NetworkOptions opt_;
    mutable std::shared_mutex mu_;
    std::mt19937_64 rng_;
    std::map<std::string, Participant> participants_;
    std::map<std::string, std::string> key_secrets_; ///< key_pair_id -> secret
    std::map<std::string, std::string> key_owner_;   ///< key_pair_id -> participant id
    std::optional<std::string> ca_id_;
    KeyPair ca_keys_;
    Affiliations aff_;
    AccessPolicy policy_;
    std::map<std::string, Chain> chains_;
    OffChainStore store_;
    EventDeriver deriver_;
    std::vector<Event> events_;
    std::uint64_t nonce_ = 0;
};

} // namespace dmchain::ledger
