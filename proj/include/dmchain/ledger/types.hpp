#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmchain/digest.hpp"

namespace dmchain::ledger {

enum class Role { Hospital, AlliedHealthProfessional, Pharmacist, Patient, ExternalUser, MedicalExpert, CertificateAuthority };

enum class TxType {
    MedicalRecordUpdate,
    LabResultsUpdate,
    SocialContextualUpdate,
    Query,
    QueryResponse,
    RiskFactorsForPrediction,
    PredictionResult,
    ExpertFeedback,
    // administrative
    ParticipantRegistration,
    CredentialRecovery,
    PipelineStage,
    ModelDeployment,
    PipelineFailure,
};

enum class AssetClass { MedicalRecord, LabResults, SocialContextual, RiskFactors, Prediction, ExpertFeedback, Model, Registry };

enum class Action { Read, Write };

enum class TxStatus { Accepted, Denied };

std::string_view to_string(Role r) noexcept;
std::string_view to_string(TxType t) noexcept;
std::string_view to_string(AssetClass a) noexcept;
std::string_view to_string(Action a) noexcept;
std::string_view to_string(TxStatus s) noexcept;
/// Inverse of to_string; throw ConfigError on unknown names.
Role parse_role(std::string_view s);
TxType parse_tx_type(std::string_view s);
AssetClass parse_asset_class(std::string_view s);

inline constexpr Role kAllRoles[] = {Role::Hospital,     Role::AlliedHealthProfessional, Role::Pharmacist,
                                     Role::Patient,      Role::ExternalUser,             Role::MedicalExpert,
                                     Role::CertificateAuthority};

/// Types that anchor off-chain content and must carry a payload hash.
bool is_update_type(TxType t) noexcept;
/// Asset class a transaction type touches when the request does not name one.
AssetClass default_asset_class(TxType t) noexcept;
/// Query and QueryResponse disclose data (Read); everything else writes.
Action action_of(TxType t) noexcept;

struct Transaction {
    Hash tx_id{};
    TxType type = TxType::Query;
    AssetClass asset = AssetClass::MedicalRecord;
    std::string actor;
    std::string subject;
    std::optional<Hash> payload_hash;
    std::string reference; ///< referenced tx id (hex), model version, or role for registrations
    std::string note;
    std::int64_t timestamp_ms = 0;
    std::uint64_t nonce = 0;
    std::string key_pair_id;
    Hash signature{};
    TxStatus status = TxStatus::Accepted;
    std::string denial_reason;

    /// Canonical bytes covered by the signature.
    std::string signed_bytes() const;
    /// Canonical bytes of everything except tx_id.
    std::string content_bytes() const;
    Hash compute_id() const { return sha256(content_bytes()); }

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Block {
    std::uint64_t index = 0;
    Hash prev_hash{};
    std::vector<Transaction> txs;
    std::int64_t timestamp_ms = 0;
    std::string header; ///< genesis: digest algorithm and channel name
    Hash block_hash{};

    /// Fixed field order, u64 little-endian lengths; excludes block_hash.
    std::string canonical_bytes() const;
    Hash compute_hash() const { return sha256(canonical_bytes()); }

    friend bool operator==(const Block&, const Block&) = default;
};

/// Length-prefixed full serialization (including block_hash and tx ids).
std::string encode_block(const Block& b);
/// Throws LoadError on malformed input.
Block decode_block(std::string_view bytes);

/// Appends little-endian integers and length-prefixed strings.
class ByteWriter {
public:
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s);
    void hash(const Hash& h) { bytes(as_bytes(h)); }
    const std::string& str() const noexcept { return buf_; }
    std::string take() noexcept { return std::move(buf_); }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view s) : s_(s) {}
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    std::string bytes();
    Hash hash();
    bool done() const noexcept { return pos_ == s_.size(); }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace dmchain::ledger
