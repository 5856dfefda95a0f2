#include "dmchain/ledger/types.hpp"

#include <algorithm>
#include <array>

#include "dmchain/error.hpp"

namespace dmchain::ledger {

namespace {

constexpr std::array<std::string_view, 7> kRoleNames = {
    "Hospital", "AlliedHealthProfessional", "Pharmacist", "Patient", "ExternalUser", "MedicalExpert",
    "CertificateAuthority"};
constexpr std::array<std::string_view, 13> kTxNames = {
    "MedicalRecordUpdate",     "LabResultsUpdate", "SocialContextualUpdate",  "Query",
    "QueryResponse",           "RiskFactorsForPrediction", "PredictionResult", "ExpertFeedback",
    "ParticipantRegistration", "CredentialRecovery",       "PipelineStage",    "ModelDeployment",
    "PipelineFailure"};
constexpr std::array<std::string_view, 8> kAssetNames = {
    "MedicalRecord", "LabResults", "SocialContextual", "RiskFactors", "Prediction", "ExpertFeedback", "Model",
    "Registry"};

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
    const auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end())
        throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
    return static_cast<E>(it - names.begin());
}

void write_tx(ByteWriter& w, const Transaction& t, bool with_signature, bool with_id) {
    w.u64(static_cast<std::uint64_t>(t.type));
    w.u64(static_cast<std::uint64_t>(t.asset));
    w.bytes(t.actor);
    w.bytes(t.subject);
    w.u64(t.payload_hash ? 1 : 0);
    w.hash(t.payload_hash.value_or(Hash{}));
    w.bytes(t.reference);
    w.bytes(t.note);
    w.i64(t.timestamp_ms);
    w.u64(t.nonce);
    w.bytes(t.key_pair_id);
    if (!with_signature)
        return;
    w.hash(t.signature);
    w.u64(static_cast<std::uint64_t>(t.status));
    w.bytes(t.denial_reason);
    if (with_id)
        w.hash(t.tx_id);
}

Transaction read_tx(ByteReader& r) {
    Transaction t;
    const auto type = r.u64();
    if (type >= kTxNames.size())
        throw LoadError("bad transaction type in block data");
    t.type = static_cast<TxType>(type);
    const auto asset = r.u64();
    if (asset >= kAssetNames.size())
        throw LoadError("bad asset class in block data");
    t.asset = static_cast<AssetClass>(asset);
    t.actor = r.bytes();
    t.subject = r.bytes();
    const bool has_payload = r.u64() != 0;
    const Hash ph = r.hash();
    if (has_payload)
        t.payload_hash = ph;
    t.reference = r.bytes();
    t.note = r.bytes();
    t.timestamp_ms = r.i64();
    t.nonce = r.u64();
    t.key_pair_id = r.bytes();
    t.signature = r.hash();
    const auto st = r.u64();
    if (st > 1)
        throw LoadError("bad transaction status in block data");
    t.status = static_cast<TxStatus>(st);
    t.denial_reason = r.bytes();
    t.tx_id = r.hash();
    return t;
}

void write_block_body(ByteWriter& w, const Block& b) {
    w.u64(b.index);
    w.hash(b.prev_hash);
    w.i64(b.timestamp_ms);
    w.bytes(b.header);
    w.u64(b.txs.size());
    for (const auto& t : b.txs)
        write_tx(w, t, true, true);
}

} // namespace

std::string_view to_string(Role r) noexcept { return kRoleNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(TxType t) noexcept { return kTxNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(AssetClass a) noexcept { return kAssetNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(Action a) noexcept { return a == Action::Read ? "read" : "write"; }
std::string_view to_string(TxStatus s) noexcept { return s == TxStatus::Accepted ? "accepted" : "denied"; }

Role parse_role(std::string_view s) { return parse_enum<Role>(s, kRoleNames, "role"); }
TxType parse_tx_type(std::string_view s) { return parse_enum<TxType>(s, kTxNames, "transaction type"); }
AssetClass parse_asset_class(std::string_view s) { return parse_enum<AssetClass>(s, kAssetNames, "asset class"); }

bool is_update_type(TxType t) noexcept {
    switch (t) {
    case TxType::MedicalRecordUpdate:
    case TxType::LabResultsUpdate:
    case TxType::SocialContextualUpdate:
    case TxType::RiskFactorsForPrediction:
    case TxType::PredictionResult:
    case TxType::ExpertFeedback:
    case TxType::PipelineStage:
    case TxType::ModelDeployment:
        return true;
    default:
        return false;
    }
}

AssetClass default_asset_class(TxType t) noexcept {
    switch (t) {
    case TxType::MedicalRecordUpdate: return AssetClass::MedicalRecord;
    case TxType::LabResultsUpdate: return AssetClass::LabResults;
    case TxType::SocialContextualUpdate: return AssetClass::SocialContextual;
    case TxType::Query:
    case TxType::QueryResponse: return AssetClass::MedicalRecord;
    case TxType::RiskFactorsForPrediction: return AssetClass::RiskFactors;
    case TxType::PredictionResult: return AssetClass::Prediction;
    case TxType::ExpertFeedback: return AssetClass::ExpertFeedback;
    case TxType::ParticipantRegistration:
    case TxType::CredentialRecovery: return AssetClass::Registry;
    case TxType::PipelineStage:
    case TxType::ModelDeployment:
    case TxType::PipelineFailure: return AssetClass::Model;
    }
    return AssetClass::MedicalRecord;
}

Action action_of(TxType t) noexcept {
    return t == TxType::Query || t == TxType::QueryResponse ? Action::Read : Action::Write;
}

std::string Transaction::signed_bytes() const {
    ByteWriter w;
    write_tx(w, *this, false, false);
    return w.take();
}

std::string Transaction::content_bytes() const {
    ByteWriter w;
    write_tx(w, *this, true, false);
    return w.take();
}

std::string Block::canonical_bytes() const {
    ByteWriter w;
    write_block_body(w, *this);
    return w.take();
}

std::string encode_block(const Block& b) {
    ByteWriter w;
    write_block_body(w, b);
    w.hash(b.block_hash);
    return w.take();
}

Block decode_block(std::string_view bytes) {
    ByteReader r(bytes);
    Block b;
    b.index = r.u64();
    b.prev_hash = r.hash();
    b.timestamp_ms = r.i64();
    b.header = r.bytes();
    const auto n = r.u64();
    if (n > bytes.size())
        throw LoadError("implausible transaction count in block data");
    b.txs.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        b.txs.push_back(read_tx(r));
    b.block_hash = r.hash();
    if (!r.done())
        throw LoadError("trailing bytes after block");
    return b;
}

void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::bytes(std::string_view s) {
    u64(s.size());
    buf_.append(s);
}

std::uint64_t ByteReader::u64() {
    if (s_.size() - pos_ < 8)
        throw LoadError("truncated block data");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
}

std::string ByteReader::bytes() {
    const auto n = u64();
    if (s_.size() - pos_ < n)
        throw LoadError("truncated block data");
    std::string out(s_.substr(pos_, n));
    pos_ += n;
    return out;
}

Hash ByteReader::hash() {
    const auto s = bytes();
    if (s.size() != 32)
        throw LoadError("hash field has wrong length");
    Hash h{};
    std::copy(s.begin(), s.end(), h.begin());
    return h;
}

} // namespace dmchain::ledger
