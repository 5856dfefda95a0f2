#include "dmchain/ledger/network.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dmchain/error.hpp"

namespace dmchain::ledger {

using nlohmann::json;

namespace {

Transaction unsigned_tx(const TxRequest& req, const std::string& key_pair_id) {
    Transaction t;
    t.type = req.type;
    t.asset = req.asset.value_or(default_asset_class(req.type));
    t.actor = req.actor;
    t.subject = req.subject;
    t.payload_hash = req.payload_hash;
    t.reference = req.reference;
    t.note = req.note;
    t.key_pair_id = key_pair_id;
    return t;
}

Hash signature_of(const TxRequest& req, const std::string& key_pair_id, const std::string& secret) {
    // timestamp and nonce are assigned by the network, so they are zero here
    return sha256(secret, unsigned_tx(req, key_pair_id).signed_bytes());
}

std::string join(const std::vector<std::string>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += sep;
        s += v[i];
    }
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty())
            out.push_back(cur);
    return out;
}

json rule_to_json(const Rule& r) {
    json j;
    if (const auto* role = std::get_if<Role>(&r.principal))
        j["role"] = std::string(to_string(*role));
    else
        j["id"] = std::get<std::string>(r.principal);
    j["asset"] = std::string(to_string(r.asset));
    j["action"] = std::string(to_string(r.action));
    static const char* scopes[] = {"self", "affiliated", "any", "specific"};
    j["scope"] = scopes[static_cast<int>(r.scope)];
    j["subject"] = r.subject;
    j["allow"] = r.allow;
    return j;
}

Rule rule_from_json(const json& j) {
    Rule r;
    if (j.contains("role"))
        r.principal = parse_role(j.at("role").get<std::string>());
    else
        r.principal = j.at("id").get<std::string>();
    r.asset = parse_asset_class(j.at("asset").get<std::string>());
    r.action = j.at("action").get<std::string>() == "read" ? Action::Read : Action::Write;
    const auto s = j.at("scope").get<std::string>();
    if (s == "self")
        r.scope = Scope::Self;
    else if (s == "affiliated")
        r.scope = Scope::Affiliated;
    else if (s == "any")
        r.scope = Scope::Any;
    else if (s == "specific")
        r.scope = Scope::Specific;
    else
        throw ConfigError("unknown rule scope '" + s + "'");
    r.subject = j.value("subject", "");
    r.allow = j.value("allow", true);
    return r;
}

Hash hash_from_json(const json& j) {
    const auto h = parse_hash(j.get<std::string>());
    if (!h)
        throw LoadError("bad hash in registry file");
    return *h;
}

} // namespace

SignedRequest sign(const TxRequest& req, const KeyPair& key) {
    return {req, key.key_pair_id, signature_of(req, key.key_pair_id, key.secret)};
}

std::vector<Event> EventDeriver::feed(const std::string& channel, const Transaction& tx) {
    std::vector<Event> out;
    if (tx.status != TxStatus::Accepted)
        return out;
    auto to = [&](const std::string& who) { out.push_back({channel, tx.tx_id, tx.type, who}); };
    auto to_all_hospitals = [&] {
        for (const auto& [id, role] : roles_)
            if (role == Role::Hospital)
                to(id);
    };
    switch (tx.type) {
    case TxType::ParticipantRegistration:
        roles_[tx.subject] = parse_role(tx.reference);
        for (const auto& h : split(tx.note, ','))
            aff_.add(tx.subject, h);
        break;
    case TxType::MedicalRecordUpdate:
    case TxType::LabResultsUpdate:
        to(tx.subject);
        break;
    case TxType::SocialContextualUpdate:
        for (const auto& h : aff_.hospitals_of(tx.subject))
            to(h);
        break;
    case TxType::RiskFactorsForPrediction:
    case TxType::PredictionResult:
        to_all_hospitals();
        break;
    default:
        break;
    }
    return out;
}

std::vector<Event> replay_events(const std::string& channel, std::span<const Transaction> log) {
    EventDeriver d;
    std::vector<Event> out;
    for (const auto& t : log) {
        auto e = d.feed(channel, t);
        out.insert(out.end(), e.begin(), e.end());
    }
    return out;
}

Network::Network(NetworkOptions opt) : opt_(std::move(opt)), policy_(AccessPolicy::standard()) {
    if (!opt_.clock)
        opt_.clock = system_clock();
    rng_.seed(opt_.seed ? *opt_.seed : std::random_device{}());
    if (opt_.state_dir) {
        std::filesystem::create_directories(*opt_.state_dir / "ledger");
        store_.attach(*opt_.state_dir / "offchain");
    }
    std::unique_lock lock(mu_);
    if (opt_.state_dir && std::filesystem::exists(*opt_.state_dir / "registry.json"))
        load_registry_locked();
    if (!chains_.count(kMainChannel)) {
        if (opt_.state_dir)
            chains_.emplace(kMainChannel, Chain::open(*opt_.state_dir / "ledger" / "main.blocks", kMainChannel,
                                                      opt_.sealing_batch, opt_.clock));
        else
            chains_.emplace(kMainChannel, Chain(kMainChannel, opt_.sealing_batch, opt_.clock));
    }
    // events are a function of the log; rebuild them from what was loaded
    for (const auto& [name, chain] : chains_)
        for (const auto& b : chain.blocks())
            for (const auto& t : b.txs) {
                auto e = deriver_.feed(name, t);
                events_.insert(events_.end(), e.begin(), e.end());
            }
}

std::string Network::random_token(std::size_t bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < bytes; ++i) {
        const auto v = static_cast<unsigned>(rng_() & 0xff);
        s += digits[v >> 4];
        s += digits[v & 0xf];
    }
    return s;
}

KeyPair Network::issue_locked(Participant& p, std::string_view identity_proof, std::string_view pin) {
    KeyPair k{random_token(16), random_token(32)};
    std::string salt_src = random_token(16);
    p.credential.key_pair_id = k.key_pair_id;
    p.credential.salt = sha256(salt_src);
    p.credential.pin_digest = sha256(as_bytes(p.credential.salt), pin);
    p.credential.identity_proof_digest = sha256(as_bytes(p.credential.salt), identity_proof);
    p.credential.revoked = false;
    key_secrets_[k.key_pair_id] = k.secret;
    key_owner_[k.key_pair_id] = p.id;
    return k;
}

KeyPair Network::bootstrap_ca(const std::string& id, std::string_view identity_proof, std::string_view pin) {
    std::unique_lock lock(mu_);
    if (ca_id_)
        throw RegistrationError("a certificate authority already exists");
    if (id.empty() || participants_.count(id))
        throw RegistrationError("participant id '" + id + "' is empty or taken");
    Participant p{id, Role::CertificateAuthority, {}};
    ca_keys_ = issue_locked(p, identity_proof, pin);
    participants_[id] = p;
    ca_id_ = id;
    admin_tx_locked(TxType::ParticipantRegistration, id, std::string(to_string(Role::CertificateAuthority)), "");
    save_registry_locked();
    return ca_keys_;
}

Network::Registration Network::register_participant(const std::string& id, Role role, std::string_view identity_proof,
                                                    std::string_view pin,
                                                    const std::vector<std::string>& hospitals) {
    std::unique_lock lock(mu_);
    if (!ca_id_)
        throw RegistrationError("no certificate authority has been bootstrapped");
    if (role == Role::CertificateAuthority)
        throw RegistrationError("only one certificate authority per network");
    if (id.empty() || participants_.count(id))
        throw RegistrationError("participant id '" + id + "' is empty or already registered");
    if (id.find(',') != std::string::npos)
        throw RegistrationError("participant ids may not contain ','");
    for (const auto& h : hospitals) {
        const auto it = participants_.find(h);
        if (it == participants_.end() || it->second.role != Role::Hospital)
            throw RegistrationError("'" + h + "' is not a registered hospital");
    }
    Participant p{id, role, {}};
    KeyPair keys = issue_locked(p, identity_proof, pin);
    participants_[id] = p;
    for (const auto& h : hospitals)
        aff_.add(id, h);
    Receipt r = admin_tx_locked(TxType::ParticipantRegistration, id, std::string(to_string(role)), join(hospitals, ','));
    save_registry_locked();
    return {p, keys, r};
}

KeyPair Network::recover_credentials(const std::string& id, std::string_view pin, std::string_view identity_proof) {
    std::unique_lock lock(mu_);
    const auto it = participants_.find(id);
    if (it == participants_.end())
        throw AuthError("unknown participant '" + id + "'");
    Participant& p = it->second;
    auto fail = [&](const std::string& why) {
        Transaction t;
        t.type = TxType::CredentialRecovery;
        t.asset = AssetClass::Registry;
        t.actor = id;
        t.subject = id;
        t.status = TxStatus::Denied;
        t.denial_reason = why;
        record_locked(std::move(t), kMainChannel);
        save_registry_locked();
        throw AuthError("credential recovery for '" + id + "' failed: " + why);
    };
    if (p.credential.revoked)
        fail("participant is revoked");
    if (sha256(as_bytes(p.credential.salt), pin) != p.credential.pin_digest ||
        sha256(as_bytes(p.credential.salt), identity_proof) != p.credential.identity_proof_digest)
        fail("pin or identity proof mismatch");
    const std::string old = p.credential.key_pair_id;
    key_secrets_.erase(old);
    KeyPair k = issue_locked(p, identity_proof, pin);
    admin_tx_locked(TxType::CredentialRecovery, id, k.key_pair_id, "revoked " + old);
    if (p.role == Role::CertificateAuthority)
        ca_keys_ = k;
    save_registry_locked();
    return k;
}

void Network::revoke(const std::string& id) {
    std::unique_lock lock(mu_);
    const auto it = participants_.find(id);
    if (it == participants_.end())
        throw NotFoundError("unknown participant '" + id + "'");
    if (ca_id_ && id == *ca_id_)
        throw RegistrationError("the certificate authority cannot revoke itself");
    it->second.credential.revoked = true;
    key_secrets_.erase(it->second.credential.key_pair_id);
    admin_tx_locked(TxType::CredentialRecovery, id, "", "revoked " + it->second.credential.key_pair_id);
    save_registry_locked();
}

Receipt Network::admin_tx_locked(TxType type, const std::string& subject, std::string reference, std::string note) {
    TxRequest req;
    req.type = type;
    req.actor = *ca_id_;
    req.subject = subject;
    req.reference = std::move(reference);
    req.note = std::move(note);
    return submit_locked(sign(req, ca_keys_));
}

Receipt Network::submit(const SignedRequest& req) {
    std::unique_lock lock(mu_);
    Receipt r = submit_locked(req);
    save_registry_locked();
    return r;
}

Receipt Network::submit_locked(const SignedRequest& sreq) {
    const TxRequest& req = sreq.request;
    chain_locked(req.channel); // throws for an unknown channel
    Transaction tx = unsigned_tx(req, sreq.key_pair_id);
    tx.signature = sreq.signature;

    auto deny = [&](std::string why) {
        tx.status = TxStatus::Denied;
        tx.denial_reason = std::move(why);
        return record_locked(std::move(tx), req.channel);
    };

    const auto pit = participants_.find(req.actor);
    if (pit == participants_.end())
        return deny("unknown actor");
    const Participant& actor = pit->second;
    const auto owner = key_owner_.find(sreq.key_pair_id);
    if (owner == key_owner_.end() || owner->second != actor.id)
        return deny("key pair does not belong to the actor");
    const auto secret = key_secrets_.find(sreq.key_pair_id);
    if (actor.credential.revoked || secret == key_secrets_.end() ||
        actor.credential.key_pair_id != sreq.key_pair_id)
        return deny("credential revoked");
    if (signature_of(req, sreq.key_pair_id, secret->second) != sreq.signature)
        return deny("bad signature");
    if (req.subject.empty())
        return deny("missing subject");
    if (is_update_type(req.type)) {
        if (!req.payload_hash)
            return deny("update transaction without payload hash");
        if (!store_.contains(*req.payload_hash))
            return deny("payload hash does not resolve in the off-chain store");
    }
    const Request q{actor.id, actor.role, req.subject, tx.asset, action_of(req.type)};
    const Decision d = policy_.evaluate(q, aff_);
    if (!d.allowed)
        return deny(d.reason);
    tx.status = TxStatus::Accepted;
    return record_locked(std::move(tx), req.channel);
}

Receipt Network::record_locked(Transaction tx, const std::string& channel) {
    tx.timestamp_ms = opt_.clock();
    tx.nonce = ++nonce_;
    tx.tx_id = tx.compute_id();
    Receipt r{tx.tx_id, tx.status, tx.denial_reason, channel};
    auto ev = deriver_.feed(channel, tx);
    events_.insert(events_.end(), ev.begin(), ev.end());
    chain_locked(channel).append(std::move(tx));
    return r;
}

Chain& Network::chain_locked(const std::string& channel) {
    const auto it = chains_.find(channel);
    if (it == chains_.end())
        throw NotFoundError("unknown channel '" + channel + "'");
    return it->second;
}

const Chain& Network::chain_locked(const std::string& channel) const {
    const auto it = chains_.find(channel);
    if (it == chains_.end())
        throw NotFoundError("unknown channel '" + channel + "'");
    return it->second;
}

void Network::add_channel(const std::string& name) {
    std::unique_lock lock(mu_);
    if (name.empty() || name.find_first_of("/\\;") != std::string::npos)
        throw ConfigError("invalid channel name '" + name + "'");
    if (chains_.count(name))
        return;
    if (opt_.state_dir)
        chains_.emplace(name, Chain::open(*opt_.state_dir / "ledger" / (name + ".blocks"), name,
                                          opt_.sealing_batch, opt_.clock));
    else
        chains_.emplace(name, Chain(name, opt_.sealing_batch, opt_.clock));
    save_registry_locked();
}

std::vector<std::string> Network::channels() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [name, c] : chains_)
        out.push_back(name);
    return out;
}

void Network::add_rule(Rule r) {
    std::unique_lock lock(mu_);
    policy_.add(std::move(r));
    save_registry_locked();
}

AccessPolicy Network::policy() const {
    std::shared_lock lock(mu_);
    return policy_;
}

Affiliations Network::affiliations() const {
    std::shared_lock lock(mu_);
    return aff_;
}

std::optional<Participant> Network::participant(const std::string& id) const {
    std::shared_lock lock(mu_);
    const auto it = participants_.find(id);
    if (it == participants_.end())
        return std::nullopt;
    return it->second;
}

std::vector<Participant> Network::participants() const {
    std::shared_lock lock(mu_);
    std::vector<Participant> out;
    for (const auto& [id, p] : participants_)
        out.push_back(p);
    return out;
}

void Network::flush() {
    std::unique_lock lock(mu_);
    for (auto& [name, c] : chains_)
        c.seal();
}

std::vector<Block> Network::blocks(const std::string& channel) const {
    std::shared_lock lock(mu_);
    return chain_locked(channel).blocks();
}

std::vector<Transaction> Network::pending(const std::string& channel) const {
    std::shared_lock lock(mu_);
    return chain_locked(channel).pending();
}

VerifyResult Network::verify(const std::string& channel) const {
    std::shared_lock lock(mu_);
    return chain_locked(channel).verify();
}

std::vector<Transaction> Network::transactions(const std::string& channel) const {
    std::shared_lock lock(mu_);
    const Chain& c = chain_locked(channel);
    std::vector<Transaction> out;
    for (const auto& b : c.blocks())
        out.insert(out.end(), b.txs.begin(), b.txs.end());
    out.insert(out.end(), c.pending().begin(), c.pending().end());
    return out;
}

std::vector<Transaction> Network::audit_trail(const std::string& key, const std::string& channel) const {
    std::vector<Transaction> out;
    for (auto& t : transactions(channel)) {
        if (t.actor == key || t.subject == key || t.reference == key || to_hex(t.tx_id) == key ||
            (t.payload_hash && to_hex(*t.payload_hash) == key))
            out.push_back(std::move(t));
    }
    return out;
}

std::vector<Event> Network::events() const {
    std::shared_lock lock(mu_);
    return events_;
}

std::vector<Hash> Network::unresolved_payloads(const std::string& channel) const {
    std::vector<Hash> out;
    for (const auto& t : transactions(channel))
        if (t.status == TxStatus::Accepted && is_update_type(t.type) &&
            (!t.payload_hash || !store_.contains(*t.payload_hash)))
            out.push_back(t.payload_hash.value_or(Hash{}));
    return out;
}

void Network::save_registry_locked() const {
    if (!opt_.state_dir)
        return;
    json j;
    j["version"] = 1;
    j["nonce"] = nonce_;
    j["ca"] = ca_id_ ? json(*ca_id_) : json(nullptr);
    j["ca_key_pair_id"] = ca_keys_.key_pair_id;
    json parts = json::array();
    for (const auto& [id, p] : participants_) {
        parts.push_back({{"id", id},
                         {"role", std::string(to_string(p.role))},
                         {"key_pair_id", p.credential.key_pair_id},
                         {"salt", to_hex(p.credential.salt)},
                         {"pin_digest", to_hex(p.credential.pin_digest)},
                         {"identity_proof_digest", to_hex(p.credential.identity_proof_digest)},
                         {"revoked", p.credential.revoked},
                         {"hospitals", aff_.hospitals_of(id)}});
    }
    j["participants"] = parts;
    j["keys"] = key_secrets_;
    j["key_owner"] = key_owner_;
    json rules = json::array();
    const auto standard = AccessPolicy::standard().rules().size();
    for (std::size_t i = standard; i < policy_.rules().size(); ++i)
        rules.push_back(rule_to_json(policy_.rules()[i]));
    j["extra_rules"] = rules;
    json ch = json::array();
    for (const auto& [name, c] : chains_)
        ch.push_back(name);
    j["channels"] = ch;
    const auto path = *opt_.state_dir / "registry.json";
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << j.dump(2) << '\n';
        if (!out)
            throw StateError("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void Network::load_registry_locked() {
    const auto path = *opt_.state_dir / "registry.json";
    std::ifstream in(path);
    json j;
    try {
        j = json::parse(in);
        nonce_ = j.at("nonce").get<std::uint64_t>();
        for (const auto& pj : j.at("participants")) {
            Participant p;
            p.id = pj.at("id").get<std::string>();
            p.role = parse_role(pj.at("role").get<std::string>());
            p.credential.key_pair_id = pj.at("key_pair_id").get<std::string>();
            p.credential.salt = hash_from_json(pj.at("salt"));
            p.credential.pin_digest = hash_from_json(pj.at("pin_digest"));
            p.credential.identity_proof_digest = hash_from_json(pj.at("identity_proof_digest"));
            p.credential.revoked = pj.at("revoked").get<bool>();
            for (const auto& h : pj.at("hospitals"))
                aff_.add(p.id, h.get<std::string>());
            participants_[p.id] = p;
        }
        key_secrets_ = j.at("keys").get<std::map<std::string, std::string>>();
        key_owner_ = j.at("key_owner").get<std::map<std::string, std::string>>();
        if (!j.at("ca").is_null()) {
            ca_id_ = j.at("ca").get<std::string>();
            ca_keys_.key_pair_id = j.at("ca_key_pair_id").get<std::string>();
            ca_keys_.secret = key_secrets_.at(ca_keys_.key_pair_id);
        }
        for (const auto& r : j.at("extra_rules"))
            policy_.add(rule_from_json(r));
        for (const auto& c : j.at("channels")) {
            const auto name = c.get<std::string>();
            chains_.emplace(name, Chain::open(*opt_.state_dir / "ledger" / (name + ".blocks"), name,
                                              opt_.sealing_batch, opt_.clock));
        }
    } catch (const json::exception& e) {
        throw LoadError("cannot read " + path.string() + ": " + e.what());
    } catch (const std::out_of_range& e) {
        throw LoadError("cannot read " + path.string() + ": missing CA key");
    }
}

} // namespace dmchain::ledger
