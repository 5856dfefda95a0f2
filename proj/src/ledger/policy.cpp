#include "dmchain/ledger/policy.hpp"

namespace dmchain::ledger {

void Affiliations::add(const std::string& participant, const std::string& hospital) {
    map_[participant].insert(hospital);
}

const std::set<std::string>& Affiliations::hospitals_of(const std::string& participant) const {
    static const std::set<std::string> none;
    const auto it = map_.find(participant);
    return it == map_.end() ? none : it->second;
}

bool Affiliations::related(const std::string& a, const std::string& b) const {
    const auto& ha = hospitals_of(a);
    const auto& hb = hospitals_of(b);
    if (ha.count(b) || hb.count(a))
        return true;
    for (const auto& h : ha)
        if (hb.count(h))
            return true;
    return false;
}

bool AccessPolicy::matches(const Rule& r, const Request& q, const Affiliations& aff) const {
    if (r.asset != q.asset || r.action != q.action)
        return false;
    if (const auto* role = std::get_if<Role>(&r.principal)) {
        if (*role != q.actor_role)
            return false;
    } else if (std::get<std::string>(r.principal) != q.actor) {
        return false;
    }
    switch (r.scope) {
    case Scope::Self: return q.subject == q.actor;
    case Scope::Affiliated: return q.subject != q.actor && aff.related(q.actor, q.subject);
    case Scope::Any: return true;
    case Scope::Specific: return q.subject == r.subject;
    }
    return false;
}

Decision AccessPolicy::evaluate(const Request& q, const Affiliations& aff) const {
    bool allowed = q.action == Action::Read && q.subject == q.actor;
    for (const auto& r : rules_) {
        if (!matches(r, q, aff))
            continue;
        if (!r.allow)
            return {false, "denied by rule"};
        allowed = true;
    }
    if (!allowed)
        return {false, "no rule grants " + std::string(to_string(q.action)) + " on " +
                           std::string(to_string(q.asset)) + " for " + q.subject};
    return {true, {}};
}

AccessPolicy AccessPolicy::standard() {
    AccessPolicy p;
    auto grant = [&](Role r, AssetClass a, Action act, Scope s) { p.add(Rule{r, a, act, s, {}, true}); };
    using A = AssetClass;
    for (A a : {A::MedicalRecord, A::LabResults}) {
        grant(Role::Hospital, a, Action::Write, Scope::Affiliated);
        grant(Role::Hospital, a, Action::Read, Scope::Affiliated);
        grant(Role::AlliedHealthProfessional, a, Action::Write, Scope::Affiliated);
        grant(Role::AlliedHealthProfessional, a, Action::Read, Scope::Affiliated);
    }
    grant(Role::Hospital, A::SocialContextual, Action::Read, Scope::Affiliated);
    grant(Role::Hospital, A::RiskFactors, Action::Read, Scope::Any);
    grant(Role::Hospital, A::Prediction, Action::Read, Scope::Any);
    grant(Role::Pharmacist, A::MedicalRecord, Action::Write, Scope::Affiliated);
    grant(Role::Pharmacist, A::MedicalRecord, Action::Read, Scope::Affiliated);
    grant(Role::Patient, A::SocialContextual, Action::Write, Scope::Self);
    grant(Role::ExternalUser, A::RiskFactors, Action::Write, Scope::Self);
    grant(Role::MedicalExpert, A::ExpertFeedback, Action::Write, Scope::Any);
    grant(Role::MedicalExpert, A::RiskFactors, Action::Read, Scope::Any);
    grant(Role::MedicalExpert, A::Prediction, Action::Read, Scope::Any);
    grant(Role::CertificateAuthority, A::Registry, Action::Write, Scope::Any);
    return p;
}

} // namespace dmchain::ledger
