#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dmchain/ledger/types.hpp"

namespace dmchain::ledger {

/// Hospitals each participant is registered with. A hospital counts as
/// affiliated with itself.
class Affiliations {
public:
    void add(const std::string& participant, const std::string& hospital);
    const std::set<std::string>& hospitals_of(const std::string& participant) const;
    /// True when one party is a hospital of the other or both share a hospital.
    bool related(const std::string& a, const std::string& b) const;

    const std::map<std::string, std::set<std::string>>& all() const noexcept { return map_; }

private:
    std::map<std::string, std::set<std::string>> map_;
};

enum class Scope {
    Self,       ///< subject == actor
    Affiliated, ///< Affiliations::related(actor, subject)
    Any,
    Specific,   ///< subject == Rule::subject
};

struct Rule {
    std::variant<Role, std::string> principal; ///< a role or one participant id
    AssetClass asset = AssetClass::MedicalRecord;
    Action action = Action::Read;
    Scope scope = Scope::Self;
    std::string subject; ///< Scope::Specific only
    bool allow = true;
};

struct Request {
    std::string actor;
    Role actor_role = Role::Patient;
    std::string subject;
    AssetClass asset = AssetClass::MedicalRecord;
    Action action = Action::Read;
};

struct Decision {
    bool allowed = false;
    std::string reason;
};

/// Deny rules override allow rules; reading one's own assets is allowed
/// unless denied; anything unmatched is denied.
class AccessPolicy {
public:
    void add(Rule r) { rules_.push_back(std::move(r)); }
    const std::vector<Rule>& rules() const noexcept { return rules_; }

    bool matches(const Rule& r, const Request& q, const Affiliations& aff) const;
    Decision evaluate(const Request& q, const Affiliations& aff) const;

    /// Grants following the participant/asset/transaction table.
    static AccessPolicy standard();

private:
    std::vector<Rule> rules_;
};

} // namespace dmchain::ledger
