#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dmchain::risk {

enum class GlycemicStatus { NonDiabetic = 0, PreDiabetic = 1, Diabetic = 2 };

std::string_view to_string(GlycemicStatus s) noexcept;

/// Fasting plasma glucose classification (mg/dl): below 100 non-diabetic,
/// 100..125 inclusive pre-diabetic, above 125 diabetic.
GlycemicStatus classify_glucose(double fpg_mg_dl);

struct DepressionScores {
    std::optional<double> bdi;
    std::optional<double> cesd;
    std::optional<double> sds;
};

enum class Gender { Female, Male, Unspecified };

struct SelfReported {
    double age_years = 0.0;
    Gender gender = Gender::Unspecified;
    std::string ethnicity;
    bool family_history = false;
    bool smoking = false;
    bool alcohol = false;
};

struct RiskFactorProfile {
    double fasting_glucose = 0.0;      // mg/dl
    double systolic_bp = 0.0;          // mmHg
    double diastolic_bp = 0.0;         // mmHg
    double bmi = 0.0;                  // kg/m^2
    double serum_uric_acid = 0.0;      // umol/l
    double sleep_hours = 0.0;          // per night
    double exercise_sessions_per_week = 0.0;
    double exercise_minutes_per_session = 0.0;
    DepressionScores depression;
    SelfReported self_reported;
};

/// Throws DomainError when a physical quantity is negative or non-finite,
/// sleep exceeds 24 h, or age is negative.
void validate(const RiskFactorProfile& p);

struct RiskFlags {
    bool hypertensive = false;
    bool obese = false;
    bool hyperuricemic = false;
    bool abnormal_sleep = false;
    bool depressed = false;
    bool physically_inactive = false;

    friend bool operator==(const RiskFlags&, const RiskFlags&) = default;
};

namespace thresholds {
inline constexpr double kPreDiabeticFpg = 100.0;
inline constexpr double kDiabeticFpgAbove = 125.0;
inline constexpr double kSystolic = 140.0;
inline constexpr double kDiastolic = 90.0;
inline constexpr double kObeseBmi = 30.0;
inline constexpr double kUricAcidAbove = 370.0;
inline constexpr double kSleepMin = 6.0;
inline constexpr double kSleepMax = 8.0;
inline constexpr double kBdi = 11.0;
inline constexpr double kCesd = 8.0;
inline constexpr double kSdsAbove = 39.0;
inline constexpr double kActiveSessions = 3.0;
inline constexpr double kActiveMinutes = 30.0;
} // namespace thresholds

/// Hypertension requires both the systolic and the diastolic threshold.
/// Activity counts as sufficient at >= 3 sessions/week of >= 30 minutes.
RiskFlags assess_risk_flags(const RiskFactorProfile& p);

enum class RiskFactor {
    Hypertension,
    Obesity,
    Cholesterol,
    Depression,
    UricAcid,
    Sleep,
    PhysicalActivity,
    Glucose,
};

std::string_view to_string(RiskFactor f) noexcept;
/// Throws DomainError for an unknown name. Accepts the names printed by
/// to_string (case-insensitive).
RiskFactor parse_risk_factor(std::string_view name);
std::span<const RiskFactor> all_risk_factors() noexcept;

struct DeviceCatalogEntry {
    RiskFactor risk_factor;
    std::string device_name;
    std::string performance_note;
    std::optional<double> approx_cost_usd;
};

/// Rows for one factor in catalog order. Depression has no device table and
/// returns an empty list.
std::vector<DeviceCatalogEntry> device_catalog_lookup(RiskFactor f);
std::span<const DeviceCatalogEntry> device_catalog() noexcept;

/// Writes "factor<sep>device<sep>cost" lines with a header row; unknown costs
/// are left empty.
void write_catalog_table(std::ostream& out, char sep = '\t');

} // namespace dmchain::risk
