#include "dmchain/risk.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>

#include "dmchain/error.hpp"

namespace dmchain::risk {

std::string_view to_string(GlycemicStatus s) noexcept {
    switch (s) {
    case GlycemicStatus::NonDiabetic: return "NonDiabetic";
    case GlycemicStatus::PreDiabetic: return "PreDiabetic";
    case GlycemicStatus::Diabetic: return "Diabetic";
    }
    return "?";
}

GlycemicStatus classify_glucose(double fpg) {
    if (!std::isfinite(fpg) || fpg <= 0.0)
        throw DomainError("fasting plasma glucose must be a positive finite value");
    if (fpg < thresholds::kPreDiabeticFpg)
        return GlycemicStatus::NonDiabetic;
    if (fpg <= thresholds::kDiabeticFpgAbove)
        return GlycemicStatus::PreDiabetic;
    return GlycemicStatus::Diabetic;
}

namespace {

void require_quantity(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
        throw DomainError(std::string(name) + " must be a non-negative finite value");
}

void require_score(const std::optional<double>& v, const char* name) {
    if (v)
        require_quantity(*v, name);
}

} // namespace

void validate(const RiskFactorProfile& p) {
    require_quantity(p.fasting_glucose, "fasting_glucose");
    require_quantity(p.systolic_bp, "systolic_bp");
    require_quantity(p.diastolic_bp, "diastolic_bp");
    require_quantity(p.bmi, "bmi");
    require_quantity(p.serum_uric_acid, "serum_uric_acid");
    require_quantity(p.sleep_hours, "sleep_hours");
    require_quantity(p.exercise_sessions_per_week, "exercise_sessions_per_week");
    require_quantity(p.exercise_minutes_per_session, "exercise_minutes_per_session");
    require_score(p.depression.bdi, "bdi");
    require_score(p.depression.cesd, "cesd");
    require_score(p.depression.sds, "sds");
    require_quantity(p.self_reported.age_years, "age");
    if (p.sleep_hours > 24.0)
        throw DomainError("sleep_hours must not exceed 24");
}

RiskFlags assess_risk_flags(const RiskFactorProfile& p) {
    using namespace thresholds;
    RiskFlags f;
    f.hypertensive = p.systolic_bp >= kSystolic && p.diastolic_bp >= kDiastolic;
    f.obese = p.bmi >= kObeseBmi;
    f.hyperuricemic = p.serum_uric_acid > kUricAcidAbove;
    f.abnormal_sleep = p.sleep_hours < kSleepMin || p.sleep_hours > kSleepMax;
    const auto& d = p.depression;
    f.depressed = (d.bdi && *d.bdi >= kBdi) || (d.cesd && *d.cesd >= kCesd) ||
                  (d.sds && *d.sds > kSdsAbove);
    const bool active = p.exercise_sessions_per_week >= kActiveSessions &&
                        p.exercise_minutes_per_session >= kActiveMinutes;
    f.physically_inactive = !active;
    return f;
}

namespace {

constexpr std::array<RiskFactor, 8> kFactors = {
    RiskFactor::Hypertension, RiskFactor::Obesity,  RiskFactor::Cholesterol,
    RiskFactor::Depression,   RiskFactor::UricAcid, RiskFactor::Sleep,
    RiskFactor::PhysicalActivity, RiskFactor::Glucose,
};

const std::vector<DeviceCatalogEntry>& catalog_rows() {
    using F = RiskFactor;
    static const std::vector<DeviceCatalogEntry> rows = {
        {F::Hypertension, "Omron Evolv (HEM-7600T-E)",
         "mean difference vs mercury sphygmomanometer: -0.1 +/- 5.0 mmHg systolic, -0.2 +/- 4.1 mmHg diastolic", 136.0},
        {F::Hypertension, "Omron M3 Comfort (HEM-7134-E)",
         "mean difference vs mercury sphygmomanometer: -0.9 +/- 5.4 mmHg systolic, -0.6 +/- 4.7 mmHg diastolic", 63.16},
        {F::Hypertension, "Omron (HEM-9210T)",
         "mean difference vs mercury sphygmomanometer: -2.1 +/- 4.7 mmHg systolic, -1.2 +/- 4.1 mmHg diastolic", std::nullopt},
        {F::Hypertension, "Mobil-O-Graph",
         "mean difference vs mercury sphygmomanometer: -2.2 +/- 7.3 mmHg systolic, -0.4 +/- 6.1 mmHg diastolic", 1365.86},

        {F::Obesity, "Statistical BMI calculation",
         "quick, cost-effective, easy; not accurate for elderly, muscular and pregnant individuals", std::nullopt},
        {F::Obesity, "Skinfold calipers",
         "easy, portable, cost-effective; accuracy depends on operator skill", std::nullopt},
        {F::Obesity, "Smart weighing scales",
         "quick and easy; reliability depends on hydration state, accurate scales are costly", std::nullopt},
        {F::Obesity, "Hydrodensitometry",
         "accurate and reliable; costly, unsuitable for children and elderly", std::nullopt},
        {F::Obesity, "Air displacement plethysmography",
         "quick, accurate, reliable, any age; costly", std::nullopt},
        {F::Obesity, "Dual energy x-ray absorptiometry",
         "quick, precise, reliable; costly", std::nullopt},

        {F::Cholesterol, "EasyTouch", "coefficient of variation not reported", 60.0},
        {F::Cholesterol, "BeneCheck Plus", "coefficient of variation not reported", 136.0},

        {F::UricAcid, "Smartphone as electro-chemical analyzer",
         "CV low 4.1%, mid 2.47%, high 1.87% (average)", std::nullopt},
        {F::UricAcid, "EasyTouch", "CV 27.2% (not acceptable)", 60.0},
        {F::UricAcid, "UAsure", "CV 25.9% (not acceptable)", 64.0},
        {F::UricAcid, "BeneCheck Plus", "CV 9.5% (acceptable)", 136.0},
        {F::UricAcid, "HumaSens plus", "CV 11.5% (acceptable)", 52.0},
        {F::UricAcid, "Liquid chromatography mass spectrometry", "CV 0.01-3.37% (average)", std::nullopt},

        {F::Sleep, "Polysomnography test",
         "non-invasive; sensitivity 0.957, specificity 0.532, accuracy 0.904, kappa 0.495; cost range 943-2798", 943.0},
        {F::Sleep, "OURA ring", "wearable; sensitivity 96%, specificity 48%; cost range 299-399", 299.0},
        {F::Sleep, "Fitbit Flex", "wearable; 97.46% accuracy", 100.0},
        {F::Sleep, "Fitbit Charge HR", "wearable; overestimates sleep duration", 65.39},
        {F::Sleep, "Polar A370 fitness tracker",
         "wearable; age 11: sens 0.93 spec 0.77 acc 0.91; age 17.8: sens 0.91 spec 0.83 acc 0.90", 163.0},
        {F::Sleep, "Actiwatch 2",
         "wearable; age 11: sens 0.93 spec 0.68 acc 0.90; age 17.8: sens 0.93 spec 0.58 acc 0.89", std::nullopt},
        {F::Sleep, "Fitbit Alta HR", "wearable; sens 0.96 +/- 0.02, spec 0.58 +/- 0.16, acc 0.90 +/- 0.04", 270.0},
        {F::Sleep, "Withings Pulse", "wearable; 98.1% accuracy", 100.0},
        {F::Sleep, "Misfit Shine", "wearable; 96% accuracy", 100.0},
        {F::Sleep, "Jawbone Up24", "wearable; 97.23% accuracy", 100.0},
        {F::Sleep, "EMFIT Quantified Sleep",
         "non-wearable; overestimates total sleep, underestimates wake after sleep", std::nullopt},
        {F::Sleep, "Sleep Cycle", "mobile application; not reported", 0.0},

        {F::PhysicalActivity, "Fitbit One", "waist-based; accuracy >90%", 70.0},
        {F::PhysicalActivity, "Omron HJ-321", "waist-based; accuracy >90%", 67.25},
        {F::PhysicalActivity, "Sportline 340 Strider", "waist-based; accuracy >90%", 22.0},
        {F::PhysicalActivity, "Fitbit Force", "wrist-based; accuracy <90%", std::nullopt},
        {F::PhysicalActivity, "StepWatch activity monitor",
         "ankle-based; non-running >95%, running 74.4%", std::nullopt},
        {F::PhysicalActivity, "Apple iPhone 5", "mobile phone; accuracy <90%; obsolete", std::nullopt},
        {F::PhysicalActivity, "Samsung Galaxy S4", "mobile phone; accuracy <90%", 405.0},

        {F::Glucose, "Wearable-band type visible-near infrared optical",
         "non-invasive; correlation with actual glucose 0.86", std::nullopt},
        {F::Glucose, "Triple-pole complementary split ring resonator-based microwave bio-sensor",
         "non-invasive; sensitivity 6.2 dB/(mg/ml)", std::nullopt},
        {F::Glucose, "EasyTouch", "invasive; not reported", 60.0},
        {F::Glucose, "BeneCheck Plus", "invasive; not reported", 136.0},
    };
    return rows;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

std::string_view to_string(RiskFactor f) noexcept {
    switch (f) {
    case RiskFactor::Hypertension: return "hypertension";
    case RiskFactor::Obesity: return "obesity";
    case RiskFactor::Cholesterol: return "cholesterol";
    case RiskFactor::Depression: return "depression";
    case RiskFactor::UricAcid: return "uric_acid";
    case RiskFactor::Sleep: return "sleep";
    case RiskFactor::PhysicalActivity: return "physical_activity";
    case RiskFactor::Glucose: return "glucose";
    }
    return "?";
}

RiskFactor parse_risk_factor(std::string_view name) {
    const auto key = lower(name);
    for (auto f : kFactors)
        if (to_string(f) == key)
            return f;
    throw DomainError("unknown risk factor '" + std::string(name) + "'");
}

std::span<const RiskFactor> all_risk_factors() noexcept { return kFactors; }

std::vector<DeviceCatalogEntry> device_catalog_lookup(RiskFactor f) {
    if (std::find(kFactors.begin(), kFactors.end(), f) == kFactors.end())
        throw DomainError("unknown risk factor");
    std::vector<DeviceCatalogEntry> out;
    for (const auto& row : catalog_rows())
        if (row.risk_factor == f)
            out.push_back(row);
    return out;
}

std::span<const DeviceCatalogEntry> device_catalog() noexcept { return catalog_rows(); }

void write_catalog_table(std::ostream& out, char sep) {
    out << "factor" << sep << "device" << sep << "approx_cost_usd\n";
    for (const auto& row : catalog_rows()) {
        out << to_string(row.risk_factor) << sep << row.device_name << sep;
        if (row.approx_cost_usd)
            out << *row.approx_cost_usd;
        out << '\n';
    }
}

} // namespace dmchain::risk
