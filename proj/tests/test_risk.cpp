#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dmchain/error.hpp"
#include "dmchain/risk.hpp"

using namespace dmchain;
using namespace dmchain::risk;

namespace {

// Healthy baseline: every threshold unmet.
RiskFactorProfile healthy() {
    RiskFactorProfile p;
    p.fasting_glucose = 90;
    p.systolic_bp = 120;
    p.diastolic_bp = 75;
    p.bmi = 24;
    p.serum_uric_acid = 300;
    p.sleep_hours = 7;
    p.exercise_sessions_per_week = 3;
    p.exercise_minutes_per_session = 45;
    p.self_reported.age_years = 40;
    return p;
}

} // namespace

TEST(Glucose, Examples) {
    EXPECT_EQ(classify_glucose(95), GlycemicStatus::NonDiabetic);
    EXPECT_EQ(classify_glucose(110), GlycemicStatus::PreDiabetic);
    EXPECT_EQ(classify_glucose(126), GlycemicStatus::Diabetic);
}

TEST(Glucose, Boundaries) {
    EXPECT_EQ(classify_glucose(99.999), GlycemicStatus::NonDiabetic);
    EXPECT_EQ(classify_glucose(100), GlycemicStatus::PreDiabetic);
    EXPECT_EQ(classify_glucose(125), GlycemicStatus::PreDiabetic);
    EXPECT_EQ(classify_glucose(125.0001), GlycemicStatus::Diabetic);
}

TEST(Glucose, RejectsNonPositive) {
    EXPECT_THROW(classify_glucose(0), DomainError);
    EXPECT_THROW(classify_glucose(-4), DomainError);
    EXPECT_THROW(classify_glucose(std::nan("")), DomainError);
    EXPECT_THROW(classify_glucose(INFINITY), DomainError);
}

TEST(Glucose, MonotoneProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.5, 400);
    for (int i = 0; i < 2000; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b)
            std::swap(a, b);
        EXPECT_LE(classify_glucose(a), classify_glucose(b)) << a << " " << b;
    }
}

TEST(RiskFlags, Examples) {
    auto p = healthy();
    EXPECT_EQ(assess_risk_flags(p), RiskFlags{});

    p.systolic_bp = 145;
    p.diastolic_bp = 92;
    EXPECT_TRUE(assess_risk_flags(p).hypertensive);

    auto q = healthy();
    q.serum_uric_acid = 371;
    EXPECT_TRUE(assess_risk_flags(q).hyperuricemic);
    q.serum_uric_acid = 370;
    EXPECT_FALSE(assess_risk_flags(q).hyperuricemic);
}

TEST(RiskFlags, HypertensionNeedsBothReadings) {
    auto p = healthy();
    p.systolic_bp = 160;
    EXPECT_FALSE(assess_risk_flags(p).hypertensive);
    p = healthy();
    p.diastolic_bp = 100;
    EXPECT_FALSE(assess_risk_flags(p).hypertensive);
    p.systolic_bp = 140;
    p.diastolic_bp = 90;
    EXPECT_TRUE(assess_risk_flags(p).hypertensive);
}

TEST(RiskFlags, DepressionAnyScale) {
    auto p = healthy();
    p.depression.bdi = 10;
    p.depression.cesd = 7;
    p.depression.sds = 39;
    EXPECT_FALSE(assess_risk_flags(p).depressed);
    p.depression.sds = 40;
    EXPECT_TRUE(assess_risk_flags(p).depressed);
    p = healthy();
    p.depression.cesd = 8;
    EXPECT_TRUE(assess_risk_flags(p).depressed);
    p = healthy();
    p.depression.bdi = 11;
    EXPECT_TRUE(assess_risk_flags(p).depressed);
}

TEST(RiskFlags, SleepAndActivityBands) {
    auto p = healthy();
    p.sleep_hours = 5.9;
    EXPECT_TRUE(assess_risk_flags(p).abnormal_sleep);
    p.sleep_hours = 8.1;
    EXPECT_TRUE(assess_risk_flags(p).abnormal_sleep);
    p.sleep_hours = 6;
    EXPECT_FALSE(assess_risk_flags(p).abnormal_sleep);

    p = healthy();
    p.exercise_sessions_per_week = 6;
    p.exercise_minutes_per_session = 90;
    EXPECT_FALSE(assess_risk_flags(p).physically_inactive);
    p.exercise_sessions_per_week = 2;
    EXPECT_TRUE(assess_risk_flags(p).physically_inactive);
    p.exercise_sessions_per_week = 4;
    p.exercise_minutes_per_session = 29;
    EXPECT_TRUE(assess_risk_flags(p).physically_inactive);
}

// Crossing one threshold flips exactly that flag.
TEST(RiskFlags, SingleCrossingFlipsOneFlag) {
    struct Case {
        void (*apply)(RiskFactorProfile&);
        bool RiskFlags::*flag;
    };
    const Case cases[] = {
        {[](RiskFactorProfile& p) { p.bmi = 30; }, &RiskFlags::obese},
        {[](RiskFactorProfile& p) { p.serum_uric_acid = 400; }, &RiskFlags::hyperuricemic},
        {[](RiskFactorProfile& p) { p.sleep_hours = 4; }, &RiskFlags::abnormal_sleep},
        {[](RiskFactorProfile& p) { p.depression.bdi = 20; }, &RiskFlags::depressed},
        {[](RiskFactorProfile& p) { p.exercise_sessions_per_week = 1; }, &RiskFlags::physically_inactive},
    };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> jitter(-0.4, 0.4);
    for (int trial = 0; trial < 200; ++trial) {
        auto base = healthy();
        base.bmi += jitter(rng) * 10;
        base.sleep_hours += jitter(rng);
        base.serum_uric_acid += jitter(rng) * 100;
        const auto before = assess_risk_flags(base);
        ASSERT_EQ(before, RiskFlags{});
        for (const auto& c : cases) {
            auto p = base;
            c.apply(p);
            auto after = assess_risk_flags(p);
            EXPECT_TRUE(after.*c.flag);
            after.*c.flag = false;
            EXPECT_EQ(after, RiskFlags{});
        }
    }
}

TEST(RiskProfile, Validate) {
    auto p = healthy();
    EXPECT_NO_THROW(validate(p));
    p.sleep_hours = 25;
    EXPECT_THROW(validate(p), DomainError);
    p = healthy();
    p.bmi = -1;
    EXPECT_THROW(validate(p), DomainError);
    p = healthy();
    p.self_reported.age_years = -2;
    EXPECT_THROW(validate(p), DomainError);
    p = healthy();
    p.depression.sds = std::nan("");
    EXPECT_THROW(validate(p), DomainError);
}

TEST(Catalog, Hypertension) {
    const auto rows = device_catalog_lookup(RiskFactor::Hypertension);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].device_name, "Omron Evolv (HEM-7600T-E)");
    ASSERT_TRUE(rows[0].approx_cost_usd);
    EXPECT_DOUBLE_EQ(*rows[0].approx_cost_usd, 136.0);
}

TEST(Catalog, Cholesterol) {
    const auto rows = device_catalog_lookup(RiskFactor::Cholesterol);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_DOUBLE_EQ(*rows[0].approx_cost_usd, 60.0);
    EXPECT_DOUBLE_EQ(*rows[1].approx_cost_usd, 136.0);
}

TEST(Catalog, GlucoseIncludesEasyTouch) {
    bool found = false;
    for (const auto& r : device_catalog_lookup(RiskFactor::Glucose))
        if (r.device_name == "EasyTouch") {
            found = true;
            EXPECT_DOUBLE_EQ(*r.approx_cost_usd, 60.0);
        }
    EXPECT_TRUE(found);
}

TEST(Catalog, Invariants) {
    std::size_t total = 0;
    for (auto f : all_risk_factors()) {
        const auto rows = device_catalog_lookup(f);
        total += rows.size();
        for (const auto& r : rows) {
            EXPECT_EQ(r.risk_factor, f);
            if (r.approx_cost_usd)
                EXPECT_GE(*r.approx_cost_usd, 0.0);
        }
    }
    EXPECT_EQ(total, device_catalog().size());
    EXPECT_TRUE(device_catalog_lookup(RiskFactor::Depression).empty());
    EXPECT_THROW(device_catalog_lookup(static_cast<RiskFactor>(99)), DomainError);
}

TEST(Catalog, NamesRoundTrip) {
    for (auto f : all_risk_factors())
        EXPECT_EQ(parse_risk_factor(to_string(f)), f);
    EXPECT_EQ(parse_risk_factor("GLUCOSE"), RiskFactor::Glucose);
    EXPECT_THROW(parse_risk_factor("cholera"), DomainError);
}

TEST(Catalog, TableExport) {
    std::ostringstream out;
    write_catalog_table(out, ',');
    const auto text = out.str();
    EXPECT_EQ(text.rfind("factor,device,approx_cost_usd\n", 0), 0u);
    std::size_t lines = 0;
    for (char c : text)
        lines += c == '\n';
    EXPECT_EQ(lines, device_catalog().size() + 1);
    EXPECT_NE(text.find("hypertension,Omron (HEM-9210T),\n"), std::string::npos);
}
