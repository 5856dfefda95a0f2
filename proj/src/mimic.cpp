#include "dmchain/mimic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "dmchain/error.hpp"

namespace dmchain::mimic {

namespace {

constexpr std::array<std::string_view, 3> kMissingEthnicity = {
    "UNKNOWN/NOT SPECIFIED", "PATIENT DECLINED TO ANSWER", "UNABLE TO OBTAIN"};

std::chrono::year_month_day parse_date(std::string_view s) {
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        if (s.size() < pos + len)
            throw DomainError("malformed date '" + std::string(s) + "'");
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
        if (ec != std::errc() || p != s.data() + pos + len)
            throw DomainError("malformed date '" + std::string(s) + "'");
        return v;
    };
    if (s.size() < 10 || s[4] != '-' || s[7] != '-')
        throw DomainError("malformed date '" + std::string(s) + "'");
    std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)},
                                    std::chrono::month{static_cast<unsigned>(num(5, 2))},
                                    std::chrono::day{static_cast<unsigned>(num(8, 2))}};
    if (!ymd.ok())
        throw DomainError("invalid date '" + std::string(s) + "'");
    return ymd;
}

std::string format_date(std::chrono::year_month_day d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

} // namespace

bool is_missing_ethnicity(std::string_view e) noexcept {
    return std::find(kMissingEthnicity.begin(), kMissingEthnicity.end(), e) != kMissingEthnicity.end();
}

bool is_diabetes_code(std::string_view icd9) noexcept { return icd9.starts_with("250"); }

int whole_years_between(std::string_view from, std::string_view to) {
    const auto a = parse_date(from);
    const auto b = parse_date(to);
    int years = static_cast<int>(b.year()) - static_cast<int>(a.year());
    if (std::pair{static_cast<unsigned>(b.month()), static_cast<unsigned>(b.day())} <
        std::pair{static_cast<unsigned>(a.month()), static_cast<unsigned>(a.day())})
        --years;
    return years;
}

Dataset build_mimic_like_dataset(const MimicTables& t, BuildReport* report) {
    BuildReport rep;

    std::unordered_map<std::int64_t, const AdmissionRow*> first_admission;
    for (const auto& a : t.admissions) {
        auto [it, inserted] = first_admission.try_emplace(a.subject_id, &a);
        if (!inserted && a.admit_time < it->second->admit_time)
            it->second = &a;
    }
    std::unordered_map<std::int64_t, std::pair<bool, bool>> dx; // {diabetic, family history}
    for (const auto& d : t.diagnoses) {
        auto& flags = dx[d.subject_id];
        flags.first = flags.first || is_diabetes_code(d.icd9_code);
        flags.second = flags.second || d.icd9_code == kFamilyHistoryCode;
    }

    Dataset out;
    out.schema = schemas::mimic_like();
    for (const auto& p : t.patients) {
        ++rep.patients_seen;
        auto adm = first_admission.find(p.subject_id);
        if (adm == first_admission.end()) {
            ++rep.skipped_no_admission;
            continue;
        }
        const auto& ethnicity = adm->second->ethnicity;
        if (ethnicity.empty() || is_missing_ethnicity(ethnicity)) {
            ++rep.removed_missing_ethnicity;
            continue;
        }
        const auto flags = dx.count(p.subject_id) ? dx.at(p.subject_id) : std::pair{false, false};
        Record r;
        r.values = {Cell{ethnicity}, Cell{p.gender},
                    Cell{static_cast<double>(whole_years_between(p.dob, adm->second->admit_time))},
                    Cell{std::string(flags.second ? "1" : "0")}};
        r.positive = flags.first;
        out.rows.push_back(std::move(r));
    }
    rep.rows = out.rows.size();
    if (report)
        *report = rep;
    return out;
}

MimicTables generate_synthetic_cohort(std::size_t n, double class_ratio, std::uint64_t seed,
                                      const CohortOptions& opt) {
    if (n < 10)
        throw DomainError("synthetic cohort needs at least 10 patients");
    if (!(class_ratio > 0.0 && class_ratio < 1.0))
        throw DomainError("class_ratio must lie strictly between 0 and 1");
    if (opt.missing_ethnicity_fraction < 0.0 || opt.no_admission_fraction < 0.0 ||
        opt.missing_ethnicity_fraction + opt.no_admission_fraction >= 1.0)
        throw DomainError("exclusion fractions must be non-negative and sum below 1");

    std::mt19937_64 rng(seed);
    const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * class_ratio));

    // Exact label counts, then exact per-class exclusion counts.
    enum class Fate { Keep, MissingEthnicity, NoAdmission };
    std::vector<std::pair<bool, Fate>> plan;
    plan.reserve(n);
    for (bool positive : {true, false}) {
        const std::size_t count = positive ? n_pos : n - n_pos;
        const auto missing = static_cast<std::size_t>(std::llround(count * opt.missing_ethnicity_fraction));
        const auto no_adm = static_cast<std::size_t>(std::llround(count * opt.no_admission_fraction));
        for (std::size_t i = 0; i < count; ++i) {
            Fate f = i < missing ? Fate::MissingEthnicity : (i < missing + no_adm ? Fate::NoAdmission : Fate::Keep);
            plan.emplace_back(positive, f);
        }
    }
    std::shuffle(plan.begin(), plan.end(), rng);

    static constexpr std::array<std::string_view, 5> kEthnicity = {
        "WHITE", "BLACK/AFRICAN AMERICAN", "HISPANIC OR LATINO", "ASIAN", "OTHER"};
    std::discrete_distribution<int> eth_neg({0.72, 0.09, 0.04, 0.04, 0.11});
    std::discrete_distribution<int> eth_pos({0.64, 0.16, 0.06, 0.04, 0.10});
    std::uniform_int_distribution<int> missing_pick(0, static_cast<int>(kMissingEthnicity.size()) - 1);
    std::bernoulli_distribution male(0.56);
    std::normal_distribution<double> age_noise(0.0, opt.age_sd);
    std::uniform_int_distribution<int> admit_day(0, 30000);
    std::uniform_int_distribution<int> extra_day(0, 364);
    std::bernoulli_distribution readmitted(0.2);
    std::uniform_int_distribution<int> readmit_gap(30, 2000);
    std::uniform_int_distribution<int> n_other(1, 4);

    static constexpr std::array<std::string_view, 6> kDiabetesCodes = {"25000", "25001", "25002",
                                                                       "25040", "25060", "25080"};
    static constexpr std::array<std::string_view, 10> kOtherCodes = {
        "4019", "4280", "42731", "41401", "5849", "2724", "51881", "5990", "53081", "2859"};
    std::uniform_int_distribution<std::size_t> pick_diab(0, kDiabetesCodes.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_other(0, kOtherCodes.size() - 1);

    using namespace std::chrono;
    const sys_days epoch = sys_days{year{2101} / January / 1};

    MimicTables t;
    std::set<std::string_view> used_codes;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [positive, fate] = plan[i];
        const std::int64_t sid = 10000 + static_cast<std::int64_t>(i);

        double age = (positive ? opt.mean_age_positive : opt.mean_age_negative) + age_noise(rng);
        const int whole_age = static_cast<int>(std::clamp(std::round(age), 18.0, 89.0));
        const year_month_day admit{epoch + days{admit_day(rng)}};
        year_month_day dob_anchor{admit.year() - years{whole_age}, admit.month(), admit.day()};
        if (!dob_anchor.ok())
            dob_anchor = year_month_day{dob_anchor.year(), dob_anchor.month(), day{28}};
        const year_month_day dob{sys_days{dob_anchor} - days{extra_day(rng)}};

        t.patients.push_back({sid, male(rng) ? "M" : "F", format_date(dob) + " 00:00:00"});

        const int eth = positive ? eth_pos(rng) : eth_neg(rng);
        if (fate != Fate::NoAdmission) {
            std::string ethnicity = fate == Fate::MissingEthnicity
                                        ? std::string(kMissingEthnicity[missing_pick(rng)])
                                        : std::string(kEthnicity[eth]);
            t.admissions.push_back({sid, format_date(admit) + " 08:00:00", ethnicity});
            if (readmitted(rng)) {
                const year_month_day later{sys_days{admit} + days{readmit_gap(rng)}};
                t.admissions.push_back({sid, format_date(later) + " 08:00:00", ethnicity});
            }
        }

        if (positive) {
            const auto code = kDiabetesCodes[pick_diab(rng)];
            used_codes.insert(code);
            t.diagnoses.push_back({sid, std::string(code)});
        }
        const int others = n_other(rng);
        for (int k = 0; k < others; ++k) {
            const auto code = kOtherCodes[pick_other(rng)];
            used_codes.insert(code);
            t.diagnoses.push_back({sid, std::string(code)});
        }
        std::bernoulli_distribution fh(positive ? opt.family_history_rate_positive
                                                : opt.family_history_rate_negative);
        if (fh(rng)) {
            used_codes.insert(kFamilyHistoryCode);
            t.diagnoses.push_back({sid, std::string(kFamilyHistoryCode)});
        }
    }
    for (auto code : used_codes) {
        std::string desc = code == kFamilyHistoryCode ? "Family history of diabetes mellitus"
                           : is_diabetes_code(code)   ? "Diabetes mellitus"
                                                      : "Other diagnosis";
        t.icd_dictionary.push_back({std::string(code), std::move(desc)});
    }
    return t;
}

namespace {

std::string upper(std::string s) {
    for (auto& c : s)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string trim_cell(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Rows of the requested columns (by header name) from one CSV file.
std::vector<std::vector<std::string>> read_columns(const std::filesystem::path& file,
                                                   const std::vector<std::vector<std::string>>& wanted) {
    std::ifstream in(file);
    if (!in)
        throw LoadError("cannot open '" + file.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw LoadError(file.string() + ": empty file");
    const auto header = split_csv_line(trim_cell(line));
    std::vector<std::size_t> idx;
    for (const auto& aliases : wanted) {
        std::size_t found = header.size();
        for (std::size_t j = 0; j < header.size() && found == header.size(); ++j)
            for (const auto& a : aliases)
                if (upper(trim_cell(header[j])) == a)
                    found = j;
        if (found == header.size())
            throw LoadError(file.string() + ": missing column '" + aliases.front() + "'");
        idx.push_back(found);
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim_cell(line).empty())
            continue;
        const auto cells = split_csv_line(trim_cell(line));
        std::vector<std::string> picked;
        for (auto j : idx) {
            if (j >= cells.size())
                throw LoadError(file.string() + ": row " + std::to_string(row_no) + " is short");
            picked.push_back(trim_cell(cells[j]));
        }
        rows.push_back(std::move(picked));
    }
    return rows;
}

std::int64_t parse_id(const std::string& s, const std::filesystem::path& file) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw LoadError(file.string() + ": bad SUBJECT_ID '" + s + "'");
    return v;
}

} // namespace

MimicTables load_tables(const std::filesystem::path& dir) {
    MimicTables t;
    const auto pf = dir / "PATIENTS.csv";
    for (auto& r : read_columns(pf, {{"SUBJECT_ID"}, {"GENDER"}, {"DOB"}}))
        t.patients.push_back({parse_id(r[0], pf), r[1], r[2]});
    const auto af = dir / "ADMISSIONS.csv";
    for (auto& r : read_columns(af, {{"SUBJECT_ID"}, {"ADMITTIME"}, {"ETHNICITY"}}))
        t.admissions.push_back({parse_id(r[0], af), r[1], r[2]});
    const auto df = dir / "DIAGNOSES_ICD.csv";
    for (auto& r : read_columns(df, {{"SUBJECT_ID"}, {"ICD9_CODE"}}))
        if (!r[1].empty())
            t.diagnoses.push_back({parse_id(r[0], df), r[1]});
    const auto icf = dir / "D_ICD_DIAGNOSES.csv";
    for (auto& r : read_columns(icf, {{"ICD9_CODE"}, {"SHORT_TITLE", "LONG_TITLE", "DESCRIPTION"}}))
        t.icd_dictionary.push_back({r[0], r[1]});
    return t;
}

void save_tables(const MimicTables& t, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto q = [](const std::string& s) { return "\"" + s + "\""; };
    {
        std::ofstream o(dir / "PATIENTS.csv");
        o << "SUBJECT_ID,GENDER,DOB\n";
        for (const auto& p : t.patients)
            o << p.subject_id << ',' << p.gender << ',' << p.dob << '\n';
    }
    {
        std::ofstream o(dir / "ADMISSIONS.csv");
        o << "SUBJECT_ID,ADMITTIME,ETHNICITY\n";
        for (const auto& a : t.admissions)
            o << a.subject_id << ',' << a.admit_time << ',' << q(a.ethnicity) << '\n';
    }
    {
        std::ofstream o(dir / "DIAGNOSES_ICD.csv");
        o << "SUBJECT_ID,ICD9_CODE\n";
        for (const auto& d : t.diagnoses)
            o << d.subject_id << ',' << q(d.icd9_code) << '\n';
    }
    {
        std::ofstream o(dir / "D_ICD_DIAGNOSES.csv");
        o << "ICD9_CODE,SHORT_TITLE\n";
        for (const auto& d : t.icd_dictionary)
            o << q(d.icd9_code) << ',' << q(d.description) << '\n';
    }
}

} // namespace dmchain::mimic
