#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dmchain/dataset.hpp"

namespace dmchain::mimic {

struct PatientRow {
    std::int64_t subject_id = 0;
    std::string gender; // "M" / "F"
    std::string dob;    // YYYY-MM-DD[ hh:mm:ss]

    friend bool operator==(const PatientRow&, const PatientRow&) = default;
};

struct AdmissionRow {
    std::int64_t subject_id = 0;
    std::string admit_time; // YYYY-MM-DD[ hh:mm:ss]
    std::string ethnicity;

    friend bool operator==(const AdmissionRow&, const AdmissionRow&) = default;
};

struct DiagnosisRow {
    std::int64_t subject_id = 0;
    std::string icd9_code;

    friend bool operator==(const DiagnosisRow&, const DiagnosisRow&) = default;
};

struct IcdDictionaryRow {
    std::string icd9_code;
    std::string description;

    friend bool operator==(const IcdDictionaryRow&, const IcdDictionaryRow&) = default;
};

/// The four relational tables the cohort is joined from.
struct MimicTables {
    std::vector<PatientRow> patients;
    std::vector<AdmissionRow> admissions;
    std::vector<DiagnosisRow> diagnoses;
    std::vector<IcdDictionaryRow> icd_dictionary;

    friend bool operator==(const MimicTables&, const MimicTables&) = default;
};

/// Ethnicity values treated as missing; patients carrying them are dropped.
bool is_missing_ethnicity(std::string_view ethnicity) noexcept;
/// Diabetes mellitus family: ICD9 codes starting with "250".
bool is_diabetes_code(std::string_view icd9) noexcept;
inline constexpr std::string_view kFamilyHistoryCode = "V180";

struct BuildReport {
    std::size_t patients_seen = 0;
    std::size_t skipped_no_admission = 0;
    std::size_t removed_missing_ethnicity = 0;
    std::size_t rows = 0;
};

/// One row per patient with Ethnicity (first admission), Gender, Age in whole
/// years at first admission, and FamilyHistory (V180 present). Label positive
/// iff any diagnosis is in the 250.xx family.
Dataset build_mimic_like_dataset(const MimicTables& t, BuildReport* report = nullptr);

struct CohortOptions {
    /// Fraction of generated patients whose ethnicity is one of the missing
    /// markers. 0.155 maps 46,520 raw patients onto ~39,300 usable rows.
    double missing_ethnicity_fraction = 0.155;
    /// Fraction of patients generated without any admission row.
    double no_admission_fraction = 0.0;
    double mean_age_negative = 60.0;
    double mean_age_positive = 66.0;
    double age_sd = 15.0;
    double family_history_rate_negative = 0.01;
    double family_history_rate_positive = 0.05;
};

/// Deterministic synthetic stand-in for the credentialed tables. The label
/// count is exactly round(n * class_ratio) and exclusions are stratified by
/// class, so the built dataset's positive fraction tracks class_ratio.
MimicTables generate_synthetic_cohort(std::size_t n, double class_ratio, std::uint64_t seed,
                                      const CohortOptions& opt = {});

/// Reads PATIENTS.csv, ADMISSIONS.csv, DIAGNOSES_ICD.csv and D_ICD_DIAGNOSES.csv
/// from a directory. Columns are located by header name (case-insensitive) so
/// full exports with extra columns also load.
MimicTables load_tables(const std::filesystem::path& dir);
void save_tables(const MimicTables& t, const std::filesystem::path& dir);

/// Whole years between two dates given as YYYY-MM-DD prefixes.
int whole_years_between(std::string_view from, std::string_view to);

} // namespace dmchain::mimic
