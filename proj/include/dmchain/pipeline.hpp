#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmchain/dataset.hpp"
#include "dmchain/featsel.hpp"
#include "dmchain/preprocess.hpp"
#include "dmchain/validation.hpp"

namespace dmchain::pipeline {

struct PipelineOptions {
    models::Algorithm algorithm = models::Algorithm::RandomForest;
    bool feature_selection = false;
    bool balancing = false;
    eval::HyperGrid grid = eval::HyperGrid::compact();
    std::size_t cv_folds = 10;
    std::size_t rfecv_folds = 10;
    double train_fraction = 0.7;
    std::size_t smote_k = 5;
    Exec exec = Exec::Parallel;
};

enum class Stage { Extract, Preprocess, FeatureSelection, Split, Balance, GridSearch, FinalFit, Evaluate };
std::string_view to_string(Stage s) noexcept;

/// Called after each stage with a JSON summary of the stage's artifact.
using StageObserver = std::function<void(Stage, const std::string& artifact_json)>;

/// Everything needed to turn a raw record into a prediction.
struct PreparedModel {
    DatasetSchema schema;
    preprocess::CategoricalEncoder encoder;
    std::vector<std::string> selected_features; ///< encoded column names fed to the model
    preprocess::NormalizerParams normalizer;
    models::AlgorithmConfig config;
    models::AnyModel model;
};

struct PipelineResult {
    PreparedModel prepared;
    std::optional<featsel::SelectionResult> selection;
    eval::GridResult grid;
    eval::EvaluationReport holdout;
    std::size_t rows_raw = 0;
    std::size_t rows_clean = 0;
    std::size_t train_rows = 0;
    std::size_t train_rows_balanced = 0;
    std::size_t test_rows = 0;
    std::uint64_t train_fingerprint = 0;          ///< normalized train matrix before balancing
    std::uint64_t train_fingerprint_balanced = 0; ///< matrix handed to grid search
    double seconds = 0.0;                         ///< everything after extraction
};

/// drop missing -> encode -> optional RFECV -> stratified split -> min-max fit
/// on train -> optional SMOTE on train -> grid search CV on train -> refit the
/// best point on train -> holdout evaluation.
PipelineResult run_pipeline(const Dataset& raw, const PipelineOptions& opt, std::uint64_t seed,
                            const StageObserver& observer = {});

/// Raw feature values keyed by schema feature name; numbers for numeric
/// columns, tokens for binary and categorical ones.
using RawRecord = std::map<std::string, Cell>;

/// Parses {"Feature": value, ...}; throws EncodingError on malformed JSON.
RawRecord parse_record_json(std::string_view text);
std::string record_to_json(const RawRecord& r);

/// Model input for one record: encode, keep the selected columns, normalize.
/// Features not feeding a selected column may be absent. Throws EncodingError
/// when a needed feature is missing or malformed, PreprocessError when it is
/// a missing-value sentinel.
std::vector<double> transform_record(const PreparedModel& pm, const RawRecord& r);

struct Prediction {
    int predicted_class = 0;
    double score = 0.0;
};
Prediction predict_record(const PreparedModel& pm, const RawRecord& r);

/// Versioned JSON carrying the schema hash, encoder levels, selected
/// features, normalizer and model parameters.
std::string serialize_prepared(const PreparedModel& pm);
/// Throws LoadError on malformed input or a schema hash mismatch.
PreparedModel deserialize_prepared(std::string_view text);
/// Hex SHA-256 of the schema's canonical text.
std::string schema_hash(const DatasetSchema& s);

} // namespace dmchain::pipeline
