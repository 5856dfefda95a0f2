#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dmchain/config.hpp"
#include "dmchain/ledger/network.hpp"
#include "dmchain/pipeline.hpp"

namespace dmchain::orchestrator {

/// Participant ids the service runs under.
inline constexpr const char* kPipelineId = "dpmt-pipeline";
inline constexpr const char* kAiServiceId = "ai-service";

struct DeployedModel {
    pipeline::PreparedModel prepared;
    std::string version;
    std::string dataset;
    Hash artifact_hash{};   ///< off-chain hash of the serialized model
    Hash deployment_tx{};
};

struct ExperimentSpec {
    std::string dataset;
    models::Algorithm algorithm = models::Algorithm::RandomForest;
    bool feature_selection = false;
    bool balancing = false;
    std::vector<std::uint64_t> seeds{0};
    eval::HyperGrid grid = eval::HyperGrid::compact();

    void validate() const; ///< throws ConfigError
};

struct ServiceKeys {
    ledger::KeyPair pipeline;
    ledger::KeyPair ai_service;
};

/// Registers the pipeline and AI-service participants (Hospital role) and
/// grants them model and prediction writes. Requires a bootstrapped CA.
ServiceKeys register_service(ledger::Network& net);

struct DpmtOutcome {
    std::shared_ptr<const DeployedModel> deployed;
    pipeline::PipelineResult result;
};

struct DpResult {
    int predicted_class = 0;
    double score = 0.0;
    std::string model_version;
    Hash input_hash{};
    Hash request_tx{};
    Hash result_tx{};
    Hash result_payload{};
};

/// DP and DPMT bound to one ledger network. One DPMT runs at a time;
/// predictions read an immutable snapshot of the deployed model and may run
/// concurrently.
class Service {
public:
    Service(ledger::Network& net, ServiceKeys keys, pipeline::PipelineOptions defaults = {});

    /// Runs the full pipeline, logging one PipelineStage transaction per stage
    /// (artifact stored off-chain) and a ModelDeployment transaction, then
    /// swaps the deployed model. On failure a PipelineFailure transaction is
    /// recorded, the previous model stays active and the error propagates.
    DpmtOutcome run_dpmt(const Dataset& data, const std::string& dataset_name, const pipeline::PipelineOptions& opt,
                         std::uint64_t seed);

    /// Stores the raw record off-chain, records RiskFactorsForPrediction from
    /// the user, predicts with the deployed model and records PredictionResult
    /// from the AI service referencing the request. Throws WorkflowError
    /// without a deployed model, PolicyError if the user's request is denied,
    /// EncodingError/PreprocessError for a record the model cannot read (no
    /// PredictionResult is written then).
    DpResult run_dp(const std::string& record_json, const std::string& user_id, const ledger::KeyPair& user_key);

    std::shared_ptr<const DeployedModel> deployed() const;
    /// Installs a model recovered from persisted state.
    void restore(std::shared_ptr<const DeployedModel> m);

    ledger::Network& network() noexcept { return net_; }

private:
    ledger::Network& net_;
    ServiceKeys keys_;
    pipeline::PipelineOptions defaults_;
    mutable std::mutex deploy_mu_;
    std::mutex dpmt_mu_;
    std::shared_ptr<const DeployedModel> current_;
};

/// Re-checks one PredictionResult: its payload and the referenced input
/// resolve off-chain and re-running `model` on the input gives the recorded
/// class. Returns a reason on failure.
std::optional<std::string> check_prediction(const ledger::Network& net, const DeployedModel& model,
                                            const ledger::Transaction& result_tx);

/// Rebuilds a DeployedModel from a ModelDeployment transaction.
std::shared_ptr<const DeployedModel> load_deployment(const ledger::Network& net, const ledger::Transaction& deploy_tx);

struct RunRecord {
    std::string dataset;
    models::Algorithm algorithm = models::Algorithm::RandomForest;
    bool feature_selection = false;
    bool balancing = false;
    std::uint64_t seed = 0;
    eval::EvaluationReport holdout;
    double cv_mean_accuracy = 0.0;
    double cv_std_accuracy = 0.0;
    std::string best_config;
    std::vector<std::string> selected_features;
    double seconds = 0.0;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

struct Aggregate {
    std::string dataset;
    models::Algorithm algorithm = models::Algorithm::RandomForest;
    bool feature_selection = false;
    bool balancing = false;
    std::size_t runs = 0;
    MeanStd accuracy, precision_pos, precision_neg, recall_pos, recall_neg, f_measure, auc, train_seconds,
        cv_accuracy;
    double mean_tp = 0.0, mean_tn = 0.0, mean_fp = 0.0, mean_fn = 0.0;
};

struct ReportBundle {
    std::vector<RunRecord> runs;
    std::vector<Aggregate> aggregates; ///< one per executed spec, in spec order
    std::vector<std::string> notices;  ///< skipped specs
};

Aggregate aggregate(const std::vector<RunRecord>& runs);

using DatasetProvider = std::function<std::optional<Dataset>(const std::string& name)>;

/// Runs every spec over its seeds. Specs whose dataset the provider cannot
/// supply are skipped with a notice.
ReportBundle reproduce_experiment(const std::vector<ExperimentSpec>& specs, const DatasetProvider& provider,
                                  const pipeline::PipelineOptions& base = {});

/// Provider backed by the config manifest; missing files yield nullopt.
DatasetProvider manifest_provider(const config::AppConfig& cfg);

/// Machine-readable report keyed by dataset/algorithm/fs/balance/seed.
std::string bundle_to_json(const ReportBundle& b);
/// Human-readable summary table followed by per-run rows.
void write_tables(std::ostream& out, const ReportBundle& b);

} // namespace dmchain::orchestrator
