#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "microevent/diagnostics.hpp"
#include "microevent/features.hpp"
#include "microevent/learners.hpp"
#include "microevent/sentiment.hpp"
#include "microevent/stats.hpp"
#include "microevent/synthlab.hpp"
#include "microevent/textprep.hpp"
#include "microevent/topics.hpp"
#include "microevent/tuning.hpp"

namespace microevent {

struct TextParams {
  Stopwords stopwords = default_stopwords();
  std::size_t min_df = 5;
  double max_df_fraction = 0.5;
  std::size_t collocation_min_count = 20;
  double collocation_threshold = 10.0;
};

struct TopicParams {
  std::vector<int> k_grid{6, 10, 14, 18, 22, 26, 30};
  std::optional<int> fixed_k;  // skips the coherence search
  std::optional<double> alpha;
  double beta = 0.01;
  int burn_in = 200;
  int total_iterations = 500;
  int n_seeds = 3;
  std::size_t top_n = 10;
  std::size_t window = 110;
  int fold_in_sweeps = 20;
  std::size_t max_train_docs = 0;  // 0: every train message
};

struct ModelParams {
  std::vector<std::string> estimators{"LR", "RF", "GBDT"};
  // Per estimator; default_spec otherwise. LR keeps separated fits by default.
  std::map<std::string, EstimatorSpec> base{{"LR", LogisticSpec{100, 1e-8, true}}};
  std::map<std::string, ParamGrid> grids;     // empty grid: no search
  int n_folds = 2;
  double rfe_step_lr = 1.0;
  double rfe_step_trees = 0.1;
  int n_permutations = 1000;
  double alpha = 0.05;
  int importance_repeats = 10;
};

struct PipelineParams {
  TextParams text;
  TopicParams topics;
  ModelParams models;
  SentimentLexicon lexicon = SentimentLexicon::builtin();
  std::uint64_t seed = 1;
  int jobs = 1;
};

// Cleaned and tokenized messages. Collocations and the vocabulary are fitted
// on the train messages (timestamp <= split instant) only.
struct TextStage {
  std::vector<std::string> ids;
  std::vector<std::string> clean;
  std::vector<std::vector<std::string>> streams;
  std::vector<bool> is_train;
  Collocations collocations;
  Vocabulary vocabulary;
  std::vector<Document> docs;
};

TextStage prepare_text(std::span<const Message> messages, Timestamp split_instant, const TextParams& params,
                       int jobs = 1);

struct TopicStage {
  std::optional<KSelection> selection;
  TopicModel model;
  CoherenceResult coherence;
  std::vector<std::size_t> train_docs;  // indices into TextStage::docs used for fitting
  std::vector<std::vector<double>> theta;  // per message
};

TopicStage fit_topics(const TextStage& text, const TopicParams& params, std::uint64_t seed, int jobs = 1);

// Topic mixture followed by the four sentiment components, keyed by message id.
std::unordered_map<std::string, std::vector<double>> message_vectors(const TextStage& text, const TopicStage& topics,
                                                                     const SentimentLexicon& lexicon, int jobs = 1);

struct EstimatorOutcome {
  std::string estimator;
  bool failed = false;
  std::string error;
  std::string failed_stage;
  std::vector<std::string> dropped_constant;
  SelectionResult selection;
  std::optional<GridResult> grid;
  std::map<std::string, std::string> tuned_params;
  std::optional<FittedModel> model;
  std::vector<double> test_scores;
  MetricReport test_metrics;
  PermutationResult permutation;
  std::optional<LrDiagnostics> diagnostics;
  std::string diagnostics_error;
  std::vector<std::string> warnings;
  std::optional<PermutationImportance> importance;
};

struct PreparedSplit {
  FeatureMatrix train;
  FeatureMatrix test;
  std::vector<std::string> dropped_constant;
  std::vector<std::string> dropped_aliased;  // LR only
};

// Capping (LR only) and standardization fitted on the train rows; for LR,
// columns aliased with the intercept and earlier columns are then dropped.
PreparedSplit preprocess_for(const std::string& name, const FeatureMatrix& features);

// RFECV on a time-series split, grid search when a grid is configured, a final
// fit on all train rows and the test scores. Errors mark the outcome failed.
EstimatorOutcome train_estimator(const std::string& name, const FeatureMatrix& features, const ModelParams& params,
                                 std::uint64_t seed, int jobs = 1);

// Test metrics and the permutation test on the frozen test scores.
void evaluate_estimator(EstimatorOutcome& outcome, const Eigen::VectorXd& y_test, const ModelParams& params,
                        std::uint64_t seed, int jobs = 1);

// LR diagnostics on the preprocessed train rows and permutation importance
// on the test rows.
void diagnose_estimator(EstimatorOutcome& outcome, const FeatureMatrix& features, const ModelParams& params,
                        std::uint64_t seed);

// train_estimator, evaluate_estimator and diagnose_estimator in turn.
EstimatorOutcome run_estimator(const std::string& name, const FeatureMatrix& features, const ModelParams& params,
                               std::uint64_t seed, int jobs = 1);

// Cliff's delta of every column between event and control train rows, with
// intervals corrected for the number of columns.
std::vector<EffectSize> effect_sizes(const FeatureMatrix& train, double alpha = 0.05);

struct ModelStage {
  std::vector<EstimatorOutcome> outcomes;
  HolmResult holm;  // over the permutation p-values of the estimators that ran
  std::vector<EffectSize> effects;
};

ModelStage run_models(const FeatureMatrix& features, const ModelParams& params, std::uint64_t seed, int jobs = 1);

double pr_auc_mean_metric(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);

// Topic stage, features and estimators on one synthetic bag.
CellEvaluator make_cell_evaluator(const PipelineParams& params);

}  // namespace microevent
