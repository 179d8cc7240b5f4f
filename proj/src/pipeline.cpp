#include "microevent/pipeline.hpp"

#include <algorithm>

#include "microevent/error.hpp"
#include "microevent/parallel.hpp"
#include "microevent/rng.hpp"

namespace microevent {

double pr_auc_mean_metric(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) { return pr_auc_mean(y, scores); }

TextStage prepare_text(std::span<const Message> messages, Timestamp split_instant, const TextParams& params,
                       int jobs) {
  if (messages.empty()) throw Error("prepare_text: no messages");
  TextStage t;
  const std::size_t n = messages.size();
  t.ids.resize(n);
  t.clean.resize(n);
  t.streams.resize(n);
  t.is_train.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.ids[i] = messages[i].id;
    t.is_train[i] = messages[i].timestamp <= split_instant;
  }
  parallel_for(n, jobs, [&](std::size_t i) {
    t.clean[i] = strip_markup(messages[i].body_raw);
    t.streams[i] = tokenize_normalize(t.clean[i], params.stopwords);
  });

  std::vector<std::vector<std::string>> train;
  for (std::size_t i = 0; i < n; ++i) {
    if (t.is_train[i]) train.push_back(t.streams[i]);
  }
  if (train.empty()) throw Error("prepare_text: no train messages");
  t.collocations = detect_collocations(train, params.collocation_min_count, params.collocation_threshold);
  parallel_for(n, jobs, [&](std::size_t i) { t.streams[i] = t.collocations.apply(t.streams[i]); });

  train.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (t.is_train[i]) train.push_back(t.streams[i]);
  }
  t.vocabulary = build_vocabulary(train, params.min_df, params.max_df_fraction);
  t.docs.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) { t.docs[i] = encode_ids(t.streams[i], t.vocabulary); });
  return t;
}

TopicStage fit_topics(const TextStage& text, const TopicParams& params, std::uint64_t seed, int jobs) {
  TopicStage s;
  for (std::size_t i = 0; i < text.docs.size(); ++i) {
    if (text.is_train[i]) s.train_docs.push_back(i);
  }
  if (s.train_docs.empty()) throw Error("fit_topics: no train documents");
  if (params.max_train_docs > 0 && s.train_docs.size() > params.max_train_docs) {
    Rng rng(derive_seed(seed, "lda_subsample"));
    auto pick = rng.sample_without_replacement(s.train_docs.size(), params.max_train_docs);
    std::sort(pick.begin(), pick.end());
    std::vector<std::size_t> kept;
    for (auto p : pick) kept.push_back(s.train_docs[p]);
    s.train_docs = std::move(kept);
  }
  std::vector<Document> docs;
  docs.reserve(s.train_docs.size());
  for (auto i : s.train_docs) docs.push_back(text.docs[i]);

  LdaConfig config;
  config.alpha = params.alpha;
  config.beta = params.beta;
  config.burn_in = params.burn_in;
  config.total_iterations = params.total_iterations;
  if (params.fixed_k) {
    config.K = *params.fixed_k;
  } else {
    LdaConfig base = config;
    base.seed = derive_seed(seed, "select_k");
    s.selection = select_k(docs, text.vocabulary, params.k_grid, base, params.n_seeds, params.top_n, params.window, jobs);
    config.K = s.selection->chosen_k;
  }
  config.seed = derive_seed(seed, "lda");
  s.model = train_lda(docs, text.vocabulary, config);
  s.coherence = coherence_cv(s.model, docs, params.top_n, params.window);

  s.theta.resize(text.docs.size());
  parallel_for(text.docs.size(), jobs, [&](std::size_t i) {
    s.theta[i] = infer_theta(s.model, text.docs[i], params.fold_in_sweeps, derive_seed(seed, "theta", i));
  });
  return s;
}

std::unordered_map<std::string, std::vector<double>> message_vectors(const TextStage& text, const TopicStage& topics,
                                                                     const SentimentLexicon& lexicon, int jobs) {
  std::vector<std::vector<double>> rows(text.ids.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    rows[i] = message_vector(topics.theta[i], score_sentiment(text.clean[i], lexicon));
  });
  std::unordered_map<std::string, std::vector<double>> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.emplace(text.ids[i], std::move(rows[i]));
  return out;
}

PreparedSplit preprocess_for(const std::string& name, const FeatureMatrix& features) {
  PreparedSplit p;
  p.train = features.partition(Partition::train);
  p.test = features.partition(Partition::test);
  if (name == "LR") {
    const auto capper = TukeyCapper::fit(p.train);
    p.train = capper.apply(p.train);
    p.test = capper.apply(p.test);
  }
  const auto standardizer = Standardizer::fit(p.train);
  p.dropped_constant = standardizer.dropped();
  p.train = standardizer.apply(p.train);
  p.test = standardizer.apply(p.test);
  if (name == "LR") {
    p.dropped_aliased = aliased_columns(p.train);
    if (!p.dropped_aliased.empty()) {
      std::vector<std::string> keep;
      for (const auto& c : p.train.columns)
        if (std::find(p.dropped_aliased.begin(), p.dropped_aliased.end(), c) == p.dropped_aliased.end())
          keep.push_back(c);
      p.train = p.train.select_columns(keep);
      p.test = p.test.select_columns(keep);
    }
  }
  if (p.train.cols() == 0) throw Error("no feature with nonzero variance");
  return p;
}

EstimatorOutcome train_estimator(const std::string& name, const FeatureMatrix& features, const ModelParams& params,
                                 std::uint64_t seed, int jobs) {
  EstimatorOutcome o;
  o.estimator = name;
  const bool is_lr = name == "LR";
  std::string stage = "preprocess";
  try {
    PreparedSplit split = preprocess_for(name, features);
    o.dropped_constant = split.dropped_constant;
    for (const auto& c : split.dropped_aliased) o.warnings.push_back("aliased with earlier columns, dropped: " + c);
    FeatureMatrix& train = split.train;
    FeatureMatrix& test = split.test;
    const Eigen::VectorXd y = train.label_vector();

    auto base = params.base.find(name);
    EstimatorSpec spec = with_seed(base != params.base.end() ? base->second : default_spec(name),
                                   derive_seed(seed, "estimator:" + name));
    const CvPlan plan = time_series_split(train.rows(), params.n_folds);

    stage = "rfecv";
    o.selection = rfecv(spec, train.X, y, train.columns, is_lr ? params.rfe_step_lr : params.rfe_step_trees, plan,
                        pr_auc_mean_metric, jobs);
    train = train.select_columns(o.selection.selected);
    test = test.select_columns(o.selection.selected);

    auto grid = params.grids.find(name);
    if (grid != params.grids.end() && !grid->second.empty()) {
      stage = "grid_search";
      o.grid = grid_search(spec, grid->second, train.X, y, train.columns, plan, pr_auc_mean_metric, jobs);
      spec = o.grid->best_spec;
      for (std::size_t i = 0; i < o.grid->names.size(); ++i) {
        o.tuned_params[o.grid->names[i]] = format_param(o.grid->configs[o.grid->best][i]);
      }
    }

    stage = "fit";
    o.model = fit_estimator(spec, train.X, y, train.columns, jobs);
    if (is_lr && std::get<LogisticModel>(*o.model).separated) {
      o.warnings.push_back("quasi-separation: scores use the coefficients reached at detection");
    }

    stage = "predict";
    const Eigen::VectorXd scores = predict_proba(*o.model, test.X);
    o.test_scores.assign(scores.data(), scores.data() + scores.size());
  } catch (const Error& e) {
    o.failed = true;
    o.failed_stage = stage;
    o.error = e.what();
  }
  return o;
}

void evaluate_estimator(EstimatorOutcome& o, const Eigen::VectorXd& y_test, const ModelParams& params,
                        std::uint64_t seed, int jobs) {
  if (o.failed) return;
  try {
    const Eigen::VectorXd scores = Eigen::Map<const Eigen::VectorXd>(o.test_scores.data(),
                                                                     static_cast<Eigen::Index>(o.test_scores.size()));
    if (scores.size() != y_test.size()) throw Error("score count does not match the test rows");
    o.test_metrics = evaluate_scores(y_test, scores);
    o.permutation = permutation_test(y_test, scores, pr_auc_mean_metric, params.n_permutations,
                                     derive_seed(seed, "permutation:" + o.estimator), jobs);
  } catch (const Error& e) {
    o.failed = true;
    o.failed_stage = "evaluate";
    o.error = e.what();
  }
}

void diagnose_estimator(EstimatorOutcome& o, const FeatureMatrix& features, const ModelParams& params,
                        std::uint64_t seed) {
  if (o.failed || !o.model) return;
  PreparedSplit split = preprocess_for(o.estimator, features);
  const auto& cols = model_columns(*o.model);
  const FeatureMatrix train = split.train.select_columns(cols);
  const FeatureMatrix test = split.test.select_columns(cols);
  const Eigen::VectorXd y = train.label_vector();
  if (o.estimator == "LR") {
    const auto& lr = std::get<LogisticModel>(*o.model);
    if (lr.separated) {
      o.diagnostics_error = "quasi-separation: diagnostics need a converged fit";
    } else {
      try {
        const auto null_model = fit_logistic(Eigen::MatrixXd(train.rows(), 0), y);
        o.diagnostics = lr_diagnostics(lr, null_model, train.X, y, static_cast<int>(train.cols()), params.alpha);
      } catch (const Error& e) {
        o.diagnostics_error = e.what();
      }
    }
  }
  if (params.importance_repeats > 0) {
    try {
      o.importance = permutation_importance(*o.model, test.X, test.label_vector(), pr_auc_mean_metric,
                                            params.importance_repeats, derive_seed(seed, "importance:" + o.estimator));
    } catch (const Error& e) {
      o.warnings.push_back(std::string("permutation importance failed: ") + e.what());
    }
  }
}

EstimatorOutcome run_estimator(const std::string& name, const FeatureMatrix& features, const ModelParams& params,
                               std::uint64_t seed, int jobs) {
  EstimatorOutcome o = train_estimator(name, features, params, seed, jobs);
  evaluate_estimator(o, features.partition(Partition::test).label_vector(), params, seed, jobs);
  diagnose_estimator(o, features, params, seed);
  return o;
}

std::vector<EffectSize> effect_sizes(const FeatureMatrix& train, double alpha) {
  std::vector<EffectSize> out;
  const int m = static_cast<int>(train.cols());
  for (std::size_t j = 0; j < train.cols(); ++j) {
    std::vector<double> events, controls;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      (train.labels[r] == 1 ? events : controls).push_back(train.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
    }
    if (events.empty() || controls.empty()) throw Error("effect_sizes: train rows hold a single class");
    out.push_back(cliffs_delta(events, controls, alpha, m, train.columns[j]));
  }
  return out;
}

ModelStage run_models(const FeatureMatrix& features, const ModelParams& params, std::uint64_t seed, int jobs) {
  ModelStage s;
  for (const auto& name : params.estimators) s.outcomes.push_back(run_estimator(name, features, params, seed, jobs));
  std::vector<double> p;
  for (const auto& o : s.outcomes) p.push_back(o.failed ? 1.0 : o.permutation.p_value);
  s.holm = holm_bonferroni(p, params.alpha);
  s.effects = effect_sizes(features.partition(Partition::train), params.alpha);
  return s;
}

CellEvaluator make_cell_evaluator(const PipelineParams& params) {
  return [params](const SyntheticBag& bag, std::uint64_t seed) {
    const auto text = prepare_text(bag.messages, bag.dataset.split_instant, params.text, params.jobs);
    const auto topics = fit_topics(text, params.topics, derive_seed(seed, "topics"), params.jobs);
    const auto vectors = message_vectors(text, topics, params.lexicon, params.jobs);
    const auto fm = build_feature_matrix(bag.dataset, vectors, feature_columns(topics.model.K()));
    std::vector<CellOutcome> out;
    for (const auto& name : params.models.estimators) {
      const auto o = run_estimator(name, fm, params.models, derive_seed(seed, "models"), params.jobs);
      out.push_back({name, o.test_metrics.pr_auc_mean, o.failed ? 1.0 : o.permutation.p_value, o.failed,
                     o.failed ? o.failed_stage + ": " + o.error : std::string()});
    }
    return out;
  };
}

}  // namespace microevent
