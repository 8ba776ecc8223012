#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stablemil/embedding.hpp"
#include "stablemil/pr_curve.hpp"
#include "stablemil/shift_bench.hpp"
#include "stablemil/stats.hpp"

namespace stablemil {

enum class Method { kStableMil, kBaseOnly, kAllInstanceEmbedding };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

enum class BaseKind { kMifv, kOracle };

struct PipelineConfig {
  BaseKind base = BaseKind::kMifv;
  MifvParams mifv;
  GridSearchConfig final_grid;
  std::size_t local_scale_k = 7;
  /// Use only positive-bag instances as local-scaling references.
  bool positive_references_only = false;
  /// Replaces local scaling with one global bandwidth.
  std::optional<double> global_lambda;
  /// Skips the quartile procedure.
  std::optional<double> fixed_tau;
  SelectionOptions selection;

  std::string to_text() const;
};

struct MethodResult {
  Method method = Method::kStableMil;
  double accuracy = 0.0;
  std::size_t pool_size = 0;
  double tau = 0.0;
  bool fallback = false;
  double pool_precision = 0.0;  // only when candidate truths are known
  double pool_recall = 0.0;
  double seconds = 0.0;
};

/// Everything the StableMIL pipeline produces for one train/test pair.
struct PipelineArtifacts {
  BagClassifier base;
  ThresholdResult threshold;
  StablePool pool;
  FinalModel model;
  std::vector<int> test_predictions;
};

/// Trains the base classifier (unless one is supplied), picks tau, learns the
/// pool, embeds, trains the final SVM and scores the test set.
MethodResult run_stablemil(const MILDataset& train, const MILDataset& test, const PipelineConfig& config,
                           std::uint64_t seed, PipelineArtifacts* artifacts = nullptr,
                           const BagClassifier* base = nullptr);

/// base_only: the base classifier on the test bags. all_instance_embedding:
/// the embedding pipeline with every positive-bag instance as the pool.
MethodResult run_baseline(Method method, const MILDataset& train, const MILDataset& test,
                          const PipelineConfig& config, std::uint64_t seed, const BagClassifier* base = nullptr);

BagClassifier train_base(const MILDataset& train, const PipelineConfig& config, std::uint64_t seed);
double accuracy(const std::vector<int>& predicted, const MILDataset& test);

struct ExperimentConfig {
  std::vector<Method> methods{Method::kStableMil, Method::kBaseOnly, Method::kAllInstanceEmbedding};
  ShiftConfig data = pinned_setting(1);
  /// Biased sampling with a drawn from the config's a_range; false splits
  /// i.i.d. (a = 0.5).
  bool shift = true;
  std::size_t repetitions = 30;
  std::uint64_t seed = 0;
  PipelineConfig pipeline;

  std::string to_text() const;
  std::string hash() const;
};

struct RepetitionResult {
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double a_used = 0.0;
  std::size_t train_bags = 0;
  std::size_t test_bags = 0;
  std::vector<MethodResult> methods;
  /// Pool learned by the StableMIL run (empty if the method was not run).
  StablePool pool;
};

struct RunReport {
  std::string config_hash;
  std::vector<Method> methods;
  std::vector<RepetitionResult> repetitions;

  std::vector<double> accuracies(Method method) const;
};

/// Independent repetitions, run on up to `jobs` workers. Each repetition is a
/// pure function of (config, repetition index), so the report does not depend
/// on `jobs`.
RunReport run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

struct SummaryRow {
  Method method = Method::kStableMil;
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct Comparison {
  Method first = Method::kStableMil;
  Method second = Method::kBaseOnly;
  TTestResult paired_t;
  RankSumResult rank_sum;
};

std::vector<SummaryRow> summarize(const RunReport& report);
std::vector<Comparison> compare_to(const RunReport& report, Method reference);

/// report.csv (per repetition and method), summary.csv, report.txt, pool.json
/// and timing.csv. Everything except timing.csv is byte-reproducible.
void write_report(const RunReport& report, const ExperimentConfig& config, const std::filesystem::path& out_dir);

std::string report_csv(const RunReport& report);
std::string summary_csv(const RunReport& report);
std::string report_text(const RunReport& report, const ExperimentConfig& config);
std::string pools_json(const RunReport& report);

}  // namespace stablemil
