#include "stablemil/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stablemil/parallel.hpp"
#include "stablemil/rng.hpp"

namespace stablemil {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kStableMil: return "stablemil";
    case Method::kBaseOnly: return "base_only";
    case Method::kAllInstanceEmbedding: return "all_instance_embedding";
  }
  return "stablemil";
}

Method parse_method(std::string_view text) {
  if (text == "stablemil") return Method::kStableMil;
  if (text == "base_only") return Method::kBaseOnly;
  if (text == "all_instance_embedding") return Method::kAllInstanceEmbedding;
  throw Error(ErrorCode::kInvalidConfig, "unknown method '" + std::string(text) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string hex_hash(const std::string& text) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

std::vector<std::vector<double>> references_for(const MILDataset& train, const PipelineConfig& config) {
  if (!config.positive_references_only) return all_instances(train);
  std::vector<std::vector<double>> refs;
  for (const Bag* b : train.positives())
    for (const auto& inst : b->instances) refs.push_back(inst.features);
  return refs;
}

EmbeddingSpec spec_for(const StablePool& pool, const MILDataset& train, const PipelineConfig& config) {
  std::vector<double> lambdas;
  if (config.global_lambda)
    lambdas = {*config.global_lambda};
  else
    lambdas = local_scale(pool, references_for(train, config), config.local_scale_k);
  return make_embedding_spec(pool, std::move(lambdas));
}

double embedded_accuracy(const FinalModel& model, const MILDataset& test, std::size_t jobs,
                         std::vector<int>* predictions) {
  std::vector<int> pred(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) { pred[i] = model.predict(test.bags[i]); });
  const double acc = accuracy(pred, test);
  if (predictions) *predictions = std::move(pred);
  return acc;
}

void pool_quality(const StablePool& pool, MethodResult& result) {
  std::size_t causal_total = 0;
  for (const auto& c : pool.all_scores) {
    if (c.instance.truth == InstanceRole::kUnknown) return;
    causal_total += c.instance.truth == InstanceRole::kCausal;
  }
  std::size_t causal_members = 0;
  for (const auto& c : pool.members) causal_members += c.instance.truth == InstanceRole::kCausal;
  result.pool_precision =
      pool.members.empty() ? 0.0 : static_cast<double>(causal_members) / static_cast<double>(pool.members.size());
  result.pool_recall = causal_total ? static_cast<double>(causal_members) / static_cast<double>(causal_total) : 0.0;
}

}  // namespace

std::string PipelineConfig::to_text() const {
  std::ostringstream out;
  out << "base = " << (base == BaseKind::kMifv ? "mifv" : "oracle") << "\n";
  out << "mifv.components = " << mifv.components << "\n";
  out << "mifv.gmm_max_iter = " << mifv.gmm_max_iter << "\n";
  out << "mifv.gmm_rel_tol = " << format_double(mifv.gmm_rel_tol) << "\n";
  out << "mifv.gmm_restarts = " << mifv.gmm_restarts << "\n";
  out << "mifv.power_norm = " << mifv.norm.power_norm << "\n";
  out << "mifv.l2_norm = " << mifv.norm.l2_norm << "\n";
  out << "mifv.svm_C = " << join_doubles(mifv.svm_grid.C_values) << "\n";
  out << "mifv.svm_folds = " << mifv.svm_grid.folds << "\n";
  out << "final.svm_C = " << join_doubles(final_grid.C_values) << "\n";
  out << "final.gamma_exponents =";
  for (int k : final_grid.gamma_exponents) out << ' ' << k;
  out << "\nfinal.svm_folds = " << final_grid.folds << "\n";
  out << "local_scale_k = " << local_scale_k << "\n";
  out << "positive_references_only = " << positive_references_only << "\n";
  out << "global_lambda = " << (global_lambda ? format_double(*global_lambda) : "none") << "\n";
  out << "fixed_tau = " << (fixed_tau ? format_double(*fixed_tau) : "none") << "\n";
  out << "negative_subsample = " << selection.negative_subsample << "\n";
  out << "fallback_fraction = " << format_double(selection.fallback_fraction) << "\n";
  return out.str();
}

double accuracy(const std::vector<int>& predicted, const MILDataset& test) {
  if (predicted.size() != test.size()) throw Error(ErrorCode::kInvalidArgument, "prediction count mismatch");
  if (test.bags.empty()) throw Error(ErrorCode::kEmptyDataset, "empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == test.bags[i].label;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

BagClassifier train_base(const MILDataset& train, const PipelineConfig& config, std::uint64_t seed) {
  if (config.base == BaseKind::kOracle) return BagClassifier::oracle();
  return train_bag_classifier(train, config.mifv, seed);
}

MethodResult run_stablemil(const MILDataset& train, const MILDataset& test, const PipelineConfig& config,
                           std::uint64_t seed, PipelineArtifacts* artifacts, const BagClassifier* base) {
  const auto start = Clock::now();
  const std::size_t jobs = config.selection.jobs;
  BagClassifier owned = base ? *base : train_base(train, config, seed);

  ThresholdResult threshold;
  if (config.fixed_tau)
    threshold.tau = *config.fixed_tau;
  else
    threshold = select_threshold_detailed(negative_bags(train), owned, seed, jobs);

  StablePool pool = learn_stable_instances(train, owned, threshold.tau, config.selection);
  const auto spec = spec_for(pool, train, config);
  FinalModel model = train_embedded_classifier(train, spec, config.final_grid, substream_seed(seed, "final"), jobs);

  MethodResult result;
  result.method = Method::kStableMil;
  std::vector<int> predictions;
  result.accuracy = embedded_accuracy(model, test, jobs, &predictions);
  result.pool_size = pool.size();
  result.tau = threshold.tau;
  result.fallback = pool.fallback;
  pool_quality(pool, result);
  result.seconds = seconds_since(start);
  if (artifacts) {
    artifacts->base = std::move(owned);
    artifacts->threshold = std::move(threshold);
    artifacts->pool = std::move(pool);
    artifacts->model = std::move(model);
    artifacts->test_predictions = std::move(predictions);
  }
  return result;
}

MethodResult run_baseline(Method method, const MILDataset& train, const MILDataset& test,
                          const PipelineConfig& config, std::uint64_t seed, const BagClassifier* base) {
  const auto start = Clock::now();
  const std::size_t jobs = config.selection.jobs;
  MethodResult result;
  result.method = method;
  if (method == Method::kBaseOnly) {
    const BagClassifier owned = base ? *base : train_base(train, config, seed);
    std::vector<int> pred(test.size());
    parallel_for(test.size(), jobs, [&](std::size_t i) { pred[i] = predict_bag(owned, test.bags[i]); });
    result.accuracy = accuracy(pred, test);
  } else if (method == Method::kAllInstanceEmbedding) {
    if (train.positive_count() == 0 || train.negative_count() == 0)
      throw Error(ErrorCode::kSingleClass, "embedding baseline needs both classes");
    StablePool pool;
    for (const Bag* b : train.positives())
      for (std::size_t k = 0; k < b->size(); ++k) {
        ScoredCandidate c;
        c.instance = b->instances[k];
        c.source_bag = b->id;
        c.index = k;
        pool.members.push_back(c);
      }
    pool.all_scores = pool.members;
    const auto spec = spec_for(pool, train, config);
    const auto model = train_embedded_classifier(train, spec, config.final_grid, substream_seed(seed, "final"), jobs);
    result.accuracy = embedded_accuracy(model, test, jobs, nullptr);
    result.pool_size = pool.size();
  } else {
    return run_stablemil(train, test, config, seed, nullptr, base);
  }
  result.seconds = seconds_since(start);
  return result;
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "methods =";
  for (auto m : methods) out << ' ' << to_string(m);
  out << "\nshift = " << shift << "\nrepetitions = " << repetitions << "\nseed = " << seed << "\n";
  out << "[data]\n" << data.to_text() << "[pipeline]\n" << pipeline.to_text();
  return out.str();
}

std::string ExperimentConfig::hash() const { return hex_hash(to_text()); }

std::vector<double> RunReport::accuracies(Method method) const {
  std::vector<double> out;
  for (const auto& rep : repetitions)
    for (const auto& r : rep.methods)
      if (r.method == method) out.push_back(r.accuracy);
  return out;
}

RunReport run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  if (config.repetitions < 1) throw Error(ErrorCode::kInvalidConfig, "repetitions must be at least 1");
  if (config.methods.empty()) throw Error(ErrorCode::kInvalidConfig, "no methods selected");
  config.data.check();

  RunReport report;
  report.config_hash = config.hash();
  report.methods = config.methods;
  report.repetitions.resize(config.repetitions);

  parallel_for(config.repetitions, jobs, [&](std::size_t r) {
    RepetitionResult& rep = report.repetitions[r];
    rep.repetition = r;
    rep.seed = substream_seed(config.seed, "repetition", r);

    ShiftConfig data = config.data;
    data.seed = rep.seed;
    const auto population = generate_population(data);
    rep.a_used = config.shift ? draw_a(data.a_lo, data.a_hi, rep.seed) : 0.5;
    const auto split = biased_split(population, rep.a_used, rep.seed);
    rep.train_bags = split.train.size();
    rep.test_bags = split.test.size();

    const BagClassifier base = train_base(split.train, config.pipeline, rep.seed);
    for (Method m : config.methods) {
      if (m == Method::kStableMil) {
        PipelineArtifacts artifacts;
        rep.methods.push_back(run_stablemil(split.train, split.test, config.pipeline, rep.seed, &artifacts, &base));
        rep.pool = std::move(artifacts.pool);
      } else {
        rep.methods.push_back(run_baseline(m, split.train, split.test, config.pipeline, rep.seed, &base));
      }
    }
  });
  return report;
}

std::vector<SummaryRow> summarize(const RunReport& report) {
  if (report.repetitions.empty()) throw Error(ErrorCode::kInvalidArgument, "no repetitions to summarize");
  std::vector<SummaryRow> rows;
  for (Method m : report.methods) {
    const auto acc = report.accuracies(m);
    SummaryRow row;
    row.method = m;
    row.n = acc.size();
    row.mean = mean(acc);
    row.std = sample_std(acc);
    rows.push_back(row);
  }
  return rows;
}

std::vector<Comparison> compare_to(const RunReport& report, Method reference) {
  std::vector<Comparison> out;
  const auto ref = report.accuracies(reference);
  if (ref.size() < 2) return out;
  for (Method m : report.methods) {
    if (m == reference) continue;
    const auto other = report.accuracies(m);
    Comparison c;
    c.first = reference;
    c.second = m;
    c.paired_t = paired_t_test(ref, other);
    c.rank_sum = wilcoxon_rank_sum(ref, other);
    out.push_back(c);
  }
  return out;
}

std::string report_csv(const RunReport& report) {
  std::ostringstream out;
  out << "repetition,seed,a_used,train_bags,test_bags,method,accuracy,pool_size,tau,fallback,pool_precision,pool_recall\n";
  for (const auto& rep : report.repetitions)
    for (const auto& r : rep.methods)
      out << rep.repetition << ',' << rep.seed << ',' << format_double(rep.a_used) << ',' << rep.train_bags << ','
          << rep.test_bags << ',' << to_string(r.method) << ',' << format_double(r.accuracy) << ',' << r.pool_size
          << ',' << format_double(r.tau) << ',' << (r.fallback ? 1 : 0) << ',' << format_double(r.pool_precision)
          << ',' << format_double(r.pool_recall) << '\n';
  return out.str();
}

std::string summary_csv(const RunReport& report) {
  std::ostringstream out;
  out << "method,n,mean,std\n";
  for (const auto& row : summarize(report))
    out << to_string(row.method) << ',' << row.n << ',' << format_double(row.mean) << ',' << format_double(row.std)
        << '\n';
  return out.str();
}

std::string report_text(const RunReport& report, const ExperimentConfig& config) {
  std::ostringstream out;
  char line[200];
  out << "config hash: " << report.config_hash << "\n";
  out << "repetitions: " << report.repetitions.size() << "  root seed: " << config.seed
      << "  shift: " << (config.shift ? "biased sampling" : "none (i.i.d. split)") << "\n\n";
  out << "Testing accuracy (%, mean +- std.)\n";
  for (const auto& row : summarize(report)) {
    std::snprintf(line, sizeof(line), "  %-24s %6.1f +- %4.1f  (n=%zu)\n", std::string(to_string(row.method)).c_str(),
                  100.0 * row.mean, 100.0 * row.std, row.n);
    out << line;
  }
  const bool has_stable =
      std::find(report.methods.begin(), report.methods.end(), Method::kStableMil) != report.methods.end();
  if (has_stable) {
    const auto comparisons = compare_to(report, Method::kStableMil);
    if (!comparisons.empty()) out << "\nPaired comparisons against stablemil\n";
    for (const auto& c : comparisons) {
      std::snprintf(line, sizeof(line), "  vs %-24s diff %+6.2f pts  t=%8.3f p=%.3g  rank-sum z=%7.3f p=%.3g\n",
                    std::string(to_string(c.second)).c_str(), 100.0 * c.paired_t.mean_difference, c.paired_t.t,
                    c.paired_t.p_value, c.rank_sum.z, c.rank_sum.p_value);
      out << line;
    }
    std::vector<double> sizes;
    std::vector<double> taus;
    for (const auto& rep : report.repetitions)
      for (const auto& r : rep.methods)
        if (r.method == Method::kStableMil) {
          sizes.push_back(static_cast<double>(r.pool_size));
          taus.push_back(r.tau);
        }
    if (!sizes.empty()) {
      std::snprintf(line, sizeof(line), "\nstable pool size q: mean %.1f  tau: mean %.4f\n", mean(sizes), mean(taus));
      out << line;
    }
  }
  std::vector<double> as;
  for (const auto& rep : report.repetitions) as.push_back(rep.a_used);
  std::snprintf(line, sizeof(line), "sampling ratio a: mean %.4f\n", mean(as));
  out << line;
  return out.str();
}

std::string pools_json(const RunReport& report) {
  Json j = Json::object();
  j["config_hash"] = report.config_hash;
  Json reps = Json::array();
  for (const auto& rep : report.repetitions) {
    Json r = Json::object();
    r["repetition"] = rep.repetition;
    r["seed"] = rep.seed;
    r["pool"] = rep.pool.to_json();
    reps.push_back(std::move(r));
  }
  j["repetitions"] = std::move(reps);
  return to_canonical(j) + "\n";
}

void write_report(const RunReport& report, const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (out_dir / name).string());
    out << text;
  };
  write("report.csv", report_csv(report));
  write("summary.csv", summary_csv(report));
  write("report.txt", report_text(report, config));
  write("pool.json", pools_json(report));
  std::ostringstream timing;
  timing << "repetition,method,seconds\n";
  for (const auto& rep : report.repetitions)
    for (const auto& r : rep.methods) timing << rep.repetition << ',' << to_string(r.method) << ',' << r.seconds << '\n';
  write("timing.csv", timing.str());
}

}  // namespace stablemil
