#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stablemil/dataset_io.hpp"
#include "stablemil/experiment.hpp"
#include "stablemil/rng.hpp"

namespace fs = std::filesystem;
using namespace stablemil;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  std::size_t jobs = 1;
};

void add_common(CLI::App* app, Common& c, bool with_config) {
  app->add_option("--seed", c.seed, "Root seed")->capture_default_str();
  if (with_config) app->add_option("--config", c.config, "Generator config file (key = value)");
  app->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  app->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

PipelineConfig pipeline_from(const std::string& base, std::size_t components, std::size_t jobs) {
  PipelineConfig p;
  if (base == "oracle")
    p.base = BaseKind::kOracle;
  else if (base != "mifv")
    throw Error(ErrorCode::kInvalidConfig, "unknown base classifier '" + base + "'");
  if (components == 0) throw Error(ErrorCode::kInvalidConfig, "components must be positive");
  p.mifv.components = components;
  p.selection.jobs = jobs;
  return p;
}

StablePool pool_from_file(const fs::path& path, std::size_t repetition) {
  const Json j = read_json_file(path);
  if (j.contains("repetitions")) {
    const auto& reps = j.at("repetitions");
    if (repetition >= reps.size()) throw Error(ErrorCode::kInvalidArgument, "repetition index out of range");
    return StablePool::from_json(reps.at(repetition).at("pool"));
  }
  return StablePool::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stablemil: stable-instance multi-instance learning under distribution shift"};
  app.require_subcommand(1);

  // generate
  Common gen_c;
  std::string out_train = "train.jsonl";
  std::string out_test = "test.jsonl";
  std::optional<double> gen_a;
  bool gen_no_shift = false;
  int gen_setting = 1;
  auto* gen = app.add_subcommand("generate", "Generate a population and split it into train/test");
  add_common(gen, gen_c, true);
  gen->add_option("--out-train", out_train)->capture_default_str();
  gen->add_option("--out-test", out_test)->capture_default_str();
  gen->add_option("--setting", gen_setting, "Pinned setting used when no --config is given")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  gen->add_option("--a", gen_a, "Sampling ratio (default: drawn from the config's a_range)");
  gen->add_flag("--no-shift", gen_no_shift, "i.i.d. split (a = 0.5)");

  // train
  Common train_c;
  std::string train_path;
  std::string base_kind = "mifv";
  std::size_t components = 5;
  auto* train = app.add_subcommand("train", "Train the base bag classifier");
  add_common(train, train_c, false);
  train->add_option("--train", train_path, "Training dataset")->required();
  train->add_option("--base", base_kind, "mifv or oracle")->capture_default_str();
  train->add_option("--components", components, "GMM components")->capture_default_str();

  // select
  Common sel_c;
  std::string sel_train;
  std::string sel_model;
  std::optional<double> sel_tau;
  auto* select = app.add_subcommand("select", "Pick tau and learn the stable instance pool");
  add_common(select, sel_c, false);
  select->add_option("--train", sel_train, "Training dataset")->required();
  select->add_option("--model", sel_model, "Base classifier JSON from 'train'")->required();
  select->add_option("--tau", sel_tau, "Fixed threshold instead of the quartile procedure");

  // embed
  Common emb_c;
  std::string emb_data;
  std::string emb_pool;
  std::string emb_refs;
  std::size_t emb_k = 7;
  auto* embed = app.add_subcommand("embed", "Embed bags against a stable pool");
  add_common(embed, emb_c, false);
  embed->add_option("--data", emb_data, "Dataset to embed")->required();
  embed->add_option("--pool", emb_pool, "pool.json from 'select'")->required();
  embed->add_option("--references", emb_refs, "Dataset whose instances set the local scaling")->required();
  embed->add_option("--k", emb_k, "Local scaling neighbour")->capture_default_str();

  // evaluate
  Common eval_c;
  std::string eval_train;
  std::string eval_test;
  std::string eval_base = "mifv";
  std::vector<std::string> eval_methods{"stablemil", "base_only", "all_instance_embedding"};
  auto* evaluate = app.add_subcommand("evaluate", "Run every method on one train/test pair");
  add_common(evaluate, eval_c, false);
  evaluate->add_option("--train", eval_train)->required();
  evaluate->add_option("--test", eval_test)->required();
  evaluate->add_option("--base", eval_base, "mifv or oracle")->capture_default_str();
  evaluate->add_option("--methods", eval_methods)->capture_default_str();

  // reproduce
  Common rep_c;
  int rep_setting = 1;
  std::size_t reps = 30;
  bool rep_no_shift = false;
  std::string rep_base = "mifv";
  auto* reproduce = app.add_subcommand("reproduce", "Repeated shift experiment on a pinned setting");
  add_common(reproduce, rep_c, true);
  reproduce->add_option("--setting", rep_setting)->check(CLI::IsMember({1, 2}))->capture_default_str();
  reproduce->add_option("--reps", reps, "Repetitions")->capture_default_str();
  reproduce->add_flag("--no-shift", rep_no_shift, "i.i.d. train/test split");
  reproduce->add_option("--base", rep_base, "mifv or oracle")->capture_default_str();

  // pr-curve
  Common pr_c;
  std::string pr_pool;
  std::size_t pr_rep = 0;
  auto* pr = app.add_subcommand("pr-curve", "Instance-identification PR curve from a pool file");
  add_common(pr, pr_c, false);
  pr->add_option("--pool", pr_pool, "pool.json from 'select' or 'reproduce'")->required();
  pr->add_option("--repetition", pr_rep, "Repetition to use for reproduce output")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      ShiftConfig cfg = gen_c.config.empty() ? pinned_setting(gen_setting) : ShiftConfig::load(gen_c.config);
      cfg.seed = gen_c.seed;
      cfg.check();
      const auto population = generate_population(cfg);
      double a = 0.5;
      if (gen_a)
        a = *gen_a;
      else if (!gen_no_shift)
        a = draw_a(cfg.a_lo, cfg.a_hi, gen_c.seed);
      if (a < 0.5 || a > 1.0) throw Error(ErrorCode::kInvalidConfig, "--a must lie in [0.5, 1]");
      const auto split = biased_split(population, a, gen_c.seed);
      save_dataset(split.train, out_train);
      save_dataset(split.test, out_test);
      std::printf("a = %.4f  train %zu bags  test %zu bags\n", a, split.train.size(), split.test.size());
    } else if (*train) {
      const auto data = load_dataset(train_path);
      const auto pipeline = pipeline_from(base_kind, components, train_c.jobs);
      const auto model = train_base(data, pipeline, train_c.seed);
      write_text(fs::path(train_c.out_dir) / "model.json", to_canonical(model.to_json()) + "\n");
    } else if (*select) {
      const auto data = load_dataset(sel_train);
      const auto model = BagClassifier::from_json(read_json_file(sel_model));
      double tau = 0.0;
      if (sel_tau)
        tau = *sel_tau;
      else
        tau = select_threshold_detailed(negative_bags(data), model, sel_c.seed, sel_c.jobs).tau;
      SelectionOptions opts;
      opts.jobs = sel_c.jobs;
      const auto pool = learn_stable_instances(data, model, tau, opts);
      write_text(fs::path(sel_c.out_dir) / "pool.json", to_canonical(pool.to_json()) + "\n");
      std::printf("tau = %.6g  pool size %zu%s\n", tau, pool.size(), pool.fallback ? " (fallback)" : "");
    } else if (*embed) {
      const auto data = load_dataset(emb_data);
      const auto refs = load_dataset(emb_refs);
      const auto pool = pool_from_file(emb_pool, 0);
      const auto spec = make_embedding_spec(pool, local_scale(pool, all_instances(refs), emb_k));
      const auto embedded = embed_dataset(data, spec, emb_c.jobs);
      std::ostringstream out;
      embedded.write_csv(out);
      write_text(fs::path(emb_c.out_dir) / "embedded.csv", out.str());
    } else if (*evaluate) {
      const auto tr = load_dataset(eval_train);
      const auto te = load_dataset(eval_test);
      ExperimentConfig cfg;
      cfg.methods.clear();
      for (const auto& m : eval_methods) cfg.methods.push_back(parse_method(m));
      cfg.pipeline = pipeline_from(eval_base, 5, eval_c.jobs);
      cfg.seed = eval_c.seed;
      cfg.repetitions = 1;
      const auto it = tr.meta.find("a_used");
      cfg.shift = it != tr.meta.end() && it->second != format_double(0.5);

      RunReport report;
      report.config_hash = cfg.hash();
      report.methods = cfg.methods;
      RepetitionResult rep;
      rep.seed = cfg.seed;
      rep.a_used = it != tr.meta.end() ? std::stod(it->second) : 0.5;
      rep.train_bags = tr.size();
      rep.test_bags = te.size();
      const auto base = train_base(tr, cfg.pipeline, cfg.seed);
      for (Method m : cfg.methods) {
        if (m == Method::kStableMil) {
          PipelineArtifacts artifacts;
          rep.methods.push_back(run_stablemil(tr, te, cfg.pipeline, cfg.seed, &artifacts, &base));
          rep.pool = std::move(artifacts.pool);
        } else {
          rep.methods.push_back(run_baseline(m, tr, te, cfg.pipeline, cfg.seed, &base));
        }
      }
      report.repetitions.push_back(std::move(rep));
      write_report(report, cfg, eval_c.out_dir);
      std::cout << report_text(report, cfg);
    } else if (*reproduce) {
      ExperimentConfig cfg;
      cfg.data = rep_c.config.empty() ? pinned_setting(rep_setting) : ShiftConfig::load(rep_c.config);
      cfg.shift = !rep_no_shift;
      cfg.repetitions = reps;
      cfg.seed = rep_c.seed;
      cfg.pipeline = pipeline_from(rep_base, 5, 1);
      const auto report = run_experiment(cfg, rep_c.jobs);
      write_report(report, cfg, rep_c.out_dir);
      std::cout << report_text(report, cfg);
    } else if (*pr) {
      const auto pool = pool_from_file(pr_pool, pr_rep);
      const auto curve = pr_curve(pool.all_scores);
      std::ostringstream out;
      curve.write_csv(out);
      write_text(fs::path(pr_c.out_dir) / "pr.csv", out.str());
      std::printf("average precision = %.6f over %zu candidates (%zu causal)\n", curve.average_precision,
                  pool.all_scores.size(), curve.positives);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
