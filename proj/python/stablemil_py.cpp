#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stablemil/dataset_io.hpp"
#include "stablemil/experiment.hpp"

namespace py = pybind11;
using namespace stablemil;

PYBIND11_MODULE(_stablemil, m) {
  m.doc() = "Stable-instance multi-instance learning";

  static py::exception<Error> error(m, "StableMILError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  py::enum_<InstanceRole>(m, "InstanceRole")
      .value("causal", InstanceRole::kCausal)
      .value("noisy", InstanceRole::kNoisy)
      .value("negative", InstanceRole::kNegative)
      .value("unknown", InstanceRole::kUnknown);

  py::class_<Instance>(m, "Instance")
      .def(py::init([](std::vector<double> f, InstanceRole t) { return Instance{std::move(f), t}; }),
           py::arg("features"), py::arg("truth") = InstanceRole::kUnknown)
      .def_readwrite("features", &Instance::features)
      .def_readwrite("truth", &Instance::truth)
      .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; });

  py::class_<Bag>(m, "Bag")
      .def(py::init([](std::string id, std::vector<Instance> inst, int label, std::string bg) {
             return Bag{std::move(id), std::move(inst), label, std::move(bg)};
           }),
           py::arg("id"), py::arg("instances"), py::arg("label") = 0, py::arg("background") = "")
      .def_readwrite("id", &Bag::id)
      .def_readwrite("instances", &Bag::instances)
      .def_readwrite("label", &Bag::label)
      .def_readwrite("background", &Bag::background)
      .def("__len__", &Bag::size);

  py::class_<MILDataset>(m, "MILDataset")
      .def(py::init([](std::vector<Bag> bags) { return make_dataset(std::move(bags)); }), py::arg("bags"))
      .def_readonly("bags", &MILDataset::bags)
      .def_readonly("dim", &MILDataset::dim)
      .def_readonly("meta", &MILDataset::meta)
      .def("__len__", &MILDataset::size)
      .def("positive_count", &MILDataset::positive_count)
      .def("negative_count", &MILDataset::negative_count);

  m.def("oracle_label", py::overload_cast<const Bag&>(&oracle_label));
  m.def("load_dataset", py::overload_cast<const std::filesystem::path&>(&load_dataset));
  m.def("save_dataset", py::overload_cast<const MILDataset&, const std::filesystem::path&>(&save_dataset));

  py::class_<ShiftConfig>(m, "ShiftConfig")
      .def_readwrite("bags_total", &ShiftConfig::bags_total)
      .def_readwrite("instances_per_bag", &ShiftConfig::instances_per_bag)
      .def_readwrite("a_lo", &ShiftConfig::a_lo)
      .def_readwrite("a_hi", &ShiftConfig::a_hi)
      .def_readwrite("seed", &ShiftConfig::seed)
      .def("dim", &ShiftConfig::dim)
      .def("to_text", &ShiftConfig::to_text)
      .def("hash", &ShiftConfig::hash)
      .def_static("parse", &ShiftConfig::parse);

  m.def("pinned_setting", &pinned_setting, py::arg("setting"));
  m.def("generate_population", &generate_population);
  m.def("draw_a", &draw_a, py::arg("lo"), py::arg("hi"), py::arg("seed"));
  m.def(
      "biased_split",
      [](const MILDataset& pop, double a, std::uint64_t seed) {
        auto s = biased_split(pop, a, seed);
        return py::make_tuple(std::move(s.train), std::move(s.test));
      },
      py::arg("population"), py::arg("a"), py::arg("seed"));

  py::class_<BagClassifier>(m, "BagClassifier")
      .def_static("oracle", &BagClassifier::oracle)
      .def("predict", &BagClassifier::predict)
      .def("to_json", [](const BagClassifier& c) { return to_canonical(c.to_json()); });
  m.def("train_bag_classifier", py::overload_cast<const MILDataset&, std::size_t, std::uint64_t>(&train_bag_classifier),
        py::arg("train"), py::arg("components") = 5, py::arg("seed") = 0);

  py::class_<ScoredCandidate>(m, "ScoredCandidate")
      .def_readonly("instance", &ScoredCandidate::instance)
      .def_readonly("source_bag", &ScoredCandidate::source_bag)
      .def_readonly("index", &ScoredCandidate::index)
      .def_readonly("score", &ScoredCandidate::score)
      .def_readonly("flips", &ScoredCandidate::flips);

  py::class_<StablePool>(m, "StablePool")
      .def_readonly("members", &StablePool::members)
      .def_readonly("all_scores", &StablePool::all_scores)
      .def_readonly("tau", &StablePool::tau)
      .def_readonly("fallback", &StablePool::fallback)
      .def("__len__", &StablePool::size);

  m.def("negative_bags", &negative_bags);
  m.def(
      "score_instance",
      [](const Instance& x, const std::vector<Bag>& negs, const BagClassifier& c) { return score_instance(x, negs, c); },
      py::arg("candidate"), py::arg("negatives"), py::arg("classifier"));
  m.def("select_threshold", &select_threshold, py::arg("negatives"), py::arg("classifier"), py::arg("seed"));
  m.def(
      "learn_stable_instances",
      [](const MILDataset& train, const BagClassifier& c, double tau) { return learn_stable_instances(train, c, tau); },
      py::arg("train"), py::arg("classifier"), py::arg("tau"));
  m.def(
      "treatment_effect",
      [](const Instance& x, const std::vector<Bag>& pop) {
        const auto e = brute_force_effect(x, pop);
        return py::make_tuple(e.tau, e.decomposition);
      },
      py::arg("candidate"), py::arg("population"));
  m.def(
      "average_precision", [](const StablePool& p) { return pr_curve(p.all_scores).average_precision; });

  m.def(
      "reproduce",
      [](int setting, std::size_t reps, std::uint64_t seed, bool shift, const std::string& base) {
        ExperimentConfig cfg;
        cfg.data = pinned_setting(setting);
        cfg.repetitions = reps;
        cfg.seed = seed;
        cfg.shift = shift;
        cfg.pipeline.base = base == "oracle" ? BaseKind::kOracle : BaseKind::kMifv;
        if (base != "oracle" && base != "mifv") throw Error(ErrorCode::kInvalidConfig, "unknown base '" + base + "'");
        RunReport report;
        {
          py::gil_scoped_release release;
          report = run_experiment(cfg, 1);
        }
        py::dict out;
        for (const auto& row : summarize(report))
          out[py::str(std::string(to_string(row.method)))] = py::make_tuple(row.mean, row.std, row.n);
        return py::make_tuple(out, report_csv(report));
      },
      py::arg("setting") = 1, py::arg("reps") = 30, py::arg("seed") = 0, py::arg("shift") = true,
      py::arg("base") = "mifv", "Returns ({method: (mean, std, n)}, report_csv).");
}
