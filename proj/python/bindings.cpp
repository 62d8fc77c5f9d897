#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jobrec/config.hpp"
#include "jobrec/synth.hpp"
#include "jobrec/workflow.hpp"

namespace py = pybind11;
using namespace jobrec;

namespace {

using PredictionMap = std::map<UserId, std::vector<ItemId>>;

PredictionMap to_map(const std::vector<Prediction>& preds) {
  PredictionMap out;
  for (const auto& p : preds) out[p.user] = p.items;
  return out;
}

std::vector<Prediction> from_map(const PredictionMap& m) {
  std::vector<Prediction> out;
  for (const auto& [u, items] : m) out.push_back({u, items, {}});
  return out;
}

PipelineConfig make_config(const std::map<std::string, std::string>& settings) {
  PipelineConfig cfg;
  for (const auto& [k, v] : settings) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-stage job recommendation pipeline";
  py::register_exception<Error>(m, "JobrecError", PyExc_RuntimeError);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("user_count", &Dataset::user_count)
      .def_property_readonly("item_count", &Dataset::item_count)
      .def_property_readonly("interaction_count", [](const Dataset& d) { return d.events().interactions().size(); })
      .def_property_readonly("impression_count", [](const Dataset& d) { return d.events().impressions().size(); })
      .def_property_readonly("target_users", &Dataset::target_users)
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset users=" + std::to_string(d.user_count()) + " items=" + std::to_string(d.item_count()) +
               " interactions=" + std::to_string(d.events().interactions().size()) + ">";
      });

  m.def(
      "synthesize",
      [](std::size_t users, std::size_t items, int weeks, std::uint64_t seed, double target_fraction) {
        SynthConfig c;
        c.users = users;
        c.items = items;
        c.weeks = weeks;
        c.seed = seed;
        c.target_fraction = target_fraction;
        return synthesize(c).dataset;
      },
      py::arg("users") = 200, py::arg("items") = 400, py::arg("weeks") = 12, py::arg("seed") = 1,
      py::arg("target_fraction") = 0.5);

  m.def("load_dataset", [](const std::string& dir) { return load_dataset(DatasetPaths::in_directory(dir)); },
        py::arg("directory"));
  m.def("write_dataset", [](const Dataset& d, const std::string& dir) { write_dataset(d, DatasetPaths::in_directory(dir)); },
        py::arg("dataset"), py::arg("directory"));

  m.def(
      "temporal_split",
      [](const Dataset& d, int weeks) {
        auto s = temporal_split(d, weeks);
        auto truth = build_ground_truth(s.holdout.interactions, d.target_users());
        return py::make_tuple(std::move(s.train), truth);
      },
      py::arg("dataset"), py::arg("holdout_weeks") = 1,
      "Returns (training dataset, {user: sorted held-out items}).");

  m.def("jaccard", [](std::vector<Token> a, std::vector<Token> b) {
    make_set(a);
    make_set(b);
    return jaccard(a, b);
  });

  m.def(
      "user_score",
      [](const std::vector<ItemId>& pred, std::vector<ItemId> truth, const std::string& mode) {
        make_set(truth);
        return user_score(pred, truth, parse_recall_mode(mode));
      },
      py::arg("prediction"), py::arg("truth"), py::arg("recall_mode") = "corrected");

  m.def(
      "total_score",
      [](const PredictionMap& preds, GroundTruth truth, const std::string& mode) {
        for (auto& [u, items] : truth) make_set(items);
        return total_score(from_map(preds), truth, parse_recall_mode(mode)).total;
      },
      py::arg("predictions"), py::arg("truth"), py::arg("recall_mode") = "corrected");

  m.def(
      "baseline",
      [](const Dataset& d, const std::string& kind) {
        if (kind == "recency") return to_map(baseline_recency(d, d.target_users()));
        if (kind == "popular") return to_map(baseline_popular(d, d.target_users()));
        throw Error("unknown baseline '" + kind + "'");
      },
      py::arg("dataset"), py::arg("kind") = "recency");

  m.def(
      "run_pipeline",
      [](const Dataset& d, const std::map<std::string, std::string>& settings) {
        const auto cfg = make_config(settings);
        PipelineRun run;
        {
          py::gil_scoped_release release;
          run = run_pipeline(d, cfg);
        }
        py::dict out;
        out["predictions"] = to_map(run.predictions);
        out["train_coverage"] = run.train_coverage;
        out["train_rows"] = run.train_rows;
        out["valid_rows"] = run.valid_rows;
        out["models"] = run.models.size();
        out["config_hash"] = cfg.hash();
        return out;
      },
      py::arg("dataset"), py::arg("settings") = std::map<std::string, std::string>{},
      "Trains on an internal split of `dataset` and ranks its target users' candidates. `settings` takes the "
      "config-file keys, e.g. {'num_round': '50', 'blend': '4/4'}.");

  m.def("set_quiet", &set_quiet);
}
