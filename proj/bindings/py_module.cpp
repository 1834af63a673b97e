#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include "refhdc/cost_accounting.hpp"
#include "refhdc/hd_space.hpp"
#include "refhdc/parallel.hpp"
#include "refhdc/runner.hpp"

namespace py = pybind11;
using namespace refhdc;

namespace {

PositionSubset subset_from(const std::optional<std::vector<int>>& indices) {
  PositionSubset s;
  if (indices) s.indices = *indices;
  return s;
}

const PositionSubset* subset_ptr(const std::optional<std::vector<int>>& indices,
                                 PositionSubset& storage) {
  if (!indices) return nullptr;
  storage = subset_from(indices);
  return &storage;
}

py::dict record_to_dict(const RoundRecord& r) {
  py::dict d;
  d["round"] = r.round;
  d["stage"] = r.stage;
  d["accuracy"] = r.accuracy;
  d["uplink_bytes"] = r.uplink_bytes;
  d["cum_uplink_bytes"] = r.cum_uplink_bytes;
  d["cum_flops"] = r.cum_flops;
  d["wall_seconds"] = r.wall_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hyperdimensional-computing classifiers and a deterministic "
            "federated training simulator";

  py::class_<ProjectionBasis>(m, "ProjectionBasis")
      .def_readonly("input_dim", &ProjectionBasis::input_dim)
      .def_readonly("hd_dim", &ProjectionBasis::hd_dim)
      .def_readonly("seed", &ProjectionBasis::seed)
      .def_readonly("column_offset", &ProjectionBasis::column_offset)
      .def_property_readonly("w",
                             [](const ProjectionBasis& b) { return b.w; })
      .def_property_readonly("phi",
                             [](const ProjectionBasis& b) { return b.phi; });

  m.def("make_basis", &make_basis, py::arg("seed"), py::arg("input_dim"),
        py::arg("hd_dim"),
        "Deterministic random-projection basis: W standard-normal, phi "
        "uniform on [0, 2*pi).");
  m.def("slice_columns", &slice_columns, py::arg("basis"), py::arg("begin"),
        py::arg("end"));
  m.def(
      "encode",
      [](const ProjectionBasis& b, const Eigen::VectorXd& x) {
        return encode(b, x);
      },
      py::arg("basis"), py::arg("x"),
      "theta(x) = cos(x W + phi) * sin(x W), elementwise.");
  m.def(
      "encode_batch",
      [](const ProjectionBasis& b, const RowMatrix& x, unsigned threads) {
        return encode_batch(b, x, threads);
      },
      py::arg("basis"), py::arg("x"), py::arg("threads") = 1);
  m.def(
      "cosine_distance",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return cosine_distance(a, b);
      },
      py::arg("a"), py::arg("b"));

  py::class_<RffmBasis>(m, "RffmBasis")
      .def_readonly("input_dim", &RffmBasis::input_dim)
      .def_readonly("feature_count", &RffmBasis::feature_count)
      .def_readonly("sigma", &RffmBasis::sigma)
      .def_readonly("seed", &RffmBasis::seed);

  m.def("make_rffm", &make_rffm, py::arg("seed"), py::arg("input_dim"),
        py::arg("feature_count"), py::arg("sigma"));
  m.def(
      "rffm_transform",
      [](const RffmBasis& b, const Eigen::VectorXd& x) {
        return rffm_transform(b, x);
      },
      py::arg("basis"), py::arg("x"));
  m.def(
      "rffm_transform_batch",
      [](const RffmBasis& b, const RowMatrix& x, unsigned threads) {
        return rffm_transform_batch(b, x, threads);
      },
      py::arg("basis"), py::arg("x"), py::arg("threads") = 1);

  py::class_<PrototypeModel>(m, "PrototypeModel")
      .def(py::init([](const RowMatrix& p) { return PrototypeModel{p}; }),
           py::arg("p"))
      .def_property_readonly("p",
                             [](const PrototypeModel& m_) { return m_.p; })
      .def_property_readonly("class_count", &PrototypeModel::class_count)
      .def_property_readonly("dim", &PrototypeModel::dim);

  m.def(
      "bundle_init",
      [](const RowMatrix& encoded, const std::vector<int>& labels,
         int class_count, double alpha) {
        return bundle_init(encoded, labels, class_count, alpha);
      },
      py::arg("encoded"), py::arg("labels"), py::arg("class_count"),
      py::arg("alpha"));
  m.def(
      "predict",
      [](const PrototypeModel& model, const Eigen::VectorXd& h,
         const std::optional<std::vector<int>>& subset) {
        PositionSubset storage;
        return predict(model, h, subset_ptr(subset, storage));
      },
      py::arg("model"), py::arg("h"), py::arg("subset") = std::nullopt);
  m.def(
      "retrain_epoch",
      [](PrototypeModel& model, const RowMatrix& encoded,
         const std::vector<int>& labels, double alpha,
         const std::optional<std::vector<int>>& subset) {
        PositionSubset storage;
        return retrain_epoch(model, encoded, labels, alpha,
                             subset_ptr(subset, storage));
      },
      py::arg("model"), py::arg("encoded"), py::arg("labels"),
      py::arg("alpha"), py::arg("subset") = std::nullopt);
  m.def(
      "accuracy",
      [](const PrototypeModel& model, const RowMatrix& encoded,
         const std::vector<int>& labels,
         const std::optional<std::vector<int>>& subset, unsigned threads) {
        PositionSubset storage;
        return accuracy(model, encoded, labels, subset_ptr(subset, storage),
                        threads)
            .value;
      },
      py::arg("model"), py::arg("encoded"), py::arg("labels"),
      py::arg("subset") = std::nullopt, py::arg("threads") = 1);

  m.def(
      "partition",
      [](const std::vector<int>& labels, int class_count, int clients,
         const std::string& mode, std::uint64_t seed, int classes_per_client) {
        PartitionSpec spec;
        spec.clients = clients;
        spec.mode = mode == "non-iid" ? PartitionSpec::Mode::kNonIid
                                      : PartitionSpec::Mode::kIid;
        spec.seed = seed;
        spec.classes_per_client = classes_per_client;
        std::vector<std::vector<int>> rows;
        for (auto& shard : partition(labels, class_count, spec))
          rows.push_back(std::move(shard.rows));
        return rows;
      },
      py::arg("labels"), py::arg("class_count"), py::arg("clients"),
      py::arg("mode") = "iid", py::arg("seed") = 0,
      py::arg("classes_per_client") = 2);

  m.def(
      "aggregate",
      [](const std::vector<RowMatrix>& models,
         const std::optional<std::vector<int>>& subset) {
        std::vector<PrototypeModel> ms;
        ms.reserve(models.size());
        for (const auto& p : models) ms.push_back(PrototypeModel{p});
        PositionSubset storage;
        return aggregate(ms, subset_ptr(subset, storage));
      },
      py::arg("models"), py::arg("subset") = std::nullopt);
  m.def(
      "sample_positions",
      [](std::uint64_t master_seed, int round_index, int dim, int count) {
        return sample_positions(master_seed, round_index, dim, count).indices;
      },
      py::arg("master_seed"), py::arg("round_index"), py::arg("dim"),
      py::arg("count"));
  m.def(
      "concatenate",
      [](const std::vector<RowMatrix>& submodels) {
        std::vector<PrototypeModel> ms;
        ms.reserve(submodels.size());
        for (const auto& p : submodels) ms.push_back(PrototypeModel{p});
        return concatenate(ms);
      },
      py::arg("submodels"));

  m.def("c1_flops", &c1_flops, py::arg("n_points"), py::arg("hd_dim"),
        py::arg("input_dim"));
  m.def("c2_flops", &c2_flops, py::arg("n_points"), py::arg("hd_dim"));
  m.def("c3_flops", &c3_flops, py::arg("n_points"), py::arg("class_count"),
        py::arg("hd_dim"));
  m.def("cost_baseline", &cost_baseline, py::arg("n_points"),
        py::arg("class_count"), py::arg("hd_dim"), py::arg("input_dim"),
        py::arg("local_epochs"), py::arg("global_epochs"));
  m.def("cost_refhdc", &cost_refhdc, py::arg("n_points"),
        py::arg("class_count"), py::arg("hd_dim"), py::arg("input_dim"),
        py::arg("submodels"), py::arg("local_epochs"), py::arg("train_epochs"),
        py::arg("refine_epochs"), py::arg("refine_positions"));
  m.def(
      "rounds_to_target",
      [](const std::vector<double>& accuracies,
         double target) -> std::optional<int> {
        return rounds_to_target(accuracies, target);
      },
      py::arg("accuracies"), py::arg("target"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, unsigned threads, bool verbose) {
        RunConfig config =
            RunConfig::from_json(nlohmann::json::parse(config_json));
        config.resolve_and_validate();
        std::ostringstream log;
        const RunOutput out = run_experiment(
            config, resolve_threads(threads), verbose ? &log : nullptr);
        py::list records;
        for (const auto& r : out.records) records.append(record_to_dict(r));
        py::dict result;
        result["records"] = records;
        result["max_accuracy"] = out.max_accuracy;
        result["max_accuracy_round"] = out.max_accuracy_round;
        result["final_accuracy"] = out.final_accuracy;
        result["total_uplink_bytes"] = out.total_uplink_bytes;
        result["total_flops"] = out.total_flops;
        result["final_model"] = out.final_model.p;
        if (verbose) result["log"] = log.str();
        return result;
      },
      py::arg("config_json"), py::arg("threads") = 0,
      py::arg("verbose") = false,
      "Run one experiment from a JSON config string; returns records and "
      "summary values.");
}
