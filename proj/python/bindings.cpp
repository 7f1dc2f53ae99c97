// Python bindings for the latent-dynamics surrogate library: dataset
// generation, training, inference, evaluation, and checkpoint I/O.
//
// Conversion policy: tensors cross the boundary as flat row-major float
// lists plus explicit shape accessors on the owning object. The smoke-test
// surface stays small and dependency-free (no numpy requirement); callers
// that want arrays can wrap the lists themselves.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "lfld/dataset.hpp"
#include "lfld/errors.hpp"
#include "lfld/model.hpp"
#include "lfld/train.hpp"

namespace py = pybind11;
using namespace lfld;

namespace {

// Latent trajectory as one list per saved step, matching states.csv rows.
std::vector<std::vector<float>> states_rows(const LatentModel& m,
                                            const TrajectoryDataset& ds,
                                            std::int64_t sample) {
    if (sample < 0 || sample >= ds.n_samples())
        throw ShapeError("sample index " + std::to_string(sample) +
                         " out of range; the dataset holds " +
                         std::to_string(ds.n_samples()) + " samples");
    const TensorT<float> s =
        m.trajectory(ds.samples[std::size_t(sample)].inputs, ds.times_f64());
    const std::int64_t t = s.shape()[0], w = s.shape()[1];
    std::vector<std::vector<float>> rows(static_cast<std::size_t>(t));
    const float* p = s.data();
    for (std::int64_t i = 0; i < t; ++i)
        rows[std::size_t(i)].assign(p + i * w, p + (i + 1) * w);
    return rows;
}

std::vector<float> predict_flat(const LatentModel& m, const TrajectoryDataset& ds,
                                std::int64_t sample, std::int64_t chunks) {
    if (sample < 0 || sample >= ds.n_samples())
        throw ShapeError("sample index " + std::to_string(sample) +
                         " out of range; the dataset holds " +
                         std::to_string(ds.n_samples()) + " samples");
    if (m.config.n_inputs != ds.n_inputs)
        throw ShapeError("checkpoint expects " + std::to_string(m.config.n_inputs) +
                         " input channels, dataset has " + std::to_string(ds.n_inputs));
    return model_forward(m, ds.samples[std::size_t(sample)].inputs, ds.times_f64(),
                         ds.coords, chunks);
}

}  // namespace

PYBIND11_MODULE(_lfld, m) {
    m.doc() =
        "Latent-dynamics surrogates for parameterized PDEs: generate trajectory "
        "datasets from 1D reference solvers, train liquid/ODE latent models, run "
        "chunked inference, and evaluate predictions.";

    // Library errors surface as ValueError (caller-fixable input) or
    // RuntimeError (internal/numeric), so Python code can catch idiomatically.
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<IntegrityError>(m, "IntegrityError", PyExc_ValueError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::enum_<Variant>(m, "Variant")
        .value("ldnet", Variant::ldnet)
        .value("lldnet", Variant::lldnet)
        .value("lfldnet", Variant::lfldnet);
    m.def("variant_name", &variant_name, py::arg("variant"));
    m.def("variant_from_string", &variant_from_string, py::arg("name"));

    // ------------------------------------------------------------------ data
    py::class_<SampleRecord>(m, "SampleRecord")
        .def_readonly("inputs", &SampleRecord::inputs,
                      "flat [t_steps x n_inputs] input signals")
        .def_readonly("fields", &SampleRecord::fields,
                      "flat [t_steps x n_nodes x n_out] field values");

    py::class_<TrajectoryDataset>(m, "TrajectoryDataset")
        .def_readonly("generator", &TrajectoryDataset::generator)
        .def_readonly("seed", &TrajectoryDataset::seed)
        .def_readonly("n_dim", &TrajectoryDataset::n_dim)
        .def_readonly("n_inputs", &TrajectoryDataset::n_inputs)
        .def_readonly("n_out", &TrajectoryDataset::n_out)
        .def_readonly("coords", &TrajectoryDataset::coords)
        .def_readonly("times", &TrajectoryDataset::times)
        .def_readonly("input_names", &TrajectoryDataset::input_names)
        .def_readonly("param_names", &TrajectoryDataset::param_names)
        .def_readonly("param_values", &TrajectoryDataset::param_values)
        .def_readonly("samples", &TrajectoryDataset::samples)
        .def_property_readonly("n_nodes", &TrajectoryDataset::n_nodes)
        .def_property_readonly("t_steps", &TrajectoryDataset::t_steps)
        .def_property_readonly("n_samples", &TrajectoryDataset::n_samples)
        .def("validate", &TrajectoryDataset::validate)
        .def("__repr__", [](const TrajectoryDataset& ds) {
            return "<TrajectoryDataset " + ds.generator + ": " +
                   std::to_string(ds.n_samples()) + " samples, " +
                   std::to_string(ds.n_nodes()) + " nodes, " +
                   std::to_string(ds.t_steps()) + " steps>";
        });

    py::class_<Grid1d>(m, "Grid1d")
        .def(py::init<>())
        .def_readwrite("n_nodes", &Grid1d::n_nodes)
        .def_readwrite("length", &Grid1d::length)
        .def_readwrite("dt", &Grid1d::dt)
        .def_readwrite("t_end", &Grid1d::t_end)
        .def_readwrite("save_stride", &Grid1d::save_stride);
    m.def("monodomain_grid", &monodomain_grid);
    m.def("advdiff_grid", &advdiff_grid);

    m.def("make_monodomain_dataset", &make_monodomain_dataset, py::arg("n_samples"),
          py::arg("seed"), py::arg("grid") = monodomain_grid(),
          py::call_guard<py::gil_scoped_release>(),
          "Excitable-cable dataset over latin-hypercube (D, t_stim, k, eps0) draws.");
    m.def("make_advdiff_dataset", &make_advdiff_dataset, py::arg("n_samples"),
          py::arg("seed"), py::arg("grid") = advdiff_grid(),
          py::call_guard<py::gil_scoped_release>(),
          "Periodic advection-diffusion dataset over (a, nu, amp, width) draws.");
    m.def("make_zero_dataset", &make_zero_dataset, py::arg("n_samples"),
          py::arg("n_nodes"), py::arg("t_steps"), py::arg("seed"),
          "Constant-zero targets with sinusoidal inputs; trains to ~zero loss.");

    m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("directory"),
          "Write manifest.json plus flat f32 blobs; read_dataset is a bit-exact inverse.");
    m.def("read_dataset", &read_dataset, py::arg("directory"));

    // -------------------------------------------------------------- training
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("variant", &TrainConfig::variant)
        .def_readwrite("dyn_total", &TrainConfig::dyn_total)
        .def_readwrite("rec_layers", &TrainConfig::rec_layers)
        .def_readwrite("rec_width", &TrainConfig::rec_width)
        .def_readwrite("n_freq", &TrainConfig::n_freq)
        .def_readwrite("n_states", &TrainConfig::n_states)
        .def_readwrite("mixed_memory", &TrainConfig::mixed_memory)
        .def_readwrite("fourier_scale", &TrainConfig::fourier_scale)
        .def_readwrite("ode_substeps", &TrainConfig::ode_substeps)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("points_per_epoch", &TrainConfig::points_per_epoch)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("train_fraction", &TrainConfig::train_fraction)
        .def_readwrite("stop_at_val", &TrainConfig::stop_at_val)
        .def_readwrite("init_seed", &TrainConfig::init_seed)
        .def_readwrite("sampling_seed", &TrainConfig::sampling_seed)
        .def_readwrite("split_seed", &TrainConfig::split_seed);

    py::class_<TrainHistory>(m, "TrainHistory")
        .def_readonly("train_loss", &TrainHistory::train_loss)
        .def_readonly("val_loss", &TrainHistory::val_loss)
        .def_readonly("seconds", &TrainHistory::seconds)
        .def_readonly("best_epoch", &TrainHistory::best_epoch)
        .def_readonly("best_val", &TrainHistory::best_val)
        .def_readonly("diverged", &TrainHistory::diverged)
        .def_readonly("diverged_epoch", &TrainHistory::diverged_epoch)
        .def_property_readonly("epochs", &TrainHistory::epochs);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def_readonly("variant", &ModelConfig::variant)
        .def_readonly("n_inputs", &ModelConfig::n_inputs)
        .def_readonly("n_states", &ModelConfig::n_states)
        .def_readonly("n_dim", &ModelConfig::n_dim)
        .def_readonly("n_out", &ModelConfig::n_out)
        .def_readonly("dyn_total", &ModelConfig::dyn_total)
        .def_readonly("rec_layers", &ModelConfig::rec_layers)
        .def_readonly("rec_width", &ModelConfig::rec_width)
        .def_readonly("n_freq", &ModelConfig::n_freq)
        .def_readonly("fourier_scale", &ModelConfig::fourier_scale)
        .def_readonly("mixed_memory", &ModelConfig::mixed_memory)
        .def_readonly("ode_substeps", &ModelConfig::ode_substeps)
        .def_readonly("init_seed", &ModelConfig::init_seed);

    py::class_<LatentModel>(m, "Model")
        .def_readonly("config", &LatentModel::config)
        .def(
            "predict",
            [](const LatentModel& self, const TrajectoryDataset& ds,
               std::int64_t sample, std::int64_t chunks) {
                return predict_flat(self, ds, sample, chunks);
            },
            py::arg("dataset"), py::arg("sample") = 0, py::arg("chunks") = 1,
            py::call_guard<py::gil_scoped_release>(),
            "Full-grid prediction for one sample, flat [t_steps x n_nodes x n_out]; "
            "bitwise identical for any chunk count.")
        .def(
            "states",
            [](const LatentModel& self, const TrajectoryDataset& ds,
               std::int64_t sample) { return states_rows(self, ds, sample); },
            py::arg("dataset"), py::arg("sample") = 0,
            "Latent trajectory, one n_states row per saved step.")
        .def("parameter_counts",
             [](const LatentModel& self) {
                 const ParameterCounts c = count_model_parameters(self);
                 py::dict d;
                 d["dynamics"] = c.dynamics;
                 d["kernel"] = c.kernel;
                 d["reconstruction"] = c.reconstruction;
                 d["total"] = c.total();
                 return d;
             })
        .def("__repr__", [](const LatentModel& self) {
            return "<Model " + variant_name(self.config.variant) + ": " +
                   std::to_string(self.config.n_states) + " states, " +
                   std::to_string(count_model_parameters(self).total()) +
                   " parameters>";
        });

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("history", &TrainResult::history);

    m.def("train", &train, py::arg("dataset"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>(),
          "Train on the dataset; returns the best-validation model plus the "
          "per-epoch loss history. Deterministic for fixed seeds.");

    m.def(
        "split_dataset",
        [](std::int64_t n_samples, double train_fraction, std::uint64_t seed) {
            const SplitIndices s = split_dataset(n_samples, train_fraction, seed);
            return py::make_tuple(s.train, s.val);
        },
        py::arg("n_samples"), py::arg("train_fraction"), py::arg("seed"),
        "Seeded permutation split; returns (train_indices, val_indices).");

    m.def("save_checkpoint", &save_checkpoint, py::arg("model"), py::arg("path"),
          "Binary checkpoint; save/load round trips are bit-exact.");
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
    m.def("write_history_csv", &write_history_csv, py::arg("path"), py::arg("history"));

    // ---------------------------------------------------------------- search
    py::class_<SearchSpace>(m, "SearchSpace")
        .def(py::init<>())
        .def_readwrite("dyn_total", &SearchSpace::dyn_total)
        .def_readwrite("rec_layers", &SearchSpace::rec_layers)
        .def_readwrite("rec_width", &SearchSpace::rec_width)
        .def_readwrite("n_freq", &SearchSpace::n_freq)
        .def_readwrite("n_states", &SearchSpace::n_states)
        .def_readwrite("lr", &SearchSpace::lr);

    py::class_<TrialResult>(m, "TrialResult")
        .def_readonly("trial", &TrialResult::trial)
        .def_readonly("config", &TrialResult::config)
        .def_readonly("final_val", &TrialResult::final_val)
        .def_readonly("rejected", &TrialResult::rejected)
        .def_readonly("note", &TrialResult::note)
        .def_readonly("history", &TrialResult::history);

    m.def("random_search", &random_search, py::arg("dataset"), py::arg("base"),
          py::arg("space"), py::arg("trials"), py::arg("epochs_per_trial"),
          py::arg("seed"), py::call_guard<py::gil_scoped_release>(),
          "Seeded uniform hyperparameter search ranked by final validation loss.");

    // ------------------------------------------------------------ evaluation
    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("per_sample_mse", &EvalReport::per_sample_mse)
        .def_readonly("mean_mse", &EvalReport::mean_mse)
        .def_readonly("error_fields", &EvalReport::error_fields);

    m.def("evaluate", &evaluate, py::arg("model"), py::arg("dataset"),
          py::arg("with_error_fields") = false,
          py::call_guard<py::gil_scoped_release>(),
          "Per-sample normalized MSE over the full grid, with optional "
          "physical-unit absolute-error fields.");

    m.attr("CHECKPOINT_VERSION") = kCheckpointVersion;
    m.attr("DATASET_FORMAT_VERSION") = kDatasetFormatVersion;
}
