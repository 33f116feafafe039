#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "crowdmeasure/commands.hpp"
#include "crowdmeasure/particles.hpp"
#include "crowdmeasure/scheme.hpp"
#include "crowdmeasure/transport.hpp"
#include "crowdmeasure/velocity.hpp"

namespace py = pybind11;
using namespace crowdmeasure;

namespace {

Point to_point(const std::vector<double>& v, int dim) {
  if (static_cast<int>(v.size()) != dim) {
    throw ValidationError("expected a point of length " + std::to_string(dim) + ", got " +
                          std::to_string(v.size()));
  }
  Point p;
  for (int l = 0; l < dim; ++l) p[l] = v[l];
  return p;
}

std::vector<double> from_point(const Point& p, int dim) { return {p.c.begin(), p.c.begin() + dim}; }

CellIndex to_index(const std::vector<std::int64_t>& v, int dim) {
  if (static_cast<int>(v.size()) != dim) throw ValidationError("index length must equal the grid dimension");
  CellIndex i;
  for (int l = 0; l < dim; ++l) i[l] = v[l];
  return i;
}

std::vector<std::int64_t> from_index(const CellIndex& i, int dim) { return {i.i.begin(), i.i.begin() + dim}; }

AtomicMeasure make_atomic(const std::vector<std::pair<std::vector<double>, double>>& atoms) {
  if (atoms.empty()) throw ValidationError("atomic measure needs at least one atom");
  const int dim = static_cast<int>(atoms.front().first.size());
  std::vector<Atom> out;
  for (const auto& [x, w] : atoms) out.push_back({to_point(x, dim), w});
  return AtomicMeasure(dim, std::move(out));
}

std::vector<std::pair<std::vector<double>, double>> atoms_of(const AtomicMeasure& mu) {
  std::vector<std::pair<std::vector<double>, double>> out;
  for (const auto& a : mu.atoms()) out.emplace_back(from_point(a.x, mu.dim()), a.w);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Probability measures on sparse grids, the explicit push-forward scheme, "
            "nonlocal interaction velocities and W1 diagnostics.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_ArithmeticError);
  py::register_exception<SizeLimitError>(m, "SizeLimitError", PyExc_ValueError);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<int, double>(), py::arg("dim"), py::arg("cell_width"))
      .def_property_readonly("dim", &GridSpec::dim)
      .def_property_readonly("cell_width", &GridSpec::cell_width)
      .def("__repr__", [](const GridSpec& s) {
        return "GridSpec(dim=" + std::to_string(s.dim()) + ", cell_width=" + format_double(s.cell_width()) + ")";
      });

  m.def("cell_of", [](const GridSpec& s, const std::vector<double>& x) {
    return from_index(cell_of(s, to_point(x, s.dim())), s.dim());
  });
  m.def("cell_center", [](const GridSpec& s, const std::vector<std::int64_t>& i) {
    return from_point(cell_center(s, to_index(i, s.dim())), s.dim());
  });

  py::class_<AtomicMeasure>(m, "AtomicMeasure")
      .def(py::init(&make_atomic), py::arg("atoms"), "List of (position, weight) pairs.")
      .def_property_readonly("dim", &AtomicMeasure::dim)
      .def_property_readonly("atoms", &atoms_of)
      .def("__len__", &AtomicMeasure::size)
      .def("to_json", &atomic_to_json)
      .def_static("from_json", &atomic_from_json);

  py::class_<GridMeasure>(m, "GridMeasure")
      .def(py::init([](const GridSpec& s, const std::vector<std::pair<std::vector<std::int64_t>, double>>& cells) {
             std::vector<GridCell> out;
             for (const auto& [i, rho] : cells) out.push_back({to_index(i, s.dim()), rho});
             return GridMeasure(s, std::move(out));
           }),
           py::arg("spec"), py::arg("cells"))
      .def_property_readonly("spec", &GridMeasure::spec)
      .def_property_readonly("cells", [](const GridMeasure& g) {
        std::vector<std::pair<std::vector<std::int64_t>, double>> out;
        for (const auto& c : g.cells()) out.emplace_back(from_index(c.index, g.spec().dim()), c.rho);
        return out;
      })
      .def("density", [](const GridMeasure& g, const std::vector<std::int64_t>& i) {
        return g.density(to_index(i, g.spec().dim()));
      })
      .def("validate", &GridMeasure::validate)
      .def("__len__", &GridMeasure::occupied);

  m.def("project_atomic", &project_atomic, py::arg("mu"), py::arg("spec"));
  m.def("total_mass", &total_mass);
  m.def("moment", py::overload_cast<const AtomicMeasure&, int>(&moment), py::arg("mu"), py::arg("p"));
  m.def("moment", py::overload_cast<const GridMeasure&, int>(&moment), py::arg("grid"), py::arg("p"));
  m.def("atomize", &atomize);
  m.def("interpolate", &interpolate, py::arg("a"), py::arg("b"), py::arg("theta"));

  py::class_<W1Result>(m, "W1Result")
      .def_readonly("distance", &W1Result::distance)
      .def_readonly("atomization_bound", &W1Result::atomization_bound)
      .def_property_readonly("lower", &W1Result::lower)
      .def_property_readonly("upper", &W1Result::upper);
  m.def("w1_1d", &w1_1d);
  m.def("w1_exact", &w1_exact, py::arg("mu"), py::arg("nu"), py::arg("max_atoms") = kDefaultMaxAtoms);
  m.def("w1_grid_atomic", &w1_grid_atomic, py::arg("grid"), py::arg("mu"),
        py::arg("max_atoms") = kDefaultMaxAtoms);
  m.def("w1_grid_1d", &w1_grid_1d);

  py::class_<VelocityModel>(m, "VelocityModel")
      .def_static("from_json", [](const std::string& text) { return build_model(parse_model_config(text)); },
                  "Build from a model block, e.g. {\"dim\":1, \"n_agents\":10, ...}.")
      .def_property_readonly("dim", &VelocityModel::dim)
      .def_property_readonly("n_agents", &VelocityModel::n_agents)
      .def_property_readonly("warnings", &VelocityModel::warnings);

  m.def("kernel_F", [](const VelocityModel& model, const std::vector<double>& z) {
    return from_point(kernel_F(model.kernel(), to_point(z, model.dim())), model.dim());
  });
  m.def("cutoff_at", [](const VelocityModel& model, const std::vector<double>& x, const std::vector<double>& y) {
    return cutoff_at(model, to_point(x, model.dim()), to_point(y, model.dim()));
  });
  m.def("rotation_at", [](const VelocityModel& model, const std::vector<double>& x) {
    const Rotation2 r = rotation_at(model, to_point(x, model.dim()));
    return std::make_pair(r.cos_t, r.sin_t);
  });
  m.def("eval_atomic", [](const VelocityModel& model, const AtomicMeasure& mu, const std::vector<double>& x) {
    return from_point(eval_atomic(model, mu, to_point(x, model.dim())), model.dim());
  });
  m.def("eval_grid", [](const VelocityModel& model, const GridMeasure& g, const std::vector<double>& x) {
    return from_point(eval_grid(model, g, to_point(x, model.dim())), model.dim());
  });
  m.def("velocity_bound", &velocity_bound);

  m.def("box_overlap_fractions",
        [](const GridSpec& s, const std::vector<std::int64_t>& j, const std::vector<double>& w) {
          std::vector<std::pair<std::vector<std::int64_t>, double>> out;
          for (const auto& f : box_overlap_fractions(s, to_index(j, s.dim()), to_point(w, s.dim()))) {
            out.emplace_back(from_index(f.index, s.dim()), f.fraction);
          }
          return out;
        });

  py::class_<StepReport>(m, "StepReport")
      .def_readonly("mass_error", &StepReport::mass_error)
      .def_readonly("max_displacement", &StepReport::max_displacement)
      .def_readonly("cfl_alpha", &StepReport::cfl_alpha)
      .def_readonly("occupied_cells", &StepReport::occupied_cells);

  m.def("step", [](const GridMeasure& g, const VelocityModel& model, double dt, int threads) {
    SchemeOptions o;
    o.threads = threads;
    return step(g, model, dt, o);
  }, py::arg("grid"), py::arg("model"), py::arg("dt"), py::arg("threads") = 1);

  py::class_<GridTrajectory>(m, "GridTrajectory")
      .def_readonly("spec", &GridTrajectory::spec)
      .def_readonly("dt", &GridTrajectory::dt)
      .def_readonly("frames", &GridTrajectory::frames)
      .def_property_readonly("final_time", &GridTrajectory::final_time);

  m.def("run", [](const GridMeasure& g, const VelocityModel& model, double T, double dt, int threads) {
    SchemeOptions o;
    o.threads = threads;
    auto r = run(g, model, T, dt, o);
    return std::make_pair(std::move(r.trajectory), std::move(r.reports));
  }, py::arg("grid"), py::arg("model"), py::arg("T"), py::arg("dt"), py::arg("threads") = 1);
  m.def("sample_at", &sample_at, py::arg("trajectory"), py::arg("t"));

  py::class_<MeshLevel>(m, "MeshLevel")
      .def_readonly("k", &MeshLevel::k)
      .def_readonly("h", &MeshLevel::h)
      .def_readonly("dt", &MeshLevel::dt)
      .def_property_readonly("beta", &MeshLevel::beta);
  m.def("mesh_schedule", [](double v_ref, double delta, const std::vector<int>& ks) {
    return mesh_schedule(v_ref, delta, ks).levels;
  });
  m.def("cfl_ratio", [](const VelocityModel& model, double dt, double h) { return cfl_ratio(model, dt, h).alpha; });

  m.def("run_particles", [](const VelocityModel& model, const std::vector<std::vector<double>>& x0, double T, double dt) {
    std::vector<Point> pts;
    for (const auto& x : x0) pts.push_back(to_point(x, model.dim()));
    const auto traj = run_particles(model.dim(), pts, model, T, dt);
    std::vector<std::vector<std::vector<double>>> out;
    for (const auto& s : traj.states) {
      auto& row = out.emplace_back();
      for (const auto& p : s.positions) row.push_back(from_point(p, model.dim()));
    }
    return out;
  }, py::arg("model"), py::arg("x0"), py::arg("T"), py::arg("dt"));

  m.def("converge", [](const std::string& config_path, const std::optional<std::string>& out) {
    CommandOptions o;
    o.out = out;
    const auto r = cmd_converge(load_config(config_path), o);
    py::dict d;
    d["final_upper"] = r.final_upper;
    d["monotone"] = r.monotone;
    d["metrics_csv"] = r.metrics_csv;
    d["summary_json"] = r.summary_json;
    return d;
  }, py::arg("config_path"), py::arg("out") = std::nullopt);
}
