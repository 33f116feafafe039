#include "crowdmeasure/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace crowdmeasure {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error("failed to format number");
  return std::string(buf, end);
}

void write_density_csv(std::ostream& out, const GridMeasure& lambda) {
  const int dim = lambda.spec().dim();
  for (int l = 0; l < dim; ++l) out << "index_" << l << ",";
  for (int l = 0; l < dim; ++l) out << "center_" << l << ",";
  out << "rho\n";
  for (const auto& c : lambda.cells()) {
    const Point x = cell_center(lambda.spec(), c.index);
    for (int l = 0; l < dim; ++l) out << c.index[l] << ",";
    for (int l = 0; l < dim; ++l) out << format_double(x[l]) << ",";
    out << format_double(c.rho) << "\n";
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ValidationError("bad number '" + s + "'");
  return v;
}

}  // namespace

GridMeasure read_density_csv(std::istream& in, double cell_width) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("density CSV is empty");
  const auto header = split(line);
  if (header.size() < 3 || (header.size() - 1) % 2 != 0 || header.back() != "rho") {
    throw ValidationError("density CSV header must be index_*,center_*,rho");
  }
  const int dim = static_cast<int>((header.size() - 1) / 2);
  GridSpec spec(dim, cell_width);
  std::vector<GridCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw ValidationError("density CSV row has the wrong field count");
    GridCell c;
    for (int l = 0; l < dim; ++l) c.index[l] = std::stoll(f[l]);
    c.rho = parse_double(f.back());
    cells.push_back(c);
  }
  return GridMeasure(spec, std::move(cells));
}

std::string atomic_to_json(const AtomicMeasure& mu) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : mu.atoms()) {
    std::vector<double> x(a.x.c.begin(), a.x.c.begin() + mu.dim());
    arr.push_back({{"x", x}, {"w", a.w}});
  }
  return arr.dump();
}

AtomicMeasure atomic_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("atomic measure JSON: ") + e.what());
  }
  if (!arr.is_array() || arr.empty()) throw ValidationError("atomic measure JSON must be a non-empty array");
  std::vector<Atom> atoms;
  std::size_t dim = 0;
  for (const auto& item : arr) {
    if (!item.contains("x") || !item.contains("w")) throw ValidationError("atom entries need \"x\" and \"w\"");
    const auto x = item["x"].get<std::vector<double>>();
    if (dim == 0) dim = x.size();
    if (x.size() != dim || dim == 0 || dim > kMaxDim) throw ValidationError("atoms have inconsistent dimensions");
    Atom a;
    for (std::size_t l = 0; l < dim; ++l) a.x[l] = x[l];
    a.w = item["w"].get<double>();
    atoms.push_back(a);
  }
  return AtomicMeasure(static_cast<int>(dim), std::move(atoms));
}

void write_particle_csv(std::ostream& out, const ParticleTrajectory& traj) {
  if (traj.states.empty()) return;
  const int dim = traj.states.front().dim;
  out << "t,particle";
  for (int l = 0; l < dim; ++l) out << ",x_" << l;
  out << "\n";
  for (const auto& s : traj.states) {
    const std::string t = format_double(s.t);
    for (std::size_t p = 0; p < s.positions.size(); ++p) {
      out << t << "," << p;
      for (int l = 0; l < dim; ++l) out << "," << format_double(s.positions[p][l]);
      out << "\n";
    }
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "k,h,dt,t,w1,atomization_bound\n";
  for (const auto& r : rows) {
    out << r.k << "," << format_double(r.h) << "," << format_double(r.dt) << "," << format_double(r.t)
        << "," << format_double(r.w1) << "," << format_double(r.atomization_bound) << "\n";
  }
}

std::string step_report_json(std::size_t n, const StepReport& report) {
  nlohmann::json j = {{"n", n},
                      {"mass_error", report.mass_error},
                      {"alpha", report.cfl_alpha},
                      {"occupied", report.occupied_cells}};
  return j.dump();
}

}  // namespace crowdmeasure
