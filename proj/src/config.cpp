#include "crowdmeasure/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace crowdmeasure {

using nlohmann::json;

namespace {

// Finds the source line of a JSON pointer by walking the raw text. Falls back
// to the closest existing ancestor when the pointer does not exist.
class LineLocator {
 public:
  explicit LineLocator(const std::string& text) : text_(text) {}

  int line_of(const json::json_pointer& ptr) const {
    json::json_pointer p = ptr;
    for (;;) {
      if (const int line = find(tokens(p)); line > 0) return line;
      if (p.empty()) return 0;
      p = p.parent_pointer();
    }
  }

 private:
  static std::vector<std::string> tokens(json::json_pointer p) {
    std::vector<std::string> out;
    while (!p.empty()) {
      out.insert(out.begin(), p.back());
      p.pop_back();
    }
    return out;
  }

  struct Frame {
    bool array = false;
    std::string key;
    int index = 0;
    bool expecting_key = false;
  };

  static std::vector<std::string> path(const std::vector<Frame>& stack) {
    std::vector<std::string> out;
    for (const auto& f : stack) out.push_back(f.array ? std::to_string(f.index) : f.key);
    return out;
  }

  int find(const std::vector<std::string>& target) const {
    std::vector<Frame> stack;
    int line = 1;
    auto value_starts = [&]() { return path(stack) == target; };
    if (target.empty()) return 1;
    for (std::size_t i = 0; i < text_.size(); ++i) {
      const char ch = text_[i];
      switch (ch) {
        case '\n':
          ++line;
          break;
        case '"': {
          std::string s;
          for (++i; i < text_.size() && text_[i] != '"'; ++i) {
            if (text_[i] == '\\' && i + 1 < text_.size()) ++i;
            s.push_back(text_[i]);
          }
          if (!stack.empty() && !stack.back().array && stack.back().expecting_key) {
            stack.back().key = s;
            stack.back().expecting_key = false;
            if (path(stack) == target) return line;
          } else if (value_starts()) {
            return line;
          }
          break;
        }
        case ',':
          if (!stack.empty()) {
            if (stack.back().array) {
              ++stack.back().index;
            } else {
              stack.back().expecting_key = true;
            }
          }
          break;
        case '{':
        case '[':
          if (!stack.empty() && value_starts()) return line;
          stack.push_back({ch == '[', {}, 0, ch == '{'});
          break;
        case '}':
        case ']':
          if (!stack.empty()) stack.pop_back();
          break;
        case ':':
        case ' ':
        case '\t':
        case '\r':
          break;
        default:
          if (value_starts()) return line;
          // Skip the rest of a scalar token.
          while (i + 1 < text_.size() && std::string(",]}\n \t\r").find(text_[i + 1]) == std::string::npos) ++i;
          break;
      }
    }
    return 0;
  }

  const std::string& text_;
};

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : locator_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const json::json_pointer& ptr, const std::string& what) const {
    std::ostringstream os;
    os << origin_;
    if (const int line = locator_.line_of(ptr); line > 0) os << ":" << line;
    os << ": " << (ptr.empty() ? std::string("/") : ptr.to_string()) << ": " << what;
    throw ValidationError(os.str());
  }

  const json& require(const json& obj, const json::json_pointer& at, const char* key) const {
    if (!obj.is_object()) fail(at, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(at, std::string("missing field '") + key + "'");
    return *it;
  }

  double number(const json& v, const json::json_pointer& at) const {
    if (!v.is_number()) fail(at, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at, "expected a finite number");
    return x;
  }

  double positive(const json& v, const json::json_pointer& at) const {
    const double x = number(v, at);
    if (!(x > 0.0)) fail(at, "must be positive");
    return x;
  }

  std::int64_t integer(const json& v, const json::json_pointer& at) const {
    if (!v.is_number_integer()) fail(at, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::string string(const json& v, const json::json_pointer& at) const {
    if (!v.is_string()) fail(at, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> vector(const json& v, const json::json_pointer& at) const {
    if (!v.is_array()) fail(at, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], at / k));
    return out;
  }

 private:
  LineLocator locator_;
  std::string origin_;
};

ModelConfig read_model(const Reader& r, const json& m, const json::json_pointer& at) {
  ModelConfig cfg;
  const int dim = static_cast<int>(r.integer(r.require(m, at, "dim"), at / "dim"));
  if (dim < 1 || dim > kMaxDim) r.fail(at / "dim", "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  cfg.dim = dim;
  const auto n = r.integer(r.require(m, at, "n_agents"), at / "n_agents");
  if (n < 1) r.fail(at / "n_agents", "must be at least 1");
  cfg.n_agents = static_cast<int>(n);

  const auto dp = at / "desired";
  const json& desired = r.require(m, at, "desired");
  cfg.desired_type = r.string(r.require(desired, dp, "type"), dp / "type");
  if (cfg.desired_type == "constant") {
    cfg.desired_c = r.vector(r.require(desired, dp, "c"), dp / "c");
    if (static_cast<int>(cfg.desired_c.size()) != dim) r.fail(dp / "c", "length must equal dim");
  } else if (cfg.desired_type != "zero") {
    r.fail(dp / "type", "unknown desired velocity type '" + cfg.desired_type + "' (zero | constant)");
  }

  const auto kp = at / "kernel";
  const json& kernel = r.require(m, at, "kernel");
  cfg.kernel_type = r.string(r.require(kernel, kp, "type"), kp / "type");
  if (cfg.kernel_type == "case_study") {
    cfg.a = r.positive(r.require(kernel, kp, "a"), kp / "a");
    cfg.eps = r.positive(r.require(kernel, kp, "eps"), kp / "eps");
  } else if (cfg.kernel_type == "attraction") {
    cfg.cap_radius = r.positive(r.require(kernel, kp, "R"), kp / "R");
  } else if (cfg.kernel_type != "none") {
    r.fail(kp / "type", "unknown kernel type '" + cfg.kernel_type + "' (case_study | attraction | none)");
  }

  const auto np = at / "neighborhood";
  const json& neigh = r.require(m, at, "neighborhood");
  cfg.neighborhood_type = r.string(r.require(neigh, np, "type"), np / "type");
  cfg.R = r.positive(r.require(neigh, np, "R"), np / "R");
  cfg.b = r.positive(r.require(neigh, np, "b"), np / "b");
  if (cfg.neighborhood_type == "sector") {
    cfg.alpha = r.positive(r.require(neigh, np, "alpha"), np / "alpha");
  } else if (cfg.neighborhood_type != "ball") {
    r.fail(np / "type", "unknown neighborhood type '" + cfg.neighborhood_type + "' (ball | sector)");
  }

  const auto hp = at / "heading";
  if (auto it = m.find("heading"); it != m.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "from_desired") r.fail(hp, "heading must be \"from_desired\" or {\"fixed_axis\": [...]}");
    } else {
      cfg.fixed_axis = r.vector(r.require(*it, hp, "fixed_axis"), hp / "fixed_axis");
      if (static_cast<int>(cfg.fixed_axis->size()) != dim) r.fail(hp / "fixed_axis", "length must equal dim");
    }
  }

  try {
    build_model(cfg);
  } catch (const ValidationError& e) {
    r.fail(at, e.what());
  }
  return cfg;
}

}  // namespace

VelocityModel build_model(const ModelConfig& cfg) {
  check_dim(cfg.dim);
  auto to_point = [&](const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != cfg.dim) throw ValidationError("vector length must equal dim");
    Point p;
    for (int l = 0; l < cfg.dim; ++l) p[l] = v[l];
    return p;
  };
  Desired desired = ZeroDesired{};
  if (cfg.desired_type == "constant") desired = ConstantDesired{to_point(cfg.desired_c)};
  Kernel kernel = CaseStudyRepulsion{cfg.a, cfg.eps};
  if (cfg.kernel_type == "attraction") {
    kernel = PrototypeAttraction{cfg.cap_radius};
  } else if (cfg.kernel_type == "none") {
    kernel = CustomKernel{[](const Point&) { return Point{}; }, 0.0, 0.0};
  }
  Neighborhood neigh{BallShape{cfg.R}, cfg.b};
  if (cfg.neighborhood_type == "sector") neigh.shape = SectorShape{cfg.R, cfg.alpha};
  Heading heading = HeadingFromDesired{};
  if (cfg.fixed_axis) heading = HeadingFixedAxis{to_point(*cfg.fixed_axis)};
  return VelocityModel(cfg.dim, cfg.n_agents, std::move(desired), std::move(kernel), neigh,
                       std::move(heading));
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < std::min(e.byte, text.size()); ++k) line += text[k] == '\n';
    throw ValidationError(origin + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  const Reader r(text, origin);
  const json::json_pointer root;
  if (!doc.is_object()) r.fail(root, "top level must be an object");

  ExperimentConfig cfg;
  cfg.model = read_model(r, r.require(doc, root, "model"), root / "model");

  const auto ip = root / "initial";
  const json& init = r.require(doc, root, "initial");
  cfg.initial.type = r.string(r.require(init, ip, "type"), ip / "type");
  if (cfg.initial.type == "atoms") {
    const json& pos = r.require(init, ip, "positions");
    if (!pos.is_array() || pos.empty()) r.fail(ip / "positions", "expected a non-empty array of points");
    for (std::size_t k = 0; k < pos.size(); ++k) {
      auto p = r.vector(pos[k], ip / "positions" / k);
      if (static_cast<int>(p.size()) != cfg.model.dim) r.fail(ip / "positions" / k, "point length must equal dim");
      cfg.initial.positions.push_back(std::move(p));
    }
  } else if (cfg.initial.type == "uniform_random") {
    const auto count = r.integer(r.require(init, ip, "count"), ip / "count");
    if (count < 1) r.fail(ip / "count", "must be at least 1");
    cfg.initial.count = static_cast<std::size_t>(count);
    const auto interval = r.vector(r.require(init, ip, "interval"), ip / "interval");
    if (interval.size() != 2 || !(interval[0] < interval[1])) {
      r.fail(ip / "interval", "expected [lo, hi] with lo < hi");
    }
    cfg.initial.lo = interval[0];
    cfg.initial.hi = interval[1];
    const json& seed = r.require(init, ip, "seed");
    if (!seed.is_number_unsigned()) r.fail(ip / "seed", "seed must be a nonnegative integer");
    cfg.initial.seed = seed.get<std::uint64_t>();
  } else {
    r.fail(ip / "type", "unknown initial type '" + cfg.initial.type + "' (atoms | uniform_random)");
  }
  const std::size_t agents =
      cfg.initial.type == "atoms" ? cfg.initial.positions.size() : cfg.initial.count;
  if (agents != static_cast<std::size_t>(cfg.model.n_agents)) {
    r.fail(root / "model" / "n_agents", "must equal the number of initial agents (" + std::to_string(agents) + ")");
  }

  cfg.T = r.positive(r.require(doc, root, "T"), root / "T");

  const auto sp = root / "schedule";
  const json& sched = r.require(doc, root, "schedule");
  if (!sched.is_object()) r.fail(sp, "expected an object");
  if (sched.contains("h")) {
    cfg.schedule.h = r.positive(sched["h"], sp / "h");
    cfg.schedule.dt = r.positive(r.require(sched, sp, "dt"), sp / "dt");
  } else {
    const double delta = r.number(r.require(sched, sp, "delta"), sp / "delta");
    if (!(delta > 0.0 && delta < 1.0)) r.fail(sp / "delta", "delta must lie in (0, 1) so that h = o(dt)");
    cfg.schedule.delta = delta;
    const json& ks = r.require(sched, sp, "ks");
    if (!ks.is_array() || ks.empty()) r.fail(sp / "ks", "expected a non-empty array of levels");
    int prev = 0;
    for (std::size_t k = 0; k < ks.size(); ++k) {
      const auto v = r.integer(ks[k], sp / "ks" / k);
      if (v <= prev) r.fail(sp / "ks" / k, "levels must be positive and strictly increasing");
      prev = static_cast<int>(v);
      cfg.schedule.ks.push_back(prev);
    }
    if (sched.contains("v_ref")) cfg.schedule.v_ref = r.positive(sched["v_ref"], sp / "v_ref");
  }

  if (auto it = doc.find("outputs"); it != doc.end()) cfg.outputs = r.string(*it, root / "outputs");
  auto times = [&](const char* key, std::vector<double>& out) {
    if (auto it = doc.find(key); it != doc.end()) {
      out = r.vector(*it, root / key);
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (!(out[k] >= 0.0 && out[k] <= cfg.T)) r.fail(root / key / k, "time must lie in [0, T]");
      }
    }
  };
  times("w1_sample_times", cfg.w1_sample_times);
  times("snapshot_times", cfg.snapshot_times);
  if (auto it = doc.find("oracle_dt"); it != doc.end()) cfg.oracle_dt = r.positive(*it, root / "oracle_dt");
  if (auto it = doc.find("max_cells"); it != doc.end()) {
    const auto v = r.integer(*it, root / "max_cells");
    if (v < 1) r.fail(root / "max_cells", "must be at least 1");
    cfg.max_cells = static_cast<std::size_t>(v);
  }
  return cfg;
}

ModelConfig parse_model_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": malformed JSON: " + e.what());
  }
  const Reader r(text, origin);
  return read_model(r, doc, json::json_pointer{});
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  json model = {{"dim", m.dim}, {"n_agents", m.n_agents}};
  model["desired"] = {{"type", m.desired_type}};
  if (m.desired_type == "constant") model["desired"]["c"] = m.desired_c;
  model["kernel"] = {{"type", m.kernel_type}};
  if (m.kernel_type == "case_study") {
    model["kernel"]["a"] = m.a;
    model["kernel"]["eps"] = m.eps;
  } else if (m.kernel_type == "attraction") {
    model["kernel"]["R"] = m.cap_radius;
  }
  model["neighborhood"] = {{"type", m.neighborhood_type}, {"R", m.R}, {"b", m.b}};
  if (m.neighborhood_type == "sector") model["neighborhood"]["alpha"] = m.alpha;
  if (m.fixed_axis) {
    model["heading"] = {{"fixed_axis", *m.fixed_axis}};
  } else {
    model["heading"] = "from_desired";
  }

  json init = {{"type", cfg.initial.type}};
  if (cfg.initial.type == "atoms") {
    init["positions"] = cfg.initial.positions;
  } else {
    init["count"] = cfg.initial.count;
    init["interval"] = {cfg.initial.lo, cfg.initial.hi};
    init["seed"] = cfg.initial.seed.value_or(0);
  }

  json sched = json::object();
  if (cfg.schedule.is_explicit()) {
    sched["h"] = *cfg.schedule.h;
    sched["dt"] = *cfg.schedule.dt;
  } else {
    sched["delta"] = cfg.schedule.delta.value_or(0.0);
    sched["ks"] = cfg.schedule.ks;
    if (cfg.schedule.v_ref) sched["v_ref"] = *cfg.schedule.v_ref;
  }

  json out = {{"model", model},   {"initial", init},       {"T", cfg.T},
              {"schedule", sched}, {"outputs", cfg.outputs}, {"max_cells", cfg.max_cells}};
  if (!cfg.w1_sample_times.empty()) out["w1_sample_times"] = cfg.w1_sample_times;
  if (!cfg.snapshot_times.empty()) out["snapshot_times"] = cfg.snapshot_times;
  if (cfg.oracle_dt) out["oracle_dt"] = *cfg.oracle_dt;
  return out;
}

std::vector<Point> initial_positions(const ExperimentConfig& cfg) {
  const int dim = cfg.model.dim;
  std::vector<Point> out;
  if (cfg.initial.type == "atoms") {
    for (const auto& p : cfg.initial.positions) {
      Point x;
      for (int l = 0; l < dim; ++l) x[l] = p[l];
      out.push_back(x);
    }
    return out;
  }
  if (!cfg.initial.seed) throw ValidationError("uniform_random initial data needs a seed");
  // mt19937_64 output mapped to [0, 1) by its top 53 bits, which unlike
  // std::uniform_real_distribution is identical across standard libraries.
  std::mt19937_64 gen(*cfg.initial.seed);
  const double span = cfg.initial.hi - cfg.initial.lo;
  for (std::size_t n = 0; n < cfg.initial.count; ++n) {
    Point x;
    for (int l = 0; l < dim; ++l) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      x[l] = cfg.initial.lo + span * u;
    }
    out.push_back(x);
  }
  return out;
}

MeshSchedule resolve_schedule(const ExperimentConfig& cfg) {
  if (cfg.schedule.is_explicit()) {
    MeshSchedule s;
    const double h = *cfg.schedule.h;
    s.levels.push_back({static_cast<int>(std::lround(1.0 / h)), h, *cfg.schedule.dt});
    s.delta = std::log(*cfg.schedule.dt) / std::log(h);
    s.v_ref = 1.0;
    return s;
  }
  double v_ref = cfg.schedule.v_ref.value_or(velocity_bound(build_model(cfg.model)));
  if (!(v_ref > 0.0)) v_ref = 1.0;  // motionless model: any positive reference speed
  return mesh_schedule(v_ref, *cfg.schedule.delta, cfg.schedule.ks);
}

MeshLevel resolve_level(const ExperimentConfig& cfg, std::optional<int> k) {
  const MeshSchedule s = resolve_schedule(cfg);
  if (!k || cfg.schedule.is_explicit()) return s.levels.front();
  for (const auto& level : s.levels) {
    if (level.k == *k) return level;
  }
  if (*k < 1) throw ValidationError("level k must be positive");
  return mesh_schedule(s.v_ref, s.delta, {*k}).levels.front();
}

std::vector<double> snapshot_times(const ExperimentConfig& cfg) {
  if (!cfg.snapshot_times.empty()) return cfg.snapshot_times;
  return {0.5 * cfg.T, cfg.T};
}

std::vector<double> sample_times(const ExperimentConfig& cfg) {
  if (!cfg.w1_sample_times.empty()) return cfg.w1_sample_times;
  return {0.5 * cfg.T, cfg.T};
}

double oracle_step(const ExperimentConfig& cfg) {
  if (cfg.oracle_dt) return *cfg.oracle_dt;
  const MeshSchedule s = resolve_schedule(cfg);
  const double target = s.levels.back().dt / 10.0;
  const double steps = std::ceil(cfg.T / target);
  return cfg.T / steps;
}

}  // namespace crowdmeasure
