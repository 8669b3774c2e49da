#include "spp/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include "json.hpp"
#include <set>
#include <sstream>
#include <stdexcept>

#include "spp/errors.hpp"

namespace spp {

namespace {

using nlohmann::json;

// --- scenario schema --------------------------------------------------------

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError(path.empty() ? "/" : path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::set<std::string> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ScenarioError(path + "/" + key, "unknown key");
  }
}

const json& member(const json& j, const std::string& path, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ScenarioError(path + "/" + key, "missing required key");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ScenarioError(path, "expected a finite number");
  return x;
}

double positive(const json& j, const std::string& path) {
  const double x = number(j, path);
  if (!(x > 0.0)) throw ScenarioError(path, "must be positive");
  return x;
}

std::size_t count_value(const json& j, const std::string& path, std::size_t min) {
  if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(min)) {
    throw ScenarioError(path, "expected an integer >= " + std::to_string(min));
  }
  return j.get<std::size_t>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ScenarioError(path, "expected true or false");
  return j.get<bool>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ScenarioError(path, "expected an array");
  return j;
}

std::vector<double> vector_of(const json& j, const std::string& path, std::size_t min_size,
                              std::size_t max_size) {
  array(j, path);
  if (j.size() < min_size || j.size() > max_size) {
    throw ScenarioError(path, "expected " + std::to_string(min_size) + ".." +
                                  std::to_string(max_size) + " entries");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "/" + std::to_string(i)));
  return out;
}

Grid parse_grid(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"bounds", "counts", "periodic"});
  const json& bounds = array(member(j, path, "bounds"), path + "/bounds");
  const json& counts = array(member(j, path, "counts"), path + "/counts");
  const std::size_t n = bounds.size();
  if (n == 0 || n > kMaxDims) throw ScenarioError(path + "/bounds", "unsupported dimension count");
  if (counts.size() != n) throw ScenarioError(path + "/counts", "length must match bounds");
  std::vector<bool> periodic(n, false);
  if (j.contains("periodic")) {
    const json& p = array(j["periodic"], path + "/periodic");
    if (p.size() != n) throw ScenarioError(path + "/periodic", "length must match bounds");
    for (std::size_t d = 0; d < n; ++d) periodic[d] = boolean(p[d], path + "/periodic/" + std::to_string(d));
  }
  std::vector<Axis> axes;
  for (std::size_t d = 0; d < n; ++d) {
    const std::string bp = path + "/bounds/" + std::to_string(d);
    const std::vector<double> lu = vector_of(bounds[d], bp, 2, 2);
    if (!(lu[1] > lu[0])) throw ScenarioError(bp, "upper bound must exceed lower bound");
    axes.push_back({lu[0], lu[1], count_value(counts[d], path + "/counts/" + std::to_string(d), 3),
                    periodic[d]});
  }
  return Grid(std::move(axes));
}

Circle parse_circle(const json& j, const std::string& path, bool typed) {
  require_object(j, path);
  if (typed) {
    reject_unknown(j, path, {"type", "center", "radius"});
  } else {
    reject_unknown(j, path, {"center", "radius"});
  }
  return {vector_of(member(j, path, "center"), path + "/center", 1, 2),
          positive(member(j, path, "radius"), path + "/radius")};
}

Shape parse_shape(const json& j, const std::string& path) {
  require_object(j, path);
  const json& type = member(j, path, "type");
  if (type == "circle") return parse_circle(j, path, true);
  if (type == "rectangle") {
    reject_unknown(j, path, {"type", "lower", "upper"});
    AxisRectangle r{vector_of(member(j, path, "lower"), path + "/lower", 1, 2),
                    vector_of(member(j, path, "upper"), path + "/upper", 1, 2)};
    if (r.lower.size() != r.upper.size()) throw ScenarioError(path + "/upper", "dimension mismatch");
    for (std::size_t d = 0; d < r.lower.size(); ++d) {
      if (!(r.upper[d] > r.lower[d])) {
        throw ScenarioError(path + "/upper/" + std::to_string(d), "must exceed the lower corner");
      }
    }
    return r;
  }
  throw ScenarioError(path + "/type", "expected \"circle\" or \"rectangle\"");
}

VehicleSpec parse_vehicle(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"model", "v", "omega_max", "max_speed", "x0", "est", "sta", "target", "priority"});
  VehicleSpec v;
  if (j.contains("model")) {
    if (!j["model"].is_string()) throw ScenarioError(path + "/model", "expected a string");
    v.model = j["model"].get<std::string>();
    if (!ModelRegistry::instance().contains(v.model)) {
      throw ScenarioError(path + "/model", "unknown model '" + v.model + "'");
    }
  }
  for (const char* key : {"v", "omega_max", "max_speed"}) {
    if (j.contains(key)) v.params[key] = positive(j[key], path + "/" + key);
  }
  v.x0 = vector_of(member(j, path, "x0"), path + "/x0", 1, kMaxDims);
  v.earliest_start = number(member(j, path, "est"), path + "/est");
  v.scheduled_arrival = number(member(j, path, "sta"), path + "/sta");
  if (v.earliest_start > v.scheduled_arrival) throw ScenarioError(path + "/est", "must not exceed sta");
  v.target = parse_circle(member(j, path, "target"), path + "/target", false);
  const json& pr = member(j, path, "priority");
  v.priority = static_cast<int>(count_value(pr, path + "/priority", 1));
  return v;
}

Scenario scenario_from_json(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"description", "reconstructed", "grid", "obstacles", "vehicles",
                           "danger_radius", "numerics", "options"});
  Scenario sc(parse_grid(member(doc, "", "grid"), "/grid"));

  if (doc.contains("description") && !doc["description"].is_string()) {
    throw ScenarioError("/description", "expected a string");
  }
  if (doc.contains("reconstructed")) {
    const json& r = array(doc["reconstructed"], "/reconstructed");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i].is_string()) throw ScenarioError("/reconstructed/" + std::to_string(i), "expected a string");
      sc.reconstructed.push_back(r[i].get<std::string>());
    }
  }
  if (doc.contains("obstacles")) {
    const json& obs = array(doc["obstacles"], "/obstacles");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      sc.obstacles.push_back(parse_shape(obs[i], "/obstacles/" + std::to_string(i)));
    }
  }
  const json& vehicles = array(member(doc, "", "vehicles"), "/vehicles");
  if (vehicles.empty()) throw ScenarioError("/vehicles", "at least one vehicle is required");
  std::set<int> priorities;
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const std::string path = "/vehicles/" + std::to_string(i);
    sc.vehicles.push_back(parse_vehicle(vehicles[i], path));
    if (!priorities.insert(sc.vehicles.back().priority).second) {
      throw ScenarioError(path + "/priority", "duplicate priority");
    }
  }
  if (*priorities.rbegin() != static_cast<int>(priorities.size())) {
    throw ScenarioError("/vehicles", "priorities must be 1..N without gaps");
  }
  if (doc.contains("danger_radius")) {
    sc.danger_radius = positive(doc["danger_radius"], "/danger_radius");
  } else {
    sc.reconstructed.push_back("danger_radius: default 0.1");
  }
  if (doc.contains("numerics")) {
    const json& n = doc["numerics"];
    require_object(n, "/numerics");
    reject_unknown(n, "/numerics", {"cfl", "order", "slice_stride", "horizon_cap"});
    if (n.contains("cfl")) {
      sc.numerics.cfl_factor = positive(n["cfl"], "/numerics/cfl");
      if (sc.numerics.cfl_factor > 1.0) throw ScenarioError("/numerics/cfl", "must be <= 1");
    }
    if (n.contains("order")) {
      const std::size_t order = count_value(n["order"], "/numerics/order", 1);
      if (order > 2) throw ScenarioError("/numerics/order", "must be 1 or 2");
      sc.numerics.scheme_order = static_cast<int>(order);
    }
    if (n.contains("slice_stride")) {
      sc.numerics.slice_stride = count_value(n["slice_stride"], "/numerics/slice_stride", 1);
    }
    if (n.contains("horizon_cap")) {
      sc.numerics.horizon_cap = positive(n["horizon_cap"], "/numerics/horizon_cap");
    }
  }
  if (doc.contains("options")) {
    const json& o = doc["options"];
    require_object(o, "/options");
    reject_unknown(o, "/options", {"post_arrival_obstacle", "sim_dt", "extra_steps"});
    if (o.contains("post_arrival_obstacle")) {
      sc.options.post_arrival_obstacle =
          boolean(o["post_arrival_obstacle"], "/options/post_arrival_obstacle");
    }
    if (o.contains("sim_dt")) sc.options.sim_dt = positive(o["sim_dt"], "/options/sim_dt");
    if (o.contains("extra_steps")) {
      sc.options.extra_steps = count_value(o["extra_steps"], "/options/extra_steps", 0);
    }
  }
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("/", e.what());
  }
  return sc;
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// --- binary helpers ---------------------------------------------------------

constexpr char kMagic[8] = {'H', 'J', 'V', 'I', 'S', 'L', 'C', '1'};

template <typename U>
void put_le(std::ostream& out, U v) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw std::runtime_error("value slice: truncated file");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double x) { put_le(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double finite_or_null(double x) { return x >= kFarField ? std::numeric_limits<double>::quiet_NaN() : x; }

json optional_number(std::optional<double> x) { return x ? json(*x) : json(nullptr); }

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(line_column(text, e.byte), e.what());
  }
  return scenario_from_json(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void write_value_slice(std::ostream& out, const ScalarField& field, double time) {
  const Grid& g = field.grid();
  out.write(kMagic, sizeof(kMagic));
  put_le(out, static_cast<std::uint32_t>(g.dims()));
  for (const Axis& a : g.axes()) {
    put_f64(out, a.lower);
    put_f64(out, a.upper);
    put_le(out, static_cast<std::uint32_t>(a.count));
    put_le(out, static_cast<std::uint8_t>(a.periodic ? 1 : 0));
  }
  put_f64(out, time);
  for (double v : field.values()) put_f64(out, v);
  if (!out) throw std::runtime_error("value slice: write failed");
}

void write_value_slice(const std::filesystem::path& path, const ScalarField& field, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create '" + path.string() + "'");
  write_value_slice(out, field, time);
}

ScalarField read_value_slice(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + 8, kMagic)) {
    throw std::runtime_error("value slice: bad magic");
  }
  const auto dims = get_le<std::uint32_t>(in);
  if (dims == 0 || dims > kMaxDims) throw std::runtime_error("value slice: bad dimension count");
  std::vector<Axis> axes;
  for (std::uint32_t d = 0; d < dims; ++d) {
    Axis a;
    a.lower = get_f64(in);
    a.upper = get_f64(in);
    a.count = get_le<std::uint32_t>(in);
    a.periodic = get_le<std::uint8_t>(in) != 0;
    axes.push_back(a);
  }
  Grid grid(std::move(axes));
  const double time = get_f64(in);
  std::vector<double> values(grid.num_nodes());
  for (double& v : values) v = get_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("value slice: payload longer than the header declares");
  }
  return ScalarField(std::move(grid), std::move(values), time);
}

ScalarField read_value_slice(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_value_slice(in);
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Grid& grid) {
  const std::size_t n = grid.dims();
  const std::size_t m = traj.samples.empty() ? 1 : traj.samples.front().control.size();
  if (n == 3 && m == 1) {
    out << "t,x,y,theta,omega\n";
  } else {
    out << "t";
    for (std::size_t d = 0; d < n; ++d) out << ",x" << d;
    for (std::size_t d = 0; d < m; ++d) out << ",u" << d;
    out << "\n";
  }
  for (const TrajectorySample& s : traj.samples) {
    out << format_real(s.t);
    for (std::size_t d = 0; d < n; ++d) {
      const Axis& a = grid.axis(d);
      out << ',' << format_real(a.periodic ? wrap_periodic(a, s.state[d]) : s.state[d]);
    }
    for (double u : s.control) out << ',' << format_real(u);
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in, std::size_t state_dims) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory csv: empty input");
  const std::size_t columns = split_csv(line).size();
  if (columns < state_dims + 1) throw std::runtime_error("trajectory csv: too few columns");
  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != columns) throw std::runtime_error("trajectory csv: ragged row");
    TrajectorySample s;
    s.t = std::stod(cells[0]);
    for (std::size_t d = 0; d < state_dims; ++d) s.state.push_back(std::stod(cells[1 + d]));
    for (std::size_t c = 1 + state_dims; c < columns; ++c) s.control.push_back(std::stod(cells[c]));
    if (!traj.samples.empty() && !(s.t > traj.samples.back().t)) {
      throw std::runtime_error("trajectory csv: times must increase");
    }
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.empty()) throw std::runtime_error("trajectory csv: no samples");
  traj.arrival_time = traj.samples.back().t;
  return traj;
}

std::string report_json(const PlanResult& result, const Scenario& scenario) {
  const SafetyReport& r = result.report;
  nlohmann::ordered_json doc;
  doc["reconstructed"] = scenario.reconstructed;
  doc["danger_radius"] = scenario.danger_radius;
  doc["check_dt"] = r.check_dt;
  doc["safe"] = r.safe();
  doc["all_feasible"] = result.all_feasible();
  const double mpd = finite_or_null(r.min_pairwise_distance);
  doc["min_pairwise_distance"] = std::isnan(mpd) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(mpd);
  doc["min_pairwise_time"] = r.closest_pair ? nlohmann::ordered_json(r.min_pairwise_time) : nlohmann::ordered_json(nullptr);
  doc["closest_pair"] = r.closest_pair
                            ? nlohmann::ordered_json::array({r.closest_pair->first, r.closest_pair->second})
                            : nlohmann::ordered_json(nullptr);
  doc["violations"] = r.violations;
  auto& vehicles = doc["vehicles"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.vehicles.size(); ++i) {
    const VehiclePlan& v = result.vehicles[i];
    nlohmann::ordered_json e;
    e["priority"] = v.priority;
    e["feasible"] = v.feasible;
    e["status"] = v.status;
    e["latest_start"] = optional_number(v.latest_start);
    e["arrival"] = optional_number(v.feasible ? v.trajectory.arrival_time : std::nullopt);
    e["sta"] = scenario.vehicles[i].scheduled_arrival;
    e["deadline_slack"] = optional_number(r.deadline_slack[i]);
    const double od = finite_or_null(r.min_obstacle_distance[i]);
    const double vd = finite_or_null(r.min_vehicle_distance[i]);
    e["min_obstacle_distance"] = std::isnan(od) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(od);
    e["min_vehicle_distance"] = std::isnan(vd) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(vd);
    e["solver_steps"] = v.solver_steps;
    vehicles.push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

void write_lst_summary(std::ostream& out, const PlanResult& result, const Scenario& scenario) {
  out << "priority,feasible,latest_start,arrival,sta,slack\n";
  for (std::size_t i = 0; i < result.vehicles.size(); ++i) {
    const VehiclePlan& v = result.vehicles[i];
    const auto opt = [](std::optional<double> x) { return x ? format_real(*x) : std::string(); };
    out << v.priority << ',' << (v.feasible ? 1 : 0) << ',' << opt(v.latest_start) << ','
        << opt(v.feasible ? v.trajectory.arrival_time : std::nullopt) << ','
        << format_real(scenario.vehicles[i].scheduled_arrival) << ','
        << opt(result.report.deadline_slack[i]) << '\n';
  }
}

}  // namespace spp
