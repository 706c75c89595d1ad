#include "gridse/grid_model.hpp"

#include <algorithm>
#include <complex>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gridse/error.hpp"
#include "gridse/linalg.hpp"
#include "gridse/measurement_model.hpp"
#include "json_util.hpp"

namespace gridse {

namespace {

using nlohmann::json;
using detail::malformed;
using detail::read_id;
using detail::read_number;
using detail::require_keys;

std::complex<double> series_admittance(const Branch& br) {
  return 1.0 / std::complex<double>(br.resistance_r, br.reactance_x);
}

void check_connected(const std::vector<Bus>& buses, const std::vector<Branch>& branches) {
  const std::size_t n = buses.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t components = n;
  for (const auto& br : branches) {
    auto a = find(static_cast<std::size_t>(br.from_bus - 1));
    auto b = find(static_cast<std::size_t>(br.to_bus - 1));
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  if (components != 1) {
    throw Error(ErrorKind::DisconnectedNetwork,
                "branch graph has " + std::to_string(components) + " components");
  }
}

}  // namespace

double Branch::series_g() const { return series_admittance(*this).real(); }
double Branch::series_b() const { return series_admittance(*this).imag(); }

std::string_view to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::FlowP: return "flow_p";
    case MeasurementKind::FlowQ: return "flow_q";
    case MeasurementKind::InjectionP: return "injection_p";
    case MeasurementKind::InjectionQ: return "injection_q";
    case MeasurementKind::CurrentMagnitude: return "current_magnitude";
    case MeasurementKind::VoltageMagnitude: return "voltage_magnitude";
  }
  return "unknown";
}

std::optional<MeasurementKind> parse_measurement_kind(std::string_view name) {
  for (auto kind : {MeasurementKind::FlowP, MeasurementKind::FlowQ, MeasurementKind::InjectionP,
                    MeasurementKind::InjectionQ, MeasurementKind::CurrentMagnitude,
                    MeasurementKind::VoltageMagnitude}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

bool is_branch_kind(MeasurementKind kind) {
  return kind == MeasurementKind::FlowP || kind == MeasurementKind::FlowQ ||
         kind == MeasurementKind::CurrentMagnitude;
}

Eigen::VectorXd MeasurementConfig::sigmas() const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(specs.size()));
  for (std::size_t i = 0; i < specs.size(); ++i) s(static_cast<Eigen::Index>(i)) = specs[i].sigma;
  return s;
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, double base_mva)
    : buses_(std::move(buses)), branches_(std::move(branches)), base_mva_(base_mva) {
  if (!(base_mva_ > 0.0)) malformed("base_mva must be positive");
  if (buses_.empty()) malformed("network has no buses");
  std::sort(buses_.begin(), buses_.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].id != static_cast<int>(i + 1)) {
      malformed("bus ids must be dense 1..n (saw " + std::to_string(buses_[i].id) + ")");
    }
    if (!(buses_[i].voltage_magnitude > 0.0)) {
      malformed("bus " + std::to_string(buses_[i].id) + " has non-positive voltage magnitude");
    }
  }
  std::size_t refs = 0;
  for (const auto& b : buses_) {
    if (b.is_reference) {
      ++refs;
      reference_bus_ = b.id;
    }
  }
  if (refs == 0) throw Error(ErrorKind::NoReferenceBus, "no bus is marked as reference");
  if (refs > 1) throw Error(ErrorKind::MultipleReferenceBuses, std::to_string(refs) + " reference buses");

  for (const auto& br : branches_) {
    if (!has_bus(br.from_bus) || !has_bus(br.to_bus)) {
      throw Error(ErrorKind::DanglingReference, "branch " + std::to_string(br.from_bus) + "-" +
                                                    std::to_string(br.to_bus) + " names an unknown bus");
    }
    if (br.from_bus == br.to_bus) malformed("branch joins bus " + std::to_string(br.from_bus) + " to itself");
    if (br.reactance_x == 0.0) {
      throw Error(ErrorKind::ZeroReactance, "branch " + std::to_string(br.from_bus) + "-" +
                                                std::to_string(br.to_bus) + " has zero reactance");
    }
  }
  check_connected(buses_, branches_);
}

std::optional<std::size_t> NetworkModel::angle_column(int id) const {
  if (!has_bus(id) || id == reference_bus_) return std::nullopt;
  return static_cast<std::size_t>(id < reference_bus_ ? id - 1 : id - 2);
}

std::optional<OrientedBranch> NetworkModel::find_branch(int from, int to) const {
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const auto& br = branches_[i];
    if (br.from_bus == from && br.to_bus == to) return OrientedBranch{i, false};
    if (br.from_bus == to && br.to_bus == from) return OrientedBranch{i, true};
  }
  return std::nullopt;
}

void validate_config(const NetworkModel& network, const MeasurementConfig& config) {
  for (std::size_t i = 0; i < config.specs.size(); ++i) {
    const auto& s = config.specs[i];
    const std::string where = "measurement " + std::to_string(i + 1);
    if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) {
      throw Error(ErrorKind::MalformedDocument, where + ": sigma must be positive");
    }
    if (is_branch_kind(s.kind)) {
      if (!network.has_bus(s.from_bus) || !network.has_bus(s.to_bus) ||
          !network.find_branch(s.from_bus, s.to_bus)) {
        throw Error(ErrorKind::DanglingReference, where + ": no branch " + std::to_string(s.from_bus) +
                                                      "-" + std::to_string(s.to_bus));
      }
    } else if (!network.has_bus(s.bus)) {
      throw Error(ErrorKind::DanglingReference, where + ": unknown bus " + std::to_string(s.bus));
    }
  }
}

Case parse_case(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  require_keys(doc, "case", {"buses", "branches", "measurements"}, {});
  for (const char* key : {"buses", "branches", "measurements"}) {
    if (!doc.at(key).is_array()) malformed(std::string("case.") + key + " must be an array");
  }

  std::vector<Bus> buses;
  for (const auto& jb : doc.at("buses")) {
    require_keys(jb, "bus", {"id"}, {"ref", "v"});
    Bus b;
    b.id = read_id(jb, "id", "bus");
    if (jb.contains("ref")) {
      if (!jb.at("ref").is_boolean()) malformed("bus.ref must be a boolean");
      b.is_reference = jb.at("ref").get<bool>();
    }
    b.voltage_magnitude = read_number(jb, "v", "bus", 1.0);
    if (std::any_of(buses.begin(), buses.end(), [&](const Bus& o) { return o.id == b.id; })) {
      malformed("duplicate bus id " + std::to_string(b.id));
    }
    buses.push_back(b);
  }

  std::vector<Branch> branches;
  for (const auto& jb : doc.at("branches")) {
    require_keys(jb, "branch", {"from", "to", "x"}, {"r", "gs", "bs"});
    Branch br;
    br.from_bus = read_id(jb, "from", "branch");
    br.to_bus = read_id(jb, "to", "branch");
    br.reactance_x = read_number(jb, "x", "branch", 0.0);
    br.resistance_r = read_number(jb, "r", "branch", 0.0);
    br.shunt_conductance_gs = read_number(jb, "gs", "branch", 0.0);
    br.shunt_susceptance_bs = read_number(jb, "bs", "branch", 0.0);
    branches.push_back(br);
  }

  Case result{NetworkModel(std::move(buses), std::move(branches)), {}, std::nullopt};

  std::vector<double> values;
  std::size_t with_value = 0;
  for (const auto& jm : doc.at("measurements")) {
    if (!jm.is_object() || !jm.contains("kind") || !jm.at("kind").is_string()) {
      malformed("measurement needs a string 'kind'");
    }
    const auto kind_name = jm.at("kind").get<std::string>();
    auto kind = parse_measurement_kind(kind_name);
    if (!kind) malformed("unknown measurement kind '" + kind_name + "'");
    MeasurementSpec spec;
    spec.kind = *kind;
    if (is_branch_kind(*kind)) {
      require_keys(jm, "measurement", {"kind", "from", "to", "sigma"}, {"value"});
      spec.from_bus = read_id(jm, "from", "measurement");
      spec.to_bus = read_id(jm, "to", "measurement");
    } else {
      require_keys(jm, "measurement", {"kind", "bus", "sigma"}, {"value"});
      spec.bus = read_id(jm, "bus", "measurement");
    }
    spec.sigma = read_number(jm, "sigma", "measurement", 0.0);
    if (jm.contains("value")) {
      values.push_back(read_number(jm, "value", "measurement", 0.0));
      ++with_value;
    }
    result.config.specs.push_back(spec);
  }
  validate_config(result.network, result.config);

  if (with_value != 0) {
    if (with_value != result.config.size()) {
      malformed("either every measurement carries a value or none does");
    }
    result.z = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  return result;
}

Case load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str());
}

std::string serialize_case(const Case& c) {
  nlohmann::ordered_json doc;
  doc["buses"] = nlohmann::ordered_json::array();
  for (const auto& b : c.network.buses()) {
    doc["buses"].push_back({{"id", b.id}, {"ref", b.is_reference}, {"v", b.voltage_magnitude}});
  }
  doc["branches"] = nlohmann::ordered_json::array();
  for (const auto& br : c.network.branches()) {
    doc["branches"].push_back({{"from", br.from_bus},
                               {"to", br.to_bus},
                               {"r", br.resistance_r},
                               {"x", br.reactance_x},
                               {"gs", br.shunt_conductance_gs},
                               {"bs", br.shunt_susceptance_bs}});
  }
  doc["measurements"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < c.config.specs.size(); ++i) {
    const auto& s = c.config.specs[i];
    nlohmann::ordered_json jm;
    jm["kind"] = std::string(to_string(s.kind));
    if (is_branch_kind(s.kind)) {
      jm["from"] = s.from_bus;
      jm["to"] = s.to_bus;
    } else {
      jm["bus"] = s.bus;
    }
    jm["sigma"] = s.sigma;
    if (c.z) jm["value"] = (*c.z)(static_cast<Eigen::Index>(i));
    doc["measurements"].push_back(std::move(jm));
  }
  return doc.dump(2) + "\n";
}

AdmittanceMatrix build_admittance(const NetworkModel& network) {
  const auto n = static_cast<Eigen::Index>(network.bus_count());
  AdmittanceMatrix y{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
                     std::vector<std::vector<int>>(static_cast<std::size_t>(n))};
  for (const auto& br : network.branches()) {
    const auto ys = series_admittance(br);
    const Eigen::Index i = br.from_bus - 1;
    const Eigen::Index j = br.to_bus - 1;
    y.g(i, j) -= ys.real();
    y.g(j, i) -= ys.real();
    y.b(i, j) -= ys.imag();
    y.b(j, i) -= ys.imag();
    for (Eigen::Index end : {i, j}) {
      y.g(end, end) += ys.real() + br.shunt_conductance_gs;
      y.b(end, end) += ys.imag() + br.shunt_susceptance_bs;
    }
    y.neighbors[static_cast<std::size_t>(i)].push_back(br.to_bus);
    y.neighbors[static_cast<std::size_t>(j)].push_back(br.from_bus);
  }
  for (auto& adj : y.neighbors) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return y;
}

ObservabilityReport check_observability(const NetworkModel& network, const MeasurementConfig& config) {
  const auto h = dc_jacobian(network, config);
  ObservabilityReport report;
  report.rank = numerical_rank(h);
  report.observable = report.rank == network.dc_state_dim();
  return report;
}

}  // namespace gridse
