#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gridse {

using MeasurementVector = Eigen::VectorXd;
using JacobianMatrix = Eigen::MatrixXd;

struct Bus {
  int id = 0;
  bool is_reference = false;
  double voltage_magnitude = 1.0;  // pu; the fixed value used by the DC model
};

/// Pi-model branch. Shunt terms are per end.
struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double resistance_r = 0.0;
  double reactance_x = 0.0;
  double shunt_conductance_gs = 0.0;
  double shunt_susceptance_bs = 0.0;

  /// Series conductance of 1 / (r + jX).
  double series_g() const;
  /// Series susceptance of 1 / (r + jX); equals -1/X when r = 0.
  double series_b() const;
};

enum class MeasurementKind {
  FlowP,
  FlowQ,
  InjectionP,
  InjectionQ,
  CurrentMagnitude,
  VoltageMagnitude,
};

std::string_view to_string(MeasurementKind kind);
std::optional<MeasurementKind> parse_measurement_kind(std::string_view name);

/// True for the kinds located on a branch (flows and current).
bool is_branch_kind(MeasurementKind kind);

struct MeasurementSpec {
  MeasurementKind kind = MeasurementKind::FlowP;
  int bus = 0;        // injections and voltage magnitude
  int from_bus = 0;   // flows and current; orientation of the meter
  int to_bus = 0;
  double sigma = 0.0;
};

/// Meter list in file order; every measurement-indexed vector uses this order.
struct MeasurementConfig {
  std::vector<MeasurementSpec> specs;

  std::size_t size() const { return specs.size(); }
  Eigen::VectorXd sigmas() const;
};

/// A branch as seen from one of its ends.
struct OrientedBranch {
  std::size_t index = 0;
  bool reversed = false;  // true when the query ran to_bus -> from_bus
};

class NetworkModel {
 public:
  NetworkModel() = default;
  /// Validates and stores; buses are sorted by id. Throws gridse::Error.
  NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, double base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  double base_mva() const { return base_mva_; }

  std::size_t bus_count() const { return buses_.size(); }
  int reference_bus() const { return reference_bus_; }
  const Bus& bus(int id) const { return buses_.at(static_cast<std::size_t>(id - 1)); }
  bool has_bus(int id) const { return id >= 1 && static_cast<std::size_t>(id) <= buses_.size(); }

  /// Free angle column of a bus (non-reference buses ascending by id).
  std::optional<std::size_t> angle_column(int id) const;
  std::size_t dc_state_dim() const { return buses_.size() - 1; }
  std::size_t ac_state_dim() const { return 2 * buses_.size() - 1; }

  /// First branch joining the two buses, in either orientation.
  std::optional<OrientedBranch> find_branch(int from, int to) const;

 private:
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  double base_mva_ = 100.0;
  int reference_bus_ = 0;
};

/// Contents of a case file. `z` holds the meter values when every
/// measurement in the file carries one.
struct Case {
  NetworkModel network;
  MeasurementConfig config;
  std::optional<MeasurementVector> z;
};

/// Checks meter locations and sigmas against the network.
void validate_config(const NetworkModel& network, const MeasurementConfig& config);

Case parse_case(std::string_view text);
Case load_case(const std::filesystem::path& path);
std::string serialize_case(const Case& c);

struct AdmittanceMatrix {
  Eigen::MatrixXd g;
  Eigen::MatrixXd b;
  std::vector<std::vector<int>> neighbors;  // by bus position, ascending ids
};

AdmittanceMatrix build_admittance(const NetworkModel& network);

struct ObservabilityReport {
  std::size_t rank = 0;
  bool observable = false;
};

ObservabilityReport check_observability(const NetworkModel& network, const MeasurementConfig& config);

}  // namespace gridse
