#pragma once

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "nlforms/process.hpp"
#include "nlforms/qr.hpp"

namespace nlforms::cli {

/// Assembles the standard report envelope. Key order is lexicographic (the
/// JSON library sorts object keys), so identical inputs yield byte-identical
/// reports when the timestamp is suppressed.
nlohmann::json make_report(const std::string& command, nlohmann::json resolved_config,
                           nlohmann::json result, bool with_timestamp);

/// Writes to the path, or to stdout when path is empty.
void emit_report(const nlohmann::json& report, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

std::string matrix_to_csv(const Eigen::MatrixXd& m);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

std::string trajectory_to_csv(const Trajectory& traj);
std::string field_trajectory_to_csv(const FieldTrajectory& field, const Trajectory& traj);

nlohmann::json qr_report_to_json(const QRReport& rep);

}  // namespace nlforms::cli
