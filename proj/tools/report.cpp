#include "report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace nlforms::cli {

using nlohmann::json;

namespace {

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// JSON has no infinity literal; non-finite bounds become strings.
json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

json make_report(const std::string& command, json resolved_config, json result,
                 bool with_timestamp) {
    json report;
    report["command"] = command;
    report["config"] = std::move(resolved_config);
    report["result"] = std::move(result);
    if (with_timestamp) report["timestamp"] = iso_timestamp();
    return report;
}

void emit_report(const json& report, const std::string& path) {
    const std::string text = report.dump(2) + "\n";
    if (path.empty()) {
        std::cout << text;
        return;
    }
    write_text_file(path, text);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) {
            if (c > 0) out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::string out = "t,state\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        out += format_double(traj.jump_times[k]);
        out += ',';
        out += std::to_string(traj.states[k]);
        out += '\n';
    }
    return out;
}

std::string field_trajectory_to_csv(const FieldTrajectory& field, const Trajectory& traj) {
    std::string out = "t,state";
    const std::size_t arity = field.snapshots.empty() ? 0 : field.snapshots.front().coeffs.size();
    for (std::size_t j = 0; j < arity; ++j) out += ",x" + std::to_string(j);
    out += ",norm\n";
    for (std::size_t k = 0; k < field.snapshots.size(); ++k) {
        const auto& snap = field.snapshots[k];
        out += format_double(snap.t_begin);
        out += ',';
        out += std::to_string(traj.states[k]);
        for (double c : snap.coeffs) {
            out += ',';
            out += format_double(c);
        }
        out += ',';
        out += format_double(snap.norm);
        out += '\n';
    }
    return out;
}

json qr_report_to_json(const QRReport& rep) {
    json conditions = json::array();
    for (const auto& c : rep.conditions) {
        json jc;
        jc["id"] = c.id;
        jc["verdict"] = to_string(c.verdict);
        jc["partial_sum"] = c.partial_sum;
        jc["coefficient_partial_sum"] = c.coeff_partial;
        if (c.coeff_bracket) {
            jc["coefficient_sum_lo"] = finite_or_string(c.coeff_bracket->lo);
            jc["coefficient_sum_hi"] = finite_or_string(c.coeff_bracket->hi);
            jc["coefficient_sum_finite"] = c.coeff_bracket->finite;
        }
        if (c.summand_bracket) {
            jc["sum_lo"] = finite_or_string(c.summand_bracket->lo);
            jc["sum_hi"] = finite_or_string(c.summand_bracket->hi);
            jc["sum_finite"] = c.summand_bracket->finite;
        }
        if (c.fitted_exponent) jc["fitted_exponent"] = *c.fitted_exponent;
        if (c.empirical_max) jc["empirical_max"] = *c.empirical_max;
        jc["note"] = c.note;
        conditions.push_back(std::move(jc));
    }
    json out;
    out["conditions"] = std::move(conditions);
    out["verdict"] = to_string(rep.verdict);
    out["verdict_profile"] = to_string(rep.verdict_profile);
    out["alpha"] = rep.alpha;
    out["n"] = rep.n;
    out["p"] = rep.p;
    switch (rep.flavor) {
        case SpaceFlavor::lp: out["flavor"] = "lp"; break;
        case SpaceFlavor::linf: out["flavor"] = "linf"; break;
        case SpaceFlavor::product: out["flavor"] = "product"; break;
    }
    if (!rep.probe_m.empty()) {
        out["probe_m"] = rep.probe_m;
        out["probe_value"] = rep.probe_value;
    }
    if (rep.limsup_surrogate) out["limsup_surrogate"] = *rep.limsup_surrogate;
    return out;
}

}  // namespace nlforms::cli
