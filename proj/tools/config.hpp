#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nlforms/cylinder.hpp"
#include "nlforms/forms.hpp"
#include "nlforms/measures.hpp"

namespace nlforms::cli {

/// Schema violation carrying the offending field path.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error("config error at '" + field + "': " + what),
          field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

nlohmann::json load_config_file(const std::string& path);

// Field accessors that name the field on violation.
double require_number(const nlohmann::json& j, const std::string& field);
long require_integer(const nlohmann::json& j, const std::string& field);
std::string require_string(const nlohmann::json& j, const std::string& field);
const nlohmann::json& require_member(const nlohmann::json& j, const std::string& field);
std::vector<double> require_number_array(const nlohmann::json& j, const std::string& field);

/// {"type": "product"|"gaussian_spectral"|"phi4", ...}; see README for the
/// full schema. `where` prefixes field paths in error messages.
std::shared_ptr<MeasureBackend> parse_measure(const nlohmann::json& j, const std::string& where);

/// {"family": "constant"|"coordinate"|"bump_product"|"clipped_polynomial", ...}
CylinderFunction parse_function(const nlohmann::json& j, const std::string& where);

/// {"alpha": .., "profile": "fractional"|"stable", "mc_samples": ..,
///  "inner_samples": ..}; seed is injected from the command line.
FormConfig parse_form_config(const nlohmann::json& j, const std::string& where);

}  // namespace nlforms::cli
