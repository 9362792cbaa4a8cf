#include "config.hpp"

#include <fstream>

#include "nlforms/sequences.hpp"

namespace nlforms::cli {

using nlohmann::json;

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return j;
}

const json& require_member(const json& j, const std::string& field) {
    if (!j.is_object() || !j.contains(field)) throw ConfigError(field, "missing required field");
    return j.at(field);
}

double require_number(const json& j, const std::string& field) {
    const json& v = require_member(j, field);
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    return v.get<double>();
}

long require_integer(const json& j, const std::string& field) {
    const json& v = require_member(j, field);
    if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
    return v.get<long>();
}

std::string require_string(const json& j, const std::string& field) {
    const json& v = require_member(j, field);
    if (!v.is_string()) throw ConfigError(field, "expected a string");
    return v.get<std::string>();
}

std::vector<double> require_number_array(const json& j, const std::string& field) {
    const json& v = require_member(j, field);
    if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a non-empty array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(field, "expected numeric entries");
        out.push_back(e.get<double>());
    }
    return out;
}

std::shared_ptr<MeasureBackend> parse_measure(const json& j, const std::string& where) {
    const std::string type = require_string(j, "type");
    try {
        if (type == "product") {
            const json& ms = require_member(j, "marginals");
            if (!ms.is_array() || ms.empty())
                throw ConfigError(where + ".marginals", "expected a non-empty array");
            std::vector<Marginal1D> marginals;
            for (const auto& m : ms) {
                const std::string kind = require_string(m, "kind");
                if (kind == "gaussian") {
                    marginals.push_back(
                        GaussianMarginal{require_number(m, "mean"), require_number(m, "var")});
                } else if (kind == "uniform") {
                    marginals.push_back(
                        UniformMarginal{require_number(m, "a"), require_number(m, "b")});
                } else if (kind == "atoms") {
                    marginals.push_back(AtomsMarginal{require_number_array(m, "positions"),
                                                      require_number_array(m, "weights")});
                } else {
                    throw ConfigError(where + ".marginals.kind", "unknown kind '" + kind + "'");
                }
            }
            return std::make_shared<ProductMeasure>(std::move(marginals));
        }
        if (type == "gaussian_spectral") {
            Sequence variances;
            if (j.contains("variances_law")) {
                const PowerLaw law = parse_power_law(require_string(j, "variances_law"));
                variances = Sequence::from_power_law(law, require_integer(j, "n"));
            } else {
                variances = Sequence::from_values(require_number_array(j, "variances"));
            }
            return std::make_shared<GaussianSpectralMeasure>(std::move(variances));
        }
        if (type == "phi4") {
            LatticePhi4Measure::Params params;
            params.d = static_cast<int>(require_integer(j, "d"));
            params.eps = require_number(j, "eps");
            params.side = static_cast<int>(require_integer(j, "side"));
            params.a_eps = require_number(j, "a_eps");
            params.coupling = require_number(j, "coupling");
            const std::string boundary =
                j.contains("boundary") ? require_string(j, "boundary") : "free";
            if (boundary == "free")
                params.boundary = LatticeBoundary::free_ends;
            else if (boundary == "periodic")
                params.boundary = LatticeBoundary::periodic;
            else
                throw ConfigError(where + ".boundary", "expected 'free' or 'periodic'");
            if (j.contains("burn_in")) params.burn_in = require_integer(j, "burn_in");
            if (j.contains("thin")) params.thin = require_integer(j, "thin");
            return std::make_shared<LatticePhi4Measure>(params);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
    throw ConfigError(where + ".type", "unknown measure type '" + type + "'");
}

CylinderFunction parse_function(const json& j, const std::string& where) {
    const std::string family = require_string(j, "family");
    try {
        if (family == "constant") return CylinderFunction::constant(require_number(j, "value"));
        if (family == "coordinate")
            return CylinderFunction::coordinate(static_cast<int>(require_integer(j, "index")),
                                                require_number(j, "clip"));
        if (family == "bump_product") {
            const json& idx = require_member(j, "indices");
            if (!idx.is_array() || idx.empty())
                throw ConfigError(where + ".indices", "expected a non-empty array");
            std::vector<int> indices;
            for (const auto& e : idx) indices.push_back(e.get<int>());
            return CylinderFunction::bump_product(std::move(indices), require_number(j, "width"));
        }
        if (family == "clipped_polynomial")
            return CylinderFunction::clipped_polynomial(
                static_cast<int>(require_integer(j, "index")), require_number_array(j, "coeffs"),
                require_number(j, "clip"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
    throw ConfigError(where + ".family", "unknown function family '" + family + "'");
}

FormConfig parse_form_config(const json& j, const std::string& where) {
    FormConfig cfg;
    cfg.alpha = require_number(j, "alpha");
    const std::string profile = j.contains("profile") ? require_string(j, "profile") : "fractional";
    if (profile == "fractional")
        cfg.profile = KernelProfile::fractional;
    else if (profile == "stable")
        cfg.profile = KernelProfile::stable;
    else
        throw ConfigError(where + ".profile", "expected 'fractional' or 'stable'");
    if (j.contains("mc_samples")) cfg.mc_samples = require_integer(j, "mc_samples");
    if (j.contains("inner_samples")) cfg.inner_samples = require_integer(j, "inner_samples");
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
    return cfg;
}

}  // namespace nlforms::cli
