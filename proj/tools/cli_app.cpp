#include "cli_app.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "report.hpp"

#include "nlforms/forms.hpp"
#include "nlforms/generators.hpp"
#include "nlforms/process.hpp"
#include "nlforms/qr.hpp"

namespace nlforms::cli {

using nlohmann::json;

namespace {

bool log_enabled() {
    const char* level = std::getenv("NLFORMS_LOG");
    return level != nullptr && std::string(level) != "quiet";
}

void log_line(const std::string& msg) {
    if (log_enabled()) std::cerr << "[nlforms] " << msg << "\n";
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError(flag, "cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw ConfigError(flag, "empty list");
    return out;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--proposal", "cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_number_list(line, "--proposal"));
    }
    if (rows.empty()) throw ConfigError("--proposal", "empty matrix");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size())
            throw ConfigError("--proposal", "ragged matrix rows");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    }
    return m;
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string report_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool no_timestamp = false;
};

void emit(const CommonOpts& common, const std::string& command, json config, json result) {
    const json report =
        make_report(command, std::move(config), std::move(result), !common.no_timestamp);
    emit_report(report, common.report_path);
}

void write_artifact_matrix(const CommonOpts& common, const Eigen::MatrixXd& m) {
    if (common.out_path.empty()) return;
    if (common.format == "json") {
        json j;
        j["matrix"] = matrix_to_json(m);
        write_text_file(common.out_path, j.dump(2) + "\n");
    } else {
        write_text_file(common.out_path, matrix_to_csv(m));
    }
}

// --- commands -------------------------------------------------------------

int cmd_toy(const CommonOpts& common, double p, double t) {
    const ToyModel model = toy_model(p, t);
    write_artifact_matrix(common, model.mt_numeric);

    const Eigen::Vector2d mu(p, 1.0 - p);
    json result;
    result["generator"] = matrix_to_json(model.a);
    result["semigroup_closed_form"] = matrix_to_json(model.mt_closed);
    result["semigroup_numeric"] = matrix_to_json(model.mt_numeric);
    result["closed_vs_numeric_max_abs"] =
        (model.mt_closed - model.mt_numeric).cwiseAbs().maxCoeff();
    result["invariance_residual"] = check_invariance(mu, model.mt_numeric);
    result["row_sum_error"] =
        (model.mt_numeric.rowwise().sum() - Eigen::Vector2d::Ones()).cwiseAbs().maxCoeff();

    json config;
    config["p"] = p;
    config["t"] = t;
    config["out"] = common.out_path;
    emit(common, "toy", std::move(config), std::move(result));
    return 0;
}

int cmd_quantize(const CommonOpts& common, const std::string& mu_text,
                 const std::string& proposal_path) {
    const std::vector<double> mu_values = parse_number_list(mu_text, "--mu");
    const long n = static_cast<long>(mu_values.size());
    Eigen::VectorXd mu(n);
    for (long i = 0; i < n; ++i) mu(i) = mu_values[static_cast<std::size_t>(i)];

    Eigen::MatrixXd proposal;
    if (!proposal_path.empty()) {
        proposal = read_csv_matrix(proposal_path);
    } else if (n == 1) {
        proposal = Eigen::MatrixXd::Ones(1, 1);
    } else {
        proposal = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n - 1));
        proposal.diagonal().setZero();
    }

    Eigen::MatrixXd m;
    try {
        m = metropolis_quantize(mu, proposal);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("--mu/--proposal", e.what());
    }
    write_artifact_matrix(common, m);

    double balance = 0.0;
    for (long x = 0; x < n; ++x)
        for (long y = 0; y < n; ++y)
            balance = std::max(balance, std::abs(mu(x) * m(x, y) - mu(y) * m(y, x)));

    json result;
    result["markov_matrix"] = matrix_to_json(m);
    result["invariance_residual"] = check_invariance(mu, m);
    result["detailed_balance_residual"] = balance;

    json config;
    config["mu"] = mu_values;
    config["proposal"] = proposal_path.empty() ? json("uniform") : json(proposal_path);
    config["out"] = common.out_path;
    emit(common, "quantize", std::move(config), std::move(result));
    return 0;
}

int cmd_form_eval(const CommonOpts& common, bool dirichlet) {
    if (common.config_path.empty())
        throw ConfigError("--config", "form-eval requires a config file");
    const json cfg = load_config_file(common.config_path);

    const auto measure = parse_measure(require_member(cfg, "measure"), "measure");
    FormConfig form = parse_form_config(require_member(cfg, "form"), "form");
    form.seed = common.seed;

    const CylinderFunction u = parse_function(require_member(cfg, "u"), "u");

    FormEstimate estimate;
    if (dirichlet) {
        estimate = dirichlet_test(u, *measure, form);
    } else {
        const CylinderFunction v = parse_function(require_member(cfg, "v"), "v");
        estimate = form_total(u, v, *measure, form);
    }

    json result;
    result["value"] = estimate.value;
    result["standard_error"] = estimate.se;
    result["exact"] = estimate.exact;
    result["unbounded_kernel_warning"] = estimate.unbounded_kernel_warning;

    json config = cfg;
    config["seed"] = common.seed;
    config["dirichlet"] = dirichlet;
    emit(common, "form-eval", std::move(config), std::move(result));
    return 0;
}

struct QrOpts {
    std::string preset_name;
    std::string lambda_law = "i^-1";
    long n = 1000000;
    double alpha = 1.0;
    double m0 = 1.0;
    std::string tails = "unit";
    long samples = 1000;
    double density_bound_const = -1.0;
    long dyadic_cap = 1L << 20;
};

int cmd_qr_check(const CommonOpts& common, const QrOpts& opts) {
    QRInput input;
    json config;

    if (!opts.preset_name.empty()) {
        EigenSequence eig(Sequence::from_power_law(parse_power_law(opts.lambda_law), opts.n));
        input = preset(opts.preset_name, eig);
        config["preset"] = opts.preset_name;
        config["lambda"] = opts.lambda_law;
        config["n"] = opts.n;
    } else if (!common.config_path.empty()) {
        const json cfg = load_config_file(common.config_path);
        config = cfg;
        const json& jspace = require_member(cfg, "space");
        const std::string flavor = require_string(jspace, "flavor");
        const long n = require_integer(jspace, "n");
        Sequence weights = jspace.contains("weights_law")
                               ? Sequence::from_power_law(
                                     parse_power_law(require_string(jspace, "weights_law")), n)
                               : Sequence::from_values(require_number_array(jspace, "weights"));
        try {
            if (flavor == "lp")
                input.space = WeightedSpaceSpec::lp(require_number(jspace, "p"), weights);
            else if (flavor == "linf")
                input.space = WeightedSpaceSpec::linf(weights);
            else if (flavor == "product")
                input.space = WeightedSpaceSpec::product(n);
            else
                throw ConfigError("space.flavor", "expected lp, linf or product");
            input.gamma = cfg.contains("gamma_law")
                              ? Sequence::from_power_law(
                                    parse_power_law(require_string(cfg, "gamma_law")), n)
                              : Sequence::from_values(require_number_array(cfg, "gamma"));
            if (cfg.contains("measure")) {
                const auto measure = parse_measure(cfg.at("measure"), "measure");
                if (opts.tails == "closed-form")
                    input.tails = TailSource::closed_form(measure);
                else if (opts.tails == "empirical")
                    input.tails = TailSource::empirical(measure, opts.samples, common.seed);
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError("space/gamma", e.what());
        }
    } else {
        throw ConfigError("--preset/--config", "qr-check needs a preset or a config file");
    }

    input.alpha = opts.alpha;
    input.m0 = opts.m0;
    input.seed = common.seed;
    input.dyadic_cap = opts.dyadic_cap;
    if (opts.tails == "zero")
        input.tails = TailSource::zero();
    else if (opts.tails == "unit")
        input.tails = TailSource::unit();
    else if (opts.tails.rfind("power:", 0) == 0)
        input.tails = TailSource::synthetic_power(std::stod(opts.tails.substr(6)));
    else if (opts.tails == "closed-form" || opts.tails == "empirical") {
        if (!input.tails.has_sample_source())
            throw ConfigError("--tails", "'" + opts.tails + "' requires a measure in the config");
        if (opts.tails == "empirical" && !common.seed_given)
            throw ConfigError("--seed", "empirical tails require an explicit seed");
    } else {
        throw ConfigError("--tails", "unknown tail source '" + opts.tails + "'");
    }
    if (opts.density_bound_const >= 0.0)
        input.density_bounds = DensityBoundProvider::constant(opts.density_bound_const);

    QRReport report;
    try {
        if (input.alpha > 1.0)
            report = check_alpha_gt1(input);
        else if (input.space.flavor() == SpaceFlavor::linf)
            report = check_linf_case(input);
        else
            report = check_lp_case(input);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("qr-check", e.what());
    }

    std::cout << report.format_table();

    config["alpha"] = opts.alpha;
    config["m0"] = opts.m0;
    config["tails"] = opts.tails;
    config["seed"] = common.seed;
    const json jreport = make_report("qr-check", std::move(config), qr_report_to_json(report),
                                     !common.no_timestamp);
    if (!common.out_path.empty())
        write_text_file(common.out_path, jreport.dump(2) + "\n");
    else if (!common.report_path.empty())
        emit_report(jreport, common.report_path);

    switch (report.verdict) {
        case Verdict::pass: return 0;
        case Verdict::inconclusive: return 3;
        case Verdict::fail: return 4;
    }
    return 1;
}

struct Phi4Opts {
    int d = 1;
    int side = 16;
    double eps = 1.0;
    double a_eps = 1.0;
    double coupling = 0.0;
    std::string boundary = "free";
    long burn_in = 2000;
    long thin = 10;
    long draws = 100;
};

int cmd_phi4_sample(const CommonOpts& common, const Phi4Opts& opts) {
    LatticePhi4Measure::Params params;
    params.d = opts.d;
    params.side = opts.side;
    params.eps = opts.eps;
    params.a_eps = opts.a_eps;
    params.coupling = opts.coupling;
    params.burn_in = opts.burn_in;
    params.thin = opts.thin;
    if (opts.boundary == "free")
        params.boundary = LatticeBoundary::free_ends;
    else if (opts.boundary == "periodic")
        params.boundary = LatticeBoundary::periodic;
    else
        throw ConfigError("--boundary", "expected 'free' or 'periodic'");

    std::unique_ptr<LatticePhi4Measure> measure;
    try {
        measure = std::make_unique<LatticePhi4Measure>(params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("phi4-sample", e.what());
    }
    LatticeFieldSampler sampler(*measure, common.seed);
    log_line("burn-in done, proposal sd " + std::to_string(sampler.proposal_sd()));

    json fields = json::array();
    double mean = 0.0, mean_sq = 0.0;
    std::string csv;
    for (long k = 0; k < opts.draws; ++k) {
        const auto& phi = sampler.next();
        if (common.format == "json") {
            fields.push_back(phi);  // flat row-major site order
        } else {
            for (std::size_t s = 0; s < phi.size(); ++s) {
                if (s > 0) csv += ',';
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", phi[s]);
                csv += buf;
            }
            csv += '\n';
        }
        for (double v : phi) {
            mean += v;
            mean_sq += v * v;
        }
    }
    const double count = static_cast<double>(opts.draws) * static_cast<double>(measure->sites());
    mean /= count;
    mean_sq /= count;

    if (!common.out_path.empty()) {
        if (common.format == "json") {
            json j;
            j["fields"] = std::move(fields);
            write_text_file(common.out_path, j.dump() + "\n");
        } else {
            write_text_file(common.out_path, csv);
        }
    }

    json result;
    result["draws"] = opts.draws;
    result["sites"] = measure->sites();
    result["acceptance_rate"] = sampler.stats().acceptance();
    result["proposal_sd"] = sampler.proposal_sd();
    result["field_mean"] = mean;
    result["field_second_moment"] = mean_sq;

    json config;
    config["d"] = opts.d;
    config["side"] = opts.side;
    config["eps"] = opts.eps;
    config["a_eps"] = opts.a_eps;
    config["coupling"] = opts.coupling;
    config["boundary"] = opts.boundary;
    config["burn_in"] = opts.burn_in;
    config["thin"] = opts.thin;
    config["draws"] = opts.draws;
    config["seed"] = common.seed;
    config["out"] = common.out_path;
    emit(common, "phi4-sample", std::move(config), std::move(result));
    return 0;
}

struct SimulateOpts {
    double toy_p = -1.0;
    double horizon = 100.0;
    int x0 = 0;
    int level = 0;
    bool level_given = false;
    std::string lambda_law;
};

int cmd_simulate(const CommonOpts& common, const SimulateOpts& opts) {
    std::unique_ptr<DiscreteStateSpace> space;
    FormConfig form;
    json config;

    if (opts.toy_p > 0.0) {
        if (!(opts.toy_p < 1.0)) throw ConfigError("--toy-p", "p must be in (0, 1)");
        space = std::make_unique<DiscreteStateSpace>(
            std::vector<std::vector<double>>{{0.5}, {-0.5}},
            std::vector<double>{opts.toy_p, 1.0 - opts.toy_p});
        form.profile = KernelProfile::stable;
        config["toy_p"] = opts.toy_p;
    } else if (!common.config_path.empty()) {
        const json cfg = load_config_file(common.config_path);
        config = cfg;
        const json& jstates = require_member(cfg, "states");
        if (!jstates.is_array() || jstates.empty())
            throw ConfigError("states", "expected a non-empty array of points");
        std::vector<std::vector<double>> states;
        for (const auto& s : jstates) {
            if (s.is_number())
                states.push_back({s.get<double>()});
            else if (s.is_array()) {
                std::vector<double> pt;
                for (const auto& c : s) pt.push_back(c.get<double>());
                states.push_back(std::move(pt));
            } else
                throw ConfigError("states", "entries must be numbers or arrays");
        }
        const std::vector<double> mu = require_number_array(cfg, "mu");
        try {
            space = std::make_unique<DiscreteStateSpace>(std::move(states), mu);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("states/mu", e.what());
        }
        if (cfg.contains("form")) form = parse_form_config(cfg.at("form"), "form");
    } else {
        throw ConfigError("--toy-p/--config", "simulate needs a toy parameter or a config file");
    }

    if (opts.x0 < 0 || opts.x0 >= space->size())
        throw ConfigError("--x0", "initial state outside the state space");
    if (!(opts.horizon > 0.0)) throw ConfigError("--t-end", "horizon must be > 0");

    const GeneratorMatrix gen = build_generator(*space, form);
    const Trajectory traj = simulate(gen, opts.x0, opts.horizon, common.seed);
    const InvarianceCheck inv = empirical_invariance(traj, space->mu);

    if (!common.out_path.empty()) {
        if (opts.level_given) {
            if (opts.lambda_law.empty())
                throw ConfigError("--lambda", "field reconstruction needs an eigenvalue law");
            const EigenSequence eig(Sequence::from_power_law(parse_power_law(opts.lambda_law),
                                                             static_cast<long>(
                                                                 space->states.front().size())));
            const FieldTrajectory field = reconstruct_field(traj, *space, eig, opts.level);
            write_text_file(common.out_path, field_trajectory_to_csv(field, traj));
        } else {
            write_text_file(common.out_path, trajectory_to_csv(traj));
        }
    }

    json result;
    result["jumps"] = traj.jumps();
    result["occupation"] = occupation_measure(traj, space->size());
    result["tv_to_mu"] = inv.tv_distance;
    result["conclusive"] = inv.conclusive;

    config["t_end"] = opts.horizon;
    config["x0"] = opts.x0;
    config["seed"] = common.seed;
    config["out"] = common.out_path;
    emit(common, "simulate", std::move(config), std::move(result));
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Numerical laboratory for non-local Markovian symmetric forms on truncated "
                 "weighted sequence spaces"};
    app.require_subcommand(0, 1);
    app.fallthrough();  // global flags may follow the subcommand name

    CommonOpts common;
    app.add_option("--config", common.config_path, "JSON config file (schema in README)");
    app.add_option("--out", common.out_path, "artifact output path");
    app.add_option("--report", common.report_path, "JSON report path (default: stdout)");
    app.add_option("--format", common.format, "artifact format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = app.add_option("--seed", common.seed, "RNG seed (mandatory for randomized commands)");
    app.add_flag("--no-timestamp", common.no_timestamp, "omit the timestamp from reports");

    double toy_p = 0.5, toy_t = 1.0;
    auto* toy = app.add_subcommand("toy", "two-state reference model: generator and semigroup");
    toy->add_option("--p", toy_p, "stationary weight of the + state")->required();
    toy->add_option("--t", toy_t, "time argument of the semigroup")->required();

    std::string mu_text, proposal_path;
    auto* quantize =
        app.add_subcommand("quantize", "Markov matrix with the prescribed invariant vector");
    quantize->add_option("--mu", mu_text, "comma-separated stationary weights")->required();
    quantize->add_option("--proposal", proposal_path, "CSV symmetric proposal matrix");

    bool dirichlet = false;
    auto* form_eval = app.add_subcommand("form-eval", "evaluate the bilinear form from a config");
    form_eval->add_flag("--dirichlet", dirichlet, "test the form against the constant 1");

    QrOpts qr;
    auto* qr_check = app.add_subcommand("qr-check", "summability conditions for quasi-regularity");
    qr_check->add_option("--preset", qr.preset_name, "parameter preset: example0 or example1");
    qr_check->add_option("--lambda", qr.lambda_law, "eigenvalue law, e.g. \"i^-1\"");
    qr_check->add_option("--n", qr.n, "truncation length");
    qr_check->add_option("--alpha", qr.alpha, "order in (0, 2)");
    qr_check->add_option("--m0", qr.m0, "threshold constant");
    qr_check->add_option("--tails", qr.tails,
                         "tail source: unit, zero, power:K, closed-form, empirical");
    qr_check->add_option("--samples", qr.samples, "draw count for empirical tails");
    qr_check->add_option("--density-bound", qr.density_bound_const,
                         "constant density bound for the order > 1 route");
    qr_check->add_option("--dyadic-cap", qr.dyadic_cap, "largest M probed on the dyadic grid");

    Phi4Opts phi4;
    auto* phi4_sample = app.add_subcommand("phi4-sample", "draw lattice fields by Metropolis");
    phi4_sample->add_option("--d", phi4.d, "lattice dimension (1-3)");
    phi4_sample->add_option("--side", phi4.side, "sites per axis");
    phi4_sample->add_option("--eps", phi4.eps, "lattice spacing");
    phi4_sample->add_option("--a-eps", phi4.a_eps, "mass counter term");
    phi4_sample->add_option("--coupling", phi4.coupling, "quartic coupling");
    phi4_sample->add_option("--boundary", phi4.boundary, "free or periodic");
    phi4_sample->add_option("--burn-in", phi4.burn_in, "burn-in sweeps");
    phi4_sample->add_option("--thin", phi4.thin, "sweeps between draws");
    phi4_sample->add_option("--draws", phi4.draws, "number of fields to draw");

    SimulateOpts sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "jump-process trajectory from a generator");
    simulate_cmd->add_option("--toy-p", sim.toy_p, "use the two-state model with this p");
    simulate_cmd->add_option("--t-end", sim.horizon, "time horizon")->required();
    simulate_cmd->add_option("--x0", sim.x0, "initial state index");
    auto* level_opt =
        simulate_cmd->add_option("--level", sim.level, "reconstruction level for field output");
    simulate_cmd->add_option("--lambda", sim.lambda_law, "eigenvalue law for field output");

    std::vector<const char*> argv;
    argv.push_back("nlforms");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    common.seed_given = seed_opt->count() > 0;
    sim.level_given = level_opt->count() > 0;

    try {
        if (app.got_subcommand(toy)) return cmd_toy(common, toy_p, toy_t);
        if (app.got_subcommand(quantize)) return cmd_quantize(common, mu_text, proposal_path);
        if (app.got_subcommand(form_eval)) {
            if (!common.seed_given)
                throw ConfigError("--seed", "form-eval is randomized and requires a seed");
            return cmd_form_eval(common, dirichlet);
        }
        if (app.got_subcommand(qr_check)) return cmd_qr_check(common, qr);
        if (app.got_subcommand(phi4_sample)) {
            if (!common.seed_given)
                throw ConfigError("--seed", "phi4-sample is randomized and requires a seed");
            return cmd_phi4_sample(common, phi4);
        }
        if (app.got_subcommand(simulate_cmd)) {
            if (!common.seed_given)
                throw ConfigError("--seed", "simulate is randomized and requires a seed");
            return cmd_simulate(common, sim);
        }
        std::cout << app.help();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace nlforms::cli
