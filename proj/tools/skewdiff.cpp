#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "skewdiff/config.hpp"
#include "skewdiff/densities.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/functionals.hpp"
#include "skewdiff/homogenize.hpp"
#include "skewdiff/io.hpp"
#include "skewdiff/network.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/paths.hpp"
#include "skewdiff/pde.hpp"
#include "skewdiff/verify.hpp"

#ifndef SKEWDIFF_VERSION
#define SKEWDIFF_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace skewdiff;

namespace {

// One configurable value: `--flag` on the command line, `key` in `[section]` of the config file.
struct Param {
    std::string section;
    std::string key;
    std::string fallback;  // empty: no default
    std::string help;
    std::string flag = {};  // defaults to the key with '-' for '_'
};

const std::vector<Param> kMediumPair{
    {"medium", "d_plus", "", "diffusivity on x > 0"},
    {"medium", "d_minus", "", "diffusivity on x <= 0"},
    {"medium", "lambda", "", "interface parameter (default: conservative D+/(D+ + D-))"},
};

const std::vector<Param> kSim{
    {"sim", "n_paths", "1000", "number of paths"},
    {"sim", "dt", "0.001", "time step"},
    {"sim", "horizon", "1", "final time"},
    {"sim", "seed", "1", "random seed"},
};

std::vector<Param> concat(std::initializer_list<std::vector<Param>> parts) {
    std::vector<Param> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// Resolved run configuration: file values, overridden by flags, completed with defaults.
class Run {
public:
    Run(std::string command, std::vector<Param> params) : command_(std::move(command)), params_(std::move(params)) {
        values_.resize(params_.size());
    }

    void bind(CLI::App* app) {
        app->add_option("--config", config_path_, "sectioned key-value config file");
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            if (p.flag.empty()) {
                p.flag = p.key;
                std::replace(p.flag.begin(), p.flag.end(), '_', '-');
            }
            std::string help = p.help + "  [" + p.section + "] " + p.key;
            if (!p.fallback.empty()) help += " (default " + p.fallback + ")";
            options_.push_back(app->add_option("--" + p.flag, values_[i], help)->allow_extra_args(false));
        }
    }

    void resolve() {
        if (!config_path_.empty()) doc_ = ConfigDoc::load(config_path_);
        std::map<std::string, std::set<std::string>> allowed;
        for (const auto& p : params_) allowed[p.section].insert(p.key);
        doc_.reject_unknown(allowed);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const auto& p = params_[i];
            if (options_[i]->count() > 0)
                doc_.set(p.section, p.key, values_[i]);
            else if (!doc_.has(p.section, p.key) && !p.fallback.empty())
                doc_.set(p.section, p.key, p.fallback);
        }
    }

    const ConfigDoc& doc() const noexcept { return doc_; }
    const std::string& command() const noexcept { return command_; }

    Json resolved() const {
        Json out = Json::object();
        for (const auto& [section, entries] : doc_.sections())
            for (const auto& [key, value] : entries) out[section][key] = value;
        return out;
    }

private:
    std::string command_;
    std::vector<Param> params_;
    std::vector<std::string> values_;
    std::vector<CLI::Option*> options_;
    std::string config_path_;
    ConfigDoc doc_;
};

struct Output {
    fs::path dir;
    std::vector<std::pair<fs::path, std::string>> files;

    void add(const std::string& name, std::string content) { files.emplace_back(dir / name, std::move(content)); }
    void flush() const {
        for (const auto& [path, content] : files) write_file_atomic(path, content);
    }
};

bool get_bool(const ConfigDoc& doc, const std::string& section, const std::string& key) {
    const auto v = doc.get(section, key).value_or("false");
    if (v != "true" && v != "false") throw ConfigError(section + "." + key + " must be true or false");
    return v == "true";
}

std::size_t get_count(const ConfigDoc& doc, const std::string& section, const std::string& key) {
    const long long n = doc.get_int(section, key, 0);
    if (n <= 0) throw ConfigError(section + "." + key + " must be positive");
    return static_cast<std::size_t>(n);
}

std::uint64_t get_seed(const ConfigDoc& doc) {
    const long long s = doc.get_int("sim", "seed", 0);
    if (s < 0) throw ConfigError("sim.seed must be nonnegative");
    return static_cast<std::uint64_t>(s);
}

InterfaceMedium medium_of(const ConfigDoc& doc) {
    const double dp = doc.require_double("medium", "d_plus");
    const double dm = doc.require_double("medium", "d_minus");
    if (doc.has("medium", "lambda")) return InterfaceMedium(dp, dm, doc.require_double("medium", "lambda"));
    return InterfaceMedium::conservative(dp, dm);
}

Json medium_json(const InterfaceMedium& m) {
    return {{"d_plus", m.d_plus()}, {"d_minus", m.d_minus()}, {"lambda", m.lambda()}, {"alpha", alpha_of_lambda(m)}};
}

SimConfig sim_of(const ConfigDoc& doc) {
    SimConfig c;
    c.n_paths = get_count(doc, "sim", "n_paths");
    c.dt = doc.require_double("sim", "dt");
    c.horizon = doc.require_double("sim", "horizon");
    c.seed = get_seed(doc);
    if (doc.has("sim", "x0")) c.x0 = doc.require_double("sim", "x0");
    if (const auto s = doc.get("sim", "scheme")) {
        if (*s == "exact")
            c.scheme = Scheme::exact_step;
        else if (*s == "euler")
            c.scheme = Scheme::euler_transformed;
        else
            throw ConfigError("sim.scheme must be exact or euler");
    }
    c.validate();
    return c;
}

std::vector<double> range_of(const ConfigDoc& doc, const std::string& section, const std::string& key) {
    const auto v = doc.get(section, key);
    if (!v) throw ConfigError("missing " + section + "." + key);
    return parse_range(*v, section + "." + key);
}

Json estimate_json(const Estimate& e) { return {{"value", e.value}, {"halfwidth", e.halfwidth}}; }

std::string csv(std::initializer_list<std::string_view> header) {
    std::string out;
    for (auto h : header) {
        if (!out.empty()) out += ',';
        out += h;
    }
    return out + '\n';
}

void row(std::string& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out += ',';
        out += format_double(v);
        first = false;
    }
    out += '\n';
}

// ---- density ----

Json cmd_density(const Run& run, Output& out) {
    const auto& doc = run.doc();
    const auto m = medium_of(doc);
    const double t = doc.require_double("density", "t");
    const double x = doc.require_double("density", "x");
    const auto ys = range_of(doc, "density", "y_grid");
    std::string text = csv({"y", "p"});
    std::vector<double> ps;
    for (double y : ys) {
        ps.push_back(skew_diffusion_density(m, t, x, y));
        row(text, {y, ps.back()});
    }
    // Trapezoid rule on each side; the interval straddling 0 is split there using the
    // one-sided limits, since p jumps at the interface.
    const double p_left = skew_diffusion_density(m, t, x, 0.0);
    const double p_right = skew_diffusion_density(m, t, x, std::nextafter(0.0, 1.0));
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
        const double lo = ys[i], hi = ys[i + 1];
        if (hi <= 0.0)
            minus += 0.5 * (hi - lo) * (ps[i] + ps[i + 1]);
        else if (lo >= 0.0)
            plus += 0.5 * (hi - lo) * ((lo == 0.0 ? p_right : ps[i]) + ps[i + 1]);
        else {
            minus += 0.5 * -lo * (ps[i] + p_left);
            plus += 0.5 * hi * (p_right + ps[i + 1]);
        }
    }
    const double total = plus + minus;
    out.add("density.csv", std::move(text));
    return {{"medium", medium_json(m)},
            {"t", t},
            {"x", x},
            {"points", ys.size()},
            {"numeric_mass", total},
            {"numeric_mass_plus", plus},
            {"exact_mass_plus", half_line_mass(m, t, x, Side::plus)},
            {"exact_mass_plus_within_grid",
             ys.back() > 0.0 ? skew_diffusion_cdf(m, t, x, ys.back()) - skew_diffusion_cdf(m, t, x, std::max(0.0, ys.front())) : 0.0}};
}

// ---- sample ----

Json cmd_sample(const Run& run, Output& out) {
    const auto& doc = run.doc();
    const auto config = sim_of(doc);
    std::vector<PathSample> paths;
    Json medium;
    if (doc.has("medium", "interfaces")) {
        for (const char* k : {"d_plus", "d_minus", "lambda"})
            if (doc.has("medium", k)) throw ConfigError(std::string("medium.") + k + " cannot be combined with medium.interfaces");
        const MultiMedium mm(doc.get_doubles("medium", "interfaces"), doc.get_doubles("medium", "diffusivities"));
        paths = simulate_multi(mm, config);
        medium = {{"interfaces", doc.get_doubles("medium", "interfaces")},
                  {"diffusivities", doc.get_doubles("medium", "diffusivities")}};
    } else {
        const auto m = medium_of(doc);
        paths = simulate_skew_diffusion(m, config);
        medium = medium_json(m);
    }
    std::string text = csv({"path_id", "t", "x"});
    std::size_t positive = 0;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t k = 0; k < paths[p].size(); ++k) {
            text += std::to_string(p);
            text += ',';
            row(text, {paths[p].times[k], paths[p].positions[k]});
        }
        positive += paths[p].positions.back() > 0.0;
    }
    out.add("paths.csv", std::move(text));
    return {{"medium", medium},
            {"n_paths", config.n_paths},
            {"steps", config.n_steps()},
            {"fraction_positive_at_horizon", estimate_json(proportion(positive, config.n_paths))}};
}

// ---- functionals ----

Json report(const std::string& op, Json params, Json estimate, Json ci, std::optional<bool> verdict) {
    Json r{{"op", op}, {"params", std::move(params)}, {"estimate", std::move(estimate)}, {"ci", std::move(ci)}};
    r["verdict"] = verdict ? (*verdict ? "pass" : "fail") : Json(nullptr);
    return r;
}

Json cmd_exit(const Run& run, Output&) {
    const auto& doc = run.doc();
    const auto m = medium_of(doc);
    const double a = doc.require_double("exit", "a");
    const double x = doc.require_double("exit", "x");
    const double b = doc.require_double("exit", "b");
    const auto an = exit_stats_analytic(m, a, x, b);
    Json params{{"medium", medium_json(m)}, {"a", a}, {"x", x}, {"b", b}};
    Json analytic{{"p_exit_left", an.p_exit_left}, {"p_exit_right", an.p_exit_right}, {"mean_exit_time", an.mean_exit_time}};
    if (!get_bool(doc, "exit", "mc"))
        return report("exit_stats", params, analytic, {{"p_exit_left", 0.0}, {"mean_exit_time", 0.0}}, std::nullopt);
    const auto mc = exit_stats_mc(m, a, x, b, sim_of(doc));
    const bool ok = std::abs(mc.p_exit_left - an.p_exit_left) <= mc.ci_p &&
                    std::abs(mc.mean_exit_time - an.mean_exit_time) <= mc.ci_time;
    auto r = report("exit_stats", params,
                    {{"p_exit_left", mc.p_exit_left}, {"p_exit_right", mc.p_exit_right}, {"mean_exit_time", mc.mean_exit_time}},
                    {{"p_exit_left", mc.ci_p}, {"mean_exit_time", mc.ci_time}}, ok);
    r["analytic"] = analytic;
    return r;
}

Json cmd_survival(const Run& run, Output& out) {
    const auto& doc = run.doc();
    const auto m = medium_of(doc);
    const double x0 = doc.require_double("survival", "x0");
    const double level = doc.require_double("survival", "level");
    const auto grid = range_of(doc, "survival", "t_grid");
    const auto curve = first_passage_survival(m, x0, level, grid, sim_of(doc));
    std::string text = csv({"t", "survival", "halfwidth"});
    for (std::size_t i = 0; i < grid.size(); ++i) row(text, {grid[i], curve.survival[i], curve.halfwidth[i]});
    out.add("survival.csv", std::move(text));
    auto r = report("first_passage_survival", {{"medium", medium_json(m)}, {"x0", x0}, {"level", level}}, curve.survival,
                    curve.halfwidth, std::nullopt);
    r["monotonicity_violation"] = curve.monotonicity_violation;
    return r;
}

Json cmd_passage(const Run& run, Output& out) {
    const auto& doc = run.doc();
    const auto m = medium_of(doc);
    const double y = doc.require_double("passage", "y");
    const double factor = doc.has("passage", "factor") ? doc.require_double("passage", "factor")
                                                       : std::sqrt(m.d_minus() / m.d_plus());
    const auto grid = range_of(doc, "passage", "t_grid");
    const auto rows = passage_ordering(m, y, factor, grid, sim_of(doc));
    std::string text = csv({"t", "from_minus", "from_minus_hw", "from_plus", "from_plus_hw"});
    bool all = true;
    Json est = Json::array(), ci = Json::array();
    for (const auto& r : rows) {
        row(text, {r.t, r.from_minus.value, r.from_minus.halfwidth, r.from_plus.value, r.from_plus.halfwidth});
        all = all && r.bound_separated;
        est.push_back({{"t", r.t}, {"from_minus", r.from_minus.value}, {"from_plus", r.from_plus.value}});
        ci.push_back({{"from_minus", r.from_minus.halfwidth}, {"from_plus", r.from_plus.halfwidth}});
    }
    out.add("passage.csv", std::move(text));
    return report("passage_ordering", {{"medium", medium_json(m)}, {"y", y}, {"factor", factor}}, est, ci, all);
}

Json cmd_occupation(const Run& run, Output& out) {
    const auto& doc = run.doc();
    const double dp = doc.require_double("medium", "d_plus");
    const double dm = doc.require_double("medium", "d_minus");
    std::vector<InterfaceMedium> media;
    for (double l : doc.get_doubles("occupation", "lambdas")) media.emplace_back(dp, dm, l);
    if (media.empty()) throw ConfigError("occupation.lambdas is empty");
    const auto rows = occupation_balance_report(media, sim_of(doc));
    std::string text = csv({"lambda", "alpha", "gamma_plus", "gamma_plus_hw", "difference", "difference_hw", "expected_sign"});
    bool all = true;
    Json est = Json::array(), ci = Json::array();
    for (const auto& r : rows) {
        row(text, {r.lambda, r.alpha, r.plus.value, r.plus.halfwidth, r.difference.value, r.difference.halfwidth,
                   static_cast<double>(r.expected_sign)});
        all = all && r.sign_consistent && r.plus_matches_alpha_t;
        est.push_back({{"lambda", r.lambda}, {"gamma_plus", r.plus.value}, {"difference", r.difference.value},
                       {"expected_sign", r.expected_sign}, {"sign_consistent", r.sign_consistent},
                       {"gamma_plus_matches_alpha_t", r.plus_matches_alpha_t}});
        ci.push_back({{"gamma_plus", r.plus.halfwidth}, {"difference", r.difference.halfwidth}});
    }
    out.add("occupation.csv", std::move(text));
    return report("occupation_balance", {{"d_plus", dp}, {"d_minus", dm}, {"threshold", conservative_alpha(dp, dm)}}, est, ci, all);
}

Json cmd_localtime(const Run& run, Output& out) {
    const auto& doc = run.doc();
    const auto m = medium_of(doc);
    const auto eps = doc.get_doubles("localtime", "epsilons");
    if (eps.empty()) throw ConfigError("localtime.epsilons is empty");
    const auto config = sim_of(doc);
    const auto study = local_time_study(m, eps, config);
    std::string text = csv({"epsilon", "l_plus", "l_plus_hw", "l_minus", "l_minus_hw", "ratio", "ratio_hw",
                            "exact_ratio", "semimartingale_ratio", "semimartingale_ratio_hw"});
    Json est = Json::array(), ci = Json::array();
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const auto& n = study.natural[k];
        const auto exact = expected_local_time(m, config.x0, config.horizon, eps[k]);
        const auto& s = study.semimartingale_ratio[k];
        row(text, {eps[k], n.l_plus.value, n.l_plus.halfwidth, n.l_minus.value, n.l_minus.halfwidth, n.ratio.value,
                   n.ratio.halfwidth, exact.ratio.value, s.value, s.halfwidth});
        est.push_back({{"epsilon", eps[k]}, {"l_plus", n.l_plus.value}, {"l_minus", n.l_minus.value},
                       {"ratio", n.ratio.value}, {"exact_ratio", exact.ratio.value}, {"semimartingale_ratio", s.value}});
        ci.push_back({{"l_plus", n.l_plus.halfwidth}, {"l_minus", n.l_minus.halfwidth}, {"ratio", n.ratio.halfwidth},
                      {"semimartingale_ratio", s.halfwidth}});
    }
    out.add("localtime.csv", std::move(text));
    return report("natural_local_time", {{"medium", medium_json(m)}, {"x0", config.x0}, {"t", config.horizon}}, est, ci,
                  std::nullopt);
}

// ---- pde ----

PdeMedium pde_medium_of(const ConfigDoc& doc, Json& info) {
    const auto preset = doc.get("medium", "preset").value_or("none");
    if (preset == "heat") {
        const auto m = preset_heat_conduction(doc.require_double("medium", "kappa_plus"), doc.require_double("medium", "kappa_minus"),
                                              doc.require_double("medium", "rho_plus"), doc.require_double("medium", "rho_minus"));
        info = medium_json(m);
        return PdeMedium::from(m);
    }
    if (preset == "atw") {
        const auto m = preset_atw(doc.require_double("medium", "r"), doc.require_double("medium", "f"),
                                  doc.require_double("medium", "h_plus"), doc.require_double("medium", "h_minus"));
        info = medium_json(m);
        return PdeMedium::from(m);
    }
    if (preset != "none") throw ConfigError("medium.preset must be heat or atw");
    if (doc.has("medium", "interfaces")) {
        const MultiMedium mm(doc.get_doubles("medium", "interfaces"), doc.get_doubles("medium", "diffusivities"));
        auto pm = doc.has("medium", "lambdas") ? PdeMedium::from(mm, doc.get_doubles("medium", "lambdas")) : PdeMedium::from(mm);
        info = {{"interfaces", pm.interfaces}, {"diffusivities", pm.diffusivities}, {"lambdas", pm.lambdas}};
        return pm;
    }
    const auto m = medium_of(doc);
    info = medium_json(m);
    return PdeMedium::from(m);
}

Boundary boundary_of(const ConfigDoc& doc, const std::string& side) {
    const auto kind = doc.get("grid", side).value_or("neumann");
    Boundary b;
    if (kind == "neumann")
        b.type = BoundaryType::neumann_zero;
    else if (kind == "dirichlet")
        b.type = BoundaryType::dirichlet_zero;
    else if (kind == "value") {
        b.type = BoundaryType::value;
        b.value = doc.require_double("grid", side + "_value");
    } else
        throw ConfigError("grid." + side + " must be neumann, dirichlet or value");
    return b;
}

TimeScheme time_scheme_of(const ConfigDoc& doc) {
    const auto s = doc.get("grid", "scheme").value_or("implicit");
    if (s == "implicit") return TimeScheme::implicit;
    if (s == "cn") return TimeScheme::crank_nicolson;
    if (s == "explicit") return TimeScheme::explicit_euler;
    throw ConfigError("grid.scheme must be implicit, cn or explicit");
}

Json cmd_pde(const Run& run, Output& out) {
    const auto& doc = run.doc();
    Json info;
    const auto medium = pde_medium_of(doc, info);
    const Grid grid(doc.require_double("grid", "x_min"), doc.require_double("grid", "x_max"), doc.require_double("grid", "dx"),
                    medium.interfaces);
    const BoundaryConditions bc{boundary_of(doc, "left"), boundary_of(doc, "right")};
    PdeOptions opt;
    opt.scheme = time_scheme_of(doc);
    opt.drift = doc.get_double("grid", "drift", 0.0);
    if (doc.has("grid", "snapshots")) opt.snapshot_times = doc.get_doubles("grid", "snapshots");
    const auto sol = solve_interface_pde(medium, grid, bc, delta_initial(grid, doc.require_double("grid", "x0")),
                                         doc.require_double("grid", "t_end"), doc.require_double("grid", "dt"), opt);
    out.add("solution.csv", solution_csv(sol));
    Json r{{"medium", info},
           {"grid", {{"x_min", grid.x_min()}, {"x_max", grid.x_max()}, {"nodes", grid.size()}}},
           {"scheme", doc.get("grid", "scheme").value_or("implicit")},
           {"dt", sol.dt},
           {"steps", sol.steps},
           {"t_snapshots", sol.t_snapshots},
           {"mass", sol.mass},
           {"max_step_mass_drift", sol.max_step_mass_drift},
           {"boundary_leakage", sol.boundary_leakage}};
    if (doc.has("grid", "observe")) {
        const double x_obs = doc.require_double("grid", "observe");
        const auto curve = breakthrough_curve(sol, x_obs);
        std::string text = csv({"t", "u"});
        for (std::size_t i = 0; i < curve.size(); ++i) row(text, {sol.t_snapshots[i], curve[i]});
        out.add("breakthrough.csv", std::move(text));
        r["breakthrough_x"] = x_obs;
    }
    return r;
}

// ---- homogenize ----

Json cmd_homogenize(const Run& run, Output& out) {
    const auto& doc = run.doc();
    const auto cs = cross_section_from_config(doc);
    const auto d = effective_dispersion(cs);
    std::string text = csv({"layer", "lo", "hi", "d1", "d2", "longitudinal", "shear"});
    Json terms = Json::array();
    for (std::size_t k = 0; k < d.terms.size(); ++k) {
        row(text, {static_cast<double>(k), cs.layer_bounds[k], cs.layer_bounds[k + 1], cs.d1[k], cs.d2[k],
                   d.terms[k].longitudinal, d.terms[k].shear});
        terms.push_back({{"longitudinal", d.terms[k].longitudinal}, {"shear", d.terms[k].shear}});
    }
    out.add("layers.csv", std::move(text));
    Json r{{"d_bar", d.d_bar}, {"v_bar", d.v_bar}, {"terms_per_layer", terms}, {"quadrature_error", d.quadrature_error}};
    if (get_bool(doc, "homogenize", "mc")) {
        const auto est = mc_longtime_variance(cs, sim_of(doc));
        r["mc_longtime"] = {{"estimate", estimate_json(est)}, {"relative_difference", (est.value - d.d_bar) / d.d_bar}};
    }
    return r;
}

// ---- network ----

NetworkPosition start_of(const RiverNetwork& net, const ConfigDoc& doc) {
    const auto id = doc.get("network", "start_edge");
    if (!id) throw ConfigError("missing network.start_edge");
    return {net.index(*id), doc.require_double("network", "start_x")};
}

std::string load_network_text(const ConfigDoc& doc) {
    const auto file = doc.get("network", "file");
    if (!file) throw ConfigError("missing network.file");
    return read_file(*file);
}

Json network_common(const RiverNetwork& net) {
    Json edges = Json::array();
    for (const auto& e : net.edges())
        edges.push_back({{"id", e.id}, {"parent", e.parent_id}, {"length", e.length}, {"velocity", e.velocity},
                         {"area", e.area}, {"diffusivity", e.diffusivity}});
    return {{"edges", edges}, {"discharge_warnings", net.discharge_warnings()}};
}

Json histogram_summary(const NetworkHistogram& h) {
    return {{"samples", h.total}, {"absorbed", h.absorbed},
            {"absorbed_fraction", static_cast<double>(h.absorbed) / static_cast<double>(h.total)}, {"bin_width", h.bin_width}};
}

Json cmd_network(const Run& run, Output& out, const std::string& mode) {
    const auto& doc = run.doc();
    const auto net = RiverNetwork::parse(load_network_text(doc));
    for (const auto& w : net.discharge_warnings()) std::cerr << "warning: discharge not balanced at junction below " << w << '\n';
    Json r = network_common(net);
    const double bin = doc.require_double("network", "bin_width");
    if (mode == "kernel") {
        const double sigma = doc.require_double("network", "sigma");
        const auto h = dispersal_kernel_mc(net, start_of(net, doc), sigma, sim_of(doc), bin);
        out.add("kernel.csv", histogram_csv(net, h));
        r["kernel"] = histogram_summary(h);
        r["sigma"] = sigma;
    } else if (mode == "terminal") {
        const auto h = terminal_histogram(net, start_of(net, doc), sim_of(doc), bin);
        out.add("terminal.csv", histogram_csv(net, h));
        r["terminal"] = histogram_summary(h);
    } else if (mode == "junction") {
        const auto id = doc.get("network", "junction_edge");
        if (!id) throw ConfigError("missing network.junction_edge");
        const auto f = junction_exit_frequencies(net, net.index(*id), doc.require_double("network", "eps"), sim_of(doc));
        std::string text = csv({"edge_id", "frequency", "halfwidth", "expected"});
        Json rows = Json::array();
        bool all = true;
        for (std::size_t k = 0; k < f.edges.size(); ++k) {
            text += net.edge(f.edges[k]).id + ',';
            row(text, {f.frequency[k].value, f.frequency[k].halfwidth, f.expected[k]});
            all = all && f.frequency[k].contains(f.expected[k]);
            rows.push_back({{"edge", net.edge(f.edges[k]).id}, {"frequency", estimate_json(f.frequency[k])}, {"expected", f.expected[k]}});
        }
        out.add("junction.csv", std::move(text));
        r["junction"] = {{"frequencies", rows}, {"verdict", all ? "pass" : "fail"}};
    } else {
        const auto start = start_of(net, doc);
        const auto config = sim_of(doc);
        const auto sol = network_pde_crosscheck(net, start, config.horizon, doc.require_double("grid", "dx"),
                                                doc.require_double("grid", "dt"));
        auto h = terminal_histogram(net, start, config, bin);
        const auto probs = bin_probabilities(sol, h);
        std::vector<double> counts;
        for (double m : h.masses()) counts.push_back(m * static_cast<double>(h.total));
        const auto chi = chi_square_test(counts, probs);
        std::string text = csv({"edge_id", "x_bin_center", "mc_mass", "pde_mass"});
        std::size_t k = 0;
        const auto masses = h.masses();
        for (std::size_t e = 0; e < h.centers.size(); ++e)
            for (double c : h.centers[e]) {
                text += net.edge(static_cast<int>(e)).id + ',';
                row(text, {c, masses[k], probs[k]});
                ++k;
            }
        text += "ABSORBED,,";
        row(text, {masses.back(), probs.back()});
        out.add("crosscheck.csv", std::move(text));
        r["crosscheck"] = {{"mc", histogram_summary(h)},
                           {"pde_absorbed", sol.absorbed.back()},
                           {"pde_mass_balance_error", sol.max_mass_balance_error},
                           {"chi2", chi.statistic},
                           {"dof", chi.dof},
                           {"p_value", chi.p_value},
                           {"verdict", chi.p_value > 0.001 ? "pass" : "fail"}};
    }
    return r;
}

// ---- verify ----

int cmd_verify(const Run& run, Json& results) {
    const auto& doc = run.doc();
    VerifyOptions opts;
    opts.seed = static_cast<std::uint64_t>(doc.get_int("verify", "seed", static_cast<long long>(opts.seed)));
    opts.scale = doc.get_double("verify", "scale", opts.scale);
    if (!(opts.scale > 0.0)) throw ConfigError("verify.scale must be positive");
    opts.slow = get_bool(doc, "verify", "slow");
    opts.repro_scale = doc.get_double("verify", "repro_scale", opts.repro_scale);
    opts.repro_threads = static_cast<int>(doc.get_int("verify", "repro_threads", opts.repro_threads));
    std::vector<int> ids;
    if (doc.has("verify", "only")) {
        for (double v : doc.get_doubles("verify", "only")) {
            if (v != std::floor(v) || v < 1 || v > kCriterionCount) throw ConfigError("verify.only lists criteria 1..14");
            ids.push_back(static_cast<int>(v));
        }
    } else {
        for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);
    }
    const auto list = run_criteria(ids, opts, [](const CriterionResult& r) {
        std::printf("criterion %2d %-38s %s\n", r.id, r.title.c_str(), r.pass ? "PASS" : "FAIL");
        std::fflush(stdout);
    });
    results = results_json(list);
    return results["all_pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewdiff: diffusion across interfaces"};
    app.require_subcommand(1);
    int threads = 0;
    std::string out_dir = ".";
    app.add_option("--threads", threads, "worker threads (default $SKEWDIFF_THREADS, else 1)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_dir, "output directory");
    app.set_version_flag("--version", SKEWDIFF_VERSION);

    std::vector<std::unique_ptr<Run>> runs;
    std::map<CLI::App*, std::function<int(const Run&, Output&, Json&)>> actions;

    auto add = [&](CLI::App* parent, const std::string& name, const std::string& description, std::vector<Param> params,
                   std::function<int(const Run&, Output&, Json&)> action) {
        auto* sub = parent->add_subcommand(name, description);
        sub->fallthrough();
        runs.push_back(std::make_unique<Run>(parent == &app ? name : parent->get_name() + " " + name, std::move(params)));
        runs.back()->bind(sub);
        actions[sub] = std::move(action);
        return sub;
    };
    auto simple = [](Json (*fn)(const Run&, Output&)) {
        return [fn](const Run& run, Output& out, Json& results) {
            results = fn(run, out);
            return 0;
        };
    };

    add(&app, "density", "transition density on a y grid",
        concat({kMediumPair,
                {{"density", "t", "", "time"}, {"density", "x", "0", "start point"}, {"density", "y_grid", "", "lo:hi:step"}}}),
        simple(cmd_density));

    add(&app, "sample", "simulate paths",
        concat({kMediumPair,
                {{"medium", "interfaces", "", "interior interfaces (multi-interface medium)"},
                 {"medium", "diffusivities", "", "one diffusivity per piece, left to right"}},
                kSim,
                {{"sim", "scheme", "exact", "exact or euler"}, {"sim", "x0", "0", "start point"}}}),
        simple(cmd_sample));

    auto* functionals = app.add_subcommand("functionals", "path functionals");
    functionals->require_subcommand(1);
    functionals->fallthrough();
    const auto mc_sim = concat({kSim, {{"sim", "x0", "0", "start point"}}});
    add(functionals, "exit", "exit law of an interval",
        concat({kMediumPair, kSim,
                {{"exit", "a", "", "left end"}, {"exit", "x", "", "start"}, {"exit", "b", "", "right end"},
                 {"exit", "mc", "false", "also estimate by Monte Carlo (true/false)"}}}),
        simple(cmd_exit));
    add(functionals, "survival", "first-passage survival curve",
        concat({kMediumPair, kSim,
                {{"survival", "x0", "", "start"}, {"survival", "level", "", "passage level"},
                 {"survival", "t_grid", "", "lo:hi:step"}}}),
        simple(cmd_survival));
    add(functionals, "passage", "first-passage ordering from -y and +y",
        concat({kMediumPair, kSim,
                {{"passage", "y", "1", "injection distance"},
                 {"passage", "factor", "", "bound factor (default sqrt(D-/D+))"},
                 {"passage", "t_grid", "", "lo:hi:step"}}}),
        simple(cmd_passage));
    add(functionals, "occupation", "occupation-time balance across lambdas",
        concat({{{"medium", "d_plus", "", "diffusivity on x > 0"}, {"medium", "d_minus", "", "diffusivity on x <= 0"},
                 {"occupation", "lambdas", "", "interface parameters"}},
                mc_sim}),
        simple(cmd_occupation));
    add(functionals, "localtime", "one-sided natural local times at the interface",
        concat({kMediumPair, mc_sim, {{"localtime", "epsilons", "0.05 0.1", "window widths"}}}), simple(cmd_localtime));

    add(&app, "pde", "interface PDE from a point source",
        concat({kMediumPair,
                {{"medium", "interfaces", "", "interfaces (multi-interface medium)"},
                 {"medium", "diffusivities", "", "one diffusivity per piece"},
                 {"medium", "lambdas", "", "one parameter per interface (default conservative)"},
                 {"medium", "preset", "", "heat or atw"},
                 {"medium", "kappa_plus", "", "heat preset"},
                 {"medium", "kappa_minus", "", "heat preset"},
                 {"medium", "rho_plus", "", "heat preset"},
                 {"medium", "rho_minus", "", "heat preset"},
                 {"medium", "r", "", "atw preset: friction"},
                 {"medium", "f", "", "atw preset: Coriolis parameter"},
                 {"medium", "h_plus", "", "atw preset: depth"},
                 {"medium", "h_minus", "", "atw preset: depth"},
                 {"grid", "x_min", "-10", "left end"},
                 {"grid", "x_max", "10", "right end"},
                 {"grid", "dx", "0.01", "node spacing"},
                 {"grid", "dt", "0.001", "time step"},
                 {"grid", "t_end", "1", "final time"},
                 {"grid", "x0", "0", "point source"},
                 {"grid", "scheme", "implicit", "implicit, cn or explicit"},
                 {"grid", "drift", "0", "constant drift (conservative interfaces only)"},
                 {"grid", "left", "neumann", "neumann, dirichlet or value"},
                 {"grid", "right", "neumann", "neumann, dirichlet or value"},
                 {"grid", "left_value", "", "left boundary value"},
                 {"grid", "right_value", "", "right boundary value"},
                 {"grid", "snapshots", "", "extra output times"},
                 {"grid", "observe", "", "breakthrough observation point"}}}),
        simple(cmd_pde));

    add(&app, "homogenize", "effective dispersion of a layered cross-section",
        concat({{{"layers", "a", "", "lower wall"},
                 {"layers", "b", "", "upper wall"},
                 {"layers", "bounds", "", "layer bounds a .. b"},
                 {"layers", "d", "", "isotropic diffusivity per layer"},
                 {"layers", "d1", "", "longitudinal diffusivity per layer"},
                 {"layers", "d2", "", "transverse diffusivity per layer"},
                 {"layers", "velocity", "", "'constant V' or 'parabolic V0'"},
                 {"layers", "velocity_breaks", "", "piecewise polynomial breaks"},
                 {"layers", "velocity_coeffs", "", "';'-separated coefficient lists"},
                 {"layers", "velocity_x", "", "uniform sample points"},
                 {"layers", "velocity_v", "", "sampled velocities"},
                 {"homogenize", "mc", "false", "also run the long-time Monte Carlo estimate"}},
                kSim}),
        simple(cmd_homogenize));

    auto* network = app.add_subcommand("network", "river-network dispersal");
    network->require_subcommand(1);
    network->fallthrough();
    const std::vector<Param> net_common{{"network", "file", "", "edge list file"},
                                        {"network", "bin_width", "0.1", "histogram bin width"}};
    const std::vector<Param> net_start{{"network", "start_edge", "", "start edge id"}, {"network", "start_x", "", "start position"}};
    for (const std::string mode : {"kernel", "terminal", "junction", "crosscheck"}) {
        std::vector<Param> extra;
        if (mode == "kernel") extra = concat({net_start, {{"network", "sigma", "", "settling rate"}}});
        if (mode == "terminal") extra = net_start;
        if (mode == "junction")
            extra = {{"network", "junction_edge", "", "downstream edge of the junction"}, {"network", "eps", "0.05", "exit distance"}};
        if (mode == "crosscheck")
            extra = concat({net_start,
                            {{"grid", "dx", "0.005", "PDE cell size"}, {"grid", "dt", "0.0025", "PDE time step", "pde-dt"}}});
        add(network, mode, "network " + mode, concat({net_common, extra, kSim}),
            [mode](const Run& run, Output& out, Json& results) {
                results = cmd_network(run, out, mode);
                return 0;
            });
    }

    add(&app, "verify", "acceptance suite",
        {{"verify", "seed", "20240611", "base seed"},
         {"verify", "scale", "1", "Monte Carlo sample-count multiplier"},
         {"verify", "slow", "false", "include the long-time dispersion Monte Carlo"},
         {"verify", "only", "", "criteria to run"},
         {"verify", "repro_scale", "0.02", "scale of the reproducibility re-runs"},
         {"verify", "repro_threads", "2", "thread count of the second reproducibility run"}},
        [](const Run& run, Output&, Json& results) { return cmd_verify(run, results); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* leaf = nullptr;
    for (auto& [sub, action] : actions)
        if (sub->parsed()) leaf = sub;
    if (!leaf) {
        std::cerr << "error: missing subcommand\n";
        return 2;
    }
    const std::string name = leaf->get_parent() == &app ? leaf->get_name() : leaf->get_parent()->get_name() + " " + leaf->get_name();
    Run* run = nullptr;
    for (auto& r : runs)
        if (r->command() == name) run = r.get();

    try {
        if (threads > 0) set_thread_count(threads);
        run->resolve();
        Output out{out_dir, {}};
        Json results;
        const auto start = std::chrono::steady_clock::now();
        const int code = actions[leaf](*run, out, results);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto& doc = run->doc();
        Json seed = nullptr;
        if (doc.has("sim", "seed")) seed = doc.get_int("sim", "seed", 0);
        if (doc.has("verify", "seed")) seed = doc.get_int("verify", "seed", 0);
        Json summary{{"command", run->command()},
                     {"version", SKEWDIFF_VERSION},
                     {"seed", seed},
                     {"config", run->resolved()},
                     {"duration_seconds", seconds},
                     {"results", results}};
        std::string file = name;
        std::replace(file.begin(), file.end(), ' ', '_');
        out.add(file + ".json", summary.dump(2) + "\n");
        out.flush();
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
