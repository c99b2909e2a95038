#include "semimono/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace semimono::cli {

namespace {

namespace pt = boost::property_tree;

const std::vector<std::string> kSections{"graph", "noise", "operator", "output", "potential", "runner", "scheme", "study"};
const std::vector<std::string> kSchemes{"limit", "multiplicative", "regularized"};
const std::vector<std::string> kMarks{"constant", "gaussian", "rademacher"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string text(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) {
            out += text(values[i]);
        } else {
            out += std::to_string(values[i]);
        }
    }
    return out;
}

bool one_of(const std::vector<std::string>& options, const std::string& v) {
    return std::find(options.begin(), options.end(), v) != options.end();
}

std::string options_text(const std::vector<std::string>& options) {
    std::string out;
    for (const auto& o : options) out += (out.empty() ? "" : "|") + o;
    return out;
}

std::size_t default_paths(const std::string& kind) {
    if (kind == "mp_audit" || kind == "monotone") return 10000;
    if (kind == "apriori" || kind == "gronwall") return 1000;
    if (kind == "dependence") return 200;
    if (kind == "energy_residual") return 50;
    if (kind == "lambda") return 20;
    if (kind == "picard") return 4;
    return 1;
}

// Reads one section, remembering which keys were consumed so that leftovers
// can be reported as unknown.
class Block {
public:
    Block(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (tree_ == nullptr) return std::nullopt;
        const auto child = tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
        if (!child) return std::nullopt;
        return trim(child->data());
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(name_ + " block: key '" + key + "' " + what);
    }

    double number(const std::string& key, double fallback) {
        const auto r = raw(key);
        return r ? parse_double(key, *r) : fallback;
    }

    double number(const std::string& key, double fallback, const std::function<bool(double)>& ok,
                  const std::string& requirement) {
        const double v = number(key, fallback);
        if (!std::isfinite(v) || !ok(v)) fail(key, "must be " + requirement + " (got " + text(v) + ")");
        return v;
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t lo, std::uint64_t hi) {
        const auto r = raw(key);
        if (!r) return fallback;
        const std::uint64_t v = parse_integer(key, *r);
        if (v < lo || v > hi) {
            fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "] (got " + *r + ")");
        }
        return v;
    }

    std::string word(const std::string& key, const std::string& fallback, const std::vector<std::string>& options) {
        const auto r = raw(key);
        const std::string v = r ? *r : fallback;
        if (!options.empty() && !one_of(options, v)) fail(key, "must be one of " + options_text(options) + " (got '" + v + "')");
        if (v.empty()) fail(key, "must not be empty");
        return v;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        const auto r = raw(key);
        if (!r) return fallback;
        std::vector<double> out;
        for (const auto& item : split(*r)) out.push_back(parse_double(key, item));
        return out;
    }

    std::vector<std::uint64_t> integers(const std::string& key, const std::vector<std::uint64_t>& fallback) {
        const auto r = raw(key);
        if (!r) return fallback;
        std::vector<std::uint64_t> out;
        for (const auto& item : split(*r)) out.push_back(parse_integer(key, item));
        return out;
    }

    /// Keys present in the section that were never read.
    void finish() const {
        if (tree_ == nullptr) return;
        for (const auto& [key, child] : *tree_) {
            (void)child;
            if (!used_.count(key)) throw ConfigError(name_ + " block: unknown key '" + key + "'");
        }
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        if (tree_ != nullptr) {
            for (const auto& [key, child] : *tree_) {
                (void)child;
                out.push_back(key);
            }
        }
        return out;
    }

private:
    std::vector<std::string> split(const std::string& v) const {
        std::vector<std::string> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(trim(item));
        if (out.empty() || std::any_of(out.begin(), out.end(), [](const auto& s) { return s.empty(); })) {
            throw ConfigError(name_ + " block: malformed list '" + v + "'");
        }
        return out;
    }

    double parse_double(const std::string& key, const std::string& v) const {
        double out = 0.0;
        const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || end != v.data() + v.size()) fail(key, "is not a number ('" + v + "')");
        return out;
    }

    std::uint64_t parse_integer(const std::string& key, const std::string& v) const {
        std::uint64_t out = 0;
        const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || end != v.data() + v.size()) fail(key, "is not a nonnegative integer ('" + v + "')");
        return out;
    }

    std::string name_;
    const pt::ptree* tree_;
    std::set<std::string> used_;
};

auto positive = [](double v) { return v > 0.0; };
auto nonnegative = [](double v) { return v >= 0.0; };
auto any_value = [](double) { return true; };

}  // namespace

std::vector<std::string> study_kinds() {
    return {"acceptance", "apriori", "dependence",  "energy_residual", "gronwall", "heat_oracle",
            "lambda",     "monotone", "mp_audit", "picard",          "solve"};
}

ExperimentConfig parse_config(const std::string& text_in) {
    pt::ptree tree;
    try {
        std::istringstream in(text_in);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: parse error at line " + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [name, child] : tree) {
        if (child.empty() && !child.data().empty()) throw ConfigError("config: key '" + name + "' outside a section");
        if (!one_of(kSections, name)) throw ConfigError("config: unknown section '" + name + "'");
    }
    auto section = [&](const std::string& name) -> const pt::ptree* {
        const auto child = tree.get_child_optional(name);
        return child ? &*child : nullptr;
    };

    ExperimentConfig c;
    const ExperimentConfig d;

    Block op("operator", section("operator"));
    c.op.nodes = op.integer("nodes", d.op.nodes, 2, 4096);
    c.op.length = op.number("length", d.op.length, positive, "> 0");
    c.op.m = static_cast<int>(op.integer("m", static_cast<std::uint64_t>(d.op.m), 1, 16));
    c.op.x0_scale = op.number("x0_scale", d.op.x0_scale, any_value, "finite");
    op.finish();

    Block graph("graph", section("graph"));
    c.graph.name = graph.word("name", d.graph.name, {});
    for (const auto& key : graph.keys()) {
        if (key == "name") continue;
        c.graph.params[key] = graph.number(key, 0.0);
    }
    try {
        monotone::make_potential(c.graph);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    Block potential("potential", section("potential"));
    c.potential = potential.word("name", c.graph.name, {});
    if (c.potential != c.graph.name) {
        potential.fail("name", "must name the potential of the graph '" + c.graph.name + "' (got '" + c.potential + "')");
    }
    potential.finish();

    Block nz("noise", section("noise"));
    c.noise.k_dim = nz.integer("k_dim", d.noise.k_dim, 1, 64);
    c.noise.q = nz.number("q", d.noise.q, nonnegative, ">= 0");
    c.noise.rate = nz.number("rate", d.noise.rate, nonnegative, ">= 0");
    c.noise.mark = nz.word("mark", d.noise.mark, kMarks);
    c.noise.mark_location = nz.number("mark_location", d.noise.mark_location, any_value, "finite");
    c.noise.mark_scale = nz.number("mark_scale", d.noise.mark_scale, nonnegative, ">= 0");
    const std::vector<double> default_drift =
        c.noise.k_dim == d.noise.k_dim ? d.noise.drift : std::vector<double>(c.noise.k_dim, 0.0);
    c.noise.drift = nz.numbers("drift", default_drift);
    if (c.noise.drift.size() != c.noise.k_dim) nz.fail("drift", "must list k_dim = " + std::to_string(c.noise.k_dim) + " values");
    if (!std::all_of(c.noise.drift.begin(), c.noise.drift.end(), [](double v) { return std::isfinite(v); })) {
        nz.fail("drift", "must be finite");
    }
    c.noise.g_scale = nz.number("g_scale", d.noise.g_scale, any_value, "finite");
    nz.finish();

    Block sc("scheme", section("scheme"));
    c.scheme.kind = sc.word("kind", d.scheme.kind, kSchemes);
    c.scheme.lambda = sc.number("lambda", d.scheme.lambda, positive, "> 0");
    c.scheme.horizon = sc.number("horizon", d.scheme.horizon, positive, "> 0");
    c.scheme.steps = sc.integer("steps", d.scheme.steps, 1, 1u << 24);
    c.scheme.alpha = sc.number("alpha", d.scheme.alpha, positive, "> 0");
    c.scheme.tolerance = sc.number("tolerance", d.scheme.tolerance, positive, "> 0");
    c.scheme.max_picard = static_cast<int>(sc.integer("max_picard", d.scheme.max_picard, 1, 10000));
    c.scheme.coupling = sc.number("coupling", d.scheme.coupling, nonnegative, ">= 0");
    c.scheme.overflow_guard = sc.number("overflow_guard", d.scheme.overflow_guard, positive, "> 0");
    c.scheme.max_splits = static_cast<int>(sc.integer("max_splits", d.scheme.max_splits, 0, 60));
    c.scheme.membership_tol = sc.number("membership_tol", d.scheme.membership_tol, positive, "> 0");
    sc.finish();

    Block st("study", section("study"));
    c.study.kind = st.word("kind", d.study.kind, study_kinds());
    const std::uint64_t min_paths = c.study.kind == "mp_audit" ? 1000 : 1;
    c.study.n_paths = st.integer("n_paths", default_paths(c.study.kind), min_paths, 10'000'000);
    c.study.seed_base = st.integer("seed_base", d.study.seed_base, 0, UINT64_MAX);
    c.study.lambdas = st.numbers("lambdas", d.study.lambdas);
    if (!std::all_of(c.study.lambdas.begin(), c.study.lambdas.end(), [](double v) { return v > 0.0 && std::isfinite(v); })) {
        st.fail("lambdas", "must be positive");
    }
    c.study.deltas = st.numbers("deltas", d.study.deltas);
    if (!std::all_of(c.study.deltas.begin(), c.study.deltas.end(), [](double v) { return v > 0.0 && std::isfinite(v); })) {
        st.fail("deltas", "must be positive");
    }
    const auto levels = st.integers("levels", {d.study.levels.begin(), d.study.levels.end()});
    c.study.levels.assign(levels.begin(), levels.end());
    for (std::size_t i = 0; i < c.study.levels.size(); ++i) {
        if (c.study.levels[i] == 0 || (i > 0 && c.study.levels[i] <= c.study.levels[i - 1]) ||
            c.study.levels.back() % c.study.levels[i] != 0) {
            st.fail("levels", "must be increasing step counts dividing the finest level");
        }
    }
    const auto criteria = st.integers("criteria", {d.study.criteria.begin(), d.study.criteria.end()});
    c.study.criteria.clear();
    for (auto k : criteria) {
        if (k < 1 || k > 9) st.fail("criteria", "must list ids in [1, 9]");
        c.study.criteria.push_back(static_cast<int>(k));
    }
    c.study.tolerance_factor = st.number("tolerance_factor", d.study.tolerance_factor, positive, "> 0");
    c.study.kappa = st.number("kappa", d.study.kappa, positive, "> 0");
    st.finish();

    Block out("output", section("output"));
    c.output.directory = out.word("directory", d.output.directory, {});
    c.output.verbosity = static_cast<int>(out.integer("verbosity", d.output.verbosity, 0, 2));
    out.finish();

    Block run("runner", section("runner"));
    c.runner.workers = run.integer("workers", default_workers(), 1, 1024);
    run.finish();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[operator]\nnodes = " << c.op.nodes << "\nlength = " << text(c.op.length) << "\nm = " << c.op.m
       << "\nx0_scale = " << text(c.op.x0_scale) << "\n\n";
    os << "[graph]\nname = " << c.graph.name << "\n";
    for (const auto& [key, value] : c.graph.params) os << key << " = " << text(value) << "\n";
    os << "\n[potential]\nname = " << c.potential << "\n\n";
    os << "[noise]\nk_dim = " << c.noise.k_dim << "\nq = " << text(c.noise.q) << "\nrate = " << text(c.noise.rate)
       << "\nmark = " << c.noise.mark << "\nmark_location = " << text(c.noise.mark_location)
       << "\nmark_scale = " << text(c.noise.mark_scale) << "\ndrift = " << join(c.noise.drift)
       << "\ng_scale = " << text(c.noise.g_scale) << "\n\n";
    os << "[scheme]\nkind = " << c.scheme.kind << "\nlambda = " << text(c.scheme.lambda)
       << "\nhorizon = " << text(c.scheme.horizon) << "\nsteps = " << c.scheme.steps
       << "\nalpha = " << text(c.scheme.alpha) << "\ntolerance = " << text(c.scheme.tolerance)
       << "\nmax_picard = " << c.scheme.max_picard << "\ncoupling = " << text(c.scheme.coupling)
       << "\noverflow_guard = " << text(c.scheme.overflow_guard) << "\nmax_splits = " << c.scheme.max_splits
       << "\nmembership_tol = " << text(c.scheme.membership_tol) << "\n\n";
    os << "[study]\nkind = " << c.study.kind << "\nn_paths = " << c.study.n_paths
       << "\nseed_base = " << c.study.seed_base << "\nlambdas = " << join(c.study.lambdas)
       << "\ndeltas = " << join(c.study.deltas) << "\nlevels = " << join(c.study.levels)
       << "\ncriteria = " << join(c.study.criteria) << "\ntolerance_factor = " << text(c.study.tolerance_factor)
       << "\nkappa = " << text(c.study.kappa) << "\n\n";
    os << "[output]\ndirectory = " << c.output.directory << "\nverbosity = " << c.output.verbosity << "\n\n";
    os << "[runner]\nworkers = " << c.runner.workers << "\n";
    return os.str();
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["operator"] = {{"nodes", c.op.nodes}, {"length", c.op.length}, {"m", c.op.m}, {"x0_scale", c.op.x0_scale}};
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [key, value] : c.graph.params) params[key] = value;
    j["graph"] = {{"name", c.graph.name}, {"params", params}};
    j["potential"] = {{"name", c.potential}};
    j["noise"] = {{"k_dim", c.noise.k_dim},
                  {"q", c.noise.q},
                  {"rate", c.noise.rate},
                  {"mark", c.noise.mark},
                  {"mark_location", c.noise.mark_location},
                  {"mark_scale", c.noise.mark_scale},
                  {"drift", c.noise.drift},
                  {"g_scale", c.noise.g_scale}};
    j["scheme"] = {{"kind", c.scheme.kind},
                   {"lambda", c.scheme.lambda},
                   {"horizon", c.scheme.horizon},
                   {"steps", c.scheme.steps},
                   {"dt", c.scheme.horizon / static_cast<double>(c.scheme.steps)},
                   {"alpha", c.scheme.alpha},
                   {"tolerance", c.scheme.tolerance},
                   {"max_picard", c.scheme.max_picard},
                   {"coupling", c.scheme.coupling},
                   {"overflow_guard", c.scheme.overflow_guard},
                   {"max_splits", c.scheme.max_splits},
                   {"membership_tol", c.scheme.membership_tol}};
    j["study"] = {{"kind", c.study.kind},
                  {"n_paths", c.study.n_paths},
                  {"seed_base", c.study.seed_base},
                  {"lambdas", c.study.lambdas},
                  {"deltas", c.study.deltas},
                  {"levels", c.study.levels},
                  {"criteria", c.study.criteria},
                  {"tolerance_factor", c.study.tolerance_factor},
                  {"kappa", c.study.kappa}};
    j["output"] = {{"directory", c.output.directory}, {"verbosity", c.output.verbosity}};
    j["runner"] = {{"workers", c.runner.workers}};
    return j;
}

noise::SemimartingaleSpec ExperimentConfig::noise_spec() const {
    const std::size_t k = noise.k_dim;
    noise::SemimartingaleSpec spec;
    spec.k_dim = k;
    spec.wiener_cov = noise.q * Matrix::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    spec.jump_rate = noise.rate;
    spec.marks.kind = noise.mark == "constant"   ? noise::MarkLaw::Kind::constant
                      : noise.mark == "gaussian" ? noise::MarkLaw::Kind::gaussian
                                                 : noise::MarkLaw::Kind::rademacher;
    spec.marks.location = Vector::Constant(static_cast<Eigen::Index>(k), noise.mark_location);
    spec.marks.scale = noise.mark_scale;
    spec.drift = Eigen::Map<const Vector>(noise.drift.data(), static_cast<Eigen::Index>(noise.drift.size()));
    spec.validate();
    return spec;
}

analysis::ProblemSetup ExperimentConfig::setup() const {
    analysis::ProblemSetup s;
    s.nodes = op.nodes;
    s.length = op.length;
    s.horizon = scheme.horizon;
    s.steps = scheme.steps;
    s.g_scale = noise.g_scale;
    s.x0_scale = op.x0_scale;
    s.noise = noise_spec();
    return s;
}

}  // namespace semimono::cli
