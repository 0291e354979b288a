#include "greenbvp/problem.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "greenbvp/error.hpp"

namespace greenbvp {

namespace {

// x'' - x with a small box-valued nonlinearity; eta drives the spectral check.
constexpr std::string_view kExample35 = R"(# periodic x'' - x
a2 = 1
a1 = 0
a0 = -1
bc = periodic
kernel = numeric
rhs = box
f0 = 0.3*sin(x)
rho = 0.1
mu = 0.3
eta = 0.3
conditions = eta_norm
)";

constexpr std::string_view kExample36 = R"(# periodic x'' - x' - x
a2 = 1
a1 = -1
a0 = -1
bc = periodic
kernel = numeric
rhs = single
f0 = 0.5*x + sin(2*pi*t)
c = abs(sin(2*pi*t))
m = 0.5
mu = 0.5
conditions = sublinear_growth
)";

constexpr std::string_view kExample43 = R"(# periodic x'' - x with a Lipschitz right-hand side
a2 = 1
a1 = 0
a0 = -1
bc = periodic
kernel = numeric
rhs = single
f0 = 0.9*sin(x) + cos(2*pi*t)
mu = 0.9
conditions = lipschitz_l1
)";

constexpr std::array<std::string_view, 4> kConditionIds = {"sublinear_growth", "eta_norm", "perturbed_growth",
                                                          "lipschitz_l1"};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T v{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw InvalidArgument("problem key '" + key + "': cannot parse '" + value + "' as a number");
    }
    return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
    std::vector<T> out;
    std::string item;
    std::istringstream in(value);
    while (in >> item) {
        if (!item.empty() && item.back() == ',') {
            item.pop_back();
        }
        if (!item.empty()) {
            out.push_back(parse_number<T>(key, item));
        }
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw InvalidArgument("problem key '" + key + "': expected true or false, got '" + value + "'");
}

Expression time_expression(const std::string& key, const std::string& text) {
    auto e = Expression::parse(text);
    if (e.uses_state()) {
        throw InvalidArgument("problem key '" + key + "' may depend on t only: '" + text + "'");
    }
    return e;
}

ScalarFunction as_function(const Expression& e) {
    return [e](double t) { return e(t); };
}

std::vector<std::string> split_components(const std::string& text) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, ';')) {
        parts.push_back(trim(part));
    }
    return parts;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = v[i];
    }
    return out;
}

void apply(ProblemSpec& spec, const std::string& key, const std::string& value) {
    if (key == "preset") {
        spec = parse_problem(preset_text(value));
        spec.name = value;
    } else if (key == "name") {
        spec.name = value;
    } else if (key == "a2") {
        spec.a2 = value;
    } else if (key == "a1") {
        spec.a1 = value;
    } else if (key == "a0") {
        spec.a0 = value;
    } else if (key == "bc") {
        spec.bc = value;
    } else if (key == "bc.row1") {
        spec.row1 = parse_list<double>(key, value);
    } else if (key == "bc.row2") {
        spec.row2 = parse_list<double>(key, value);
    } else if (key == "d1") {
        spec.d1 = parse_list<double>(key, value);
    } else if (key == "d2") {
        spec.d2 = parse_list<double>(key, value);
    } else if (key == "kernel") {
        spec.kernel = value;
    } else if (key == "dim") {
        spec.dim = parse_number<std::size_t>(key, value);
    } else if (key == "rhs") {
        spec.rhs = value;
    } else if (key == "f0") {
        spec.f0 = value;
    } else if (key == "rho") {
        spec.rho = value;
    } else if (key == "c") {
        spec.c = value;
    } else if (key == "m") {
        spec.m = parse_number<double>(key, value);
    } else if (key == "mu") {
        spec.mu = value;
    } else if (key == "alpha") {
        spec.alpha = value;
    } else if (key == "eta") {
        spec.eta = value;
    } else if (key == "accretive") {
        spec.accretive = parse_bool(key, value);
    } else if (key == "grid") {
        spec.grid = parse_number<std::size_t>(key, value);
    } else if (key == "tol") {
        spec.tol = parse_number<double>(key, value);
    } else if (key == "max_iter") {
        spec.max_iter = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
        spec.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "selection") {
        spec.selection = value;
    } else if (key == "members") {
        spec.members = parse_number<std::size_t>(key, value);
    } else if (key == "perturb") {
        spec.perturb = parse_list<std::size_t>(key, value);
    } else if (key == "conditions") {
        spec.conditions.clear();
        std::string item;
        std::istringstream in(value);
        while (std::getline(in, item, ',')) {
            if (auto id = trim(item); !id.empty()) {
                spec.conditions.push_back(id);
            }
        }
    } else if (key == "method") {
        spec.method = value;
    } else if (key == "lambda_max") {
        spec.lambda_max = parse_number<double>(key, value);
    } else {
        throw InvalidArgument("unknown problem key '" + key + "'");
    }
}

void validate(const ProblemSpec& spec) {
    for (const auto& [key, text] : {std::pair{"a2", spec.a2}, std::pair{"a1", spec.a1}, std::pair{"a0", spec.a0}}) {
        time_expression(key, text);
    }
    for (const auto& [key, text] : {std::pair{"c", spec.c}, std::pair{"mu", spec.mu}, std::pair{"alpha", spec.alpha},
                                    std::pair{"eta", spec.eta}}) {
        if (text) {
            time_expression(key, *text);
        }
    }
    if (spec.bc != "periodic" && spec.bc != "dirichlet" && spec.bc != "general") {
        throw InvalidArgument("bc must be periodic, dirichlet or general, got '" + spec.bc + "'");
    }
    if (spec.rhs != "single" && spec.rhs != "box") {
        throw InvalidArgument("rhs must be single or box, got '" + spec.rhs + "'");
    }
    if (spec.dim == 0) {
        throw InvalidArgument("dim must be positive");
    }
    if (spec.c.has_value() != spec.m.has_value()) {
        throw InvalidArgument("growth metadata needs both c and m");
    }
    const auto parts = split_components(spec.f0);
    if (parts.size() != 1 && parts.size() != spec.dim) {
        throw InvalidArgument("f0 needs one expression or one per component");
    }
    for (const auto& p : parts) {
        if (Expression::parse(p).max_component() > spec.dim) {
            throw InvalidArgument("f0 refers to a component beyond dim");
        }
    }
    if (Expression::parse(spec.rho).max_component() > spec.dim) {
        throw InvalidArgument("rho refers to a component beyond dim");
    }
    for (const auto* d : {&spec.d1, &spec.d2}) {
        if (!d->empty() && d->size() != 1 && d->size() != spec.dim) {
            throw InvalidArgument("boundary targets need one value or one per component");
        }
    }
    for (const auto& id : spec.conditions) {
        if (std::find(kConditionIds.begin(), kConditionIds.end(), id) == kConditionIds.end()) {
            throw InvalidArgument("unknown condition '" + id + "'");
        }
    }
    if (spec.tol <= 0.0 || spec.max_iter == 0) {
        throw InvalidArgument("tol must be positive and max_iter nonzero");
    }
    parse_closed_form_id(spec.kernel == "numeric" ? "periodic_xpp_minus_x" : spec.kernel);
    (void)spec.boundary();
}

}  // namespace

CoefficientSet ProblemSpec::coefficients() const {
    const auto e2 = time_expression("a2", a2);
    const bool monic = e2.text() == "1";
    return CoefficientSet{as_function(e2), as_function(time_expression("a1", a1)),
                          as_function(time_expression("a0", a0)), monic};
}

BoundaryConditions ProblemSpec::boundary() const {
    auto targets = [this](const std::vector<double>& d) -> Eigen::VectorXd {
        if (d.empty()) {
            return {};
        }
        if (d.size() == 1) {
            return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), d[0]);
        }
        return to_vector(d);
    };
    BoundaryConditions out;
    if (bc == "periodic") {
        out = BoundaryConditions::periodic();
    } else if (bc == "dirichlet") {
        out = BoundaryConditions::dirichlet();
    } else {
        if (row1.size() != 4 || row2.size() != 4) {
            throw InvalidArgument("bc = general needs bc.row1 and bc.row2 with four numbers each");
        }
        std::copy(row1.begin(), row1.end(), out.rows[0].begin());
        std::copy(row2.begin(), row2.end(), out.rows[1].begin());
    }
    out.d1 = targets(d1);
    out.d2 = targets(d2);
    out.validate();
    return out;
}

RightHandSide ProblemSpec::right_hand_side() const {
    std::vector<Expression> parts;
    for (const auto& p : split_components(f0)) {
        parts.push_back(Expression::parse(p));
    }
    const std::size_t n = dim;
    VectorField field = [parts, n](double t, const Eigen::VectorXd& x) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) {
            const auto& e = parts.size() == 1 ? parts[0] : parts[k];
            v[static_cast<Eigen::Index>(k)] = e(t, x, k);
        }
        return v;
    };
    RightHandSide out;
    if (rhs == "box") {
        const auto radius = Expression::parse(this->rho);
        out = RightHandSide::box(n, field, [radius](double t, const Eigen::VectorXd& x) { return radius(t, x, 0); });
    } else {
        out = RightHandSide::single(n, field);
    }
    if (c) {
        out.growth = Growth{as_function(time_expression("c", *c)), *m};
    }
    if (mu) {
        out.lipschitz = as_function(time_expression("mu", *mu));
    }
    if (alpha) {
        out.alpha = as_function(time_expression("alpha", *alpha));
    }
    if (eta) {
        out.eta = as_function(time_expression("eta", *eta));
    }
    out.accretive = accretive;
    out.validate();
    return out;
}

GreensKernel ProblemSpec::kernel_on(const Grid& g) const {
    if (kernel == "numeric") {
        return build_greens(coefficients(), boundary(), g);
    }
    const auto id = parse_closed_form_id(kernel);
    // Guard against a closed form that does not describe the declared operator.
    const auto numeric = build_greens(coefficients(), boundary(), g);
    auto closed = closed_form_kernel(id, g);
    if (max_kernel_difference(numeric, closed) > 1e-4) {
        throw InvalidArgument("kernel '" + kernel + "' does not match the declared coefficients and boundary rows");
    }
    return closed;
}

ProblemSpec parse_problem(std::string_view text) {
    ProblemSpec spec;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("problem line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        try {
            apply(spec, key, value);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("problem line " + std::to_string(number) + ": " + e.what());
        }
    }
    validate(spec);
    return spec;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot read problem file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto spec = parse_problem(buffer.str());
    if (spec.name.empty()) {
        spec.name = path.stem().string();
    }
    return spec;
}

std::vector<std::string> preset_names() { return {"example-3.5", "example-3.6", "example-4.3"}; }

std::string preset_text(std::string_view name) {
    if (name == "example-3.5") {
        return std::string(kExample35);
    }
    if (name == "example-3.6") {
        return std::string(kExample36);
    }
    if (name == "example-4.3") {
        return std::string(kExample43);
    }
    throw InvalidArgument("unknown preset '" + std::string(name) + "'");
}

}  // namespace greenbvp
