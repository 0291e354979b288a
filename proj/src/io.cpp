#include "greenbvp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "greenbvp/error.hpp"

namespace greenbvp {

namespace {

void dump(const Json& v, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            // nlohmann::json objects are std::map backed, so iteration is key-sorted.
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) {
                    out += ",\n";
                }
                first = false;
                out += pad;
                out += Json(it.key()).dump();
                out += ": ";
                dump(it.value(), out, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i > 0) {
                    out += ",\n";
                }
                out += pad;
                dump(v[i], out, depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_double(d) : "null";
            return;
        }
        default:
            out += v.dump();
    }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string dump_json(const Json& value) {
    std::string out;
    dump(value, out, 0);
    out += "\n";
    return out;
}

Json to_json(const ConditionResult& c) {
    return Json{{"condition_id", c.id}, {"lhs", c.lhs},   {"rhs", c.rhs},
                {"margin", c.margin},   {"pass", c.pass}, {"evaluable", c.evaluable}};
}

Json to_json(const ConditionReport& report) {
    Json conditions = Json::array();
    for (const auto& c : report.conditions) {
        conditions.push_back(to_json(c));
    }
    return Json{{"conditions", conditions},
                {"contraction_q", optional_number(report.contraction_q)},
                {"m_threshold", report.m_threshold},
                {"eta_threshold", report.eta_threshold},
                {"mu_threshold", report.mu_threshold},
                {"all_pass", report.all_pass()}};
}

Json to_json(const KernelNorms& norms) {
    return Json{{"sup_l2", norms.sup_l2_rows},
                {"sup_l2_dt", norms.sup_l2_rows_dt},
                {"sup_abs", norms.sup_abs},
                {"l2_of_l2_dt2", optional_number(norms.l2_of_l2_dt2)}};
}

Json to_json(const PowerResult& r) {
    return Json{{"radius", r.radius}, {"iterations", r.iterations}, {"lower", r.lower}, {"upper", r.upper}};
}

Json to_json(const HillRadius& r) {
    return Json{{"radius", r.radius},
                {"root_found", r.root_found},
                {"tangential", r.tangential},
                {"iterations", r.evaluations}};
}

Json to_json(const SchemeReport& report) {
    Json steps = Json::array();
    for (const auto& s : report.steps) {
        steps.push_back(Json{{"n", s.n},
                             {"eps_n", optional_number(s.eps_n)},
                             {"max_gap", s.max_gap},
                             {"gap_ok", s.gap_ok},
                             {"spread", s.spread},
                             {"unique_ok", s.unique_ok},
                             {"converged", s.converged},
                             {"note", s.note}});
    }
    return Json{{"steps", steps}, {"bound_R", optional_number(report.bound_R)}, {"all_ok", report.all_ok()}};
}

Json solution_summary(const Solution& sol) {
    Json ratios = Json::array();
    for (std::size_t k = 1; k < sol.increments.size(); ++k) {
        if (sol.increments[k - 1] > 1e-13) {
            ratios.push_back(sol.increments[k] / sol.increments[k - 1]);
        }
    }
    return Json{{"iterations", sol.iterations},
                {"converged", sol.converged},
                {"guaranteed", sol.guaranteed},
                {"contraction_q", optional_number(sol.contraction_q)},
                {"max_increment_ratio", max_increment_ratio(sol.increments)},
                {"increment_ratios", ratios},
                {"increments", sol.increments},
                {"residual_ode", sol.residual_ode},
                {"residual_bc", sol.residual_bc},
                {"sup_norm", lp_norms(sol.x).sup},
                {"c1_norm", c1_norm(sol.x, sol.dx)},
                {"dim", sol.x.dim()},
                {"grid", sol.x.grid.intervals()}};
}

void write_solution_csv(const Solution& sol, std::ostream& out) {
    const std::size_t dim = sol.x.dim();
    out << "t";
    for (const char* prefix : {"x_", "dx_", "w_"}) {
        for (std::size_t k = 1; k <= dim; ++k) {
            out << ',' << prefix << k;
        }
    }
    out << '\n';
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        out << format_double(sol.x.grid.node(i));
        for (const auto* f : {&sol.x, &sol.dx, &sol.w}) {
            for (std::size_t k = 0; k < dim; ++k) {
                out << ',' << format_double(f->values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
            }
        }
        out << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InvalidArgument("cannot write " + tmp.string());
        }
        out << text;
        if (!out.flush()) {
            throw InvalidArgument("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Json export_bundle(const FunnelBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    Json members = Json::array();
    for (std::size_t k = 0; k < bundle.members.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "member_%03zu.csv", k);
        std::ostringstream csv;
        write_solution_csv(bundle.members[k], csv);
        write_file_atomic(dir / name, csv.str());
        members.push_back(Json{{"file", name}, {"seed", bundle.seeds[k]},
                               {"iterations", bundle.members[k].iterations}});
    }
    Json manifest{{"seed", bundle.seed},
                  {"requested", bundle.requested},
                  {"converged_count", bundle.members.size()},
                  {"diameter_c1", bundle.diameter_c1},
                  {"max_residual", bundle.max_residual},
                  {"bound_R", optional_number(bundle.bound_R)},
                  {"bound_sup", optional_number(bundle.bound_sup)},
                  {"within_bounds", bundle.within_bounds},
                  {"low_confidence", bundle.low_confidence},
                  {"members", members}};
    write_file_atomic(dir / "manifest.json", dump_json(manifest));
    return manifest;
}

}  // namespace greenbvp
