#include "heatlab/reactions.hpp"

#include <stdexcept>

#include "heatlab/errors.hpp"

namespace heatlab {

namespace {

void reject_variable(const ExprPtr& e, Var banned, const char* where) {
    if (variables_of(e).count(banned)) {
        throw std::invalid_argument(std::string(where) + " must not reference '" +
                                    var_name(banned) + "'");
    }
}

double require_param(const std::map<std::string, double>& params, const std::string& family,
                     const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) {
        throw std::invalid_argument("reaction family '" + family + "' is missing parameter '" +
                                    name + "'");
    }
    return it->second;
}

}  // namespace

ReactionSpec scalar_reaction(ExprPtr f) {
    reject_variable(f, Var::v, "scalar reaction");
    ReactionSpec spec;
    spec.kind = ReactionSpec::Kind::scalar;
    spec.f = std::move(f);
    return spec;
}

ReactionSpec scalar_reaction(const std::string& text) {
    return scalar_reaction(parse_expr(text));
}

ReactionSpec system_reaction(ExprPtr f, ExprPtr g) {
    ReactionSpec spec;
    spec.kind = ReactionSpec::Kind::system_pair;
    spec.f = std::move(f);
    spec.g = std::move(g);
    return spec;
}

ReactionSpec system_reaction(const std::string& f_text, const std::string& g_text) {
    return system_reaction(parse_expr(f_text), parse_expr(g_text));
}

const std::vector<BuiltinFamily>& builtin_families() {
    static const std::vector<BuiltinFamily> families = {
        {"power", {"p"}, ReactionSpec::Kind::scalar, true,
         "scalar f = u^p; global for p <= 1, finite-time blow-up for p > 1 (u0 = 1)"},
        {"frank_kamenetskii", {}, ReactionSpec::Kind::system_pair, true,
         "pair f = -u*exp(v), g = u*exp(v); Arrhenius-type exponential coupling"},
        {"haraux_youkana", {"gamma"}, ReactionSpec::Kind::system_pair, true,
         "pair f = -u*exp(v^gamma), g = u*exp(v^gamma); sub-exponential for gamma < 1"},
        {"robin_lambda", {"lambda"}, ReactionSpec::Kind::scalar, true,
         "scalar f = lambda*exp(u); ignition reaction for the robin-boundary runs"},
    };
    return families;
}

ReactionSpec builtin_reaction(const std::string& name,
                              const std::map<std::string, double>& params) {
    const BuiltinFamily* family = nullptr;
    for (const BuiltinFamily& f : builtin_families()) {
        if (f.name == name) {
            family = &f;
            break;
        }
    }
    if (!family) {
        throw std::invalid_argument("unknown reaction family '" + name + "'");
    }

    ReactionSpec spec;
    if (name == "power") {
        const double p = require_param(params, name, "p");
        spec = scalar_reaction("u^" + format_double(p));
        spec.params["p"] = p;
    } else if (name == "frank_kamenetskii") {
        spec = system_reaction("-u*exp(v)", "u*exp(v)");
    } else if (name == "haraux_youkana") {
        const double gamma = require_param(params, name, "gamma");
        if (!(gamma > 0.0)) {
            throw std::invalid_argument("haraux_youkana requires gamma > 0");
        }
        const std::string exponent = format_double(gamma);
        spec = system_reaction("-u*exp(v^" + exponent + ")", "u*exp(v^" + exponent + ")");
        spec.params["gamma"] = gamma;
    } else if (name == "robin_lambda") {
        const double lambda = require_param(params, name, "lambda");
        spec = scalar_reaction(format_double(lambda) + "*exp(u)");
        spec.params["lambda"] = lambda;
    }
    spec.family = name;
    spec.positivity = family->positivity;
    return spec;
}

Field eval_over_grid(const ExprPtr& expr, double t, const Grid& grid, const Field* u,
                     const Field* v) {
    Field out(grid, 0.0);
    Bindings b;
    b.t = t;
    for (int j = 0; j < grid.ny(); ++j) {
        if (grid.domain.dim == 2) b.y = grid.y(j);
        for (int i = 0; i < grid.nx(); ++i) {
            b.x = grid.x(i);
            const std::size_t idx = grid.index(i, j);
            if (u) b.u = u->values[idx];
            if (v) b.v = v->values[idx];
            out.values[idx] = eval(expr, b);
        }
    }
    return out;
}

}  // namespace heatlab
