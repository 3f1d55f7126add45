#pragma once

#include <map>
#include <string>
#include <vector>

#include "heatlab/expr.hpp"
#include "heatlab/grid.hpp"

namespace heatlab {

// A scalar reaction f(t,x,y,u) or a two-component pair f,g(t,x,y,u,v), with the
// named parameters already substituted as constants.
struct ReactionSpec {
    enum class Kind { scalar, system_pair };

    Kind kind = Kind::scalar;
    ExprPtr f;
    ExprPtr g;  // system_pair only
    std::string family;  // builtin family name; empty for ad-hoc expressions
    std::map<std::string, double> params;
    // Registry flag: f(t,x,0,v) >= 0 and g(t,x,u,0) >= 0 on a sampled grid.
    bool positivity = true;

    bool is_system() const { return kind == Kind::system_pair; }
};

// Validates that a scalar reaction does not reference v.
ReactionSpec scalar_reaction(ExprPtr f);
ReactionSpec scalar_reaction(const std::string& text);
ReactionSpec system_reaction(ExprPtr f, ExprPtr g);
ReactionSpec system_reaction(const std::string& f_text, const std::string& g_text);

struct BuiltinFamily {
    std::string name;
    std::vector<std::string> required_params;
    ReactionSpec::Kind kind;
    bool positivity;
    std::string description;
};

const std::vector<BuiltinFamily>& builtin_families();

// Instantiates a registered family. Throws std::invalid_argument for an
// unknown family or a missing parameter.
ReactionSpec builtin_reaction(const std::string& name,
                              const std::map<std::string, double>& params = {});

// Evaluates an expression over every node of a grid with the checked eval
// semantics (any non-finite nodal value raises eval_error). `u` is required;
// `v` may be null for expressions that do not reference it.
Field eval_over_grid(const ExprPtr& expr, double t, const Grid& grid, const Field* u,
                     const Field* v = nullptr);

}  // namespace heatlab
