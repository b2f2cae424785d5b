// Run-configuration files: a small key/value format with nested [table]
// headers, the single self-describing input of the command-line tool.
//
//   [problem]
//   equations = 2
//   domain  = [0.0, 1.0]
//   horizon = 0.25
//   constant_coefficients = true
//
//   [windows]
//   omega  = [0.30, 0.70]      # control window; omega0/1/2 nested inside
//
//   [coefficients]             # entries d1..dm, g11..gmm, a11..amm
//   d1 = "1.0"                 # expression strings in t and x, or sub-tables
//   [coefficients.a22]
//   type = "affine_x"          # constant | affine_x | polynomial_x | expr
//   params = [0.0, 1.0]
//
// plus [grid], [hum], [weights], [check], [sweep], [verify], [observability],
// [poincare], [initial], [approximate]; see the shipped configs for the full
// key set. Unknown keys are reported as errors with their line number.

#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "algebraic.hpp"
#include "cutoff.hpp"
#include "hum.hpp"
#include "model.hpp"

namespace nullctrl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConfigFile {
public:
    struct Value {
        enum class Kind { number, boolean, text, number_list, text_list } kind;
        double num = 0.0;
        bool flag = false;
        std::string text;
        std::vector<double> nums;
        std::vector<std::string> texts;
        int line = 0;
        mutable bool used = false;
    };

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    static ConfigFile parse_string(const std::string& content, const std::string& name = "<config>") {
        ConfigFile cfg;
        cfg.name_ = name;
        std::istringstream in(content);
        std::string line, table;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip_comment(line);
            if (s.empty()) continue;
            if (s.front() == '[') {
                size_t close = s.find(']');
                if (close == std::string::npos || close + 1 != s.size())
                    cfg.fail(lineno, "malformed table header");
                table = trim(s.substr(1, close - 1));
                if (table.empty()) cfg.fail(lineno, "empty table name");
                continue;
            }
            size_t eq = s.find('=');
            if (eq == std::string::npos) cfg.fail(lineno, "expected key = value");
            std::string key = trim(s.substr(0, eq));
            std::string val = trim(s.substr(eq + 1));
            if (key.empty()) cfg.fail(lineno, "empty key");
            if (val.empty()) cfg.fail(lineno, "empty value for key \"" + key + "\"");
            std::string full = table.empty() ? key : table + "." + key;
            if (cfg.values_.count(full)) cfg.fail(lineno, "duplicate key \"" + full + "\"");
            cfg.values_[full] = cfg.parse_value(val, lineno);
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double number(const std::string& key) const {
        const Value& v = require(key);
        if (v.kind != Value::Kind::number) fail(v.line, "\"" + key + "\" must be a number");
        return v.num;
    }
    double number_or(const std::string& key, double dflt) const {
        return has(key) ? number(key) : dflt;
    }
    int integer(const std::string& key) const {
        double d = number(key);
        int i = static_cast<int>(d);
        if (d != i) fail(values_.at(key).line, "\"" + key + "\" must be an integer");
        return i;
    }
    int integer_or(const std::string& key, int dflt) const {
        return has(key) ? integer(key) : dflt;
    }
    bool boolean_or(const std::string& key, bool dflt) const {
        if (!has(key)) return dflt;
        const Value& v = require(key);
        if (v.kind != Value::Kind::boolean) fail(v.line, "\"" + key + "\" must be true or false");
        return v.flag;
    }
    std::string text(const std::string& key) const {
        const Value& v = require(key);
        if (v.kind != Value::Kind::text) fail(v.line, "\"" + key + "\" must be a quoted string");
        return v.text;
    }
    std::string text_or(const std::string& key, const std::string& dflt) const {
        return has(key) ? text(key) : dflt;
    }
    std::vector<double> numbers(const std::string& key) const {
        const Value& v = require(key);
        if (v.kind == Value::Kind::number) return {v.num};
        if (v.kind != Value::Kind::number_list) fail(v.line, "\"" + key + "\" must be a number array");
        return v.nums;
    }

    int line_of(const std::string& key) const {
        auto it = values_.find(key);
        return it == values_.end() ? 0 : it->second.line;
    }

    // keys never consumed by the run assembly (typos, misplaced sections)
    std::vector<std::pair<std::string, int>> unused_keys() const {
        std::vector<std::pair<std::string, int>> out;
        for (const auto& [k, v] : values_)
            if (!v.used) out.emplace_back(k, v.line);
        return out;
    }

    // all keys under "table." (suffix part returned)
    std::vector<std::string> keys_in(const std::string& table) const {
        std::vector<std::string> out;
        std::string prefix = table + ".";
        for (const auto& [k, v] : values_)
            if (k.rfind(prefix, 0) == 0) out.push_back(k.substr(prefix.size()));
        return out;
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(name_ + ":" + std::to_string(line) + ": " + msg);
    }

private:
    const Value& require(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(name_ + ": missing required key \"" + key + "\"");
        it->second.used = true;
        return it->second;
    }

    static std::string trim(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        return (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
    }

    static std::string strip_comment(const std::string& line) {
        bool in_str = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) return trim(line.substr(0, i));
        }
        return trim(line);
    }

    Value parse_value(const std::string& s, int line) const {
        Value v;
        v.line = line;
        if (s == "true" || s == "false") {
            v.kind = Value::Kind::boolean;
            v.flag = (s == "true");
            return v;
        }
        if (s.front() == '"') {
            if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
            v.kind = Value::Kind::text;
            v.text = s.substr(1, s.size() - 2);
            return v;
        }
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated array");
            std::string inner = s.substr(1, s.size() - 2);
            std::vector<std::string> parts;
            std::string cur;
            bool in_str = false;
            for (char c : inner) {
                if (c == '"') in_str = !in_str;
                if (c == ',' && !in_str) {
                    parts.push_back(trim(cur));
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            if (!trim(cur).empty()) parts.push_back(trim(cur));
            if (!parts.empty() && parts.front().size() && parts.front().front() == '"') {
                v.kind = Value::Kind::text_list;
                for (auto& p : parts) {
                    if (p.size() < 2 || p.front() != '"' || p.back() != '"')
                        fail(line, "mixed or malformed string array");
                    v.texts.push_back(p.substr(1, p.size() - 2));
                }
                return v;
            }
            v.kind = Value::Kind::number_list;
            for (auto& p : parts) v.nums.push_back(parse_number(p, line));
            return v;
        }
        v.kind = Value::Kind::number;
        v.num = parse_number(s, line);
        return v;
    }

    double parse_number(const std::string& s, int line) const {
        try {
            size_t used = 0;
            double d = std::stod(s, &used);
            if (used != s.size()) fail(line, "bad number \"" + s + "\"");
            return d;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            fail(line, "bad number \"" + s + "\"");
        }
    }

    std::string name_;
    std::map<std::string, Value> values_;
};

// ---- problem assembly --------------------------------------------------------

namespace detail_config {

inline CoefficientField make_field(const ConfigFile& cfg, const std::string& base,
                                   int max_t, int max_x) {
    // inline expression string: key = "..."
    if (cfg.has(base)) return CoefficientField::from_expression(cfg.text(base), max_t, max_x);
    // structured: [coefficients.<name>] with type/params
    std::string type = cfg.text(base + ".type");
    if (type == "constant") {
        auto p = cfg.numbers(base + ".params");
        if (p.size() != 1) cfg.fail(cfg.line_of(base + ".params"), "constant takes one parameter");
        return CoefficientField(p[0]);
    }
    if (type == "affine_x") {
        auto p = cfg.numbers(base + ".params");
        if (p.size() != 2) cfg.fail(cfg.line_of(base + ".params"), "affine_x takes [c0, c1]");
        std::ostringstream f;
        f.precision(17);
        f << p[0] << " + " << p[1] << "*x";
        return CoefficientField::from_expression(f.str(), max_t, max_x);
    }
    if (type == "polynomial" || type == "polynomial_x") {
        auto p = cfg.numbers(base + ".params");
        if (p.empty()) cfg.fail(cfg.line_of(base + ".params"), "polynomial needs coefficients");
        std::ostringstream f;
        f.precision(17);
        for (size_t k = 0; k < p.size(); ++k) {
            if (k) f << " + ";
            f << p[k];
            for (size_t j = 0; j < k; ++j) f << "*x";
        }
        return CoefficientField::from_expression(f.str(), max_t, max_x);
    }
    if (type == "expr") return CoefficientField::from_expression(cfg.text(base + ".formula"), max_t, max_x);
    cfg.fail(cfg.line_of(base + ".type"), "unknown coefficient type \"" + type + "\"");
}

}  // namespace detail_config

struct RunSetup {
    ProblemSpec spec;
    Grid grid;
    // hum
    double penalty = 1e6;
    double cg_tol = 1e-8;
    int cg_max_iter = 500;
    double regularity_K = 0.5;
    ReductionMode mode = ReductionMode::constant_coefficients;
    // weights
    double lambda = 1.0;
    double s_value = 0.0;  // resolved s
    int rho_exponent = 7;
    // check
    SpaceTimeWindow check_window;
    bool has_check_window = false;
    double det_bound = 1.0;
    double tol_pos = kTolPos;
    int samples = kConditionSamples;
    // misc sections
    std::vector<double> sweep_penalties;
    std::vector<int> verify_nx;
    int verify_nt_over_nx = 1;
    std::vector<std::string> verify_fields;
    int observability_samples = 0;
    double poincare_g = 1.0, poincare_a = 0.0;
    int poincare_nx = 200;
    std::vector<std::string> initial_exprs;
    std::vector<std::string> target_exprs;
    double approx_eps = 0.0;
    double approx_k_max = 1e8;

    GridFunction initial_data() const {
        if (static_cast<int>(initial_exprs.size()) != spec.m)
            throw ConfigError("[initial] must define y1..y" + std::to_string(spec.m));
        std::vector<Expr> es;
        for (const auto& e : initial_exprs) es.push_back(Expr::parse(e));
        return GridFunction::sample(grid, spec.m,
                                    [&](int c, double x) { return es[c](0.0, x); });
    }
};

inline RunSetup load_run_setup(const ConfigFile& cfg) {
    RunSetup rs;
    ProblemSpec& sp = rs.spec;
    sp.m = cfg.integer("problem.equations");
    if (sp.m < 2) cfg.fail(cfg.line_of("problem.equations"), "equations must be >= 2");
    auto dom = cfg.numbers("problem.domain");
    if (dom.size() != 2) cfg.fail(cfg.line_of("problem.domain"), "domain must be [x_lo, x_hi]");
    sp.x_lo = dom[0];
    sp.x_hi = dom[1];
    sp.T = cfg.number("problem.horizon");

    auto win = [&](const std::string& key) {
        auto w = cfg.numbers("windows." + key);
        if (w.size() != 2) cfg.fail(cfg.line_of("windows." + key), key + " must be [lo, hi]");
        return Window{w[0], w[1]};
    };
    sp.omega = win("omega");
    sp.omega0 = win("omega0");
    sp.omega1 = win("omega1");
    sp.omega2 = win("omega2");

    sp.coeffs = CoefficientSet(sp.m);
    sp.coeffs.is_constant = cfg.boolean_or("problem.constant_coefficients", false);
    const int max_t = 3, max_x = 7;  // generous symbolic-derivative depth
    for (int l = 0; l < sp.m; ++l) {
        std::string key = "coefficients.d" + std::to_string(l + 1);
        if (cfg.has(key) || cfg.has(key + ".type"))
            sp.coeffs.d[l] = detail_config::make_field(cfg, key, max_t, max_x);
        else
            sp.coeffs.d[l] = CoefficientField(1.0);
    }
    for (int i = 0; i < sp.m; ++i)
        for (int j = 0; j < sp.m; ++j) {
            std::string suffix = std::to_string(i + 1) + std::to_string(j + 1);
            std::string gkey = "coefficients.g" + suffix;
            std::string akey = "coefficients.a" + suffix;
            if (cfg.has(gkey) || cfg.has(gkey + ".type"))
                sp.coeffs.G(i, j) = detail_config::make_field(cfg, gkey, max_t, max_x);
            if (cfg.has(akey) || cfg.has(akey + ".type"))
                sp.coeffs.A(i, j) = detail_config::make_field(cfg, akey, max_t, max_x);
        }
    if (sp.coeffs.is_constant && !sp.coeffs.all_fields_constant())
        throw ConfigError("constant_coefficients = true but some coefficient varies");
    sp.coeffs.d0 = 1e300;
    for (int l = 0; l < sp.m; ++l)
        for (int k = 0; k <= 16; ++k) {
            double d = sp.coeffs.d[l](0.37 * sp.T, sp.x_lo + (sp.x_hi - sp.x_lo) * k / 16.0);
            sp.coeffs.d0 = std::min(sp.coeffs.d0, d);
        }

    rs.grid = Grid(cfg.integer("grid.nx"), cfg.integer("grid.nt"), sp.x_lo, sp.x_hi, sp.T);

    std::string mode = cfg.text_or("hum.mode", sp.coeffs.is_constant ? "constant" : "determinant");
    if (mode == "constant") rs.mode = ReductionMode::constant_coefficients;
    else if (mode == "zero-order") rs.mode = ReductionMode::zero_order_coupling;
    else if (mode == "determinant") rs.mode = ReductionMode::determinant_condition;
    else cfg.fail(cfg.line_of("hum.mode"), "mode must be constant | zero-order | determinant");
    rs.penalty = cfg.number_or("hum.penalty", 1e6);
    rs.cg_tol = cfg.number_or("hum.cg_tol", 1e-8);
    rs.cg_max_iter = cfg.integer_or("hum.cg_max_iter", 500);
    rs.regularity_K = cfg.number_or("hum.regularity_K", 0.5);

    rs.lambda = cfg.number_or("weights.lambda", 1.0);
    rs.rho_exponent = cfg.integer_or("weights.exponent",
                                     rs.mode == ReductionMode::constant_coefficients ? 7 : 9);
    {
        std::string rule = cfg.text_or("weights.s_rule", "auto");
        auto eta = build_eta0(sp.x_lo, sp.x_hi, sp.omega2);
        if (rule == "explicit") {
            rs.s_value = cfg.number("weights.s");
        } else if (rule == "paper") {
            rs.s_value = default_s_lambda(sp.T, cfg.number_or("weights.c_cal", 1.0)).first;
        } else if (rule == "auto") {
            rs.s_value = auto_s(eta, rs.lambda, sp.T, cfg.number_or("weights.target_exponent", 30.0));
        } else {
            cfg.fail(cfg.line_of("weights.s_rule"), "s_rule must be auto | paper | explicit");
        }
    }

    if (cfg.has("check.window")) {
        auto w = cfg.numbers("check.window");
        if (w.size() != 4) cfg.fail(cfg.line_of("check.window"), "window must be [t0, t1, x0, x1]");
        rs.check_window = {w[0], w[1], w[2], w[3]};
        rs.has_check_window = true;
    }
    rs.det_bound = cfg.number_or("check.det_bound", 1.0);
    rs.tol_pos = cfg.number_or("check.tol_pos", kTolPos);
    rs.samples = cfg.integer_or("check.samples", kConditionSamples);

    if (cfg.has("sweep.penalties")) rs.sweep_penalties = cfg.numbers("sweep.penalties");
    if (cfg.has("verify.nx_levels")) {
        for (double v : cfg.numbers("verify.nx_levels")) rs.verify_nx.push_back(static_cast<int>(v));
        rs.verify_nt_over_nx = cfg.integer_or("verify.nt_over_nx", 1);
    }
    for (int c = 0; c < sp.m; ++c) {
        std::string key = "verify.f" + std::to_string(c + 1);
        if (cfg.has(key)) rs.verify_fields.push_back(cfg.text(key));
    }
    rs.observability_samples = cfg.integer_or("observability.samples", 0);
    rs.poincare_g = cfg.number_or("poincare.g", 1.0);
    rs.poincare_a = cfg.number_or("poincare.a", 0.0);
    rs.poincare_nx = cfg.integer_or("poincare.nx", 200);
    for (int c = 0; c < sp.m; ++c) {
        std::string key = "initial.y" + std::to_string(c + 1);
        if (cfg.has(key)) rs.initial_exprs.push_back(cfg.text(key));
        std::string tkey = "approximate.target" + std::to_string(c + 1);
        if (cfg.has(tkey)) rs.target_exprs.push_back(cfg.text(tkey));
    }
    rs.approx_eps = cfg.number_or("approximate.eps", 0.0);
    rs.approx_k_max = cfg.number_or("approximate.k_max", 1e8);
    return rs;
}

}  // namespace nullctrl
