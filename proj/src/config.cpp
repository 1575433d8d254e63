#include "thresh/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace thresh::config {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    std::ostringstream os;
    os << "config";
    if (line > 0) os << " line " << line;
    os << ": " << msg;
    throw ConfigError(os.str());
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

std::optional<double> parse_number(const std::string& s) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    double out;
    auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc{} || res.ptr != e) return std::nullopt;
    return out;
}

Value parse_scalar(const std::string& text, int line) {
    Value val;
    val.line = line;
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
        val.v = text.substr(1, text.size() - 2);
        return val;
    }
    if (text == "true") {
        val.v = true;
        return val;
    }
    if (text == "false") {
        val.v = false;
        return val;
    }
    if (auto num = parse_number(text)) {
        val.v = *num;
        return val;
    }
    fail(line, "cannot parse value '" + text + "'");
}

Value parse_array(const std::string& body, int line) {
    Value val;
    val.line = line;
    std::vector<std::string> items;
    std::string cur;
    bool quoted = false;
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    if (items.empty()) {
        val.v = std::vector<double>{};
        return val;
    }
    if (items.front().size() >= 1 && items.front().front() == '"') {
        std::vector<std::string> out;
        for (auto& it : items) {
            if (it.size() < 2 || it.front() != '"' || it.back() != '"')
                fail(line, "mixed or malformed string array");
            out.push_back(it.substr(1, it.size() - 2));
        }
        val.v = std::move(out);
        return val;
    }
    std::vector<double> out;
    for (auto& it : items) {
        auto num = parse_number(it);
        if (!num) fail(line, "cannot parse array element '" + it + "'");
        out.push_back(*num);
    }
    val.v = std::move(out);
    return val;
}

} // namespace

const Node* Node::child(const std::string& name) const {
    auto it = children.find(name);
    return it == children.end() ? nullptr : &it->second;
}

const Value* Node::value(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? nullptr : &it->second;
}

Node parse_string(const std::string& text) {
    Node root;
    Node* section = &root;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            const std::string path = trim(line.substr(1, line.size() - 2));
            if (path.empty()) fail(line_no, "empty section name");
            section = &root;
            std::istringstream ps(path);
            std::string part;
            while (std::getline(ps, part, '.')) {
                part = trim(part);
                if (!valid_key(part)) fail(line_no, "bad section name '" + part + "'");
                section = &section->children[part];
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string rhs = trim(line.substr(eq + 1));
        if (!valid_key(key)) fail(line_no, "bad key '" + key + "'");
        if (section->values.count(key) || section->children.count(key))
            fail(line_no, "duplicate key '" + key + "'");
        if (rhs.empty()) fail(line_no, "missing value for '" + key + "'");
        if (rhs.front() == '[') {
            if (rhs.back() != ']') fail(line_no, "unterminated array (arrays are single-line)");
            section->values[key] = parse_array(rhs.substr(1, rhs.size() - 2), line_no);
        } else {
            section->values[key] = parse_scalar(rhs, line_no);
        }
    }
    return root;
}

Node parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

namespace {

using nlohmann::ordered_json;

// Schema-checked extraction helper: records every key it reads, fills the
// resolved document, and flags anything left over.
class Section {
  public:
    Section(const Node* node, std::string path, ordered_json& out)
        : node_(node), path_(std::move(path)), out_(&out) {}

    double number(const std::string& key, double def) {
        mark(key);
        const Value* v = node_ ? node_->value(key) : nullptr;
        double result = def;
        if (v) {
            if (!std::holds_alternative<double>(v->v)) fail(v->line, key + ": expected a number");
            result = std::get<double>(v->v);
        }
        (*out_)[key] = result;
        return result;
    }

    std::optional<double> number_opt(const std::string& key) {
        mark(key);
        const Value* v = node_ ? node_->value(key) : nullptr;
        if (!v) return std::nullopt;
        if (!std::holds_alternative<double>(v->v)) fail(v->line, key + ": expected a number");
        const double result = std::get<double>(v->v);
        (*out_)[key] = result;
        return result;
    }

    bool boolean(const std::string& key, bool def) {
        mark(key);
        const Value* v = node_ ? node_->value(key) : nullptr;
        bool result = def;
        if (v) {
            if (!std::holds_alternative<bool>(v->v)) fail(v->line, key + ": expected true/false");
            result = std::get<bool>(v->v);
        }
        (*out_)[key] = result;
        return result;
    }

    std::string text(const std::string& key, const std::string& def) {
        mark(key);
        const Value* v = node_ ? node_->value(key) : nullptr;
        std::string result = def;
        if (v) {
            if (!std::holds_alternative<std::string>(v->v))
                fail(v->line, key + ": expected a string");
            result = std::get<std::string>(v->v);
        }
        (*out_)[key] = result;
        return result;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        mark(key);
        const Value* v = node_ ? node_->value(key) : nullptr;
        std::vector<double> result = std::move(def);
        if (v) {
            if (!std::holds_alternative<std::vector<double>>(v->v))
                fail(v->line, key + ": expected an array of numbers");
            result = std::get<std::vector<double>>(v->v);
        }
        (*out_)[key] = result;
        return result;
    }

    Section sub(const std::string& key) {
        mark_child(key);
        (*out_)[key] = ordered_json::object();
        return Section(node_ ? node_->child(key) : nullptr, path_ + key + ".",
                       (*out_)[key]);
    }

    void finish() const {
        if (!node_) return;
        for (const auto& [k, v] : node_->values)
            if (!seen_values_.count(k)) fail(v.line, "unknown key '" + path_ + k + "'");
        for (const auto& [k, child] : node_->children)
            if (!seen_children_.count(k)) {
                (void)child;
                fail(0, "unknown section '" + path_ + k + "'");
            }
    }

  private:
    void mark(const std::string& k) { seen_values_.insert(k); }
    void mark_child(const std::string& k) { seen_children_.insert(k); }
    const Node* node_;
    std::string path_;
    ordered_json* out_;
    std::set<std::string> seen_values_;
    std::set<std::string> seen_children_;
};

TailSpec tail_from(Section& sec, bool allow_cutoff) {
    const std::string type = sec.text("type", "none");
    TailSpec tail;
    if (type == "none") {
        tail = TailSpec::none();
    } else if (type == "inverse_square") {
        tail = TailSpec::inverse_square(sec.number("A", 1.0), sec.number("R0", 1.0));
    } else if (type == "inverse_square_core") {
        tail = TailSpec::inverse_square_with_core(sec.number("V0", 1.0), sec.number("A", 1.0),
                                                  sec.number("R0", 1.0));
    } else if (type == "coulomb_dominant") {
        tail = TailSpec::coulomb_dominant(sec.number("a", 1.0), sec.number("R0", 1.0));
    } else if (type == "exp_envelope") {
        tail = TailSpec::exponential_envelope(sec.number("amplitude", 1.0),
                                              sec.number("rate", 1.0));
    } else if (type == "hard_cutoff") {
        if (!allow_cutoff) throw ConfigError("config: nested hard_cutoff tails not supported");
        const double rc = sec.number("Rc", 1.0);
        Section inner = sec.sub("inner");
        TailSpec payload = tail_from(inner, false);
        inner.finish();
        tail = TailSpec::hard_cutoff(std::move(payload), rc);
    } else {
        throw ConfigError("config: unknown tail type '" + type + "'");
    }
    return tail;
}

} // namespace

ExperimentConfig experiment_config_from_node(const Node& root, const std::string& kind_override) {
    ordered_json resolved = ordered_json::object();
    Section top(&root, "", resolved);
    ExperimentConfig cfg;

    cfg.kind = top.text("kind", kind_override);
    if (!kind_override.empty() && cfg.kind != kind_override)
        throw ConfigError("config: kind '" + cfg.kind + "' does not match subcommand '" +
                          kind_override + "'");
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
        throw ConfigError("config: unknown experiment kind '" + cfg.kind + "'");
    resolved["kind"] = cfg.kind;
    cfg.out_dir = top.text("out_dir", "out/" + cfg.kind);
    cfg.plots = top.boolean("plots", false);

    {
        Section pot = top.sub("potential");
        cfg.potential.lambda = pot.number("lambda", 1.0);
        {
            Section core = pot.sub("core");
            const std::string type = core.text("type", "none");
            if (type == "none")
                cfg.potential.core = CoreSpec::none();
            else if (type == "square_well")
                cfg.potential.core =
                    CoreSpec::square_well(core.number("depth", 1.0), core.number("radius", 1.0));
            else
                throw ConfigError("config: unknown core type '" + type + "'");
            core.finish();
        }
        {
            Section tail = pot.sub("tail");
            cfg.potential.tail = tail_from(tail, true);
            tail.finish();
        }
        pot.finish();
        cfg.potential.validate();
    }

    {
        Section sol = top.sub("solver");
        cfg.l = static_cast<int>(sol.number("l", 0));
        cfg.nodes = static_cast<int>(sol.number("nodes", 0));
        cfg.solver.inner_points = static_cast<std::size_t>(sol.number("inner_points", 2000));
        cfg.solver.points_per_decade =
            static_cast<std::size_t>(sol.number("points_per_decade", 1500));
        cfg.solver.zero_energy_r_max = sol.number("zero_energy_r_max", 1e4);
        cfg.solver.r_max_cap = sol.number("r_max_cap", 1e6);
        cfg.solver.tol_match = sol.number("tol_match", 1e-9);
        cfg.solver.tol_lambda = sol.number("tol_lambda", 1e-8);
        cfg.probe_radius = sol.number("probe_radius", 10.0);
        if (cfg.l < 0 || cfg.nodes < 0) throw ConfigError("config: l and nodes must be >= 0");
        sol.finish();
    }

    {
        Section sw = top.sub("sweep");
        cfg.e_min = sw.number("e_min", 1e-5);
        cfg.e_max = sw.number("e_max", 1e-1);
        cfg.sweep_points = static_cast<int>(sw.number("points", 6));
        cfg.lambdas = sw.numbers("lambdas", {});
        if (!(cfg.e_min > 0) || !(cfg.e_max > cfg.e_min))
            throw ConfigError("config: need 0 < e_min < e_max in [sweep]");
        if (cfg.sweep_points < 2) throw ConfigError("config: [sweep].points must be >= 2");
        sw.finish();
    }

    {
        Section gr = top.sub("greens");
        cfg.k_values = gr.numbers("k_values", {1.0, 0.3, 0.1, 0.03, 0.01});
        cfg.l_max = static_cast<int>(gr.number("l_max", 48));
        cfg.r_limit = gr.number("r_limit", 10.0);
        cfg.samples = static_cast<int>(gr.number("samples", 200));
        gr.finish();
    }

    {
        Section env = top.sub("envelope");
        cfg.beta = env.number("beta", 10.0);
        cfg.r0_tilde = env.number_opt("r0_tilde");
        cfg.env_A = env.number_opt("A");
        cfg.env_R0 = env.number_opt("R0");
        cfg.env_a = env.number_opt("a");
        cfg.env_V0 = env.number("V0", 1.0);
        cfg.env_k = env.number("k", 0.1);
        env.finish();
    }

    {
        Section t1 = top.sub("theorem1");
        cfg.t1_amplitude = t1.number("amplitude", 0.0);
        cfg.t1_rate = t1.number("rate", 0.0);
        cfg.t1_points = static_cast<int>(t1.number("points", 5));
        t1.finish();
    }

    {
        Section t4 = top.sub("theorem4");
        cfg.t4_k_min = t4.number("k_min", 1e-4);
        cfg.t4_k_max = t4.number("k_max", 1e-1);
        cfg.t4_points = static_cast<int>(t4.number("points", 13));
        cfg.t4_trial_energy = t4.number("trial_energy", 1e-4);
        if (!(cfg.t4_k_min > 0) || !(cfg.t4_k_max > cfg.t4_k_min))
            throw ConfigError("config: need 0 < k_min < k_max in [theorem4]");
        t4.finish();
    }

    top.finish();
    cfg.resolved_json = resolved.dump(2);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::string& kind_override) {
    return experiment_config_from_node(parse_file(path), kind_override);
}

} // namespace thresh::config
