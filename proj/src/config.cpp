#include "dpgm/config.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dpgm/errors.hpp"

namespace dpgm {

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

ConfigScalar parse_scalar(const std::string& raw, const std::string& source, int line) {
    const std::string s = trim(raw);
    if (s.empty()) fail(source, line, "empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') fail(source, line, "unterminated string");
        return s.substr(1, s.size() - 2);
    }
    if (s == "true") return true;
    if (s == "false") return false;
    std::size_t used = 0;
    try {
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    return s;  // bare word
}

// Splits a list body on commas that are outside quotes and parentheses.
std::vector<std::string> split_list(const std::string& body) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    bool quoted = false;
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (!quoted && c == '(') ++depth;
        if (!quoted && c == ')') --depth;
        if (c == ',' && depth == 0 && !quoted) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) parts.push_back(cur);
    return parts;
}

class TableReader {
public:
    TableReader(const ConfigTable& t, const std::string& source) : table_(t), source_(source) {}

    ~TableReader() = default;

    const ConfigValue* find(const std::string& key) {
        used_.insert(key);
        auto it = table_.entries.find(key);
        return it == table_.entries.end() ? nullptr : &it->second;
    }

    [[noreturn]] void field_error(const std::string& key, const std::string& msg) const {
        auto it = table_.entries.find(key);
        const int line = it == table_.entries.end() ? table_.line : it->second.line;
        fail(source_, line, "field '" + section() + key + "': " + msg);
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        if (const auto* v = find(key)) {
            for (const auto& item : v->items) {
                if (!std::holds_alternative<double>(item)) field_error(key, "expected a number");
                out.push_back(std::get<double>(item));
            }
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) {
        std::vector<std::string> out;
        if (const auto* v = find(key)) {
            for (const auto& item : v->items) {
                if (std::holds_alternative<std::string>(item)) {
                    out.push_back(std::get<std::string>(item));
                } else if (std::holds_alternative<double>(item)) {
                    std::ostringstream os;
                    os << std::get<double>(item);
                    out.push_back(os.str());
                } else {
                    field_error(key, "expected a string");
                }
            }
        }
        return out;
    }

    double number(const std::string& key, double fallback) {
        auto v = numbers(key);
        if (v.empty()) return fallback;
        if (v.size() != 1) field_error(key, "expected a single number");
        return v.front();
    }

    int integer(const std::string& key, int fallback) {
        const double v = number(key, fallback);
        if (v != static_cast<double>(static_cast<long long>(v))) field_error(key, "expected an integer");
        return static_cast<int>(v);
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
        const double v = number(key, static_cast<double>(fallback));
        if (v < 0 || v != static_cast<double>(static_cast<long long>(v)))
            field_error(key, "expected a nonnegative integer");
        return static_cast<std::uint64_t>(v);
    }

    bool boolean(const std::string& key, bool fallback) {
        const auto* v = find(key);
        if (!v) return fallback;
        if (v->items.size() != 1 || !std::holds_alternative<bool>(v->items.front()))
            field_error(key, "expected true or false");
        return std::get<bool>(v->items.front());
    }

    std::string string(const std::string& key, const std::string& fallback) {
        auto v = strings(key);
        if (v.empty()) return fallback;
        if (v.size() != 1) field_error(key, "expected a single string");
        return v.front();
    }

    void reject_unknown() const {
        for (const auto& [key, value] : table_.entries)
            if (!used_.count(key)) fail(source_, value.line, "unknown field '" + section() + key + "'");
    }

private:
    std::string section() const { return table_.name.empty() ? "" : table_.name + "."; }

    const ConfigTable& table_;
    const std::string& source_;
    std::set<std::string> used_;
};

} // namespace

ConfigDocument parse_config_text(const std::string& text, const std::string& source) {
    ConfigDocument doc;
    doc.source = source;
    doc.tables.push_back({"", 0, {}});
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::set<std::string> seen_single;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            const bool array = line.rfind("[[", 0) == 0;
            const std::string close = array ? "]]" : "]";
            if (line.size() < close.size() * 2 + 1 || line.substr(line.size() - close.size()) != close)
                fail(source, line_no, "malformed section header");
            const std::string name = trim(line.substr(close.size(), line.size() - 2 * close.size()));
            if (name.empty()) fail(source, line_no, "empty section name");
            if (!array && !seen_single.insert(name).second) fail(source, line_no, "duplicate section [" + name + "]");
            doc.tables.push_back({name, line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(source, line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(source, line_no, "missing key");
        ConfigValue v;
        v.line = line_no;
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') fail(source, line_no, "unterminated list");
            v.is_list = true;
            for (const auto& part : split_list(value.substr(1, value.size() - 2)))
                v.items.push_back(parse_scalar(part, source, line_no));
            if (v.items.empty()) fail(source, line_no, "empty list for '" + key + "'");
        } else {
            v.items.push_back(parse_scalar(value, source, line_no));
        }
        auto& table = doc.tables.back();
        if (!table.entries.emplace(key, std::move(v)).second) fail(source, line_no, "duplicate key '" + key + "'");
    }
    return doc;
}

NoiseModel NoiseSpec::model(int size) const {
    NoiseModel m;
    if (state_variance > 0.0 || state_mean != 0.0) m.state = GaussianNoise::isotropic(size, state_mean, state_variance);
    if (gradient_variance > 0.0 || gradient_mean != 0.0)
        m.gradient = GaussianNoise::isotropic(size, gradient_mean, gradient_variance);
    if (prox_variance > 0.0 || prox_mean != 0.0) m.prox = GaussianNoise::isotropic(size, prox_mean, prox_variance);
    return m;
}

ExperimentConfig build_experiment_config(const ConfigDocument& doc) {
    ExperimentConfig cfg;
    const auto& src = doc.source;
    bool saw_topology = false;
    for (const auto& table : doc.tables) {
        TableReader r(table, src);
        if (table.name.empty()) {
            cfg.name = r.string("name", cfg.name);
        } else if (table.name == "experiment") {
            cfg.runs = r.integer("runs", cfg.runs);
            cfg.master_seed = r.seed("master_seed", cfg.master_seed);
            cfg.compute_bounds = r.boolean("bounds", cfg.compute_bounds);
            cfg.oracle_tol = r.number("oracle_tol", cfg.oracle_tol);
            cfg.workers = r.integer("workers", cfg.workers);
            if (cfg.runs < 1) r.field_error("runs", "must be at least 1");
            if (!(cfg.oracle_tol > 0.0)) r.field_error("oracle_tol", "must be positive");
        } else if (table.name == "scenario") {
            auto& p = cfg.scenario;
            cfg.nodes = r.integer("nodes", cfg.nodes);
            p.dim = r.integer("dim", p.dim);
            p.rows_per_node = r.integer("rows_per_node", 2 * p.dim);
            p.horizon = r.integer("horizon", p.horizon);
            p.lambda1 = r.number("lambda1", p.lambda1);
            p.noise_variance = r.number("noise_variance", p.noise_variance);
            p.condition_number = r.number("condition_number", p.condition_number);
            p.sigma_max = r.number("sigma_max", p.sigma_max);
            p.omega = r.number("omega", p.omega);
            p.sampling_time = r.number("sampling_time", p.sampling_time);
            p.time_varying = r.boolean("time_varying", p.time_varying);
            cfg.scenario_seed = r.seed("seed", cfg.scenario_seed);
            cfg.resample_scenario = r.boolean("resample", cfg.resample_scenario);
            if (cfg.nodes < 2) r.field_error("nodes", "need at least two nodes");
            if (p.dim < 1) r.field_error("dim", "must be positive");
            if (p.rows_per_node < p.dim) r.field_error("rows_per_node", "must be >= dim");
            if (p.horizon < 1) r.field_error("horizon", "must be at least 1");
            if (p.condition_number < 1.0) r.field_error("condition_number", "must be >= 1");
            if (p.lambda1 < 0.0) r.field_error("lambda1", "must be nonnegative");
        } else if (table.name == "topology") {
            saw_topology = true;
            for (const auto& kind : r.strings("kinds")) {
                try {
                    cfg.topologies.push_back(TopologySpec::parse(kind));
                } catch (const ConfigError& e) {
                    r.field_error("kinds", e.what());
                }
            }
            cfg.topology_seed = r.seed("seed", cfg.topology_seed);
        } else if (table.name == "solver") {
            std::vector<Algorithm> algs;
            for (const auto& name : r.strings("algorithm")) {
                try {
                    algs.push_back(parse_algorithm(name));
                } catch (const ConfigError& e) {
                    r.field_error("algorithm", e.what());
                }
            }
            if (algs.empty()) r.field_error("algorithm", "missing");
            std::vector<std::optional<double>> alphas;
            if (const auto* v = r.find("alpha")) {
                for (const auto& item : v->items) {
                    if (std::holds_alternative<double>(item) && std::get<double>(item) > 0.0) {
                        alphas.emplace_back(std::get<double>(item));
                    } else if (std::holds_alternative<std::string>(item) && std::get<std::string>(item) == "auto") {
                        alphas.emplace_back(std::nullopt);
                    } else {
                        r.field_error("alpha", "expected a positive number or \"auto\"");
                    }
                }
            } else {
                alphas.emplace_back(std::nullopt);
            }
            auto steps = r.numbers("inner_steps");
            if (steps.empty()) steps.push_back(1);
            for (double s : steps)
                if (s < 1 || s != static_cast<double>(static_cast<int>(s)))
                    r.field_error("inner_steps", "expected positive integers");
            for (auto a : algs)
                for (auto alpha : alphas)
                    for (double s : steps) cfg.solvers.push_back({a, alpha, static_cast<int>(s)});
        } else if (table.name == "noise") {
            NoiseSpec n;
            n.id = r.string("id", "noise" + std::to_string(cfg.noises.size()));
            n.state_mean = r.number("state_mean", 0.0);
            n.state_variance = r.number("state_variance", 0.0);
            n.gradient_mean = r.number("gradient_mean", 0.0);
            n.gradient_variance = r.number("gradient_variance", 0.0);
            n.prox_mean = r.number("prox_mean", 0.0);
            n.prox_variance = r.number("prox_variance", 0.0);
            for (const char* key : {"state_variance", "gradient_variance", "prox_variance"})
                if (r.number(key, 0.0) < 0.0) r.field_error(key, "must be nonnegative");
            cfg.noises.push_back(n);
        } else if (table.name == "output") {
            cfg.out_dir = r.string("dir", cfg.out_dir);
            cfg.per_replicate = r.boolean("per_replicate", cfg.per_replicate);
        } else {
            fail(src, table.line, "unknown section [" + table.name + "]");
        }
        r.reject_unknown();
    }
    if (!saw_topology || cfg.topologies.empty()) throw ConfigError(src + ": field 'topology.kinds': missing");
    if (cfg.solvers.empty()) throw ConfigError(src + ": at least one [[solver]] entry is required");
    if (cfg.noises.empty()) cfg.noises.push_back(NoiseSpec{});
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = build_experiment_config(parse_config_text(ss.str(), path));
    if (cfg.name == "experiment") cfg.name = std::filesystem::path(path).stem().string();
    return cfg;
}

} // namespace dpgm
