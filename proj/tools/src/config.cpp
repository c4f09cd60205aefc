#include "lyaplab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace lyaplab {

namespace {

enum class Type { real, integer, uint64, choice, text, real_list, integer_list, matrix, matrix_list, omega, auto_integer };

struct Spec {
    std::string key;
    Type type;
    std::string default_value;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_open = false;
    bool hi_open = false;
    std::vector<std::string> choices;
    std::string description;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

Spec real_key(std::string key, std::string def, std::string doc, double lo = -kInf, double hi = kInf,
              bool lo_open = false, bool hi_open = false) {
    return {std::move(key), Type::real, std::move(def), lo, hi, lo_open, hi_open, {}, std::move(doc)};
}

Spec int_key(std::string key, std::string def, std::string doc, double lo, double hi) {
    return {std::move(key), Type::integer, std::move(def), lo, hi, false, false, {}, std::move(doc)};
}

Spec choice_key(std::string key, std::string def, std::vector<std::string> choices, std::string doc) {
    return {std::move(key), Type::choice, std::move(def), -kInf, kInf, false, false, std::move(choices), std::move(doc)};
}

Spec typed_key(std::string key, Type type, std::string def, std::string doc, double lo = -kInf, double hi = kInf,
               bool lo_open = false, bool hi_open = false) {
    return {std::move(key), type, std::move(def), lo, hi, lo_open, hi_open, {}, std::move(doc)};
}

const std::vector<Spec>& specs() {
    static const std::vector<Spec> table = {
        choice_key("cocycle.kind", "schrodinger", {"constant", "diagonal-exp", "trig-poly", "schrodinger"},
                   "cocycle family"),
        real_key("cocycle.coupling", "1", "schrodinger coupling"),
        typed_key("cocycle.cos", Type::real_list, "2", "schrodinger cosine coefficients of v(x)"),
        typed_key("cocycle.sin", Type::real_list, "", "schrodinger sine coefficients of v(x)"),
        typed_key("cocycle.matrix", Type::matrix, "", "constant matrix, rows separated by ';'"),
        typed_key("cocycle.amplitude", Type::real_list, "", "diagonal-exp amplitudes of C_1(x)"),
        typed_key("cocycle.slope", Type::real_list, "", "diagonal-exp slopes in E"),
        typed_key("cocycle.c0", Type::matrix, "", "trig-poly constant term"),
        typed_key("cocycle.cos_terms", Type::matrix_list, "", "trig-poly cosine terms, separated by '|'"),
        typed_key("cocycle.sin_terms", Type::matrix_list, "", "trig-poly sine terms, separated by '|'"),
        typed_key("cocycle.energy", Type::matrix, "", "trig-poly coefficient of E (zero when empty)"),
        real_key("cocycle.holder_exponent", "1", "Holder exponent beta0 of E -> A(x, E)", 0.0, 1.0, true, false),
        typed_key("shift.omega", Type::omega, "golden", "'golden', 'standard' or comma-separated components"),
        int_key("shift.nu", "1", "torus dimension", 1, 4),
        real_key("shift.dio_exponent", "2", "Diophantine exponent a", 1.0, kInf, true, true),
        real_key("param.E_min", "0", "first parameter value"),
        real_key("param.E_max", "0", "last parameter value"),
        int_key("param.E_count", "1", "number of parameter values", 1, 100000),
        typed_key("numerics.grid", Type::auto_integer, "auto", "grid points per axis (auto: 1024 for nu = 1, 64 otherwise)",
                  1, 1 << 22),
        int_key("numerics.n_min", "16", "smallest scale (power of two)", 1, 1 << 30),
        int_key("numerics.n_max", "1024", "largest scale (power of two)", 1, 1 << 30),
        typed_key("numerics.seed", Type::uint64, "0", "seed for Monte Carlo streams and pair selection"),
        real_key("numerics.tol_quad", "1e-06", "quadrature tolerance", 0.0, 1.0, true, true),
        choice_key("output.format", "csv", {"csv", "json"}, "data file format"),
        typed_key("output.path", Type::text, "", "file name prefix (default: subcommand name)"),
        int_key("output.precision", "17", "significant digits for reals", 17, 21),
        typed_key("ap.file", Type::text, "", "matrix file for ap-verify, relative to the config file"),
        choice_key("demo.mode", "both", {"rank1", "rank2", "both"}, "projection example"),
        real_key("demo.theta", "0.78539816339744828", "angle between consecutive ranges"),
        int_key("demo.n", "3", "number of factors", 2, 1000),
        typed_key("demo.eps", Type::real_list, "0.1, 0.01, 0.001, 0.0001, 1e-05, 1e-06", "epsilon sweep", 0.0, 1.0,
                  true, false),
        int_key("ldt.p", "1", "compound index p", 1, 6),
        typed_key("ldt.delta", Type::real_list, "0.1", "deviation thresholds", 0.0, kInf, true, true),
        choice_key("ldt.model", "auto", {"auto", "exp_poly", "stretched"}, "decay model (auto: by nu)"),
        int_key("ldt.k", "1", "shift count for almost invariance", 1, 1000000),
        int_key("rates.j", "1", "exponent index", 1, 6),
        int_key("rates.tail_start", "64", "first rung of the R(n) tail", 1, 1 << 30),
        real_key("dichotomy.c1", "0.050000000000000003", "decay constant c1", 0.0, kInf, true, true),
        int_key("dichotomy.l0", "16", "first admissible trigger rung", 1, 1 << 28),
        int_key("holder.j", "1", "exponent index", 1, 6),
        int_key("holder.pairs", "32", "pair budget", 2, 100000),
        real_key("holder.kappa", "0.001", "required gap", 0.0, kInf, true, true),
        typed_key("holder.n", Type::auto_integer, "auto", "scale (auto: numerics.n_max)", 1, 1 << 30),
        choice_key("random.dist", "furstenberg", {"furstenberg", "rotation-pair", "rotated-diagonal", "finite"},
                   "matrix distribution"),
        real_key("random.angle", "0.29999999999999999", "furstenberg rotation angle"),
        real_key("random.alpha", "1", "rotation-pair angle"),
        real_key("random.theta_lo", "0", "rotated-diagonal angle range start"),
        real_key("random.theta_hi", "3.1415926535897931", "rotated-diagonal angle range end"),
        real_key("random.s", "2", "rotated-diagonal stretch", 0.0, kInf, true, true),
        typed_key("random.matrices", Type::matrix_list, "", "finite support, separated by '|'"),
        typed_key("random.probabilities", Type::real_list, "", "finite support weights", 0.0, 1.0),
        int_key("random.trials", "1000", "Monte Carlo trials", 2, 100000000),
        typed_key("random.ld_n", Type::integer_list, "50, 400", "scales for large-deviation rows", 1, 1 << 30),
        real_key("random.delta_rel", "0.20000000000000001", "deviation threshold relative to lambda_1", 0.0, kInf, true,
                 true),
        int_key("random.bins", "32", "projective histogram bins", 1, 100000),
        int_key("random.exterior", "1", "exterior power pushforward", 1, 6),
        int_key("dioph.n_max", "100000", "largest denominator", 2, 1000000000),
    };
    return table;
}

const Spec* find_spec(const std::string& key) {
    for (const auto& s : specs())
        if (s.key == key) return &s;
    return nullptr;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct Ctx {
    const Spec& spec;
    std::size_t line;

    [[noreturn]] void fail(ConfigErrorKind kind, const std::string& detail) const {
        throw ConfigError(kind, spec.key, line, detail);
    }

    double number(const std::string& s) const {
        double v = 0.0;
        if (!parse_double(s, v)) fail(ConfigErrorKind::malformed_number, "'" + s + "' is not a finite number");
        return v;
    }

    void range(double v) const {
        const bool lo_ok = spec.lo_open ? v > spec.lo : v >= spec.lo;
        const bool hi_ok = spec.hi_open ? v < spec.hi : v <= spec.hi;
        if (lo_ok && hi_ok) return;
        std::string bounds = std::string(spec.lo_open ? "(" : "[") + format_real(spec.lo) + ", " +
                             format_real(spec.hi) + (spec.hi_open ? ")" : "]");
        fail(ConfigErrorKind::out_of_range, format_real(v) + " outside " + bounds);
    }

    std::int64_t integer(const std::string& s) const {
        std::int64_t v = 0;
        if (!parse_int(s, v)) fail(ConfigErrorKind::malformed_number, "'" + s + "' is not an integer");
        range(static_cast<double>(v));
        return v;
    }

    std::string matrix(const std::string& s) const {
        if (s.empty()) return {};
        std::vector<std::vector<std::string>> rows;
        for (const auto& row : split(s, ';')) {
            std::string r = row;
            std::replace(r.begin(), r.end(), ',', ' ');
            std::istringstream is(r);
            std::vector<std::string> entries;
            std::string tok;
            while (is >> tok) entries.push_back(format_real(number(tok)));
            rows.push_back(std::move(entries));
        }
        for (const auto& r : rows)
            if (r.size() != rows.size())
                fail(ConfigErrorKind::invalid_value, "matrix must be square with non-empty rows");
        std::string out;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0) out += "; ";
            for (std::size_t j = 0; j < rows[i].size(); ++j) out += (j > 0 ? " " : "") + rows[i][j];
        }
        return out;
    }
};

std::string canonicalize(const Spec& spec, const std::string& raw, std::size_t line) {
    const Ctx ctx{spec, line};
    switch (spec.type) {
        case Type::real: {
            const double v = ctx.number(raw);
            ctx.range(v);
            return format_real(v);
        }
        case Type::integer: return std::to_string(ctx.integer(raw));
        case Type::auto_integer: return raw == "auto" ? raw : std::to_string(ctx.integer(raw));
        case Type::uint64: {
            std::uint64_t v = 0;
            const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (raw.empty() || res.ec != std::errc() || res.ptr != raw.data() + raw.size())
                ctx.fail(ConfigErrorKind::malformed_number, "'" + raw + "' is not an unsigned 64-bit integer");
            return std::to_string(v);
        }
        case Type::choice: {
            if (std::find(spec.choices.begin(), spec.choices.end(), raw) == spec.choices.end()) {
                std::string allowed;
                for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : ", ") + c;
                ctx.fail(ConfigErrorKind::invalid_value, "'" + raw + "' is not one of {" + allowed + "}");
            }
            return raw;
        }
        case Type::text: return raw;
        case Type::real_list:
        case Type::omega: {
            if (spec.type == Type::omega && (raw == "golden" || raw == "standard")) return raw;
            if (raw.empty()) {
                if (spec.type == Type::omega) ctx.fail(ConfigErrorKind::invalid_value, "empty shift");
                return {};
            }
            std::string out;
            for (const auto& item : split(raw, ',')) {
                const double v = ctx.number(item);
                if (spec.type == Type::omega) {
                    if (!(v > 0.0 && v < 1.0)) ctx.fail(ConfigErrorKind::out_of_range, format_real(v) + " outside (0, 1)");
                } else {
                    ctx.range(v);
                }
                out += (out.empty() ? "" : ", ") + format_real(v);
            }
            return out;
        }
        case Type::integer_list: {
            if (raw.empty()) return {};
            std::string out;
            for (const auto& item : split(raw, ','))
                out += (out.empty() ? "" : ", ") + std::to_string(ctx.integer(item));
            return out;
        }
        case Type::matrix: return ctx.matrix(raw);
        case Type::matrix_list: {
            if (raw.empty()) return {};
            std::string out;
            for (const auto& item : split(raw, '|')) {
                if (item.empty()) ctx.fail(ConfigErrorKind::invalid_value, "empty matrix in list");
                out += (out.empty() ? "" : " | ") + ctx.matrix(item);
            }
            return out;
        }
    }
    return raw;
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

std::string to_string(ConfigErrorKind kind) {
    switch (kind) {
        case ConfigErrorKind::syntax: return "syntax error";
        case ConfigErrorKind::unknown_key: return "unknown key";
        case ConfigErrorKind::duplicate_key: return "duplicate key";
        case ConfigErrorKind::malformed_number: return "malformed number";
        case ConfigErrorKind::out_of_range: return "value out of range";
        case ConfigErrorKind::invalid_value: return "invalid value";
        case ConfigErrorKind::io: return "cannot read config";
    }
    return "config error";
}

ConfigError::ConfigError(ConfigErrorKind kind, std::string key, std::size_t line, const std::string& detail)
    : std::runtime_error(to_string(kind) + (key.empty() ? std::string() : " '" + key + "'") +
                         (line > 0 ? " at line " + std::to_string(line) : std::string()) +
                         (detail.empty() ? std::string() : ": " + detail)),
      kind_(kind),
      key_(std::move(key)),
      line_(line) {}

const std::vector<KeyDoc>& config_schema() {
    static const std::vector<KeyDoc> docs = [] {
        std::vector<KeyDoc> out;
        for (const auto& s : specs()) out.push_back({s.key, s.default_value, s.description});
        return out;
    }();
    return docs;
}

Config Config::parse(std::string_view text) {
    Config cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw_line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw_line.find('#'); hash != std::string_view::npos) raw_line = raw_line.substr(0, hash);
        const std::string line = trim(raw_line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ConfigErrorKind::syntax, "", line_no, "expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(ConfigErrorKind::syntax, "", line_no, "missing key");
        const Spec* spec = find_spec(key);
        if (!spec) throw ConfigError(ConfigErrorKind::unknown_key, key, line_no, "");
        if (cfg.lines_.count(key)) throw ConfigError(ConfigErrorKind::duplicate_key, key, line_no,
                                                     "first set at line " + std::to_string(cfg.lines_[key]));
        cfg.values_[key] = canonicalize(*spec, value, line_no);
        cfg.lines_[key] = line_no;
    }
    for (const auto& s : specs())
        if (!cfg.values_.count(s.key)) cfg.values_[s.key] = canonicalize(s, s.default_value, 0);

    auto fail = [&](const std::string& key, const std::string& detail) {
        throw ConfigError(ConfigErrorKind::invalid_value, key, cfg.line_of(key), detail);
    };

    const auto n_min = cfg.integer("numerics.n_min");
    const auto n_max = cfg.integer("numerics.n_max");
    if (!is_power_of_two(n_min)) fail("numerics.n_min", "must be a power of two");
    if (!is_power_of_two(n_max)) fail("numerics.n_max", "must be a power of two");
    if (n_min > n_max) fail("numerics.n_max", "must be at least numerics.n_min");
    if (cfg.real("param.E_min") > cfg.real("param.E_max")) fail("param.E_max", "must be at least param.E_min");

    const auto nu = cfg.integer("shift.nu");
    const auto& omega = cfg.text("shift.omega");
    if (omega == "golden" && nu != 1) fail("shift.omega", "'golden' needs shift.nu = 1");
    if (omega != "golden" && omega != "standard" && static_cast<std::int64_t>(cfg.real_list("shift.omega").size()) != nu)
        fail("shift.omega", "needs shift.nu components");
    if (omega == "standard" && nu > 2) fail("shift.omega", "'standard' is defined for nu <= 2");

    const auto& kind = cfg.text("cocycle.kind");
    if (kind == "constant" && cfg.text("cocycle.matrix").empty()) fail("cocycle.matrix", "required for kind constant");
    if (kind == "diagonal-exp") {
        const auto a = cfg.real_list("cocycle.amplitude");
        const auto b = cfg.real_list("cocycle.slope");
        if (a.empty()) fail("cocycle.amplitude", "required for kind diagonal-exp");
        if (a.size() != b.size()) fail("cocycle.slope", "needs one slope per amplitude");
    }
    if (kind == "trig-poly" && cfg.text("cocycle.c0").empty()) fail("cocycle.c0", "required for kind trig-poly");
    if (kind == "schrodinger" && cfg.real_list("cocycle.cos").empty() && cfg.real_list("cocycle.sin").empty())
        fail("cocycle.cos", "schrodinger needs a non-empty sampling function");

    if (cfg.values_["numerics.grid"] == "auto") cfg.values_["numerics.grid"] = nu == 1 ? "1024" : "64";
    if (cfg.values_["holder.n"] == "auto") cfg.values_["holder.n"] = std::to_string(n_max);
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(ConfigErrorKind::io, "", 0, path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    Config cfg = parse(ss.str());
    cfg.base_dir_ = path.parent_path();
    return cfg;
}

std::string Config::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string Config::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text())));
    return buf;
}

const std::string& Config::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(ConfigErrorKind::unknown_key, key, 0, "");
    return it->second;
}

double Config::real(const std::string& key) const {
    double v = 0.0;
    parse_double(text(key), v);
    return v;
}

std::int64_t Config::integer(const std::string& key) const {
    std::int64_t v = 0;
    parse_int(text(key), v);
    return v;
}

std::uint64_t Config::unsigned_integer(const std::string& key) const {
    const auto& s = text(key);
    std::uint64_t v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

std::vector<double> Config::real_list(const std::string& key) const {
    std::vector<double> out;
    const auto& s = text(key);
    if (s.empty() || s == "golden" || s == "standard") return out;
    for (const auto& item : split(s, ',')) {
        double v = 0.0;
        parse_double(item, v);
        out.push_back(v);
    }
    return out;
}

std::vector<std::int64_t> Config::integer_list(const std::string& key) const {
    std::vector<std::int64_t> out;
    const auto& s = text(key);
    if (s.empty()) return out;
    for (const auto& item : split(s, ',')) {
        std::int64_t v = 0;
        parse_int(item, v);
        out.push_back(v);
    }
    return out;
}

lyap::RealMatrix parse_matrix_text(std::string_view text) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : split(text, ';')) {
        std::string r = row;
        std::replace(r.begin(), r.end(), ',', ' ');
        std::istringstream is(r);
        std::vector<double> entries;
        std::string tok;
        while (is >> tok) {
            double v = 0.0;
            if (!parse_double(tok, v)) throw lyap::DomainError("malformed matrix entry '" + tok + "'");
            entries.push_back(v);
        }
        rows.push_back(std::move(entries));
    }
    const std::size_t d = rows.size();
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != d) throw lyap::DomainError("matrix must be square");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return lyap::RealMatrix(d, std::move(flat));
}

lyap::RealMatrix Config::matrix(const std::string& key) const { return parse_matrix_text(text(key)); }

std::vector<lyap::RealMatrix> Config::matrix_list(const std::string& key) const {
    std::vector<lyap::RealMatrix> out;
    const auto& s = text(key);
    if (s.empty()) return out;
    for (const auto& item : split(s, '|')) out.push_back(parse_matrix_text(item));
    return out;
}

std::size_t Config::line_of(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
}

void Config::override_seed(std::uint64_t seed) { values_["numerics.seed"] = std::to_string(seed); }

}  // namespace lyaplab
