#include "critwave/config.hpp"

#include "critwave/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace critwave {

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw ParameterError("invalid value '" + text + "' for " + key);
    return v;
}

void assign(const std::string& key, int& f, const std::string& v) { f = parse_number<int>(key, v); }
void assign(const std::string& key, std::int64_t& f, const std::string& v) { f = parse_number<std::int64_t>(key, v); }
void assign(const std::string& key, double& f, const std::string& v) { f = parse_number<double>(key, v); }
void assign(const std::string&, std::string& f, const std::string& v) { f = v; }
void assign(const std::string& key, bool& f, const std::string& v) {
    if (v == "true" || v == "1") f = true;
    else if (v == "false" || v == "0") f = false;
    else throw ParameterError("invalid boolean '" + v + "' for " + key);
}

std::string show(int v) { return std::to_string(v); }
std::string show(std::int64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }
std::string show(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// JSON reading with the field's own type; a number where a string is expected
// (e.g. "p": 2) is accepted and converted.
template <class T>
void read_json(const std::string& key, T& f, const nlohmann::json& j) {
    try {
        if constexpr (std::is_same_v<T, std::string>) {
            if (j.is_string()) f = j.get<std::string>();
            else if (j.is_number()) f = show(j.get<double>());
            else throw ParameterError("config key '" + key + "' must be a string");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean()) throw ParameterError("config key '" + key + "' must be a boolean");
            f = j.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!j.is_number_integer()) throw ParameterError("config key '" + key + "' must be an integer");
            f = j.get<T>();
        } else {
            if (!j.is_number()) throw ParameterError("config key '" + key + "' must be a number");
            f = j.get<T>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("config key '" + key + "': " + e.what());
    }
}

} // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k = {
#define CRITWAVE_NAME(type, name, def, help) #name,
        CRITWAVE_CONFIG_FIELDS(CRITWAVE_NAME)
#undef CRITWAVE_NAME
    };
    return k;
}

std::string RunConfig::help(const std::string& key) {
#define CRITWAVE_HELP(type, name, def, help) \
    if (key == #name) return help;
    CRITWAVE_CONFIG_FIELDS(CRITWAVE_HELP)
#undef CRITWAVE_HELP
    throw ParameterError("unknown config key '" + key + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
#define CRITWAVE_SET(type, name, def, help) \
    if (key == #name) return assign(key, name, value);
    CRITWAVE_CONFIG_FIELDS(CRITWAVE_SET)
#undef CRITWAVE_SET
    throw ParameterError("unknown config key '" + key + "'");
}

std::string RunConfig::get(const std::string& key) const {
#define CRITWAVE_GET(type, name, def, help) \
    if (key == #name) return show(name);
    CRITWAVE_CONFIG_FIELDS(CRITWAVE_GET)
#undef CRITWAVE_GET
    throw ParameterError("unknown config key '" + key + "'");
}

nlohmann::json RunConfig::to_json() const {
    // this-> keeps the field named j from being shadowed
    nlohmann::json out = nlohmann::json::object();
#define CRITWAVE_TO_JSON(type, name, def, help) out[#name] = this->name;
    CRITWAVE_CONFIG_FIELDS(CRITWAVE_TO_JSON)
#undef CRITWAVE_TO_JSON
    return out;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        bool known = false;
#define CRITWAVE_FROM_JSON(type, name, def, help) \
    if (key == #name) {                           \
        read_json(key, c.name, value);            \
        known = true;                             \
    }
        CRITWAVE_CONFIG_FIELDS(CRITWAVE_FROM_JSON)
#undef CRITWAVE_FROM_JSON
        if (!known) throw ParameterError("unknown config key '" + key + "'");
    }
    return c;
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParameterError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParameterError("config file " + path.string() + ": " + e.what());
    }
    // Keys absent from the file keep their current values.
    const RunConfig parsed = from_json(j);
    for (const auto& [key, value] : j.items()) set(key, parsed.get(key));
}

void RunConfig::save_file(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw ParameterError("cannot write config file " + path.string());
    os << to_json().dump(2) << '\n';
}

std::string env_name(const std::string& key) {
    std::string out = "CRITWAVE_";
    for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void RunConfig::apply_env() {
    for (const auto& key : keys()) {
        if (const char* v = std::getenv(env_name(key).c_str())) set(key, v);
    }
}

double RunConfig::resolved_p() const {
    if (p == "crit") return p_crit(n);
    double v = 0.0;
    try {
        v = parse_number<double>("p", p);
    } catch (const ParameterError&) {
        throw ParameterError("p must be a number or 'crit', got '" + p + "'");
    }
    return v;
}

ModelParams RunConfig::model_params() const {
    ModelParams mp;
    mp.n = n;
    mp.p = resolved_p();
    mp.R = R;
    mp.epsilon = eps;
    mp.profile.m = m;
    mp.profile.weight_f = weight_f;
    mp.profile.weight_g = weight_g;
    mp.validate();
    return mp;
}

} // namespace critwave
