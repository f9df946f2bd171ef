#include "tarseg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tarseg/errors.hpp"

namespace tarseg {
namespace {

struct Entry {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<nlohmann::ordered_json(const RunConfig&)> get;
};

long long parse_int(const std::string& key, const std::string& text) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("config key '" + key + "' expects an integer, got '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("config key '" + key + "' expects an unsigned integer, got '" + text + "'");
    return v;
}

double parse_real(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + text + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("config key '" + key + "' expects true/false, got '" + text + "'");
}

Entry int_entry(const char* key, int RunConfig::* field) {
    return {key,
            [key, field](RunConfig& c, const std::string& v) { c.*field = static_cast<int>(parse_int(key, v)); },
            [field](const RunConfig& c) { return nlohmann::ordered_json(c.*field); }};
}

Entry u64_entry(const char* key, std::uint64_t RunConfig::* field) {
    return {key,
            [key, field](RunConfig& c, const std::string& v) { c.*field = parse_u64(key, v); },
            [field](const RunConfig& c) { return nlohmann::ordered_json(c.*field); }};
}

Entry real_entry(const char* key, double RunConfig::* field) {
    return {key,
            [key, field](RunConfig& c, const std::string& v) { c.*field = parse_real(key, v); },
            [field](const RunConfig& c) { return nlohmann::ordered_json(c.*field); }};
}

Entry bool_entry(const char* key, bool RunConfig::* field) {
    return {key,
            [key, field](RunConfig& c, const std::string& v) { c.*field = parse_bool(key, v); },
            [field](const RunConfig& c) { return nlohmann::ordered_json(c.*field); }};
}

Entry str_entry(const char* key, std::string RunConfig::* field) {
    return {key,
            [field](RunConfig& c, const std::string& v) { c.*field = v; },
            [field](const RunConfig& c) { return nlohmann::ordered_json(c.*field); }};
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        int_entry("channels", &RunConfig::channels),
        int_entry("hidden", &RunConfig::hidden),
        int_entry("attn-dim", &RunConfig::attn_dim),
        int_entry("embed-dim", &RunConfig::embed_dim),
        int_entry("proj-dim", &RunConfig::proj_dim),
        int_entry("guide-channels", &RunConfig::guide_channels),
        real_entry("guide-gain", &RunConfig::guide_gain),
        int_entry("radius", &RunConfig::radius),
        int_entry("iters1", &RunConfig::iters1),
        int_entry("iters2", &RunConfig::iters2),
        real_entry("sigma-floor", &RunConfig::sigma_floor),
        bool_entry("include-center", &RunConfig::include_center),
        bool_entry("sigma-global", &RunConfig::sigma_global),
        real_entry("threshold", &RunConfig::threshold),
        real_entry("tau", &RunConfig::tau),
        real_entry("lambda-rec", &RunConfig::lambda_rec),
        real_entry("lambda-c", &RunConfig::lambda_c),
        bool_entry("include-positive", &RunConfig::include_positive),
        int_entry("batch", &RunConfig::batch),
        u64_entry("rng-seed", &RunConfig::rng_seed),
        u64_entry("weights-seed", &RunConfig::weights_seed),
        int_entry("threads", &RunConfig::threads),
        int_entry("max-steps", &RunConfig::max_steps),
        bool_entry("json", &RunConfig::json),
        bool_entry("no-timing", &RunConfig::no_timing),
        int_entry("height", &RunConfig::height),
        int_entry("width", &RunConfig::width),
        int_entry("scenes", &RunConfig::scenes),
        int_entry("min-glyphs", &RunConfig::min_glyphs),
        int_entry("max-glyphs", &RunConfig::max_glyphs),
        real_entry("contrast-floor", &RunConfig::contrast_floor),
        real_entry("seed-coverage", &RunConfig::seed_coverage),
        str_entry("seed-mode", &RunConfig::seed_mode),
        str_entry("background", &RunConfig::background),
        int_entry("min-glyph-px", &RunConfig::min_glyph_px),
        real_entry("area-budget", &RunConfig::area_budget),
        int_entry("retry-budget", &RunConfig::retry_budget),
        str_entry("alphabet", &RunConfig::alphabet),
        int_entry("rgb-iters", &RunConfig::rgb_iters),
        int_entry("repeats", &RunConfig::repeats),
        int_entry("mf-iters", &RunConfig::mf_iters),
        real_entry("pos-sigma", &RunConfig::pos_sigma),
        real_entry("rgb-sigma", &RunConfig::rgb_sigma),
        int_entry("area-cap", &RunConfig::area_cap),
        bool_entry("scaling-probe", &RunConfig::scaling_probe),
        int_entry("batches", &RunConfig::batches),
    };
    return table;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_line(RunConfig& cfg, const std::string& raw) {
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) return;
    auto eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError("config line is not key=value: '" + trim(raw) + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    for (const auto& e : entries()) {
        if (key == e.key) {
            e.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        try {
            apply_config_line(cfg, line);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    nlohmann::ordered_json out;
    for (const auto& e : entries()) out[e.key] = e.get(cfg);
    return out;
}

}  // namespace tarseg
