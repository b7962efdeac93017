#include "settings.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

namespace clauseviz::cli {

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
}

Settings::Settings(CLI::App* command) : command_(command) {
    config_option_ = command_->add_option("--config", config_path_, "JSON config file");
}

void Settings::option(const std::string& name, std::string default_value, const std::string& help) {
    Entry& e = entries_[name];
    e.default_value = std::move(default_value);
    std::string text = help;
    if (!e.default_value.empty()) text += " (default: " + e.default_value + ")";
    e.option = command_->add_option("--" + name, e.raw, text);
}

void Settings::flag(const std::string& name, const std::string& help) {
    Entry& e = entries_[name];
    e.is_flag = true;
    e.default_value = "false";
    e.option = command_->add_flag("--" + name, e.flag_raw, help);
}

std::string Settings::env_name(const std::string& name) {
    std::string out = "CLAUSEVIZ_";
    for (char c : name) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string Settings::file_key(const std::string& name) {
    std::string out = name;
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

void Settings::resolve(const EnvLookup& env) {
    std::string path = config_path_;
    if (config_option_->count() == 0) {
        if (auto v = env("CLAUSEVIZ_CONFIG")) path = *v;
    }
    nlohmann::json file = nlohmann::json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw UsageError("cannot read config file " + path);
        try {
            file = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError("config file " + path + ": " + e.what());
        }
        if (!file.is_object()) throw UsageError("config file " + path + " must hold a JSON object");
    }
    for (auto& [name, e] : entries_) {
        if (e.option->count() > 0) {
            e.value = e.is_flag ? (e.flag_raw ? "true" : "false") : e.raw;
            e.source = "flag";
        } else if (auto v = env(env_name(name))) {
            e.value = *v;
            e.source = "env";
        } else if (auto it = file.find(file_key(name)); it != file.end()) {
            if (it->is_string()) {
                e.value = it->get<std::string>();
            } else if (it->is_boolean()) {
                e.value = it->get<bool>() ? "true" : "false";
            } else if (it->is_number()) {
                e.value = it->dump();
            } else {
                throw UsageError("config key '" + file_key(name) + "' must be a string, number or boolean");
            }
            e.source = "file";
        } else {
            e.value = e.default_value;
            e.source = "default";
        }
    }
}

const Settings::Entry& Settings::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::logic_error("unregistered setting " + name);
    return it->second;
}

const std::string& Settings::str(const std::string& name) const { return entry(name).value; }
const std::string& Settings::source(const std::string& name) const { return entry(name).source; }

std::int64_t Settings::integer(const std::string& name) const {
    const std::string& v = str(name);
    try {
        std::size_t used = 0;
        const long long n = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw UsageError("--" + name + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t Settings::count(const std::string& name) const {
    const std::int64_t n = integer(name);
    if (n < 0) throw UsageError("--" + name + ": must not be negative");
    return static_cast<std::uint64_t>(n);
}

double Settings::real(const std::string& name) const {
    const std::string& v = str(name);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw UsageError("--" + name + ": expected a number, got '" + v + "'");
    }
}

bool Settings::boolean(const std::string& name) const {
    std::string v = str(name);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
    throw UsageError("--" + name + ": expected a boolean, got '" + str(name) + "'");
}

}  // namespace clauseviz::cli
