#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace clauseviz::cli {

/// Bad flag values, unreadable config files and the like: exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// Options of one subcommand, each settable by flag, by environment
/// variable CLAUSEVIZ_<NAME> and by key <name> in a JSON config file (dashes
/// become underscores). Precedence: flag, then environment, then file, then
/// the built-in default. The config file itself comes from --config or
/// CLAUSEVIZ_CONFIG.
class Settings {
public:
    explicit Settings(CLI::App* command);

    void option(const std::string& name, std::string default_value, const std::string& help);
    void flag(const std::string& name, const std::string& help);

    /// Call after CLI11 has parsed the command line.
    void resolve(const EnvLookup& env);

    bool has(const std::string& name) const { return !str(name).empty(); }
    const std::string& str(const std::string& name) const;
    std::int64_t integer(const std::string& name) const;
    std::uint64_t count(const std::string& name) const;
    double real(const std::string& name) const;
    bool boolean(const std::string& name) const;
    /// "flag", "env", "file" or "default".
    const std::string& source(const std::string& name) const;

    static std::string env_name(const std::string& name);
    static std::string file_key(const std::string& name);

private:
    struct Entry {
        std::string value;
        std::string default_value;
        std::string raw;
        bool is_flag = false;
        bool flag_raw = false;
        CLI::Option* option = nullptr;
        std::string source = "default";
    };
    const Entry& entry(const std::string& name) const;

    CLI::App* command_;
    std::map<std::string, Entry> entries_;
    std::string config_path_;
    CLI::Option* config_option_ = nullptr;
};

}  // namespace clauseviz::cli
