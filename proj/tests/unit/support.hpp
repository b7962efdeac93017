#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clauseviz/cnf.hpp"
#include "clauseviz/graph.hpp"

namespace testing_support {

using clauseviz::ClauseEvent;
using clauseviz::EventKind;

/// Random raw literal list over variables 1..num_vars, no canonicalization.
inline std::vector<std::int32_t> random_raw_clause(std::mt19937_64& gen, int num_vars, int min_len, int max_len) {
    std::uniform_int_distribution<int> len(min_len, max_len);
    std::uniform_int_distribution<int> var(1, num_vars);
    std::bernoulli_distribution neg(0.5);
    std::vector<std::int32_t> out(static_cast<std::size_t>(len(gen)));
    for (auto& l : out) l = neg(gen) ? -var(gen) : var(gen);
    return out;
}

/// Distinct variables, random signs: never a tautology.
inline std::vector<std::int32_t> random_clause(std::mt19937_64& gen, int num_vars, int min_len, int max_len) {
    std::uniform_int_distribution<int> len(min_len, std::min(max_len, num_vars));
    std::vector<int> vars(static_cast<std::size_t>(num_vars));
    for (int i = 0; i < num_vars; ++i) vars[static_cast<std::size_t>(i)] = i + 1;
    std::shuffle(vars.begin(), vars.end(), gen);
    std::bernoulli_distribution neg(0.5);
    const int n = len(gen);
    std::vector<std::int32_t> out;
    for (int i = 0; i < n; ++i) out.push_back(neg(gen) ? -vars[static_cast<std::size_t>(i)] : vars[static_cast<std::size_t>(i)]);
    return out;
}

/// Sorted distinct variable numbers of a raw clause.
inline std::vector<int> variables_of(const std::vector<std::int32_t>& raw) {
    std::set<int> s;
    for (auto l : raw) s.insert(std::abs(l));
    return {s.begin(), s.end()};
}

inline bool is_tautology(const std::vector<std::int32_t>& raw) {
    std::set<std::int32_t> s(raw.begin(), raw.end());
    for (auto l : s) {
        if (s.count(-l)) return true;
    }
    return false;
}

/// Edge weights (1-based variable pairs) from a plain list of live raw
/// clauses, computed straight from the definitions: ring = consecutive
/// sorted variables plus (min, max); clique = all pairs.
inline std::map<std::pair<int, int>, double> recount(const std::vector<std::vector<std::int32_t>>& live, bool ring) {
    std::map<std::pair<int, int>, double> w;
    for (const auto& raw : live) {
        if (raw.empty() || is_tautology(raw)) continue;
        const auto vars = variables_of(raw);
        const std::size_t n = vars.size();
        if (n < 2) continue;
        const double c = 1.0 / (static_cast<double>(n) - 1.0);
        std::set<std::pair<int, int>> pairs;
        if (ring) {
            for (std::size_t i = 0; i + 1 < n; ++i) pairs.insert({vars[i], vars[i + 1]});
            pairs.insert({vars.front(), vars.back()});
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) pairs.insert({vars[i], vars[j]});
        }
        for (const auto& p : pairs) w[p] += c;
    }
    for (auto it = w.begin(); it != w.end();) it = it->second <= 1e-9 ? w.erase(it) : std::next(it);
    return w;
}

/// Largest difference between a graph and a recount, in either direction.
inline double difference(const clauseviz::WeightedGraph& g, const std::map<std::pair<int, int>, double>& expected) {
    double worst = 0.0;
    for (const auto& [p, w] : expected) {
        worst = std::max(worst, std::abs(g.weight(static_cast<clauseviz::NodeId>(p.first - 1),
                                                  static_cast<clauseviz::NodeId>(p.second - 1)) - w));
    }
    for (const auto& e : g.edges()) {
        auto it = expected.find({static_cast<int>(e.u) + 1, static_cast<int>(e.v) + 1});
        worst = std::max(worst, std::abs(e.weight - (it == expected.end() ? 0.0 : it->second)));
    }
    return worst;
}

/// Live multiset semantics on raw clauses compared by variable/sign set.
class LiveOracle {
public:
    void add(const std::vector<std::int32_t>& raw) { live_.push_back(raw); }
    /// Removes one clause equal as a literal set; false if none is live.
    bool remove(const std::vector<std::int32_t>& raw) {
        const std::set<std::int32_t> key(raw.begin(), raw.end());
        for (auto it = live_.begin(); it != live_.end(); ++it) {
            if (std::set<std::int32_t>(it->begin(), it->end()) == key) {
                live_.erase(it);
                return true;
            }
        }
        return false;
    }
    const std::vector<std::vector<std::int32_t>>& live() const { return live_; }

private:
    std::vector<std::vector<std::int32_t>> live_;
};

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("clauseviz-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
