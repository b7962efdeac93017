#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clauseviz/cnf.hpp"

namespace clauseviz {

namespace detail {
struct TextScanner;
}

class ParseError : public std::runtime_error {
public:
    enum class Kind { MalformedHeader, NonIntegerToken, UnterminatedClause };

    ParseError(Kind kind, std::size_t line, const std::string& what);

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

struct DimacsHeader {
    std::uint32_t num_variables = 0;
    std::uint64_t num_clauses = 0;
};

/// Non-fatal findings collected while parsing.
struct ParseReport {
    DimacsHeader header;
    std::uint64_t tautologies_dropped = 0;
    std::uint64_t clauses_read = 0;
    std::uint32_t max_variable_seen = 0;
    std::vector<std::string> warnings;
};

/// Parses a DIMACS CNF stream. Tautologies are dropped and clauses
/// canonicalized; variables above the header count extend num_variables.
CnfFormula parse_dimacs(std::istream& in, ParseReport* report = nullptr);
CnfFormula parse_dimacs_file(const std::string& path, ParseReport* report = nullptr);

void write_dimacs(std::ostream& out, const CnfFormula& formula);

/// One line of a textual DRAT proof, not yet canonicalized.
struct ProofStep {
    EventKind kind = EventKind::Add;
    std::vector<std::int32_t> literals;
};

/// Streaming reader for textual DRAT. Holds at most one clause in memory.
class DratReader {
public:
    explicit DratReader(std::istream& in);
    ~DratReader();
    DratReader(const DratReader&) = delete;
    DratReader& operator=(const DratReader&) = delete;

    /// Next step in file order, or nullopt at end of input.
    std::optional<ProofStep> next();

    /// Same as next() but canonicalized into an event with sequence 0.
    std::optional<ClauseEvent> next_event();

    std::size_t line() const;

private:
    std::unique_ptr<detail::TextScanner> scanner_;
};

std::vector<ClauseEvent> read_drat_file(const std::string& path);

}  // namespace clauseviz
