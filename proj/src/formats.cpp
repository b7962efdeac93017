#include "clauseviz/formats.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace clauseviz {

ParseError::ParseError(Kind kind, std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

namespace detail {

struct TextScanner {
    static constexpr int kEof = std::char_traits<char>::eof();

    explicit TextScanner(std::istream& in) : buf(in.rdbuf()) {}

    int peek() {
        if (pos == len) refill();
        return pos == len ? kEof : static_cast<unsigned char>(chunk[pos]);
    }
    void bump() {
        if (chunk[pos] == '\n') ++line;
        ++pos;
    }
    void refill() {
        pos = 0;
        len = buf ? static_cast<std::size_t>(buf->sgetn(chunk.data(), chunk.size())) : 0;
    }
    static bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

    void skip_space() {
        for (int c = peek(); c != kEof && is_space(c); c = peek()) bump();
    }
    void skip_line() {
        for (int c = peek(); c != kEof; c = peek()) {
            bump();
            if (c == '\n') break;
        }
    }
    std::string word() {
        std::string w;
        for (int c = peek(); c != kEof && !is_space(c); c = peek()) {
            w.push_back(static_cast<char>(c));
            bump();
        }
        return w;
    }
    /// Reads one whitespace-delimited signed 32-bit integer.
    std::int32_t integer() {
        std::size_t start_line = line;
        bool neg = false;
        int c = peek();
        if (c == '-') {
            neg = true;
            bump();
            c = peek();
        }
        std::int64_t v = 0;
        bool digits = false;
        while (c >= '0' && c <= '9') {
            v = v * 10 + (c - '0');
            if (v > std::numeric_limits<std::int32_t>::max()) {
                throw ParseError(ParseError::Kind::NonIntegerToken, start_line, "integer out of range");
            }
            digits = true;
            bump();
            c = peek();
        }
        if (!digits || (c != kEof && !is_space(c))) {
            std::string rest = word();
            throw ParseError(ParseError::Kind::NonIntegerToken, start_line,
                             "expected integer, got '" + std::string(neg ? "-" : "") + (digits ? std::to_string(v) : "") + rest + "'");
        }
        return static_cast<std::int32_t>(neg ? -v : v);
    }

    std::streambuf* buf;
    std::array<char, 1 << 16> chunk{};
    std::size_t pos = 0;
    std::size_t len = 0;
    std::size_t line = 1;
};

}  // namespace detail

namespace {

std::uint64_t parse_count(const std::string& w, std::size_t line) {
    if (w.empty() || w.find_first_not_of("0123456789") != std::string::npos || w.size() > 18) {
        throw ParseError(ParseError::Kind::MalformedHeader, line, "bad count '" + w + "' in header");
    }
    return std::stoull(w);
}

}  // namespace

CnfFormula parse_dimacs(std::istream& in, ParseReport* report) {
    ParseReport local;
    ParseReport& rep = report ? *report : local;
    detail::TextScanner sc(in);

    CnfFormula formula;
    bool have_header = false;
    std::vector<std::int32_t> current;
    std::size_t clause_line = 0;

    for (;;) {
        sc.skip_space();
        int c = sc.peek();
        if (c == detail::TextScanner::kEof || c == '%') break;
        if (c == 'c') {
            sc.skip_line();
            continue;
        }
        if (c == 'p') {
            std::size_t line = sc.line;
            if (have_header) throw ParseError(ParseError::Kind::MalformedHeader, line, "duplicate header");
            sc.word();
            sc.skip_space();
            if (sc.word() != "cnf") throw ParseError(ParseError::Kind::MalformedHeader, line, "expected 'p cnf V C'");
            sc.skip_space();
            std::uint64_t vars = parse_count(sc.word(), line);
            sc.skip_space();
            std::uint64_t clauses = parse_count(sc.word(), line);
            if (vars > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max())) {
                throw ParseError(ParseError::Kind::MalformedHeader, line, "variable count out of range");
            }
            rep.header = {static_cast<std::uint32_t>(vars), clauses};
            formula.num_variables = rep.header.num_variables;
            formula.clauses.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(clauses, 1u << 24)));
            have_header = true;
            continue;
        }
        if (!have_header) throw ParseError(ParseError::Kind::MalformedHeader, sc.line, "missing 'p cnf' header");

        if (current.empty()) clause_line = sc.line;
        std::int32_t lit = sc.integer();
        if (lit != 0) {
            current.push_back(lit);
            continue;
        }
        ++rep.clauses_read;
        auto canon = canonicalize(std::span<const std::int32_t>(current));
        current.clear();
        if (canon.status == ClauseStatus::Tautology) {
            ++rep.tautologies_dropped;
            rep.warnings.push_back("line " + std::to_string(clause_line) + ": tautological clause dropped");
            continue;
        }
        rep.max_variable_seen = std::max(rep.max_variable_seen, canon.clause.max_variable());
        formula.clauses.push_back(std::move(canon.clause));
    }

    if (!current.empty()) {
        throw ParseError(ParseError::Kind::UnterminatedClause, sc.line, "clause not terminated by 0 at end of input");
    }
    if (!have_header) throw ParseError(ParseError::Kind::MalformedHeader, sc.line, "missing 'p cnf' header");
    if (rep.clauses_read != rep.header.num_clauses) {
        rep.warnings.push_back("header declares " + std::to_string(rep.header.num_clauses) + " clauses, found " +
                               std::to_string(rep.clauses_read));
    }
    if (rep.max_variable_seen > formula.num_variables) {
        rep.warnings.push_back("variable " + std::to_string(rep.max_variable_seen) +
                               " exceeds header count; extending to it");
        formula.num_variables = rep.max_variable_seen;
    }
    return formula;
}

CnfFormula parse_dimacs_file(const std::string& path, ParseReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_dimacs(in, report);
}

void write_dimacs(std::ostream& out, const CnfFormula& formula) {
    out << "p cnf " << formula.num_variables << ' ' << formula.clauses.size() << '\n';
    for (const Clause& c : formula.clauses) {
        for (Literal lit : c) out << lit.value() << ' ';
        out << "0\n";
    }
}

DratReader::DratReader(std::istream& in) : scanner_(std::make_unique<detail::TextScanner>(in)) {}
DratReader::~DratReader() = default;

std::size_t DratReader::line() const { return scanner_->line; }

std::optional<ProofStep> DratReader::next() {
    detail::TextScanner& sc = *scanner_;
    ProofStep step;
    bool started = false;
    for (;;) {
        sc.skip_space();
        int c = sc.peek();
        if (c == detail::TextScanner::kEof) {
            if (started) throw ParseError(ParseError::Kind::UnterminatedClause, sc.line, "proof ends mid-clause");
            return std::nullopt;
        }
        if (c == 'c' && !started) {
            sc.skip_line();
            continue;
        }
        if (c == 'd' && !started) {
            sc.bump();
            int after = sc.peek();
            if (after != detail::TextScanner::kEof && !detail::TextScanner::is_space(after)) {
                throw ParseError(ParseError::Kind::NonIntegerToken, sc.line, "expected integer, got 'd" + sc.word() + "'");
            }
            step.kind = EventKind::Delete;
            started = true;
            continue;
        }
        started = true;
        std::int32_t lit = sc.integer();
        if (lit == 0) return step;
        step.literals.push_back(lit);
    }
}

std::optional<ClauseEvent> DratReader::next_event() {
    auto step = next();
    if (!step) return std::nullopt;
    return make_event(step->kind, std::span<const std::int32_t>(step->literals));
}

std::vector<ClauseEvent> read_drat_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    DratReader reader(in);
    std::vector<ClauseEvent> events;
    while (auto ev = reader.next_event()) {
        ev->sequence = events.size();
        events.push_back(std::move(*ev));
    }
    return events;
}

}  // namespace clauseviz
