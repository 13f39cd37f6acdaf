#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pctl/errors.hpp"

namespace pctl {

struct StateFormula;
struct PathFormula;
using StatePtr = std::shared_ptr<const StateFormula>;
using PathPtr = std::shared_ptr<const PathFormula>;

enum class Relation { Less, LessEqual, Greater, GreaterEqual };

inline std::string_view to_string(Relation rel) noexcept {
    switch (rel) {
        case Relation::Less: return "<";
        case Relation::LessEqual: return "<=";
        case Relation::Greater: return ">";
        case Relation::GreaterEqual: return ">=";
    }
    return "?";
}

/// Exact comparison `value rel bound`; strictness is preserved.
inline bool compare(Relation rel, double value, double bound) noexcept {
    switch (rel) {
        case Relation::Less: return value < bound;
        case Relation::LessEqual: return value <= bound;
        case Relation::Greater: return value > bound;
        case Relation::GreaterEqual: return value >= bound;
    }
    return false;
}

namespace detail {
// Deep equality through shared pointers.
template <class T>
bool same(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
    return a == b || (a && b && *a == *b);
}
}  // namespace detail

namespace state {
struct True {
    friend bool operator==(const True&, const True&) = default;
};
struct False {
    friend bool operator==(const False&, const False&) = default;
};
struct Atom {
    std::string name;
    friend bool operator==(const Atom&, const Atom&) = default;
};
struct Not {
    StatePtr arg;
    friend bool operator==(const Not& a, const Not& b) { return detail::same(a.arg, b.arg); }
};
struct And {
    StatePtr lhs, rhs;
    friend bool operator==(const And& a, const And& b) { return detail::same(a.lhs, b.lhs) && detail::same(a.rhs, b.rhs); }
};
struct Or {
    StatePtr lhs, rhs;
    friend bool operator==(const Or& a, const Or& b) { return detail::same(a.lhs, b.lhs) && detail::same(a.rhs, b.rhs); }
};
struct Implies {
    StatePtr lhs, rhs;
    friend bool operator==(const Implies& a, const Implies& b) {
        return detail::same(a.lhs, b.lhs) && detail::same(a.rhs, b.rhs);
    }
};
struct Prob {
    Relation rel;
    double bound;
    PathPtr path;
    friend bool operator==(const Prob& a, const Prob& b) {
        return a.rel == b.rel && a.bound == b.bound && detail::same(a.path, b.path);
    }
};
}  // namespace state

namespace path {
struct Next {
    StatePtr arg;
    friend bool operator==(const Next& a, const Next& b) { return detail::same(a.arg, b.arg); }
};
struct BoundedUntil {
    StatePtr lhs;
    unsigned steps;
    StatePtr rhs;
    friend bool operator==(const BoundedUntil& a, const BoundedUntil& b) {
        return a.steps == b.steps && detail::same(a.lhs, b.lhs) && detail::same(a.rhs, b.rhs);
    }
};
struct Until {
    StatePtr lhs, rhs;
    friend bool operator==(const Until& a, const Until& b) { return detail::same(a.lhs, b.lhs) && detail::same(a.rhs, b.rhs); }
};
struct BoundedEventually {
    unsigned steps;
    StatePtr arg;
    friend bool operator==(const BoundedEventually& a, const BoundedEventually& b) {
        return a.steps == b.steps && detail::same(a.arg, b.arg);
    }
};
struct Eventually {
    StatePtr arg;
    friend bool operator==(const Eventually& a, const Eventually& b) { return detail::same(a.arg, b.arg); }
};
}  // namespace path

/// PCTL state formula. Immutable; subtrees are shared.
struct StateFormula {
    using Node = std::variant<state::True, state::False, state::Atom, state::Not, state::And, state::Or,
                              state::Implies, state::Prob>;
    Node node;
    friend bool operator==(const StateFormula&, const StateFormula&) = default;
};

/// PCTL path formula. The eventually forms are sugar removed by desugar().
struct PathFormula {
    using Node = std::variant<path::Next, path::BoundedUntil, path::Until, path::BoundedEventually, path::Eventually>;
    Node node;
    friend bool operator==(const PathFormula&, const PathFormula&) = default;
};

// Builders.
inline StatePtr make_true() { return std::make_shared<const StateFormula>(StateFormula{state::True{}}); }
inline StatePtr make_false() { return std::make_shared<const StateFormula>(StateFormula{state::False{}}); }
inline StatePtr make_atom(std::string name) {
    return std::make_shared<const StateFormula>(StateFormula{state::Atom{std::move(name)}});
}
inline StatePtr make_not(StatePtr f) { return std::make_shared<const StateFormula>(StateFormula{state::Not{std::move(f)}}); }
inline StatePtr make_and(StatePtr a, StatePtr b) {
    return std::make_shared<const StateFormula>(StateFormula{state::And{std::move(a), std::move(b)}});
}
inline StatePtr make_or(StatePtr a, StatePtr b) {
    return std::make_shared<const StateFormula>(StateFormula{state::Or{std::move(a), std::move(b)}});
}
inline StatePtr make_implies(StatePtr a, StatePtr b) {
    return std::make_shared<const StateFormula>(StateFormula{state::Implies{std::move(a), std::move(b)}});
}
inline StatePtr make_prob(Relation rel, double bound, PathPtr path) {
    if (!(bound >= 0.0 && bound <= 1.0)) throw InvalidArgument("probability bound outside [0,1]");
    return std::make_shared<const StateFormula>(StateFormula{state::Prob{rel, bound, std::move(path)}});
}
inline PathPtr make_next(StatePtr f) { return std::make_shared<const PathFormula>(PathFormula{path::Next{std::move(f)}}); }
inline PathPtr make_bounded_until(StatePtr a, unsigned k, StatePtr b) {
    return std::make_shared<const PathFormula>(PathFormula{path::BoundedUntil{std::move(a), k, std::move(b)}});
}
inline PathPtr make_until(StatePtr a, StatePtr b) {
    return std::make_shared<const PathFormula>(PathFormula{path::Until{std::move(a), std::move(b)}});
}
inline PathPtr make_bounded_eventually(unsigned k, StatePtr f) {
    return std::make_shared<const PathFormula>(PathFormula{path::BoundedEventually{k, std::move(f)}});
}
inline PathPtr make_eventually(StatePtr f) {
    return std::make_shared<const PathFormula>(PathFormula{path::Eventually{std::move(f)}});
}

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline std::string format_probability(double p) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, p, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

inline std::string to_string(const PathFormula& f);

/// Canonical, fully parenthesized text. parse(to_string(f)) == f.
inline std::string to_string(const StateFormula& f) {
    auto bin = [](const StatePtr& a, std::string_view op, const StatePtr& b) {
        return "(" + to_string(*a) + " " + std::string(op) + " " + to_string(*b) + ")";
    };
    return std::visit(overloaded{
                          [](const state::True&) -> std::string { return "true"; },
                          [](const state::False&) -> std::string { return "false"; },
                          [](const state::Atom& a) { return a.name; },
                          [](const state::Not& n) { return "!" + to_string(*n.arg); },
                          [&](const state::And& n) { return bin(n.lhs, "&", n.rhs); },
                          [&](const state::Or& n) { return bin(n.lhs, "|", n.rhs); },
                          [&](const state::Implies& n) { return bin(n.lhs, "->", n.rhs); },
                          [](const state::Prob& n) {
                              return "P" + std::string(to_string(n.rel)) + format_probability(n.bound) + "[ " +
                                     to_string(*n.path) + " ]";
                          },
                      },
                      f.node);
}

inline std::string to_string(const PathFormula& f) {
    return std::visit(overloaded{
                          [](const path::Next& n) { return "X " + to_string(*n.arg); },
                          [](const path::BoundedUntil& n) {
                              return to_string(*n.lhs) + " U<=" + std::to_string(n.steps) + " " + to_string(*n.rhs);
                          },
                          [](const path::Until& n) { return to_string(*n.lhs) + " U " + to_string(*n.rhs); },
                          [](const path::BoundedEventually& n) {
                              return "F<=" + std::to_string(n.steps) + " " + to_string(*n.arg);
                          },
                          [](const path::Eventually& n) { return "F " + to_string(*n.arg); },
                      },
                      f.node);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok { End, Ident, Number, True, False, Prob, Next, Until, Finally, Not, And, Or, Implies,
                 LParen, RParen, LBracket, RBracket, Less, LessEq, Greater, GreaterEq };

inline std::string_view describe(Tok t) {
    switch (t) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::True: return "'true'";
        case Tok::False: return "'false'";
        case Tok::Prob: return "'P'";
        case Tok::Next: return "'X'";
        case Tok::Until: return "'U'";
        case Tok::Finally: return "'F'";
        case Tok::Not: return "'!'";
        case Tok::And: return "'&'";
        case Tok::Or: return "'|'";
        case Tok::Implies: return "'->'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Less: return "'<'";
        case Tok::LessEq: return "'<='";
        case Tok::Greater: return "'>'";
        case Tok::GreaterEq: return "'>='";
    }
    return "?";
}

struct Token {
    Tok kind;
    std::string_view text;
    std::size_t offset;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ == src_.size()) {
                out.push_back({Tok::End, {}, pos_});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    Token next() {
        const std::size_t start = pos_;
        const char c = src_[pos_];
        auto tok = [&](Tok k, std::size_t len) {
            pos_ += len;
            return Token{k, src_.substr(start, len), start};
        };
        auto peek = [&](std::size_t ahead) { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; };

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) ++end;
            std::string_view word = src_.substr(start, end - start);
            Tok k = Tok::Ident;
            if (word == "true") k = Tok::True;
            else if (word == "false") k = Tok::False;
            else if (word == "P") k = Tok::Prob;
            else if (word == "X") k = Tok::Next;
            else if (word == "U") k = Tok::Until;
            else if (word == "F") k = Tok::Finally;
            return tok(k, end - start);
        }
        bool negative_number = c == '-' && (std::isdigit(static_cast<unsigned char>(peek(1))) || peek(1) == '.');
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || negative_number) {
            std::size_t end = pos_ + (negative_number ? 1 : 0);
            while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) ++end;
            return tok(Tok::Number, end - start);
        }
        switch (c) {
            case '!': return tok(Tok::Not, 1);
            case '&': return tok(Tok::And, 1);
            case '|': return tok(Tok::Or, 1);
            case '(': return tok(Tok::LParen, 1);
            case ')': return tok(Tok::RParen, 1);
            case '[': return tok(Tok::LBracket, 1);
            case ']': return tok(Tok::RBracket, 1);
            case '<': return peek(1) == '=' ? tok(Tok::LessEq, 2) : tok(Tok::Less, 1);
            case '>': return peek(1) == '=' ? tok(Tok::GreaterEq, 2) : tok(Tok::Greater, 1);
            case '-':
                if (peek(1) == '>') return tok(Tok::Implies, 2);
                break;
            default: break;
        }
        throw ParseError(start, {}, "syntax error at byte " + std::to_string(start) + ": unexpected character '" +
                                        std::string(1, c) + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

// Recursive descent over the token stream, one function per precedence level:
//   implies := or ("->" implies)?
//   or      := and ("|" and)*
//   and     := unary ("&" unary)*
//   unary   := "!" unary | primary
class Parser {
public:
    explicit Parser(std::string_view src) : tokens_(Lexer(src).run()) {}

    StatePtr parse() {
        StatePtr f = implies();
        expect(Tok::End);
        return f;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }

    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }

    [[noreturn]] void fail(std::set<std::string> expected) const {
        const Token& t = peek();
        std::string msg = "syntax error at byte " + std::to_string(t.offset) + ": expected ";
        bool first = true;
        for (const auto& e : expected) {
            msg += (first ? "" : " or ") + e;
            first = false;
        }
        msg += t.kind == Tok::End ? ", found end of input" : ", found '" + std::string(t.text) + "'";
        throw ParseError(t.offset, std::move(expected), msg);
    }

    const Token& expect(Tok k) {
        if (peek().kind != k) fail({std::string(describe(k))});
        return tokens_[pos_++];
    }

    StatePtr implies() {
        StatePtr lhs = disjunction();
        if (accept(Tok::Implies)) return make_implies(std::move(lhs), implies());
        return lhs;
    }

    StatePtr disjunction() {
        StatePtr lhs = conjunction();
        while (accept(Tok::Or)) lhs = make_or(std::move(lhs), conjunction());
        return lhs;
    }

    StatePtr conjunction() {
        StatePtr lhs = unary();
        while (accept(Tok::And)) lhs = make_and(std::move(lhs), unary());
        return lhs;
    }

    StatePtr unary() {
        if (accept(Tok::Not)) return make_not(unary());
        return primary();
    }

    StatePtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::True: ++pos_; return make_true();
            case Tok::False: ++pos_; return make_false();
            case Tok::Ident: ++pos_; return make_atom(std::string(t.text));
            case Tok::LParen: {
                ++pos_;
                StatePtr f = implies();
                expect(Tok::RParen);
                return f;
            }
            case Tok::Prob: {
                ++pos_;
                Relation rel = relation();
                double bound = probability();
                expect(Tok::LBracket);
                PathPtr p = path_formula();
                expect(Tok::RBracket);
                return make_prob(rel, bound, std::move(p));
            }
            default:
                fail({"'true'", "'false'", "identifier", "'!'", "'('", "'P'"});
        }
    }

    Relation relation() {
        switch (peek().kind) {
            case Tok::Less: ++pos_; return Relation::Less;
            case Tok::LessEq: ++pos_; return Relation::LessEqual;
            case Tok::Greater: ++pos_; return Relation::Greater;
            case Tok::GreaterEq: ++pos_; return Relation::GreaterEqual;
            default: fail({"'<'", "'<='", "'>'", "'>='"});
        }
    }

    double probability() {
        if (peek().kind != Tok::Number) fail({"number"});
        const Token& t = tokens_[pos_++];
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value,
                                         std::chars_format::fixed);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw ParseError(t.offset, {"number"}, "syntax error at byte " + std::to_string(t.offset) +
                                                       ": malformed number '" + std::string(t.text) + "'");
        if (!(value >= 0.0 && value <= 1.0))
            throw ParseError(t.offset, {}, "probability " + std::string(t.text) + " at byte " +
                                               std::to_string(t.offset) + " is outside [0,1]");
        return value;
    }

    unsigned step_bound() {
        if (peek().kind != Tok::Number) fail({"number"});
        const Token& t = tokens_[pos_++];
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw ParseError(t.offset, {}, "step bound '" + std::string(t.text) + "' at byte " +
                                               std::to_string(t.offset) + " is not a nonnegative integer");
        return value;
    }

    PathPtr path_formula() {
        if (accept(Tok::Next)) return make_next(implies());
        if (accept(Tok::Finally)) {
            if (accept(Tok::LessEq)) {
                unsigned k = step_bound();
                return make_bounded_eventually(k, implies());
            }
            return make_eventually(implies());
        }
        StatePtr lhs = implies();
        if (peek().kind != Tok::Until) fail({"'U'", "'&'", "'|'", "'->'"});
        ++pos_;
        if (accept(Tok::LessEq)) {
            unsigned k = step_bound();
            return make_bounded_until(std::move(lhs), k, implies());
        }
        return make_until(std::move(lhs), implies());
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a PCTL state formula. Throws ParseError.
inline StatePtr parse(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Transformations
// ---------------------------------------------------------------------------

inline PathPtr desugar(const PathPtr& f);

/// Rewrites F and F<=k into until form: F g == true U g. Idempotent.
inline StatePtr desugar(const StatePtr& f) {
    return std::visit(overloaded{
                          [&](const state::True&) { return f; },
                          [&](const state::False&) { return f; },
                          [&](const state::Atom&) { return f; },
                          [](const state::Not& n) { return make_not(desugar(n.arg)); },
                          [](const state::And& n) { return make_and(desugar(n.lhs), desugar(n.rhs)); },
                          [](const state::Or& n) { return make_or(desugar(n.lhs), desugar(n.rhs)); },
                          [](const state::Implies& n) { return make_implies(desugar(n.lhs), desugar(n.rhs)); },
                          [](const state::Prob& n) { return make_prob(n.rel, n.bound, desugar(n.path)); },
                      },
                      f->node);
}

inline PathPtr desugar(const PathPtr& f) {
    return std::visit(overloaded{
                          [](const path::Next& n) { return make_next(desugar(n.arg)); },
                          [](const path::BoundedUntil& n) {
                              return make_bounded_until(desugar(n.lhs), n.steps, desugar(n.rhs));
                          },
                          [](const path::Until& n) { return make_until(desugar(n.lhs), desugar(n.rhs)); },
                          [](const path::BoundedEventually& n) {
                              return make_bounded_until(make_true(), n.steps, desugar(n.arg));
                          },
                          [](const path::Eventually& n) { return make_until(make_true(), desugar(n.arg)); },
                      },
                      f->node);
}

namespace detail {
inline void collect_atoms(const StateFormula& f, std::set<std::string>& out);
inline void collect_atoms(const PathFormula& f, std::set<std::string>& out) {
    std::visit(overloaded{
                   [&](const path::Next& n) { collect_atoms(*n.arg, out); },
                   [&](const path::BoundedUntil& n) { collect_atoms(*n.lhs, out), collect_atoms(*n.rhs, out); },
                   [&](const path::Until& n) { collect_atoms(*n.lhs, out), collect_atoms(*n.rhs, out); },
                   [&](const path::BoundedEventually& n) { collect_atoms(*n.arg, out); },
                   [&](const path::Eventually& n) { collect_atoms(*n.arg, out); },
               },
               f.node);
}
inline void collect_atoms(const StateFormula& f, std::set<std::string>& out) {
    std::visit(overloaded{
                   [](const state::True&) {},
                   [](const state::False&) {},
                   [&](const state::Atom& a) { out.insert(a.name); },
                   [&](const state::Not& n) { collect_atoms(*n.arg, out); },
                   [&](const state::And& n) { collect_atoms(*n.lhs, out), collect_atoms(*n.rhs, out); },
                   [&](const state::Or& n) { collect_atoms(*n.lhs, out), collect_atoms(*n.rhs, out); },
                   [&](const state::Implies& n) { collect_atoms(*n.lhs, out), collect_atoms(*n.rhs, out); },
                   [&](const state::Prob& n) { collect_atoms(*n.path, out); },
               },
               f.node);
}
}  // namespace detail

inline std::set<std::string> atom_names(const StateFormula& f) {
    std::set<std::string> out;
    detail::collect_atoms(f, out);
    return out;
}

}  // namespace pctl
