// Copyright 2026 The omx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OMX_DSL_HPP
#define OMX_DSL_HPP

// Line-oriented circuit language (.omx). See docs/dsl.md for the grammar.

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "omx/elements.hpp"
#include "omx/error.hpp"
#include "omx/protocols.hpp"

namespace omx::dsl {

/// 1-based source position. Spans never take part in AST equality, so two
/// programs compare equal when they have the same structure.
struct Span {
    int line = 1;
    int column = 1;
    friend bool operator==(const Span &, const Span &) { return true; }
};

class ParseError : public Error {
public:
    ParseError(int line, int column, std::string expected, std::string found)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": expected " + expected +
                ", found " + found),
          line_(line),
          column_(column),
          expected_(std::move(expected)),
          found_(std::move(found)) {}

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string &expected() const { return expected_; }
    const std::string &found() const { return found_; }

private:
    int line_;
    int column_;
    std::string expected_;
    std::string found_;
};

struct Diagnostic {
    std::optional<Span> span;
    std::string message;

    std::string str() const {
        if (!span) {
            return message;
        }
        return "line " + std::to_string(span->line) + ", column " + std::to_string(span->column) + ": " + message;
    }
};

class CompileError : public Error {
public:
    explicit CompileError(std::vector<Diagnostic> diags) : Error(join(diags)), diags_(std::move(diags)) {}
    const std::vector<Diagnostic> &diagnostics() const { return diags_; }

private:
    static std::string join(const std::vector<Diagnostic> &d) {
        std::string s;
        for (const auto &x : d) {
            s += (s.empty() ? "" : "\n") + x.str();
        }
        return s;
    }
    std::vector<Diagnostic> diags_;
};

// ---------------------------------------------------------------------------
// AST

struct ModeRef {
    std::string name;
    std::optional<Polarization> pol;
    Span span;
    bool operator==(const ModeRef &) const = default;
    std::string str() const { return pol ? name + "." + polarization_char(*pol) : name; }
};

struct NumberLit {
    double value = 0.0;
    bool degrees = false;
    Span span;
    bool operator==(const NumberLit &) const = default;
    double radians() const { return degrees ? deg_to_rad(value) : value; }
};

using Arg = std::variant<ModeRef, NumberLit>;

enum class Rails { Pol, H, V };

struct ModeDecl {
    ModeKind kind = ModeKind::OpticalPath;
    std::string name;
    Rails rails = Rails::Pol;  // photons only
    std::optional<long long> cutoff;
    bool thermal = false;  // magnons only
    std::optional<double> thermal_n_bar;
    Span span;
    bool operator==(const ModeDecl &) const = default;
};

using SetValue = std::variant<bool, long long, double, std::string, cplx>;

struct SetDecl {
    std::string key;
    SetValue value;
    Span span;
    bool operator==(const SetDecl &) const = default;
};

struct ElementDecl {
    std::string name;
    std::vector<Arg> args;
    Span span;
    bool operator==(const ElementDecl &) const = default;
};

enum class MeasureKind { Herald, Bell, Target };

struct MeasureLine {
    MeasureKind kind = MeasureKind::Bell;
    std::string word;  // target: teleport | swap
    std::vector<ModeRef> refs;
    Span span;
    bool operator==(const MeasureLine &) const = default;
};

struct MeasureDecl {
    std::vector<MeasureLine> lines;
    Span span;
    bool operator==(const MeasureDecl &) const = default;
};

using Decl = std::variant<ModeDecl, SetDecl, ElementDecl, MeasureDecl>;

struct CircuitAst {
    std::vector<Decl> declarations;
    bool operator==(const CircuitAst &) const = default;
};

// ---------------------------------------------------------------------------
// Element signatures, shared by the parser (arity) and the compiler.

enum class ArgKind { Mode, Path, Angle, Number };

inline const std::map<std::string, std::vector<ArgKind>> &element_signatures() {
    using K = ArgKind;
    static const std::map<std::string, std::vector<ArgKind>> sigs = {
        {"bs50", {K::Mode, K::Mode}},
        {"hwp", {K::Path, K::Angle}},
        {"qwp", {K::Path, K::Angle}},
        {"pbs", {K::Path, K::Path}},
        {"phase", {K::Mode, K::Angle}},
        {"stokes", {K::Mode, K::Mode, K::Mode}},
        {"antistokes", {K::Mode, K::Mode}},
        {"pdc", {K::Mode, K::Mode, K::Number}},
        {"create", {K::Mode}},
        {"prep", {K::Path}},
        {"swap", {K::Mode, K::Mode}},
    };
    return sigs;
}

inline const char *arg_kind_name(ArgKind k) {
    switch (k) {
        case ArgKind::Mode:
            return "mode";
        case ArgKind::Path:
            return "path";
        case ArgKind::Angle:
            return "angle";
        case ArgKind::Number:
            return "number";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok { Ident, Number, Imag, LParen, RParen, Comma, Dot, Equals, Plus, Minus, Newline, End };

struct Token {
    Tok kind;
    std::string text;
    int line;
    int column;
    double value = 0.0;  // Number / Imag
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::string describe(const Token &t) {
    switch (t.kind) {
        case Tok::Newline:
            return "end of line";
        case Tok::End:
            return "end of input";
        default:
            return "'" + t.text + "'";
    }
}

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    // Position used for end of input: the last character of the source.
    int last_line = 1;
    int last_col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            last_line = line;
            last_col = col;
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        int tl = line;
        int tc = col;
        if (c == '\n') {
            out.push_back({Tok::Newline, "\n", tl, tc});
            advance(1);
        } else if (c == ' ' || c == '\t' || c == '\r') {
            advance(1);
        } else if (c == '#') {
            while (i < src.size() && src[i] != '\n') {
                advance(1);
            }
        } else if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) {
                ++j;
            }
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), tl, tc});
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            auto digits = [&] {
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
                    ++j;
                }
            };
            digits();
            if (j < src.size() && src[j] == '.') {
                ++j;
                digits();
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) {
                    ++k;
                }
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    digits();
                }
            }
            std::string text(src.substr(i, j - i));
            double v = 0.0;
            auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if (res.ec != std::errc()) {
                throw ParseError(tl, tc, "number", "'" + text + "'");
            }
            Tok kind = Tok::Number;
            if (j < src.size() && src[j] == 'i' && !(j + 1 < src.size() && ident_char(src[j + 1]))) {
                kind = Tok::Imag;
                ++j;
                text += 'i';
            }
            out.push_back({kind, text, tl, tc, v});
            advance(j - i);
        } else {
            Tok kind;
            switch (c) {
                case '(':
                    kind = Tok::LParen;
                    break;
                case ')':
                    kind = Tok::RParen;
                    break;
                case ',':
                    kind = Tok::Comma;
                    break;
                case '.':
                    kind = Tok::Dot;
                    break;
                case '=':
                    kind = Tok::Equals;
                    break;
                case '+':
                    kind = Tok::Plus;
                    break;
                case '-':
                    kind = Tok::Minus;
                    break;
                default: {
                    // report the whole UTF-8 sequence
                    std::size_t n = 1;
                    auto u = static_cast<unsigned char>(c);
                    if (u >= 0xF0) {
                        n = 4;
                    } else if (u >= 0xE0) {
                        n = 3;
                    } else if (u >= 0xC0) {
                        n = 2;
                    }
                    n = std::min(n, src.size() - i);
                    throw ParseError(tl, tc, "token", "'" + std::string(src.substr(i, n)) + "'");
                }
            }
            out.push_back({kind, std::string(1, c), tl, tc});
            advance(1);
        }
    }
    out.push_back({Tok::End, "", last_line, last_col});
    return out;
}

inline const char *ordinal(std::size_t k) {
    static const char *names[] = {"first", "second", "third", "fourth", "fifth"};
    return k < 5 ? names[k] : "next";
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    CircuitAst program() {
        CircuitAst ast;
        while (true) {
            skip_newlines();
            const Token &t = peek();
            if (t.kind == Tok::End) {
                break;
            }
            if (is_word("mode")) {
                ast.declarations.emplace_back(mode_decl());
            } else if (is_word("set")) {
                ast.declarations.emplace_back(set_decl());
            } else if (is_word("apply")) {
                ast.declarations.emplace_back(element_decl());
            } else if (is_word("measure")) {
                ast.declarations.emplace_back(measure_block());
            } else {
                fail("statement (mode, set, apply or measure)");
            }
        }
        return ast;
    }

private:
    const Token &peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
    bool is(Tok k) const { return peek().kind == k; }
    bool is_word(std::string_view w) const { return is(Tok::Ident) && peek().text == w; }
    static Span span_of(const Token &t) { return {t.line, t.column}; }

    [[noreturn]] void fail(const std::string &expected) const {
        const Token &t = peek();
        throw ParseError(t.line, t.column, expected, describe(t));
    }

    Token expect(Tok k, const std::string &what) {
        if (!is(k)) {
            fail(what);
        }
        return next();
    }

    Token expect_word(std::string_view w) {
        if (!is_word(w)) {
            fail("'" + std::string(w) + "'");
        }
        return next();
    }

    void skip_newlines() {
        while (is(Tok::Newline)) {
            next();
        }
    }

    void end_of_line() {
        if (!is(Tok::Newline) && !is(Tok::End)) {
            fail("end of line");
        }
        if (is(Tok::Newline)) {
            next();
        }
    }

    double signed_number(const std::string &what) {
        bool neg = false;
        if (is(Tok::Minus) || is(Tok::Plus)) {
            neg = next().kind == Tok::Minus;
        }
        double v = expect(Tok::Number, what).value;
        return neg ? -v : v;
    }

    long long integer(const std::string &what) {
        if (is(Tok::Number) && peek().text.find_first_not_of("0123456789") == std::string::npos &&
            peek().text.size() < 10) {
            return std::stoll(next().text);
        }
        fail(what);
    }

    bool boolean() {
        if (is_word("true") || is_word("false")) {
            return next().text == "true";
        }
        fail("true or false");
    }

    cplx complex_literal() {
        const std::string what = "complex number";
        double sign = 1.0;
        if (is(Tok::Minus) || is(Tok::Plus)) {
            sign = next().kind == Tok::Minus ? -1.0 : 1.0;
        }
        if (is(Tok::Imag)) {
            return {0.0, sign * next().value};
        }
        double re = sign * expect(Tok::Number, what).value;
        if (is(Tok::Plus) || is(Tok::Minus)) {
            double s = next().kind == Tok::Minus ? -1.0 : 1.0;
            return {re, s * expect(Tok::Imag, "imaginary part").value};
        }
        return {re, 0.0};
    }

    ModeRef mode_ref(const std::string &what, bool allow_pol) {
        Token name = expect(Tok::Ident, what);
        ModeRef r{name.text, std::nullopt, span_of(name)};
        if (allow_pol && is(Tok::Dot)) {
            next();
            if (is_word("H") || is_word("V")) {
                r.pol = next().text == "H" ? Polarization::H : Polarization::V;
            } else {
                fail("polarization H or V");
            }
        }
        return r;
    }

    ModeDecl mode_decl() {
        next();
        ModeDecl d;
        if (is_word("photon")) {
            next();
            Token name = expect(Tok::Ident, "mode name");
            d.name = name.text;
            d.span = span_of(name);
            if (is_word("pol")) {
                d.rails = Rails::Pol;
            } else if (is_word("H")) {
                d.rails = Rails::H;
            } else if (is_word("V")) {
                d.rails = Rails::V;
            } else {
                fail("pol, H or V");
            }
            next();
        } else if (is_word("magnon")) {
            next();
            d.kind = ModeKind::Magnon;
            Token name = expect(Tok::Ident, "mode name");
            d.name = name.text;
            d.span = span_of(name);
        } else {
            fail("photon or magnon");
        }
        while (!is(Tok::Newline) && !is(Tok::End)) {
            if (is_word("cutoff") && !d.cutoff) {
                next();
                expect(Tok::Equals, "'='");
                d.cutoff = integer("integer cutoff");
            } else if (d.kind == ModeKind::Magnon && is_word("thermal") && !d.thermal) {
                next();
                d.thermal = true;
                if (is(Tok::Equals)) {
                    next();
                    d.thermal_n_bar = signed_number("thermal occupation");
                }
            } else {
                fail("end of line");
            }
        }
        end_of_line();
        return d;
    }

    SetDecl set_decl() {
        next();
        static const std::vector<std::string> keys = {"n_bar",  "thermal_cutoff", "renormalize", "model",
                                                      "alpha", "beta",           "include_psi"};
        if (!is(Tok::Ident) || std::find(keys.begin(), keys.end(), peek().text) == keys.end()) {
            fail("setting name (n_bar, thermal_cutoff, renormalize, model, alpha, beta or include_psi)");
        }
        Token key = next();
        SetDecl d{key.text, false, span_of(key)};
        expect(Tok::Equals, "'='");
        const auto &k = key.text;
        if (k == "n_bar") {
            d.value = signed_number("number");
        } else if (k == "thermal_cutoff") {
            d.value = integer("integer");
        } else if (k == "renormalize" || k == "include_psi") {
            d.value = boolean();
        } else if (k == "model") {
            if (is_word("paper_uniform") || is_word("bosonic")) {
                d.value = next().text;
            } else {
                fail("scatter model (paper_uniform or bosonic)");
            }
        } else {
            d.value = complex_literal();
        }
        end_of_line();
        return d;
    }

    ElementDecl element_decl() {
        next();
        const auto &sigs = element_signatures();
        if (!is(Tok::Ident) || !sigs.count(peek().text)) {
            fail("element name");
        }
        Token name = next();
        ElementDecl d{name.text, {}, span_of(name)};
        const auto &sig = sigs.at(name.text);
        expect(Tok::LParen, "'('");
        for (std::size_t k = 0; k < sig.size(); ++k) {
            std::string what = std::string(ordinal(k)) + " " + arg_kind_name(sig[k]) + " argument";
            if (k > 0) {
                if (is(Tok::RParen)) {
                    fail(what);
                }
                expect(Tok::Comma, "','");
            }
            switch (sig[k]) {
                case ArgKind::Mode:
                    d.args.emplace_back(mode_ref(what, true));
                    break;
                case ArgKind::Path:
                    d.args.emplace_back(mode_ref(what, false));
                    break;
                case ArgKind::Angle:
                case ArgKind::Number: {
                    Span sp = span_of(peek());
                    NumberLit n{signed_number(what), false, sp};
                    if (sig[k] == ArgKind::Angle && is_word("deg")) {
                        next();
                        n.degrees = true;
                    }
                    d.args.emplace_back(n);
                    break;
                }
            }
        }
        expect(Tok::RParen, "')'");
        end_of_line();
        return d;
    }

    MeasureDecl measure_block() {
        MeasureDecl m;
        m.span = span_of(next());
        end_of_line();
        while (true) {
            skip_newlines();
            if (is_word("end")) {
                next();
                end_of_line();
                return m;
            }
            MeasureLine l;
            l.span = span_of(peek());
            if (is_word("herald")) {
                next();
                l.kind = MeasureKind::Herald;
                expect_word("vacuum");
                do {
                    l.refs.push_back(mode_ref("path", false));
                } while (is(Tok::Ident));
            } else if (is_word("bell")) {
                next();
                l.kind = MeasureKind::Bell;
                l.refs.push_back(mode_ref("first path", false));
                l.refs.push_back(mode_ref("second path", false));
            } else if (is_word("target")) {
                next();
                l.kind = MeasureKind::Target;
                if (is_word("teleport") || is_word("swap")) {
                    l.word = next().text;
                } else {
                    fail("teleport or swap");
                }
                do {
                    l.refs.push_back(mode_ref("magnon", false));
                } while (is(Tok::Ident));
            } else {
                fail("herald, bell, target or end");
            }
            end_of_line();
            m.lines.push_back(std::move(l));
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline CircuitAst parse(std::string_view source) { return detail::Parser(source).program(); }

/// Parses a complex literal such as "0.6", "-0.8i" or "0.6+0.8i".
inline cplx parse_complex(std::string_view text) {
    auto ast = parse("set alpha = " + std::string(text) + "\n");
    return std::get<cplx>(std::get<SetDecl>(ast.declarations.at(0)).value);
}

// ---------------------------------------------------------------------------
// Pretty printer

/// Shortest decimal that reads back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_complex(cplx z) {
    if (z.imag() == 0.0) {
        return format_number(z.real());
    }
    std::string im = format_number(std::abs(z.imag())) + "i";
    if (z.real() == 0.0) {
        return (z.imag() < 0 ? "-" : "") + im;
    }
    return format_number(z.real()) + (z.imag() < 0 ? "-" : "+") + im;
}

inline std::string print(const CircuitAst &ast) {
    std::ostringstream os;
    for (const auto &decl : ast.declarations) {
        std::visit(
            [&](const auto &d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, SetDecl>) {
                    os << "set " << d.key << " = ";
                    std::visit(
                        [&](const auto &v) {
                            using V = std::decay_t<decltype(v)>;
                            if constexpr (std::is_same_v<V, bool>) {
                                os << (v ? "true" : "false");
                            } else if constexpr (std::is_same_v<V, long long> || std::is_same_v<V, std::string>) {
                                os << v;
                            } else if constexpr (std::is_same_v<V, double>) {
                                os << format_number(v);
                            } else {
                                os << format_complex(v);
                            }
                        },
                        d.value);
                    os << "\n";
                } else if constexpr (std::is_same_v<T, ModeDecl>) {
                    if (d.kind == ModeKind::OpticalPath) {
                        os << "mode photon " << d.name << (d.rails == Rails::Pol ? " pol" : d.rails == Rails::H ? " H" : " V");
                    } else {
                        os << "mode magnon " << d.name;
                    }
                    if (d.cutoff) {
                        os << " cutoff=" << *d.cutoff;
                    }
                    if (d.thermal) {
                        os << " thermal";
                        if (d.thermal_n_bar) {
                            os << "=" << format_number(*d.thermal_n_bar);
                        }
                    }
                    os << "\n";
                } else if constexpr (std::is_same_v<T, ElementDecl>) {
                    os << "apply " << d.name << "(";
                    for (std::size_t k = 0; k < d.args.size(); ++k) {
                        os << (k ? ", " : "");
                        if (const auto *r = std::get_if<ModeRef>(&d.args[k])) {
                            os << r->str();
                        } else {
                            const auto &n = std::get<NumberLit>(d.args[k]);
                            os << format_number(n.value) << (n.degrees ? " deg" : "");
                        }
                    }
                    os << ")\n";
                } else {
                    os << "measure\n";
                    for (const auto &l : d.lines) {
                        os << "  "
                           << (l.kind == MeasureKind::Herald ? "herald vacuum"
                               : l.kind == MeasureKind::Bell ? "bell"
                                                             : "target " + l.word);
                        for (const auto &r : l.refs) {
                            os << " " << r.name;
                        }
                        os << "\n";
                    }
                    os << "end\n";
                }
            },
            decl);
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Compiler

namespace detail {

class Compiler {
public:
    Plan compile(const CircuitAst &ast) {
        settings(ast);
        modes(ast);
        if (reg_) {
            elements(ast);
        }
        measure(ast);
        if (!diags_.empty()) {
            throw CompileError(std::move(diags_));
        }
        return std::move(plan_);
    }

private:
    void error(const Span &s, std::string msg) { diags_.push_back({s, std::move(msg)}); }

    void settings(const CircuitAst &ast) {
        std::map<std::string, Span> seen;
        ThermalConfig &th = plan_.config.thermal;
        cplx alpha = plan_.config.qubit.alpha;
        cplx beta = plan_.config.qubit.beta;
        std::optional<Span> qubit_span;
        for (const auto &decl : ast.declarations) {
            const auto *d = std::get_if<SetDecl>(&decl);
            if (!d) {
                continue;
            }
            if (seen.count(d->key)) {
                error(d->span, "setting " + d->key + " given twice");
                continue;
            }
            seen[d->key] = d->span;
            if (d->key == "n_bar") {
                th.n_bar = std::get<double>(d->value);
                if (!(th.n_bar >= 0.0) || !std::isfinite(th.n_bar)) {
                    error(d->span, "n_bar must be finite and >= 0");
                }
            } else if (d->key == "thermal_cutoff") {
                auto c = std::get<long long>(d->value);
                if (c < 1 || c > 64) {
                    error(d->span, "thermal_cutoff must lie in 1..64");
                } else {
                    th.cutoff = static_cast<int>(c);
                }
            } else if (d->key == "renormalize") {
                th.renormalize_truncation = std::get<bool>(d->value);
            } else if (d->key == "include_psi") {
                plan_.config.include_psi = std::get<bool>(d->value);
            } else if (d->key == "model") {
                plan_.config.model =
                    std::get<std::string>(d->value) == "bosonic" ? ScatterModel::Bosonic : ScatterModel::PaperUniform;
            } else {
                (d->key == "alpha" ? alpha : beta) = std::get<cplx>(d->value);
                qubit_span = d->span;
            }
        }
        plan_.config.qubit = {alpha, beta};
        if (qubit_span) {
            try {
                plan_.config.qubit.validate();
            } catch (const Error &e) {
                error(*qubit_span, e.what());
            }
        }
    }

    void modes(const CircuitAst &ast) {
        std::vector<ModeLabel> labels;
        std::vector<int> cutoffs;
        std::map<std::string, Span> seen;
        struct Thermal {
            std::string name;
            double n_bar;
        };
        std::vector<Thermal> thermal;
        const int tc = plan_.config.thermal.cutoff;
        for (const auto &decl : ast.declarations) {
            const auto *d = std::get_if<ModeDecl>(&decl);
            if (!d) {
                continue;
            }
            if (seen.count(d->name)) {
                error(d->span, "mode " + d->name + " declared twice");
                continue;
            }
            seen[d->name] = d->span;
            long long c = d->cutoff.value_or(d->kind == ModeKind::Magnon ? tc + 1 : 1);
            if (c < 1 || c > 64) {
                error(d->span, "cutoff of " + d->name + " must lie in 1..64");
                continue;
            }
            if (d->kind == ModeKind::OpticalPath) {
                if (d->rails != Rails::V) {
                    labels.push_back(ModeLabel::optical(d->name, Polarization::H));
                    cutoffs.push_back(static_cast<int>(c));
                }
                if (d->rails != Rails::H) {
                    labels.push_back(ModeLabel::optical(d->name, Polarization::V));
                    cutoffs.push_back(static_cast<int>(c));
                }
            } else {
                labels.push_back(ModeLabel::magnon(d->name));
                cutoffs.push_back(static_cast<int>(c));
                if (d->thermal) {
                    double n = d->thermal_n_bar.value_or(plan_.config.thermal.n_bar);
                    if (!(n >= 0.0) || !std::isfinite(n)) {
                        error(d->span, "thermal occupation of " + d->name + " must be finite and >= 0");
                    }
                    if (c < tc) {
                        error(d->span, "cutoff overflow: thermal_cutoff " + std::to_string(tc) +
                                           " exceeds the cutoff " + std::to_string(c) + " of " + d->name);
                    }
                    thermal.push_back({d->name, n});
                }
            }
        }
        try {
            reg_ = ModeRegistry(std::move(labels), std::move(cutoffs));
            plan_.registry = *reg_;
            for (const auto &t : thermal) {
                plan_.thermal.push_back({reg_->magnon(t.name), t.n_bar});
            }
        } catch (const Error &e) {
            error(Span{}, e.what());
        }
    }

    std::optional<std::size_t> resolve_mode(const ModeRef &r) {
        auto label = r.pol ? ModeLabel::optical(r.name, *r.pol) : ModeLabel::magnon(r.name);
        if (auto i = reg_->find(label)) {
            return i;
        }
        if (!r.pol && reg_->has_path(r.name)) {
            error(r.span, "photon mode " + r.name + " needs a polarization (.H or .V)");
        } else {
            error(r.span, "undeclared mode " + r.str());
        }
        return std::nullopt;
    }

    bool resolve_path(const ModeRef &r) {
        if (!reg_->has_path(r.name)) {
            error(r.span, "undeclared photon path " + r.name + " (paths need both polarizations)");
            return false;
        }
        return true;
    }

    void elements(const CircuitAst &ast) {
        const auto &reg = *reg_;
        for (const auto &decl : ast.declarations) {
            const auto *d = std::get_if<ElementDecl>(&decl);
            if (!d) {
                continue;
            }
            const auto &sig = element_signatures().at(d->name);
            std::vector<std::size_t> m;
            std::vector<std::string> paths;
            std::vector<double> nums;
            bool ok = true;
            for (std::size_t k = 0; k < sig.size(); ++k) {
                if (sig[k] == ArgKind::Mode) {
                    auto i = resolve_mode(std::get<ModeRef>(d->args[k]));
                    ok = ok && i.has_value();
                    m.push_back(i.value_or(0));
                } else if (sig[k] == ArgKind::Path) {
                    const auto &r = std::get<ModeRef>(d->args[k]);
                    ok = resolve_path(r) && ok;
                    paths.push_back(r.name);
                } else {
                    nums.push_back(std::get<NumberLit>(d->args[k]).radians());
                }
            }
            if (!ok) {
                continue;
            }
            try {
                plan_.steps.push_back(build(d->name, reg, m, paths, nums));
            } catch (const Error &e) {
                error(d->span, d->name + ": " + e.what());
            }
        }
    }

    ElementOp build(const std::string &name, const ModeRegistry &reg, const std::vector<std::size_t> &m,
                    const std::vector<std::string> &p, const std::vector<double> &x) const {
        if (name == "bs50") {
            return beam_splitter_50_50(reg, m[0], m[1]);
        }
        if (name == "hwp") {
            return half_wave_plate(reg, p[0], x[0]);
        }
        if (name == "qwp") {
            return quarter_wave_plate(reg, p[0], x[0]);
        }
        if (name == "pbs") {
            return pbs(reg, p[0], p[1]);
        }
        if (name == "phase") {
            return phase_shift(reg, m[0], x[0]);
        }
        if (name == "stokes") {
            return stokes_scatter(reg, m[0], m[1], m[2], plan_.config.model);
        }
        if (name == "antistokes") {
            return antistokes_swap(reg, m[0], m[1]);
        }
        if (name == "pdc") {
            return pdc_evolution(reg, m[0], m[1], x[0]);
        }
        if (name == "create") {
            return excitation_adder(reg, m[0]);
        }
        if (name == "prep") {
            return polarization_prep(reg, p[0], plan_.config.qubit.alpha, plan_.config.qubit.beta);
        }
        return mode_swap("swap", reg, m[0], m[1]);
    }

    void measure(const CircuitAst &ast) {
        const MeasureDecl *block = nullptr;
        for (const auto &decl : ast.declarations) {
            if (const auto *d = std::get_if<MeasureDecl>(&decl)) {
                if (block) {
                    error(d->span, "more than one measurement block");
                } else {
                    block = d;
                }
            }
        }
        if (!block) {
            diags_.push_back({std::nullopt, "no measurement block"});
            return;
        }
        const MeasureLine *bell = nullptr;
        const MeasureLine *target = nullptr;
        for (const auto &l : block->lines) {
            if (l.kind == MeasureKind::Herald) {
                for (const auto &r : l.refs) {
                    if (reg_ && path_with_both(r)) {
                        plan_.herald_vacuum.push_back(r.name);
                    }
                }
            } else {
                const MeasureLine *&slot = l.kind == MeasureKind::Bell ? bell : target;
                if (slot) {
                    error(l.span, std::string("more than one ") + (l.kind == MeasureKind::Bell ? "bell" : "target") +
                                      " line");
                }
                slot = &l;
            }
        }
        if (!bell) {
            error(block->span, "measurement block has no bell line");
        } else if (reg_) {
            bool a = path_with_both(bell->refs[0]);
            bool b = path_with_both(bell->refs[1]);
            if (a && b && bell->refs[0].name == bell->refs[1].name) {
                error(bell->span, "bell analysis needs two different paths");
            }
            plan_.detection = {bell->refs[0].name, bell->refs[1].name};
        }
        if (!target) {
            error(block->span, "measurement block has no target line");
            return;
        }
        bool swap = target->word == "swap";
        plan_.config.kind = swap ? ProtocolKind::Swap : ProtocolKind::Teleport;
        std::size_t want = swap ? 4 : 2;
        if (target->refs.size() != want) {
            error(target->span, "target " + target->word + " takes " + std::to_string(want) + " magnons, got " +
                                    std::to_string(target->refs.size()));
        }
        if (!reg_) {
            return;
        }
        for (const auto &r : target->refs) {
            if (auto i = reg_->find(ModeLabel::magnon(r.name))) {
                if (std::find(plan_.target_magnons.begin(), plan_.target_magnons.end(), *i) !=
                    plan_.target_magnons.end()) {
                    error(r.span, "target " + r.name + " listed twice");
                    continue;
                }
                plan_.target_magnons.push_back(*i);
            } else {
                error(r.span, "target " + r.name + " is not a declared magnon");
            }
        }
    }

    bool path_with_both(const ModeRef &r) {
        if (!reg_->find(ModeLabel::optical(r.name, Polarization::H)) ||
            !reg_->find(ModeLabel::optical(r.name, Polarization::V))) {
            error(r.span, "path " + r.name + " must be declared with both polarizations");
            return false;
        }
        return true;
    }

    Plan plan_;
    std::optional<ModeRegistry> reg_;
    std::vector<Diagnostic> diags_;
};

}  // namespace detail

/// Resolves names and builds the executable plan. All semantic errors are
/// collected into one CompileError.
inline Plan compile(const CircuitAst &ast) { return detail::Compiler().compile(ast); }

inline Plan compile(std::string_view source) { return compile(parse(source)); }

}  // namespace omx::dsl

#endif  // OMX_DSL_HPP
