#pragma once

#include "flatcheck/common.hpp"

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace flatcheck {

enum class Tok {
    End,
    Ident,
    Int,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Star,
    Plus,
    Minus,
    Slash,
    Ge,
    Gt,
    Le,
    Lt,
    Comma,
    Semi,
    Assign,
    PlusAssign,
    MinusAssign,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

// Tokenizer shared by the formula, guard and update grammars.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1, i = 0;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto push = [&](Tok kind, std::size_t len) {
        out.push_back(Token{kind, std::string(src.substr(i, len)), line, col});
        advance(len);
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '.' ||
                    src[j] == '\''))
                ++j;
            push(Tok::Ident, j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            push(Tok::Int, j - i);
            continue;
        }
        auto two = src.substr(i, 2);
        if (two == "->") { push(Tok::Arrow, 2); continue; }
        if (two == ">=") { push(Tok::Ge, 2); continue; }
        if (two == "<=") { push(Tok::Le, 2); continue; }
        if (two == "+=") { push(Tok::PlusAssign, 2); continue; }
        if (two == "-=") { push(Tok::MinusAssign, 2); continue; }
        if (two == "&&") { push(Tok::Amp, 2); continue; }
        if (two == "||") { push(Tok::Pipe, 2); continue; }
        switch (c) {
            case '(': push(Tok::LParen, 1); continue;
            case ')': push(Tok::RParen, 1); continue;
            case '[': push(Tok::LBracket, 1); continue;
            case ']': push(Tok::RBracket, 1); continue;
            case '{': push(Tok::LBrace, 1); continue;
            case '}': push(Tok::RBrace, 1); continue;
            case '!': push(Tok::Bang, 1); continue;
            case '~': push(Tok::Bang, 1); continue;
            case '&': push(Tok::Amp, 1); continue;
            case '|': push(Tok::Pipe, 1); continue;
            case '*': push(Tok::Star, 1); continue;
            case '+': push(Tok::Plus, 1); continue;
            case '-': push(Tok::Minus, 1); continue;
            case '/': push(Tok::Slash, 1); continue;
            case '>': push(Tok::Gt, 1); continue;
            case '<': push(Tok::Lt, 1); continue;
            case ',': push(Tok::Comma, 1); continue;
            case ';': push(Tok::Semi, 1); continue;
            case '=': push(Tok::Assign, 1); continue;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
}

// Cursor over a token vector with small helpers used by the recursive-descent parsers.
class TokenStream {
public:
    explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t k = pos_ + ahead;
        return k < toks_.size() ? toks_[k] : toks_.back();
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_ident(std::string_view name) const { return at(Tok::Ident) && peek().text == name; }
    Token next() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    Token expect(Tok k, std::string_view what) {
        if (!at(k)) fail(std::string("expected ") + std::string(what));
        return next();
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", found " + found, t.line, t.column);
    }
    std::size_t position() const { return pos_; }
    void rewind(std::size_t p) { pos_ = p; }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace flatcheck
