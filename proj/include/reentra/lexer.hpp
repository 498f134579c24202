// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "reentra/errors.hpp"

namespace reentra {

enum class TokKind { Identifier, Number, String, Punct };

struct RawToken {
    TokKind kind;
    std::string text;
    std::size_t offset = 0;  // byte offset within the statement
};

/// Solidity keywords. These survive symbolization: the structural signal a
/// classifier needs (function, require, mapping, ...) lives here.
inline const std::unordered_set<std::string>& solidity_keywords() {
    static const std::unordered_set<std::string> kw = [] {
        std::unordered_set<std::string> s = {
            "function",  "returns",  "require",   "if",       "else",      "mapping",
            "address",   "bool",     "public",    "private",  "payable",   "memory",
            "storage",   "calldata", "modifier",  "contract", "emit",      "return",
            "while",     "for",      "assert",    "revert",   "throw",     "constructor",
            "internal",  "external", "view",      "pure",     "constant",  "event",
            "struct",    "enum",     "library",   "interface","using",     "new",
            "delete",    "is",       "do",        "break",    "continue",  "true",
            "false",     "string",   "bytes",     "byte",     "wei",       "ether",
            "gwei",      "finney",   "szabo",     "seconds",  "minutes",   "hours",
            "days",      "weeks",    "years",     "anonymous","indexed",   "immutable",
            "override",  "virtual",  "receive",   "fallback", "pragma",    "solidity",
            "import",    "abstract", "unchecked", "try",      "catch",     "assembly",
            "type",      "int",      "uint",      "fixed",    "ufixed",
        };
        for (int w = 8; w <= 256; w += 8) {
            s.insert("uint" + std::to_string(w));
            s.insert("int" + std::to_string(w));
        }
        for (int n = 1; n <= 32; ++n) s.insert("bytes" + std::to_string(n));
        return s;
    }();
    return kw;
}

/// Built-in objects and members (msg.sender, call.value, ...). Also never
/// symbolized: `call`, `send`, `transfer` are exactly the tokens that mark a
/// potential reentrancy site.
inline const std::unordered_set<std::string>& solidity_builtins() {
    static const std::unordered_set<std::string> b = {
        "msg",       "sender",     "value",      "call",     "send",       "transfer",
        "balance",   "this",       "block",      "now",      "tx",         "gasleft",
        "origin",    "gas",        "data",       "sig",      "gasprice",   "number",
        "timestamp", "coinbase",   "difficulty", "gaslimit", "basefee",    "chainid",
        "blockhash", "keccak256",  "sha256",     "sha3",     "ripemd160",  "ecrecover",
        "addmod",    "mulmod",     "selfdestruct", "suicide", "delegatecall", "staticcall",
        "callcode",  "push",       "pop",        "length",   "abi",        "encode",
        "decode",    "encodePacked", "encodeWithSelector", "encodeWithSignature", "super",
    };
    return b;
}

inline bool is_reserved_word(const std::string& s) {
    return solidity_keywords().count(s) > 0 || solidity_builtins().count(s) > 0;
}

/// VAR<i> / FUN<i> symbols produced by symbolization.
inline bool is_symbolic_name(std::string_view s) {
    std::string_view rest;
    if (s.substr(0, 3) == "VAR" || s.substr(0, 3) == "FUN")
        rest = s.substr(3);
    else
        return false;
    if (rest.empty() || rest[0] == '0') return false;
    for (char c : rest)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

inline bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
inline bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

/// Multi-character operators, longest first.
inline const std::vector<std::string>& operator_table() {
    static const std::vector<std::string> ops = {
        "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=",
        "/=",  "%=",  "|=", "&=", "^=", "++", "--", "<<", ">>", "**", "=>",
    };
    return ops;
}

inline bool is_single_punct(char c) {
    static const std::string singles = "+-*/%=<>!&|^~?:;,.()[]{}";
    return singles.find(c) != std::string::npos;
}

/// Lex one statement into raw tokens. Numbers cover decimal, hex, underscore
/// separators and exponent forms; strings cover single/double quotes with
/// backslash escapes. Anything outside the Solidity lexical alphabet is an
/// error, reported with its byte offset.
inline std::vector<RawToken> lex_statement(const std::string& text) {
    std::vector<RawToken> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (c == ' ' || c == '\t') {
            ++i;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && is_ident_char(text[j])) ++j;
            tokens.push_back({TokKind::Identifier, text.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i + 1;
            if (c == '0' && j < n && (text[j] == 'x' || text[j] == 'X')) {
                ++j;
                while (j < n && (std::isxdigit(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            } else {
                while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
                if (j + 1 < n && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
                    ++j;
                    while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                }
                if (j < n && (text[j] == 'e' || text[j] == 'E')) {
                    std::size_t k = j + 1;
                    if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
                    if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
                        j = k;
                        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                    }
                }
            }
            tokens.push_back({TokKind::Number, text.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (c == '"' || c == '\'') {
            const char quote = c;
            std::size_t j = i + 1;
            while (j < n && text[j] != quote) {
                if (text[j] == '\\' && j + 1 < n) ++j;
                ++j;
            }
            if (j < n) ++j;  // closing quote
            tokens.push_back({TokKind::String, text.substr(i, j - i), i});
            i = j;
            continue;
        }
        bool matched = false;
        for (const auto& op : operator_table()) {
            if (text.compare(i, op.size(), op) == 0) {
                tokens.push_back({TokKind::Punct, op, i});
                i += op.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (is_single_punct(c)) {
            tokens.push_back({TokKind::Punct, std::string(1, c), i});
            ++i;
            continue;
        }
        throw LexicalError("character '" + std::string(1, c) +
                           "' outside the Solidity lexical alphabet at offset " + std::to_string(i));
    }
    return tokens;
}

}  // namespace reentra
