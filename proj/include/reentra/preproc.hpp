// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reentra/errors.hpp"
#include "reentra/io.hpp"
#include "reentra/lexer.hpp"

namespace reentra {

/// Source text after cleaning: ASCII only, no comments, no blank lines.
/// line_map[i] is the 0-based original line number of cleaned line i.
struct CleanSource {
    std::string text;
    std::vector<std::size_t> line_map;
};

/// A condensed slice of one contract: the statements relevant to one
/// external-call site, in source order. anchor_index points at the
/// external-call statement that seeded the slice.
struct ContractSnippet {
    std::string contract_id;
    std::vector<std::string> statements;
    std::vector<std::size_t> origin_lines;  // original 0-based line per statement
    std::size_t anchor_index = 0;

    const std::string& anchor() const { return statements.at(anchor_index); }
    std::size_t anchor_line() const { return origin_lines.at(anchor_index); }
};

struct SymbolMap {
    std::map<std::string, std::string> var_map;  // user variable -> VAR<i>
    std::map<std::string, std::string> fun_map;  // user function -> FUN<i>
};

struct TokenSequence {
    std::string contract_id;
    std::vector<std::string> tokens;
};

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

/// Strips // and /* */ comments (quote-aware), drops non-ASCII bytes, trims
/// trailing whitespace and removes blank lines. \r\n and bare \r are
/// normalized to \n before the line accounting.
inline CleanSource clean_source(const std::string& raw) {
    // Normalization pre-pass: \r\n / bare \r become \n and non-ASCII bytes
    // are dropped *before* lexical scanning, so byte removal can never
    // synthesize a comment marker the scanner missed (keeps cleaning
    // idempotent).
    std::string norm;
    norm.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\r') {
            if (i + 1 >= raw.size() || raw[i + 1] != '\n') norm.push_back('\n');
            continue;
        }
        if (static_cast<unsigned char>(raw[i]) >= 0x80) continue;
        norm.push_back(raw[i]);
    }

    enum class State { Normal, LineComment, BlockComment, DString, SString };
    State state = State::Normal;
    std::size_t block_open_line = 0;

    CleanSource out;
    std::string line;
    std::size_t orig_line = 0;

    auto flush_line = [&]() {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        if (!line.empty()) {
            out.text += line;
            out.text += '\n';
            out.line_map.push_back(orig_line);
        }
        line.clear();
    };

    const std::size_t n = norm.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = norm[i];
        if (c == '\n') {
            if (state == State::LineComment) state = State::Normal;
            // Solidity string literals cannot span lines; fall back to normal.
            if (state == State::DString || state == State::SString) state = State::Normal;
            if (state != State::BlockComment) flush_line();
            ++orig_line;
            continue;
        }

        switch (state) {
            case State::Normal:
                if (c == '/' && i + 1 < n && norm[i + 1] == '/') {
                    state = State::LineComment;
                    ++i;
                } else if (c == '/' && i + 1 < n && norm[i + 1] == '*') {
                    state = State::BlockComment;
                    block_open_line = orig_line;
                    ++i;
                } else {
                    if (c == '"') state = State::DString;
                    if (c == '\'') state = State::SString;
                    line.push_back(c);
                }
                break;
            case State::LineComment:
                break;
            case State::BlockComment:
                if (c == '*' && i + 1 < n && norm[i + 1] == '/') {
                    state = State::Normal;
                    ++i;
                }
                break;
            case State::DString:
            case State::SString:
                if (c == '\\' && i + 1 < n && norm[i + 1] != '\n') {
                    line.push_back(c);
                    line.push_back(norm[i + 1]);
                    ++i;
                } else {
                    if ((state == State::DString && c == '"') || (state == State::SString && c == '\''))
                        state = State::Normal;
                    line.push_back(c);
                }
                break;
        }
    }
    if (state == State::BlockComment)
        throw LexicalError("unterminated block comment opened at line " +
                           std::to_string(block_open_line + 1));
    flush_line();
    return out;
}

// ---------------------------------------------------------------------------
// Statement splitting
// ---------------------------------------------------------------------------

namespace detail {

enum class StmtKind { Simple, Header };
enum class ScopeKind { Contract, Function, Other };

struct Statement {
    std::string text;
    std::size_t origin_line = 0;
    StmtKind kind = StmtKind::Simple;
    int enclosing_function = -1;   // index into the statement list, -1 if none
    bool at_contract_level = false;
};

inline std::string first_word(const std::string& text) {
    std::size_t b = 0;
    while (b < text.size() && !is_ident_start(text[b])) {
        if (text[b] != ' ') return {};
        ++b;
    }
    std::size_t e = b;
    while (e < text.size() && is_ident_char(text[e])) ++e;
    return text.substr(b, e - b);
}

inline ScopeKind classify_header(const std::string& text) {
    const std::string w = first_word(text);
    if (w == "function" || w == "constructor" || w == "modifier" || w == "receive" ||
        w == "fallback")
        return ScopeKind::Function;
    if (w == "contract" || w == "library" || w == "interface" || w == "abstract")
        return ScopeKind::Contract;
    return ScopeKind::Other;
}

/// Whitespace-collapsed copy (strings left untouched).
inline std::string canonicalize(const std::string& s) {
    std::string out;
    bool in_str = false;
    char quote = 0;
    bool pending_space = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_str) {
            out.push_back(c);
            if (c == '\\' && i + 1 < s.size()) {
                out.push_back(s[++i]);
            } else if (c == quote) {
                in_str = false;
            }
            continue;
        }
        if (c == ' ' || c == '\t') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        if (c == '"' || c == '\'') {
            in_str = true;
            quote = c;
        }
        out.push_back(c);
    }
    return out;
}

/// Statement text with string literals elided and whitespace dropped; the
/// form the anchor patterns are matched against.
inline std::string match_text(const std::string& s) {
    std::string out;
    bool in_str = false;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_str) {
            if (c == '\\' && i + 1 < s.size())
                ++i;
            else if (c == quote)
                in_str = false;
            continue;
        }
        if (c == '"' || c == '\'') {
            in_str = true;
            quote = c;
            continue;
        }
        if (c != ' ' && c != '\t') out.push_back(c);
    }
    return out;
}

inline bool is_anchor_statement(const std::string& stmt_text) {
    static const std::vector<std::string> patterns = {
        ".call.value(", ".call{value:", ".send(", ".transfer(", ".call(",
    };
    const std::string m = match_text(stmt_text);
    for (const auto& p : patterns)
        if (m.find(p) != std::string::npos) return true;
    return false;
}

/// Splits cleaned source into logical statements and records, for each one,
/// the enclosing function header and whether it sits directly inside a
/// contract body. `;` splits only at bracket depth zero, so for-headers stay
/// whole; a `{` after `call`/`delegatecall`/`staticcall` or after `(`, `,`,
/// `=` is treated as part of the expression (call options, struct literals)
/// rather than as a block.
inline std::vector<Statement> split_statements(const CleanSource& clean) {
    struct Frame {
        ScopeKind kind;
        int header_index;
    };

    std::vector<Statement> stmts;
    std::vector<Frame> stack;
    std::string buf;
    std::size_t buf_line = 0;
    bool buf_has_content = false;
    int paren_depth = 0;
    int expr_brace_depth = 0;
    bool in_str = false;
    char quote = 0;

    auto enclosing_function = [&]() -> int {
        for (auto it = stack.rbegin(); it != stack.rend(); ++it)
            if (it->kind == ScopeKind::Function) return it->header_index;
        return -1;
    };

    auto emit = [&](StmtKind kind) -> int {
        std::string text = canonicalize(buf);
        buf.clear();
        buf_has_content = false;
        if (text.empty()) return -1;
        const std::string w = first_word(text);
        if (w == "pragma" || w == "import") return -1;
        Statement st;
        st.text = std::move(text);
        st.origin_line = buf_line;
        st.kind = kind;
        st.enclosing_function = enclosing_function();
        st.at_contract_level = !stack.empty() && stack.back().kind == ScopeKind::Contract;
        stmts.push_back(std::move(st));
        return static_cast<int>(stmts.size()) - 1;
    };

    auto brace_is_expression = [&]() {
        std::size_t e = buf.size();
        while (e > 0 && (buf[e - 1] == ' ' || buf[e - 1] == '\t')) --e;
        if (e == 0) return false;
        const char prev = buf[e - 1];
        if (prev == '(' || prev == ',' || prev == '=') return true;
        if (!is_ident_char(prev)) return false;
        std::size_t b = e;
        while (b > 0 && is_ident_char(buf[b - 1])) --b;
        const std::string word = buf.substr(b, e - b);
        return word == "call" || word == "delegatecall" || word == "staticcall";
    };

    const auto lines = split_lines(clean.text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string& lineText = lines[li];
        for (std::size_t ci = 0; ci < lineText.size(); ++ci) {
            const char c = lineText[ci];
            if (in_str) {
                buf.push_back(c);
                if (c == '\\' && ci + 1 < lineText.size())
                    buf.push_back(lineText[++ci]);
                else if (c == quote)
                    in_str = false;
                continue;
            }
            if (!buf_has_content && c != ' ' && c != '\t') {
                buf_line = clean.line_map[li];
                buf_has_content = true;
            }
            switch (c) {
                case '"':
                case '\'':
                    in_str = true;
                    quote = c;
                    buf.push_back(c);
                    break;
                case '(':
                case '[':
                    ++paren_depth;
                    buf.push_back(c);
                    break;
                case ')':
                case ']':
                    if (paren_depth > 0) --paren_depth;
                    buf.push_back(c);
                    break;
                case ';':
                    if (paren_depth == 0 && expr_brace_depth == 0) {
                        buf.push_back(';');
                        emit(StmtKind::Simple);
                    } else {
                        buf.push_back(';');
                    }
                    break;
                case '{':
                    if (expr_brace_depth > 0 || brace_is_expression()) {
                        ++expr_brace_depth;
                        buf.push_back('{');
                    } else {
                        const int idx = emit(StmtKind::Header);
                        const ScopeKind kind =
                            idx >= 0 ? classify_header(stmts[idx].text) : ScopeKind::Other;
                        stack.push_back({kind, idx});
                    }
                    break;
                case '}':
                    if (expr_brace_depth > 0) {
                        --expr_brace_depth;
                        buf.push_back('}');
                    } else {
                        emit(StmtKind::Simple);  // dangling fragment, if any
                        if (!stack.empty()) stack.pop_back();
                    }
                    break;
                default:
                    buf.push_back(c);
                    break;
            }
        }
        buf.push_back(' ');  // logical statements may span physical lines
        in_str = false;
    }
    emit(StmtKind::Simple);
    return stmts;
}

inline std::vector<std::string> identifiers_of(const std::string& stmt_text) {
    std::vector<std::string> ids;
    for (const auto& tok : lex_statement(stmt_text))
        if (tok.kind == TokKind::Identifier) ids.push_back(tok.text);
    return ids;
}

/// The declared name of a contract-level variable declaration: the last
/// identifier before the first top-level `=`, or before the closing `;`.
inline std::optional<std::string> declared_name(const std::string& stmt_text) {
    const std::string w = first_word(stmt_text);
    if (w.empty() || w == "using" || w == "event" || w == "emit") return std::nullopt;
    std::vector<RawToken> toks;
    try {
        toks = lex_statement(stmt_text);
    } catch (const LexicalError&) {
        return std::nullopt;
    }
    int depth = 0;
    std::optional<std::string> last_ident;
    for (const auto& t : toks) {
        if (t.kind == TokKind::Punct) {
            if (t.text == "(" || t.text == "[") ++depth;
            if (t.text == ")" || t.text == "]") --depth;
            if (depth == 0 && (t.text == "=" || t.text == ";")) return last_ident;
        } else if (t.kind == TokKind::Identifier) {
            last_ident = t.text;
        }
    }
    return last_ident;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Snippet extraction
// ---------------------------------------------------------------------------

/// One snippet per external-call statement. A snippet holds, in source
/// order, the enclosing function's signature, every statement of that
/// function's body, and the contract-level declarations of the state
/// variables the function touches: the call site and the state updates it
/// races against end up in the same slice.
inline std::vector<ContractSnippet> extract_snippets(const CleanSource& clean,
                                                     const std::string& contract_id = {}) {
    using namespace detail;
    const std::vector<Statement> stmts = split_statements(clean);

    // Function header index -> ordered body statement indices.
    std::map<int, std::vector<int>> bodies;
    for (std::size_t i = 0; i < stmts.size(); ++i)
        if (stmts[i].enclosing_function >= 0)
            bodies[stmts[i].enclosing_function].push_back(static_cast<int>(i));

    // Contract-level declarations with a recoverable name.
    std::vector<std::pair<int, std::string>> decls;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
        if (stmts[i].kind != StmtKind::Simple || !stmts[i].at_contract_level) continue;
        if (auto name = declared_name(stmts[i].text)) decls.emplace_back(static_cast<int>(i), *name);
    }

    std::vector<ContractSnippet> snippets;
    std::map<int, std::unordered_set<std::string>> fn_idents;  // cache per function
    for (std::size_t i = 0; i < stmts.size(); ++i) {
        if (!is_anchor_statement(stmts[i].text)) continue;

        std::vector<int> indices;
        const int fn = stmts[i].kind == StmtKind::Header && classify_header(stmts[i].text) ==
                                                                ScopeKind::Function
                           ? -1
                           : stmts[i].enclosing_function;
        if (fn >= 0) {
            indices.push_back(fn);
            const auto& body = bodies[fn];
            indices.insert(indices.end(), body.begin(), body.end());
            auto it = fn_idents.find(fn);
            if (it == fn_idents.end()) {
                std::unordered_set<std::string> ids;
                for (int si : indices)
                    for (auto& id : identifiers_of(stmts[si].text)) ids.insert(std::move(id));
                it = fn_idents.emplace(fn, std::move(ids)).first;
            }
            for (const auto& [di, name] : decls)
                if (it->second.count(name)) indices.push_back(di);
            std::sort(indices.begin(), indices.end());
        } else {
            indices.push_back(static_cast<int>(i));
        }

        ContractSnippet snip;
        snip.contract_id = contract_id;
        for (int si : indices) {
            if (si == static_cast<int>(i)) snip.anchor_index = snip.statements.size();
            snip.statements.push_back(stmts[si].text);
            snip.origin_lines.push_back(stmts[si].origin_line);
        }
        snippets.push_back(std::move(snip));
    }
    return snippets;
}

// ---------------------------------------------------------------------------
// Symbolization
// ---------------------------------------------------------------------------

/// Replaces user-defined names with VAR<i>/FUN<i>, numbered by first
/// occurrence. Reserved words and existing symbols pass through; an
/// identifier directly followed by `(` (or declared via `function`) counts
/// as a function, everything else as a variable.
inline std::pair<ContractSnippet, SymbolMap> symbolize(const ContractSnippet& snippet) {
    ContractSnippet out = snippet;
    SymbolMap map;
    std::size_t next_var = 1, next_fun = 1;

    for (auto& stmt : out.statements) {
        const std::vector<RawToken> toks = lex_statement(stmt);
        struct Edit {
            std::size_t offset, length;
            std::string replacement;
        };
        std::vector<Edit> edits;
        for (std::size_t t = 0; t < toks.size(); ++t) {
            const RawToken& tok = toks[t];
            if (tok.kind != TokKind::Identifier) continue;
            const std::string& name = tok.text;
            if (is_reserved_word(name) || is_symbolic_name(name)) continue;
            if (name == "NUM" || name == "STR") continue;  // placeholder tokens stay fixed

            std::string symbol;
            if (auto it = map.var_map.find(name); it != map.var_map.end()) {
                symbol = it->second;
            } else if (auto it2 = map.fun_map.find(name); it2 != map.fun_map.end()) {
                symbol = it2->second;
            } else {
                const bool after_function_kw =
                    t > 0 && toks[t - 1].kind == TokKind::Identifier && toks[t - 1].text == "function";
                const bool before_call_paren =
                    t + 1 < toks.size() && toks[t + 1].kind == TokKind::Punct && toks[t + 1].text == "(";
                if (after_function_kw || before_call_paren) {
                    symbol = "FUN" + std::to_string(next_fun++);
                    map.fun_map[name] = symbol;
                } else {
                    symbol = "VAR" + std::to_string(next_var++);
                    map.var_map[name] = symbol;
                }
            }
            edits.push_back({tok.offset, name.size(), symbol});
        }
        for (auto it = edits.rbegin(); it != edits.rend(); ++it)
            stmt.replace(it->offset, it->length, it->replacement);
    }
    return {std::move(out), std::move(map)};
}

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// Flattens a (symbolized) snippet into the token sequence fed to the
/// embedding stage. Numeric literals become NUM, string literals STR.
inline TokenSequence tokenize(const ContractSnippet& snippet) {
    TokenSequence seq;
    seq.contract_id = snippet.contract_id;
    for (std::size_t s = 0; s < snippet.statements.size(); ++s) {
        std::vector<RawToken> toks;
        try {
            toks = lex_statement(snippet.statements[s]);
        } catch (const LexicalError& e) {
            throw LexicalError("statement " + std::to_string(s) + ": " + e.what());
        }
        for (const auto& t : toks) {
            switch (t.kind) {
                case TokKind::Number:
                    seq.tokens.push_back("NUM");
                    break;
                case TokKind::String:
                    seq.tokens.push_back("STR");
                    break;
                default:
                    seq.tokens.push_back(t.text);
                    break;
            }
        }
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Snippet interchange file (the preprocess -> train/detect handoff)
// ---------------------------------------------------------------------------

/// One line of the preprocessed snippet file.
struct SnippetRecord {
    std::string contract_id;
    std::vector<std::string> tokens;
    std::size_t anchor_line = 0;
    int label = 0;

    /// Unique id for fold bookkeeping (contracts can yield many snippets).
    std::string uid(std::size_t index_in_file) const {
        return contract_id + "#" + std::to_string(index_in_file);
    }
};

inline std::string snippet_records_to_jsonl(const std::vector<SnippetRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json j;
        j["contract_id"] = r.contract_id;
        j["tokens"] = r.tokens;
        j["anchor_line"] = r.anchor_line;
        j["label"] = r.label;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::vector<SnippetRecord> snippet_records_from_jsonl(const std::string& text,
                                                             const std::string& origin = {}) {
    std::vector<SnippetRecord> records;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(lines[i], nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("contract_id") ||
            !j.contains("tokens") || !j.contains("label"))
            throw ParseError(origin + ":" + std::to_string(i + 1) + ": malformed snippet line");
        SnippetRecord r;
        r.contract_id = j["contract_id"].get<std::string>();
        r.tokens = j["tokens"].get<std::vector<std::string>>();
        r.anchor_line = j.value("anchor_line", std::size_t{0});
        r.label = j["label"].get<int>();
        if (r.label != 0 && r.label != 1)
            throw ValidationError(origin + ":" + std::to_string(i + 1) + ": label must be 0 or 1");
        records.push_back(std::move(r));
    }
    return records;
}

/// Full preprocessing of one contract: clean, slice, symbolize, tokenize.
inline std::vector<SnippetRecord> preprocess_source(const std::string& raw_source,
                                                    const std::string& contract_id, int label) {
    const CleanSource clean = clean_source(raw_source);
    std::vector<SnippetRecord> out;
    for (const auto& snip : extract_snippets(clean, contract_id)) {
        auto [sym, map] = symbolize(snip);
        (void)map;
        TokenSequence seq = tokenize(sym);
        SnippetRecord rec;
        rec.contract_id = contract_id;
        rec.tokens = std::move(seq.tokens);
        rec.anchor_line = sym.anchor_line();
        rec.label = label;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace reentra
