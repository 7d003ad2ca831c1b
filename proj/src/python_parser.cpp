#include "llmloc/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <string>
#include <unordered_set>

namespace llmloc {
namespace {

enum class Tok { name, number, string, op };

struct Token {
    Tok type;
    std::string_view text;
    std::size_t line;
};

struct LogicalLine {
    std::size_t indent = 0;
    std::size_t start_line = 0;
    std::size_t end_line = 0;
    std::vector<Token> tokens;
};

struct ParseFailure {
    std::size_t line;
    std::string what;
};

const std::unordered_set<std::string_view>& keywords() {
    static const std::unordered_set<std::string_view> kw{
        "False", "None",   "True",    "and",      "as",   "assert", "async",  "await",
        "break", "class",  "continue", "def",     "del",  "elif",   "else",   "except",
        "finally", "for",  "from",    "global",   "if",   "import", "in",     "is",
        "lambda", "nonlocal", "not",  "or",       "pass", "raise",  "return", "try",
        "while", "with",   "yield",   "match",    "case", "print"};
    return kw;
}

bool is_keyword(std::string_view s) { return keywords().count(s) != 0 && s != "print"; }

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || (c & 0x80); }
bool is_ident_char(char c) { return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

/// Splits source text into logical lines (bracket- and backslash-joined),
/// dropping comments and blank lines.
class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    std::vector<LogicalLine> run() {
        std::vector<LogicalLine> out;
        LogicalLine cur;
        bool at_line_start = true;
        int depth = 0;
        while (pos_ < src_.size()) {
            if (at_line_start && depth == 0) {
                std::size_t col = 0;
                while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f')) {
                    col = src_[pos_] == '\t' ? (col / 8 + 1) * 8 : col + 1;
                    ++pos_;
                }
                cur.indent = col;
                at_line_start = false;
            }
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            if (c == '\n' || c == '\r') {
                if (c == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
                ++pos_;
                if (depth == 0) {
                    if (!cur.tokens.empty()) {
                        cur.end_line = line_;
                        out.push_back(std::move(cur));
                    }
                    cur = LogicalLine{};
                    at_line_start = true;
                }
                ++line_;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
                ++pos_;
                if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
                ++pos_;
                ++line_;
                continue;
            }
            if (cur.tokens.empty()) cur.start_line = line_;
            if (is_string_start()) {
                cur.tokens.push_back(read_string());
                continue;
            }
            if (is_ident_start(c)) {
                std::size_t b = pos_;
                while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
                cur.tokens.push_back({Tok::name, src_.substr(b, pos_ - b), line_});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                std::size_t b = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                        src_[pos_] == '_' ||
                        ((src_[pos_] == '+' || src_[pos_] == '-') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))))
                    ++pos_;
                cur.tokens.push_back({Tok::number, src_.substr(b, pos_ - b), line_});
                continue;
            }
            // operators
            static constexpr std::string_view three[] = {"**=", "//=", ">>=", "<<=", "..."};
            static constexpr std::string_view two[] = {"==", "!=", "<=", ">=", "->", "+=", "-=", "*=", "/=",
                                                       "%=", "&=", "|=", "^=", "@=", "**", "//", "<<", ">>", ":="};
            std::size_t len = 1;
            for (auto op : three)
                if (src_.substr(pos_, 3) == op) len = 3;
            if (len == 1)
                for (auto op : two)
                    if (src_.substr(pos_, 2) == op) len = 2;
            if (len == 1) {
                if (c == '(' || c == '[' || c == '{') ++depth;
                if (c == ')' || c == ']' || c == '}') {
                    if (depth == 0) throw ParseFailure{line_, "unbalanced closing bracket"};
                    --depth;
                }
            }
            cur.tokens.push_back({Tok::op, src_.substr(pos_, len), line_});
            pos_ += len;
        }
        if (depth != 0) throw ParseFailure{line_, "unclosed bracket at end of file"};
        if (!cur.tokens.empty()) {
            cur.end_line = line_;
            out.push_back(std::move(cur));
        }
        return out;
    }

private:
    bool is_string_start() const {
        std::size_t p = pos_;
        std::size_t n = 0;
        while (p < src_.size() && n < 2 && std::strchr("rRbBuUfF", src_[p]) != nullptr && src_[p] != '\0') {
            ++p;
            ++n;
        }
        return p < src_.size() && (src_[p] == '\'' || src_[p] == '"');
    }

    Token read_string() {
        std::size_t b = pos_;
        std::size_t start_line = line_;
        while (src_[pos_] != '\'' && src_[pos_] != '"') ++pos_;
        char q = src_[pos_];
        bool triple = src_.substr(pos_, 3) == std::string(3, q);
        pos_ += triple ? 3 : 1;
        while (true) {
            if (pos_ >= src_.size()) throw ParseFailure{start_line, "unterminated string literal"};
            char c = src_[pos_];
            // a backslash shields the next character from closing the literal, raw or not
            if (c == '\\') {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (c == '\n') {
                if (!triple) throw ParseFailure{line_, "unterminated string literal"};
                ++line_;
            }
            if (c == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (src_.substr(pos_, 3) == std::string(3, q)) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        return {Tok::string, src_.substr(b, pos_ - b), start_line};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::string_view string_body(std::string_view lit) {
    std::size_t p = 0;
    while (p < lit.size() && lit[p] != '\'' && lit[p] != '"') ++p;
    char q = lit[p];
    std::size_t qlen = lit.substr(p, 3) == std::string(3, q) && lit.size() >= p + 6 ? 3 : 1;
    if (lit.size() < p + 2 * qlen) return {};
    return lit.substr(p + qlen, lit.size() - p - 2 * qlen);
}

/// A literal that names a file: no whitespace, an extension starting with a letter.
bool looks_like_path(std::string_view s) {
    if (s.empty() || s.size() > 255) return false;
    for (char c : s)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '{' || c == '}' || c == '%' || c == '\\') return false;
    auto base = basename_of(s);
    auto dot = base.find_last_of('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 >= base.size()) return false;
    if (!std::isalpha(static_cast<unsigned char>(base[dot + 1]))) return false;
    for (std::size_t i = dot + 1; i < base.size(); ++i)
        if (!std::isalnum(static_cast<unsigned char>(base[i]))) return false;
    return true;
}

struct Scope {
    EntityKind kind;
    std::string dotted;
    std::size_t header_indent;
    std::optional<std::size_t> body_indent;
    std::size_t entity_index;
};

class StatementParser {
public:
    std::vector<SyntaxEntity> run(const std::vector<LogicalLine>& lines) {
        std::vector<std::size_t> indents{0};
        std::size_t pending_decorator = 0;  // first decorator line, 0 when none
        bool expect_indent = false;
        for (const auto& line : lines) {
            if (expect_indent && line.indent <= indents.back())
                throw ParseFailure{line.start_line, "expected an indented block"};
            if (line.indent > indents.back()) {
                if (!expect_indent) throw ParseFailure{line.start_line, "unexpected indent"};
                indents.push_back(line.indent);
            } else {
                while (line.indent < indents.back()) indents.pop_back();
                if (line.indent != indents.back())
                    throw ParseFailure{line.start_line, "unindent does not match any outer indentation level"};
            }
            expect_indent = false;

            while (!scopes_.empty() && line.indent <= scopes_.back().header_indent) scopes_.pop_back();
            for (auto& s : scopes_) {
                if (!s.body_indent) s.body_indent = line.indent;
                out_[s.entity_index].span.end = std::max(out_[s.entity_index].span.end, line.end_line);
            }

            const auto& t = line.tokens;
            if (t.front().type == Tok::op && t.front().text == "@") {
                if (pending_decorator == 0) pending_decorator = line.start_line;
                collect_calls(t, 1);
                continue;
            }
            bool header = is_block_header(t);
            expect_indent = header && t.back().type == Tok::op && t.back().text == ":";

            std::size_t i = 0;
            if (t[i].type == Tok::name && t[i].text == "async" && t.size() > 1) ++i;
            if (t[i].type == Tok::name && (t[i].text == "def" || t[i].text == "class") && i + 1 < t.size() &&
                t[i + 1].type == Tok::name) {
                bool is_class = t[i].text == "class";
                std::string name(t[i + 1].text);
                std::size_t start = pending_decorator ? pending_decorator : line.start_line;
                SyntaxEntity e;
                e.kind = is_class ? EntityKind::class_def : EntityKind::function;
                e.name = name;
                e.span = {start, line.end_line};
                e.enclosing = enclosing_dotted();
                std::string dotted = e.enclosing ? *e.enclosing + "." + name : name;
                out_.push_back(e);
                std::size_t idx = out_.size() - 1;
                if (is_class) collect_bases(t, i + 2, name, dotted, line.start_line);
                collect_calls(t, i + 2);
                collect_paths(t, i + 2);
                for (auto& s : scopes_) out_[s.entity_index].span.end = std::max(out_[s.entity_index].span.end, line.end_line);
                if (expect_indent) scopes_.push_back({e.kind, dotted, line.indent, std::nullopt, idx});
                pending_decorator = 0;
                continue;
            }
            pending_decorator = 0;

            if (t[0].type == Tok::name && (t[0].text == "import" || t[0].text == "from")) {
                collect_imports(t, line.start_line);
                continue;
            }
            if (!header) collect_assignment(line);
            collect_calls(t, 0);
            collect_paths(t, 0);
        }
        if (expect_indent) throw ParseFailure{lines.back().end_line, "expected an indented block at end of file"};
        return std::move(out_);
    }

private:
    std::optional<std::string> enclosing_dotted() const {
        if (scopes_.empty()) return std::nullopt;
        return scopes_.back().dotted;
    }

    static bool is_block_header(const std::vector<Token>& t) {
        static const std::unordered_set<std::string_view> heads{"if", "elif", "else", "for", "while", "try",
                                                                "except", "finally", "with", "def", "class",
                                                                "async", "match", "case"};
        return t[0].type == Tok::name && heads.count(t[0].text) && t.back().type == Tok::op && t.back().text == ":";
    }

    void collect_bases(const std::vector<Token>& t, std::size_t i, const std::string& cls, const std::string& dotted,
                       std::size_t line) {
        if (i >= t.size() || t[i].text != "(") return;
        int depth = 0;
        std::string current;
        bool keyword_arg = false;
        auto flush = [&] {
            if (!current.empty() && !keyword_arg) {
                SyntaxEntity e;
                e.kind = EntityKind::extend_ref;
                e.name = cls;
                e.span = {line, line};
                e.enclosing = dotted;
                e.target = current;
                out_.push_back(std::move(e));
            }
            current.clear();
            keyword_arg = false;
        };
        for (std::size_t k = i; k < t.size(); ++k) {
            const auto& tok = t[k];
            if (tok.type == Tok::op && (tok.text == "(" || tok.text == "[" || tok.text == "{")) {
                ++depth;
                continue;
            }
            if (tok.type == Tok::op && (tok.text == ")" || tok.text == "]" || tok.text == "}")) {
                --depth;
                if (depth == 0) {
                    flush();
                    break;
                }
                continue;
            }
            if (depth != 1) continue;
            if (tok.type == Tok::op && tok.text == ",") {
                flush();
            } else if (tok.type == Tok::op && tok.text == "=") {
                keyword_arg = true;
            } else if (tok.type == Tok::name && !keyword_arg) {
                if (current.empty() || (k > 0 && t[k - 1].text == ".")) {
                    if (!current.empty()) current.push_back('.');
                    current.append(tok.text);
                }
            }
        }
    }

    void collect_imports(const std::vector<Token>& t, std::size_t line) {
        auto emit = [&](std::string target) {
            if (target.empty()) return;
            SyntaxEntity e;
            e.kind = EntityKind::import_ref;
            e.name = std::string(kImportModule);
            e.span = {line, line};
            e.enclosing = enclosing_dotted();
            e.target = std::move(target);
            out_.push_back(std::move(e));
        };
        auto read_dotted = [&](std::size_t& k) {
            std::string s;
            while (k < t.size() && (t[k].text == "." || t[k].text == "...")) {
                s.append(t[k].text);
                ++k;
            }
            while (k < t.size() && t[k].type == Tok::name && t[k].text != "import" && t[k].text != "as") {
                s.append(t[k].text);
                ++k;
                if (k < t.size() && t[k].text == "." && k + 1 < t.size() && t[k + 1].type == Tok::name) {
                    s.push_back('.');
                    ++k;
                } else {
                    break;
                }
            }
            return s;
        };
        std::size_t k = 1;
        if (t[0].text == "import") {
            while (k < t.size()) {
                std::string mod = read_dotted(k);
                emit(mod);
                if (k < t.size() && t[k].text == "as") k += 2;
                if (k < t.size() && t[k].text == ",") {
                    ++k;
                    continue;
                }
                break;
            }
            return;
        }
        std::string mod = read_dotted(k);
        if (k >= t.size() || t[k].text != "import") return;
        ++k;
        bool star = false;
        std::vector<std::string> names;
        for (; k < t.size(); ++k) {
            if (t[k].text == "*") star = true;
            if (t[k].type != Tok::name) continue;
            if (t[k].text == "as") {
                ++k;
                continue;
            }
            names.emplace_back(t[k].text);
        }
        bool only_dots = mod.find_first_not_of('.') == std::string::npos;
        if (star || names.empty()) {
            emit(mod);
            return;
        }
        for (const auto& n : names) emit(only_dots ? mod + n : mod + "." + n);
    }

    void collect_assignment(const LogicalLine& line) {
        const auto& t = line.tokens;
        bool top_level = scopes_.empty() && line.indent == 0;
        bool class_body = !scopes_.empty() && scopes_.back().kind == EntityKind::class_def &&
                          scopes_.back().body_indent == line.indent;
        if (!top_level && !class_body) return;
        if (t[0].type != Tok::name || is_keyword(t[0].text)) return;

        std::vector<std::string_view> names;
        std::size_t k = 0;
        // NAME (, NAME)* =   |   NAME : annotation [= value]
        while (k < t.size() && t[k].type == Tok::name) {
            names.push_back(t[k].text);
            ++k;
            if (k < t.size() && t[k].text == ",") {
                ++k;
                continue;
            }
            break;
        }
        if (k >= t.size()) return;
        bool ok = t[k].text == "=" || (t[k].text == ":" && names.size() == 1);
        if (!ok) return;
        for (auto n : names) {
            if (is_keyword(n)) continue;
            SyntaxEntity e;
            e.kind = EntityKind::attribute;
            e.name = std::string(n);
            e.span = {line.start_line, line.end_line};
            e.enclosing = enclosing_dotted();
            out_.push_back(std::move(e));
        }
    }

    void collect_calls(const std::vector<Token>& t, std::size_t from) {
        for (std::size_t k = std::max<std::size_t>(from, 0); k + 1 < t.size(); ++k) {
            if (t[k].type != Tok::name || t[k + 1].text != "(") continue;
            if (is_keyword(t[k].text)) continue;
            if (k > 0 && t[k - 1].type == Tok::name && (t[k - 1].text == "def" || t[k - 1].text == "class")) continue;
            std::string chain(t[k].text);
            std::size_t j = k;
            while (j >= 2 && t[j - 1].text == "." && t[j - 2].type == Tok::name && !is_keyword(t[j - 2].text)) {
                chain = std::string(t[j - 2].text) + "." + chain;
                j -= 2;
            }
            SyntaxEntity e;
            e.kind = EntityKind::call_ref;
            e.name = std::string(t[k].text);
            e.span = {t[k].line, t[k].line};
            e.enclosing = enclosing_dotted();
            e.target = std::move(chain);
            out_.push_back(std::move(e));
        }
    }

    void collect_paths(const std::vector<Token>& t, std::size_t from) {
        for (std::size_t k = from; k < t.size(); ++k) {
            if (t[k].type != Tok::string) continue;
            auto body = string_body(t[k].text);
            if (!looks_like_path(body)) continue;
            SyntaxEntity e;
            e.kind = EntityKind::import_ref;
            e.name = std::string(kImportPath);
            e.span = {t[k].line, t[k].line};
            e.enclosing = enclosing_dotted();
            e.target = std::string(body);
            out_.push_back(std::move(e));
        }
    }

    std::vector<Scope> scopes_;
    std::vector<SyntaxEntity> out_;
};

}  // namespace

std::vector<SyntaxEntity> PythonParser::parse(std::string_view content, std::string_view grammar_id,
                                              DiagnosticSink& sink) const {
    if (grammar_id != "python") {
        sink.warn("parser", "unsupported grammar: " + std::string(grammar_id));
        return {};
    }
    try {
        auto lines = Tokenizer(content).run();
        if (lines.empty()) return {};
        auto entities = StatementParser().run(lines);
        std::stable_sort(entities.begin(), entities.end(), [](const SyntaxEntity& a, const SyntaxEntity& b) {
            return a.span.start < b.span.start;
        });
        return entities;
    } catch (const ParseFailure& f) {
        sink.warn("parser", "line " + std::to_string(f.line) + ": " + f.what);
        return {};
    }
}

const SyntaxParser& default_parser() {
    static const PythonParser parser;
    return parser;
}

}  // namespace llmloc
