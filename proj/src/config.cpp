#include "aff/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace aff {

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg
                                  : msg),
      line_(line),
      column_(column) {}

Value number_value(double x) { return Value{x}; }
Value string_value(std::string s) { return Value{std::move(s)}; }
Value list_value(Value::List items) { return Value{std::move(items)}; }

namespace {

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == '/';
}

bool is_bare_word(const std::string& s) {
    if (s.empty() || !word_start(s[0])) return false;
    for (char c : s)
        if (!word_char(c)) return false;
    return s != "true" && s != "false" && s != "inf";
}

std::string format_number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

class Cursor {
public:
    Cursor(const std::string& text, int line) : s_(text), line_(line) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    int line() const { return line_; }
    int column() const { return col_; }

    char get() {
        const char c = s_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    /// Spaces and tabs; with `newlines`, also line breaks and comments.
    void skip_space(bool newlines) {
        while (!done()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                get();
            } else if (newlines && c == '\n') {
                get();
            } else if (newlines && c == '#') {
                while (!done() && peek() != '\n') get();
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    Value value(bool in_list) {
        skip_space(in_list);
        if (done() || peek() == '\n' || peek() == '#') fail("expected a value");
        const char c = peek();
        if (c == '[') return list();
        if (c == '"') return quoted();
        const int line = line_, col = col_;
        std::string tok;
        while (!done()) {
            const char d = peek();
            if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == ',' || d == ']' || d == '[' || d == '#' ||
                d == '"' || d == '=')
                break;
            tok += get();
        }
        if (tok.empty()) fail(std::string("unexpected character '") + c + "'");
        if (tok == "true") return Value{true};
        if (tok == "false") return Value{false};
        if (tok == "inf" || tok == "+inf") return number_value(std::numeric_limits<double>::infinity());
        if (tok == "-inf") return number_value(-std::numeric_limits<double>::infinity());
        if (word_start(tok[0])) {
            if (!is_bare_word(tok)) throw ParseError("invalid word '" + tok + "'", line, col);
            return string_value(tok);
        }
        double x = 0.0;
        const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
        const auto res = std::from_chars(first, tok.data() + tok.size(), x);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(x))
            throw ParseError("invalid number '" + tok + "'", line, col);
        return number_value(x);
    }

private:
    Value list() {
        get();  // '['
        Value::List items;
        skip_space(true);
        if (peek() == ']') {
            get();
            return list_value(std::move(items));
        }
        while (true) {
            items.push_back(value(true));
            skip_space(true);
            if (done()) fail("unterminated list");
            const char c = get();
            if (c == ']') break;
            if (c != ',') {
                --col_;
                fail("expected ',' or ']' in list");
            }
            skip_space(true);
            if (peek() == ']') {  // trailing comma
                get();
                break;
            }
        }
        return list_value(std::move(items));
    }

    Value quoted() {
        get();  // '"'
        std::string out;
        while (true) {
            if (done() || peek() == '\n') fail("unterminated string");
            const char c = get();
            if (c == '"') break;
            if (c == '\\') {
                if (done()) fail("unterminated string");
                const char e = get();
                if (e != '"' && e != '\\') fail(std::string("unknown escape '\\") + e + "'");
                out += e;
            } else {
                out += c;
            }
        }
        return string_value(std::move(out));
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
    int col_ = 1;
};

void check_key(const std::string& key, int line, int col) {
    bool ok = !key.empty() && word_start(key.front()) && key.back() != '.';
    for (std::size_t i = 0; ok && i < key.size(); ++i) {
        const char c = key[i];
        ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || (c == '.' && key[i + 1] != '.');
    }
    if (!ok) throw ParseError("invalid key '" + key + "'", line, col);
}

}  // namespace

std::string Value::to_text() const {
    if (is_number()) return format_number(number());
    if (is_bool()) return boolean() ? "true" : "false";
    if (is_string()) {
        if (is_bare_word(string())) return string();
        std::string out = "\"";
        for (char c : string()) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + "\"";
    }
    std::string out = "[";
    for (std::size_t i = 0; i < list().size(); ++i) {
        if (i) out += ", ";
        out += list()[i].to_text();
    }
    return out + "]";
}

Config Config::parse(const std::string& text) {
    Config cfg;
    Cursor cur(text, 1);
    while (true) {
        cur.skip_space(true);
        if (cur.done()) break;
        const int kline = cur.line(), kcol = cur.column();
        std::string key;
        while (!cur.done() && cur.peek() != '=' && cur.peek() != ' ' && cur.peek() != '\t' && cur.peek() != '\n' &&
               cur.peek() != '#')
            key += cur.get();
        check_key(key, kline, kcol);
        cur.skip_space(false);
        if (cur.peek() != '=') cur.fail("expected '=' after key '" + key + "'");
        cur.get();
        cur.skip_space(false);
        const int vline = cur.line(), vcol = cur.column();
        Value v = cur.value(false);
        cur.skip_space(false);
        if (cur.peek() == '#')
            while (!cur.done() && cur.peek() != '\n') cur.get();
        if (!cur.done() && cur.peek() != '\n') cur.fail("unexpected text after value");
        if (cfg.has(key))
            throw ParseError("duplicate key '" + key + "' (first set on line " + std::to_string(cfg.at(key).line) + ")",
                             kline, kcol);
        cfg.set(key, std::move(v), vline, vcol);
    }
    return cfg;
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ParseError("override '" + assignment + "' is not key=value", 0, 0);
    std::string key = assignment.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!key.empty() && key.front() == ' ') key.erase(key.begin());
    try {
        check_key(key, 1, 1);
        const std::string rest = assignment.substr(eq + 1);
        Cursor cur(rest, 1);
        Value v = cur.value(false);
        cur.skip_space(true);
        if (!cur.done()) cur.fail("unexpected text after value");
        set(key, std::move(v));
    } catch (const ParseError& e) {
        throw ParseError("override '" + assignment + "': " + e.what(), 0, 0);
    }
}

void Config::set(const std::string& key, Value v, int line, int column) {
    entries_[key] = Entry{std::move(v), line, column};
}

std::string Config::serialize() const {
    std::ostringstream out;
    for (const auto& [key, e] : entries_) out << key << " = " << e.value.to_text() << "\n";
    return out.str();
}

bool Config::same_values(const Config& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (const auto& [key, e] : entries_) {
        const auto it = other.entries_.find(key);
        if (it == other.entries_.end() || !(it->second.value == e.value)) return false;
    }
    return true;
}

}  // namespace aff
