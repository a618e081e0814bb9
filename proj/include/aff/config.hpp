#pragma once

// Flat `key = value` scenario text. One entry per line, `#` starts a comment
// outside quotes, keys are dotted identifiers. Values are numbers (including
// inf and -inf), booleans, bare words, double-quoted strings, or bracketed
// lists of values, which may nest and may span lines.

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace aff {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_, column_;
};

struct Value {
    using List = std::vector<Value>;
    std::variant<double, bool, std::string, List> data;

    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_list() const { return std::holds_alternative<List>(data); }

    double number() const { return std::get<double>(data); }
    bool boolean() const { return std::get<bool>(data); }
    const std::string& string() const { return std::get<std::string>(data); }
    const List& list() const { return std::get<List>(data); }

    /// Canonical text; parsing it back yields an equal value.
    std::string to_text() const;

    friend bool operator==(const Value&, const Value&) = default;
};

Value number_value(double x);
Value string_value(std::string s);
Value list_value(Value::List items);

struct Entry {
    Value value;
    int line = 0, column = 0;  ///< where the value starts; 0 for overrides and defaults
};

/// Entries keyed by dotted name, in key order.
class Config {
public:
    static Config parse(const std::string& text);

    /// `key=value` with the same value grammar as the file format.
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const Entry& at(const std::string& key) const { return entries_.at(key); }
    void set(const std::string& key, Value v, int line = 0, int column = 0);
    const std::map<std::string, Entry>& entries() const { return entries_; }

    /// One canonical line per key; parse(serialize()) == *this.
    std::string serialize() const;

    /// Equality of keys and values; positions are ignored.
    bool same_values(const Config& other) const;

private:
    std::map<std::string, Entry> entries_;
};

}  // namespace aff
