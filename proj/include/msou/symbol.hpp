#pragma once

#include <cstddef>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>

namespace msou {

namespace detail {

// Process-wide string pool. Node-based set, so element addresses are stable.
inline const std::string* intern_string(std::string_view text) {
    static std::mutex mutex;
    static std::unordered_set<std::string> pool;
    std::lock_guard<std::mutex> lock(mutex);
    return &*pool.emplace(text).first;
}

} // namespace detail

/// Interned identifier. Equality and hashing are by pool address; ordering
/// is by spelling so that sorted containers print deterministically.
template <class Tag>
class Symbol {
public:
    Symbol() : text_(detail::intern_string("?")) {}

    explicit Symbol(std::string_view name) {
        if (name.empty()) throw std::invalid_argument("identifier must be nonempty");
        text_ = detail::intern_string(name);
    }

    const std::string& name() const { return *text_; }

    friend bool operator==(Symbol a, Symbol b) { return a.text_ == b.text_; }
    friend bool operator!=(Symbol a, Symbol b) { return a.text_ != b.text_; }
    friend bool operator<(Symbol a, Symbol b) {
        return a.text_ != b.text_ && *a.text_ < *b.text_;
    }

    std::size_t hash() const { return std::hash<const void*>{}(text_); }

private:
    const std::string* text_;
};

struct VarTag {};
struct LabelTag {};

/// Set variable (uppercase-initial by convention).
using Var = Symbol<VarTag>;
/// Alphabet letter (lowercase-initial by convention).
using Label = Symbol<LabelTag>;

} // namespace msou

template <class Tag>
struct std::hash<msou::Symbol<Tag>> {
    std::size_t operator()(msou::Symbol<Tag> s) const noexcept { return s.hash(); }
};
