#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsnn/error.hpp"

namespace nsnn::cli {

using nlohmann::json;

/// Read-only view of one JSON config object that reports every problem as a
/// ParseError carrying the dotted field path.
class ConfigNode
{
public:
    ConfigNode(const json& value, std::string path) : value_(&value), path_(std::move(path))
    {
        if (!value_->is_object())
            throw ParseError(path_.empty() ? "config" : path_, "expected an object");
    }

    const std::string& path() const noexcept { return path_; }
    const json& raw() const noexcept { return *value_; }
    bool has(std::string_view key) const { return value_->contains(key); }

    /// Rejects keys outside `allowed`.
    void allow(std::initializer_list<std::string_view> allowed) const
    {
        for (auto it = value_->begin(); it != value_->end(); ++it)
        {
            bool ok = false;
            for (auto a : allowed)
                ok = ok || it.key() == a;
            if (!ok)
                throw ParseError(child_path(it.key()), "unknown field");
        }
    }

    ConfigNode object(std::string_view key) const
    {
        if (!has(key))
            throw ParseError(child_path(key), "missing field");
        return ConfigNode(value_->at(std::string(key)), child_path(key));
    }

    std::optional<ConfigNode> find_object(std::string_view key) const
    {
        if (!has(key))
            return std::nullopt;
        return object(key);
    }

    template <class T>
    T get(std::string_view key) const
    {
        if (!has(key))
            throw ParseError(child_path(key), "missing field");
        return convert<T>(value_->at(std::string(key)), child_path(key));
    }

    template <class T>
    T get(std::string_view key, T fallback) const
    {
        return has(key) ? get<T>(key) : fallback;
    }

    std::string child_path(std::string_view key) const
    {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    template <class T>
    static T convert(const json& v, const std::string& path)
    {
        if constexpr (std::is_same_v<T, bool>)
        {
            if (!v.is_boolean())
                throw ParseError(path, "expected true or false");
            return v.get<bool>();
        }
        else if constexpr (std::is_same_v<T, std::string>)
        {
            if (!v.is_string())
                throw ParseError(path, "expected a string");
            return v.get<std::string>();
        }
        else if constexpr (std::is_floating_point_v<T>)
        {
            if (!v.is_number())
                throw ParseError(path, "expected a number");
            return v.get<T>();
        }
        else if constexpr (std::is_integral_v<T>)
        {
            if (!v.is_number_integer())
                throw ParseError(path, "expected an integer");
            if constexpr (std::is_unsigned_v<T>)
            {
                if (v.is_number_unsigned())
                {
                    const auto u = v.get<std::uint64_t>();
                    if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
                        throw ParseError(path, "value out of range");
                    return static_cast<T>(u);
                }
                if (v.get<std::int64_t>() < 0)
                    throw ParseError(path, "expected a non-negative integer");
                return static_cast<T>(v.get<std::int64_t>());
            }
            else
            {
                const auto i = v.get<std::int64_t>();
                if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max())
                    throw ParseError(path, "value out of range");
                return static_cast<T>(i);
            }
        }
        else
        {
            using E = typename T::value_type;
            if (!v.is_array())
                throw ParseError(path, "expected an array");
            T out;
            for (std::size_t i = 0; i < v.size(); ++i)
                out.push_back(convert<E>(v[i], path + "[" + std::to_string(i) + "]"));
            return out;
        }
    }

private:
    const json* value_;
    std::string path_;
};

/// Parses a config document (comments allowed); malformed JSON is reported
/// with its line and column.
json parse_config_text(std::string_view text, const std::string& source);

/// SHA-256 of `doc`'s compact serialization, first 16 hex digits.
std::string config_hash(const json& doc);

} // namespace nsnn::cli
