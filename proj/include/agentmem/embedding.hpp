#pragma once

#include "errors.hpp"
#include "hash.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentmem {

/// Unit-norm float vector of a provider-fixed dimension.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    /// Normalizes `values`. A zero or non-finite input is rejected.
    static EmbeddingVector normalized(std::vector<float> values)
    {
        double sq = 0.0;
        for (float v : values) {
            if (!std::isfinite(v)) throw EmbeddingError(EmbeddingError::Kind::malformed, "non-finite embedding entry");
            sq += double(v) * double(v);
        }
        if (values.empty() || sq == 0.0)
            throw EmbeddingError(EmbeddingError::Kind::malformed, "cannot normalize a zero vector");
        const double inv = 1.0 / std::sqrt(sq);
        for (float& v : values) v = static_cast<float>(double(v) * inv);
        EmbeddingVector out;
        out.values_ = std::move(values);
        return out;
    }

    std::size_t dimension() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    std::span<const float> values() const noexcept { return values_; }
    float operator[](std::size_t i) const { return values_[i]; }

    double norm() const noexcept
    {
        double sq = 0.0;
        for (float v : values_) sq += double(v) * double(v);
        return std::sqrt(sq);
    }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<float> values_;
};

/// 1 - dot(a, b), clamped into [0, 2] against float rounding.
inline double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b)
{
    if (a.dimension() != b.dimension())
        throw EmbeddingError(EmbeddingError::Kind::dimension, "dimension mismatch: " + std::to_string(a.dimension()) +
                                                                  " vs " + std::to_string(b.dimension()));
    double dot = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) dot += double(av[i]) * double(bv[i]);
    double d = 1.0 - dot;
    return d < 0.0 ? 0.0 : (d > 2.0 ? 2.0 : d);
}

/// Any text -> vector function. Implementations must return unit-norm vectors.
using Embedder = std::function<EmbeddingVector(std::string_view)>;

/// Lowercased maximal runs of ASCII alphanumerics.
inline std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

/**
 * Deterministic feature-hashing embedder.
 *
 * Each token hashes (keyed_hash with `kSeed`) to one of D buckets; the top hash bit picks
 * the sign. Bucket sums are L2-normalized. Text with no tokens maps to e0.
 * Output depends only on the token multiset, so it is stable across processes and runs.
 */
class LocalEmbedder {
public:
    static constexpr std::size_t kDefaultDimension = 256;
    static constexpr std::uint64_t kSeed = 0x6b61726d61ULL;

    explicit LocalEmbedder(std::size_t dimension = kDefaultDimension) : dimension_(dimension)
    {
        if (dimension_ == 0) throw ConfigError("embedding dimension must be >= 1");
    }

    std::size_t dimension() const noexcept { return dimension_; }

    EmbeddingVector operator()(std::string_view text) const
    {
        std::vector<float> acc(dimension_, 0.0f);
        auto tokens = tokenize(text);
        if (tokens.empty()) {
            acc[0] = 1.0f;
            return EmbeddingVector::normalized(std::move(acc));
        }
        for (const auto& t : tokens) {
            std::uint64_t h = detail::keyed_hash(t, kSeed);
            acc[h % dimension_] += (h >> 63) ? -1.0f : 1.0f;
        }
        bool all_zero = true;
        for (float v : acc) all_zero = all_zero && v == 0.0f;
        // Signed collisions can cancel exactly; fall back to e0 like the empty case.
        if (all_zero) acc[0] = 1.0f;
        return EmbeddingVector::normalized(std::move(acc));
    }

private:
    std::size_t dimension_;
};

inline EmbeddingVector embed_local(std::string_view text) { return LocalEmbedder{}(text); }

} // namespace agentmem
