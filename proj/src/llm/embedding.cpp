// SPDX-License-Identifier: Apache-2.0
#include "hems/llm/embedding.hpp"

#include "hems/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

namespace hems::llm {

std::vector<std::string_view> toy_tokens(std::string_view text, std::vector<char>& storage)
{
    storage.assign(text.begin(), text.end());
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < storage.size()) {
        if (!std::isalnum(static_cast<unsigned char>(storage[i]))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < storage.size() && std::isalnum(static_cast<unsigned char>(storage[i]))) {
            storage[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(storage[i])));
            ++i;
        }
        tokens.emplace_back(storage.data() + start, i - start);
    }
    return tokens;
}

ToyEmbedding::ToyEmbedding(std::size_t dimension) : dimension_(dimension)
{
    if (dimension == 0)
        throw InvalidArgument("embedding dimension must be positive");
}

EmbeddingVector ToyEmbedding::embed(std::string_view text)
{
    EmbeddingVector v(dimension_, 0.0);
    std::vector<char> storage;
    for (auto token : toy_tokens(text, storage)) {
        std::uint64_t hash = 14695981039346656037ULL;
        for (unsigned char c : token) {
            hash ^= c;
            hash *= 1099511628211ULL;
        }
        v[hash % dimension_] += 1.0;
    }
    double norm = 0.0;
    for (double x : v)
        norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& x : v)
            x /= norm;
    return v;
}

} // namespace hems::llm
