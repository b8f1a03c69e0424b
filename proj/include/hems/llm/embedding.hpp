// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace hems::llm {

using EmbeddingVector = std::vector<double>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed(std::string_view text) = 0;
};

/// Offline stand-in for a sentence encoder: lower-cased alphanumeric tokens
/// hashed (FNV-1a) into a fixed number of buckets, counted, L2-normalised.
class ToyEmbedding : public EmbeddingProvider {
public:
    explicit ToyEmbedding(std::size_t dimension = 256);

    EmbeddingVector embed(std::string_view text) override;
    std::size_t dimension() const { return dimension_; }

private:
    std::size_t dimension_;
};

/// Lower-cased runs of ASCII letters and digits.
std::vector<std::string_view> toy_tokens(std::string_view text, std::vector<char>& storage);

} // namespace hems::llm
