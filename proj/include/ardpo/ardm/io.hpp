/*
 * Copyright (c) 2026 The ardpo Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ardpo/ardm/model.hpp"

namespace ardpo::ardm {

// Hexadecimal float text ("0x1.8p+1"); parsing it back is bit-exact.
std::string hex_double(double value);
double parse_hex_double(std::string_view text);

nlohmann::json vector_to_hex(const Tensor& t);
nlohmann::json matrix_to_hex(const Tensor& t);
Tensor vector_from_hex(const nlohmann::json& j);
Tensor matrix_from_hex(const nlohmann::json& j);

// {prompt: [...], tokens: [[...]], seed, config_hash} with plain JSON numbers.
nlohmann::json sequence_record(const Sequence& seq, std::uint64_t seed, std::string_view config_hash);
Sequence sequence_from_record(const nlohmann::json& record);

void write_sequences_jsonl(const std::filesystem::path& path, std::span<const Sequence> seqs,
                           std::span<const std::uint64_t> seeds, std::string_view config_hash);

}  // namespace ardpo::ardm
