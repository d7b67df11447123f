// Copyright 2026 The skelfill Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

// Little-endian primitives shared by the SKL1, SKEMB and SKKM readers and
// writers, plus text helpers for the CSV exports.
namespace skelfill::io {

void write_u32(std::ostream& out, std::uint32_t v);
void write_i32(std::ostream& out, std::int32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
void write_magic(std::ostream& out, std::string_view magic);
// u32 length prefix then the raw bytes.
void write_string(std::ostream& out, const std::string& s);

// Readers throw FormatError on a short read.
std::uint32_t read_u32(std::istream& in);
std::int32_t read_i32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);
void expect_magic(std::istream& in, std::string_view magic);
std::string read_string(std::istream& in);
// Throws FormatError unless the stream is exhausted.
void expect_eof(std::istream& in);

// Shortest decimal text that parses back to the same float / double.
std::string format_float(float v);
std::string format_double(double v);
float parse_float(std::string_view text);
double parse_double(std::string_view text);

// 64-bit FNV-1a, used for manifest digests.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace skelfill::io
