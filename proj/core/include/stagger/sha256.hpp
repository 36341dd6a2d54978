// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_SHA256_HPP
#define STAGGER_SHA256_HPP

#include <string>

namespace stagger {

// Hex digest of the SHA-256 hash of a byte string / a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

}  // namespace stagger

#endif  // STAGGER_SHA256_HPP
