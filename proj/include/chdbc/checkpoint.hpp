#pragma once

#include <filesystem>

#include "chdbc/assembly.hpp"

namespace chdbc {

// Restart file: uint64 count followed by count doubles, all little-endian.
void write_checkpoint(const std::filesystem::path& path, const Vector& values);
Vector read_checkpoint(const std::filesystem::path& path);

}  // namespace chdbc
