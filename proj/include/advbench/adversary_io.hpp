#ifndef ADVBENCH_ADVERSARY_IO_HPP
#define ADVBENCH_ADVERSARY_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "advbench/attacks.hpp"

namespace advbench {

// FNV-1a over a file's bytes; used to tie adversary sets to their source
// model and to detect stale pipeline artifacts.
std::uint64_t hash_file(const std::string& path);
std::uint64_t hash_bytes(const void* data, std::size_t len);

// An adversary set persists as a directory:
//   manifest.json  — kind, config echo, source model hash, counts,
//                    mean distortion, per-example labels/predictions
//   tensors.bin    — header (u64 count, u32 ndim, u64 dims...) followed by
//                    original+perturbed 64-bit little-endian floats per
//                    example, row-major
void save_adversary_set(const std::vector<AdversarialExample>& set, AttackKind kind,
                        const std::string& dir, std::uint64_t source_model_hash);

std::vector<AdversarialExample> load_adversary_set(const std::string& dir);

}  // namespace advbench

#endif
