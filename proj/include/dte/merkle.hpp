// Merkle tree hashing with RFC 6962 domain separation and audit paths.
#pragma once

#include "dte/sha256.hpp"

#include <vector>

namespace dte::pki {

sym::Digest256 merkle_leaf_hash(ByteSpan leaf);
sym::Digest256 merkle_node_hash(const sym::Digest256& left, const sym::Digest256& right);

/// Throws UsageError for an empty leaf set.
sym::Digest256 merkle_root(const std::vector<Bytes>& leaves);

/// Sibling hashes from the leaf upwards. Throws UsageError if index is out of range.
std::vector<sym::Digest256> merkle_prove(const std::vector<Bytes>& leaves, size_t index);

bool merkle_verify(const sym::Digest256& root, ByteSpan leaf, size_t index, size_t tree_size,
                   const std::vector<sym::Digest256>& path);

}  // namespace dte::pki
