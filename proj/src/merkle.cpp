#include "dte/merkle.hpp"

#include "dte/counters.hpp"
#include "dte/errors.hpp"

#include <bit>

namespace dte::pki {

namespace {

// Largest power of two strictly below n (n >= 2).
size_t split_point(size_t n) {
   return std::bit_floor(n - 1);
}

sym::Digest256 subtree_root(const std::vector<Bytes>& leaves, size_t lo, size_t hi) {
   if(hi - lo == 1) {
      return merkle_leaf_hash(leaves[lo]);
   }
   const size_t k = split_point(hi - lo);
   return merkle_node_hash(subtree_root(leaves, lo, lo + k), subtree_root(leaves, lo + k, hi));
}

void path_into(const std::vector<Bytes>& leaves, size_t m, size_t lo, size_t hi, std::vector<sym::Digest256>& out) {
   if(hi - lo == 1) {
      return;
   }
   const size_t k = split_point(hi - lo);
   if(m < k) {
      path_into(leaves, m, lo, lo + k, out);
      out.push_back(subtree_root(leaves, lo + k, hi));
   } else {
      path_into(leaves, m - k, lo + k, hi, out);
      out.push_back(subtree_root(leaves, lo, lo + k));
   }
}

}  // namespace

sym::Digest256 merkle_leaf_hash(ByteSpan leaf) {
   metrics::count(metrics::Op::MerkleHash);
   sym::Sha256 h;
   const uint8_t prefix = 0x00;
   h.update(ByteSpan(&prefix, 1));
   h.update(leaf);
   return h.final();
}

sym::Digest256 merkle_node_hash(const sym::Digest256& left, const sym::Digest256& right) {
   metrics::count(metrics::Op::MerkleHash);
   sym::Sha256 h;
   const uint8_t prefix = 0x01;
   h.update(ByteSpan(&prefix, 1));
   h.update(left);
   h.update(right);
   return h.final();
}

sym::Digest256 merkle_root(const std::vector<Bytes>& leaves) {
   if(leaves.empty()) {
      throw UsageError("Merkle tree needs at least one leaf");
   }
   return subtree_root(leaves, 0, leaves.size());
}

std::vector<sym::Digest256> merkle_prove(const std::vector<Bytes>& leaves, size_t index) {
   if(index >= leaves.size()) {
      throw UsageError("leaf index out of range");
   }
   std::vector<sym::Digest256> path;
   path_into(leaves, index, 0, leaves.size(), path);
   return path;
}

bool merkle_verify(const sym::Digest256& root, ByteSpan leaf, size_t index, size_t tree_size,
                   const std::vector<sym::Digest256>& path) {
   if(index >= tree_size) {
      return false;
   }
   size_t fn = index;
   size_t sn = tree_size - 1;
   sym::Digest256 r = merkle_leaf_hash(leaf);
   for(const auto& p : path) {
      if(sn == 0) {
         return false;
      }
      if((fn & 1) || fn == sn) {
         r = merkle_node_hash(p, r);
         if(!(fn & 1)) {
            while(!(fn & 1) && fn != 0) {
               fn >>= 1;
               sn >>= 1;
            }
         }
      } else {
         r = merkle_node_hash(r, p);
      }
      fn >>= 1;
      sn >>= 1;
   }
   return sn == 0 && r == root;
}

}  // namespace dte::pki
