#include "dte/dtls/micro_stack.hpp"

#include "dte/bytes.hpp"
#include "dte/errors.hpp"

#include <cstdlib>

namespace dte::dtls {

MicroStack::~MicroStack() {
   secure_zero(m_arena);
}

std::span<uint8_t> MicroStack::push(size_t n) {
   if(n > kCapacity - m_top || m_depth == m_starts.size()) {
      throw InternalError("micro stack overflow");
   }
   m_starts[m_depth++] = static_cast<uint16_t>(m_top);
   auto frame = std::span<uint8_t>(m_arena).subspan(m_top, n);
   m_top += n;
   m_peak = std::max(m_peak, m_top);
   return frame;
}

void MicroStack::pop(std::span<uint8_t> frame) {
   if(m_depth == 0 || frame.data() != m_arena.data() + m_starts[m_depth - 1] ||
      m_starts[m_depth - 1] + frame.size() != m_top) {
      throw UsageError("micro stack pop out of order");
   }
   secure_zero(frame);
   m_top = m_starts[--m_depth];
}

MicroStack::Frame::~Frame() {
   if(m_stack != nullptr) {
      try {
         m_stack->pop(m_data);
      } catch(...) {
         std::abort();  // frames are scoped, so this is a programming error
      }
   }
}

}  // namespace dte::dtls
