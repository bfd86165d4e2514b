// Bounded LIFO scratch arena for handshake temporaries.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace dte::dtls {

class MicroStack {
 public:
   static constexpr size_t kCapacity = 2048;

   MicroStack() = default;
   ~MicroStack();
   MicroStack(const MicroStack&) = delete;
   MicroStack& operator=(const MicroStack&) = delete;

   /// InternalError when the arena would overflow.
   std::span<uint8_t> push(size_t n);
   /// The frame must be the most recent live one (UsageError otherwise); it is zeroized.
   void pop(std::span<uint8_t> frame);

   size_t used() const { return m_top; }
   size_t peak() const { return m_peak; }
   size_t depth() const { return m_depth; }

   /// Scoped allocation, popped on destruction.
   class Frame {
    public:
      Frame(MicroStack& s, size_t n) : m_stack(&s), m_data(s.push(n)) {}
      ~Frame();
      Frame(Frame&& other) noexcept : m_stack(other.m_stack), m_data(other.m_data) { other.m_stack = nullptr; }
      Frame(const Frame&) = delete;
      Frame& operator=(const Frame&) = delete;
      Frame& operator=(Frame&&) = delete;

      std::span<uint8_t> bytes() const { return m_data; }
      uint8_t* data() const { return m_data.data(); }
      size_t size() const { return m_data.size(); }

    private:
      MicroStack* m_stack;
      std::span<uint8_t> m_data;
   };

 private:
   std::array<uint8_t, kCapacity> m_arena{};
   size_t m_top = 0;
   size_t m_peak = 0;
   size_t m_depth = 0;
   // start offset of every live frame, so pops can be checked for LIFO order
   std::array<uint16_t, 64> m_starts{};
};

}  // namespace dte::dtls
