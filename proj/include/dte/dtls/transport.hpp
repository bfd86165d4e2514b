// Datagram transports (in-memory loopback and UDP) and handshake drivers.
#pragma once

#include "dte/dtls/session.hpp"

#include <deque>
#include <functional>
#include <memory>

namespace dte::dtls {

class Transport {
 public:
   virtual ~Transport() = default;
   virtual void send(ByteSpan datagram) = 0;
   /// Next datagram, or nullopt when none arrives (immediately for loopback,
   /// after the timeout for UDP).
   virtual std::optional<Bytes> receive() = 0;
   /// Address of the remote endpoint, empty until known.
   virtual std::string peer_address() const = 0;
};

/**
 * Two in-memory FIFO queues. A tap sees every datagram before delivery and may
 * rewrite or discard it (an empty datagram is discarded), which is how the
 * tamper tests act as a man in the middle.
 */
class LoopbackLink {
 public:
   /// index counts datagrams in transmission order across both directions.
   using Tap = std::function<void(Role sender, size_t index, Bytes& datagram)>;

   explicit LoopbackLink(std::string client_address = "127.0.0.1:4433");
   ~LoopbackLink();

   Transport& client_end();
   Transport& server_end();
   const std::string& client_address() const { return m_client_address; }

   void set_tap(Tap tap) { m_tap = std::move(tap); }
   size_t datagrams_sent() const { return m_sent; }

 private:
   class End;
   friend class End;
   void deliver(Role sender, ByteSpan datagram);

   std::string m_client_address;
   std::deque<Bytes> m_to_client, m_to_server;
   std::unique_ptr<End> m_client, m_server;
   Tap m_tap;
   size_t m_sent = 0;
};

/// IPv4 UDP socket. The client names its peer up front; a server learns it
/// from the first datagram and answers that address.
class UdpTransport : public Transport {
 public:
   /// Binds host:port (port 0 picks an ephemeral port). IoError on failure.
   UdpTransport(const std::string& host, uint16_t port, int timeout_ms = 5000);
   ~UdpTransport() override;
   UdpTransport(const UdpTransport&) = delete;
   UdpTransport& operator=(const UdpTransport&) = delete;

   void connect(const std::string& host, uint16_t port);
   uint16_t local_port() const;

   void send(ByteSpan datagram) override;
   std::optional<Bytes> receive() override;
   std::string peer_address() const override;

 private:
   int m_fd = -1;
   int m_timeout_ms;
   bool m_have_peer = false;
   std::array<uint8_t, 16> m_peer{};  // sockaddr_in storage
};

struct HandshakeOutcome {
   State client_state = State::Init;
   State server_state = State::Init;
   size_t flights = 0;

   bool both_established() const {
      return client_state == State::Established && server_state == State::Established;
   }
};

/// Steps client and server alternately over the link until both finish or
/// no datagram is in flight (a stalled handshake counts as not established).
HandshakeOutcome run_loopback(Session& client, Session& server, LoopbackLink& link, size_t max_flights = 32);

/// Runs one endpoint over a transport until it is Established or Failed.
/// IoError when the peer goes silent.
void run_endpoint(Session& session, Transport& transport);

}  // namespace dte::dtls
