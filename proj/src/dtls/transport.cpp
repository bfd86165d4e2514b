#include "dte/dtls/transport.hpp"

#include "dte/errors.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace dte::dtls {

class LoopbackLink::End : public Transport {
 public:
   End(LoopbackLink& link, Role role) : m_link(link), m_role(role) {}

   void send(ByteSpan datagram) override { m_link.deliver(m_role, datagram); }

   std::optional<Bytes> receive() override {
      auto& q = m_role == Role::Client ? m_link.m_to_client : m_link.m_to_server;
      if(q.empty()) {
         return std::nullopt;
      }
      Bytes d = std::move(q.front());
      q.pop_front();
      return d;
   }

   std::string peer_address() const override {
      return m_role == Role::Server ? m_link.m_client_address : "loopback-server";
   }

 private:
   LoopbackLink& m_link;
   Role m_role;
};

LoopbackLink::LoopbackLink(std::string client_address) :
      m_client_address(std::move(client_address)),
      m_client(std::make_unique<End>(*this, Role::Client)),
      m_server(std::make_unique<End>(*this, Role::Server)) {}

LoopbackLink::~LoopbackLink() = default;

Transport& LoopbackLink::client_end() {
   return *m_client;
}

Transport& LoopbackLink::server_end() {
   return *m_server;
}

void LoopbackLink::deliver(Role sender, ByteSpan datagram) {
   Bytes d(datagram.begin(), datagram.end());
   if(m_tap) {
      m_tap(sender, m_sent, d);
   }
   ++m_sent;
   if(d.empty()) {
      return;
   }
   (sender == Role::Client ? m_to_server : m_to_client).push_back(std::move(d));
}

namespace {

sockaddr_in make_addr(const std::string& host, uint16_t port) {
   sockaddr_in a{};
   a.sin_family = AF_INET;
   a.sin_port = htons(port);
   if(inet_pton(AF_INET, host.c_str(), &a.sin_addr) != 1) {
      throw IoError("not an IPv4 address: " + host);
   }
   return a;
}

std::string errno_text(const char* what) {
   return std::string(what) + ": " + std::strerror(errno);
}

}  // namespace

UdpTransport::UdpTransport(const std::string& host, uint16_t port, int timeout_ms) : m_timeout_ms(timeout_ms) {
   m_fd = ::socket(AF_INET, SOCK_DGRAM, 0);
   if(m_fd < 0) {
      throw IoError(errno_text("socket"));
   }
   const sockaddr_in a = make_addr(host, port);
   if(::bind(m_fd, reinterpret_cast<const sockaddr*>(&a), sizeof(a)) != 0) {
      const auto msg = errno_text("bind");
      ::close(m_fd);
      throw IoError(msg);
   }
}

UdpTransport::~UdpTransport() {
   if(m_fd >= 0) {
      ::close(m_fd);
   }
}

void UdpTransport::connect(const std::string& host, uint16_t port) {
   const sockaddr_in a = make_addr(host, port);
   std::memcpy(m_peer.data(), &a, sizeof(a));
   m_have_peer = true;
}

uint16_t UdpTransport::local_port() const {
   sockaddr_in a{};
   socklen_t len = sizeof(a);
   if(::getsockname(m_fd, reinterpret_cast<sockaddr*>(&a), &len) != 0) {
      throw IoError(errno_text("getsockname"));
   }
   return ntohs(a.sin_port);
}

void UdpTransport::send(ByteSpan datagram) {
   if(!m_have_peer) {
      throw UsageError("UDP peer unknown");
   }
   sockaddr_in a;
   std::memcpy(&a, m_peer.data(), sizeof(a));
   const auto n = ::sendto(m_fd, datagram.data(), datagram.size(), 0, reinterpret_cast<const sockaddr*>(&a), sizeof(a));
   if(n != static_cast<ssize_t>(datagram.size())) {
      throw IoError(errno_text("sendto"));
   }
}

std::optional<Bytes> UdpTransport::receive() {
   pollfd p{m_fd, POLLIN, 0};
   const int r = ::poll(&p, 1, m_timeout_ms);
   if(r < 0) {
      throw IoError(errno_text("poll"));
   }
   if(r == 0) {
      return std::nullopt;
   }
   Bytes buf(65536);
   sockaddr_in from{};
   socklen_t len = sizeof(from);
   const auto n = ::recvfrom(m_fd, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
   if(n < 0) {
      throw IoError(errno_text("recvfrom"));
   }
   buf.resize(static_cast<size_t>(n));
   if(!m_have_peer) {
      std::memcpy(m_peer.data(), &from, sizeof(from));
      m_have_peer = true;
   }
   return buf;
}

std::string UdpTransport::peer_address() const {
   if(!m_have_peer) {
      return {};
   }
   sockaddr_in a;
   std::memcpy(&a, m_peer.data(), sizeof(a));
   char host[INET_ADDRSTRLEN] = {};
   ::inet_ntop(AF_INET, &a.sin_addr, host, sizeof(host));
   return std::string(host) + ":" + std::to_string(ntohs(a.sin_port));
}

namespace {

bool finished(const Session& s) {
   return s.established() || s.failed();
}

std::vector<Bytes> drain(Transport& t) {
   std::vector<Bytes> in;
   while(auto d = t.receive()) {
      in.push_back(std::move(*d));
   }
   return in;
}

}  // namespace

HandshakeOutcome run_loopback(Session& client, Session& server, LoopbackLink& link, size_t max_flights) {
   if(client.role() != Role::Client || server.role() != Role::Server) {
      throw UsageError("run_loopback needs a client and a server session");
   }
   server.set_peer_address(link.client_address());
   HandshakeOutcome out;
   for(const auto& d : client.step({})) {
      link.client_end().send(d);
   }
   out.flights = 1;
   bool progress = true;
   while(progress && out.flights < max_flights) {
      progress = false;
      for(Session* s : {&server, &client}) {
         Transport& end = s == &server ? link.server_end() : link.client_end();
         auto in = drain(end);
         if(in.empty() || finished(*s)) {
            continue;
         }
         progress = true;
         for(const auto& d : s->step(in)) {
            end.send(d);
            ++out.flights;
         }
      }
   }
   out.client_state = client.state();
   out.server_state = server.state();
   return out;
}

void run_endpoint(Session& session, Transport& transport) {
   if(session.role() == Role::Client) {
      for(const auto& d : session.step({})) {
         transport.send(d);
      }
   }
   while(!finished(session)) {
      auto d = transport.receive();
      if(!d) {
         throw IoError("peer silent; handshake stalled in " + std::string(state_name(session.state())));
      }
      if(session.role() == Role::Server) {
         session.set_peer_address(transport.peer_address());
      }
      const Bytes datagram = std::move(*d);
      for(const auto& out : session.step(std::span<const Bytes>(&datagram, 1))) {
         transport.send(out);
      }
   }
}

}  // namespace dte::dtls
