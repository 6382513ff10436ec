#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <nlohmann/json.hpp>

#include "clonewatch/errors.hpp"
#include "clonewatch/protocol.hpp"

namespace clonewatch::protocol {

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 6> kKindNames{{
    {MessageKind::KeyRequest, "key_request"},
    {MessageKind::KeyResponse, "key_response"},
    {MessageKind::PairNotify, "pair_notify"},
    {MessageKind::Challenge, "challenge"},
    {MessageKind::ChallengeResponse, "challenge_response"},
    {MessageKind::AuthResult, "auth_result"},
}};

constexpr std::size_t kMaxFrame = 16u << 20;

}  // namespace

std::string_view to_string(MessageKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  throw ValidationError("unknown message kind");
}

MessageKind parse_message_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  throw DecodeError("unknown message kind '" + std::string(s) + "'");
}

std::string Message::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)}, {"from", from}, {"to", to}, {"payload", base64_encode(payload)}};
  if (pair_id) j["pair_id"] = *pair_id;
  return j.dump();
}

Message Message::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    Message m;
    m.kind = parse_message_kind(j.at("kind").get<std::string>());
    m.from = j.at("from").get<std::string>();
    m.to = j.at("to").get<std::string>();
    if (j.contains("pair_id")) m.pair_id = j.at("pair_id").get<std::string>();
    m.payload = base64_decode(j.at("payload").get<std::string>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed message: ") + e.what());
  }
}

Bytes encode_frame(const Message& m) {
  Bytes out;
  append_lp(out, to_bytes(m.to_json()));
  return out;
}

Message decode_frame(ByteView frame) {
  ByteReader reader(frame);
  const Bytes body = reader.lp();
  reader.expect_done();
  return Message::from_json(to_string(body));
}

// ------------------------------------------------------------------ in-memory

void InMemoryTransport::send(const Message& m) {
  Bytes frame = encode_frame(m);
  transcript_.push_back(frame);
  queue_.push_back(std::move(frame));
}

std::optional<Message> InMemoryTransport::next() {
  if (queue_.empty()) return std::nullopt;
  const std::size_t at = shuffle_ ? uniform_index(rng_, queue_.size()) : 0;
  Bytes frame = std::move(queue_[at]);
  queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(at));
  return decode_frame(frame);
}

// ------------------------------------------------------------------------ tcp

namespace {

[[noreturn]] void fail(const std::string& what) { throw TransportError(what + ": " + std::strerror(errno)); }

void write_all(int fd, ByteView data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    done += static_cast<std::size_t>(n);
  }
}

void read_all(int fd, std::uint8_t* out, std::size_t size) {
  std::size_t done = 0;
  while (done < size) {
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, 5000);
    if (ready == 0) throw TransportError("receive timed out");
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail("poll");
    }
    const ssize_t n = ::recv(fd, out + done, size - done, 0);
    if (n == 0) throw TransportError("connection closed");
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("recv");
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

TcpTransport::TcpTransport() {
  listener_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener_ < 0) fail("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  if (::bind(listener_, reinterpret_cast<sockaddr*>(&addr), len) < 0) fail("bind");
  if (::listen(listener_, 1) < 0) fail("listen");
  if (::getsockname(listener_, reinterpret_cast<sockaddr*>(&addr), &len) < 0) fail("getsockname");
  port_ = ntohs(addr.sin_port);

  client_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (client_ < 0) fail("socket");
  if (::connect(client_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) fail("connect");
  server_ = ::accept(listener_, nullptr, nullptr);
  if (server_ < 0) fail("accept");
  const int one = 1;
  ::setsockopt(client_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpTransport::~TcpTransport() {
  for (int fd : {client_, server_, listener_})
    if (fd >= 0) ::close(fd);
}

void TcpTransport::send(const Message& m) {
  Bytes frame = encode_frame(m);
  write_all(client_, frame);
  transcript_.push_back(std::move(frame));
  ++in_flight_;
}

std::optional<Message> TcpTransport::next() {
  if (in_flight_ == 0) return std::nullopt;
  std::array<std::uint8_t, 4> header{};
  read_all(server_, header.data(), header.size());
  const std::uint32_t size = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                             (std::uint32_t{header[2]} << 8) | header[3];
  if (size > kMaxFrame) throw DecodeError("frame too large");
  Bytes body(size);
  read_all(server_, body.data(), size);
  --in_flight_;
  return Message::from_json(to_string(body));
}

// ---------------------------------------------------------------------- lossy

void LossyTransport::send(const Message& m) {
  if (drop_ && drop_(m)) {
    ++dropped_;
    return;
  }
  inner_.send(m);
}

}  // namespace clonewatch::protocol
