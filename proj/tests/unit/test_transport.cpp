#include <doctest.h>

#include "ppls/transport.hpp"

using namespace ppls;

namespace {

SessionFactory echo_factory() {
  return []() -> SessionHandler {
    return [](const wire::Message& msg) -> wire::Message { return msg; };
  };
}

SessionFactory throwing_factory() {
  return []() -> SessionHandler {
    return [](const wire::Message&) -> wire::Message {
      fail(Err::UnknownVehicle, "nobody home");
    };
  };
}

void exercise(Network& net) {
  net.serve("echo", echo_factory());
  net.serve("grumpy", throwing_factory());

  auto ch = net.connect("tester", "echo");
  wire::Message msg = wire::RangePreQuery{PseudoIdentity{}, 77};
  ch->send(msg);
  CHECK(ch->recv() == msg);
  CHECK(ch->request(wire::Message(wire::Ack{})) == wire::Message(wire::Ack{}));

  auto grumpy = net.connect("tester", "grumpy");
  auto reply = grumpy->request(wire::Message(wire::Ack{}));
  auto* err = std::get_if<wire::ErrorMsg>(&reply);
  REQUIRE(err != nullptr);
  CHECK(err->code == wire_error_code(Err::UnknownVehicle));

  grumpy->close();
  ch->close();
}

}  // namespace

TEST_CASE("in-process transport") {
  auto net = make_inproc_network();
  exercise(*net);
  net->shutdown();
}

TEST_CASE("tcp transport") {
  auto net = make_tcp_network();
  exercise(*net);
  net->shutdown();
}

TEST_CASE("recv times out and closed peers surface") {
  auto net = make_inproc_network();
  net->serve("echo", echo_factory());
  auto ch = net->connect("tester", "echo");
  ch->set_recv_timeout_ms(20);
  CHECK_THROWS_WITH_AS(ch->recv(), doctest::Contains("timed out"), Error);

  ch->close();
  CHECK_THROWS_AS(ch->recv(), Error);  // peer closed
  net->shutdown();
}

TEST_CASE("transport log records both directions with roles") {
  TransportLog log;
  auto net = make_inproc_network();
  net->set_log(&log);
  net->serve("echo", echo_factory());
  auto ch = net->connect("tester", "echo");
  ch->request(wire::Message(wire::Ack{}));
  ch->close();
  net->shutdown();

  auto entries = log.snapshot();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].sender == "tester");
  CHECK(entries[0].receiver == "echo");
  CHECK(entries[1].sender == "echo");
  CHECK(entries[1].receiver == "tester");
  CHECK(entries[0].seq < entries[1].seq);
  CHECK(wire::decode(entries[0].frame) == entries[0].message);
}

TEST_CASE("connecting to a missing role fails") {
  auto net = make_inproc_network();
  CHECK_THROWS_AS(net->connect("tester", "nowhere"), Error);
  net->shutdown();
}
