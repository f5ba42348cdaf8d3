#include <doctest.h>

#include <sstream>

#include "dsmm/dot_protocols.hpp"
#include "dsmm/error.hpp"
#include "dsmm/net_sim.hpp"

using namespace dsmm;

namespace {

Network small_net(int n, std::uint64_t seed = 1) {
  Rng rng(seed);
  return create_network(n, make_shared_directory(n, 1 << 12, 128, rng), seed);
}

}  // namespace

TEST_CASE("create_network checks sizes") {
  Rng rng(1);
  CHECK(small_net(3).size() == 3);
  CHECK_THROWS_AS(create_network(3, make_shared_directory(1, 256, 128, rng), 1),
                  ConfigurationError);
  CHECK_THROWS_AS(create_network(2, make_shared_directory(2, 256, 128, rng), 1),
                  ConfigurationError);
}

TEST_CASE("delivery order and routing") {
  Network net = small_net(4);
  net.post(PlayerId{3}, PlayerId{1}, "s/x1", "{}", false);
  net.post(PlayerId{2}, PlayerId{1}, "s/x1", "{}", false);
  auto got = net.deliver_round();
  REQUIRE(got.size() == 2);
  CHECK(got[0].from == PlayerId{2});
  CHECK(got[1].from == PlayerId{3});
  CHECK(net.idle());
  CHECK_THROWS_AS(net.post(PlayerId{9}, PlayerId{1}, "s/x1", "{}", false), RoutingError);
  CHECK_THROWS_AS(net.post(PlayerId{1}, PlayerId{0}, "s/x1", "{}", false), RoutingError);
}

TEST_CASE("message tags") {
  Message m;
  m.tag = "pdsmm:1:2:0/beta12";
  CHECK(m.session() == "pdsmm:1:2:0");
  CHECK(m.phase() == "beta");
}

TEST_CASE("signatures") {
  Network net = small_net(3);
  const auto& group = net.group();
  Message m{PlayerId{1}, PlayerId{2}, 1, "s/a1", R"({"x":"ff"})", std::nullopt};
  Message s = sign_message(group, net.keys(PlayerId{1}).signing, m);
  CHECK(verify_message(group, net.keys(PlayerId{1}).signing.y, s));
  Message flipped = s;
  flipped.payload[7] = 'e';
  CHECK_FALSE(verify_message(group, net.keys(PlayerId{1}).signing.y, flipped));
  CHECK_FALSE(verify_message(group, net.keys(PlayerId{2}).signing.y, s));
  CHECK_FALSE(verify_message(group, net.keys(PlayerId{1}).signing.y, m));
}

TEST_CASE("byte accounting and metrics") {
  Network net = small_net(3);
  CHECK(net.metrics_snapshot().message_count == 0);
  net.post(PlayerId{1}, PlayerId{2}, "s/a1", "12345", true);
  net.post(PlayerId{2}, PlayerId{3}, "s/b2", "1", false);
  auto got = net.deliver_round();
  std::size_t bytes = 0;
  for (const auto& m : got) bytes += m.payload.size() + (m.signature ? m.signature->size() : 0);
  Metrics mt = net.metrics_snapshot();
  CHECK(mt.message_count == 2);
  CHECK(mt.total_bytes == bytes);
  CHECK(mt.round_count == 1);
  CHECK(mt.phases.at("a").messages == 1);
}

TEST_CASE("transcript json lines roundtrip") {
  Network net = small_net(3);
  net.post(PlayerId{1}, PlayerId{2}, "s/a1", R"({"v":"1"})", true);
  net.post(PlayerId{2}, PlayerId{3}, "s/b2", R"({"v":"2"})", false);
  net.deliver_round();
  std::ostringstream out;
  export_transcript(out, net.transcript());
  std::istringstream in(out.str());
  auto back = import_transcript(in);
  CHECK(back == net.transcript());
  CHECK_THROWS_AS(message_from_json_line("not json"), FormatError);
}

TEST_CASE("adversary hooks") {
  SUBCASE("passive mode sees exact bytes") {
    Network net = small_net(3);
    AdversaryHook h;
    h.mode = AdversaryMode::passive;
    h.compromised = {PlayerId{2}};
    net.attach_adversary(h);
    net.post(PlayerId{1}, PlayerId{2}, "s/a1", "abc", false);
    auto got = net.deliver_round();
    CHECK(got[0].payload == "abc");
    CHECK(net.adversary_log() == got);
    CHECK(net.is_compromised(PlayerId{2}));
  }
  SUBCASE("active replacement and drop") {
    Network net = small_net(3);
    AdversaryHook h;
    h.mode = AdversaryMode::active;
    h.interceptor = [](const Message& m, AdversaryControl&) -> std::vector<Message> {
      if (m.to == PlayerId{1}) return {};
      Message x = m;
      x.payload = "forged";
      return {x};
    };
    net.attach_adversary(h);
    net.post(PlayerId{2}, PlayerId{1}, "s/a1", "to alice", false);
    net.post(PlayerId{1}, PlayerId{3}, "s/a1", "real", false);
    auto got = net.deliver_round();
    REQUIRE(got.size() == 1);
    CHECK(got[0].to == PlayerId{3});
    CHECK(got[0].payload == "forged");
  }
  SUBCASE("injected messages arrive at the next boundary") {
    Network net = small_net(3);
    AdversaryHook h;
    h.mode = AdversaryMode::active;
    h.interceptor = [](const Message& m, AdversaryControl& ctl) -> std::vector<Message> {
      Message dup = m;
      ctl.inject(dup);
      return {m};
    };
    net.attach_adversary(h);
    net.post(PlayerId{1}, PlayerId{2}, "s/a1", "x", false);
    CHECK(net.deliver_round().size() == 1);
    CHECK_FALSE(net.idle());
    CHECK(net.deliver_round().size() == 1);
    CHECK(net.idle());
  }
  SUBCASE("sign_as only for compromised players") {
    Network net = small_net(3);
    AdversaryHook h;
    h.mode = AdversaryMode::active;
    h.compromised = {PlayerId{3}};
    bool refused = false;
    h.interceptor = [&](const Message& m, AdversaryControl& ctl) -> std::vector<Message> {
      try {
        ctl.sign_as(PlayerId{1}, m);
      } catch (const ConfigurationError&) {
        refused = true;
      }
      CHECK(ctl.compromised_keys(PlayerId{1}) == nullptr);
      CHECK(ctl.compromised_keys(PlayerId{3}) != nullptr);
      return {ctl.sign_as(PlayerId{3}, m)};
    };
    net.attach_adversary(h);
    net.post(PlayerId{1}, PlayerId{2}, "s/a1", "x", false);
    auto got = net.deliver_round();
    CHECK(refused);
    CHECK(verify_message(net.group(), net.keys(PlayerId{3}).signing.y, got[0]));
    CHECK_FALSE(verify_message(net.group(), net.keys(PlayerId{1}).signing.y, got[0]));
  }
  SUBCASE("invalid hooks") {
    Network net = small_net(3);
    AdversaryHook h;
    h.mode = AdversaryMode::passive;
    h.compromised = {PlayerId{7}};
    CHECK_THROWS(net.attach_adversary(h));
    AdversaryHook a;
    a.mode = AdversaryMode::active;
    CHECK_THROWS_AS(net.attach_adversary(a), ConfigurationError);
  }
}

TEST_CASE("identical seeds replay byte for byte") {
  auto run = [](std::uint64_t seed) {
    DotProductInstance inst = random_instance(5, 100, CipherMode::shared_modulus, seed);
    inst.signatures_enabled = true;
    Network net = make_dot_network(inst, seed);
    run_dsdp(inst, net);
    std::ostringstream os;
    export_transcript(os, net.transcript());
    return os.str() + metrics_csv_row("dsdp", 5, 1, net.metrics_snapshot(), seed);
  };
  CHECK(run(11) == run(11));
  CHECK(run(11) != run(12));
}

TEST_CASE("metrics csv") {
  CHECK(metrics_csv_header() == "protocol,n,d,messages,bytes,rounds,seed");
  Metrics m;
  m.message_count = 3;
  m.total_bytes = 10;
  m.round_count = 2;
  CHECK(metrics_csv_row("dsdp", 3, 1, m, 9) == "dsdp,3,1,3,10,2,9");
}
