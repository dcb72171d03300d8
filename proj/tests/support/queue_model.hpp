#pragma once

// Reference model for the client event queue: a plain list searched from
// the front, removing the first match.

#include "random.hpp"

#include "jenny5/host/scufy_client.hpp"

#include <list>
#include <sstream>

namespace jenny5::testing {

struct ListModel {
  std::list<host::DeviceEvent> items;

  std::optional<host::DeviceEvent> take(host::EventType type, std::optional<int> p1 = std::nullopt) {
    for (auto it = items.begin(); it != items.end(); ++it) {
      if (it->type == type && (!p1 || it->param1 == *p1)) {
        auto e = *it;
        items.erase(it);
        return e;
      }
    }
    return std::nullopt;
  }
};

/// Runs `steps` random appends and queries against both the client and the
/// model. Returns an empty string on agreement, otherwise a description of
/// the first divergence.
inline std::string queue_model_divergence(Gen& g, int steps) {
  using host::EventType;
  host::ScufyClient client;
  ListModel model;
  // A few types and small params so queries hit often.
  const EventType types[] = {EventType::IsAlive, EventType::StepperMoveDone, EventType::StepperHomed,
                             EventType::AS5147Read, EventType::ErrorReceived};
  auto pick_type = [&] { return types[g.integer(0, 4)]; };

  for (int step = 0; step < steps; ++step) {
    std::ostringstream where;
    where << "step " << step << ": ";
    int op = g.integer(0, 5);
    if (op <= 1) {
      host::DeviceEvent e{pick_type(), g.integer(-1, 3), g.integer<std::int64_t>(-5, 5)};
      client.events().push(e);
      model.items.push_back(e);
      continue;
    }
    auto type = pick_type();
    bool got = false;
    std::optional<host::DeviceEvent> want;
    int p1 = -99;
    std::int64_t p2 = -99;
    switch (op) {
      case 2:
        got = client.query_for_event(type);
        want = model.take(type);
        break;
      case 3:
        got = client.query_for_event(type, p1);
        want = model.take(type);
        if (got && want && p1 != want->param1) return where.str() + "param1 differs";
        break;
      case 4:
        got = client.query_for_event(type, p1, p2);
        want = model.take(type);
        if (got && want && (p1 != want->param1 || p2 != want->param2)) return where.str() + "params differ";
        break;
      default: {
        int required = g.integer(-1, 3);
        got = client.query_for_event_with_param(type, required);
        want = model.take(type, required);
        break;
      }
    }
    if (got != want.has_value()) return where.str() + "hit/miss differs";
    if (!got && (p1 != -99 || p2 != -99)) return where.str() + "outputs written on a miss";
    const auto& q = client.events().items();
    if (!std::equal(q.begin(), q.end(), model.items.begin(), model.items.end())) {
      return where.str() + "queue contents differ";
    }
  }
  return {};
}

}  // namespace jenny5::testing
