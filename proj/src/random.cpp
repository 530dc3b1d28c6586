#include "sessionpi/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spi {

namespace {

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(Rng& rng) { return pick(rng, 0, 1) == 1; }

const std::vector<Label> kLabels{"l", "r", "m"};

std::map<Label, SessionType> random_arms(Rng& rng, int depth, const std::function<SessionType(int)>& sub) {
  std::map<Label, SessionType> arms;
  int n = pick(rng, 1, 2);
  for (int i = 0; i < n; ++i) arms[kLabels[static_cast<std::size_t>(i)]] = sub(depth - 1);
  return arms;
}

// Payload-free protocol: every message carries end.
SessionType random_protocol(Rng& rng, int depth) {
  if (depth <= 0) return t_end();
  switch (pick(rng, 0, 4)) {
    case 0: return t_end();
    case 1: return t_out(t_end(), random_protocol(rng, depth - 1));
    case 2: return t_in(t_end(), random_protocol(rng, depth - 1));
    case 3: return t_select(random_arms(rng, depth, [&](int d) { return random_protocol(rng, d); }));
    default: return t_branch(random_arms(rng, depth, [&](int d) { return random_protocol(rng, d); }));
  }
}

}  // namespace

SessionType random_type(Rng& rng, int depth) {
  if (depth <= 0) return t_end();
  switch (pick(rng, 0, 4)) {
    case 0: return t_end();
    case 1: return t_out(random_type(rng, depth - 1), random_type(rng, depth - 1));
    case 2: return t_in(random_type(rng, depth - 1), random_type(rng, depth - 1));
    case 3: return t_select(random_arms(rng, depth, [&](int d) { return random_type(rng, d); }));
    default: return t_branch(random_arms(rng, depth, [&](int d) { return random_type(rng, d); }));
  }
}

SessionCtx random_ctx(Rng& rng, int size, int depth) {
  SessionCtx g;
  for (int i = 0; i < size; ++i) g[Name{"x" + std::to_string(i), 0}] = random_type(rng, depth);
  return g;
}

Process random_term(Rng& rng, int depth) {
  std::vector<Name> scope{Name{"a", 0}, Name{"b", 0}, Name{"n", 0}};
  std::function<Process(int)> go = [&](int d) -> Process {
    auto any = [&]() { return scope[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(scope.size()) - 1))]; };
    auto bind = [&](const std::string& base, const std::function<Process()>& body) {
      Name n = fresh_name(base);
      scope.push_back(n);
      Process p = body();
      scope.pop_back();
      return std::make_pair(n, p);
    };
    auto maybe_type = [&]() -> SessionType { return coin(rng) ? random_type(rng, 2) : nullptr; };
    if (d <= 0) return coin(rng) ? p_nil() : p_fwd(any(), any());
    switch (pick(rng, 0, 9)) {
      case 0: return p_nil();
      case 1: {
        std::vector<Value> vals;
        int k = pick(rng, 1, 2);
        for (int i = 0; i < k; ++i)
          vals.push_back(coin(rng) ? Value::chan(any()) : Value::variant(kLabels[0], Value::chan(any())));
        return p_out(any(), vals, go(d - 1));
      }
      case 2: {
        Name x = any();
        auto [y, body] = bind("y", [&] { return go(d - 1); });
        return p_in(x, y, body);
      }
      case 3: return p_sel(any(), kLabels[static_cast<std::size_t>(pick(rng, 0, 2))], go(d - 1));
      case 4: {
        Name x = any();
        std::map<Label, Process> arms;
        int k = pick(rng, 1, 2);
        for (int i = 0; i < k; ++i) arms[kLabels[static_cast<std::size_t>(i)]] = go(d - 1);
        return p_bra(x, arms);
      }
      case 5: return p_par(go(d - 1), go(d - 1));
      case 6: {
        Name x = fresh_name("x"), y = fresh_name("y");
        scope.push_back(x);
        scope.push_back(y);
        Process body = go(d - 1);
        scope.pop_back();
        scope.pop_back();
        return p_respair(x, y, random_type(rng, 2), body);  // annotation is mandatory here
      }
      case 7: {
        SessionType t = maybe_type();
        auto [x, body] = bind("w", [&] { return go(d - 1); });
        return p_res(x, t, body);
      }
      case 8: return p_fwd(any(), any());
      default: {
        Value v = coin(rng) ? Value::chan(any()) : Value::variant(kLabels[1], Value::chan(any()));
        std::map<Label, CaseArm> arms;
        int k = pick(rng, 1, 2);
        for (int i = 0; i < k; ++i) {
          auto [z, body] = bind("z", [&] { return go(d - 1); });
          arms[kLabels[static_cast<std::size_t>(i)]] = CaseArm{z, body};
        }
        return p_case(v, arms);
      }
    }
  };
  return go(depth);
}

Process random_session_process(Rng& rng, int sessions, int depth) {
  const Name n{"n", 0};
  std::vector<Name> xs, ys;
  std::vector<SessionType> ts;
  for (int i = 0; i < sessions; ++i) {
    xs.push_back(fresh_name("x"));
    ys.push_back(fresh_name("y"));
    ts.push_back(random_protocol(rng, depth));
  }
  // one thread: interleaves the given endpoints in a random order
  std::function<Process(std::vector<std::pair<Name, SessionType>>)> thread =
      [&](std::vector<std::pair<Name, SessionType>> st) -> Process {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < st.size(); ++i)
      if (st[i].second->kind != SessionTypeNode::Kind::End) live.push_back(i);
    if (live.empty()) return p_nil();
    std::size_t j = live[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(live.size()) - 1))];
    auto [x, t] = st[j];
    switch (t->kind) {
      case SessionTypeNode::Kind::Out:
        st[j].second = t->cont;
        return p_out(x, n, thread(st));
      case SessionTypeNode::Kind::In: {
        st[j].second = t->cont;
        return p_in(x, fresh_name("v"), thread(st));
      }
      case SessionTypeNode::Kind::Select: {
        auto it = t->arms.begin();
        std::advance(it, pick(rng, 0, static_cast<int>(t->arms.size()) - 1));
        st[j].second = it->second;
        return p_sel(x, it->first, thread(st));
      }
      default: {
        std::map<Label, Process> arms;
        for (auto& [l, s] : t->arms) {
          auto st2 = st;
          st2[j].second = s;
          arms[l] = thread(st2);
        }
        return p_bra(x, arms);
      }
    }
  };
  // each side is split into one or two threads
  auto side = [&](const std::vector<Name>& ends, bool dualize) {
    std::vector<std::pair<Name, SessionType>> a, b;
    bool split = coin(rng);
    for (std::size_t i = 0; i < ends.size(); ++i) {
      SessionType t = dualize ? dual(ts[i]) : ts[i];
      ((split && coin(rng)) ? b : a).push_back({ends[i], t});
    }
    std::vector<Process> out{thread(a)};
    if (!b.empty()) out.push_back(thread(b));
    return out;
  };
  std::vector<Process> comps = side(xs, false);
  for (auto& p : side(ys, true)) comps.push_back(p);
  Process body = p_par(comps);
  for (int i = sessions; i-- > 0;) body = p_respair(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)], ts[static_cast<std::size_t>(i)], body);
  return body;
}

}  // namespace spi
