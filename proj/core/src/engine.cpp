#include "abcast/engine.hpp"

#include <algorithm>

namespace abcast {

bool no_duplicate_ancestor(const Proposal& p, const AncestorChain& ancestors) {
  return std::none_of(ancestors.begin(), ancestors.end(),
                      [&](const Proposal* a) { return a->value == p.value; });
}

Engine::Engine(Params params, LeaderSchedule schedule, NodeId self, EngineOptions options)
    : params_(params), schedule_(std::move(schedule)), self_(self), options_(std::move(options)) {
  params_.validate();
  if (options_.spam_window && *options_.spam_window == 0) {
    throw ConfigError("spam window must be at least 1");
  }
  if (!options_.validity) options_.validity = no_duplicate_ancestor;
}

EngineActions Engine::start(Time now) {
  EngineActions out;
  if (options_.start_time && now < *options_.start_time) {
    pending_wakeup_ = *options_.start_time;
    out.push_back(action::Wakeup{*options_.start_time});
    return out;
  }
  started_ = true;
  out.push_back(action::RestartTimer{params_.round_timeout(), ++timer_generation_});
  auto more = evaluate(now);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

void Engine::on_input(Value v) {
  if (delivered_values_.contains(v)) return;
  if (options_.queue == QueueDiscipline::fifo) {
    inputs_.push_back(std::move(v));
  } else {
    inputs_.push_front(std::move(v));
  }
}

EngineActions Engine::on_timeout(std::uint64_t generation, Time /*now*/) {
  if (!started_ || generation != timer_generation_) return {};
  if (!wba_inputs_.insert(current_).second) return {};
  return {action::InputWba{current_, Bit::zero}};
}

EngineActions Engine::on_subproto_output(const InstanceKey& key, const SubprotoValue& out,
                                         Time now) {
  if (!kind_matches(key.kind, out)) {
    throw InternalError("output kind does not match " + to_string(key));
  }
  if (key.kind == InstanceKind::rb) {
    const auto& p = std::get<Proposal>(out);
    auto [it, fresh] = rb_out_.emplace(key.round, p);
    if (!fresh) {
      if (it->second != p) throw InternalError("conflicting output for " + to_string(key));
      return {};
    }
    awaiting_acceptance_.insert(key.round);
  } else {
    const Bit b = std::get<Bit>(out);
    auto [it, fresh] = wba_out_.emplace(key.round, b);
    if (!fresh) {
      if (it->second != b) throw InternalError("conflicting output for " + to_string(key));
      return {};
    }
    if (b == Bit::one) {
      committed_.insert(key.round);
    } else {
      while (skippable(skippable_prefix_)) ++skippable_prefix_;
    }
  }
  return evaluate(now);
}

bool Engine::committed(Round r) const {
  auto it = wba_out_.find(r);
  return it != wba_out_.end() && it->second == Bit::one;
}

bool Engine::skippable(Round r) const {
  auto it = wba_out_.find(r);
  return it != wba_out_.end() && it->second == Bit::zero;
}

const std::optional<Proposal> Engine::rb_output(Round r) const {
  auto it = rb_out_.find(r);
  if (it == rb_out_.end()) return std::nullopt;
  return it->second;
}

std::optional<Bit> Engine::wba_output(Round r) const {
  auto it = wba_out_.find(r);
  if (it == wba_out_.end()) return std::nullopt;
  return it->second;
}

bool Engine::fertile(Round r, OptionalRound s) const {
  if (!s) return r <= skippable_prefix_;
  if (*s >= r) return false;
  for (Round u = *s + 1; u < r; ++u) {
    if (!skippable(u)) return false;
  }
  return accepted(*s).has_value();
}

std::optional<Proposal> Engine::accepted(Round r) const {
  auto it = rb_out_.find(r);
  if (it == rb_out_.end()) return std::nullopt;
  if (accepted_cache_.contains(r)) return it->second;
  const Proposal& p = it->second;
  if (!fertile(r, p.parent)) return std::nullopt;
  if (!options_.validity(p, chain_from(p.parent))) return std::nullopt;
  accepted_cache_.insert(r);
  if (!max_accepted_timestamp_ || p.timestamp > *max_accepted_timestamp_) {
    max_accepted_timestamp_ = p.timestamp;
  }
  return p;
}

std::optional<OptionalRound> Engine::fertile_parent(Round r) const {
  // Walking down from r - 1, the first accepted round wins as long as every
  // round passed on the way is skippable.
  for (Round s = r; s-- > 0;) {
    if (accepted(s)) return OptionalRound{s};
    if (!skippable(s)) return std::nullopt;
  }
  return OptionalRound{};
}

AncestorChain Engine::chain_from(OptionalRound parent) const {
  AncestorChain chain;
  while (parent) {
    auto it = rb_out_.find(*parent);
    if (it == rb_out_.end()) break;
    chain.push_back(&it->second);
    parent = it->second.parent;
  }
  return chain;
}

void Engine::remove_input(const Value& v) {
  inputs_.erase(std::remove(inputs_.begin(), inputs_.end(), v), inputs_.end());
}

std::vector<Value> Engine::finalize_chain(Round r) {
  if (!accepted(r)) throw InternalError("finalize of round without accepted value");
  std::vector<Round> rounds;
  for (Round cur = r;;) {
    auto it = rb_out_.find(cur);
    if (it == rb_out_.end()) {
      throw InternalError("ancestor round " + std::to_string(cur) + " has no RB output");
    }
    rounds.push_back(cur);
    const OptionalRound parent = it->second.parent;
    if (!parent || *parent < undecided_) break;
    cur = *parent;
  }
  std::vector<Value> values;
  for (auto it = rounds.rbegin(); it != rounds.rend(); ++it) {
    const Value& v = rb_out_.at(*it).value;
    remove_input(v);
    delivered_values_.insert(v);
    delivered_.push_back(action::Deliver{*it, v});
    values.push_back(v);
  }
  return values;
}

bool Engine::gates_open(Time now, EngineActions& out) {
  Time open_at = now;
  if (options_.start_time) open_at = std::max(open_at, *options_.start_time);
  if (options_.min_parent_delay && max_accepted_timestamp_) {
    open_at = std::max(open_at, *max_accepted_timestamp_ + *options_.min_parent_delay);
  }
  if (open_at <= now) return true;
  if (pending_wakeup_ != open_at) {
    pending_wakeup_ = open_at;
    out.push_back(action::Wakeup{open_at});
  }
  return false;
}

EngineActions Engine::evaluate(Time now) {
  EngineActions out;
  if (pending_wakeup_ && *pending_wakeup_ <= now) pending_wakeup_.reset();
  if (!started_ && (!options_.start_time || now >= *options_.start_time)) {
    started_ = true;
    out.push_back(action::RestartTimer{params_.round_timeout(), ++timer_generation_});
  }

  for (bool changed = true; changed;) {
    changed = false;

    // A round stops being current once it is skippable or has an accepted value.
    while (started_ && (skippable(current_) || accepted(current_)) && gates_open(now, out)) {
      ++current_;
      out.push_back(action::RestartTimer{params_.round_timeout(), ++timer_generation_});
      changed = true;
    }

    if (started_ && schedule_.leader_of(current_) == self_ && !inputs_.empty() &&
        !rb_inputs_.contains(current_)) {
      if (auto parent = fertile_parent(current_)) {
        const AncestorChain chain = chain_from(*parent);
        for (const Value& v : inputs_) {
          Proposal p{v, *parent, now};
          if (!options_.validity(p, chain)) continue;
          rb_inputs_.insert(current_);
          out.push_back(action::InputRb{current_, std::move(p)});
          changed = true;
          break;
        }
      }
    }

    for (auto it = awaiting_acceptance_.begin(); it != awaiting_acceptance_.end();) {
      const Round r = *it;
      if (!accepted(r)) {
        ++it;
        continue;
      }
      it = awaiting_acceptance_.erase(it);
      if (wba_inputs_.insert(r).second) {
        out.push_back(action::InputWba{r, Bit::one});
        changed = true;
      }
    }

    for (auto it = committed_.lower_bound(undecided_); it != committed_.end();) {
      const Round r = *it;
      if (!accepted(r)) {
        ++it;
        continue;
      }
      const std::size_t before = delivered_.size();
      finalize_chain(r);
      for (std::size_t i = before; i < delivered_.size(); ++i) out.push_back(delivered_[i]);
      undecided_ = r + 1;
      it = committed_.lower_bound(undecided_);
      changed = true;
    }
  }
  return out;
}

}  // namespace abcast
