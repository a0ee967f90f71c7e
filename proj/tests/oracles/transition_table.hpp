#pragma once

// Reference model for the one-creator / one-respondent / one-device universe:
// creator holds 11 tokens, respondent 5, every task has reward 10, fee 1 and
// a block limit of 1. The table below was written from the protocol rules
// directly and is compared against the contracts sequence by sequence.

#include <array>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"

namespace iotchain::oracle {

enum class Act { Create, Accept, Submit, Release, Advance };
inline constexpr std::array<Act, 5> kActs{Act::Create, Act::Accept, Act::Submit,
                                          Act::Release, Act::Advance};

inline const char* act_name(Act a) {
  switch (a) {
    case Act::Create: return "create";
    case Act::Accept: return "accept";
    case Act::Submit: return "submit";
    case Act::Release: return "release";
    case Act::Advance: return "advance";
  }
  return "?";
}

enum class RefPhase { None, Created, Accepted, Resolved };
enum class Effect { Nothing, Create, Accept, Complete, Refund, Tick };

struct Row {
  RefPhase phase;
  bool expired;
  Act act;
  ErrorCode outcome;
  Effect effect;
};

using E = ErrorCode;
using P = RefPhase;

// clang-format off
inline constexpr Row kTable[] = {
  // No task yet. Expiry is meaningless, listed both ways for lookup.
  {P::None,     false, Act::Create,  E::Ok,                  Effect::Create},
  {P::None,     false, Act::Accept,  E::UnknownTask,         Effect::Nothing},
  {P::None,     false, Act::Submit,  E::UnknownTask,         Effect::Nothing},
  {P::None,     false, Act::Release, E::UnknownTask,         Effect::Nothing},
  {P::None,     false, Act::Advance, E::Ok,                  Effect::Tick},
  // Open, before expiry.
  {P::Created,  false, Act::Create,  E::InsufficientTokens,  Effect::Nothing},
  {P::Created,  false, Act::Accept,  E::Ok,                  Effect::Accept},
  {P::Created,  false, Act::Submit,  E::TaskNotAccepted,     Effect::Nothing},
  {P::Created,  false, Act::Release, E::TaskNotExpired,      Effect::Nothing},
  {P::Created,  false, Act::Advance, E::Ok,                  Effect::Tick},
  // Open, expired.
  {P::Created,  true,  Act::Create,  E::InsufficientTokens,  Effect::Nothing},
  {P::Created,  true,  Act::Accept,  E::TaskExpired,         Effect::Nothing},
  {P::Created,  true,  Act::Submit,  E::TaskNotAccepted,     Effect::Nothing},
  {P::Created,  true,  Act::Release, E::Ok,                  Effect::Refund},
  {P::Created,  true,  Act::Advance, E::Ok,                  Effect::Tick},
  // Accepted, before expiry.
  {P::Accepted, false, Act::Create,  E::InsufficientTokens,  Effect::Nothing},
  {P::Accepted, false, Act::Accept,  E::TaskNotOpen,         Effect::Nothing},
  {P::Accepted, false, Act::Submit,  E::Ok,                  Effect::Complete},
  {P::Accepted, false, Act::Release, E::TaskNotExpired,      Effect::Nothing},
  {P::Accepted, false, Act::Advance, E::Ok,                  Effect::Tick},
  // Accepted, expired.
  {P::Accepted, true,  Act::Create,  E::InsufficientTokens,  Effect::Nothing},
  {P::Accepted, true,  Act::Accept,  E::TaskNotOpen,         Effect::Nothing},
  {P::Accepted, true,  Act::Submit,  E::TaskExpired,         Effect::Nothing},
  {P::Accepted, true,  Act::Release, E::Ok,                  Effect::Refund},
  {P::Accepted, true,  Act::Advance, E::Ok,                  Effect::Tick},
  // Resolved. Within five actions the creator never again holds 11 tokens.
  {P::Resolved, false, Act::Create,  E::InsufficientTokens,  Effect::Nothing},
  {P::Resolved, false, Act::Accept,  E::TaskNotOpen,         Effect::Nothing},
  {P::Resolved, false, Act::Submit,  E::TaskNotAccepted,     Effect::Nothing},
  {P::Resolved, false, Act::Release, E::TaskAlreadyResolved, Effect::Nothing},
  {P::Resolved, false, Act::Advance, E::Ok,                  Effect::Tick},
  {P::Resolved, true,  Act::Create,  E::InsufficientTokens,  Effect::Nothing},
  {P::Resolved, true,  Act::Accept,  E::TaskNotOpen,         Effect::Nothing},
  {P::Resolved, true,  Act::Submit,  E::TaskNotAccepted,     Effect::Nothing},
  {P::Resolved, true,  Act::Release, E::TaskAlreadyResolved, Effect::Nothing},
  {P::Resolved, true,  Act::Advance, E::Ok,                  Effect::Tick},
};
// clang-format on

struct RefState {
  RefPhase phase = RefPhase::None;
  BlockNumber block = 0;
  BlockNumber created = 0;
  Tokens creator = 11;
  Tokens respondent = 5;
  Tokens frozen = 0;
  Tokens burned = 0;
  std::uint64_t creator_rep = 0;
  std::uint64_t respondent_rep = 0;

  bool expired() const {
    return phase != RefPhase::None && block > created + 1;
  }
  bool operator==(const RefState&) const = default;
};

inline ErrorCode reference_step(RefState& s, Act act) {
  const bool expired = s.expired();
  for (const auto& row : kTable) {
    if (row.phase != s.phase || row.act != act) continue;
    if (s.phase != RefPhase::None && row.expired != expired) continue;
    switch (row.effect) {
      case Effect::Nothing: break;
      case Effect::Create:
        s.creator -= 11; s.frozen = 10; s.burned += 1;
        s.phase = RefPhase::Created; s.created = s.block;
        break;
      case Effect::Accept:
        s.respondent -= 5; s.frozen += 5; s.phase = RefPhase::Accepted;
        break;
      case Effect::Complete:
        s.respondent += s.frozen; s.frozen = 0;
        s.creator_rep += 1; s.respondent_rep += 2;
        s.phase = RefPhase::Resolved;
        break;
      case Effect::Refund:
        s.creator += s.frozen; s.frozen = 0; s.phase = RefPhase::Resolved;
        break;
      case Effect::Tick:
        s.block += 1;
        break;
    }
    return row.outcome;
  }
  throw std::logic_error("reference table has no row");
}

// The same universe on the real contracts.
class Universe {
 public:
  Universe() {
    must(chain_.register_user(creator_));
    must(chain_.register_user(respondent_));
    must(chain_.purchase(creator_, 11));
    must(chain_.purchase(respondent_, 5));
    must(chain_.register_device(respondent_, device_, device_key_.public_key));
  }

  ErrorCode step(Act act) {
    const TaskId task{1};
    switch (act) {
      case Act::Create:
        return chain_.create_task(creator_, 10, 1, creator_key_.public_key).status;
      case Act::Accept:
        return chain_.accept(respondent_, task, device_).status;
      case Act::Submit:
        return chain_.submit_result(respondent_, task, device_, result_for(task))
            .status;
      case Act::Release:
        return chain_.release(creator_, task).status;
      case Act::Advance:
        chain_.ledger.advance_blocks(1);
        return ErrorCode::Ok;
    }
    return ErrorCode::Ok;
  }

  RefState observe() const {
    const auto& w = chain_.ledger.world();
    RefState s;
    s.block = chain_.ledger.current_block();
    s.creator = w.tokens.balance_of(creator_);
    s.respondent = w.tokens.balance_of(respondent_);
    s.frozen = w.tokens.total_frozen();
    s.burned = w.tokens.burned();
    s.creator_rep = w.users.find(creator_)->reputation;
    s.respondent_rep = w.users.find(respondent_)->reputation;
    if (const auto* t = w.tasks.find(TaskId{1})) {
      s.phase = t->phase == TaskPhase::Created    ? RefPhase::Created
                : t->phase == TaskPhase::Accepted ? RefPhase::Accepted
                                                  : RefPhase::Resolved;
      s.created = t->created_block;
    }
    return s;
  }

 private:
  static void must(const Receipt& r) {
    if (!r.ok()) throw std::runtime_error("universe setup: " + r.reason);
  }

  TaskResultObject result_for(TaskId task) {
    if (chain_.ledger.task(task)) return chain_.make_result(task, device_key_);
    return TaskResultObject{};
  }

  testing::TestChain chain_;
  Address creator_ = address_for("oracle/creator");
  Address respondent_ = address_for("oracle/respondent");
  crypto::KeyPair creator_key_ = testing::keypair_for("oracle/creator");
  crypto::KeyPair device_key_ = testing::keypair_for("oracle/device");
  DeviceIdentifier device_ =
      device_identifier_for(as_bytes("oracle"), Bytes(kDeviceSaltSize, 0));
};

struct OracleReport {
  std::size_t sequences = 0;
  std::size_t steps = 0;
  std::vector<std::string> mismatches;
};

inline std::string describe(const std::vector<Act>& seq) {
  std::ostringstream out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out << (i ? " " : "") << act_name(seq[i]);
  }
  return seq.empty() ? "<empty>" : out.str();
}

// Runs every sequence of length 0..max_length through both models.
inline OracleReport run_transition_oracle(std::size_t max_length) {
  OracleReport report;
  std::vector<Act> seq;
  std::function<void()> visit = [&] {
    ++report.sequences;
    Universe sut;
    RefState ref;
    if (!(sut.observe() == ref)) {
      report.mismatches.push_back("initial state differs");
    }
    for (std::size_t i = 0; i < seq.size(); ++i) {
      ++report.steps;
      auto expected = reference_step(ref, seq[i]);
      auto actual = sut.step(seq[i]);
      if (expected != actual || !(sut.observe() == ref)) {
        report.mismatches.push_back(
            describe(seq) + ": step " + std::to_string(i + 1) + " expected " +
            std::string(to_string(expected)) + ", got " +
            std::string(to_string(actual)));
        break;
      }
    }
    if (seq.size() == max_length) return;
    for (auto act : kActs) {
      seq.push_back(act);
      visit();
      seq.pop_back();
    }
  };
  visit();
  return report;
}

}  // namespace iotchain::oracle
