#include "iotchain/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "iotchain/registry.hpp"

namespace iotchain::scenario {
namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kDeployer = "deployer";
constexpr std::string_view kDefaultPayload = "read channel=temperature";

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  return std::nullopt;
}

std::optional<agent::ActionKind> action_kind_from_string(std::string_view s) {
  using agent::ActionKind;
  for (auto kind :
       {ActionKind::Submitted, ActionKind::SubmitRejected,
        ActionKind::OutlierRejected, ActionKind::PayloadRejected,
        ActionKind::SensorUnavailable, ActionKind::SealingFailed,
        ActionKind::Skipped}) {
    if (agent::to_string(kind) == s) return kind;
  }
  return std::nullopt;
}

// "channel:min:max[,channel:min:max...]"
std::optional<std::map<std::string, agent::ReadingLimits, std::less<>>>
parse_limits(std::string_view s) {
  std::map<std::string, agent::ReadingLimits, std::less<>> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    auto item = s.substr(start, end - start);
    auto c1 = item.find(':');
    auto c2 = c1 == std::string_view::npos ? c1 : item.find(':', c1 + 1);
    if (c1 == 0 || c2 == std::string_view::npos) return std::nullopt;
    auto lo = parse_number<double>(item.substr(c1 + 1, c2 - c1 - 1));
    auto hi = parse_number<double>(item.substr(c2 + 1));
    if (!lo || !hi || *lo > *hi) return std::nullopt;
    out[std::string(item.substr(0, c1))] = agent::ReadingLimits{*lo, *hi};
    start = end + 1;
  }
  return out;
}

// Splits on unquoted whitespace. Double quotes group text and are removed;
// an unquoted '#' at the start of a token begins a comment.
std::vector<std::string> tokenize(std::string_view line, std::size_t lineno) {
  std::vector<std::string> tokens;
  std::string current;
  bool in_token = false;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      if (in_token) tokens.push_back(std::move(current));
      current.clear();
      in_token = false;
    } else if (c == '#' && !in_token) {
      break;
    } else {
      current += c;
      in_token = true;
    }
  }
  if (quoted) throw ParseError(lineno, "unterminated quote");
  if (in_token) tokens.push_back(std::move(current));
  return tokens;
}

enum class ArgType {
  Actor,
  Device,
  NewDevice,
  Task,
  NewTask,
  Checkpoint,
  NewCheckpoint,
  UInt,
  Int,
  Real,
  Text,
  Bool,
  Error,
  Limits,
  Phase,
  Resolution,
  Action,
  Kind,
};

struct ArgSpec {
  std::string_view key;
  ArgType type;
  bool required = true;
};

struct ActionSpec {
  std::vector<ArgSpec> args;
  bool transaction = false;
};

const std::map<std::string, ActionSpec, std::less<>>& action_specs() {
  using T = ArgType;
  static const std::map<std::string, ActionSpec, std::less<>> specs{
      {"deploy", {{{"actor", T::Actor, false}}, true}},
      {"register_user", {{{"actor", T::Actor}}, true}},
      {"purchase", {{{"actor", T::Actor}, {"payment", T::UInt}}, true}},
      {"register_device",
       {{{"actor", T::Actor},
         {"device", T::NewDevice},
         {"serial", T::Text},
         {"limits", T::Limits, false}},
        true}},
      {"set_device_active",
       {{{"actor", T::Actor}, {"device", T::Device}, {"active", T::Bool}},
        true}},
      {"create_task",
       {{{"actor", T::Actor},
         {"task", T::NewTask},
         {"reward", T::UInt},
         {"block_limit", T::UInt},
         {"requirement", T::UInt, false},
         {"payload", T::Text, false}},
        true}},
      {"accept_task",
       {{{"actor", T::Actor}, {"task", T::Task}, {"device", T::Device}},
        true}},
      {"release_expired", {{{"actor", T::Actor}, {"task", T::Task}}, true}},
      {"sensor",
       {{{"device", T::Device}, {"channel", T::Text}, {"value", T::Real}}}},
      {"run_agent_cycle", {{{"device", T::Device, false}}}},
      {"advance_blocks", {{{"n", T::UInt}}}},
      {"checkpoint", {{{"name", T::NewCheckpoint}}}},
  };
  return specs;
}

const std::map<std::string, std::vector<ArgSpec>, std::less<>>& assert_specs() {
  using T = ArgType;
  static const std::map<std::string, std::vector<ArgSpec>, std::less<>> specs{
      {"balance",
       {{"actor", T::Actor},
        {"value", T::UInt, false},
        {"since", T::Checkpoint, false},
        {"change", T::Int, false}}},
      {"reputation", {{"actor", T::Actor}, {"value", T::UInt}}},
      {"notifications", {{"actor", T::Actor}, {"value", T::UInt}}},
      {"burned", {{"value", T::UInt}}},
      {"minted", {{"value", T::UInt}}},
      {"frozen", {{"value", T::UInt}, {"task", T::Task, false}}},
      {"conservation", {}},
      {"phase", {{"task", T::Task}, {"value", T::Phase}}},
      {"resolution", {{"task", T::Task}, {"value", T::Resolution}}},
      {"backlog", {{"device", T::Device}, {"value", T::UInt}}},
      {"completed", {{"device", T::Device}, {"value", T::UInt}}},
      {"decrypt", {{"task", T::Task}, {"value", T::Real, false}}},
      {"open_tasks",
       {{"value", T::UInt}, {"max_requirement", T::UInt, false}}},
      {"event", {{"topic", T::Text}, {"count", T::UInt}}},
      {"agent_action", {{"task", T::Task}, {"kind", T::Action}}},
      {"instantiations", {{"kind", T::Kind}, {"count", T::UInt}}},
  };
  return specs;
}

struct Declarations {
  std::set<std::string, std::less<>> actors{std::string(kDeployer)};
  std::set<std::string, std::less<>> devices;
  std::set<std::string, std::less<>> tasks;
  std::set<std::string, std::less<>> checkpoints;
};

void validate_arg(const ArgSpec& spec, const std::string& value,
                  Declarations& decl, std::size_t line) {
  auto fail = [&](const std::string& what) {
    throw ParseError(line, std::string(spec.key) + "=" + value + ": " + what);
  };
  auto require_declared = [&](const auto& set, std::string_view noun) {
    if (!set.contains(value)) fail(std::string(noun) + " is not declared");
  };
  auto declare = [&](auto& set, std::string_view noun) {
    if (!set.insert(value).second) {
      fail(std::string(noun) + " is already declared");
    }
  };
  switch (spec.type) {
    case ArgType::Actor:
      require_declared(decl.actors, "actor");
      break;
    case ArgType::Device:
      require_declared(decl.devices, "device");
      break;
    case ArgType::NewDevice:
      declare(decl.devices, "device");
      break;
    case ArgType::Task:
      require_declared(decl.tasks, "task");
      break;
    case ArgType::NewTask:
      declare(decl.tasks, "task");
      break;
    case ArgType::Checkpoint:
      require_declared(decl.checkpoints, "checkpoint");
      break;
    case ArgType::NewCheckpoint:
      declare(decl.checkpoints, "checkpoint");
      break;
    case ArgType::UInt:
      if (!parse_number<std::uint64_t>(value)) fail("expected an unsigned integer");
      break;
    case ArgType::Int: {
      std::string_view v = value;
      if (!v.empty() && v.front() == '+') v.remove_prefix(1);
      if (!parse_number<std::int64_t>(v)) fail("expected an integer");
      break;
    }
    case ArgType::Real:
      if (!parse_number<double>(value)) fail("expected a number");
      break;
    case ArgType::Text:
      break;
    case ArgType::Bool:
      if (!parse_bool(value)) fail("expected true or false");
      break;
    case ArgType::Error:
      if (!error_code_from_string(value)) fail("unknown error code");
      break;
    case ArgType::Limits:
      if (!parse_limits(value)) fail("expected channel:min:max[,...]");
      break;
    case ArgType::Phase:
      if (!task_phase_from_string(value)) fail("unknown task phase");
      break;
    case ArgType::Resolution:
      if (value != "completed" && value != "expired") {
        fail("expected completed or expired");
      }
      break;
    case ArgType::Action:
      if (!action_kind_from_string(value)) fail("unknown agent action");
      break;
    case ArgType::Kind:
      if (!contract_kind_from_string(value)) fail("unknown contract kind");
      break;
  }
}

void validate_args(Step& step, const std::vector<ArgSpec>& specs,
                   bool transaction, Declarations& decl) {
  std::set<std::string_view> known;
  for (const auto& spec : specs) known.insert(spec.key);
  if (transaction) known.insert("expect");
  for (const auto& [key, value] : step.args) {
    if (!known.contains(key)) {
      throw ParseError(step.line, "unknown argument '" + key + "' for " +
                                      step.action);
    }
  }
  if (transaction) {
    if (auto it = step.args.find("expect"); it != step.args.end()) {
      validate_arg({"expect", ArgType::Error}, it->second, decl, step.line);
    }
  }
  for (const auto& spec : specs) {
    auto it = step.args.find(spec.key);
    if (it == step.args.end()) {
      if (spec.required) {
        throw ParseError(step.line, step.action + " requires " +
                                        std::string(spec.key) + "=");
      }
      continue;
    }
    validate_arg(spec, it->second, decl, step.line);
  }
}

const std::string* find_arg(const Step& step, std::string_view key) {
  auto it = step.args.find(key);
  return it == step.args.end() ? nullptr : &it->second;
}

const std::string& arg(const Step& step, std::string_view key) {
  const auto* v = find_arg(step, key);
  if (v == nullptr) {
    throw std::logic_error("validated step lacks " + std::string(key));
  }
  return *v;
}

std::uint64_t uint_arg(const Step& step, std::string_view key) {
  return *parse_number<std::uint64_t>(arg(step, key));
}

json event_to_json(const EventRecord& e) {
  json payload = json::object();
  for (const auto& [k, v] : e.payload) payload[k] = v;
  return json{{"topic", e.topic},
              {"emitter", e.emitter.hex()},
              {"block", e.block},
              {"sequence", e.sequence},
              {"payload", payload}};
}

std::string format_usd(double usd) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", GasSchedule::round_usd(usd));
  return buf;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line) {}

Scenario parse(std::string_view text) {
  Scenario scenario;
  Declarations decl;
  bool seen_seed = false;
  bool seen_genesis = false;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    auto tokens = tokenize(raw, lineno);
    if (tokens.empty()) continue;

    Step step;
    step.line = lineno;
    step.action = tokens.front();
    auto first = raw.find_first_not_of(" \t");
    auto last = raw.find_last_not_of(" \t\r");
    step.text = raw.substr(first, last - first + 1);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      auto eq = tokens[i].find('=');
      if (eq == std::string::npos) {
        step.positional.push_back(tokens[i]);
        continue;
      }
      if (eq == 0) throw ParseError(lineno, "argument without a key");
      auto key = tokens[i].substr(0, eq);
      if (!step.args.emplace(key, tokens[i].substr(eq + 1)).second) {
        throw ParseError(lineno, "argument '" + key + "' given twice");
      }
    }

    const bool header = step.action == "seed" || step.action == "genesis" ||
                        step.action == "actor";
    if (header && step.action != "actor" && !scenario.steps.empty()) {
      throw ParseError(lineno, step.action + " must precede all steps");
    }

    if (step.action == "seed") {
      if (seen_seed) throw ParseError(lineno, "seed given twice");
      if (step.positional.size() != 1 || !step.args.empty()) {
        throw ParseError(lineno, "usage: seed <integer>");
      }
      auto seed = parse_number<std::uint64_t>(step.positional[0]);
      if (!seed) throw ParseError(lineno, "seed must be an unsigned integer");
      scenario.seed = *seed;
      seen_seed = true;
    } else if (step.action == "genesis") {
      if (seen_genesis) throw ParseError(lineno, "genesis given twice");
      if (!step.positional.empty()) {
        throw ParseError(lineno, "genesis takes key=value arguments only");
      }
      seen_genesis = true;
      auto& g = scenario.genesis;
      for (const auto& [key, value] : step.args) {
        auto as_uint = [&] {
          auto v = parse_number<std::uint64_t>(value);
          if (!v) throw ParseError(lineno, key + " must be an unsigned integer");
          return *v;
        };
        auto as_real = [&] {
          auto v = parse_number<double>(value);
          if (!v) throw ParseError(lineno, key + " must be a number");
          return *v;
        };
        if (key == "token_price") {
          g.token_price = as_uint();
        } else if (key == "task_fee") {
          g.task_fee = as_uint();
        } else if (key == "reward_percent") {
          g.respondent_reward_percent = as_uint();
        } else if (key == "usd_per_100k_gas") {
          g.usd_per_100k_gas = as_real();
        } else if (key == "block_min") {
          g.block_interval.min_seconds = as_real();
        } else if (key == "block_max") {
          g.block_interval.max_seconds = as_real();
        } else {
          throw ParseError(lineno, "unknown genesis key '" + key + "'");
        }
      }
      if (g.block_interval.min_seconds < 0 ||
          g.block_interval.min_seconds > g.block_interval.max_seconds) {
        throw ParseError(lineno, "block interval must satisfy 0 <= min <= max");
      }
    } else if (step.action == "actor") {
      if (step.positional.size() != 1 || !step.args.empty()) {
        throw ParseError(lineno, "usage: actor <name>");
      }
      const auto& name = step.positional[0];
      if (!decl.actors.insert(name).second) {
        throw ParseError(lineno, "actor '" + name + "' is already declared");
      }
      scenario.actors.push_back(name);
    } else if (step.action == "assert") {
      if (step.positional.size() != 1) {
        throw ParseError(lineno, "usage: assert <check> key=value...");
      }
      auto it = assert_specs().find(step.positional[0]);
      if (it == assert_specs().end()) {
        throw ParseError(lineno, "unknown check '" + step.positional[0] + "'");
      }
      validate_args(step, it->second, false, decl);
      if (step.positional[0] == "balance") {
        const bool absolute = step.args.contains("value");
        const bool relative =
            step.args.contains("since") && step.args.contains("change");
        if (absolute == relative ||
            (absolute && (step.args.contains("since") ||
                          step.args.contains("change")))) {
          throw ParseError(lineno,
                           "assert balance takes value= or since= change=");
        }
      }
      scenario.steps.push_back(std::move(step));
    } else {
      auto it = action_specs().find(step.action);
      if (it == action_specs().end()) {
        throw ParseError(lineno, "unknown action '" + step.action + "'");
      }
      if (!step.positional.empty()) {
        throw ParseError(lineno, "unexpected bare word '" +
                                     step.positional[0] + "'");
      }
      validate_args(step, it->second.args, it->second.transaction, decl);
      scenario.steps.push_back(std::move(step));
    }
  }
  return scenario;
}

Scenario load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string format_audit_entry(const AuditEntry& e) {
  json args = json::object();
  for (const auto& [k, v] : e.args) args[k] = v;
  json events = json::array();
  for (const auto& ev : e.events) events.push_back(event_to_json(ev));
  json j{{"seq", e.seq},
         {"block", e.block},
         {"actor", e.actor},
         {"action", e.action},
         {"sender", e.sender.hex()},
         {"target", e.target.hex()},
         {"args", args},
         {"outcome", std::string(to_string(e.outcome))}};
  if (!e.reason.empty()) j["reason"] = e.reason;
  j["gas"] = e.gas;
  j["events"] = events;
  return j.dump();
}

std::string format_audit_log(const std::vector<AuditEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += format_audit_entry(e);
    out += '\n';
  }
  return out;
}

std::vector<AuditEntry> parse_audit_log(std::string_view text) {
  std::vector<AuditEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      AuditEntry e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.block = j.at("block").get<BlockNumber>();
      e.actor = j.at("actor").get<std::string>();
      e.action = j.at("action").get<std::string>();
      e.sender = Address::from_hex(j.at("sender").get<std::string>());
      e.target = Address::from_hex(j.at("target").get<std::string>());
      for (const auto& [k, v] : j.at("args").items()) {
        e.args[k] = v.get<std::string>();
      }
      auto outcome =
          error_code_from_string(j.at("outcome").get<std::string>());
      if (!outcome) throw ParseError(lineno, "unknown outcome");
      e.outcome = *outcome;
      if (j.contains("reason")) e.reason = j["reason"].get<std::string>();
      e.gas = j.at("gas").get<std::uint64_t>();
      for (const auto& ev : j.at("events")) {
        EventRecord r;
        r.topic = ev.at("topic").get<std::string>();
        r.emitter = Address::from_hex(ev.at("emitter").get<std::string>());
        r.block = ev.at("block").get<BlockNumber>();
        r.sequence = ev.at("sequence").get<std::uint32_t>();
        for (const auto& [k, v] : ev.at("payload").items()) {
          r.payload[k] = v.get<std::string>();
        }
        e.events.push_back(std::move(r));
      }
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ParseError(lineno, std::string("malformed audit entry: ") +
                                   ex.what());
    } catch (const std::invalid_argument& ex) {
      throw ParseError(lineno, std::string("malformed audit entry: ") +
                                   ex.what());
    }
  }
  return out;
}

GasReport gas_report(const Ledger& ledger) {
  const auto& schedule = ledger.gas_schedule();
  GasReport report;
  report.usd_per_100k_gas = schedule.usd_per_100k_gas();
  const auto& counts = ledger.world().instantiations;
  for (auto kind : kAllContractKinds) {
    auto it = counts.find(kind);
    if (it == counts.end() || it->second == 0) continue;
    GasRow row;
    row.kind = kind;
    row.count = it->second;
    row.unit_gas = schedule.instantiation_gas(kind);
    row.total_gas = row.unit_gas * row.count;
    row.usd = schedule.usd(row.total_gas);
    report.rows.push_back(row);
  }
  return report;
}

std::string GasReport::to_text() const {
  char line[128];
  std::string out;
  std::snprintf(line, sizeof line, "%-14s %5s %10s %12s %10s\n", "contract",
                "count", "unit_gas", "total_gas", "usd");
  out += line;
  std::uint64_t total = 0;
  double usd_total = 0.0;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-14s %5llu %10llu %12llu %10s\n",
                  std::string(to_string(r.kind)).c_str(),
                  static_cast<unsigned long long>(r.count),
                  static_cast<unsigned long long>(r.unit_gas),
                  static_cast<unsigned long long>(r.total_gas),
                  format_usd(r.usd).c_str());
    out += line;
    total += r.total_gas;
    usd_total += r.usd;
  }
  if (!rows.empty()) {
    std::snprintf(line, sizeof line, "%-14s %5s %10s %12llu %10s\n", "total",
                  "", "", static_cast<unsigned long long>(total),
                  format_usd(usd_total).c_str());
    out += line;
  }
  char price[64];
  std::snprintf(price, sizeof price, "usd per 100k gas: %.5f\n",
                usd_per_100k_gas);
  out += price;
  return out;
}

std::string GasReport::to_json() const {
  json j;
  j["usd_per_100k_gas"] = usd_per_100k_gas;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    j["rows"].push_back(json{{"kind", std::string(to_string(r.kind))},
                             {"count", r.count},
                             {"unit_gas", r.unit_gas},
                             {"total_gas", r.total_gas},
                             {"usd", GasSchedule::round_usd(r.usd)},
                             {"usd_unrounded", r.usd}});
  }
  return j.dump(2) + "\n";
}

struct Runner::DeviceSlot {
  std::string name;
  std::string owner;
  std::shared_ptr<agent::SimulatedSensor> sensor;
  std::unique_ptr<agent::DeviceAgent> agent;
};

// Ledger port that records every transaction an agent submits.
class Runner::AuditedPort final : public agent::LedgerPort {
 public:
  AuditedPort(Runner& runner, std::string actor)
      : runner_(runner), actor_(std::move(actor)), uplink_(*runner.ledger_) {}

  std::vector<EventRecord> poll_events(EventCursor after,
                                       const TopicSet& topics) override {
    return uplink_.poll_events(after, topics);
  }
  std::optional<TaskRecord> fetch_task(TaskId id) override {
    return uplink_.fetch_task(id);
  }
  BlockNumber current_block() override { return uplink_.current_block(); }
  Address manager_address(ContractKind kind) override {
    return uplink_.manager_address(kind);
  }
  Receipt submit(const Transaction& tx) override {
    last_ = runner_.submit(actor_, tx.sender, tx.target, tx.call);
    return *last_;
  }
  const std::optional<Receipt>& last() const { return last_; }

 private:
  Runner& runner_;
  std::string actor_;
  agent::LedgerUplink uplink_;
  std::optional<Receipt> last_;
};

Runner::Runner(Scenario scenario, RunOptions options)
    : scenario_(std::move(scenario)),
      options_(std::move(options)),
      seed_(options_.seed.value_or(scenario_.seed)) {
  GenesisConfig config;
  config.seed = seed_;
  config.block_interval = scenario_.genesis.block_interval;
  config.usd_per_100k_gas = scenario_.genesis.usd_per_100k_gas;
  ledger_ = std::make_unique<Ledger>(config);
  store_ = options_.store_directory
               ? std::make_unique<ResultStore>(*options_.store_directory)
               : std::make_unique<ResultStore>();
  ledger_->set_content_oracle(
      [store = store_.get()](const ContentHash& h) { return store->has(h); });
  actors_.emplace(kDeployer, address_for(kDeployer));
  for (const auto& name : scenario_.actors) {
    actors_.emplace(name, address_for(name));
  }
}

Runner::~Runner() = default;

crypto::Seed Runner::derive(std::string_view purpose,
                            std::string_view name) const {
  Bytes material = to_bytes("iotchain/scenario/");
  append_u64_be(material, seed_);
  append(material, as_bytes(purpose));
  material.push_back('/');
  append(material, as_bytes(name));
  return crypto::derive_seed(material);
}

Receipt Runner::submit(const std::string& actor, const Address& sender,
                       const Address& target, Call call) {
  AuditEntry entry;
  entry.seq = audit_.size() + 1;
  entry.block = ledger_->current_block();
  entry.actor = actor;
  entry.action = std::string(call_name(call));
  entry.sender = sender;
  entry.target = target;
  entry.args = encode_args(call);
  auto receipt = ledger_->submit(
      Transaction{sender, target, std::move(call), entry.block});
  entry.outcome = receipt.status;
  entry.reason = receipt.ok() ? std::string{} : receipt.reason;
  entry.gas = receipt.gas;
  entry.events = receipt.events;
  audit_.push_back(std::move(entry));
  return receipt;
}

RunResult Runner::run() {
  if (ran_) throw std::logic_error("Runner::run called twice");
  ran_ = true;
  for (const auto& step : scenario_.steps) {
    try {
      execute(step);
    } catch (const std::exception& e) {
      failures_.push_back({step.line, step.text, e.what()});
    }
  }
  RunResult result;
  result.digest = ledger_->state_digest();
  result.audit = audit_;
  result.gas = gas_report(*ledger_);
  result.failures = failures_;
  return result;
}

Address Runner::address_of(std::string_view actor) const {
  auto it = actors_.find(actor);
  if (it == actors_.end()) {
    throw std::out_of_range("unknown actor '" + std::string(actor) + "'");
  }
  return it->second;
}

TaskId Runner::task_id(std::string_view task) const {
  auto it = tasks_.find(task);
  if (it == tasks_.end()) {
    throw std::out_of_range("task '" + std::string(task) +
                            "' was not created");
  }
  return it->second;
}

Runner::DeviceSlot& Runner::slot(std::string_view device) {
  return const_cast<DeviceSlot&>(std::as_const(*this).slot(device));
}

const Runner::DeviceSlot& Runner::slot(std::string_view device) const {
  for (const auto& s : devices_) {
    if (s->name == device) return *s;
  }
  throw std::out_of_range("unknown device '" + std::string(device) + "'");
}

DeviceIdentifier Runner::device_id(std::string_view device) const {
  const auto& id = slot(device).agent->identifier();
  if (!id) {
    throw std::out_of_range("device '" + std::string(device) +
                            "' was not provisioned");
  }
  return *id;
}

const agent::DeviceAgent& Runner::agent(std::string_view device) const {
  return *slot(device).agent;
}

const crypto::KeyPair& Runner::creator_key(std::string_view task) const {
  auto it = creator_keys_.find(task);
  if (it == creator_keys_.end()) {
    throw std::out_of_range("no key for task '" + std::string(task) + "'");
  }
  return it->second;
}

std::optional<Bytes> Runner::plaintext_for(std::string_view task) const {
  auto it = tasks_.find(task);
  if (it == tasks_.end()) return std::nullopt;
  for (const auto& a : actions_) {
    if (a.task == it->second && a.kind == agent::ActionKind::Submitted) {
      return a.plaintext;
    }
  }
  return std::nullopt;
}

void Runner::check_expected(const Step& step, const Receipt& receipt) {
  ErrorCode expected = ErrorCode::Ok;
  if (const auto* e = find_arg(step, "expect")) {
    expected = *error_code_from_string(*e);
  }
  if (receipt.status != expected) {
    throw std::runtime_error(
        "expected " + std::string(to_string(expected)) + ", got " +
        (receipt.ok() ? std::string("Ok") : receipt.reason));
  }
}

void Runner::deploy(const Step& step) {
  const auto* who = find_arg(step, "actor");
  const std::string actor = who ? *who : std::string(kDeployer);
  const Address deployer = address_of(actor);
  const auto& g = scenario_.genesis;
  std::optional<ErrorCode> expected;
  if (const auto* e = find_arg(step, "expect")) {
    expected = *error_code_from_string(*e);
  }
  // The system deploys as a unit; an expected failure must occur at some
  // transaction of the sequence, after which the rest is skipped.
  auto run_tx = [&](const Address& target, Call call) {
    auto r = submit(actor, deployer, target, std::move(call));
    if (!r.ok()) {
      if (expected && r.status == *expected) return false;
      throw std::runtime_error("deploy: " + r.reason);
    }
    return true;
  };
  SystemAddresses sys;
  Address* slots[] = {&sys.user_manager, &sys.device_manager,
                      &sys.task_manager, &sys.token_manager};
  for (std::size_t i = 0; i < kManagerKinds.size(); ++i) {
    auto r = submit(actor, deployer, Address{}, DeployManager{kManagerKinds[i]});
    if (!r.ok()) {
      if (expected && r.status == *expected) return;
      throw std::runtime_error("deploy: " + r.reason);
    }
    *slots[i] = *r.created_contract;
  }
  if (!run_tx(sys.token_manager,
              Configure{{{std::string(settings::kTokenPrice), g.token_price},
                         {std::string(settings::kTaskFee), g.task_fee}}})) {
    return;
  }
  if (!run_tx(sys.task_manager,
              Configure{{{std::string(settings::kRespondentRewardPercent),
                          g.respondent_reward_percent}}})) {
    return;
  }
  for (const auto& target : {sys.user_manager, sys.device_manager,
                             sys.task_manager, sys.token_manager}) {
    if (!run_tx(target, sys.init_call())) return;
  }
  if (expected && *expected != ErrorCode::Ok) {
    throw std::runtime_error("expected " + std::string(to_string(*expected)) +
                             ", got Ok");
  }
}

void Runner::execute(const Step& step) {
  const auto& a = step.action;
  auto manager = [&](ContractKind kind) {
    return ledger_->manager_address(kind);
  };
  auto actor_arg = [&] { return arg(step, "actor"); };

  if (a == "deploy") {
    deploy(step);
  } else if (a == "register_user") {
    check_expected(step, submit(actor_arg(), address_of(actor_arg()),
                                manager(ContractKind::UserManager),
                                RegisterUser{}));
  } else if (a == "purchase") {
    check_expected(step, submit(actor_arg(), address_of(actor_arg()),
                                manager(ContractKind::TokenManager),
                                PurchaseTokens{uint_arg(step, "payment")}));
  } else if (a == "register_device") {
    const auto& name = arg(step, "device");
    agent::AgentConfig config;
    config.serial_number = to_bytes(arg(step, "serial"));
    config.owner_address = address_of(actor_arg());
    if (const auto* limits = find_arg(step, "limits")) {
      config.reading_limits = *parse_limits(*limits);
    }
    config.signing_keypair = crypto::generate_keypair(derive("device-key", name));
    config.ephemeral_seed_root = derive("ephemeral", name);
    auto slot = std::make_unique<DeviceSlot>();
    slot->name = name;
    slot->owner = actor_arg();
    slot->sensor = std::make_shared<agent::SimulatedSensor>();
    slot->agent =
        std::make_unique<agent::DeviceAgent>(std::move(config), slot->sensor);
    auto* agent = slot->agent.get();
    devices_.push_back(std::move(slot));

    auto salt_seed = derive("salt", name);
    std::seed_seq seq(salt_seed.begin(), salt_seed.end());
    std::mt19937_64 rng(seq);
    AuditedPort port(*this, actor_arg());
    try {
      agent->provision_identifier(port, rng);
    } catch (const agent::ProvisioningFailed&) {
      if (!port.last()) throw;
    }
    check_expected(step, *port.last());
  } else if (a == "set_device_active") {
    check_expected(step,
                   submit(actor_arg(), address_of(actor_arg()),
                          manager(ContractKind::DeviceManager),
                          SetDeviceActive{device_id(arg(step, "device")),
                                          *parse_bool(arg(step, "active"))}));
  } else if (a == "create_task") {
    const auto& name = arg(step, "task");
    auto key = crypto::generate_keypair(derive("task-key", name));
    CreateTask call;
    call.reward = uint_arg(step, "reward");
    call.block_limit = uint_arg(step, "block_limit");
    if (find_arg(step, "requirement")) {
      call.reputation_requirement = uint_arg(step, "requirement");
    }
    call.creator_public_key = key.public_key;
    const auto* payload = find_arg(step, "payload");
    call.payload = to_bytes(payload ? *payload : kDefaultPayload);
    creator_keys_.emplace(name, std::move(key));
    auto receipt = submit(actor_arg(), address_of(actor_arg()),
                          manager(ContractKind::TaskManager), std::move(call));
    if (receipt.created_task) tasks_.emplace(name, *receipt.created_task);
    check_expected(step, receipt);
  } else if (a == "accept_task") {
    check_expected(step,
                   submit(actor_arg(), address_of(actor_arg()),
                          manager(ContractKind::TaskManager),
                          AcceptTask{task_id(arg(step, "task")),
                                     device_id(arg(step, "device"))}));
  } else if (a == "release_expired") {
    check_expected(step, submit(actor_arg(), address_of(actor_arg()),
                                manager(ContractKind::TaskManager),
                                ReleaseExpired{task_id(arg(step, "task"))}));
  } else if (a == "sensor") {
    slot(arg(step, "device"))
        .sensor->set_value(arg(step, "channel"),
                           *parse_number<double>(arg(step, "value")));
  } else if (a == "run_agent_cycle") {
    const auto* only = find_arg(step, "device");
    agent::StoreUplink store(*store_);
    // Declaration order keeps interleaving deterministic.
    for (auto& s : devices_) {
      if (only && s->name != *only) continue;
      if (!s->agent->identifier()) continue;
      AuditedPort port(*this, "agent:" + s->name);
      auto actions = s->agent->run_cycle(port, store);
      actions_.insert(actions_.end(), actions.begin(), actions.end());
    }
  } else if (a == "advance_blocks") {
    auto n = uint_arg(step, "n");
    if (n == 0) throw std::runtime_error("advance_blocks requires n >= 1");
    ledger_->advance_blocks(n);
  } else if (a == "checkpoint") {
    std::map<Address, Tokens> balances;
    for (const auto& [name, address] : actors_) {
      balances[address] = ledger_->balance_of(address);
    }
    checkpoints_[arg(step, "name")] = std::move(balances);
  } else if (a == "assert") {
    run_assert(step);
  } else {
    throw std::logic_error("unhandled action " + a);
  }
}

void Runner::run_assert(const Step& step) {
  const auto& check = step.positional.front();
  const auto& world = ledger_->world();
  auto expect_eq = [&](auto actual, auto expected, std::string_view what) {
    if (actual != expected) {
      std::ostringstream msg;
      msg << "assertion failed: " << what << " is " << actual << ", expected "
          << expected;
      throw std::runtime_error(msg.str());
    }
  };
  auto value = [&] { return uint_arg(step, "value"); };

  if (check == "balance") {
    const Address who = address_of(arg(step, "actor"));
    const Tokens now = ledger_->balance_of(who);
    if (find_arg(step, "value")) {
      expect_eq(now, value(), "balance");
    } else {
      std::string_view change_text = arg(step, "change");
      if (change_text.front() == '+') change_text.remove_prefix(1);
      auto change = *parse_number<std::int64_t>(change_text);
      const auto& snap = checkpoints_.at(arg(step, "since"));
      auto it = snap.find(who);
      const Tokens then = it == snap.end() ? 0 : it->second;
      expect_eq(static_cast<std::int64_t>(now) - static_cast<std::int64_t>(then),
                change, "balance change");
    }
  } else if (check == "reputation" || check == "notifications") {
    const auto* user = world.users.find(address_of(arg(step, "actor")));
    if (user == nullptr) throw std::runtime_error("actor is not registered");
    if (check == "reputation") {
      expect_eq(user->reputation, value(), "reputation");
    } else {
      expect_eq(static_cast<std::uint64_t>(user->notifications.size()),
                value(), "notification count");
    }
  } else if (check == "burned") {
    expect_eq(world.tokens.burned(), value(), "burned");
  } else if (check == "minted") {
    expect_eq(world.tokens.minted(), value(), "minted");
  } else if (check == "frozen") {
    if (find_arg(step, "task")) {
      expect_eq(world.tokens.frozen_for(task_id(arg(step, "task"))), value(),
                "frozen for task");
    } else {
      expect_eq(world.tokens.total_frozen(), value(), "total frozen");
    }
  } else if (check == "conservation") {
    const auto& t = world.tokens;
    if (!t.conservation_holds()) {
      std::ostringstream msg;
      msg << "conservation violated: minted " << t.minted() << " != balances "
          << t.total_balances() << " + frozen " << t.total_frozen()
          << " + burned " << t.burned();
      throw std::runtime_error(msg.str());
    }
  } else if (check == "phase") {
    const auto* task = world.tasks.find(task_id(arg(step, "task")));
    if (task == nullptr) throw std::runtime_error("task not found");
    expect_eq(std::string(to_string(task->phase)), arg(step, "value"), "phase");
  } else if (check == "resolution") {
    const auto& record = world.tasks.get_completed(task_id(arg(step, "task")));
    expect_eq(std::string(record.completed() ? "completed" : "expired"),
              arg(step, "value"), "resolution");
  } else if (check == "backlog" || check == "completed") {
    const auto* device = world.devices.find(device_id(arg(step, "device")));
    if (device == nullptr) throw std::runtime_error("device not registered");
    if (check == "backlog") {
      expect_eq(static_cast<std::uint64_t>(device->backlog.size()), value(),
                "backlog size");
    } else {
      expect_eq(device->completed_count, value(), "completed count");
    }
  } else if (check == "decrypt") {
    const auto& name = arg(step, "task");
    const auto& record = world.tasks.get_completed(task_id(name));
    const auto* result = std::get_if<TaskResultObject>(&record.result);
    if (result == nullptr) throw std::runtime_error("task has no result");
    auto blob = store_->get(result->encrypted_file_hash);
    auto plaintext =
        agent::open_task_result(blob, *result, creator_key(name).private_key);
    auto original = plaintext_for(name);
    if (!original) throw std::runtime_error("agent produced no plaintext");
    if (plaintext != *original) {
      throw std::runtime_error("decrypted result differs from the original");
    }
    if (const auto* v = find_arg(step, "value")) {
      auto parsed = agent::parse_plaintext_result(plaintext);
      if (!parsed) throw std::runtime_error("result plaintext is malformed");
      expect_eq(parsed->value, *parse_number<double>(*v), "result value");
    }
  } else if (check == "open_tasks") {
    OpenTaskFilter filter;
    if (find_arg(step, "max_requirement")) {
      filter.max_reputation_requirement = uint_arg(step, "max_requirement");
    }
    expect_eq(static_cast<std::uint64_t>(
                  world.tasks.list_open_tasks(ledger_->current_block(), filter)
                      .size()),
              value(), "open task count");
  } else if (check == "event") {
    const auto& topic = arg(step, "topic");
    std::uint64_t count = 0;
    for (const auto& e : world.events) count += e.topic == topic;
    expect_eq(count, uint_arg(step, "count"), topic + " event count");
  } else if (check == "agent_action") {
    const TaskId id = task_id(arg(step, "task"));
    std::optional<agent::ActionKind> kind;
    for (const auto& act : actions_) {
      if (act.task == id) kind = act.kind;
    }
    if (!kind) throw std::runtime_error("no agent action for task");
    expect_eq(std::string(agent::to_string(*kind)), arg(step, "kind"),
              "agent action");
  } else if (check == "instantiations") {
    auto kind = *contract_kind_from_string(arg(step, "kind"));
    auto it = world.instantiations.find(kind);
    expect_eq(it == world.instantiations.end() ? std::uint64_t{0} : it->second,
              uint_arg(step, "count"), "instantiation count");
  } else {
    throw std::logic_error("unhandled check " + check);
  }
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
  Runner runner(scenario, options);
  return runner.run();
}

ReplayResult replay(const std::vector<AuditEntry>& log, const Genesis& genesis,
                    std::uint64_t seed, const ResultStore& store) {
  GenesisConfig config;
  config.seed = seed;
  config.block_interval = genesis.block_interval;
  config.usd_per_100k_gas = genesis.usd_per_100k_gas;
  Ledger ledger(config);
  ledger.set_content_oracle(
      [&store](const ContentHash& h) { return store.has(h); });
  ReplayResult result;
  for (const auto& entry : log) {
    const BlockNumber now = ledger.current_block();
    if (entry.block < now) {
      result.divergent_entries.push_back(entry.seq);
      continue;
    }
    if (entry.block > now) ledger.advance_blocks(entry.block - now);
    Receipt receipt;
    try {
      receipt = ledger.submit(Transaction{entry.sender, entry.target,
                                          decode_call(entry.action, entry.args),
                                          entry.block});
    } catch (const Revert& malformed) {
      receipt.status = malformed.code();
    }
    if (receipt.status != entry.outcome || receipt.gas != entry.gas ||
        receipt.events != entry.events) {
      result.divergent_entries.push_back(entry.seq);
    }
  }
  result.digest = ledger.state_digest();
  return result;
}

}  // namespace iotchain::scenario
