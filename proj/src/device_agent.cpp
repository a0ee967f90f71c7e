#include "iotchain/device_agent.hpp"

#include <charconv>
#include <sstream>

#include "iotchain/registry.hpp"

namespace iotchain::agent {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

// key=value lines after a header line.
std::optional<std::map<std::string, std::string, std::less<>>> parse_fields(
    std::string_view text, std::string_view header) {
  auto lines = split(text, '\n');
  if (lines.empty() || lines.front() != header) return std::nullopt;
  std::map<std::string, std::string, std::less<>> fields;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = lines[i];
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    fields.emplace(std::string(line.substr(0, eq)),
                   std::string(line.substr(eq + 1)));
  }
  return fields;
}

}  // namespace

ReadingVerdict validate_reading(const SensorReading& reading,
                                const ReadingLimits& limits) {
  if (reading.value >= limits.min && reading.value <= limits.max) {
    return {true, {}};
  }
  return {false, "reading " + format_double(reading.value) + " on '" +
                     reading.channel + "' outside [" +
                     format_double(limits.min) + ", " +
                     format_double(limits.max) + "]"};
}

std::optional<double> SimulatedSensor::read(std::string_view channel) {
  auto it = values_.find(channel);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

bool SimulatedSensor::actuate(std::string_view channel, double value) {
  actuators_[std::string(channel)] = value;
  return true;
}

std::optional<double> SimulatedSensor::actuator_state(
    std::string_view channel) const {
  auto it = actuators_.find(channel);
  if (it == actuators_.end()) return std::nullopt;
  return it->second;
}

std::optional<TaskCommand> parse_command(ByteView payload) {
  std::istringstream in(iotchain::to_string(payload));
  TaskCommand cmd;
  if (!(in >> cmd.operation)) return std::nullopt;
  std::string token;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) return std::nullopt;
    cmd.params[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return cmd;
}

Bytes make_read_command(std::string_view channel) {
  return to_bytes("read channel=" + std::string(channel));
}

Bytes make_set_command(std::string_view channel, double value) {
  return to_bytes("set channel=" + std::string(channel) +
                  " value=" + format_double(value));
}

Bytes format_plaintext_result(const PlaintextResult& r) {
  std::string text(kPlaintextResultMagic);
  text += "\ntask=" + std::to_string(r.task.value);
  text += "\ndevice=" + r.device.hex();
  text += "\noperation=" + r.operation;
  text += "\nchannel=" + r.channel;
  text += "\nvalue=" + format_double(r.value);
  text += "\nblock=" + std::to_string(r.block);
  text += "\n";
  return to_bytes(text);
}

std::optional<PlaintextResult> parse_plaintext_result(ByteView bytes) {
  auto fields = parse_fields(iotchain::to_string(bytes), kPlaintextResultMagic);
  if (!fields) return std::nullopt;
  auto get = [&](std::string_view key) -> std::optional<std::string> {
    auto it = fields->find(key);
    if (it == fields->end()) return std::nullopt;
    return it->second;
  };
  auto task = get("task");
  auto device = get("device");
  auto op = get("operation");
  auto channel = get("channel");
  auto value = get("value");
  auto block = get("block");
  if (!task || !device || !op || !channel || !value || !block) {
    return std::nullopt;
  }
  PlaintextResult r;
  auto task_id = parse_u64(*task);
  auto v = parse_double(*value);
  auto b = parse_u64(*block);
  if (!task_id || !v || !b) return std::nullopt;
  try {
    r.device = DeviceIdentifier::from_hex(*device);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  r.task = TaskId{*task_id};
  r.operation = *op;
  r.channel = *channel;
  r.value = *v;
  r.block = *b;
  return r;
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Submitted:
      return "Submitted";
    case ActionKind::SubmitRejected:
      return "SubmitRejected";
    case ActionKind::OutlierRejected:
      return "OutlierRejected";
    case ActionKind::PayloadRejected:
      return "PayloadRejected";
    case ActionKind::SensorUnavailable:
      return "SensorUnavailable";
    case ActionKind::SealingFailed:
      return "SealingFailed";
    case ActionKind::Skipped:
      return "Skipped";
  }
  return "Unknown";
}

DeviceAgent::DeviceAgent(AgentConfig config, std::shared_ptr<Sensor> sensor)
    : config_(std::move(config)), sensor_(std::move(sensor)) {
  if (!sensor_) throw std::invalid_argument("agent requires a sensor");
  for (const auto& [channel, limits] : config_.reading_limits) {
    if (!(limits.min <= limits.max)) {
      throw std::invalid_argument("limits for '" + channel +
                                  "' must satisfy min <= max");
    }
  }
}

DeviceIdentifier DeviceAgent::provision_identifier(LedgerPort& ledger,
                                                   std::mt19937_64& rng) {
  if (config_.identifier) return *config_.identifier;
  const Address device_manager =
      ledger.manager_address(ContractKind::DeviceManager);
  for (int attempt = 0; attempt < kMaxProvisioningAttempts; ++attempt) {
    ++provisioning_attempts_;
    Bytes salt;
    while (salt.size() < kDeviceSaltSize) append_u64_be(salt, rng());
    auto id = device_identifier_for(config_.serial_number, salt);
    auto receipt = ledger.submit(Transaction{
        config_.owner_address, device_manager,
        RegisterDevice{id, config_.signing_keypair.public_key},
        ledger.current_block()});
    if (receipt.ok()) {
      config_.identifier = id;
      return id;
    }
    if (receipt.status != ErrorCode::DuplicateIdentifier) {
      throw ProvisioningFailed("device registration failed: " +
                               receipt.reason);
    }
  }
  throw ProvisioningFailed("no unique identifier after " +
                           std::to_string(kMaxProvisioningAttempts) +
                           " attempts");
}

std::vector<AgentAction> DeviceAgent::run_cycle(LedgerPort& ledger,
                                                StorePort& store) {
  if (!config_.identifier) {
    throw std::logic_error("run_cycle before provisioning");
  }
  const std::string my_id = config_.identifier->hex();
  std::vector<AgentAction> actions;
  auto events = ledger.poll_events(
      cursor_, TopicSet{std::string(topics::kBacklogAssigned)});
  for (const auto& event : events) {
    if (event.cursor() > cursor_) cursor_ = event.cursor();
    auto device = event.payload.find("device");
    auto task = event.payload.find("task");
    if (device == event.payload.end() || task == event.payload.end() ||
        device->second != my_id) {
      continue;
    }
    auto task_id = parse_u64(task->second);
    if (!task_id) continue;
    // At-least-once delivery: dedupe by task reference.
    if (!executed_.insert(TaskId{*task_id}).second) continue;
    actions.push_back(execute(ledger, store, TaskId{*task_id}));
  }
  return actions;
}

AgentAction DeviceAgent::execute(LedgerPort& ledger, StorePort& store,
                                 TaskId task_id) {
  AgentAction action;
  action.task = task_id;
  auto task = ledger.fetch_task(task_id);
  const BlockNumber block = ledger.current_block();
  if (!task || task->phase != TaskPhase::Accepted ||
      task->device != config_.identifier) {
    action.kind = ActionKind::Skipped;
    action.detail = "task is not assigned to this device";
    return action;
  }
  if (task->expired_at(block)) {
    action.kind = ActionKind::Skipped;
    action.detail = "task expired at block " +
                    std::to_string(task->expiry_block);
    return action;
  }
  auto cmd = parse_command(task->params.payload);
  if (!cmd || (cmd->operation != "read" && cmd->operation != "set") ||
      !cmd->params.contains("channel")) {
    action.kind = ActionKind::PayloadRejected;
    action.detail = "unsupported task payload";
    return action;
  }
  const std::string channel = cmd->params["channel"];
  auto limits = config_.reading_limits.find(channel);
  if (limits == config_.reading_limits.end()) {
    action.kind = ActionKind::PayloadRejected;
    action.detail = "no limits configured for channel '" + channel + "'";
    return action;
  }

  std::optional<double> value;
  if (cmd->operation == "read") {
    value = sensor_->read(channel);
  } else if (auto requested = parse_double(cmd->params["value"])) {
    value = requested;
  } else {
    action.kind = ActionKind::PayloadRejected;
    action.detail = "set requires a numeric value";
    return action;
  }
  if (!value) {
    action.kind = ActionKind::SensorUnavailable;
    action.detail = "no reading on channel '" + channel + "'";
    return action;
  }
  auto verdict =
      validate_reading(SensorReading{channel, *value, block}, limits->second);
  if (!verdict.accepted) {
    action.kind = ActionKind::OutlierRejected;
    action.detail = verdict.reason;
    return action;
  }
  if (cmd->operation == "set" && !sensor_->actuate(channel, *value)) {
    action.kind = ActionKind::SensorUnavailable;
    action.detail = "actuator refused '" + channel + "'";
    return action;
  }

  action.plaintext = format_plaintext_result(PlaintextResult{
      task_id, *config_.identifier, cmd->operation, channel, *value, block});
  TaskResultObject result;
  try {
    result = package_result(*task, action.plaintext, config_.signing_keypair,
                            ephemeral_seed_for(task_id), store);
  } catch (const SealingFailure& e) {
    action.kind = ActionKind::SealingFailed;
    action.detail = e.what();
    return action;
  }
  action.result_hash = result.encrypted_file_hash;
  auto receipt = ledger.submit(Transaction{
      config_.owner_address, ledger.manager_address(ContractKind::TaskManager),
      SubmitResult{task_id, *config_.identifier, result}, block});
  action.kind = receipt.ok() ? ActionKind::Submitted
                             : ActionKind::SubmitRejected;
  action.detail = receipt.ok() ? "submitted" : receipt.reason;
  return action;
}

std::optional<crypto::Seed> DeviceAgent::ephemeral_seed_for(
    TaskId task) const {
  if (!config_.ephemeral_seed_root) return std::nullopt;
  Bytes material(config_.ephemeral_seed_root->begin(),
                 config_.ephemeral_seed_root->end());
  append(material, as_bytes("ephemeral/"));
  append_u64_be(material, task.value);
  return crypto::derive_seed(material);
}

TaskResultObject package_result(const TaskRecord& task, ByteView plaintext,
                                const crypto::KeyPair& device_key,
                                const std::optional<crypto::Seed>& seed,
                                StorePort& store) {
  crypto::SealedEnvelope envelope;
  try {
    envelope = seed ? crypto::seal(plaintext, task.params.creator_public_key,
                                   *seed)
                    : crypto::seal(plaintext, task.params.creator_public_key);
  } catch (const crypto::MalformedKey& e) {
    throw SealingFailure(std::string("cannot seal to creator key: ") +
                         e.what());
  }
  TaskResultObject result;
  result.encrypted_file_hash = store.put(envelope.serialize());
  result.device_public_key = envelope.ephemeral_public_key;
  result.signature = crypto::sign(
      TaskResultObject::signing_message(task.id, result.encrypted_file_hash,
                                        result.device_public_key),
      device_key.private_key);
  return result;
}

std::string DeviceAgent::save_state() const {
  std::string out = "iotchain-agent-state 1\n";
  out += "serial=" + to_hex(config_.serial_number) + "\n";
  out += "owner=" + config_.owner_address.hex() + "\n";
  out += "poll_interval_ms=" + std::to_string(config_.poll_interval.count()) +
         "\n";
  out += "signing_secret=" + to_hex(config_.signing_keypair.private_key.view()) +
         "\n";
  if (config_.identifier) {
    out += "identifier=" + config_.identifier->hex() + "\n";
  }
  if (config_.ephemeral_seed_root) {
    out += "ephemeral_root=" + to_hex(*config_.ephemeral_seed_root) + "\n";
  }
  for (const auto& [channel, limits] : config_.reading_limits) {
    out += "limit." + channel + "=" + format_double(limits.min) + ":" +
           format_double(limits.max) + "\n";
  }
  out += "cursor=" + std::to_string(cursor_.block) + ":" +
         std::to_string(cursor_.sequence) + "\n";
  std::string executed;
  for (auto t : executed_) {
    if (!executed.empty()) executed += ',';
    executed += std::to_string(t.value);
  }
  out += "executed=" + executed + "\n";
  return out;
}

DeviceAgent DeviceAgent::load_state(std::string_view text,
                                    std::shared_ptr<Sensor> sensor) {
  auto fields = parse_fields(text, "iotchain-agent-state 1");
  if (!fields) {
    throw std::runtime_error("agent state: unsupported header or malformed line");
  }
  auto require = [&](std::string_view key) -> const std::string& {
    auto it = fields->find(key);
    if (it == fields->end()) {
      throw std::runtime_error("agent state: missing field '" +
                               std::string(key) + "'");
    }
    return it->second;
  };
  try {
    AgentConfig config;
    config.serial_number = from_hex(require("serial"));
    config.owner_address = Address::from_hex(require("owner"));
    auto interval = parse_u64(require("poll_interval_ms"));
    if (!interval) throw std::runtime_error("agent state: bad poll_interval_ms");
    config.poll_interval = std::chrono::milliseconds(*interval);
    auto secret = from_hex(require("signing_secret"));
    if (secret.size() != 64) {
      throw std::runtime_error("agent state: signing_secret must be 64 bytes");
    }
    std::array<std::uint8_t, 64> sk{};
    std::copy(secret.begin(), secret.end(), sk.begin());
    config.signing_keypair.private_key = crypto::SecretKey(sk);
    config.signing_keypair.public_key =
        crypto::public_key_of(config.signing_keypair.private_key);
    if (auto it = fields->find("identifier"); it != fields->end()) {
      config.identifier = DeviceIdentifier::from_hex(it->second);
    }
    if (auto it = fields->find("ephemeral_root"); it != fields->end()) {
      auto root = from_hex(it->second);
      if (root.size() != 32) {
        throw std::runtime_error("agent state: ephemeral_root must be 32 bytes");
      }
      crypto::Seed seed{};
      std::copy(root.begin(), root.end(), seed.begin());
      config.ephemeral_seed_root = seed;
    }
    for (const auto& [key, value] : *fields) {
      if (!key.starts_with("limit.")) continue;
      auto parts = split(value, ':');
      std::optional<double> lo, hi;
      if (parts.size() == 2) {
        lo = parse_double(parts[0]);
        hi = parse_double(parts[1]);
      }
      if (!lo || !hi) throw std::runtime_error("agent state: bad " + key);
      config.reading_limits[key.substr(6)] = ReadingLimits{*lo, *hi};
    }

    DeviceAgent agent(std::move(config), std::move(sensor));
    auto cursor = split(require("cursor"), ':');
    std::optional<std::uint64_t> block, seq;
    if (cursor.size() == 2) {
      block = parse_u64(cursor[0]);
      seq = parse_u64(cursor[1]);
    }
    if (!block || !seq) throw std::runtime_error("agent state: bad cursor");
    agent.cursor_ = EventCursor{*block, static_cast<std::uint32_t>(*seq)};
    const auto& executed = require("executed");
    if (!executed.empty()) {
      for (auto part : split(executed, ',')) {
        auto id = parse_u64(part);
        if (!id) throw std::runtime_error("agent state: bad executed list");
        agent.executed_.insert(TaskId{*id});
      }
    }
    return agent;
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("agent state: ") + e.what());
  }
}

Bytes open_task_result(ByteView blob, const TaskResultObject& result,
                       const crypto::SecretKey& creator_key) {
  auto envelope = crypto::SealedEnvelope::parse(blob);
  if (envelope.ephemeral_public_key != result.device_public_key) {
    throw crypto::DecryptionFailure(
        "envelope key does not match the result object");
  }
  return crypto::open(envelope, creator_key);
}

}  // namespace iotchain::agent
