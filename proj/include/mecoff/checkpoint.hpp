#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecoff/actor.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/mlp.hpp"

namespace mecoff {

inline constexpr int kCheckpointVersion = 1;

/// Serializes network parameters, optimizer moments and the replay memory
/// so a trained policy can be reloaded for evaluation or comparison runs.
inline void save_checkpoint(const std::string& path, const Mlp& net, const Adam& adam,
                            const ReplayMemory& memory) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = net.layer_sizes();
  j["params"] = net.params();
  nlohmann::json opt;
  opt["lr"] = adam.learning_rate();
  opt["step"] = adam.step_count();
  opt["m"] = adam.first_moment();
  opt["v"] = adam.second_moment();
  j["adam"] = std::move(opt);
  nlohmann::json mem;
  mem["capacity"] = memory.capacity();
  mem["cursor"] = memory.write_cursor();
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < memory.size(); ++i) {
    nlohmann::json e;
    e["f"] = memory.entry(i).features;
    e["a"] = memory.entry(i).action;
    entries.push_back(std::move(e));
  }
  mem["entries"] = std::move(entries);
  j["memory"] = std::move(mem);

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out << j.dump();
}

struct Checkpoint {
  Mlp net;
  Adam adam;
  ReplayMemory memory;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw ConfigError("checkpoint " + path + " is not valid JSON: " + ex.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion)
    throw ConfigError("checkpoint " + path + " has an unsupported version");

  Mlp net(j.at("layer_sizes").get<std::vector<int>>());
  net.params() = j.at("params").get<std::vector<double>>();
  if (net.params().size() != net.parameter_count())
    throw ConfigError("checkpoint parameter vector has the wrong length");

  const auto& opt = j.at("adam");
  Adam adam(net.parameter_count(), opt.at("lr").get<double>());
  adam.first_moment() = opt.at("m").get<std::vector<double>>();
  adam.second_moment() = opt.at("v").get<std::vector<double>>();
  adam.set_step_count(opt.at("step").get<long>());
  if (adam.first_moment().size() != net.parameter_count() ||
      adam.second_moment().size() != net.parameter_count())
    throw ConfigError("checkpoint optimizer state has the wrong length");

  const auto& mem = j.at("memory");
  ReplayMemory memory(mem.at("capacity").get<std::size_t>());
  for (const auto& e : mem.at("entries"))
    memory.push(e.at("f").get<std::vector<double>>(),
                e.at("a").get<std::vector<std::uint8_t>>());
  memory.set_write_cursor(mem.at("cursor").get<std::size_t>());

  return Checkpoint{std::move(net), std::move(adam), std::move(memory)};
}

}  // namespace mecoff
