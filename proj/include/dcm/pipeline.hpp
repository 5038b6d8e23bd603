#pragma once

#include <filesystem>
#include <optional>

#include "dcm/config.hpp"
#include "dcm/logs.hpp"
#include "dcm/match.hpp"
#include "dcm/simulate.hpp"

namespace dcm {

struct Dataset {
  MessageLog messages;
  EventLog events;
  ValidationReport validation;  // validation.resolved feeds the matcher
};

Dataset load_dataset(const std::filesystem::path& messages_path,
                     const std::filesystem::path& events_path,
                     const std::optional<std::filesystem::path>& contacts_path);

// In-memory dataset straight from a simulation result.
Dataset dataset_from_sim(const SimResult& sim);

// simulate -> messages.jsonl, events.jsonl, contacts.jsonl, ground_truth.json
struct SimAdapter {
  std::filesystem::path messages_path;
  std::filesystem::path events_path;
  std::filesystem::path contacts_path;
  std::filesystem::path ground_truth_path;
};
SimAdapter write_sim_outputs(const SimResult& sim, const std::filesystem::path& out_dir);

}  // namespace dcm
