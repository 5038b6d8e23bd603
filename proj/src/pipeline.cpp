#include "dcm/pipeline.hpp"

namespace dcm {

Dataset load_dataset(const std::filesystem::path& messages_path,
                     const std::filesystem::path& events_path,
                     const std::optional<std::filesystem::path>& contacts_path) {
  Dataset dataset;
  dataset.messages = load_messages(messages_path);
  dataset.events = load_events(events_path);
  std::vector<ContactProfile> contacts;
  if (contacts_path) contacts = load_contacts(*contacts_path);
  dataset.validation = validate_dataset(dataset.messages, dataset.events, contacts);
  return dataset;
}

Dataset dataset_from_sim(const SimResult& sim) {
  Dataset dataset;
  dataset.messages = sim.messages;
  dataset.events = sim.events;
  dataset.validation = validate_dataset(dataset.messages, dataset.events, sim.contacts);
  return dataset;
}

SimAdapter write_sim_outputs(const SimResult& sim, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  SimAdapter paths;
  paths.messages_path = out_dir / "messages.jsonl";
  paths.events_path = out_dir / "events.jsonl";
  paths.contacts_path = out_dir / "contacts.jsonl";
  paths.ground_truth_path = out_dir / "ground_truth.json";
  save_messages(sim.messages, paths.messages_path);
  save_events(sim.events, paths.events_path);
  save_contacts(sim.contacts, paths.contacts_path);
  save_ground_truth(sim.truth, paths.ground_truth_path);
  return paths;
}

}  // namespace dcm
