#include "random_config.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace jessy::testing {

namespace {

// a, b, ..., z, aa, ab, ...: digit-free so rendered versions stay unambiguous.
std::string letters(std::size_t n) {
  std::string out;
  for (++n; n > 0; n = (n - 1) / 26) out.insert(out.begin(), static_cast<char>('a' + (n - 1) % 26));
  return out;
}

Topology build(std::mt19937_64& rng, const std::vector<std::size_t>& members, const std::vector<std::size_t>& objects,
               std::size_t extra_processes, bool merge_classes) {
  Topology topo;
  std::vector<Group> groups;
  std::vector<std::uint32_t> cls;
  ProcessId next = 0;
  for (std::size_t g = 0; g < members.size(); ++g) {
    Group group;
    group.id = static_cast<GroupId>(g);
    for (std::size_t m = 0; m < members[g]; ++m) group.members.push_back(next++);
    for (std::size_t k = 0; k < objects[g]; ++k) {
      const auto x = static_cast<std::uint32_t>(topo.objects.size());
      group.objects.push_back(x);
      topo.objects.push_back(letters(x));
      topo.placement.push_back(group.id);
      const bool join = merge_classes && k > 0 && std::bernoulli_distribution(0.5)(rng);
      cls.push_back(join ? cls.back() : static_cast<std::uint32_t>(x));
    }
    groups.push_back(std::move(group));
  }
  // Renumber classes densely in first-appearance order.
  std::vector<std::uint32_t> dense(cls.size(), ~std::uint32_t{0});
  std::uint32_t count = 0;
  for (auto& c : cls) {
    if (dense[c] == ~std::uint32_t{0}) dense[c] = count++;
    c = dense[c];
  }
  topo.processes = next + extra_processes;
  topo.directory = Directory(std::move(groups));
  topo.partition = Partition(std::move(cls));
  return topo;
}

void random_workload(std::mt19937_64& rng, SimConfig& cfg) {
  const std::size_t n = cfg.topology.objects.size();
  WorkloadConfig& w = cfg.workload;
  w.txn_count = std::uniform_int_distribution<std::size_t>(5, 34)(rng);
  w.ops_per_txn = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(n, 4))(rng);
  w.arrival_window = std::uniform_int_distribution<Tick>(0, 40)(rng);
  w.read_only_fraction = 0.3;
  w.write_probability = 0.7;
  if (std::bernoulli_distribution(0.3)(rng)) w.distribution = AccessDistribution::kZipf;
}

}  // namespace

Topology grid_topology(std::size_t groups, std::size_t members, std::size_t objects_per_group) {
  std::mt19937_64 unused;
  return build(unused, std::vector<std::size_t>(groups, members), std::vector<std::size_t>(groups, objects_per_group), 0,
               false);
}

SimConfig random_sim_config(std::uint64_t seed, VectorMode mode) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(mode));
  const std::size_t groups = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
  std::vector<std::size_t> members;
  std::vector<std::size_t> objects;
  for (std::size_t g = 0; g < groups; ++g) {
    members.push_back(std::uniform_int_distribution<std::size_t>(1, 3)(rng));
    objects.push_back(std::uniform_int_distribution<std::size_t>(1, 3)(rng));
  }
  SimConfig cfg;
  cfg.seed = seed;
  cfg.mode = mode;
  cfg.delta = std::uniform_int_distribution<Tick>(1, 3)(rng);
  cfg.topology = build(rng, members, objects, std::bernoulli_distribution(0.3)(rng) ? 1 : 0, mode == VectorMode::kPdv);
  random_workload(rng, cfg);
  cfg.validate();
  return cfg;
}

SimConfig random_faulty_config(std::uint64_t seed, VectorMode mode) {
  std::mt19937_64 rng(seed * 0xbf58476d1ce4e5b9ULL + static_cast<std::uint64_t>(mode));
  const std::size_t groups = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  std::vector<std::size_t> objects;
  for (std::size_t g = 0; g < groups; ++g) objects.push_back(std::uniform_int_distribution<std::size_t>(1, 3)(rng));
  SimConfig cfg;
  cfg.seed = seed;
  cfg.mode = mode;
  cfg.topology = build(rng, std::vector<std::size_t>(groups, 3), objects, 0, mode == VectorMode::kPdv);
  random_workload(rng, cfg);
  for (const Group& g : cfg.topology.directory.groups())
    cfg.faults.push_back(Fault{std::uniform_int_distribution<Tick>(0, 30)(rng), g.members.back()});
  cfg.validate();
  return cfg;
}

}  // namespace jessy::testing
