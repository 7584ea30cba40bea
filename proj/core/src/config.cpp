#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "jessy/error.hpp"
#include "jessy/sim.hpp"

namespace jessy {

namespace {

void only_keys(const toml::table& t, std::string_view where, std::initializer_list<std::string_view> keys) {
  const std::set<std::string_view> allowed(keys);
  for (auto&& [k, v] : t)
    if (!allowed.count(k.str())) throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + std::string(where));
}

template <class T>
T required(const toml::node_view<const toml::node>& n, std::string_view what) {
  auto v = n.value<T>();
  if (!v) throw ConfigError("missing or mistyped '" + std::string(what) + "'");
  return *v;
}

template <class T>
T optional(const toml::node_view<const toml::node>& n, std::string_view what, T fallback) {
  if (!n) return fallback;
  return required<T>(n, what);
}

std::uint64_t natural(const toml::node_view<const toml::node>& n, std::string_view what, std::int64_t fallback) {
  const std::int64_t v = optional<std::int64_t>(n, what, fallback);
  if (v < 0) throw ConfigError("'" + std::string(what) + "' must not be negative");
  return static_cast<std::uint64_t>(v);
}

const toml::array& array_at(const toml::node_view<const toml::node>& n, std::string_view what) {
  const toml::array* a = n.as_array();
  if (!a) throw ConfigError("'" + std::string(what) + "' must be an array");
  return *a;
}

std::vector<std::string> strings(const toml::node& n, std::string_view what) {
  const toml::array* a = n.as_array();
  if (!a) throw ConfigError("'" + std::string(what) + "' must be an array of strings");
  std::vector<std::string> out;
  for (const toml::node& e : *a) {
    auto s = e.value<std::string>();
    if (!s) throw ConfigError("'" + std::string(what) + "' must be an array of strings");
    out.push_back(*s);
  }
  return out;
}

}  // namespace

SimConfig parse_config(std::string_view text) {
  toml::table doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  only_keys(doc, "config",
            {"processes", "seed", "delta", "vector_mode", "groups", "workload", "partition", "faults", "transactions"});
  const toml::node_view<const toml::node> root{static_cast<const toml::node&>(doc)};

  SimConfig cfg;
  cfg.seed = natural(root["seed"], "seed", 1);
  cfg.delta = natural(root["delta"], "delta", 1);
  const std::string mode = optional<std::string>(root["vector_mode"], "vector_mode", "dv");
  if (mode == "dv") cfg.mode = VectorMode::kDv;
  else if (mode == "pdv") cfg.mode = VectorMode::kPdv;
  else throw ConfigError("vector_mode must be \"dv\" or \"pdv\"");

  Topology& topo = cfg.topology;
  std::map<std::string, std::uint32_t> object_ids;
  std::vector<Group> groups;
  ProcessId max_member = 0;
  for (const toml::node& g : array_at(root["groups"], "groups")) {
    const toml::table* t = g.as_table();
    if (!t) throw ConfigError("every [[groups]] entry must be a table");
    only_keys(*t, "[[groups]]", {"members", "objects"});
    Group group;
    group.id = static_cast<GroupId>(groups.size());
    const toml::array* members = (*t)["members"].as_array();
    if (!members) throw ConfigError("group " + std::to_string(group.id) + " needs members");
    for (const toml::node& m : *members) {
      auto p = m.value<std::int64_t>();
      if (!p || *p < 0) throw ConfigError("group members must be process numbers");
      group.members.push_back(static_cast<ProcessId>(*p));
      max_member = std::max(max_member, static_cast<ProcessId>(*p));
    }
    if (!(*t)["objects"]) throw ConfigError("group " + std::to_string(group.id) + " needs objects");
    for (const std::string& name : strings(*(*t)["objects"].node(), "objects")) {
      if (name.empty()) throw ConfigError("object names must be non-empty");
      auto [it, fresh] = object_ids.emplace(name, static_cast<std::uint32_t>(topo.objects.size()));
      if (!fresh) throw ConfigError("object '" + name + "' placed in two groups");
      topo.objects.push_back(name);
      topo.placement.push_back(group.id);
      group.objects.push_back(it->second);
    }
    groups.push_back(std::move(group));
  }
  topo.processes = natural(root["processes"], "processes", groups.empty() ? 0 : max_member + 1);
  topo.directory = Directory(std::move(groups));

  if (const toml::table* part = doc["partition"].as_table()) {
    only_keys(*part, "[partition]", {"classes"});
    std::vector<std::uint32_t> class_of(topo.objects.size(), ~std::uint32_t{0});
    std::uint32_t next = 0;
    for (const toml::node& cls : array_at(toml::node_view<const toml::node>{(*part)["classes"].node()}, "classes")) {
      for (const std::string& name : strings(cls, "classes")) {
        auto it = object_ids.find(name);
        if (it == object_ids.end()) throw ConfigError("partition names unknown object '" + name + "'");
        if (class_of[it->second] != ~std::uint32_t{0}) throw ConfigError("object '" + name + "' is in two classes");
        class_of[it->second] = next;
      }
      ++next;
    }
    for (std::uint32_t x = 0; x < class_of.size(); ++x)
      if (class_of[x] == ~std::uint32_t{0}) class_of[x] = next++;
    topo.partition = Partition(std::move(class_of));
  } else {
    topo.partition = Partition::singletons(topo.objects.size());
  }

  if (const toml::table* w = doc["workload"].as_table()) {
    only_keys(*w, "[workload]",
              {"txn_count", "read_only_fraction", "ops_per_txn", "write_probability", "distribution", "zipf_s",
               "arrival_window"});
    const toml::node_view<const toml::node> wv{static_cast<const toml::node&>(*w)};
    WorkloadConfig& wl = cfg.workload;
    wl.txn_count = natural(wv["txn_count"], "txn_count", static_cast<std::int64_t>(wl.txn_count));
    wl.read_only_fraction = optional<double>(wv["read_only_fraction"], "read_only_fraction", wl.read_only_fraction);
    wl.ops_per_txn = natural(wv["ops_per_txn"], "ops_per_txn", static_cast<std::int64_t>(wl.ops_per_txn));
    wl.write_probability = optional<double>(wv["write_probability"], "write_probability", wl.write_probability);
    const std::string dist = optional<std::string>(wv["distribution"], "distribution", "uniform");
    if (dist == "uniform") wl.distribution = AccessDistribution::kUniform;
    else if (dist == "zipf") wl.distribution = AccessDistribution::kZipf;
    else throw ConfigError("distribution must be \"uniform\" or \"zipf\"");
    wl.zipf_s = optional<double>(wv["zipf_s"], "zipf_s", wl.zipf_s);
    wl.arrival_window = natural(wv["arrival_window"], "arrival_window", static_cast<std::int64_t>(wl.arrival_window));
  }

  if (root["faults"]) {
    for (const toml::node& f : array_at(root["faults"], "faults")) {
      const toml::table* t = f.as_table();
      if (!t) throw ConfigError("every [[faults]] entry must be a table");
      only_keys(*t, "[[faults]]", {"tick", "process"});
      const toml::node_view<const toml::node> fv{static_cast<const toml::node&>(*t)};
      cfg.faults.push_back(Fault{natural(fv["tick"], "tick", 0),
                                 static_cast<ProcessId>(required<std::int64_t>(fv["process"], "process"))});
    }
  }

  if (root["transactions"]) {
    std::uint32_t next = 1;
    for (const toml::node& n : array_at(root["transactions"], "transactions")) {
      const toml::table* t = n.as_table();
      if (!t) throw ConfigError("every [[transactions]] entry must be a table");
      only_keys(*t, "[[transactions]]", {"coord", "start", "ops"});
      const toml::node_view<const toml::node> tv{static_cast<const toml::node&>(*t)};
      TxnPlan plan;
      plan.id = TxnId{next++};
      plan.coord = static_cast<ProcessId>(required<std::int64_t>(tv["coord"], "coord"));
      plan.start = natural(tv["start"], "start", 0);
      if (!tv["ops"]) throw ConfigError("scripted transaction needs ops");
      for (const std::string& op : strings(*tv["ops"].node(), "ops")) {
        std::istringstream in(op);
        std::string kind;
        std::string object;
        if (!(in >> kind >> object) || (kind != "r" && kind != "w"))
          throw ConfigError("scripted op '" + op + "' must look like \"r x\" or \"w x\"");
        auto it = object_ids.find(object);
        if (it == object_ids.end()) throw ConfigError("scripted op names unknown object '" + object + "'");
        plan.ops.push_back(PlannedOp{kind == "r" ? OpKind::kRead : OpKind::kWrite, it->second,
                                     static_cast<std::int64_t>(plan.id.value)});
      }
      cfg.scripted.push_back(std::move(plan));
    }
  }

  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace jessy
