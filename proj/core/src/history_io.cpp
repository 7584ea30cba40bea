#include "jessy/history_io.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "jessy/error.hpp"

namespace jessy {

namespace {

bool is_label(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c); });
}

bool is_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c); });
}

bool is_numeric(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_underscore(std::string_view label) {
  if (!label.empty() && label.front() == '_') label.remove_prefix(1);
  return label;
}

void parse_token(HistoryBuilder& b, std::string_view token) {
  const std::string where = " in token '" + std::string(token) + "'";
  if (token.empty()) throw ParseError("empty token");
  const char kind = token.front();
  std::string_view rest = token.substr(1);
  if (kind == 'c' || kind == 'a') {
    rest = strip_underscore(rest);
    if (!is_label(rest) || rest == "0") throw ParseError("bad transaction label" + where);
    TxnId t = b.txn(rest);
    kind == 'c' ? b.commit(t) : b.abort(t);
    return;
  }
  if (kind != 'r' && kind != 'w') throw ParseError("unknown operation kind" + where);
  const auto open = rest.find('(');
  if (open == std::string_view::npos || rest.back() != ')') throw ParseError("missing parentheses" + where);
  std::string_view label = strip_underscore(rest.substr(0, open));
  std::string_view arg = rest.substr(open + 1, rest.size() - open - 2);
  if (!is_label(label) || label == "0") throw ParseError("bad transaction label" + where);
  TxnId t = b.txn(label);
  if (kind == 'w') {
    // The write's version label is implied; accept "w1(x)" and "w1(x1)".
    std::size_t end = 0;
    while (end < arg.size() && std::isalpha(static_cast<unsigned char>(arg[end]))) ++end;
    std::string_view suffix = arg.substr(end);
    if (!suffix.empty() && strip_underscore(suffix) != label) throw ParseError("write names a foreign version" + where);
    if (!is_name(arg.substr(0, end))) throw ParseError("bad object name" + where);
    b.write(t, b.object(arg.substr(0, end)));
    return;
  }
  std::string_view object;
  std::string_view version;
  if (auto us = arg.rfind('_'); us != std::string_view::npos) {
    object = arg.substr(0, us);
    version = arg.substr(us + 1);
  } else {
    std::size_t end = 0;
    while (end < arg.size() && std::isalpha(static_cast<unsigned char>(arg[end]))) ++end;
    object = arg.substr(0, end);
    version = arg.substr(end);
    if (!is_numeric(version)) throw ParseError("read needs a version label" + where);
  }
  if (!is_name(object)) throw ParseError("bad object name" + where);
  if (!is_label(version)) throw ParseError("bad version label" + where);
  ObjectId x = b.object(object);
  b.read(t, x, b.txn(version));
}

std::vector<std::size_t> total_order(const History& h) {
  std::vector<std::size_t> order(h.op_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&h](std::size_t a, std::size_t b) { return h.precedes(a, b); });
  return order;
}

}  // namespace

History parse_linear(std::string_view text) {
  HistoryBuilder b;
  text = trim(text);
  if (text.empty()) return std::move(b).build();
  std::size_t start = 0;
  while (true) {
    const auto dot = text.find('.', start);
    parse_token(b, trim(text.substr(start, dot == std::string_view::npos ? text.npos : dot - start)));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  b.chain_all();
  return std::move(b).build();
}

History parse_poset_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("history document must be a JSON object");

  auto get_string = [](const nlohmann::json& obj, const char* key, std::size_t index) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
      throw ParseError("op " + std::to_string(index) + ": missing string field '" + key + "'");
    return it->get<std::string>();
  };

  HistoryBuilder b;
  const auto ops = doc.value("ops", nlohmann::json::array());
  if (!ops.is_array()) throw ParseError("'ops' must be an array");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    if (!op.is_object()) throw ParseError("op " + std::to_string(i) + " must be an object");
    const std::string kind = get_string(op, "kind", i);
    const std::string label = get_string(op, "txn", i);
    if (!is_label(label) || label == "0") throw ParseError("op " + std::to_string(i) + ": bad transaction label");
    TxnId t = b.txn(label);
    if (kind == "commit") {
      b.commit(t);
    } else if (kind == "abort") {
      b.abort(t);
    } else if (kind == "read" || kind == "write") {
      const std::string obj = get_string(op, "obj", i);
      if (!is_name(obj)) throw ParseError("op " + std::to_string(i) + ": bad object name");
      ObjectId x = b.object(obj);
      if (kind == "write") {
        b.write(t, x);
      } else {
        const std::string version = get_string(op, "readVersion", i);
        if (!is_label(version)) throw ParseError("op " + std::to_string(i) + ": bad version label");
        b.read(t, x, b.txn(version));
      }
    } else {
      throw ParseError("op " + std::to_string(i) + ": unknown kind '" + kind + "'");
    }
  }
  const auto edges = doc.value("edges", nlohmann::json::array());
  if (!edges.is_array()) throw ParseError("'edges' must be an array");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
      throw ParseError("each edge must be a pair of operation indices");
    const auto from = e[0].get<std::size_t>();
    const auto to = e[1].get<std::size_t>();
    if (from >= ops.size() || to >= ops.size()) throw ParseError("edge refers to an unknown operation");
    b.edge(from, to);
  }
  return std::move(b).build();
}

History parse_history(std::string_view text) {
  std::string_view t = trim(text);
  if (!t.empty() && t.front() == '{') return parse_poset_json(t);
  return parse_linear(t);
}

std::string render_op(const History& h, std::size_t index) {
  const Operation& op = h.op(index);
  const std::string& label = h.txn_label(op.txn);
  switch (op.kind) {
    case OpKind::kRead: {
      const std::string& version = h.txn_label(op.read_version);
      const std::string sep = is_numeric(version) ? "" : "_";
      return "r" + label + "(" + h.object_name(op.object) + sep + version + ")";
    }
    case OpKind::kWrite:
      return "w" + label + "(" + h.object_name(op.object) + ")";
    case OpKind::kCommit:
      return "c" + label;
    case OpKind::kAbort:
      return "a" + label;
  }
  return {};
}

std::string render_linear(const History& h) {
  if (!h.is_total()) throw ModelError("linear notation needs a totally ordered history");
  std::string out;
  for (std::size_t i : total_order(h)) {
    if (!out.empty()) out += '.';
    out += render_op(h, i);
  }
  return out;
}

std::string render_poset_json(const History& h) {
  nlohmann::ordered_json ops = nlohmann::ordered_json::array();
  for (const Operation& op : h.ops()) {
    nlohmann::ordered_json o;
    o["kind"] = std::string(to_string(op.kind));
    o["txn"] = h.txn_label(op.txn);
    if (op.is_access()) o["obj"] = h.object_name(op.object);
    if (op.kind == OpKind::kRead) o["readVersion"] = h.txn_label(op.read_version);
    ops.push_back(std::move(o));
  }
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (auto [from, to] : h.edges()) edges.push_back({from, to});
  nlohmann::ordered_json doc;
  doc["ops"] = std::move(ops);
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

}  // namespace jessy
