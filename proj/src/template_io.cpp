#include "sitrec/template_io.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <system_error>

namespace sitrec {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kAttr = "<xmlattr>";
constexpr std::string_view kComment = "<xmlcomment>";

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::map<std::string, std::string> attributes(const pt::ptree& node, const std::string& where,
                                              std::initializer_list<std::string_view> allowed) {
  std::map<std::string, std::string> out;
  auto it = node.find(std::string(kAttr));
  if (it == node.not_found()) return out;
  for (const auto& [key, value] : it->second) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::schema, where + ": unknown attribute '" + key + "'");
    }
    out[key] = value.data();
  }
  return out;
}

/// Element children in document order, with attributes and comments skipped.
std::vector<std::pair<std::string, const pt::ptree*>> elements(const pt::ptree& node,
                                                               const std::string& where) {
  if (!is_blank(node.data())) throw Error(ErrorCode::schema, where + ": unexpected text content");
  std::vector<std::pair<std::string, const pt::ptree*>> out;
  for (const auto& [key, child] : node) {
    if (key == kAttr || key == kComment) continue;
    out.emplace_back(key, &child);
  }
  return out;
}

Condition parse_condition(const pt::ptree& node, const std::string& where,
                          const EnvironmentSpec* env) {
  auto attrs = attributes(node, where, {"sensor", "comparator", "value", "kind"});
  if (!elements(node, where).empty()) {
    throw Error(ErrorCode::schema, where + ": condition must be empty");
  }
  for (const char* required : {"sensor", "comparator", "value"}) {
    if (!attrs.count(required)) {
      throw Error(ErrorCode::schema, where + ": missing attribute '" + required + "'");
    }
  }
  Condition c;
  c.sensor = attrs["sensor"];
  if (c.sensor.empty()) throw Error(ErrorCode::semantic, where + ": empty sensor id");
  auto cmp = parse_comparator(attrs["comparator"]);
  if (!cmp) {
    throw Error(ErrorCode::semantic, where + ": unknown comparator '" + attrs["comparator"] + "'");
  }
  c.comparator = *cmp;
  auto value = parse_number(attrs["value"]);
  if (!value) throw Error(ErrorCode::semantic, where + ": value '" + attrs["value"] + "' is not a number");
  c.operand.value = *value;

  std::optional<OperandKind> declared;
  if (attrs.count("kind")) {
    if (attrs["kind"] == "threshold") declared = OperandKind::threshold;
    else if (attrs["kind"] == "exact") declared = OperandKind::exact;
    else throw Error(ErrorCode::semantic, where + ": unknown kind '" + attrs["kind"] + "'");
  }

  OperandKind kind;
  if (env) {
    const auto* sensor = env->find_sensor(c.sensor);
    if (!sensor) throw Error(ErrorCode::semantic, where + ": unknown sensor '" + c.sensor + "'");
    kind = sensor->kind == ValueKind::boolean ? OperandKind::exact : OperandKind::threshold;
    if (declared && *declared != kind) {
      throw Error(ErrorCode::semantic,
                  where + ": kind '" + attrs["kind"] + "' does not match sensor '" + c.sensor + "'");
    }
  } else if (declared) {
    kind = *declared;
  } else {
    const bool eq = c.comparator == Comparator::EQ || c.comparator == Comparator::NE;
    kind = eq && (*value == 0.0 || *value == 1.0) ? OperandKind::exact : OperandKind::threshold;
  }
  c.operand.kind = kind;

  if (kind == OperandKind::exact) {
    if (c.comparator != Comparator::EQ && c.comparator != Comparator::NE) {
      throw Error(ErrorCode::semantic, where + ": comparator " +
                                           std::string(to_string(c.comparator)) +
                                           " on exact-valued sensor '" + c.sensor + "'");
    }
    if (*value != 0.0 && *value != 1.0) {
      throw Error(ErrorCode::semantic, where + ": exact value must be 0 or 1");
    }
  } else if (*value < 0.0 || *value > 1.0) {
    throw Error(ErrorCode::semantic, where + ": threshold outside [0,1]");
  }
  return c;
}

TemplateNode parse_node(const std::string& tag, const pt::ptree& node, const std::string& where,
                        const EnvironmentSpec* env) {
  if (tag == "condition") return TemplateNode::leaf(parse_condition(node, where, env));
  if (tag != "and" && tag != "or") {
    throw Error(ErrorCode::schema, where + ": unknown element <" + tag + ">");
  }
  auto attrs = tag == "and" ? attributes(node, where, {"rare"}) : attributes(node, where, {});
  bool rare = false;
  if (attrs.count("rare")) {
    if (attrs["rare"] == "true") rare = true;
    else if (attrs["rare"] != "false") {
      throw Error(ErrorCode::semantic, where + ": rare must be 'true' or 'false'");
    }
  }
  std::vector<TemplateNode> children;
  auto kids = elements(node, where);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    children.push_back(parse_node(kids[i].first, *kids[i].second,
                                  where + "/" + kids[i].first + "[" + std::to_string(i) + "]", env));
  }
  if (tag == "and") {
    if (children.empty()) throw Error(ErrorCode::semantic, where + ": <and> without children");
    if (children.size() == 1 && children.front().is_operator()) {
      throw Error(ErrorCode::semantic, where + ": <and> with a single operator child");
    }
    return TemplateNode::all_of(std::move(children), rare);
  }
  if (children.size() < 2) throw Error(ErrorCode::semantic, where + ": <or> needs at least two children");
  return TemplateNode::any_of(std::move(children));
}

void escape_into(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
}

void write_node(std::string& out, const TemplateNode& n, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  if (n.kind == NodeKind::condition) {
    out += "<condition sensor=\"";
    escape_into(out, n.condition.sensor);
    out += "\" comparator=\"";
    out += to_string(n.condition.comparator);
    out += "\" value=\"";
    out += format_number(n.condition.operand.value);
    out += "\" kind=\"";
    out += to_string(n.condition.operand.kind);
    out += "\"/>\n";
    return;
  }
  const char* tag = n.kind == NodeKind::all_of ? "and" : "or";
  out += "<";
  out += tag;
  if (n.rare) out += " rare=\"true\"";
  out += ">\n";
  for (const auto& c : n.children) write_node(out, c, depth + 1);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</";
  out += tag;
  out += ">\n";
}

}  // namespace

const SituationTemplate* TemplateDocument::find(std::string_view situation) const {
  for (const auto& t : templates) {
    if (t.situation == situation) return &t;
  }
  return nullptr;
}

TemplateDocument parse_templates(std::string_view text, const EnvironmentSpec* env) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::syntax,
                "line " + std::to_string(e.line()) + ": " + e.message());
  }

  auto top = elements(tree, "document");
  if (top.size() != 1 || top.front().first != "situations") {
    throw Error(ErrorCode::schema, "document must contain exactly one <situations> element");
  }
  const auto& root = *top.front().second;
  auto attrs = attributes(root, "situations", {"version"});
  TemplateDocument doc;
  if (!attrs.count("version")) throw Error(ErrorCode::schema, "situations: missing version");
  doc.version = attrs["version"];
  if (doc.version != "1") {
    throw Error(ErrorCode::schema, "situations: unsupported version '" + doc.version + "'");
  }

  std::set<std::string> names;
  for (const auto& [tag, node] : elements(root, "situations")) {
    if (tag != "situation") throw Error(ErrorCode::schema, "situations: unknown element <" + tag + ">");
    auto sattrs = attributes(*node, "situation", {"name"});
    if (!sattrs.count("name") || sattrs["name"].empty()) {
      throw Error(ErrorCode::schema, "situation: missing name");
    }
    const auto& name = sattrs["name"];
    if (!names.insert(name).second) {
      throw Error(ErrorCode::semantic, "situation '" + name + "' defined twice");
    }
    if (name == kNoneLabel) {
      throw Error(ErrorCode::semantic, "situation name 'none' is reserved");
    }
    if (env && std::find(env->situations.begin(), env->situations.end(), name) == env->situations.end()) {
      throw Error(ErrorCode::semantic, "situation '" + name + "' is not declared by the environment");
    }
    auto kids = elements(*node, name);
    if (kids.size() != 1) {
      throw Error(ErrorCode::semantic, name + ": situation needs exactly one operator element");
    }
    if (kids.front().first == "condition") {
      throw Error(ErrorCode::semantic, name + ": situation root must be <and> or <or>");
    }
    SituationTemplate t;
    t.situation = name;
    t.root = parse_node(kids.front().first, *kids.front().second,
                        name + "/" + kids.front().first, env);
    if (auto problem = template_problem(t)) throw Error(ErrorCode::semantic, *problem);
    doc.templates.push_back(std::move(t));
  }
  return doc;
}

std::string serialize_templates(const TemplateDocument& doc) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<situations version=\"";
  escape_into(out, doc.version);
  if (doc.templates.empty()) {
    out += "\"/>\n";
    return out;
  }
  out += "\">\n";
  for (const auto& t : doc.templates) {
    out += "  <situation name=\"";
    escape_into(out, t.situation);
    out += "\">\n";
    write_node(out, t.root, 2);
    out += "  </situation>\n";
  }
  out += "</situations>\n";
  return out;
}

std::uint64_t content_hash(std::string_view bytes) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io, "cannot read '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::io, "cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::io, "cannot rename into '" + path.string() + "'");
  }
}

TemplateDocument RepositoryFile::load() {
  auto text = read_file(path_);
  auto doc = parse_templates(text, env_);
  hash_ = content_hash(text);
  return doc;
}

void RepositoryFile::store(const TemplateDocument& doc) {
  std::error_code ec;
  const bool exists = std::filesystem::exists(path_, ec);
  if (exists) {
    auto current = content_hash(read_file(path_));
    if (!hash_ || *hash_ != current) {
      throw Error(ErrorCode::concurrent_modification,
                  "'" + path_.string() + "' changed on disk since it was loaded");
    }
  } else if (hash_) {
    throw Error(ErrorCode::concurrent_modification,
                "'" + path_.string() + "' was removed since it was loaded");
  }
  auto text = serialize_templates(doc);
  write_file_atomic(path_, text);
  hash_ = content_hash(text);
}

}  // namespace sitrec
