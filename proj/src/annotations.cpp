#include "osa/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "osa/errors.hpp"

namespace osa {
namespace {

struct XmlNode {
  std::string tag;
  std::string text;  // concatenated character data directly under this node
  std::vector<XmlNode> children;
};

class XmlParser {
 public:
  explicit XmlParser(const std::string& text) : s_(text) {}

  XmlNode parse_document() {
    skip_misc();
    if (eof()) raise(ErrorCode::MalformedXml, "document has no root element");
    XmlNode root = parse_element();
    skip_misc();
    if (!eof()) raise(ErrorCode::MalformedXml, "content after the root element");
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  bool starts_with(const char* lit) const { return s_.compare(pos_, std::strlen(lit), lit) == 0; }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  // Whitespace, declarations, processing instructions, comments, doctype.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<?")) {
        std::size_t e = s_.find("?>", pos_);
        if (e == std::string::npos) raise(ErrorCode::MalformedXml, "unterminated declaration");
        pos_ = e + 2;
      } else if (starts_with("<!--")) {
        std::size_t e = s_.find("-->", pos_);
        if (e == std::string::npos) raise(ErrorCode::MalformedXml, "unterminated comment");
        pos_ = e + 3;
      } else if (starts_with("<!DOCTYPE")) {
        std::size_t e = s_.find('>', pos_);
        if (e == std::string::npos) raise(ErrorCode::MalformedXml, "unterminated doctype");
        pos_ = e + 1;
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    std::size_t b = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                      s_[pos_] == '-' || s_[pos_] == ':' || s_[pos_] == '.'))
      ++pos_;
    if (pos_ == b) raise(ErrorCode::MalformedXml, "expected a tag name");
    return s_.substr(b, pos_ - b);
  }

  void skip_attributes() {
    while (!eof() && peek() != '>' && !starts_with("/>")) {
      if (peek() == '"' || peek() == '\'') {
        char q = peek();
        std::size_t e = s_.find(q, pos_ + 1);
        if (e == std::string::npos) raise(ErrorCode::MalformedXml, "unterminated attribute value");
        pos_ = e + 1;
      } else {
        ++pos_;
      }
    }
    if (eof()) raise(ErrorCode::MalformedXml, "unterminated start tag");
  }

  XmlNode parse_element() {
    if (peek() != '<') raise(ErrorCode::MalformedXml, "expected '<'");
    ++pos_;
    XmlNode node;
    node.tag = parse_name();
    skip_attributes();
    if (starts_with("/>")) {
      pos_ += 2;
      return node;
    }
    ++pos_;  // '>'

    for (;;) {
      if (eof()) raise(ErrorCode::MalformedXml, "unterminated element <" + node.tag + ">");
      if (starts_with("</")) {
        pos_ += 2;
        std::string close = parse_name();
        if (close != node.tag)
          raise(ErrorCode::MalformedXml, "mismatched </" + close + "> for <" + node.tag + ">");
        skip_ws();
        if (eof() || peek() != '>') raise(ErrorCode::MalformedXml, "unterminated end tag");
        ++pos_;
        return node;
      }
      if (starts_with("<!--")) {
        std::size_t e = s_.find("-->", pos_);
        if (e == std::string::npos) raise(ErrorCode::MalformedXml, "unterminated comment");
        pos_ = e + 3;
      } else if (starts_with("<![CDATA[")) {
        std::size_t b = pos_ + 9;
        std::size_t e = s_.find("]]>", b);
        if (e == std::string::npos) raise(ErrorCode::MalformedXml, "unterminated CDATA");
        node.text += s_.substr(b, e - b);
        pos_ = e + 3;
      } else if (peek() == '<') {
        node.children.push_back(parse_element());
      } else {
        std::size_t e = s_.find('<', pos_);
        if (e == std::string::npos) raise(ErrorCode::MalformedXml, "unterminated element <" + node.tag + ">");
        node.text += decode_entities(s_.substr(pos_, e - pos_));
        pos_ = e;
      }
    }
  }

  static std::string decode_entities(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
      if (raw[i] == '&') {
        static const std::pair<const char*, char> kEntities[] = {
            {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
        bool matched = false;
        for (const auto& [ent, ch] : kEntities) {
          std::size_t n = std::strlen(ent);
          if (raw.compare(i, n, ent) == 0) {
            out += ch;
            i += n;
            matched = true;
            break;
          }
        }
        if (!matched) raise(ErrorCode::MalformedXml, "unknown entity near '" + raw.substr(i, 8) + "'");
      } else {
        out += raw[i++];
      }
    }
    return out;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const XmlNode* find_child(const XmlNode& node, const char* tag) {
  for (const auto& c : node.children) {
    if (c.tag == tag) return &c;
  }
  return nullptr;
}

void collect_scored_events(const XmlNode& node, std::vector<const XmlNode*>& out) {
  if (node.tag == "ScoredEvent") out.push_back(&node);
  for (const auto& c : node.children) collect_scored_events(c, out);
}

double parse_seconds(const XmlNode& event, const char* tag) {
  const XmlNode* child = find_child(event, tag);
  if (child == nullptr || trim(child->text).empty())
    raise(ErrorCode::MissingField, std::string("scored event lacks ") + tag);
  std::string s = trim(child->text);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    raise(ErrorCode::MalformedXml, std::string("bad decimal in ") + tag + ": '" + s + "'");
  return v;
}

std::string encode_entities(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<EventAnnotation> parse_annotations(const std::string& xml_text,
                                               const std::vector<std::string>& name_patterns) {
  XmlParser parser(xml_text);
  XmlNode root = parser.parse_document();

  std::vector<const XmlNode*> scored;
  collect_scored_events(root, scored);

  std::vector<std::string> patterns;
  patterns.reserve(name_patterns.size());
  for (const auto& p : name_patterns) patterns.push_back(lower(p));

  std::vector<EventAnnotation> events;
  for (const XmlNode* ev : scored) {
    const XmlNode* name_node = find_child(*ev, "Name");
    if (name_node == nullptr) name_node = find_child(*ev, "EventConcept");
    std::string name = name_node != nullptr ? trim(name_node->text) : "";

    EventAnnotation ann;
    ann.name = name;
    ann.start = parse_seconds(*ev, "Start");
    ann.duration = parse_seconds(*ev, "Duration");

    std::string name_lc = lower(name);
    bool matched = false;
    for (const auto& p : patterns) {
      if (!p.empty() && name_lc.find(p) != std::string::npos) {
        matched = true;
        break;
      }
    }
    if (matched) events.push_back(std::move(ann));
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const EventAnnotation& a, const EventAnnotation& b) { return a.start < b.start; });
  return events;
}

std::string render_annotations(const std::vector<EventAnnotation>& events) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<PSGAnnotation>\n<ScoredEvents>\n";
  char buf[64];
  for (const auto& ev : events) {
    out += "<ScoredEvent>\n";
    out += "<EventConcept>" + encode_entities(ev.name) + "</EventConcept>\n";
    std::snprintf(buf, sizeof(buf), "%.17g", ev.start);
    out += std::string("<Start>") + buf + "</Start>\n";
    std::snprintf(buf, sizeof(buf), "%.17g", ev.duration);
    out += std::string("<Duration>") + buf + "</Duration>\n";
    out += "</ScoredEvent>\n";
  }
  out += "</ScoredEvents>\n</PSGAnnotation>\n";
  return out;
}

}  // namespace osa
