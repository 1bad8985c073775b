#include "thinsheet/protocol.hpp"

#include <charconv>
#include <cmath>

#include "thinsheet/errors.hpp"

namespace thinsheet::protocol {

namespace {

// Splits on spaces; tabs and a trailing CR are tolerated.
std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ProtocolError("bad number '" + std::string(s) + "'");
  return v;
}

std::size_t count(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ProtocolError("bad count '" + std::string(s) + "'");
  return v;
}

bool flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw ProtocolError("flag must be 0 or 1");
}

std::vector<std::string_view> lines(std::string_view message) {
  std::vector<std::string_view> out;
  while (!message.empty()) {
    const auto nl = message.find('\n');
    out.push_back(message.substr(0, nl));
    if (nl == std::string_view::npos) break;
    message.remove_prefix(nl + 1);
  }
  return out;
}

void append_vec(std::string& s, const Eigen::Vector3d& v) {
  for (int k = 0; k < 3; ++k) {
    s += ' ';
    s += format_number(v(k));
  }
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

HipMessage parse_hip(std::string_view message) {
  const auto parts = lines(message);
  if (parts.size() != 1) throw ProtocolError("HIP message must be a single line");
  const auto t = tokens(parts.front());
  if (t.empty() || t[0] != "HIP") throw ProtocolError("expected HIP message");
  if (t.size() != 5) throw ProtocolError("HIP takes 4 numbers: t x y z");
  return {number(t[1]), Eigen::Vector3d(number(t[2]), number(t[3]), number(t[4]))};
}

std::string format_hip(const HipMessage& hip) {
  std::string s = "HIP " + format_number(hip.t);
  append_vec(s, hip.hip);
  return s;
}

std::string format_state(const StateMessage& state) {
  std::string s = "STATE " + format_number(state.t);
  append_vec(s, state.proxy);
  s += state.contact ? " 1 " : " 0 ";
  s += format_number(state.force_magnitude);
  append_vec(s, state.force_direction);
  s += state.stale ? " 1" : " 0";
  if (state.patch) {
    s += "\nPATCH " + std::to_string(state.patch->size());
    for (const auto& p : *state.patch) {
      s += '\n';
      s += std::to_string(p.id);
      append_vec(s, p.position);
    }
  }
  return s;
}

StateMessage parse_state(std::string_view message) {
  const auto ls = lines(message);
  if (ls.empty()) throw ProtocolError("empty message");
  const auto t = tokens(ls[0]);
  if (t.size() != 11 || t[0] != "STATE") throw ProtocolError("malformed STATE line");
  StateMessage s;
  s.t = number(t[1]);
  s.proxy = {number(t[2]), number(t[3]), number(t[4])};
  s.contact = flag(t[5]);
  s.force_magnitude = number(t[6]);
  s.force_direction = {number(t[7]), number(t[8]), number(t[9])};
  s.stale = flag(t[10]);
  if (ls.size() == 1) return s;
  const auto head = tokens(ls[1]);
  if (head.size() != 2 || head[0] != "PATCH") throw ProtocolError("expected PATCH header");
  const std::size_t k = count(head[1]);
  if (ls.size() != k + 2) throw ProtocolError("PATCH line count mismatch");
  s.patch.emplace();
  s.patch->reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto f = tokens(ls[i + 2]);
    if (f.size() != 4) throw ProtocolError("PATCH lines are `id x y z`");
    s.patch->push_back({count(f[0]), Eigen::Vector3d(number(f[1]), number(f[2]), number(f[3]))});
  }
  return s;
}

std::string format_model(const PointCloudModel& model) {
  std::string s = "MODEL " + std::to_string(model.size());
  for (PointId id = 0; id < model.size(); ++id) {
    s += '\n';
    s += std::to_string(id);
    append_vec(s, model[id].position);
    s += ' ';
    s += format_number(model[id].elastic_modulus);
  }
  return s;
}

ModelMessage parse_model(std::string_view message) {
  const auto ls = lines(message);
  if (ls.empty()) throw ProtocolError("empty message");
  const auto head = tokens(ls[0]);
  if (head.size() != 2 || head[0] != "MODEL") throw ProtocolError("expected MODEL header");
  const std::size_t n = count(head[1]);
  if (ls.size() != n + 1) throw ProtocolError("MODEL line count mismatch");
  ModelMessage m;
  m.ids.reserve(n);
  m.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = tokens(ls[i + 1]);
    if (f.size() != 5) throw ProtocolError("MODEL lines are `id x y z E`");
    m.ids.push_back(count(f[0]));
    m.points.push_back({Eigen::Vector3d(number(f[1]), number(f[2]), number(f[3])), number(f[4])});
  }
  return m;
}

std::string format_error(std::string_view text) {
  std::string s = "ERROR ";
  for (char c : text) s += (c == '\n' || c == '\r') ? ' ' : c;
  return s;
}

}  // namespace thinsheet::protocol
