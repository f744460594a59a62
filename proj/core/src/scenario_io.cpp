#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "num/errors.hpp"
#include "num/model.hpp"

namespace num {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "expected a positive integer, got '" + std::string(tok) + "'");
  }
  return v;
}

enum class Section { kNone, kNetwork, kUtilities };

struct Pending {
  std::optional<std::size_t> links, users;
  std::map<std::size_t, std::pair<double, std::size_t>> capacity;  // l -> (c, line)
  std::map<std::size_t, std::pair<std::vector<std::size_t>, std::size_t>> route;
  std::map<std::size_t, std::pair<Utility, std::size_t>> utility;
};

Utility parse_utility(const std::vector<std::string_view>& rhs, std::size_t line) {
  if (rhs.empty()) throw ParseError(line, "missing utility family");
  const auto fam = rhs[0];
  auto arity = [&](std::size_t k) {
    if (rhs.size() != k) {
      throw ParseError(line, "utility '" + std::string(fam) + "' takes " +
                                 std::to_string(k - 1) + " parameter(s)");
    }
  };
  try {
    if (fam == "log") {
      arity(1);
      return Utility::log();
    }
    if (fam == "wlog") {
      arity(2);
      return Utility::weighted_log(parse_double(rhs[1], line));
    }
    if (fam == "power") {
      arity(2);
      return Utility::power(parse_double(rhs[1], line));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& err) {
    throw InputError("line " + std::to_string(line) + ": " + err.what());
  }
  throw ParseError(line, "unknown utility family '" + std::string(fam) + "'");
}

}  // namespace

Scenario load_scenario(std::string_view text) {
  Pending st;
  Section section = Section::kNone;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line == "[network]") {
        section = Section::kNetwork;
      } else if (line == "[utilities]") {
        section = Section::kUtilities;
      } else {
        throw ParseError(lineno, "unknown section " + std::string(line));
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'key = value'");
    const auto lhs = split_ws(line.substr(0, eq));
    const auto rhs = split_ws(line.substr(eq + 1));
    if (lhs.empty()) throw ParseError(lineno, "missing key");
    if (section == Section::kNone) throw ParseError(lineno, "entry outside of a section");

    const auto key = lhs[0];
    if (section == Section::kNetwork && (key == "links" || key == "users")) {
      if (lhs.size() != 1 || rhs.size() != 1) throw ParseError(lineno, "expected '" + std::string(key) + " = <count>'");
      auto& slot = key == "links" ? st.links : st.users;
      if (slot) throw ParseError(lineno, "duplicate '" + std::string(key) + "'");
      slot = parse_index(rhs[0], lineno);
      if (*slot == 0) throw ParseError(lineno, std::string(key) + " must be at least 1");
    } else if (section == Section::kNetwork && key == "capacity") {
      if (lhs.size() != 2 || rhs.size() != 1) throw ParseError(lineno, "expected 'capacity <l> = <value>'");
      const auto l = parse_index(lhs[1], lineno);
      const double c = parse_double(rhs[0], lineno);
      if (!st.capacity.emplace(l, std::make_pair(c, lineno)).second) {
        throw ParseError(lineno, "duplicate capacity for link " + std::to_string(l));
      }
    } else if (section == Section::kNetwork && key == "route") {
      if (lhs.size() != 2 || rhs.empty()) throw ParseError(lineno, "expected 'route <e> = <l1> <l2> ...'");
      const auto e = parse_index(lhs[1], lineno);
      std::vector<std::size_t> links;
      for (auto tok : rhs) links.push_back(parse_index(tok, lineno));
      if (!st.route.emplace(e, std::make_pair(std::move(links), lineno)).second) {
        throw ParseError(lineno, "duplicate route for user " + std::to_string(e));
      }
    } else if (section == Section::kUtilities && key == "user") {
      if (lhs.size() != 2) throw ParseError(lineno, "expected 'user <e> = <family> [param]'");
      const auto e = parse_index(lhs[1], lineno);
      auto u = parse_utility(rhs, lineno);
      if (!st.utility.emplace(e, std::make_pair(u, lineno)).second) {
        throw ParseError(lineno, "duplicate utility for user " + std::to_string(e));
      }
    } else {
      throw ParseError(lineno, "unknown key '" + std::string(key) + "'");
    }
  }

  if (!st.links) throw InputError("missing 'links = <m>' in [network]");
  if (!st.users) throw InputError("missing 'users = <n>' in [network]");
  const std::size_t m = *st.links;
  const std::size_t n = *st.users;

  std::vector<double> caps(m, 0.0);
  for (const auto& [l, v] : st.capacity) {
    if (l < 1 || l > m) throw ParseError(v.second, "capacity for unknown link " + std::to_string(l));
    if (!(v.first > 0.0)) {
      throw InputError("line " + std::to_string(v.second) + ": capacity of link " +
                       std::to_string(l) + " must be positive");
    }
    caps[l - 1] = v.first;
  }
  if (st.capacity.size() != m) throw InputError("expected a capacity line for each of the " + std::to_string(m) + " links");

  std::vector<std::vector<std::size_t>> routes(n);
  for (const auto& [e, v] : st.route) {
    if (e < 1 || e > n) throw ParseError(v.second, "route for unknown user " + std::to_string(e));
    for (std::size_t l : v.first) {
      if (l < 1 || l > m) {
        throw InputError("line " + std::to_string(v.second) + ": route of user " +
                         std::to_string(e) + " references unknown link " + std::to_string(l));
      }
      routes[e - 1].push_back(l - 1);
    }
  }
  if (st.route.size() != n) throw InputError("expected a route line for each of the " + std::to_string(n) + " users");

  std::vector<Utility> utils(n, Utility::log());
  for (const auto& [e, v] : st.utility) {
    if (e < 1 || e > n) throw ParseError(v.second, "utility for unknown user " + std::to_string(e));
    utils[e - 1] = v.first;
  }
  if (st.utility.size() != n) throw InputError("expected a utility line for each of the " + std::to_string(n) + " users");

  return Scenario(RoutingNetwork(std::move(caps), std::move(routes)), std::move(utils));
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto s = load_scenario(buf.str());
  s.label = path;
  return s;
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream os;
  os.precision(17);
  if (!s.label.empty()) os << "# " << s.label << "\n";
  os << "[network]\n";
  os << "links = " << s.links() << "\n";
  os << "users = " << s.users() << "\n";
  for (std::size_t l = 0; l < s.links(); ++l) {
    os << "capacity " << l + 1 << " = " << s.network.capacity(l) << "\n";
  }
  for (std::size_t e = 0; e < s.users(); ++e) {
    os << "route " << e + 1 << " =";
    for (std::size_t l : s.network.route(e)) os << ' ' << l + 1;
    os << "\n";
  }
  os << "[utilities]\n";
  for (std::size_t e = 0; e < s.users(); ++e) {
    os << "user " << e + 1 << " = " << to_string(s.utilities[e]) << "\n";
  }
  return os.str();
}

}  // namespace num
