#include "bscusum/schedule_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "bscusum/error.hpp"

namespace bscusum {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view s, std::string_view key) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw DataError("schedule file: invalid number for '" + std::string(key) + "': '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::string_view key, int base = 10) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw DataError("schedule file: invalid integer for '" + std::string(key) + "': '" + std::string(s) + "'");
  return v;
}

std::vector<double> parse_list(std::string_view s, std::string_view key) {
  std::vector<double> out;
  s = trim(s);
  while (!s.empty()) {
    const auto sp = s.find_first_of(" \t");
    out.push_back(parse_double(s.substr(0, sp), key));
    if (sp == std::string_view::npos) break;
    s = trim(s.substr(sp));
  }
  return out;
}

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

bool operator==(const ScheduleFile& a, const ScheduleFile& b) {
  auto ar_equal = [](const std::optional<ArModel>& x, const std::optional<ArModel>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->mu == y->mu && x->order == y->order && x->coeffs == y->coeffs && x->noise_var == y->noise_var;
  };
  return a.format_version == b.format_version && a.center == b.center && a.scale == b.scale && a.k == b.k && a.limits == b.limits && a.h_star == b.h_star &&
         a.arl0 == b.arl0 && a.created_with_seed == b.created_with_seed &&
         a.phase1_fingerprint == b.phase1_fingerprint && ar_equal(a.ar_model, b.ar_model);
}

std::uint64_t fingerprint(std::span<const double> values) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (bits >> (8 * byte)) & 0xFFU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string render_schedule(const ScheduleFile& file) {
  std::ostringstream out;
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(file.phase1_fingerprint));
  out << "# bscusum control-limit schedule\n"
      << "format_version = " << file.format_version << '\n'
      << "center = " << format_double(file.center) << '\n'
      << "scale = " << format_double(file.scale) << '\n'
      << "k = " << format_double(file.k) << '\n'
      << "j_max = " << file.j_max() << '\n'
      << "limits = " << join(file.limits) << '\n'
      << "h_star = " << format_double(file.h_star) << '\n'
      << "arl0 = " << format_double(file.arl0) << '\n'
      << "created_with_seed = " << file.created_with_seed << '\n'
      << "phase1_fingerprint = " << fp << '\n';
  if (file.ar_model) {
    const auto& ar = *file.ar_model;
    out << "ar_order = " << ar.order << '\n'
        << "ar_mu = " << format_double(ar.mu) << '\n'
        << "ar_coeffs = " << join(ar.coeffs) << '\n'
        << "ar_noise_var = " << format_double(ar.noise_var) << '\n';
  }
  return out.str();
}

ScheduleFile parse_schedule(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw DataError("schedule file: line " + std::to_string(line_no) + " is not 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second)
      throw DataError("schedule file: duplicate key '" + key + "'");
  }
  auto get = [&](std::string_view key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DataError("schedule file: missing key '" + std::string(key) + "'");
    return it->second;
  };

  ScheduleFile file;
  file.format_version = static_cast<int>(parse_uint(get("format_version"), "format_version"));
  if (file.format_version != kScheduleFormatVersion)
    throw DataError("schedule file: unsupported format_version " + std::to_string(file.format_version));
  file.center = parse_double(get("center"), "center");
  file.scale = parse_double(get("scale"), "scale");
  if (!std::isfinite(file.center) || !(file.scale > 0.0) || !std::isfinite(file.scale))
    throw DataError("schedule file: center must be finite and scale positive");
  file.k = parse_double(get("k"), "k");
  const auto j_max = parse_uint(get("j_max"), "j_max");
  file.limits = parse_list(get("limits"), "limits");
  if (file.limits.size() != j_max)
    throw DataError("schedule file: j_max = " + std::to_string(j_max) + " but " + std::to_string(file.limits.size()) +
                    " limits listed");
  file.h_star = parse_double(get("h_star"), "h_star");
  file.arl0 = parse_double(get("arl0"), "arl0");
  file.created_with_seed = parse_uint(get("created_with_seed"), "created_with_seed");
  file.phase1_fingerprint = parse_uint(get("phase1_fingerprint"), "phase1_fingerprint", 16);
  if (kv.contains("ar_order")) {
    ArModel ar;
    ar.order = parse_uint(get("ar_order"), "ar_order");
    ar.mu = parse_double(get("ar_mu"), "ar_mu");
    ar.coeffs = parse_list(get("ar_coeffs"), "ar_coeffs");
    ar.noise_var = parse_double(get("ar_noise_var"), "ar_noise_var");
    if (ar.coeffs.size() != ar.order) throw DataError("schedule file: ar_coeffs does not match ar_order");
    file.ar_model = std::move(ar);
  }
  try {
    file.schedule();
  } catch (const UsageError& e) {
    throw DataError(std::string("schedule file: ") + e.what());
  }
  return file;
}

void write_schedule_file(const std::filesystem::path& path, const ScheduleFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << render_schedule(file);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ScheduleFile read_schedule_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open schedule file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schedule(buf.str());
}

}  // namespace bscusum
