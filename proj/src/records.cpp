#include "hartree_lab/records.hpp"

#include "hartree_lab/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <functional>
#include <limits>
#include <map>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <unistd.h>

namespace hartree_lab {

namespace {

SolveStatus status_from_string(const std::string &s) {
  for (auto st : {SolveStatus::converged, SolveStatus::not_bound, SolveStatus::no_convergence})
    if (to_string(st) == s)
      return st;
  throw LabError(ErrorKind::validation, "unknown status '" + s + "'");
}

LedgerKind ledger_kind_from_string(const std::string &s) {
  for (auto k : {LedgerKind::exact, LedgerKind::variational_upper, LedgerKind::hartree_upper,
                 LedgerKind::mean_field_limit})
    if (to_string(k) == s)
      return k;
  throw LabError(ErrorKind::validation, "unknown ledger kind '" + s + "'");
}

nlohmann::json breakdown_json(const EnergyBreakdown &b) {
  return {{"kinetic", b.kinetic},
          {"attraction", b.attraction},
          {"repulsion", b.repulsion},
          {"total", b.total}};
}

EnergyBreakdown breakdown_from(const nlohmann::json &j) {
  return {j.at("kinetic").get<double>(), j.at("attraction").get<double>(),
          j.at("repulsion").get<double>(), j.at("total").get<double>()};
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct Table {
  std::string header;
  std::vector<std::string> columns;
  std::function<std::vector<std::string>(const nlohmann::json &)> row;
  std::function<bool(const nlohmann::json &, const nlohmann::json &)> less;
};

const Table &table_for(std::string_view kind) {
  static const std::map<std::string, Table, std::less<>> tables = [] {
    std::map<std::string, Table, std::less<>> t;
    auto num = [](const nlohmann::json &j, const char *key) {
      return format_number(j.at(key).get<double>());
    };
    t["curve-point"] = {"mean-field energy curve",
                        {"lambda[1]", "epsilon[scaled energy]"},
                        [=](const nlohmann::json &p) {
                          return std::vector<std::string>{num(p, "lambda"), num(p, "energy")};
                        },
                        [](const nlohmann::json &a, const nlohmann::json &b) {
                          return a.at("lambda").get<double>() < b.at("lambda").get<double>();
                        }};
    t["hartree"] = {"Hartree minimizers",
                    {"lambda[1]", "epsilon[scaled energy]", "mu[scaled energy]"},
                    [=](const nlohmann::json &p) {
                      return std::vector<std::string>{num(p, "lambda"), num(p, "energy"),
                                                      num(p, "chemical_potential")};
                    },
                    [](const nlohmann::json &a, const nlohmann::json &b) {
                      return a.at("lambda").get<double>() < b.at("lambda").get<double>();
                    }};
    t["lln-row"] = {"law-of-large-numbers decay",
                    {"N[1]", "exceedance[fraction]", "median_distance[scaled length]"},
                    [=](const nlohmann::json &p) {
                      return std::vector<std::string>{std::to_string(p.at("n").get<std::size_t>()),
                                                      num(p, "exceedance"), num(p, "median")};
                    },
                    [](const nlohmann::json &a, const nlohmann::json &b) {
                      return std::pair(a.value("order", 1), a.at("n").get<std::size_t>()) <
                             std::pair(b.value("order", 1), b.at("n").get<std::size_t>());
                    }};
    t["ledger-row"] = {"finite-N monotonicity ledger",
                       {"N[1]", "value[scaled energy]", "kind"},
                       [=](const nlohmann::json &p) {
                         return std::vector<std::string>{
                             p.at("n").is_null() ? "inf" : std::to_string(p.at("n").get<int>()),
                             num(p, "value"), p.at("kind").get<std::string>()};
                       },
                       [](const nlohmann::json &a, const nlohmann::json &b) {
                         auto key = [](const nlohmann::json &p) {
                           return p.at("n").is_null() ? std::numeric_limits<int>::max()
                                                      : p.at("n").get<int>();
                         };
                         return key(a) < key(b);
                       }};
    t["critical"] = {"critical coupling estimate",
                     {"estimate[1]", "half_width[1]"},
                     [=](const nlohmann::json &p) {
                       return std::vector<std::string>{num(p, "estimate"), num(p, "half_width")};
                     },
                     [](const nlohmann::json &a, const nlohmann::json &b) {
                       return a.at("estimate").get<double>() < b.at("estimate").get<double>();
                     }};
    t["two-body"] = {"two-body variational energies",
                     {"lambda[1]", "kappa[1]", "energy[scaled energy]"},
                     [=](const nlohmann::json &p) {
                       return std::vector<std::string>{num(p, "lambda"), num(p, "kappa"),
                                                       num(p, "energy")};
                     },
                     [](const nlohmann::json &a, const nlohmann::json &b) {
                       return std::pair(a.at("lambda").get<double>(), a.at("kappa").get<double>()) <
                              std::pair(b.at("lambda").get<double>(), b.at("kappa").get<double>());
                     }};
    t["sample"] = {"sampled points",
                   {"x[scaled length]", "y[scaled length]", "z[scaled length]"},
                   {},
                   {}};
    t["check"] = {"invariant checks",
                  {"name", "passed", "value", "tolerance"},
                  [=](const nlohmann::json &p) {
                    return std::vector<std::string>{p.at("name").get<std::string>(),
                                                    p.at("passed").get<bool>() ? "1" : "0",
                                                    num(p, "value"), num(p, "tolerance")};
                  },
                  [](const nlohmann::json &a, const nlohmann::json &b) {
                    return a.at("name").get<std::string>() < b.at("name").get<std::string>();
                  }};
    return t;
  }();
  const auto it = tables.find(kind);
  if (it == tables.end())
    throw LabError(ErrorKind::validation, "no plot table for kind '" + std::string(kind) + "'");
  return it->second;
}

} // namespace

nlohmann::json to_json(const ResultRecord &r) {
  return {{"schema_version", r.schema_version},
          {"command", r.command},
          {"kind", r.kind},
          {"config", r.config},
          {"timestamp", r.timestamp},
          {"payload", r.payload},
          {"provenance", {{"seed", r.seed}, {"grid_hash", r.grid_hash}}}};
}

ResultRecord record_from_json(const nlohmann::json &j) {
  try {
    ResultRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != schema_version)
      throw LabError(ErrorKind::validation,
                     "unsupported schema_version " + std::to_string(r.schema_version));
    r.command = j.at("command").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.config = j.at("config");
    r.timestamp = j.at("timestamp").get<std::string>();
    r.payload = j.at("payload");
    r.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    r.grid_hash = j.at("provenance").at("grid_hash").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw LabError(ErrorKind::validation, std::string("malformed record: ") + e.what());
  }
}

std::string serialize(const ResultRecord &record) { return to_json(record).dump(); }

ResultRecord parse_record(std::string_view line) {
  try {
    return record_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::parse_error &e) {
    throw LabError(ErrorKind::validation, std::string("bad json: ") + e.what());
  }
}

std::string serialize_lines(const std::vector<ResultRecord> &records) {
  std::string out;
  for (const auto &r : records) {
    out += serialize(r);
    out += '\n';
  }
  return out;
}

std::vector<ResultRecord> parse_lines(std::string_view text) {
  std::vector<ResultRecord> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    const auto line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos)
      out.push_back(parse_record(line));
    start = end + 1;
  }
  return out;
}

std::string hex_hash(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

nlohmann::json to_json(const HartreeResult &r) {
  return {{"lambda", r.lambda},
          {"energy", r.energy},
          {"chemical_potential", r.chemical_potential},
          {"breakdown", breakdown_json(r.breakdown)},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"converged", r.converged},
          {"bound", r.bound},
          {"boundary_mass", r.boundary_mass},
          {"used_gradient_flow", r.used_gradient_flow},
          {"status", std::string(to_string(r.status))},
          {"virial_ratio", r.virial_ratio()},
          {"fisher_ratio", r.fisher_ratio()},
          {"grid_nodes", r.orbital.grid()->size()},
          {"grid_r_max", r.orbital.grid()->r_max()}};
}

nlohmann::json to_json(const CurvePoint &p) {
  return {{"lambda", p.lambda},
          {"bound", p.bound},
          {"status", std::string(to_string(p.status))},
          {"energy", p.energy},
          {"chemical_potential", p.chemical_potential},
          {"breakdown", breakdown_json(p.breakdown)},
          {"iterations", p.iterations},
          {"grid_hash", hex_hash(p.grid_hash)}};
}

CurvePoint curve_point_from_json(const nlohmann::json &j) {
  CurvePoint p;
  p.lambda = j.at("lambda").get<double>();
  p.bound = j.at("bound").get<bool>();
  p.status = status_from_string(j.at("status").get<std::string>());
  p.energy = j.at("energy").get<double>();
  p.chemical_potential = j.at("chemical_potential").get<double>();
  p.breakdown = breakdown_from(j.at("breakdown"));
  p.iterations = j.at("iterations").get<int>();
  p.grid_hash = std::stoull(j.at("grid_hash").get<std::string>(), nullptr, 16);
  return p;
}

nlohmann::json to_json(const CriticalEstimate &e) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto &[lambda, bound] : e.probes)
    probes.push_back({{"lambda", lambda}, {"bound", bound}});
  return {{"estimate", e.estimate},
          {"half_width", e.half_width},
          {"solves", e.solves},
          {"probes", probes}};
}

nlohmann::json to_json(const LedgerRow &row) {
  return {{"n", row.n ? nlohmann::json(*row.n) : nlohmann::json(nullptr)},
          {"value", row.value},
          {"kind", to_string(row.kind)},
          {"error_estimate", row.error_estimate}};
}

LedgerRow ledger_row_from_json(const nlohmann::json &j) {
  LedgerRow row;
  if (!j.at("n").is_null())
    row.n = j.at("n").get<int>();
  row.value = j.at("value").get<double>();
  row.kind = ledger_kind_from_string(j.at("kind").get<std::string>());
  row.error_estimate = j.at("error_estimate").get<double>();
  return row;
}

nlohmann::json to_json(const LlnRow &row) {
  return {{"n", row.n},
          {"repetitions", row.repetitions},
          {"epsilon", row.epsilon},
          {"exceedance", row.exceedance},
          {"median", row.median},
          {"iqr", row.iqr},
          {"distances", row.distances}};
}

LlnRow lln_row_from_json(const nlohmann::json &j) {
  LlnRow row;
  row.n = j.at("n").get<std::size_t>();
  row.repetitions = j.at("repetitions").get<int>();
  row.epsilon = j.at("epsilon").get<double>();
  row.exceedance = j.at("exceedance").get<double>();
  row.median = j.at("median").get<double>();
  row.iqr = j.at("iqr").get<double>();
  row.distances = j.at("distances").get<std::vector<double>>();
  return row;
}

std::string emit_plotdata(const std::vector<ResultRecord> &records, std::string_view kind,
                          char separator) {
  for (const auto &r : records)
    if (r.kind != kind)
      throw LabError(ErrorKind::validation, "mixed record kinds: '" + r.kind + "' in a '" +
                                                std::string(kind) + "' table");
  const auto &table = table_for(kind);
  std::string out = "# " + table.header + "\n# ";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i)
      out += separator;
    out += table.columns[i];
  }
  out += '\n';
  auto line = [&](const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i)
        out += separator;
      out += cells[i];
    }
    out += '\n';
  };
  if (kind == "sample") {
    for (const auto &r : records) {
      const auto &pts = r.payload.at("points");
      for (std::size_t i = 0; i + 2 < pts.size(); i += 3)
        line({format_number(pts[i].get<double>()), format_number(pts[i + 1].get<double>()),
              format_number(pts[i + 2].get<double>())});
    }
    return out;
  }
  std::vector<const nlohmann::json *> payloads;
  for (const auto &r : records)
    payloads.push_back(&r.payload);
  std::stable_sort(payloads.begin(), payloads.end(),
                   [&](const auto *a, const auto *b) { return table.less(*a, *b); });
  for (const auto *p : payloads)
    line(table.row(*p));
  return out;
}

void write_atomic(const std::string &path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  const fs::path tmp =
      dir / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw LabError(ErrorKind::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw LabError(ErrorKind::io, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw LabError(ErrorKind::io, "cannot move output into '" + path + "'");
  }
}

} // namespace hartree_lab
