#include "tailidx/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailidx/classify.hpp"
#include "tailidx/dominance.hpp"
#include "tailidx/error.hpp"
#include "tailidx/estimate.hpp"
#include "tailidx/family_spec.hpp"
#include "tailidx/tail_index.hpp"

namespace tailidx::cli {

namespace {

using json = nlohmann::ordered_json;
using Cell = std::variant<std::uint64_t, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json meta = json::object();  // extra fields for JSON output only
};

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return fmt(v); }
    std::string operator()(const std::string& v) const { return csv_field(v); }
  } visitor;
  return std::visit(visitor, c);
}

json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return json(v); }, c);
}

void check_finite(const json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>()))
    fail(Errc::NonFinite, "non-finite value in output");
  if (j.is_structured())
    for (const auto& item : j) check_finite(item);
}

void check_finite(const Table& t) {
  for (const auto& row : t.rows)
    for (const auto& c : row)
      if (const double* d = std::get_if<double>(&c); d && !std::isfinite(*d))
        fail(Errc::NonFinite, "non-finite value in output");
  check_finite(t.meta);
}

std::string render(const Table& t, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    json doc = t.meta;
    json records = json::array();
    for (const auto& row : t.rows) {
      json rec = json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) rec[t.columns[i]] = cell_json(row[i]);
      records.push_back(std::move(rec));
    }
    doc["records"] = std::move(records);
    os << doc.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
      os << '\n';
    }
  }
  return os.str();
}

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0')
      p = std::filesystem::path(dir) / p;
  }
  return p;
}

void write_text(const std::string& path, const std::string& text) {
  const auto p = resolve_output(path);
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + p.string() + " for writing");
  f << text;
  f.close();
  if (!f) fail(Errc::Io, "write to " + p.string() + " failed");
}

double parse_real(std::string_view s, const char* what) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(Errc::ParseError, std::string("bad ") + what + ": '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_count(std::string_view s, const char* what) {
  const double v = parse_real(s, what);
  if (!(v >= 0) || v > 1.8e19 || std::floor(v) != v)
    fail(Errc::ParseError, std::string(what) + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

// start:stop:xFactor
std::vector<std::uint64_t> parse_schedule(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3 || parts[2].empty() || parts[2][0] != 'x')
    fail(Errc::ParseError, "schedule must look like start:stop:xFactor, got '" + text + "'");
  return geometric_schedule(parse_count(parts[0], "schedule start"),
                            parse_count(parts[1], "schedule stop"),
                            parse_real(parts[2].substr(1), "schedule factor"));
}

// "a:b" (inclusive), "a", or "a,b,c".
std::vector<std::uint64_t> parse_v_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (auto item : split(text, ',')) {
    const auto range = split(item, ':');
    if (range.size() == 1) {
      out.push_back(parse_count(range[0], "v"));
    } else if (range.size() == 2) {
      const auto a = parse_count(range[0], "v");
      const auto b = parse_count(range[1], "v");
      if (b < a) fail(Errc::ParseError, "v range must be increasing");
      if (b - a > 10000000) fail(Errc::InvalidParams, "v range too long");
      for (auto v = a; v <= b; ++v) out.push_back(v);
    } else {
      fail(Errc::ParseError, "bad v list '" + text + "'");
    }
  }
  return out;
}

Distribution load(const std::string& text) { return make_distribution(parse_family_spec(text)); }

struct Common {
  std::string format = "csv";
  std::string out;
  double eps = kDefaultEps;
};

void add_common(CLI::App* sub, Common& c, bool with_eps) {
  sub->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--out", c.out, "output file (relative paths use $" + std::string(kOutputDirEnv) + ")");
  if (with_eps)
    sub->add_option("--eps", c.eps, "absolute truncation tolerance on t_n")->capture_default_str();
}

json domain_json(const DomainVerdict& v) {
  json j = json::object();
  j["domain"] = domain_name(v.domain);
  j["method"] = method_name(v.method);
  j["citation"] = v.citation;
  j["rationale"] = v.rationale;
  json d = json::object();
  d["decay_ratio"] = v.diagnostics.decay_ratio;
  d["growth_exponent"] = v.diagnostics.growth_exponent;
  d["band_min"] = v.diagnostics.band_min;
  d["band_max"] = v.diagnostics.band_max;
  j["diagnostics"] = d;
  json ev = json::array();
  for (const auto& [n, t] : v.evidence) ev.push_back({{"n", n}, {"t_n", t}});
  j["evidence"] = ev;
  json pe = json::array();
  for (const auto& [l, t] : v.probe_evidence) pe.push_back({{"log2_n", l}, {"t_n", t}});
  j["probe_evidence"] = pe;
  return j;
}

std::string pow2_text(std::int64_t e, bool minus_one) {
  return "2^" + std::to_string(e) + (minus_one ? "-1" : "");
}

// (d + 1)(1 - 1/n)^n for n = 2^e.
double run_lower_bound(std::uint64_t d, std::int64_t e) {
  double log_factor = 0;
  if (e <= 60) {
    const double n = std::exp2(static_cast<double>(e));
    log_factor = n * std::log1p(-1.0 / n);
  } else {
    log_factor = -1.0 - std::exp2(-static_cast<double>(e) - 1.0);
  }
  return static_cast<double>(d + 1) * std::exp(log_factor);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail index toolkit for distributions on countable alphabets", "tailidx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tailidx 0.1.0");

  // tn
  Common tn_c;
  std::string tn_dist, tn_schedule;
  auto* tn_cmd = app.add_subcommand("tn", "t_n over a geometric schedule");
  tn_cmd->add_option("--dist", tn_dist, "family spec, e.g. power:lambda=2")->required();
  tn_cmd->add_option("--schedule", tn_schedule, "start:stop:xFactor")->required();
  add_common(tn_cmd, tn_c, true);

  // classify
  Common cl_c;
  cl_c.format = "json";
  std::string cl_dist, cl_mode = "analytic", cl_schedule = "16:4194304:x2", cl_thresholds;
  auto* cl_cmd = app.add_subcommand("classify", "domain verdict");
  cl_cmd->add_option("--dist", cl_dist, "family spec")->required();
  cl_cmd->add_option("--mode", cl_mode, "analytic or numeric")
      ->check(CLI::IsMember({"analytic", "numeric"}))
      ->capture_default_str();
  cl_cmd->add_option("--schedule", cl_schedule, "schedule for numeric mode")->capture_default_str();
  cl_cmd->add_option("--thresholds", cl_thresholds, "key = value threshold file");
  add_common(cl_cmd, cl_c, false);

  // oscillate
  Common os_c;
  std::size_t os_grid = 1000;
  double os_cmin = 1.0, os_cmax = std::exp(1.0);
  std::string os_dist, os_schedule;
  auto* os_cmd = app.add_subcommand("oscillate", "t(c) on a grid, or k*(n), c(n) along a schedule");
  os_cmd->add_option("--grid", os_grid, "grid points on [c-min, c-max]")->capture_default_str();
  os_cmd->add_option("--c-min", os_cmin)->capture_default_str();
  os_cmd->add_option("--c-max", os_cmax)->capture_default_str();
  os_cmd->add_option("--dist", os_dist, "with --schedule: report k*(n) and c(n)");
  os_cmd->add_option("--schedule", os_schedule);
  add_common(os_cmd, os_c, true);

  // dominates
  Common dm_c;
  std::string dm_q, dm_p;
  DominanceOptions dm_opts;
  auto* dm_cmd = app.add_subcommand("dominates", "does Q dominate P (finite depth)");
  dm_cmd->add_option("--q", dm_q, "dominating family Q")->required();
  dm_cmd->add_option("--p", dm_p, "dominated family P")->required();
  dm_cmd->add_option("--depth", dm_opts.depth)->capture_default_str();
  dm_cmd->add_option("--probe-limit", dm_opts.probe_limit)->capture_default_str();
  dm_cmd->add_option("--growth-threshold", dm_opts.growth_threshold)->capture_default_str();
  add_common(dm_cmd, dm_c, false);

  // estimate
  Common es_c;
  std::string es_dist, es_v, es_freq_in, es_freq_out;
  std::uint64_t es_n = 0, es_seed = 0;
  auto* es_cmd = app.add_subcommand("estimate", "Z_{1,v} and t-hat from a sample");
  es_cmd->add_option("--dist", es_dist, "family to sample from");
  es_cmd->add_option("--n", es_n, "sample size");
  es_cmd->add_option("--v", es_v, "v values: a:b, a, or a,b,c (default 1:n-1)");
  es_cmd->add_option("--seed", es_seed)->capture_default_str();
  es_cmd->add_option("--freq-in", es_freq_in, "read the frequency table (k,y CSV) instead of sampling");
  es_cmd->add_option("--freq-out", es_freq_out, "also write the frequency table as k,y CSV");
  add_common(es_cmd, es_c, false);

  // zoo
  Common zo_c;
  auto* zo_cmd = app.add_subcommand("zoo", "catalogue of family specs");
  add_common(zo_cmd, zo_c, false);

  // domain-t
  Common dt_c;
  int dt_stages = 12;
  auto* dt_cmd = app.add_subcommand("domain-t", "run table of the diffusion sequence");
  dt_cmd->add_option("--stages", dt_stages)->capture_default_str();
  add_common(dt_cmd, dt_c, true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    Table table;
    const Common* common = nullptr;

    if (*tn_cmd) {
      common = &tn_c;
      const Distribution dist = load(tn_dist);
      const auto schedule = parse_schedule(tn_schedule);
      table.columns = {"n", "t_n", "trunc_error"};
      bool all_within = true;
      for (std::uint64_t n : schedule) {
        const IndexValue v = tn(dist, n, tn_c.eps);
        all_within = all_within && v.within_eps;
        table.rows.push_back({v.n, v.value, v.trunc_error});
      }
      if (!all_within)
        err << "warning: some points could not be certified to eps; see trunc_error\n";
      table.meta["command"] = "tn";
      table.meta["dist"] = format_family_spec(dist.spec());
      table.meta["eps"] = tn_c.eps;
      table.meta["within_eps"] = all_within;
    } else if (*cl_cmd) {
      common = &cl_c;
      const Distribution dist = load(cl_dist);
      DomainVerdict v;
      if (cl_mode == "analytic") {
        v = classify_analytic(dist);
      } else {
        Thresholds th;
        if (!cl_thresholds.empty()) {
          std::ifstream f(cl_thresholds);
          if (!f) fail(Errc::Io, "cannot read " + cl_thresholds);
          std::stringstream ss;
          ss << f.rdbuf();
          th = parse_thresholds(ss.str());
        }
        // Run starts are the natural probes for the diffusion sequence.
        const Probes probes = dist.kind() == FamilyKind::Diffusion ? diffusion_probes(dist) : Probes{};
        v = classify_numeric(dist, parse_schedule(cl_schedule), th, probes);
      }
      table.columns = {"domain", "method", "citation", "growth_exponent", "decay_ratio",
                       "band_min", "band_max"};
      table.rows.push_back({std::string(domain_name(v.domain)), std::string(method_name(v.method)),
                            v.citation, v.diagnostics.growth_exponent, v.diagnostics.decay_ratio,
                            v.diagnostics.band_min, v.diagnostics.band_max});
      table.meta["command"] = "classify";
      table.meta["dist"] = format_family_spec(dist.spec());
      table.meta["verdict"] = domain_json(v);
    } else if (*os_cmd) {
      common = &os_c;
      table.meta["command"] = "oscillate";
      if (!os_dist.empty() || !os_schedule.empty()) {
        if (os_dist.empty() || os_schedule.empty())
          fail(Errc::InvalidParams, "--dist and --schedule go together");
        const Distribution dist = load(os_dist);
        table.columns = {"n", "k_star", "c_of_n", "t_n", "t_of_c"};
        for (std::uint64_t n : parse_schedule(os_schedule)) {
          const OscillationState s = oscillation_state(dist, n);
          table.rows.push_back({n, s.k_star, s.c_of_n, tn(dist, n, os_c.eps).value,
                                oscillation_t(s.c_of_n)});
        }
        table.meta["dist"] = format_family_spec(dist.spec());
      } else {
        if (os_grid < 2) fail(Errc::InvalidParams, "--grid must be >= 2");
        if (!(os_cmin > 0) || !(os_cmax > os_cmin)) fail(Errc::InvalidParams, "need 0 < c-min < c-max");
        table.columns = {"c", "t_of_c"};
        for (std::size_t i = 0; i < os_grid; ++i) {
          const double c = os_cmin + (os_cmax - os_cmin) * static_cast<double>(i) /
                                         static_cast<double>(os_grid - 1);
          table.rows.push_back({c, oscillation_t(c)});
        }
      }
    } else if (*dm_cmd) {
      common = &dm_c;
      const Distribution q = load(dm_q);
      const Distribution p = load(dm_p);
      const DominanceReport r = dominates(q, p, dm_opts);
      table.columns = {"k", "count_in_interval"};
      for (std::size_t k = 0; k < r.counts.size(); ++k)
        table.rows.push_back({static_cast<std::uint64_t>(k + 1), r.counts[k]});
      table.meta["command"] = "dominates";
      table.meta["q"] = format_family_spec(q.spec());
      table.meta["p"] = format_family_spec(p.spec());
      table.meta["depth"] = r.depth;
      table.meta["verdict"] = verdict_name(r.verdict);
      table.meta["max_count"] = r.max_count;
      table.meta["tail_max_count"] = r.tail_max_count;
      table.meta["above_top"] = r.above_top;
      table.meta["scanned"] = r.scanned;
      table.meta["complete"] = r.complete;
    } else if (*es_cmd) {
      common = &es_c;
      FrequencyTable freq;
      std::optional<Distribution> dist;
      if (!es_dist.empty()) dist = load(es_dist);
      if (!es_freq_in.empty()) {
        std::ifstream f(es_freq_in);
        if (!f) fail(Errc::Io, "cannot read " + es_freq_in);
        freq = read_csv(f);
      } else {
        if (!dist) fail(Errc::InvalidParams, "estimate needs --dist or --freq-in");
        if (es_n < 2) fail(Errc::InvalidParams, "--n must be >= 2");
        freq = sample(*dist, es_n, es_seed);
      }
      if (!es_freq_out.empty()) {
        std::ostringstream os;
        write_csv(os, freq);
        write_text(es_freq_out, os.str());
      }
      const auto vs = es_v.empty() ? parse_v_list("1:" + std::to_string(freq.n - 1)) : parse_v_list(es_v);
      const EstimatorReport rep = estimator_report(freq, vs);
      table.columns = {"v", "Z_1v", "t_hat"};
      for (std::size_t i = 0; i < rep.v_values.size(); ++i)
        table.rows.push_back({rep.v_values[i], rep.z1v[i], rep.t_hat[i]});
      table.meta["command"] = "estimate";
      if (dist) table.meta["dist"] = format_family_spec(dist->spec());
      table.meta["n"] = freq.n;
      table.meta["seed"] = es_seed;
      table.meta["distinct_letters"] = freq.counts.size();
      table.meta["N1"] = freq.N1;
      table.meta["turing"] = turing(freq);
      if (dist) table.meta["true_missing_mass"] = true_missing_mass(*dist, freq);
    } else if (*zo_cmd) {
      common = &zo_c;
      const std::vector<std::pair<std::string, FamilySpec>> zoo = {
          {"finite", FamilySpec::finite({0.5, 0.3, 0.2})},
          {"uniform10", FamilySpec::finite(std::vector<double>(10, 0.1))},
          {"geometric2", FamilySpec::geometric(2.0)},
          {"geometric_e", FamilySpec::geometric(std::exp(1.0))},
          {"gaussian", FamilySpec::gaussian_type(1.0)},
          {"tilted_down", FamilySpec::tilted_geometric(-1.0, 1.0)},
          {"tilted_up", FamilySpec::tilted_geometric(1.0, 1.0)},
          {"power2", FamilySpec::power(2.0)},
          {"power1.5", FamilySpec::power(1.5)},
          {"logpower2", FamilySpec::log_power(2.0)},
          {"congregated", FamilySpec::congregated(FamilySpec::geometric(2.0))},
          {"pairavg", FamilySpec::pair_averaged(FamilySpec::geometric(2.0))},
          {"diffusion", FamilySpec::diffusion()},
      };
      table.columns = {"name", "spec", "analytic_domain"};
      for (const auto& [name, spec] : zoo) {
        const DomainVerdict v = classify_analytic(make_distribution(spec));
        table.rows.push_back({name, format_family_spec(spec), std::string(domain_name(v.domain))});
      }
      table.meta["command"] = "zoo";
    } else if (*dt_cmd) {
      common = &dt_c;
      if (dt_stages < 1 || dt_stages >= kMaxDiffusionStages)
        fail(Errc::StagesExceeded, "--stages must lie in [1, " +
                                       std::to_string(kMaxDiffusionStages - 1) + "]");
      // One extra stage so the last listed run has a certified tail.
      const Distribution dist = make_distribution(FamilySpec::diffusion(dt_stages + 1));
      table.columns = {"i", "d_i", "run_exponent", "k_i", "n_i", "t_n_i", "lower_bound", "m_i", "t_m_i"};
      const Probes probes = diffusion_probes(dist);
      const auto& runs = diffusion_runs(dist);
      for (std::size_t i = 0; i < static_cast<std::size_t>(dt_stages); ++i) {
        const DiffusionRun& r = runs[i];
        const double t_n = tn_log2(dist, probes.growing[i], dt_c.eps).value;
        const double t_m = tn_log2(dist, probes.bounded[i], dt_c.eps).value;
        table.rows.push_back({static_cast<std::uint64_t>(r.stage), r.d, r.exponent, r.first_index,
                              pow2_text(r.exponent, false), t_n, run_lower_bound(r.d, r.exponent),
                              pow2_text(r.pre_exponent, true), t_m});
      }
      table.meta["command"] = "domain-t";
      table.meta["stages"] = dt_stages;
    }

    check_finite(table);
    const std::string text = render(table, common->format);
    if (common->out.empty()) {
      out << text;
    } else {
      write_text(common->out, text);
    }
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? kValidationError : kComputationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputationError;
  }
}

}  // namespace tailidx::cli
