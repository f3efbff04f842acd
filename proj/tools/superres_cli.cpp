// Copyright 2026 The superres Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// superres-cli: overlap tables, information regrets, gauge diagnostics and
// Monte Carlo runs for a pair of incoherent point sources.
//
// Usage: superres-cli <overlaps|regrets|gauge|simulate> [--config PATH]
//                     [--out PATH] [--seed U64] [options]
//
// All CSV lengths are reported in units of the PSF width.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "superres/superres.h"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Statuses caused by user input map to the configuration exit code.
void check(sr_status st, const std::string& context) {
  if (st == SR_OK) return;
  std::string msg = context + ": " + sr_status_name(st) + ": " + sr_last_error_message();
  if (st == SR_INVALID_ARGUMENT || st == SR_IO_ERROR || st == SR_ALIGNMENT_OUT_OF_RANGE)
    throw ConfigError(msg);
  throw NumericError(msg);
}

struct PsfDeleter {
  void operator()(sr_psf* p) const { sr_psf_destroy(p); }
};
struct ModelDeleter {
  void operator()(sr_model* p) const { sr_model_destroy(p); }
};
struct MeasurementDeleter {
  void operator()(sr_measurement* p) const { sr_measurement_destroy(p); }
};
using PsfHandle = std::unique_ptr<sr_psf, PsfDeleter>;
using ModelHandle = std::unique_ptr<sr_model, ModelDeleter>;
using MeasurementHandle = std::unique_ptr<sr_measurement, MeasurementDeleter>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out += ',';
    out += fields[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::string> kMeasurementNames{"direct", "spade", "joint",
                                                 "joint_least_norm", "sld1", "sld2"};

struct RunConfig {
  double sigma = 1.0;
  std::string psf_file;
  double theta1 = 0.0;
  std::optional<double> theta2;
  struct Sweep {
    double from;
    double to;
    int steps;
  };
  std::optional<Sweep> sweep;
  std::vector<std::string> measurements;
  double pixel_width = 0.0;  // 0 selects the library default
  double half_range = 0.0;
  std::optional<double> alignment;
  int q_max = 20;
  std::uint64_t photons = 100000;
  std::uint32_t trials = 500;
  unsigned threads = 0;
  std::optional<std::array<double, 4>> box;
  std::uint64_t seed = 1;
  std::string output;
};

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }))
      throw ConfigError("config: unknown key '" + (where.empty() ? key : where + "." + key) +
                        "'");
  }
}

template <class T>
std::optional<T> field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  const std::string path = where.empty() ? key : where + "." + key;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError("config: '" + path + "' must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError("config: '" + path + "' must be an integer");
    if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned())
      throw ConfigError("config: '" + path + "' must be non-negative");
  } else {
    if (!v.is_number()) throw ConfigError("config: '" + path + "' must be a number");
  }
  return v.get<T>();
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  reject_unknown(doc, "", {"psf", "scene", "sweep", "measurements", "direct", "spade",
                           "montecarlo", "seed", "output"});
  RunConfig cfg;
  if (doc.contains("psf")) {
    const json& p = doc["psf"];
    reject_unknown(p, "psf", {"sigma", "file"});
    if (auto v = field<double>(p, "sigma", "psf")) cfg.sigma = *v;
    if (auto v = field<std::string>(p, "file", "psf")) cfg.psf_file = *v;
    if (p.contains("sigma") && p.contains("file"))
      throw ConfigError("config: 'psf.sigma' and 'psf.file' are mutually exclusive");
  }
  if (doc.contains("scene")) {
    const json& s = doc["scene"];
    reject_unknown(s, "scene", {"theta1", "theta2"});
    if (auto v = field<double>(s, "theta1", "scene")) cfg.theta1 = *v;
    cfg.theta2 = field<double>(s, "theta2", "scene");
  }
  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    reject_unknown(s, "sweep", {"from", "to", "steps"});
    auto from = field<double>(s, "from", "sweep");
    auto to = field<double>(s, "to", "sweep");
    auto steps = field<int>(s, "steps", "sweep");
    if (!from || !to || !steps)
      throw ConfigError("config: 'sweep' needs 'from', 'to' and 'steps'");
    cfg.sweep = RunConfig::Sweep{*from, *to, *steps};
  }
  if (doc.contains("measurements")) {
    const json& m = doc["measurements"];
    if (!m.is_array()) throw ConfigError("config: 'measurements' must be an array");
    for (const json& e : m) {
      if (!e.is_string()) throw ConfigError("config: 'measurements' entries must be strings");
      cfg.measurements.push_back(e.get<std::string>());
    }
  }
  if (doc.contains("direct")) {
    const json& d = doc["direct"];
    reject_unknown(d, "direct", {"pixel_width", "half_range"});
    if (auto v = field<double>(d, "pixel_width", "direct")) cfg.pixel_width = *v;
    if (auto v = field<double>(d, "half_range", "direct")) cfg.half_range = *v;
  }
  if (doc.contains("spade")) {
    const json& d = doc["spade"];
    reject_unknown(d, "spade", {"alignment", "q_max"});
    cfg.alignment = field<double>(d, "alignment", "spade");
    if (auto v = field<int>(d, "q_max", "spade")) cfg.q_max = *v;
  }
  if (doc.contains("montecarlo")) {
    const json& d = doc["montecarlo"];
    reject_unknown(d, "montecarlo", {"photons", "trials", "threads", "box"});
    if (auto v = field<std::uint64_t>(d, "photons", "montecarlo")) cfg.photons = *v;
    if (auto v = field<std::uint32_t>(d, "trials", "montecarlo")) cfg.trials = *v;
    if (auto v = field<unsigned>(d, "threads", "montecarlo")) cfg.threads = *v;
    if (d.contains("box")) {
      const json& b = d["box"];
      reject_unknown(b, "montecarlo.box", {"theta1_lo", "theta1_hi", "theta2_lo", "theta2_hi"});
      std::array<double, 4> box{};
      const char* keys[4] = {"theta1_lo", "theta1_hi", "theta2_lo", "theta2_hi"};
      for (int i = 0; i < 4; ++i) {
        auto v = field<double>(b, keys[i], "montecarlo.box");
        if (!v) throw ConfigError(std::string("config: 'montecarlo.box' needs '") + keys[i] + "'");
        box[i] = *v;
      }
      cfg.box = box;
    }
  }
  if (auto v = field<std::uint64_t>(doc, "seed", "")) cfg.seed = *v;
  if (auto v = field<std::string>(doc, "output", "")) cfg.output = *v;
  return cfg;
}

// ---------------------------------------------------------------------------
// Execution context shared by the subcommands

struct Context {
  RunConfig cfg;
  PsfHandle psf;
  double sigma = 1.0;
  std::vector<double> theta2s;
};

Context prepare(RunConfig cfg, bool allow_sweep) {
  Context ctx;
  sr_psf* psf = nullptr;
  if (!cfg.psf_file.empty())
    check(sr_psf_load(cfg.psf_file.c_str(), &psf), "psf");
  else
    check(sr_psf_create_gaussian(cfg.sigma, &psf), "psf");
  ctx.psf.reset(psf);
  check(sr_psf_width(psf, &ctx.sigma), "psf");
  const double s = ctx.sigma;

  if (!std::isfinite(cfg.theta1)) throw ConfigError("config: 'scene.theta1' must be finite");
  if (cfg.sweep && cfg.theta2)
    throw ConfigError("config: 'scene.theta2' and 'sweep' are mutually exclusive");
  if (cfg.sweep) {
    if (!allow_sweep) throw ConfigError("config: this command takes a single scene, not a sweep");
    const auto& w = *cfg.sweep;
    if (w.steps < 2) throw ConfigError("config: 'sweep.steps' must be >= 2");
    for (double b : {w.from, w.to}) {
      if (!(b > 0.05 * s && b < 10.0 * s))
        throw ConfigError("config: sweep bounds must lie in (0.05, 10) PSF widths, got " +
                          num(b / s));
    }
    if (!(w.from < w.to)) throw ConfigError("config: 'sweep.from' must be below 'sweep.to'");
    for (int i = 0; i < w.steps; ++i)
      ctx.theta2s.push_back(i == w.steps - 1
                                ? w.to
                                : w.from + (w.to - w.from) * i / (w.steps - 1));
  } else if (cfg.theta2) {
    if (!(*cfg.theta2 > 0.0) || !std::isfinite(*cfg.theta2))
      throw ConfigError("config: 'scene.theta2' must be positive");
    ctx.theta2s.push_back(*cfg.theta2);
  } else {
    throw ConfigError("config: either 'scene.theta2' or 'sweep' is required");
  }
  for (const auto& m : cfg.measurements) {
    if (std::find(kMeasurementNames.begin(), kMeasurementNames.end(), m) ==
        kMeasurementNames.end())
      throw ConfigError("config: unknown measurement '" + m + "'");
  }
  if (cfg.photons == 0) throw ConfigError("config: 'montecarlo.photons' must be >= 1");
  if (cfg.trials == 0) throw ConfigError("config: 'montecarlo.trials' must be >= 1");
  ctx.cfg = std::move(cfg);
  return ctx;
}

// Evaluates f(i) for every sweep index in parallel; rows are returned in
// index order. The first failure (lowest index) is rethrown.
std::vector<std::vector<std::string>> parallel_rows(
    std::size_t count, const std::function<std::vector<std::string>(std::size_t)>& f) {
  std::vector<std::vector<std::string>> rows(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        rows[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::clamp<unsigned>(std::thread::hardware_concurrency(), 1u,
                                          static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

ModelHandle make_model(const Context& ctx, double theta2) {
  sr_model* m = nullptr;
  check(sr_model_create(ctx.psf.get(), ctx.cfg.theta1, theta2, &m),
        "model at theta2=" + num(theta2 / ctx.sigma));
  return ModelHandle(m);
}

// Returns null when the measurement does not exist at this scene.
MeasurementHandle make_measurement(const Context& ctx, const sr_model* model,
                                   const std::string& name, std::string* why) {
  sr_measurement* m = nullptr;
  sr_status st = SR_OK;
  if (name == "direct") {
    st = sr_measurement_direct(ctx.psf.get(), ctx.cfg.pixel_width, ctx.cfg.half_range, &m);
  } else if (name == "spade") {
    st = sr_measurement_spade(ctx.psf.get(), ctx.cfg.alignment.value_or(ctx.cfg.theta1),
                              ctx.cfg.q_max, &m);
  } else if (name == "joint" || name == "joint_least_norm") {
    st = sr_measurement_joint(model,
                              name == "joint" ? SR_GAUGE_CLOSED_FORM : SR_GAUGE_LEAST_NORM, &m);
    if (st == SR_NO_SOLUTION || st == SR_GAUGE_INVALID || st == SR_NOT_COMMUTING) {
      *why = std::string(sr_status_name(st)) + ": " + sr_last_error_message();
      return nullptr;
    }
  } else {
    st = sr_measurement_sld(model, name == "sld1" ? 1 : 2, &m);
  }
  check(st, "measurement '" + name + "'");
  return MeasurementHandle(m);
}

// ---------------------------------------------------------------------------
// Commands

using Rows = std::vector<std::vector<std::string>>;

std::string cmd_overlaps(const Context& ctx) {
  const double s = ctx.sigma;
  const Rows rows = parallel_rows(ctx.theta2s.size(), [&](std::size_t i) {
    const double t = ctx.theta2s[i];
    sr_overlaps a{}, q{};
    check(sr_overlaps_compute(ctx.psf.get(), t, &a), "overlaps at theta2=" + num(t / s));
    check(sr_overlaps_quadrature(ctx.psf.get(), t, 12.0, 2001, SR_QUADRATURE_TRAPEZOID, &q),
          "quadrature at theta2=" + num(t / s));
    return std::vector<std::string>{join({num(t / s), num(a.delta), num(a.kappa * s * s),
                                          num(a.gamma * s), num(a.beta * s * s),
                                          num(a.eta3 * s), num(a.eta4 * s),
                                          num((a.beta - q.beta) * s * s)})};
  });
  std::string out = "theta2,delta,kappa,gamma,beta,eta3,eta4,beta_quadrature_diff\n";
  for (const auto& r : rows) out += r.front() + '\n';
  return out;
}

std::string cmd_regrets(const Context& ctx) {
  const double s = ctx.sigma;
  std::vector<std::string> names = ctx.cfg.measurements;
  if (names.empty()) names = {"direct", "spade", "joint"};
  std::vector<std::string> notes(ctx.theta2s.size());
  const Rows rows = parallel_rows(ctx.theta2s.size(), [&](std::size_t i) {
    const double t = ctx.theta2s[i];
    const ModelHandle model = make_model(ctx, t);
    std::vector<std::string> lines;
    for (const auto& name : names) {
      std::string why;
      const MeasurementHandle m = make_measurement(ctx, model.get(), name, &why);
      if (!m) {
        notes[i] += "regrets: theta2=" + num(t / s) + ": no '" + name + "' measurement (" +
                    why + ")\n";
        continue;
      }
      sr_regrets r{};
      check(sr_measurement_regrets(m.get(), model.get(), &r),
            "regrets of '" + name + "' at theta2=" + num(t / s));
      lines.push_back(join({num(t / s), name, num(r.fim[0] * s * s), num(r.fim[3] * s * s),
                            num(r.fim[1] * s * s), num(r.qfi[0] * s * s),
                            num(r.qfi[3] * s * s), num(r.c), num(r.delta1), num(r.delta2),
                            num(r.irtr_slack)}));
    }
    return lines;
  });
  for (const auto& n : notes) std::cerr << n;
  std::string out = "theta2,measurement,F11,F22,F12,QFI11,QFI22,c,delta1,delta2,irtr_slack\n";
  for (const auto& r : rows)
    for (const auto& line : r) out += line + '\n';
  return out;
}

std::string cmd_gauge(const Context& ctx, std::string* dump) {
  const double s = ctx.sigma;
  const double s2 = s * s;
  std::vector<std::string> text(ctx.theta2s.size());
  std::vector<std::string> dumps(ctx.theta2s.size());
  const Rows rows = parallel_rows(ctx.theta2s.size(), [&](std::size_t i) {
    const double t = ctx.theta2s[i];
    const ModelHandle model = make_model(ctx, t);
    std::vector<std::string> lines;
    std::ostringstream summary;
    summary << "theta2 = " << num(t / s) << '\n';
    for (auto solver : {SR_GAUGE_CLOSED_FORM, SR_GAUGE_LEAST_NORM}) {
      const char* name = solver == SR_GAUGE_CLOSED_FORM ? "closed_form" : "least_norm";
      sr_gauge g{};
      const sr_status st = sr_model_gauge(model.get(), solver, &g);
      std::vector<std::string> f{num(t / s), name};
      if (st == SR_OK) {
        f.push_back("ok");
        for (double v : g.k1_pauli) f.push_back(num(v * s));
        for (double v : g.k2_pauli) f.push_back(num(v * s));
        for (double v : {g.c0_residual, g.c1_residual, g.c2_residual, g.commutator_norm})
          f.push_back(num(v * s2));
        f.push_back(std::to_string(g.iterations));
        for (double v : g.eigenvalues) f.push_back(num(v * s));
        summary << "  " << name << ": ok, |[L1',L2']| = " << num(g.commutator_norm * s2)
                << ", K1 = (" << num(g.k1_pauli[0] * s) << ", " << num(g.k1_pauli[1] * s)
                << ", " << num(g.k1_pauli[2] * s) << ", " << num(g.k1_pauli[3] * s)
                << "), K2 = (" << num(g.k2_pauli[0] * s) << ", " << num(g.k2_pauli[1] * s)
                << ", " << num(g.k2_pauli[2] * s) << ", " << num(g.k2_pauli[3] * s) << ")\n";
      } else if (st == SR_NO_SOLUTION || st == SR_GAUGE_INVALID || st == SR_DOMAIN_ERROR ||
                 st == SR_NOT_COMMUTING) {
        f.push_back("no_solution");
        for (int k = 0; k < 8; ++k) f.emplace_back();
        f.push_back(num(g.c0_residual * s2));
        for (int k = 0; k < 12; ++k) f.emplace_back();
        summary << "  " << name << ": no solution (" << sr_status_name(st)
                << "), C0 residual = " << num(g.c0_residual * s2) << '\n';
      } else {
        check(st, std::string("gauge solver '") + name + "'");
      }
      lines.push_back(join(f));
    }
    text[i] = summary.str();
    if (dump != nullptr) {
      size_t needed = 0;
      sr_model_gauge_json(model.get(), nullptr, 0, &needed);
      std::string buf(needed, '\0');
      check(sr_model_gauge_json(model.get(), buf.data(), buf.size(), &needed), "gauge dump");
      buf.resize(needed - 1);
      dumps[i] = std::move(buf);
    }
    return lines;
  });
  for (const auto& t : text) std::cerr << t;
  if (dump != nullptr) {
    json all = json::array();
    for (const auto& d : dumps) all.push_back(json::parse(d));
    *dump = all.dump(2) + '\n';
  }
  std::string out =
      "theta2,solver,status,k1_v0,k1_v1,k1_v2,k1_v3,k2_v0,k2_v1,k2_v2,k2_v3,"
      "c0_residual,c1_residual,c2_residual,commutator_norm,iterations,"
      "lambda1_1,lambda2_1,lambda1_2,lambda2_2,lambda1_3,lambda2_3,lambda1_4,lambda2_4\n";
  for (const auto& r : rows)
    for (const auto& line : r) out += line + '\n';
  return out;
}

std::string cmd_simulate(const Context& ctx) {
  const double s = ctx.sigma;
  const double s2 = s * s;
  const ModelHandle model = make_model(ctx, ctx.theta2s.front());
  std::vector<std::string> names = ctx.cfg.measurements;
  if (names.empty()) names = {"joint"};

  sr_trial_config tc{};
  check(sr_trial_config_default(model.get(), &tc), "simulate");
  tc.photons = ctx.cfg.photons;
  tc.trials = ctx.cfg.trials;
  tc.seed = ctx.cfg.seed;
  tc.threads = ctx.cfg.threads;
  if (ctx.cfg.box) {
    const auto& b = *ctx.cfg.box;
    tc.theta1_lo = b[0];
    tc.theta1_hi = b[1];
    tc.theta2_lo = b[2];
    tc.theta2_hi = b[3];
  }

  std::string out = "measurement,N,trials,var1,var2,crb1,crb2,ratio1,ratio2,seed\n";
  for (const auto& name : names) {
    std::string why;
    const MeasurementHandle m = make_measurement(ctx, model.get(), name, &why);
    if (!m) throw NumericError("simulate: no '" + name + "' measurement at this scene (" + why + ")");
    sr_trial_summary r{};
    check(sr_simulate(m.get(), model.get(), &tc, &r, nullptr), "simulate '" + name + "'");
    if (r.boundary_warning)
      std::cerr << "simulate: warning: " << num(100.0 * r.boundary_fraction)
                << "% of '" << name << "' estimates lie on the search-box boundary\n";
    out += join({name, std::to_string(tc.photons), std::to_string(tc.trials),
                 num(r.cov[0] / s2), num(r.cov[3] / s2), num(r.crb[0] / s2), num(r.crb[3] / s2),
                 num(r.ratio[0]), num(r.ratio[1]), std::to_string(tc.seed)}) +
           '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-source superresolution: overlaps, regrets, gauge and simulation"};
  app.require_subcommand(1, 1);

  std::string config_path, out_path, dump_path, psf_file, measurement_list;
  std::optional<std::uint64_t> seed, photons;
  std::optional<std::uint32_t> trials;
  std::optional<unsigned> threads;
  std::optional<double> sigma, theta1, theta2, from, to;
  std::optional<int> steps;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "CSV output path (default: stdout)");
    sub->add_option("--seed", seed, "Random seed (overrides the configuration)");
    sub->add_option("--sigma", sigma, "Gaussian PSF width");
    sub->add_option("--psf-file", psf_file, "Tabulated PSF (two columns: x, amplitude)");
    sub->add_option("--theta1", theta1, "Centroid");
    sub->add_option("--theta2", theta2, "Separation (single scene)");
    sub->add_option("--from", from, "Sweep start (separation)");
    sub->add_option("--to", to, "Sweep end (separation)");
    sub->add_option("--steps", steps, "Sweep points");
  };
  CLI::App* overlaps = app.add_subcommand("overlaps", "Overlap integrals per separation");
  CLI::App* regrets = app.add_subcommand("regrets", "Fisher information and regrets");
  CLI::App* gauge = app.add_subcommand("gauge", "Commuting SLD gauge diagnostics");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimation vs. CRB");
  for (CLI::App* sub : {overlaps, regrets, gauge, simulate}) add_common(sub);
  for (CLI::App* sub : {regrets, simulate})
    sub->add_option("--measurements", measurement_list,
                    "Comma-separated list: direct, spade, joint, joint_least_norm, sld1, sld2");
  gauge->add_option("--dump", dump_path, "Write JSON diagnostics to this path");
  simulate->add_option("--photons", photons, "Photons per trial");
  simulate->add_option("--trials", trials, "Number of trials");
  simulate->add_option("--threads", threads, "Worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config(config_path);
    if (sigma) cfg.sigma = *sigma, cfg.psf_file.clear();
    if (!psf_file.empty()) cfg.psf_file = psf_file;
    if (theta1) cfg.theta1 = *theta1;
    if (theta2) cfg.theta2 = *theta2, cfg.sweep.reset();
    if (from || to || steps) {
      if (!(from && to && steps)) throw ConfigError("--from, --to and --steps go together");
      cfg.sweep = RunConfig::Sweep{*from, *to, *steps};
      cfg.theta2.reset();
    }
    if (config_path.empty() && !cfg.theta2 && !cfg.sweep) cfg.theta2 = 2.0 * cfg.sigma;
    if (!measurement_list.empty()) {
      cfg.measurements.clear();
      std::stringstream ss(measurement_list);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) cfg.measurements.push_back(item);
    }
    if (seed) cfg.seed = *seed;
    if (photons) cfg.photons = *photons;
    if (trials) cfg.trials = *trials;
    if (threads) cfg.threads = *threads;
    if (!out_path.empty()) cfg.output = out_path;

    const bool is_simulate = app.got_subcommand(simulate);
    const Context ctx = prepare(std::move(cfg), !is_simulate);
    std::string csv;
    if (app.got_subcommand(overlaps)) {
      csv = cmd_overlaps(ctx);
    } else if (app.got_subcommand(regrets)) {
      csv = cmd_regrets(ctx);
    } else if (app.got_subcommand(gauge)) {
      std::string dump;
      csv = cmd_gauge(ctx, dump_path.empty() ? nullptr : &dump);
      if (!dump_path.empty()) write_text(dump_path, dump);
    } else {
      csv = cmd_simulate(ctx);
    }
    write_text(ctx.cfg.output, csv);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
