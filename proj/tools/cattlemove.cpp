// cattlemove: census imputation, movement estimation, herd simulation and
// invasion thresholds as separate pipeline stages.
//
// Every stage reads its inputs from the data directory (census files and
// centroids) or the output directory (earlier stage results), writes into the
// output directory and records hashes, configuration and timing in
// <out>/manifest.json. Failures print one line
//   error: stage=<stage> code=<exit code> message="<text>"
// and remove whatever the failing stage had written.
//
// Exit codes: 0 ok, 1 user or data error, 2 missing input, 3 solver failure.

#include <openssl/evp.h>
#include <zlib.h>

#include <CLI11.hpp>
#include <array>
#include <chrono>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cattle/census.hpp"
#include "cattle/csv.hpp"
#include "cattle/epi.hpp"
#include "cattle/geo.hpp"
#include "cattle/impute.hpp"
#include "cattle/movement.hpp"
#include "cattle/report.hpp"
#include "cattle/sim.hpp"
#include "cattle/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cattle;

namespace {

enum ExitCode { kOk = 0, kUserError = 1, kMissingInput = 2, kSolverFailure = 3 };

class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::array<std::string_view, kTypeB> kRateTypes = {"dairy", "preslaughter", "beef"};
constexpr std::array<std::string_view, 3> kRateKinds = {"expire", "slaughter", "birth"};

struct Options {
  fs::path data = "data";
  fs::path out = "out";
  maxent::Tolerances tol;
  // type x kind x {min, max}
  std::array<std::optional<double>, kTypeB * 3 * 2> rates;
  sim::SimulationConfig sim;
  std::string integerization = "round";
  bool events = false;
  double r0 = 1.2;
  double mu = 1.0;
  synth::SynthConfig synth;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> perturbation;
};

movement::RateBounds rate_bounds(const Options& o) {
  auto b = movement::default_rate_bounds();
  for (int t = 0; t < kTypeB; ++t) {
    std::array<movement::Range*, 3> kinds = {&b.expire[t], &b.slaughter[t], &b.birth[t]};
    for (int k = 0; k < 3; ++k) {
      if (const auto& lo = o.rates[(t * 3 + k) * 2]) kinds[k]->min = *lo;
      if (const auto& hi = o.rates[(t * 3 + k) * 2 + 1]) kinds[k]->max = *hi;
    }
  }
  movement::check_rate_bounds(b);
  return b;
}

json config_json(const Options& o) {
  json j;
  j["data"] = o.data.generic_string();
  j["out"] = o.out.generic_string();
  j["tolerances"] = {{"feasibility", o.tol.feasibility},
                     {"kkt", o.tol.kkt},
                     {"gap", o.tol.gap},
                     {"max_iterations", o.tol.max_iterations}};
  const auto b = rate_bounds(o);
  json rates;
  for (int t = 0; t < kTypeB; ++t) {
    const std::array<movement::Range, 3> kinds = {b.expire[t], b.slaughter[t], b.birth[t]};
    for (int k = 0; k < 3; ++k) {
      rates[std::string(kRateTypes[t]) + "_" + std::string(kRateKinds[k])] = {kinds[k].min, kinds[k].max};
    }
  }
  j["rate_bounds"] = std::move(rates);
  j["simulation"] = {{"years", o.sim.years},
                     {"weeks_per_year", o.sim.weeks_per_year},
                     {"replicates", o.sim.replicates},
                     {"seed", o.sim.seed},
                     {"integerization", o.integerization},
                     {"row_sum_tolerance", o.sim.row_sum_tolerance},
                     {"events", o.events}};
  j["epidemic"] = {{"r0", o.r0}, {"mu", o.mu}};
  j["synth"] = {{"seed", o.synth.seed},
                {"states", o.synth.states},
                {"counties_per_state", o.synth.counties_per_state},
                {"suppression_threshold", o.synth.suppression_threshold},
                {"perturbation", o.synth.perturbation ? json(*o.synth.perturbation) : json(nullptr)}};
  return j;
}

std::string sha256_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buf;
  while (f.read(buf.data(), buf.size()) || f.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

json file_entries(const std::vector<fs::path>& files) {
  json arr = json::array();
  for (const auto& f : files) {
    arr.push_back({{"path", f.lexically_normal().generic_string()},
                   {"sha256", sha256_file(f)},
                   {"bytes", fs::file_size(f)}});
  }
  return arr;
}

// Name of the stage currently running, for error lines.
std::string g_stage = "cli";

class Stage {
 public:
  explicit Stage(std::string name) : name_(std::move(name)) {}

  fs::path input(const fs::path& p) {
    if (!fs::exists(p)) throw MissingInput("missing input file " + p.string());
    return inputs_.emplace_back(p);
  }
  fs::path output(const fs::path& p) { return outputs_.emplace_back(p); }

  /// Removes everything this stage declared as output.
  void discard() const {
    std::error_code ec;
    for (const auto& p : outputs_) fs::remove_all(p, ec);
  }

  const std::string& name() const { return name_; }
  const std::vector<fs::path>& inputs() const { return inputs_; }
  const std::vector<fs::path>& produced() const { return outputs_; }

 private:
  std::string name_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
};

void warn(const std::string& where, const std::string& message) {
  std::cerr << "warning: stage=" << g_stage << " where=" << where << " message=\"" << message << "\"\n";
}

void record(const Options& o, const Stage& st, double seconds) {
  const fs::path path = o.out / "manifest.json";
  json m;
  if (std::ifstream f(path); f) {
    m = json::parse(f, nullptr, false);
    if (m.is_discarded() || !m.is_object()) m = json::object();
  }
  m["tool"] = "cattlemove";
  json entry;
  entry["config"] = config_json(o);
  entry["inputs"] = file_entries(st.inputs());
  std::vector<fs::path> files;
  for (const auto& p : st.produced()) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> inner;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file()) inner.push_back(e.path());
      }
      std::sort(inner.begin(), inner.end());
      files.insert(files.end(), inner.begin(), inner.end());
    } else {
      files.push_back(p);
    }
  }
  entry["outputs"] = file_entries(files);
  entry["seconds"] = seconds;
  m["stages"][st.name()] = std::move(entry);
  csv::write_file(path, m.dump(1) + "\n");
}

void run_stage(const Options& o, const std::string& name, const std::function<void(Stage&)>& body) {
  g_stage = name;
  Stage st(name);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(st);
  } catch (...) {
    st.discard();
    throw;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record(o, st, seconds);
  std::cout << "stage=" << name << " status=ok seconds=" << csv::format_fixed(seconds, 2) << '\n';
}

const std::array<const char*, 4> kCensusFiles = {"populations.csv", "pop_totals.csv", "shipments.csv",
                                                 "ship_totals.csv"};

void stage_synth(const Options& o) {
  run_stage(o, "synth", [&](Stage& st) {
    for (const char* f : kCensusFiles) st.output(o.data / f);
    st.output(o.data / "centroids.csv");
    st.output(o.data / "ground_truth.json");
    synth::SynthConfig cfg = o.synth;
    const auto d = synth::generate(cfg);
    synth::write_dataset(o.data, d);
  });
}

void stage_impute(const Options& o) {
  run_stage(o, "impute", [&](Stage& st) {
    for (const char* f : kCensusFiles) st.input(o.data / f);
    const auto subpops_csv = st.output(o.out / "subpopulations.csv");
    const auto ships_csv = st.output(o.out / "imputed_shipments.csv");
    const auto coverage_csv = st.output(o.out / "coverage.csv");

    auto states = load_census(o.data);
    for (auto& s : states) {
      for (const auto& w : validate(s)) warn(w.where, w.message);
    }
    // States are independent programs.
    std::vector<std::future<impute::ImputedSection>> pops, ships;
    for (const auto& s : states) {
      pops.push_back(std::async(std::launch::async, [&s, &o] { return impute::impute_populations(s, o.tol); }));
      ships.push_back(std::async(std::launch::async, [&s, &o] { return impute::impute_shipments(s, o.tol); }));
    }
    std::vector<impute::ImputedSection> pop_sections, ship_sections;
    std::vector<impute::CoverageRow> pop_cov, ship_cov;
    for (std::size_t i = 0; i < states.size(); ++i) {
      pop_sections.push_back(pops[i].get());
      ship_sections.push_back(ships[i].get());
      for (const auto* sec : {&pop_sections.back(), &ship_sections.back()}) {
        for (const auto& w : sec->warnings) warn(w.where, w.message);
      }
      pop_cov.push_back(impute::coverage(states[i].populations, pop_sections.back()));
      ship_cov.push_back(impute::coverage(states[i].shipments, ship_sections.back()));
    }
    std::vector<ValidationWarning> warnings;
    const auto subpops = impute::assemble_subpopulations(pop_sections, &warnings);
    for (const auto& w : warnings) warn(w.where, w.message);
    impute::write_subpopulations(subpops_csv, subpops);
    impute::write_imputed_shipments(ships_csv, ship_sections);
    impute::write_coverage(coverage_csv, pop_cov, ship_cov);
  });
}

void stage_estimate(const Options& o) {
  run_stage(o, "estimate", [&](Stage& st) {
    const auto subpops_csv = st.input(o.out / "subpopulations.csv");
    const auto ships_csv = st.input(o.out / "imputed_shipments.csv");
    const auto centroids_csv = st.input(o.data / "centroids.csv");
    const auto params_csv = st.output(o.out / "movement_params.csv");
    const auto demo_csv = st.output(o.out / "demographics.csv");
    const auto disc_csv = st.output(o.out / "discrepancies.csv");
    const auto meta_txt = st.output(o.out / "run_meta.txt");

    const auto bounds = rate_bounds(o);
    const auto ships = impute::load_imputed_shipments(ships_csv);
    const auto in = movement::align_inputs(impute::load_subpopulations(subpops_csv), impute::shipment_totals(ships),
                                           geo::load_centroids(centroids_csv));
    const auto m = movement::estimate(in, bounds, o.tol);
    movement::write_movement_params(params_csv, m);
    movement::write_demographics(demo_csv, m);
    movement::write_discrepancies(disc_csv, m);
    movement::write_run_meta(meta_txt, m);
    std::cout << "estimate: f_min=" << csv::format_fixed(m.f_min, 3) << " solver=" << maxent::to_string(m.report.status)
              << " iterations=" << m.report.iterations << '\n';
  });
}

// Event log writer: replicate,week,origin,dest,head with subpopulation ids
// like 20001/BEEF/z1_19 and "slaughter" as the slaughter destination.
class EventLog {
 public:
  EventLog(const fs::path& path, const impute::SubpopulationSet& sp) : gz_(gzopen(path.c_str(), "wb6"), &gzclose) {
    if (!gz_) throw std::runtime_error("cannot write " + path.string());
    for (int c = 0; c < sp.county_count(); ++c) {
      for (TypeB t : kAllTypeB) {
        for (SizeB j : kAllSizeB) {
          ids_.push_back(sp.counties[c] + "/" + std::string(token(t)) + "/" + std::string(token(j)));
        }
      }
    }
    buf_ = "replicate,week,origin,dest,head\n";
  }

  void add(const sim::ShipmentEvent& e) {
    buf_ += std::to_string(e.replicate);
    buf_ += ',';
    buf_ += std::to_string(e.week);
    buf_ += ',';
    buf_ += ids_[e.origin];
    buf_ += ',';
    buf_ += e.dest == sim::kSlaughter ? std::string_view("slaughter") : std::string_view(ids_[e.dest]);
    buf_ += ',';
    buf_ += std::to_string(e.head);
    buf_ += '\n';
    if (buf_.size() > (1u << 20)) flush();
  }

  void close() {
    flush();
    if (gzclose(gz_.release()) != Z_OK) throw std::runtime_error("compressed event log write failed");
  }

 private:
  void flush() {
    if (!buf_.empty() && gzwrite(gz_.get(), buf_.data(), static_cast<unsigned>(buf_.size())) == 0) {
      throw std::runtime_error("compressed event log write failed");
    }
    buf_.clear();
  }

  std::unique_ptr<gzFile_s, decltype(&gzclose)> gz_;
  std::vector<std::string> ids_;
  std::string buf_;
};

void stage_simulate(const Options& o) {
  run_stage(o, "simulate", [&](Stage& st) {
    const auto params_csv = st.input(o.out / "movement_params.csv");
    const auto demo_csv = st.input(o.out / "demographics.csv");
    const auto subpops_csv = st.input(o.out / "subpopulations.csv");
    const auto centroids_csv = st.input(o.data / "centroids.csv");
    const auto summary_csv = st.output(o.out / "sim_summary.csv");
    const auto network_csv = st.output(o.out / "network_stats.csv");

    const auto m = movement::load_movement(params_csv, demo_csv);
    const auto sp = impute::load_subpopulations(subpops_csv);
    const auto geo = geo::DistanceClassifier(geo::load_centroids(centroids_csv)).subset(sp.counties);
    sim::SimulationConfig cfg = o.sim;
    cfg.integerization = o.integerization == "stochastic" ? sim::Integerization::Stochastic : sim::Integerization::Round;
    sim::SimulationSummary s;
    if (o.events) {
      EventLog log(st.output(o.out / "events.csv.gz"), sp);
      s = sim::simulate(m, sp, geo, cfg, [&](const sim::ShipmentEvent& e) { log.add(e); });
      log.close();
    } else {
      s = sim::simulate(m, sp, geo, cfg);
    }
    if (s.conservation_violations > 0) {
      warn("simulation", std::to_string(s.conservation_violations) + " subpopulation-weeks broke conservation");
    }
    sim::write_summary(summary_csv, s);
    sim::write_network(network_csv, s.network);
  });
}

void stage_threshold(const Options& o) {
  run_stage(o, "threshold", [&](Stage& st) {
    const auto network_csv = st.input(o.out / "network_stats.csv");
    const auto params_csv = st.input(o.out / "movement_params.csv");
    const auto demo_csv = st.input(o.out / "demographics.csv");
    const auto subpops_csv = st.input(o.out / "subpopulations.csv");
    const auto centroids_csv = st.input(o.data / "centroids.csv");
    const auto thresholds_csv = st.output(o.out / "thresholds.csv");
    const auto meta_txt = st.output(o.out / "threshold_meta.txt");

    const auto m = movement::load_movement(params_csv, demo_csv);
    const auto sp = impute::load_subpopulations(subpops_csv);
    const auto geo = geo::DistanceClassifier(geo::load_centroids(centroids_csv)).subset(sp.counties);
    const auto avg = epi::population_averages(m, sp);
    epi::EpidemicParams e;
    e.r0 = o.r0;
    e.mu = o.mu;
    e.delta = avg.delta;
    e.n_bar = avg.n_bar;
    epi::check_params(e);
    const auto weeks = sim::load_network(network_csv);
    const auto r = epi::thresholds(e, epi::average_movement_rate(m, sp, geo), weeks);
    if (r.undefined_weeks > 0) warn("thresholds", std::to_string(r.undefined_weeks) + " weeks without a finite p_c");
    epi::write_thresholds(thresholds_csv, r);
    epi::write_threshold_meta(meta_txt, r);
  });
}

void stage_report(const Options& o) {
  run_stage(o, "report", [&](Stage& st) {
    const auto coverage_csv = st.input(o.out / "coverage.csv");
    const auto params_csv = st.input(o.out / "movement_params.csv");
    const auto demo_csv = st.input(o.out / "demographics.csv");
    const auto thresholds_csv = st.input(o.out / "thresholds.csv");
    const auto summary_csv = st.input(o.out / "sim_summary.csv");
    const auto ships_csv = st.input(o.out / "imputed_shipments.csv");
    const auto dir = st.output(o.out / "report");
    fs::remove_all(dir);

    report::ReportInputs in;
    in.coverage = impute::load_coverage(coverage_csv);
    in.movement = movement::load_movement(params_csv, demo_csv);
    in.thresholds = epi::load_thresholds(thresholds_csv);
    in.summary = sim::load_summary(summary_csv);
    in.shipments = impute::load_imputed_shipments(ships_csv);
    report::write_report(dir, in);
  });
}

void stage_pipeline(Options o) {
  if (o.synth_seed) {
    o.data = o.out / "data";
    stage_synth(o);
  }
  stage_impute(o);
  stage_estimate(o);
  stage_simulate(o);
  stage_threshold(o);
  stage_report(o);
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const MissingInput*>(&e)) return kMissingInput;
  if (dynamic_cast<const maxent::SolverFailure*>(&e)) return kSolverFailure;
  return kUserError;
}

int fail(int code, std::string message) {
  for (char& ch : message) {
    if (ch == '\n' || ch == '\r') ch = ' ';
    if (ch == '"') ch = '\'';
  }
  std::cerr << "error: stage=" << g_stage << " code=" << code << " message=\"" << message << "\"" << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cattle movement estimation and simulation pipeline", "cattlemove"};
  app.set_config("--config", "", "Flat key=value configuration file; flags override its values");
  app.fallthrough();
  app.require_subcommand(1, 1);

  Options o;
  app.add_option("--data", o.data, "Census data directory")->envname("CATTLEMOVE_DATA");
  app.add_option("--out", o.out, "Output directory");

  app.add_option("--feasibility-tol", o.tol.feasibility, "Relative primal feasibility tolerance");
  app.add_option("--kkt-tol", o.tol.kkt, "Stationarity and complementarity tolerance");
  app.add_option("--gap-tol", o.tol.gap, "Relative duality gap tolerance");
  app.add_option("--max-iterations", o.tol.max_iterations, "Interior-point iteration limit");

  for (int t = 0; t < kTypeB; ++t) {
    for (int k = 0; k < 3; ++k) {
      for (int side = 0; side < 2; ++side) {
        const std::string name = "--" + std::string(kRateTypes[t]) + "-" + std::string(kRateKinds[k]) +
                                 (side == 0 ? "-min" : "-max");
        app.add_option(name, o.rates[(t * 3 + k) * 2 + side], "Weekly rate bound override")
            ->check(CLI::Range(0.0, 1.0))
            ->group("Rate bounds");
      }
    }
  }

  app.add_option("--years", o.sim.years, "Simulated years")->group("Simulation");
  app.add_option("--replicates", o.sim.replicates, "Simulation replicates")->group("Simulation");
  app.add_option("--sim-seed", o.sim.seed, "Simulation seed")->group("Simulation");
  app.add_option("--integerization", o.integerization, "Starting head rounding")
      ->check(CLI::IsMember({"round", "stochastic"}))
      ->group("Simulation");
  app.add_option("--threads", o.sim.threads, "Replicate worker threads, 0 for all cores")->group("Simulation");
  app.add_flag("--events", o.events, "Write events.csv.gz (runs replicates on one thread)")->group("Simulation");

  app.add_option("--r0", o.r0, "Basic reproductive number")->group("Thresholds");
  app.add_option("--mu", o.mu, "Recovery rate per week")->group("Thresholds");

  app.add_option("--synth-seed", o.synth_seed, "Generate a synthetic dataset with this seed (pipeline)")
      ->group("Synthetic data");
  app.add_option("--states", o.synth.states, "Synthetic states")->group("Synthetic data");
  app.add_option("--counties", o.synth.counties_per_state, "Synthetic counties per state")->group("Synthetic data");
  app.add_option("--suppression-threshold", o.synth.suppression_threshold,
                 "Withhold cells with at most this many operations")
      ->group("Synthetic data");
  app.add_option("--perturbation", o.perturbation, "Minimum discrepancy fraction of the remote county")
      ->group("Synthetic data");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic census dataset into --data");
  auto* impute_cmd = app.add_subcommand("impute", "Fill withheld census cells");
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate movement and demographic rates");
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate weekly herd movements");
  auto* threshold_cmd = app.add_subcommand("threshold", "Compute invasion thresholds");
  auto* report_cmd = app.add_subcommand("report", "Render report tables");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(kUserError, e.what());
  }

  g_stage = "config";
  try {
    if (o.synth_seed) o.synth.seed = *o.synth_seed;
    o.synth.perturbation = o.perturbation;
    synth::check_config(o.synth);
    sim::check_config(o.sim);
    rate_bounds(o);
    if (!(o.tol.feasibility > 0.0) || !(o.tol.kkt > 0.0) || !(o.tol.gap > 0.0) || o.tol.max_iterations < 1) {
      throw std::invalid_argument("solver tolerances must be positive");
    }
    fs::create_directories(o.out);

    if (synth_cmd->parsed()) stage_synth(o);
    if (impute_cmd->parsed()) stage_impute(o);
    if (estimate_cmd->parsed()) stage_estimate(o);
    if (simulate_cmd->parsed()) stage_simulate(o);
    if (threshold_cmd->parsed()) stage_threshold(o);
    if (report_cmd->parsed()) stage_report(o);
    if (pipeline_cmd->parsed()) stage_pipeline(o);
  } catch (const std::exception& e) {
    return fail(exit_code(e), e.what());
  }
  return kOk;
}
