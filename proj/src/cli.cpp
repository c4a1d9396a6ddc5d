#include "kboot/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

#include "kboot/aggregate.hpp"
#include "kboot/fft.hpp"
#include "kboot/io.hpp"
#include "kboot/metrics.hpp"
#include "kboot/motion.hpp"
#include "kboot/phantom.hpp"
#include "kboot/recon.hpp"
#include "kboot/rng.hpp"
#include "kboot/sampling.hpp"

namespace kboot::cli {

namespace fs = std::filesystem;

namespace {

// Fully explicit parsed configuration; every field has a default.
struct RunConfig {
  // shared
  std::string input;
  std::string output;
  std::string reference;
  std::uint64_t seed = 0;

  // simulate
  std::string phantom;
  std::size_t size = 128;
  std::uint64_t phantom_seed = 0;
  std::string motion = "rigid";
  std::string k0 = "0.1pi";
  double delta_max = motion::kDeltaMax;
  std::string alpha = "random";
  std::string beta = "random";
  std::string delta = "random";
  bool allow_out_of_range = false;
  std::string kspace_out;
  std::string clean_out;
  std::string dump_trace;

  // correct
  std::string kspace_in;
  std::size_t branches = aggregate::kDefaultBranches;
  double accel = 3.0;
  double acs = sampling::kLiverAcsFraction;
  double sigma_frac = 0.25;
  std::string direction = "pe";
  std::string recon = "ista";
  std::string lambda = "auto";
  int iters = 50;
  int levels = 3;
  std::uint64_t base_seed = 42;
  std::vector<double> weights;
  std::string dump_intermediates;
  std::string dump_masks;
  unsigned threads = 0;

  // evaluate
  std::string reference_dir;
  std::string test_dir;

  // propcheck
  std::size_t trials = 1000;
  std::size_t estimates = aggregate::kDefaultBranches;
  std::size_t prop_size = 32;
  std::string csv;
};

std::string format_db(double v) {
  return std::isinf(v) ? std::string("inf") : fmt::format("{:.6f}", v);
}

std::optional<double> parse_optional(const std::string& text, bool angle) {
  if (text == "random") return std::nullopt;
  if (angle) return parse_angle(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParameterError(fmt::format("cannot parse '{}' as a number", text));
  }
  return v;
}

unsigned effective_threads(unsigned requested) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* cap = std::getenv("KBOOT_THREADS")) {
    unsigned v = 0;
    const std::string_view s(cap);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc{} && v > 0) n = std::min(n, v);
  }
  return n;
}

void print_metrics(std::ostream& out, std::string_view prefix, const Image& reference, const Image& test) {
  const auto m = metrics::evaluate(reference, test);
  fmt::print(out, "{}psnr_db={}\n", prefix, format_db(m.psnr_db));
  fmt::print(out, "{}ssim={:.6f}\n", prefix, m.ssim);
}

std::string describe(const std::vector<std::string>& choices) {
  std::string s;
  for (const auto& c : choices) s += (s.empty() ? "" : "|") + c;
  return s;
}

// ---- commands --------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty() == cfg.phantom.empty()) {
    throw ParameterError("simulate: give exactly one of --input or --phantom");
  }

  Image clean;
  bool clean_known = false;
  if (!cfg.phantom.empty()) {
    clean = cfg.phantom == "shepp" ? phantom::shepp_logan(cfg.size)
                                   : phantom::texture_phantom(cfg.size, cfg.phantom_seed);
    clean_known = true;
  } else {
    clean = io::load_image(cfg.input);
  }

  const double k0 = parse_angle(cfg.k0);
  motion::MotionTrace trace;
  if (cfg.motion == "rigid") {
    trace = motion::random_rigid_trace(clean.n_pe(), k0, cfg.delta_max, cfg.seed);
  } else {
    motion::PeriodicParams p;
    p.k0 = k0;
    p.alpha = parse_optional(cfg.alpha, false);
    p.beta = parse_optional(cfg.beta, true);
    p.delta = parse_optional(cfg.delta, false);
    p.allow_out_of_range = cfg.allow_out_of_range;
    trace = motion::periodic_trace(clean.n_pe(), p, cfg.seed);
  }

  const KSpace spectrum = fft::forward(clean);
  const KSpace corrupted_k = motion::apply_trace(spectrum, trace);
  // With no corrupted line the acquisition is the clean spectrum itself.
  const Image corrupted = trace.corrupted.empty() ? clean : fft::inverse(corrupted_k);

  io::save_image(corrupted, cfg.output);
  if (!cfg.clean_out.empty()) io::save_image(clean, cfg.clean_out);
  if (!cfg.kspace_out.empty()) io::save_kspace(corrupted_k, cfg.kspace_out);
  if (!cfg.dump_trace.empty()) {
    std::ofstream f(cfg.dump_trace);
    if (!f) throw IoError(fmt::format("{}: cannot open for writing", cfg.dump_trace));
    motion::write_trace_csv(trace, f);
  }

  fmt::print(out, "motion={}\n", cfg.motion);
  if (trace.params.kind == motion::TraceKind::periodic) {
    fmt::print(out, "alpha={:.9g}\nbeta={:.9g}\ndelta={:.9g}\n", trace.params.alpha, trace.params.beta,
               trace.params.delta);
  }
  fmt::print(out, "corrupted_lines={}/{}\n", trace.corrupted.size(), trace.size());
  if (!cfg.reference.empty()) {
    clean = io::load_image(cfg.reference);
    clean_known = true;
  }
  if (clean_known) print_metrics(out, "", clean, corrupted);
  return 0;
}

int cmd_correct(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty() == cfg.kspace_in.empty()) {
    throw ParameterError("correct: give exactly one of --input or --kspace-in");
  }

  recon::IstaParams ista;
  if (cfg.lambda != "auto") ista.lambda = parse_optional(cfg.lambda, false);
  ista.iters = cfg.iters;
  ista.levels = cfg.levels;

  aggregate::AggregationConfig agg;
  agg.branches = cfg.branches;
  agg.weights = cfg.weights;
  agg.base_seed = cfg.base_seed;
  agg.mask = {.accel = cfg.accel,
              .acs_frac = cfg.acs,
              .sigma_frac = cfg.sigma_frac,
              .direction = cfg.direction == "fe" ? sampling::Direction::frequency_encode
                                                 : sampling::Direction::phase_encode};
  agg.recon = recon::make_reconstructor(cfg.recon == "zf" ? recon::ReconKind::zero_filled
                                                          : recon::ReconKind::ista,
                                        ista);
  agg.keep_branch_images = !cfg.dump_intermediates.empty();
  agg.threads = effective_threads(cfg.threads);

  std::optional<Image> input_image;
  aggregate::AggregationResult result;
  if (!cfg.input.empty()) {
    input_image = io::load_image(cfg.input);
    result = aggregate::bootstrap_correct(*input_image, agg);
  } else {
    const KSpace k = io::load_kspace(cfg.kspace_in);
    input_image = fft::inverse(k);
    result = aggregate::bootstrap_correct_kspace(k, agg);
  }

  io::save_image(result.corrected, cfg.output);
  if (!cfg.dump_intermediates.empty()) {
    const fs::path dir(cfg.dump_intermediates);
    fs::create_directories(dir);
    for (std::size_t b = 0; b < result.branch_images.size(); ++b) {
      io::save_image(result.branch_images[b], dir / fmt::format("branch_{:02}.png", b + 1));
    }
    std::ofstream f(dir / "masks.txt");
    sampling::write_masks(result.branch_masks, f);
  }
  if (!cfg.dump_masks.empty()) {
    std::ofstream f(cfg.dump_masks);
    if (!f) throw IoError(fmt::format("{}: cannot open for writing", cfg.dump_masks));
    sampling::write_masks(result.branch_masks, f);
  }

  fmt::print(out, "branches={}\nrecon={}\ndirection={}\n", cfg.branches, cfg.recon, cfg.direction);
  if (!cfg.reference.empty()) {
    const Image reference = io::load_image(cfg.reference);
    print_metrics(out, "input_", reference, *input_image);
    print_metrics(out, "corrected_", reference, result.corrected);
  }
  return 0;
}

std::set<std::string> image_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(fmt::format("{}: not a directory", dir.string()));
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm") names.insert(entry.path().filename().string());
  }
  return names;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path ref_dir(cfg.reference_dir);
  const fs::path test_dir(cfg.test_dir);
  const auto ref_files = image_files(ref_dir);
  const auto test_files = image_files(test_dir);

  for (const auto& name : ref_files) {
    if (!test_files.count(name)) {
      fmt::print(err, "error: {} has no counterpart in {}\n", name, test_dir.string());
      return 1;
    }
  }
  for (const auto& name : test_files) {
    if (!ref_files.count(name)) {
      fmt::print(err, "error: {} has no counterpart in {}\n", name, ref_dir.string());
      return 1;
    }
  }

  std::string csv = "file,psnr_db,ssim\n";
  for (const auto& name : ref_files) {
    const auto m = metrics::evaluate(io::load_image(ref_dir / name), io::load_image(test_dir / name));
    csv += fmt::format("{},{},{:.9f}\n", name, format_db(m.psnr_db), m.ssim);
  }
  if (cfg.output.empty()) {
    out << csv;
  } else {
    io::write_file(cfg.output, std::as_bytes(std::span(csv.data(), csv.size())));
    fmt::print(out, "files={}\n", ref_files.size());
  }
  return 0;
}

int cmd_propcheck(const RunConfig& cfg, std::ostream& out) {
  if (cfg.estimates < 1 || cfg.prop_size < 2) throw ParameterError("propcheck: need >= 1 estimate and size >= 2");
  CounterRng rng(cfg.seed, rng_stream::kPropcheck);
  auto random_image = [&] {
    Image img(cfg.prop_size, cfg.prop_size);
    for (auto& v : img.values()) v = rng.uniform_open();
    return img;
  };

  std::ofstream csv;
  if (!cfg.csv.empty()) {
    csv.open(cfg.csv);
    if (!csv) throw IoError(fmt::format("{}: cannot open for writing", cfg.csv));
    csv << "lhs,rhs,holds\n";
  }

  std::size_t failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const Image truth = random_image();
    std::vector<Image> est;
    for (std::size_t n = 0; n < cfg.estimates; ++n) est.push_back(random_image());
    // Uniform on the simplex: normalised unit exponentials.
    std::vector<double> w(cfg.estimates);
    double total = 0.0;
    for (auto& x : w) total += (x = -std::log(rng.uniform_open()));
    for (auto& x : w) x /= total;

    const auto report = aggregate::jensen_check(truth, est, w);
    worst = std::max(worst, report.rhs - report.lhs);
    if (!report.holds) ++failures;
    if (csv.is_open()) aggregate::write_jensen_row(report, csv);
  }

  fmt::print(out, "trials={}\nfailures={}\nworst_rhs_minus_lhs={:.9e}\n", cfg.trials, failures,
             cfg.trials ? worst : 0.0);
  return failures == 0 ? 0 : 1;
}

// ---- argument plumbing ------------------------------------------------------

const std::vector<std::string> kCommands = {"simulate", "correct", "evaluate", "propcheck"};

// Removes `--config PATH` / `--config=PATH` and splices the file's settings
// right after the subcommand so that explicit flags, parsed later, win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;

  const auto cmd = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end();
  });
  if (cmd == args.end()) return args;
  const auto extra = config_file_arguments(*path);
  args.insert(cmd + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

double parse_angle(std::string_view text) {
  auto fail = [&] { return ParameterError(fmt::format("cannot parse angle '{}'", text)); };
  const auto pi_pos = text.find("pi");
  if (pi_pos == std::string_view::npos) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) throw fail();
    return v;
  }

  // Coefficient "[-]digits[.digits]" read as numerator / 10^decimals.
  std::string_view coef = text.substr(0, pi_pos);
  bool negative = false;
  if (!coef.empty() && (coef.front() == '-' || coef.front() == '+')) {
    negative = coef.front() == '-';
    coef.remove_prefix(1);
  }
  if (!coef.empty() && coef.back() == '*') coef.remove_suffix(1);
  std::int64_t numerator = 1;
  std::int64_t denominator = 1;
  if (!coef.empty()) {
    numerator = 0;
    bool seen_dot = false;
    bool seen_digit = false;
    for (const char c : coef) {
      if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else if (c >= '0' && c <= '9') {
        seen_digit = true;
        numerator = numerator * 10 + (c - '0');
        if (seen_dot) denominator *= 10;
        if (numerator > (std::int64_t{1} << 52) || denominator > (std::int64_t{1} << 52)) throw fail();
      } else {
        throw fail();
      }
    }
    if (!seen_digit) throw fail();
  }

  std::string_view rest = text.substr(pi_pos + 2);
  if (!rest.empty()) {
    if (rest.front() != '/') throw fail();
    rest.remove_prefix(1);
    std::int64_t q = 0;
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), q);
    if (res.ec != std::errc{} || res.ptr != rest.data() + rest.size() || q <= 0) throw fail();
    denominator *= q;
  }
  const double v = (std::numbers::pi * static_cast<double>(numerator)) / static_cast<double>(denominator);
  return negative ? -v : v;
}

std::vector<std::string> config_file_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("{}: cannot open config file", path));
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError(fmt::format("{}:{}: expected key=value", path, lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParameterError(fmt::format("{}:{}: empty key", path, lineno));
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"kboot: motion-artifact simulation and bootstrap-aggregation correction for 2D MR images"};
  app.name("kboot");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  std::string config_path;
  app.add_option("--config", config_path,
                 "key=value settings file (keys are long flag names); explicit flags override it");

  const std::vector<std::string> phantoms{"shepp", "texture"};
  const std::vector<std::string> motions{"rigid", "periodic"};
  const std::vector<std::string> directions{"pe", "fe"};
  const std::vector<std::string> recons{"zf", "ista"};

  // simulate
  auto* sim = app.add_subcommand("simulate", "Corrupt an image with simulated motion phase errors");
  sim->add_option("--input", cfg.input, "Input image (.png/.pgm)");
  sim->add_option("--phantom", cfg.phantom, "Synthetic input instead of --input: " + describe(phantoms))
      ->check(CLI::IsMember(phantoms));
  sim->add_option("--size", cfg.size, "Phantom side length");
  sim->add_option("--phantom-seed", cfg.phantom_seed, "Seed of the texture phantom");
  sim->add_option("--output", cfg.output, "Corrupted image (.png/.pgm)")->required();
  sim->add_option("--reference", cfg.reference, "Clean image for metrics when --input is used");
  sim->add_option("--clean-out", cfg.clean_out, "Also write the clean image here");
  sim->add_option("--kspace-out", cfg.kspace_out, "Write the corrupted k-space as KSP1");
  sim->add_option("--dump-trace", cfg.dump_trace, "Write the motion trace as CSV");
  sim->add_option("--motion", cfg.motion, "Motion model: " + describe(motions))->check(CLI::IsMember(motions));
  sim->add_option("--k0", cfg.k0, "Phase-error onset |k_y| > k0 (radians, '0.1pi' syntax accepted)");
  sim->add_option("--delta-max", cfg.delta_max, "Rigid: per-line displacement bound in pixels");
  sim->add_option("--alpha", cfg.alpha, "Periodic: frequency constant, or 'random' in (0.1, 5)");
  sim->add_option("--beta", cfg.beta, "Periodic: phase constant (angle), or 'random' in (0, pi/4)");
  sim->add_option("--delta", cfg.delta, "Periodic: displacement in pixels, or 'random' in (0, 37)");
  sim->add_flag("--allow-out-of-range", cfg.allow_out_of_range, "Accept periodic constants outside their ranges");
  sim->add_option("--seed", cfg.seed, "Motion seed");

  // correct
  auto* cor = app.add_subcommand("correct", "Bootstrap subsampling and aggregation correction");
  cor->add_option("--input", cfg.input, "Corrupted image (.png/.pgm)");
  cor->add_option("--kspace-in", cfg.kspace_in, "Corrupted k-space (KSP1) instead of --input");
  cor->add_option("--output", cfg.output, "Corrected image (.png/.pgm)")->required();
  cor->add_option("--reference", cfg.reference, "Clean image; prints PSNR/SSIM before and after");
  cor->add_option("-N,--branches", cfg.branches, "Number of bootstrap subsamplings")->check(CLI::PositiveNumber);
  cor->add_option("-R,--accel", cfg.accel, "Acceleration factor of each mask");
  cor->add_option("--acs", cfg.acs, "ACS fraction (0.06 brain-like, 0.11 liver-like)");
  cor->add_option("--sigma-frac", cfg.sigma_frac, "Gaussian width as a fraction of the line count");
  cor->add_option("--direction", cfg.direction, "Subsampling direction: " + describe(directions))
      ->check(CLI::IsMember(directions));
  cor->add_option("--recon", cfg.recon, "Base reconstructor: " + describe(recons))->check(CLI::IsMember(recons));
  cor->add_option("--lambda", cfg.lambda, "ISTA threshold, or 'auto' = 0.01 max|W x_zf|");
  cor->add_option("--iters", cfg.iters, "ISTA iterations")->check(CLI::PositiveNumber);
  cor->add_option("--levels", cfg.levels, "Haar levels")->check(CLI::NonNegativeNumber);
  cor->add_option("--seed", cfg.base_seed, "Base seed; branch n uses seed + n");
  cor->add_option("--weights", cfg.weights, "Aggregation weights (default uniform 1/N)")->delimiter(',');
  cor->add_option("--dump-intermediates", cfg.dump_intermediates, "Directory for branch images and masks");
  cor->add_option("--dump-masks", cfg.dump_masks, "Write masks as 0/1 lines");
  cor->add_option("--threads", cfg.threads, "Worker threads (0 = all cores, capped by KBOOT_THREADS)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "PSNR/SSIM over paired directories as CSV");
  ev->add_option("--reference-dir", cfg.reference_dir, "Reference images")->required();
  ev->add_option("--test-dir", cfg.test_dir, "Test images with the same file names")->required();
  ev->add_option("--output", cfg.output, "CSV path (default: stdout)");

  // propcheck
  auto* pc = app.add_subcommand("propcheck", "Randomised check that aggregation never increases squared error");
  pc->add_option("--trials", cfg.trials, "Number of random trials");
  pc->add_option("--seed", cfg.seed, "Seed");
  pc->add_option("--size", cfg.prop_size, "Side length of the random images");
  pc->add_option("--estimates", cfg.estimates, "Estimates per trial");
  pc->add_option("--csv", cfg.csv, "Write one lhs,rhs,holds row per trial");

  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg, out);
    if (cor->parsed()) return cmd_correct(cfg, out);
    if (ev->parsed()) return cmd_evaluate(cfg, out, err);
    if (pc->parsed()) return cmd_propcheck(cfg, out);
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace kboot::cli
