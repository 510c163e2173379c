// pdyn: render, classify, and verify the dynamical sets of self-maps of the
// punctured plane. Subcommands: render | classify | mmseq | verify.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error,
// 3 precondition error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "pdyn/config.hpp"
#include "pdyn/map.hpp"
#include "pdyn/verify.hpp"
#include "pdyn/version.hpp"

namespace fs = std::filesystem;
using namespace pdyn;

namespace {

struct Cli {
  std::string config_path;
  std::vector<std::string> sets;  // section.key=value overrides
  std::string point_text;         // classify
  std::string out_path;           // mmseq CSV target ("" = stdout)
};

RunConfig load_with_overrides(const Cli& cli) {
  RunConfig cfg = cli.config_path.empty() ? RunConfig{}
                                          : load_config_file(cli.config_path);
  for (const std::string& s : cli.sets) {
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("override must be section.key=value: " + s);
    apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

std::string sidecar_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "tool = pdyn " << kVersion << "\n";
  os << "palette = fates-v1\n";
  os << "# thread count omitted: worker count cannot affect artifact bytes\n";
  os << cfg.normalized(false);
  return os.str();
}

int cmd_render(const Cli& cli) {
  RunConfig cfg = load_with_overrides(cli);
  cfg.validate();
  if (!fs::is_directory(cfg.out_directory)) {
    std::cerr << "output directory does not exist: " << cfg.out_directory << "\n";
    return 2;
  }

  PunctureSet S(cfg.punctures);
  CompiledMap map = compile_map(cfg.map_text, S);
  int threads = cfg.resolved_threads();

  ClassificationRaster raster =
      classify_grid(map, cfg.window, cfg.classify, threads);

  ClassificationRaster* for_ppm = &raster;
  ClassificationRaster fine;
  if (cfg.supersample == 2) {
    ViewWindow w2 = cfg.window;
    w2.cols *= 2;
    w2.rows *= 2;
    fine = classify_grid(map, w2, cfg.classify, threads);
    for_ppm = &fine;
  }

  auto has_format = [&](const char* f) {
    return std::find(cfg.out_formats.begin(), cfg.out_formats.end(), f) !=
           cfg.out_formats.end();
  };
  fs::path dir(cfg.out_directory);

  if (has_format("ppm")) {
    std::vector<uint8_t> ppm = render_ppm(*for_ppm);
    if (cfg.supersample == 2) {
      // box-average the 2x render down to the base resolution
      std::vector<uint8_t> base = render_ppm(raster);  // header template
      size_t hdr = base.size() - raster.cells.size() * 3;
      size_t hdr2 = ppm.size() - fine.cells.size() * 3;
      const int W = raster.window.cols, H = raster.window.rows;
      for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
          for (int ch = 0; ch < 3; ++ch) {
            int sum = 0;
            for (int dr = 0; dr < 2; ++dr)
              for (int dc = 0; dc < 2; ++dc) {
                size_t idx = hdr2 +
                             3 * ((static_cast<size_t>(2 * r + dr)) * (2 * W) +
                                  (2 * c + dc)) +
                             ch;
                sum += ppm[idx];
              }
            base[hdr + 3 * (static_cast<size_t>(r) * W + c) + ch] =
                static_cast<uint8_t>(sum / 4);
          }
        }
      }
      ppm = std::move(base);
    }
    fs::path p = dir / (cfg.out_stem + ".ppm");
    write_file_atomic(p.string(), ppm.data(), ppm.size());
    std::cout << "wrote " << p.string() << "\n";
  }
  if (has_format("grid")) {
    std::vector<uint8_t> grid = serialize_fate_grid(raster);
    fs::path p = dir / (cfg.out_stem + ".grid");
    write_file_atomic(p.string(), grid.data(), grid.size());
    std::cout << "wrote " << p.string() << "\n";
  }
  if (has_format("meta")) {
    std::string meta = sidecar_text(cfg);
    fs::path p = dir / (cfg.out_stem + ".meta");
    write_file_atomic(p.string(), meta.data(), meta.size());
    std::cout << "wrote " << p.string() << "\n";
  }
  return 0;
}

int cmd_classify(const Cli& cli) {
  RunConfig cfg = load_with_overrides(cli);
  cfg.validate();
  PunctureSet S(cfg.punctures);
  CompiledMap map = compile_map(cfg.map_text, S);

  cplx z = parse_complex_literal(cli.point_text);
  SpherePoint x = SpherePoint::finite(z);

  Classifier classifier(map, cfg.classify);
  Classification c = classifier.classify(x);  // throws at punctures (exit 3)

  std::cout << "fate=" << fate_name(c.fate);
  if (c.fate == Fate::fast_escaping) {
    std::cout << " itinerary=";
    size_t show = std::min<size_t>(c.itinerary.size(), 16);
    for (size_t i = 0; i < show; ++i)
      std::cout << (i ? "," : "") << c.itinerary[i];
    if (c.itinerary.size() > show) std::cout << ",...";
    std::cout << " offset=" << c.offset
              << " certified_depth=" << c.certified_depth;
  } else if (c.fate == Fate::bounded) {
    std::cout << " L=" << format_double(c.bound);
  } else {
    std::cout << " reason=" << undecided_reason_name(c.reason);
  }
  std::cout << "\n";
  return 0;
}

int cmd_mmseq(const Cli& cli) {
  RunConfig cfg = load_with_overrides(cli);
  PunctureSet S(cfg.punctures);
  CompiledMap map = compile_map(cfg.map_text, S);

  std::vector<double> grid = cfg.r_grid;
  if (grid.empty())
    for (double r = S.rho_S() + 1.0; r <= 50.0; r += 1.0) grid.push_back(r);
  auto rf = estimate_R_f(map, grid);
  if (!rf || !(cfg.mmseq_R > *rf))
    throw precondition_error(
        "mmseq start value must exceed the escape-threshold surrogate");

  std::vector<int> e = cfg.mmseq_e.expand(cfg.mmseq_depth + 1);
  MaxModSequence seq = mm_sequence(map, e, cfg.mmseq_R, cfg.mmseq_depth);

  std::ostringstream os;
  os << "# tool = pdyn " << kVersion << "\n";
  os << "# map = " << map.text() << "\n";
  os << "# e = " << format_itinerary(cfg.mmseq_e) << ", R = "
     << format_double(cfg.mmseq_R) << ", depth = " << cfg.mmseq_depth << "\n";
  os << "n,e_n,log_R_n,truncated\n";
  for (size_t n = 0; n < seq.values_log.size(); ++n) {
    os << n << "," << e[n] << "," << format_double(seq.values_log[n]) << ",0\n";
  }
  if (seq.truncated_at) {
    os << seq.truncated_at->first << "," << e[seq.truncated_at->first] << ",,1"
       << " # " << truncation_reason_name(seq.truncated_at->second) << "\n";
  }

  if (cli.out_path.empty()) {
    std::cout << os.str();
  } else {
    std::string s = os.str();
    write_file_atomic(cli.out_path, s.data(), s.size());
    std::cout << "wrote " << cli.out_path << "\n";
  }
  return 0;
}

int cmd_verify(const Cli& cli) {
  RunConfig cfg = load_with_overrides(cli);
  cfg.validate();
  PunctureSet S(cfg.punctures);
  CompiledMap map = compile_map(cfg.map_text, S);
  int threads = cfg.resolved_threads();

  std::vector<double> grid = cfg.r_grid;
  if (grid.empty())
    for (double r = S.rho_S() + 1.0; r <= 50.0; r += 1.0) grid.push_back(r);

  const ItineraryPattern* e1 = cfg.find_itinerary("e1");
  const ItineraryPattern* e2 = cfg.find_itinerary("e2");
  ItineraryPattern zeros{{}, {0}}, ones{{}, {1}};
  if (!e1) e1 = &zeros;
  if (!e2) e2 = &ones;

  bool any_fail = false;
  for (const std::string& name : cfg.checks) {
    VerificationReport rep;
    if (name == "mmseq_growth") {
      rep = verify_mmseq_lemma(map, grid);
    } else if (name == "en_separation") {
      rep = verify_En_inequality(map, cfg.mmseq_e, cfg.en_R, cfg.en_nmax,
                                 cfg.growth_radii, grid);
    } else if (name == "second_iterate_blowup") {
      rep = verify_remark_counterexample();
    } else if (name == "boundary_identities") {
      rep = verify_boundary_identities(map, cfg.window, *e1, *e2,
                                       cfg.boundary_power, cfg.classify,
                                       cfg.boundary_tol_px, threads);
    } else if (name == "invariance_and_uniqueness") {
      rep = verify_invariance_and_disjointness(map, cfg.window, cfg.classify,
                                               cfg.invariance_points, cfg.seed);
    } else {
      std::cerr << "unknown check name: " << name << "\n";
      return 2;
    }
    std::cout << format_report(rep) << "\n";
    if (rep.status == CheckStatus::fail) any_fail = true;
  }
  return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamical sets of self-maps of the punctured plane"};
  app.require_subcommand(1);

  Cli cli;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", cli.config_path, "configuration file");
    sub->add_option("--set", cli.sets,
                    "override: section.key=value (repeatable)");
  };

  CLI::App* render = app.add_subcommand("render", "rasterize classifications");
  add_common(render);
  CLI::App* classify = app.add_subcommand("classify", "classify one point");
  add_common(classify);
  classify->add_option("point", cli.point_text, "complex point, e.g. 1+2i")
      ->required();
  CLI::App* mmseq = app.add_subcommand("mmseq", "emit a modulus sequence CSV");
  add_common(mmseq);
  mmseq->add_option("-o,--out", cli.out_path, "CSV output path");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  add_common(verify);

  // accept --section.key value as override sugar
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.size() > 2 && a.rfind("--", 0) == 0) {
      size_t dot = a.find('.');
      size_t eq = a.find('=');
      if (dot != std::string::npos && (eq == std::string::npos || dot < eq)) {
        std::string key = a.substr(2, (eq == std::string::npos ? a.size() : eq) - 2);
        std::string value;
        if (eq != std::string::npos) {
          value = a.substr(eq + 1);
        } else if (i + 1 < argc) {
          value = argv[++i];
        } else {
          std::cerr << "missing value for " << a << "\n";
          return 2;
        }
        cli.sets.push_back(key + "=" + value);
        continue;
      }
    }
    args.push_back(a);
  }
  std::vector<const char*> cargs;
  cargs.push_back(argv[0]);
  for (const std::string& a : args) cargs.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (render->parsed()) return cmd_render(cli);
    if (classify->parsed()) return cmd_classify(cli);
    if (mmseq->parsed()) return cmd_mmseq(cli);
    if (verify->parsed()) return cmd_verify(cli);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const parse_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const precondition_error& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return 3;
  } catch (const estimation_error& e) {
    std::cerr << "estimation failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
