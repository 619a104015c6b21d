#include <floweval/cli.hpp>

#include <floweval/backend_config.hpp>
#include <floweval/backends.hpp>
#include <floweval/cache.hpp>
#include <floweval/element_set.hpp>
#include <floweval/http_backend.hpp>
#include <floweval/image.hpp>
#include <floweval/mermaid.hpp>
#include <floweval/metrics.hpp>
#include <floweval/oracle.hpp>
#include <floweval/study.hpp>
#include <floweval/version.hpp>

#include <CLI11.hpp>

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <utility>
#include <vector>

namespace floweval::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::system_error(errno != 0 ? errno : ENOENT, std::generic_category(),
                            "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw std::system_error(EIO, std::generic_category(), "cannot read " + path.string());
  }
  return std::move(buf).str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::system_error(errno != 0 ? errno : EACCES, std::generic_category(),
                            "cannot write " + path.string());
  }
  out << content;
  out.flush();
  if (!out) {
    throw std::system_error(EIO, std::generic_category(), "cannot write " + path.string());
  }
}

std::string format_score(const std::optional<double>& value) {
  if (!value) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *value);
  return buf;
}

// ---------------------------------------------------------------------------
// backend assembly

struct BackendOptions {
  std::string config_path;
  std::string cache_dir;
  int batch_size = 0;  // 0 = keep config value
  std::optional<std::uint64_t> seed;
};

struct BackendSetup {
  std::shared_ptr<backends::OracleUniverse> universe;  // set when any oracle is in play
  std::unique_ptr<backends::OcrClient> ocr;
  std::unique_ptr<backends::VeClient> ve;
  std::unique_ptr<backends::VerdictCache> cache;
};

backends::BackendFileConfig resolve_config(const BackendOptions& options) {
  auto config = options.config_path.empty() ? backends::default_backend_config()
                                            : backends::load_backend_config(options.config_path);
  if (options.batch_size != 0) {
    config.ocr.config.max_batch = options.batch_size;
    config.ve.config.max_batch = options.batch_size;
  }
  if (options.seed) {
    config.ocr.seed = *options.seed;
    config.ve.seed = *options.seed;
  }
  config.ocr.config.validate();
  config.ve.config.validate();
  return config;
}

std::shared_ptr<backends::VisionBackend> make_backend(
    const backends::BackendSpec& spec, const std::shared_ptr<backends::OracleUniverse>& universe,
    bool is_ve, double threshold) {
  if (!spec.is_oracle()) return backends::http_vision_backend(spec.config);
  if (is_ve) return backends::oracle_ve_backend(universe, spec.noise, spec.seed, threshold);
  return backends::oracle_ocr_backend(universe, spec.noise, spec.seed);
}

BackendSetup make_setup(const backends::BackendFileConfig& config, const BackendOptions& options,
                        double threshold) {
  BackendSetup setup;
  if (config.ocr.is_oracle() || config.ve.is_oracle()) {
    setup.universe = std::make_shared<backends::OracleUniverse>();
  }
  if (!options.cache_dir.empty()) {
    setup.cache = std::make_unique<backends::VerdictCache>(options.cache_dir);
  }
  auto ocr_backend = make_backend(config.ocr, setup.universe, false, threshold);
  auto ve_backend = make_backend(config.ve, setup.universe, true, threshold);
  setup.ocr = std::make_unique<backends::OcrClient>(std::move(ocr_backend), config.ocr.config,
                                                    setup.cache.get());
  setup.ve = std::make_unique<backends::VeClient>(std::move(ve_backend), config.ve.config,
                                                  setup.cache.get());
  return setup;
}

void report_cache_warnings(BackendSetup& setup, std::ostream& err) {
  if (!setup.cache) return;
  for (const auto& warning : setup.cache->drain_warnings()) {
    err << "cache: " << warning << "\n";
  }
}

// ---------------------------------------------------------------------------
// parse

struct ParseArgs {
  std::string source_path;
  bool strict = false;
  std::string format = "json";
};

int run_parse(const ParseArgs& args, std::ostream& out, std::ostream& err) {
  const std::string source = read_file(args.source_path);
  const auto mode = args.strict ? mermaid::ParseMode::strict : mermaid::ParseMode::lenient;
  const auto graph = mermaid::parse_mermaid(source, mode);
  const auto elements = decompose(graph);

  for (const auto& warning : graph.warnings) {
    err << args.source_path << ":" << warning.line << ": " << warning.message << "\n";
  }

  if (args.format == "mermaid") {
    out << mermaid::render_mermaid(graph);
  } else if (args.format == "elements") {
    for (const auto& element : elements.elements) out << element.rendered << "\n";
  } else if (args.format == "table") {
    std::size_t labeled = 0;
    for (const auto& edge : graph.edges) labeled += edge.label.has_value();
    out << "nodes:          " << graph.nodes.size() << "\n"
        << "edges:          " << graph.edges.size() << "\n"
        << "labeled edges:  " << labeled << "\n"
        << "elements:       " << elements.size() << "\n"
        << "text runs:      " << elements.text_pool.size() << "\n"
        << "warnings:       " << graph.warnings.size() << "\n";
  } else {
    out << mermaid::graph_to_json(graph) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string generated_path;
  std::string image_path;
  std::string ground_truth_path;
  BackendOptions backend;
  double threshold = matching::kDefaultThreshold;
  std::optional<double> min_recall;
  std::optional<double> min_precision;
  std::optional<double> min_f1;
  std::string format = "json";
};

void print_report_table(const metrics::MetricReport& report, std::ostream& out) {
  out << "recall_ocr        " << format_score(report.recall_ocr) << "\n"
      << "precision_ve      " << format_score(report.precision_ve) << "\n"
      << "f1_ocr_ve         " << format_score(report.f1_ocr_ve) << "\n"
      << "recall_actual     " << format_score(report.recall_actual) << "\n"
      << "precision_actual  " << format_score(report.precision_actual) << "\n"
      << "f1_actual         " << format_score(report.f1_actual) << "\n";
  out << "counts            ocr=" << report.counts.ocr << " generated=" << report.counts.generated
      << " entailed=" << report.counts.entailed << " actual=" << report.counts.actual << "\n";
  if (!report.flags.empty()) {
    out << "flags            ";
    for (const auto& flag : report.flags) out << " " << flag;
    out << "\n";
  }
  if (!report.missed_elements.empty()) {
    out << "missed (" << report.missed_elements.size() << "):\n";
    for (const auto& text : report.missed_elements) out << "  - " << text << "\n";
  }
  if (!report.hallucinated_elements.empty()) {
    out << "hallucinated (" << report.hallucinated_elements.size() << "):\n";
    for (const auto& element : report.hallucinated_elements) out << "  - " << element << "\n";
  }
  out << "backends          ocr=" << report.ocr_backend_id << " ve=" << report.ve_backend_id
      << "\n";
}

int apply_gates(const EvaluateArgs& args, const metrics::MetricReport& report, std::ostream& err) {
  struct Gate {
    const char* name;
    const std::optional<double>& minimum;
    const std::optional<double>& value;
  };
  const Gate gates[] = {
      {"recall_ocr", args.min_recall, report.recall_ocr},
      {"precision_ve", args.min_precision, report.precision_ve},
      {"f1_ocr_ve", args.min_f1, report.f1_ocr_ve},
  };
  bool failed = false;
  for (const auto& gate : gates) {
    if (!gate.minimum) continue;
    if (!gate.value) {
      err << "gate failed: " << gate.name << " has no value (needs >= "
          << format_score(gate.minimum) << ")\n";
      failed = true;
    } else if (*gate.value < *gate.minimum) {
      err << "gate failed: " << gate.name << " " << format_score(gate.value) << " < "
          << format_score(gate.minimum) << "\n";
      failed = true;
    }
  }
  return failed ? kExitGateFail : kExitOk;
}

int run_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  const std::string generated_source = read_file(args.generated_path);
  const auto config = resolve_config(args.backend);
  const bool any_oracle = config.ocr.is_oracle() || config.ve.is_oracle();

  if (any_oracle && args.ground_truth_path.empty()) {
    err << "error: the oracle backends answer from ground truth; pass --oracle-ground-truth "
           "<file.mmd> or select http backends via --backend-config\n";
    return kExitIo;
  }
  if (!any_oracle && args.image_path.empty()) {
    err << "error: --image is required with http backends\n";
    return kExitIo;
  }

  std::optional<ElementSet> ground_truth;
  std::string ground_truth_source;
  if (!args.ground_truth_path.empty()) {
    ground_truth_source = read_file(args.ground_truth_path);
    ground_truth = decompose(mermaid::parse_mermaid(ground_truth_source, mermaid::ParseMode::strict));
  }

  ImageRef image;
  if (!args.image_path.empty()) {
    image = image_from_file(args.image_path);
  } else {
    // Oracle runs may omit the image; the ground-truth text stands in as the
    // content-addressed stimulus.
    image = image_from_bytes(ground_truth_source, args.ground_truth_path);
  }

  auto setup = make_setup(config, args.backend, args.threshold);
  if (setup.universe && ground_truth) setup.universe->add(image, *ground_truth);

  auto report = metrics::evaluate_reference_free(image, generated_source, *setup.ocr, *setup.ve,
                                                 args.threshold);
  if (ground_truth) {
    const auto generated = decompose(mermaid::parse_mermaid(generated_source));
    metrics::score_against_reference(report, *ground_truth, generated, args.threshold);
  }
  report_cache_warnings(setup, err);

  if (args.format == "table") {
    print_report_table(report, out);
  } else if (args.format == "jsonl") {
    out << metrics::report_to_json(report, -1) << "\n";
  } else {
    out << metrics::report_to_json(report, 2) << "\n";
  }
  return apply_gates(args, report, err);
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string manifest_path;
  std::string out_dir = "study_out";
  BackendOptions backend;
  double threshold = matching::kDefaultThreshold;
  int workers = 4;
  double max_failure_ratio = 0.2;
  bool lenient_ground_truth = false;
  std::string format = "table";
};

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  for (auto& value : cells) {
    const auto begin = value.find_first_not_of(" \t");
    const auto end = value.find_last_not_of(" \t");
    value = begin == std::string::npos ? std::string() : value.substr(begin, end - begin + 1);
  }
  return cells;
}

/// Manifest rows are `image,ground_truth,generated` or
/// `id,image,ground_truth,generated`; paths resolve relative to the manifest.
/// A header row is recognized by its first cell. Rows whose files cannot be
/// loaded become failed study items instead of aborting the run.
std::vector<agreement::StudyItem> load_manifest(const fs::path& manifest_path) {
  const std::string content = read_file(manifest_path);
  const fs::path base = manifest_path.parent_path();

  std::vector<agreement::StudyItem> items;
  std::istringstream lines(content);
  std::string line;
  std::size_t row_number = 0;
  bool first_data_row = true;
  while (std::getline(lines, line)) {
    ++row_number;
    auto cells = split_csv_row(line);
    if (cells.size() == 1 && cells[0].empty()) continue;
    if (!cells.empty() && !cells[0].empty() && cells[0][0] == '#') continue;
    if (first_data_row && (cells[0] == "id" || cells[0] == "image")) {
      first_data_row = false;
      continue;
    }
    first_data_row = false;
    if (cells.size() != 3 && cells.size() != 4) {
      throw std::invalid_argument(manifest_path.string() + ":" + std::to_string(row_number) +
                                  ": expected 3 or 4 columns, got " + std::to_string(cells.size()));
    }

    agreement::StudyItem item;
    std::size_t offset = 0;
    if (cells.size() == 4) {
      item.id = cells[0];
      offset = 1;
    } else {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04zu", items.size());
      item.id = std::string(buf) + "_" + fs::path(cells[0]).stem().string();
    }
    const fs::path image_path = base / cells[offset];
    const fs::path gt_path = base / cells[offset + 1];
    const fs::path gen_path = base / cells[offset + 2];
    try {
      item.image = image_from_file(image_path.string());
      item.ground_truth_source = read_file(gt_path);
      item.generated_source = read_file(gen_path);
    } catch (const std::exception& e) {
      item.load_error = e.what();
    }
    items.push_back(std::move(item));
  }
  return items;
}

void register_universe(const std::vector<agreement::StudyItem>& items,
                       const std::shared_ptr<backends::OracleUniverse>& universe,
                       mermaid::ParseMode mode) {
  if (!universe) return;
  for (const auto& item : items) {
    if (!item.load_error.empty()) continue;
    try {
      universe->add(item.image, decompose(mermaid::parse_mermaid(item.ground_truth_source, mode)));
    } catch (const mermaid::ParseError&) {
      // The study records the same parse failure as an item failure.
    }
  }
}

int run_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  const auto items = load_manifest(args.manifest_path);
  const auto config = resolve_config(args.backend);
  auto setup = make_setup(config, args.backend, args.threshold);

  agreement::StudyOptions options;
  options.threshold = args.threshold;
  options.workers = args.workers;
  options.max_failure_ratio = args.max_failure_ratio;
  options.ground_truth_mode =
      args.lenient_ground_truth ? mermaid::ParseMode::lenient : mermaid::ParseMode::strict;

  register_universe(items, setup.universe, options.ground_truth_mode);
  const auto result = agreement::run_validation_study(items, *setup.ocr, *setup.ve, options);
  report_cache_warnings(setup, err);

  const fs::path out_dir(args.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::system_error(ec, "cannot create output directory " + out_dir.string());
  }
  write_file(out_dir / "study_summary.json", agreement::study_to_json(result) + "\n");
  write_file(out_dir / "study_rows.csv", agreement::study_rows_to_csv(result));
  err << "wrote " << (out_dir / "study_summary.json").string() << " and "
      << (out_dir / "study_rows.csv").string() << "\n";

  if (args.format == "json") {
    out << agreement::study_to_json(result) << "\n";
  } else {
    out << agreement::study_summary_table(result);
  }

  for (const auto& row : result.rows) {
    if (row.failed) err << "item " << row.id << " failed: " << row.error << "\n";
  }
  if (result.degraded) {
    err << "study degraded: " << result.failures << "/" << result.attempted
        << " items failed (budget " << args.max_failure_ratio << ")\n";
    return kExitDegraded;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// wiring

void add_backend_options(CLI::App* cmd, BackendOptions& options) {
  cmd->add_option("--backend-config", options.config_path,
                  "INI file selecting the OCR/VE backends (default: exact oracles)");
  cmd->add_option("--cache-dir", options.cache_dir,
                  "verdict cache directory; reruns skip answered calls");
  cmd->add_option("--batch-size", options.batch_size, "override the uncontended batch cap B0")
      ->check(CLI::Range(3, 1000));
  cmd->add_option("--seed", options.seed, "override the oracle noise seed");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"floweval: reference-free evaluation of flowchart image-to-code generation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  ParseArgs parse_args;
  auto* parse_cmd = app.add_subcommand("parse", "parse a flowchart file and dump its structure");
  parse_cmd->add_option("source", parse_args.source_path, "mermaid file")->required();
  parse_cmd->add_flag("--strict", parse_args.strict, "fail on malformed input instead of recovering");
  parse_cmd->add_option("--format", parse_args.format, "json | elements | mermaid | table")
      ->check(CLI::IsMember({"json", "elements", "mermaid", "table"}));

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "score one generated chart reference-free");
  eval_cmd->add_option("generated", eval_args.generated_path, "generated mermaid file")->required();
  eval_cmd->add_option("--image", eval_args.image_path, "chart image shown to the backends");
  eval_cmd->add_option("--oracle-ground-truth", eval_args.ground_truth_path,
                       "ground-truth mermaid file answering for the oracle backends");
  add_backend_options(eval_cmd, eval_args.backend);
  eval_cmd->add_option("--threshold", eval_args.threshold, "fuzzy-match similarity threshold")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
  eval_cmd->add_option("--min-recall", eval_args.min_recall, "gate: minimum recall_ocr")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--min-precision", eval_args.min_precision, "gate: minimum precision_ve")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--min-f1", eval_args.min_f1, "gate: minimum f1_ocr_ve")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--format", eval_args.format, "json | jsonl | table")
      ->check(CLI::IsMember({"json", "jsonl", "table"}));

  ValidateArgs validate_args;
  auto* validate_cmd =
      app.add_subcommand("validate", "run the proxy-vs-ground-truth agreement study on a corpus");
  validate_cmd->add_option("manifest", validate_args.manifest_path,
                           "CSV manifest: image,ground_truth,generated (optional id column)")
      ->required();
  validate_cmd->add_option("--out-dir", validate_args.out_dir,
                           "directory for study_summary.json and study_rows.csv");
  add_backend_options(validate_cmd, validate_args.backend);
  validate_cmd
      ->add_option("--threshold", validate_args.threshold, "fuzzy-match similarity threshold")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
  validate_cmd->add_option("--workers", validate_args.workers, "parallel item evaluations")
      ->check(CLI::Range(1, 256));
  validate_cmd
      ->add_option("--max-failure-ratio", validate_args.max_failure_ratio,
                   "item-failure share above which the run is degraded")
      ->check(CLI::Range(0.0, 1.0));
  validate_cmd->add_flag("--lenient-ground-truth", validate_args.lenient_ground_truth,
                         "parse ground truth leniently instead of strictly");
  validate_cmd->add_option("--format", validate_args.format, "table | json")
      ->check(CLI::IsMember({"table", "json"}));

  try {
    // CLI11's vector overload consumes a reversed argument list.
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (parse_cmd->parsed()) return run_parse(parse_args, out, err);
    if (eval_cmd->parsed()) return run_evaluate(eval_args, out, err);
    if (validate_cmd->parsed()) return run_validate(validate_args, out, err);
    err << "usage error: no subcommand given\n";
    return kExitIo;
  } catch (const mermaid::ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const backends::BackendError& e) {
    err << "backend error after " << e.attempts() << " attempt(s): " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::system_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace floweval::cli
