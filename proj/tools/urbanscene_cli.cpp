// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "urbanscene/urbanscene.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIncomplete = 3;
constexpr int kExitAlignment = 4;

struct Failure {
  int exit_code;
};

struct Deleters {
  void operator()(us_config* p) const { us_config_free(p); }
  void operator()(us_ssd* p) const { us_ssd_free(p); }
  void operator()(us_qa_set* p) const { us_qa_free(p); }
  void operator()(us_report* p) const { us_report_free(p); }
  void operator()(char* p) const { us_string_free(p); }
};
template <typename T>
using Owned = std::unique_ptr<T, Deleters>;

void check(us_status s, const std::string& what) {
  if (s == US_OK) return;
  std::fprintf(stderr, "error: %s: %s (%s)\n", what.c_str(), us_last_error(), us_status_name(s));
  throw Failure{s == US_ERR_NOT_FOUND && what.rfind("respondent", 0) == 0 ? kExitUsage
                : s == US_ERR_ALIGNMENT                                  ? kExitAlignment
                                                                         : kExitError};
}

void usage_error(const std::string& message) {
  std::fprintf(stderr, "usage error: %s\n", message.c_str());
  throw Failure{kExitUsage};
}

Owned<us_config> load_config(const std::string& path) {
  if (path.empty()) return nullptr;
  us_config* c = nullptr;
  check(us_config_load(path.c_str(), &c), "loading config '" + path + "'");
  return Owned<us_config>(c);
}

std::string pick(const std::string& flag, const us_config* cfg, const char* (*from_config)(const us_config*),
                 const char* what) {
  if (!flag.empty()) return flag;
  if (cfg) {
    if (const char* p = from_config(cfg)) return p;
  }
  usage_error(std::string("no ") + what + " path given and none declared in the config");
  return {};
}

Owned<us_ssd> load_ssd(const std::string& path) {
  us_ssd* s = nullptr;
  check(us_ssd_load(path.c_str(), &s), "loading scene description '" + path + "'");
  return Owned<us_ssd>(s);
}

void write_text(const std::string& path, const char* text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "error: cannot write '%s'\n", path.c_str());
    throw Failure{kExitError};
  }
  std::fputs(text, f);
  std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured scene descriptions from maps, point clouds and images."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(us_version()));

  std::string config_path;
  std::string ssd_path;
  std::string qa_path;
  std::string out_path;
  std::string warnings_path;
  std::string respondent;
  std::string report_path;
  std::string csv_path;
  std::string question;
  std::string transcript_path;
  std::string raster_path;
  std::string synth_dir;
  std::string synth_name = "synthetic-campus";
  std::string caption_mode = "scripted";
  std::size_t per_category = 20;
  std::size_t buildings = 12;
  std::optional<std::uint64_t> seed;
  bool drop_identity = false;
  bool drop_geometric = false;
  bool drop_visual = false;
  bool drop_relationship = false;

  auto* describe = app.add_subcommand("describe", "Run the pipeline and write the scene description");
  describe->add_option("-c,--config", config_path, "Scene config (JSON)")->required()->check(CLI::ExistingFile);
  describe->add_option("-o,--out", out_path, "Output scene description (default: output.ssd in the config)");
  describe->add_option("--warnings", warnings_path, "Write pipeline warnings as JSON");

  auto* generate = app.add_subcommand("generate-qa", "Generate templated multiple-choice questions");
  generate->add_option("-c,--config", config_path, "Scene config (JSON)")->check(CLI::ExistingFile);
  generate->add_option("-s,--ssd", ssd_path, "Scene description (default: output.ssd in the config)");
  generate->add_option("-o,--out", out_path, "Output QA file (default: output.qa in the config)");
  generate->add_option("-n,--per-category", per_category, "Items per category")->check(CLI::PositiveNumber);
  generate->add_option("--seed", seed, "Seed (default: seed in the config)");

  auto* eval = app.add_subcommand("eval", "Score a respondent on a QA file");
  eval->add_option("-c,--config", config_path, "Scene config (JSON)")->check(CLI::ExistingFile);
  eval->add_option("-s,--ssd", ssd_path, "Scene description (default: output.ssd in the config)");
  eval->add_option("-q,--qa", qa_path, "QA file (default: output.qa in the config)");
  eval->add_option("-r,--respondent", respondent, "Respondent name from the config, or 'oracle'")->required();
  eval->add_option("-o,--report", report_path, "Report output (JSON)")->required();
  eval->add_option("--csv", csv_path, "Ratio grid output (CSV)");
  eval->add_flag("--drop-identity", drop_identity, "Remove identity blocks");
  eval->add_flag("--drop-geometric", drop_geometric, "Remove geometric blocks");
  eval->add_flag("--drop-visual", drop_visual, "Remove visual blocks");
  eval->add_flag("--drop-relationship", drop_relationship, "Remove spatial and topology blocks");

  auto* ask = app.add_subcommand("ask", "Ask a free-form question about the scene");
  ask->add_option("-c,--config", config_path, "Scene config (JSON)")->check(CLI::ExistingFile);
  ask->add_option("-s,--ssd", ssd_path, "Scene description (default: output.ssd in the config)");
  ask->add_option("-r,--respondent", respondent, "Respondent name")->required();
  ask->add_option("question", question, "Question text")->required();
  ask->add_option("-t,--transcript", transcript_path, "Write the exchange as JSON");

  auto* align = app.add_subcommand("align-check", "Fit the configured correspondences and report residuals");
  align->add_option("-c,--config", config_path, "Scene config (JSON)")->required()->check(CLI::ExistingFile);
  align->add_option("--raster", raster_path, "Write the top-view raster of the cloud (PGM)");
  align->add_option("-o,--report", report_path, "Write the report (JSON) instead of printing it");

  auto* synth = app.add_subcommand("synth", "Write a synthetic scene with its config");
  synth->add_option("-d,--dir", synth_dir, "Output directory")->required();
  synth->add_option("-n,--buildings", buildings, "Number of buildings")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Seed");
  synth->add_option("--name", synth_name, "Scene name");
  synth->add_option("--captions", caption_mode, "Captioning mode written to the config")
      ->check(CLI::IsMember({"scripted", "record", "replay", "none"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (describe->parsed()) {
      auto cfg = load_config(config_path);
      const std::string out = pick(out_path, cfg.get(), us_config_ssd_output, "output");
      us_ssd* raw = nullptr;
      char* warnings = nullptr;
      check(us_describe(cfg.get(), &raw, &warnings), "describe");
      Owned<us_ssd> ssd(raw);
      Owned<char> w(warnings);
      check(us_ssd_save(ssd.get(), out.c_str()), "writing '" + out + "'");
      if (!warnings_path.empty()) write_text(warnings_path, w.get());
      std::printf("wrote %s (%zu objects)\n", out.c_str(), us_ssd_object_count(ssd.get()));
    } else if (generate->parsed()) {
      auto cfg = load_config(config_path);
      const std::string in = pick(ssd_path, cfg.get(), us_config_ssd_output, "scene description");
      const std::string out = pick(out_path, cfg.get(), us_config_qa_output, "QA output");
      auto ssd = load_ssd(in);
      us_qa_set* raw = nullptr;
      char* warnings = nullptr;
      check(us_qa_generate(ssd.get(), per_category, seed.value_or(us_config_seed(cfg.get())), &raw, &warnings),
            "generate-qa");
      Owned<us_qa_set> qa(raw);
      Owned<char> w(warnings);
      check(us_qa_save(qa.get(), out.c_str()), "writing '" + out + "'");
      std::printf("wrote %s (%zu items)\n", out.c_str(), us_qa_count(qa.get()));
    } else if (eval->parsed()) {
      auto cfg = load_config(config_path);
      const std::string in = pick(ssd_path, cfg.get(), us_config_ssd_output, "scene description");
      const std::string qa_in = pick(qa_path, cfg.get(), us_config_qa_output, "QA");
      auto ssd = load_ssd(in);
      us_qa_set* raw_qa = nullptr;
      check(us_qa_load(qa_in.c_str(), &raw_qa), "loading QA file '" + qa_in + "'");
      Owned<us_qa_set> qa(raw_qa);
      unsigned mask = 0;
      if (drop_identity) mask |= US_DROP_IDENTITY;
      if (drop_geometric) mask |= US_DROP_GEOMETRIC;
      if (drop_visual) mask |= US_DROP_VISUAL;
      if (drop_relationship) mask |= US_DROP_RELATIONSHIP;
      us_report* raw = nullptr;
      check(us_eval_run(cfg.get(), respondent.c_str(), ssd.get(), qa.get(), mask, &raw),
            "respondent '" + respondent + "'");
      Owned<us_report> report(raw);
      check(us_report_save_json(report.get(), report_path.c_str()), "writing '" + report_path + "'");
      if (!csv_path.empty()) check(us_report_save_csv(report.get(), csv_path.c_str()), "writing '" + csv_path + "'");
      std::printf("%zu/%zu correct, overall %.4f (micro %.4f)\n", us_report_correct(report.get()),
                  us_report_total(report.get()), us_report_overall(report.get(), 0), us_report_overall(report.get(), 1));
      if (!us_report_is_complete(report.get())) {
        std::fprintf(stderr, "error: some items received no reply; the report is incomplete\n");
        return kExitIncomplete;
      }
    } else if (ask->parsed()) {
      auto cfg = load_config(config_path);
      const std::string in = pick(ssd_path, cfg.get(), us_config_ssd_output, "scene description");
      auto ssd = load_ssd(in);
      char* reply = nullptr;
      char* transcript = nullptr;
      check(us_ask(cfg.get(), respondent.c_str(), ssd.get(), question.c_str(), &reply,
                   transcript_path.empty() ? nullptr : &transcript),
            "respondent '" + respondent + "'");
      Owned<char> r(reply);
      Owned<char> t(transcript);
      if (t) write_text(transcript_path, t.get());
      std::printf("%s\n", r.get());
    } else if (align->parsed()) {
      auto cfg = load_config(config_path);
      char* json = nullptr;
      int passed = 0;
      check(us_align_check(cfg.get(), raster_path.empty() ? nullptr : raster_path.c_str(), &json, &passed),
            "align-check");
      Owned<char> j(json);
      if (report_path.empty()) {
        std::fputs(j.get(), stdout);
      } else {
        write_text(report_path, j.get());
      }
      if (!passed) {
        std::fprintf(stderr, "error: alignment residual above threshold\n");
        return kExitAlignment;
      }
    } else if (synth->parsed()) {
      check(us_synthesize_scene(synth_dir.c_str(), synth_name.c_str(), buildings, seed.value_or(1), caption_mode.c_str()),
            "synth");
      std::printf("wrote %s/config.json\n", synth_dir.c_str());
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return 0;
}
