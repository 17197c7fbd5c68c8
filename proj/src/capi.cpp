// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/urbanscene.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "urbanscene/eval.hpp"
#include "urbanscene/oracle.hpp"
#include "urbanscene/pipeline.hpp"
#include "urbanscene/ssd.hpp"
#include "urbanscene/synth.hpp"

struct us_config {
  urbanscene::SceneConfig config;
  std::string ssd_output;
  std::string qa_output;
};

struct us_ssd {
  urbanscene::StructuredSceneDescription ssd;
};

struct us_qa_set {
  std::vector<urbanscene::QAItem> items;
};

struct us_report {
  urbanscene::EvalReport report;
};

namespace {

thread_local std::string last_error;

us_status to_status(urbanscene::ErrorCode code) {
  using urbanscene::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return US_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return US_ERR_PARSE;
    case ErrorCode::Io: return US_ERR_IO;
    case ErrorCode::Degenerate: return US_ERR_DEGENERATE;
    case ErrorCode::NotFound: return US_ERR_NOT_FOUND;
    case ErrorCode::Transport: return US_ERR_TRANSPORT;
    case ErrorCode::ContextLimit: return US_ERR_CONTEXT_LIMIT;
    case ErrorCode::Alignment: return US_ERR_ALIGNMENT;
    case ErrorCode::Fixture: return US_ERR_FIXTURE;
    case ErrorCode::Internal: return US_ERR_INTERNAL;
  }
  return US_ERR_INTERNAL;
}

template <typename F>
us_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return US_OK;
  } catch (const urbanscene::ParseError& e) {
    last_error = e.what();
    if (e.line() > 0) last_error += " (line " + std::to_string(e.line()) + ")";
    return US_ERR_PARSE;
  } catch (const urbanscene::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return US_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return US_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return US_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw urbanscene::Error(urbanscene::ErrorCode::InvalidArgument, what);
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string warnings_json(const urbanscene::Warnings& warnings) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& w : warnings) arr.push_back({{"stage", w.stage}, {"subject", w.subject}, {"message", w.message}});
  return arr.dump(2);
}

urbanscene::AblationMask to_mask(unsigned bits) {
  urbanscene::AblationMask m;
  m.drop_identity = bits & US_DROP_IDENTITY;
  m.drop_geometric = bits & US_DROP_GEOMETRIC;
  m.drop_visual = bits & US_DROP_VISUAL;
  m.drop_relationship = bits & US_DROP_RELATIONSHIP;
  return m;
}

}  // namespace

extern "C" {

const char* us_version(void) { return URBANSCENE_VERSION; }

const char* us_status_name(us_status status) {
  switch (status) {
    case US_OK: return "ok";
    case US_ERR_INVALID_ARGUMENT: return "invalid argument";
    case US_ERR_PARSE: return "parse error";
    case US_ERR_IO: return "i/o error";
    case US_ERR_DEGENERATE: return "degenerate input";
    case US_ERR_NOT_FOUND: return "not found";
    case US_ERR_TRANSPORT: return "transport error";
    case US_ERR_CONTEXT_LIMIT: return "context limit exceeded";
    case US_ERR_ALIGNMENT: return "alignment error";
    case US_ERR_FIXTURE: return "fixture miss";
    case US_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* us_last_error(void) { return last_error.c_str(); }

void us_string_free(char* s) { std::free(s); }

us_status us_config_load(const char* path, us_config** out) {
  return guarded([&] {
    require(path && out, "us_config_load: null argument");
    auto* c = new us_config{urbanscene::SceneConfig::load(path), {}, {}};
    c->ssd_output = c->config.ssd_output.string();
    c->qa_output = c->config.qa_output.string();
    *out = c;
  });
}

void us_config_free(us_config* config) { delete config; }

const char* us_config_ssd_output(const us_config* config) {
  return config && !config->ssd_output.empty() ? config->ssd_output.c_str() : nullptr;
}

const char* us_config_qa_output(const us_config* config) {
  return config && !config->qa_output.empty() ? config->qa_output.c_str() : nullptr;
}

uint64_t us_config_seed(const us_config* config) { return config ? config->config.seed : 0; }

us_status us_describe(const us_config* config, us_ssd** out, char** warnings) {
  return guarded([&] {
    require(config && out, "us_describe: null argument");
    urbanscene::DescribeResult r = urbanscene::describe_scene(config->config);
    if (warnings) *warnings = dup(warnings_json(r.warnings));
    *out = new us_ssd{std::move(r.ssd)};
  });
}

us_status us_ssd_parse(const char* text, us_ssd** out) {
  return guarded([&] {
    require(text && out, "us_ssd_parse: null argument");
    *out = new us_ssd{urbanscene::parse_ssd(text)};
  });
}

us_status us_ssd_load(const char* path, us_ssd** out) {
  return guarded([&] {
    require(path && out, "us_ssd_load: null argument");
    *out = new us_ssd{urbanscene::parse_ssd(urbanscene::read_file(path))};
  });
}

us_status us_ssd_save(const us_ssd* ssd, const char* path) {
  return guarded([&] {
    require(ssd && path, "us_ssd_save: null argument");
    urbanscene::write_file(path, urbanscene::serialize(ssd->ssd));
  });
}

us_status us_ssd_serialize(const us_ssd* ssd, char** out) {
  return guarded([&] {
    require(ssd && out, "us_ssd_serialize: null argument");
    *out = dup(urbanscene::serialize(ssd->ssd));
  });
}

us_status us_ssd_apply_ablation(const us_ssd* ssd, unsigned mask, us_ssd** out) {
  return guarded([&] {
    require(ssd && out, "us_ssd_apply_ablation: null argument");
    *out = new us_ssd{urbanscene::apply_ablation(ssd->ssd, to_mask(mask))};
  });
}

size_t us_ssd_object_count(const us_ssd* ssd) { return ssd ? ssd->ssd.objects.size() : 0; }

void us_ssd_free(us_ssd* ssd) { delete ssd; }

size_t us_estimate_tokens(const char* text) { return text ? urbanscene::estimate_tokens(text) : 0; }

us_status us_qa_generate(const us_ssd* ssd, size_t per_category, uint64_t seed, us_qa_set** out, char** warnings) {
  return guarded([&] {
    require(ssd && out, "us_qa_generate: null argument");
    urbanscene::QaGeneration g = urbanscene::generate_qa(ssd->ssd, per_category, seed);
    if (warnings) *warnings = dup(warnings_json(g.warnings));
    *out = new us_qa_set{std::move(g.items)};
  });
}

us_status us_qa_load(const char* path, us_qa_set** out) {
  return guarded([&] {
    require(path && out, "us_qa_load: null argument");
    *out = new us_qa_set{urbanscene::parse_qa(urbanscene::read_file(path))};
  });
}

us_status us_qa_save(const us_qa_set* qa, const char* path) {
  return guarded([&] {
    require(qa && path, "us_qa_save: null argument");
    urbanscene::write_file(path, urbanscene::write_qa(qa->items));
  });
}

size_t us_qa_count(const us_qa_set* qa) { return qa ? qa->items.size() : 0; }

void us_qa_free(us_qa_set* qa) { delete qa; }

us_status us_eval_run(const us_config* config, const char* respondent, const us_ssd* ssd, const us_qa_set* qa,
                      unsigned mask, us_report** out) {
  return guarded([&] {
    require(respondent && ssd && qa && out, "us_eval_run: null argument");
    const urbanscene::RespondentHandle h =
        urbanscene::make_respondent(config ? &config->config : nullptr, respondent);
    auto* r = new us_report{urbanscene::run_eval(qa->items, ssd->ssd, h.respondent, to_mask(mask))};
    h.finish();
    *out = r;
  });
}

us_status us_report_save_json(const us_report* report, const char* path) {
  return guarded([&] {
    require(report && path, "us_report_save_json: null argument");
    urbanscene::write_file(path, urbanscene::report_json(report->report));
  });
}

us_status us_report_save_csv(const us_report* report, const char* path) {
  return guarded([&] {
    require(report && path, "us_report_save_csv: null argument");
    urbanscene::write_file(path, urbanscene::report_csv(report->report));
  });
}

us_status us_report_json(const us_report* report, char** out) {
  return guarded([&] {
    require(report && out, "us_report_json: null argument");
    *out = dup(urbanscene::report_json(report->report));
  });
}

double us_report_overall(const us_report* report, int micro) {
  if (!report) return 0.0;
  return micro ? report->report.micro : report->report.macro;
}

size_t us_report_total(const us_report* report) { return report ? report->report.total : 0; }

size_t us_report_correct(const us_report* report) { return report ? report->report.correct : 0; }

int us_report_is_complete(const us_report* report) { return report && report->report.complete() ? 1 : 0; }

void us_report_free(us_report* report) { delete report; }

us_status us_ask(const us_config* config, const char* respondent, const us_ssd* ssd, const char* question,
                 char** reply, char** transcript) {
  return guarded([&] {
    require(respondent && ssd && question && reply, "us_ask: null argument");
    const urbanscene::RespondentHandle h =
        urbanscene::make_respondent(config ? &config->config : nullptr, respondent);
    const urbanscene::AskResult r = urbanscene::ask_scene(ssd->ssd, question, h.respondent);
    h.finish();
    char* text = dup(r.reply);
    if (transcript) {
      try {
        *transcript = dup(r.to_json());
      } catch (...) {
        std::free(text);
        throw;
      }
    }
    *reply = text;
  });
}

us_status us_align_check(const us_config* config, const char* raster_path, char** report_json, int* passed) {
  return guarded([&] {
    require(config && report_json, "us_align_check: null argument");
    const urbanscene::AlignmentReport r =
        urbanscene::align_check(config->config, raster_path ? std::filesystem::path(raster_path) : std::filesystem::path());
    *report_json = dup(r.to_json());
    if (passed) *passed = r.passed() ? 1 : 0;
  });
}

double us_haversine_distance(double lon1, double lat1, double lon2, double lat2) {
  return urbanscene::haversine_distance({lon1, lat1}, {lon2, lat2});
}

us_status us_bearing(double lon1, double lat1, double lon2, double lat2, double* out) {
  return guarded([&] {
    require(out != nullptr, "us_bearing: null argument");
    *out = urbanscene::bearing({lon1, lat1}, {lon2, lat2});
  });
}

us_status us_synthesize_scene(const char* dir, const char* name, size_t buildings, uint64_t seed,
                              const char* caption_mode) {
  return guarded([&] {
    require(dir && name && caption_mode, "us_synthesize_scene: null argument");
    const std::string mode = caption_mode;
    require(mode == "scripted" || mode == "record" || mode == "replay" || mode == "none",
            "us_synthesize_scene: caption mode must be scripted, record, replay or none");
    urbanscene::SynthOptions o;
    o.buildings = buildings;
    o.seed = seed;
    urbanscene::write_scene(urbanscene::synthesize_scene(o), dir, name, mode, seed);
  });
}

}  // extern "C"
