#include "bandloop/bandloop.h"

#include <complex>
#include <string>

#include "core/band_model.hpp"
#include "core/circulant.hpp"
#include "core/errors.hpp"
#include "core/experiment.hpp"
#include "core/primitive.hpp"
#include "core/report_io.hpp"
#include "core/spectral.hpp"

using namespace bandloop;

struct bl_model {
  BandModel model;
};
struct bl_sample {
  BandModel model;
  HermitianSample sample;
};
struct bl_config {
  ExperimentConfig config;
};
struct bl_report {
  ExperimentReport report;
  std::string brief_cache;
  std::string json_cache;
};

namespace {

thread_local std::string g_last_error;

bl_status set_error(bl_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <typename F>
bl_status guarded(F&& f) {
  try {
    f();
    return BL_OK;
  } catch (const ConfigError& e) {
    return set_error(BL_CONFIG_ERROR, e.what());
  } catch (const InvalidArgument& e) {
    return set_error(BL_INVALID_ARGUMENT, e.what());
  } catch (const NumericError& e) {
    return set_error(BL_NUMERIC_ERROR, e.what());
  } catch (const IoError& e) {
    return set_error(BL_IO_ERROR, e.what());
  } catch (const std::exception& e) {
    return set_error(BL_INTERNAL_ERROR, e.what());
  } catch (...) {
    return set_error(BL_INTERNAL_ERROR, "unknown exception");
  }
}

bl_status require_arg(bool ok, const char* msg) {
  return ok ? BL_OK : set_error(BL_INVALID_ARGUMENT, msg);
}

}  // namespace

extern "C" {

const char* bl_version(void) { return "1.0.0"; }

const char* bl_last_error(void) { return g_last_error.c_str(); }

bl_status bl_model_create(int32_t W, int32_t L, bl_model** out) {
  if (auto s = require_arg(out != nullptr, "bl_model_create: out is NULL")) return s;
  return guarded([&] { *out = new bl_model{BandModel(W, L)}; });
}

void bl_model_free(bl_model* model) { delete model; }

int64_t bl_model_dimension(const bl_model* model) {
  return model ? model->model.dimension() : 0;
}

bl_status bl_model_variance(const bl_model* model, int64_t i, int64_t j, double* out) {
  if (auto s = require_arg(model && out, "bl_model_variance: NULL argument")) return s;
  return guarded([&] { *out = model->model.variance(i, j); });
}

bl_status bl_sample_draw(const bl_model* model, uint64_t master_seed, uint64_t sample_index,
                         bl_sample** out) {
  if (auto s = require_arg(model && out, "bl_sample_draw: NULL argument")) return s;
  return guarded([&] {
    *out = new bl_sample{model->model, sample_hamiltonian(model->model, master_seed, sample_index)};
  });
}

bl_status bl_sample_scale_time(const bl_sample* sample, double t, bl_sample** out) {
  if (auto s = require_arg(sample && out, "bl_sample_scale_time: NULL argument")) return s;
  return guarded([&] { *out = new bl_sample{sample->model, scale_to_time(sample->sample, t)}; });
}

bl_status bl_sample_entry(const bl_sample* sample, int64_t i, int64_t j, double* out_re,
                          double* out_im) {
  if (auto s = require_arg(sample && out_re && out_im, "bl_sample_entry: NULL argument")) return s;
  return guarded([&] {
    const long N = sample->model.dimension();
    require(i >= 0 && i < N && j >= 0 && j < N, "bl_sample_entry: index out of range");
    const std::complex<double> v = sample->sample.H(i, j);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

void bl_sample_free(bl_sample* sample) { delete sample; }

bl_status bl_stieltjes(double re, double im, double* out_re, double* out_im) {
  if (auto s = require_arg(out_re && out_im, "bl_stieltjes: NULL output")) return s;
  return guarded([&] {
    const Complex m = stieltjes_semicircle(Complex(re, im));
    *out_re = m.real();
    *out_im = m.imag();
  });
}

bl_status bl_theta_entry(double xi_re, double xi_im, int32_t L, int32_t x, int32_t y,
                         double* out_re, double* out_im) {
  if (auto s = require_arg(out_re && out_im, "bl_theta_entry: NULL output")) return s;
  return guarded([&] {
    require(x >= 0 && x < L && y >= 0 && y < L, "bl_theta_entry: index out of range");
    const CirculantKernel kernel = theta_kernel(Complex(xi_re, xi_im), L);
    const Complex v = kernel.entry(x, y);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

bl_status bl_k_loop(const bl_model* model, double E, double t, const int8_t* charges,
                    const int32_t* blocks, size_t n, double* out_re, double* out_im) {
  if (auto s = require_arg(model && charges && blocks && out_re && out_im && n > 0,
                           "bl_k_loop: NULL argument or empty word"))
    return s;
  return guarded([&] {
    SignWord sigma(n);
    std::vector<int> word(n);
    for (size_t i = 0; i < n; ++i) {
      require(charges[i] == 1 || charges[i] == -1, "bl_k_loop: charges must be +1 or -1");
      sigma[i] = charges[i] == 1 ? Charge::Plus : Charge::Minus;
      word[i] = blocks[i];
    }
    const Complex v = k_loop(model->model, E, t, sigma, word);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

bl_status bl_config_load(const char* path, bl_config** out) {
  if (auto s = require_arg(path && out, "bl_config_load: NULL argument")) return s;
  return guarded([&] { *out = new bl_config{ExperimentConfig::from_file(path)}; });
}

bl_status bl_config_parse(const char* text, bl_config** out) {
  if (auto s = require_arg(text && out, "bl_config_parse: NULL argument")) return s;
  return guarded([&] { *out = new bl_config{ExperimentConfig::from_text(text)}; });
}

bl_status bl_config_set(bl_config* config, const char* key, const char* value) {
  if (auto s = require_arg(config && key && value, "bl_config_set: NULL argument")) return s;
  return guarded([&] { config->config.set(key, value); });
}

void bl_config_free(bl_config* config) { delete config; }

bl_status bl_run(const bl_config* config, int32_t threads, bl_report** out) {
  if (auto s = require_arg(config && out, "bl_run: NULL argument")) return s;
  return guarded([&] {
    RunOptions opt;
    opt.threads = threads;
    *out = new bl_report{run_experiment(config->config, opt), {}, {}};
  });
}

int32_t bl_report_passed(const bl_report* report) {
  return report && report->report.passed() ? 1 : 0;
}

const char* bl_report_brief(bl_report* report) {
  if (!report) return "";
  report->brief_cache = report->report.brief();
  return report->brief_cache.c_str();
}

const char* bl_report_json(bl_report* report) {
  if (!report) return "";
  report->json_cache = report_to_json(report->report);
  return report->json_cache.c_str();
}

bl_status bl_report_write(const bl_report* report, const char* path, bl_format format,
                          int32_t overwrite) {
  if (auto s = require_arg(report && path, "bl_report_write: NULL argument")) return s;
  return guarded([&] {
    write_report(report->report, path,
                 format == BL_FORMAT_CSV ? ReportFormat::Csv : ReportFormat::Json,
                 overwrite != 0);
  });
}

void bl_report_free(bl_report* report) { delete report; }

}  // extern "C"
