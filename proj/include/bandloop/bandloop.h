/* bandloop - random band matrix loop laboratory, C API.
 *
 * The library is a C++ core exposed through opaque handles and integer
 * status codes. Every function that can fail returns bl_status; on failure
 * bl_last_error() (thread-local) describes what went wrong. Handles are
 * freed with their matching *_free function; freeing NULL is a no-op.
 */
#ifndef BANDLOOP_H
#define BANDLOOP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bl_status {
  BL_OK = 0,
  BL_INVALID_ARGUMENT = 1, /* parameter outside its domain */
  BL_CONFIG_ERROR = 2,     /* malformed or inconsistent configuration */
  BL_NUMERIC_ERROR = 3,    /* eigensolver / ODE convergence failure */
  BL_IO_ERROR = 4,         /* filesystem or serialization failure */
  BL_INTERNAL_ERROR = 5
} bl_status;

typedef enum bl_format { BL_FORMAT_CSV = 0, BL_FORMAT_JSON = 1 } bl_format;

typedef struct bl_model bl_model;
typedef struct bl_sample bl_sample;
typedef struct bl_config bl_config;
typedef struct bl_report bl_report;

const char* bl_version(void);

/* Thread-local message for the most recent failure in this thread. */
const char* bl_last_error(void);

/* ---- band model ------------------------------------------------------- */

/* Block band model with block size W (>= 1) and block count L (>= 3). */
bl_status bl_model_create(int32_t W, int32_t L, bl_model** out);
void bl_model_free(bl_model* model);

int64_t bl_model_dimension(const bl_model* model);

/* Variance S_ij of entry (i, j), 0-based indices. */
bl_status bl_model_variance(const bl_model* model, int64_t i, int64_t j, double* out);

/* ---- sampling --------------------------------------------------------- */

/* Draws the Gaussian band Hamiltonian for (master seed, sample index). */
bl_status bl_sample_draw(const bl_model* model, uint64_t master_seed, uint64_t sample_index,
                         bl_sample** out);
/* sqrt(t) * H, the fixed-time flow marginal; t in (0, 1]. */
bl_status bl_sample_scale_time(const bl_sample* sample, double t, bl_sample** out);
/* Entry (i, j) of the sampled matrix. */
bl_status bl_sample_entry(const bl_sample* sample, int64_t i, int64_t j, double* out_re,
                          double* out_im);
void bl_sample_free(bl_sample* sample);

/* ---- scalar spectral helpers ------------------------------------------ */

/* Semicircle Stieltjes transform at z = re + i im (im > 0). */
bl_status bl_stieltjes(double re, double im, double* out_re, double* out_im);

/* Propagator entry [(1 - xi S_B)^{-1}](x, y) on the block ring Z_L. */
bl_status bl_theta_entry(double xi_re, double xi_im, int32_t L, int32_t x, int32_t y,
                         double* out_re, double* out_im);

/* Primitive loop value for the charge word (+1 / -1 entries) and 0-based
 * block word, both of length n, at energy E and flow time t. */
bl_status bl_k_loop(const bl_model* model, double E, double t, const int8_t* charges,
                    const int32_t* blocks, size_t n, double* out_re, double* out_im);

/* ---- experiments ------------------------------------------------------ */

/* Parses a key = value config file / text buffer. */
bl_status bl_config_load(const char* path, bl_config** out);
bl_status bl_config_parse(const char* text, bl_config** out);
/* Overrides one key ("kind" selects the experiment). */
bl_status bl_config_set(bl_config* config, const char* key, const char* value);
void bl_config_free(bl_config* config);

/* Runs the configured experiment on `threads` worker threads. Reports are a
 * pure function of the config; the thread count only affects wall clock. */
bl_status bl_run(const bl_config* config, int32_t threads, bl_report** out);

/* 1 when every acceptance check in the report passed. */
int32_t bl_report_passed(const bl_report* report);

/* One line per check, "PASS name ..." / "FAIL name ...". Owned by report. */
const char* bl_report_brief(bl_report* report);

/* Full JSON document (payload + runtime). Owned by report. */
const char* bl_report_json(bl_report* report);

/* Writes CSV or JSON; refuses existing paths unless overwrite != 0. */
bl_status bl_report_write(const bl_report* report, const char* path, bl_format format,
                          int32_t overwrite);
void bl_report_free(bl_report* report);

#ifdef __cplusplus
}
#endif

#endif /* BANDLOOP_H */
