/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef BRO_MIMO_H
#define BRO_MIMO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum BroStatus {
  BRO_STATUS_OK = 0,
  BRO_STATUS_NULL_POINTER = 1,
  BRO_STATUS_INVALID_UTF8 = 2,
  BRO_STATUS_PARSE = 3,
  BRO_STATUS_VALIDATION = 4,
  BRO_STATUS_SOLVER = 5,
  BRO_STATUS_IO = 6,
  BRO_STATUS_PANIC = 7,
  BRO_STATUS_OUT_OF_RANGE = 8,
} BroStatus;

typedef enum BroDecoder {
  BRO_DECODER_BRO = 0,
  BRO_DECODER_LS = 1,
} BroDecoder;

typedef enum BroObjective {
  BRO_OBJECTIVE_MSE = 0,
  BRO_OBJECTIVE_BER = 1,
} BroObjective;

// Result of [`bro_optimize_alpha`].
typedef struct BroAllocationCurve BroAllocationCurve;

// Parsed and validated experiment configuration.
typedef struct BroConfig BroConfig;

// Result of [`bro_simulate`].
typedef struct BroSimulation BroSimulation;

// Asymptotic prediction of the box-relaxation detector.
typedef struct BroPrediction {
  double mu_star;
  double gamma_star;
  double mse;
  double ber;
  double objective;
  // Receive antenna count used for the prediction.
  uint64_t m;
} BroPrediction;

// Monte Carlo averages of one decoder. Standard errors are NaN when only
// one trial was run.
typedef struct BroDecoderStats {
  enum BroDecoder decoder;
  double mean_mse;
  double std_err_mse;
  double mean_ber;
  double std_err_ber;
  uint64_t n_trials;
  uint64_t n_nonconverged;
} BroDecoderStats;

// One grid point of an allocation curve.
typedef struct BroCurvePoint {
  double alpha;
  double mu_star;
  double mse;
  double ber;
} BroCurvePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *bro_version(void);

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *bro_last_error_message(void);

// Gaussian tail probability `Q(x)`.
double bro_q_function(double x);

// Asymptotic MSE as a function of the saddle parameter `μ`.
double bro_big_f(double mu);

double bro_upsilon(double mu);

// Second moment of the standard normal truncated to `[0, μ]`.
double bro_varphi(double mu);

// Parses and validates a JSON configuration held in memory.
//
// # Safety
// `json` must be NULL or a NUL-terminated string; `out` must be NULL or
// point to writable storage for one handle.
enum BroStatus bro_config_parse_json(const char *json, struct BroConfig **out);

// Reads, parses and validates a JSON configuration file.
//
// # Safety
// As for [`bro_config_parse_json`], with `path` a file path.
enum BroStatus bro_config_load(const char *path, struct BroConfig **out);

// Overrides the number of Monte Carlo trials.
//
// # Safety
// `config` must be NULL or a live handle.
enum BroStatus bro_config_set_trials(struct BroConfig *config, uint64_t trials);

// # Safety
// `config` must be NULL or a handle not yet freed.
void bro_config_free(struct BroConfig *config);

// Asymptotic MSE and BER for the configured system.
//
// # Safety
// `config` must be NULL or a live handle; `out` NULL or writable.
enum BroStatus bro_predict(const struct BroConfig *config, struct BroPrediction *out);

// Runs the configured Monte Carlo experiment.
//
// # Safety
// `config` must be NULL or a live handle; `out` NULL or writable.
enum BroStatus bro_simulate(const struct BroConfig *config, struct BroSimulation **out);

// Number of decoders in a simulation result; 0 for NULL.
//
// # Safety
// `sim` must be NULL or a live handle.
size_t bro_simulation_count(const struct BroSimulation *sim);

// Averages of the `index`-th decoder, in configuration order.
//
// # Safety
// `sim` must be NULL or a live handle; `out` NULL or writable.
enum BroStatus bro_simulation_get(const struct BroSimulation *sim,
                                  size_t index,
                                  struct BroDecoderStats *out);

// Asymptotic prediction attached to a simulation result.
//
// # Safety
// `sim` must be NULL or a live handle; `out` NULL or writable.
enum BroStatus bro_simulation_theory(const struct BroSimulation *sim, struct BroPrediction *out);

// # Safety
// `sim` must be NULL or a handle not yet freed.
void bro_simulation_free(struct BroSimulation *sim);

// Optimizes the data power fraction on a grid of `grid_points` values.
//
// # Safety
// `config` must be NULL or a live handle; `out` NULL or writable.
enum BroStatus bro_optimize_alpha(const struct BroConfig *config,
                                  enum BroObjective objective,
                                  size_t grid_points,
                                  struct BroAllocationCurve **out);

// Number of grid points; 0 for NULL.
//
// # Safety
// `curve` must be NULL or a live handle.
size_t bro_curve_len(const struct BroAllocationCurve *curve);

// # Safety
// `curve` must be NULL or a live handle; `out` NULL or writable.
enum BroStatus bro_curve_point(const struct BroAllocationCurve *curve,
                               size_t index,
                               struct BroCurvePoint *out);

// Refined MSE-optimal data fraction; NaN for NULL.
//
// # Safety
// `curve` must be NULL or a live handle.
double bro_curve_alpha_star_mse(const struct BroAllocationCurve *curve);

// Refined BER-optimal data fraction; NaN for NULL.
//
// # Safety
// `curve` must be NULL or a live handle.
double bro_curve_alpha_star_ber(const struct BroAllocationCurve *curve);

// # Safety
// `curve` must be NULL or a handle not yet freed.
void bro_curve_free(struct BroAllocationCurve *curve);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRO_MIMO_H */
