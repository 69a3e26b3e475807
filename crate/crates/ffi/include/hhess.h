#ifndef HHESS_H
#define HHESS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HhessStatus {
  HHESS_STATUS_OK = 0,
  HHESS_STATUS_NULL_POINTER = 1,
  HHESS_STATUS_INVALID_PARAMETER = 2,
  HHESS_STATUS_POLE_EVALUATION = 3,
  HHESS_STATUS_UNDER_DAMPED_INFEASIBLE = 4,
  HHESS_STATUS_NON_IDENTICAL_WASHOUT = 5,
  HHESS_STATUS_EMPTY_FLEET = 6,
  HHESS_STATUS_SCENARIO = 7,
  HHESS_STATUS_INTEGRATION_DIVERGED = 8,
  HHESS_STATUS_NO_EVENT = 9,
  HHESS_STATUS_SINGULAR_GRID_TERM = 10,
  HHESS_STATUS_SINGULAR_BRANCH_TERM = 11,
  HHESS_STATUS_OUT_OF_RANGE = 12,
  HHESS_STATUS_UNKNOWN_NAME = 13,
  HHESS_STATUS_PANIC = 14,
} HhessStatus;

/**
 * Droop bank owned by the caller.
 */
typedef struct HhessBank HhessBank;

/**
 * Simulation result owned by the caller.
 */
typedef struct HhessSeries HhessSeries;

typedef struct HhessBankParams {
  double alpha;
  double beta;
  double gamma;
  double zeta;
  double k;
  double v_ref;
} HhessBankParams;

typedef struct HhessCharacteristic {
  double omega0;
  double xi;
  double omega_c;
  double k1;
  double k2;
} HhessCharacteristic;

typedef struct HhessComplex {
  double re;
  double im;
} HhessComplex;

/**
 * Branch transfer values at one frequency.
 */
typedef struct HhessBranchResponse {
  struct HhessComplex ael;
  struct HhessComplex pemel;
  struct HhessComplex sc;
} HhessBranchResponse;

typedef struct HhessDesignTargets {
  double tau;
  double xi;
  double k1;
  double k2;
  double alpha;
} HhessDesignTargets;

typedef struct HhessInertia {
  double j;
  double d;
  double f_ref;
  double p_ref;
} HhessInertia;

typedef struct HhessGrid {
  double m_g;
  double d_g;
  double p_gen;
} HhessGrid;

typedef struct HhessSeriesRow {
  double t;
  double f;
  double p_t;
  double p_a;
  double p_p;
  double p_s;
  double v_dc;
  double delta_q;
  double soc;
} HhessSeriesRow;

typedef struct HhessMptCircuit {
  double r_sr;
  double l_r;
  double r_d1;
  double r_d2;
  double r_d3;
  double l_d1;
  double l_d2;
  double l_d3;
  double r_fp;
  double r_fa;
  double r_fs;
  double l_fp;
  double l_fa;
  double l_fs;
  double c_dcr;
  double c_dc1;
  double c_dc2;
  double c_dc3;
} HhessMptCircuit;

typedef struct HhessMptOperatingPoint {
  double k_ipr;
  double k_ip1;
  double k_ip2;
  double k_ip3;
  double d_vi;
  double d_grid;
  double v_gdr;
  double i_drref;
  double v_dcr;
  double v_dc;
  double v_p;
  double v_a;
  double v_s;
  double i_p;
  double i_a;
  double i_s;
  double i_pref;
  double i_aref;
  double i_sref;
  double duty_p;
  double duty_a;
  double duty_s;
} HhessMptOperatingPoint;

/**
 * Stability verdict. `binding_mu1` indexes the candidates in the order grid,
 * interconnect (PEMEL, AEL, SC), filter (PEMEL, AEL, SC); `binding_mu2` is
 * 0 for the rectifier and 1..3 for the PEMEL, AEL and SC capacitors.
 */
typedef struct HhessStabilityResult {
  double mu1;
  double mu2;
  double mu_sum;
  bool stable;
  bool boundary;
  uint32_t binding_mu1;
  uint32_t binding_mu2;
  double x1;
  double x2;
  double x3;
} HhessStabilityResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *hhess_last_error(void);

/**
 * Static name of a status code.
 */
const char *hhess_status_name(enum HhessStatus status);

/**
 * Creates a bank from explicit gains.
 *
 * # Safety
 * `out_bank` must be a valid pointer to writable storage for one handle.
 */
enum HhessStatus hhess_bank_new(struct HhessBankParams params, struct HhessBank **out_bank);

/**
 * Creates the shipped default bank (alpha = beta = 6.67e-4 V/W,
 * gamma = 750, zeta = 1500, k = 1, v_ref = 750 V).
 *
 * # Safety
 * `out_bank` must be a valid pointer to writable storage for one handle.
 */
enum HhessStatus hhess_bank_reference(struct HhessBank **out_bank);

/**
 * # Safety
 * `bank` must be NULL or a handle from this library that was not yet freed.
 */
void hhess_bank_free(struct HhessBank *bank);

/**
 * # Safety
 * `bank` must be a live handle and `params` writable.
 */
enum HhessStatus hhess_bank_params(const struct HhessBank *bank, struct HhessBankParams *params);

/**
 * Natural frequency, damping, cutoff and the two sharing indices.
 *
 * # Safety
 * `bank` must be a live handle and `result` writable.
 */
enum HhessStatus hhess_bank_characteristic(const struct HhessBank *bank,
                                           struct HhessCharacteristic *result);

/**
 * Evaluates the three branch transfer functions at `s = re + j im`.
 *
 * # Safety
 * `bank` must be a live handle and `result` writable.
 */
enum HhessStatus hhess_bank_transfer(const struct HhessBank *bank,
                                     struct HhessComplex s,
                                     struct HhessBranchResponse *result);

/**
 * Smallest damping target that admits a real PEMEL inertia for `k2`.
 */
double hhess_min_feasible_xi(double k2);

/**
 * Synthesizes a bank meeting the targets.
 *
 * # Safety
 * `out_bank` must be a valid pointer to writable storage for one handle.
 */
enum HhessStatus hhess_synthesize(struct HhessDesignTargets targets,
                                  double v_ref,
                                  struct HhessBank **out_bank);

/**
 * Default inertia-emulation loop parameters.
 *
 * # Safety
 * `result` must be writable.
 */
enum HhessStatus hhess_inertia_default(struct HhessInertia *result);

/**
 * Default grid swing model.
 *
 * # Safety
 * `result` must be writable.
 */
enum HhessStatus hhess_grid_default(struct HhessGrid *result);

/**
 * Runs the coupled frequency and allocation simulation.
 *
 * The load is piecewise constant: `load_p[i]` holds from `load_t[i]` until
 * the next breakpoint. `inertia` and `grid` may be NULL for the defaults.
 *
 * # Safety
 * `bank` must be a live handle. `load_t` and `load_p` must each point to
 * `n_load` readable values. `out_series` must be writable.
 */
enum HhessStatus hhess_simulate(const struct HhessBank *bank,
                                const struct HhessInertia *inertia,
                                const struct HhessGrid *grid,
                                const double *load_t,
                                const double *load_p,
                                uintptr_t n_load,
                                double t_end,
                                double dt,
                                double soc0,
                                double e_rated,
                                struct HhessSeries **out_series);

/**
 * # Safety
 * `series` must be NULL or a handle from this library that was not yet freed.
 */
void hhess_series_free(struct HhessSeries *series);

/**
 * Number of samples, or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
uintptr_t hhess_series_len(const struct HhessSeries *series);

/**
 * # Safety
 * `series` must be a live handle and `row` writable.
 */
enum HhessStatus hhess_series_row(const struct HhessSeries *series,
                                  uintptr_t index,
                                  struct HhessSeriesRow *row);

/**
 * Number of SOC excursions outside `[0, 1]`, or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
uintptr_t hhess_series_warning_count(const struct HhessSeries *series);

/**
 * Time and SOC of one excursion.
 *
 * # Safety
 * `series` must be a live handle; `t` and `soc` writable.
 */
enum HhessStatus hhess_series_warning(const struct HhessSeries *series,
                                      uintptr_t index,
                                      double *t,
                                      double *soc);

/**
 * Fills a named stability fixture: `"nominal"` or `"boundary"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `circuit` and `op` writable.
 */
enum HhessStatus hhess_mpt_fixture(const char *name,
                                   struct HhessMptCircuit *circuit,
                                   struct HhessMptOperatingPoint *op);

/**
 * d-axis current reference for grid power `p_grid`, using `P = 1.5 v i`.
 */
double hhess_mpt_current(double p_grid, double v_gdr);

/**
 * Evaluates the stability margins at one operating point.
 *
 * # Safety
 * `circuit` and `op` must be readable and `result` writable.
 */
enum HhessStatus hhess_mpt_evaluate(const struct HhessMptCircuit *circuit,
                                    const struct HhessMptOperatingPoint *op,
                                    struct HhessStabilityResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HHESS_H */
