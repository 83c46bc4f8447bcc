/* ethlab: exact-diagonalization laboratory for system+bath spin models.
 *
 * All handles are opaque; every function returns an ethlab_status and sets a
 * thread-local message retrievable via ethlab_last_error(). Strings returned
 * through char** are heap-allocated and must be released with
 * ethlab_string_free(). Parameters and reports travel as JSON documents; the
 * schemas are described in the project README.
 */
#ifndef ETHLAB_H
#define ETHLAB_H

#include <stddef.h>

#if defined(_WIN32)
#define ETHLAB_API __declspec(dllexport)
#else
#define ETHLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ethlab_status {
  ETHLAB_OK = 0,
  ETHLAB_ERR_SPEC = 2,    /* invalid input, violated precondition, I/O */
  ETHLAB_ERR_NUMERIC = 3  /* solver failure or numeric invariant violation */
} ethlab_status;

/* A built model: the split Hamiltonian H = H_C + I (x) H_B plus its spec. */
typedef struct ethlab_model ethlab_model;

/* A diagonalized model: spectral data, tau cache, bath eigenbasis. */
typedef struct ethlab_session ethlab_session;

ETHLAB_API const char* ethlab_version(void);

/* Thread-local message describing the most recent failure. */
ETHLAB_API const char* ethlab_last_error(void);

ETHLAB_API void ethlab_string_free(char* s);

/* ---- models ---- */

ETHLAB_API ethlab_status ethlab_model_build(const char* spec_json,
                                            ethlab_model** out);
ETHLAB_API void ethlab_model_free(ethlab_model* m);
ETHLAB_API ethlab_status ethlab_model_hash(const ethlab_model* m, char** out);
ETHLAB_API ethlab_status ethlab_model_spec_json(const ethlab_model* m,
                                                char** out);
/* Residual checks of the H = H_C + I (x) H_B split -> split_report JSON. */
ETHLAB_API ethlab_status ethlab_model_verify(const ethlab_model* m, char** out);
/* Bath micro-canonical profile -> thermo_profile JSON.
 * params: {"kernel_width": 0.0, "grid_points": 512} (0 -> defaults) */
ETHLAB_API ethlab_status ethlab_model_thermo_profile(const ethlab_model* m,
                                                     const char* params_json,
                                                     char** out);

/* ---- spectral sessions ---- */

ETHLAB_API ethlab_status ethlab_diagonalize(const ethlab_model* m,
                                            ethlab_session** out);
ETHLAB_API void ethlab_session_free(ethlab_session* s);
/* Writes meta.json, model.json, energies.f64, eigvecs.c128 (+ tau.c128). */
ETHLAB_API ethlab_status ethlab_session_save(const ethlab_session* s,
                                             const char* dir, int with_tau);
ETHLAB_API ethlab_status ethlab_session_load(const char* dir,
                                             ethlab_session** out);
ETHLAB_API ethlab_status ethlab_session_info(const ethlab_session* s,
                                             char** out);

/* ---- scans; params/report schemas in the README ---- */

/* {"emin", "emax", "delta"} or {"emin", "emax", "deltas": [...]} */
ETHLAB_API ethlab_status ethlab_eth_scan(const ethlab_session* s,
                                         const char* params_json, char** out);
/* {"E", "delta_b", "budget": {...}, "omega": {...}, "kernel_width"} */
ETHLAB_API ethlab_status ethlab_therm_scan(const ethlab_session* s,
                                           const char* params_json, char** out);
/* {"e_points", "deltab_points", "emin", "emax", "budget", ...} */
ETHLAB_API ethlab_status ethlab_bounds_grid(const ethlab_session* s,
                                            const char* params_json, char** out);
/* {"emin", "emax", "e_bins", "deltab_points", "budget", ...} */
ETHLAB_API ethlab_status ethlab_theorem1_audit(const ethlab_session* s,
                                               const char* params_json,
                                               char** out);
/* {"state": {...}, "times": [...]} or {"state", "tmax", "points", "spacing"} */
ETHLAB_API ethlab_status ethlab_evolve(const ethlab_session* s,
                                       const char* params_json, char** out);

/* Writes <stem>.json ({tag, E, delta, count, indices | indices_path}) into
 * dir; index sets larger than 64 go to a <stem>.indices.u32 sidecar
 * (little-endian uint32). params: {"tag": "bath"|"global", "E":..,
 * "delta":..}. Returns the report JSON. */
ETHLAB_API ethlab_status ethlab_write_shell_report(const ethlab_session* s,
                                                   const char* params_json,
                                                   const char* dir,
                                                   const char* stem, char** out);

/* ---- renderings of finished reports ---- */

ETHLAB_API ethlab_status ethlab_report_csv(const char* report_json, char** out);
/* kind: "eth" | "bounds" | "thermo"; bounds plots may need model constants,
 * passed as {"norm_hc":..., "d_S":...} in aux_json (may be NULL). */
ETHLAB_API ethlab_status ethlab_render_svg(const char* report_json,
                                           const char* kind,
                                           const char* aux_json, char** out);

#ifdef __cplusplus
}
#endif

#endif /* ETHLAB_H */
