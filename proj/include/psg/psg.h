/*
 * psg: Potts spin-glass numerical laboratory, C interface.
 *
 * All functions return a psg_status; on failure a description of the most recent error on
 * the calling thread is available from psg_last_error(). Objects are opaque handles owned
 * by the caller and released with the matching *_free function. Strings returned through
 * char** out-parameters are released with psg_string_free.
 *
 * Colors are 1-based at this interface.
 */
#ifndef PSG_PSG_H
#define PSG_PSG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PSG_BUILDING_LIBRARY)
#    define PSG_API __declspec(dllexport)
#  else
#    define PSG_API __declspec(dllimport)
#  endif
#else
#  define PSG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum psg_status {
  PSG_OK = 0,
  PSG_ERR_INVALID_ARGUMENT = 1,
  PSG_ERR_DIMENSION_MISMATCH = 2,
  PSG_ERR_OUT_OF_RANGE = 3,
  PSG_ERR_DIVISIBILITY = 4,
  PSG_ERR_CAP_EXCEEDED = 5,
  PSG_ERR_INFEASIBLE = 6,
  PSG_ERR_PRECONDITION = 7,
  PSG_ERR_NOT_CONVERGED = 8,
  PSG_ERR_INTERNAL = 99
} psg_status;

typedef enum psg_hamiltonian { PSG_RAW = 0, PSG_CENTERED = 1 } psg_hamiltonian;

typedef enum psg_branch { PSG_BRANCH_FIRST = 0, PSG_BRANCH_SECOND = 1, PSG_BRANCH_TIE = 2 } psg_branch;

typedef struct psg_coupling psg_coupling;
typedef struct psg_config psg_config;
typedef struct psg_experiment psg_experiment;
typedef struct psg_table psg_table;

PSG_API const char* psg_version(void);
PSG_API const char* psg_last_error(void);
PSG_API const char* psg_status_name(psg_status status);
PSG_API void psg_string_free(char* text);

/* Disorder. Gaussian entries k = i*N + j come from a counter-based SplitMix64 stream. */
PSG_API psg_status psg_coupling_gaussian(int n, uint64_t seed, psg_coupling** out);
PSG_API psg_status psg_coupling_from_values(int n, const double* values, psg_coupling** out);
PSG_API void psg_coupling_free(psg_coupling* g);
PSG_API int psg_coupling_size(const psg_coupling* g);
PSG_API psg_status psg_coupling_values(const psg_coupling* g, double* out, size_t len);
PSG_API uint64_t psg_child_seed(uint64_t root, uint64_t index);

/* Configurations. */
PSG_API psg_status psg_config_create(int kappa, const int* colors, int n, psg_config** out);
PSG_API void psg_config_free(psg_config* sigma);
PSG_API psg_status psg_hamiltonian_value(const psg_config* sigma, const psg_coupling* g, psg_hamiltonian kind,
                                         double* out);
PSG_API psg_status psg_delta_energy(const psg_config* sigma, const psg_coupling* g, int site, int new_color,
                                    double* out);
PSG_API psg_status psg_covariance(const psg_config* sigma, const psg_config* tau, psg_hamiltonian kind, double* out);
/* Overlap counts N r_ab, row-major kappa x kappa. */
PSG_API psg_status psg_overlap_counts(const psg_config* sigma, const psg_config* tau, int* out, size_t len);

/* Exact enumeration. sector is "all", "balanced" or "fixed:c1,...,ck". */
PSG_API psg_status psg_log_partition(const psg_coupling* g, double beta, int kappa, const char* sector,
                                     psg_hamiltonian kind, double* out);
PSG_API psg_status psg_second_moment_ratio(int n, double beta, int kappa, double* out);
PSG_API psg_status psg_uncentered_log_ratio(int n, double beta, int kappa, const char* sector, double* out);
PSG_API psg_status psg_overlap_law(int n, int kappa, const int* counts, double* out);
PSG_API psg_status psg_shell_count(int n, int kappa, int l, uint64_t* out);

/* Rate functions and thresholds. Matrices are row-major kappa x kappa. */
PSG_API psg_status psg_kl_to_uniform(int kappa, const double* r, double* out);
PSG_API psg_status psg_beta_kappa(int kappa, double* value, psg_branch* branch);
PSG_API psg_status psg_annealed_limit(int kappa, double beta, double* out);
PSG_API psg_status psg_ew90_critical(int kappa, double* out);
PSG_API psg_status psg_zero_temp_bounds(int kappa, double* balanced_upper, double* unconstrained_lower, int* breaks);
PSG_API int psg_min_breaking_kappa(void);
/* argmin may be NULL; otherwise it receives kappa*kappa entries. */
PSG_API psg_status psg_exponent_gap(int kappa, double beta, double delta, double* minimum, double* argmin);

/* Experiments. psg_experiment_parse performs all validation; run errors are numerical. */
PSG_API psg_status psg_experiment_parse(const char* spec_json, psg_experiment** out);
PSG_API void psg_experiment_free(psg_experiment* spec);
PSG_API psg_status psg_experiment_canonical(const psg_experiment* spec, char** out);
PSG_API psg_status psg_experiment_command(const psg_experiment* spec, char** out);
PSG_API psg_status psg_experiment_format(const psg_experiment* spec, char** out);
/* workers <= 0 uses every available core; results do not depend on it. */
PSG_API psg_status psg_experiment_run(const psg_experiment* spec, int workers, psg_table** out);
/* Recovers the spec embedded in a CSV or JSON output. */
PSG_API psg_status psg_spec_from_output(const char* rendered, char** out);
/* NULL-terminated list of command names; static storage. */
PSG_API const char* const* psg_experiment_commands(void);

PSG_API void psg_table_free(psg_table* table);
PSG_API size_t psg_table_rows(const psg_table* table);
PSG_API size_t psg_table_columns(const psg_table* table);
PSG_API psg_status psg_table_to_csv(const psg_table* table, char** out);
PSG_API psg_status psg_table_to_json(const psg_table* table, char** out);

#ifdef __cplusplus
}
#endif

#endif /* PSG_PSG_H */
