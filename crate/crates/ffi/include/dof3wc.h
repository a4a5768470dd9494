#ifndef DOF3WC_H
#define DOF3WC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Dof3wcStatus {
  DOF3WC_STATUS_OK = 0,
  DOF3WC_STATUS_NULL_POINTER = 1,
  DOF3WC_STATUS_INVALID_UTF8 = 2,
  DOF3WC_STATUS_INVALID_ARGUMENT = 3,
  DOF3WC_STATUS_PARSE_ERROR = 4,
  DOF3WC_STATUS_INFEASIBLE = 5,
  DOF3WC_STATUS_UNBOUNDED = 6,
  DOF3WC_STATUS_INTERNAL = 7,
} Dof3wcStatus;

typedef enum Dof3wcRegionForm {
  DOF3WC_REGION_FORM_RAW = 0,
  DOF3WC_REGION_FORM_COMPACT = 1,
  DOF3WC_REGION_FORM_NONINTERMITTENT = 2,
  DOF3WC_REGION_FORM_CUTSET = 3,
  DOF3WC_REGION_FORM_GENIE = 4,
} Dof3wcRegionForm;

// Antenna counts and intermittency of a three-way channel.
typedef struct Dof3wcConfig Dof3wcConfig;

// A system of linear inequalities over named variables.
typedef struct Dof3wcSystem Dof3wcSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the latest failure on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *dof3wc_last_error(void);

// `s` must be NULL or a string returned by this library, not yet freed.
void dof3wc_string_free(char *s);

// Antenna counts `m1, m2, m3 >= 1` and `tau = tau_num / tau_den` in [0, 1].
enum Dof3wcStatus dof3wc_config_new(uint32_t m1,
                                    uint32_t m2,
                                    uint32_t m3,
                                    int64_t tau_num,
                                    int64_t tau_den,
                                    struct Dof3wcConfig **out);

// Parses `{"M":[m1,m2,m3],"tau":"p/q"}`.
enum Dof3wcStatus dof3wc_config_from_json(const char *json, struct Dof3wcConfig **out);

// `config` must be NULL or a handle from this library, not yet freed.
void dof3wc_config_free(struct Dof3wcConfig *config);

// Builds one of the DoF regions over `d12, d13, d21, d23, d31, d32`.
enum Dof3wcStatus dof3wc_region_build(const struct Dof3wcConfig *config,
                                      enum Dof3wcRegionForm form,
                                      struct Dof3wcSystem **out);

enum Dof3wcStatus dof3wc_system_from_json(const char *json, struct Dof3wcSystem **out);

enum Dof3wcStatus dof3wc_system_to_json(const struct Dof3wcSystem *system, char **out);

// `system` must be NULL or a handle from this library, not yet freed.
void dof3wc_system_free(struct Dof3wcSystem *system);

// Number of inequalities in `system`, or 0 for NULL.
size_t dof3wc_system_len(const struct Dof3wcSystem *system);

// Membership of a point given as a JSON object of `"p/q"` strings or integers.
enum Dof3wcStatus dof3wc_system_check_point(const struct Dof3wcSystem *system,
                                            const char *point_json,
                                            bool *out);

// Whether every point of `p` lies in `q` (same variables required).
enum Dof3wcStatus dof3wc_system_is_subset(const struct Dof3wcSystem *p,
                                          const struct Dof3wcSystem *q,
                                          bool *out);

// Maximum of the sum of all six DoF variables over `system`, as `"p/q"`.
enum Dof3wcStatus dof3wc_system_max_sum(const struct Dof3wcSystem *system, char **out);

// Achievable sum-DoF in closed form, as `"p/q"`.
enum Dof3wcStatus dof3wc_sum_dof_formula(const struct Dof3wcConfig *config, char **out);

// Integer stream allocation for `dof` (`"d12,d13,d21,d23,d31,d32"`), as JSON.
enum Dof3wcStatus dof3wc_allocate_json(const struct Dof3wcConfig *config,
                                       const char *dof,
                                       char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOF3WC_H */
