/*
 * C interface to the ambiguity-lab guessing-secrecy library.
 *
 * Every fallible function returns an AL_STATUS_* code and writes its
 * result through out pointers. AlJoint and AlEncoder are opaque handles:
 * create them with the matching constructor and release them with the
 * matching *_free. Strings returned through char ** are owned by the
 * caller and must be released with al_string_free().
 *
 * After any non-zero status, al_last_error_message() returns a
 * NUL-terminated description; the pointer stays valid until the next
 * failing call on the same thread.
 */

#ifndef AMBIGUITY_LAB_H
#define AMBIGUITY_LAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* The call succeeded. */
#define AL_STATUS_OK 0
/* A required pointer argument was null. */
#define AL_STATUS_NULL_ARGUMENT 1
/* Malformed input: bad JSON, a table that is not a distribution, or I/O. */
#define AL_STATUS_INVALID_INPUT 2
/* Arguments outside the supported domain, including rejected splits. */
#define AL_STATUS_DOMAIN 3
/* An exhaustive search would exceed the configured budget. */
#define AL_STATUS_BUDGET 4
/* An internal invariant failed; report the last error message. */
#define AL_STATUS_INTERNAL 5

/* Opaque handle over a joint source table. */
typedef struct AlJoint AlJoint;

/* Opaque handle over a two-hint encoder. */
typedef struct AlEncoder AlEncoder;

/*
 * Plain-data mirror of the split parameters. `version` is 0 for the
 * guessing reader and 1 for the list reader; `relabeled` is nonzero when
 * the picker swapped the two hint labels so the second is the smaller.
 */
typedef struct AlSplitParams {
  uint64_t c_s;
  uint64_t c_1;
  uint64_t c_2;
  uint64_t m1_size;
  uint64_t m2_size;
  int version;
  int relabeled;
} AlSplitParams;

/* Library version as a static NUL-terminated string. */
const char *al_version(void);

/* Description of the most recent failure on this thread. */
const char *al_last_error_message(void);

/* Release a string produced by this library. */
void al_string_free(char *s);

/* Parse a joint table from its JSON form. */
int al_joint_from_json(const char *json, AlJoint **out);

/* Serialize a joint table to JSON; free the result with al_string_free(). */
int al_joint_to_json(const AlJoint *joint, char **out);

/* Uniform secret on x_size points with a single trivial observation. */
int al_joint_uniform(size_t x_size, AlJoint **out);

/* Release a joint table handle. */
void al_joint_free(AlJoint *joint);

/* Secret alphabet size, or 0 when the handle is null. */
size_t al_joint_x_size(const AlJoint *joint);

/* Observation alphabet size, or 0 when the handle is null. */
size_t al_joint_y_size(const AlJoint *joint);

/* Entropy order 1/(1+rho) matching a guessing-moment order rho. */
double al_tilt_order(double rho);

/* Conditional Renyi entropy (Arimoto form) of the table at alpha. */
int al_entropy(const AlJoint *joint, double alpha, double *out);

/* Best attainable guessing moment min_G E[G(X|Y)^rho]. */
int al_min_guess_moment(const AlJoint *joint, double rho, double *out);

/* E[ceil(G*(X|Y)/z_size)^rho] for the optimal guesser. */
int al_ceiled_min_guess_moment(const AlJoint *joint, size_t z_size, double rho,
                               double *out);

/* Entropy sandwich on the minimal guessing moment. */
int al_arikan_bounds(const AlJoint *joint, double rho, double *lower,
                     double *upper);

/* Pick a guessing-version split for the given hint alphabet sizes. */
int al_choose_split(const AlJoint *joint, uint64_t m1_size, uint64_t m2_size,
                    double rho, AlSplitParams *out);

/* Build the guessing-version encoder for an admissible split. */
int al_build_guess_encoder(const AlJoint *joint, const AlSplitParams *params,
                           uint64_t seed, AlEncoder **out);

/* Build the list-version encoder for an admissible split. */
int al_build_list_encoder(const AlJoint *joint, const AlSplitParams *params,
                          uint64_t seed, AlEncoder **out);

/* Parse an encoder from its JSON form. */
int al_encoder_from_json(const char *json, AlEncoder **out);

/* Serialize an encoder to JSON; free the result with al_string_free(). */
int al_encoder_to_json(const AlEncoder *encoder, char **out);

/* Release an encoder handle. */
void al_encoder_free(AlEncoder *encoder);

/* Two-hint reader's guessing ambiguity E[G(X|Y,M1,M2)^rho]. */
int al_bob_guess_ambiguity(const AlEncoder *encoder, const AlJoint *joint,
                           double rho, double *out);

/* Two-hint reader's list ambiguity E[|L(Y,M1,M2)|^rho]. */
int al_bob_list_ambiguity(const AlEncoder *encoder, const AlJoint *joint,
                          double rho, double *out);

/* Genie-aided eavesdropper value of the per-hint-optimal strategy pair. */
int al_eve_feasible_pair(const AlEncoder *encoder, const AlJoint *joint,
                         double rho, double *out);

/* Alternating best-response search for the eavesdropper's strategy pair. */
int al_eve_alternating(const AlEncoder *encoder, const AlJoint *joint,
                       double rho, uint32_t restarts, uint64_t seed,
                       double *out);

/* Exhaustive eavesdropper optimum under a configuration/time budget. */
int al_eve_brute(const AlEncoder *encoder, const AlJoint *joint, double rho,
                 uint64_t max_configs, double max_seconds, double *out);

/* Closed-form reader bounds (achievability, converse) for a split. */
int al_bob_bounds(const AlSplitParams *params, const AlJoint *joint,
                  double rho, double *achievability, double *converse);

/*
 * Closed-form eavesdropper sandwich (lower, upper) for a split, given the
 * reader's realized guessing ambiguity.
 */
int al_eve_bounds(const AlSplitParams *params, const AlJoint *joint,
                  double rho, double bob_value, double *lower, double *upper);

/* Maximal total-variation gap between the pad digit and uniform. */
int al_pad_secrecy_deviation(const AlEncoder *encoder, double *out);

/*
 * Build and score a scheme in one call, returning the report as JSON.
 * eve_mode is 0 (formula), 1 (heuristic), or 2 (exact). Free the returned
 * string with al_string_free().
 */
int al_evaluate_json(const AlJoint *joint, const AlSplitParams *params,
                     double rho, int eve_mode, uint32_t restarts,
                     uint64_t seed, uint64_t max_configs, double max_seconds,
                     char **out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AMBIGUITY_LAB_H */
