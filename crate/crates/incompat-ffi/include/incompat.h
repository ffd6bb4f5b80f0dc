/* C interface for the incompat library.
 * Kept in sync with crates/incompat-ffi/src/lib.rs by hand; the integration
 * test in that crate exercises every symbol declared here. */

#ifndef INCOMPAT_H
#define INCOMPAT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Non-negative values returned by incompat_check are verdicts:
 * 0 compatible, 1 incompatible, 2 undecided. Negative values are errors. */
#define INCOMPAT_OK 0
#define INCOMPAT_ERR_NULL_ARG (-1)
#define INCOMPAT_ERR_UTF8 (-2)
#define INCOMPAT_ERR_JSON (-3)
#define INCOMPAT_ERR_DOMAIN (-4)
#define INCOMPAT_ERR_PANIC (-5)

/* Opaque set of finite-outcome observables sharing one dimension. */
typedef struct IncompatSet IncompatSet;

/* Opaque unital channel. */
typedef struct IncompatChannel IncompatChannel;

/* Message from the most recent failing call on this thread, or NULL. The
 * pointer stays valid until the next failing call on the same thread. */
const char *incompat_last_error(void);

/* Builds a set from a JSON array of observables:
 *   [{"dim": 2, "effects": [{"label": 1, "matrix": [[[re, im], ...], ...]},
 *                           ...]}, ...]
 * Returns NULL on failure. Free with incompat_set_free. */
IncompatSet *incompat_set_from_json(const char *json);

void incompat_set_free(IncompatSet *set);

/* Number of observables in the set; 0 for NULL. */
size_t incompat_set_len(const IncompatSet *set);

/* Replaces every observable A by t A + (1 - t) tr[A] I / d. t in (0, 1]. */
int incompat_set_depolarize(IncompatSet *set, double t);

/* Builds a channel from JSON. Accepted top-level keys: "kraus" (with "dim"),
 * "choi" (with "dim"), "white_noise" {"d", "t"}, "noisy_mixture"
 * {"t", "theta", "eta"}, "measure_prepare" {"povm", "states"}, or "compose"
 * [first, second]. Returns NULL on failure. */
IncompatChannel *incompat_channel_from_json(const char *json);

void incompat_channel_free(IncompatChannel *channel);

/* Hilbert space dimension; 0 for NULL. */
size_t incompat_channel_dim(const IncompatChannel *channel);

/* Replaces the set with its image under the channel (Heisenberg picture). */
int incompat_channel_apply(const IncompatChannel *channel, IncompatSet *set);

/* Joint measurability test. Returns the verdict (0 compatible,
 * 1 incompatible, 2 undecided) or a negative error code. When result_json is
 * non-NULL it receives the full result document; free it with
 * incompat_string_free. tol must be positive; 1e-7 matches the CLI default. */
int incompat_check(const IncompatSet *set, double tol, char **result_json);

/* White-noise robustness search. Writes the result document to result_json
 * and returns INCOMPAT_OK, or a negative error code. resolution is the final
 * bracket width, e.g. 1e-3. */
int incompat_robustness(const IncompatSet *set, double tol, double resolution,
                        char **result_json);

/* Classifies the channel for n = 2..max_n and writes the report document to
 * report_json. Returns INCOMPAT_OK or a negative error code. */
int incompat_classify(const IncompatChannel *channel, size_t max_n, double tol,
                      char **report_json);

/* Releases a string returned through an out parameter. NULL is ignored. */
void incompat_string_free(char *s);

/* Library version as a static string. */
const char *incompat_version(void);

#ifdef __cplusplus
}
#endif

#endif /* INCOMPAT_H */
