/* C interface to the FEM-NN hybrid surrogate toolkit.
 *
 * All commands take a JSON configuration string (see README for the schema),
 * write their artifacts into the configured output directory and return a
 * femnn_status. On failure a human-readable message is copied into the
 * caller-provided error buffer (always NUL-terminated, may be truncated).
 */
#ifndef FEMNN_H
#define FEMNN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum femnn_status {
    FEMNN_OK = 0,
    FEMNN_ERR_CONFIG = 1,  /* usage / config / file-format problem */
    FEMNN_ERR_NUMERIC = 2, /* divergence, singular matrix, non-convergence */
    FEMNN_ERR_INTERNAL = 3
} femnn_status;

const char* femnn_version(void);

/* Commands. config_json must be a JSON object string. */
femnn_status femnn_train_forward(const char* config_json, char* err, size_t err_cap);
femnn_status femnn_predict(const char* config_json, char* result_json, size_t result_cap,
                           char* err, size_t err_cap);
femnn_status femnn_compare_baseline(const char* config_json, char* err, size_t err_cap);
femnn_status femnn_uq(const char* config_json, char* err, size_t err_cap);
femnn_status femnn_identify(const char* config_json, char* err, size_t err_cap);
femnn_status femnn_generate_observations(const char* config_json, char* err, size_t err_cap);

/* Opaque handle over a serialized surrogate model, for embedding. */
typedef struct femnn_model femnn_model;

femnn_status femnn_model_open(const char* path, femnn_model** out, char* err, size_t err_cap);
void femnn_model_close(femnn_model* model);
size_t femnn_model_input_size(const femnn_model* model);
size_t femnn_model_output_size(const femnn_model* model);
/* y must hold femnn_model_output_size(model) doubles. */
femnn_status femnn_model_eval(const femnn_model* model, const double* x, size_t n_x,
                              double* y, size_t y_cap, char* err, size_t err_cap);

#ifdef __cplusplus
}
#endif

#endif /* FEMNN_H */
