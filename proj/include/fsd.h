/*
 * fsd - fog-assisted unstable-sensor detection with encrypted aggregation.
 *
 * C interface to the fsd shared library. All functions return fsd_status;
 * on failure fsd_last_error() carries a thread-local description. Strings
 * returned through char** out-parameters are malloc'd; release them with
 * fsd_string_free().
 */
#ifndef FSD_H
#define FSD_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fsd_status {
    FSD_OK = 0,
    FSD_ERR_ARGUMENT = 1,
    FSD_ERR_RANGE = 2,
    FSD_ERR_CAPACITY = 3,
    FSD_ERR_RANDOMNESS = 4,
    FSD_ERR_CIPHERTEXT = 5,
    FSD_ERR_KEYGEN = 6,
    FSD_ERR_VERIFY = 7,
    FSD_ERR_REPLAY = 8,
    FSD_ERR_TAMPER = 9,
    FSD_ERR_PARSE = 10,
    FSD_ERR_IO = 11,
    FSD_ERR_TRAINING = 12,
    FSD_ERR_INTERNAL = 13
} fsd_status;

const char* fsd_version(void);
const char* fsd_last_error(void);
void fsd_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Additively homomorphic keypair handle. Big integers cross this API  */
/* as decimal strings.                                                 */

typedef struct fsd_paillier fsd_paillier;

/* kappa_bits is the prime size (modulus comes out at 2*kappa_bits).
 * Sizes under 1024 need allow_insecure. Pass use_seed=1 for a
 * deterministic keypair derived from seed, 0 for system randomness. */
fsd_status fsd_paillier_keygen(unsigned kappa_bits, int allow_insecure,
                               unsigned long long seed, int use_seed,
                               fsd_paillier** out);
fsd_status fsd_paillier_from_primes(const char* p_dec, const char* q_dec,
                                    fsd_paillier** out);
void fsd_paillier_free(fsd_paillier* kp);

fsd_status fsd_paillier_public_json(const fsd_paillier* kp, char** out_json);
fsd_status fsd_paillier_private_json(const fsd_paillier* kp, char** out_json);

/* r_dec may be NULL to draw fresh randomness. */
fsd_status fsd_paillier_encrypt(const fsd_paillier* kp, const char* m_dec,
                                const char* r_dec, char** out_ct_dec);
fsd_status fsd_paillier_decrypt(const fsd_paillier* kp, const char* ct_dec,
                                char** out_m_dec);
/* Ciphertext combinators: add/subtract plaintexts, scale by a constant. */
fsd_status fsd_paillier_add(const fsd_paillier* kp, const char* c1_dec,
                            const char* c2_dec, char** out_ct_dec);
fsd_status fsd_paillier_scale(const fsd_paillier* kp, const char* c_dec,
                              const char* k_dec, char** out_ct_dec);
fsd_status fsd_paillier_subtract(const fsd_paillier* kp, const char* c1_dec,
                                 const char* c2_dec, char** out_ct_dec);

/* ------------------------------------------------------------------ */
/* Protocol world: sensor, two fog layers and control center driven    */
/* over an in-process channel. Configured by JSON (see README).        */

typedef struct fsd_world fsd_world;

fsd_status fsd_world_create(const char* config_json, fsd_world** out);
void fsd_world_free(fsd_world* w);
fsd_status fsd_world_params_json(const fsd_world* w, char** out_json);
/* samples_json: array of N rows, each an array of l integers in [0, d].
 * The returned trace JSON records messages, the decoded scatter matrix,
 * dispersion, verdict and per-entity operation counters. */
fsd_status fsd_world_run_round(fsd_world* w, const char* samples_json,
                               char** out_trace_json);

/* ------------------------------------------------------------------ */
/* Coarse operations backing the CLI subcommands. Each takes the       */
/* config JSON documented in the README and yields its output text.    */

fsd_status fsd_keygen_json(const char* config_json, char** out_json);
fsd_status fsd_capacity_csv(const char* config_json, char** out_csv);
fsd_status fsd_ingest_check_json(const char* config_json, char** out_json);
fsd_status fsd_train_json(const char* config_json, char** out_json);
fsd_status fsd_evaluate_csv(const char* config_json, char** out_csv);
fsd_status fsd_commcost_csv(const char* config_json, char** out_csv);
/* Writes round traces as JSON lines to trace_path (NULL to skip) and
 * returns the run summary. FSD_ERR_TAMPER reports a tamper alarm. */
fsd_status fsd_simulate(const char* config_json, const char* trace_path,
                        char** out_summary_json);

#ifdef __cplusplus
}
#endif

#endif /* FSD_H */
