/* Receive-path shim boundary.
 *
 * The shim library supplies csp_can2_rx; the host supplies buffer and
 * queue services through the callback table below. Both sides agree on
 * these signatures, the status codes, and the ownership rule:
 *
 *   - acquire_buffer returns a writable buffer at least max_data_len
 *     bytes long, or NULL when none is free.
 *   - a token handed to enqueue_packet belongs to the host again;
 *     every other acquired token comes back through release_buffer
 *     exactly once.
 *
 * shim_init must complete before the first csp_can2_rx call, and rx
 * calls must be externally serialized. The shim never unwinds an error
 * across this boundary; every outcome is a status code.
 */

#ifndef CSP_SHIM_H
#define CSP_SHIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CSP_SHIM_OK 0        /* frame accepted (consumed or delivered) */
#define CSP_SHIM_EINVAL (-1) /* bad argument or shim not initialized */
#define CSP_SHIM_ENOBUF (-2) /* no buffer available for a new stream */
#define CSP_SHIM_EDROPPED (-3) /* frame dropped by protocol rules */

typedef struct csp_shim_host_env {
    void *context;
    uint8_t *(*acquire_buffer)(void *context);
    void (*release_buffer)(void *context, uint8_t *token);
    void (*enqueue_packet)(void *context, uint8_t *token, uint16_t length,
                           uint32_t header_word);
} csp_shim_host_env_t;

/* One-shot initialization. config_json may be NULL for defaults.
 * Returns CSP_SHIM_OK, or CSP_SHIM_EINVAL on bad arguments or repeat
 * initialization. */
int32_t shim_init(const csp_shim_host_env_t *env, const char *config_json);

/* The replaced receive entry point. id is masked to 29 bits; data must
 * be readable for dlc bytes (dlc > 8 is rejected before any read);
 * *task_woken, when non-NULL, is set to 0. */
int32_t csp_can2_rx(void *iface, uint32_t id, const uint8_t *data,
                    uint8_t dlc, int *task_woken);

#ifdef __cplusplus
}
#endif

#endif /* CSP_SHIM_H */
