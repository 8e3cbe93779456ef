/* Miniature host application: a static buffer slab, a packet queue, a
 * frames-file reader, and a printer. The receive function itself is not
 * defined here; it is declared in csp_shim.h and linked in from the
 * shim library. Output must match the reference reassembler tool line
 * for line: "header=<8 hex> len=<n> data=<hex>".
 */

#include <stdint.h>
#include <stdio.h>
#include <string.h>

#include "csp_shim.h"

#define SLAB_COUNT 10
#define SLAB_SIZE 256
#define QUEUE_DEPTH 16

static uint8_t slabs[SLAB_COUNT][SLAB_SIZE];
static int slab_used[SLAB_COUNT];

typedef struct {
    uint8_t *token;
    uint16_t length;
    uint32_t header;
} queued_packet_t;

static queued_packet_t queue[QUEUE_DEPTH];
static int q_head, q_count;

static uint8_t *host_acquire(void *context)
{
    (void)context;
    for (int i = 0; i < SLAB_COUNT; i++) {
        if (!slab_used[i]) {
            slab_used[i] = 1;
            return slabs[i];
        }
    }
    return NULL;
}

static void host_release(void *context, uint8_t *token)
{
    (void)context;
    for (int i = 0; i < SLAB_COUNT; i++) {
        if (token == slabs[i]) {
            slab_used[i] = 0;
            return;
        }
    }
}

static void host_enqueue(void *context, uint8_t *token, uint16_t length,
                         uint32_t header)
{
    if (q_count == QUEUE_DEPTH) {
        host_release(context, token);
        return;
    }
    int tail = (q_head + q_count) % QUEUE_DEPTH;
    queue[tail].token = token;
    queue[tail].length = length;
    queue[tail].header = header;
    q_count++;
}

static void drain_queue(void)
{
    while (q_count > 0) {
        queued_packet_t entry = queue[q_head];
        q_head = (q_head + 1) % QUEUE_DEPTH;
        q_count--;
        printf("header=%08x len=%u data=", entry.header,
               (unsigned)entry.length);
        for (uint16_t i = 0; i < entry.length; i++) {
            printf("%02x", entry.token[i]);
        }
        printf("\n");
        host_release(NULL, entry.token);
    }
}

static int hex_digit(int c)
{
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
        return c - 'A' + 10;
    }
    return -1;
}

/* Frame line: 8 hex id digits, '#', then 0..8 hex byte pairs. Blank
 * lines and '#'-prefixed comment lines are skipped. Returns 1 on a
 * frame, 0 on a skipped line, -1 on a malformed line. */
static int parse_line(const char *line, uint32_t *id_out, uint8_t *data,
                      uint8_t *dlc_out)
{
    while (*line == ' ' || *line == '\t') {
        line++;
    }
    size_t len = strlen(line);
    while (len > 0 && (line[len - 1] == '\n' || line[len - 1] == '\r' ||
                       line[len - 1] == ' ' || line[len - 1] == '\t')) {
        len--;
    }
    if (len == 0 || line[0] == '#') {
        return 0;
    }
    if (len < 9 || line[8] != '#') {
        return -1;
    }
    uint32_t id = 0;
    for (int i = 0; i < 8; i++) {
        int digit = hex_digit(line[i]);
        if (digit < 0) {
            return -1;
        }
        id = (id << 4) | (uint32_t)digit;
    }
    size_t payload_len = len - 9;
    if (payload_len % 2 != 0 || payload_len > 16) {
        return -1;
    }
    for (size_t i = 0; i < payload_len / 2; i++) {
        int hi = hex_digit(line[9 + 2 * i]);
        int lo = hex_digit(line[9 + 2 * i + 1]);
        if (hi < 0 || lo < 0) {
            return -1;
        }
        data[i] = (uint8_t)((hi << 4) | lo);
    }
    *id_out = id & 0x1FFFFFFFu;
    *dlc_out = (uint8_t)(payload_len / 2);
    return 1;
}

int main(int argc, char **argv)
{
    if (argc != 2) {
        fprintf(stderr, "usage: %s FRAMES_FILE\n", argv[0]);
        return 1;
    }
    FILE *fh = fopen(argv[1], "r");
    if (fh == NULL) {
        perror(argv[1]);
        return 1;
    }

    csp_shim_host_env_t env = {NULL, host_acquire, host_release, host_enqueue};
    if (shim_init(&env, NULL) != CSP_SHIM_OK) {
        fprintf(stderr, "shim_init failed\n");
        fclose(fh);
        return 1;
    }

    char line[1024];
    while (fgets(line, sizeof line, fh) != NULL) {
        uint32_t id;
        uint8_t data[8];
        uint8_t dlc;
        int rc = parse_line(line, &id, data, &dlc);
        if (rc < 0) {
            fprintf(stderr, "malformed frame line: %s\n", line);
            fclose(fh);
            return 1;
        }
        if (rc == 0) {
            continue;
        }
        int woken = 0;
        /* Protocol drops produce no output line and are not errors. */
        (void)csp_can2_rx(NULL, id, data, dlc, &woken);
        drain_queue();
    }
    fclose(fh);
    drain_queue();
    return 0;
}
